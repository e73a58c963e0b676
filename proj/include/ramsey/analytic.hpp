#pragma once

#include <complex>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "ramsey/config.hpp"

namespace ramsey {

// Expectation values of a single atom at the three exit epochs of a
// pulse(theta) / drift(phi) / pulse(theta) sequence started from the excited
// state: A upper population, B lower population, C coherence <-i sigma_->.
struct RamseyCoefficients {
  double A0 = 0.0, A1 = 0.0, A2 = 0.0;
  double B0 = 0.0, B1 = 0.0, B2 = 0.0;
  std::complex<double> C0{0.0, 0.0}, C1{0.0, 0.0}, C2{0.0, 0.0};
};

// A and B come from the closed forms (A0 = A1 = cos^2(theta/2),
// A2 = 1 - sin^2 theta cos^2(phi/2), B_i = 1 - A_i); the complex C_i come
// from the exact two-level propagator.
RamseyCoefficients ramsey_coefficients(double theta, double phi);

// (1 - A0 + A1 - A2, B0 - B1 + B2): the upper-route and lower-route emission
// fluxes per injected atom. Population conservation makes them equal.
std::pair<double, double> excitation_flux(const RamseyCoefficients& coeffs);

struct SteadyState {
  double photon_number = 0.0; // I0 = |A_ss|^2
  double N_a_ss = 0.0;        // mean upper-state atom number
  double N_b_ss = 0.0;        // mean lower-state atom number; N_a_ss + N_b_ss = R tau
  double amplitude = 0.0;     // sqrt(I0)
};

// Empty on a dark fringe (vanishing emission flux: below threshold).
std::optional<SteadyState> steady_state(const LaserConfig& config);

// The closed-form N_a_ss/N_b_ss count each atom's two zone passages as a
// single slot; the gated in-zone sums measured trajectory-side see both
// passages, which adds R tau / 2 per level on top of the closed forms.
std::pair<double, double> gated_steady_populations(const SteadyState& ss,
                                                   const LaserConfig& config);

struct SpectrumPoint {
  double omega = 0.0; // Fourier frequency, rad/s
  double value = 0.0; // spectral density
};
using SpectrumCurve = std::vector<SpectrumPoint>;

// Phase-fluctuation spectral density (delta phi^2)_omega on a strictly
// positive grid. omega^2 * value -> D_full as omega -> 0.
SpectrumCurve phase_noise_spectrum(const LaserConfig& config,
                                   std::span<const double> omega_grid);

struct LinewidthResult {
  double D_full = 0.0;   // phase-diffusion coefficient, rad/s
  double D_approx = 0.0; // bad-cavity approximation (2g^2/kappa)[2 - p sin^2 th sin^2 phi]
  double D_ST = 0.0;     // g^2 N_a_ss / (I0 gamma_ab); +inf when gamma_ab = 0
  double D_Ram = 0.0;    // g^2 R / (2 I0 gamma_ab^2); +inf when gamma_ab = 0
  double hz_full = 0.0;
  double hz_approx = 0.0;
};

// D_full is evaluated in the cancelled form (gamma_ab^2 absorbed into D_ST,
// D_Ram), so it stays finite for gamma_ab -> 0. Empty on dark fringes.
std::optional<LinewidthResult> linewidth_full(const LaserConfig& config);

// Exactly (2 g^2 / kappa) [2 - p sin^2(theta) sin^2(phi)].
double linewidth_approx(const LaserConfig& config);

struct FringePoint {
  double phi = 0.0;
  std::optional<double> D_full; // empty on dark fringes
  double D_approx = 0.0;
};

// Evaluates the linewidth over a drift-phase grid, holding everything else
// in the config fixed (delta2 is rescaled point by point).
std::vector<FringePoint> fringe_sweep(const LaserConfig& config,
                                      std::span<const double> phi_grid);

} // namespace ramsey
