#pragma once

#include <complex>
#include <span>
#include <stdexcept>
#include <vector>

#include "ramsey/analytic.hpp" // SpectrumCurve

namespace ramsey {

// Not enough data for a statistically meaningful estimate (distinct from a
// bad argument: the caller may retry with a longer record).
struct StatisticalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PhaseSeries {
  std::vector<double> times;
  std::vector<double> phases; // unwrapped, rad, continuous across +-pi
};

// Continuous phase of a complex field record. Rejects samples whose amplitude
// falls below 1e-6 of the median (phase undefined near zero field), naming
// the first offending index.
PhaseSeries unwrap_phase(std::span<const double> times,
                         std::span<const std::complex<double>> alphas);

enum class EstimateMethod { phase_diffusion_fit, lorentzian_fit };

struct LinewidthEstimate {
  double D_hat = 0.0;    // rad/s
  double std_err = 0.0;  // rad/s
  EstimateMethod method = EstimateMethod::phase_diffusion_fit;
  double r_squared = 0.0;
  double window_lo = 0.0; // lag window (s) or fit band (rad/s)
  double window_hi = 0.0;
  bool reliable = true;
  bool resolution_limited = false;
};

// Var[phi(t+l) - phi(t)] over the lag window, fitted through the origin as
// V(l) = D l; the standard error comes from a block bootstrap (>= 20 blocks).
// A poor linear fit (R^2 < 0.9) flags the estimate unreliable.
LinewidthEstimate phase_diffusion_fit(const PhaseSeries& series, double lag_min,
                                      double lag_max);

// Segment-averaged (Welch, Hann window) periodogram of the complex field,
// folded one-sided about the record carrier at zero offset. Normalized so a
// white complex sequence of variance s^2 sampled at dt has a flat density
// s^2 dt; the grid is omega = 2 pi k / (segment span), k = 0 .. L/2 - 1.
SpectrumCurve field_psd(std::span<const double> times,
                        std::span<const std::complex<double>> alphas,
                        std::size_t segments);

// Levenberg-Marquardt fit of amplitude / center / width; D_hat is the FWHM
// in rad/s. Flags "resolution-limited" when the fitted width is within two
// grid steps of the resolution floor.
LinewidthEstimate lorentzian_fit(const SpectrumCurve& spectrum);

// Multiplies out the mean phase slope (the record's carrier offset), leaving
// the line centered at zero. Returns the removed frequency through
// mean_frequency_out when non-null.
std::vector<std::complex<double>> demodulate_mean_frequency(
    std::span<const double> times, std::span<const std::complex<double>> alphas,
    double* mean_frequency_out = nullptr);

} // namespace ramsey
