#include "ramsey/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "ramsey/bloch.hpp"

namespace ramsey {

namespace {

// Below this emission flux per atom the laser is treated as dark. Exact dark
// points (theta = pi, phi = pi, ...) land around 1e-32 in double arithmetic.
constexpr double k_flux_threshold = 1.0e-24;

constexpr double k_two_pi = 2.0 * std::numbers::pi;

double clamp_p(double p) { return std::clamp(p, 0.0, 1.0); }

double fringe_bracket(double theta, double phi, double p) {
  const double s_theta = std::sin(theta);
  const double s_phi = std::sin(phi);
  return 2.0 - clamp_p(p) * s_theta * s_theta * s_phi * s_phi;
}

std::optional<SteadyState> steady_state_at(const LaserConfig& config, double theta,
                                           double phi) {
  const auto coeffs = ramsey_coefficients(theta, phi);
  const double flux = coeffs.B0 - coeffs.B1 + coeffs.B2;
  if (flux <= k_flux_threshold) return std::nullopt;

  const double R = config.pump.R;
  const double kappa = config.cavity.kappa;
  const double g = config.cavity.g;
  const double tau = config.geometry.tau;

  SteadyState ss;
  ss.photon_number = R * flux / kappa;
  ss.amplitude = std::sqrt(ss.photon_number);

  // C0 - C1 + C2 is real for every (theta, phi); taking the real part only
  // sheds roundoff dust.
  const double c_comb = (coeffs.C0 - coeffs.C1 + coeffs.C2).real();
  const double correction = c_comb / (g * tau) * std::sqrt(kappa / (R * flux));
  ss.N_a_ss = 0.5 * R * tau * (1.0 + correction);
  ss.N_b_ss = 0.5 * R * tau * (1.0 - correction);
  return ss;
}

// gamma_ab^2 * {D_ST + D_Ram * bracket} with the gamma_ab^2 cancelled
// symbolically, so the gamma_ab -> 0 limit is finite.
double cancelled_noise_numerator(const LaserConfig& config, const SteadyState& ss,
                                 double bracket) {
  const double g2 = config.cavity.g * config.cavity.g;
  return g2 * (config.atom.gamma_ab * ss.N_a_ss + 0.5 * config.pump.R * bracket) /
         ss.photon_number;
}

std::optional<LinewidthResult> linewidth_at(const LaserConfig& config, double theta,
                                            double phi) {
  const auto ss = steady_state_at(config, theta, phi);
  if (!ss) return std::nullopt;

  const double g2 = config.cavity.g * config.cavity.g;
  const double gamma_ab = config.atom.gamma_ab;
  const double half_width = 0.5 * config.cavity.kappa + gamma_ab;
  const double bracket = fringe_bracket(theta, phi, config.pump.p);
  const double q = cancelled_noise_numerator(config, *ss, bracket);

  LinewidthResult lw;
  lw.D_full = q / (half_width * half_width);
  lw.D_approx = 2.0 * g2 / config.cavity.kappa * bracket;
  if (gamma_ab > 0.0) {
    lw.D_ST = g2 * ss->N_a_ss / (ss->photon_number * gamma_ab);
    lw.D_Ram = g2 * config.pump.R / (2.0 * ss->photon_number * gamma_ab * gamma_ab);
  } else {
    lw.D_ST = std::numeric_limits<double>::infinity();
    lw.D_Ram = std::numeric_limits<double>::infinity();
  }
  lw.hz_full = lw.D_full / k_two_pi;
  lw.hz_approx = lw.D_approx / k_two_pi;
  return lw;
}

} // namespace

RamseyCoefficients ramsey_coefficients(double theta, double phi) {
  RamseyCoefficients r;
  const double c_half = std::cos(0.5 * theta);
  const double s_theta = std::sin(theta);
  const double c_half_phi = std::cos(0.5 * phi);

  r.A0 = c_half * c_half;
  r.A1 = r.A0;
  r.A2 = 1.0 - s_theta * s_theta * c_half_phi * c_half_phi;
  r.B0 = 1.0 - r.A0;
  r.B1 = r.B0;
  r.B2 = 1.0 - r.A2;

  const auto exits = ramsey_expectations(theta, phi);
  r.C0 = exits[0].coherence;
  r.C1 = exits[1].coherence;
  r.C2 = exits[2].coherence;
  return r;
}

std::pair<double, double> excitation_flux(const RamseyCoefficients& coeffs) {
  return {1.0 - coeffs.A0 + coeffs.A1 - coeffs.A2, coeffs.B0 - coeffs.B1 + coeffs.B2};
}

std::optional<SteadyState> steady_state(const LaserConfig& config) {
  return steady_state_at(config, config.geometry.theta(), config.geometry.phi());
}

std::pair<double, double> gated_steady_populations(const SteadyState& ss,
                                                   const LaserConfig& config) {
  const double half_slot = 0.5 * config.pump.R * config.geometry.tau;
  return {ss.N_a_ss + half_slot, ss.N_b_ss + half_slot};
}

SpectrumCurve phase_noise_spectrum(const LaserConfig& config,
                                   std::span<const double> omega_grid) {
  const auto ss = steady_state(config);
  if (!ss) throw std::domain_error("phase_noise_spectrum: below threshold (dark fringe)");

  const double bracket =
      fringe_bracket(config.geometry.theta(), config.geometry.phi(), config.pump.p);
  const double q = cancelled_noise_numerator(config, *ss, bracket);
  const double half_width = 0.5 * config.cavity.kappa + config.atom.gamma_ab;
  const double hw2 = half_width * half_width;

  SpectrumCurve curve;
  curve.reserve(omega_grid.size());
  double previous = 0.0;
  for (double omega : omega_grid) {
    if (!(omega > 0.0))
      throw std::domain_error("phase_noise_spectrum: omega grid must be strictly positive");
    if (!curve.empty() && omega <= previous)
      throw std::domain_error("phase_noise_spectrum: omega grid must be strictly increasing");
    previous = omega;
    curve.push_back({omega, q / (omega * omega * (hw2 + omega * omega))});
  }
  return curve;
}

std::optional<LinewidthResult> linewidth_full(const LaserConfig& config) {
  return linewidth_at(config, config.geometry.theta(), config.geometry.phi());
}

double linewidth_approx(const LaserConfig& config) {
  return 2.0 * config.cavity.g * config.cavity.g / config.cavity.kappa *
         fringe_bracket(config.geometry.theta(), config.geometry.phi(), config.pump.p);
}

std::vector<FringePoint> fringe_sweep(const LaserConfig& config,
                                      std::span<const double> phi_grid) {
  if (phi_grid.empty()) throw std::invalid_argument("fringe_sweep: empty phi grid");

  const double theta = config.geometry.theta();
  std::vector<FringePoint> table;
  table.reserve(phi_grid.size());
  for (double phi : phi_grid) {
    FringePoint point;
    point.phi = phi;
    const double bracket = fringe_bracket(theta, phi, config.pump.p);
    point.D_approx = 2.0 * config.cavity.g * config.cavity.g / config.cavity.kappa * bracket;
    if (auto lw = linewidth_at(config, theta, phi)) point.D_full = lw->D_full;
    table.push_back(point);
  }
  return table;
}

} // namespace ramsey
