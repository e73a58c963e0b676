#include "ramsey/config.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "ramsey/constants.hpp"

namespace ramsey {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

} // namespace

double AtomParams::gamma_max() const {
  // gamma_ab is included: the dipole decoherence time must also be long
  // compared with the transit for the transit dynamics to stay unitary.
  return std::max({gamma_a, gamma_a_prime, gamma_b, gamma_ab});
}

void validate(const LaserConfig& config) {
  require(config.cavity.kappa > 0.0, "cavity.kappa must be > 0");
  require(config.cavity.g > 0.0, "cavity.g must be > 0");
  if (config.cavity.mode_volume)
    require(*config.cavity.mode_volume > 0.0, "cavity.mode_volume must be > 0");
  if (config.cavity.mode_frequency)
    require(*config.cavity.mode_frequency > 0.0, "cavity.mode_frequency must be > 0");

  require(config.atom.gamma_a >= 0.0, "atom.gamma_a must be >= 0");
  require(config.atom.gamma_a_prime >= 0.0, "atom.gamma_a_prime must be >= 0");
  require(config.atom.gamma_b >= 0.0, "atom.gamma_b must be >= 0");
  require(config.atom.gamma_ab > 0.0, "atom.gamma_ab must be > 0");

  require(config.geometry.tau > 0.0, "geometry.tau must be > 0");
  require(config.geometry.T_drift >= 0.0, "geometry.T_drift must be >= 0");
  require(config.geometry.omega_R >= 0.0, "geometry.omega_R must be >= 0");
  require(std::isfinite(config.geometry.delta2), "geometry.delta2 must be finite");

  require(config.pump.R > 0.0, "pump.R must be > 0");
  require(config.pump.p >= 0.0 && config.pump.p <= 1.0, "pump.p must be in [0, 1]");
}

namespace {

RegimeLink make_link(std::string name, double left, double right, double min_separation) {
  RegimeLink link;
  link.name = std::move(name);
  link.left = left;
  link.right = right;
  link.ratio = left == 0.0 ? std::numeric_limits<double>::infinity() : right / left;
  link.pass = link.ratio >= min_separation;
  return link;
}

} // namespace

RegimeReport validate_regime(const LaserConfig& config, double min_separation) {
  if (!(config.geometry.tau > 0.0)) throw std::invalid_argument("geometry.tau must be > 0");
  if (!(config.cavity.kappa > 0.0)) throw std::invalid_argument("cavity.kappa must be > 0");

  RegimeReport report;
  report.min_separation = min_separation;

  const double gamma_max = config.atom.gamma_max();
  const double inv_tau = 1.0 / config.geometry.tau;
  const double half_kappa = 0.5 * config.cavity.kappa;

  if (config.geometry.T_drift > 0.0) {
    const double inv_T = 1.0 / config.geometry.T_drift;
    report.links.push_back(make_link("gamma_max << 1/T", gamma_max, inv_T, min_separation));
    report.links.push_back(make_link("1/T << 1/tau", inv_T, inv_tau, min_separation));
  } else {
    // T = 0 collapses the two zones into one; the chain links through T are
    // meaningless, so they are skipped and the report is flagged.
    report.degenerate = true;
    RegimeLink a;
    a.name = "gamma_max << 1/T";
    a.left = gamma_max;
    a.skipped = true;
    RegimeLink b;
    b.name = "1/T << 1/tau";
    b.right = inv_tau;
    b.skipped = true;
    report.links.push_back(a);
    report.links.push_back(b);
  }

  report.links.push_back(make_link("1/tau << kappa/2", inv_tau, half_kappa, min_separation));

  report.overall_pass = std::all_of(report.links.begin(), report.links.end(),
                                    [](const RegimeLink& l) { return l.skipped || l.pass; });
  return report;
}

double coupling_from_dipole(double mu, double omega, double volume) {
  if (!(mu > 0.0)) throw std::invalid_argument("dipole moment mu must be > 0");
  if (!(omega > 0.0)) throw std::invalid_argument("mode frequency omega must be > 0");
  if (!(volume > 0.0)) throw std::invalid_argument("mode volume must be > 0");
  return mu * std::sqrt(omega / (2.0 * k_hbar * k_epsilon0 * volume));
}

LaserConfig ca40_preset() {
  using std::numbers::pi;

  LaserConfig c;
  c.cavity.kappa = 1.0e7; // rad/s
  c.cavity.g = 1.0e3;     // rad/s

  // 3P1 -> 1S0 at 320 Hz natural linewidth; no other decay channels for the
  // lasing pair. gamma_ab defaults to half the population decay (pure
  // radiative decoherence) -- a convention, documented in the README.
  c.atom.gamma_a = 0.0;
  c.atom.gamma_a_prime = 2.0 * pi * 320.0;
  c.atom.gamma_b = 0.0;
  c.atom.gamma_ab = pi * 320.0;

  // 1 mm interaction zones traversed at 500 m/s; 10 mm drift.
  c.geometry.tau = 2.0e-6;
  c.geometry.T_drift = 2.0e-5;
  c.geometry.omega_R = (pi / 2.0) / c.geometry.tau; // pulse area pi/2
  c.geometry.delta2 = (pi / 2.0) / c.geometry.T_drift; // drift phase pi/2

  c.pump.R = 1.0e6;
  c.pump.p = 1.0;
  return c;
}

} // namespace ramsey
