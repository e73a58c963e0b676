#pragma once

#include <optional>
#include <string>
#include <vector>

namespace ramsey {

// Unit conventions: every rate and frequency is angular (rad/s), every time
// is in seconds. Cyclic mirrors (Hz) are derived as value / 2pi at the point
// of reporting, never stored.

struct CavityParams {
  double kappa = 0.0; // cavity field decay rate, rad/s
  double g = 0.0;     // atom-field coupling, rad/s
  std::optional<double> mode_volume;    // m^3, only used to derive g
  std::optional<double> mode_frequency; // rad/s, only used to derive g
};

struct AtomParams {
  double gamma_a = 0.0;       // upper-level decay to outside the lasing pair, rad/s
  double gamma_a_prime = 0.0; // upper -> lower decay, rad/s
  double gamma_b = 0.0;       // lower-level decay, rad/s
  double gamma_ab = 0.0;      // dipole decoherence rate, rad/s

  double gamma_max() const;
};

struct RamseyGeometry {
  double tau = 0.0;     // single-zone interaction time, s
  double T_drift = 0.0; // free drift time between the zones, s
  double omega_R = 0.0; // resonant Rabi frequency inside a zone, rad/s
  double delta2 = 0.0;  // detuning in the drift region, rad/s

  // Derived quantities are always recomputed from the primaries.
  double theta() const { return omega_R * tau; }  // pulse area, rad
  double phi() const { return delta2 * T_drift; } // drift phase, rad
};

struct PumpParams {
  double R = 0.0; // mean atom injection rate, atoms/s
  double p = 1.0; // pumping statistics: 0 Poissonian, 1 regular
};

struct LaserConfig {
  CavityParams cavity;
  AtomParams atom;
  RamseyGeometry geometry;
  PumpParams pump;
};

// Throws std::invalid_argument naming the offending field.
void validate(const LaserConfig& config);

struct RegimeLink {
  std::string name;
  double left = 0.0;
  double right = 0.0;
  double ratio = 0.0;  // right / left; +inf when left == 0 (unbounded margin)
  bool pass = false;
  bool skipped = false; // degenerate input, e.g. T = 0
};

struct RegimeReport {
  std::vector<RegimeLink> links;
  double min_separation = 5.0;
  bool overall_pass = false;
  bool degenerate = false;
};

// Checks the timescale chain gamma_max << 1/T << 1/tau << kappa/2, one link
// per "<<": a link passes when right/left >= min_separation.
RegimeReport validate_regime(const LaserConfig& config, double min_separation = 5.0);

// g = mu * sqrt(omega / (2 hbar epsilon0 V)); all inputs must be positive.
double coupling_from_dipole(double mu, double omega, double volume);

// 40Ca intercombination-line beam laser: 1 mm zones at 500 m/s, kappa = 1e7
// rad/s, g = 1e3 rad/s, 320 Hz natural linewidth of the upper level. Pulse
// area and drift phase both default to pi/2.
LaserConfig ca40_preset();

} // namespace ramsey
