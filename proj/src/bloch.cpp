#include "ramsey/bloch.hpp"

#include <cmath>

namespace ramsey {

namespace {
constexpr std::complex<double> k_i{0.0, 1.0};
}

double norm_squared(const TwoLevelState& s) {
  return std::norm(s.c_a) + std::norm(s.c_b);
}

double upper_population(const TwoLevelState& s) { return std::norm(s.c_a); }

double lower_population(const TwoLevelState& s) { return std::norm(s.c_b); }

std::complex<double> coherence(const TwoLevelState& s) {
  return -k_i * std::conj(s.c_b) * s.c_a;
}

TwoLevelState rabi_pulse(const TwoLevelState& s, double theta) {
  const double c = std::cos(0.5 * theta);
  const double sn = std::sin(0.5 * theta);
  TwoLevelState out;
  out.c_a = c * s.c_a - k_i * sn * s.c_b;
  out.c_b = -k_i * sn * s.c_a + c * s.c_b;
  return out;
}

TwoLevelState free_drift(const TwoLevelState& s, double phi) {
  const auto half = std::polar(1.0, 0.5 * phi);
  TwoLevelState out;
  out.c_a = half * s.c_a;
  out.c_b = std::conj(half) * s.c_b;
  return out;
}

namespace {

ExitExpectations record(const TwoLevelState& s, RamseyEpoch epoch) {
  ExitExpectations e;
  e.sigma_a = upper_population(s);
  e.sigma_b = lower_population(s);
  e.coherence = coherence(s);
  e.epoch = epoch;
  return e;
}

} // namespace

std::array<ExitExpectations, 3> ramsey_expectations(double theta, double phi) {
  TwoLevelState s = excited_state();
  s = rabi_pulse(s, theta);
  const auto e0 = record(s, RamseyEpoch::after_pulse_1);
  s = free_drift(s, phi);
  const auto e1 = record(s, RamseyEpoch::after_drift);
  s = rabi_pulse(s, theta);
  const auto e2 = record(s, RamseyEpoch::after_pulse_2);
  return {e0, e1, e2};
}

} // namespace ramsey
