#pragma once

#include <array>
#include <complex>

namespace ramsey {

// Probability amplitudes of the upper (c_a) and lower (c_b) lasing states.
// Transit times are short against every damping time, so pulse and drift
// propagation is exactly unitary.
struct TwoLevelState {
  std::complex<double> c_a{1.0, 0.0};
  std::complex<double> c_b{0.0, 0.0};
};

inline TwoLevelState excited_state() { return TwoLevelState{}; }

double norm_squared(const TwoLevelState& s);
double upper_population(const TwoLevelState& s);
double lower_population(const TwoLevelState& s);

// <-i sigma_-> = -i conj(c_b) c_a; |coherence| <= 1/2.
std::complex<double> coherence(const TwoLevelState& s);

// Resonant Rabi rotation of area theta about a fixed axis:
//   c_a -> cos(theta/2) c_a - i sin(theta/2) c_b
//   c_b -> -i sin(theta/2) c_a + cos(theta/2) c_b
TwoLevelState rabi_pulse(const TwoLevelState& s, double theta);

// Free evolution at drift detuning: the coherence advances by exp(+i phi),
// populations are untouched. Split symmetrically over the two amplitudes so
// no global phase accumulates.
TwoLevelState free_drift(const TwoLevelState& s, double phi);

enum class RamseyEpoch { after_pulse_1, after_drift, after_pulse_2 };

struct ExitExpectations {
  double sigma_a = 0.0;
  double sigma_b = 0.0;
  std::complex<double> coherence{0.0, 0.0};
  RamseyEpoch epoch = RamseyEpoch::after_pulse_1;
};

// pulse(theta) -> drift(phi) -> pulse(theta) starting from the excited
// state, recording expectations at the three exits. The rotation axis of the
// second pulse is the same as the first (common cavity mode).
std::array<ExitExpectations, 3> ramsey_expectations(double theta, double phi);

} // namespace ramsey
