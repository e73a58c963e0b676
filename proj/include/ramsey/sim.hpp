#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ramsey/config.hpp"

namespace ramsey {

enum class InjectionMode { regular, poisson };

// Reference frame for the drift-region phase. "atomic": the dipole advances
// by delta2 against a fixed frame, so the interference phase an atom brings
// back to zone 2 shifts whenever the lasing frequency moves -- free-running
// operation then slides to the nearest fringe maximum (and beats between the
// two maxima when the drift sign alternates). "field": the dipole advances by
// delta2 against the instantaneous field phase, which clamps the working
// fringe phase at delta2 * T the way the macroscopic closure assumes.
enum class DriftFrame { atomic, field };

struct SimConfig {
  LaserConfig laser;
  double dt = 0.0;       // integrator step, s; must satisfy dt <= min(tau, 2/kappa)/20
  double duration = 0.0; // total simulated time, s
  std::uint64_t seed = 0;
  std::size_t output_stride = 1; // steps between recorded samples
  InjectionMode injection_mode = InjectionMode::regular;

  // Dipole seed handed to each injected atom: s_minus = dipole_seed * e^{i psi}
  // with psi uniform, s_z = +1. The transverse seed power sets the
  // spontaneous-emission-like noise floor of the run.
  double dipole_seed = 0.5;

  // Alternate the sign of the drift detuning between consecutive atoms. The
  // fringe-even observables (flux, populations, linewidth) are unchanged, but
  // the reactive quadrature dipole stored in the drift region cancels
  // pairwise, so on a fringe slope the emission is not pushed off the zone
  // resonance. Note that the pairwise cancellation also suppresses the
  // arrival-statistics noise carried by those dipoles.
  bool alternate_drift_sign = false;

  DriftFrame drift_frame = DriftFrame::atomic;

  // Cavity mode offset from the zone resonance, rad/s. On a fringe slope the
  // medium stores a quadrature dipole that torques the field phase at
  // g Im(M)/|alpha|; detuning the cavity by the opposite amount holds the
  // operating point static. reactive_compensation() computes that value.
  double cavity_detuning = 0.0;
};

// Cavity detuning that balances the reactive drift-region dipole at the
// configured operating point: -g R tau sin(theta) sin(phi) / (2 sqrt(I0)).
// Zero below threshold.
double reactive_compensation(const LaserConfig& laser);

// Throws std::invalid_argument on a bad configuration; writes a warning to
// stderr when the duration is too short to resolve the expected phase
// diffusion (suppressed when quiet).
void validate(const SimConfig& config, bool quiet = false);

enum class AtomStage { pulse1, drift, pulse2, exited };

struct AtomRecord {
  double entry_time = 0.0;
  std::complex<double> s_minus{0.0, 0.0}; // c-number dipole, |s_minus| <= 1/2 + seed allowance
  double s_z = 1.0;                       // inversion in [-1, 1]
  double drift_sign = 1.0;                // sign applied to delta2 in the drift region
};

AtomStage stage_at(const AtomRecord& atom, double t, const RamseyGeometry& geometry);

struct FieldState {
  std::complex<double> alpha{0.0, 0.0}; // |alpha|^2 is the photon number
  double time = 0.0;
};

struct TrajectoryResult {
  std::vector<double> times;
  std::vector<std::complex<double>> alphas;
  std::vector<double> photon_numbers;
  std::vector<double> macro_Na;
  std::vector<double> macro_Nb;
  std::vector<std::complex<double>> macro_M;
  std::uint64_t seed = 0;
};

struct SimAbort : std::runtime_error {
  double time = 0.0;
  std::complex<double> alpha{0.0, 0.0};
  std::size_t active_atoms = 0;
  SimAbort(const std::string& what, double t, std::complex<double> a, std::size_t n);
};

// Entry times in [0, duration): regular mode t_j = j/R exactly, Poisson mode
// i.i.d. exponential gaps with mean 1/R.
std::vector<double> schedule_injections(double R, InjectionMode mode, double duration,
                                        std::uint64_t seed);

struct MacroObservables {
  double N_a = 0.0;
  double N_b = 0.0;
  std::complex<double> M{0.0, 0.0}; // -i sum of gated dipoles
};

// Sums over atoms currently inside a pulse zone (compensated summation).
MacroObservables macroscopic_observables(std::span<const AtomRecord> atoms, double t,
                                         const RamseyGeometry& geometry);

// Resonant Maxwell-Bloch rotation of one atom for a time u in a classical
// field alpha: rotation angle 2 g |alpha| u about the axis set by arg(alpha).
// Exactly norm-preserving.
void advance_atom_in_field(AtomRecord& atom, std::complex<double> alpha, double g, double u);

// One cavity field coupled to individually injected atoms, stepped at dt.
// Injection, per-atom stage bookkeeping (with sub-step boundary fractions)
// and the exponential-Euler field update live here.
class TrajectorySimulator {
 public:
  explicit TrajectorySimulator(const SimConfig& config);

  void step();
  const FieldState& field() const { return field_; }
  void set_field(std::complex<double> alpha) { field_.alpha = alpha; }
  double time() const { return field_.time; }
  std::span<const AtomRecord> atoms() const {
    return {atoms_.data() + head_, atoms_.size() - head_};
  }
  MacroObservables observables() const;

 private:
  void inject_up_to(double t_end);
  void retire_exited();

  SimConfig cfg_;
  FieldState field_;
  std::vector<AtomRecord> atoms_; // entry-time ordered; [head_, size) active
  std::size_t head_ = 0;
  std::uint64_t step_index_ = 0;
  std::uint64_t atom_count_ = 0; // atoms injected so far (drives sign alternation)
  double next_entry_ = 0.0;
  double lifetime_ = 0.0; // 2 tau + T
  double runaway_cap_ = 0.0;
  std::complex<double> decay_{0.0, 0.0};      // exp((-kappa/2 + i detuning (cavity)) dt)
  std::complex<double> drive_gain_{0.0, 0.0}; // (1 - decay) / (kappa/2 - i detuning)
  std::complex<double> drift_phasor_pos_{1.0, 0.0};
  std::complex<double> drift_phasor_neg_{1.0, 0.0};
  std::complex<double> last_axis_{1.0, 0.0}; // field phasor of the previous step
  std::mt19937_64 time_rng_;  // injection gaps
  std::mt19937_64 phase_rng_; // dipole seed phases
};

TrajectoryResult run_trajectory(const SimConfig& config);

struct TrajectoryOutcome {
  std::optional<TrajectoryResult> result;
  std::string error; // empty on success
};

// Independent trajectories with seeds seed_base + i, fanned out over worker
// threads; slot i always holds trajectory i regardless of completion order.
std::vector<TrajectoryOutcome> run_ensemble(const SimConfig& base, std::size_t count,
                                            std::uint64_t seed_base, unsigned workers = 0);

struct LagPoint {
  std::string name;
  double lag = 0.0;                    // s
  std::complex<double> mean{0.0, 0.0}; // ensemble mean force autocorrelation
  double se_re = 0.0;
  double se_im = 0.0;
  bool predicted = false; // gating lag vs control lag
};

struct LagStructureReport {
  std::vector<LagPoint> points;
  std::size_t trajectories = 0;
};

// Autocorrelation of the gating-force residual of the recorded M(t) series,
// evaluated at the five lags where same-atom entry/exit events pair up
// ({0, tau, T, tau+T, 2tau+T}) plus control lags in between. Requires at
// least 32 trajectories recorded at output_stride = 1.
LagStructureReport noise_lag_structure(const SimConfig& config,
                                       std::span<const TrajectoryResult> ensemble);

} // namespace ramsey
