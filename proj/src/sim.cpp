#include "ramsey/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <numbers>
#include <sstream>
#include <thread>

#include "ramsey/analytic.hpp"

namespace ramsey {

namespace {

constexpr std::complex<double> k_i{0.0, 1.0};
constexpr double k_two_pi = 2.0 * std::numbers::pi;

// mt19937_64 output mapped to [0, 1) with 53-bit resolution; kept in-house so
// trajectories are bit-stable across standard library versions.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double exponential_gap(std::mt19937_64& rng, double rate) {
  return -std::log1p(-uniform01(rng)) / rate;
}

// Consecutive raw seeds correlate through the Mersenne seeding routine;
// scrambling them first makes seed_base + i behave like independent streams.
std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Seed stream decorrelated from the injection-time stream.
constexpr std::uint64_t k_phase_stream_salt = 0x6a09e667f3bcc909ull;

struct KahanComplex {
  std::complex<double> sum{0.0, 0.0};
  std::complex<double> carry{0.0, 0.0};
  void add(std::complex<double> v) {
    const std::complex<double> y = v - carry;
    const std::complex<double> t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

struct KahanReal {
  double sum = 0.0;
  double carry = 0.0;
  void add(double v) {
    const double y = v - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

// Rotation of (s_minus, s_z) by an angle already split into (cos, sin),
// about the in-plane axis given by the unit phasor P = alpha/|alpha|.
inline void rotate_atom(AtomRecord& atom, std::complex<double> P, double c, double sn) {
  const std::complex<double> sp = atom.s_minus * std::conj(P);
  const double sx = 2.0 * sp.real();
  const double sy = -2.0 * sp.imag();
  const double sy2 = c * sy - sn * atom.s_z;
  atom.s_z = sn * sy + c * atom.s_z;
  atom.s_minus = 0.5 * std::complex<double>(sx, -sy2) * P;
}

} // namespace

void validate(const SimConfig& config, bool quiet) {
  validate(config.laser);
  if (!(config.dt > 0.0)) throw std::invalid_argument("sim.dt must be > 0");
  const double bound =
      std::min(config.laser.geometry.tau, 2.0 / config.laser.cavity.kappa) / 20.0;
  if (config.dt > bound * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "sim.dt = " << config.dt << " exceeds the stability bound min(tau, 2/kappa)/20 = "
        << bound;
    throw std::invalid_argument(msg.str());
  }
  if (!(config.duration > 0.0)) throw std::invalid_argument("sim.duration must be > 0");
  if (config.output_stride < 1) throw std::invalid_argument("sim.output_stride must be >= 1");
  if (!(config.dipole_seed >= 0.0)) throw std::invalid_argument("sim.dipole_seed must be >= 0");

  if (auto lw = linewidth_full(config.laser); lw && !quiet) {
    if (config.duration * lw->D_full < 10.0)
      std::cerr << "warning: sim.duration = " << config.duration
                << " s resolves only " << config.duration * lw->D_full
                << " phase-diffusion times (expect >= 10)\n";
  }
}

AtomStage stage_at(const AtomRecord& atom, double t, const RamseyGeometry& geometry) {
  const double local = t - atom.entry_time;
  if (local < 0.0) return AtomStage::exited; // not yet injected
  if (local < geometry.tau) return AtomStage::pulse1;
  if (local < geometry.tau + geometry.T_drift) return AtomStage::drift;
  if (local < 2.0 * geometry.tau + geometry.T_drift) return AtomStage::pulse2;
  return AtomStage::exited;
}

std::vector<double> schedule_injections(double R, InjectionMode mode, double duration,
                                        std::uint64_t seed) {
  if (!(R > 0.0)) throw std::invalid_argument("injection rate R must be > 0");
  if (R * duration < 1.0)
    throw std::invalid_argument("no atoms in window (R * duration < 1)");

  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(R * duration * 1.1) + 8);
  if (mode == InjectionMode::regular) {
    for (std::uint64_t j = 0;; ++j) {
      const double t = static_cast<double>(j) / R;
      if (t >= duration) break;
      times.push_back(t);
    }
  } else {
    std::mt19937_64 rng(splitmix64(seed));
    double t = exponential_gap(rng, R);
    while (t < duration) {
      times.push_back(t);
      t += exponential_gap(rng, R);
    }
  }
  if (times.empty()) throw std::runtime_error("no atoms in window");
  return times;
}

MacroObservables macroscopic_observables(std::span<const AtomRecord> atoms, double t,
                                         const RamseyGeometry& geometry) {
  KahanReal na, nb;
  KahanComplex m;
  for (const auto& atom : atoms) {
    const AtomStage stage = stage_at(atom, t, geometry);
    if (stage != AtomStage::pulse1 && stage != AtomStage::pulse2) continue;
    na.add(0.5 * (1.0 + atom.s_z));
    nb.add(0.5 * (1.0 - atom.s_z));
    m.add(-k_i * atom.s_minus);
  }
  return {na.sum, nb.sum, m.sum};
}

void advance_atom_in_field(AtomRecord& atom, std::complex<double> alpha, double g, double u) {
  const double amp = std::abs(alpha);
  if (amp == 0.0 || u <= 0.0) return;
  const std::complex<double> P = alpha / amp;
  const double angle = 2.0 * g * amp * u;
  rotate_atom(atom, P, std::cos(angle), std::sin(angle));
}

double reactive_compensation(const LaserConfig& laser) {
  const auto ss = steady_state(laser);
  if (!ss || ss->amplitude <= 0.0) return 0.0;
  const double theta = laser.geometry.theta();
  const double phi = laser.geometry.phi();
  return -laser.cavity.g * laser.pump.R * laser.geometry.tau * std::sin(theta) *
         std::sin(phi) / (2.0 * ss->amplitude);
}

SimAbort::SimAbort(const std::string& what, double t, std::complex<double> a, std::size_t n)
    : std::runtime_error(what), time(t), alpha(a), active_atoms(n) {}

TrajectorySimulator::TrajectorySimulator(const SimConfig& config)
    : cfg_(config),
      time_rng_(splitmix64(config.seed)),
      phase_rng_(splitmix64(config.seed ^ k_phase_stream_salt)) {
  validate(cfg_, /*quiet=*/true);

  const auto& geom = cfg_.laser.geometry;
  lifetime_ = 2.0 * geom.tau + geom.T_drift;

  // Exponential integrator for the cavity pole -kappa/2 + i detuning.
  const std::complex<double> pole{-0.5 * cfg_.laser.cavity.kappa, cfg_.cavity_detuning};
  decay_ = std::exp(pole * cfg_.dt);
  drive_gain_ = (1.0 - decay_) / (-pole);
  drift_phasor_pos_ = std::polar(1.0, geom.delta2 * cfg_.dt);
  drift_phasor_neg_ = std::conj(drift_phasor_pos_);

  const auto ss = steady_state(cfg_.laser);
  runaway_cap_ = 1.0e6 * std::max(ss ? ss->photon_number : 0.0, 1.0);

  const double expected = cfg_.laser.pump.R * lifetime_;
  atoms_.reserve(static_cast<std::size_t>(expected + 10.0 * std::sqrt(expected + 1.0)) + 16);

  if (cfg_.injection_mode == InjectionMode::regular) {
    next_entry_ = 0.0;
  } else {
    next_entry_ = exponential_gap(time_rng_, cfg_.laser.pump.R);
  }
}

void TrajectorySimulator::inject_up_to(double t_end) {
  while (next_entry_ < t_end && next_entry_ < cfg_.duration) {
    AtomRecord atom;
    atom.entry_time = next_entry_;
    const double psi = k_two_pi * uniform01(phase_rng_);
    atom.s_minus = std::polar(cfg_.dipole_seed, psi);
    atom.s_z = 1.0;
    atom.drift_sign = (cfg_.alternate_drift_sign && (atom_count_ & 1ull)) ? -1.0 : 1.0;
    atoms_.push_back(atom);
    ++atom_count_;

    if (cfg_.injection_mode == InjectionMode::regular) {
      next_entry_ = static_cast<double>(atom_count_) / cfg_.laser.pump.R;
    } else {
      next_entry_ += exponential_gap(time_rng_, cfg_.laser.pump.R);
    }
  }
}

void TrajectorySimulator::retire_exited() {
  const double t = field_.time;
  while (head_ < atoms_.size() && atoms_[head_].entry_time + lifetime_ <= t) ++head_;
  if (head_ > 4096 && head_ * 2 > atoms_.size()) {
    atoms_.erase(atoms_.begin(), atoms_.begin() + static_cast<std::ptrdiff_t>(head_));
    head_ = 0;
  }
}

void TrajectorySimulator::step() {
  // Time lives on the exact grid k * dt so rounding never drifts over long runs.
  const double t0 = static_cast<double>(step_index_) * cfg_.dt;
  const double t1 = static_cast<double>(step_index_ + 1) * cfg_.dt;
  const double dt = t1 - t0;
  const auto& geom = cfg_.laser.geometry;
  const double g = cfg_.laser.cavity.g;
  const double tau = geom.tau;
  const double drift_end = tau + geom.T_drift;

  inject_up_to(t1);

  const double amp = std::abs(field_.alpha);
  const std::complex<double> P = amp > 0.0 ? field_.alpha / amp : std::complex<double>{1.0, 0.0};
  const double full_angle = 2.0 * g * amp * dt;
  const double c_full = std::cos(full_angle);
  const double s_full = std::sin(full_angle);

  // Field-frame drift: dipoles parked in the drift region co-rotate with the
  // field phase, so the phase they bring back to zone 2 is measured against
  // the field as it is now, not as it was at zone-1 exit.
  std::complex<double> frame_rotation{1.0, 0.0};
  if (cfg_.drift_frame == DriftFrame::field && amp > 0.0) {
    frame_rotation = P * std::conj(last_axis_);
    const double norm = std::abs(frame_rotation);
    if (norm > 0.0) frame_rotation /= norm;
  }
  if (amp > 0.0) last_axis_ = P;
  const std::complex<double> drift_pos = drift_phasor_pos_ * frame_rotation;
  const std::complex<double> drift_neg = drift_phasor_neg_ * frame_rotation;

  KahanComplex m_eff;
  const double inv_dt = 1.0 / dt;
  // Within one ulp-of-t of a full step counts as a full step (fast path).
  const double full_step = dt * (1.0 - 1e-9);

  for (std::size_t idx = head_; idx < atoms_.size(); ++idx) {
    AtomRecord& atom = atoms_[idx];
    const double entry = atom.entry_time;

    // Overlaps of [t0, t1) with the atom's three stage windows.
    const double u1 = std::max(0.0, std::min(t1, entry + tau) - std::max(t0, entry));
    const double ud =
        std::max(0.0, std::min(t1, entry + drift_end) - std::max(t0, entry + tau));
    const double u2 = std::max(0.0, std::min(t1, entry + lifetime_) -
                                        std::max(t0, entry + drift_end));

    // Coupled fraction drives the field; pre-update dipole (explicit step).
    const double w = (u1 + u2) * inv_dt;
    if (w > 0.0) m_eff.add(w * (-k_i) * atom.s_minus);

    if (u1 > 0.0) {
      if (u1 >= full_step) {
        rotate_atom(atom, P, c_full, s_full);
      } else if (amp > 0.0) {
        const double angle = 2.0 * g * amp * u1;
        rotate_atom(atom, P, std::cos(angle), std::sin(angle));
      }
    }
    if (ud > 0.0) {
      if (ud >= full_step) {
        atom.s_minus *= atom.drift_sign > 0.0 ? drift_pos : drift_neg;
      } else {
        atom.s_minus *= std::polar(1.0, atom.drift_sign * geom.delta2 * ud) * frame_rotation;
      }
    }
    if (u2 > 0.0) {
      if (u2 >= full_step) {
        rotate_atom(atom, P, c_full, s_full);
      } else if (amp > 0.0) {
        const double angle = 2.0 * g * amp * u2;
        rotate_atom(atom, P, std::cos(angle), std::sin(angle));
      }
    }
  }

  // Exponential Euler: exact cavity decay, piecewise-constant drive.
  field_.alpha = field_.alpha * decay_ + g * m_eff.sum * drive_gain_;
  field_.time = t1;
  ++step_index_;

  retire_exited();

  if ((step_index_ & 0x3f) == 0) {
    const double photons = std::norm(field_.alpha);
    if (!std::isfinite(photons))
      throw SimAbort("non-finite field", field_.time, field_.alpha, atoms_.size() - head_);
    if (photons > runaway_cap_)
      throw SimAbort("runaway field", field_.time, field_.alpha, atoms_.size() - head_);
  }
}

MacroObservables TrajectorySimulator::observables() const {
  return macroscopic_observables(atoms(), field_.time, cfg_.laser.geometry);
}

namespace {

TrajectoryResult run_trajectory_impl(const SimConfig& config) {
  TrajectorySimulator sim(config);

  const auto& geom = config.laser.geometry;
  const double warmup =
      5.0 / config.laser.cavity.kappa + 3.0 * (2.0 * geom.tau + geom.T_drift);

  TrajectoryResult out;
  out.seed = config.seed;
  const double span = config.duration - warmup;
  if (span > 0.0) {
    const std::size_t expected =
        static_cast<std::size_t>(span / (config.dt * static_cast<double>(config.output_stride))) + 2;
    out.times.reserve(expected);
    out.alphas.reserve(expected);
    out.photon_numbers.reserve(expected);
    out.macro_Na.reserve(expected);
    out.macro_Nb.reserve(expected);
    out.macro_M.reserve(expected);
  }

  std::uint64_t step_index = 0;
  while (sim.time() < config.duration - 0.5 * config.dt) {
    sim.step();
    ++step_index;
    if (sim.time() >= warmup && step_index % config.output_stride == 0) {
      const auto obs = sim.observables();
      out.times.push_back(sim.time());
      out.alphas.push_back(sim.field().alpha);
      out.photon_numbers.push_back(std::norm(sim.field().alpha));
      out.macro_Na.push_back(obs.N_a);
      out.macro_Nb.push_back(obs.N_b);
      out.macro_M.push_back(obs.M);
    }
  }
  return out;
}

} // namespace

TrajectoryResult run_trajectory(const SimConfig& config) {
  validate(config);
  return run_trajectory_impl(config);
}

std::vector<TrajectoryOutcome> run_ensemble(const SimConfig& base, std::size_t count,
                                            std::uint64_t seed_base, unsigned workers) {
  std::vector<TrajectoryOutcome> out(count);
  if (count == 0) return out;
  validate(base); // one loud validation; per-trajectory construction is quiet
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(count));

  std::atomic<std::size_t> cursor{0};
  auto work = [&]() {
    for (;;) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= count) return;
      SimConfig cfg = base;
      cfg.seed = seed_base + i;
      try {
        out[i].result = run_trajectory_impl(cfg);
      } catch (const std::exception& e) {
        out[i].error = e.what();
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  return out;
}

LagStructureReport noise_lag_structure(const SimConfig& config,
                                       std::span<const TrajectoryResult> ensemble) {
  if (ensemble.size() < 32)
    throw std::invalid_argument("noise_lag_structure: need at least 32 trajectories");
  if (config.output_stride != 1)
    throw std::invalid_argument("noise_lag_structure: requires output_stride = 1");

  const auto& geom = config.laser.geometry;
  const double dt = config.dt;
  const double g = config.laser.cavity.g;
  const double tau = geom.tau;
  const double T = geom.T_drift;

  struct Target {
    std::string name;
    double lag;
    bool predicted;
  };
  // Controls live in the gaps between the same-atom event lags, far enough
  // from every peak that the cavity's 2/kappa response tail has died off.
  const std::vector<Target> targets = {
      {"0", 0.0, true},
      {"tau", tau, true},
      {"T", T, true},
      {"tau+T", tau + T, true},
      {"2tau+T", 2.0 * tau + T, true},
      {"ctrl_2.5tau", 2.5 * tau, false},
      {"ctrl_0.61T", 0.61 * T, false},
      {"ctrl_1.29(2tau+T)", 1.29 * (2.0 * tau + T), false},
  };

  const std::size_t n_traj = ensemble.size();
  std::vector<std::vector<std::complex<double>>> per_traj(targets.size());
  for (auto& v : per_traj) v.reserve(n_traj);

  std::vector<std::complex<double>> force;
  for (const auto& traj : ensemble) {
    const std::size_t n = traj.times.size();
    if (n < 3) throw std::invalid_argument("noise_lag_structure: trajectory too short");

    // Gating-force residual of the recorded M series, demodulated into the
    // instantaneous field frame. The smooth in-zone drive g (Na - Nb) alpha is
    // subtracted; what remains is dominated by atom entry/exit jumps.
    force.clear();
    force.reserve(n - 1);
    KahanComplex mean_acc;
    for (std::size_t k = 0; k + 1 < n; ++k) {
      const std::complex<double> dm = (traj.macro_M[k + 1] - traj.macro_M[k]) / dt;
      const std::complex<double> drive =
          g * (traj.macro_Na[k] - traj.macro_Nb[k]) * traj.alphas[k];
      const double amp = std::abs(traj.alphas[k]);
      const std::complex<double> frame =
          amp > 0.0 ? std::conj(traj.alphas[k]) / amp : std::complex<double>{1.0, 0.0};
      const std::complex<double> f = (dm - drive) * frame;
      force.push_back(f);
      mean_acc.add(f);
    }
    const std::complex<double> mean = mean_acc.sum / static_cast<double>(force.size());
    for (auto& f : force) f -= mean;

    for (std::size_t ti = 0; ti < targets.size(); ++ti) {
      const auto idx = static_cast<std::size_t>(std::llround(targets[ti].lag / dt));
      // +-1 bin window absorbs the sub-step smearing of fractional-step events.
      const std::size_t lo = idx == 0 ? 0 : idx - 1;
      const std::size_t hi = idx == 0 ? 0 : idx + 1;
      KahanComplex acc;
      std::size_t terms = 0;
      for (std::size_t l = lo; l <= hi; ++l) {
        if (l >= force.size()) continue;
        for (std::size_t k = 0; k + l < force.size(); ++k) {
          acc.add(force[k] * std::conj(force[k + l]));
          ++terms;
        }
      }
      if (terms == 0) throw std::invalid_argument("noise_lag_structure: lag beyond record");
      per_traj[ti].push_back(acc.sum / static_cast<double>(terms));
    }
  }

  LagStructureReport report;
  report.trajectories = n_traj;
  for (std::size_t ti = 0; ti < targets.size(); ++ti) {
    LagPoint point;
    point.name = targets[ti].name;
    point.lag = targets[ti].lag;
    point.predicted = targets[ti].predicted;

    KahanComplex mean;
    for (const auto& v : per_traj[ti]) mean.add(v);
    point.mean = mean.sum / static_cast<double>(n_traj);

    double var_re = 0.0, var_im = 0.0;
    for (const auto& v : per_traj[ti]) {
      var_re += (v.real() - point.mean.real()) * (v.real() - point.mean.real());
      var_im += (v.imag() - point.mean.imag()) * (v.imag() - point.mean.imag());
    }
    const double denom = static_cast<double>(n_traj) * static_cast<double>(n_traj - 1);
    point.se_re = std::sqrt(var_re / denom);
    point.se_im = std::sqrt(var_im / denom);
    report.points.push_back(point);
  }
  return report;
}

} // namespace ramsey
