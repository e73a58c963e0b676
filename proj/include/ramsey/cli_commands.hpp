#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ramsey/analytic.hpp"
#include "ramsey/config.hpp"
#include "ramsey/config_io.hpp"
#include "ramsey/sim.hpp"
#include "ramsey/spectral.hpp"

namespace ramsey {

inline constexpr const char* k_tool_version = "0.1.0";

// ---- analytic ----

struct AnalyticReport {
  double theta = 0.0, phi = 0.0, p = 0.0;
  RamseyCoefficients coeffs;
  std::optional<SteadyState> ss;      // empty on a dark fringe
  std::optional<LinewidthResult> lw;  // ditto
  double D_approx = 0.0;              // always defined
  RegimeReport regime;
};

AnalyticReport run_analytic(const LaserConfig& config, double min_separation = 5.0);

// CSV with the fixed column set:
// theta,phi,p,I0,N_a_ss,N_b_ss,D_ST,D_Ram,D_full_radps,D_full_hz,
// D_approx_radps,D_approx_hz,status
std::string analytic_csv(const AnalyticReport& report);
std::string regime_csv(const RegimeReport& report);
std::string regime_pretty(const RegimeReport& report);

// ---- simulate ----

struct SimulateOptions {
  std::size_t trajectories = 2;
  std::uint64_t seed_base = 1;
  std::string out_dir;            // empty: no files written
  std::size_t psd_segments = 8;   // Lorentzian leg, when the record allows it
  bool write_trajectories = true; // per-trajectory CSV records
  unsigned workers = 0;           // 0 = hardware concurrency
};

struct TrajectoryRow {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  LinewidthEstimate phase_fit;
  bool have_lorentz = false;
  LinewidthEstimate lorentz;
  double mean_photon = 0.0;
  double mean_Na = 0.0;
  double mean_Nb = 0.0;
  double carrier_offset = 0.0; // mean frequency removed before the PSD, rad/s
};

struct SimulateSummary {
  std::vector<TrajectoryRow> rows;
  std::size_t n_ok = 0;
  double D_phase = 0.0; // inverse-variance ensemble combination
  double D_phase_se = 0.0;
  bool have_lorentz = false;
  double D_lorentz = 0.0;
  double D_lorentz_se = 0.0;
  std::optional<double> D_analytic; // D_full at the configured point
  std::optional<double> ratio;      // D_phase / D_analytic
  double mean_photon = 0.0;         // ensemble averages of the time averages
  double mean_Na = 0.0;
  double mean_Nb = 0.0;
  std::optional<SteadyState> ss;
  double gated_Na = 0.0; // analytic expectation for the gated in-zone sums
  double gated_Nb = 0.0;
};

// Runs the ensemble, estimates the linewidth per trajectory (phase-diffusion
// fit always; Lorentzian fit when the record is long enough), and writes
// trajectory records, estimate tables and a manifest under out_dir.
// Fails (StatisticalError) when fewer than 80% of the trajectories survive.
SimulateSummary run_simulate(const RunConfig& config, const SimulateOptions& options);

std::string estimates_csv(const SimulateSummary& summary);
std::string summary_csv(const SimulateSummary& summary);

// ---- sweep ----

struct SweepOptions {
  std::string param_path; // dotted LaserConfig path, e.g. geometry.delta2
  double start = 0.0;
  double stop = 0.0;
  std::size_t count = 2; // >= 2, linear spacing
  std::size_t trajectories = 0; // 0 = analytic only
  std::uint64_t seed_base = 1;
  std::string out_dir;
  unsigned workers = 0;
};

struct SweepRow {
  double value = 0.0; // swept parameter value
  double theta = 0.0, phi = 0.0, p = 0.0;
  bool dark = false;
  double I0 = 0.0;
  double D_full = 0.0;   // valid when !dark
  double D_approx = 0.0;
  bool simulated = false;
  double D_sim = 0.0;
  double D_sim_se = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
};

SweepResult run_sweep(const RunConfig& config, const SweepOptions& options);
std::string sweep_csv(const SweepResult& result);

// CSV record of one trajectory: time_s,alpha_re,alpha_im,photon_number,N_a,N_b.
std::string trajectory_csv(const TrajectoryResult& trajectory);

} // namespace ramsey
