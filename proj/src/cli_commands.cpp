#include "ramsey/cli_commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

namespace ramsey {

namespace {

namespace fs = std::filesystem;

std::string csv_num(double v) { return format_g9(v); }

double time_average(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  double acc = 0.0;
  for (double v : values) acc += v;
  return acc / static_cast<double>(values.size());
}

// Inverse-variance weighted mean; near-zero errors are floored so a single
// synthetic-exact row cannot swallow the whole weight budget.
void combine_estimates(const std::vector<std::pair<double, double>>& values, double& mean,
                       double& se) {
  mean = 0.0;
  se = 0.0;
  if (values.empty()) return;
  double wsum = 0.0;
  for (const auto& [d, s] : values) {
    const double floor = std::max(1e-6 * std::abs(d), 1e-300);
    const double w = 1.0 / std::max(s * s, floor * floor);
    mean += w * d;
    wsum += w;
  }
  mean /= wsum;
  se = std::sqrt(1.0 / wsum);
}

std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

void append_config_snapshot(Manifest& manifest, const RunConfig& config) {
  std::istringstream lines(emit_config(config));
  std::string line;
  while (std::getline(lines, line)) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    manifest.add("config." + line.substr(0, eq), line.substr(eq + 3));
  }
}

} // namespace

AnalyticReport run_analytic(const LaserConfig& config, double min_separation) {
  validate(config);
  AnalyticReport report;
  report.theta = config.geometry.theta();
  report.phi = config.geometry.phi();
  report.p = config.pump.p;
  report.coeffs = ramsey_coefficients(report.theta, report.phi);
  report.ss = steady_state(config);
  report.lw = linewidth_full(config);
  report.D_approx = linewidth_approx(config);
  report.regime = validate_regime(config, min_separation);
  return report;
}

std::string analytic_csv(const AnalyticReport& r) {
  std::ostringstream out;
  out << "theta,phi,p,I0,N_a_ss,N_b_ss,D_ST,D_Ram,D_full_radps,D_full_hz,"
         "D_approx_radps,D_approx_hz,status\n";
  out << csv_num(r.theta) << ',' << csv_num(r.phi) << ',' << csv_num(r.p) << ',';
  if (r.ss && r.lw) {
    out << csv_num(r.ss->photon_number) << ',' << csv_num(r.ss->N_a_ss) << ','
        << csv_num(r.ss->N_b_ss) << ',' << csv_num(r.lw->D_ST) << ','
        << csv_num(r.lw->D_Ram) << ',' << csv_num(r.lw->D_full) << ','
        << csv_num(r.lw->hz_full) << ',' << csv_num(r.D_approx) << ','
        << csv_num(r.D_approx / (2.0 * 3.14159265358979323846)) << ",ok\n";
  } else {
    out << ",,,,,," << csv_num(r.D_approx) << ','
        << csv_num(r.D_approx / (2.0 * 3.14159265358979323846)) << ",dark_fringe\n";
  }
  return out.str();
}

std::string regime_csv(const RegimeReport& r) {
  std::ostringstream out;
  out << "link,left,right,ratio,pass,skipped\n";
  for (const auto& l : r.links)
    out << l.name << ',' << csv_num(l.left) << ',' << csv_num(l.right) << ','
        << csv_num(l.ratio) << ',' << (l.pass ? 1 : 0) << ',' << (l.skipped ? 1 : 0)
        << '\n';
  return out.str();
}

std::string regime_pretty(const RegimeReport& r) {
  std::ostringstream out;
  out << "regime chain (min separation " << format_g9(r.min_separation) << "): "
      << (r.overall_pass ? "PASS" : "FAIL") << (r.degenerate ? " (degenerate)" : "") << "\n";
  for (const auto& l : r.links) {
    out << "  " << l.name << ": ";
    if (l.skipped) {
      out << "skipped (degenerate)\n";
      continue;
    }
    out << format_g9(l.left) << " vs " << format_g9(l.right) << "  ratio "
        << format_g9(l.ratio) << "  " << (l.pass ? "pass" : "FAIL") << "\n";
  }
  return out.str();
}

std::string trajectory_csv(const TrajectoryResult& trajectory) {
  std::ostringstream out;
  out << "time_s,alpha_re,alpha_im,photon_number,N_a,N_b\n";
  for (std::size_t i = 0; i < trajectory.times.size(); ++i) {
    out << csv_num(trajectory.times[i]) << ',' << csv_num(trajectory.alphas[i].real())
        << ',' << csv_num(trajectory.alphas[i].imag()) << ','
        << csv_num(trajectory.photon_numbers[i]) << ',' << csv_num(trajectory.macro_Na[i])
        << ',' << csv_num(trajectory.macro_Nb[i]) << '\n';
  }
  return out.str();
}

namespace {

// Lag window for the phase-diffusion fit: above the cavity correlation time,
// below both duration/10 and a tenth of a diffusion time.
std::pair<double, double> fit_window(const SimConfig& sim, std::optional<double> d_expected,
                                     double record_span) {
  double hi = record_span / 10.0;
  if (d_expected && *d_expected > 0.0) hi = std::min(hi, 0.1 / *d_expected);
  double lo = 10.0 / sim.laser.cavity.kappa;
  hi = std::max(hi, sim.dt * static_cast<double>(sim.output_stride) * 4.0);
  if (lo >= hi) lo = hi / 10.0;
  return {lo, hi};
}

TrajectoryRow analyze_trajectory(std::size_t index, const SimConfig& sim,
                                 const TrajectoryOutcome& outcome,
                                 std::optional<double> d_expected,
                                 std::size_t psd_segments) {
  TrajectoryRow row;
  row.index = index;
  row.seed = sim.seed;
  if (!outcome.result) {
    row.error = outcome.error;
    return row;
  }
  const TrajectoryResult& traj = *outcome.result;
  row.seed = traj.seed;
  row.mean_photon = time_average(traj.photon_numbers);
  row.mean_Na = time_average(traj.macro_Na);
  row.mean_Nb = time_average(traj.macro_Nb);

  try {
    const auto phase = unwrap_phase(traj.times, traj.alphas);
    const double span = traj.times.back() - traj.times.front();
    const auto [lo, hi] = fit_window(sim, d_expected, span);
    row.phase_fit = phase_diffusion_fit(phase, lo, hi);
    row.ok = true;
  } catch (const std::exception& e) {
    row.error = e.what();
    return row;
  }

  // Lorentzian cross-check when the record is long enough for 8 segments of
  // 1024 samples and actually resolves the line.
  if (traj.times.size() >= psd_segments * 1024) {
    try {
      const auto demod = demodulate_mean_frequency(traj.times, traj.alphas,
                                                   &row.carrier_offset);
      const auto psd = field_psd(traj.times, demod, psd_segments);
      row.lorentz = lorentzian_fit(psd);
      row.have_lorentz = true;
    } catch (const std::exception&) {
      row.have_lorentz = false;
    }
  }
  return row;
}

} // namespace

SimulateSummary run_simulate(const RunConfig& config, const SimulateOptions& options) {
  const SimConfig sim = make_sim_config(config);
  validate(sim);

  SimulateSummary summary;
  summary.ss = steady_state(sim.laser);
  if (summary.ss) {
    const auto [ga, gb] = gated_steady_populations(*summary.ss, sim.laser);
    summary.gated_Na = ga;
    summary.gated_Nb = gb;
  }
  if (auto lw = linewidth_full(sim.laser)) summary.D_analytic = lw->D_full;

  const auto outcomes =
      run_ensemble(sim, options.trajectories, options.seed_base, options.workers);

  const bool want_files = !options.out_dir.empty();
  Manifest manifest;
  if (want_files) {
    fs::create_directories(options.out_dir);
    manifest.add("tool.name", "ramseylab");
    manifest.add("tool.version", k_tool_version);
    manifest.add("run.command", "simulate");
    manifest.add("run.timestamp", timestamp_utc());
    manifest.add("run.trajectories", std::to_string(options.trajectories));
    manifest.add("run.seed_base", std::to_string(options.seed_base));
    std::ostringstream seeds;
    for (std::size_t i = 0; i < options.trajectories; ++i)
      seeds << (i ? " " : "") << options.seed_base + i;
    manifest.add("run.seeds", seeds.str());
    append_config_snapshot(manifest, config);
  }

  std::vector<std::pair<double, double>> phase_estimates;
  std::vector<std::pair<double, double>> lorentz_estimates;
  double photon_acc = 0.0, na_acc = 0.0, nb_acc = 0.0;

  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    SimConfig cfg_i = sim;
    cfg_i.seed = options.seed_base + i;
    TrajectoryRow row =
        analyze_trajectory(i, cfg_i, outcomes[i], summary.D_analytic, options.psd_segments);
    if (row.ok) {
      ++summary.n_ok;
      phase_estimates.emplace_back(row.phase_fit.D_hat, row.phase_fit.std_err);
      if (row.have_lorentz)
        lorentz_estimates.emplace_back(row.lorentz.D_hat, row.lorentz.std_err);
      photon_acc += row.mean_photon;
      na_acc += row.mean_Na;
      nb_acc += row.mean_Nb;
    }

    if (want_files && options.write_trajectories && outcomes[i].result) {
      char name[32];
      std::snprintf(name, sizeof name, "traj_%04zu.csv", i);
      const std::string path = options.out_dir + "/" + name;
      write_text_file(path, trajectory_csv(*outcomes[i].result));
      manifest.add_file_digest(name, path);
    }
    summary.rows.push_back(std::move(row));
  }

  if (summary.n_ok * 5 < options.trajectories * 4)
    throw StatisticalError("run_simulate: fewer than 80% of trajectories succeeded");

  combine_estimates(phase_estimates, summary.D_phase, summary.D_phase_se);
  if (!lorentz_estimates.empty()) {
    summary.have_lorentz = true;
    combine_estimates(lorentz_estimates, summary.D_lorentz, summary.D_lorentz_se);
  }
  if (summary.n_ok > 0) {
    const double n = static_cast<double>(summary.n_ok);
    summary.mean_photon = photon_acc / n;
    summary.mean_Na = na_acc / n;
    summary.mean_Nb = nb_acc / n;
  }
  if (summary.D_analytic && *summary.D_analytic > 0.0)
    summary.ratio = summary.D_phase / *summary.D_analytic;

  if (want_files) {
    write_text_file(options.out_dir + "/config.cfg", emit_config(config));
    manifest.add_file_digest("config.cfg", options.out_dir + "/config.cfg");
    write_text_file(options.out_dir + "/estimates.csv", estimates_csv(summary));
    manifest.add_file_digest("estimates.csv", options.out_dir + "/estimates.csv");
    write_text_file(options.out_dir + "/summary.csv", summary_csv(summary));
    manifest.add_file_digest("summary.csv", options.out_dir + "/summary.csv");
    write_text_file(options.out_dir + "/manifest.txt", manifest.text());
  }
  return summary;
}

std::string estimates_csv(const SimulateSummary& summary) {
  std::ostringstream out;
  out << "trajectory,seed,method,D_radps,stderr_radps,r_squared,window_lo,window_hi,"
         "reliable,resolution_limited,status\n";
  for (const auto& row : summary.rows) {
    if (!row.ok) {
      out << row.index << ',' << row.seed << ",phase_diffusion_fit,,,,,,,,failed: "
          << row.error << '\n';
      continue;
    }
    const auto& pf = row.phase_fit;
    out << row.index << ',' << row.seed << ",phase_diffusion_fit," << csv_num(pf.D_hat)
        << ',' << csv_num(pf.std_err) << ',' << csv_num(pf.r_squared) << ','
        << csv_num(pf.window_lo) << ',' << csv_num(pf.window_hi) << ','
        << (pf.reliable ? 1 : 0) << ',' << (pf.resolution_limited ? 1 : 0) << ",ok\n";
    if (row.have_lorentz) {
      const auto& lf = row.lorentz;
      out << row.index << ',' << row.seed << ",lorentzian_fit," << csv_num(lf.D_hat) << ','
          << csv_num(lf.std_err) << ',' << csv_num(lf.r_squared) << ','
          << csv_num(lf.window_lo) << ',' << csv_num(lf.window_hi) << ','
          << (lf.reliable ? 1 : 0) << ',' << (lf.resolution_limited ? 1 : 0) << ",ok\n";
    }
  }
  return out.str();
}

std::string summary_csv(const SimulateSummary& summary) {
  std::ostringstream out;
  out << "n_trajectories,n_ok,D_phase_radps,D_phase_stderr,D_lorentz_radps,"
         "D_lorentz_stderr,D_analytic_full_radps,ratio_sim_over_analytic,"
         "mean_photon,analytic_I0,mean_Na,mean_Nb,analytic_gated_Na,analytic_gated_Nb\n";
  out << summary.rows.size() << ',' << summary.n_ok << ',' << csv_num(summary.D_phase)
      << ',' << csv_num(summary.D_phase_se) << ',';
  if (summary.have_lorentz)
    out << csv_num(summary.D_lorentz) << ',' << csv_num(summary.D_lorentz_se) << ',';
  else
    out << ",,";
  if (summary.D_analytic) out << csv_num(*summary.D_analytic);
  out << ',';
  if (summary.ratio) out << csv_num(*summary.ratio);
  out << ',' << csv_num(summary.mean_photon) << ',';
  if (summary.ss) out << csv_num(summary.ss->photon_number);
  out << ',' << csv_num(summary.mean_Na) << ',' << csv_num(summary.mean_Nb) << ','
      << csv_num(summary.gated_Na) << ',' << csv_num(summary.gated_Nb) << '\n';
  return out.str();
}

SweepResult run_sweep(const RunConfig& config, const SweepOptions& options) {
  if (options.count < 2) throw ConfigError("sweep count must be >= 2", "count");
  {
    // Path must resolve before any work starts.
    LaserConfig probe = config.laser;
    set_laser_key(probe, options.param_path, options.start);
  }

  SweepResult result;
  for (std::size_t k = 0; k < options.count; ++k) {
    const double value =
        options.start +
        (options.stop - options.start) * static_cast<double>(k) /
            static_cast<double>(options.count - 1);

    RunConfig point = config;
    set_laser_key(point.laser, options.param_path, value);
    validate(point.laser);

    SweepRow row;
    row.value = value;
    row.theta = point.laser.geometry.theta();
    row.phi = point.laser.geometry.phi();
    row.p = point.laser.pump.p;
    row.D_approx = linewidth_approx(point.laser);
    if (auto lw = linewidth_full(point.laser)) {
      row.D_full = lw->D_full;
      row.I0 = steady_state(point.laser)->photon_number;
    } else {
      row.dark = true;
    }

    if (options.trajectories > 0) {
      SimulateOptions sim_opts;
      sim_opts.trajectories = options.trajectories;
      sim_opts.seed_base = options.seed_base + k * options.trajectories;
      sim_opts.workers = options.workers;
      sim_opts.write_trajectories = false;
      try {
        const auto summary = run_simulate(point, sim_opts);
        row.simulated = true;
        row.D_sim = summary.D_phase;
        row.D_sim_se = summary.D_phase_se;
      } catch (const std::exception&) {
        row.simulated = false; // point-level failure recorded as missing column
      }
    }
    result.rows.push_back(row);
  }

  if (!options.out_dir.empty()) {
    fs::create_directories(options.out_dir);
    Manifest manifest;
    manifest.add("tool.name", "ramseylab");
    manifest.add("tool.version", k_tool_version);
    manifest.add("run.command", "sweep");
    manifest.add("run.timestamp", timestamp_utc());
    manifest.add("run.param", options.param_path);
    manifest.add("run.start", format_g17(options.start));
    manifest.add("run.stop", format_g17(options.stop));
    manifest.add("run.count", std::to_string(options.count));
    manifest.add("run.trajectories", std::to_string(options.trajectories));
    manifest.add("run.seed_base", std::to_string(options.seed_base));
    append_config_snapshot(manifest, config);
    write_text_file(options.out_dir + "/sweep.csv", sweep_csv(result));
    manifest.add_file_digest("sweep.csv", options.out_dir + "/sweep.csv");
    write_text_file(options.out_dir + "/manifest.txt", manifest.text());
  }
  return result;
}

std::string sweep_csv(const SweepResult& result) {
  std::ostringstream out;
  out << "index,value,theta,phi,p,status,I0,D_full_radps,D_approx_radps,D_sim_radps,"
         "D_sim_stderr\n";
  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    const auto& row = result.rows[i];
    out << i << ',' << csv_num(row.value) << ',' << csv_num(row.theta) << ','
        << csv_num(row.phi) << ',' << csv_num(row.p) << ','
        << (row.dark ? "dark_fringe" : "ok") << ',';
    if (!row.dark) out << csv_num(row.I0) << ',' << csv_num(row.D_full);
    else out << ',';
    out << ',' << csv_num(row.D_approx) << ',';
    if (row.simulated) out << csv_num(row.D_sim) << ',' << csv_num(row.D_sim_se);
    else out << ',';
    out << '\n';
  }
  return out.str();
}

} // namespace ramsey
