// Command-line front end: analytic evaluation, Monte Carlo simulation,
// parameter sweeps and regime validation for the bad-cavity Ramsey laser.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical abort,
// 4 statistical insufficiency.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "ramsey/cli_commands.hpp"

namespace {

ramsey::RunConfig load_config(const std::string& config_path, const std::string& preset,
                              std::optional<std::uint64_t> seed_override) {
  ramsey::RunConfig rc;
  if (!config_path.empty()) {
    rc = ramsey::parse_config_file(config_path);
  } else if (!preset.empty()) {
    rc = ramsey::parse_config("preset = " + preset + "\n");
  } else {
    throw ramsey::ConfigError("either --config or --preset is required");
  }
  if (seed_override) rc.sim.seed = *seed_override;
  return rc;
}

void echo_config(const ramsey::RunConfig& rc) {
  std::cerr << "# resolved configuration\n" << ramsey::emit_config(rc);
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"bad-cavity Ramsey laser: analytic linewidth theory and microscopic "
               "Monte Carlo simulation"};
  app.require_subcommand(1);

  std::string config_path;
  std::string preset;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "configuration file (key = value lines)");
  app.add_option("--preset", preset, "named preset (ca40)");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "seed / seed base override");

  auto* cmd_analytic = app.add_subcommand("analytic", "closed-form steady state and linewidth");
  cmd_analytic->fallthrough();
  double min_separation = 5.0;
  cmd_analytic->add_option("--min-separation", min_separation,
                           "required ratio for each regime-chain link");

  auto* cmd_validate = app.add_subcommand("validate", "regime-chain check only");
  cmd_validate->fallthrough();
  cmd_validate->add_option("--min-separation", min_separation,
                           "required ratio for each regime-chain link");

  auto* cmd_simulate = app.add_subcommand("simulate", "Monte Carlo trajectory ensemble");
  cmd_simulate->fallthrough();
  std::size_t trajectories = 2;
  std::size_t psd_segments = 8;
  unsigned workers = 0;
  bool no_trajectory_files = false;
  cmd_simulate->add_option("--trajectories", trajectories, "ensemble size");
  cmd_simulate->add_option("--psd-segments", psd_segments, "Welch segments for the Lorentzian fit");
  cmd_simulate->add_option("--workers", workers, "worker threads (0 = all cores)");
  cmd_simulate->add_flag("--no-trajectory-files", no_trajectory_files,
                         "skip per-trajectory CSV records");

  auto* cmd_sweep = app.add_subcommand("sweep", "linear parameter sweep");
  cmd_sweep->fallthrough();
  std::string param_path = "geometry.delta2";
  double sweep_start = 0.0, sweep_stop = 0.0;
  std::size_t sweep_count = 2;
  std::size_t sweep_traj = 0;
  cmd_sweep->add_option("--param", param_path, "dotted parameter path");
  cmd_sweep->add_option("--start", sweep_start, "first grid value")->required();
  cmd_sweep->add_option("--stop", sweep_stop, "last grid value")->required();
  cmd_sweep->add_option("--count", sweep_count, "grid points (>= 2)");
  cmd_sweep->add_option("--trajectories", sweep_traj, "simulated trajectories per point");
  cmd_sweep->add_option("--workers", workers, "worker threads (0 = all cores)");

  CLI11_PARSE(app, argc, argv);

  try {
    const ramsey::RunConfig rc = load_config(config_path, preset, seed);
    echo_config(rc);

    if (cmd_analytic->parsed() || cmd_validate->parsed()) {
      const auto report = ramsey::run_analytic(rc.laser, min_separation);
      std::cerr << ramsey::regime_pretty(report.regime);
      if (cmd_validate->parsed()) {
        std::cout << ramsey::regime_csv(report.regime);
      } else {
        std::cout << ramsey::analytic_csv(report);
        if (!out_dir.empty()) {
          std::filesystem::create_directories(out_dir);
          ramsey::write_text_file(out_dir + "/analytic.csv", ramsey::analytic_csv(report));
          ramsey::write_text_file(out_dir + "/regime.csv", ramsey::regime_csv(report.regime));
          ramsey::Manifest manifest;
          manifest.add("tool.name", "ramseylab");
          manifest.add("tool.version", ramsey::k_tool_version);
          manifest.add("run.command", "analytic");
          manifest.add_file_digest("analytic.csv", out_dir + "/analytic.csv");
          manifest.add_file_digest("regime.csv", out_dir + "/regime.csv");
          ramsey::write_text_file(out_dir + "/manifest.txt", manifest.text());
        }
      }
      return 0;
    }

    if (cmd_simulate->parsed()) {
      ramsey::SimulateOptions options;
      options.trajectories = trajectories;
      options.seed_base = rc.sim.seed;
      options.out_dir = out_dir;
      options.psd_segments = psd_segments;
      options.write_trajectories = !no_trajectory_files;
      options.workers = workers;
      const auto summary = ramsey::run_simulate(rc, options);
      std::cout << ramsey::summary_csv(summary);
      std::cerr << "trajectories ok: " << summary.n_ok << "/" << summary.rows.size() << "\n";
      return 0;
    }

    if (cmd_sweep->parsed()) {
      ramsey::SweepOptions options;
      options.param_path = param_path;
      options.start = sweep_start;
      options.stop = sweep_stop;
      options.count = sweep_count;
      options.trajectories = sweep_traj;
      options.seed_base = rc.sim.seed;
      options.out_dir = out_dir;
      options.workers = workers;
      const auto result = ramsey::run_sweep(rc, options);
      std::cout << ramsey::sweep_csv(result);
      return 0;
    }
  } catch (const ramsey::ConfigError& e) {
    std::cerr << "config error";
    if (!e.key.empty()) std::cerr << " [" << e.key << "]";
    if (e.line > 0) std::cerr << " (line " << e.line << ")";
    std::cerr << ": " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ramsey::SimAbort& e) {
    std::cerr << "numerical abort: " << e.what() << " at t = " << e.time
              << " s, |alpha|^2 = " << std::norm(e.alpha) << ", active atoms "
              << e.active_atoms << "\n";
    return 3;
  } catch (const ramsey::StatisticalError& e) {
    std::cerr << "statistical insufficiency: " << e.what() << "\n";
    return 4;
  } catch (const std::domain_error& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
