// Acceptance suite: one pass/fail line per criterion, with the measured
// numbers printed so every tolerance is auditable. Criteria 5-8 run a scaled
// bench configuration (regime chain intact, photon number >= 5) instead of
// the Ca-40 numbers, whose sub-hertz line would need tens of seconds of
// simulated time per trajectory.
//
// Usage: acceptance [--cli PATH] [--only N]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "ramsey/analytic.hpp"
#include "ramsey/bloch.hpp"
#include "ramsey/cli_commands.hpp"
#include "ramsey/config.hpp"
#include "ramsey/config_io.hpp"
#include "ramsey/sim.hpp"
#include "ramsey/spectral.hpp"
#include "test_support.hpp"

using namespace ramsey;
using ramsey::testing::DeskParams;
using ramsey::testing::desk_config;
using std::numbers::pi;

namespace fs = std::filesystem;

namespace {

std::string g_cli_path;

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

bool report(int index, bool pass, const std::string& name, const std::string& detail,
            double seconds) {
  std::printf("%s  [%d] %-34s %s  (%.1fs)\n", pass ? "PASS" : "FAIL", index, name.c_str(),
              detail.c_str(), seconds);
  std::fflush(stdout);
  return pass;
}

std::string fmt(double v) { return format_g9(v); }

// Bench configuration shared by criteria 5, 6 and 8: fringe phase 0.15 pi is
// inside the window where the compensated operating point is dynamically
// stable (steeper slopes self-pulse; see README).
DeskParams bench_params(double p) {
  DeskParams d;
  d.photons = 9.0;
  d.phi = 0.15 * pi;
  d.p = p;
  d.dipole_seed = 0.5;
  d.duration = 1.5e-3;
  d.output_stride = 20;
  return d;
}

struct EnsembleStats {
  std::vector<double> d_hats;
  std::vector<double> d_errs;
  double mean_photon = 0.0;
  double mean_na = 0.0;
  double mean_nb = 0.0;
  double combined = 0.0;
  double combined_se = 0.0;
  std::size_t failed = 0;
};

EnsembleStats measure_ensemble(const SimConfig& base, std::size_t count,
                               std::uint64_t seed_base, double d_expected) {
  EnsembleStats stats;
  const auto outcomes = run_ensemble(base, count, seed_base, 0);
  double wsum = 0.0;
  for (const auto& outcome : outcomes) {
    if (!outcome.result) {
      ++stats.failed;
      continue;
    }
    const auto& traj = *outcome.result;
    double iavg = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
      iavg += traj.photon_numbers[i];
      na += traj.macro_Na[i];
      nb += traj.macro_Nb[i];
    }
    const double n = static_cast<double>(traj.times.size());
    stats.mean_photon += iavg / n;
    stats.mean_na += na / n;
    stats.mean_nb += nb / n;

    const auto phase = unwrap_phase(traj.times, traj.alphas);
    const double span = traj.times.back() - traj.times.front();
    const double hi = std::min(span / 10.0, 0.1 / d_expected);
    const auto est = phase_diffusion_fit(phase, 10.0 / base.laser.cavity.kappa, hi);
    stats.d_hats.push_back(est.D_hat);
    stats.d_errs.push_back(est.std_err);
    const double w = 1.0 / std::max(est.std_err * est.std_err, 1e-300);
    stats.combined += w * est.D_hat;
    wsum += w;
  }
  const double ok = static_cast<double>(count - stats.failed);
  stats.mean_photon /= ok;
  stats.mean_na /= ok;
  stats.mean_nb /= ok;
  stats.combined /= wsum;
  stats.combined_se = std::sqrt(1.0 / wsum);
  return stats;
}

// ---- criterion 1 -----------------------------------------------------------

bool criterion_1() {
  Timer timer;
  const auto report_data = run_analytic(ca40_preset());
  const double d = report_data.D_approx;
  const double hz = d / (2.0 * pi);
  const double natural = 2.0 * pi * 320.0;
  const bool exact = std::abs(d - 0.2) <= 1e-9 * 0.2;
  const bool sub_hertz = d < 2.0 * pi * 1.0;
  const bool two_orders = natural / d >= 100.0;
  const bool pass = exact && sub_hertz && two_orders && timer.seconds() < 1.0;
  std::ostringstream detail;
  detail << "D_approx = " << fmt(d) << " rad/s = " << fmt(hz)
         << " Hz; natural/D = " << fmt(natural / d);
  return report(1, pass, "subnatural-linewidth headline", detail.str(), timer.seconds());
}

// ---- criterion 2 -----------------------------------------------------------

bool criterion_2() {
  Timer timer;
  double max_dev = 0.0;
  double max_flux = 0.0;
  double max_identity = 0.0;
  const int n = 32; // 32 x 32 > 10^3 grid points
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double theta = 2.0 * pi * i / (n - 1.0);
      const double phi = 2.0 * pi * j / (n - 1.0);
      const auto coeffs = ramsey_coefficients(theta, phi);
      const auto exits = ramsey_expectations(theta, phi);

      max_dev = std::max({max_dev, std::abs(coeffs.A0 - exits[0].sigma_a),
                          std::abs(coeffs.A1 - exits[1].sigma_a),
                          std::abs(coeffs.A2 - exits[2].sigma_a),
                          std::abs(coeffs.B0 - exits[0].sigma_b),
                          std::abs(coeffs.B1 - exits[1].sigma_b),
                          std::abs(coeffs.B2 - exits[2].sigma_b),
                          std::abs(coeffs.C0 - exits[0].coherence),
                          std::abs(coeffs.C1 - exits[1].coherence),
                          std::abs(coeffs.C2 - exits[2].coherence)});

      const auto [up, lo] = excitation_flux(coeffs);
      max_flux = std::max(max_flux, std::abs(up - lo));

      // The paper-level coherence identities pin the C values independently.
      const double target = -std::sin(theta) * std::sin(theta) * std::sin(phi) * std::sin(phi);
      auto combo = [](std::complex<double> c) {
        const auto d = c - std::conj(c);
        return (d * d).real();
      };
      max_identity = std::max({max_identity, std::abs(coeffs.C0.imag()),
                               std::abs(combo(coeffs.C1) - target),
                               std::abs(combo(coeffs.C2) - target)});
    }
  }
  const bool pass =
      max_dev < 1e-12 && max_flux < 1e-12 && max_identity < 1e-11 && timer.seconds() < 5.0;
  std::ostringstream detail;
  detail << "max coeff dev " << fmt(max_dev) << ", flux dev " << fmt(max_flux)
         << ", identity dev " << fmt(max_identity) << " over " << n * n << " points";
  return report(2, pass, "closed-form oracle equivalence", detail.str(), timer.seconds());
}

// ---- criterion 3 -----------------------------------------------------------

bool criterion_3() {
  Timer timer;
  int count = 0;
  double worst = 0.0;
  for (double kappa : {1e7, 3e7, 1e8, 3e8, 1e9}) {
    for (double separation : {100.0, 300.0, 1000.0, 3000.0}) {
      for (double q : {0.002, 0.005, 0.01}) { // q = gamma_ab tau = D_ST / D_Ram
        for (double g : {1e3, 1e4}) {
          LaserConfig c;
          c.cavity.kappa = kappa;
          c.cavity.g = g;
          const double gamma_ab = 0.5 * kappa / separation;
          c.atom.gamma_ab = gamma_ab;
          c.geometry.tau = q / gamma_ab;
          c.geometry.T_drift = 10.0 * c.geometry.tau;
          c.geometry.omega_R = (pi / 2.0) / c.geometry.tau; // theta = pi/2
          c.geometry.delta2 = 0.0;                          // phi = 0: full flux
          c.pump.R = 1e6;
          c.pump.p = 1.0;

          const auto lw = linewidth_full(c);
          if (!lw) return report(3, false, "Eq.(11) -> Eq.(12) reduction",
                                 "unexpected dark fringe", timer.seconds());
          if (lw->D_ST / lw->D_Ram > 0.01 * (1 + 1e-6))
            return report(3, false, "Eq.(11) -> Eq.(12) reduction",
                          "config outside D_ST/D_Ram bound", timer.seconds());
          worst = std::max(worst, std::abs(lw->D_full - lw->D_approx) / lw->D_approx);
          ++count;
        }
      }
    }
  }
  const bool pass = count >= 100 && worst < 0.02 && timer.seconds() < 5.0;
  std::ostringstream detail;
  detail << count << " configs, max |D_full - D_approx| / D_approx = " << fmt(worst);
  return report(3, pass, "Eq.(11) -> Eq.(12) reduction", detail.str(), timer.seconds());
}

// ---- criterion 4 -----------------------------------------------------------

bool criterion_4() {
  Timer timer;
  const auto c = ca40_preset();
  const auto lw = linewidth_full(c);
  const double gamma_ab = c.atom.gamma_ab;

  // omega -> 0 consistency at gamma_ab / 100.
  const std::vector<double> low = {gamma_ab / 100.0};
  const auto low_curve = phase_noise_spectrum(c, low);
  const double limit = low[0] * low[0] * low_curve[0].value;
  const double gap = std::abs(limit - lw->D_full) / lw->D_full;

  // Log-log slope over [gamma_ab, kappa/20].
  std::vector<double> grid;
  const double w_lo = gamma_ab, w_hi = c.cavity.kappa / 20.0;
  for (int k = 0; k < 400; ++k)
    grid.push_back(w_lo * std::pow(w_hi / w_lo, k / 399.0));
  const auto curve = phase_noise_spectrum(c, grid);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& pt : curve) {
    const double x = std::log(pt.omega), y = std::log(pt.value);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
  }
  const double n = static_cast<double>(curve.size());
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);

  const bool pass = gap < 0.01 && std::abs(slope + 2.0) < 0.02 && timer.seconds() < 5.0;
  std::ostringstream detail;
  detail << "omega->0 gap " << fmt(gap) << ", slope " << fmt(slope);
  return report(4, pass, "spectrum consistency", detail.str(), timer.seconds());
}

// ---- criterion 5 -----------------------------------------------------------

bool criterion_5() {
  Timer timer;
  DeskParams d = bench_params(1.0);
  d.duration = 3.0e-4;
  const SimConfig sim = desk_config(d);

  const auto regime = validate_regime(sim.laser, 5.0);
  const auto ss = steady_state(sim.laser);
  const auto [gated_a, gated_b] = gated_steady_populations(*ss, sim.laser);

  EnsembleStats stats;
  {
    const auto outcomes = run_ensemble(sim, 32, 9000, 0);
    for (const auto& outcome : outcomes) {
      if (!outcome.result) { ++stats.failed; continue; }
      const auto& traj = *outcome.result;
      double iavg = 0, na = 0, nb = 0;
      for (std::size_t i = 0; i < traj.times.size(); ++i) {
        iavg += traj.photon_numbers[i];
        na += traj.macro_Na[i];
        nb += traj.macro_Nb[i];
      }
      const double n = static_cast<double>(traj.times.size());
      stats.mean_photon += iavg / n;
      stats.mean_na += na / n;
      stats.mean_nb += nb / n;
    }
    const double ok = 32.0 - static_cast<double>(stats.failed);
    stats.mean_photon /= ok;
    stats.mean_na /= ok;
    stats.mean_nb /= ok;
  }

  const double dev_i = std::abs(stats.mean_photon - ss->photon_number) / ss->photon_number;
  const double dev_a = std::abs(stats.mean_na - gated_a) / gated_a;
  const double dev_b = std::abs(stats.mean_nb - gated_b) / gated_b;

  const bool pass = regime.overall_pass && ss->photon_number >= 5.0 && stats.failed == 0 &&
                    dev_i < 0.15 && dev_a < 0.15 && dev_b < 0.15 &&
                    timer.seconds() < 600.0;
  std::ostringstream detail;
  detail << "I " << fmt(stats.mean_photon) << "/" << fmt(ss->photon_number) << " (dev "
         << fmt(dev_i) << "), Na " << fmt(stats.mean_na) << "/" << fmt(gated_a) << " (dev "
         << fmt(dev_a) << "), Nb " << fmt(stats.mean_nb) << "/" << fmt(gated_b) << " (dev "
         << fmt(dev_b) << "), regime " << (regime.overall_pass ? "ok" : "FAIL");
  return report(5, pass, "simulator vs analytic steady state", detail.str(),
                timer.seconds());
}

// ---- criterion 6 -----------------------------------------------------------

bool criterion_6() {
  Timer timer;
  const DeskParams d1 = bench_params(1.0);
  const DeskParams d0 = bench_params(0.0);
  const SimConfig sim1 = desk_config(d1);
  const SimConfig sim0 = desk_config(d0);
  const double d_full_1 = linewidth_full(sim1.laser)->D_full;
  const double d_full_0 = linewidth_full(sim0.laser)->D_full;

  const std::size_t n_pairs = 32;
  const auto stats1 = measure_ensemble(sim1, n_pairs, 20000, d_full_1);
  const auto stats0 = measure_ensemble(sim0, n_pairs, 20000, d_full_0);

  const double ratio1 = stats1.combined / d_full_1;
  const double ratio0 = stats0.combined / d_full_0;

  // Paired ordering test: same seed index drives both pumping statistics.
  double mean_delta = 0.0;
  std::vector<double> deltas;
  for (std::size_t i = 0; i < stats1.d_hats.size() && i < stats0.d_hats.size(); ++i) {
    deltas.push_back(stats0.d_hats[i] - stats1.d_hats[i]);
    mean_delta += deltas.back();
  }
  mean_delta /= static_cast<double>(deltas.size());
  double var_delta = 0.0;
  for (double x : deltas) var_delta += (x - mean_delta) * (x - mean_delta);
  var_delta /= static_cast<double>(deltas.size() - 1);
  const double t_order = mean_delta / std::sqrt(var_delta / deltas.size());

  // Method cross-check on long records (Lorentzian needs to resolve the line).
  SimConfig long_cfg = sim1;
  long_cfg.duration = 3.5e-2;
  long_cfg.output_stride = 200;
  double d_lor = 0.0, d_lor_se = 0.0, d_walk = 0.0, d_walk_se = 0.0;
  {
    const auto outcomes = run_ensemble(long_cfg, 4, 31000, 0);
    double wl = 0.0, ww = 0.0;
    for (const auto& outcome : outcomes) {
      if (!outcome.result) continue;
      const auto& traj = *outcome.result;
      const auto demod = demodulate_mean_frequency(traj.times, traj.alphas);
      const auto psd = field_psd(traj.times, demod, 8);
      const auto lor = lorentzian_fit(psd);
      const auto walk = phase_diffusion_fit(unwrap_phase(traj.times, traj.alphas),
                                            10.0 / long_cfg.laser.cavity.kappa,
                                            std::min(traj.times.back() / 10.0,
                                                     0.1 / d_full_1));
      const double wwl = 1.0 / std::max(lor.std_err * lor.std_err, 1e-300);
      const double www = 1.0 / std::max(walk.std_err * walk.std_err, 1e-300);
      d_lor += wwl * lor.D_hat;
      wl += wwl;
      d_walk += www * walk.D_hat;
      ww += www;
    }
    d_lor /= wl;
    d_lor_se = std::sqrt(1.0 / wl);
    d_walk /= ww;
    d_walk_se = std::sqrt(1.0 / ww);
  }
  const double method_gap = std::abs(d_lor - d_walk);
  const double method_band = 2.0 * std::sqrt(d_lor_se * d_lor_se + d_walk_se * d_walk_se);

  const bool level1 = ratio1 >= 0.5 && ratio1 <= 2.0;
  const bool level0 = ratio0 >= 0.5 && ratio0 <= 2.0;
  const bool ordered = t_order >= 3.0 && mean_delta > 0.0;
  const bool methods = method_gap <= method_band;
  const bool pass = level1 && level0 && ordered && methods && stats1.failed == 0 &&
                    stats0.failed == 0 && timer.seconds() < 1800.0;
  std::ostringstream detail;
  detail << "D(p=1) " << fmt(stats1.combined) << " vs " << fmt(d_full_1) << " (ratio "
         << fmt(ratio1) << "), D(p=0) " << fmt(stats0.combined) << " vs " << fmt(d_full_0)
         << " (ratio " << fmt(ratio0) << "), ordering t = " << fmt(t_order)
         << ", methods " << fmt(d_walk) << "/" << fmt(d_lor) << " gap " << fmt(method_gap)
         << " <= " << fmt(method_band);
  return report(6, pass, "simulated linewidth vs Eq.(11)", detail.str(), timer.seconds());
}

// ---- criterion 7 -----------------------------------------------------------

bool criterion_7() {
  Timer timer;

  // Analytic leg: 41 evenly spaced points over one full fringe.
  RunConfig rc;
  rc.laser = desk_config(bench_params(1.0)).laser;
  rc.sim.dt = 5e-9;
  rc.sim.duration = 1.2e-3;
  rc.sim.output_stride = 20;
  rc.sim.drift_frame = "field";
  rc.sim.compensate_pulling = true;

  const double T = rc.laser.geometry.T_drift;
  SweepOptions analytic_sweep;
  analytic_sweep.param_path = "geometry.delta2";
  analytic_sweep.start = 0.0;
  analytic_sweep.stop = 2.0 * pi / T;
  analytic_sweep.count = 41;
  const auto analytic_result = run_sweep(rc, analytic_sweep);

  double dmin = 1e300, dmax = -1e300;
  std::size_t imin = 0;
  for (std::size_t i = 0; i < analytic_result.rows.size(); ++i) {
    const double v = analytic_result.rows[i].D_approx;
    if (v < dmin) { dmin = v; imin = i; }
    dmax = std::max(dmax, v);
  }
  const double phi_min = analytic_result.rows[imin].phi;
  const bool minima_ok =
      (std::abs(phi_min - pi / 2.0) < 1e-9 || std::abs(phi_min - 3.0 * pi / 2.0) < 1e-9) &&
      std::abs(dmin / dmax - 0.5) < 1e-12;

  // Simulated leg: points inside the dynamically stable fringe window.
  const std::vector<double> phis = {0.0,      0.10 * pi, 0.15 * pi, 0.20 * pi,
                                    1.80 * pi, 1.85 * pi, 1.90 * pi, 2.0 * pi};
  std::vector<double> d_sim, d_se;
  std::ostringstream table;
  bool points_ok = true;
  for (std::size_t k = 0; k < phis.size(); ++k) {
    RunConfig point = rc;
    point.laser.geometry.delta2 = phis[k] / T;
    const SimConfig sim = make_sim_config(point);
    const auto ss = steady_state(sim.laser);
    const double d_expected = linewidth_full(sim.laser)->D_full;
    const auto stats = measure_ensemble(sim, 12, 40000 + 100 * k, d_expected);
    if (stats.failed > 0 ||
        std::abs(stats.mean_photon - ss->photon_number) > 0.5 * ss->photon_number)
      points_ok = false;
    d_sim.push_back(stats.combined);
    d_se.push_back(stats.combined_se);
    table << " " << fmt(phis[k] / pi) << "pi:" << fmt(stats.combined) << "(ratio "
          << fmt(stats.combined / d_expected) << ")";
  }

  std::size_t lo = 0, hi = 0;
  for (std::size_t k = 1; k < d_sim.size(); ++k) {
    if (d_sim[k] < d_sim[lo]) lo = k;
    if (d_sim[k] > d_sim[hi]) hi = k;
  }
  const double visibility = (d_sim[hi] - d_sim[lo]) / (d_sim[hi] + d_sim[lo]);
  const double vis_se =
      2.0 *
      std::sqrt(d_sim[lo] * d_sim[lo] * d_se[hi] * d_se[hi] +
                d_sim[hi] * d_sim[hi] * d_se[lo] * d_se[lo]) /
      ((d_sim[hi] + d_sim[lo]) * (d_sim[hi] + d_sim[lo]));
  const double z_vis = visibility / vis_se;

  const bool pass = minima_ok && points_ok && visibility > 0.0 && z_vis >= 3.0 &&
                    timer.seconds() < 1800.0;
  std::ostringstream detail;
  detail << "analytic min at phi = " << fmt(phi_min) << ", min/max = " << fmt(dmin / dmax)
         << "; simulated visibility " << fmt(visibility) << " (z = " << fmt(z_vis) << ")";
  std::printf("      [7] simulated fringe points:%s\n", table.str().c_str());
  return report(7, pass, "fringe reproduction", detail.str(), timer.seconds());
}

// ---- criterion 8 -----------------------------------------------------------

bool criterion_8() {
  Timer timer;
  DeskParams d = bench_params(0.0); // Poisson injection: full gating-force menu
  d.duration = 3.0e-4;
  d.output_stride = 1;
  const SimConfig sim = desk_config(d);

  std::vector<TrajectoryResult> ensemble;
  ensemble.reserve(32);
  const auto outcomes = run_ensemble(sim, 32, 52000, 0);
  for (const auto& outcome : outcomes) {
    if (!outcome.result)
      return report(8, false, "noise lag structure", "trajectory failed: " + outcome.error,
                    timer.seconds());
    ensemble.push_back(std::move(*outcome.result));
  }
  const auto lag_report = noise_lag_structure(sim, ensemble);

  double ctrl_amp = 0.0, ctrl_se2 = 0.0, ctrl_count = 0.0;
  bool controls_zero = true;
  for (const auto& pt : lag_report.points) {
    if (pt.predicted) continue;
    ctrl_amp += std::abs(pt.mean);
    ctrl_se2 += pt.se_re * pt.se_re + pt.se_im * pt.se_im;
    ctrl_count += 1.0;
    if (std::abs(pt.mean.real()) > 3.0 * pt.se_re ||
        std::abs(pt.mean.imag()) > 3.0 * pt.se_im)
      controls_zero = false;
  }
  ctrl_amp /= ctrl_count;
  const double ctrl_se = std::sqrt(ctrl_se2 / ctrl_count);

  bool peaks_above = true;
  double lag0_amp = 0.0, weakest_z = 1e300;
  std::ostringstream table;
  for (const auto& pt : lag_report.points) {
    const double amp = std::abs(pt.mean);
    const double se = std::sqrt(pt.se_re * pt.se_re + pt.se_im * pt.se_im);
    if (pt.name == "0") lag0_amp = amp;
    if (pt.predicted) {
      const double z = (amp - ctrl_amp) / std::sqrt(se * se + ctrl_se * ctrl_se);
      weakest_z = std::min(weakest_z, z);
      if (z < 3.0) peaks_above = false;
    }
    table << " " << pt.name << ":" << fmt(amp) << (pt.predicted ? "" : "(ctrl)");
  }
  bool lag0_largest = true;
  for (const auto& pt : lag_report.points)
    if (pt.name != "0" && std::abs(pt.mean) >= lag0_amp) lag0_largest = false;

  const bool pass =
      peaks_above && controls_zero && lag0_largest && timer.seconds() < 900.0;
  std::ostringstream detail;
  detail << "weakest peak z = " << fmt(weakest_z) << ", controls "
         << (controls_zero ? "consistent with zero" : "NOT zero") << ", lag0 "
         << (lag0_largest ? "largest" : "NOT largest");
  std::printf("      [8] lag amplitudes:%s\n", table.str().c_str());
  return report(8, pass, "noise lag structure", detail.str(), timer.seconds());
}

// ---- criterion 9 -----------------------------------------------------------

bool criterion_9() {
  Timer timer;
  if (g_cli_path.empty())
    return report(9, false, "determinism and reproducibility",
                  "no --cli path provided", timer.seconds());

  const fs::path scratch = fs::temp_directory_path() / "ramsey_acceptance_repro";
  fs::remove_all(scratch);
  fs::create_directories(scratch);

  DeskParams d = bench_params(1.0);
  d.duration = 2.0e-4;
  RunConfig rc;
  rc.laser = desk_config(d).laser;
  rc.sim.dt = 5e-9;
  rc.sim.duration = d.duration;
  rc.sim.seed = 4242;
  rc.sim.output_stride = 20;
  rc.sim.drift_frame = "field";
  rc.sim.compensate_pulling = true;
  const fs::path cfg = scratch / "repro.cfg";
  write_text_file(cfg.string(), emit_config(rc));

  auto run_once = [&](const fs::path& out) {
    const std::string cmd = g_cli_path + " simulate --config " + cfg.string() +
                            " --trajectories 2 --workers 2 --out " + out.string() +
                            " > /dev/null 2>&1";
    return std::system(cmd.c_str()) == 0;
  };
  const fs::path out_a = scratch / "a", out_b = scratch / "b";
  if (!run_once(out_a) || !run_once(out_b))
    return report(9, false, "determinism and reproducibility", "CLI run failed",
                  timer.seconds());

  bool identical = true;
  for (const char* name :
       {"traj_0000.csv", "traj_0001.csv", "estimates.csv", "summary.csv", "config.cfg"}) {
    if (read_text_file((out_a / name).string()) != read_text_file((out_b / name).string()))
      identical = false;
  }

  // Digests recorded in manifest A must match the bytes produced by run B.
  bool digests_match = true;
  std::istringstream manifest(read_text_file((out_a / "manifest.txt").string()));
  std::string line;
  int digest_lines = 0;
  while (std::getline(manifest, line)) {
    if (line.rfind("digest.", 0) != 0) continue;
    const auto eq = line.find(" = ");
    const std::string name = line.substr(7, eq - 7);
    const std::string digest = line.substr(eq + 3);
    ++digest_lines;
    if (fnv1a64_hex(read_text_file((out_b / name).string())) != digest)
      digests_match = false;
  }

  const bool pass =
      identical && digests_match && digest_lines >= 5 && timer.seconds() < 60.0;
  std::ostringstream detail;
  detail << (identical ? "outputs byte-identical" : "outputs DIFFER") << ", "
         << digest_lines << " digests " << (digests_match ? "reproduced" : "MISMATCH");
  return report(9, pass, "determinism and reproducibility", detail.str(), timer.seconds());
}

} // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--cli" && i + 1 < argc) g_cli_path = argv[++i];
    else if (arg == "--only" && i + 1 < argc) only = std::atoi(argv[++i]);
  }

  using Criterion = bool (*)();
  const std::vector<Criterion> criteria = {criterion_1, criterion_2, criterion_3,
                                           criterion_4, criterion_5, criterion_6,
                                           criterion_7, criterion_8, criterion_9};
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only != 0 && static_cast<int>(i + 1) != only) continue;
    if (!criteria[i]()) ++failures;
  }
  std::printf("%s: %d criterion failure(s)\n", failures ? "FAILURE" : "SUCCESS", failures);
  return failures ? 1 : 0;
}
