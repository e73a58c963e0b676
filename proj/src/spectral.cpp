#include "ramsey/spectral.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include <fftw3.h>

namespace ramsey {

namespace {

constexpr double k_two_pi = 2.0 * std::numbers::pi;

double median_abs(std::span<const std::complex<double>> alphas) {
  std::vector<double> mags(alphas.size());
  for (std::size_t i = 0; i < alphas.size(); ++i) mags[i] = std::abs(alphas[i]);
  const auto mid = mags.begin() + static_cast<std::ptrdiff_t>(mags.size() / 2);
  std::nth_element(mags.begin(), mid, mags.end());
  return *mid;
}

double sample_dt(std::span<const double> times) {
  if (times.size() < 2) throw std::invalid_argument("need at least two samples");
  return (times.back() - times.front()) / static_cast<double>(times.size() - 1);
}

} // namespace

PhaseSeries unwrap_phase(std::span<const double> times,
                         std::span<const std::complex<double>> alphas) {
  if (times.size() != alphas.size())
    throw std::invalid_argument("unwrap_phase: times/alphas size mismatch");
  if (alphas.empty()) throw std::invalid_argument("unwrap_phase: empty input");

  const double floor = 1e-6 * median_abs(alphas);
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (std::abs(alphas[i]) < floor) {
      std::ostringstream msg;
      msg << "unwrap_phase: amplitude below 1e-6 of median at index " << i;
      throw std::domain_error(msg.str());
    }
  }

  PhaseSeries series;
  series.times.assign(times.begin(), times.end());
  series.phases.resize(alphas.size());
  double previous_raw = std::arg(alphas[0]);
  double accumulated = previous_raw;
  series.phases[0] = accumulated;
  for (std::size_t i = 1; i < alphas.size(); ++i) {
    const double raw = std::arg(alphas[i]);
    double delta = raw - previous_raw;
    delta -= k_two_pi * std::round(delta / k_two_pi);
    accumulated += delta;
    series.phases[i] = accumulated;
    previous_raw = raw;
  }
  return series;
}

std::vector<std::complex<double>> demodulate_mean_frequency(
    std::span<const double> times, std::span<const std::complex<double>> alphas,
    double* mean_frequency_out) {
  const auto phase = unwrap_phase(times, alphas);
  const std::size_t n = times.size();

  double t_mean = 0.0, p_mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    t_mean += times[i];
    p_mean += phase.phases[i];
  }
  t_mean /= static_cast<double>(n);
  p_mean /= static_cast<double>(n);

  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dt = times[i] - t_mean;
    num += dt * (phase.phases[i] - p_mean);
    den += dt * dt;
  }
  const double omega_bar = den > 0.0 ? num / den : 0.0;
  if (mean_frequency_out) *mean_frequency_out = omega_bar;

  std::vector<std::complex<double>> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = alphas[i] * std::polar(1.0, -omega_bar * (times[i] - times.front()));
  return out;
}

LinewidthEstimate phase_diffusion_fit(const PhaseSeries& series, double lag_min,
                                      double lag_max) {
  const std::size_t n = series.phases.size();
  if (n < 4) throw std::invalid_argument("phase_diffusion_fit: series too short");
  const double dt = sample_dt(series.times);
  const double duration = series.times.back() - series.times.front();

  if (!(lag_min > 0.0) || !(lag_max > lag_min))
    throw std::invalid_argument("phase_diffusion_fit: bad lag window");
  if (lag_max > duration / 10.0 * (1.0 + 1e-9))
    throw std::invalid_argument("phase_diffusion_fit: lag_max beyond duration/10");

  const auto idx_min =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(lag_min / dt - 1e-9)));
  const auto idx_max = static_cast<std::size_t>(std::floor(lag_max / dt + 1e-9));
  if (idx_max < idx_min)
    throw std::invalid_argument("phase_diffusion_fit: lag window narrower than one sample");

  // Up to 32 lags, evenly spread across the window.
  std::vector<std::size_t> lags;
  const std::size_t span = idx_max - idx_min;
  const std::size_t count = std::min<std::size_t>(32, span + 1);
  for (std::size_t k = 0; k < count; ++k)
    lags.push_back(idx_min + (count == 1 ? 0 : span * k / (count - 1)));
  lags.erase(std::unique(lags.begin(), lags.end()), lags.end());

  for (std::size_t lag : lags)
    if (n < lag + 100)
      throw StatisticalError("phase_diffusion_fit: fewer than 100 increments per lag");

  // Increment variance within [begin, end) for every chosen lag.
  auto variance_curve = [&](std::size_t begin, std::size_t end, std::vector<double>& out) {
    out.assign(lags.size(), std::nan(""));
    for (std::size_t li = 0; li < lags.size(); ++li) {
      const std::size_t lag = lags[li];
      if (end - begin < lag + 2) continue;
      const std::size_t m = end - begin - lag;
      double mean = 0.0;
      for (std::size_t k = begin; k + lag < end; ++k)
        mean += series.phases[k + lag] - series.phases[k];
      mean /= static_cast<double>(m);
      double var = 0.0;
      for (std::size_t k = begin; k + lag < end; ++k) {
        const double d = series.phases[k + lag] - series.phases[k] - mean;
        var += d * d;
      }
      out[li] = var / static_cast<double>(m > 1 ? m - 1 : 1);
    }
  };

  // Weighted fit through the origin, weights 1/l^2: D = mean over lags of V(l)/l.
  auto fit_d = [&](const std::vector<double>& v) {
    double acc = 0.0;
    std::size_t used = 0;
    for (std::size_t li = 0; li < lags.size(); ++li) {
      if (std::isnan(v[li])) continue;
      acc += v[li] / (static_cast<double>(lags[li]) * dt);
      ++used;
    }
    return used ? acc / static_cast<double>(used) : 0.0;
  };

  std::vector<double> v_full;
  variance_curve(0, n, v_full);
  const double d_hat = fit_d(v_full);

  double v_mean = 0.0;
  for (double v : v_full) v_mean += v;
  v_mean /= static_cast<double>(v_full.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t li = 0; li < lags.size(); ++li) {
    const double model = d_hat * static_cast<double>(lags[li]) * dt;
    ss_res += (v_full[li] - model) * (v_full[li] - model);
    ss_tot += (v_full[li] - v_mean) * (v_full[li] - v_mean);
  }
  double r2;
  if (ss_tot > 0.0)
    r2 = 1.0 - ss_res / ss_tot;
  else
    r2 = ss_res == 0.0 ? 1.0 : 0.0;

  // Block bootstrap over >= 20 contiguous blocks; resampling is seeded from
  // the data size so repeated runs stay bit-identical.
  const std::size_t blocks = std::min<std::size_t>(32, n / (3 * idx_max + 1));
  if (blocks < 20)
    throw StatisticalError("phase_diffusion_fit: record too short for 20 bootstrap blocks");
  std::vector<std::vector<double>> block_curves(blocks);
  const std::size_t block_len = n / blocks;
  for (std::size_t b = 0; b < blocks; ++b)
    variance_curve(b * block_len, (b + 1 == blocks) ? n : (b + 1) * block_len,
                   block_curves[b]);

  std::mt19937_64 rng(0x9e3779b9u ^ static_cast<std::uint64_t>(n));
  constexpr int k_resamples = 200;
  std::vector<double> d_star;
  d_star.reserve(k_resamples);
  std::vector<double> v_avg(lags.size());
  for (int r = 0; r < k_resamples; ++r) {
    std::fill(v_avg.begin(), v_avg.end(), 0.0);
    std::vector<int> hits(lags.size(), 0);
    for (std::size_t b = 0; b < blocks; ++b) {
      const std::size_t pick = rng() % blocks;
      for (std::size_t li = 0; li < lags.size(); ++li) {
        if (std::isnan(block_curves[pick][li])) continue;
        v_avg[li] += block_curves[pick][li];
        ++hits[li];
      }
    }
    for (std::size_t li = 0; li < lags.size(); ++li)
      v_avg[li] = hits[li] ? v_avg[li] / hits[li] : std::nan("");
    d_star.push_back(fit_d(v_avg));
  }
  double boot_mean = 0.0;
  for (double d : d_star) boot_mean += d;
  boot_mean /= static_cast<double>(d_star.size());
  double boot_var = 0.0;
  for (double d : d_star) boot_var += (d - boot_mean) * (d - boot_mean);
  boot_var /= static_cast<double>(d_star.size() - 1);

  LinewidthEstimate est;
  est.D_hat = d_hat;
  est.std_err = std::sqrt(boot_var);
  est.method = EstimateMethod::phase_diffusion_fit;
  est.r_squared = r2;
  est.window_lo = lag_min;
  est.window_hi = lag_max;
  est.reliable = r2 >= 0.9;
  return est;
}

namespace {

// FFTW's planner is not thread safe; executions on distinct plans are.
std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}

void fft_inplace(std::vector<std::complex<double>>& buf) {
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(buf.size()),
                            reinterpret_cast<fftw_complex*>(buf.data()),
                            reinterpret_cast<fftw_complex*>(buf.data()), FFTW_FORWARD,
                            FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    fftw_destroy_plan(plan);
  }
}

} // namespace

SpectrumCurve field_psd(std::span<const double> times,
                        std::span<const std::complex<double>> alphas,
                        std::size_t segments) {
  if (times.size() != alphas.size())
    throw std::invalid_argument("field_psd: times/alphas size mismatch");
  if (segments < 8) throw std::invalid_argument("field_psd: need at least 8 segments");

  const std::size_t n = alphas.size();
  std::size_t seg_len = 1;
  while (seg_len * 2 <= n / segments) seg_len *= 2;
  if (seg_len < 1024)
    throw StatisticalError("field_psd: too few samples (need >= 1024 per segment)");

  const double dt = sample_dt(times);

  // Hann window, periodic form; U normalizes out the window power.
  std::vector<double> window(seg_len);
  double u_norm = 0.0;
  for (std::size_t i = 0; i < seg_len; ++i) {
    window[i] = 0.5 * (1.0 - std::cos(k_two_pi * static_cast<double>(i) /
                                      static_cast<double>(seg_len)));
    u_norm += window[i] * window[i];
  }

  std::vector<double> power(seg_len, 0.0);
  std::vector<std::complex<double>> buf(seg_len);
  for (std::size_t s = 0; s < segments; ++s) {
    const std::size_t offset = s * seg_len;
    for (std::size_t i = 0; i < seg_len; ++i) buf[i] = alphas[offset + i] * window[i];
    fft_inplace(buf);
    for (std::size_t i = 0; i < seg_len; ++i) power[i] += std::norm(buf[i]);
  }
  const double scale = dt / (u_norm * static_cast<double>(segments));
  for (double& p : power) p *= scale;

  // Fold one-sided about the record carrier (zero offset); bin m pairs with
  // bin L - m. The Nyquist bin is dropped.
  SpectrumCurve curve;
  curve.reserve(seg_len / 2);
  const double domega = k_two_pi / (static_cast<double>(seg_len) * dt);
  curve.push_back({0.0, power[0]});
  for (std::size_t m = 1; m < seg_len / 2; ++m)
    curve.push_back({domega * static_cast<double>(m), 0.5 * (power[m] + power[seg_len - m])});
  return curve;
}

LinewidthEstimate lorentzian_fit(const SpectrumCurve& spectrum) {
  if (spectrum.size() < 8) throw std::invalid_argument("lorentzian_fit: too few points");

  std::size_t peak = 0;
  for (std::size_t i = 1; i < spectrum.size(); ++i)
    if (spectrum[i].value > spectrum[peak].value) peak = i;
  const double s_max = spectrum[peak].value;
  if (!(s_max > 0.0)) throw std::invalid_argument("lorentzian_fit: empty spectrum");

  // Fit window: contiguous run around the peak above 5% of the maximum.
  std::size_t lo = peak, hi = peak;
  while (lo > 0 && spectrum[lo - 1].value > 0.05 * s_max) --lo;
  while (hi + 1 < spectrum.size() && spectrum[hi + 1].value > 0.05 * s_max) ++hi;
  if (hi - lo + 1 < 5) { lo = peak > 2 ? peak - 2 : 0; hi = std::min(spectrum.size() - 1, peak + 2); }

  std::vector<double> w_grid, s_data;
  for (std::size_t i = lo; i <= hi; ++i) {
    w_grid.push_back(spectrum[i].omega);
    s_data.push_back(spectrum[i].value);
  }
  const std::size_t m = w_grid.size();

  // Half-power initial width.
  double half_lo = spectrum[peak].omega, half_hi = spectrum[peak].omega;
  for (std::size_t i = peak; i-- > lo;)
    if (spectrum[i].value < 0.5 * s_max) { half_lo = spectrum[i].omega; break; }
  for (std::size_t i = peak + 1; i <= hi; ++i)
    if (spectrum[i].value < 0.5 * s_max) { half_hi = spectrum[i].omega; break; }
  const double grid_step = spectrum[1].omega - spectrum[0].omega;
  double a = s_max;
  double c = spectrum[peak].omega;
  double w = std::max(0.5 * (half_hi - half_lo), 0.5 * grid_step); // half width

  // Levenberg-Marquardt on (a, c, w).
  auto chi2 = [&](double pa, double pc, double pw) {
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double d = w_grid[i] - pc;
      const double model = pa * pw * pw / (d * d + pw * pw);
      acc += (s_data[i] - model) * (s_data[i] - model);
    }
    return acc;
  };

  double lambda = 1e-3;
  double best = chi2(a, c, w);
  for (int iter = 0; iter < 200; ++iter) {
    double jtj[3][3] = {{0}};
    double jtr[3] = {0};
    for (std::size_t i = 0; i < m; ++i) {
      const double d = w_grid[i] - c;
      const double den = d * d + w * w;
      const double li = w * w / den;
      const double model = a * li;
      const double r = s_data[i] - model;
      const double ja = li;
      const double jc = 2.0 * a * w * w * d / (den * den);
      const double jw = 2.0 * a * w * d * d / (den * den);
      const double jvec[3] = {ja, jc, jw};
      for (int p = 0; p < 3; ++p) {
        jtr[p] += jvec[p] * r;
        for (int q = 0; q < 3; ++q) jtj[p][q] += jvec[p] * jvec[q];
      }
    }
    double aug[3][3];
    for (int p = 0; p < 3; ++p)
      for (int q = 0; q < 3; ++q) aug[p][q] = jtj[p][q] + (p == q ? lambda * jtj[p][p] : 0.0);
    // Solve aug * delta = jtr (3x3 Cramer).
    const double det = aug[0][0] * (aug[1][1] * aug[2][2] - aug[1][2] * aug[2][1]) -
                       aug[0][1] * (aug[1][0] * aug[2][2] - aug[1][2] * aug[2][0]) +
                       aug[0][2] * (aug[1][0] * aug[2][1] - aug[1][1] * aug[2][0]);
    if (det == 0.0 || !std::isfinite(det)) break;
    auto solve = [&](int col) {
      double t[3][3];
      for (int p = 0; p < 3; ++p)
        for (int q = 0; q < 3; ++q) t[p][q] = (q == col) ? jtr[p] : aug[p][q];
      return (t[0][0] * (t[1][1] * t[2][2] - t[1][2] * t[2][1]) -
              t[0][1] * (t[1][0] * t[2][2] - t[1][2] * t[2][0]) +
              t[0][2] * (t[1][0] * t[2][1] - t[1][1] * t[2][0])) /
             det;
    };
    const double da = solve(0), dc = solve(1), dw = solve(2);
    const double na = a + da, nc = c + dc, nw = std::abs(w + dw);
    const double trial = chi2(na, nc, nw);
    if (trial < best) {
      a = na; c = nc; w = nw;
      lambda = std::max(lambda * 0.3, 1e-12);
      if (best - trial < 1e-12 * (best + 1e-300)) { best = trial; break; }
      best = trial;
    } else {
      lambda *= 10.0;
      if (lambda > 1e12) break;
    }
  }

  // Parameter covariance from the final Jacobian: sigma^2 (J^T J)^-1.
  double jtj[3][3] = {{0}};
  for (std::size_t i = 0; i < m; ++i) {
    const double d = w_grid[i] - c;
    const double den = d * d + w * w;
    const double jvec[3] = {w * w / den, 2.0 * a * w * w * d / (den * den),
                            2.0 * a * w * d * d / (den * den)};
    for (int p = 0; p < 3; ++p)
      for (int q = 0; q < 3; ++q) jtj[p][q] += jvec[p] * jvec[q];
  }
  const double sigma2 = m > 3 ? best / static_cast<double>(m - 3) : 0.0;
  const double det = jtj[0][0] * (jtj[1][1] * jtj[2][2] - jtj[1][2] * jtj[2][1]) -
                     jtj[0][1] * (jtj[1][0] * jtj[2][2] - jtj[1][2] * jtj[2][0]) +
                     jtj[0][2] * (jtj[1][0] * jtj[2][1] - jtj[1][1] * jtj[2][0]);
  double var_w = 0.0;
  if (det != 0.0 && std::isfinite(det)) {
    const double cof22 = jtj[0][0] * jtj[1][1] - jtj[0][1] * jtj[1][0];
    var_w = sigma2 * cof22 / det;
  }

  double ss_tot = 0.0, s_mean = 0.0;
  for (double s : s_data) s_mean += s;
  s_mean /= static_cast<double>(m);
  for (double s : s_data) ss_tot += (s - s_mean) * (s - s_mean);

  LinewidthEstimate est;
  est.D_hat = 2.0 * w; // FWHM
  est.std_err = 2.0 * std::sqrt(std::max(0.0, var_w));
  est.method = EstimateMethod::lorentzian_fit;
  est.r_squared = ss_tot > 0.0 ? 1.0 - best / ss_tot : 1.0;
  est.window_lo = w_grid.front();
  est.window_hi = w_grid.back();
  est.resolution_limited = est.D_hat < 10.0 * grid_step;
  est.reliable = est.r_squared >= 0.9 && !est.resolution_limited;
  return est;
}

} // namespace ramsey
