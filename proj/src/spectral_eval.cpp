// Copyright 2026 The canphys Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "canphys/spectral_eval.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <mutex>
#include <numbers>
#include <numeric>
#include <string>

namespace canphys {

namespace {

using cplx = std::complex<double>;

// Planner calls are not thread-safe in FFTW; execution is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

void reverse_in_place(std::vector<double>& v) { std::reverse(v.begin(), v.end()); }

// Steady-state section states for a unit step input.
std::vector<double> steady_state(std::span<const Biquad> sos) {
  std::vector<double> zi(2 * sos.size());
  double u = 1.0;
  for (std::size_t s = 0; s < sos.size(); ++s) {
    const Biquad& q = sos[s];
    const double y = u * (q.b0 + q.b1 + q.b2) / (1.0 + q.a1 + q.a2);
    zi[2 * s + 1] = q.b2 * u - q.a2 * y;
    zi[2 * s] = (q.b1 + q.b2) * u - (q.a1 + q.a2) * y;
    u = y;
  }
  return zi;
}

std::vector<double> forward_backward(std::span<const Biquad> sos, std::span<const double> x) {
  const std::size_t n = x.size();
  const std::size_t pad = std::min(n - 1, 3 * (2 * sos.size() + 1));
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  const auto zi = steady_state(sos);
  auto state = zi;
  for (auto& z : state) z *= ext.front();
  auto y = sos_filter(sos, ext, &state);
  reverse_in_place(y);
  state = zi;
  for (auto& z : state) z *= y.front();
  y = sos_filter(sos, y, &state);
  reverse_in_place(y);
  return {y.begin() + static_cast<std::ptrdiff_t>(pad), y.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

double pearson(std::span<const double> a, std::span<const double> b, ZeroVariance policy) {
  const std::size_t n = a.size();
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(n);
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa > 0.0 && sbb > 0.0) return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
  if (std::equal(a.begin(), a.end(), b.begin())) return 1.0;
  if (policy == ZeroVariance::nan) return std::numeric_limits<double>::quiet_NaN();
  throw DataError("Pearson r undefined: zero-variance rate sequence");
}

}  // namespace

std::vector<Biquad> design_butterworth_bandpass(int order, double lo_hz, double hi_hz, double fs) {
  if (order < 1) throw ConfigError("filter order must be positive");
  if (!(lo_hz > 0.0 && hi_hz > lo_hz)) throw ConfigError("band edges must satisfy 0 < lo < hi");
  if (!(fs > 2.0 * hi_hz)) throw ConfigError("sample rate " + std::to_string(fs) + " Hz too low for a " +
                                             std::to_string(hi_hz) + " Hz band edge");
  const double w1 = 2.0 * fs * std::tan(std::numbers::pi * lo_hz / fs);
  const double w2 = 2.0 * fs * std::tan(std::numbers::pi * hi_hz / fs);
  const double bw = w2 - w1;
  const double w0sq = w1 * w2;

  std::vector<cplx> upper;  // one pole of each conjugate pair
  std::vector<cplx> real_poles;
  for (int k = 1; k <= order; ++k) {
    const cplx p = std::polar(1.0, std::numbers::pi * (2.0 * k + order - 1.0) / (2.0 * order));
    const cplx half = p * bw / 2.0;
    const cplx disc = std::sqrt(half * half - w0sq);
    for (const cplx s : {half + disc, half - disc}) {
      const cplx z = (2.0 * fs + s) / (2.0 * fs - s);
      if (std::abs(z.imag()) < 1e-12) {
        real_poles.push_back({z.real(), 0.0});
      } else if (z.imag() > 0.0) {
        upper.push_back(z);
      }
    }
  }
  std::vector<Biquad> sos;
  for (const cplx& z : upper) sos.push_back({1.0, 0.0, -1.0, -2.0 * z.real(), std::norm(z)});
  std::sort(real_poles.begin(), real_poles.end(), [](cplx a, cplx b) { return a.real() < b.real(); });
  for (std::size_t i = 0; i + 1 < real_poles.size(); i += 2) {
    const double r1 = real_poles[i].real(), r2 = real_poles[i + 1].real();
    sos.push_back({1.0, 0.0, -1.0, -(r1 + r2), r1 * r2});
  }
  if (sos.size() != static_cast<std::size_t>(order)) throw DataError("band-pass pole pairing failed");

  const double f0 = fs / std::numbers::pi * std::atan(std::sqrt(w0sq) / (2.0 * fs));
  const double g = std::pow(1.0 / sos_magnitude(sos, f0, fs), 1.0 / static_cast<double>(order));
  for (auto& q : sos) {
    q.b0 *= g;
    q.b1 *= g;
    q.b2 *= g;
  }
  return sos;
}

double sos_magnitude(std::span<const Biquad> sos, double f, double fs) {
  const cplx z1 = std::polar(1.0, -2.0 * std::numbers::pi * f / fs);
  const cplx z2 = z1 * z1;
  cplx h = 1.0;
  for (const auto& q : sos) h *= (q.b0 + q.b1 * z1 + q.b2 * z2) / (1.0 + q.a1 * z1 + q.a2 * z2);
  return std::abs(h);
}

std::vector<double> sos_filter(std::span<const Biquad> sos, std::span<const double> x, std::vector<double>* state) {
  std::vector<double> local(2 * sos.size(), 0.0);
  std::vector<double>& z = state ? *state : local;
  if (z.size() != 2 * sos.size()) throw DataError("filter state has the wrong size");
  std::vector<double> y(x.begin(), x.end());
  for (std::size_t s = 0; s < sos.size(); ++s) {
    const Biquad& q = sos[s];
    double z1 = z[2 * s], z2 = z[2 * s + 1];
    for (double& v : y) {
      const double in = v;
      const double out = q.b0 * in + z1;
      z1 = q.b1 * in - q.a1 * out + z2;
      z2 = q.b2 * in - q.a2 * out;
      v = out;
    }
    z[2 * s] = z1;
    z[2 * s + 1] = z2;
  }
  return y;
}

std::vector<double> butterworth_bandpass(std::span<const double> signal, double fs, const BandSpec& band) {
  const auto sos = design_butterworth_bandpass(kButterworthOrder, band.pass_lo, band.pass_hi, fs);
  if (signal.size() < 3 * static_cast<std::size_t>(kButterworthOrder))
    throw DataError("signal too short for the band-pass filter (" + std::to_string(signal.size()) + " samples)");
  auto fb = forward_backward(sos, signal);
  std::vector<double> rev(signal.rbegin(), signal.rend());
  auto bf = forward_backward(sos, rev);
  reverse_in_place(bf);
  for (std::size_t i = 0; i < fb.size(); ++i) fb[i] = 0.5 * (fb[i] + bf[i]);
  return fb;
}

std::vector<Window> sliding_windows(std::size_t n, double fs, double win_s, double stride_s) {
  if (!(fs > 0.0) || !(win_s > 0.0) || !(stride_s > 0.0)) throw ConfigError("window parameters must be positive");
  const auto win = static_cast<std::size_t>(std::llround(win_s * fs));
  const auto stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(stride_s * fs)));
  if (n < win || win == 0)
    throw DataError("signal spans " + std::to_string(static_cast<double>(n) / fs) + " s, shorter than the " +
                    std::to_string(win_s) + " s window");
  std::vector<Window> out;
  for (std::size_t b = 0; b + win <= n; b += stride) out.push_back({b, win, static_cast<double>(b) / fs});
  return out;
}

std::vector<std::vector<double>> sliding_segments(std::span<const double> signal, double fs, double win_s,
                                                  double stride_s) {
  std::vector<std::vector<double>> out;
  for (const auto& w : sliding_windows(signal.size(), fs, win_s, stride_s))
    out.emplace_back(signal.begin() + static_cast<std::ptrdiff_t>(w.begin),
                     signal.begin() + static_cast<std::ptrdiff_t>(w.begin + w.length));
  return out;
}

Spectrum periodogram(std::span<const double> x, double fs, std::size_t nfft) {
  if (x.empty()) throw DataError("periodogram of an empty segment");
  nfft = std::max(nfft, x.size());
  std::vector<double> in(nfft, 0.0);
  std::copy(x.begin(), x.end(), in.begin());
  const std::size_t bins = nfft / 2 + 1;
  fftw_complex* out = fftw_alloc_complex(bins);
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(nfft), in.data(), out, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  Spectrum s;
  s.resolution = fs / static_cast<double>(nfft);
  s.power.resize(bins);
  const double norm = 1.0 / static_cast<double>(x.size());
  for (std::size_t k = 0; k < bins; ++k) s.power[k] = (out[k][0] * out[k][0] + out[k][1] * out[k][1]) * norm;
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(out);
  return s;
}

double estimate_rate(std::span<const double> segment, double fs, const BandSpec& band) {
  if (std::all_of(segment.begin(), segment.end(), [](double v) { return v == 0.0; }))
    throw DataError("cannot estimate a rate from an all-zero segment");
  const auto nfft = std::max(segment.size(), static_cast<std::size_t>(std::ceil(240.0 * fs)));
  const Spectrum s = periodogram(segment, fs, nfft);
  std::size_t best = 0;
  double best_power = -1.0;
  for (std::size_t k = 0; k < s.power.size(); ++k) {
    const double f = s.frequency(k);
    if (f < band.pass_lo || f > band.pass_hi) continue;
    if (s.power[k] > best_power) {
      best_power = s.power[k];
      best = k;
    }
  }
  if (best_power < 0.0) throw DataError("no spectral bins inside the pass band");
  return 60.0 * s.frequency(best);
}

double compute_snr(std::span<const double> segment, double fs, double gold_rate_bpm, const BandSpec& band) {
  const double fg = gold_rate_bpm / 60.0;
  if (!(fg >= band.snr_lo && fg <= band.snr_hi))
    throw DataError("gold rate " + std::to_string(gold_rate_bpm) + " BPM outside the SNR range");
  const Spectrum s = periodogram(segment, fs, segment.size());
  const double hw = band.harmonic_halfwidth;
  double signal = 0.0;
  double rest = 0.0;
  for (std::size_t k = 0; k < s.power.size(); ++k) {
    const double f = s.frequency(k);
    if (f < band.snr_lo || f > band.snr_hi) continue;
    if (std::abs(f - fg) <= hw || std::abs(f - 2.0 * fg) <= hw) {
      signal += s.power[k];
    } else {
      rest += s.power[k];
    }
  }
  constexpr double kCapDb = 60.0;
  const double floor = std::numeric_limits<double>::min();
  const double db = 10.0 * std::log10(std::max(signal, floor) / std::max(rest, floor));
  return std::clamp(db, -kCapDb, kCapDb);
}

MetricsReport aggregate_metrics(std::span<const RateEstimate> estimates, std::span<const double> gold,
                                ZeroVariance policy) {
  if (estimates.size() != gold.size())
    throw DataError("estimate and gold window counts differ (" + std::to_string(estimates.size()) + " vs " +
                    std::to_string(gold.size()) + ")");
  if (estimates.size() < 2) throw DataError("metrics need at least two windows");
  const auto n = static_cast<double>(estimates.size());
  MetricsReport r;
  r.windows = estimates.size();
  std::vector<double> est(estimates.size());
  double abs_sum = 0.0, sq_sum = 0.0, snr_sum = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    est[i] = estimates[i].rate_bpm;
    const double e = est[i] - gold[i];
    abs_sum += std::abs(e);
    sq_sum += e * e;
    snr_sum += estimates[i].snr_db;
  }
  r.mae_bpm = abs_sum / n;
  r.rmse_bpm = std::sqrt(sq_sum / n);
  r.mean_snr_db = snr_sum / n;
  r.pearson_r = pearson(est, gold, policy);
  return r;
}

std::vector<WindowResult> evaluate_series(std::span<const double> estimate, std::span<const double> gold,
                                          double fs, const BandSpec& band) {
  if (estimate.size() != gold.size()) throw DataError("estimate and gold series lengths differ");
  const auto est_f = butterworth_bandpass(estimate, fs, band);
  const auto gold_f = butterworth_bandpass(gold, fs, band);
  const auto windows = sliding_windows(est_f.size(), fs);
  std::vector<WindowResult> rows(windows.size());
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto& w = windows[i];
    std::span<const double> es(est_f.data() + w.begin, w.length);
    std::span<const double> gs(gold_f.data() + w.begin, w.length);
    WindowResult& r = rows[i];
    r.window_start = w.start_s;
    r.gold_bpm = estimate_rate(gs, fs, band);
    const bool silent = std::all_of(es.begin(), es.end(), [](double v) { return v == 0.0; });
    // A dead output has no peak; score it as the band floor with minimum SNR.
    r.est_bpm = silent ? 60.0 * band.pass_lo : estimate_rate(es, fs, band);
    r.snr_db = silent ? -60.0 : compute_snr(es, fs, r.gold_bpm, band);
  }
  return rows;
}

MetricsReport summarize(std::span<const WindowResult> rows, ZeroVariance policy) {
  std::vector<RateEstimate> est;
  std::vector<double> gold;
  for (const auto& r : rows) {
    est.push_back({r.window_start, r.est_bpm, r.snr_db});
    gold.push_back(r.gold_bpm);
  }
  return aggregate_metrics(est, gold, policy);
}

std::vector<WindowResult> green_channel_baseline(const FrameSequence& input, const BandSpec& band,
                                                 std::span<const double> gold) {
  input.validate();
  if (input.channels != 3) throw DataError("green-channel baseline needs RGB frames");
  const FrameSequence seq = to_f32(input);
  const std::size_t npix = static_cast<std::size_t>(seq.height) * seq.width;
  std::vector<double> green(static_cast<std::size_t>(seq.frames));
  for (int t = 0; t < seq.frames; ++t) {
    const float* f = seq.f32.data() + static_cast<std::size_t>(t) * seq.frame_size();
    double acc = 0.0;
    for (std::size_t i = 0; i < npix; ++i) acc += f[i * 3 + 1];
    green[t] = acc / static_cast<double>(npix);
  }

  // Centered 30-sample moving average, truncated at the ends.
  constexpr int kDetrend = 30;
  const int n = seq.frames;
  std::vector<double> prefix(n + 1, 0.0);
  for (int i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + green[i];
  std::vector<double> detrended(n);
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - kDetrend / 2);
    const int hi = std::min(n, i - kDetrend / 2 + kDetrend);
    detrended[i] = green[i] - (prefix[hi] - prefix[lo]) / (hi - lo);
  }
  const double scale = *std::max_element(green.begin(), green.end(), [](double a, double b) {
    return std::abs(a) < std::abs(b);
  });
  double var = 0.0;
  for (double v : detrended) var += v * v;
  if (!(var > 1e-24 * std::max(1.0, scale * scale) * n)) throw DataError("green-channel trace has zero variance");

  if (!gold.empty()) {
    if (gold.size() != green.size()) throw DataError("gold signal length differs from frame count");
    return evaluate_series(detrended, gold, seq.fps, band);
  }
  const auto filtered = butterworth_bandpass(detrended, seq.fps, band);
  std::vector<WindowResult> rows;
  for (const auto& w : sliding_windows(filtered.size(), seq.fps)) {
    std::span<const double> seg(filtered.data() + w.begin, w.length);
    rows.push_back({w.start_s, estimate_rate(seg, seq.fps, band), std::numeric_limits<double>::quiet_NaN(),
                    std::numeric_limits<double>::quiet_NaN()});
  }
  return rows;
}

}  // namespace canphys
