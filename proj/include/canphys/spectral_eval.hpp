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

#pragma once

#include <optional>
#include <span>
#include <vector>

#include "canphys/reflect_synth.hpp"

namespace canphys {

struct BandSpec {
  SignalKind kind = SignalKind::bvp;
  double pass_lo = 0.7;
  double pass_hi = 2.5;
  double snr_lo = 0.5;
  double snr_hi = 4.0;
  double harmonic_halfwidth = 0.1;

  static BandSpec heart_rate() { return {SignalKind::bvp, 0.7, 2.5, 0.5, 4.0, 0.1}; }
  static BandSpec breathing_rate() { return {SignalKind::respiration, 0.08, 0.5, 0.05, 1.0, 0.025}; }
  static BandSpec for_kind(SignalKind k) { return k == SignalKind::bvp ? heart_rate() : breathing_rate(); }
};

struct RateEstimate {
  double window_start = 0.0;  // s
  double rate_bpm = 0.0;
  double snr_db = 0.0;
};

struct MetricsReport {
  double mae_bpm = 0.0;
  double rmse_bpm = 0.0;
  double pearson_r = 0.0;
  double mean_snr_db = 0.0;
  std::size_t windows = 0;
};

struct Biquad {
  double b0, b1, b2, a1, a2;  // a0 = 1
};

inline constexpr int kButterworthOrder = 6;

/// Digital Butterworth band-pass as second-order sections. `order` is the
/// low-pass prototype order; the band-pass has 2 * order poles. Gain is unity
/// at the geometric band center.
std::vector<Biquad> design_butterworth_bandpass(int order, double lo_hz, double hi_hz, double fs);

/// Complex frequency response magnitude of a section cascade at f Hz.
double sos_magnitude(std::span<const Biquad> sos, double f, double fs);

/// Causal cascade filtering (direct form II transposed) from the given
/// initial state (2 per section) or zero state.
std::vector<double> sos_filter(std::span<const Biquad> sos, std::span<const double> x,
                               std::vector<double>* state = nullptr);

/// Zero-phase band-pass: sixth-order Butterworth applied forward and backward.
/// The result is the mean of the forward-backward and backward-forward
/// passes (odd-extension padding, steady-state initial conditions), which
/// makes the operator commute exactly with time reversal.
std::vector<double> butterworth_bandpass(std::span<const double> signal, double fs, const BandSpec& band);

struct Window {
  std::size_t begin = 0;
  std::size_t length = 0;
  double start_s = 0.0;
};

/// floor((n / fs - win) / stride) + 1 windows.
std::vector<Window> sliding_windows(std::size_t n, double fs, double win_s = 30.0, double stride_s = 1.0);

std::vector<std::vector<double>> sliding_segments(std::span<const double> signal, double fs,
                                                  double win_s = 30.0, double stride_s = 1.0);

struct Spectrum {
  double resolution = 0.0;  // Hz per bin
  std::vector<double> power;  // bins 0 .. nfft/2
  double frequency(std::size_t k) const { return resolution * static_cast<double>(k); }
};

/// Rectangular-window periodogram, zero-padded to nfft >= x.size().
Spectrum periodogram(std::span<const double> x, double fs, std::size_t nfft);

/// Dominant frequency inside [pass_lo, pass_hi] in BPM, on a zero-padded
/// grid of 0.25 BPM.
double estimate_rate(std::span<const double> segment, double fs, const BandSpec& band);

/// Energy within +/- halfwidth of the first two harmonics of the gold rate,
/// against the remaining energy in the SNR range, in dB (clamped to +/- 60).
/// Uses the native-resolution periodogram of the segment.
double compute_snr(std::span<const double> segment, double fs, double gold_rate_bpm, const BandSpec& band);

enum class ZeroVariance { error, nan };

MetricsReport aggregate_metrics(std::span<const RateEstimate> estimates, std::span<const double> gold,
                                ZeroVariance policy = ZeroVariance::error);

struct WindowResult {
  double window_start = 0.0;
  double est_bpm = 0.0;
  double gold_bpm = 0.0;
  double snr_db = 0.0;
};

/// Band-passes both series, windows them, and estimates per-window rates.
/// The gold rate of a window is the spectral peak of the filtered gold series.
std::vector<WindowResult> evaluate_series(std::span<const double> estimate, std::span<const double> gold,
                                          double fs, const BandSpec& band);

MetricsReport summarize(std::span<const WindowResult> rows, ZeroVariance policy = ZeroVariance::nan);

/// Spatial mean of the green channel, detrended by a 30-sample moving
/// average, band-passed, and windowed. With a gold signal (sampled at the
/// frame rate) each window also gets its gold rate and SNR.
std::vector<WindowResult> green_channel_baseline(const FrameSequence& seq, const BandSpec& band,
                                                 std::span<const double> gold = {});

}  // namespace canphys
