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

#include "canphys/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "canphys/interp.hpp"

namespace canphys {

namespace {

constexpr double kDenominatorEps = 1e-7;

struct Moments {
  double mean;
  double stddev;
};

Moments moments(const std::vector<float>& v) {
  double sum = 0.0;
  for (float x : v) sum += x;
  const double mean = sum / static_cast<double>(v.size());
  double ss = 0.0;
  for (float x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size()))};
}

// Linear temporal resampling of an f32 sequence.
FrameSequence retime(const FrameSequence& seq, double fps) {
  const double duration = static_cast<double>(seq.frames - 1) / seq.fps;
  const int frames = static_cast<int>(std::floor(duration * fps + 1e-9)) + 1;
  if (frames < 2) throw DataError("target frame rate leaves fewer than 2 frames");
  FrameSequence out = seq;
  out.frames = frames;
  out.fps = fps;
  out.f32.assign(out.size(), 0.0f);
  const std::size_t fsz = seq.frame_size();
#pragma omp parallel for schedule(static)
  for (int k = 0; k < frames; ++k) {
    const double pos = static_cast<double>(k) / fps * seq.fps;
    const int i = std::min(static_cast<int>(pos), seq.frames - 2);
    const double s = pos - i;
    const float* a = seq.f32.data() + i * fsz;
    const float* b = a + fsz;
    float* o = out.f32.data() + k * fsz;
    for (std::size_t j = 0; j < fsz; ++j) o[j] = static_cast<float>((1.0 - s) * a[j] + s * b[j]);
  }
  return out;
}

}  // namespace

void PreprocConfig::validate() const {
  if (side < 4) throw ConfigError("downsample side L must be >= 4");
  if (!(clip_sigmas > 0.0)) throw ConfigError("clip_sigmas must be positive");
  if (target_fps && !(*target_fps > 0.0)) throw ConfigError("target_fps must be positive");
}

void TrainingTensors::validate() const {
  const int n = motion.samples;
  if (n < 1) throw DataError("training tensors are empty");
  if (appearance.samples != n || static_cast<int>(labels.values.size()) != n)
    throw DataError("motion, appearance and label lengths disagree");
  if (appearance.side != motion.side || appearance.channels != motion.channels)
    throw DataError("motion and appearance shapes disagree");
  if (motion.data.size() != motion.sample_size() * n ||
      appearance.data.size() != appearance.sample_size() * n)
    throw DataError("tensor payload size does not match shape");
}

FrameSequence downsample_frames(const FrameSequence& input, int side) {
  input.validate();
  if (input.height < side || input.width < side)
    throw DataError("frame " + std::to_string(input.height) + "x" + std::to_string(input.width) +
                    " is smaller than L = " + std::to_string(side));
  const FrameSequence seq = to_f32(input);
  const auto rows = interp::resize_taps(seq.height, side);
  const auto cols = interp::resize_taps(seq.width, side);
  const int C = seq.channels;
  const int W = seq.width;

  FrameSequence out = seq;
  out.height = side;
  out.width = side;
  out.f32.assign(out.size(), 0.0f);

#pragma omp parallel for schedule(static)
  for (int t = 0; t < seq.frames; ++t) {
    const float* src = seq.f32.data() + static_cast<std::size_t>(t) * seq.frame_size();
    float* dst = out.f32.data() + static_cast<std::size_t>(t) * out.frame_size();
    // Horizontal pass into [H][side][C], then vertical.
    std::vector<double> tmp(static_cast<std::size_t>(seq.height) * side * C, 0.0);
    for (int y = 0; y < seq.height; ++y) {
      for (int ox = 0; ox < side; ++ox) {
        for (int k = 0; k < cols.taps; ++k) {
          const double w = cols.weight[ox * cols.taps + k];
          const int sx = cols.index[ox * cols.taps + k];
          for (int c = 0; c < C; ++c)
            tmp[(static_cast<std::size_t>(y) * side + ox) * C + c] +=
                w * src[(static_cast<std::size_t>(y) * W + sx) * C + c];
        }
      }
    }
    for (int oy = 0; oy < side; ++oy) {
      for (int ox = 0; ox < side; ++ox) {
        for (int c = 0; c < C; ++c) {
          double acc = 0.0;
          for (int k = 0; k < rows.taps; ++k) {
            const int sy = rows.index[oy * rows.taps + k];
            acc += rows.weight[oy * rows.taps + k] * tmp[(static_cast<std::size_t>(sy) * side + ox) * C + c];
          }
          dst[(static_cast<std::size_t>(oy) * side + ox) * C + c] = static_cast<float>(acc);
        }
      }
    }
  }
  return out;
}

MotionTensor normalized_frame_difference(const FrameSequence& input) {
  input.validate();
  if (input.height != input.width) throw DataError("motion representation needs square frames");
  const FrameSequence seq = to_f32(input);
  MotionTensor d;
  d.samples = seq.frames - 1;
  d.side = seq.height;
  d.channels = seq.channels;
  d.fps = seq.fps;
  d.data.resize(d.sample_size() * d.samples);
  const std::size_t fsz = seq.frame_size();

#pragma omp parallel for schedule(static)
  for (int t = 0; t < d.samples; ++t) {
    const float* now = seq.f32.data() + t * fsz;
    const float* next = now + fsz;
    float* out = d.data.data() + t * fsz;
    for (std::size_t i = 0; i < fsz; ++i) {
      const float den = next[i] + now[i];
      out[i] = std::abs(den) < kDenominatorEps ? 0.0f : (next[i] - now[i]) / den;
    }
  }
  return d;
}

MotionTensor clip_and_standardize(MotionTensor d, double clip_sigmas) {
  if (!(clip_sigmas > 0.0)) throw ConfigError("clip_sigmas must be positive");
  if (d.data.empty()) throw DataError("motion tensor is empty");
  for (float v : d.data)
    if (!std::isfinite(v)) throw DataError("motion tensor contains non-finite values");
  const double sigma = moments(d.data).stddev;
  if (!(sigma > 0.0)) throw DataError("motion tensor is constant (degenerate video)");
  const auto bound = static_cast<float>(clip_sigmas * sigma);
  for (float& v : d.data) v = std::clamp(v, -bound, bound);
  const double scale = moments(d.data).stddev;
  for (float& v : d.data) v = static_cast<float>(v / scale);
  return d;
}

AppearanceTensor standardize_appearance(const FrameSequence& input) {
  input.validate();
  const FrameSequence seq = to_f32(input);
  AppearanceTensor a;
  a.samples = seq.frames - 1;
  a.side = seq.height;
  a.channels = seq.channels;
  a.data.assign(seq.f32.begin(), seq.f32.begin() + static_cast<std::ptrdiff_t>(seq.frame_size() * a.samples));
  const auto [mean, sd] = moments(a.data);
  if (!(sd > 0.0)) throw DataError("appearance frames are constant");
  for (float& v : a.data) v = static_cast<float>((v - mean) / sd);
  return a;
}

PhysioWaveform resample_gold(const PhysioWaveform& signal, double target_fps, int frames) {
  if (!(target_fps > 0.0)) throw ConfigError("target frame rate must be positive");
  if (frames < 1) throw DataError("need at least one output sample");
  if (signal.samples.size() < 2 || !(signal.sample_rate > 0.0)) throw DataError("gold signal is empty");
  const double needed = static_cast<double>(frames - 1) / target_fps;
  if (signal.duration() + 1e-9 < needed)
    throw DataError("gold signal covers " + std::to_string(signal.duration()) + " s but " +
                    std::to_string(needed) + " s are needed");
  interp::Pchip curve(signal.samples, 0.0, 1.0 / signal.sample_rate);
  PhysioWaveform out;
  out.kind = signal.kind;
  out.sample_rate = target_fps;
  out.fundamental = signal.fundamental;
  out.samples.resize(static_cast<std::size_t>(frames));
  for (int k = 0; k < frames; ++k) out.samples[k] = curve(static_cast<double>(k) / target_fps);
  return out;
}

LabelSeries derive_labels(const PhysioWaveform& resampled) {
  if (resampled.samples.size() < 2) throw DataError("labels need at least two gold samples");
  std::vector<double> diff(resampled.samples.size() - 1);
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = resampled.samples[i + 1] - resampled.samples[i];
  double mean = 0.0;
  for (double v : diff) mean += v;
  mean /= static_cast<double>(diff.size());
  double ss = 0.0;
  for (double v : diff) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(diff.size()));
  // A ramp differences to a constant up to rounding; treat that as degenerate.
  double scale = 0.0;
  for (double v : diff) scale = std::max(scale, std::abs(v));
  if (!(sd > 1e-12 * std::max(scale, 1e-300))) throw DataError("gold signal derivative is constant");
  LabelSeries labels;
  labels.fps = resampled.sample_rate;
  labels.kind = resampled.kind;
  labels.values.resize(diff.size());
  for (std::size_t i = 0; i < diff.size(); ++i) labels.values[i] = static_cast<float>(diff[i] / sd);
  return labels;
}

TrainingTensors preprocess_video(const FrameSequence& input, const PhysioWaveform& gold,
                                 const PreprocConfig& config) {
  config.validate();
  FrameSequence seq = downsample_frames(input, config.side);
  if (config.target_fps && *config.target_fps != seq.fps) seq = retime(seq, *config.target_fps);

  TrainingTensors out;
  out.motion = clip_and_standardize(normalized_frame_difference(seq), config.clip_sigmas);
  out.appearance = standardize_appearance(seq);
  out.labels = derive_labels(resample_gold(gold, seq.fps, seq.frames));
  return out;
}

}  // namespace canphys
