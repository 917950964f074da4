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
#include <vector>

#include "canphys/reflect_synth.hpp"

namespace canphys {

struct PreprocConfig {
  int side = 36;  // L
  double clip_sigmas = 3.0;
  std::optional<double> target_fps;

  void validate() const;
};

/// Normalized frame differences D(t), [T-1][L][L][C].
struct MotionTensor {
  int samples = 0;
  int side = 0;
  int channels = 0;
  double fps = 0.0;
  std::vector<float> data;

  std::size_t sample_size() const { return static_cast<std::size_t>(side) * side * channels; }
};

/// Standardized raw frames, index t holds frame t.
struct AppearanceTensor {
  int samples = 0;
  int side = 0;
  int channels = 0;
  std::vector<float> data;

  std::size_t sample_size() const { return static_cast<std::size_t>(side) * side * channels; }
};

/// Forward differences of the gold signal, unit std. Index t holds
/// p(t+1) - p(t).
struct LabelSeries {
  double fps = 0.0;
  SignalKind kind = SignalKind::bvp;
  std::vector<float> values;
};

struct TrainingTensors {
  MotionTensor motion;
  AppearanceTensor appearance;
  LabelSeries labels;

  void validate() const;
};

/// Bicubic (a = -0.5) resize of every frame to side x side, antialiased when
/// shrinking, edge-clamped. Output is f32.
FrameSequence downsample_frames(const FrameSequence& seq, int side);

/// (C(t+1) - C(t)) / (C(t+1) + C(t)) per pixel and channel; 0 where the
/// denominator magnitude is below 1e-7. Input must be square f32 frames.
MotionTensor normalized_frame_difference(const FrameSequence& seq);

/// Clips to +/- clip_sigmas * sigma (sigma over the whole tensor) and rescales
/// so the clipped tensor has unit std.
MotionTensor clip_and_standardize(MotionTensor d, double clip_sigmas);

/// Frames 0 .. T-2 standardized to zero mean, unit std over the whole video.
AppearanceTensor standardize_appearance(const FrameSequence& seq);

/// Piecewise cubic Hermite resampling onto frame times k / target_fps, k < frames.
PhysioWaveform resample_gold(const PhysioWaveform& signal, double target_fps, int frames);

LabelSeries derive_labels(const PhysioWaveform& resampled);

/// Full pipeline: resize, difference, clip, appearance, labels.
TrainingTensors preprocess_video(const FrameSequence& seq, const PhysioWaveform& gold,
                                 const PreprocConfig& config);

}  // namespace canphys
