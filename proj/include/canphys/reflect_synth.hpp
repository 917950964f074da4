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

#include <array>
#include <cstdint>
#include <vector>

#include "canphys/common.hpp"

namespace canphys {

using Vec3 = std::array<double, 3>;

struct PhysioWaveform {
  SignalKind kind = SignalKind::bvp;
  double sample_rate = 0.0;
  std::vector<double> samples;
  double fundamental = 0.0;  // Hz; 0 when unknown (loaded data)

  double duration() const {
    return samples.empty() ? 0.0 : static_cast<double>(samples.size() - 1) / sample_rate;
  }
};

/// Non-physiological variation m(t): lighting flicker, rigid motion, etc.
struct MotionNuisance {
  double sample_rate = 0.0;
  std::vector<double> samples;
};

enum class PixelType : std::uint8_t { u8 = 0, f32 = 1 };
enum class Provenance : std::uint8_t { synthetic, loaded };

/// Video tensor [T][H][W][C], channel-interleaved. Exactly one of `u8` / `f32`
/// holds the payload, selected by `dtype`.
struct FrameSequence {
  int frames = 0;
  int height = 0;
  int width = 0;
  int channels = 0;
  PixelType dtype = PixelType::f32;
  double fps = 0.0;
  Provenance provenance = Provenance::synthetic;
  std::vector<std::uint8_t> u8;
  std::vector<float> f32;

  std::size_t frame_size() const {
    return static_cast<std::size_t>(height) * width * channels;
  }
  std::size_t size() const { return frame_size() * frames; }

  /// Validates shape invariants; throws DataError.
  void validate() const;
};

/// f32 view of a sequence; u8 payloads are mapped to [0, 1].
FrameSequence to_f32(const FrameSequence& seq);

/// Quantizes an f32 sequence in [0, 1] to u8 with rounding and saturation.
FrameSequence to_u8(const FrameSequence& seq);

struct SceneParams {
  Vec3 skin_color{0.0, 0.0, 0.0};  // u_c, unit norm
  double reflection_strength = 0.0;  // c0
  Vec3 pulse_strength{0.0, 0.0, 0.0};  // u_p
  Vec3 light_color{0.0, 0.0, 0.0};  // u_s, unit norm
  /// Stationary color of non-skin pixels. Defaults to skin_color * c0 when
  /// left at zero.
  Vec3 background_color{0.0, 0.0, 0.0};
  int height = 0;
  int width = 0;
  std::vector<double> luminance;  // I0 per pixel, row-major H*W
  std::vector<std::uint8_t> skin_mask;  // 1 = skin
  double phi_motion = 0.0;  // a_m
  double phi_pulse = 0.0;   // a_p
  double psi_motion = 0.0;  // b_m
  double psi_pulse = 0.0;   // b_p
  double cross_gamma = 0.0;  // optional m*p term in both couplings
  double noise_sigma = 0.0;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

/// Stationary skin reflection: u_c * c0 = u_s * s0 + u_d * d0.
struct FoldedReflection {
  Vec3 color;
  double strength;
};
FoldedReflection fold_reflection(const Vec3& diffuse_color, double d0, const Vec3& light_color,
                                 double s0);

Vec3 normalized(const Vec3& v);

/// Default scene geometry: a centered skin rectangle covering `skin_fraction`
/// of the frame and a radial luminance falloff from 1.3 (center) to 0.7.
void default_geometry(SceneParams& params, int height, int width, double skin_fraction = 0.4);

/// Sinusoid at rate_bpm/60 Hz plus a second harmonic scaled by
/// harmonic_ratio; mean removed.
PhysioWaveform make_pulse(SignalKind kind, double rate_bpm, double duration_s, double fs,
                          double harmonic_ratio, double phase = 0.0);

/// Band-limited (0 to max_hz) random nuisance with the given std.
MotionNuisance make_nuisance(double duration_s, double fs, double max_hz, double stddev,
                             std::uint64_t seed);

/// Per-frame noise stream seed. Frame t draws H*W*3 normals in row-major,
/// channel-interleaved order from std::mt19937_64(frame_noise_seed(seed, t)).
std::uint64_t frame_noise_seed(std::uint64_t scene_seed, int frame);

/// Renders C(t) = I0 (1 + Psi) (u_c c0 + u_s Phi + u_p p) + noise on skin
/// pixels and I0 (1 + Psi) * background on the rest, with m = nuisance + resp.
/// Waveforms are resampled to the frame times k / fps.
FrameSequence synthesize_scene(const SceneParams& params, const PhysioWaveform& pulse,
                               const PhysioWaveform& resp, const MotionNuisance& nuisance,
                               int frames, int height, int width, double fps);

/// Randomized-clip recipe: scene colors, couplings and noise shared by every
/// clip of a synthetic dataset. Rates and phases vary per clip.
struct ClipRecipe {
  int height = 72;
  int width = 72;
  double fps = 30.0;
  double duration_s = 60.0;  // renders duration * fps + 1 frames
  double gold_rate = 256.0;  // contact-sensor sample rate, Hz
  double skin_fraction = 0.4;
  Vec3 skin_color{0.80, 0.55, 0.45};  // normalized on use
  double reflection_strength = 0.6;
  Vec3 light_color{1.0, 1.0, 1.0};  // normalized on use
  Vec3 pulse_strength{0.0015, 0.0040, 0.0020};
  Vec3 background_color{0.20, 0.28, 0.40};
  double harmonic_ratio = 0.25;
  double resp_amplitude = 1.0;
  double nuisance_hz = 0.5;
  double nuisance_std = 0.15;
  double phi_motion = 0.01;
  double phi_pulse = 0.0;
  double psi_motion = 0.01;
  double psi_pulse = 0.0;
  double cross_gamma = 0.0;
  double noise_sigma = 0.002;
  PixelType dtype = PixelType::f32;

  int frames() const;
  void validate() const;
};

struct SyntheticClip {
  FrameSequence video;
  PhysioWaveform bvp;
  PhysioWaveform resp;
};

/// Renders one clip of the recipe at the given rates. Pulse and breathing
/// phases, nuisance, and sensor noise are drawn from `seed`.
SyntheticClip render_clip(const ClipRecipe& recipe, double hr_bpm, double br_bpm, std::uint64_t seed);

}  // namespace canphys
