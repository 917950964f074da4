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

#include "canphys/reflect_synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "canphys/interp.hpp"

namespace canphys {

void FrameSequence::validate() const {
  if (frames < 2) throw DataError("frame sequence needs at least 2 frames");
  if (height < 1 || width < 1) throw DataError("frame sequence has empty spatial dims");
  if (channels != 1 && channels != 3) throw DataError("frame sequence must have 1 or 3 channels");
  if (!(fps > 0.0) || !std::isfinite(fps)) throw DataError("frame rate must be positive");
  if (dtype == PixelType::u8) {
    if (u8.size() != size()) throw DataError("u8 payload size does not match shape");
  } else {
    if (f32.size() != size()) throw DataError("f32 payload size does not match shape");
    for (float v : f32)
      if (!std::isfinite(v)) throw DataError("f32 payload contains non-finite values");
  }
}

FrameSequence to_f32(const FrameSequence& seq) {
  if (seq.dtype == PixelType::f32) return seq;
  FrameSequence out = seq;
  out.u8.clear();
  out.u8.shrink_to_fit();
  out.dtype = PixelType::f32;
  out.f32.resize(seq.u8.size());
  for (std::size_t i = 0; i < seq.u8.size(); ++i) out.f32[i] = static_cast<float>(seq.u8[i]) / 255.0f;
  return out;
}

FrameSequence to_u8(const FrameSequence& seq) {
  if (seq.dtype == PixelType::u8) return seq;
  FrameSequence out = seq;
  out.f32.clear();
  out.f32.shrink_to_fit();
  out.dtype = PixelType::u8;
  out.u8.resize(seq.f32.size());
  for (std::size_t i = 0; i < seq.f32.size(); ++i) {
    const float v = std::clamp(seq.f32[i] * 255.0f, 0.0f, 255.0f);
    out.u8[i] = static_cast<std::uint8_t>(std::lround(v));
  }
  return out;
}

Vec3 normalized(const Vec3& v) {
  const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  if (!(n > 0.0)) throw ConfigError("cannot normalize a zero color vector");
  return {v[0] / n, v[1] / n, v[2] / n};
}

FoldedReflection fold_reflection(const Vec3& diffuse_color, double d0, const Vec3& light_color,
                                 double s0) {
  Vec3 sum{};
  for (int k = 0; k < 3; ++k) sum[k] = light_color[k] * s0 + diffuse_color[k] * d0;
  const double strength = std::sqrt(sum[0] * sum[0] + sum[1] * sum[1] + sum[2] * sum[2]);
  if (!(strength > 0.0)) throw ConfigError("stationary reflection vanishes");
  return {{sum[0] / strength, sum[1] / strength, sum[2] / strength}, strength};
}

void SceneParams::validate() const {
  auto is_unit = [](const Vec3& v) {
    return std::abs(std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) - 1.0) <= 1e-9;
  };
  if (!is_unit(skin_color)) throw ConfigError("skin color u_c must be a unit vector");
  if (!is_unit(light_color)) throw ConfigError("light color u_s must be a unit vector");
  if (!(reflection_strength > 0.0)) throw ConfigError("reflection strength c0 must be positive");
  if (!(noise_sigma >= 0.0)) throw ConfigError("noise sigma must be non-negative");
  if (height < 1 || width < 1) throw ConfigError("scene dims must be positive");
  const auto n = static_cast<std::size_t>(height) * width;
  if (luminance.size() != n || skin_mask.size() != n)
    throw DataError("luminance/skin maps do not match scene dims");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(luminance[i])) throw DataError("luminance map is not finite");
    if (skin_mask[i] && !(luminance[i] > 0.0))
      throw DataError("luminance must be positive on skin pixels");
  }
}

void default_geometry(SceneParams& params, int height, int width, double skin_fraction) {
  params.height = height;
  params.width = width;
  const auto n = static_cast<std::size_t>(height) * width;
  params.luminance.assign(n, 1.0);
  params.skin_mask.assign(n, 0);
  const double side = std::sqrt(skin_fraction);
  const int skin_h = std::max(1, static_cast<int>(std::lround(side * height)));
  const int skin_w = std::max(1, static_cast<int>(std::lround(side * width)));
  const int y0 = (height - skin_h) / 2;
  const int x0 = (width - skin_w) / 2;
  const double cy = 0.5 * (height - 1);
  const double cx = 0.5 * (width - 1);
  const double rmax = std::max(std::hypot(cy, cx), 1e-12);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const auto i = static_cast<std::size_t>(y) * width + x;
      params.luminance[i] = 1.3 - 0.6 * std::hypot(y - cy, x - cx) / rmax;
      params.skin_mask[i] = (y >= y0 && y < y0 + skin_h && x >= x0 && x < x0 + skin_w) ? 1 : 0;
    }
  }
}

PhysioWaveform make_pulse(SignalKind kind, double rate_bpm, double duration_s, double fs,
                          double harmonic_ratio, double phase) {
  const bool bvp = kind == SignalKind::bvp;
  const double lo = bvp ? 30.0 : 4.0;
  const double hi = bvp ? 240.0 : 60.0;
  if (!(rate_bpm >= lo && rate_bpm <= hi))
    throw ConfigError(std::string(to_string(kind)) + " rate " + std::to_string(rate_bpm) +
                      " BPM outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  if (!(duration_s > 0.0)) throw ConfigError("waveform duration must be positive");
  if (!(fs > 0.0)) throw ConfigError("waveform sample rate must be positive");

  PhysioWaveform w;
  w.kind = kind;
  w.sample_rate = fs;
  w.fundamental = rate_bpm / 60.0;
  const auto n = static_cast<std::size_t>(std::floor(duration_s * fs)) + 1;
  w.samples.resize(n);
  const double omega = 2.0 * std::numbers::pi * w.fundamental;
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    w.samples[i] = std::sin(omega * t + phase) + harmonic_ratio * std::sin(2.0 * (omega * t + phase));
    mean += w.samples[i];
  }
  mean /= static_cast<double>(n);
  for (auto& v : w.samples) v -= mean;
  return w;
}

MotionNuisance make_nuisance(double duration_s, double fs, double max_hz, double stddev,
                             std::uint64_t seed) {
  if (!(duration_s > 0.0) || !(fs > 0.0)) throw ConfigError("nuisance duration/rate must be positive");
  MotionNuisance m;
  m.sample_rate = fs;
  const auto n = static_cast<std::size_t>(std::floor(duration_s * fs)) + 1;
  m.samples.assign(n, 0.0);
  if (stddev == 0.0 || max_hz <= 0.0) return m;

  constexpr int kComponents = 24;
  std::mt19937_64 rng(mix_seed(seed, 0x6e75));
  std::uniform_real_distribution<double> freq(0.0, max_hz);
  std::uniform_real_distribution<double> ph(0.0, 2.0 * std::numbers::pi);
  std::array<double, kComponents> f{};
  std::array<double, kComponents> p{};
  for (int k = 0; k < kComponents; ++k) {
    f[k] = freq(rng);
    p[k] = ph(rng);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    double v = 0.0;
    for (int k = 0; k < kComponents; ++k) v += std::sin(2.0 * std::numbers::pi * f[k] * t + p[k]);
    m.samples[i] = v;
  }
  double mean = 0.0;
  for (double v : m.samples) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double& v : m.samples) {
    v -= mean;
    var += v * v;
  }
  const double sd = std::sqrt(var / static_cast<double>(n));
  for (double& v : m.samples) v *= stddev / sd;
  return m;
}

std::uint64_t frame_noise_seed(std::uint64_t scene_seed, int frame) {
  return mix_seed(scene_seed, static_cast<std::uint64_t>(frame));
}

namespace {

std::vector<double> resample_to_frames(std::span<const double> samples, double fs, int frames,
                                       double fps, const char* what) {
  if (samples.size() < 2 || !(fs > 0.0)) throw DataError(std::string(what) + " waveform is empty");
  const double needed = static_cast<double>(frames - 1) / fps;
  const double have = static_cast<double>(samples.size() - 1) / fs;
  if (have + 1e-9 < needed)
    throw DataError(std::string(what) + " waveform shorter than the requested duration");
  interp::Pchip curve(samples, 0.0, 1.0 / fs);
  std::vector<double> out(static_cast<std::size_t>(frames));
  for (int k = 0; k < frames; ++k) out[k] = curve(static_cast<double>(k) / fps);
  return out;
}

}  // namespace

FrameSequence synthesize_scene(const SceneParams& params, const PhysioWaveform& pulse,
                               const PhysioWaveform& resp, const MotionNuisance& nuisance,
                               int frames, int height, int width, double fps) {
  params.validate();
  if (height != params.height || width != params.width)
    throw DataError("scene maps are " + std::to_string(params.height) + "x" +
                    std::to_string(params.width) + " but " + std::to_string(height) + "x" +
                    std::to_string(width) + " was requested");
  if (frames < 2) throw DataError("need at least 2 frames");
  if (!(fps > 0.0)) throw DataError("frame rate must be positive");

  const auto p = resample_to_frames(pulse.samples, pulse.sample_rate, frames, fps, "pulse");
  const auto r = resample_to_frames(resp.samples, resp.sample_rate, frames, fps, "respiration");
  const auto nz = resample_to_frames(nuisance.samples, nuisance.sample_rate, frames, fps, "nuisance");

  Vec3 base{};
  for (int c = 0; c < 3; ++c) base[c] = params.skin_color[c] * params.reflection_strength;
  Vec3 background = params.background_color;
  if (background == Vec3{0.0, 0.0, 0.0}) background = base;

  FrameSequence seq;
  seq.frames = frames;
  seq.height = height;
  seq.width = width;
  seq.channels = 3;
  seq.dtype = PixelType::f32;
  seq.fps = fps;
  seq.provenance = Provenance::synthetic;
  seq.f32.resize(seq.size());
  const std::size_t npix = static_cast<std::size_t>(height) * width;

#pragma omp parallel for schedule(static)
  for (int t = 0; t < frames; ++t) {
    const double m = nz[t] + r[t];
    const double pt = p[t];
    const double cross = params.cross_gamma * m * pt;
    const double phi = params.phi_motion * m + params.phi_pulse * pt + cross;
    const double psi = params.psi_motion * m + params.psi_pulse * pt + cross;
    Vec3 skin{};
    for (int c = 0; c < 3; ++c)
      skin[c] = base[c] + params.light_color[c] * phi + params.pulse_strength[c] * pt;

    std::mt19937_64 rng(frame_noise_seed(params.rng_seed, t));
    std::normal_distribution<double> noise(0.0, 1.0);
    float* out = seq.f32.data() + static_cast<std::size_t>(t) * seq.frame_size();
    for (std::size_t i = 0; i < npix; ++i) {
      const double gain = params.luminance[i] * (1.0 + psi);
      const Vec3& color = params.skin_mask[i] ? skin : background;
      for (int c = 0; c < 3; ++c) {
        double v = gain * color[c];
        if (params.noise_sigma > 0.0) v += params.noise_sigma * noise(rng);
        out[i * 3 + c] = static_cast<float>(v);
      }
    }
  }
  return seq;
}

int ClipRecipe::frames() const { return static_cast<int>(std::lround(duration_s * fps)) + 1; }

void ClipRecipe::validate() const {
  if (height < 1 || width < 1) throw ConfigError("clip dims must be positive");
  if (!(fps > 0.0) || !(duration_s > 0.0)) throw ConfigError("clip fps and duration must be positive");
  if (!(gold_rate >= fps)) throw ConfigError("gold sample rate must be at least the frame rate");
  if (!(skin_fraction > 0.0 && skin_fraction <= 1.0)) throw ConfigError("skin fraction must lie in (0, 1]");
  if (!(reflection_strength > 0.0)) throw ConfigError("reflection strength must be positive");
  if (!(noise_sigma >= 0.0) || !(nuisance_std >= 0.0) || !(resp_amplitude >= 0.0))
    throw ConfigError("noise, nuisance and respiration amplitudes must be non-negative");
  if (!(nuisance_hz >= 0.0)) throw ConfigError("nuisance bandwidth must be non-negative");
  auto norm = [](const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); };
  if (!(norm(skin_color) > 0.0) || !(norm(light_color) > 0.0)) throw ConfigError("skin and light colors must be nonzero");
}

SyntheticClip render_clip(const ClipRecipe& recipe, double hr_bpm, double br_bpm, std::uint64_t seed) {
  recipe.validate();
  std::mt19937_64 rng(mix_seed(seed, 0x636c6970));
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  const double pulse_phase = phase(rng);
  const double resp_phase = phase(rng);

  SyntheticClip clip;
  clip.bvp = make_pulse(SignalKind::bvp, hr_bpm, recipe.duration_s, recipe.gold_rate, recipe.harmonic_ratio, pulse_phase);
  clip.resp = make_pulse(SignalKind::respiration, br_bpm, recipe.duration_s, recipe.gold_rate, 0.0, resp_phase);
  for (auto& v : clip.resp.samples) v *= recipe.resp_amplitude;
  const auto nuisance =
      make_nuisance(recipe.duration_s, recipe.gold_rate, recipe.nuisance_hz, recipe.nuisance_std, mix_seed(seed, 1));

  SceneParams scene;
  scene.skin_color = normalized(recipe.skin_color);
  scene.reflection_strength = recipe.reflection_strength;
  scene.light_color = normalized(recipe.light_color);
  scene.pulse_strength = recipe.pulse_strength;
  scene.background_color = recipe.background_color;
  scene.phi_motion = recipe.phi_motion;
  scene.phi_pulse = recipe.phi_pulse;
  scene.psi_motion = recipe.psi_motion;
  scene.psi_pulse = recipe.psi_pulse;
  scene.cross_gamma = recipe.cross_gamma;
  scene.noise_sigma = recipe.noise_sigma;
  scene.rng_seed = mix_seed(seed, 2);
  default_geometry(scene, recipe.height, recipe.width, recipe.skin_fraction);

  clip.video =
      synthesize_scene(scene, clip.bvp, clip.resp, nuisance, recipe.frames(), recipe.height, recipe.width, recipe.fps);
  if (recipe.dtype == PixelType::u8) clip.video = to_u8(clip.video);
  return clip;
}

}  // namespace canphys
