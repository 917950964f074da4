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

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "canphys/preprocess.hpp"
#include "oracles.hpp"

using namespace canphys;

namespace {

FrameSequence random_clip(int t, int h, int w, std::uint64_t seed) {
  FrameSequence s;
  s.frames = t;
  s.height = h;
  s.width = w;
  s.channels = 3;
  s.fps = 30.0;
  s.f32.resize(s.size());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(0.05f, 1.0f);
  for (auto& v : s.f32) v = u(rng);
  return s;
}

PhysioWaveform sine_at(double f, double fs, std::size_t n) {
  PhysioWaveform w;
  w.sample_rate = fs;
  w.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) w.samples[i] = std::sin(2.0 * std::numbers::pi * f * static_cast<double>(i) / fs);
  return w;
}

double std_of(const std::vector<float>& v) {
  return oracle::population_std(std::vector<double>(v.begin(), v.end()));
}

}  // namespace

TEST_CASE("full preprocess equals the per-pixel oracle") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto clip = random_clip(16, 8, 8, seed);
    auto gold = sine_at(1.1, 30.0, 16);
    gold.samples[5] += 0.3;
    PreprocConfig cfg;
    cfg.side = 8;
    const auto t = preprocess_video(clip, gold, cfg);
    const auto ref = oracle::preprocess(clip.f32, 16, 8, 3, gold.samples, 3.0);
    REQUIRE(t.motion.data.size() == ref.motion.size());
    REQUIRE(t.labels.values.size() == 15);
    double worst = 0.0;
    for (std::size_t i = 0; i < ref.motion.size(); ++i) {
      worst = std::max(worst, std::abs(t.motion.data[i] - ref.motion[i]));
      worst = std::max(worst, std::abs(t.appearance.data[i] - ref.appearance[i]));
    }
    for (std::size_t i = 0; i < ref.labels.size(); ++i) worst = std::max(worst, std::abs(t.labels.values[i] - ref.labels[i]));
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("bicubic downsample of a checkerboard matches the 2-D oracle") {
  FrameSequence s;
  s.frames = 2;
  s.height = s.width = 72;
  s.channels = 1;
  s.fps = 30.0;
  s.f32.resize(s.size());
  std::vector<double> img(72 * 72);
  for (int y = 0; y < 72; ++y)
    for (int x = 0; x < 72; ++x) {
      // 3-pixel squares so the pattern survives the 2:1 reduction.
      const double v = ((y / 3 + x / 3) % 2) ? 0.9 : 0.1;
      img[y * 72 + x] = v;
      s.f32[y * 72 + x] = static_cast<float>(v);
      s.f32[72 * 72 + y * 72 + x] = static_cast<float>(v);
    }
  const auto out = downsample_frames(s, 36);
  const auto ref = oracle::bicubic_resize(img, 72, 72, 36, 36);
  double worst = 0.0;
  for (int i = 0; i < 36 * 36; ++i) worst = std::max(worst, std::abs(out.f32[i] - ref[i]));
  CHECK(worst < 1e-4);
  CHECK(std::abs(out.f32[0] - out.f32[36 * 36]) == 0.0);
}

TEST_CASE("bicubic downsample of a non-square color frame matches the oracle") {
  const auto clip = random_clip(2, 50, 61, 9);
  const auto out = downsample_frames(clip, 20);
  for (int c = 0; c < 3; ++c) {
    std::vector<double> plane(50 * 61);
    for (int i = 0; i < 50 * 61; ++i) plane[i] = clip.f32[i * 3 + c];
    const auto ref = oracle::bicubic_resize(plane, 50, 61, 20, 20);
    for (int i = 0; i < 400; ++i) CHECK(std::abs(out.f32[i * 3 + c] - ref[i]) < 1e-5);
  }
}

TEST_CASE("downsample edge cases") {
  auto clip = random_clip(3, 12, 12, 4);
  const auto same = downsample_frames(clip, 12);
  for (std::size_t i = 0; i < clip.f32.size(); ++i) CHECK(std::abs(same.f32[i] - clip.f32[i]) < 1e-6);
  std::fill(clip.f32.begin(), clip.f32.end(), 0.37f);
  for (float v : downsample_frames(clip, 5).f32) CHECK(v == doctest::Approx(0.37f).epsilon(1e-6));
  CHECK_THROWS_AS(downsample_frames(clip, 13), DataError);
}

TEST_CASE("normalized frame difference values") {
  FrameSequence s;
  s.frames = 3;
  s.height = s.width = 1;
  s.channels = 3;
  s.fps = 30.0;
  s.f32 = {100.0f, 0.0f, 7.0f, 150.0f, 0.0f, 7.0f, 150.0f, 1.0f, 7.0f};
  const auto d = normalized_frame_difference(s);
  REQUIRE(d.samples == 2);
  CHECK(d.data[0] == doctest::Approx(0.2));
  CHECK(d.data[1] == 0.0f);
  CHECK(d.data[2] == 0.0f);
  CHECK(d.data[3] == 0.0f);
  CHECK(d.data[4] == doctest::Approx(1.0));

  s.height = 1;
  s.width = 3;
  s.channels = 1;
  CHECK_THROWS_AS(normalized_frame_difference(s), DataError);
}

TEST_CASE("motion is invariant to a global luminance scale") {
  const auto a = random_clip(10, 6, 6, 12);
  auto b = a;
  for (auto& v : b.f32) v *= 2.7f;
  const auto da = normalized_frame_difference(a);
  const auto db = normalized_frame_difference(b);
  for (std::size_t i = 0; i < da.data.size(); ++i) CHECK(std::abs(da.data[i] - db.data[i]) < 1e-5);
}

TEST_CASE("clipping within bounds only rescales") {
  MotionTensor d;
  d.samples = 1;
  d.side = 2;
  d.channels = 3;
  d.data = {0.1f, -0.2f, 0.3f, 0.05f, -0.1f, 0.15f, -0.3f, 0.2f, 0.0f, 0.1f, -0.05f, -0.25f};
  const double sigma = std_of(d.data);
  const auto out = clip_and_standardize(d, 3.0);
  for (std::size_t i = 0; i < d.data.size(); ++i) CHECK(out.data[i] == doctest::Approx(d.data[i] / sigma).epsilon(1e-6));
  CHECK(std_of(out.data) == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("an outlier maps to the clip boundary") {
  // 400 values of +/-1 plus one outlier; the outlier sits near 10 sigma.
  MotionTensor d;
  d.samples = 1;
  d.side = 1;
  d.channels = 401;
  for (int i = 0; i < 400; ++i) d.data.push_back(i % 2 ? 1.0f : -1.0f);
  d.data.push_back(11.0f);
  // Hand computation: mean = 11/401, E[x^2] = (400 + 121)/401.
  const double mean = 11.0 / 401.0;
  const double sigma = std::sqrt((400.0 + 121.0) / 401.0 - mean * mean);
  CHECK((11.0 - mean) / sigma > 9.0);
  const double bound = 3.0 * sigma;
  std::vector<double> clipped(d.data.begin(), d.data.end());
  clipped.back() = bound;
  const double scale = oracle::population_std(clipped);
  const auto out = clip_and_standardize(d, 3.0);
  CHECK(out.data.back() == doctest::Approx(bound / scale).epsilon(1e-6));
  CHECK(out.data[0] == doctest::Approx(-1.0 / scale).epsilon(1e-6));
  CHECK(std_of(out.data) == doctest::Approx(1.0).epsilon(1e-4));

  MotionTensor zero = d;
  std::fill(zero.data.begin(), zero.data.end(), 0.0f);
  CHECK_THROWS_AS(clip_and_standardize(zero, 3.0), DataError);
}

TEST_CASE("appearance is standardized over the whole video") {
  const auto clip = random_clip(9, 4, 4, 5);
  const auto a = standardize_appearance(clip);
  CHECK(a.samples == 8);
  double mean = 0.0;
  for (float v : a.data) mean += v;
  CHECK(std::abs(mean / static_cast<double>(a.data.size())) < 1e-4);
  CHECK(std_of(a.data) == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("gold resampling") {
  SUBCASE("same rate preserves samples") {
    const auto g = sine_at(1.0, 30.0, 91);
    const auto r = resample_gold(g, 30.0, 91);
    for (std::size_t i = 0; i < g.samples.size(); ++i) CHECK(std::abs(r.samples[i] - g.samples[i]) < 1e-9);
  }
  SUBCASE("monotone input stays monotone") {
    PhysioWaveform g;
    g.sample_rate = 256.0;
    for (int i = 0; i <= 512; ++i) g.samples.push_back(std::pow(i / 512.0, 3) + (i > 300 ? 0.5 : 0.0));
    const auto r = resample_gold(g, 30.0, 61);
    for (std::size_t i = 1; i < r.samples.size(); ++i) CHECK(r.samples[i] >= r.samples[i - 1]);
  }
  SUBCASE("4 Hz sine 256 -> 30 Hz") {
    const auto g = sine_at(4.0, 256.0, 256 * 10 + 1);
    const auto r = resample_gold(g, 30.0, 301);
    double worst = 0.0;
    for (int k = 0; k < 301; ++k) worst = std::max(worst, std::abs(r.samples[k] - std::sin(2.0 * std::numbers::pi * 4.0 * k / 30.0)));
    CHECK(worst < 0.02);
  }
  SUBCASE("too short") {
    const auto g = sine_at(1.0, 256.0, 257);
    CHECK_THROWS_AS(resample_gold(g, 30.0, 32), DataError);
    CHECK_NOTHROW(resample_gold(g, 30.0, 31));
  }
}

TEST_CASE("labels") {
  SUBCASE("sine difference is a scaled, shifted sine with unit std") {
    const double f = 1.0, fs = 30.0;
    const auto g = sine_at(f, fs, 301);
    const auto l = derive_labels(g);
    REQUIRE(l.values.size() == 300);
    // sin(w(t+1)) - sin(wt) = 2 sin(w/2) cos(w(t + 1/2)); std over whole periods is sqrt(2) sin(w/2).
    const double w = 2.0 * std::numbers::pi * f / fs;
    const double pre_std = std::sqrt(2.0) * std::sin(w / 2.0);
    for (int t = 0; t < 300; ++t)
      CHECK(l.values[t] == doctest::Approx(2.0 * std::sin(w / 2.0) * std::cos(w * (t + 0.5)) / pre_std).epsilon(1e-4));
    CHECK(std_of(l.values) == doctest::Approx(1.0).epsilon(1e-4));
  }
  SUBCASE("ramp is degenerate") {
    PhysioWaveform g;
    g.sample_rate = 30.0;
    for (int i = 0; i < 50; ++i) g.samples.push_back(0.1 * i + 2.0);
    CHECK_THROWS_AS(derive_labels(g), DataError);
  }
  SUBCASE("single sample is an error") {
    PhysioWaveform g;
    g.sample_rate = 30.0;
    g.samples = {1.0};
    CHECK_THROWS_AS(derive_labels(g), DataError);
  }
}

TEST_CASE("preprocess alignment and lengths") {
  const auto clip = random_clip(21, 10, 10, 8);
  const auto gold = sine_at(1.3, 256.0, 256 + 1);
  PreprocConfig cfg;
  cfg.side = 8;
  const auto t = preprocess_video(clip, gold, cfg);
  CHECK(t.motion.samples == 20);
  CHECK(t.appearance.samples == 20);
  CHECK(t.labels.values.size() == 20);
  CHECK(t.motion.fps == 30.0);
  CHECK(std_of(t.motion.data) == doctest::Approx(1.0).epsilon(1e-4));

  cfg.target_fps = 15.0;
  const auto slow = preprocess_video(clip, gold, cfg);
  CHECK(slow.motion.samples == 10);
  CHECK(slow.labels.fps == 15.0);

  cfg.side = 3;
  CHECK_THROWS_AS(preprocess_video(clip, gold, cfg), ConfigError);
}
