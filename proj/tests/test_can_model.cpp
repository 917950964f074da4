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
#include <random>
#include <vector>

#include "canphys/can_model.hpp"
#include "oracles.hpp"

using namespace canphys;

namespace {

CanArch small_arch(int side = 12) {
  CanArch a;
  a.input_side = side;
  a.channels = {4, 4, 8, 8};
  a.hidden = 16;
  return a;
}

std::vector<float> randn(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> d(0.0f, 1.0f);
  std::vector<float> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

CanParams<float> randomized(const CanArch& a, std::uint64_t seed) {
  auto p = init_params(a, seed);
  std::mt19937_64 rng(seed + 99);
  std::normal_distribution<float> d(0.0f, 0.5f);
  for (auto id : {ParamId::attention1_w, ParamId::attention2_w, ParamId::attention1_b, ParamId::attention2_b,
                  ParamId::motion_conv2_b, ParamId::dense8_b, ParamId::dense9_b, ParamId::appearance_conv5_b})
    for (auto& v : p.tensor(id)) v = d(rng);
  return p;
}

// Straight-line forward pass in double, infer mode, on [L][L][C] inputs.
struct Scalar {
  const CanParams<float>& p;
  int L, C;

  using Map = std::vector<std::vector<std::vector<double>>>;  // [c][y][x]

  Map conv(const Map& in, ParamId wid, ParamId bid) const {
    const auto w = p.tensor(wid);
    const auto b = p.tensor(bid);
    const int cin = static_cast<int>(in.size());
    const int h = static_cast<int>(in[0].size());
    const int cout = static_cast<int>(b.size());
    Map out(cout, std::vector<std::vector<double>>(h, std::vector<double>(h)));
    for (int o = 0; o < cout; ++o)
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < h; ++x) {
          double acc = b[o];
          for (int i = 0; i < cin; ++i)
            for (int dy = -1; dy <= 1; ++dy)
              for (int dx = -1; dx <= 1; ++dx) {
                const int sy = y + dy, sx = x + dx;
                if (sy >= 0 && sy < h && sx >= 0 && sx < h)
                  acc += w[((o * cin + i) * 3 + (dy + 1)) * 3 + (dx + 1)] * in[i][sy][sx];
              }
          out[o][y][x] = std::tanh(acc);
        }
    return out;
  }

  static Map pool(const Map& in) {
    const int h = static_cast<int>(in[0].size()) / 2;
    Map out(in.size(), std::vector<std::vector<double>>(h, std::vector<double>(h)));
    for (std::size_t c = 0; c < in.size(); ++c)
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < h; ++x)
          out[c][y][x] = 0.25 * (in[c][2 * y][2 * x] + in[c][2 * y + 1][2 * x] + in[c][2 * y][2 * x + 1] +
                                 in[c][2 * y + 1][2 * x + 1]);
    return out;
  }

  std::vector<std::vector<double>> mask(const Map& xa, ParamId wid, ParamId bid) const {
    const auto w = p.tensor(wid);
    const double b = p.tensor(bid)[0];
    const int h = static_cast<int>(xa[0].size());
    std::vector<std::vector<double>> s(h, std::vector<double>(h));
    double total = 0.0;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < h; ++x) {
        double u = b;
        for (std::size_t c = 0; c < xa.size(); ++c) u += w[c] * xa[c][y][x];
        s[y][x] = 1.0 / (1.0 + std::exp(-u));
        total += s[y][x];
      }
    for (auto& row : s)
      for (auto& v : row) v = h * h * v / (2.0 * total);
    return s;
  }

  Map load(const std::vector<float>& in) const {
    Map m(C, std::vector<std::vector<double>>(L, std::vector<double>(L)));
    for (int y = 0; y < L; ++y)
      for (int x = 0; x < L; ++x)
        for (int c = 0; c < C; ++c) m[c][y][x] = in[(y * L + x) * C + c];
    return m;
  }

  double run(const std::vector<float>& motion, const std::vector<float>& appearance) const {
    const auto a2 = conv(conv(load(appearance), ParamId::appearance_conv1_w, ParamId::appearance_conv1_b),
                         ParamId::appearance_conv2_w, ParamId::appearance_conv2_b);
    const auto a5 = conv(conv(pool(a2), ParamId::appearance_conv4_w, ParamId::appearance_conv4_b),
                         ParamId::appearance_conv5_w, ParamId::appearance_conv5_b);
    const auto q1 = mask(a2, ParamId::attention1_w, ParamId::attention1_b);
    const auto q2 = mask(a5, ParamId::attention2_w, ParamId::attention2_b);

    auto m2 = conv(conv(load(motion), ParamId::motion_conv1_w, ParamId::motion_conv1_b), ParamId::motion_conv2_w,
                   ParamId::motion_conv2_b);
    for (auto& ch : m2)
      for (int y = 0; y < L; ++y)
        for (int x = 0; x < L; ++x) ch[y][x] *= q1[y][x];
    auto m5 = conv(conv(pool(m2), ParamId::motion_conv4_w, ParamId::motion_conv4_b), ParamId::motion_conv5_w,
                   ParamId::motion_conv5_b);
    for (auto& ch : m5)
      for (int y = 0; y < L / 2; ++y)
        for (int x = 0; x < L / 2; ++x) ch[y][x] *= q2[y][x];
    const auto p2 = pool(m5);
    std::vector<double> flat;
    for (const auto& ch : p2)
      for (const auto& row : ch)
        for (double v : row) flat.push_back(v);
    const auto w8 = p.tensor(ParamId::dense8_w);
    const auto b8 = p.tensor(ParamId::dense8_b);
    const auto w9 = p.tensor(ParamId::dense9_w);
    double out = p.tensor(ParamId::dense9_b)[0];
    for (std::size_t o = 0; o < b8.size(); ++o) {
      double acc = b8[o];
      for (std::size_t i = 0; i < flat.size(); ++i) acc += w8[o * flat.size() + i] * flat[i];
      out += w9[o] * std::tanh(acc);
    }
    return out;
  }
};

}  // namespace

TEST_CASE("attention mask fixtures") {
  SUBCASE("zero kernel gives a constant half") {
    std::vector<double> x(4 * 3 * 3);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(0.7 * i);
    const std::vector<double> w(4, 0.0);
    for (double b : {-3.0, 0.0, 2.5})
      for (double q : attention_mask<double>(x, 4, 3, 3, w, b)) CHECK(q == doctest::Approx(0.5).epsilon(1e-15));
  }
  SUBCASE("random 4x3x3 matches the direct formula") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<double> x(36), w(4);
    for (auto& v : x) v = n(rng);
    for (auto& v : w) v = n(rng);
    const double b = 0.3;
    const auto q = attention_mask<double>(x, 4, 3, 3, w, b);
    std::vector<double> s(9);
    double total = 0.0;
    for (int i = 0; i < 9; ++i) {
      double u = b;
      for (int c = 0; c < 4; ++c) u += w[c] * x[c * 9 + i];
      s[i] = 1.0 / (1.0 + std::exp(-u));
      total += s[i];
    }
    double sum = 0.0;
    for (int i = 0; i < 9; ++i) {
      CHECK(std::abs(q[i] - 9.0 * s[i] / (2.0 * total)) < 1e-7);
      CHECK(q[i] > 0.0);
      sum += q[i];
    }
    CHECK(sum == doctest::Approx(4.5).epsilon(1e-12));
  }
}

TEST_CASE("apply_mask fixtures") {
  std::vector<double> x(2 * 2 * 3);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = 0.5 * i - 1.0;
  const std::vector<double> ones(6, 1.0), halves(6, 0.5);
  CHECK(apply_mask<double>(x, 2, 2, 3, ones) == x);
  const auto h = apply_mask<double>(x, 2, 2, 3, halves);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(h[i] == x[i] / 2.0);
  std::vector<double> q{0.1, 2.0, -1.0, 0.3, 0.7, 1.5};
  const auto r = apply_mask<double>(x, 2, 2, 3, q);
  for (int c = 0; c < 2; ++c)
    for (int i = 0; i < 6; ++i) CHECK(r[c * 6 + i] == q[i] * x[c * 6 + i]);
  CHECK_THROWS_AS(apply_mask<double>(x, 2, 3, 3, q), DataError);
}

TEST_CASE("forward matches the scalar loop-nest oracle") {
  const auto arch = small_arch(12);
  for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
    const auto p = randomized(arch, seed);
    const auto m = randn(12 * 12 * 3, seed * 10);
    const auto a = randn(12 * 12 * 3, seed * 10 + 1);
    ForwardTrace<float> tr;
    const float est = can_forward(p, std::span<const float>(m), std::span<const float>(a), ForwardMode::infer(), tr);
    const double ref = Scalar{p, 12, 3}.run(m, a);
    CHECK(std::abs(est - ref) < 1e-5 * std::max(1.0, std::abs(ref)));
    // Double-precision path on the same network.
    const auto pd = p.cast<double>();
    ForwardTrace<double> trd;
    const std::vector<double> md(m.begin(), m.end()), ad(a.begin(), a.end());
    const double estd = can_forward(pd, std::span<const double>(md), std::span<const double>(ad), ForwardMode::infer(), trd);
    CHECK(std::abs(estd - ref) < 1e-6);
  }
}

TEST_CASE("zero network and fresh-init masks") {
  const auto arch = small_arch(8);
  CanParams<float> zero(arch);
  const auto m = randn(8 * 8 * 3, 1), a = randn(8 * 8 * 3, 2);
  const auto r = can_forward(zero, std::span<const float>(m), std::span<const float>(a), ForwardMode::infer());
  CHECK(r.estimate == 0.0f);
  for (float q : r.maps.q1) CHECK(q == doctest::Approx(0.5f));
  for (float q : r.maps.q2) CHECK(q == doctest::Approx(0.5f));
  CHECK(r.maps.q1.size() == 64);
  CHECK(r.maps.q2.size() == 16);

  const auto p = init_params(arch, 3);
  const auto f = can_forward(p, std::span<const float>(m), std::span<const float>(a), ForwardMode::infer());
  for (float q : f.maps.q1) CHECK(q == doctest::Approx(0.5f));
}

TEST_CASE("constant masks commute with the motion-only network") {
  const auto arch = small_arch(8);
  auto p = init_params(arch, 8);
  for (auto id : {ParamId::appearance_conv1_w, ParamId::appearance_conv2_w, ParamId::appearance_conv4_w,
                  ParamId::appearance_conv5_w, ParamId::attention1_w, ParamId::attention2_w})
    for (auto& v : p.tensor(id)) v = 0.0f;
  const auto m = randn(8 * 8 * 3, 4), a = randn(8 * 8 * 3, 5);
  ForwardTrace<float> tr;
  const float est = can_forward(p, std::span<const float>(m), std::span<const float>(a), ForwardMode::infer(), tr);
  // Reference: the motion-only chain with each pre-pool map halved.
  ForwardTrace<float> tr2;
  auto other = randn(8 * 8 * 3, 77);
  const float est2 = can_forward(p, std::span<const float>(m), std::span<const float>(other), ForwardMode::infer(), tr2);
  CHECK(est == est2);
  for (std::size_t i = 0; i < tr.z1.size(); ++i) CHECK(tr.z1[i] == doctest::Approx(0.5f * tr.m2[i]));
  for (std::size_t i = 0; i < tr.z2.size(); ++i) CHECK(tr.z2[i] == doctest::Approx(0.5f * tr.m5[i]));
}

TEST_CASE("mask sums hold on random passes") {
  const auto arch = small_arch(12);
  for (std::uint64_t s = 0; s < 25; ++s) {
    const auto p = randomized(arch, s);
    const auto m = randn(432, s + 1000), a = randn(432, s + 2000);
    const auto r = can_forward(p, std::span<const float>(m), std::span<const float>(a), ForwardMode::training(s));
    double s1 = 0.0, s2 = 0.0;
    for (float q : r.maps.q1) {
      CHECK(q > 0.0f);
      s1 += q;
    }
    for (float q : r.maps.q2) s2 += q;
    CHECK(std::abs(s1 - 72.0) < 1e-5 * 72.0);
    CHECK(std::abs(s2 - 18.0) < 1e-5 * 18.0);
  }
}

TEST_CASE("dropout contract") {
  const auto arch = small_arch(8);
  const auto p = randomized(arch, 2);
  const auto m = randn(192, 1), a = randn(192, 2);
  ForwardTrace<float> tr;
  const float i1 = can_forward(p, std::span<const float>(m), std::span<const float>(a), ForwardMode::infer(), tr);
  const float i2 = can_forward(p, std::span<const float>(m), std::span<const float>(a), ForwardMode::infer(), tr);
  CHECK(i1 == i2);
  const float t1 = can_forward(p, std::span<const float>(m), std::span<const float>(a), ForwardMode::training(9), tr);
  const float t2 = can_forward(p, std::span<const float>(m), std::span<const float>(a), ForwardMode::training(9), tr);
  const float t3 = can_forward(p, std::span<const float>(m), std::span<const float>(a), ForwardMode::training(10), tr);
  CHECK(t1 == t2);
  CHECK(t1 != t3);
  for (float d : tr.drop3) CHECK((d == 0.0f || d == doctest::Approx(2.0f)));

  // No dropout: train mode equals infer mode.
  auto nod = arch;
  nod.dropout = {0.0, 0.0, 0.0};
  CanParams<float> q(nod);
  q.values = p.values;
  const float a1 = can_forward(q, std::span<const float>(m), std::span<const float>(a), ForwardMode::infer(), tr);
  const float a2 = can_forward(q, std::span<const float>(m), std::span<const float>(a), ForwardMode::training(3), tr);
  CHECK(a1 == a2);
}

TEST_CASE("backward terminal cases") {
  const auto arch = small_arch(8);
  const auto p = randomized(arch, 4);
  const auto m = randn(192, 3), a = randn(192, 4);
  ForwardTrace<float> tr;
  const float est = can_forward(p, std::span<const float>(m), std::span<const float>(a), ForwardMode::training(1), tr);

  CanGrads<float> g(arch);
  CHECK(can_backward(p, tr, est, g) == 0.0f);
  for (float v : g.values) CHECK(v == 0.0f);

  CanGrads<float> g2(arch);
  const float loss = can_backward(p, tr, est - 0.75f, g2);
  CHECK(loss == doctest::Approx(0.5f * 0.75f * 0.75f));
  CHECK(g2.tensor(ParamId::dense9_b)[0] == doctest::Approx(0.75f));
  // Attention kernels receive gradient.
  double att = 0.0;
  for (float v : g2.tensor(ParamId::attention1_w)) att += std::abs(v);
  for (float v : g2.tensor(ParamId::attention2_w)) att += std::abs(v);
  CHECK(att > 0.0);

  CanGrads<float> wrong(small_arch(12));
  CHECK_THROWS_AS(can_backward(p, tr, 0.0f, wrong), DataError);
}

TEST_CASE("analytic gradient matches central differences") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const auto r = oracle::finite_difference_check(small_arch(12), seed);
    INFO("seed " << seed << " worst param " << r.worst_index);
    CHECK(r.max_rel_error < 1e-3);
  }
}

TEST_CASE("init statistics and determinism") {
  const auto arch = CanArch{};
  const auto a = init_params(arch, 17);
  const auto b = init_params(arch, 17);
  CHECK(a.values == b.values);
  CHECK(init_params(arch, 18).values != a.values);
  for (int i = 0; i < kParamTensorCount; ++i) {
    const auto id = static_cast<ParamId>(i);
    const auto& e = a.layout[id];
    const auto t = a.tensor(id);
    if (e.fan_in == 0) {
      for (float v : t) CHECK(v == 0.0f);
      continue;
    }
    if (t.size() < 10000) continue;
    const double target = std::sqrt(2.0 / (e.fan_in + e.fan_out));
    double ss = 0.0;
    for (float v : t) ss += static_cast<double>(v) * v;
    const double sd = std::sqrt(ss / static_cast<double>(t.size()));
    INFO(param_name(id));
    CHECK(std::abs(sd / target - 1.0) < 0.1);
  }
}

TEST_CASE("architecture validation and input checks") {
  CanArch a = small_arch(10);
  CHECK_THROWS_AS(a.validate(), ConfigError);
  a = small_arch(12);
  a.dropout[1] = 1.0;
  CHECK_THROWS_AS(a.validate(), ConfigError);
  const auto p = init_params(small_arch(8), 1);
  const auto m = randn(100, 1);
  ForwardTrace<float> tr;
  CHECK_THROWS_AS(can_forward(p, std::span<const float>(m), std::span<const float>(m), ForwardMode::infer(), tr),
                  DataError);
}
