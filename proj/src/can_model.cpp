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

#include "canphys/can_model.hpp"

#include <cmath>
#include <random>

#include "canphys/common.hpp"
#include "canphys/kernels.hpp"

namespace canphys {

namespace {

constexpr std::array<const char*, kParamTensorCount> kNames = {
    "motion_conv1_w",     "motion_conv1_b",     "motion_conv2_w",     "motion_conv2_b",
    "motion_conv4_w",     "motion_conv4_b",     "motion_conv5_w",     "motion_conv5_b",
    "dense8_w",           "dense8_b",           "dense9_w",           "dense9_b",
    "appearance_conv1_w", "appearance_conv1_b", "appearance_conv2_w", "appearance_conv2_b",
    "appearance_conv4_w", "appearance_conv4_b", "appearance_conv5_w", "appearance_conv5_b",
    "attention1_w",       "attention1_b",       "attention2_w",       "attention2_b",
};

template <class T>
void tanh_inplace(std::vector<T>& v) {
  for (auto& x : v) x = std::tanh(x);
}

// g *= (1 - a^2) for a = tanh(pre).
template <class T>
void tanh_backward(const std::vector<T>& act, std::vector<T>& g) {
  for (std::size_t i = 0; i < g.size(); ++i) g[i] *= T(1) - act[i] * act[i];
}

template <class T>
T sigmoid(T u) {
  return T(1) / (T(1) + std::exp(-u));
}

// s = sigmoid(w . x + b) per pixel, q = K s / sum(s), K = hw / 2.
template <class T>
void mask_forward(const T* x, int c, int hw, const T* w, T b, std::vector<T>& s, std::vector<T>& q,
                  T& sum) {
  s.assign(static_cast<std::size_t>(hw), b);
  for (int k = 0; k < c; ++k) {
    const T wk = w[k];
    const T* row = x + static_cast<std::size_t>(k) * hw;
    for (int i = 0; i < hw; ++i) s[i] += wk * row[i];
  }
  // Accumulated in double so sum(q) = hw / 2 holds to f32 rounding of q alone.
  double total = 0.0;
  for (auto& v : s) {
    v = sigmoid(v);
    total += static_cast<double>(v);
  }
  sum = static_cast<T>(total);
  const double scale = static_cast<double>(hw) / (2.0 * total);
  q.resize(s.size());
  for (int i = 0; i < hw; ++i) q[i] = static_cast<T>(scale * static_cast<double>(s[i]));
}

// Given dL/dq, accumulates dL/dw, dL/db and adds dL/dx into gx.
template <class T>
void mask_backward(const T* x, int c, int hw, const T* w, const std::vector<T>& s, T sum,
                   const std::vector<T>& gq, T* gw, T* gb, T* gx) {
  // q_i = K s_i / S  =>  dL/ds_j = K / S * (gq_j - sum_i gq_i s_i / S)
  const T k = static_cast<T>(hw) / T(2);
  T dot = 0;
  for (int i = 0; i < hw; ++i) dot += gq[i] * s[i];
  const T mean_term = dot / sum;
  std::vector<T> gu(static_cast<std::size_t>(hw));
  T bsum = 0;
  for (int i = 0; i < hw; ++i) {
    const T gs = k / sum * (gq[i] - mean_term);
    gu[i] = gs * s[i] * (T(1) - s[i]);
    bsum += gu[i];
  }
  *gb += bsum;
  for (int ch = 0; ch < c; ++ch) {
    const T* row = x + static_cast<std::size_t>(ch) * hw;
    T* grow = gx + static_cast<std::size_t>(ch) * hw;
    const T wk = w[ch];
    T acc = 0;
    for (int i = 0; i < hw; ++i) {
      acc += gu[i] * row[i];
      grow[i] += wk * gu[i];
    }
    gw[ch] += acc;
  }
}

template <class T>
void fill_dropout(std::vector<T>& mult, std::size_t n, double rate, std::mt19937_64& rng) {
  mult.assign(n, T(1));
  if (rate <= 0.0) return;
  std::bernoulli_distribution keep(1.0 - rate);
  const T scale = static_cast<T>(1.0 / (1.0 - rate));
  for (auto& m : mult) m = keep(rng) ? scale : T(0);
}

template <class T, class In>
T forward_impl(const CanParams<T>& P, std::span<const In> motion, std::span<const In> appearance,
               ForwardMode mode, ForwardTrace<T>& tr) {
  const CanArch& a = P.arch;
  const int L = a.side1();
  const int L2 = a.side2();
  const int C = a.in_channels;
  const auto [c1, c2, c3, c4] = a.channels;
  const std::size_t in_size = static_cast<std::size_t>(L) * L * C;
  if (motion.size() != in_size || appearance.size() != in_size)
    throw DataError("network input size does not match architecture");
  if (P.values.size() != P.layout.total) throw DataError("parameter vector does not match layout");

  if (!(tr.arch == a) || tr.m1.empty()) tr.resize(a);
  tr.mode = mode;
  const std::size_t plane = static_cast<std::size_t>(L) * L;
  for (int c = 0; c < C; ++c)
    for (std::size_t i = 0; i < plane; ++i) {
      tr.motion_in[c * plane + i] = static_cast<T>(motion[i * C + c]);
      tr.appearance_in[c * plane + i] = static_cast<T>(appearance[i * C + c]);
    }

  auto W = [&](ParamId id) { return P.tensor(id).data(); };
  using namespace kernels;

  if (mode.train) {
    std::mt19937_64 rng(mode.seed);
    fill_dropout(tr.drop1, tr.p1.size(), a.dropout[0], rng);
    fill_dropout(tr.drop2, tr.p2.size(), a.dropout[1], rng);
    fill_dropout(tr.drop3, tr.h8.size(), a.dropout[2], rng);
  } else {
    tr.drop1.clear();
    tr.drop2.clear();
    tr.drop3.clear();
  }

  // Appearance branch, layers 1-5 (pooled output of layer 3 feeds layer 4).
  conv3x3_forward(tr.appearance_in.data(), C, L, L, W(ParamId::appearance_conv1_w),
                  W(ParamId::appearance_conv1_b), c1, tr.a1.data());
  tanh_inplace(tr.a1);
  conv3x3_forward(tr.a1.data(), c1, L, L, W(ParamId::appearance_conv2_w),
                  W(ParamId::appearance_conv2_b), c2, tr.a2.data());
  tanh_inplace(tr.a2);
  avgpool2_forward(tr.a2.data(), c2, L, L, tr.ap.data());
  conv3x3_forward(tr.ap.data(), c2, L2, L2, W(ParamId::appearance_conv4_w),
                  W(ParamId::appearance_conv4_b), c3, tr.a4.data());
  tanh_inplace(tr.a4);
  conv3x3_forward(tr.a4.data(), c3, L2, L2, W(ParamId::appearance_conv5_w),
                  W(ParamId::appearance_conv5_b), c4, tr.a5.data());
  tanh_inplace(tr.a5);

  mask_forward(tr.a2.data(), c2, L * L, W(ParamId::attention1_w), P.tensor(ParamId::attention1_b)[0],
               tr.s1, tr.q1, tr.sum_s1);
  mask_forward(tr.a5.data(), c4, L2 * L2, W(ParamId::attention2_w), P.tensor(ParamId::attention2_b)[0],
               tr.s2, tr.q2, tr.sum_s2);

  // Motion branch.
  conv3x3_forward(tr.motion_in.data(), C, L, L, W(ParamId::motion_conv1_w), W(ParamId::motion_conv1_b),
                  c1, tr.m1.data());
  tanh_inplace(tr.m1);
  conv3x3_forward(tr.m1.data(), c1, L, L, W(ParamId::motion_conv2_w), W(ParamId::motion_conv2_b), c2,
                  tr.m2.data());
  tanh_inplace(tr.m2);
  for (int c = 0; c < c2; ++c)
    for (std::size_t i = 0; i < plane; ++i) tr.z1[c * plane + i] = tr.q1[i] * tr.m2[c * plane + i];
  avgpool2_forward(tr.z1.data(), c2, L, L, tr.p1.data());
  for (std::size_t i = 0; i < tr.p1.size(); ++i) tr.p1d[i] = mode.train ? tr.p1[i] * tr.drop1[i] : tr.p1[i];

  conv3x3_forward(tr.p1d.data(), c2, L2, L2, W(ParamId::motion_conv4_w), W(ParamId::motion_conv4_b), c3,
                  tr.m4.data());
  tanh_inplace(tr.m4);
  conv3x3_forward(tr.m4.data(), c3, L2, L2, W(ParamId::motion_conv5_w), W(ParamId::motion_conv5_b), c4,
                  tr.m5.data());
  tanh_inplace(tr.m5);
  const std::size_t plane2 = static_cast<std::size_t>(L2) * L2;
  for (int c = 0; c < c4; ++c)
    for (std::size_t i = 0; i < plane2; ++i) tr.z2[c * plane2 + i] = tr.q2[i] * tr.m5[c * plane2 + i];
  avgpool2_forward(tr.z2.data(), c4, L2, L2, tr.p2.data());
  for (std::size_t i = 0; i < tr.p2.size(); ++i) tr.p2d[i] = mode.train ? tr.p2[i] * tr.drop2[i] : tr.p2[i];

  dense_forward(tr.p2d.data(), a.flat_size(), W(ParamId::dense8_w), W(ParamId::dense8_b), a.hidden,
                tr.h8.data());
  tanh_inplace(tr.h8);
  for (std::size_t i = 0; i < tr.h8.size(); ++i) tr.h8d[i] = mode.train ? tr.h8[i] * tr.drop3[i] : tr.h8[i];
  T out = 0;
  dense_forward(tr.h8d.data(), a.hidden, W(ParamId::dense9_w), W(ParamId::dense9_b), 1, &out);
  tr.estimate = out;
  return out;
}

}  // namespace

const char* param_name(ParamId id) { return kNames[static_cast<int>(id)]; }

void CanArch::validate() const {
  if (input_side < 4 || input_side % 4 != 0)
    throw ConfigError("input side must be a positive multiple of 4 (got " + std::to_string(input_side) + ")");
  if (in_channels != 1 && in_channels != 3) throw ConfigError("input channels must be 1 or 3");
  for (int c : channels)
    if (c < 1) throw ConfigError("conv channel widths must be positive");
  if (hidden < 1) throw ConfigError("hidden units must be positive");
  for (double d : dropout)
    if (!(d >= 0.0 && d < 1.0)) throw ConfigError("dropout rates must lie in [0, 1)");
}

ParamLayout ParamLayout::from(const CanArch& a) {
  a.validate();
  ParamLayout l;
  std::size_t off = 0;
  auto put = [&](ParamId id, std::size_t size, int fan_in, int fan_out) {
    l.entries[static_cast<int>(id)] = {off, size, fan_in, fan_out};
    off += size;
  };
  auto conv = [&](ParamId w, ParamId b, int cin, int cout) {
    put(w, static_cast<std::size_t>(cout) * cin * 9, cin * 9, cout * 9);
    put(b, static_cast<std::size_t>(cout), 0, 0);
  };
  const auto [c1, c2, c3, c4] = a.channels;
  conv(ParamId::motion_conv1_w, ParamId::motion_conv1_b, a.in_channels, c1);
  conv(ParamId::motion_conv2_w, ParamId::motion_conv2_b, c1, c2);
  conv(ParamId::motion_conv4_w, ParamId::motion_conv4_b, c2, c3);
  conv(ParamId::motion_conv5_w, ParamId::motion_conv5_b, c3, c4);
  put(ParamId::dense8_w, static_cast<std::size_t>(a.hidden) * a.flat_size(), a.flat_size(), a.hidden);
  put(ParamId::dense8_b, static_cast<std::size_t>(a.hidden), 0, 0);
  put(ParamId::dense9_w, static_cast<std::size_t>(a.hidden), a.hidden, 1);
  put(ParamId::dense9_b, 1, 0, 0);
  conv(ParamId::appearance_conv1_w, ParamId::appearance_conv1_b, a.in_channels, c1);
  conv(ParamId::appearance_conv2_w, ParamId::appearance_conv2_b, c1, c2);
  conv(ParamId::appearance_conv4_w, ParamId::appearance_conv4_b, c2, c3);
  conv(ParamId::appearance_conv5_w, ParamId::appearance_conv5_b, c3, c4);
  put(ParamId::attention1_w, static_cast<std::size_t>(c2), 0, 0);
  put(ParamId::attention1_b, 1, 0, 0);
  put(ParamId::attention2_w, static_cast<std::size_t>(c4), 0, 0);
  put(ParamId::attention2_b, 1, 0, 0);
  l.total = off;
  return l;
}

template <class T>
CanParams<T>::CanParams(const CanArch& a) : arch(a), layout(ParamLayout::from(a)), values(layout.total, T(0)) {}

CanParams<float> init_params(const CanArch& arch, std::uint64_t seed) {
  CanParams<float> p(arch);
  std::mt19937_64 rng(seed);
  for (int i = 0; i < kParamTensorCount; ++i) {
    const auto id = static_cast<ParamId>(i);
    const auto& e = p.layout[id];
    if (e.fan_in == 0) continue;  // biases and attention kernels start at zero
    const double limit = std::sqrt(6.0 / static_cast<double>(e.fan_in + e.fan_out));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (auto& v : p.tensor(id)) v = static_cast<float>(u(rng));
  }
  return p;
}

template <class T>
void ForwardTrace<T>::resize(const CanArch& a) {
  arch = a;
  const std::size_t L = a.side1(), L2 = a.side2(), L3 = a.side3();
  const auto [c1, c2, c3, c4] = a.channels;
  motion_in.assign(a.in_channels * L * L, T(0));
  appearance_in.assign(a.in_channels * L * L, T(0));
  m1.assign(c1 * L * L, T(0));
  m2.assign(c2 * L * L, T(0));
  z1.assign(c2 * L * L, T(0));
  p1.assign(c2 * L2 * L2, T(0));
  p1d.assign(c2 * L2 * L2, T(0));
  m4.assign(c3 * L2 * L2, T(0));
  m5.assign(c4 * L2 * L2, T(0));
  z2.assign(c4 * L2 * L2, T(0));
  p2.assign(c4 * L3 * L3, T(0));
  p2d.assign(c4 * L3 * L3, T(0));
  h8.assign(a.hidden, T(0));
  h8d.assign(a.hidden, T(0));
  a1.assign(c1 * L * L, T(0));
  a2.assign(c2 * L * L, T(0));
  ap.assign(c2 * L2 * L2, T(0));
  a4.assign(c3 * L2 * L2, T(0));
  a5.assign(c4 * L2 * L2, T(0));
}

template <class T>
T can_forward(const CanParams<T>& params, std::span<const float> motion, std::span<const float> appearance,
              ForwardMode mode, ForwardTrace<T>& trace) {
  return forward_impl<T, float>(params, motion, appearance, mode, trace);
}

template <class T>
T can_forward(const CanParams<T>& params, std::span<const double> motion, std::span<const double> appearance,
              ForwardMode mode, ForwardTrace<T>& trace) {
  return forward_impl<T, double>(params, motion, appearance, mode, trace);
}

template <class T>
AttentionMaps attention_maps(const ForwardTrace<T>& trace) {
  AttentionMaps m;
  m.side1 = trace.arch.side1();
  m.side2 = trace.arch.side2();
  m.q1.assign(trace.q1.begin(), trace.q1.end());
  m.q2.assign(trace.q2.begin(), trace.q2.end());
  return m;
}

template <class T>
ForwardResult<T> can_forward(const CanParams<T>& params, std::span<const float> motion,
                             std::span<const float> appearance, ForwardMode mode) {
  ForwardResult<T> r;
  r.estimate = can_forward(params, motion, appearance, mode, r.trace);
  r.maps = attention_maps(r.trace);
  return r;
}

template <class T>
T can_backward(const CanParams<T>& P, const ForwardTrace<T>& tr, T label, CanGrads<T>& G) {
  const CanArch& a = P.arch;
  if (!(tr.arch == a) || !(G.arch == a) || G.values.size() != P.values.size())
    throw DataError("trace, parameters and gradient buffer disagree on architecture");
  if (tr.m1.empty()) throw DataError("backward called without a forward trace");
  const int L = a.side1();
  const int L2 = a.side2();
  const int C = a.in_channels;
  const auto [c1, c2, c3, c4] = a.channels;
  const std::size_t plane = static_cast<std::size_t>(L) * L;
  const std::size_t plane2 = static_cast<std::size_t>(L2) * L2;
  const bool train = tr.mode.train;

  auto W = [&](ParamId id) { return P.tensor(id).data(); };
  auto Gp = [&](ParamId id) { return G.tensor(id).data(); };
  using namespace kernels;

  const T diff = tr.estimate - label;
  const T loss = T(0.5) * diff * diff;

  // Layer 9.
  std::vector<T> g_h8(a.hidden);
  dense_backward(tr.h8d.data(), a.hidden, W(ParamId::dense9_w), 1, &diff, g_h8.data(),
                 Gp(ParamId::dense9_w), Gp(ParamId::dense9_b));
  if (train)
    for (int i = 0; i < a.hidden; ++i) g_h8[i] *= tr.drop3[i];
  tanh_backward(tr.h8, g_h8);

  // Layer 8.
  std::vector<T> g_p2(static_cast<std::size_t>(a.flat_size()));
  dense_backward(tr.p2d.data(), a.flat_size(), W(ParamId::dense8_w), a.hidden, g_h8.data(), g_p2.data(),
                 Gp(ParamId::dense8_w), Gp(ParamId::dense8_b));
  if (train)
    for (std::size_t i = 0; i < g_p2.size(); ++i) g_p2[i] *= tr.drop2[i];

  // Layer 6 and mask 2.
  std::vector<T> g_z2(tr.z2.size());
  avgpool2_backward(g_p2.data(), c4, L2, L2, g_z2.data());
  std::vector<T> g_m5(tr.m5.size());
  std::vector<T> g_q2(plane2, T(0));
  for (int c = 0; c < c4; ++c)
    for (std::size_t i = 0; i < plane2; ++i) {
      const std::size_t k = c * plane2 + i;
      g_m5[k] = g_z2[k] * tr.q2[i];
      g_q2[i] += g_z2[k] * tr.m5[k];
    }
  std::vector<T> g_a5(tr.a5.size(), T(0));
  mask_backward(tr.a5.data(), c4, static_cast<int>(plane2), W(ParamId::attention2_w), tr.s2, tr.sum_s2, g_q2,
                Gp(ParamId::attention2_w), Gp(ParamId::attention2_b), g_a5.data());

  // Motion layers 5, 4.
  tanh_backward(tr.m5, g_m5);
  std::vector<T> g_m4(tr.m4.size());
  conv3x3_backward(tr.m4.data(), c3, L2, L2, W(ParamId::motion_conv5_w), c4, g_m5.data(), g_m4.data(),
                   Gp(ParamId::motion_conv5_w), Gp(ParamId::motion_conv5_b));
  tanh_backward(tr.m4, g_m4);
  std::vector<T> g_p1(tr.p1.size());
  conv3x3_backward(tr.p1d.data(), c2, L2, L2, W(ParamId::motion_conv4_w), c3, g_m4.data(), g_p1.data(),
                   Gp(ParamId::motion_conv4_w), Gp(ParamId::motion_conv4_b));
  if (train)
    for (std::size_t i = 0; i < g_p1.size(); ++i) g_p1[i] *= tr.drop1[i];

  // Layer 3 and mask 1.
  std::vector<T> g_z1(tr.z1.size());
  avgpool2_backward(g_p1.data(), c2, L, L, g_z1.data());
  std::vector<T> g_m2(tr.m2.size());
  std::vector<T> g_q1(plane, T(0));
  for (int c = 0; c < c2; ++c)
    for (std::size_t i = 0; i < plane; ++i) {
      const std::size_t k = c * plane + i;
      g_m2[k] = g_z1[k] * tr.q1[i];
      g_q1[i] += g_z1[k] * tr.m2[k];
    }

  // Motion layers 2, 1.
  tanh_backward(tr.m2, g_m2);
  std::vector<T> g_m1(tr.m1.size());
  conv3x3_backward(tr.m1.data(), c1, L, L, W(ParamId::motion_conv2_w), c2, g_m2.data(), g_m1.data(),
                   Gp(ParamId::motion_conv2_w), Gp(ParamId::motion_conv2_b));
  tanh_backward(tr.m1, g_m1);
  conv3x3_backward(tr.motion_in.data(), C, L, L, W(ParamId::motion_conv1_w), c1, g_m1.data(),
                   static_cast<T*>(nullptr), Gp(ParamId::motion_conv1_w), Gp(ParamId::motion_conv1_b));

  // Appearance branch: layers 5, 4, pooling, then mask 1 joins at layer 2.
  tanh_backward(tr.a5, g_a5);
  std::vector<T> g_a4(tr.a4.size());
  conv3x3_backward(tr.a4.data(), c3, L2, L2, W(ParamId::appearance_conv5_w), c4, g_a5.data(), g_a4.data(),
                   Gp(ParamId::appearance_conv5_w), Gp(ParamId::appearance_conv5_b));
  tanh_backward(tr.a4, g_a4);
  std::vector<T> g_ap(tr.ap.size());
  conv3x3_backward(tr.ap.data(), c2, L2, L2, W(ParamId::appearance_conv4_w), c3, g_a4.data(), g_ap.data(),
                   Gp(ParamId::appearance_conv4_w), Gp(ParamId::appearance_conv4_b));
  std::vector<T> g_a2(tr.a2.size());
  avgpool2_backward(g_ap.data(), c2, L, L, g_a2.data());
  mask_backward(tr.a2.data(), c2, static_cast<int>(plane), W(ParamId::attention1_w), tr.s1, tr.sum_s1, g_q1,
                Gp(ParamId::attention1_w), Gp(ParamId::attention1_b), g_a2.data());
  tanh_backward(tr.a2, g_a2);
  std::vector<T> g_a1(tr.a1.size());
  conv3x3_backward(tr.a1.data(), c1, L, L, W(ParamId::appearance_conv2_w), c2, g_a2.data(), g_a1.data(),
                   Gp(ParamId::appearance_conv2_w), Gp(ParamId::appearance_conv2_b));
  tanh_backward(tr.a1, g_a1);
  conv3x3_backward(tr.appearance_in.data(), C, L, L, W(ParamId::appearance_conv1_w), c1, g_a1.data(),
                   static_cast<T*>(nullptr), Gp(ParamId::appearance_conv1_w), Gp(ParamId::appearance_conv1_b));
  return loss;
}

template <class T>
std::vector<T> attention_mask(std::span<const T> x_a, int c, int h, int w_, std::span<const T> w, T b) {
  if (x_a.size() != static_cast<std::size_t>(c) * h * w_ || w.size() != static_cast<std::size_t>(c))
    throw DataError("attention_mask: shape mismatch");
  std::vector<T> s, q;
  T sum = 0;
  mask_forward(x_a.data(), c, h * w_, w.data(), b, s, q, sum);
  return q;
}

template <class T>
std::vector<T> apply_mask(std::span<const T> x_m, int c, int h, int w, std::span<const T> q) {
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  if (q.size() != plane || x_m.size() != plane * c) throw DataError("apply_mask: shape mismatch");
  std::vector<T> z(x_m.size());
  for (int k = 0; k < c; ++k)
    for (std::size_t i = 0; i < plane; ++i) z[k * plane + i] = q[i] * x_m[k * plane + i];
  return z;
}

#define CANPHYS_INSTANTIATE(T)                                                                        \
  template struct CanParams<T>;                                                                       \
  template struct ForwardTrace<T>;                                                                    \
  template T can_forward(const CanParams<T>&, std::span<const float>, std::span<const float>,         \
                         ForwardMode, ForwardTrace<T>&);                                              \
  template T can_forward(const CanParams<T>&, std::span<const double>, std::span<const double>,       \
                         ForwardMode, ForwardTrace<T>&);                                              \
  template ForwardResult<T> can_forward(const CanParams<T>&, std::span<const float>,                  \
                                        std::span<const float>, ForwardMode);                         \
  template AttentionMaps attention_maps(const ForwardTrace<T>&);                                      \
  template T can_backward(const CanParams<T>&, const ForwardTrace<T>&, T, CanGrads<T>&);              \
  template std::vector<T> attention_mask(std::span<const T>, int, int, int, std::span<const T>, T);   \
  template std::vector<T> apply_mask(std::span<const T>, int, int, int, std::span<const T>);

CANPHYS_INSTANTIATE(float)
CANPHYS_INSTANTIATE(double)

#undef CANPHYS_INSTANTIATE

}  // namespace canphys
