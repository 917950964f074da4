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

// Two-branch convolutional attention network.
//
// Motion branch (layer numbering used for dropout placement):
//   1 conv3x3+tanh, 2 conv3x3+tanh -> x_m^1, mask q^1,
//   3 avgpool2, [dropout d1],
//   4 conv3x3+tanh, 5 conv3x3+tanh -> x_m^2, mask q^2,
//   6 avgpool2, [dropout d2], 7 flatten,
//   8 dense(hidden)+tanh, [dropout d3], 9 dense(1) linear.
// Appearance branch: layers 1-5 of the same shape; its conv-2 and conv-5
// activations feed the 1x1 attention convolutions. Masks are
//   q = H W sigmoid(w . x_a + b) / (2 |sigmoid(w . x_a + b)|_1)
// and multiply the motion features channel-wise before each pooling.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace canphys {

struct CanArch {
  int input_side = 36;
  int in_channels = 3;
  std::array<int, 4> channels{32, 32, 64, 64};
  int hidden = 128;
  std::array<double, 3> dropout{0.25, 0.25, 0.5};

  void validate() const;
  int side1() const { return input_side; }
  int side2() const { return input_side / 2; }
  int side3() const { return input_side / 4; }
  int flat_size() const { return channels[3] * side3() * side3(); }

  bool operator==(const CanArch&) const = default;
};

enum class ParamId : int {
  motion_conv1_w, motion_conv1_b,
  motion_conv2_w, motion_conv2_b,
  motion_conv4_w, motion_conv4_b,
  motion_conv5_w, motion_conv5_b,
  dense8_w, dense8_b,
  dense9_w, dense9_b,
  appearance_conv1_w, appearance_conv1_b,
  appearance_conv2_w, appearance_conv2_b,
  appearance_conv4_w, appearance_conv4_b,
  appearance_conv5_w, appearance_conv5_b,
  attention1_w, attention1_b,
  attention2_w, attention2_b,
  count
};

constexpr int kParamTensorCount = static_cast<int>(ParamId::count);

const char* param_name(ParamId id);

/// Offsets of every parameter tensor in the flat parameter vector, in
/// declaration order.
struct ParamLayout {
  struct Entry {
    std::size_t offset = 0;
    std::size_t size = 0;
    int fan_in = 0;
    int fan_out = 0;
  };
  std::array<Entry, kParamTensorCount> entries{};
  std::size_t total = 0;

  static ParamLayout from(const CanArch& arch);
  const Entry& operator[](ParamId id) const { return entries[static_cast<int>(id)]; }
};

template <class T>
struct CanParams {
  CanArch arch;
  ParamLayout layout;
  std::vector<T> values;

  CanParams() = default;
  explicit CanParams(const CanArch& a);

  std::span<T> tensor(ParamId id) {
    const auto& e = layout[id];
    return {values.data() + e.offset, e.size};
  }
  std::span<const T> tensor(ParamId id) const {
    const auto& e = layout[id];
    return {values.data() + e.offset, e.size};
  }

  template <class U>
  CanParams<U> cast() const {
    CanParams<U> out(arch);
    for (std::size_t i = 0; i < values.size(); ++i) out.values[i] = static_cast<U>(values[i]);
    return out;
  }
};

/// Gradient structure mirrors the parameter layout.
template <class T>
using CanGrads = CanParams<T>;

/// Glorot-uniform weights, zero biases, zero attention kernels.
CanParams<float> init_params(const CanArch& arch, std::uint64_t seed);

struct ForwardMode {
  bool train = false;
  std::uint64_t seed = 0;

  static ForwardMode infer() { return {false, 0}; }
  static ForwardMode training(std::uint64_t seed) { return {true, seed}; }
};

struct AttentionMaps {
  int side1 = 0;
  int side2 = 0;
  std::vector<float> q1;  // side1 * side1
  std::vector<float> q2;  // side2 * side2
};

/// Activations of one forward pass, reused as workspace across calls.
template <class T>
struct ForwardTrace {
  CanArch arch;
  ForwardMode mode;
  std::vector<T> motion_in, appearance_in;  // [C][L][L]
  // Motion branch.
  std::vector<T> m1, m2, z1, p1, p1d, m4, m5, z2, p2, p2d, h8, h8d;
  // Appearance branch.
  std::vector<T> a1, a2, ap, a4, a5;
  // Attention: sigmoid activations and normalized masks.
  std::vector<T> s1, q1, s2, q2;
  T sum_s1 = 0, sum_s2 = 0;
  // Dropout multipliers (0 or 1 / (1 - d)); empty in infer mode.
  std::vector<T> drop1, drop2, drop3;
  T estimate = 0;

  void resize(const CanArch& a);
};

/// Inputs are [L][L][C] (channel-interleaved, as stored in the tensors
/// file). Returns the scalar estimate; the trace keeps the masks.
template <class T>
T can_forward(const CanParams<T>& params, std::span<const float> motion,
              std::span<const float> appearance, ForwardMode mode, ForwardTrace<T>& trace);

/// Same network on double-precision inputs (gradient checking).
template <class T>
T can_forward(const CanParams<T>& params, std::span<const double> motion,
              std::span<const double> appearance, ForwardMode mode, ForwardTrace<T>& trace);

template <class T>
struct ForwardResult {
  T estimate;
  AttentionMaps maps;
  ForwardTrace<T> trace;
};

template <class T>
ForwardResult<T> can_forward(const CanParams<T>& params, std::span<const float> motion,
                             std::span<const float> appearance, ForwardMode mode);

template <class T>
AttentionMaps attention_maps(const ForwardTrace<T>& trace);

/// Gradient of 0.5 * (estimate - label)^2 with respect to every parameter,
/// added into `grads` (which must share the architecture). Returns the loss.
template <class T>
T can_backward(const CanParams<T>& params, const ForwardTrace<T>& trace, T label, CanGrads<T>& grads);

/// Stand-alone attention mask: x_a is [C][H][W], w is [C].
template <class T>
std::vector<T> attention_mask(std::span<const T> x_a, int c, int h, int w_, std::span<const T> w, T b);

/// z = (1 q) * x_m, broadcast over channels.
template <class T>
std::vector<T> apply_mask(std::span<const T> x_m, int c, int h, int w, std::span<const T> q);

}  // namespace canphys
