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
#include <vector>

#include "canphys/interp.hpp"

using canphys::interp::cubic_kernel;
using canphys::interp::Pchip;
using canphys::interp::resize_taps;

TEST_CASE("pchip matches reference values on non-uniform knots") {
  const std::vector<double> x{0, 1, 2, 3.5, 4, 6};
  const std::vector<double> y{0, 1, 0.5, 3, 3, 2};
  const Pchip p(x, y);
  const std::vector<std::pair<double, double>> ref{
      {0.25, 0.40234375}, {0.5, 0.71875},      {1.5, 0.75},   {2.2, 0.6214814814814816},
      {3.0, 2.351851851851852}, {3.75, 3.0}, {5.0, 2.725}, {5.9, 2.088475}};
  for (const auto& [q, v] : ref) CHECK(p(q) == doctest::Approx(v).epsilon(1e-12));
}

TEST_CASE("pchip uniform constructor matches reference values") {
  const std::vector<double> y{1, 3, 2, 2, 5};
  const Pchip p(y, 0.0, 1.0);
  CHECK(p(0.5) == doctest::Approx(2.4375));
  CHECK(p(1.25) == doctest::Approx(2.84375));
  CHECK(p(2.5) == doctest::Approx(2.0));
  CHECK(p(3.5) == doctest::Approx(2.9375));
}

TEST_CASE("pchip passes through knots and holds end values outside") {
  const std::vector<double> x{0.0, 0.3, 1.1, 2.0, 2.2};
  const std::vector<double> y{2.0, -1.0, 4.0, 4.0, 0.5};
  const Pchip p(x, y);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(p(x[i]) == doctest::Approx(y[i]).epsilon(1e-14));
  CHECK(p(-1.0) == doctest::Approx(2.0));
  CHECK(p(5.0) == doctest::Approx(0.5));
}

TEST_CASE("pchip preserves monotonicity of monotone data") {
  const std::vector<double> y{0.0, 0.1, 0.11, 2.0, 2.0, 5.0, 5.01, 9.0};
  const Pchip p(y, 0.0, 1.0);
  double prev = p(0.0);
  for (int i = 1; i <= 700; ++i) {
    const double v = p(i * 0.01);
    CHECK(v >= prev - 1e-12);
    prev = v;
  }
  // Flat segment stays flat.
  for (double q = 3.0; q <= 4.0; q += 0.05) CHECK(p(q) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("pchip resamples a 256 Hz sine to 30 Hz within 0.02") {
  const double f = 1.3;
  std::vector<double> y(256 * 10 + 1);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::sin(2.0 * std::numbers::pi * f * i / 256.0);
  const Pchip p(y, 0.0, 1.0 / 256.0);
  double worst = 0.0;
  for (int k = 0; k <= 300; ++k) {
    const double t = k / 30.0;
    worst = std::max(worst, std::abs(p(t) - std::sin(2.0 * std::numbers::pi * f * t)));
  }
  CHECK(worst < 0.02);
  CHECK(worst < 1e-4);
}

TEST_CASE("cubic kernel values") {
  CHECK(cubic_kernel(0.0) == doctest::Approx(1.0));
  CHECK(cubic_kernel(1.0) == doctest::Approx(0.0));
  CHECK(cubic_kernel(2.0) == doctest::Approx(0.0));
  CHECK(cubic_kernel(0.5) == doctest::Approx(0.5625));
  CHECK(cubic_kernel(-0.5) == doctest::Approx(0.5625));
  CHECK(cubic_kernel(1.5) == doctest::Approx(-0.0625));
  CHECK(cubic_kernel(2.5) == 0.0);
}

TEST_CASE("resize taps are normalized and in range") {
  for (auto [in, out] : std::vector<std::pair<int, int>>{{72, 36}, {36, 36}, {100, 36}, {36, 72}, {9, 4}}) {
    const auto t = resize_taps(in, out);
    REQUIRE(t.out_size == out);
    for (int o = 0; o < out; ++o) {
      double sum = 0.0;
      for (int k = 0; k < t.taps; ++k) {
        sum += t.weight[o * t.taps + k];
        CHECK(t.index[o * t.taps + k] >= 0);
        CHECK(t.index[o * t.taps + k] < in);
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("same-size resize is the identity") {
  const auto t = resize_taps(12, 12);
  for (int o = 0; o < 12; ++o) {
    for (int k = 0; k < t.taps; ++k) {
      const double w = t.weight[o * t.taps + k];
      if (t.index[o * t.taps + k] == o && w != 0.0) {
        CHECK(w == doctest::Approx(1.0));
      } else if (t.index[o * t.taps + k] != o) {
        CHECK(std::abs(w) < 1e-15);
      }
    }
  }
}
