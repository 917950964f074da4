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

#include <random>
#include <vector>

#include "canphys/kernels.hpp"

using namespace canphys;

namespace {

std::vector<double> rnd(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

void check_close(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
}

}  // namespace

TEST_CASE("parallel conv3x3 matches the serial reference") {
  for (auto [cin, cout, h, w] : std::vector<std::array<int, 4>>{{3, 4, 12, 12}, {5, 7, 9, 6}, {1, 1, 1, 1}, {8, 16, 16, 16}}) {
    const std::size_t hw = static_cast<std::size_t>(h) * w;
    const auto in = rnd(hw * cin, 1), wt = rnd(static_cast<std::size_t>(cin) * cout * 9, 2), b = rnd(cout, 3);
    std::vector<double> o1(hw * cout), o2(hw * cout);
    kernels::serial::conv3x3_forward(in.data(), cin, h, w, wt.data(), b.data(), cout, o1.data());
    kernels::conv3x3_forward(in.data(), cin, h, w, wt.data(), b.data(), cout, o2.data());
    check_close(o1, o2);

    const auto go = rnd(hw * cout, 4);
    std::vector<double> gi1(hw * cin, 9.0), gi2(hw * cin, -9.0);
    std::vector<double> gw1(wt.size(), 0.5), gw2(wt.size(), 0.5), gb1(cout, 0.25), gb2(cout, 0.25);
    kernels::serial::conv3x3_backward(in.data(), cin, h, w, wt.data(), cout, go.data(), gi1.data(), gw1.data(), gb1.data());
    kernels::conv3x3_backward(in.data(), cin, h, w, wt.data(), cout, go.data(), gi2.data(), gw2.data(), gb2.data());
    check_close(gi1, gi2);
    check_close(gw1, gw2);
    check_close(gb1, gb2);

    std::vector<double> gw3(wt.size(), 0.0), gb3(cout, 0.0);
    kernels::conv3x3_backward(in.data(), cin, h, w, wt.data(), cout, go.data(), static_cast<double*>(nullptr),
                              gw3.data(), gb3.data());
    for (std::size_t i = 0; i < gw3.size(); ++i) CHECK(gw3[i] + 0.5 == doctest::Approx(gw1[i]).epsilon(1e-12));
  }
}

TEST_CASE("parallel dense and pooling match the serial reference") {
  const int n_in = 37, n_out = 11;
  const auto in = rnd(n_in, 1), wt = rnd(static_cast<std::size_t>(n_in) * n_out, 2), b = rnd(n_out, 3);
  std::vector<double> o1(n_out), o2(n_out);
  kernels::serial::dense_forward(in.data(), n_in, wt.data(), b.data(), n_out, o1.data());
  kernels::dense_forward(in.data(), n_in, wt.data(), b.data(), n_out, o2.data());
  check_close(o1, o2);
  const auto go = rnd(n_out, 4);
  std::vector<double> gi1(n_in), gi2(n_in), gw1(wt.size()), gw2(wt.size()), gb1(n_out), gb2(n_out);
  kernels::serial::dense_backward(in.data(), n_in, wt.data(), n_out, go.data(), gi1.data(), gw1.data(), gb1.data());
  kernels::dense_backward(in.data(), n_in, wt.data(), n_out, go.data(), gi2.data(), gw2.data(), gb2.data());
  check_close(gi1, gi2);
  check_close(gw1, gw2);
  check_close(gb1, gb2);

  const auto img = rnd(3 * 6 * 6, 5);
  std::vector<double> p(3 * 9);
  kernels::avgpool2_forward(img.data(), 3, 6, 6, p.data());
  CHECK(p[0] == doctest::Approx(0.25 * (img[0] + img[1] + img[6] + img[7])));
  std::vector<double> g(img.size());
  kernels::avgpool2_backward(p.data(), 3, 6, 6, g.data());
  CHECK(g[7] == doctest::Approx(0.25 * p[0]));
}
