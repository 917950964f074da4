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

#include "canphys/interp.hpp"

#include <algorithm>
#include <cmath>

#include "canphys/common.hpp"

namespace canphys::interp {

namespace {

double endpoint_slope(double h0, double h1, double d0, double d1) {
  // Non-centered three-point estimate, clamped to preserve shape.
  double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
  if (d0 == 0.0 || s == 0.0 || std::signbit(s) != std::signbit(d0)) return 0.0;
  if (std::signbit(d0) != std::signbit(d1) && std::abs(s) > std::abs(3.0 * d0)) return 3.0 * d0;
  return s;
}

}  // namespace

Pchip::Pchip(std::span<const double> x, std::span<const double> y)
    : x_(x.begin(), x.end()), y_(y.begin(), y.end()) {
  if (x_.size() != y_.size()) throw DataError("pchip: knot arrays differ in length");
  for (std::size_t i = 1; i < x_.size(); ++i)
    if (!(x_[i] > x_[i - 1])) throw DataError("pchip: knots must be strictly increasing");
  fit();
}

Pchip::Pchip(std::span<const double> y, double x0, double dx) : y_(y.begin(), y.end()) {
  if (!(dx > 0.0)) throw DataError("pchip: knot spacing must be positive");
  x_.resize(y_.size());
  for (std::size_t i = 0; i < x_.size(); ++i) x_[i] = x0 + dx * static_cast<double>(i);
  uniform_ = true;
  fit();
}

void Pchip::fit() {
  const std::size_t n = y_.size();
  if (n < 2) throw DataError("pchip: need at least two knots");
  slope_.assign(n, 0.0);
  std::vector<double> h(n - 1);
  std::vector<double> delta(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x_[i + 1] - x_[i];
    delta[i] = (y_[i + 1] - y_[i]) / h[i];
  }
  if (n == 2) {
    slope_[0] = slope_[1] = delta[0];
    return;
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double a = delta[i - 1];
    const double b = delta[i];
    if (a == 0.0 || b == 0.0 || std::signbit(a) != std::signbit(b)) continue;
    const double w1 = 2.0 * h[i] + h[i - 1];
    const double w2 = h[i] + 2.0 * h[i - 1];
    slope_[i] = (w1 + w2) / (w1 / a + w2 / b);
  }
  slope_[0] = endpoint_slope(h[0], h[1], delta[0], delta[1]);
  slope_[n - 1] = endpoint_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
}

double Pchip::operator()(double x) const {
  if (x <= x_.front()) return y_.front();
  if (x >= x_.back()) return y_.back();
  std::size_t i;
  if (uniform_) {
    const double dx = x_[1] - x_[0];
    i = std::min(static_cast<std::size_t>((x - x_[0]) / dx), x_.size() - 2);
    // Guard against rounding putting x just outside the chosen interval.
    if (x < x_[i] && i > 0) --i;
    if (x >= x_[i + 1] && i + 2 < x_.size()) ++i;
  } else {
    i = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), x) - x_.begin()) - 1;
  }
  const double h = x_[i + 1] - x_[i];
  const double s = (x - x_[i]) / h;
  if (s == 0.0) return y_[i];
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
  const double h10 = s3 - 2.0 * s2 + s;
  const double h01 = -2.0 * s3 + 3.0 * s2;
  const double h11 = s3 - s2;
  return h00 * y_[i] + h10 * h * slope_[i] + h01 * y_[i + 1] + h11 * h * slope_[i + 1];
}

double cubic_kernel(double x) {
  constexpr double a = -0.5;
  const double ax = std::abs(x);
  if (ax <= 1.0) return ((a + 2.0) * ax - (a + 3.0)) * ax * ax + 1.0;
  if (ax < 2.0) return ((a * ax - 5.0 * a) * ax + 8.0 * a) * ax - 4.0 * a;
  return 0.0;
}

ResizeTaps resize_taps(int in_size, int out_size) {
  if (in_size < 1 || out_size < 1) throw DataError("resize: sizes must be positive");
  const double scale = static_cast<double>(out_size) / static_cast<double>(in_size);
  const double widen = scale < 1.0 ? 1.0 / scale : 1.0;
  const double support = 2.0 * widen;

  ResizeTaps r;
  r.out_size = out_size;
  r.taps = static_cast<int>(std::ceil(2.0 * support)) + 2;
  r.index.resize(static_cast<std::size_t>(out_size * r.taps));
  r.weight.resize(r.index.size());

  for (int o = 0; o < out_size; ++o) {
    // Pixel-center alignment.
    const double center = (o + 0.5) / scale - 0.5;
    const int first = static_cast<int>(std::floor(center - support));
    double total = 0.0;
    for (int t = 0; t < r.taps; ++t) {
      const int src = first + t;
      const double w = cubic_kernel((center - src) / widen);
      r.index[o * r.taps + t] = std::clamp(src, 0, in_size - 1);
      r.weight[o * r.taps + t] = w;
      total += w;
    }
    for (int t = 0; t < r.taps; ++t) r.weight[o * r.taps + t] /= total;
  }
  return r;
}

}  // namespace canphys::interp
