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

#include <span>
#include <vector>

namespace canphys::interp {

/// Shape-preserving piecewise cubic Hermite interpolant (Fritsch-Carlson
/// slopes). Evaluation outside the knot range holds the end values.
class Pchip {
 public:
  /// Knots at x[i], strictly increasing.
  Pchip(std::span<const double> x, std::span<const double> y);
  /// Uniform knots at x0 + i * dx.
  Pchip(std::span<const double> y, double x0, double dx);

  double operator()(double x) const;
  double x_begin() const { return x_.front(); }
  double x_end() const { return x_.back(); }

 private:
  void fit();

  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> slope_;
  bool uniform_ = false;
};

/// Cubic convolution kernel with a = -0.5.
double cubic_kernel(double x);

/// Per-output-index contribution weights for a 1-D resize from `in_size` to
/// `out_size` samples. Shrinking widens the kernel by the scale factor so
/// that every input pixel contributes (antialiased). Indices are clamped to
/// the input range. Weights of each output sum to 1.
struct ResizeTaps {
  int out_size = 0;
  int taps = 0;                // taps per output sample
  std::vector<int> index;      // out_size * taps
  std::vector<double> weight;  // out_size * taps
};

ResizeTaps resize_taps(int in_size, int out_size);

}  // namespace canphys::interp
