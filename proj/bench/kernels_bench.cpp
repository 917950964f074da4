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

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "canphys/can_model.hpp"
#include "canphys/kernels.hpp"

namespace {

using namespace canphys;

std::vector<float> random_vec(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  std::vector<float> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

struct ConvCase {
  int cin, cout, side;
  std::vector<float> in, weight, bias, out, grad_out, grad_in, grad_w, grad_b;

  explicit ConvCase(const benchmark::State& state)
      : cin(static_cast<int>(state.range(0))), cout(static_cast<int>(state.range(1))),
        side(static_cast<int>(state.range(2))) {
    const std::size_t hw = static_cast<std::size_t>(side) * side;
    in = random_vec(hw * cin, 1);
    weight = random_vec(static_cast<std::size_t>(cin) * cout * 9, 2);
    bias = random_vec(cout, 3);
    out.resize(hw * cout);
    grad_out = random_vec(hw * cout, 4);
    grad_in.resize(hw * cin);
    grad_w.resize(weight.size());
    grad_b.resize(cout);
  }
  double macs() const { return 9.0 * cin * cout * side * side; }
};

void BM_Conv3x3ForwardSerial(benchmark::State& state) {
  ConvCase c(state);
  for (auto _ : state) {
    kernels::serial::conv3x3_forward(c.in.data(), c.cin, c.side, c.side, c.weight.data(), c.bias.data(), c.cout,
                                     c.out.data());
    benchmark::DoNotOptimize(c.out.data());
  }
  state.counters["MAC/s"] = benchmark::Counter(c.macs(), benchmark::Counter::kIsIterationInvariantRate);
}

void BM_Conv3x3ForwardParallel(benchmark::State& state) {
  ConvCase c(state);
  for (auto _ : state) {
    kernels::conv3x3_forward(c.in.data(), c.cin, c.side, c.side, c.weight.data(), c.bias.data(), c.cout,
                             c.out.data());
    benchmark::DoNotOptimize(c.out.data());
  }
  state.counters["MAC/s"] = benchmark::Counter(c.macs(), benchmark::Counter::kIsIterationInvariantRate);
}

void BM_Conv3x3BackwardSerial(benchmark::State& state) {
  ConvCase c(state);
  for (auto _ : state) {
    kernels::serial::conv3x3_backward(c.in.data(), c.cin, c.side, c.side, c.weight.data(), c.cout,
                                      c.grad_out.data(), c.grad_in.data(), c.grad_w.data(), c.grad_b.data());
    benchmark::DoNotOptimize(c.grad_in.data());
  }
  state.counters["MAC/s"] = benchmark::Counter(2.0 * c.macs(), benchmark::Counter::kIsIterationInvariantRate);
}

void BM_Conv3x3BackwardParallel(benchmark::State& state) {
  ConvCase c(state);
  for (auto _ : state) {
    kernels::conv3x3_backward(c.in.data(), c.cin, c.side, c.side, c.weight.data(), c.cout, c.grad_out.data(),
                              c.grad_in.data(), c.grad_w.data(), c.grad_b.data());
    benchmark::DoNotOptimize(c.grad_in.data());
  }
  state.counters["MAC/s"] = benchmark::Counter(2.0 * c.macs(), benchmark::Counter::kIsIterationInvariantRate);
}

void BM_DenseForwardSerial(benchmark::State& state) {
  const int n_in = static_cast<int>(state.range(0));
  const int n_out = static_cast<int>(state.range(1));
  auto in = random_vec(n_in, 1), w = random_vec(static_cast<std::size_t>(n_in) * n_out, 2), b = random_vec(n_out, 3);
  std::vector<float> out(n_out);
  for (auto _ : state) {
    kernels::serial::dense_forward(in.data(), n_in, w.data(), b.data(), n_out, out.data());
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_DenseForwardParallel(benchmark::State& state) {
  const int n_in = static_cast<int>(state.range(0));
  const int n_out = static_cast<int>(state.range(1));
  auto in = random_vec(n_in, 1), w = random_vec(static_cast<std::size_t>(n_in) * n_out, 2), b = random_vec(n_out, 3);
  std::vector<float> out(n_out);
  for (auto _ : state) {
    kernels::dense_forward(in.data(), n_in, w.data(), b.data(), n_out, out.data());
    benchmark::DoNotOptimize(out.data());
  }
}

CanArch bench_arch(const benchmark::State& state) {
  CanArch a;
  a.input_side = static_cast<int>(state.range(0));
  const int c = static_cast<int>(state.range(1));
  a.channels = {c, c, 2 * c, 2 * c};
  a.hidden = static_cast<int>(state.range(2));
  return a;
}

void BM_CanForwardBackward(benchmark::State& state) {
  const CanArch arch = bench_arch(state);
  const auto params = init_params(arch, 7);
  CanGrads<float> grads(arch);
  const std::size_t n = static_cast<std::size_t>(arch.input_side) * arch.input_side * arch.in_channels;
  const auto motion = random_vec(n, 5);
  const auto appearance = random_vec(n, 6);
  ForwardTrace<float> trace;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    can_forward(params, std::span<const float>(motion), std::span<const float>(appearance),
                ForwardMode::training(++seed), trace);
    benchmark::DoNotOptimize(can_backward(params, trace, 0.5f, grads));
  }
  state.SetItemsProcessed(state.iterations());
}

void BM_CanInfer(benchmark::State& state) {
  const CanArch arch = bench_arch(state);
  const auto params = init_params(arch, 7);
  const std::size_t n = static_cast<std::size_t>(arch.input_side) * arch.input_side * arch.in_channels;
  const auto motion = random_vec(n, 5);
  const auto appearance = random_vec(n, 6);
  ForwardTrace<float> trace;
  for (auto _ : state)
    benchmark::DoNotOptimize(can_forward(params, std::span<const float>(motion), std::span<const float>(appearance),
                                         ForwardMode::infer(), trace));
  state.SetItemsProcessed(state.iterations());
}

#define CONV_ARGS ->Args({3, 32, 36})->Args({32, 32, 36})->Args({32, 64, 18})->Args({8, 8, 16})
BENCHMARK(BM_Conv3x3ForwardSerial) CONV_ARGS;
BENCHMARK(BM_Conv3x3ForwardParallel) CONV_ARGS;
BENCHMARK(BM_Conv3x3BackwardSerial) CONV_ARGS;
BENCHMARK(BM_Conv3x3BackwardParallel) CONV_ARGS;
BENCHMARK(BM_DenseForwardSerial)->Args({5184, 128})->Args({1024, 32});
BENCHMARK(BM_DenseForwardParallel)->Args({5184, 128})->Args({1024, 32});
BENCHMARK(BM_CanForwardBackward)->Args({36, 32, 128})->Args({16, 8, 32})->Args({12, 4, 16})->Args({16, 4, 16});
BENCHMARK(BM_CanInfer)->Args({36, 32, 128})->Args({16, 8, 32});

}  // namespace

BENCHMARK_MAIN();
