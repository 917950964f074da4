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

#include "canphys/training.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

namespace canphys {

namespace {

// Samples per gradient partial sum. Fixed so the reduction order does not
// depend on the thread count.
constexpr int kGroup = 8;

struct SampleRef {
  int video;
  int frame;
};

void check_dataset(std::span<const TrainingTensors> videos, const CanArch& arch) {
  if (videos.empty()) throw DataError("training set is empty");
  for (const auto& v : videos) {
    v.validate();
    if (v.motion.side != arch.input_side || v.motion.channels != arch.in_channels)
      throw DataError("tensors are " + std::to_string(v.motion.side) + "x" + std::to_string(v.motion.side) + "x" +
                      std::to_string(v.motion.channels) + " but the network expects " +
                      std::to_string(arch.input_side) + "x" + std::to_string(arch.input_side) + "x" +
                      std::to_string(arch.in_channels));
  }
}

std::span<const float> motion_of(const TrainingTensors& v, int t) {
  const std::size_t n = v.motion.sample_size();
  return {v.motion.data.data() + n * t, n};
}

std::span<const float> appearance_of(const TrainingTensors& v, int t) {
  const std::size_t n = v.appearance.sample_size();
  return {v.appearance.data.data() + n * t, n};
}

}  // namespace

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("adadelta rho must lie in (0, 1)");
  if (!(eps > 0.0)) throw ConfigError("adadelta eps must be positive");
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (extra_epochs < 0) throw ConfigError("extra_epochs must be >= 0");
}

void adadelta_step(CanParams<float>& params, const CanGrads<float>& grads, OptState& state,
                   const TrainConfig& config) {
  const std::size_t n = params.values.size();
  if (grads.values.size() != n || state.mean_sq_grad.size() != n || state.mean_sq_step.size() != n)
    throw DataError("adadelta: parameter, gradient and state sizes differ");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(grads.values[i])) {
      std::size_t tensor = 0;
      for (int k = 0; k < kParamTensorCount; ++k)
        if (params.layout.entries[k].offset <= i) tensor = static_cast<std::size_t>(k);
      throw DataError("non-finite gradient in " + std::string(param_name(static_cast<ParamId>(tensor))) +
                      " (element " + std::to_string(i - params.layout.entries[tensor].offset) + ")");
    }
  }
  const double rho = config.rho;
  const double eps = config.eps;
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grads.values[i];
    const double eg2 = rho * state.mean_sq_grad[i] + (1.0 - rho) * g * g;
    const double dx = -std::sqrt(state.mean_sq_step[i] + eps) / std::sqrt(eg2 + eps) * g;
    state.mean_sq_grad[i] = static_cast<float>(eg2);
    state.mean_sq_step[i] = static_cast<float>(rho * state.mean_sq_step[i] + (1.0 - rho) * dx * dx);
    params.values[i] = static_cast<float>(params.values[i] + dx);
  }
}

std::vector<double> predict_series(const CanParams<float>& params, const TrainingTensors& video) {
  video.validate();
  const int n = video.motion.samples;
  std::vector<double> out(static_cast<std::size_t>(n));
#pragma omp parallel
  {
    ForwardTrace<float> trace;
#pragma omp for schedule(static)
    for (int t = 0; t < n; ++t)
      out[t] = can_forward(params, motion_of(video, t), appearance_of(video, t), ForwardMode::infer(), trace);
  }
  return out;
}

double dataset_loss(const CanParams<float>& params, std::span<const TrainingTensors> videos) {
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& v : videos) {
    const auto est = predict_series(params, v);
    for (std::size_t t = 0; t < est.size(); ++t) {
      const double d = est[t] - v.labels.values[t];
      total += 0.5 * d * d;
    }
    count += est.size();
  }
  return total / static_cast<double>(count);
}

double frequency_error(const CanParams<float>& params, std::span<const TrainingTensors> videos, const BandSpec& band) {
  double abs_sum = 0.0;
  std::size_t windows = 0;
  for (const auto& v : videos) {
    const auto est = predict_series(params, v);
    const std::vector<double> gold(v.labels.values.begin(), v.labels.values.end());
    for (const auto& r : evaluate_series(est, gold, v.labels.fps, band)) {
      abs_sum += std::abs(r.est_bpm - r.gold_bpm);
      ++windows;
    }
  }
  return abs_sum / static_cast<double>(windows);
}

TrainResult train_epochs(std::span<const TrainingTensors> videos, const CanArch& arch, const TrainConfig& config,
                         std::uint64_t init_seed, const TrainCallbacks& callbacks) {
  return train_epochs(videos, init_params(arch, init_seed), config, callbacks);
}

TrainResult train_epochs(std::span<const TrainingTensors> videos, CanParams<float> params, const TrainConfig& config,
                         const TrainCallbacks& callbacks) {
  config.validate();
  const CanArch arch = params.arch;
  check_dataset(videos, arch);
  const BandSpec band = BandSpec::for_kind(config.target);

  std::vector<SampleRef> samples;
  for (int v = 0; v < static_cast<int>(videos.size()); ++v)
    for (int t = 0; t < videos[v].motion.samples; ++t) samples.push_back({v, t});
  const auto n_samples = static_cast<int>(samples.size());

  const int batch = config.batch_size;
  const int max_groups = (batch + kGroup - 1) / kGroup;
  std::vector<CanGrads<float>> partial(static_cast<std::size_t>(max_groups), CanGrads<float>(arch));
  CanGrads<float> grads(arch);
  OptState state = OptState::zeros(params.values.size());
  std::vector<double> losses(static_cast<std::size_t>(n_samples));

  TrainResult result;
  auto checkpoint = [&](int epoch, std::optional<double>& scored) {
    Checkpoint ck{epoch, params, std::numeric_limits<double>::quiet_NaN()};
    if (config.score_checkpoints) {
      ck.frequency_error = frequency_error(params, videos, band);
      scored = ck.frequency_error;
    }
    if (callbacks.on_checkpoint) callbacks.on_checkpoint(ck);
    result.checkpoints.push_back(std::move(ck));
  };

  auto run_epoch = [&](int epoch) {
    std::mt19937_64 rng(mix_seed(config.shuffle_seed, static_cast<std::uint64_t>(epoch)));
    std::shuffle(samples.begin(), samples.end(), rng);
    for (int begin = 0; begin < n_samples; begin += batch) {
      const int count = std::min(batch, n_samples - begin);
      const int groups = (count + kGroup - 1) / kGroup;
#pragma omp parallel
      {
        ForwardTrace<float> trace;
#pragma omp for schedule(dynamic)
        for (int g = 0; g < groups; ++g) {
          auto& buf = partial[g].values;
          std::fill(buf.begin(), buf.end(), 0.0f);
          const int lo = begin + g * kGroup;
          const int hi = std::min(lo + kGroup, begin + count);
          for (int s = lo; s < hi; ++s) {
            const auto& ref = samples[s];
            const auto& video = videos[ref.video];
            const std::uint64_t seed =
                mix_seed(config.dropout_seed, static_cast<std::uint64_t>(epoch) * n_samples + static_cast<std::uint64_t>(s));
            can_forward(params, motion_of(video, ref.frame), appearance_of(video, ref.frame),
                        ForwardMode::training(seed), trace);
            losses[s] = can_backward(params, trace, video.labels.values[ref.frame], partial[g]);
          }
        }
      }
      std::fill(grads.values.begin(), grads.values.end(), 0.0f);
      for (int g = 0; g < groups; ++g) {
        const auto& buf = partial[g].values;
        for (std::size_t i = 0; i < buf.size(); ++i) grads.values[i] += buf[i];
      }
      const float inv = 1.0f / static_cast<float>(count);
      for (auto& v : grads.values) v *= inv;
      try {
        adadelta_step(params, grads, state, config);
      } catch (const DataError& e) {
        throw DataError("epoch " + std::to_string(epoch) + ", batch at sample " + std::to_string(begin) + ": " +
                        e.what());
      }
    }
    return std::accumulate(losses.begin(), losses.end(), 0.0) / n_samples;
  };

  int epoch = 0;
  std::vector<double> history;
  while (epoch < config.epochs) {
    ++epoch;
    const double loss = run_epoch(epoch);
    history.push_back(loss);
    EpochLog row{epoch, loss, std::nullopt};
    const bool converged_early =
        config.plateau_stop && history.size() > 3 && history[history.size() - 4] - loss < 1e-4;
    if (epoch == config.epochs || converged_early) {
      checkpoint(epoch, row.frequency_error);
      result.log.push_back(row);
      if (callbacks.on_epoch) callbacks.on_epoch(row);
      break;
    }
    result.log.push_back(row);
    if (callbacks.on_epoch) callbacks.on_epoch(row);
  }
  if (config.epochs == 0) {
    std::optional<double> unused;
    checkpoint(0, unused);
  }
  for (int k = 0; k < config.extra_epochs; ++k) {
    ++epoch;
    EpochLog row{epoch, run_epoch(epoch), std::nullopt};
    checkpoint(epoch, row.frequency_error);
    result.log.push_back(row);
    if (callbacks.on_epoch) callbacks.on_epoch(row);
  }
  return result;
}

std::size_t select_checkpoint(const CheckpointSet& checkpoints) {
  if (checkpoints.empty()) throw DataError("no checkpoints to select from");
  std::size_t best = 0;
  for (std::size_t i = 1; i < checkpoints.size(); ++i) {
    const double e = checkpoints[i].frequency_error;
    const double b = checkpoints[best].frequency_error;
    if (std::isnan(b) || e <= b) best = i;
  }
  return best;
}

std::size_t select_checkpoint(CheckpointSet& checkpoints, std::span<const TrainingTensors> videos, const BandSpec& band) {
  for (auto& ck : checkpoints) ck.frequency_error = frequency_error(ck.params, videos, band);
  return select_checkpoint(checkpoints);
}

}  // namespace canphys
