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

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "canphys/can_model.hpp"
#include "canphys/preprocess.hpp"
#include "canphys/spectral_eval.hpp"

namespace canphys {

struct TrainConfig {
  int batch_size = 128;
  double rho = 0.95;
  double eps = 1e-6;
  int epochs = 8;         // N_e, the convergence budget
  int extra_epochs = 16;  // checkpointed epochs after convergence
  std::uint64_t shuffle_seed = 0;
  std::uint64_t dropout_seed = 0;
  SignalKind target = SignalKind::bvp;
  /// Enter the checkpoint phase early once the epoch loss improves by less
  /// than 1e-4 over 3 epochs.
  bool plateau_stop = false;
  /// Score every checkpoint by training-set frequency error. Needs videos of
  /// at least one evaluation window.
  bool score_checkpoints = true;

  void validate() const;
};

/// Running averages E[g^2] and E[dx^2] per parameter.
struct OptState {
  std::vector<float> mean_sq_grad;
  std::vector<float> mean_sq_step;

  static OptState zeros(std::size_t n) { return {std::vector<float>(n, 0.0f), std::vector<float>(n, 0.0f)}; }
};

/// One Adadelta update, in place. Throws DataError (leaving params and
/// state untouched) if any gradient is non-finite.
void adadelta_step(CanParams<float>& params, const CanGrads<float>& grads, OptState& state, const TrainConfig& config);

struct Checkpoint {
  int epoch = 0;
  CanParams<float> params;
  double frequency_error = 0.0;  // training-set windowed MAE, BPM (NaN if unscored)
};

using CheckpointSet = std::vector<Checkpoint>;

struct EpochLog {
  int epoch = 0;
  double mean_loss = 0.0;
  std::optional<double> frequency_error;
};

struct TrainResult {
  CheckpointSet checkpoints;
  std::vector<EpochLog> log;
};

struct TrainCallbacks {
  std::function<void(const EpochLog&)> on_epoch;
  std::function<void(const Checkpoint&)> on_checkpoint;
};

/// Infer-mode network output for every frame pair of a video.
std::vector<double> predict_series(const CanParams<float>& params, const TrainingTensors& video);

/// Windowed training-set MAE (BPM) of the filtered network output against the
/// filtered labels, over all windows of all videos.
double frequency_error(const CanParams<float>& params, std::span<const TrainingTensors> videos, const BandSpec& band);

/// Mean 0.5 * (estimate - label)^2 over every sample, infer mode.
double dataset_loss(const CanParams<float>& params, std::span<const TrainingTensors> videos);

/// Mini-batch Adadelta for `epochs` epochs, then `extra_epochs` more with a
/// checkpoint after the convergence epoch and after each extra epoch.
TrainResult train_epochs(std::span<const TrainingTensors> videos, const CanArch& arch, const TrainConfig& config,
                         std::uint64_t init_seed, const TrainCallbacks& callbacks = {});

/// Same, starting from given parameters.
TrainResult train_epochs(std::span<const TrainingTensors> videos, CanParams<float> initial, const TrainConfig& config,
                         const TrainCallbacks& callbacks = {});

/// Index of the smallest frequency error; ties go to the later epoch.
std::size_t select_checkpoint(const CheckpointSet& checkpoints);

/// Rescores every checkpoint on `videos` and returns the selected index.
std::size_t select_checkpoint(CheckpointSet& checkpoints, std::span<const TrainingTensors> videos, const BandSpec& band);

}  // namespace canphys
