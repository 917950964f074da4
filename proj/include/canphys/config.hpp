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
#include <filesystem>
#include <string>
#include <vector>

#include "canphys/can_model.hpp"
#include "canphys/preprocess.hpp"
#include "canphys/reflect_synth.hpp"
#include "canphys/spectral_eval.hpp"
#include "canphys/training.hpp"

namespace canphys {

/// Dataset generation settings for `canphys synth`.
struct SynthConfig {
  int clips = 0;
  ClipRecipe recipe;
  double hr_min = 45.0;
  double hr_max = 150.0;
  double br_min = 8.0;
  double br_max = 24.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Flat "key = value" file. '#' starts a comment; blank lines are ignored.
// Keys are listed by `RunConfig::known_keys()`; any other key is an error,
// as is a missing seed key.
struct RunConfig {
  std::filesystem::path data_dir;     // FTV clips and gold CSVs
  std::filesystem::path tensors_dir;  // packed training tensors
  std::filesystem::path run_dir;      // checkpoints, training log, best.canw
  std::filesystem::path output_dir;   // metrics and attention maps
  std::vector<std::string> train_clips;  // empty: every tensors file
  std::vector<std::string> eval_clips;
  std::string attn_clip;  // empty: first eval clip

  SignalKind target = SignalKind::bvp;
  SynthConfig synth;
  PreprocConfig prep;
  CanArch arch;
  TrainConfig train;
  std::uint64_t init_seed = 0;
  BandSpec band = BandSpec::heart_rate();

  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::filesystem::path& path);
  static const std::vector<std::string>& known_keys();

  /// Cross-field checks shared by every command.
  void validate() const;
};

void validate_band(const BandSpec& band, double fps);

}  // namespace canphys
