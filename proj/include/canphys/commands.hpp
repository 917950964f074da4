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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "canphys/config.hpp"

namespace canphys {

struct CommandOptions {
  std::optional<std::filesystem::path> checkpoint;  // default: run_dir/best.canw
  bool baseline_green = false;
};

// Every command validates its configuration and inputs before writing.
// Failures throw ConfigError or DataError.

/// Writes data_dir/clip_NNN.{ftv,bvp.csv,resp.csv} and manifest.csv.
void cmd_synth(const RunConfig& config);

/// Writes tensors_dir/<clip>.cpt for every data_dir/<clip>.ftv.
void cmd_prep(const RunConfig& config);

/// Writes run_dir/checkpoints/epoch_NNN.canw, run_dir/train_log.csv and
/// run_dir/best.canw.
void cmd_train(const RunConfig& config);

/// Writes output_dir/<clip>.metrics.csv per eval clip and
/// output_dir/summary.csv; with the green baseline also
/// output_dir/<clip>.green.metrics.csv.
void cmd_eval(const RunConfig& config, const CommandOptions& options);

/// Writes output_dir/attn/<clip>/q{1,2}_NNNNN.pgm and attention.csv.
void cmd_attn(const RunConfig& config, const CommandOptions& options);

/// Clip names with a file of the given extension in `dir`, sorted.
std::vector<std::string> list_clips(const std::filesystem::path& dir, const std::string& extension);

}  // namespace canphys
