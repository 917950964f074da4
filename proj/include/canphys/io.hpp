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
#include <span>
#include <string>
#include <vector>

#include "canphys/can_model.hpp"
#include "canphys/preprocess.hpp"
#include "canphys/reflect_synth.hpp"

namespace canphys::io {

namespace fs = std::filesystem;

/// Writes `bytes` to a sibling temporary file and renames it over `path`.
void write_atomic(const fs::path& path, std::span<const std::uint8_t> bytes);
void write_atomic(const fs::path& path, const std::string& text);

std::vector<std::uint8_t> read_file(const fs::path& path);

// FTV container:
//   "FTV1" | u32 T | u32 H | u32 W | u32 C | u8 dtype (0 u8, 1 f32) | f32 fps
//   | payload, t-major, row-major, channel-interleaved; little-endian.
std::vector<std::uint8_t> encode_ftv(const FrameSequence& seq);
FrameSequence decode_ftv(std::span<const std::uint8_t> bytes);
void write_ftv(const fs::path& path, const FrameSequence& seq);
FrameSequence read_ftv(const fs::path& path);

/// "t,value" CSV of a uniformly sampled waveform.
void write_gold_csv(const fs::path& path, const PhysioWaveform& w);
/// Reads "t,value". Non-uniform timestamps are resampled onto a uniform grid
/// at the mean rate.
PhysioWaveform read_gold_csv(const fs::path& path, SignalKind kind);

// Packed tensors:
//   "CPT1" | u32 N | u32 L | u32 C | f32 fps | u8 kind
//   | f32 motion[N*L*L*C] | f32 appearance[N*L*L*C] | f32 labels[N]
std::vector<std::uint8_t> encode_tensors(const TrainingTensors& t);
TrainingTensors decode_tensors(std::span<const std::uint8_t> bytes);
void write_tensors(const fs::path& path, const TrainingTensors& t);
TrainingTensors read_tensors(const fs::path& path);

// CANW checkpoint:
//   "CANW" | u32 version (1) | u32 L | u32 C | u32 c1..c4 | u32 hidden
//   | f32 d1 d2 d3 | u32 tensor count | per tensor: u32 element count, f32 data
//   in declaration order.
std::vector<std::uint8_t> encode_canw(const CanParams<float>& params);
CanParams<float> decode_canw(std::span<const std::uint8_t> bytes);
void write_canw(const fs::path& path, const CanParams<float>& params);
CanParams<float> read_canw(const fs::path& path);

/// 8-bit binary PGM (P5).
void write_pgm(const fs::path& path, int width, int height, std::span<const std::uint8_t> pixels);

struct PgmImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;
};
PgmImage read_pgm(const fs::path& path);

/// Binary PPM (P6) frame reader, for converting frame directories to FTV.
FrameSequence read_ppm_directory(const fs::path& dir, double fps);

}  // namespace canphys::io
