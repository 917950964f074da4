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

#include "canphys/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "canphys/interp.hpp"

namespace canphys::io {

namespace {

class Writer {
 public:
  void magic(const char (&m)[5]) { bytes_.insert(bytes_.end(), m, m + 4); }
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f32s(std::span<const float> v) {
    bytes_.reserve(bytes_.size() + 4 * v.size());
    for (float x : v) f32(x);
  }
  void raw(std::span<const std::uint8_t> v) { bytes_.insert(bytes_.end(), v.begin(), v.end()); }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  Reader(std::span<const std::uint8_t> b, const char* what) : b_(b), what_(what) {}

  void magic(const char (&m)[5]) {
    need(4);
    if (std::memcmp(b_.data() + pos_, m, 4) != 0) throw DataError(std::string(what_) + ": bad magic");
    pos_ += 4;
  }
  std::uint8_t u8() {
    need(1);
    return b_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  void f32s(std::vector<float>& out, std::size_t n) {
    need(4 * n);
    out.resize(n);
    for (auto& x : out) x = f32();
  }
  void raw(std::vector<std::uint8_t>& out, std::size_t n) {
    need(n);
    out.assign(b_.begin() + static_cast<std::ptrdiff_t>(pos_), b_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
  }
  void finish() const {
    if (pos_ != b_.size()) throw DataError(std::string(what_) + ": trailing bytes after payload");
  }

 private:
  void need(std::size_t n) const {
    if (b_.size() - pos_ < n) throw DataError(std::string(what_) + ": truncated file");
  }

  std::span<const std::uint8_t> b_;
  const char* what_;
  std::size_t pos_ = 0;
};

std::uint32_t checked_u32(long long v, const char* what) {
  if (v < 0 || v > 0xffffffffLL) throw DataError(std::string(what) + " does not fit in u32");
  return static_cast<std::uint32_t>(v);
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

void write_atomic(const fs::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open " + tmp.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw DataError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

void write_atomic(const fs::path& path, const std::string& text) {
  write_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::vector<std::uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::uint8_t> encode_ftv(const FrameSequence& seq) {
  seq.validate();
  Writer w;
  w.magic("FTV1");
  w.u32(checked_u32(seq.frames, "T"));
  w.u32(checked_u32(seq.height, "H"));
  w.u32(checked_u32(seq.width, "W"));
  w.u32(checked_u32(seq.channels, "C"));
  w.u8(static_cast<std::uint8_t>(seq.dtype));
  w.f32(static_cast<float>(seq.fps));
  if (seq.dtype == PixelType::u8) {
    w.raw(seq.u8);
  } else {
    w.f32s(seq.f32);
  }
  return w.take();
}

FrameSequence decode_ftv(std::span<const std::uint8_t> bytes) {
  Reader r(bytes, "FTV");
  r.magic("FTV1");
  FrameSequence seq;
  seq.frames = static_cast<int>(r.u32());
  seq.height = static_cast<int>(r.u32());
  seq.width = static_cast<int>(r.u32());
  seq.channels = static_cast<int>(r.u32());
  const std::uint8_t dtype = r.u8();
  if (dtype > 1) throw DataError("FTV: unknown dtype flag " + std::to_string(dtype));
  seq.dtype = static_cast<PixelType>(dtype);
  seq.fps = r.f32();
  seq.provenance = Provenance::loaded;
  if (seq.frames < 0 || seq.height < 0 || seq.width < 0 || seq.channels < 0)
    throw DataError("FTV: dimensions out of range");
  const std::size_t n = seq.size();
  if (seq.dtype == PixelType::u8) {
    r.raw(seq.u8, n);
  } else {
    r.f32s(seq.f32, n);
  }
  r.finish();
  seq.validate();
  return seq;
}

void write_ftv(const fs::path& path, const FrameSequence& seq) { write_atomic(path, encode_ftv(seq)); }

FrameSequence read_ftv(const fs::path& path) {
  try {
    return decode_ftv(read_file(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_gold_csv(const fs::path& path, const PhysioWaveform& w) {
  std::ostringstream os;
  os << "t,value\n";
  for (std::size_t i = 0; i < w.samples.size(); ++i)
    os << format_double(static_cast<double>(i) / w.sample_rate) << ',' << format_double(w.samples[i]) << '\n';
  write_atomic(path, os.str());
}

PhysioWaveform read_gold_csv(const fs::path& path, SignalKind kind) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open gold signal " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty gold CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t,value") throw DataError(path.string() + ": expected header 't,value'");
  std::vector<double> t, v;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw DataError(path.string() + ":" + std::to_string(lineno) + ": missing comma");
    try {
      std::size_t used = 0;
      const double ti = std::stod(line.substr(0, comma), &used);
      const double vi = std::stod(line.substr(comma + 1));
      if (!std::isfinite(ti) || !std::isfinite(vi)) throw std::invalid_argument("non-finite");
      if (!t.empty() && !(ti > t.back()))
        throw DataError(path.string() + ":" + std::to_string(lineno) + ": timestamps must increase strictly");
      t.push_back(ti);
      v.push_back(vi);
    } catch (const std::invalid_argument&) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": unparseable row");
    } catch (const std::out_of_range&) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": value out of range");
    }
  }
  if (t.size() < 2) throw DataError(path.string() + ": gold CSV needs at least two rows");

  PhysioWaveform w;
  w.kind = kind;
  const double span = t.back() - t.front();
  const double dt = span / static_cast<double>(t.size() - 1);
  w.sample_rate = 1.0 / dt;
  bool uniform = true;
  for (std::size_t i = 0; i < t.size() && uniform; ++i)
    uniform = std::abs(t[i] - t.front() - dt * static_cast<double>(i)) <= 1e-6 * std::max(1.0, span);
  if (uniform) {
    w.samples = std::move(v);
  } else {
    interp::Pchip curve(t, v);
    w.samples.resize(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) w.samples[i] = curve(t.front() + dt * static_cast<double>(i));
  }
  return w;
}

std::vector<std::uint8_t> encode_tensors(const TrainingTensors& t) {
  t.validate();
  Writer w;
  w.magic("CPT1");
  w.u32(checked_u32(t.motion.samples, "N"));
  w.u32(checked_u32(t.motion.side, "L"));
  w.u32(checked_u32(t.motion.channels, "C"));
  w.f32(static_cast<float>(t.motion.fps));
  w.u8(static_cast<std::uint8_t>(t.labels.kind));
  w.f32s(t.motion.data);
  w.f32s(t.appearance.data);
  w.f32s(t.labels.values);
  return w.take();
}

TrainingTensors decode_tensors(std::span<const std::uint8_t> bytes) {
  Reader r(bytes, "tensors");
  r.magic("CPT1");
  TrainingTensors t;
  const auto n = r.u32();
  const auto side = r.u32();
  const auto c = r.u32();
  const float fps = r.f32();
  const auto kind = r.u8();
  if (kind > 1) throw DataError("tensors: unknown signal kind");
  t.motion.samples = t.appearance.samples = static_cast<int>(n);
  t.motion.side = t.appearance.side = static_cast<int>(side);
  t.motion.channels = t.appearance.channels = static_cast<int>(c);
  t.motion.fps = t.labels.fps = fps;
  t.labels.kind = static_cast<SignalKind>(kind);
  const std::size_t per = static_cast<std::size_t>(side) * side * c;
  r.f32s(t.motion.data, per * n);
  r.f32s(t.appearance.data, per * n);
  r.f32s(t.labels.values, n);
  r.finish();
  t.validate();
  return t;
}

void write_tensors(const fs::path& path, const TrainingTensors& t) { write_atomic(path, encode_tensors(t)); }

TrainingTensors read_tensors(const fs::path& path) {
  try {
    return decode_tensors(read_file(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_canw(const CanParams<float>& p) {
  Writer w;
  w.magic("CANW");
  w.u32(1);
  w.u32(checked_u32(p.arch.input_side, "L"));
  w.u32(checked_u32(p.arch.in_channels, "C"));
  for (int c : p.arch.channels) w.u32(checked_u32(c, "channels"));
  w.u32(checked_u32(p.arch.hidden, "hidden"));
  for (double d : p.arch.dropout) w.f32(static_cast<float>(d));
  w.u32(kParamTensorCount);
  for (int i = 0; i < kParamTensorCount; ++i) {
    const auto t = p.tensor(static_cast<ParamId>(i));
    w.u32(checked_u32(static_cast<long long>(t.size()), "tensor size"));
    w.f32s(t);
  }
  return w.take();
}

CanParams<float> decode_canw(std::span<const std::uint8_t> bytes) {
  Reader r(bytes, "CANW");
  r.magic("CANW");
  if (r.u32() != 1) throw DataError("CANW: unsupported version");
  CanArch arch;
  arch.input_side = static_cast<int>(r.u32());
  arch.in_channels = static_cast<int>(r.u32());
  for (int& c : arch.channels) c = static_cast<int>(r.u32());
  arch.hidden = static_cast<int>(r.u32());
  for (double& d : arch.dropout) d = r.f32();
  try {
    arch.validate();
  } catch (const ConfigError& e) {
    throw DataError(std::string("CANW: invalid architecture: ") + e.what());
  }
  if (r.u32() != kParamTensorCount) throw DataError("CANW: unexpected tensor count");
  CanParams<float> p(arch);
  std::vector<float> buf;
  for (int i = 0; i < kParamTensorCount; ++i) {
    auto t = p.tensor(static_cast<ParamId>(i));
    if (r.u32() != t.size()) throw DataError(std::string("CANW: size mismatch for ") + param_name(static_cast<ParamId>(i)));
    r.f32s(buf, t.size());
    std::copy(buf.begin(), buf.end(), t.begin());
  }
  r.finish();
  return p;
}

void write_canw(const fs::path& path, const CanParams<float>& p) { write_atomic(path, encode_canw(p)); }

CanParams<float> read_canw(const fs::path& path) {
  try {
    return decode_canw(read_file(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_pgm(const fs::path& path, int width, int height, std::span<const std::uint8_t> pixels) {
  if (pixels.size() != static_cast<std::size_t>(width) * height) throw DataError("PGM: pixel count mismatch");
  const std::string header = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  std::vector<std::uint8_t> bytes(header.begin(), header.end());
  bytes.insert(bytes.end(), pixels.begin(), pixels.end());
  write_atomic(path, bytes);
}

namespace {

// Parses "P5"/"P6" headers: magic, width, height, maxval, one whitespace byte.
std::size_t parse_pnm_header(const std::vector<std::uint8_t>& b, const char* magic, int& w, int& h, int& maxval) {
  std::size_t pos = 0;
  auto token = [&]() {
    while (pos < b.size()) {
      if (b[pos] == '#') {
        while (pos < b.size() && b[pos] != '\n') ++pos;
      } else if (std::isspace(b[pos])) {
        ++pos;
      } else {
        break;
      }
    }
    std::string t;
    while (pos < b.size() && !std::isspace(b[pos])) t.push_back(static_cast<char>(b[pos++]));
    return t;
  };
  if (token() != magic) throw DataError(std::string("expected ") + magic + " image");
  try {
    w = std::stoi(token());
    h = std::stoi(token());
    maxval = std::stoi(token());
  } catch (const std::exception&) {
    throw DataError("malformed PNM header");
  }
  if (w < 1 || h < 1 || maxval != 255) throw DataError("unsupported PNM geometry or depth");
  return pos + 1;
}

}  // namespace

PgmImage read_pgm(const fs::path& path) {
  const auto b = read_file(path);
  PgmImage img;
  int maxval = 0;
  const std::size_t off = parse_pnm_header(b, "P5", img.width, img.height, maxval);
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
  if (b.size() != off + n) throw DataError(path.string() + ": PGM payload size mismatch");
  img.pixels.assign(b.begin() + static_cast<std::ptrdiff_t>(off), b.end());
  return img;
}

FrameSequence read_ppm_directory(const fs::path& dir, double fps) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".ppm") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.size() < 2) throw DataError(dir.string() + ": need at least two .ppm frames");
  FrameSequence seq;
  seq.frames = static_cast<int>(files.size());
  seq.channels = 3;
  seq.dtype = PixelType::u8;
  seq.fps = fps;
  seq.provenance = Provenance::loaded;
  for (const auto& f : files) {
    const auto b = read_file(f);
    int w = 0, h = 0, maxval = 0;
    const std::size_t off = parse_pnm_header(b, "P6", w, h, maxval);
    if (seq.u8.empty()) {
      seq.width = w;
      seq.height = h;
    } else if (w != seq.width || h != seq.height) {
      throw DataError(f.string() + ": frame size differs from the first frame");
    }
    const std::size_t n = static_cast<std::size_t>(w) * h * 3;
    if (b.size() != off + n) throw DataError(f.string() + ": PPM payload size mismatch");
    seq.u8.insert(seq.u8.end(), b.begin() + static_cast<std::ptrdiff_t>(off), b.end());
  }
  seq.validate();
  return seq;
}

}  // namespace canphys::io
