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

#include "canphys/config.hpp"

#include <omp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace canphys {

void apply_thread_limit_from_env() {
  const char* env = std::getenv("CANPHYS_THREADS");
  if (env == nullptr || *env == '\0') return;
  int n = 0;
  const char* end = env + std::char_traits<char>::length(env);
  const auto [ptr, ec] = std::from_chars(env, end, n);
  if (ec != std::errc() || ptr != end || n < 1)
    throw ConfigError(std::string("CANPHYS_THREADS must be a positive integer (got '") + env + "')");
  omp_set_num_threads(n);
}

void SynthConfig::validate() const {
  if (clips < 1) throw ConfigError("synth.clips must be >= 1");
  recipe.validate();
  if (!(hr_min >= 30.0 && hr_max <= 240.0 && hr_min <= hr_max))
    throw ConfigError("synth heart-rate band must satisfy 30 <= hr_min <= hr_max <= 240 BPM");
  if (!(br_min >= 4.0 && br_max <= 60.0 && br_min <= br_max))
    throw ConfigError("synth breathing-rate band must satisfy 4 <= br_min <= br_max <= 60 BPM");
  if (hr_max / 60.0 >= recipe.fps / 2.0) throw ConfigError("synth.hr_max is above the Nyquist rate of synth.fps");
}

void validate_band(const BandSpec& band, double fps) {
  const double nyq = fps / 2.0;
  if (!(band.pass_lo > 0.0 && band.pass_lo < band.pass_hi && band.pass_hi < nyq))
    throw ConfigError("band pass edges must satisfy 0 < lo < hi < fps/2");
  if (!(band.snr_lo >= 0.0 && band.snr_lo < band.snr_hi && band.snr_hi <= nyq))
    throw ConfigError("band SNR range must satisfy 0 <= lo < hi <= fps/2");
  if (!(band.harmonic_halfwidth > 0.0)) throw ConfigError("band harmonic half-width must be positive");
}

namespace {

class KeyValues {
 public:
  explicit KeyValues(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
      if (!values_.emplace(key, value).second)
        throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
  }

  const std::string* find(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return nullptr;
    return &it->second;
  }

  void reject_unknown(const std::vector<std::string>& known) const {
    for (const auto& [key, value] : values_) {
      if (std::find(known.begin(), known.end(), key) == known.end())
        throw ConfigError("unknown config key '" + key + "'");
    }
  }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  std::map<std::string, std::string> values_;
};

template <class T>
T parse_number(const std::string& key, const std::string& s) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ConfigError("config key '" + key + "': cannot parse '" + s + "'");
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(v)) throw ConfigError("config key '" + key + "' must be finite");
  }
  return v;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

template <class T, std::size_t N>
std::array<T, N> parse_array(const std::string& key, const std::string& s) {
  const auto items = split_list(s);
  if (items.size() != N) throw ConfigError("config key '" + key + "' needs " + std::to_string(N) + " values");
  std::array<T, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = parse_number<T>(key, items[i]);
  return out;
}

bool parse_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ConfigError("config key '" + key + "' must be true or false");
}

SignalKind parse_kind(const std::string& key, const std::string& s) {
  if (s == "bvp" || s == "hr") return SignalKind::bvp;
  if (s == "respiration" || s == "br") return SignalKind::respiration;
  throw ConfigError("config key '" + key + "' must be bvp or respiration");
}

PixelType parse_dtype(const std::string& key, const std::string& s) {
  if (s == "u8") return PixelType::u8;
  if (s == "f32") return PixelType::f32;
  throw ConfigError("config key '" + key + "' must be u8 or f32");
}

struct Binding {
  std::string key;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
};

template <class T, class M>
Binding num(std::string key, M member) {
  return {std::move(key), [member](RunConfig& c, const std::string& k, const std::string& v) {
            std::invoke(member, c) = parse_number<T>(k, v);
          }};
}

const std::vector<Binding>& bindings() {
  using R = RunConfig;
  static const std::vector<Binding> table = {
      {"data_dir", [](R& c, const std::string&, const std::string& v) { c.data_dir = v; }},
      {"tensors_dir", [](R& c, const std::string&, const std::string& v) { c.tensors_dir = v; }},
      {"run_dir", [](R& c, const std::string&, const std::string& v) { c.run_dir = v; }},
      {"output_dir", [](R& c, const std::string&, const std::string& v) { c.output_dir = v; }},
      {"train_clips", [](R& c, const std::string&, const std::string& v) { c.train_clips = split_list(v); }},
      {"eval_clips", [](R& c, const std::string&, const std::string& v) { c.eval_clips = split_list(v); }},
      {"attn_clip", [](R& c, const std::string&, const std::string& v) { c.attn_clip = v; }},
      {"target", [](R& c, const std::string& k, const std::string& v) { c.target = parse_kind(k, v); }},

      num<int>("synth.clips", [](R& c) -> int& { return c.synth.clips; }),
      num<int>("synth.height", [](R& c) -> int& { return c.synth.recipe.height; }),
      num<int>("synth.width", [](R& c) -> int& { return c.synth.recipe.width; }),
      num<double>("synth.fps", [](R& c) -> double& { return c.synth.recipe.fps; }),
      num<double>("synth.duration", [](R& c) -> double& { return c.synth.recipe.duration_s; }),
      num<double>("synth.gold_rate", [](R& c) -> double& { return c.synth.recipe.gold_rate; }),
      num<double>("synth.skin_fraction", [](R& c) -> double& { return c.synth.recipe.skin_fraction; }),
      num<double>("synth.reflection_strength", [](R& c) -> double& { return c.synth.recipe.reflection_strength; }),
      num<double>("synth.harmonic_ratio", [](R& c) -> double& { return c.synth.recipe.harmonic_ratio; }),
      num<double>("synth.resp_amplitude", [](R& c) -> double& { return c.synth.recipe.resp_amplitude; }),
      num<double>("synth.nuisance_hz", [](R& c) -> double& { return c.synth.recipe.nuisance_hz; }),
      num<double>("synth.nuisance_std", [](R& c) -> double& { return c.synth.recipe.nuisance_std; }),
      num<double>("synth.phi_motion", [](R& c) -> double& { return c.synth.recipe.phi_motion; }),
      num<double>("synth.phi_pulse", [](R& c) -> double& { return c.synth.recipe.phi_pulse; }),
      num<double>("synth.psi_motion", [](R& c) -> double& { return c.synth.recipe.psi_motion; }),
      num<double>("synth.psi_pulse", [](R& c) -> double& { return c.synth.recipe.psi_pulse; }),
      num<double>("synth.cross_gamma", [](R& c) -> double& { return c.synth.recipe.cross_gamma; }),
      num<double>("synth.noise_sigma", [](R& c) -> double& { return c.synth.recipe.noise_sigma; }),
      num<double>("synth.hr_min", [](R& c) -> double& { return c.synth.hr_min; }),
      num<double>("synth.hr_max", [](R& c) -> double& { return c.synth.hr_max; }),
      num<double>("synth.br_min", [](R& c) -> double& { return c.synth.br_min; }),
      num<double>("synth.br_max", [](R& c) -> double& { return c.synth.br_max; }),
      num<std::uint64_t>("synth.seed", [](R& c) -> std::uint64_t& { return c.synth.seed; }),
      {"synth.dtype", [](R& c, const std::string& k, const std::string& v) { c.synth.recipe.dtype = parse_dtype(k, v); }},
      {"synth.skin_color", [](R& c, const std::string& k, const std::string& v) { c.synth.recipe.skin_color = parse_array<double, 3>(k, v); }},
      {"synth.light_color", [](R& c, const std::string& k, const std::string& v) { c.synth.recipe.light_color = parse_array<double, 3>(k, v); }},
      {"synth.pulse_strength", [](R& c, const std::string& k, const std::string& v) { c.synth.recipe.pulse_strength = parse_array<double, 3>(k, v); }},
      {"synth.background_color", [](R& c, const std::string& k, const std::string& v) { c.synth.recipe.background_color = parse_array<double, 3>(k, v); }},

      num<int>("prep.side", [](R& c) -> int& { return c.prep.side; }),
      num<double>("prep.clip_sigmas", [](R& c) -> double& { return c.prep.clip_sigmas; }),
      {"prep.target_fps", [](R& c, const std::string& k, const std::string& v) { c.prep.target_fps = parse_number<double>(k, v); }},

      {"model.channels", [](R& c, const std::string& k, const std::string& v) { c.arch.channels = parse_array<int, 4>(k, v); }},
      num<int>("model.hidden", [](R& c) -> int& { return c.arch.hidden; }),
      {"model.dropout", [](R& c, const std::string& k, const std::string& v) { c.arch.dropout = parse_array<double, 3>(k, v); }},

      num<int>("train.batch_size", [](R& c) -> int& { return c.train.batch_size; }),
      num<double>("train.rho", [](R& c) -> double& { return c.train.rho; }),
      num<double>("train.eps", [](R& c) -> double& { return c.train.eps; }),
      num<int>("train.epochs", [](R& c) -> int& { return c.train.epochs; }),
      num<int>("train.extra_epochs", [](R& c) -> int& { return c.train.extra_epochs; }),
      {"train.plateau_stop", [](R& c, const std::string& k, const std::string& v) { c.train.plateau_stop = parse_bool(k, v); }},
      num<std::uint64_t>("train.init_seed", [](R& c) -> std::uint64_t& { return c.init_seed; }),
      num<std::uint64_t>("train.shuffle_seed", [](R& c) -> std::uint64_t& { return c.train.shuffle_seed; }),
      num<std::uint64_t>("train.dropout_seed", [](R& c) -> std::uint64_t& { return c.train.dropout_seed; }),

      num<double>("band.pass_lo", [](R& c) -> double& { return c.band.pass_lo; }),
      num<double>("band.pass_hi", [](R& c) -> double& { return c.band.pass_hi; }),
      num<double>("band.snr_lo", [](R& c) -> double& { return c.band.snr_lo; }),
      num<double>("band.snr_hi", [](R& c) -> double& { return c.band.snr_hi; }),
      num<double>("band.harmonic_halfwidth", [](R& c) -> double& { return c.band.harmonic_halfwidth; }),
  };
  return table;
}

const std::vector<std::string> kSeedKeys = {"synth.seed", "train.init_seed", "train.shuffle_seed",
                                            "train.dropout_seed"};

}  // namespace

const std::vector<std::string>& RunConfig::known_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& b : bindings()) k.push_back(b.key);
    return k;
  }();
  return keys;
}

RunConfig RunConfig::parse(const std::string& text) {
  KeyValues kv(text);
  kv.reject_unknown(known_keys());
  for (const auto& key : kSeedKeys)
    if (kv.find(key) == nullptr) throw ConfigError("config must set seed key '" + key + "' explicitly");

  RunConfig c;
  // The target picks the default band; explicit band.* keys override it.
  if (const auto* v = kv.find("target")) c.target = parse_kind("target", *v);
  c.band = BandSpec::for_kind(c.target);
  c.train.target = c.target;
  for (const auto& b : bindings()) {
    if (b.key == "target") continue;
    if (const auto* v = kv.find(b.key)) b.set(c, b.key, *v);
  }
  c.band.kind = c.target;
  c.arch.input_side = c.prep.side;
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  try {
    return parse(os.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void RunConfig::validate() const {
  prep.validate();
  arch.validate();
  train.validate();
  if (prep.side != arch.input_side) throw ConfigError("prep.side and the model input side differ");
  if (prep.target_fps && !(*prep.target_fps > 0.0)) throw ConfigError("prep.target_fps must be positive");
  const double fps = prep.target_fps.value_or(synth.recipe.fps);
  validate_band(band, fps);
}

}  // namespace canphys
