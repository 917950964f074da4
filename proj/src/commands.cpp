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

#include "canphys/commands.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>

#include "canphys/io.hpp"

namespace canphys {

namespace fs = std::filesystem;

namespace {

std::string clip_name(int i) {
  std::ostringstream os;
  os << "clip_" << std::setw(3) << std::setfill('0') << i;
  return os.str();
}

std::string numbered(const std::string& prefix, int i, int width, const std::string& ext) {
  std::ostringstream os;
  os << prefix << std::setw(width) << std::setfill('0') << i << ext;
  return os.str();
}

const char* gold_suffix(SignalKind kind) { return kind == SignalKind::bvp ? ".bvp.csv" : ".resp.csv"; }

void require_path(const fs::path& p, const char* key) {
  if (p.empty()) throw ConfigError(std::string("config key '") + key + "' is required for this command");
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

std::string metrics_csv(const std::vector<WindowResult>& rows, const MetricsReport& r) {
  std::ostringstream os;
  os << "window_start,est_bpm,gold_bpm,snr_db\n";
  for (const auto& w : rows)
    os << fmt(w.window_start) << ',' << fmt(w.est_bpm) << ',' << fmt(w.gold_bpm) << ',' << fmt(w.snr_db) << '\n';
  os << "# summary mae_bpm=" << fmt(r.mae_bpm) << " rmse_bpm=" << fmt(r.rmse_bpm) << " pearson_r=" << fmt(r.pearson_r)
     << " mean_snr_db=" << fmt(r.mean_snr_db) << " windows=" << r.windows << '\n';
  return os.str();
}

void summary_row(std::ostringstream& os, const std::string& clip, const std::string& method, const MetricsReport& r) {
  os << clip << ',' << method << ',' << fmt(r.mae_bpm) << ',' << fmt(r.rmse_bpm) << ',' << fmt(r.pearson_r) << ','
     << fmt(r.mean_snr_db) << ',' << r.windows << '\n';
}

fs::path checkpoint_path(const RunConfig& config, const CommandOptions& options) {
  if (options.checkpoint) return *options.checkpoint;
  require_path(config.run_dir, "run_dir");
  return config.run_dir / "best.canw";
}

void check_matches(const CanParams<float>& params, const TrainingTensors& t, const std::string& clip) {
  if (params.arch.input_side != t.motion.side || params.arch.in_channels != t.motion.channels)
    throw DataError("clip " + clip + ": tensors are " + std::to_string(t.motion.side) + "x" +
                    std::to_string(t.motion.side) + "x" + std::to_string(t.motion.channels) +
                    " but the checkpoint expects L = " + std::to_string(params.arch.input_side) +
                    ", C = " + std::to_string(params.arch.in_channels));
}

}  // namespace

std::vector<std::string> list_clips(const fs::path& dir, const std::string& extension) {
  if (!fs::is_directory(dir)) throw DataError("directory " + dir.string() + " does not exist");
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (e.is_regular_file() && name.size() > extension.size() && name.ends_with(extension))
      out.push_back(name.substr(0, name.size() - extension.size()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

void cmd_synth(const RunConfig& config) {
  require_path(config.data_dir, "data_dir");
  config.synth.validate();
  const auto& s = config.synth;
  std::mt19937_64 rng(mix_seed(s.seed, 0));
  std::uniform_real_distribution<double> hr(s.hr_min, s.hr_max);
  std::uniform_real_distribution<double> br(s.br_min, s.br_max);

  std::ostringstream manifest;
  manifest << "name,hr_bpm,br_bpm,frames,fps\n";
  for (int i = 0; i < s.clips; ++i) {
    const double hr_bpm = hr(rng);
    const double br_bpm = br(rng);
    const auto clip = render_clip(s.recipe, hr_bpm, br_bpm, mix_seed(s.seed, 1000 + static_cast<std::uint64_t>(i)));
    const std::string name = clip_name(i);
    io::write_ftv(config.data_dir / (name + ".ftv"), clip.video);
    io::write_gold_csv(config.data_dir / (name + ".bvp.csv"), clip.bvp);
    io::write_gold_csv(config.data_dir / (name + ".resp.csv"), clip.resp);
    manifest << name << ',' << fmt(hr_bpm) << ',' << fmt(br_bpm) << ',' << clip.video.frames << ','
             << fmt(clip.video.fps) << '\n';
    std::cout << name << ": hr " << std::fixed << std::setprecision(2) << hr_bpm << " BPM, br " << br_bpm
              << " BPM\n" << std::defaultfloat;
  }
  io::write_atomic(config.data_dir / "manifest.csv", manifest.str());
}

void cmd_prep(const RunConfig& config) {
  require_path(config.data_dir, "data_dir");
  require_path(config.tensors_dir, "tensors_dir");
  const auto clips = list_clips(config.data_dir, ".ftv");
  if (clips.empty()) throw DataError("no .ftv clips in " + config.data_dir.string());
  for (const auto& c : clips) {
    const auto gold = config.data_dir / (c + gold_suffix(config.target));
    if (!fs::exists(gold)) throw DataError("clip " + c + ": missing gold signal " + gold.string());
  }
  for (const auto& c : clips) {
    const auto video = io::read_ftv(config.data_dir / (c + ".ftv"));
    const auto gold = io::read_gold_csv(config.data_dir / (c + gold_suffix(config.target)), config.target);
    TrainingTensors t;
    try {
      t = preprocess_video(video, gold, config.prep);
    } catch (const DataError& e) {
      throw DataError("clip " + c + ": " + e.what());
    }
    io::write_tensors(config.tensors_dir / (c + ".cpt"), t);
    std::cout << c << ": " << t.motion.samples << " samples\n";
  }
}

void cmd_train(const RunConfig& config) {
  require_path(config.tensors_dir, "tensors_dir");
  require_path(config.run_dir, "run_dir");
  const auto clips = config.train_clips.empty() ? list_clips(config.tensors_dir, ".cpt") : config.train_clips;
  if (clips.empty()) throw DataError("no training tensors in " + config.tensors_dir.string());
  std::vector<TrainingTensors> videos;
  for (const auto& c : clips) {
    videos.push_back(io::read_tensors(config.tensors_dir / (c + ".cpt")));
    if (videos.back().labels.kind != config.target)
      throw DataError("clip " + c + ": tensors hold " + to_string(videos.back().labels.kind) + " labels but target is " +
                      to_string(config.target));
    validate_band(config.band, videos.back().motion.fps);
  }

  TrainConfig tc = config.train;
  tc.target = config.target;
  const fs::path ckdir = config.run_dir / "checkpoints";
  std::ostringstream log;
  log << "epoch,mean_loss,frequency_error\n";
  TrainCallbacks cb;
  cb.on_epoch = [&](const EpochLog& row) {
    log << row.epoch << ',' << fmt(row.mean_loss) << ',' << (row.frequency_error ? fmt(*row.frequency_error) : "")
        << '\n';
    io::write_atomic(config.run_dir / "train_log.csv", log.str());
    std::cout << "epoch " << row.epoch << " loss " << fmt(row.mean_loss);
    if (row.frequency_error) std::cout << " freq_err " << fmt(*row.frequency_error) << " BPM";
    std::cout << '\n' << std::flush;
  };
  cb.on_checkpoint = [&](const Checkpoint& ck) {
    io::write_canw(ckdir / numbered("epoch_", ck.epoch, 3, ".canw"), ck.params);
  };

  auto result = train_epochs(videos, config.arch, tc, config.init_seed, cb);
  const std::size_t best = select_checkpoint(result.checkpoints);
  io::write_canw(config.run_dir / "best.canw", result.checkpoints[best].params);
  std::cout << "selected epoch " << result.checkpoints[best].epoch << " (freq_err "
            << fmt(result.checkpoints[best].frequency_error) << " BPM)\n";
}

void cmd_eval(const RunConfig& config, const CommandOptions& options) {
  require_path(config.tensors_dir, "tensors_dir");
  require_path(config.output_dir, "output_dir");
  if (config.eval_clips.empty()) throw ConfigError("config key 'eval_clips' is required for eval");
  if (options.baseline_green) require_path(config.data_dir, "data_dir");
  const auto params = io::read_canw(checkpoint_path(config, options));

  std::vector<TrainingTensors> tensors;
  for (const auto& c : config.eval_clips) {
    tensors.push_back(io::read_tensors(config.tensors_dir / (c + ".cpt")));
    check_matches(params, tensors.back(), c);
    validate_band(config.band, tensors.back().motion.fps);
  }

  std::ostringstream summary;
  summary << "clip,method,mae_bpm,rmse_bpm,pearson_r,mean_snr_db,windows\n";
  std::vector<WindowResult> all_can, all_green;
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const auto& c = config.eval_clips[i];
    const auto& t = tensors[i];
    const auto est = predict_series(params, t);
    const std::vector<double> gold(t.labels.values.begin(), t.labels.values.end());
    const auto rows = evaluate_series(est, gold, t.motion.fps, config.band);
    const auto report = summarize(rows);
    io::write_atomic(config.output_dir / (c + ".metrics.csv"), metrics_csv(rows, report));
    summary_row(summary, c, "can", report);
    all_can.insert(all_can.end(), rows.begin(), rows.end());
    std::cout << c << ": can mae " << fmt(report.mae_bpm) << " BPM, snr " << fmt(report.mean_snr_db) << " dB\n";

    if (options.baseline_green) {
      const auto video = io::read_ftv(config.data_dir / (c + ".ftv"));
      const auto raw = io::read_gold_csv(config.data_dir / (c + gold_suffix(config.target)), config.target);
      const auto framed = resample_gold(raw, video.fps, video.frames);
      const auto grows = green_channel_baseline(video, config.band, framed.samples);
      const auto greport = summarize(grows);
      io::write_atomic(config.output_dir / (c + ".green.metrics.csv"), metrics_csv(grows, greport));
      summary_row(summary, c, "green", greport);
      all_green.insert(all_green.end(), grows.begin(), grows.end());
      std::cout << c << ": green mae " << fmt(greport.mae_bpm) << " BPM, snr " << fmt(greport.mean_snr_db) << " dB\n";
    }
  }
  summary_row(summary, "all", "can", summarize(all_can));
  if (options.baseline_green) summary_row(summary, "all", "green", summarize(all_green));
  io::write_atomic(config.output_dir / "summary.csv", summary.str());
}

void cmd_attn(const RunConfig& config, const CommandOptions& options) {
  require_path(config.tensors_dir, "tensors_dir");
  require_path(config.output_dir, "output_dir");
  std::string clip = config.attn_clip;
  if (clip.empty()) {
    if (config.eval_clips.empty()) throw ConfigError("config needs 'attn_clip' or 'eval_clips' for attn");
    clip = config.eval_clips.front();
  }
  const auto params = io::read_canw(checkpoint_path(config, options));
  const auto t = io::read_tensors(config.tensors_dir / (clip + ".cpt"));
  check_matches(params, t, clip);

  const int n = t.motion.samples;
  const int s1 = params.arch.side1();
  const int s2 = params.arch.side2();
  const std::size_t n1 = static_cast<std::size_t>(s1) * s1;
  const std::size_t n2 = static_cast<std::size_t>(s2) * s2;
  std::vector<float> q1(n1 * n), q2(n2 * n);
  const std::size_t per = t.motion.sample_size();
#pragma omp parallel
  {
    ForwardTrace<float> trace;
#pragma omp for schedule(static)
    for (int k = 0; k < n; ++k) {
      can_forward(params, std::span<const float>(t.motion.data.data() + per * k, per),
                  std::span<const float>(t.appearance.data.data() + per * k, per), ForwardMode::infer(), trace);
      const auto maps = attention_maps(trace);
      std::copy(maps.q1.begin(), maps.q1.end(), q1.begin() + static_cast<std::ptrdiff_t>(n1 * k));
      std::copy(maps.q2.begin(), maps.q2.end(), q2.begin() + static_cast<std::ptrdiff_t>(n2 * k));
    }
  }

  const fs::path dir = config.output_dir / "attn" / clip;
  auto export_stage = [&](const std::vector<float>& q, int side, int stage) {
    const auto [lo_it, hi_it] = std::minmax_element(q.begin(), q.end());
    const float lo = *lo_it;
    const float range = *hi_it - lo;
    const std::size_t np = static_cast<std::size_t>(side) * side;
    std::vector<std::uint8_t> img(np);
    for (int k = 0; k < n; ++k) {
      for (std::size_t i = 0; i < np; ++i) {
        const float v = range > 0.0f ? (q[np * k + i] - lo) / range : 0.0f;
        img[i] = static_cast<std::uint8_t>(std::lround(255.0f * v));
      }
      io::write_pgm(dir / numbered("q" + std::to_string(stage) + "_", k, 5, ".pgm"), side, side, img);
    }
  };
  export_stage(q1, s1, 1);
  export_stage(q2, s2, 2);

  std::ostringstream csv;
  csv << "frame,stage,y,x,value\n";
  csv << std::setprecision(9);
  for (int k = 0; k < n; ++k) {
    for (int y = 0; y < s1; ++y)
      for (int x = 0; x < s1; ++x) csv << k << ",1," << y << ',' << x << ',' << q1[n1 * k + y * s1 + x] << '\n';
    for (int y = 0; y < s2; ++y)
      for (int x = 0; x < s2; ++x) csv << k << ",2," << y << ',' << x << ',' << q2[n2 * k + y * s2 + x] << '\n';
  }
  io::write_atomic(dir / "attention.csv", csv.str());
}

}  // namespace canphys
