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

#include <CLI11.hpp>

#include <iostream>

#include "canphys/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"canphys: camera physiological measurement pipeline"};
  app.require_subcommand(1);
  std::string config_path;
  std::string checkpoint;
  std::string baseline;

  auto add_config = [&](CLI::App* sub) { sub->add_option("--config", config_path, "run configuration file")->required(); };
  auto* synth = app.add_subcommand("synth", "render a synthetic dataset");
  auto* prep = app.add_subcommand("prep", "preprocess clips into training tensors");
  auto* train = app.add_subcommand("train", "train and select a checkpoint");
  auto* eval = app.add_subcommand("eval", "windowed rate metrics on held-out clips");
  auto* attn = app.add_subcommand("attn", "export attention masks");
  for (auto* sub : {synth, prep, train, eval, attn}) add_config(sub);
  for (auto* sub : {eval, attn}) sub->add_option("--checkpoint", checkpoint, "CANW checkpoint (default run_dir/best.canw)");
  eval->add_option("--baseline", baseline, "also report a baseline method")->check(CLI::IsMember({"green"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    canphys::apply_thread_limit_from_env();
    const auto config = canphys::RunConfig::load(config_path);
    canphys::CommandOptions options;
    if (!checkpoint.empty()) options.checkpoint = checkpoint;
    options.baseline_green = baseline == "green";
    if (synth->parsed()) canphys::cmd_synth(config);
    if (prep->parsed()) canphys::cmd_prep(config);
    if (train->parsed()) canphys::cmd_train(config);
    if (eval->parsed()) canphys::cmd_eval(config, options);
    if (attn->parsed()) canphys::cmd_attn(config, options);
  } catch (const canphys::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const canphys::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
