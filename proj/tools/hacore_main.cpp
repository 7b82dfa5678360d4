// Copyright 2026 The hacore authors
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

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hacore/cli.hpp"
#include "hacore/config.hpp"
#include "hacore/errors.hpp"

namespace {

// Exit codes: 0 ok, 1 usage or configuration, 2 bad data, 3 numeric failure.
constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"log-banded hearing aid core with a trainable prescription"};
  app.require_subcommand(1);

  std::string config_path;
  std::string input_path;
  std::string output_path;
  std::string trace_path;
  std::string model_path;
  std::string engine_name;
  std::uint64_t seed = 0;

  CLI::App* design = app.add_subcommand(
      "design-filters", "write filter taps and frequency responses as CSV");
  design->add_option("--config", config_path, "JSON run configuration");
  design->add_option("--output", output_path, "output directory")->required();

  CLI::App* process = app.add_subcommand(
      "process", "process a mono WAV file through the hearing aid core");
  process->add_option("--config", config_path, "JSON run configuration");
  process->add_option("--input", input_path, "input WAV file")->required();
  process->add_option("--output", output_path, "output WAV file")->required();
  process->add_option("--trace", trace_path, "per-block level/gain CSV");
  process->add_option("--model", model_path, "gain model JSON file");
  process->add_option("--engine", engine_name, "neural or baseline");

  CLI::App* train = app.add_subcommand(
      "train", "fit the gain network to a prescription rule or a CSV dataset");
  train->add_option("--config", config_path, "JSON run configuration");
  train->add_option("--input", input_path,
                    "training CSV (defaults to the prescription grid)");
  train->add_option("--output", output_path, "output model JSON file")->required();
  train->add_option("--seed", seed, "override the trainer seed");

  CLI::App* personalize = app.add_subcommand(
      "personalize", "nudge a trained model toward user preference samples");
  personalize->add_option("--config", config_path, "JSON run configuration");
  personalize->add_option("--model", model_path, "model JSON file to adjust")
      ->required();
  personalize->add_option("--input", input_path, "preference CSV")->required();
  personalize->add_option("--output", output_path, "output model JSON file")
      ->required();
  personalize->add_option("--seed", seed, "override the trainer seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    hacore::RunConfig cfg = config_path.empty()
                                ? hacore::default_run_config()
                                : hacore::load_run_config(config_path);
    if (!input_path.empty()) cfg.input_path = input_path;
    if (!output_path.empty()) cfg.output_path = output_path;
    if (!trace_path.empty()) cfg.trace_path = trace_path;
    if (!model_path.empty()) cfg.model_path = model_path;
    if (!engine_name.empty()) {
      if (engine_name == "neural") {
        cfg.engine = hacore::EngineKind::kNeural;
      } else if (engine_name == "baseline") {
        cfg.engine = hacore::EngineKind::kBaseline;
      } else {
        throw hacore::ConfigError("--engine must be neural or baseline");
      }
    }
    if (train->count("--seed") > 0 || personalize->count("--seed") > 0) {
      cfg.trainer.seed = seed;
    }

    if (design->parsed()) {
      hacore::cmd_design_filters(cfg, cfg.output_path, std::cout);
    } else if (process->parsed()) {
      hacore::cmd_process(cfg, std::cout);
    } else if (train->parsed()) {
      hacore::cmd_train(cfg, std::cout);
    } else if (personalize->parsed()) {
      hacore::cmd_personalize(cfg, std::cout);
    }
    return kExitOk;
  } catch (const hacore::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const hacore::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const hacore::NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}
