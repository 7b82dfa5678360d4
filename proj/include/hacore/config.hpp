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

#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hacore/core.hpp"
#include "hacore/errors.hpp"
#include "hacore/filterbank.hpp"
#include "hacore/prescription.hpp"
#include "hacore/slm.hpp"

namespace hacore {

// Run configuration shared by every CLI command.  JSON, versioned, strictly
// validated: unknown keys are rejected so typos fail loudly instead of
// silently falling back to defaults.  Every section is optional and falls
// back to the defaults below.

inline constexpr int kConfigFileVersion = 1;

struct OracleGridSpec {
  double level_lo_db = 20.0;
  double level_hi_db = 100.0;
  double level_step_db = 5.0;
};

struct RunConfig {
  FilterBankSpec filterbank;
  LevelEstimator estimator = LevelEstimator::kRms;
  double slm_floor_db = -120.0;
  std::vector<double> slm_dc_offset;       // sized num_bands
  std::vector<double> slm_calibration_db;  // sized num_bands
  EngineKind engine = EngineKind::kNeural;
  std::string model_path;
  CompressorRule rule;  // sized num_bands
  double attack_ms = 5.0;
  double release_ms = 50.0;
  std::vector<int> hidden_sizes{8};
  TrainerConfig trainer;
  OracleGridSpec oracle;
  std::string input_path;
  std::string output_path;
  std::string trace_path;
  std::string loss_csv_path;
};

inline RunConfig default_run_config() {
  RunConfig cfg;
  const int m = cfg.filterbank.num_bands;
  cfg.slm_dc_offset.assign(static_cast<std::size_t>(m), 0.0);
  cfg.slm_calibration_db.assign(static_cast<std::size_t>(m), 100.0);
  cfg.rule = default_compressor_rule(m);
  return cfg;
}

inline void validate(const RunConfig& cfg) {
  validate(cfg.filterbank);
  validate(cfg.trainer);
  validate(cfg.rule);
  const std::size_t m = static_cast<std::size_t>(cfg.filterbank.num_bands);
  if (cfg.slm_dc_offset.size() != m || cfg.slm_calibration_db.size() != m) {
    throw ConfigError("SLM per-band vectors must have one entry per band");
  }
  if (cfg.rule.insertion_gain_db.size() != m) {
    throw ConfigError("compressor rule must have one entry per band");
  }
  if (!(cfg.attack_ms > 0.0) || !(cfg.release_ms > 0.0)) {
    throw ConfigError("attack_ms and release_ms must be positive");
  }
  for (int h : cfg.hidden_sizes) {
    if (h < 1) throw ConfigError("hidden layer sizes must be positive");
  }
  if (!(cfg.oracle.level_step_db > 0.0) ||
      cfg.oracle.level_hi_db < cfg.oracle.level_lo_db) {
    throw ConfigError("oracle grid needs level_hi_db >= level_lo_db and a positive step");
  }
}

inline SlmConfig slm_config(const RunConfig& cfg) {
  SlmConfig slm;
  slm.estimator = cfg.estimator;
  slm.floor_db = cfg.slm_floor_db;
  slm.dc_offset = cfg.slm_dc_offset;
  slm.calibration_db = cfg.slm_calibration_db;
  return slm;
}

inline std::vector<int> layer_sizes(const RunConfig& cfg) {
  std::vector<int> sizes;
  sizes.push_back(cfg.filterbank.num_bands);
  sizes.insert(sizes.end(), cfg.hidden_sizes.begin(), cfg.hidden_sizes.end());
  sizes.push_back(cfg.filterbank.num_bands);
  return sizes;
}

namespace detail {

inline void reject_unknown_config_keys(const nlohmann::json& obj,
                                       const std::vector<std::string>& allowed,
                                       const std::string& where) {
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const auto& k : allowed) {
      if (item.key() == k) { ok = true; break; }
    }
    if (!ok) throw ConfigError("unknown key '" + item.key() + "' in " + where);
  }
}

// Per-band values accept a scalar (broadcast) or an array of num_bands.
inline std::vector<double> per_band(const nlohmann::json& v, int num_bands,
                                    const std::string& where) {
  if (v.is_number()) {
    return std::vector<double>(static_cast<std::size_t>(num_bands), v.get<double>());
  }
  if (v.is_array()) {
    auto vec = v.get<std::vector<double>>();
    if (static_cast<int>(vec.size()) != num_bands) {
      throw ConfigError(where + " has " + std::to_string(vec.size()) +
                        " entries for " + std::to_string(num_bands) + " bands");
    }
    return vec;
  }
  throw ConfigError(where + " must be a number or an array");
}

}  // namespace detail

inline RunConfig run_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config root must be an object");
  detail::reject_unknown_config_keys(
      j,
      {"version", "filterbank", "slm", "engine", "model", "compressor",
       "network", "trainer", "oracle_grid", "paths"},
      "config");
  if (!j.contains("version") || !j["version"].is_number_integer() ||
      j["version"].get<int>() != kConfigFileVersion) {
    throw ConfigError("config must carry \"version\": " +
                      std::to_string(kConfigFileVersion));
  }

  RunConfig cfg = default_run_config();
  try {
    if (j.contains("filterbank")) {
      const auto& fb = j["filterbank"];
      detail::reject_unknown_config_keys(
          fb, {"sample_rate_hz", "num_bands", "base_center_hz", "min_freq_hz"},
          "filterbank");
      if (fb.contains("sample_rate_hz")) cfg.filterbank.sample_rate_hz = fb["sample_rate_hz"].get<double>();
      if (fb.contains("num_bands")) cfg.filterbank.num_bands = fb["num_bands"].get<int>();
      if (fb.contains("base_center_hz")) cfg.filterbank.base_center_hz = fb["base_center_hz"].get<double>();
      if (fb.contains("min_freq_hz")) cfg.filterbank.min_freq_hz = fb["min_freq_hz"].get<double>();
    }
    const int m = cfg.filterbank.num_bands;
    if (m < 1) throw ConfigError("num_bands must be positive");
    // Per-band defaults track num_bands, then explicit values override.
    cfg.slm_dc_offset.assign(static_cast<std::size_t>(m), 0.0);
    cfg.slm_calibration_db.assign(static_cast<std::size_t>(m), 100.0);
    cfg.rule = default_compressor_rule(m);

    if (j.contains("slm")) {
      const auto& slm = j["slm"];
      detail::reject_unknown_config_keys(
          slm, {"estimator", "floor_db", "dc_offset", "calibration_db"}, "slm");
      if (slm.contains("estimator")) {
        const std::string est = slm["estimator"].get<std::string>();
        if (est == "rms") cfg.estimator = LevelEstimator::kRms;
        else if (est == "block_sum") cfg.estimator = LevelEstimator::kBlockSum;
        else throw ConfigError("estimator must be \"rms\" or \"block_sum\"");
      }
      if (slm.contains("floor_db")) cfg.slm_floor_db = slm["floor_db"].get<double>();
      if (slm.contains("dc_offset")) {
        cfg.slm_dc_offset = detail::per_band(slm["dc_offset"], m, "slm.dc_offset");
      }
      if (slm.contains("calibration_db")) {
        cfg.slm_calibration_db =
            detail::per_band(slm["calibration_db"], m, "slm.calibration_db");
      }
    }
    if (j.contains("engine")) {
      const std::string eng = j["engine"].get<std::string>();
      if (eng == "neural") cfg.engine = EngineKind::kNeural;
      else if (eng == "baseline") cfg.engine = EngineKind::kBaseline;
      else throw ConfigError("engine must be \"neural\" or \"baseline\"");
    }
    if (j.contains("model")) cfg.model_path = j["model"].get<std::string>();
    if (j.contains("compressor")) {
      const auto& comp = j["compressor"];
      detail::reject_unknown_config_keys(
          comp,
          {"insertion_gain_db", "knee_db_spl", "compression_ratio", "attack_ms",
           "release_ms"},
          "compressor");
      if (comp.contains("insertion_gain_db")) {
        cfg.rule.insertion_gain_db =
            detail::per_band(comp["insertion_gain_db"], m, "compressor.insertion_gain_db");
      }
      if (comp.contains("knee_db_spl")) {
        cfg.rule.knee_db_spl = detail::per_band(comp["knee_db_spl"], m, "compressor.knee_db_spl");
      }
      if (comp.contains("compression_ratio")) {
        cfg.rule.compression_ratio =
            detail::per_band(comp["compression_ratio"], m, "compressor.compression_ratio");
      }
      if (comp.contains("attack_ms")) cfg.attack_ms = comp["attack_ms"].get<double>();
      if (comp.contains("release_ms")) cfg.release_ms = comp["release_ms"].get<double>();
    }
    if (j.contains("network")) {
      const auto& net = j["network"];
      detail::reject_unknown_config_keys(net, {"hidden_sizes"}, "network");
      if (net.contains("hidden_sizes")) {
        cfg.hidden_sizes = net["hidden_sizes"].get<std::vector<int>>();
      }
    }
    if (j.contains("trainer")) {
      const auto& tr = j["trainer"];
      detail::reject_unknown_config_keys(
          tr,
          {"learning_rate", "momentum", "epochs", "batch_size", "seed",
           "anchor_weight"},
          "trainer");
      if (tr.contains("learning_rate")) cfg.trainer.learning_rate = tr["learning_rate"].get<double>();
      if (tr.contains("momentum")) cfg.trainer.momentum = tr["momentum"].get<double>();
      if (tr.contains("epochs")) cfg.trainer.epochs = tr["epochs"].get<int>();
      if (tr.contains("batch_size")) cfg.trainer.batch_size = tr["batch_size"].get<int>();
      if (tr.contains("seed")) cfg.trainer.seed = tr["seed"].get<std::uint64_t>();
      if (tr.contains("anchor_weight")) cfg.trainer.anchor_weight = tr["anchor_weight"].get<double>();
    }
    if (j.contains("oracle_grid")) {
      const auto& og = j["oracle_grid"];
      detail::reject_unknown_config_keys(
          og, {"level_lo_db", "level_hi_db", "level_step_db"}, "oracle_grid");
      if (og.contains("level_lo_db")) cfg.oracle.level_lo_db = og["level_lo_db"].get<double>();
      if (og.contains("level_hi_db")) cfg.oracle.level_hi_db = og["level_hi_db"].get<double>();
      if (og.contains("level_step_db")) cfg.oracle.level_step_db = og["level_step_db"].get<double>();
    }
    if (j.contains("paths")) {
      const auto& p = j["paths"];
      detail::reject_unknown_config_keys(p, {"input", "output", "trace", "loss_csv"},
                                         "paths");
      if (p.contains("input")) cfg.input_path = p["input"].get<std::string>();
      if (p.contains("output")) cfg.output_path = p["output"].get<std::string>();
      if (p.contains("trace")) cfg.trace_path = p["trace"].get<std::string>();
      if (p.contains("loss_csv")) cfg.loss_csv_path = p["loss_csv"].get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }

  validate(cfg);
  return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed config '" + path + "': " + e.what());
  }
  return run_config_from_json(j);
}

inline HaCoreConfig core_config(const RunConfig& cfg) {
  HaCoreConfig core;
  core.filterbank = cfg.filterbank;
  core.slm = slm_config(cfg);
  core.engine = cfg.engine;
  core.rule = cfg.rule;
  core.attack_ms = cfg.attack_ms;
  core.release_ms = cfg.release_ms;
  return core;  // neural model attached by the caller once loaded
}

}  // namespace hacore
