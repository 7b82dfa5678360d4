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

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "hacore/config.hpp"
#include "hacore/core.hpp"
#include "hacore/errors.hpp"
#include "hacore/filterbank.hpp"
#include "hacore/prescription.hpp"

namespace hacore {

namespace detail {

inline std::string fmt_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw DataError("short write to '" + path + "'");
}

inline double parse_double_field(const std::string& field, const std::string& path,
                                 std::size_t line_no) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(field, &pos);
  } catch (const std::exception&) {
    throw DataError(path + ":" + std::to_string(line_no) + ": bad number '" +
                    field + "'");
  }
  // Trailing junk after the number is a malformed field, not a number.
  while (pos < field.size() &&
         (field[pos] == ' ' || field[pos] == '\t' || field[pos] == '\r')) {
    ++pos;
  }
  if (pos != field.size()) {
    throw DataError(path + ":" + std::to_string(line_no) + ": bad number '" +
                    field + "'");
  }
  return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace detail

// Training / preference CSV: header "level_0,..,level_{M-1},gain_0,..,gain_{M-1}"
// then one row of 2M numbers per sample.
inline TrainingSet read_training_csv(const std::string& path, int num_bands) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read '" + path + "'");
  const std::size_t m = static_cast<std::size_t>(num_bands);

  std::string expected_header;
  for (std::size_t i = 0; i < m; ++i) {
    if (i) expected_header += ',';
    expected_header += "level_" + std::to_string(i);
  }
  for (std::size_t i = 0; i < m; ++i) {
    expected_header += ",gain_" + std::to_string(i);
  }

  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected_header) {
    throw DataError(path + ":1: expected header '" + expected_header + "'");
  }

  TrainingSet data;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != 2 * m) {
      throw DataError(path + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(2 * m) + " fields, got " +
                      std::to_string(fields.size()));
    }
    std::vector<double> levels(m), gains(m);
    for (std::size_t i = 0; i < m; ++i) {
      levels[i] = detail::parse_double_field(fields[i], path, line_no);
      gains[i] = detail::parse_double_field(fields[m + i], path, line_no);
    }
    data.inputs.push_back(std::move(levels));
    data.targets.push_back(std::move(gains));
  }
  if (data.inputs.empty()) throw DataError(path + ": no data rows");
  return data;
}

inline void cmd_design_filters(const RunConfig& cfg, const std::string& out_dir,
                               std::ostream& out) {
  if (out_dir.empty()) throw ConfigError("design-filters needs --output DIR");
  const FilterBank bank = design_filter_bank(cfg.filterbank);
  std::filesystem::create_directories(out_dir);

  std::string taps_csv = "band,tap_index,value\n";
  for (const auto& f : bank.filters) {
    for (std::size_t i = 0; i < f.taps.size(); ++i) {
      taps_csv += std::to_string(f.band);
      taps_csv += ',';
      taps_csv += std::to_string(i);
      taps_csv += ',';
      taps_csv += detail::fmt_g17(f.taps[i]);
      taps_csv += '\n';
    }
  }
  detail::write_text_file((std::filesystem::path(out_dir) / "taps.csv").string(),
                          taps_csv);

  const double ft = dft_resolution_hz(cfg.filterbank);
  std::string resp_csv = "band,bin,freq_hz,magnitude\n";
  for (const auto& f : bank.filters) {
    const auto mag = magnitude_response(f);
    for (std::size_t k = 0; k < mag.size(); ++k) {
      resp_csv += std::to_string(f.band);
      resp_csv += ',';
      resp_csv += std::to_string(k);
      resp_csv += ',';
      resp_csv += detail::fmt_g17(static_cast<double>(k) * ft);
      resp_csv += ',';
      resp_csv += detail::fmt_g17(mag[k]);
      resp_csv += '\n';
    }
  }
  detail::write_text_file(
      (std::filesystem::path(out_dir) / "response.csv").string(), resp_csv);

  out << "designed " << bank.num_bands() << " filters, " << bank.length
      << " taps each, resolution " << ft << " Hz\n";
  for (const auto& b : bank.bands) {
    const auto bins = detail::passband_bins(cfg.filterbank, b.band);
    out << "band " << b.band << ": center " << b.center_hz << " Hz, passband "
        << b.lo_hz << ".." << b.hi_hz << " Hz, bins " << bins.first << ".."
        << bins.second << "\n";
  }
  out << "wrote " << out_dir << "/taps.csv and " << out_dir << "/response.csv\n";
}

inline void cmd_process(const RunConfig& cfg, std::ostream& out) {
  if (cfg.input_path.empty()) throw ConfigError("process needs --input WAV");
  if (cfg.output_path.empty()) throw ConfigError("process needs --output WAV");

  HaCoreConfig core = core_config(cfg);
  if (cfg.engine == EngineKind::kNeural) {
    if (cfg.model_path.empty()) {
      throw ConfigError("neural engine needs --model FILE");
    }
    core.model = load_model(cfg.model_path);
  }

  const ProcessSummary s =
      process_file(core, cfg.input_path, cfg.output_path, cfg.trace_path);
  out << "processed " << s.blocks << " blocks (" << s.duration_s
      << " s of audio) in " << s.elapsed_s << " s, " << s.real_time_factor
      << "x real time\n";
  out << "peak output level " << s.peak_level << "\n";
  out << "wrote " << cfg.output_path;
  if (!cfg.trace_path.empty()) out << " and " << cfg.trace_path;
  out << "\n";
}

inline void cmd_train(const RunConfig& cfg, std::ostream& out) {
  if (cfg.output_path.empty()) throw ConfigError("train needs --output MODEL");
  const int m = cfg.filterbank.num_bands;

  TrainingSet data;
  TrainingSet held_out;  // grid midpoints, only when training on the oracle grid
  if (!cfg.input_path.empty()) {
    data = read_training_csv(cfg.input_path, m);
    out << "loaded " << data.size() << " samples from " << cfg.input_path << "\n";
  } else {
    data = oracle_grid(cfg.rule, cfg.oracle.level_lo_db, cfg.oracle.level_hi_db,
                       cfg.oracle.level_step_db);
    held_out = oracle_grid(cfg.rule,
                           cfg.oracle.level_lo_db + 0.5 * cfg.oracle.level_step_db,
                           cfg.oracle.level_hi_db, cfg.oracle.level_step_db);
    out << "training on " << data.size() << " prescription grid samples ("
        << cfg.oracle.level_lo_db << ".." << cfg.oracle.level_hi_db << " dB step "
        << cfg.oracle.level_step_db << ")\n";
  }

  const Mlp start = init_mlp(layer_sizes(cfg), cfg.trainer.seed);
  const TrainResult result = train(start, data, cfg.trainer);
  save_model(result.model, cfg.output_path);

  const std::string loss_path = cfg.loss_csv_path.empty()
                                    ? cfg.output_path + ".loss.csv"
                                    : cfg.loss_csv_path;
  std::string loss_csv = "epoch,loss\n";
  for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) {
    loss_csv += std::to_string(e);
    loss_csv += ',';
    loss_csv += detail::fmt_g17(result.epoch_loss[e]);
    loss_csv += '\n';
  }
  detail::write_text_file(loss_path, loss_csv);

  const auto max_error_db = [&](const TrainingSet& set) {
    double max_err = 0.0;
    for (std::size_t i = 0; i < set.size(); ++i) {
      const auto g = result.model.forward(set.inputs[i]);
      for (std::size_t b = 0; b < g.size(); ++b) {
        max_err = std::max(max_err, std::abs(g[b] - set.targets[i][b]));
      }
    }
    return max_err;
  };
  if (!result.epoch_loss.empty()) {
    out << "final epoch loss " << result.epoch_loss.back() << "\n";
  }
  out << "max gain error over training set: " << max_error_db(data) << " dB\n";
  if (!held_out.inputs.empty()) {
    out << "max gain error at held-out midpoints: " << max_error_db(held_out)
        << " dB\n";
  }
  out << "wrote " << cfg.output_path << " and " << loss_path << "\n";
}

inline void cmd_personalize(const RunConfig& cfg, std::ostream& out) {
  if (cfg.model_path.empty()) throw ConfigError("personalize needs --model FILE");
  if (cfg.input_path.empty()) {
    throw ConfigError("personalize needs --input preference CSV");
  }
  if (cfg.output_path.empty()) {
    throw ConfigError("personalize needs --output MODEL");
  }
  const int m = cfg.filterbank.num_bands;

  const Mlp start = load_model(cfg.model_path);
  if (start.input_size() != m) {
    throw ConfigError("model expects " + std::to_string(start.input_size()) +
                      " bands, config has " + std::to_string(m));
  }
  const TrainingSet prefs = read_training_csv(cfg.input_path, m);
  const TrainResult result = personalize(start, prefs, cfg.trainer);
  save_model(result.model, cfg.output_path);

  out << "personalized on " << prefs.size() << " preference samples, anchor weight "
      << cfg.trainer.anchor_weight << "\n";
  out << "max parameter change: " << max_abs_param_diff(start, result.model)
      << "\n";
  for (std::size_t i = 0; i < prefs.size(); ++i) {
    const auto before = start.forward(prefs.inputs[i]);
    const auto after = result.model.forward(prefs.inputs[i]);
    out << "sample " << i << " gain shift (dB):";
    for (std::size_t b = 0; b < before.size(); ++b) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), " %+.3f", after[b] - before[b]);
      out << buf;
    }
    out << "\n";
  }
  out << "wrote " << cfg.output_path << "\n";
}

}  // namespace hacore
