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
#include <cstddef>
#include <string>
#include <vector>

#include "hacore/errors.hpp"

namespace hacore {

// Per-band sound level meter.  For band m with block x:
//
//   level_m = 20*log10(estimate(x) + dc_offset_m) + calibration_db_m
//
// where the estimate is the block RMS by default, or the raw block sum
// (block_sum), which is a DC estimate kept for comparison experiments.
// A non-positive log argument, or any result below floor_db, clamps to
// floor_db, so levels are always finite.

enum class LevelEstimator { kRms, kBlockSum };

struct SlmConfig {
  LevelEstimator estimator = LevelEstimator::kRms;
  std::vector<double> dc_offset;        // l_t, linear, added before the log
  std::vector<double> calibration_db;   // l_d, maps dB full scale to dB SPL
  double floor_db = -120.0;
  int num_bands() const { return static_cast<int>(dc_offset.size()); }
};

inline SlmConfig make_slm_config(int num_bands, double calibration_db = 100.0) {
  SlmConfig cfg;
  cfg.dc_offset.assign(static_cast<std::size_t>(num_bands), 0.0);
  cfg.calibration_db.assign(static_cast<std::size_t>(num_bands), calibration_db);
  return cfg;
}

inline void validate(const SlmConfig& cfg) {
  if (cfg.dc_offset.empty() || cfg.dc_offset.size() != cfg.calibration_db.size()) {
    throw ConfigError("SLM per-band vectors must be non-empty and equal length");
  }
  if (!std::isfinite(cfg.floor_db)) {
    throw ConfigError("SLM floor_db must be finite");
  }
}

struct BandLevels {
  std::vector<double> levels_db_spl;  // one per band, each >= floor_db
};

// Shared dB conversion: non-positive arguments and anything below the floor
// clamp to floor_db, so the result is always finite.
inline double level_db_spl(double estimate, double dc_offset,
                           double calibration_db, double floor_db) {
  const double arg = estimate + dc_offset;
  if (!(arg > 0.0)) return floor_db;
  const double level = 20.0 * std::log10(arg) + calibration_db;
  return (level > floor_db) ? level : floor_db;
}

// Measure one block per band.  Every block must hold exactly block_len
// samples (the filter length N in the processing chain).
inline BandLevels measure(const std::vector<std::vector<double>>& band_blocks,
                          const SlmConfig& cfg, std::size_t block_len) {
  validate(cfg);
  if (block_len == 0) {
    throw DataError("SLM block length must be positive");
  }
  if (band_blocks.size() != cfg.dc_offset.size()) {
    throw DataError("SLM got " + std::to_string(band_blocks.size()) +
                    " band blocks for " + std::to_string(cfg.dc_offset.size()) +
                    " configured bands");
  }
  BandLevels out;
  out.levels_db_spl.reserve(band_blocks.size());
  for (std::size_t m = 0; m < band_blocks.size(); ++m) {
    const auto& x = band_blocks[m];
    if (x.size() != block_len) {
      throw DataError("SLM band " + std::to_string(m) + " block has " +
                      std::to_string(x.size()) + " samples, expected " +
                      std::to_string(block_len));
    }
    double est = 0.0;
    if (cfg.estimator == LevelEstimator::kRms) {
      double ss = 0.0;
      for (double v : x) ss += v * v;
      est = std::sqrt(ss / static_cast<double>(block_len));
    } else {
      for (double v : x) est += v;
    }
    out.levels_db_spl.push_back(
        level_db_spl(est, cfg.dc_offset[m], cfg.calibration_db[m], cfg.floor_db));
  }
  return out;
}

}  // namespace hacore
