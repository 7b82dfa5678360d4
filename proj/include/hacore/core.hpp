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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hacore/errors.hpp"
#include "hacore/filterbank.hpp"
#include "hacore/prescription.hpp"
#include "hacore/slm.hpp"
#include "hacore/wav.hpp"

namespace hacore {

// Block processing chain: split the input into N/2-sample hops, convolve
// each band filter as a stream, measure per-band levels over the latest
// N-sample window, turn levels into per-band gains, sum the gained bands,
// and cross-fade consecutive blocks with a synthesis window.
//
// Two gain engines share this framing.  The neural engine applies one gain
// per band per block from the network, so within a block the chain is
// linear.  The baseline engine applies the compressor rule per sample,
// driven by an attack/release envelope tracker.

// Periodic raised-cosine synthesis window.  The second half is built as the
// complement of the first, so w[n] + w[n + N/2] == 1 holds exactly and the
// block cross-fade is transparent for constant gains.
inline std::vector<double> make_window(int length) {
  if (length < 2 || length % 2 != 0) {
    throw ConfigError("window length must be even and at least 2");
  }
  std::vector<double> w(static_cast<std::size_t>(length));
  const int half = length / 2;
  for (int n = 0; n <= half; ++n) {
    w[static_cast<std::size_t>(n)] =
        0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * n / length));
  }
  for (int n = half + 1; n < length; ++n) {
    w[static_cast<std::size_t>(n)] = 1.0 - w[static_cast<std::size_t>(n - half)];
  }
  return w;
}

// One-pole attack/release envelope follower over |x|.
class EnvelopeTracker {
 public:
  EnvelopeTracker(double sample_rate_hz, double attack_ms, double release_ms) {
    if (!(sample_rate_hz > 0.0) || !(attack_ms > 0.0) || !(release_ms > 0.0)) {
      throw ConfigError("tracker rate and time constants must be positive");
    }
    attack_alpha_ = std::exp(-1.0 / (sample_rate_hz * attack_ms * 1e-3));
    release_alpha_ = std::exp(-1.0 / (sample_rate_hz * release_ms * 1e-3));
  }

  double step(double x) {
    const double mag = std::abs(x);
    const double alpha = (mag > level_) ? attack_alpha_ : release_alpha_;
    level_ = alpha * level_ + (1.0 - alpha) * mag;
    return level_;
  }

  double level() const { return level_; }
  void reset() { level_ = 0.0; }

 private:
  double attack_alpha_ = 0.0;
  double release_alpha_ = 0.0;
  double level_ = 0.0;
};

enum class EngineKind { kNeural, kBaseline };

struct HaCoreConfig {
  FilterBankSpec filterbank;
  SlmConfig slm;
  EngineKind engine = EngineKind::kNeural;
  std::optional<Mlp> model;            // required for the neural engine
  std::optional<CompressorRule> rule;  // required for the baseline engine
  double attack_ms = 5.0;
  double release_ms = 50.0;
  // When set, the SLM is bypassed and these levels drive the prescription
  // every block (gains frozen).  Measurement hook for linearity checks.
  std::optional<std::vector<double>> frozen_levels_db;
};

struct TraceRecord {
  std::int64_t block = 0;
  std::vector<double> levels_db_spl;
  std::vector<double> gains_db;
};

struct GainTrace {
  std::vector<TraceRecord> records;
};

class BlockProcessor {
 public:
  explicit BlockProcessor(const HaCoreConfig& cfg)
      : cfg_(cfg), bank_(design_filter_bank(cfg.filterbank)) {
    const int m = bank_.num_bands();
    n_ = bank_.length;
    hop_ = n_ / 2;
    validate(cfg.slm);
    if (cfg.slm.num_bands() != m) {
      throw ConfigError("SLM is configured for " +
                        std::to_string(cfg.slm.num_bands()) + " bands, bank has " +
                        std::to_string(m));
    }
    if (cfg_.engine == EngineKind::kNeural) {
      if (!cfg_.model.has_value()) {
        throw ConfigError("neural engine selected but no model loaded");
      }
      validate(*cfg_.model);
      if (cfg_.model->input_size() != m) {
        throw ConfigError("model expects " + std::to_string(cfg_.model->input_size()) +
                          " bands, bank has " + std::to_string(m));
      }
    } else {
      if (!cfg_.rule.has_value()) {
        throw ConfigError("baseline engine selected but no compressor rule given");
      }
      validate(*cfg_.rule);
      if (cfg_.rule->num_bands() != m) {
        throw ConfigError("compressor rule covers " +
                          std::to_string(cfg_.rule->num_bands()) + " bands, bank has " +
                          std::to_string(m));
      }
      trackers_.assign(static_cast<std::size_t>(m),
                       EnvelopeTracker(cfg_.filterbank.sample_rate_hz,
                                       cfg_.attack_ms, cfg_.release_ms));
      prev_snapshot_levels_.assign(static_cast<std::size_t>(m), cfg_.slm.floor_db);
      prev_snapshot_gains_.assign(static_cast<std::size_t>(m), 0.0);
    }
    if (cfg_.frozen_levels_db.has_value() &&
        static_cast<int>(cfg_.frozen_levels_db->size()) != m) {
      throw ConfigError("frozen level vector must have one entry per band");
    }
    window_ = make_window(n_);
    for (const auto& f : bank_.filters) streams_.emplace_back(f);
    const std::size_t mm = static_cast<std::size_t>(m);
    const std::size_t hh = static_cast<std::size_t>(hop_);
    prev_half_.assign(mm, std::vector<double>(hh, 0.0));
    new_half_.assign(mm, std::vector<double>(hh, 0.0));
    blocks_.assign(mm, std::vector<double>(static_cast<std::size_t>(n_), 0.0));
    y_prev_.assign(static_cast<std::size_t>(n_), 0.0);
    y_.assign(static_cast<std::size_t>(n_), 0.0);
  }

  int hop() const { return hop_; }
  int block_length() const { return n_; }
  int num_bands() const { return bank_.num_bands(); }
  const FilterBank& bank() const { return bank_; }
  std::int64_t calls() const { return call_; }

  // Consume N/2 samples, emit the N/2 samples whose cross-fade is complete.
  // The first call's emission is all zeros by construction; stream drivers
  // drop it and feed one trailing half-block of zeros, which aligns the
  // output to the filter group delay of N/2 samples.
  std::optional<TraceRecord> process_block(std::span<const double> in,
                                           std::span<double> out) {
    const std::size_t hh = static_cast<std::size_t>(hop_);
    if (in.size() != hh || out.size() != hh) {
      throw DataError("process_block needs exactly N/2 = " + std::to_string(hop_) +
                      " samples in and out, got " + std::to_string(in.size()));
    }
    const std::size_t mm = static_cast<std::size_t>(bank_.num_bands());

    std::optional<TraceRecord> record;
    if (cfg_.engine == EngineKind::kNeural) {
      for (std::size_t b = 0; b < mm; ++b) {
        streams_[b].process(in, std::span<double>(new_half_[b]));
        std::copy(prev_half_[b].begin(), prev_half_[b].end(), blocks_[b].begin());
        std::copy(new_half_[b].begin(), new_half_[b].end(),
                  blocks_[b].begin() + static_cast<std::ptrdiff_t>(hh));
      }
      std::vector<double> levels =
          cfg_.frozen_levels_db.has_value()
              ? *cfg_.frozen_levels_db
              : measure(blocks_, cfg_.slm, static_cast<std::size_t>(n_)).levels_db_spl;
      const std::vector<double> gains = cfg_.model->forward(levels);
      std::fill(y_.begin(), y_.end(), 0.0);
      for (std::size_t b = 0; b < mm; ++b) {
        const double lin = std::pow(10.0, gains[b] / 20.0);
        for (std::size_t i = 0; i < static_cast<std::size_t>(n_); ++i) {
          y_[i] += lin * blocks_[b][i];
        }
      }
      if (call_ > 0) {
        record = TraceRecord{call_ - 1, std::move(levels), gains};
      }
      for (std::size_t b = 0; b < mm; ++b) prev_half_[b] = new_half_[b];
    } else {
      // Per-sample gains: each convolved sample is gained exactly once, when
      // it first appears, so the cross-fade of identical halves is identity.
      std::vector<double> snap_levels(mm), snap_gains(mm);
      for (std::size_t b = 0; b < mm; ++b) {
        streams_[b].process(in, std::span<double>(new_half_[b]));
        auto& tracker = trackers_[b];
        double lvl_db = cfg_.slm.floor_db;
        double gain_db = 0.0;
        for (std::size_t i = 0; i < hh; ++i) {
          const double env = tracker.step(new_half_[b][i]);
          lvl_db = level_db_spl(env, cfg_.slm.dc_offset[b],
                                cfg_.slm.calibration_db[b], cfg_.slm.floor_db);
          gain_db = reference_gain(cfg_.rule->insertion_gain_db[b],
                                   cfg_.rule->knee_db_spl[b],
                                   cfg_.rule->compression_ratio[b], lvl_db);
          new_half_[b][i] *= std::pow(10.0, gain_db / 20.0);
        }
        snap_levels[b] = lvl_db;
        snap_gains[b] = gain_db;
      }
      std::fill(y_.begin(), y_.end(), 0.0);
      for (std::size_t b = 0; b < mm; ++b) {
        for (std::size_t i = 0; i < hh; ++i) {
          y_[i] += prev_half_[b][i];
          y_[hh + i] += new_half_[b][i];
        }
      }
      if (call_ > 0) {
        // Snapshot taken at the last sample of the half-block being emitted.
        record = TraceRecord{call_ - 1, prev_snapshot_levels_, prev_snapshot_gains_};
      }
      prev_snapshot_levels_ = std::move(snap_levels);
      prev_snapshot_gains_ = std::move(snap_gains);
      for (std::size_t b = 0; b < mm; ++b) prev_half_[b] = new_half_[b];
    }

    for (std::size_t i = 0; i < hh; ++i) {
      out[i] = y_prev_[hh + i] * window_[hh + i] + y_[i] * window_[i];
    }
    y_prev_.swap(y_);
    ++call_;
    return record;
  }

 private:
  HaCoreConfig cfg_;
  FilterBank bank_;
  int n_ = 0;
  int hop_ = 0;
  std::vector<double> window_;
  std::vector<FirStream> streams_;
  std::vector<EnvelopeTracker> trackers_;
  std::vector<std::vector<double>> prev_half_;  // per band, previous conv half
  std::vector<std::vector<double>> new_half_;
  std::vector<std::vector<double>> blocks_;
  std::vector<double> y_prev_;
  std::vector<double> y_;
  std::vector<double> prev_snapshot_levels_;
  std::vector<double> prev_snapshot_gains_;
  std::int64_t call_ = 0;
};

// Drive a processor over a whole signal.  Output has the input's length and
// equals the gained band sum aligned at the filter group delay: a unit
// impulse with neutral gains peaks at exactly N/2 samples.
inline std::vector<double> run_stream(BlockProcessor& proc,
                                      const std::vector<double>& in,
                                      GainTrace* trace = nullptr) {
  const std::size_t hop = static_cast<std::size_t>(proc.hop());
  const std::size_t content_calls = (in.size() + hop - 1) / hop;
  std::vector<double> inbuf(hop), outbuf(hop), out;
  out.reserve((content_calls + 1) * hop);
  for (std::size_t call = 0; call <= content_calls; ++call) {
    for (std::size_t i = 0; i < hop; ++i) {
      const std::size_t at = call * hop + i;
      inbuf[i] = (at < in.size()) ? in[at] : 0.0;  // tail pad and final flush
    }
    auto rec = proc.process_block(inbuf, outbuf);
    if (rec.has_value() && trace != nullptr) {
      trace->records.push_back(std::move(*rec));
    }
    if (call > 0) out.insert(out.end(), outbuf.begin(), outbuf.end());
  }
  out.resize(in.size());
  return out;
}

inline void write_trace_csv(const GainTrace& trace, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw DataError("cannot write trace file '" + path + "'");
  f << "block,band,level_db_spl,gain_db\n";
  char line[160];
  for (const auto& r : trace.records) {
    for (std::size_t b = 0; b < r.levels_db_spl.size(); ++b) {
      std::snprintf(line, sizeof line, "%lld,%zu,%.10g,%.10g\n",
                    static_cast<long long>(r.block), b, r.levels_db_spl[b],
                    r.gains_db[b]);
      f << line;
    }
  }
  if (!f) throw DataError("failed writing trace file '" + path + "'");
}

struct ProcessSummary {
  std::int64_t blocks = 0;
  double peak_level = 0.0;
  double duration_s = 0.0;
  double elapsed_s = 0.0;
  double real_time_factor = 0.0;
};

// File-to-file processing.  No resampling: the input must already be at the
// configured rate.
inline ProcessSummary process_file(const HaCoreConfig& cfg,
                                   const std::string& input_path,
                                   const std::string& output_path,
                                   const std::string& trace_path = "") {
  const double rate = cfg.filterbank.sample_rate_hz;
  if (!(rate > 0.0) || rate != std::floor(rate)) {
    throw ConfigError("file processing needs an integral sample rate");
  }
  const WavData wav = read_wav_mono(input_path);
  if (wav.sample_rate_hz != static_cast<std::uint32_t>(rate)) {
    throw DataError("sample rate mismatch: '" + input_path + "' is " +
                    std::to_string(wav.sample_rate_hz) + " Hz, config wants " +
                    std::to_string(static_cast<std::uint32_t>(rate)) +
                    " Hz; resample the file first");
  }

  BlockProcessor proc(cfg);
  GainTrace trace;
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<double> out = run_stream(proc, wav.samples, &trace);
  const auto t1 = std::chrono::steady_clock::now();

  write_wav_mono_f32(output_path, out, wav.sample_rate_hz);
  if (!trace_path.empty()) write_trace_csv(trace, trace_path);

  ProcessSummary s;
  s.blocks = static_cast<std::int64_t>(trace.records.size());
  for (double v : out) s.peak_level = std::max(s.peak_level, std::abs(v));
  s.duration_s = static_cast<double>(wav.samples.size()) / rate;
  s.elapsed_s = std::chrono::duration<double>(t1 - t0).count();
  s.real_time_factor = (s.elapsed_s > 0.0) ? s.duration_s / s.elapsed_s : 0.0;
  return s;
}

}  // namespace hacore
