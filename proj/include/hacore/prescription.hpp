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
#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hacore/errors.hpp"

namespace hacore {

// Prescription: maps per-band levels (dB SPL) to per-band gains (dB).
// Two implementations live here.  CompressorRule is the classic wide
// dynamic range compression formula, used as the training oracle and as
// the baseline engine's gain law.  Mlp is a small dense network trained
// to imitate such a rule and then personalized with anchored fine-tuning.

// ---------------------------------------------------------------------------
// Compressor rule
// ---------------------------------------------------------------------------

struct CompressorRule {
  std::vector<double> insertion_gain_db;   // gain below the knee
  std::vector<double> knee_db_spl;         // compression threshold
  std::vector<double> compression_ratio;   // >= 1
  int num_bands() const { return static_cast<int>(insertion_gain_db.size()); }
};

inline void validate(const CompressorRule& rule) {
  const std::size_t m = rule.insertion_gain_db.size();
  if (m == 0 || rule.knee_db_spl.size() != m || rule.compression_ratio.size() != m) {
    throw ConfigError("compressor rule vectors must be non-empty and equal length");
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (!(rule.compression_ratio[i] >= 1.0)) {
      throw ConfigError("compression ratio for band " + std::to_string(i) +
                        " must be >= 1");
    }
    if (!std::isfinite(rule.insertion_gain_db[i]) || !std::isfinite(rule.knee_db_spl[i])) {
      throw ConfigError("compressor rule values must be finite");
    }
    if (rule.knee_db_spl[i] < 0.0 || rule.knee_db_spl[i] > 120.0) {
      throw ConfigError("knee for band " + std::to_string(i) +
                        " must lie in [0, 120] dB SPL");
    }
  }
}

// Linear gain below the knee, compressed above it.
inline double reference_gain(double insertion_gain_db, double knee_db_spl,
                             double compression_ratio, double level_db_spl) {
  if (level_db_spl <= knee_db_spl) return insertion_gain_db;
  return insertion_gain_db -
         (1.0 - 1.0 / compression_ratio) * (level_db_spl - knee_db_spl);
}

inline std::vector<double> reference_gain(const CompressorRule& rule,
                                          const std::vector<double>& levels_db_spl) {
  validate(rule);
  if (levels_db_spl.size() != rule.insertion_gain_db.size()) {
    throw DataError("level vector has " + std::to_string(levels_db_spl.size()) +
                    " bands, rule has " +
                    std::to_string(rule.insertion_gain_db.size()));
  }
  std::vector<double> g(levels_db_spl.size());
  for (std::size_t m = 0; m < g.size(); ++m) {
    g[m] = reference_gain(rule.insertion_gain_db[m], rule.knee_db_spl[m],
                          rule.compression_ratio[m], levels_db_spl[m]);
  }
  return g;
}

// Mild high-frequency-emphasis preset, enough structure for the network
// to have something nontrivial to learn.
inline CompressorRule default_compressor_rule(int num_bands) {
  CompressorRule r;
  for (int m = 0; m < num_bands; ++m) {
    r.insertion_gain_db.push_back(std::min(10.0 + 3.0 * m, 25.0));
    r.knee_db_spl.push_back(std::min(45.0 + 2.0 * m, 60.0));
    r.compression_ratio.push_back(std::min(1.5 + 0.25 * m, 3.0));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Network
// ---------------------------------------------------------------------------

enum class Activation { kTanh, kIdentity };

// Affine map between engineering units and network units.
// Inputs:  unit = (level_db_spl - offset) / scale
// Outputs: gain_db = unit * scale + offset
struct Normalization {
  double offset = 0.0;
  double scale = 1.0;
};

struct Mlp {
  std::vector<int> layer_sizes;               // input, hidden..., output
  std::vector<std::vector<double>> weights;   // per layer, row-major out x in
  std::vector<std::vector<double>> biases;    // per layer, length out
  Activation hidden_activation = Activation::kTanh;
  Activation output_activation = Activation::kIdentity;
  Normalization input_norm{60.0, 40.0};
  Normalization output_denorm{0.0, 40.0};

  int num_layers() const { return static_cast<int>(layer_sizes.size()); }
  int input_size() const { return layer_sizes.front(); }
  int output_size() const { return layer_sizes.back(); }

  std::vector<double> forward(const std::vector<double>& levels_db_spl) const;
};

namespace detail {

// 53-bit uniform in [0, 1) from the standard engine, so parameter streams
// are identical across standard libraries.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double symmetric_uniform(std::mt19937_64& rng) {
  return 2.0 * unit_uniform(rng) - 1.0;
}

// Explicit Fisher-Yates, same reason as above.
inline void shuffle_indices(std::vector<std::size_t>& idx, std::mt19937_64& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(idx[i - 1], idx[j]);
  }
}

}  // namespace detail

inline void validate(const Mlp& m) {
  if (m.layer_sizes.size() < 2) {
    throw ConfigError("network needs an input and an output layer");
  }
  for (int s : m.layer_sizes) {
    if (s < 1) throw ConfigError("layer sizes must be positive");
  }
  if (m.layer_sizes.front() != m.layer_sizes.back()) {
    throw ConfigError("network input and output widths must both equal the band count");
  }
  const std::size_t n_aff = m.layer_sizes.size() - 1;
  if (m.weights.size() != n_aff || m.biases.size() != n_aff) {
    throw ConfigError("network has " + std::to_string(m.weights.size()) +
                      " weight matrices for " + std::to_string(n_aff) + " layers");
  }
  for (std::size_t l = 0; l < n_aff; ++l) {
    const std::size_t rows = static_cast<std::size_t>(m.layer_sizes[l + 1]);
    const std::size_t cols = static_cast<std::size_t>(m.layer_sizes[l]);
    if (m.weights[l].size() != rows * cols) {
      throw ConfigError("layer " + std::to_string(l) + ": weight matrix has " +
                        std::to_string(m.weights[l].size()) + " values, expected " +
                        std::to_string(rows) + "x" + std::to_string(cols));
    }
    if (m.biases[l].size() != rows) {
      throw ConfigError("layer " + std::to_string(l) + ": bias vector has " +
                        std::to_string(m.biases[l].size()) + " values, expected " +
                        std::to_string(rows));
    }
  }
  if (m.input_norm.scale == 0.0 || m.output_denorm.scale == 0.0) {
    throw ConfigError("normalization scales must be nonzero");
  }
}

// Seeded uniform init in +-1/sqrt(fan_in) for weights and biases.
inline Mlp init_mlp(const std::vector<int>& layer_sizes, std::uint64_t seed,
                    Normalization input_norm = {60.0, 40.0},
                    Normalization output_denorm = {0.0, 40.0}) {
  Mlp m;
  m.layer_sizes = layer_sizes;
  m.input_norm = input_norm;
  m.output_denorm = output_denorm;
  if (layer_sizes.size() < 2) {
    throw ConfigError("network needs an input and an output layer");
  }
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const std::size_t rows = static_cast<std::size_t>(layer_sizes[l + 1]);
    const std::size_t cols = static_cast<std::size_t>(layer_sizes[l]);
    const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
    std::vector<double> w(rows * cols);
    for (double& v : w) v = bound * detail::symmetric_uniform(rng);
    std::vector<double> b(rows);
    for (double& v : b) v = bound * detail::symmetric_uniform(rng);
    m.weights.push_back(std::move(w));
    m.biases.push_back(std::move(b));
  }
  validate(m);
  return m;
}

// All-zero parameters with a pass-through denorm offset: 0 dB gain for any
// input, handy as a known-neutral prescription.
inline Mlp zero_gain_mlp(const std::vector<int>& layer_sizes) {
  Mlp m = init_mlp(layer_sizes, 0);
  for (auto& w : m.weights) std::fill(w.begin(), w.end(), 0.0);
  for (auto& b : m.biases) std::fill(b.begin(), b.end(), 0.0);
  m.output_denorm.offset = 0.0;
  return m;
}

inline std::vector<double> Mlp::forward(const std::vector<double>& levels_db_spl) const {
  if (static_cast<int>(levels_db_spl.size()) != input_size()) {
    throw DataError("forward got " + std::to_string(levels_db_spl.size()) +
                    " levels for an input width of " + std::to_string(input_size()));
  }
  std::vector<double> a(levels_db_spl.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = (levels_db_spl[i] - input_norm.offset) / input_norm.scale;
  }
  const std::size_t n_aff = weights.size();
  for (std::size_t l = 0; l < n_aff; ++l) {
    const std::size_t rows = static_cast<std::size_t>(layer_sizes[l + 1]);
    const std::size_t cols = a.size();
    std::vector<double> z(rows);
    for (std::size_t r = 0; r < rows; ++r) {
      double acc = biases[l][r];
      const double* wrow = weights[l].data() + r * cols;
      for (std::size_t c = 0; c < cols; ++c) acc += wrow[c] * a[c];
      z[r] = (l + 1 < n_aff) ? std::tanh(acc) : acc;
    }
    a = std::move(z);
  }
  for (double& v : a) v = v * output_denorm.scale + output_denorm.offset;
  return a;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct TrainingSet {
  std::vector<std::vector<double>> inputs;   // rows of per-band levels, dB SPL
  std::vector<std::vector<double>> targets;  // rows of per-band gains, dB
  std::size_t size() const { return inputs.size(); }
};

inline TrainingSet oracle_grid(const CompressorRule& rule, double level_lo_db,
                               double level_hi_db, double level_step_db) {
  validate(rule);
  if (!(level_step_db > 0.0) || level_hi_db < level_lo_db) {
    throw ConfigError("oracle grid needs level_hi >= level_lo and a positive step");
  }
  TrainingSet set;
  const int bands = rule.num_bands();
  for (double v = level_lo_db; v <= level_hi_db + 1e-9; v += level_step_db) {
    std::vector<double> in(static_cast<std::size_t>(bands), v);
    set.targets.push_back(reference_gain(rule, in));
    set.inputs.push_back(std::move(in));
  }
  return set;
}

// Defaults picked empirically on the default prescription grid: 2e-3 tips the
// dB-squared loss into divergence with momentum 0.9; 1e-3 reaches ~0.4 dB
// held-out midpoint error by 40000 epochs (~0.2 s) across seeds.
struct TrainerConfig {
  double learning_rate = 1e-3;
  double momentum = 0.9;
  int epochs = 40000;
  int batch_size = 32;        // clamped to the dataset size
  std::uint64_t seed = 1;
  double anchor_weight = 1e-3;  // lambda, used by personalize only
};

inline void validate(const TrainerConfig& cfg) {
  if (!(cfg.learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (!(cfg.momentum >= 0.0) || cfg.momentum >= 1.0) {
    throw ConfigError("momentum must lie in [0, 1)");
  }
  if (cfg.epochs < 0) throw ConfigError("epochs must be nonnegative");
  if (cfg.batch_size < 1) throw ConfigError("batch size must be positive");
  if (!(cfg.anchor_weight >= 0.0)) throw ConfigError("anchor weight must be nonnegative");
}

// Parameter-shaped accumulator (same layout as Mlp weights/biases).
struct Gradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
};

inline Gradients zero_gradients(const Mlp& m) {
  Gradients g;
  for (const auto& w : m.weights) g.weights.emplace_back(w.size(), 0.0);
  for (const auto& b : m.biases) g.biases.emplace_back(b.size(), 0.0);
  return g;
}

struct LossAndGradient {
  double loss = 0.0;
  Gradients grad;
};

// Mean squared gain error in dB^2 over the batch, plus
// anchor_weight * ||theta - theta_anchor||^2 when an anchor is given.
// Gradients come from backprop through the tanh stack and both
// normalization maps.
inline LossAndGradient loss_and_gradient(const Mlp& m, const TrainingSet& batch,
                                         const Mlp* anchor = nullptr,
                                         double anchor_weight = 0.0) {
  validate(m);
  if (batch.size() == 0 || batch.inputs.size() != batch.targets.size()) {
    throw DataError("batch must be non-empty with matching inputs and targets");
  }
  const std::size_t n_aff = m.weights.size();
  const std::size_t out_m = static_cast<std::size_t>(m.output_size());
  LossAndGradient res;
  res.grad = zero_gradients(m);

  const double denom = static_cast<double>(batch.size()) * static_cast<double>(out_m);
  std::vector<std::vector<double>> act(n_aff + 1);  // post-activation per layer
  for (std::size_t s = 0; s < batch.size(); ++s) {
    const auto& levels = batch.inputs[s];
    const auto& target = batch.targets[s];
    if (static_cast<int>(levels.size()) != m.input_size() ||
        target.size() != out_m) {
      throw DataError("training row " + std::to_string(s) +
                      " has the wrong number of bands");
    }
    act[0].resize(levels.size());
    for (std::size_t i = 0; i < levels.size(); ++i) {
      act[0][i] = (levels[i] - m.input_norm.offset) / m.input_norm.scale;
    }
    for (std::size_t l = 0; l < n_aff; ++l) {
      const std::size_t rows = static_cast<std::size_t>(m.layer_sizes[l + 1]);
      const std::size_t cols = act[l].size();
      act[l + 1].resize(rows);
      for (std::size_t r = 0; r < rows; ++r) {
        double acc = m.biases[l][r];
        const double* wrow = m.weights[l].data() + r * cols;
        for (std::size_t c = 0; c < cols; ++c) acc += wrow[c] * act[l][c];
        act[l + 1][r] = (l + 1 < n_aff) ? std::tanh(acc) : acc;
      }
    }

    // delta holds dLoss/d(pre-activation) of the current layer.
    std::vector<double> delta(out_m);
    for (std::size_t r = 0; r < out_m; ++r) {
      const double gain = act[n_aff][r] * m.output_denorm.scale + m.output_denorm.offset;
      const double err = gain - target[r];
      res.loss += err * err / denom;
      delta[r] = 2.0 * err * m.output_denorm.scale / denom;
    }
    for (std::size_t l = n_aff; l-- > 0;) {
      const std::size_t rows = delta.size();
      const std::size_t cols = act[l].size();
      for (std::size_t r = 0; r < rows; ++r) {
        double* grow = res.grad.weights[l].data() + r * cols;
        for (std::size_t c = 0; c < cols; ++c) grow[c] += delta[r] * act[l][c];
        res.grad.biases[l][r] += delta[r];
      }
      if (l > 0) {
        std::vector<double> prev(cols, 0.0);
        for (std::size_t r = 0; r < rows; ++r) {
          const double* wrow = m.weights[l].data() + r * cols;
          for (std::size_t c = 0; c < cols; ++c) prev[c] += wrow[c] * delta[r];
        }
        for (std::size_t c = 0; c < cols; ++c) {
          prev[c] *= 1.0 - act[l][c] * act[l][c];  // tanh'
        }
        delta = std::move(prev);
      }
    }
  }

  if (anchor != nullptr && anchor_weight != 0.0) {
    validate(*anchor);
    if (anchor->layer_sizes != m.layer_sizes) {
      throw ConfigError("anchor network shape differs from the trainee");
    }
    for (std::size_t l = 0; l < n_aff; ++l) {
      for (std::size_t i = 0; i < m.weights[l].size(); ++i) {
        const double d = m.weights[l][i] - anchor->weights[l][i];
        res.loss += anchor_weight * d * d;
        res.grad.weights[l][i] += 2.0 * anchor_weight * d;
      }
      for (std::size_t i = 0; i < m.biases[l].size(); ++i) {
        const double d = m.biases[l][i] - anchor->biases[l][i];
        res.loss += anchor_weight * d * d;
        res.grad.biases[l][i] += 2.0 * anchor_weight * d;
      }
    }
  }
  return res;
}

struct TrainResult {
  Mlp model;
  std::vector<double> epoch_loss;  // sample-weighted mean of batch losses
};

namespace detail {

inline TrainResult train_impl(const Mlp& start, const TrainingSet& data,
                              const TrainerConfig& cfg, const Mlp* anchor) {
  validate(start);
  validate(cfg);
  if (data.size() == 0 || data.inputs.size() != data.targets.size()) {
    throw DataError("training set must be non-empty with matching inputs and targets");
  }
  TrainResult res;
  res.model = start;
  const double lambda = (anchor != nullptr) ? cfg.anchor_weight : 0.0;
  const std::size_t n = data.size();
  const std::size_t bsz = std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size), n);

  Gradients vel = zero_gradients(start);
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::mt19937_64 rng(cfg.seed);

  TrainingSet batch;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_indices(idx, rng);
    double loss_sum = 0.0;
    for (std::size_t at = 0; at < n; at += bsz) {
      const std::size_t take = std::min(bsz, n - at);
      batch.inputs.assign(take, {});
      batch.targets.assign(take, {});
      for (std::size_t i = 0; i < take; ++i) {
        batch.inputs[i] = data.inputs[idx[at + i]];
        batch.targets[i] = data.targets[idx[at + i]];
      }
      LossAndGradient lg = loss_and_gradient(res.model, batch, anchor, lambda);
      if (!std::isfinite(lg.loss)) {
        throw NumericError("training diverged (non-finite loss) at epoch " +
                           std::to_string(epoch));
      }
      for (std::size_t l = 0; l < vel.weights.size(); ++l) {
        for (std::size_t i = 0; i < vel.weights[l].size(); ++i) {
          vel.weights[l][i] = cfg.momentum * vel.weights[l][i] -
                              cfg.learning_rate * lg.grad.weights[l][i];
          res.model.weights[l][i] += vel.weights[l][i];
        }
        for (std::size_t i = 0; i < vel.biases[l].size(); ++i) {
          vel.biases[l][i] = cfg.momentum * vel.biases[l][i] -
                             cfg.learning_rate * lg.grad.biases[l][i];
          res.model.biases[l][i] += vel.biases[l][i];
        }
      }
      loss_sum += lg.loss * static_cast<double>(take);
    }
    res.epoch_loss.push_back(loss_sum / static_cast<double>(n));
  }
  return res;
}

}  // namespace detail

// Mini-batch gradient descent with classical momentum.  Deterministic for a
// fixed seed: the shuffle sequence and every update are reproducible bit for
// bit.
inline TrainResult train(const Mlp& start, const TrainingSet& data,
                         const TrainerConfig& cfg) {
  return detail::train_impl(start, data, cfg, nullptr);
}

// Anchored fine-tuning: gradient descent on the preference set with an
// anchor_weight * ||theta - theta_start||^2 pull toward the starting
// parameters, so small preference sets adjust rather than overwrite.
inline TrainResult personalize(const Mlp& start, const TrainingSet& preferences,
                               const TrainerConfig& cfg) {
  if (!(cfg.anchor_weight > 0.0)) {
    throw ConfigError("personalize requires a positive anchor weight");
  }
  if (preferences.size() == 0) {
    throw DataError("preference set is empty");
  }
  const Mlp anchor = start;
  return detail::train_impl(start, preferences, cfg, &anchor);
}

// ---------------------------------------------------------------------------
// Widening
// ---------------------------------------------------------------------------

// Grow one hidden layer by extra_units without changing the function.  Each
// new unit clones a randomly chosen existing unit's incoming weights and
// bias; that unit's outgoing weights are halved and shared with the clone,
// so every downstream pre-activation is preserved exactly.
inline Mlp widen(const Mlp& start, int layer, int extra_units, std::uint64_t seed) {
  validate(start);
  if (layer < 1 || layer + 1 >= start.num_layers()) {
    throw ConfigError("widening supports hidden layers only (got layer " +
                      std::to_string(layer) + ")");
  }
  if (extra_units < 1) throw ConfigError("extra_units must be at least 1");

  Mlp m = start;
  std::mt19937_64 rng(seed);
  const std::size_t li = static_cast<std::size_t>(layer);
  for (int e = 0; e < extra_units; ++e) {
    const std::size_t width = static_cast<std::size_t>(m.layer_sizes[li]);
    const std::size_t in_cols = static_cast<std::size_t>(m.layer_sizes[li - 1]);
    const std::size_t src = static_cast<std::size_t>(rng() % width);

    // Incoming: append a copy of the source unit's row.
    auto& w_in = m.weights[li - 1];
    w_in.insert(w_in.end(), w_in.begin() + static_cast<std::ptrdiff_t>(src * in_cols),
                w_in.begin() + static_cast<std::ptrdiff_t>((src + 1) * in_cols));
    m.biases[li - 1].push_back(m.biases[li - 1][src]);

    // Outgoing: halve the source column and append the clone's column.
    const std::size_t out_rows = static_cast<std::size_t>(m.layer_sizes[li + 1]);
    const auto& w_out = m.weights[li];
    std::vector<double> grown(out_rows * (width + 1));
    for (std::size_t r = 0; r < out_rows; ++r) {
      for (std::size_t c = 0; c < width; ++c) {
        double v = w_out[r * width + c];
        if (c == src) v *= 0.5;
        grown[r * (width + 1) + c] = v;
      }
      grown[r * (width + 1) + width] = grown[r * (width + 1) + src];
    }
    m.weights[li] = std::move(grown);
    m.layer_sizes[li] += 1;
  }
  validate(m);
  return m;
}

// Largest absolute parameter difference between two same-shaped networks.
inline double max_abs_param_diff(const Mlp& a, const Mlp& b) {
  if (a.layer_sizes != b.layer_sizes) {
    throw ConfigError("networks have different shapes");
  }
  double worst = 0.0;
  for (std::size_t l = 0; l < a.weights.size(); ++l) {
    for (std::size_t i = 0; i < a.weights[l].size(); ++i) {
      worst = std::max(worst, std::abs(a.weights[l][i] - b.weights[l][i]));
    }
    for (std::size_t i = 0; i < a.biases[l].size(); ++i) {
      worst = std::max(worst, std::abs(a.biases[l][i] - b.biases[l][i]));
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Model file I/O (versioned JSON)
// ---------------------------------------------------------------------------

inline constexpr int kModelFileVersion = 1;

namespace detail {

inline std::string activation_name(Activation a) {
  return a == Activation::kTanh ? "tanh" : "identity";
}

inline Activation activation_from_name(const std::string& s) {
  if (s == "tanh") return Activation::kTanh;
  if (s == "identity") return Activation::kIdentity;
  throw DataError("unknown activation '" + s + "'");
}

inline void reject_unknown_keys(const nlohmann::json& obj,
                                const std::vector<std::string>& allowed,
                                const std::string& where) {
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const auto& k : allowed) {
      if (item.key() == k) { ok = true; break; }
    }
    if (!ok) throw DataError("unknown key '" + item.key() + "' in " + where);
  }
}

}  // namespace detail

inline nlohmann::json to_json(const Mlp& m) {
  validate(m);
  nlohmann::json j;
  j["version"] = kModelFileVersion;
  j["layer_sizes"] = m.layer_sizes;
  j["activations"] = {{"hidden", detail::activation_name(m.hidden_activation)},
                      {"output", detail::activation_name(m.output_activation)}};
  j["normalization"] = {
      {"input", {{"offset_db", m.input_norm.offset}, {"scale_db", m.input_norm.scale}}},
      {"output", {{"offset_db", m.output_denorm.offset}, {"scale_db", m.output_denorm.scale}}}};
  j["weights"] = m.weights;  // row-major per layer
  j["biases"] = m.biases;
  return j;
}

inline void save_model(const Mlp& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write model file '" + path + "'");
  out << to_json(m).dump(2) << "\n";
  if (!out) throw DataError("failed writing model file '" + path + "'");
}

inline Mlp from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DataError("model file root must be an object");
  detail::reject_unknown_keys(
      j, {"version", "layer_sizes", "activations", "normalization", "weights", "biases"},
      "model file");
  for (const char* key : {"version", "layer_sizes", "activations", "normalization",
                          "weights", "biases"}) {
    if (!j.contains(key)) throw DataError(std::string("model file lacks '") + key + "'");
  }
  if (!j["version"].is_number_integer() || j["version"].get<int>() != kModelFileVersion) {
    throw DataError("unsupported model file version (expected " +
                    std::to_string(kModelFileVersion) + ")");
  }
  Mlp m;
  try {
    m.layer_sizes = j["layer_sizes"].get<std::vector<int>>();
    const auto& acts = j["activations"];
    detail::reject_unknown_keys(acts, {"hidden", "output"}, "activations");
    m.hidden_activation = detail::activation_from_name(acts.at("hidden").get<std::string>());
    m.output_activation = detail::activation_from_name(acts.at("output").get<std::string>());
    const auto& norm = j["normalization"];
    detail::reject_unknown_keys(norm, {"input", "output"}, "normalization");
    detail::reject_unknown_keys(norm.at("input"), {"offset_db", "scale_db"},
                                "normalization.input");
    detail::reject_unknown_keys(norm.at("output"), {"offset_db", "scale_db"},
                                "normalization.output");
    m.input_norm.offset = norm.at("input").at("offset_db").get<double>();
    m.input_norm.scale = norm.at("input").at("scale_db").get<double>();
    m.output_denorm.offset = norm.at("output").at("offset_db").get<double>();
    m.output_denorm.scale = norm.at("output").at("scale_db").get<double>();
    m.weights = j["weights"].get<std::vector<std::vector<double>>>();
    m.biases = j["biases"].get<std::vector<std::vector<double>>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed model file: ") + e.what());
  }
  if (m.hidden_activation != Activation::kTanh ||
      m.output_activation != Activation::kIdentity) {
    throw DataError("model file requests an unsupported activation combination");
  }
  try {
    validate(m);
  } catch (const ConfigError& e) {
    throw DataError(std::string("model file failed validation: ") + e.what());
  }
  for (const auto& w : m.weights) {
    for (double v : w) {
      if (!std::isfinite(v)) throw DataError("model file holds non-finite weights");
    }
  }
  for (const auto& b : m.biases) {
    for (double v : b) {
      if (!std::isfinite(v)) throw DataError("model file holds non-finite biases");
    }
  }
  return m;
}

inline Mlp load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read model file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed model file '" + path + "': " + e.what());
  }
  return from_json(j);
}

}  // namespace hacore
