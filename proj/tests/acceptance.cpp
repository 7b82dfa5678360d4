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
//
// Release gate: twelve numbered checks over the whole pipeline, one verdict
// line each.  Exits nonzero if any check fails or overruns its time budget.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hacore/cli.hpp"
#include "hacore/config.hpp"
#include "hacore/core.hpp"
#include "hacore/errors.hpp"
#include "hacore/filterbank.hpp"
#include "hacore/prescription.hpp"
#include "hacore/slm.hpp"
#include "hacore/wav.hpp"

using namespace hacore;

namespace {

int g_failures = 0;

struct Verdict {
  bool pass = false;
  std::string measured;
};

void criterion(int number, const std::string& what, double limit_s,
               const std::function<Verdict()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = fn();
  } catch (const std::exception& e) {
    v.pass = false;
    v.measured = std::string("threw: ") + e.what();
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (elapsed > limit_s) {
    v.pass = false;
    v.measured += v.measured.empty() ? "" : "; ";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "over time budget %.0f s", limit_s);
    v.measured += buf;
  }
  char line[512];
  std::snprintf(line, sizeof(line), "%s criterion-%d: %s (%s; %.2f s)\n",
                v.pass ? "PASS" : "FAIL", number, what.c_str(),
                v.measured.c_str(), elapsed);
  std::fputs(line, stdout);
  std::fflush(stdout);
  if (!v.pass) ++g_failures;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

std::vector<double> sine(double freq_hz, std::size_t count, double amp) {
  std::vector<double> x(count);
  const double w = 2.0 * std::numbers::pi * freq_hz / 24000.0;
  for (std::size_t n = 0; n < count; ++n) {
    x[n] = amp * std::sin(w * static_cast<double>(n));
  }
  return x;
}

std::vector<double> noise(std::uint64_t seed, std::size_t count, double amp) {
  std::mt19937_64 rng(seed);
  std::vector<double> x(count);
  for (auto& v : x) {
    v = amp * (2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0);
  }
  return x;
}

HaCoreConfig zero_network_config() {
  HaCoreConfig cfg;
  cfg.slm = make_slm_config(6);
  cfg.model = zero_gain_mlp({6, 8, 6});
  return cfg;
}

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), {});
}

}  // namespace

int main() {
  const FilterBankSpec spec;
  const auto scratch = std::filesystem::temp_directory_path() /
                       ("hacore_acceptance_" + std::to_string(::getpid()));
  std::filesystem::create_directories(scratch);

  // Criterion 9's trained model is reused by 10 and 11.
  TrainResult trained;

  criterion(1, "filter bank constants and band edges", 1.0, [&] {
    Verdict v;
    const double fc[6] = {250, 500, 1000, 2000, 4000, 8000};
    const double lo[6] = {20, 375, 750, 1500, 3000, 6000};
    const double hi[6] = {375, 750, 1500, 3000, 6000, 12000};
    bool ok = dft_resolution_hz(spec) == 125.0 && filter_length(spec) == 192;
    for (int m = 0; m < 6; ++m) {
      const BandSpec b = band_limits(spec, m);
      ok = ok && center_frequency(spec, m) == fc[m] && b.lo_hz == lo[m] &&
           b.hi_hz == hi[m];
    }
    v.pass = ok;
    v.measured = "f_t 125 Hz, N 192 (8 ms), centers 250..8000, edges exact";
    return v;
  });

  criterion(2, "linear phase: taps symmetric about N/2", 1.0, [&] {
    Verdict v;
    const FilterBank bank = design_filter_bank(spec);
    double worst = 0.0;
    for (const auto& f : bank.filters) {
      for (int n = 1; n < 192; ++n) {
        worst = std::max(worst, std::abs(f.taps[static_cast<std::size_t>(n)] -
                                         f.taps[static_cast<std::size_t>(192 - n)]));
      }
    }
    v.pass = worst < 1e-12;
    v.measured = "max asymmetry " + fmt("%.2e", worst) + ", tolerance 1e-12";
    return v;
  });

  criterion(3, "partition of unity over bins 1..96", 1.0, [&] {
    Verdict v;
    std::vector<int> owners(97, 0);
    for (int m = 0; m < 6; ++m) {
      const auto [klo, khi] = detail::passband_bins(spec, m);
      for (int k = klo; k <= khi; ++k) owners[static_cast<std::size_t>(k)]++;
    }
    bool ok = owners[0] == 0;
    for (int k = 1; k <= 96; ++k) ok = ok && owners[static_cast<std::size_t>(k)] == 1;
    v.pass = ok;
    v.measured = "each bin claimed by exactly one band, DC by none";
    return v;
  });

  criterion(4, "multitone reconstruction within 1e-4 after settling", 5.0, [&] {
    Verdict v;
    const std::size_t len = 24000;
    std::vector<double> in(len, 0.0);
    for (double f : {250.0, 1000.0, 4000.0}) {
      const auto s = sine(f, len, 0.3);
      for (std::size_t n = 0; n < len; ++n) in[n] += s[n];
    }
    BlockProcessor proc(zero_network_config());
    const auto out = run_stream(proc, in);
    double err = 0.0, ref = 0.0;
    for (std::size_t n = 2 * 192; n < len; ++n) {
      const double d = out[n] - in[n - 96];
      err += d * d;
      ref += in[n - 96] * in[n - 96];
    }
    const double rel = std::sqrt(err / ref);
    v.pass = rel < 1e-4;
    v.measured = "relative rms error " + fmt("%.2e", rel) + " vs 96-sample delay";
    return v;
  });

  criterion(5, "impulse latency is exactly 96 samples (4 ms)", 5.0, [&] {
    Verdict v;
    std::vector<double> in(24 * 96, 0.0);
    const std::size_t pos = 1000;
    in[pos] = 1.0;
    BlockProcessor proc(zero_network_config());
    const auto out = run_stream(proc, in);
    std::size_t peak = 0;
    for (std::size_t n = 1; n < out.size(); ++n) {
      if (std::abs(out[n]) > std::abs(out[peak])) peak = n;
    }
    v.pass = peak == pos + 96;
    v.measured = "peak at input+" + std::to_string(peak - pos) + " samples";
    return v;
  });

  criterion(6, "block-linear neural chain vs compressive baseline", 10.0, [&] {
    Verdict v;
    // Neural engine with the meter pinned: halving the input must halve the
    // output to machine precision.
    HaCoreConfig cfg = zero_network_config();
    cfg.model = init_mlp({6, 8, 6}, 21);
    cfg.frozen_levels_db = std::vector<double>{55, 60, 65, 70, 75, 80};
    const auto in = sine(1000.0, 24000, 0.9);
    std::vector<double> half = in;
    for (auto& s : half) s *= 0.5;
    BlockProcessor p1(cfg), p2(cfg);
    const auto out1 = run_stream(p1, in);
    const auto out2 = run_stream(p2, half);
    double worst = 0.0, scale = 0.0;
    for (std::size_t n = 0; n < out1.size(); ++n) {
      worst = std::max(worst, std::abs(out2[n] - 0.5 * out1[n]));
      scale = std::max(scale, std::abs(out1[n]));
    }
    const bool neural_ok = worst <= 1e-12 * std::max(1.0, scale);

    // Baseline above the knee: the same halving shrinks the output by
    // strictly less than half, i.e. the measured factor exceeds 0.5 + 1e-3.
    HaCoreConfig bcfg;
    bcfg.slm = make_slm_config(6);
    bcfg.engine = EngineKind::kBaseline;
    bcfg.rule = default_compressor_rule(6);
    BlockProcessor b1(bcfg), b2(bcfg);
    const auto bo1 = run_stream(b1, in);
    const auto bo2 = run_stream(b2, half);
    double ss1 = 0.0, ss2 = 0.0;
    for (std::size_t n = 12000; n < bo1.size(); ++n) {
      ss1 += bo1[n] * bo1[n];
      ss2 += bo2[n] * bo2[n];
    }
    const double factor = std::sqrt(ss2 / ss1);
    const bool baseline_ok = factor > 0.5 + 1e-3;

    v.pass = neural_ok && baseline_ok;
    v.measured = "frozen-gain deviation " + fmt("%.2e", worst) +
                 ", baseline scale factor " + fmt("%.3f", factor) + " > 0.501";
    return v;
  });

  criterion(7, "meter calibration on a full-scale bin-center sine", 5.0, [&] {
    Verdict v;
    const FilterBank bank = design_filter_bank(spec);
    const SlmConfig slm = make_slm_config(6);
    const std::size_t settle = 2 * 192;
    const auto probe = sine(1000.0, settle + 192, 1.0);

    const auto level_for = [&](double scale) {
      std::vector<std::vector<double>> blocks;
      for (const auto& f : bank.filters) {
        FirStream stream(f);
        std::vector<double> x = probe;
        for (auto& s : x) s *= scale;
        const auto y = stream.process(x);
        blocks.emplace_back(y.begin() + static_cast<std::ptrdiff_t>(settle),
                            y.end());
      }
      return measure(blocks, slm, 192).levels_db_spl[2];
    };

    const double base = level_for(1.0);
    const double loud = level_for(10.0);
    const bool cal_ok = std::abs(base - 96.99) <= 0.05;
    const bool shift_ok = std::abs((loud - base) - 20.0) <= 0.01;
    v.pass = cal_ok && shift_ok;
    v.measured = "band 2 reads " + fmt("%.4f", base) + " dB SPL, x10 shift " +
                 fmt("%.4f", loud - base) + " dB";
    return v;
  });

  criterion(8, "backprop gradients match finite differences", 10.0, [&] {
    Verdict v;
    const double h = 1e-5;
    double worst = 0.0;
    for (std::uint64_t seed : {101, 202, 303}) {
      Mlp m = init_mlp({6, 8, 6}, seed);
      std::mt19937_64 rng(seed + 1);
      TrainingSet batch;
      for (int i = 0; i < 4; ++i) {
        std::vector<double> in(6), t(6);
        for (auto& x : in) x = 120.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
        for (auto& x : t) x = 30.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 5.0;
        batch.inputs.push_back(in);
        batch.targets.push_back(t);
      }
      const auto lg = loss_and_gradient(m, batch);
      std::vector<double> grads;
      for (const auto& w : lg.grad.weights) grads.insert(grads.end(), w.begin(), w.end());
      for (const auto& b : lg.grad.biases) grads.insert(grads.end(), b.begin(), b.end());
      std::vector<double*> params;
      for (auto& w : m.weights) for (auto& x : w) params.push_back(&x);
      for (auto& b : m.biases) for (auto& x : b) params.push_back(&x);
      for (std::size_t i = 0; i < params.size(); ++i) {
        const double saved = *params[i];
        *params[i] = saved + h;
        const double up = loss_and_gradient(m, batch).loss;
        *params[i] = saved - h;
        const double down = loss_and_gradient(m, batch).loss;
        *params[i] = saved;
        const double fd = (up - down) / (2.0 * h);
        worst = std::max(worst,
                         std::abs(grads[i] - fd) / std::max(std::abs(fd), 1e-3));
      }
    }
    v.pass = worst < 1e-4;
    v.measured = "worst relative error " + fmt("%.2e", worst) +
                 " over 3 seeds, every parameter";
    return v;
  });

  criterion(9, "network interpolates the rule between grid levels", 60.0, [&] {
    Verdict v;
    const CompressorRule rule = default_compressor_rule(6);
    const TrainingSet grid = oracle_grid(rule, 20, 100, 5);
    const TrainerConfig cfg;
    trained = train(init_mlp({6, 8, 6}, cfg.seed), grid, cfg);
    const TrainingSet mid = oracle_grid(rule, 22.5, 100, 5);
    double worst = 0.0;
    for (std::size_t i = 0; i < mid.size(); ++i) {
      const auto g = trained.model.forward(mid.inputs[i]);
      for (std::size_t b = 0; b < g.size(); ++b) {
        worst = std::max(worst, std::abs(g[b] - mid.targets[i][b]));
      }
    }
    v.pass = worst < 1.0;
    v.measured = "max held-out midpoint error " + fmt("%.3f", worst) + " dB";
    return v;
  });

  criterion(10, "widening by 4 units preserves the function", 5.0, [&] {
    Verdict v;
    const Mlp wide = widen(trained.model, 1, 4, 7);
    std::mt19937_64 rng(70);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      std::vector<double> in(6);
      for (auto& x : in) x = 120.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
      const auto a = trained.model.forward(in);
      const auto b = wide.forward(in);
      for (std::size_t k = 0; k < a.size(); ++k) {
        worst = std::max(worst, std::abs(a[k] - b[k]));
      }
    }
    v.pass = worst < 1e-9 && wide.layer_sizes[1] == 12;
    v.measured = "max output change " + fmt("%.2e", worst) + " over 1000 probes";
    return v;
  });

  criterion(11, "personalization nudges one band; heavy anchor pins", 60.0, [&] {
    Verdict v;
    const std::vector<double> input(6, 65.0);
    const auto before = trained.model.forward(input);
    TrainingSet prefs;
    prefs.inputs.push_back(input);
    auto want = before;
    want[3] += 6.0;
    prefs.targets.push_back(want);

    TrainerConfig cfg;  // anchor_weight defaults to 1e-3
    const TrainResult tuned = personalize(trained.model, prefs, cfg);
    const auto after = tuned.model.forward(input);
    const double moved3 = after[3] - before[3];
    double other = 0.0;
    for (int b : {0, 1, 2, 4, 5}) {
      other = std::max(other, std::abs(after[static_cast<std::size_t>(b)] -
                                       before[static_cast<std::size_t>(b)]));
    }
    const bool nudge_ok = moved3 >= 3.0 && other < 2.0;

    // The heavy-anchor clause: lambda = 1e6 is supposed to hold every
    // parameter within 1e-6 of the anchor.  The anchored optimum actually
    // sits at |data gradient| / (2 lambda): the band-3 output bias alone
    // pulls with 2 * 6 dB * 40 / 6 = 80, so the best any convergent
    // optimizer can do is ~4e-5.  Measured honestly below with a step size
    // small enough for the spring (lr * 2 lambda < 2 (1 + momentum)); the
    // check is expected to fail until the threshold is renegotiated.
    TrainerConfig heavy;
    heavy.anchor_weight = 1e6;
    heavy.learning_rate = 1e-6;
    heavy.epochs = 40000;
    const TrainResult pinned = personalize(trained.model, prefs, heavy);
    const double drift = max_abs_param_diff(trained.model, pinned.model);
    const bool anchor_ok = drift < 1e-6;

    v.pass = nudge_ok && anchor_ok;
    v.measured = "band 3 moved " + fmt("%+.2f", moved3) +
                 " dB, others at most " + fmt("%.2f", other) +
                 " dB; lambda=1e6 drift " + fmt("%.1e", drift) +
                 " vs 1e-6 required";
    return v;
  });

  criterion(12, "determinism and better-than-real-time throughput", 30.0, [&] {
    Verdict v;
    const auto dir = scratch.string();
    const auto audio = noise(2026, 240000, 0.3);  // 10 s at 24 kHz
    write_wav_mono_f32(dir + "/in.wav", audio, 24000);

    HaCoreConfig cfg = zero_network_config();
    cfg.model = trained.model;
    const ProcessSummary s1 =
        process_file(cfg, dir + "/in.wav", dir + "/out1.wav", dir + "/t1.csv");
    const ProcessSummary s2 =
        process_file(cfg, dir + "/in.wav", dir + "/out2.wav", dir + "/t2.csv");
    const bool wav_same = read_bytes(dir + "/out1.wav") == read_bytes(dir + "/out2.wav");
    const bool trace_same = read_bytes(dir + "/t1.csv") == read_bytes(dir + "/t2.csv");

    const TrainingSet grid = oracle_grid(default_compressor_rule(6), 20, 100, 5);
    TrainerConfig tc;
    tc.epochs = 2000;
    save_model(train(init_mlp({6, 8, 6}, 3), grid, tc).model, dir + "/m1.json");
    save_model(train(init_mlp({6, 8, 6}, 3), grid, tc).model, dir + "/m2.json");
    const bool model_same = read_bytes(dir + "/m1.json") == read_bytes(dir + "/m2.json");

    const double rtf = std::min(s1.real_time_factor, s2.real_time_factor);
    const bool fast = s1.elapsed_s < 1.0 && s2.elapsed_s < 1.0;
    v.pass = wav_same && trace_same && model_same && fast;
    v.measured = std::string("wav/trace/model byte-identical: ") +
                 (wav_same && trace_same && model_same ? "yes" : "NO") +
                 ", 10 s processed at " + fmt("%.0f", rtf) + "x real time";
    return v;
  });

  std::filesystem::remove_all(scratch);
  if (g_failures == 0) {
    std::puts("all 12 criteria pass");
  } else {
    std::printf("%d of 12 criteria FAILED\n", g_failures);
  }
  return g_failures == 0 ? 0 : 1;
}
