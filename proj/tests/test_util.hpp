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

#include <unistd.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace testutil {

inline std::vector<double> sine(double freq_hz, double sample_rate_hz,
                                std::size_t count, double amplitude = 1.0) {
  std::vector<double> x(count);
  const double w = 2.0 * std::numbers::pi * freq_hz / sample_rate_hz;
  for (std::size_t n = 0; n < count; ++n) {
    x[n] = amplitude * std::sin(w * static_cast<double>(n));
  }
  return x;
}

// Uniform noise in [-amplitude, amplitude] from a fixed-sequence generator.
inline std::vector<double> noise(std::uint64_t seed, std::size_t count,
                                 double amplitude = 0.5) {
  std::mt19937_64 rng(seed);
  std::vector<double> x(count);
  for (auto& v : x) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    v = amplitude * (2.0 * u - 1.0);
  }
  return x;
}

inline double rms(const std::vector<double>& x, std::size_t lo, std::size_t hi) {
  double ss = 0.0;
  for (std::size_t n = lo; n < hi; ++n) ss += x[n] * x[n];
  return std::sqrt(ss / static_cast<double>(hi - lo));
}

// Fresh scratch directory under the system temp root, unique per call.
inline std::string scratch_dir(const std::string& tag) {
  static int counter = 0;
  const auto dir = std::filesystem::temp_directory_path() /
                   ("hacore_test_" + tag + "_" + std::to_string(counter++) +
                    "_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir.string();
}

}  // namespace testutil
