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
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "hacore/errors.hpp"

namespace hacore {

// Log-spaced brick-wall FIR filter bank, designed on the DFT bin grid.
//
// Band centers are octave spaced, f_c(m) = base * 2^m.  The DFT design grid
// has resolution f_t = f_c(0)/2, so the filter length N = f_s / f_t must come
// out an even integer (the overlap-add hop is N/2).  Each filter is built by
// setting its passband bins to 1 in a conjugate-symmetric DFT mask, inverse
// transforming, and circularly shifting by N/2, which yields linear-phase
// taps with even symmetry about N/2 and a group delay of N/2 samples.
//
// Every bin from 1 to N/2 belongs to exactly one band (DC is excluded), so
// the bank sums to an N/2-delayed unit impulse minus a 1/N DC leak.

struct FilterBankSpec {
  double sample_rate_hz = 24000.0;
  int num_bands = 6;
  double base_center_hz = 250.0;  // center of the lowest band
  double min_freq_hz = 20.0;      // lower edge of the lowest band
};

struct BandSpec {
  int band = 0;
  double center_hz = 0.0;
  double lo_hz = 0.0;  // inclusive for band 0, exclusive above
  double hi_hz = 0.0;  // inclusive
};

struct FirFilter {
  int band = 0;
  double dft_resolution_hz = 0.0;
  int bin_lo = 0;  // first passband DFT bin
  int bin_hi = 0;  // last passband DFT bin (may be N/2, the Nyquist bin)
  std::vector<double> taps;  // length N, symmetric about N/2
};

inline double dft_resolution_hz(const FilterBankSpec& spec) {
  return spec.base_center_hz / 2.0;
}

inline double center_frequency(const FilterBankSpec& spec, int band) {
  if (band < 0 || band >= spec.num_bands) {
    throw ConfigError("band index " + std::to_string(band) +
                      " out of range [0, " + std::to_string(spec.num_bands) +
                      ")");
  }
  return spec.base_center_hz * std::pow(2.0, band);
}

// Filter length N = f_s / f_t.  The overlap-add hop is N/2, so N must be an
// even positive integer; anything else is a spec error.
inline int filter_length(const FilterBankSpec& spec) {
  const double ft = dft_resolution_hz(spec);
  if (!(spec.sample_rate_hz > 0.0) || !(ft > 0.0)) {
    throw ConfigError("sample rate and base center frequency must be positive");
  }
  const double n_real = spec.sample_rate_hz / ft;
  const double n_round = std::round(n_real);
  if (std::abs(n_real - n_round) > 1e-9 * n_real) {
    throw ConfigError("filter length f_s/f_t = " + std::to_string(n_real) +
                      " is not an integer; pick a sample rate divisible by " +
                      std::to_string(ft) + " Hz");
  }
  const int n = static_cast<int>(n_round);
  if (n <= 0 || n % 2 != 0) {
    throw ConfigError("filter length " + std::to_string(n) +
                      " must be even and positive (hop is N/2)");
  }
  return n;
}

inline BandSpec band_limits(const FilterBankSpec& spec, int band) {
  const double fc = center_frequency(spec, band);  // validates band
  BandSpec b;
  b.band = band;
  b.center_hz = fc;
  b.hi_hz = 1.5 * fc;  // f_c + f_t scaled up the octaves
  b.lo_hz = (band == 0) ? spec.min_freq_hz
                        : 1.5 * center_frequency(spec, band - 1);
  return b;
}

inline void validate(const FilterBankSpec& spec) {
  if (spec.num_bands < 1) {
    throw ConfigError("need at least one band");
  }
  if (!(spec.min_freq_hz > 0.0) || spec.min_freq_hz >= spec.base_center_hz) {
    throw ConfigError("min_freq_hz must lie in (0, base_center_hz)");
  }
  filter_length(spec);  // integral, even
  const BandSpec top = band_limits(spec, spec.num_bands - 1);
  if (top.hi_hz > spec.sample_rate_hz / 2.0) {
    throw ConfigError("top band edge " + std::to_string(top.hi_hz) +
                      " Hz exceeds Nyquist " +
                      std::to_string(spec.sample_rate_hz / 2.0) +
                      " Hz; reduce num_bands or raise the sample rate");
  }
}

namespace detail {

// Passband bin range for one band.  Edges are quantized to the bin grid; the
// lower edge is inclusive for band 0 and exclusive above, which hands each
// bin in [1, N/2] to exactly one band.  Computed per band from the shared
// edge expressions, so adjacent ranges tile without coordination.
inline std::pair<int, int> passband_bins(const FilterBankSpec& spec, int band) {
  const double ft = dft_resolution_hz(spec);
  const BandSpec b = band_limits(spec, band);
  const int half = filter_length(spec) / 2;
  int k_hi = static_cast<int>(std::floor(b.hi_hz / ft + 1e-9));
  if (k_hi > half) k_hi = half;
  int k_lo;
  if (band == 0) {
    k_lo = static_cast<int>(std::ceil(b.lo_hz / ft - 1e-9));
    if (k_lo < 1) k_lo = 1;  // DC stays out of every band
  } else {
    k_lo = static_cast<int>(std::floor(b.lo_hz / ft + 1e-9)) + 1;
  }
  return {k_lo, k_hi};
}

}  // namespace detail

// Design one band's FIR filter.  The taps realize a zero-one magnitude
// response on the bin grid with linear phase: taps[N/2 + k] == taps[N/2 - k].
inline FirFilter design_band_filter(const FilterBankSpec& spec, int band) {
  validate(spec);
  const int n = filter_length(spec);
  const int half = n / 2;
  const BandSpec b = band_limits(spec, band);
  if (b.hi_hz > spec.sample_rate_hz / 2.0) {
    throw ConfigError("band " + std::to_string(band) +
                      " upper edge exceeds Nyquist");
  }
  const auto [k_lo, k_hi] = detail::passband_bins(spec, band);

  // Inverse DFT of the conjugate-symmetric mask.  Bins below N/2 contribute
  // a mirrored pair, the Nyquist bin contributes once.
  std::vector<double> h0(static_cast<std::size_t>(n), 0.0);
  const double w0 = 2.0 * std::numbers::pi / n;
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int k = k_lo; k <= k_hi; ++k) {
      const double c = std::cos(w0 * k * i);
      acc += (k < half) ? 2.0 * c : c;
    }
    h0[static_cast<std::size_t>(i)] = acc / n;
  }

  FirFilter f;
  f.band = band;
  f.dft_resolution_hz = dft_resolution_hz(spec);
  f.bin_lo = k_lo;
  f.bin_hi = k_hi;
  f.taps.resize(static_cast<std::size_t>(n));
  // Circular shift by N/2 turns the zero-phase response causal.
  for (int i = 0; i < n; ++i) {
    f.taps[static_cast<std::size_t>(i)] =
        h0[static_cast<std::size_t>((i + half) % n)];
  }
  return f;
}

struct FilterBank {
  FilterBankSpec spec;
  std::vector<BandSpec> bands;
  std::vector<FirFilter> filters;
  int length = 0;  // N
  int num_bands() const { return static_cast<int>(filters.size()); }
};

inline FilterBank design_filter_bank(const FilterBankSpec& spec) {
  validate(spec);
  FilterBank bank;
  bank.spec = spec;
  bank.length = filter_length(spec);
  bank.bands.reserve(static_cast<std::size_t>(spec.num_bands));
  bank.filters.reserve(static_cast<std::size_t>(spec.num_bands));
  for (int m = 0; m < spec.num_bands; ++m) {
    bank.bands.push_back(band_limits(spec, m));
    bank.filters.push_back(design_band_filter(spec, m));
  }
  return bank;
}

// Realized magnitude per design bin k in [0, N/2]; equals the mask up to
// rounding error.
inline std::vector<double> magnitude_response(const FirFilter& f) {
  const int n = static_cast<int>(f.taps.size());
  const int half = n / 2;
  std::vector<double> mag(static_cast<std::size_t>(half) + 1, 0.0);
  const double w0 = 2.0 * std::numbers::pi / n;
  for (int k = 0; k <= half; ++k) {
    double re = 0.0, im = 0.0;
    for (int i = 0; i < n; ++i) {
      const double ang = w0 * k * i;
      re += f.taps[static_cast<std::size_t>(i)] * std::cos(ang);
      im -= f.taps[static_cast<std::size_t>(i)] * std::sin(ang);
    }
    mag[static_cast<std::size_t>(k)] = std::hypot(re, im);
  }
  return mag;
}

// Streaming linear convolution against one band filter.  Keeps the last
// N-1 input samples across calls; output sample t depends on inputs
// (t-N+1 .. t), so the stream carries the filter's N/2 group delay.
class FirStream {
 public:
  explicit FirStream(const FirFilter& filter)
      : taps_rev_(filter.taps.rbegin(), filter.taps.rend()),
        hist_(taps_rev_.size() - 1, 0.0) {}

  std::size_t history_size() const { return hist_.size(); }

  // out.size() must equal in.size(); in-place aliasing is not supported.
  void process(std::span<const double> in, std::span<double> out) {
    if (out.size() != in.size()) {
      throw DataError("FirStream: output span size must match input");
    }
    const std::size_t h = hist_.size();  // N - 1
    scratch_.resize(h + in.size());
    std::copy(hist_.begin(), hist_.end(), scratch_.begin());
    std::copy(in.begin(), in.end(), scratch_.begin() + static_cast<std::ptrdiff_t>(h));
    const std::size_t n = taps_rev_.size();
    for (std::size_t t = 0; t < in.size(); ++t) {
      double acc = 0.0;
      const double* x = scratch_.data() + t;
      for (std::size_t j = 0; j < n; ++j) {
        acc += taps_rev_[j] * x[j];
      }
      out[t] = acc;
    }
    if (in.size() >= h) {
      std::copy(scratch_.end() - static_cast<std::ptrdiff_t>(h),
                scratch_.end(), hist_.begin());
    } else {
      hist_.erase(hist_.begin(),
                  hist_.begin() + static_cast<std::ptrdiff_t>(in.size()));
      hist_.insert(hist_.end(), in.begin(), in.end());
    }
  }

  std::vector<double> process(const std::vector<double>& in) {
    std::vector<double> out(in.size());
    process(std::span<const double>(in), std::span<double>(out));
    return out;
  }

  void reset() { std::fill(hist_.begin(), hist_.end(), 0.0); }

 private:
  std::vector<double> taps_rev_;  // taps reversed, so the kernel is a forward dot
  std::vector<double> hist_;      // most recent N-1 inputs, oldest first
  std::vector<double> scratch_;
};

}  // namespace hacore
