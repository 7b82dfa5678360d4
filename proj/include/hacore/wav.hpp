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

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "hacore/errors.hpp"

namespace hacore {

// Minimal mono WAV I/O.  Reads 16-bit PCM and 32-bit IEEE float, writes
// 32-bit IEEE float.  Anything else (other widths, compressed formats,
// multichannel) is rejected rather than guessed at.

struct WavData {
  std::uint32_t sample_rate_hz = 0;
  std::vector<double> samples;
};

namespace detail {

inline std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void put_u16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>((v >> 8) & 0xff));
}

inline void put_u32(std::string& s, std::uint32_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>((v >> 8) & 0xff));
  s.push_back(static_cast<char>((v >> 16) & 0xff));
  s.push_back(static_cast<char>((v >> 24) & 0xff));
}

}  // namespace detail

inline WavData read_wav_mono(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read WAV file '" + path + "'");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw DataError("'" + path + "' is not a RIFF/WAVE file");
  }

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  const unsigned char* data = nullptr;
  std::uint32_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const char* id = reinterpret_cast<const char*>(bytes.data() + pos);
    const std::uint32_t size = detail::read_u32(bytes.data() + pos + 4);
    pos += 8;
    if (pos + size > bytes.size()) {
      throw DataError("'" + path + "' is truncated inside a chunk");
    }
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (size < 16) throw DataError("'" + path + "' has a malformed fmt chunk");
      format = detail::read_u16(bytes.data() + pos);
      channels = detail::read_u16(bytes.data() + pos + 2);
      rate = detail::read_u32(bytes.data() + pos + 4);
      bits = detail::read_u16(bytes.data() + pos + 14);
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      data = bytes.data() + pos;
      data_size = size;
    }
    pos += size + (size & 1);  // chunks are word aligned
  }
  if (!have_fmt || data == nullptr) {
    throw DataError("'" + path + "' lacks fmt or data chunks");
  }
  if (channels != 1) {
    throw DataError("'" + path + "' has " + std::to_string(channels) +
                    " channels; mono input required");
  }

  WavData wav;
  wav.sample_rate_hz = rate;
  if (format == 1 && bits == 16) {
    const std::size_t n = data_size / 2;
    wav.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::int16_t v =
          static_cast<std::int16_t>(detail::read_u16(data + 2 * i));
      wav.samples[i] = static_cast<double>(v) / 32768.0;
    }
  } else if (format == 3 && bits == 32) {
    const std::size_t n = data_size / 4;
    wav.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      wav.samples[i] = static_cast<double>(
          std::bit_cast<float>(detail::read_u32(data + 4 * i)));
    }
  } else {
    throw DataError("'" + path + "' uses format " + std::to_string(format) + "/" +
                    std::to_string(bits) +
                    " bit; only 16-bit PCM and 32-bit float are supported");
  }
  return wav;
}

inline void write_wav_mono_f32(const std::string& path,
                               const std::vector<double>& samples,
                               std::uint32_t sample_rate_hz) {
  std::string out;
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(samples.size() * 4);
  out.reserve(58 + data_bytes);
  out.append("RIFF");
  detail::put_u32(out, 4 + (8 + 18) + (8 + 4) + (8 + data_bytes));
  out.append("WAVE");
  // fmt: IEEE float needs the cbSize field and a fact chunk.
  out.append("fmt ");
  detail::put_u32(out, 18);
  detail::put_u16(out, 3);  // IEEE float
  detail::put_u16(out, 1);  // mono
  detail::put_u32(out, sample_rate_hz);
  detail::put_u32(out, sample_rate_hz * 4);
  detail::put_u16(out, 4);
  detail::put_u16(out, 32);
  detail::put_u16(out, 0);
  out.append("fact");
  detail::put_u32(out, 4);
  detail::put_u32(out, static_cast<std::uint32_t>(samples.size()));
  out.append("data");
  detail::put_u32(out, data_bytes);
  for (double v : samples) {
    detail::put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }

  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write WAV file '" + path + "'");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw DataError("failed writing WAV file '" + path + "'");
}

}  // namespace hacore
