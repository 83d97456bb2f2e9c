// src/audio.cpp

// Copyright 2026  hereval authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "hereval/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include <fmt/format.h>

#include "hereval/error.hpp"

namespace hereval::audio {
namespace {

std::uint16_t read_u16(const unsigned char* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>(v >> 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

}  // namespace

void AudioBuffer::validate() const {
  if (sample_rate <= 0) throw ValidationError("audio: sample rate must be positive");
  if (samples.empty()) throw ValidationError("audio: no samples");
  for (float s : samples) {
    if (!std::isfinite(s)) throw ValidationError("audio: non-finite sample");
  }
}

double mean_power(const std::vector<float>& x) {
  if (x.empty()) return 0.0;
  double s = 0.0;
  for (float v : x) s += static_cast<double>(v) * v;
  return s / static_cast<double>(x.size());
}

double rms(const std::vector<float>& x) { return std::sqrt(mean_power(x)); }

AudioBuffer read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto fail = [&](const std::string& why) { return ValidationError(path.string() + ": " + why); };
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw fail("not a RIFF/WAVE file");
  }

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t size = read_u32(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t avail = std::min<std::size_t>(size, bytes.size() - body);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (avail < 16) throw fail("short fmt chunk");
      format = read_u16(chunk + 8);
      channels = read_u16(chunk + 10);
      rate = read_u32(chunk + 12);
      bits = read_u16(chunk + 22);
      if (format == 0xFFFE && avail >= 26) format = read_u16(chunk + 32);
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = avail;
    }
    pos = body + size + (size & 1);
  }
  if (format == 0) throw fail("missing fmt chunk");
  if (!data) throw fail("missing data chunk");
  if (channels == 0 || rate == 0) throw fail("bad channel count or sample rate");
  const bool is_float = format == 3;
  if (!(format == 1 || is_float)) throw fail(fmt::format("unsupported format tag {}", format));
  if (is_float ? !(bits == 32 || bits == 64) : !(bits == 8 || bits == 16 || bits == 24 || bits == 32)) {
    throw fail(fmt::format("unsupported bit depth {}", bits));
  }

  const std::size_t width = bits / 8;
  const std::size_t frames = data_size / (width * channels);
  AudioBuffer out;
  out.sample_rate = static_cast<int>(rate);
  out.samples.resize(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    double acc = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      const unsigned char* p = data + (f * channels + c) * width;
      double v = 0.0;
      if (is_float && bits == 32) {
        float x;
        std::uint32_t u = read_u32(p);
        std::memcpy(&x, &u, 4);
        v = x;
      } else if (is_float) {
        std::uint64_t u = read_u32(p) | (static_cast<std::uint64_t>(read_u32(p + 4)) << 32);
        double x;
        std::memcpy(&x, &u, 8);
        v = x;
      } else if (bits == 8) {
        v = (static_cast<int>(p[0]) - 128) / 128.0;
      } else if (bits == 16) {
        v = static_cast<std::int16_t>(read_u16(p)) / 32768.0;
      } else if (bits == 24) {
        std::int32_t s = p[0] | (p[1] << 8) | (p[2] << 16);
        if (s & 0x800000) s |= ~0xFFFFFF;
        v = s / 8388608.0;
      } else {
        v = static_cast<std::int32_t>(read_u32(p)) / 2147483648.0;
      }
      acc += v;
    }
    out.samples[f] = static_cast<float>(std::clamp(acc / channels, -1.0, 1.0));
  }
  return out;
}

void write_wav(const std::filesystem::path& path, const AudioBuffer& audio, WavFormat format) {
  const bool is_float = format == WavFormat::Float32;
  const std::uint16_t bits = is_float ? 32 : 16;
  const std::uint32_t data_size = static_cast<std::uint32_t>(audio.samples.size() * (bits / 8));
  std::string out;
  out.reserve(44 + data_size);
  out += "RIFF";
  put_u32(out, 36 + data_size);
  out += "WAVEfmt ";
  put_u32(out, 16);
  put_u16(out, is_float ? 3 : 1);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(audio.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(audio.sample_rate) * (bits / 8));
  put_u16(out, bits / 8);
  put_u16(out, bits);
  out += "data";
  put_u32(out, data_size);
  for (float s : audio.samples) {
    const float c = std::clamp(s, -1.0f, 1.0f);
    if (is_float) {
      std::uint32_t u;
      std::memcpy(&u, &c, 4);
      put_u32(out, u);
    } else {
      put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::lround(c * 32767.0f))));
    }
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw Error("write failed: " + path.string());
}

AudioBuffer resample_linear(const AudioBuffer& audio, int target_rate) {
  if (target_rate <= 0) throw ValidationError("resample: target rate must be positive");
  if (target_rate == audio.sample_rate || audio.samples.empty()) {
    AudioBuffer copy = audio;
    copy.sample_rate = target_rate;
    return copy;
  }
  const double step = static_cast<double>(audio.sample_rate) / target_rate;
  const auto n_out = static_cast<std::size_t>(
      std::max<double>(1.0, std::round(static_cast<double>(audio.samples.size()) / step)));
  AudioBuffer out;
  out.sample_rate = target_rate;
  out.samples.resize(n_out);
  const std::size_t last = audio.samples.size() - 1;
  for (std::size_t n = 0; n < n_out; ++n) {
    const double t = static_cast<double>(n) * step;
    const auto i = std::min(static_cast<std::size_t>(t), last);
    const auto j = std::min(i + 1, last);
    const double frac = t - static_cast<double>(i);
    out.samples[n] = static_cast<float>(audio.samples[i] * (1.0 - frac) + audio.samples[j] * frac);
  }
  return out;
}

}  // namespace hereval::audio
