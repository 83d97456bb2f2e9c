// tests/test_audio.cpp

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

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "hereval/audio.hpp"
#include "hereval/error.hpp"

using namespace hereval;
namespace fs = std::filesystem;

namespace {

audio::AudioBuffer sine(double hz, double seconds, int rate = 16000, double amp = 0.5) {
  audio::AudioBuffer a;
  a.sample_rate = rate;
  a.samples.resize(static_cast<std::size_t>(seconds * rate));
  for (std::size_t n = 0; n < a.samples.size(); ++n) {
    a.samples[n] = static_cast<float>(amp * std::sin(2.0 * M_PI * hz * static_cast<double>(n) / rate));
  }
  return a;
}

void put_u16(std::ofstream& o, std::uint16_t v) { o.write(reinterpret_cast<const char*>(&v), 2); }
void put_u32(std::ofstream& o, std::uint32_t v) { o.write(reinterpret_cast<const char*>(&v), 4); }

}  // namespace

TEST_CASE("wav round trip") {
  const auto dir = fs::temp_directory_path() / "hereval_test_audio";
  fs::create_directories(dir);
  const auto a = sine(440, 0.25);

  audio::write_wav(dir / "f32.wav", a, audio::WavFormat::Float32);
  const auto f = audio::read_wav(dir / "f32.wav");
  CHECK(f.sample_rate == 16000);
  CHECK(f.samples == a.samples);

  audio::write_wav(dir / "pcm.wav", a, audio::WavFormat::Pcm16);
  const auto p = audio::read_wav(dir / "pcm.wav");
  REQUIRE(p.samples.size() == a.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) CHECK(std::abs(p.samples[i] - a.samples[i]) < 1.0 / 32767.0);
  fs::remove_all(dir);
}

TEST_CASE("stereo pcm16 is downmixed by averaging") {
  const auto dir = fs::temp_directory_path() / "hereval_test_audio_stereo";
  fs::create_directories(dir);
  const auto path = dir / "st.wav";
  {
    std::ofstream o(path, std::ios::binary);
    const std::int16_t frames[] = {16384, 0, -16384, -16384};
    o.write("RIFF", 4);
    put_u32(o, 36 + sizeof(frames));
    o.write("WAVEfmt ", 8);
    put_u32(o, 16);
    put_u16(o, 1);
    put_u16(o, 2);
    put_u32(o, 8000);
    put_u32(o, 8000 * 4);
    put_u16(o, 4);
    put_u16(o, 16);
    o.write("data", 4);
    put_u32(o, sizeof(frames));
    o.write(reinterpret_cast<const char*>(frames), sizeof(frames));
  }
  const auto a = audio::read_wav(path);
  CHECK(a.sample_rate == 8000);
  REQUIRE(a.samples.size() == 2);
  CHECK(a.samples[0] == doctest::Approx(0.25).epsilon(1e-3));
  CHECK(a.samples[1] == doctest::Approx(-0.5).epsilon(1e-3));
  fs::remove_all(dir);
}

TEST_CASE("bad wav input") {
  const auto dir = fs::temp_directory_path() / "hereval_test_audio_bad";
  fs::create_directories(dir);
  std::ofstream(dir / "junk.wav") << "not a wav file at all";
  CHECK_THROWS_AS(audio::read_wav(dir / "junk.wav"), ValidationError);
  CHECK_THROWS_AS(audio::read_wav(dir / "missing.wav"), ValidationError);
  fs::remove_all(dir);
}

TEST_CASE("linear resampling") {
  const auto a = sine(100, 1.0, 8000);
  const auto b = audio::resample_linear(a, 16000);
  CHECK(b.sample_rate == 16000);
  CHECK(std::abs(static_cast<long>(b.samples.size()) - 16000) <= 1);
  CHECK(audio::rms(b.samples) == doctest::Approx(audio::rms(a.samples)).epsilon(0.01));
  CHECK(audio::resample_linear(a, 8000).samples == a.samples);
}

TEST_CASE("power helpers") {
  CHECK(audio::mean_power({1.0f, -1.0f}) == 1.0);
  CHECK(audio::rms({0.5f, -0.5f, 0.5f, -0.5f}) == doctest::Approx(0.5));
  audio::AudioBuffer empty;
  CHECK_THROWS_AS(empty.validate(), ValidationError);
}
