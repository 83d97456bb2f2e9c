// include/hereval/audio.hpp

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

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace hereval::audio {

/// Mono PCM samples in [-1, 1] at a fixed rate.
struct AudioBuffer {
  int sample_rate = 16000;
  std::vector<float> samples;

  double duration_seconds() const { return static_cast<double>(samples.size()) / sample_rate; }
  /// Throws ValidationError for a non-positive rate, no samples, or
  /// non-finite values.
  void validate() const;
};

double mean_power(const std::vector<float>& x);
double rms(const std::vector<float>& x);

enum class WavFormat { Pcm16, Float32 };

/// Reads PCM 8/16/24/32-bit or IEEE float WAV; multi-channel input is
/// downmixed by averaging channels.
AudioBuffer read_wav(const std::filesystem::path& path);
void write_wav(const std::filesystem::path& path, const AudioBuffer& audio, WavFormat format = WavFormat::Float32);

/// Linear-interpolation resampling to `target_rate`.
AudioBuffer resample_linear(const AudioBuffer& audio, int target_rate);

}  // namespace hereval::audio
