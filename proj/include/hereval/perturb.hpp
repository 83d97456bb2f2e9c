// include/hereval/perturb.hpp

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
#include <limits>
#include <optional>
#include <string>
#include <string_view>

#include "hereval/audio.hpp"

namespace hereval::perturb {

using audio::AudioBuffer;

// Phase vocoder geometry shared by time_stretch and pitch_shift.
inline constexpr std::size_t kFrameSize = 2048;
inline constexpr std::size_t kHopSize = kFrameSize / 4;

inline constexpr double kNoNoise = std::numeric_limits<double>::infinity();

/// Gaussian noise scaled so that 10*log10(P_signal / P_noise) == snr_db, then
/// clamped to [-1, 1]. snr_db == +inf returns the input unchanged.
AudioBuffer add_white_noise(const AudioBuffer& audio, double snr_db, std::uint64_t seed);

/// Phase-vocoder stretch; output has round(n / rate) samples and the same
/// pitch. rate must lie in (0.25, 4).
AudioBuffer time_stretch(const AudioBuffer& audio, double rate);

/// Stretch by 2^(-semitones/12) then resample back to the input length.
/// semitones must lie in [-12, 12].
AudioBuffer pitch_shift(const AudioBuffer& audio, double semitones);

/// y[n] = x[n] + decay * x[n - delay], clamped. decay in [0, 1).
AudioBuffer echo(const AudioBuffer& audio, double delay_ms, double decay);

inline constexpr double kDefaultMaxImpulseSeconds = 10.0;

/// Convolution with `impulse_response` truncated to the input length and
/// rescaled to the input RMS. The IR is resampled to the input rate first.
AudioBuffer reverb(const AudioBuffer& audio, const AudioBuffer& impulse_response,
                   double max_ir_seconds = kDefaultMaxImpulseSeconds);

/// Hard clip of gain * x to [-1, 1]. clip_gain > 0.
AudioBuffer distortion(const AudioBuffer& audio, double clip_gain);

/// Additive mix of `background` scaled to the requested SNR. The background
/// is resampled to the input rate, looped when `loop` is set and it is too
/// short (otherwise that is an error), and truncated to the input length.
AudioBuffer background_mix(const AudioBuffer& audio, const AudioBuffer& background, double snr_db,
                           bool loop = false);

/// 10*log10(P(clean) / P(noisy - clean)).
double measured_snr_db(const AudioBuffer& clean, const AudioBuffer& noisy);

enum class Kind { WhiteNoise, TimeStretch, PitchShift, Echo, Reverb, Distortion, BackgroundMix };

std::string_view to_string(Kind kind);
std::optional<Kind> parse_kind(std::string_view text);

/// A fully specified perturbation. Only the fields relevant to `kind` are
/// read; file references are loaded by the caller.
struct PerturbSpec {
  Kind kind = Kind::WhiteNoise;
  double snr_db = 10.0;
  double stretch_rate = 1.0;
  double semitones = 0.0;
  double delay_ms = 250.0;
  double decay = 0.5;
  double clip_gain = 4.0;
  std::string impulse_response;
  std::string background;
  bool loop = false;
  double max_ir_seconds = kDefaultMaxImpulseSeconds;
  std::uint64_t seed = 0;

  /// Throws ValidationError when a parameter is outside its valid range.
  void validate() const;
  std::string to_json() const;
};

/// Apply `spec`. `resource` carries the loaded impulse response or background
/// for the kinds that need one.
AudioBuffer apply(const PerturbSpec& spec, const AudioBuffer& audio, const AudioBuffer* resource = nullptr);

}  // namespace hereval::perturb
