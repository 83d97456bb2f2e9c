// src/perturb.cpp

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

#include "hereval/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <random>
#include <vector>

#include <fftw3.h>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "hereval/error.hpp"
#include "hereval/kernels.hpp"

namespace hereval::perturb {
namespace {

using cplx = std::complex<double>;

// FFTW planning is not thread-safe; execution on distinct buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n) {
    time_ = fftw_alloc_real(n);
    freq_ = fftw_alloc_complex(n / 2 + 1);
    std::lock_guard lock(planner_mutex());
    forward_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), time_, freq_, FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft_c2r_1d(static_cast<int>(n), freq_, time_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(inverse_);
    fftw_free(time_);
    fftw_free(freq_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  void forward(std::span<const double> in, std::vector<cplx>& out) {
    std::copy(in.begin(), in.end(), time_);
    fftw_execute(forward_);
    out.resize(n_ / 2 + 1);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = {freq_[k][0], freq_[k][1]};
  }

  /// Unnormalized inverse, divided by n here.
  void inverse(const std::vector<cplx>& in, std::vector<double>& out) {
    for (std::size_t k = 0; k < in.size(); ++k) {
      freq_[k][0] = in[k].real();
      freq_[k][1] = in[k].imag();
    }
    fftw_execute(inverse_);
    out.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = time_[i] / static_cast<double>(n_);
  }

 private:
  std::size_t n_;
  double* time_;
  fftw_complex* freq_;
  fftw_plan forward_;
  fftw_plan inverse_;
};

std::vector<double> hann(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n);
  return w;
}

void clamp_unit(std::vector<float>& x) {
  for (float& v : x) v = std::clamp(v, -1.0f, 1.0f);
}

std::vector<float> to_float(const std::vector<double>& x) {
  return std::vector<float>(x.begin(), x.end());
}

double wrap_phase(double p) {
  return p - 2.0 * std::numbers::pi * std::round(p / (2.0 * std::numbers::pi));
}

/// STFT frames of the zero-padded (centered) signal.
std::vector<std::vector<cplx>> stft(const std::vector<float>& x, RealFft& fft, const std::vector<double>& window) {
  const std::size_t pad = kFrameSize / 2;
  std::vector<double> padded(x.size() + kFrameSize, 0.0);
  std::copy(x.begin(), x.end(), padded.begin() + pad);
  const std::size_t n_frames = 1 + (padded.size() - kFrameSize) / kHopSize;
  std::vector<std::vector<cplx>> frames(n_frames);
  std::vector<double> buf(kFrameSize);
  for (std::size_t t = 0; t < n_frames; ++t) {
    for (std::size_t i = 0; i < kFrameSize; ++i) buf[i] = padded[t * kHopSize + i] * window[i];
    fft.forward(buf, frames[t]);
  }
  return frames;
}

std::vector<double> istft(const std::vector<std::vector<cplx>>& frames, RealFft& fft,
                          const std::vector<double>& window, std::size_t length) {
  const std::size_t pad = kFrameSize / 2;
  const std::size_t total = (frames.empty() ? 0 : (frames.size() - 1) * kHopSize) + kFrameSize;
  std::vector<double> out(total, 0.0), norm(total, 0.0), buf;
  for (std::size_t t = 0; t < frames.size(); ++t) {
    fft.inverse(frames[t], buf);
    for (std::size_t i = 0; i < kFrameSize; ++i) {
      out[t * kHopSize + i] += buf[i] * window[i];
      norm[t * kHopSize + i] += window[i] * window[i];
    }
  }
  std::vector<double> y(length, 0.0);
  for (std::size_t n = 0; n < length && n + pad < total; ++n) {
    const double w = norm[n + pad];
    y[n] = w > 1e-8 ? out[n + pad] / w : 0.0;
  }
  return y;
}

std::vector<double> vocoder_stretch(const std::vector<float>& x, double rate) {
  RealFft fft(kFrameSize);
  const auto window = hann(kFrameSize);
  auto frames = stft(x, fft, window);
  const std::size_t bins = kFrameSize / 2 + 1;
  const std::size_t n_frames = frames.size();
  frames.emplace_back(bins, cplx{0.0, 0.0});

  std::vector<double> advance(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    advance[k] = 2.0 * std::numbers::pi * static_cast<double>(kHopSize) * k / kFrameSize;
  }
  std::vector<double> phase(bins);
  for (std::size_t k = 0; k < bins; ++k) phase[k] = std::arg(frames[0][k]);

  std::vector<std::vector<cplx>> out;
  for (double step = 0.0; step < static_cast<double>(n_frames); step += rate) {
    const auto left = static_cast<std::size_t>(step);
    const double alpha = step - static_cast<double>(left);
    const auto& a = frames[left];
    const auto& b = frames[left + 1];
    std::vector<cplx> frame(bins);
    for (std::size_t k = 0; k < bins; ++k) {
      const double mag = (1.0 - alpha) * std::abs(a[k]) + alpha * std::abs(b[k]);
      frame[k] = std::polar(mag, phase[k]);
      const double delta = wrap_phase(std::arg(b[k]) - std::arg(a[k]) - advance[k]);
      phase[k] += advance[k] + delta;
    }
    out.push_back(std::move(frame));
  }
  const auto length = static_cast<std::size_t>(std::max(1.0, std::round(x.size() / rate)));
  return istft(out, fft, window, length);
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ValidationError(msg);
}

std::vector<float> scaled_mix(const std::vector<float>& signal, const std::vector<double>& noise, double snr_db,
                              const char* what) {
  const double p_signal = audio::mean_power(signal);
  require(p_signal > 0.0, fmt::format("{}: input has zero signal power", what));
  double p_noise = 0.0;
  for (double v : noise) p_noise += v * v;
  p_noise /= static_cast<double>(noise.size());
  require(p_noise > 0.0, fmt::format("{}: noise has zero power", what));
  const double scale = std::sqrt(p_signal / std::pow(10.0, snr_db / 10.0) / p_noise);
  std::vector<float> out(signal.size());
  for (std::size_t i = 0; i < signal.size(); ++i) {
    out[i] = static_cast<float>(signal[i] + scale * noise[i]);
  }
  clamp_unit(out);
  return out;
}

}  // namespace

AudioBuffer add_white_noise(const AudioBuffer& audio, double snr_db, std::uint64_t seed) {
  audio.validate();
  require(!std::isnan(snr_db) && snr_db != -kNoNoise, "white_noise: snr_db must be finite or +inf");
  if (snr_db == kNoNoise) return audio;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> noise(audio.samples.size());
  for (double& v : noise) v = gauss(rng);
  return {audio.sample_rate, scaled_mix(audio.samples, noise, snr_db, "white_noise")};
}

AudioBuffer time_stretch(const AudioBuffer& audio, double rate) {
  audio.validate();
  require(rate > 0.25 && rate < 4.0, fmt::format("time_stretch: rate {} outside (0.25, 4)", rate));
  AudioBuffer out{audio.sample_rate, to_float(vocoder_stretch(audio.samples, rate))};
  clamp_unit(out.samples);
  return out;
}

AudioBuffer pitch_shift(const AudioBuffer& audio, double semitones) {
  audio.validate();
  require(semitones >= -12.0 && semitones <= 12.0,
          fmt::format("pitch_shift: {} semitones outside [-12, 12]", semitones));
  const double factor = std::pow(2.0, semitones / 12.0);
  const auto stretched = vocoder_stretch(audio.samples, 1.0 / factor);
  AudioBuffer out;
  out.sample_rate = audio.sample_rate;
  out.samples.resize(audio.samples.size());
  const std::size_t last = stretched.size() - 1;
  for (std::size_t n = 0; n < out.samples.size(); ++n) {
    const double t = static_cast<double>(n) * factor;
    const auto i = std::min(static_cast<std::size_t>(t), last);
    const auto j = std::min(i + 1, last);
    const double frac = std::min(t - static_cast<double>(i), 1.0);
    out.samples[n] = static_cast<float>(stretched[i] * (1.0 - frac) + stretched[j] * frac);
  }
  clamp_unit(out.samples);
  return out;
}

AudioBuffer echo(const AudioBuffer& audio, double delay_ms, double decay) {
  audio.validate();
  require(delay_ms >= 0.0 && std::isfinite(delay_ms), "echo: delay_ms must be >= 0");
  require(decay >= 0.0 && decay < 1.0, fmt::format("echo: decay {} outside [0, 1)", decay));
  const auto delay = static_cast<std::size_t>(std::lround(delay_ms * audio.sample_rate / 1000.0));
  AudioBuffer out = audio;
  if (decay == 0.0) return out;
  for (std::size_t n = delay; n < out.samples.size(); ++n) {
    out.samples[n] = static_cast<float>(audio.samples[n] + decay * audio.samples[n - delay]);
  }
  clamp_unit(out.samples);
  return out;
}

AudioBuffer reverb(const AudioBuffer& audio, const AudioBuffer& impulse_response, double max_ir_seconds) {
  audio.validate();
  impulse_response.validate();
  const AudioBuffer ir = audio::resample_linear(impulse_response, audio.sample_rate);
  require(ir.duration_seconds() <= max_ir_seconds,
          fmt::format("reverb: impulse response is {:.2f} s, cap is {:.2f} s", ir.duration_seconds(), max_ir_seconds));
  const auto wet = kernels::omp::convolve_head(audio.samples, ir.samples);
  double p = 0.0;
  for (double v : wet) p += v * v;
  p /= static_cast<double>(wet.size());
  require(p > 0.0, "reverb: output is silent");
  const double gain = audio::rms(audio.samples) / std::sqrt(p);
  AudioBuffer out;
  out.sample_rate = audio.sample_rate;
  out.samples.resize(wet.size());
  for (std::size_t i = 0; i < wet.size(); ++i) out.samples[i] = static_cast<float>(wet[i] * gain);
  clamp_unit(out.samples);
  return out;
}

AudioBuffer distortion(const AudioBuffer& audio, double clip_gain) {
  audio.validate();
  require(clip_gain > 0.0 && std::isfinite(clip_gain), "distortion: clip_gain must be > 0");
  AudioBuffer out = audio;
  for (float& v : out.samples) v = static_cast<float>(std::clamp(clip_gain * v, -1.0, 1.0));
  return out;
}

AudioBuffer background_mix(const AudioBuffer& audio, const AudioBuffer& background, double snr_db, bool loop) {
  audio.validate();
  background.validate();
  require(std::isfinite(snr_db), "background_mix: snr_db must be finite");
  const AudioBuffer bg = audio::resample_linear(background, audio.sample_rate);
  require(loop || bg.samples.size() >= audio.samples.size(),
          fmt::format("background_mix: background is {:.2f} s but input is {:.2f} s (set loop to tile it)",
                      bg.duration_seconds(), audio.duration_seconds()));
  std::vector<double> noise(audio.samples.size());
  for (std::size_t i = 0; i < noise.size(); ++i) noise[i] = bg.samples[i % bg.samples.size()];
  return {audio.sample_rate, scaled_mix(audio.samples, noise, snr_db, "background_mix")};
}

double measured_snr_db(const AudioBuffer& clean, const AudioBuffer& noisy) {
  require(clean.samples.size() == noisy.samples.size(), "measured_snr_db: length mismatch");
  double ps = 0.0, pn = 0.0;
  for (std::size_t i = 0; i < clean.samples.size(); ++i) {
    const double d = static_cast<double>(noisy.samples[i]) - clean.samples[i];
    ps += static_cast<double>(clean.samples[i]) * clean.samples[i];
    pn += d * d;
  }
  if (pn == 0.0) return kNoNoise;
  return 10.0 * std::log10(ps / pn);
}

std::string_view to_string(Kind kind) {
  switch (kind) {
    case Kind::WhiteNoise: return "white_noise";
    case Kind::TimeStretch: return "time_stretch";
    case Kind::PitchShift: return "pitch_shift";
    case Kind::Echo: return "echo";
    case Kind::Reverb: return "reverb";
    case Kind::Distortion: return "distortion";
    case Kind::BackgroundMix: return "background_mix";
  }
  return "";
}

std::optional<Kind> parse_kind(std::string_view text) {
  for (Kind k : {Kind::WhiteNoise, Kind::TimeStretch, Kind::PitchShift, Kind::Echo, Kind::Reverb, Kind::Distortion,
                 Kind::BackgroundMix}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

void PerturbSpec::validate() const {
  switch (kind) {
    case Kind::WhiteNoise:
      require(!std::isnan(snr_db) && snr_db != -kNoNoise, "white_noise: snr_db must be finite or +inf");
      break;
    case Kind::TimeStretch:
      require(stretch_rate > 0.25 && stretch_rate < 4.0, "time_stretch: rate outside (0.25, 4)");
      break;
    case Kind::PitchShift:
      require(semitones >= -12.0 && semitones <= 12.0, "pitch_shift: semitones outside [-12, 12]");
      break;
    case Kind::Echo:
      require(delay_ms >= 0.0 && std::isfinite(delay_ms), "echo: delay_ms must be >= 0");
      require(decay >= 0.0 && decay < 1.0, "echo: decay outside [0, 1)");
      break;
    case Kind::Reverb:
      require(!impulse_response.empty(), "reverb: impulse response file required");
      require(max_ir_seconds > 0.0, "reverb: IR cap must be positive");
      break;
    case Kind::Distortion:
      require(clip_gain > 0.0 && std::isfinite(clip_gain), "distortion: clip_gain must be > 0");
      break;
    case Kind::BackgroundMix:
      require(!background.empty(), "background_mix: background file required");
      require(std::isfinite(snr_db), "background_mix: snr_db must be finite");
      break;
  }
}

std::string PerturbSpec::to_json() const {
  nlohmann::ordered_json j;
  j["kind"] = std::string(to_string(kind));
  switch (kind) {
    case Kind::WhiteNoise:
      if (std::isinf(snr_db)) {
        j["snr_db"] = "inf";
      } else {
        j["snr_db"] = snr_db;
      }
      break;
    case Kind::TimeStretch: j["rate"] = stretch_rate; break;
    case Kind::PitchShift: j["semitones"] = semitones; break;
    case Kind::Echo:
      j["delay_ms"] = delay_ms;
      j["decay"] = decay;
      break;
    case Kind::Reverb:
      j["impulse_response"] = impulse_response;
      j["max_ir_seconds"] = max_ir_seconds;
      break;
    case Kind::Distortion: j["clip_gain"] = clip_gain; break;
    case Kind::BackgroundMix:
      j["background"] = background;
      j["snr_db"] = snr_db;
      j["loop"] = loop;
      break;
  }
  return j.dump();
}

AudioBuffer apply(const PerturbSpec& spec, const AudioBuffer& audio, const AudioBuffer* resource) {
  spec.validate();
  switch (spec.kind) {
    case Kind::WhiteNoise: return add_white_noise(audio, spec.snr_db, spec.seed);
    case Kind::TimeStretch: return time_stretch(audio, spec.stretch_rate);
    case Kind::PitchShift: return pitch_shift(audio, spec.semitones);
    case Kind::Echo: return echo(audio, spec.delay_ms, spec.decay);
    case Kind::Distortion: return distortion(audio, spec.clip_gain);
    case Kind::Reverb:
      require(resource != nullptr, "reverb: impulse response not loaded");
      return reverb(audio, *resource, spec.max_ir_seconds);
    case Kind::BackgroundMix:
      require(resource != nullptr, "background_mix: background not loaded");
      return background_mix(audio, *resource, spec.snr_db, spec.loop);
  }
  throw ValidationError("unknown perturbation kind");
}

}  // namespace hereval::perturb
