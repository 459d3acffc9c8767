// Copyright 2026 The laughsense Authors.
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


// The 19 acoustic parameters computed per laughter episode: six F0
// statistics, F1/F2 means, spectral centre of gravity and peak frequency,
// voiced-frame percentage and HNR, five SPL statistics, duration and
// laughter rate.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "laughsense/audio.hpp"
#include "laughsense/clip.hpp"
#include "laughsense/dsp.hpp"
#include "laughsense/error.hpp"

namespace laughsense {

struct PitchSettings {
  double floor_hz = 60.0;
  double ceil_hz = 500.0;
  double step_s = 0.01;
  double voicing_threshold = 0.45;
  double silence_threshold_db = 30.0;  // below the loudest pitch frame
  double octave_cost = 0.01;           // per octave, favours the shorter lag
};

/// Per-frame F0 estimates; an empty optional marks an unvoiced frame.
struct PitchTrack {
  dsp::FrameSpec spec;
  dsp::Framing framing;
  int sample_rate_hz = 0;
  double floor_hz = 0.0;
  double ceil_hz = 0.0;
  std::vector<std::optional<double>> f0_hz;
  std::vector<double> strength;  // autocorrelation at the chosen lag, 0 where silent

  [[nodiscard]] std::size_t frame_count() const noexcept { return f0_hz.size(); }
  [[nodiscard]] std::size_t voiced_count() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(f0_hz.begin(), f0_hz.end(), [](const auto& v) { return v.has_value(); }));
  }
  [[nodiscard]] double centre_s(std::size_t frame) const noexcept {
    return framing.centre_s(frame, sample_rate_hz);
  }
};

/// Frame-wise SPL in dB; frames below 0 dB (including digital silence) read 0.
struct IntensityTrack {
  dsp::FrameSpec spec;
  std::vector<double> spl_db;
};

struct F0Statistics {
  double min_hz = 0.0;
  double max_hz = 0.0;
  double mean_hz = 0.0;
  double range_hz = 0.0;
  double std_hz = 0.0;
  double mean_abs_slope_hz_per_s = 0.0;
};

struct VoicingMeasures {
  double voiced_frames_pct = 0.0;
  double hnr_db = 0.0;
};

struct FormantMeans {
  double f1_hz = 0.0;
  double f2_hz = 0.0;
  std::size_t f1_frames = 0;
  std::size_t f2_frames = 0;
};

struct IntensityStatistics {
  double min_db = 0.0;
  double max_db = 0.0;
  double mean_db = 0.0;
  double std_db = 0.0;
  double range_db = 0.0;
};

struct TemporalMeasures {
  double duration_s = 0.0;
  double laugh_rate_per_s = 0.0;
  std::size_t impulses = 0;
};

inline constexpr std::size_t kFeatureCount = 19;

inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "f0_min_hz",      "f0_max_hz",     "f0_mean_hz",
    "f0_range_hz",    "f0_std_hz",     "f0_mean_abs_slope_hz_per_s",
    "f1_mean_hz",     "f2_mean_hz",    "cog_hz",
    "peak_freq_hz",   "voiced_frames_pct", "hnr_db",
    "spl_min_db",     "spl_max_db",    "spl_mean_db",
    "spl_std_db",     "spl_range_db",  "duration_s",
    "laugh_rate_per_s"};

/// The 19-dimensional feature vector, in the fixed column order above.
struct ManualFeatures {
  double f0_min_hz = 0.0;
  double f0_max_hz = 0.0;
  double f0_mean_hz = 0.0;
  double f0_range_hz = 0.0;
  double f0_std_hz = 0.0;
  double f0_mean_abs_slope_hz_per_s = 0.0;
  double f1_mean_hz = 0.0;
  double f2_mean_hz = 0.0;
  double cog_hz = 0.0;
  double peak_freq_hz = 0.0;
  double voiced_frames_pct = 0.0;
  double hnr_db = 0.0;
  double spl_min_db = 0.0;
  double spl_max_db = 0.0;
  double spl_mean_db = 0.0;
  double spl_std_db = 0.0;
  double spl_range_db = 0.0;
  double duration_s = 0.0;
  double laugh_rate_per_s = 0.0;

  [[nodiscard]] std::array<double, kFeatureCount> to_array() const {
    return {f0_min_hz,  f0_max_hz,   f0_mean_hz,   f0_range_hz,       f0_std_hz,
            f0_mean_abs_slope_hz_per_s, f1_mean_hz, f2_mean_hz, cog_hz, peak_freq_hz,
            voiced_frames_pct, hnr_db, spl_min_db, spl_max_db, spl_mean_db,
            spl_std_db, spl_range_db, duration_s, laugh_rate_per_s};
  }

  static ManualFeatures from_array(std::span<const double, kFeatureCount> v) {
    ManualFeatures m;
    m.f0_min_hz = v[0];
    m.f0_max_hz = v[1];
    m.f0_mean_hz = v[2];
    m.f0_range_hz = v[3];
    m.f0_std_hz = v[4];
    m.f0_mean_abs_slope_hz_per_s = v[5];
    m.f1_mean_hz = v[6];
    m.f2_mean_hz = v[7];
    m.cog_hz = v[8];
    m.peak_freq_hz = v[9];
    m.voiced_frames_pct = v[10];
    m.hnr_db = v[11];
    m.spl_min_db = v[12];
    m.spl_max_db = v[13];
    m.spl_mean_db = v[14];
    m.spl_std_db = v[15];
    m.spl_range_db = v[16];
    m.duration_s = v[17];
    m.laugh_rate_per_s = v[18];
    return m;
  }

  /// First violated invariant, if any.
  [[nodiscard]] std::optional<std::string> invariant_violation() const {
    const auto values = to_array();
    for (std::size_t i = 0; i < kFeatureCount; ++i)
      if (!std::isfinite(values[i])) return std::string(kFeatureNames[i]) + " is not finite";
    if (!(f0_min_hz <= f0_mean_hz && f0_mean_hz <= f0_max_hz)) return "f0 min <= mean <= max";
    if (f0_range_hz != f0_max_hz - f0_min_hz) return "f0 range != max - min";
    if (!(spl_min_db <= spl_mean_db && spl_mean_db <= spl_max_db)) return "spl min <= mean <= max";
    if (spl_range_db != spl_max_db - spl_min_db) return "spl range != max - min";
    if (voiced_frames_pct < 0.0 || voiced_frames_pct > 100.0) return "voiced percentage out of [0,100]";
    if (!(duration_s > 0.0)) return "duration must be positive";
    if (laugh_rate_per_s < 0.0) return "negative laughter rate";
    return std::nullopt;
  }
};

namespace detail {

/// Vertex of the parabola through (-1, lo), (0, mid), (1, hi): offset and value.
inline std::pair<double, double> parabolic_peak(double lo, double mid, double hi) {
  const double den = lo - 2.0 * mid + hi;
  if (den >= 0.0) return {0.0, mid};
  const double offset = std::clamp(0.5 * (lo - hi) / den, -0.5, 0.5);
  return {offset, mid - 0.25 * (lo - hi) * offset};
}

inline void require_energy(const AudioClip& clip) {
  clip.validate();
  if (std::all_of(clip.samples.begin(), clip.samples.end(), [](double v) { return v == 0.0; }))
    throw SilentClipError();
}

/// Frames on the given grid, or the whole clip as one frame when it is shorter.
inline std::vector<std::span<const double>> frames_or_whole(const AudioClip& clip,
                                                            const dsp::FrameSpec& spec) {
  if (clip.size() < static_cast<std::size_t>(std::lround(spec.frame_s * clip.sample_rate_hz)))
    return {clip.view()};
  return dsp::frame_signal(clip, spec);
}

}  // namespace detail

/// Per-frame autocorrelation pitch estimate. Frames are 3 / floor_hz long at a
/// 10 ms step. A frame is voiced when its best candidate reaches the voicing
/// threshold and its SPL lies within 30 dB of the loudest frame.
inline PitchTrack track_f0(const AudioClip& clip, const PitchSettings& settings = {}) {
  clip.validate();
  if (!(settings.floor_hz > 0.0) || !(settings.ceil_hz > settings.floor_hz))
    throw InvalidArgument("track_f0: require 0 < floor_hz < ceil_hz");
  const int rate = clip.sample_rate_hz;
  if (settings.ceil_hz >= rate / 2.0) throw InvalidArgument("track_f0: ceiling above Nyquist");

  PitchTrack track;
  track.spec = {3.0 / settings.floor_hz, settings.step_s};
  track.sample_rate_hz = rate;
  track.floor_hz = settings.floor_hz;
  track.ceil_hz = settings.ceil_hz;
  const std::size_t frame_len =
      static_cast<std::size_t>(std::lround(track.spec.frame_s * rate));
  if (clip.size() < frame_len) throw InvalidArgument("track_f0: clip too short for two pitch frames");
  track.framing = dsp::make_framing(clip.size(), rate, track.spec);
  if (track.framing.count < 2) throw InvalidArgument("track_f0: clip too short for two pitch frames");

  const std::size_t min_lag = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::floor(rate / settings.ceil_hz)));
  const std::size_t max_lag = static_cast<std::size_t>(std::ceil(rate / settings.floor_hz));

  const auto frames = dsp::frame_signal(clip, track.spec);
  std::vector<double> frame_rms(frames.size());
  double loudest = 0.0;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    frame_rms[i] = rms(frames[i]);
    loudest = std::max(loudest, frame_rms[i]);
  }
  const double silence_rms = loudest * std::pow(10.0, -settings.silence_threshold_db / 20.0);

  track.f0_hz.assign(frames.size(), std::nullopt);
  track.strength.assign(frames.size(), 0.0);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (!(frame_rms[i] > 0.0) || frame_rms[i] < silence_rms) continue;
    const auto r = dsp::autocorr_norm(frames[i], max_lag + 1);
    if (!r) continue;
    double best_score = -std::numeric_limits<double>::infinity();
    double best_value = 0.0;
    double best_lag = 0.0;
    for (std::size_t k = min_lag; k <= max_lag; ++k) {
      const double mid = (*r)[k];
      if (!(mid > (*r)[k - 1] && mid >= (*r)[k + 1])) continue;
      const auto [offset, value] = detail::parabolic_peak((*r)[k - 1], mid, (*r)[k + 1]);
      const double lag = static_cast<double>(k) + offset;
      const double f0 = rate / lag;
      if (f0 < settings.floor_hz || f0 > settings.ceil_hz) continue;
      const double score = value - settings.octave_cost * std::log2(settings.floor_hz * lag / rate);
      if (score > best_score) {
        best_score = score;
        best_value = value;
        best_lag = lag;
      }
    }
    if (best_lag == 0.0) continue;
    track.strength[i] = best_value;
    if (best_value >= settings.voicing_threshold) track.f0_hz[i] = rate / best_lag;
  }
  return track;
}

/// Statistics over voiced frames. The slope is the mean of |dF0| / step over
/// pairs of adjacent voiced frames, in Hz/s; std is the population deviation.
inline F0Statistics f0_statistics(const PitchTrack& track) {
  std::vector<double> voiced;
  double slope_sum = 0.0;
  std::size_t slope_pairs = 0;
  for (std::size_t i = 0; i < track.f0_hz.size(); ++i) {
    if (!track.f0_hz[i]) continue;
    voiced.push_back(*track.f0_hz[i]);
    if (i > 0 && track.f0_hz[i - 1]) {
      slope_sum += std::abs(*track.f0_hz[i] - *track.f0_hz[i - 1]) / track.spec.step_s;
      ++slope_pairs;
    }
  }
  if (voiced.size() < 2) throw InsufficientVoicingError();
  if (slope_pairs == 0) throw InsufficientVoicingError("insufficient voicing: no adjacent voiced frames");

  F0Statistics s;
  const auto [lo, hi] = std::minmax_element(voiced.begin(), voiced.end());
  s.min_hz = *lo;
  s.max_hz = *hi;
  s.range_hz = s.max_hz - s.min_hz;
  const double n = static_cast<double>(voiced.size());
  s.mean_hz = std::clamp(std::accumulate(voiced.begin(), voiced.end(), 0.0) / n, s.min_hz, s.max_hz);
  double ss = 0.0;
  for (double v : voiced) ss += (v - s.mean_hz) * (v - s.mean_hz);
  s.std_hz = std::sqrt(ss / n);
  s.mean_abs_slope_hz_per_s = slope_sum / static_cast<double>(slope_pairs);
  return s;
}

/// Harmonicity of one frame from its autocorrelation peak, in dB.
inline double hnr_from_strength(double r) {
  const double c = std::clamp(r, 1e-6, 1.0 - 1e-6);
  return 10.0 * std::log10(c / (1.0 - c));
}

inline VoicingMeasures voicing_measures(const AudioClip& clip, const PitchTrack& track) {
  if (track.sample_rate_hz != clip.sample_rate_hz || track.frame_count() == 0)
    throw InvalidArgument("voicing_measures: pitch track was not computed on this clip");
  const std::size_t voiced = track.voiced_count();
  if (voiced == 0) throw InsufficientVoicingError("no voiced frames");
  VoicingMeasures v;
  v.voiced_frames_pct = 100.0 * static_cast<double>(voiced) / static_cast<double>(track.frame_count());
  double acc = 0.0;
  for (std::size_t i = 0; i < track.frame_count(); ++i)
    if (track.f0_hz[i]) acc += hnr_from_strength(track.strength[i]);
  v.hnr_db = acc / static_cast<double>(voiced);
  return v;
}

struct FormantSettings {
  int analysis_rate_hz = 10000;  // twice the 5 kHz formant ceiling
  double window_s = 0.025;
  std::size_t lpc_order = 10;
  double pre_emphasis_hz = 50.0;
  double max_bandwidth_hz = 400.0;
  double edge_margin_hz = 50.0;
};

/// Formant candidates of one LPC fit: pole frequencies with narrow
/// bandwidth, ascending.
inline std::vector<double> formants_from_lpc(std::span<const double> a, double rate_hz,
                                             const FormantSettings& settings = {}) {
  std::vector<double> out;
  for (const auto& z : dsp::polynomial_roots(a)) {
    if (z.imag() <= 0.0) continue;
    const double mag = std::abs(z);
    if (!(mag > 0.0)) continue;
    const double freq = std::arg(z) * rate_hz / (2.0 * std::numbers::pi);
    const double bandwidth = -std::log(mag) * rate_hz / std::numbers::pi;
    if (freq <= settings.edge_margin_hz || freq >= rate_hz / 2.0 - settings.edge_margin_hz) continue;
    if (!(bandwidth < settings.max_bandwidth_hz)) continue;
    out.push_back(freq);
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Mean F1 and F2 over voiced frames from Burg LPC on the clip resampled to
/// 10 kHz. Frames without a candidate are skipped; F2 is averaged only over
/// frames that produced a second candidate and is never imputed.
inline FormantMeans formant_means(const AudioClip& clip, const PitchTrack& track,
                                  const FormantSettings& settings = {}) {
  if (track.voiced_count() == 0) throw InsufficientVoicingError("formants: no voiced frames");
  const AudioClip low = dsp::resample(clip, settings.analysis_rate_hz);
  const double rate = low.sample_rate_hz;
  const double alpha = std::exp(-2.0 * std::numbers::pi * settings.pre_emphasis_hz / rate);
  std::vector<double> emphasized(low.size());
  for (std::size_t i = low.size(); i-- > 0;)
    emphasized[i] = low.samples[i] - (i > 0 ? alpha * low.samples[i - 1] : 0.0);

  const auto win_len = static_cast<std::size_t>(std::lround(settings.window_s * rate));
  if (emphasized.size() < win_len) throw InsufficientVoicingError("formants: clip shorter than one window");
  const std::vector<double> window = dsp::hann_window(win_len);
  std::vector<double> buf(win_len);

  FormantMeans m;
  double f1_sum = 0.0;
  double f2_sum = 0.0;
  for (std::size_t i = 0; i < track.frame_count(); ++i) {
    if (!track.f0_hz[i]) continue;
    const double centre = track.centre_s(i) * rate;
    auto start = static_cast<std::ptrdiff_t>(std::llround(centre - 0.5 * static_cast<double>(win_len)));
    start = std::clamp<std::ptrdiff_t>(start, 0, static_cast<std::ptrdiff_t>(emphasized.size() - win_len));
    for (std::size_t j = 0; j < win_len; ++j)
      buf[j] = emphasized[static_cast<std::size_t>(start) + j] * window[j];
    if (std::all_of(buf.begin(), buf.end(), [&](double v) { return v == buf[0]; })) continue;
    const dsp::LpcResult lpc = dsp::lpc_burg(buf, settings.lpc_order);
    const std::vector<double> f = formants_from_lpc(lpc.a, rate, settings);
    if (f.empty()) continue;
    f1_sum += f[0];
    ++m.f1_frames;
    if (f.size() >= 2) {
      f2_sum += f[1];
      ++m.f2_frames;
    }
  }
  if (m.f1_frames == 0) throw InsufficientVoicingError("formants: no frame produced a formant");
  if (m.f2_frames == 0) throw InsufficientVoicingError("formants: no frame produced a second formant");
  m.f1_hz = f1_sum / static_cast<double>(m.f1_frames);
  m.f2_hz = f2_sum / static_cast<double>(m.f2_frames);
  return m;
}

/// Mean of the Hann-windowed frame power spectra (40 ms frames, 10 ms step).
inline dsp::PowerSpectrum long_term_spectrum(const AudioClip& clip) {
  detail::require_energy(clip);
  const auto frames = detail::frames_or_whole(clip, dsp::kIntensityFrames);
  dsp::PowerSpectrum ltas;
  for (const auto& frame : frames) {
    dsp::PowerSpectrum ps = dsp::power_spectrum(frame, clip.sample_rate_hz);
    if (ltas.power.empty()) {
      ltas = std::move(ps);
    } else {
      for (std::size_t k = 0; k < ltas.power.size(); ++k) ltas.power[k] += ps.power[k];
    }
  }
  for (double& p : ltas.power) p /= static_cast<double>(frames.size());
  return ltas;
}

/// Power-weighted mean frequency of the long-term spectrum.
inline double spectral_cog(const AudioClip& clip) {
  const dsp::PowerSpectrum ltas = long_term_spectrum(clip);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < ltas.power.size(); ++k) {
    num += ltas.frequency(static_cast<double>(k)) * ltas.power[k];
    den += ltas.power[k];
  }
  if (!(den > 0.0)) throw SilentClipError();
  return num / den;
}

/// Frequency of the long-term spectrum maximum, refined by a parabola through
/// the log power of the peak bin and its neighbours.
inline double peak_frequency(const AudioClip& clip) {
  const dsp::PowerSpectrum ltas = long_term_spectrum(clip);
  const auto& p = ltas.power;
  const auto k = static_cast<std::size_t>(std::distance(p.begin(), std::max_element(p.begin(), p.end())));
  if (!(p[k] > 0.0)) throw SilentClipError();
  if (k == 0 || k + 1 >= p.size()) return ltas.frequency(static_cast<double>(k));
  constexpr double kTiny = 1e-300;
  const auto [offset, value] = detail::parabolic_peak(std::log(std::max(p[k - 1], kTiny)),
                                                      std::log(p[k]),
                                                      std::log(std::max(p[k + 1], kTiny)));
  (void)value;
  return ltas.frequency(static_cast<double>(k) + offset);
}

inline IntensityTrack intensity_track(const AudioClip& clip,
                                      const dsp::FrameSpec& spec = dsp::kIntensityFrames) {
  clip.validate();
  IntensityTrack track;
  track.spec = spec;
  for (const auto& frame : detail::frames_or_whole(clip, spec)) {
    const double level = rms(frame);
    track.spl_db.push_back(level > 0.0 ? std::max(0.0, spl_db(level)) : 0.0);
  }
  return track;
}

/// Min, max, mean, population std and range of the SPL track, ignoring frames
/// at or below 0 dB.
inline IntensityStatistics intensity_statistics(const AudioClip& clip) {
  detail::require_energy(clip);
  const IntensityTrack track = intensity_track(clip);
  std::vector<double> v;
  for (double d : track.spl_db)
    if (d > 0.0) v.push_back(d);
  if (v.empty()) throw SilentClipError("no frame above 0 dB SPL");
  IntensityStatistics s;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  s.min_db = *lo;
  s.max_db = *hi;
  s.range_db = s.max_db - s.min_db;
  const double n = static_cast<double>(v.size());
  s.mean_db = std::clamp(std::accumulate(v.begin(), v.end(), 0.0) / n, s.min_db, s.max_db);
  double ss = 0.0;
  for (double d : v) ss += (d - s.mean_db) * (d - s.mean_db);
  s.std_db = std::sqrt(ss / n);
  return s;
}

struct ImpulseSettings {
  double min_prominence_db = 2.0;
  double min_spacing_s = 0.1;
};

/// Indices of laughter impulses in an SPL track: maxima of the 3-frame moving
/// average that lie above its mean, stand at least min_prominence_db above the
/// lowest point on either side before a higher sample, and are at least
/// min_spacing_s apart (taller peaks win).
inline std::vector<std::size_t> detect_impulses(std::span<const double> spl_db, double step_s,
                                                const ImpulseSettings& settings = {}) {
  const std::size_t n = spl_db.size();
  if (n < 3) return {};
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i == 0 ? 0 : i - 1;
    const std::size_t hi = std::min(n - 1, i + 1);
    double acc = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) acc += spl_db[j];
    s[i] = acc / static_cast<double>(hi - lo + 1);
  }
  const double mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(n);

  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < n; ++i) {
    const bool left_ok = i == 0 || s[i] > s[i - 1];
    const bool right_ok = i + 1 == n || s[i] >= s[i + 1];
    if (!(left_ok && right_ok) || !(s[i] > mean)) continue;
    double left_min = s[i];
    for (std::size_t j = i; j-- > 0;) {
      if (s[j] > s[i]) break;
      left_min = std::min(left_min, s[j]);
    }
    double right_min = s[i];
    for (std::size_t j = i + 1; j < n; ++j) {
      if (s[j] > s[i]) break;
      right_min = std::min(right_min, s[j]);
    }
    if (s[i] - left_min >= settings.min_prominence_db && s[i] - right_min >= settings.min_prominence_db)
      candidates.push_back(i);
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
  const auto min_gap = static_cast<double>(settings.min_spacing_s);
  std::vector<std::size_t> kept;
  for (std::size_t c : candidates) {
    const bool spaced = std::all_of(kept.begin(), kept.end(), [&](std::size_t k) {
      const double gap = std::abs(static_cast<double>(c) - static_cast<double>(k)) * step_s;
      return gap >= min_gap - 1e-9;
    });
    if (spaced) kept.push_back(c);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

/// Duration and impulses per second. A silent clip has rate 0.
inline TemporalMeasures laughter_rate(const AudioClip& clip) {
  clip.validate();
  TemporalMeasures t;
  t.duration_s = clip.duration_s();
  if (std::all_of(clip.samples.begin(), clip.samples.end(), [](double v) { return v == 0.0; }))
    return t;
  const IntensityTrack track = intensity_track(clip);
  t.impulses = detect_impulses(track.spl_db, track.spec.step_s).size();
  t.laugh_rate_per_s = static_cast<double>(t.impulses) / t.duration_s;
  return t;
}

/// All 19 parameters for one (normalized) clip. Throws SilentClipError or
/// InsufficientVoicingError when a measure is undefined.
inline ManualFeatures extract_manual_features(const AudioClip& clip, const PitchSettings& pitch = {}) {
  detail::require_energy(clip);
  const PitchTrack track = track_f0(clip, pitch);
  const F0Statistics f0 = f0_statistics(track);
  const VoicingMeasures voicing = voicing_measures(clip, track);
  const FormantMeans formants = formant_means(clip, track);
  const IntensityStatistics spl = intensity_statistics(clip);
  const TemporalMeasures temporal = laughter_rate(clip);

  ManualFeatures m;
  m.f0_min_hz = f0.min_hz;
  m.f0_max_hz = f0.max_hz;
  m.f0_mean_hz = f0.mean_hz;
  m.f0_range_hz = f0.range_hz;
  m.f0_std_hz = f0.std_hz;
  m.f0_mean_abs_slope_hz_per_s = f0.mean_abs_slope_hz_per_s;
  m.f1_mean_hz = formants.f1_hz;
  m.f2_mean_hz = formants.f2_hz;
  m.cog_hz = spectral_cog(clip);
  m.peak_freq_hz = peak_frequency(clip);
  m.voiced_frames_pct = voicing.voiced_frames_pct;
  m.hnr_db = voicing.hnr_db;
  m.spl_min_db = spl.min_db;
  m.spl_max_db = spl.max_db;
  m.spl_mean_db = spl.mean_db;
  m.spl_std_db = spl.std_db;
  m.spl_range_db = spl.range_db;
  m.duration_s = temporal.duration_s;
  m.laugh_rate_per_s = temporal.laugh_rate_per_s;
  if (auto bad = m.invariant_violation()) throw Error("feature invariant violated: " + *bad);
  return m;
}

}  // namespace laughsense
