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


// Numeric kernels shared by the feature extractors: framing, Hann windowing,
// power spectra, window-corrected autocorrelation, Burg linear prediction,
// polynomial roots and band-limited resampling. Everything here is a pure
// function of its arguments.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <unsupported/Eigen/FFT>
#include <unsupported/Eigen/Polynomials>

#include "laughsense/clip.hpp"
#include "laughsense/error.hpp"

namespace laughsense::dsp {

struct FrameSpec {
  double frame_s = 0.04;
  double step_s = 0.01;

  void validate() const {
    if (!(step_s > 0.0) || !(frame_s >= step_s))
      throw InvalidArgument("frame spec requires 0 < step_s <= frame_s");
  }
};

/// Default analysis grid for intensity and spectra: 40 ms frames every 10 ms.
inline constexpr FrameSpec kIntensityFrames{0.04, 0.01};

/// Frame length, hop and count in samples for a signal of a given length.
struct Framing {
  std::size_t length = 0;
  std::size_t hop = 0;
  std::size_t count = 0;

  [[nodiscard]] std::size_t start(std::size_t frame) const noexcept { return frame * hop; }
  /// Centre of a frame in seconds.
  [[nodiscard]] double centre_s(std::size_t frame, int rate_hz) const noexcept {
    return (static_cast<double>(frame * hop) + 0.5 * static_cast<double>(length)) / rate_hz;
  }
};

inline Framing make_framing(std::size_t n_samples, int rate_hz, const FrameSpec& spec) {
  spec.validate();
  Framing f;
  f.length = static_cast<std::size_t>(std::lround(spec.frame_s * rate_hz));
  f.hop = static_cast<std::size_t>(std::lround(spec.step_s * rate_hz));
  if (f.length == 0 || f.hop == 0) throw InvalidArgument("frame spec rounds to zero samples");
  if (n_samples < f.length)
    throw InvalidArgument("signal of " + std::to_string(n_samples) +
                          " samples is shorter than one frame of " + std::to_string(f.length));
  f.count = (n_samples - f.length) / f.hop + 1;
  return f;
}

/// Full frames of round(frame_s * rate) samples at hops of round(step_s * rate);
/// a trailing partial frame is dropped. The spans alias the clip's storage.
inline std::vector<std::span<const double>> frame_signal(const AudioClip& clip,
                                                         const FrameSpec& spec) {
  const Framing f = make_framing(clip.size(), clip.sample_rate_hz, spec);
  std::vector<std::span<const double>> frames;
  frames.reserve(f.count);
  const std::span<const double> all = clip.view();
  for (std::size_t i = 0; i < f.count; ++i) frames.push_back(all.subspan(f.start(i), f.length));
  return frames;
}

/// Periodic Hann window, w[n] = 0.5 - 0.5 cos(2 pi n / N).
inline std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                static_cast<double>(n));
  return w;
}

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

namespace detail {

inline Eigen::FFT<double>& fft_engine() {
  thread_local Eigen::FFT<double> engine;
  return engine;
}

/// |DFT|^2 of `x` zero-padded to `nfft`, bins 0..nfft/2.
inline std::vector<double> padded_power(std::span<const double> x, std::size_t nfft) {
  std::vector<double> buf(nfft, 0.0);
  std::copy(x.begin(), x.end(), buf.begin());
  std::vector<std::complex<double>> spec;
  fft_engine().fwd(spec, buf);
  std::vector<double> power(nfft / 2 + 1);
  for (std::size_t k = 0; k < power.size(); ++k) power[k] = std::norm(spec[k]);
  return power;
}

/// Linear (non-circular) autocorrelation for lags 0..max_lag via FFT.
inline std::vector<double> linear_autocorr(std::span<const double> x, std::size_t max_lag) {
  const std::size_t nfft = next_pow2(2 * x.size());
  std::vector<double> buf(nfft, 0.0);
  std::copy(x.begin(), x.end(), buf.begin());
  std::vector<std::complex<double>> spec;
  auto& fft = fft_engine();
  fft.fwd(spec, buf);
  for (auto& c : spec) c = std::norm(c);
  std::vector<double> r;
  fft.inv(r, spec);
  r.resize(max_lag + 1);
  return r;
}

}  // namespace detail

struct PowerSpectrum {
  double bin_hz = 0.0;
  std::size_t fft_size = 0;
  std::vector<double> power;  // bins 0..fft_size/2

  [[nodiscard]] double frequency(double bin) const noexcept { return bin * bin_hz; }
};

/// |FFT|^2 of the Hann-windowed frame, zero-padded to the next power of two.
inline PowerSpectrum power_spectrum(std::span<const double> frame, int sample_rate_hz) {
  if (frame.empty()) throw InvalidArgument("power_spectrum: empty frame");
  const std::vector<double> w = hann_window(frame.size());
  std::vector<double> windowed(frame.size());
  for (std::size_t i = 0; i < frame.size(); ++i) windowed[i] = frame[i] * w[i];
  PowerSpectrum ps;
  ps.fft_size = next_pow2(frame.size());
  ps.bin_hz = static_cast<double>(sample_rate_hz) / static_cast<double>(ps.fft_size);
  ps.power = detail::padded_power(windowed, ps.fft_size);
  return ps;
}

/// Normalized autocorrelation r(tau)/r(0) for tau = 0..max_lag of the
/// mean-removed, Hann-windowed frame, divided by the window's own normalized
/// autocorrelation. Returns nullopt for a zero-energy frame.
inline std::optional<std::vector<double>> autocorr_norm(std::span<const double> frame,
                                                        std::size_t max_lag) {
  const std::size_t n = frame.size();
  if (n == 0 || max_lag >= n) throw InvalidArgument("autocorr_norm: max_lag must be < frame length");
  double mean = 0.0;
  for (double v : frame) mean += v;
  mean /= static_cast<double>(n);
  const std::vector<double> w = hann_window(n);
  std::vector<double> x(n);
  double raw_energy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = (frame[i] - mean) * w[i];
    raw_energy += frame[i] * w[i] * frame[i] * w[i];
  }

  std::vector<double> r = detail::linear_autocorr(x, max_lag);
  // A constant frame leaves only rounding residue after mean removal.
  if (!(r[0] > 1e-20 * raw_energy) || !std::isfinite(r[0])) return std::nullopt;
  const std::vector<double> rw = detail::linear_autocorr(w, max_lag);
  const double r0 = r[0];
  for (std::size_t k = 0; k <= max_lag; ++k) r[k] = (r[k] / r0) / (rw[k] / rw[0]);
  r[0] = 1.0;
  return r;
}

/// Prediction polynomial A(z) = 1 + sum a[k-1] z^-k.
struct LpcResult {
  std::vector<double> a;
  double signal_power = 0.0;    // mean square of the input
  double residual_power = 0.0;  // mean square of the Burg forward/backward error

  [[nodiscard]] double prediction_gain_db() const {
    return 10.0 * std::log10(signal_power / residual_power);
  }
};

/// Burg's method: reflection coefficients minimizing the summed forward and
/// backward prediction error. |k| <= 1 at every stage, so A(z) is minimum phase.
inline LpcResult lpc_burg(std::span<const double> frame, std::size_t order) {
  const std::size_t n = frame.size();
  if (n == 0) throw InvalidArgument("lpc_burg: empty frame");
  if (2 * order >= n) throw InvalidArgument("lpc_burg: order must be < frame length / 2");
  if (std::all_of(frame.begin(), frame.end(), [&](double v) { return v == frame[0]; }))
    throw InvalidArgument("lpc_burg: degenerate (constant) frame");

  LpcResult out;
  double energy = 0.0;
  for (double v : frame) energy += v * v;
  out.signal_power = energy / static_cast<double>(n);
  double err = out.signal_power;

  std::vector<double> f(frame.begin(), frame.end());
  std::vector<double> b(frame.begin(), frame.end());
  std::vector<double> a;
  a.reserve(order);
  for (std::size_t m = 1; m <= order; ++m) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = m; i < n; ++i) {
      num += f[i] * b[i - 1];
      den += f[i] * f[i] + b[i - 1] * b[i - 1];
    }
    const double k = den > 0.0 ? -2.0 * num / den : 0.0;
    std::vector<double> next(m);
    for (std::size_t i = 0; i + 1 < m; ++i) next[i] = a[i] + k * a[m - 2 - i];
    next[m - 1] = k;
    a = std::move(next);
    for (std::size_t i = n - 1; i >= m; --i) {
      const double fi = f[i] + k * b[i - 1];
      const double bi = b[i - 1] + k * f[i];
      f[i] = fi;
      b[i] = bi;
    }
    err *= (1.0 - k * k);
  }
  out.a = std::move(a);
  out.residual_power = err;
  return out;
}

/// Roots of z^p + a[0] z^(p-1) + ... + a[p-1], i.e. the poles of 1/A(z).
inline std::vector<std::complex<double>> polynomial_roots(std::span<const double> a) {
  const std::size_t p = a.size();
  if (p == 0) return {};
  Eigen::VectorXd poly(p + 1);
  for (std::size_t i = 0; i < p; ++i) poly[static_cast<Eigen::Index>(i)] = a[p - 1 - i];
  poly[static_cast<Eigen::Index>(p)] = 1.0;
  Eigen::PolynomialSolver<double, Eigen::Dynamic> solver(poly);
  std::vector<std::complex<double>> roots;
  roots.reserve(p);
  for (Eigen::Index i = 0; i < solver.roots().size(); ++i) roots.push_back(solver.roots()[i]);
  return roots;
}

/// Windowed-sinc resampling with cut-off at 0.45 of the lower of the two rates.
inline AudioClip resample(const AudioClip& clip, int target_hz) {
  if (target_hz < kMinSampleRateHz) throw InvalidArgument("resample: target rate below 8000 Hz");
  if (target_hz == clip.sample_rate_hz) return clip;
  const double src = clip.sample_rate_hz;
  const double dst = target_hz;
  const double cutoff = 0.45 * std::min(src, dst) / src;  // cycles per input sample
  constexpr double kZeroCrossings = 16.0;
  const double half_width = kZeroCrossings / (2.0 * cutoff);

  const auto n_in = static_cast<std::ptrdiff_t>(clip.size());
  const auto n_out = static_cast<std::size_t>(std::llround(static_cast<double>(clip.size()) * dst / src));
  std::vector<double> out(n_out);
  for (std::size_t j = 0; j < n_out; ++j) {
    const double t = static_cast<double>(j) * src / dst;
    const auto lo = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(std::ceil(t - half_width)));
    const auto hi = std::min<std::ptrdiff_t>(n_in - 1, static_cast<std::ptrdiff_t>(std::floor(t + half_width)));
    double acc = 0.0;
    for (std::ptrdiff_t i = lo; i <= hi; ++i) {
      const double d = t - static_cast<double>(i);
      const double arg = 2.0 * cutoff * d;
      const double sinc = arg == 0.0 ? 1.0 : std::sin(std::numbers::pi * arg) / (std::numbers::pi * arg);
      const double win = 0.5 + 0.5 * std::cos(std::numbers::pi * d / half_width);
      acc += clip.samples[static_cast<std::size_t>(i)] * 2.0 * cutoff * sinc * win;
    }
    out[j] = acc;
  }
  return AudioClip(clip.id, std::move(out), target_hz);
}

}  // namespace laughsense::dsp
