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


#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>
#include <vector>

#include "laughsense/clip.hpp"
#include "laughsense/dsp.hpp"
#include "laughsense/error.hpp"

namespace laughsense {

/// Reference sound pressure for dB SPL, in pascal.
inline constexpr double kReferencePressurePa = 2e-5;
inline constexpr double kDefaultTargetDb = 70.0;

namespace detail {

inline std::uint32_t read_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
inline std::uint16_t read_u16le(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
inline void put_u32le(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
}
inline void put_u16le(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xFF));
  out.push_back(static_cast<unsigned char>(v >> 8));
}

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

}  // namespace detail

/// Decodes a RIFF/WAVE byte buffer. Integer PCM (8/16/24/32 bit) and 32-bit
/// float are accepted; 1 or 2 channels, stereo is averaged to mono.
inline AudioClip decode_wav(const std::vector<unsigned char>& bytes, std::string id) {
  using detail::read_u16le;
  using detail::read_u32le;
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw FormatError("'" + id + "' is not a RIFF/WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  const unsigned char* data = nullptr;
  std::size_t data_len = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t len = read_u32le(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t avail = std::min<std::size_t>(len, bytes.size() - body);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (avail < 16) throw FormatError("'" + id + "': truncated fmt chunk");
      format = read_u16le(chunk + 8);
      channels = read_u16le(chunk + 10);
      rate = read_u32le(chunk + 12);
      bits = read_u16le(chunk + 22);
      if (format == detail::kFormatExtensible) {
        if (avail < 26) throw FormatError("'" + id + "': truncated extensible fmt chunk");
        format = read_u16le(chunk + 32);  // first two bytes of the sub-format GUID
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = chunk + 8;
      data_len = avail;
    }
    pos = body + len + (len & 1u);
  }
  if (!have_fmt) throw FormatError("'" + id + "': missing fmt chunk");
  if (data == nullptr) throw FormatError("'" + id + "': missing data chunk");
  if (format != detail::kFormatPcm && format != detail::kFormatFloat)
    throw FormatError("'" + id + "': compressed or unsupported WAV format tag " +
                      std::to_string(format));
  if (channels < 1 || channels > 2)
    throw FormatError("'" + id + "': " + std::to_string(channels) + " channels unsupported");
  const bool ok_bits = format == detail::kFormatFloat
                           ? bits == 32
                           : (bits == 8 || bits == 16 || bits == 24 || bits == 32);
  if (!ok_bits) throw FormatError("'" + id + "': unsupported sample width " + std::to_string(bits));

  const std::size_t width = bits / 8;
  const std::size_t frame_bytes = width * channels;
  const std::size_t frames = data_len / frame_bytes;
  if (frames == 0) throw FormatError("'" + id + "': zero-length audio payload");

  auto sample_at = [&](const unsigned char* p) -> double {
    if (format == detail::kFormatFloat) {
      float f;
      std::memcpy(&f, p, 4);
      return static_cast<double>(f);
    }
    switch (bits) {
      case 8:
        return (static_cast<int>(p[0]) - 128) / 128.0;
      case 16:
        return static_cast<std::int16_t>(read_u16le(p)) / 32768.0;
      case 24: {
        std::int32_t v = static_cast<std::int32_t>(p[0] | (p[1] << 8) | (p[2] << 16));
        if (v & 0x800000) v -= 0x1000000;
        return v / 8388608.0;
      }
      default:
        return static_cast<std::int32_t>(read_u32le(p)) / 2147483648.0;
    }
  };

  std::vector<double> samples(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    const unsigned char* p = data + i * frame_bytes;
    double acc = 0.0;
    for (std::size_t c = 0; c < channels; ++c) acc += sample_at(p + c * width);
    samples[i] = acc / channels;
  }
  AudioClip clip(std::move(id), std::move(samples), static_cast<int>(rate));
  clip.validate();
  return clip;
}

inline std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("error reading '" + path.string() + "'");
  return bytes;
}

/// Loads a WAV file; the clip id is the file stem.
inline AudioClip load_wav(const std::filesystem::path& path) {
  return decode_wav(read_file_bytes(path), path.stem().string());
}

enum class WavEncoding { kPcm16, kFloat32 };

/// Encodes a mono clip. 16-bit samples are round(x * 32768) clamped to the
/// int16 range, so decode(encode(x)) is exact for any x on that grid.
inline std::vector<unsigned char> encode_wav(const AudioClip& clip,
                                             WavEncoding encoding = WavEncoding::kPcm16) {
  using detail::put_u16le;
  using detail::put_u32le;
  const bool pcm = encoding == WavEncoding::kPcm16;
  const std::uint16_t bits = pcm ? 16 : 32;
  const std::uint32_t data_len = static_cast<std::uint32_t>(clip.size() * (bits / 8));
  std::vector<unsigned char> out;
  out.reserve(44 + data_len);
  const auto tag = [&](const char* s) { out.insert(out.end(), s, s + 4); };
  tag("RIFF");
  put_u32le(out, 36 + data_len);
  tag("WAVE");
  tag("fmt ");
  put_u32le(out, 16);
  put_u16le(out, pcm ? detail::kFormatPcm : detail::kFormatFloat);
  put_u16le(out, 1);
  put_u32le(out, static_cast<std::uint32_t>(clip.sample_rate_hz));
  put_u32le(out, static_cast<std::uint32_t>(clip.sample_rate_hz) * (bits / 8));
  put_u16le(out, bits / 8);
  put_u16le(out, bits);
  tag("data");
  put_u32le(out, data_len);
  for (double x : clip.samples) {
    if (pcm) {
      const double q = std::clamp(std::round(x * 32768.0), -32768.0, 32767.0);
      put_u16le(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
    } else {
      const float f = static_cast<float>(x);
      std::uint32_t u;
      std::memcpy(&u, &f, 4);
      put_u32le(out, u);
    }
  }
  return out;
}

inline void write_wav(const std::filesystem::path& path, const AudioClip& clip,
                      WavEncoding encoding = WavEncoding::kPcm16) {
  const std::vector<unsigned char> bytes = encode_wav(clip, encoding);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("error writing '" + path.string() + "'");
}

/// dB SPL of a block RMS value; -inf for zero.
inline double spl_db(double rms) { return 20.0 * std::log10(rms / kReferencePressurePa); }

inline double rms(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc / static_cast<double>(x.size()));
}

/// Maximum frame SPL. A clip shorter than one frame is measured as a whole.
inline double peak_spl(const AudioClip& clip, double frame_s = dsp::kIntensityFrames.frame_s,
                       double step_s = dsp::kIntensityFrames.step_s) {
  clip.validate();
  const dsp::FrameSpec spec{frame_s, step_s};
  spec.validate();
  double peak_rms = 0.0;
  if (clip.size() < static_cast<std::size_t>(std::lround(frame_s * clip.sample_rate_hz))) {
    peak_rms = rms(clip.view());
  } else {
    for (auto frame : dsp::frame_signal(clip, spec)) peak_rms = std::max(peak_rms, rms(frame));
  }
  if (!(peak_rms > 0.0)) throw SilentClipError("peak SPL undefined: all-zero signal");
  return spl_db(peak_rms);
}

/// Scales the clip by one gain so that its peak frame SPL equals target_db.
inline AudioClip normalize_peak_spl(const AudioClip& clip, double target_db = kDefaultTargetDb) {
  const double gain = std::pow(10.0, (target_db - peak_spl(clip)) / 20.0);
  AudioClip out = clip;
  for (double& v : out.samples) v *= gain;
  return out;
}

/// Samples in [start_s, end_s); the id gains an "@start-end" suffix.
inline AudioClip segment(const AudioClip& clip, double start_s, double end_s) {
  clip.validate();
  const double duration = clip.duration_s();
  if (!(start_s >= 0.0) || !(start_s < end_s) || end_s > duration + 0.5 / clip.sample_rate_hz)
    throw InvalidArgument("segment [" + std::to_string(start_s) + ", " + std::to_string(end_s) +
                          ") outside clip of " + std::to_string(duration) + " s");
  const auto first = static_cast<std::size_t>(std::llround(start_s * clip.sample_rate_hz));
  const auto last = std::min(clip.size(),
                             static_cast<std::size_t>(std::llround(end_s * clip.sample_rate_hz)));
  if (first >= last) throw InvalidArgument("segment is shorter than one sample");
  char suffix[64];
  std::snprintf(suffix, sizeof suffix, "@%.3f-%.3f", start_s, end_s);
  return AudioClip(clip.id + suffix,
                   std::vector<double>(clip.samples.begin() + static_cast<std::ptrdiff_t>(first),
                                       clip.samples.begin() + static_cast<std::ptrdiff_t>(last)),
                   clip.sample_rate_hz);
}

}  // namespace laughsense
