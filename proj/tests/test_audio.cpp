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


#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "laughsense/audio.hpp"
#include "support.hpp"

using namespace laughsense;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using testsupport::sine;
using testsupport::TempDir;

namespace {

// Hand-assembled RIFF writer, independent of encode_wav.
std::vector<unsigned char> raw_wav(std::uint16_t format, std::uint16_t channels, std::uint32_t rate,
                                   std::uint16_t bits, const std::vector<unsigned char>& payload) {
  std::vector<unsigned char> b;
  auto u32 = [&](std::uint32_t v) { for (int i = 0; i < 4; ++i) b.push_back((v >> (8 * i)) & 0xFF); };
  auto u16 = [&](std::uint16_t v) { b.push_back(v & 0xFF); b.push_back(v >> 8); };
  auto tag = [&](const char* s) { b.insert(b.end(), s, s + 4); };
  tag("RIFF");
  u32(36 + static_cast<std::uint32_t>(payload.size()));
  tag("WAVE");
  tag("fmt ");
  u32(16);
  u16(format);
  u16(channels);
  u32(rate);
  u32(rate * channels * bits / 8);
  u16(static_cast<std::uint16_t>(channels * bits / 8));
  u16(bits);
  tag("data");
  u32(static_cast<std::uint32_t>(payload.size()));
  b.insert(b.end(), payload.begin(), payload.end());
  return b;
}

void put16(std::vector<unsigned char>& p, std::int16_t v) {
  p.push_back(static_cast<std::uint16_t>(v) & 0xFF);
  p.push_back(static_cast<std::uint16_t>(v) >> 8);
}

void dump(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
  std::ofstream(path, std::ios::binary).write(reinterpret_cast<const char*>(bytes.data()),
                                              static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("load_wav scales 16-bit PCM by full scale", "[audio]") {
  TempDir dir;
  std::vector<unsigned char> payload;
  for (int i = 0; i < 16000; ++i) put16(payload, 16384);
  dump(dir.path() / "half.wav", raw_wav(1, 1, 16000, 16, payload));
  const AudioClip clip = load_wav(dir.path() / "half.wav");
  CHECK(clip.id == "half");
  CHECK(clip.sample_rate_hz == 16000);
  REQUIRE(clip.size() == 16000);
  for (double v : clip.samples) REQUIRE(v == 0.5);
}

TEST_CASE("load_wav averages stereo channels", "[audio]") {
  TempDir dir;
  std::vector<unsigned char> payload;
  for (int i = 0; i < 100; ++i) {
    for (float f : {0.2f, 0.6f}) {
      unsigned char tmp[4];
      std::memcpy(tmp, &f, 4);
      payload.insert(payload.end(), tmp, tmp + 4);
    }
  }
  dump(dir.path() / "st.wav", raw_wav(3, 2, 8000, 32, payload));
  const AudioClip clip = load_wav(dir.path() / "st.wav");
  REQUIRE(clip.size() == 100);
  for (double v : clip.samples) REQUIRE_THAT(v, WithinAbs(0.4, 1e-7));
}

TEST_CASE("load_wav decodes 8, 24 and 32-bit integer PCM", "[audio]") {
  TempDir dir;
  dump(dir.path() / "u8.wav", raw_wav(1, 1, 8000, 8, {192, 64, 128}));
  const AudioClip u8 = load_wav(dir.path() / "u8.wav");
  CHECK(u8.samples == std::vector<double>{0.5, -0.5, 0.0});

  // 24-bit: 0x400000 = 0.5, 0xC00000 = -0.5
  dump(dir.path() / "s24.wav", raw_wav(1, 1, 8000, 24, {0x00, 0x00, 0x40, 0x00, 0x00, 0xC0}));
  CHECK(load_wav(dir.path() / "s24.wav").samples == std::vector<double>{0.5, -0.5});

  dump(dir.path() / "s32.wav", raw_wav(1, 1, 8000, 32, {0x00, 0x00, 0x00, 0x40, 0x00, 0x00, 0x00, 0xC0}));
  CHECK(load_wav(dir.path() / "s32.wav").samples == std::vector<double>{0.5, -0.5});
}

TEST_CASE("load_wav returns one second at the file's rate", "[audio]") {
  TempDir dir;
  write_wav(dir.path() / "one.wav", sine(440.0, 0.3, 1.0, 16000));
  const AudioClip clip = load_wav(dir.path() / "one.wav");
  CHECK(clip.size() == 16000);
  CHECK(clip.sample_rate_hz == 16000);
  CHECK_THAT(clip.duration_s(), WithinAbs(1.0, 1e-12));
}

TEST_CASE("load_wav error paths", "[audio]") {
  TempDir dir;
  CHECK_THROWS_AS(load_wav(dir.path() / "missing.wav"), IoError);

  dump(dir.path() / "adpcm.wav", raw_wav(2, 1, 8000, 4, {1, 2, 3, 4}));
  CHECK_THROWS_AS(load_wav(dir.path() / "adpcm.wav"), FormatError);

  dump(dir.path() / "empty.wav", raw_wav(1, 1, 8000, 16, {}));
  CHECK_THROWS_AS(load_wav(dir.path() / "empty.wav"), FormatError);

  dump(dir.path() / "junk.wav", {'n', 'o', 't', ' ', 'a', ' ', 'w', 'a', 'v', 'e', '!', '!'});
  CHECK_THROWS_AS(load_wav(dir.path() / "junk.wav"), FormatError);
}

TEST_CASE("16-bit write/read round-trips exactly on the PCM grid", "[audio][property]") {
  TempDir dir;
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(257);
    for (double& v : x) v = static_cast<double>(static_cast<std::int64_t>(rng.below(65536)) - 32768) / 32768.0;
    const AudioClip clip("rt", x, 8000 + static_cast<int>(rng.below(40000)));
    write_wav(dir.path() / "rt.wav", clip);
    const AudioClip back = load_wav(dir.path() / "rt.wav");
    REQUIRE(back.sample_rate_hz == clip.sample_rate_hz);
    REQUIRE(back.samples == clip.samples);
  }
}

TEST_CASE("peak_spl of sines", "[audio]") {
  // RMS of a unit sine is 1/sqrt(2): 20 log10(0.70711 / 2e-5) = 90.969 dB
  const double full = 20.0 * std::log10(std::sqrt(0.5) / 2e-5);
  CHECK_THAT(peak_spl(sine(1000.0, 1.0, 1.0)), WithinAbs(90.97, 0.1));
  CHECK_THAT(peak_spl(sine(1000.0, 1.0, 1.0)), WithinAbs(full, 1e-6));
  CHECK_THAT(peak_spl(sine(1000.0, 0.1, 1.0)), WithinAbs(70.97, 0.1));
  CHECK_THROWS_AS(peak_spl(AudioClip("z", std::vector<double>(16000, 0.0), 16000)), SilentClipError);
}

TEST_CASE("normalize_peak_spl", "[audio]") {
  const AudioClip norm = normalize_peak_spl(sine(1000.0, 1.0, 1.0), 70.0);
  double peak = 0.0;
  for (double v : norm.samples) peak = std::max(peak, std::abs(v));
  const double expected_gain = std::pow(10.0, (70.0 - 20.0 * std::log10(std::sqrt(0.5) / 2e-5)) / 20.0);
  CHECK_THAT(peak, WithinAbs(0.0894, 1e-4));
  CHECK_THAT(peak, WithinRel(expected_gain, 1e-6));
  CHECK_THAT(peak_spl(norm), WithinAbs(70.0, 0.01));

  const AudioClip again = normalize_peak_spl(norm, 70.0);
  for (std::size_t i = 0; i < norm.size(); ++i) REQUIRE_THAT(again.samples[i], WithinRel(norm.samples[i], 1e-6));

  CHECK_THROWS_AS(normalize_peak_spl(AudioClip("z", std::vector<double>(800, 0.0), 16000)), SilentClipError);
}

TEST_CASE("normalize_peak_spl is gain invariant", "[audio][property]") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    AudioClip clip = testsupport::noise_clip(rng, 0.1, 0.3);
    const double gain = std::exp(rng.uniform(-6.0, 6.0));
    AudioClip scaled = clip;
    for (double& v : scaled.samples) v *= gain;
    const AudioClip a = normalize_peak_spl(clip);
    const AudioClip b = normalize_peak_spl(scaled);
    for (std::size_t i = 0; i < a.size(); ++i) REQUIRE_THAT(b.samples[i], WithinRel(a.samples[i], 1e-6));
  }
}

TEST_CASE("segment", "[audio]") {
  const AudioClip clip = sine(200.0, 0.5, 2.0);
  const AudioClip mid = segment(clip, 0.5, 1.5);
  CHECK(mid.size() == 16000);
  CHECK(mid.samples.front() == clip.samples[8000]);
  CHECK(mid.id == "sine@0.500-1.500");
  CHECK(segment(clip, 0.0, clip.duration_s()).samples == clip.samples);
  CHECK_THROWS_AS(segment(clip, 1.5, 0.5), InvalidArgument);
  CHECK_THROWS_AS(segment(clip, -0.1, 0.5), InvalidArgument);
  CHECK_THROWS_AS(segment(clip, 0.5, 2.5), InvalidArgument);
}
