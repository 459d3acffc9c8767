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


// Signal generators and fixtures shared by the test binaries.

#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "laughsense/clip.hpp"
#include "laughsense/rng.hpp"

namespace testsupport {

inline laughsense::AudioClip sine(double freq_hz, double amp, double dur_s, int rate = 16000, double phase = 0.0) {
  std::vector<double> x(static_cast<std::size_t>(std::lround(dur_s * rate)));
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = amp * std::sin(2.0 * std::numbers::pi * freq_hz * static_cast<double>(i) / rate + phase);
  return {"sine", std::move(x), rate};
}

inline std::vector<double> gaussian_noise(laughsense::Rng& rng, double sd, std::size_t n) {
  std::vector<double> x(n);
  for (double& v : x) v = rng.normal(0.0, sd);
  return x;
}

inline laughsense::AudioClip noise_clip(laughsense::Rng& rng, double sd, double dur_s, int rate = 16000) {
  return {"noise", gaussian_noise(rng, sd, static_cast<std::size_t>(std::lround(dur_s * rate))), rate};
}

/// Two-pole resonator y[n] = x[n] + a1 y[n-1] + a2 y[n-2] with poles at
/// radius exp(-pi B / fs) and angle 2 pi F / fs.
inline std::vector<double> resonate(std::vector<double> x, double freq, double bandwidth, double rate) {
  const double r = std::exp(-std::numbers::pi * bandwidth / rate);
  const double a1 = 2.0 * r * std::cos(2.0 * std::numbers::pi * freq / rate);
  const double a2 = -r * r;
  double y1 = 0.0, y2 = 0.0;
  for (double& v : x) {
    const double y = v + a1 * y1 + a2 * y2;
    y2 = y1;
    y1 = y;
    v = y;
  }
  return x;
}

inline std::vector<double> pulse_train(double f0, double dur_s, int rate) {
  std::vector<double> x(static_cast<std::size_t>(std::lround(dur_s * rate)), 0.0);
  double phase = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    phase += f0 / rate;
    if (phase >= 1.0) {
      phase -= 1.0;
      x[i] = 1.0;
    }
  }
  return x;
}

inline void scale_to_peak(std::vector<double>& x, double peak) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  for (double& v : x) v *= peak / m;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() /
            ("laughsense_test_" + std::to_string(stamp) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testsupport
