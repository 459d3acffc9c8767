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

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "laughsense/error.hpp"

namespace laughsense {

inline constexpr int kMinSampleRateHz = 8000;

/// Mono sample buffer. Samples are nominally in [-1, 1] and are read as
/// sound pressure in pascal by the SPL measures.
struct AudioClip {
  std::string id;
  std::vector<double> samples;
  int sample_rate_hz = 16000;

  AudioClip() = default;
  AudioClip(std::string clip_id, std::vector<double> data, int rate_hz)
      : id(std::move(clip_id)), samples(std::move(data)), sample_rate_hz(rate_hz) {}

  [[nodiscard]] std::size_t size() const noexcept { return samples.size(); }
  [[nodiscard]] double duration_s() const noexcept {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
  [[nodiscard]] std::span<const double> view() const noexcept { return samples; }

  /// Throws InvalidArgument unless the clip is non-empty with a supported rate.
  void validate() const {
    if (samples.empty()) throw InvalidArgument("audio clip '" + id + "' is empty");
    if (sample_rate_hz < kMinSampleRateHz)
      throw InvalidArgument("audio clip '" + id + "' has sample rate " +
                            std::to_string(sample_rate_hz) + " Hz, below 8000");
  }
};

}  // namespace laughsense
