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

#include <optional>
#include <string>
#include <string_view>

#include "laughsense/error.hpp"
#include "laughsense/features.hpp"

namespace laughsense {

/// Valence class: "a" laughing with (happy), "b" being laughed at (mocking).
enum class Label { kLaughWith, kLaughAt };

inline constexpr std::string_view label_token(Label l) {
  return l == Label::kLaughWith ? "a" : "b";
}

inline std::optional<Label> try_parse_label(std::string_view token) {
  if (token == "a") return Label::kLaughWith;
  if (token == "b") return Label::kLaughAt;
  return std::nullopt;
}

inline Label parse_label(std::string_view token) {
  if (auto l = try_parse_label(token)) return *l;
  throw FormatError("unknown label token '" + std::string(token) + "' (expected a or b)");
}

inline constexpr std::size_t label_index(Label l) { return l == Label::kLaughWith ? 0 : 1; }

/// One dataset row.
struct LabeledSample {
  std::string clip_id;
  std::string speaker_id;
  Label label = Label::kLaughWith;
  ManualFeatures features;
};

}  // namespace laughsense
