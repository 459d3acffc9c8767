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

#include <stdexcept>
#include <string>

namespace laughsense {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed or unsupported file contents (WAV, CSV, model text).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// The signal has no energy where an energy-based measure is required.
class SilentClipError : public Error {
 public:
  SilentClipError() : Error("silent clip") {}
  explicit SilentClipError(const std::string& detail) : Error("silent clip: " + detail) {}
};

/// Too few voiced frames for a pitch-derived measure.
class InsufficientVoicingError : public Error {
 public:
  InsufficientVoicingError() : Error("insufficient voicing") {}
  explicit InsufficientVoicingError(const std::string& what) : Error(what) {}
};

}  // namespace laughsense
