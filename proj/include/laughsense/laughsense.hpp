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


// Umbrella header for the analysis library (the HTTP binding lives in
// perception_http.hpp and is not included here).

#pragma once

#include "laughsense/audio.hpp"
#include "laughsense/clip.hpp"
#include "laughsense/corpus.hpp"
#include "laughsense/dsp.hpp"
#include "laughsense/error.hpp"
#include "laughsense/evaluation.hpp"
#include "laughsense/features.hpp"
#include "laughsense/learners.hpp"
#include "laughsense/perception.hpp"
#include "laughsense/sample.hpp"
#include "laughsense/stats.hpp"
