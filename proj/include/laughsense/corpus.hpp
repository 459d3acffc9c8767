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
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "laughsense/audio.hpp"
#include "laughsense/error.hpp"
#include "laughsense/features.hpp"
#include "laughsense/parallel.hpp"
#include "laughsense/rng.hpp"
#include "laughsense/sample.hpp"

namespace laughsense::corpus {

inline constexpr std::string_view kManifestHeader = "file,label,speaker,start,end";

struct ManifestEntry {
  std::string file;  // relative to the audio root
  Label label = Label::kLaughWith;
  std::string speaker_id;
  std::optional<double> start_s;
  std::optional<double> end_s;

  /// Clip id: file stem, plus "@start-end" for an interval.
  [[nodiscard]] std::string clip_id() const {
    std::string id = std::filesystem::path(file).stem().string();
    if (start_s && end_s) {
      char suffix[64];
      std::snprintf(suffix, sizeof suffix, "@%.3f-%.3f", *start_s, *end_s);
      id += suffix;
    }
    return id;
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    out.push_back(trim(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

inline double parse_real(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw FormatError(where + ": '" + s + "' is not a finite number");
  }
}

}  // namespace detail

/// Parses manifest CSV text with header `file,label,speaker,start,end`.
inline std::vector<ManifestEntry> parse_manifest_text(std::string_view text, const std::string& source = "manifest") {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::vector<ManifestEntry> entries;
  std::set<std::tuple<std::string, double, double>> seen;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = source + ":" + std::to_string(line_no);
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (!have_header) {
      std::string joined;
      for (std::size_t i = 0; i < fields.size(); ++i) joined += (i ? "," : "") + fields[i];
      if (joined != kManifestHeader)
        throw FormatError(where + ": expected header '" + std::string(kManifestHeader) + "'");
      have_header = true;
      continue;
    }
    if (fields.size() != 5) throw FormatError(where + ": expected 5 columns, found " + std::to_string(fields.size()));
    ManifestEntry e;
    e.file = fields[0];
    if (e.file.empty()) throw FormatError(where + ": empty file column");
    const auto label = try_parse_label(fields[1]);
    if (!label) throw FormatError(where + ": unknown label token '" + fields[1] + "' (expected a or b)");
    e.label = *label;
    e.speaker_id = fields[2];
    if (e.speaker_id.empty()) throw FormatError(where + ": empty speaker column");
    if (!fields[3].empty()) e.start_s = detail::parse_real(fields[3], where);
    if (!fields[4].empty()) e.end_s = detail::parse_real(fields[4], where);
    if (e.start_s.has_value() != e.end_s.has_value())
      throw FormatError(where + ": start and end must both be given or both be empty");
    if (e.start_s && !(*e.start_s >= 0.0 && *e.start_s < *e.end_s))
      throw FormatError(where + ": interval requires 0 <= start < end");
    const auto key = std::make_tuple(e.file, e.start_s.value_or(-1.0), e.end_s.value_or(-1.0));
    if (!seen.insert(key).second) throw FormatError(where + ": duplicate entry for '" + e.file + "'");
    entries.push_back(std::move(e));
  }
  if (!have_header) throw FormatError(source + ": missing header '" + std::string(kManifestHeader) + "'");
  return entries;
}

inline std::vector<ManifestEntry> parse_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_manifest_text(buf.str(), path.string());
}

inline std::string format_manifest(const std::vector<ManifestEntry>& entries) {
  std::string out = std::string(kManifestHeader) + "\n";
  char buf[64];
  for (const auto& e : entries) {
    out += e.file + "," + std::string(label_token(e.label)) + "," + e.speaker_id + ",";
    if (e.start_s) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g", *e.start_s, *e.end_s);
      out += buf;
    } else {
      out += ",";
    }
    out += "\n";
  }
  return out;
}

struct Exclusion {
  std::string file;
  std::string clip_id;
  std::string speaker_id;
  Label label = Label::kLaughWith;
  std::string reason;
};

struct Dataset {
  std::vector<LabeledSample> samples;
  std::vector<Exclusion> exclusions;
  std::vector<std::string> warnings;
};

struct BuildOptions {
  double target_db = kDefaultTargetDb;
  int jobs = 1;
};

/// Loads one manifest entry as a normalized clip ready for extraction.
inline AudioClip load_entry(const ManifestEntry& e, const std::filesystem::path& audio_root, double target_db) {
  const std::filesystem::path path = audio_root / e.file;
  if (!std::filesystem::exists(path)) throw IoError("file not found: " + path.string());
  AudioClip clip = load_wav(path);
  if (e.start_s) clip = segment(clip, *e.start_s, *e.end_s);
  clip.id = e.clip_id();
  return normalize_peak_spl(clip, target_db);
}

/// load, segment, normalize, extract for every entry. A failing entry becomes
/// an Exclusion carrying the error text; output keeps manifest order.
inline Dataset build_dataset(const std::vector<ManifestEntry>& manifest, const std::filesystem::path& audio_root,
                             const BuildOptions& options = {}) {
  if (!std::filesystem::is_directory(audio_root))
    throw IoError("audio root '" + audio_root.string() + "' is not a directory");
  Dataset ds;
  if (manifest.empty()) {
    ds.warnings.push_back("manifest is empty; dataset has no samples");
    return ds;
  }
  std::vector<std::optional<LabeledSample>> results(manifest.size());
  std::vector<std::string> errors(manifest.size());
  parallel_for(manifest.size(), options.jobs, [&](std::size_t i) {
    const ManifestEntry& e = manifest[i];
    try {
      const AudioClip clip = load_entry(e, audio_root, options.target_db);
      results[i] = LabeledSample{clip.id, e.speaker_id, e.label, extract_manual_features(clip)};
    } catch (const std::exception& ex) {
      errors[i] = ex.what();
    }
  });
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    if (results[i]) {
      ds.samples.push_back(std::move(*results[i]));
    } else {
      const ManifestEntry& e = manifest[i];
      ds.exclusions.push_back({e.file, e.clip_id(), e.speaker_id, e.label, errors[i]});
    }
  }
  return ds;
}

inline nlohmann::json exclusions_json(const Dataset& ds) {
  nlohmann::json j;
  j["samples"] = ds.samples.size();
  j["excluded"] = nlohmann::json::array();
  for (const auto& x : ds.exclusions)
    j["excluded"].push_back({{"file", x.file},
                             {"clip_id", x.clip_id},
                             {"speaker_id", x.speaker_id},
                             {"label", std::string(label_token(x.label))},
                             {"reason", x.reason}});
  j["warnings"] = ds.warnings;
  return j;
}

// ---------------------------------------------------------------------------
// Feature CSV: clip_id,speaker_id,label followed by the 19 feature columns.

inline std::string features_csv_header() {
  std::string h = "clip_id,speaker_id,label";
  for (auto name : kFeatureNames) h += "," + std::string(name);
  return h;
}

inline std::string format_features_csv(const std::vector<LabeledSample>& samples) {
  std::string out = features_csv_header() + "\n";
  char buf[40];
  for (const auto& s : samples) {
    for (const std::string* field : {&s.clip_id, &s.speaker_id})
      if (field->find_first_of(",\"\n\r") != std::string::npos)
        throw FormatError("identifier '" + *field + "' cannot be written to CSV");
    out += s.clip_id + "," + s.speaker_id + "," + std::string(label_token(s.label));
    for (double v : s.features.to_array()) {
      std::snprintf(buf, sizeof buf, ",%.17g", v);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

inline std::vector<LabeledSample> parse_features_csv(std::string_view text, const std::string& source = "features") {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::vector<LabeledSample> out;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = source + ":" + std::to_string(line_no);
    if (detail::trim(line).empty()) continue;
    if (!have_header) {
      if (detail::trim(line) != features_csv_header()) throw FormatError(where + ": unexpected feature CSV header");
      have_header = true;
      continue;
    }
    const auto f = detail::split_csv_line(line);
    if (f.size() != 3 + kFeatureCount)
      throw FormatError(where + ": expected " + std::to_string(3 + kFeatureCount) + " columns");
    LabeledSample s;
    s.clip_id = f[0];
    s.speaker_id = f[1];
    const auto label = try_parse_label(f[2]);
    if (!label) throw FormatError(where + ": unknown label token '" + f[2] + "'");
    s.label = *label;
    std::array<double, kFeatureCount> v{};
    for (std::size_t j = 0; j < kFeatureCount; ++j) v[j] = detail::parse_real(f[3 + j], where);
    s.features = ManualFeatures::from_array(v);
    out.push_back(std::move(s));
  }
  if (!have_header) throw FormatError(source + ": empty feature CSV");
  return out;
}

inline std::vector<LabeledSample> load_features_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open feature CSV '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_features_csv(buf.str(), path.string());
}

// ---------------------------------------------------------------------------
// Synthetic laughter corpus.

/// Parameters of one synthetic laugh.
struct LaughRecipe {
  int sample_rate_hz = 16000;
  double f0_hz = 200.0;
  double f1_hz = 650.0;
  double f2_hz = 1400.0;
  double f3_hz = 2600.0;
  double source_tilt = 0.85;     // one-pole low-pass on the pulse train, 0..1
  int bursts = 5;
  double burst_s = 0.11;
  double period_s = 0.22;        // burst onset to onset
  double decay_per_burst = 0.2;  // amplitude falls by exp(-decay) each burst
  double lead_s = 0.1;
  double tail_s = 0.15;
  double noise_db = -45.0;       // aspiration floor relative to peak
};

namespace detail {

inline void resonate(std::vector<double>& x, double freq, double bandwidth, double rate) {
  const double r = std::exp(-std::numbers::pi * bandwidth / rate);
  const double a1 = 2.0 * r * std::cos(2.0 * std::numbers::pi * freq / rate);
  const double a2 = -r * r;
  const double gain = 1.0 - r;
  double y1 = 0.0;
  double y2 = 0.0;
  for (double& v : x) {
    const double y = gain * v + a1 * y1 + a2 * y2;
    y2 = y1;
    y1 = y;
    v = y;
  }
}

}  // namespace detail

/// Renders a burst-train laugh: a pulse train at f0 with small declination,
/// spectrally tilted, filtered through three formant resonators, gated by
/// Hann-shaped burst envelopes over a low aspiration-noise floor. Peak 0.5.
inline AudioClip render_laugh(const LaughRecipe& r, Rng& rng, std::string id) {
  const double rate = r.sample_rate_hz;
  const double total_s = r.lead_s + (r.bursts - 1) * r.period_s + r.burst_s + r.tail_s;
  const auto n = static_cast<std::size_t>(std::lround(total_s * rate));
  std::vector<double> envelope(n, 0.0);
  std::vector<double> source(n, 0.0);
  double phase = 0.0;
  for (int b = 0; b < r.bursts; ++b) {
    const double onset = r.lead_s + b * r.period_s;
    const double amp = std::exp(-r.decay_per_burst * b);
    const auto first = static_cast<std::size_t>(std::lround(onset * rate));
    const auto len = static_cast<std::size_t>(std::lround(r.burst_s * rate));
    for (std::size_t k = 0; k < len && first + k < n; ++k) {
      const double u = static_cast<double>(k) / static_cast<double>(len);
      envelope[first + k] = amp * std::sin(std::numbers::pi * u);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate;
    const double f0 = r.f0_hz * (1.0 + 0.04 * std::sin(2.0 * std::numbers::pi * t / r.period_s));
    phase += f0 / rate;
    if (phase >= 1.0) {
      phase -= 1.0;
      source[i] = 1.0;
    }
  }
  double y = 0.0;
  for (double& v : source) {
    y = (1.0 - r.source_tilt) * v + r.source_tilt * y;
    v = y;
  }
  detail::resonate(source, r.f1_hz, 80.0, rate);
  detail::resonate(source, r.f2_hz, 110.0, rate);
  detail::resonate(source, r.f3_hz, 160.0, rate);
  double voiced_peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    source[i] *= envelope[i];
    voiced_peak = std::max(voiced_peak, std::abs(source[i]));
  }
  const double noise_amp = voiced_peak * std::pow(10.0, r.noise_db / 20.0);
  std::vector<double> out(n);
  double peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = source[i] + noise_amp * rng.normal();
    peak = std::max(peak, std::abs(out[i]));
  }
  for (double& v : out) v *= 0.5 / peak;
  return AudioClip(std::move(id), std::move(out), r.sample_rate_hz);
}

struct SynthOptions {
  int sample_rate_hz = 16000;
  /// Scales every between-class difference; 0 draws both classes from one
  /// distribution.
  double effect_scale = 1.0;
};

/// Class-conditional recipe. Class b gets a higher F0 centre, higher F1, a
/// flatter source spectrum and a flatter burst-intensity contour.
inline LaughRecipe draw_recipe(Label label, Rng& rng, const SynthOptions& opt) {
  const double s = label == Label::kLaughAt ? opt.effect_scale : 0.0;
  LaughRecipe r;
  r.sample_rate_hz = opt.sample_rate_hz;
  r.f0_hz = rng.normal(180.0 + 70.0 * s, 18.0);
  r.f1_hz = rng.normal(600.0 + 180.0 * s, 35.0);
  r.f2_hz = std::max(r.f1_hz + 400.0, rng.normal(1450.0, 70.0));
  r.f3_hz = rng.normal(2600.0, 100.0);
  r.source_tilt = std::clamp(rng.normal(0.90 - 0.12 * s, 0.02), 0.5, 0.97);
  r.bursts = 4 + static_cast<int>(rng.below(4));
  r.burst_s = rng.uniform(0.09, 0.13);
  r.period_s = r.burst_s + rng.uniform(0.09, 0.13);
  r.decay_per_burst = std::max(0.0, rng.normal(0.25 - 0.17 * s, 0.04));
  return r;
}

/// Writes 2 * n_per_class WAV files and `manifest.csv` into out_dir and
/// returns the manifest path. One speaker per clip. Same seed, same bytes.
inline std::filesystem::path synth_corpus(int n_per_class, std::uint64_t seed, const std::filesystem::path& out_dir,
                                          const SynthOptions& options = {}) {
  if (n_per_class < 1) throw InvalidArgument("synth_corpus: n_per_class must be >= 1");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir))
    throw IoError("cannot create corpus directory '" + out_dir.string() + "'");
  Rng rng(seed);
  std::vector<ManifestEntry> entries;
  for (int i = 0; i < n_per_class; ++i) {
    for (Label label : {Label::kLaughWith, Label::kLaughAt}) {
      char name[64];
      std::snprintf(name, sizeof name, "%s_%03d", std::string(label_token(label)).c_str(), i + 1);
      char speaker[64];
      std::snprintf(speaker, sizeof speaker, "spk%s%03d", std::string(label_token(label)).c_str(), i + 1);
      const LaughRecipe recipe = draw_recipe(label, rng, options);
      const AudioClip clip = render_laugh(recipe, rng, name);
      write_wav(out_dir / (std::string(name) + ".wav"), clip);
      entries.push_back({std::string(name) + ".wav", label, speaker, std::nullopt, std::nullopt});
    }
  }
  const std::filesystem::path manifest = out_dir / "manifest.csv";
  std::ofstream out(manifest, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + manifest.string() + "'");
  out << format_manifest(entries);
  if (!out) throw IoError("error writing '" + manifest.string() + "'");
  return manifest;
}

}  // namespace laughsense::corpus
