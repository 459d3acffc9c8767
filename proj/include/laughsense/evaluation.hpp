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


// Speaker-grouped k-fold cross-validation: speakers, never individual clips,
// are dealt into folds, and every clip is predicted by a model that never saw
// its speaker.

#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "laughsense/error.hpp"
#include "laughsense/learners.hpp"
#include "laughsense/parallel.hpp"
#include "laughsense/rng.hpp"
#include "laughsense/sample.hpp"

namespace laughsense::eval {

/// Disjoint, non-empty speaker groups covering every speaker.
struct CvPlan {
  std::vector<std::vector<std::string>> folds;
  std::uint64_t seed = 0;
};

/// Shuffles the (deduplicated, sorted) speakers with the seeded generator and
/// deals them round-robin into k folds.
inline CvPlan make_speaker_folds(std::vector<std::string> speakers, std::size_t k, std::uint64_t seed) {
  std::sort(speakers.begin(), speakers.end());
  speakers.erase(std::unique(speakers.begin(), speakers.end()), speakers.end());
  if (k < 2) throw InvalidArgument("cross-validation needs at least 2 folds");
  if (speakers.size() < k)
    throw InvalidArgument("cannot split " + std::to_string(speakers.size()) + " speakers into " +
                          std::to_string(k) + " folds");
  Rng rng(seed);
  rng.shuffle(speakers.begin(), speakers.end());
  CvPlan plan;
  plan.seed = seed;
  plan.folds.resize(k);
  for (std::size_t i = 0; i < speakers.size(); ++i) plan.folds[i % k].push_back(speakers[i]);
  for (auto& f : plan.folds) std::sort(f.begin(), f.end());
  return plan;
}

struct ConfusionMatrix2x2 {
  // counts[truth][predicted], index 0 = a, 1 = b
  std::array<std::array<std::size_t, 2>, 2> counts{};

  void add(Label truth, Label predicted) { ++counts[label_index(truth)][label_index(predicted)]; }
  [[nodiscard]] std::size_t row_sum(std::size_t truth) const { return counts[truth][0] + counts[truth][1]; }
  [[nodiscard]] std::size_t total() const { return row_sum(0) + row_sum(1); }
  [[nodiscard]] std::size_t correct() const { return counts[0][0] + counts[1][1]; }

  ConfusionMatrix2x2& operator+=(const ConfusionMatrix2x2& o) {
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j) counts[i][j] += o.counts[i][j];
    return *this;
  }
  friend bool operator==(const ConfusionMatrix2x2&, const ConfusionMatrix2x2&) = default;
};

/// Unweighted average recall: the mean of the two per-class recalls.
inline double uar(const ConfusionMatrix2x2& m) {
  if (m.row_sum(0) == 0 || m.row_sum(1) == 0)
    throw InvalidArgument("uar: a truth class has no samples");
  const double ra = static_cast<double>(m.counts[0][0]) / static_cast<double>(m.row_sum(0));
  const double rb = static_cast<double>(m.counts[1][1]) / static_cast<double>(m.row_sum(1));
  return 0.5 * (ra + rb);
}

inline double accuracy(const ConfusionMatrix2x2& m) {
  if (m.total() == 0) throw InvalidArgument("accuracy: empty confusion matrix");
  return static_cast<double>(m.correct()) / static_cast<double>(m.total());
}

struct FoldResult {
  std::size_t index = 0;
  std::vector<std::string> test_speakers;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  bool skipped = false;
  std::string note;
  ConfusionMatrix2x2 confusion;
};

struct SamplePrediction {
  std::string clip_id;
  std::string speaker_id;
  Label truth = Label::kLaughWith;
  Label predicted = Label::kLaughWith;
  double score = 0.0;
  std::size_t fold = 0;
};

struct EvalReport {
  std::string learner_id;
  std::string feature_set_id = "manual19";
  std::uint64_t seed = 0;
  std::vector<FoldResult> folds;
  ConfusionMatrix2x2 pooled;
  std::optional<double> uar;  // absent when a class was never tested
  std::optional<double> accuracy;
  std::vector<SamplePrediction> predictions;  // sorted by clip id
  std::vector<std::string> warnings;
  nlohmann::json metadata = nlohmann::json::object();
};

/// Checks that folds are disjoint, non-empty and assign every sample's
/// speaker to exactly one fold. Returns speaker -> fold index.
inline std::map<std::string, std::size_t> validate_plan(std::span<const LabeledSample> dataset,
                                                        const CvPlan& plan) {
  if (plan.folds.size() < 2) throw InvalidArgument("cv plan needs at least 2 folds");
  std::map<std::string, std::size_t> fold_of;
  for (std::size_t f = 0; f < plan.folds.size(); ++f) {
    if (plan.folds[f].empty()) throw InvalidArgument("cv plan: fold " + std::to_string(f) + " is empty");
    for (const auto& spk : plan.folds[f]) {
      auto [it, inserted] = fold_of.emplace(spk, f);
      if (!inserted)
        throw InvalidArgument("cv plan: speaker '" + spk + "' appears in folds " + std::to_string(it->second) +
                              " and " + std::to_string(f));
    }
  }
  for (const auto& s : dataset)
    if (!fold_of.contains(s.speaker_id))
      throw InvalidArgument("cv plan: speaker '" + s.speaker_id + "' of clip '" + s.clip_id + "' is in no fold");
  return fold_of;
}

/// A trainer maps learn::Examples to a predictor callable on a feature row
/// that returns learn::Prediction.
template <class Trainer>
EvalReport run_cv(std::span<const LabeledSample> dataset, const CvPlan& plan, Trainer&& trainer,
                  std::string learner_id, int jobs = 1) {
  const auto fold_of = validate_plan(dataset, plan);

  // Canonical order so results do not depend on how the dataset was listed.
  std::vector<const LabeledSample*> ordered;
  ordered.reserve(dataset.size());
  for (const auto& s : dataset) ordered.push_back(&s);
  std::sort(ordered.begin(), ordered.end(), [](const LabeledSample* a, const LabeledSample* b) {
    if (a->speaker_id != b->speaker_id) return a->speaker_id < b->speaker_id;
    if (a->clip_id != b->clip_id) return a->clip_id < b->clip_id;
    return a->label < b->label;
  });

  EvalReport report;
  report.learner_id = std::move(learner_id);
  report.seed = plan.seed;
  report.folds.resize(plan.folds.size());
  std::vector<std::vector<SamplePrediction>> fold_predictions(plan.folds.size());

  parallel_for(plan.folds.size(), jobs, [&](std::size_t f) {
    FoldResult& result = report.folds[f];
    result.index = f;
    result.test_speakers = plan.folds[f];
    learn::Examples train;
    std::vector<const LabeledSample*> test;
    std::set<std::string> train_speakers;
    for (const LabeledSample* s : ordered) {
      if (fold_of.at(s->speaker_id) == f) {
        test.push_back(s);
      } else {
        const auto v = s->features.to_array();
        train.add(std::vector<double>(v.begin(), v.end()), s->label);
        train_speakers.insert(s->speaker_id);
      }
    }
    for (const LabeledSample* s : test)
      if (train_speakers.contains(s->speaker_id))
        throw std::logic_error("speaker '" + s->speaker_id + "' in both train and test of fold " + std::to_string(f));
    result.train_size = train.size();
    result.test_size = test.size();
    if (test.empty()) {
      result.skipped = true;
      result.note = "no test samples";
      return;
    }
    const bool has_a = std::find(train.labels.begin(), train.labels.end(), Label::kLaughWith) != train.labels.end();
    const bool has_b = std::find(train.labels.begin(), train.labels.end(), Label::kLaughAt) != train.labels.end();
    if (!has_a || !has_b || train.size() < 2) {
      result.skipped = true;
      result.note = "training split has a single class";
      return;
    }
    const auto predictor = trainer(train);
    for (const LabeledSample* s : test) {
      const auto v = s->features.to_array();
      const learn::Prediction p = predictor(std::span<const double>(v));
      result.confusion.add(s->label, p.label);
      fold_predictions[f].push_back({s->clip_id, s->speaker_id, s->label, p.label, p.score, f});
    }
  });

  for (std::size_t f = 0; f < report.folds.size(); ++f) {
    const FoldResult& r = report.folds[f];
    if (r.skipped)
      report.warnings.push_back("fold " + std::to_string(f) + " skipped: " + r.note + " (" +
                                std::to_string(r.test_size) + " test samples unpredicted)");
    report.pooled += r.confusion;
    for (auto& p : fold_predictions[f]) report.predictions.push_back(std::move(p));
  }
  std::sort(report.predictions.begin(), report.predictions.end(),
            [](const SamplePrediction& a, const SamplePrediction& b) {
              return a.clip_id != b.clip_id ? a.clip_id < b.clip_id : a.speaker_id < b.speaker_id;
            });
  if (report.pooled.total() > 0) report.accuracy = accuracy(report.pooled);
  if (report.pooled.row_sum(0) > 0 && report.pooled.row_sum(1) > 0) {
    report.uar = uar(report.pooled);
  } else {
    report.warnings.push_back("UAR undefined: a class was never tested");
  }
  return report;
}

/// Cross-validation with one of the two built-in learners.
inline EvalReport run_cv(std::span<const LabeledSample> dataset, const CvPlan& plan, learn::LearnerKind kind,
                         int jobs = 1) {
  auto trainer = [kind](const learn::Examples& train) {
    learn::Model model = learn::train(kind, train);
    return [model = std::move(model)](std::span<const double> x) { return learn::predict(model, x); };
  };
  EvalReport report = run_cv(dataset, plan, trainer, std::string(learn::learner_name(kind)), jobs);
  if (kind == learn::LearnerKind::kGbt) {
    const learn::GbtParams p;
    report.metadata["gbt"] = {{"eta", p.eta}, {"max_depth", p.max_depth}, {"subsample", p.subsample},
                              {"lambda", p.lambda}, {"rounds", p.rounds}, {"min_child_weight", p.min_child_weight}};
  } else {
    const learn::SvmParams p;
    report.metadata["svm"] = {{"c", p.c}, {"tolerance", p.tolerance}, {"max_epochs", p.max_epochs}};
  }
  report.metadata["standardization"] = "per-fold z-score fit on training split";
  return report;
}

inline nlohmann::json confusion_json(const ConfusionMatrix2x2& m) {
  return {{"labels", {"a", "b"}},
          {"counts", {{m.counts[0][0], m.counts[0][1]}, {m.counts[1][0], m.counts[1][1]}}}};
}

inline nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["learner"] = r.learner_id;
  j["feature_set"] = r.feature_set_id;
  j["seed"] = r.seed;
  j["n_folds"] = r.folds.size();
  j["uar"] = r.uar ? nlohmann::json(*r.uar) : nlohmann::json(nullptr);
  j["accuracy"] = r.accuracy ? nlohmann::json(*r.accuracy) : nlohmann::json(nullptr);
  j["pooled_confusion"] = confusion_json(r.pooled);
  j["folds"] = nlohmann::json::array();
  for (const auto& f : r.folds) {
    j["folds"].push_back({{"index", f.index},
                          {"test_speakers", f.test_speakers},
                          {"train_size", f.train_size},
                          {"test_size", f.test_size},
                          {"skipped", f.skipped},
                          {"note", f.note},
                          {"confusion", confusion_json(f.confusion)}});
  }
  j["predictions"] = nlohmann::json::array();
  for (const auto& p : r.predictions) {
    j["predictions"].push_back({{"clip_id", p.clip_id},
                                {"speaker_id", p.speaker_id},
                                {"truth", std::string(label_token(p.truth))},
                                {"predicted", std::string(label_token(p.predicted))},
                                {"score", p.score},
                                {"fold", p.fold}});
  }
  j["warnings"] = r.warnings;
  j["metadata"] = r.metadata;
  return j;
}

inline std::string format_text(const EvalReport& r) {
  std::ostringstream out;
  char buf[160];
  out << "learner: " << r.learner_id << "   features: " << r.feature_set_id << "   seed: " << r.seed << '\n';
  out << "fold  speakers  train  test  acc     note\n";
  for (const auto& f : r.folds) {
    std::string acc = "   -  ";
    if (!f.skipped && f.confusion.total() > 0) {
      std::snprintf(buf, sizeof buf, "%6.3f", accuracy(f.confusion));
      acc = buf;
    }
    std::snprintf(buf, sizeof buf, "%4zu  %8zu  %5zu  %4zu  %s  %s\n", f.index, f.test_speakers.size(),
                  f.train_size, f.test_size, acc.c_str(), f.note.c_str());
    out << buf;
  }
  const auto& c = r.pooled.counts;
  out << "\npooled confusion (rows = truth, columns = predicted)\n";
  std::snprintf(buf, sizeof buf, "          a      b\n   a  %5zu  %5zu\n   b  %5zu  %5zu\n", c[0][0], c[0][1],
                c[1][0], c[1][1]);
  out << buf;
  if (r.uar) {
    std::snprintf(buf, sizeof buf, "\nUAR      %.4f\n", *r.uar);
    out << buf;
  } else {
    out << "\nUAR      undefined\n";
  }
  if (r.accuracy) {
    std::snprintf(buf, sizeof buf, "accuracy %.4f\n", *r.accuracy);
    out << buf;
  }
  for (const auto& w : r.warnings) out << "warning: " << w << '\n';
  return out.str();
}

/// Confusion matrix as a self-contained SVG heat map. Cell shade is the
/// row-normalized rate.
inline std::string confusion_svg(const ConfusionMatrix2x2& m, const std::string& title) {
  std::ostringstream out;
  constexpr int kCell = 120;
  constexpr int kLeft = 110;
  constexpr int kTop = 70;
  const char* names[2] = {"a (with)", "b (at)"};
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kLeft + 2 * kCell + 20 << "\" height=\""
      << kTop + 2 * kCell + 60 << "\" font-family=\"sans-serif\">\n";
  std::string safe_title;
  for (char ch : title) {
    if (ch == '<') safe_title += "&lt;";
    else if (ch == '>') safe_title += "&gt;";
    else if (ch == '&') safe_title += "&amp;";
    else safe_title += ch;
  }
  out << "<text x=\"10\" y=\"24\" font-size=\"16\">" << safe_title << "</text>\n";
  out << "<text x=\"" << kLeft + kCell << "\" y=\"" << kTop - 28 << "\" font-size=\"13\" text-anchor=\"middle\">predicted</text>\n";
  for (std::size_t t = 0; t < 2; ++t) {
    out << "<text x=\"" << kLeft - 10 << "\" y=\"" << kTop + static_cast<int>(t) * kCell + kCell / 2
        << "\" font-size=\"13\" text-anchor=\"end\">" << names[t] << "</text>\n";
    out << "<text x=\"" << kLeft + static_cast<int>(t) * kCell + kCell / 2 << "\" y=\"" << kTop - 8
        << "\" font-size=\"13\" text-anchor=\"middle\">" << names[t] << "</text>\n";
    for (std::size_t p = 0; p < 2; ++p) {
      const double rate = m.row_sum(t) ? static_cast<double>(m.counts[t][p]) / static_cast<double>(m.row_sum(t)) : 0.0;
      const int shade = 255 - static_cast<int>(std::lround(rate * 200.0));
      const int x = kLeft + static_cast<int>(p) * kCell;
      const int y = kTop + static_cast<int>(t) * kCell;
      out << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << kCell << "\" height=\"" << kCell
          << "\" fill=\"rgb(" << shade << ',' << shade << ",255)\" stroke=\"black\"/>\n";
      char cell[64];
      std::snprintf(cell, sizeof cell, "%zu (%.1f%%)", m.counts[t][p], 100.0 * rate);
      out << "<text x=\"" << x + kCell / 2 << "\" y=\"" << y + kCell / 2 + 5
          << "\" font-size=\"14\" text-anchor=\"middle\">" << cell << "</text>\n";
    }
  }
  out << "<text x=\"10\" y=\"" << kTop + kCell << "\" font-size=\"13\" transform=\"rotate(-90 20 " << kTop + kCell
      << ")\">truth</text>\n";
  out << "</svg>\n";
  return out.str();
}

}  // namespace laughsense::eval
