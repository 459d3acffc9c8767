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

#include <algorithm>
#include <array>
#include <atomic>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "laughsense/evaluation.hpp"
#include "laughsense/rng.hpp"

using namespace laughsense;
using namespace laughsense::eval;
using Catch::Matchers::WithinAbs;

namespace {

std::vector<std::string> speaker_ids(std::size_t n) {
  std::vector<std::string> s;
  for (std::size_t i = 0; i < n; ++i) s.push_back("spk" + std::to_string(1000 + i));
  return s;
}

// Sample whose first feature encodes the speaker number and whose cog_hz
// carries the class signal with the given separation.
LabeledSample make_sample(Rng& rng, std::size_t speaker, std::size_t clip, Label label, double separation) {
  std::array<double, kFeatureCount> v{};
  for (double& x : v) x = rng.normal();
  v[0] = static_cast<double>(speaker);
  v[8] = rng.normal(label == Label::kLaughAt ? separation : 0.0, 1.0);
  LabeledSample s;
  s.clip_id = "clip" + std::to_string(100000 + clip);
  s.speaker_id = "spk" + std::to_string(1000 + speaker);
  s.label = label;
  s.features = ManualFeatures::from_array(v);
  return s;
}

std::vector<LabeledSample> balanced_set(Rng& rng, std::size_t speakers, std::size_t clips_per_speaker,
                                        double separation) {
  std::vector<LabeledSample> d;
  for (std::size_t s = 0; s < speakers; ++s)
    for (std::size_t c = 0; c < clips_per_speaker; ++c)
      d.push_back(make_sample(rng, s, d.size(), s % 2 == 0 ? Label::kLaughWith : Label::kLaughAt, separation));
  return d;
}

std::vector<std::string> speakers_of(const std::vector<LabeledSample>& d) {
  std::vector<std::string> s;
  for (const auto& x : d) s.push_back(x.speaker_id);
  return s;
}

auto constant_trainer(Label label) {
  return [label](const learn::Examples&) {
    return [label](std::span<const double>) { return learn::Prediction{label, 0.0}; };
  };
}

}  // namespace

TEST_CASE("make_speaker_folds sizes", "[evaluation]") {
  const CvPlan p20 = make_speaker_folds(speaker_ids(20), 10, 1);
  REQUIRE(p20.folds.size() == 10);
  for (const auto& f : p20.folds) CHECK(f.size() == 2);

  const CvPlan p90 = make_speaker_folds(speaker_ids(90), 10, 1);
  for (const auto& f : p90.folds) CHECK(f.size() == 9);

  const CvPlan p23 = make_speaker_folds(speaker_ids(23), 10, 1);
  std::size_t total = 0;
  for (const auto& f : p23.folds) {
    CHECK((f.size() == 2 || f.size() == 3));
    total += f.size();
  }
  CHECK(total == 23);

  CHECK_THROWS_AS(make_speaker_folds(speaker_ids(5), 10, 1), InvalidArgument);
  CHECK_THROWS_AS(make_speaker_folds(speaker_ids(5), 1, 1), InvalidArgument);
}

TEST_CASE("make_speaker_folds is deterministic per seed and ignores input order", "[evaluation]") {
  auto ids = speaker_ids(40);
  const CvPlan a = make_speaker_folds(ids, 10, 42);
  std::reverse(ids.begin(), ids.end());
  ids.push_back(ids.front());  // duplicates collapse
  const CvPlan b = make_speaker_folds(ids, 10, 42);
  CHECK(a.folds == b.folds);
  CHECK(a.seed == 42);
  CHECK(make_speaker_folds(ids, 10, 43).folds != a.folds);
}

TEST_CASE("uar and accuracy", "[evaluation]") {
  ConfusionMatrix2x2 perfect{{{{45, 0}, {0, 45}}}};
  CHECK(uar(perfect) == 1.0);
  ConfusionMatrix2x2 mixed{{{{30, 15}, {12, 33}}}};
  CHECK_THAT(uar(mixed), WithinAbs(0.7, 1e-12));
  CHECK_THAT(uar(mixed), WithinAbs((30.0 / 45 + 33.0 / 45) / 2, 1e-15));
  ConfusionMatrix2x2 constant{{{{45, 0}, {45, 0}}}};
  CHECK(uar(constant) == 0.5);
  CHECK(accuracy(constant) == 0.5);
  ConfusionMatrix2x2 empty_row{{{{3, 1}, {0, 0}}}};
  CHECK_THROWS_AS(uar(empty_row), InvalidArgument);
  CHECK_THROWS_AS(accuracy(ConfusionMatrix2x2{}), InvalidArgument);

  ConfusionMatrix2x2 m;
  m.add(Label::kLaughWith, Label::kLaughAt);
  m.add(Label::kLaughAt, Label::kLaughAt);
  CHECK(m.counts[0][1] == 1);
  CHECK(m.counts[1][1] == 1);
  CHECK(m.total() == 2);
}

TEST_CASE("run_cv with a constant predictor", "[evaluation]") {
  Rng rng(301);
  const auto data = balanced_set(rng, 20, 2, 0.0);
  const CvPlan plan = make_speaker_folds(speakers_of(data), 10, 7);
  const EvalReport r = run_cv(data, plan, constant_trainer(Label::kLaughWith), "const");
  REQUIRE(r.uar.has_value());
  CHECK(*r.uar == 0.5);
  CHECK(r.pooled.counts[1][0] == 20);
}

TEST_CASE("run_cv on a separable set", "[evaluation]") {
  Rng rng(303);
  const auto data = balanced_set(rng, 30, 3, 40.0);
  const CvPlan plan = make_speaker_folds(speakers_of(data), 10, 7);
  for (auto kind : {learn::LearnerKind::kSvm, learn::LearnerKind::kGbt}) {
    const EvalReport r = run_cv(data, plan, kind);
    CHECK(*r.uar == 1.0);
    CHECK(r.learner_id == learn::learner_name(kind));
    CHECK(r.feature_set_id == "manual19");
    CHECK(r.seed == 7);
    CHECK(r.warnings.empty());
  }
}

TEST_CASE("run_cv rejects corrupted plans", "[evaluation]") {
  Rng rng(305);
  auto data = balanced_set(rng, 20, 1, 1.0);
  CvPlan plan = make_speaker_folds(speakers_of(data), 10, 7);

  // Leakage probe: a duplicate of one speaker's clip with the label flipped,
  // and that speaker listed in a second fold.
  LabeledSample dup = data[0];
  dup.clip_id += "_dup";
  dup.label = dup.label == Label::kLaughAt ? Label::kLaughWith : Label::kLaughAt;
  data.push_back(dup);
  CvPlan leaky = plan;
  const std::size_t home = static_cast<std::size_t>(
      std::find_if(plan.folds.begin(), plan.folds.end(),
                   [&](const auto& f) { return std::count(f.begin(), f.end(), dup.speaker_id) > 0; }) -
      plan.folds.begin());
  leaky.folds[(home + 1) % leaky.folds.size()].push_back(dup.speaker_id);
  CHECK_THROWS_AS(run_cv(data, leaky, learn::LearnerKind::kSvm), InvalidArgument);

  CvPlan missing = plan;
  missing.folds[0].clear();
  missing.folds[0].push_back("nobody");
  CHECK_THROWS_AS(run_cv(data, missing, learn::LearnerKind::kSvm), InvalidArgument);

  CvPlan empty_fold = plan;
  empty_fold.folds.push_back({});
  CHECK_THROWS_AS(run_cv(data, empty_fold, learn::LearnerKind::kSvm), InvalidArgument);

  CvPlan one_fold;
  one_fold.folds = {speakers_of(data)};
  CHECK_THROWS_AS(run_cv(data, one_fold, learn::LearnerKind::kSvm), InvalidArgument);
}

TEST_CASE("run_cv skips folds whose training split has one class", "[evaluation]") {
  // Four speakers; class b lives only with spk1001, so holding it out leaves
  // a single-class training split.
  Rng rng(307);
  std::vector<LabeledSample> data;
  for (std::size_t s = 0; s < 4; ++s)
    data.push_back(make_sample(rng, s, s, s == 1 ? Label::kLaughAt : Label::kLaughWith, 5.0));
  CvPlan plan;
  plan.folds = {{"spk1000", "spk1002"}, {"spk1001"}, {"spk1003"}};
  const EvalReport r = run_cv(data, plan, learn::LearnerKind::kSvm);
  CHECK(r.folds[1].skipped);
  REQUIRE(r.warnings.size() >= 1);
  CHECK(r.warnings[0].find("fold 1 skipped") != std::string::npos);
  CHECK_FALSE(r.uar.has_value());
  CHECK(r.pooled.total() == 3);
}

TEST_CASE("cross-validation protocol properties on random manifests", "[evaluation][property]") {
  Rng rng(311);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t speakers = 10 + rng.below(40);
    std::vector<LabeledSample> data;
    for (std::size_t s = 0; s < speakers; ++s) {
      const std::size_t clips = 1 + rng.below(3);
      for (std::size_t c = 0; c < clips; ++c)
        data.push_back(make_sample(rng, s, data.size(), rng.below(2) ? Label::kLaughAt : Label::kLaughWith, 1.0));
    }
    const std::size_t k = 2 + rng.below(9);
    const CvPlan plan = make_speaker_folds(speakers_of(data), k, rng.below(1000));

    // Trainer remembers which speakers it saw; predictor asserts the probe
    // speaker is new to it.
    std::atomic<int> leaks{0};
    auto trainer = [&leaks](const learn::Examples& train) {
      std::set<double> seen;
      for (const auto& row : train.rows) seen.insert(row[0]);
      return [seen, &leaks](std::span<const double> x) {
        if (seen.contains(x[0])) ++leaks;
        return learn::Prediction{Label::kLaughAt, 0.0};
      };
    };
    const EvalReport r = run_cv(data, plan, trainer, "probe", 2);
    REQUIRE(leaks == 0);

    std::map<std::string, int> tested;
    for (const auto& p : r.predictions) ++tested[p.clip_id];
    std::size_t skipped = 0;
    for (const auto& f : r.folds)
      if (f.skipped) skipped += f.test_size;
    REQUIRE(tested.size() + skipped == data.size());
    for (const auto& [id, count] : tested) REQUIRE(count == 1);
    REQUIRE(r.pooled.total() == r.predictions.size());
  }
}

TEST_CASE("uar equals accuracy on balanced data", "[evaluation][property]") {
  Rng rng(313);
  for (int trial = 0; trial < 20; ++trial) {
    const auto data = balanced_set(rng, 20, 2, rng.uniform(0.0, 3.0));
    const EvalReport r = run_cv(data, make_speaker_folds(speakers_of(data), 10, 3), learn::LearnerKind::kSvm);
    REQUIRE(r.pooled.row_sum(0) == r.pooled.row_sum(1));
    REQUIRE(std::abs(*r.uar - *r.accuracy) < 1e-12);
  }
}

TEST_CASE("report is invariant to sample order and job count", "[evaluation][property]") {
  Rng rng(317);
  auto data = balanced_set(rng, 30, 2, 1.0);
  const CvPlan plan = make_speaker_folds(speakers_of(data), 10, 9);
  for (auto kind : {learn::LearnerKind::kSvm, learn::LearnerKind::kGbt}) {
    const EvalReport base = run_cv(data, plan, kind, 1);
    for (int trial = 0; trial < 3; ++trial) {
      rng.shuffle(data.begin(), data.end());
      const EvalReport r = run_cv(data, plan, kind, 1 + trial);
      REQUIRE(r.pooled == base.pooled);
      REQUIRE(*r.uar == *base.uar);
      REQUIRE(to_json(r).dump() == to_json(base).dump());
    }
  }
}

TEST_CASE("report rendering", "[evaluation]") {
  Rng rng(319);
  const auto data = balanced_set(rng, 20, 1, 3.0);
  const EvalReport r = run_cv(data, make_speaker_folds(speakers_of(data), 10, 5), learn::LearnerKind::kGbt);
  const nlohmann::json j = to_json(r);
  CHECK(j.at("learner").get<std::string>() == "gbt");
  CHECK(j.at("seed").get<std::uint64_t>() == 5);
  CHECK(j.at("folds").size() == 10);
  CHECK(j.contains("uar"));
  const std::string text = format_text(r);
  CHECK(text.find("UAR") != std::string::npos);
  const std::string svg = confusion_svg(r.pooled, "gbt");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
}
