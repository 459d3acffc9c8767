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


// Listening-experiment backend. Each session presents every stimulus once in
// its own random order and records one forced-choice judgment (a, b or other)
// per stimulus. Sessions and judgments are appended to newline-delimited JSON
// logs in the data directory; replaying the logs rebuilds all state.

#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "laughsense/corpus.hpp"
#include "laughsense/error.hpp"
#include "laughsense/rng.hpp"
#include "laughsense/sample.hpp"

namespace laughsense::perception {

/// Error carrying the HTTP status the service maps it to.
class ServiceError : public Error {
 public:
  ServiceError(int status, const std::string& what) : Error(what), status_(status) {}
  [[nodiscard]] int status() const noexcept { return status_; }

 private:
  int status_;
};

inline ServiceError not_found(const std::string& what) { return {404, what}; }
inline ServiceError conflict(const std::string& what) { return {409, what}; }
inline ServiceError unprocessable(const std::string& what) { return {422, what}; }

struct Stimulus {
  std::string id;
  Label truth = Label::kLaughWith;
  corpus::ManifestEntry entry;
};

/// One stimulus per manifest entry, identified by its clip id.
inline std::vector<Stimulus> stimuli_from_manifest(const std::vector<corpus::ManifestEntry>& manifest) {
  std::vector<Stimulus> out;
  std::set<std::string> ids;
  for (const auto& e : manifest) {
    Stimulus s{e.clip_id(), e.label, e};
    if (!ids.insert(s.id).second) throw InvalidArgument("duplicate stimulus id '" + s.id + "'");
    out.push_back(std::move(s));
  }
  return out;
}

enum class Choice { kA, kB, kOther };

inline std::string_view choice_token(Choice c) {
  switch (c) {
    case Choice::kA:
      return "a";
    case Choice::kB:
      return "b";
    default:
      return "other";
  }
}

inline std::optional<Choice> parse_choice(std::string_view s) {
  if (s == "a") return Choice::kA;
  if (s == "b") return Choice::kB;
  if (s == "other" || s == "c") return Choice::kOther;
  return std::nullopt;
}

/// Wording of the three answer options shown to listeners.
inline constexpr std::array<std::string_view, 3> kChoiceWording = {
    "pleasant, friendly and / or affectionate", "unpleasant, aggressive and / or hostile", "other"};

struct ParticipantMeta {
  std::string age;
  std::string gender;
};

struct Session {
  std::string session_id;
  ParticipantMeta participant;
  std::vector<std::string> stimulus_order;
  std::size_t cursor = 0;

  [[nodiscard]] bool done() const noexcept { return cursor >= stimulus_order.size(); }
};

struct Judgment {
  std::string session_id;
  std::string stimulus_id;
  Choice choice = Choice::kOther;
  Label truth = Label::kLaughWith;
  std::string responded_at;
  int replays = 0;
};

/// counts[truth a/b][choice a/b/other]
struct ListenerConfusion {
  std::array<std::array<std::size_t, 3>, 2> counts{};

  void add(Label truth, Choice choice) { ++counts[label_index(truth)][static_cast<std::size_t>(choice)]; }
  [[nodiscard]] std::size_t row_sum(std::size_t t) const { return counts[t][0] + counts[t][1] + counts[t][2]; }
  [[nodiscard]] std::size_t total() const { return row_sum(0) + row_sum(1); }
};

/// The matrix plus the headline rates, each reported separately. Rates whose
/// denominator is zero are absent.
struct ConfusionSummary {
  ListenerConfusion matrix;
  std::size_t judgments = 0;
  std::size_t ab_responses = 0;
  std::optional<double> ab_accuracy;       // correct / (a or b responses)
  double ab_response_rate = 0.0;           // (a or b responses) / judgments
  double total_correct_rate = 0.0;         // correct / judgments
  double other_fraction = 0.0;
  std::array<std::optional<double>, 2> recognition_among_ab;  // per truth class
  std::array<std::optional<double>, 2> recognition_overall;   // per truth class
  double chance_level = 0.5;
};

inline ConfusionSummary summarize(const ListenerConfusion& m) {
  ConfusionSummary s;
  s.matrix = m;
  s.judgments = m.total();
  if (s.judgments == 0) throw unprocessable("no judgments recorded");
  const auto& c = m.counts;
  const std::size_t correct = c[0][0] + c[1][1];
  s.ab_responses = c[0][0] + c[0][1] + c[1][0] + c[1][1];
  const double n = static_cast<double>(s.judgments);
  s.ab_response_rate = static_cast<double>(s.ab_responses) / n;
  s.total_correct_rate = static_cast<double>(correct) / n;
  s.other_fraction = static_cast<double>(c[0][2] + c[1][2]) / n;
  if (s.ab_responses > 0) s.ab_accuracy = static_cast<double>(correct) / static_cast<double>(s.ab_responses);
  for (std::size_t t = 0; t < 2; ++t) {
    const std::size_t ab = c[t][0] + c[t][1];
    if (ab > 0) s.recognition_among_ab[t] = static_cast<double>(c[t][t]) / static_cast<double>(ab);
    if (m.row_sum(t) > 0) s.recognition_overall[t] = static_cast<double>(c[t][t]) / static_cast<double>(m.row_sum(t));
  }
  return s;
}

inline nlohmann::json to_json(const ConfusionSummary& s) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  const auto& c = s.matrix.counts;
  return {{"truth_labels", {"a", "b"}},
          {"choice_labels", {"a", "b", "other"}},
          {"counts", {{c[0][0], c[0][1], c[0][2]}, {c[1][0], c[1][1], c[1][2]}}},
          {"judgments", s.judgments},
          {"ab_responses", s.ab_responses},
          {"ab_accuracy", opt(s.ab_accuracy)},
          {"ab_accuracy_defined", s.ab_accuracy.has_value()},
          {"ab_response_rate", s.ab_response_rate},
          {"total_correct_rate", s.total_correct_rate},
          {"other_fraction", s.other_fraction},
          {"recognition_among_ab", {{"a", opt(s.recognition_among_ab[0])}, {"b", opt(s.recognition_among_ab[1])}}},
          {"recognition_overall", {{"a", opt(s.recognition_overall[0])}, {"b", opt(s.recognition_overall[1])}}},
          {"chance_level", s.chance_level}};
}

struct NextStimulus {
  bool done = false;
  std::optional<std::string> stimulus_id;
  std::size_t position = 0;  // judgments already given
  std::size_t total = 0;
};

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
  return buf;
}

/// Session and judgment state backed by append-only logs. All mutations go
/// through one writer lock; reads take a shared lock and see a consistent
/// snapshot.
class SessionStore {
 public:
  static constexpr const char* kSessionsLog = "sessions.ndjson";
  static constexpr const char* kJudgmentsLog = "judgments.ndjson";

  SessionStore(std::vector<Stimulus> stimuli, std::filesystem::path data_dir)
      : stimuli_(std::move(stimuli)), data_dir_(std::move(data_dir)) {
    for (std::size_t i = 0; i < stimuli_.size(); ++i) index_.emplace(stimuli_[i].id, i);
    std::error_code ec;
    std::filesystem::create_directories(data_dir_, ec);
    if (!std::filesystem::is_directory(data_dir_))
      throw IoError("cannot create data directory '" + data_dir_.string() + "'");
    replay();
    sessions_out_.open(data_dir_ / kSessionsLog, std::ios::app | std::ios::binary);
    judgments_out_.open(data_dir_ / kJudgmentsLog, std::ios::app | std::ios::binary);
    if (!sessions_out_ || !judgments_out_) throw IoError("cannot open logs in '" + data_dir_.string() + "'");
  }

  SessionStore(const SessionStore&) = delete;
  SessionStore& operator=(const SessionStore&) = delete;

  [[nodiscard]] const std::vector<Stimulus>& stimuli() const noexcept { return stimuli_; }

  [[nodiscard]] const Stimulus& stimulus(const std::string& id) const {
    const auto it = index_.find(id);
    if (it == index_.end()) throw not_found("unknown stimulus '" + id + "'");
    return stimuli_[it->second];
  }

  /// New session with a freshly seeded permutation, logged before returning.
  Session create_session(const ParticipantMeta& meta = {}) {
    if (stimuli_.empty()) throw unprocessable("no stimuli loaded");
    std::random_device entropy;
    const std::uint64_t seed = (static_cast<std::uint64_t>(entropy()) << 32) ^ entropy();
    Session s;
    s.participant = meta;
    s.stimulus_order.reserve(stimuli_.size());
    for (const auto& st : stimuli_) s.stimulus_order.push_back(st.id);
    Rng(seed).shuffle(s.stimulus_order.begin(), s.stimulus_order.end());

    std::unique_lock lock(mutex_);
    do {
      s.session_id = random_id(entropy);
    } while (sessions_.contains(s.session_id));
    const nlohmann::json rec = {{"session_id", s.session_id},
                                {"participant", {{"age", meta.age}, {"gender", meta.gender}}},
                                {"order", s.stimulus_order},
                                {"created_at", utc_timestamp()}};
    append(sessions_out_, rec);
    sessions_.emplace(s.session_id, s);
    return s;
  }

  [[nodiscard]] Session session(const std::string& id) const {
    std::shared_lock lock(mutex_);
    return find(id);
  }

  /// Stimulus at the cursor. Does not advance, so repeated calls agree.
  [[nodiscard]] NextStimulus next_stimulus(const std::string& session_id) const {
    std::shared_lock lock(mutex_);
    const Session& s = find(session_id);
    NextStimulus n;
    n.total = s.stimulus_order.size();
    n.position = s.cursor;
    n.done = s.done();
    if (!n.done) n.stimulus_id = s.stimulus_order[s.cursor];
    return n;
  }

  /// Records a judgment for the session's current stimulus and advances it.
  Judgment record_judgment(const std::string& session_id, const std::string& stimulus_id,
                           std::string_view choice_token_in, int replays = 0) {
    const auto choice = parse_choice(choice_token_in);
    std::unique_lock lock(mutex_);
    Session& s = find(session_id);
    if (!choice) throw unprocessable("invalid choice '" + std::string(choice_token_in) + "' (expected a, b or other)");
    if (replays < 0) throw unprocessable("replays must be non-negative");
    if (!index_.contains(stimulus_id)) throw unprocessable("unknown stimulus '" + stimulus_id + "'");
    if (judged_.contains({session_id, stimulus_id}))
      throw conflict("stimulus '" + stimulus_id + "' already judged in this session");
    if (s.done() || s.stimulus_order[s.cursor] != stimulus_id)
      throw conflict("stimulus '" + stimulus_id + "' is not the session's current stimulus");
    Judgment j{session_id, stimulus_id, *choice, stimulus(stimulus_id).truth, utc_timestamp(), replays};
    append(judgments_out_, judgment_json(j));
    apply(s, j);
    return j;
  }

  [[nodiscard]] ListenerConfusion confusion() const {
    std::shared_lock lock(mutex_);
    return confusion_;
  }

  [[nodiscard]] ConfusionSummary confusion_report() const { return summarize(confusion()); }

  [[nodiscard]] std::size_t judgment_count() const {
    std::shared_lock lock(mutex_);
    return judged_.size();
  }

  [[nodiscard]] std::size_t session_count() const {
    std::shared_lock lock(mutex_);
    return sessions_.size();
  }

 private:
  static nlohmann::json judgment_json(const Judgment& j) {
    return {{"session_id", j.session_id},
            {"stimulus_id", j.stimulus_id},
            {"choice", std::string(choice_token(j.choice))},
            {"truth", std::string(label_token(j.truth))},
            {"responded_at", j.responded_at},
            {"replays", j.replays}};
  }

  static std::string random_id(std::random_device& entropy) {
    char buf[33];
    for (int i = 0; i < 4; ++i) std::snprintf(buf + 8 * i, 9, "%08x", entropy());
    return std::string(buf, 32);
  }

  static void append(std::ofstream& out, const nlohmann::json& rec) {
    out << rec.dump() << '\n';
    out.flush();
    if (!out) throw IoError("failed to append to log");
  }

  Session& find(const std::string& id) {
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) throw not_found("unknown session '" + id + "'");
    return it->second;
  }
  [[nodiscard]] const Session& find(const std::string& id) const {
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) throw not_found("unknown session '" + id + "'");
    return it->second;
  }

  void apply(Session& s, const Judgment& j) {
    judged_.insert({s.session_id, j.stimulus_id});
    ++s.cursor;
    confusion_.add(j.truth, j.choice);
  }

  // Reads one log. A torn final record (crash mid-append) is cut off the
  // file so later appends start on a fresh line; any other malformed line is
  // an error.
  static std::vector<nlohmann::json> read_log(const std::filesystem::path& path) {
    std::vector<nlohmann::json> out;
    std::ifstream in(path, std::ios::binary);
    if (!in) return out;
    std::stringstream buf;
    buf << in.rdbuf();
    in.close();
    const std::string text = buf.str();
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < text.size()) {
      const std::size_t nl = text.find('\n', pos);
      const std::size_t stop = nl == std::string::npos ? text.size() : nl;
      ++line_no;
      const std::string_view line(text.data() + pos, stop - pos);
      if (!line.empty()) {
        auto rec = nlohmann::json::parse(line, nullptr, false);
        const bool last = stop + 1 >= text.size();
        if (rec.is_discarded() || nl == std::string::npos) {
          if (!last) throw FormatError(path.string() + ": corrupt record on line " + std::to_string(line_no));
          std::filesystem::resize_file(path, pos);
          break;
        }
        out.push_back(std::move(rec));
      }
      pos = stop + 1;
    }
    return out;
  }

  void replay() {
    for (const auto& rec : read_log(data_dir_ / kSessionsLog)) {
      Session s;
      s.session_id = rec.at("session_id").get<std::string>();
      s.participant.age = rec.at("participant").value("age", "");
      s.participant.gender = rec.at("participant").value("gender", "");
      s.stimulus_order = rec.at("order").get<std::vector<std::string>>();
      sessions_.emplace(s.session_id, std::move(s));
    }
    for (const auto& rec : read_log(data_dir_ / kJudgmentsLog)) {
      Judgment j;
      j.session_id = rec.at("session_id").get<std::string>();
      j.stimulus_id = rec.at("stimulus_id").get<std::string>();
      const auto choice = parse_choice(rec.at("choice").get<std::string>());
      if (!choice) throw FormatError("judgment log: bad choice");
      j.choice = *choice;
      j.truth = parse_label(rec.at("truth").get<std::string>());
      j.responded_at = rec.value("responded_at", "");
      j.replays = rec.value("replays", 0);
      auto it = sessions_.find(j.session_id);
      if (it == sessions_.end()) throw FormatError("judgment log references unknown session " + j.session_id);
      Session& s = it->second;
      if (s.done() || s.stimulus_order[s.cursor] != j.stimulus_id)
        throw FormatError("judgment log out of order for session " + j.session_id);
      apply(s, j);
    }
  }

  std::vector<Stimulus> stimuli_;
  std::map<std::string, std::size_t> index_;
  std::filesystem::path data_dir_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, Session> sessions_;
  std::set<std::pair<std::string, std::string>> judged_;
  ListenerConfusion confusion_;
  std::ofstream sessions_out_;
  std::ofstream judgments_out_;
};

}  // namespace laughsense::perception
