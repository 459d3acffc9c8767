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


// HTTP binding of the listening-experiment store.
//
//   POST /sessions                  {"participant": {"age": "", "gender": ""}}
//        201 {"session_id", "total", "next_url"}
//   GET  /sessions/{id}/next
//        200 {"done", "position", "total", "stimulus": {"id", "audio_url"} | null}
//   POST /sessions/{id}/judgments   {"stimulus_id", "choice": "a"|"b"|"other", "replays"?}
//        201 {"accepted", "stimulus_id", "position", "total", "done"}
//   GET  /report/confusion
//        200 ConfusionSummary as JSON
//   GET  /stimuli/{id}/audio        audio/wav
//
// Errors are {"error": "..."} with 400 (malformed body), 404 (unknown
// session or stimulus), 409 (duplicate or out-of-order judgment) or 422
// (invalid choice, nothing to report).

#pragma once

#include <filesystem>
#include <string>

// Library headers (and with them Eigen) come before httplib: glibc's
// <resolv.h>, pulled in by httplib, defines a `_res` macro that breaks Eigen.
#include "laughsense/audio.hpp"
#include "laughsense/perception.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace laughsense::perception {

namespace detail {

inline void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

template <class Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const ServiceError& e) {
    send_json(res, e.status(), {{"error", e.what()}});
  } catch (const nlohmann::json::exception& e) {
    send_json(res, 400, {{"error", std::string("malformed request: ") + e.what()}});
  } catch (const std::exception& e) {
    send_json(res, 500, {{"error", e.what()}});
  }
}

inline nlohmann::json parse_body(const std::string& body) {
  if (body.empty()) return nlohmann::json::object();
  auto j = nlohmann::json::parse(body);
  if (!j.is_object()) throw ServiceError(400, "request body must be a JSON object");
  return j;
}

inline std::string audio_url(const std::string& stimulus_id) { return "/stimuli/" + stimulus_id + "/audio"; }

}  // namespace detail

/// WAV bytes for a stimulus, cut to its interval when the manifest gives one.
inline std::vector<unsigned char> stimulus_audio(const Stimulus& s, const std::filesystem::path& audio_root) {
  const std::filesystem::path path = audio_root / s.entry.file;
  if (!std::filesystem::exists(path)) throw not_found("audio for stimulus '" + s.id + "' is missing");
  if (!s.entry.start_s) return read_file_bytes(path);
  const AudioClip cut = segment(load_wav(path), *s.entry.start_s, *s.entry.end_s);
  return encode_wav(cut, WavEncoding::kFloat32);
}

/// Registers the service routes on `server`. The store must outlive it.
inline void mount(httplib::Server& server, SessionStore& store, std::filesystem::path audio_root) {
  using detail::guarded;
  using detail::send_json;

  server.Post("/sessions", [&store](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto body = detail::parse_body(req.body);
      ParticipantMeta meta;
      if (body.contains("participant")) {
        const auto& p = body.at("participant");
        meta.age = p.value("age", "");
        meta.gender = p.value("gender", "");
      }
      const Session s = store.create_session(meta);
      send_json(res, 201,
                {{"session_id", s.session_id},
                 {"total", s.stimulus_order.size()},
                 {"next_url", "/sessions/" + s.session_id + "/next"}});
    });
  });

  server.Get(R"(/sessions/([^/]+)/next)", [&store](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const NextStimulus n = store.next_stimulus(req.matches[1]);
      nlohmann::json body = {{"done", n.done}, {"position", n.position}, {"total", n.total}};
      body["stimulus"] = n.stimulus_id ? nlohmann::json{{"id", *n.stimulus_id}, {"audio_url", detail::audio_url(*n.stimulus_id)}}
                                       : nlohmann::json(nullptr);
      send_json(res, 200, body);
    });
  });

  server.Post(R"(/sessions/([^/]+)/judgments)", [&store](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const std::string session_id = req.matches[1];
      const auto body = detail::parse_body(req.body);
      if (!body.contains("stimulus_id") || !body.at("stimulus_id").is_string())
        throw ServiceError(400, "missing string field 'stimulus_id'");
      if (!body.contains("choice") || !body.at("choice").is_string())
        throw ServiceError(400, "missing string field 'choice'");
      const Judgment j = store.record_judgment(session_id, body.at("stimulus_id").get<std::string>(),
                                               body.at("choice").get<std::string>(), body.value("replays", 0));
      const NextStimulus n = store.next_stimulus(session_id);
      send_json(res, 201,
                {{"accepted", true},
                 {"stimulus_id", j.stimulus_id},
                 {"position", n.position},
                 {"total", n.total},
                 {"done", n.done}});
    });
  });

  server.Get("/report/confusion", [&store](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, to_json(store.confusion_report())); });
  });

  server.Get(R"(/stimuli/([^/]+)/audio)",
             [&store, audio_root](const httplib::Request& req, httplib::Response& res) {
               guarded(res, [&] {
                 const auto bytes = stimulus_audio(store.stimulus(req.matches[1]), audio_root);
                 res.status = 200;
                 res.set_content(std::string(bytes.begin(), bytes.end()), "audio/wav");
               });
             });
}

}  // namespace laughsense::perception
