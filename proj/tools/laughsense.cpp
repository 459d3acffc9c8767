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


// laughsense: command-line driver.
//
//   laughsense synth     --out DIR [--n-per-class 45] [--seed 7]
//   laughsense extract   --manifest M --audio-root R --out DIR
//   laughsense analyze   FEATURES.csv [--out DIR]
//   laughsense crossval  (--features F | --manifest M --audio-root R) --learner svm|gbt --out DIR
//   laughsense train     --features F --learner svm|gbt --out MODEL.txt
//   laughsense predict   --model MODEL.txt --features F
//   laughsense plot      REPORT.json --out FILE.svg
//   laughsense serve     --manifest M --audio-root R --data-dir D [--listen HOST:PORT]
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "laughsense/laughsense.hpp"
#include "laughsense/perception_http.hpp"

#include <CLI11.hpp>
#include <httplib.h>
#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using namespace laughsense;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Writes via a temporary file and rename, so readers never see a partial file.
void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp.string() + "'");
    out << text;
    if (!out) throw IoError("error writing '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct RunConfig {
  std::string manifest;
  std::string audio_root;
  std::string features;
  std::string learner = "svm";
  int folds = 10;
  std::uint64_t seed = 1;
  std::string out;
  int jobs = default_jobs();
  double target_db = kDefaultTargetDb;
};

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw UsageError(std::string(what) + " is required");
  if (!fs::is_regular_file(path)) throw UsageError(std::string(what) + " '" + path + "' does not exist");
}

void require_dir(const std::string& path, const char* what) {
  if (path.empty()) throw UsageError(std::string(what) + " is required (or set LAUGHSENSE_DATA)");
  if (!fs::is_directory(path)) throw UsageError(std::string(what) + " '" + path + "' is not a directory");
}

corpus::Dataset dataset_from_manifest(const RunConfig& cfg) {
  require_file(cfg.manifest, "--manifest");
  require_dir(cfg.audio_root, "--audio-root");
  const auto manifest = corpus::parse_manifest(cfg.manifest);
  corpus::Dataset ds = corpus::build_dataset(manifest, cfg.audio_root, {cfg.target_db, cfg.jobs});
  for (const auto& x : ds.exclusions)
    std::cerr << "excluded " << x.file << " (" << x.clip_id << "): " << x.reason << '\n';
  for (const auto& w : ds.warnings) std::cerr << "warning: " << w << '\n';
  return ds;
}

std::vector<LabeledSample> load_samples(const RunConfig& cfg) {
  if (!cfg.features.empty()) {
    require_file(cfg.features, "--features");
    return corpus::load_features_csv(cfg.features);
  }
  return dataset_from_manifest(cfg).samples;
}

int cmd_synth(int n_per_class, std::uint64_t seed, double effect_scale, const std::string& out) {
  if (out.empty()) throw UsageError("--out is required");
  const fs::path manifest = corpus::synth_corpus(n_per_class, seed, out, {16000, effect_scale});
  std::cout << manifest.string() << '\n';
  return kExitOk;
}

int cmd_extract(const RunConfig& cfg) {
  if (cfg.out.empty()) throw UsageError("--out is required");
  const corpus::Dataset ds = dataset_from_manifest(cfg);
  const fs::path out = cfg.out;
  write_text_file(out / "exclusions.json", corpus::exclusions_json(ds).dump(2) + "\n");
  if (ds.samples.empty()) {
    std::cerr << "no sample could be extracted\n";
    return kExitFailure;
  }
  write_text_file(out / "features.csv", corpus::format_features_csv(ds.samples));
  std::cout << "extracted " << ds.samples.size() << " samples, excluded " << ds.exclusions.size() << " -> "
            << (out / "features.csv").string() << '\n';
  return kExitOk;
}

std::string significance_csv(const std::vector<stats::TTestResult>& rows) {
  std::string out = "feature,mean_a,mean_b,t,df,p_two_tailed,significant,higher\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%.10g,%.10g,%.10g,%.10g,%.10g,%s,%s\n", r.feature_name.c_str(), r.mean_a,
                  r.mean_b, r.t, r.df, r.p_two_tailed, r.significant ? "true" : "false", r.higher().c_str());
    out += buf;
  }
  return out;
}

std::string significance_text(const std::vector<stats::TTestResult>& rows) {
  std::string out = "feature                         mean a       mean b        t       df        p    sig  higher\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-28s %11.4g  %11.4g  %7.3f  %7.2f  %9.3g  %3s  %s\n", r.feature_name.c_str(),
                  r.mean_a, r.mean_b, r.t, r.df, r.p_two_tailed, r.significant ? "*" : "", r.higher().c_str());
    out += buf;
  }
  out += "(Welch t-test, two-tailed, * = p < 0.05, no multiple-comparison correction)\n";
  return out;
}

int cmd_analyze(const std::string& features, const std::string& out) {
  require_file(features, "features CSV");
  const auto samples = corpus::load_features_csv(features);
  if (samples.empty()) throw Error("feature CSV has no rows");
  const auto rows = stats::significance_table(samples);
  std::cout << significance_text(rows);
  if (!out.empty()) {
    write_text_file(fs::path(out) / "significance.csv", significance_csv(rows));
    write_text_file(fs::path(out) / "significance.txt", significance_text(rows));
  }
  return kExitOk;
}

int cmd_crossval(const RunConfig& cfg) {
  if (cfg.out.empty()) throw UsageError("--out is required");
  const learn::LearnerKind kind = learn::parse_learner(cfg.learner);
  const auto samples = load_samples(cfg);
  if (samples.empty()) throw Error("dataset is empty");
  std::vector<std::string> speakers;
  for (const auto& s : samples) speakers.push_back(s.speaker_id);
  const eval::CvPlan plan = eval::make_speaker_folds(speakers, static_cast<std::size_t>(cfg.folds), cfg.seed);
  const eval::EvalReport report = eval::run_cv(samples, plan, kind, cfg.jobs);
  const fs::path out = cfg.out;
  write_text_file(out / "report.json", eval::to_json(report).dump(2) + "\n");
  write_text_file(out / "report.txt", eval::format_text(report));
  write_text_file(out / "confusion.svg",
                  eval::confusion_svg(report.pooled, "Confusion matrix, " + report.learner_id + ", manual features"));
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
  if (report.uar) {
    std::printf("UAR %.4f\n", *report.uar);
  } else {
    std::printf("UAR undefined\n");
  }
  return kExitOk;
}

int cmd_train(const RunConfig& cfg) {
  if (cfg.out.empty()) throw UsageError("--out is required");
  const auto samples = load_samples(cfg);
  const learn::Model model = learn::train(learn::parse_learner(cfg.learner), learn::Examples::from_samples(samples));
  std::ostringstream text;
  learn::save_model(text, model);
  write_text_file(cfg.out, text.str());
  return kExitOk;
}

int cmd_predict(const std::string& model_path, const RunConfig& cfg) {
  require_file(model_path, "--model");
  std::istringstream in(read_text_file(model_path));
  const learn::Model model = learn::load_model(in);
  std::cout << "clip_id,speaker_id,label,predicted,score\n";
  for (const auto& s : load_samples(cfg)) {
    const learn::Prediction p = learn::predict(model, s.features);
    std::printf("%s,%s,%s,%s,%.10g\n", s.clip_id.c_str(), s.speaker_id.c_str(), std::string(label_token(s.label)).c_str(),
                std::string(label_token(p.label)).c_str(), p.score);
  }
  return kExitOk;
}

int cmd_plot(const std::string& report_path, const std::string& out) {
  require_file(report_path, "report JSON");
  if (out.empty()) throw UsageError("--out is required");
  const auto j = nlohmann::json::parse(read_text_file(report_path));
  eval::ConfusionMatrix2x2 m;
  const auto& counts = j.at("pooled_confusion").at("counts");
  for (std::size_t t = 0; t < 2; ++t)
    for (std::size_t p = 0; p < 2; ++p) m.counts[t][p] = counts.at(t).at(p).get<std::size_t>();
  write_text_file(out, eval::confusion_svg(m, "Confusion matrix, " + j.value("learner", std::string("?"))));
  return kExitOk;
}

int cmd_serve(const RunConfig& cfg, const std::string& listen, const std::string& data_dir) {
  require_file(cfg.manifest, "--manifest");
  require_dir(cfg.audio_root, "--audio-root");
  if (data_dir.empty()) throw UsageError("--data-dir is required");
  const auto colon = listen.rfind(':');
  if (colon == std::string::npos) throw UsageError("--listen must be HOST:PORT");
  const std::string host = listen.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(listen.substr(colon + 1));
  } catch (const std::exception&) {
    throw UsageError("--listen must be HOST:PORT");
  }
  perception::SessionStore store(perception::stimuli_from_manifest(corpus::parse_manifest(cfg.manifest)), data_dir);
  httplib::Server server;
  perception::mount(server, store, cfg.audio_root);
  std::cerr << "serving " << store.stimuli().size() << " stimuli on " << host << ':' << port << '\n';
  if (!server.listen(host, port)) throw IoError("cannot listen on " + listen);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"laughsense: laughter valence features, significance tests and cross-validated classifiers"};
  app.require_subcommand(1);

  RunConfig cfg;
  auto add_data_flags = [&cfg](CLI::App* sub) {
    sub->add_option("--manifest", cfg.manifest, "manifest CSV (file,label,speaker,start,end)");
    sub->add_option("--audio-root", cfg.audio_root, "directory the manifest paths are relative to")
        ->envname("LAUGHSENSE_DATA");
    sub->add_option("--jobs", cfg.jobs, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--target-db", cfg.target_db, "peak SPL normalization target in dB");
  };

  int n_per_class = 45;
  double effect_scale = 1.0;
  auto* synth = app.add_subcommand("synth", "generate a synthetic two-class laughter corpus");
  synth->add_option("--n-per-class", n_per_class)->check(CLI::PositiveNumber);
  synth->add_option("--seed", cfg.seed);
  synth->add_option("--effect-scale", effect_scale, "0 = identical class distributions");
  synth->add_option("--out", cfg.out, "output directory");

  auto* extract = app.add_subcommand("extract", "extract the 19 features for every manifest entry");
  add_data_flags(extract);
  extract->add_option("--out", cfg.out, "output directory");

  std::string features_arg;
  auto* analyze = app.add_subcommand("analyze", "per-feature Welch t-tests between the two classes");
  analyze->add_option("features", features_arg, "feature CSV from extract")->required();
  analyze->add_option("--out", cfg.out, "directory for significance.csv / .txt");

  auto* crossval = app.add_subcommand("crossval", "speaker-grouped cross-validation");
  add_data_flags(crossval);
  crossval->add_option("--features", cfg.features, "feature CSV (instead of --manifest)");
  crossval->add_option("--learner", cfg.learner, "svm or gbt")->check(CLI::IsMember({"svm", "gbt"}));
  crossval->add_option("--folds", cfg.folds)->check(CLI::Range(2, 1000));
  crossval->add_option("--seed", cfg.seed);
  crossval->add_option("--out", cfg.out, "output directory");

  auto* train = app.add_subcommand("train", "train one model on all samples and save it as text");
  add_data_flags(train);
  train->add_option("--features", cfg.features);
  train->add_option("--learner", cfg.learner)->check(CLI::IsMember({"svm", "gbt"}));
  train->add_option("--out", cfg.out, "model file");

  std::string model_path;
  auto* predict = app.add_subcommand("predict", "apply a saved model to a feature CSV");
  add_data_flags(predict);
  predict->add_option("--model", model_path)->required();
  predict->add_option("--features", cfg.features);

  std::string report_path;
  auto* plot = app.add_subcommand("plot", "render a report's pooled confusion matrix as SVG");
  plot->add_option("report", report_path)->required();
  plot->add_option("--out", cfg.out)->required();

  std::string listen = "127.0.0.1:8080";
  std::string data_dir;
  auto* serve = app.add_subcommand("serve", "run the listening-experiment HTTP service");
  add_data_flags(serve);
  serve->add_option("--listen", listen, "HOST:PORT");
  serve->add_option("--data-dir", data_dir, "directory for session and judgment logs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*synth) return cmd_synth(n_per_class, cfg.seed, effect_scale, cfg.out);
    if (*extract) return cmd_extract(cfg);
    if (*analyze) return cmd_analyze(features_arg, cfg.out);
    if (*crossval) return cmd_crossval(cfg);
    if (*train) return cmd_train(cfg);
    if (*predict) return cmd_predict(model_path, cfg);
    if (*plot) return cmd_plot(report_path, cfg.out);
    if (*serve) return cmd_serve(cfg, listen, data_dir);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}
