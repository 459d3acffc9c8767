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


// The two classifier configurations: an L2-regularized hinge-loss linear SVM
// trained by dual coordinate descent, and second-order gradient-boosted
// regression trees on the logistic loss with exact greedy splits. Both
// standardize their inputs with statistics of the training split.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "laughsense/error.hpp"
#include "laughsense/features.hpp"
#include "laughsense/sample.hpp"

namespace laughsense::learn {

/// Feature rows with their labels. Rows may have any fixed dimension.
struct Examples {
  std::vector<std::vector<double>> rows;
  std::vector<Label> labels;

  [[nodiscard]] std::size_t size() const noexcept { return rows.size(); }
  [[nodiscard]] std::size_t dim() const noexcept { return rows.empty() ? 0 : rows.front().size(); }

  void add(std::vector<double> row, Label label) {
    rows.push_back(std::move(row));
    labels.push_back(label);
  }

  static Examples from_samples(std::span<const LabeledSample> samples) {
    Examples ex;
    for (const auto& s : samples) {
      const auto v = s.features.to_array();
      ex.add(std::vector<double>(v.begin(), v.end()), s.label);
    }
    return ex;
  }

  void validate() const {
    if (rows.size() != labels.size()) throw InvalidArgument("examples: rows/labels size mismatch");
    if (rows.empty()) throw InvalidArgument("examples: empty training set");
    for (const auto& r : rows) {
      if (r.size() != dim()) throw InvalidArgument("examples: ragged rows");
      for (double v : r)
        if (!std::isfinite(v)) throw InvalidArgument("examples: non-finite feature value");
    }
  }

  void require_both_classes() const {
    const bool has_a = std::find(labels.begin(), labels.end(), Label::kLaughWith) != labels.end();
    const bool has_b = std::find(labels.begin(), labels.end(), Label::kLaughAt) != labels.end();
    if (!has_a || !has_b) throw InvalidArgument("training data contains a single class");
  }
};

inline constexpr double kStdFloor = 1e-9;

/// Per-dimension z-scoring with population statistics.
struct Standardizer {
  std::vector<double> means;
  std::vector<double> stds;

  static Standardizer fit(const std::vector<std::vector<double>>& rows) {
    if (rows.size() < 2) throw InvalidArgument("standardizer: need at least 2 training samples");
    const std::size_t d = rows.front().size();
    Standardizer s;
    s.means.assign(d, 0.0);
    s.stds.assign(d, 0.0);
    const double n = static_cast<double>(rows.size());
    for (const auto& r : rows)
      for (std::size_t j = 0; j < d; ++j) s.means[j] += r[j];
    for (double& m : s.means) m /= n;
    for (const auto& r : rows)
      for (std::size_t j = 0; j < d; ++j) s.stds[j] += (r[j] - s.means[j]) * (r[j] - s.means[j]);
    for (double& v : s.stds) v = std::max(std::sqrt(v / n), kStdFloor);
    return s;
  }

  [[nodiscard]] std::vector<double> transform(std::span<const double> x) const {
    if (x.size() != means.size()) throw InvalidArgument("standardizer: dimension mismatch");
    std::vector<double> z(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
      z[j] = (x[j] - means[j]) / stds[j];
    }
    return z;
  }
};

inline double target(Label l) { return l == Label::kLaughAt ? 1.0 : 0.0; }
inline double sign(Label l) { return l == Label::kLaughAt ? 1.0 : -1.0; }

struct SvmParams {
  double c = 1.0;
  double tolerance = 1e-4;  // on the largest projected-gradient violation
  int max_epochs = 10000;
};

/// decision(x) = w . z(x) + bias; class b ("laughed at") when decision >= 0.
struct LinearSvmModel {
  std::vector<double> weights;
  double bias = 0.0;
  double c = 1.0;
  Standardizer standardizer;
  int epochs = 0;
  double final_violation = 0.0;

  [[nodiscard]] double decision(std::span<const double> x) const {
    const std::vector<double> z = standardizer.transform(x);
    return std::inner_product(z.begin(), z.end(), weights.begin(), bias);
  }
};

/// Dual coordinate descent for the L1-loss (hinge) SVM, visiting samples in
/// their given order each epoch. The bias is learned as the weight of a
/// constant feature 1.
inline LinearSvmModel train_linear_svm(const Examples& train, const SvmParams& params = {}) {
  train.validate();
  train.require_both_classes();
  if (!(params.c > 0.0)) throw InvalidArgument("svm: C must be positive");
  LinearSvmModel model;
  model.c = params.c;
  model.standardizer = Standardizer::fit(train.rows);

  const std::size_t n = train.size();
  const std::size_t d = train.dim();
  std::vector<std::vector<double>> z(n);
  std::vector<double> qd(n);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = model.standardizer.transform(train.rows[i]);
    z[i].push_back(1.0);
    qd[i] = std::inner_product(z[i].begin(), z[i].end(), z[i].begin(), 0.0);
    y[i] = sign(train.labels[i]);
  }
  std::vector<double> w(d + 1, 0.0);
  std::vector<double> alpha(n, 0.0);
  const double c = params.c;

  for (model.epochs = 0; model.epochs < params.max_epochs;) {
    ++model.epochs;
    double max_violation = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double g = y[i] * std::inner_product(w.begin(), w.end(), z[i].begin(), 0.0) - 1.0;
      double pg = g;
      if (alpha[i] == 0.0) {
        pg = std::min(g, 0.0);
      } else if (alpha[i] == c) {
        pg = std::max(g, 0.0);
      }
      max_violation = std::max(max_violation, std::abs(pg));
      if (pg != 0.0) {
        const double old = alpha[i];
        alpha[i] = std::clamp(alpha[i] - g / qd[i], 0.0, c);
        const double step = (alpha[i] - old) * y[i];
        for (std::size_t j = 0; j <= d; ++j) w[j] += step * z[i][j];
      }
    }
    model.final_violation = max_violation;
    if (max_violation < params.tolerance) break;
  }
  model.bias = w[d];
  w.pop_back();
  model.weights = std::move(w);
  return model;
}

struct GbtParams {
  double eta = 0.3;
  int max_depth = 6;
  double subsample = 1.0;
  double lambda = 1.0;
  int rounds = 100;
  double min_child_weight = 1.0;
  double gamma = 0.0;
  double base_score = 0.5;
};

/// Node of a binary regression tree; feature < 0 marks a leaf. Samples with
/// x[feature] < threshold go left.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double weight = 0.0;
  double gain = 0.0;

  [[nodiscard]] bool is_leaf() const noexcept { return feature < 0; }
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  [[nodiscard]] double eval(std::span<const double> z) const {
    std::size_t i = 0;
    while (!nodes[i].is_leaf())
      i = static_cast<std::size_t>(z[static_cast<std::size_t>(nodes[i].feature)] < nodes[i].threshold
                                       ? nodes[i].left
                                       : nodes[i].right);
    return nodes[i].weight;
  }

  [[nodiscard]] int depth(std::size_t node = 0) const {
    const TreeNode& n = nodes[node];
    if (n.is_leaf()) return 0;
    return 1 + std::max(depth(static_cast<std::size_t>(n.left)), depth(static_cast<std::size_t>(n.right)));
  }
};

inline double sigmoid(double m) { return 1.0 / (1.0 + std::exp(-m)); }
inline double logit(double p) { return std::log(p / (1.0 - p)); }

/// p(b | x) = sigmoid(logit(base_score) + eta * sum of tree outputs).
struct GbtModel {
  GbtParams params;
  std::vector<RegressionTree> trees;
  Standardizer standardizer;

  /// Raw margin using the first `n_trees` trees (all by default).
  [[nodiscard]] double margin(std::span<const double> x, std::size_t n_trees = static_cast<std::size_t>(-1)) const {
    const std::vector<double> z = standardizer.transform(x);
    return margin_standardized(z, n_trees);
  }

  [[nodiscard]] double margin_standardized(std::span<const double> z,
                                           std::size_t n_trees = static_cast<std::size_t>(-1)) const {
    double m = logit(params.base_score);
    const std::size_t k = std::min(n_trees, trees.size());
    for (std::size_t t = 0; t < k; ++t) m += params.eta * trees[t].eval(z);
    return m;
  }

  [[nodiscard]] double probability(std::span<const double> x) const { return sigmoid(margin(x)); }
};

namespace detail {

struct TreeBuilder {
  const std::vector<std::vector<double>>& z;
  const std::vector<double>& grad;
  const std::vector<double>& hess;
  const GbtParams& params;
  RegressionTree tree;

  double leaf_weight(double g, double h) const { return -g / (h + params.lambda); }
  double score(double g, double h) const { return g * g / (h + params.lambda); }

  int build(std::vector<std::size_t> idx, int depth) {
    double g = 0.0;
    double h = 0.0;
    for (std::size_t i : idx) {
      g += grad[i];
      h += hess[i];
    }
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(TreeNode{});
    tree.nodes[static_cast<std::size_t>(id)].weight = leaf_weight(g, h);
    if (depth >= params.max_depth || idx.size() < 2) return id;

    const std::size_t dim = z[idx.front()].size();
    const double parent = score(g, h);
    double best_gain = 0.0;
    int best_feature = -1;
    double best_threshold = 0.0;
    std::vector<std::size_t> order = idx;
    for (std::size_t j = 0; j < dim; ++j) {
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return z[a][j] < z[b][j]; });
      double gl = 0.0;
      double hl = 0.0;
      for (std::size_t p = 0; p + 1 < order.size(); ++p) {
        gl += grad[order[p]];
        hl += hess[order[p]];
        const double lo = z[order[p]][j];
        const double hi = z[order[p + 1]][j];
        if (!(lo < hi)) continue;
        const double hr = h - hl;
        if (hl < params.min_child_weight || hr < params.min_child_weight) continue;
        const double gain = 0.5 * (score(gl, hl) + score(g - gl, hr) - parent) - params.gamma;
        if (gain > best_gain + 1e-12) {
          const double mid = lo + 0.5 * (hi - lo);
          if (!(lo < mid && mid < hi)) continue;
          best_gain = gain;
          best_feature = static_cast<int>(j);
          best_threshold = mid;
        }
      }
    }
    if (best_feature < 0) return id;

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (std::size_t i : idx)
      (z[i][static_cast<std::size_t>(best_feature)] < best_threshold ? left : right).push_back(i);
    const int l = build(std::move(left), depth + 1);
    const int r = build(std::move(right), depth + 1);
    TreeNode& node = tree.nodes[static_cast<std::size_t>(id)];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.gain = best_gain;
    node.left = l;
    node.right = r;
    return id;
  }
};

}  // namespace detail

/// Newton boosting on the logistic loss. With subsample = 1 every round sees
/// all rows, so training is deterministic.
inline GbtModel train_gbt(const Examples& train, const GbtParams& params = {}) {
  train.validate();
  train.require_both_classes();
  if (params.subsample != 1.0) throw InvalidArgument("gbt: only subsample = 1 is supported");
  if (params.max_depth < 0 || params.rounds < 0 || !(params.eta > 0.0) || params.lambda < 0.0 ||
      !(params.base_score > 0.0 && params.base_score < 1.0))
    throw InvalidArgument("gbt: invalid parameters");
  GbtModel model;
  model.params = params;
  model.standardizer = Standardizer::fit(train.rows);
  const std::size_t n = train.size();
  std::vector<std::vector<double>> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = model.standardizer.transform(train.rows[i]);

  std::vector<double> margin(n, logit(params.base_score));
  std::vector<double> grad(n);
  std::vector<double> hess(n);
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  for (int round = 0; round < params.rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(margin[i]);
      grad[i] = p - target(train.labels[i]);
      hess[i] = std::max(p * (1.0 - p), 1e-16);
    }
    detail::TreeBuilder builder{z, grad, hess, params, {}};
    builder.build(all, 0);
    for (std::size_t i = 0; i < n; ++i) margin[i] += params.eta * builder.tree.eval(z[i]);
    model.trees.push_back(std::move(builder.tree));
  }
  return model;
}

/// Mean logistic loss of the model truncated to its first n_trees trees.
inline double gbt_training_loss(const GbtModel& model, const Examples& data, std::size_t n_trees) {
  double loss = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double m = model.margin(data.rows[i], n_trees);
    const double y = target(data.labels[i]);
    // log(1 + e^m) - y m, computed stably
    loss += (m > 0.0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m))) - y * m;
  }
  return loss / static_cast<double>(data.size());
}

enum class LearnerKind { kSvm, kGbt };

inline std::string_view learner_name(LearnerKind k) { return k == LearnerKind::kSvm ? "svm" : "gbt"; }

inline LearnerKind parse_learner(std::string_view s) {
  if (s == "svm") return LearnerKind::kSvm;
  if (s == "gbt" || s == "xgb") return LearnerKind::kGbt;
  throw InvalidArgument("unknown learner '" + std::string(s) + "' (expected svm or gbt)");
}

using Model = std::variant<LinearSvmModel, GbtModel>;

inline Model train(LearnerKind kind, const Examples& data) {
  if (kind == LearnerKind::kSvm) return train_linear_svm(data);
  return train_gbt(data);
}

struct Prediction {
  Label label = Label::kLaughWith;
  double score = 0.0;  // SVM margin, or GBT probability of class b
};

namespace detail {
inline void require_finite(std::span<const double> x) {
  for (double v : x)
    if (!std::isfinite(v)) throw InvalidArgument("predict: non-finite feature value");
}
}  // namespace detail

inline Prediction predict(const LinearSvmModel& model, std::span<const double> x) {
  detail::require_finite(x);
  const double d = model.decision(x);
  return {d >= 0.0 ? Label::kLaughAt : Label::kLaughWith, d};
}

inline Prediction predict(const GbtModel& model, std::span<const double> x) {
  detail::require_finite(x);
  const double p = model.probability(x);
  return {p >= 0.5 ? Label::kLaughAt : Label::kLaughWith, p};
}

inline Prediction predict(const Model& model, std::span<const double> x) {
  return std::visit([&](const auto& m) { return predict(m, x); }, model);
}

inline Prediction predict(const Model& model, const ManualFeatures& features) {
  const auto v = features.to_array();
  return predict(model, std::span<const double>(v));
}

// ---------------------------------------------------------------------------
// Text serialization. Format version 1, one record per line:
//
//   laughsense-model 1
//   learner svm|gbt
//   dim <D>
//   mean <D values>
//   std <D values>
//   svm: c <C> / bias <b> / weights <D values>
//   gbt: params <eta> <max_depth> <subsample> <lambda> <rounds>
//               <min_child_weight> <gamma> <base_score>
//        trees <T>, then per tree "tree <nodes>" followed by one
//        "node <feature> <threshold> <left> <right> <weight>" line per node
//   end
//
// Reals are printed with 17 significant digits, so reload is exact.

namespace detail {

inline std::string fmt_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_vector(std::ostream& out, std::string_view key, std::span<const double> v) {
  out << key;
  for (double x : v) out << ' ' << fmt_real(x);
  out << '\n';
}

inline std::istringstream expect_line(std::istream& in, std::string_view key) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("model: unexpected end of input, wanted '" + std::string(key) + "'");
  std::istringstream ls(line);
  std::string got;
  ls >> got;
  if (got != key) throw FormatError("model: expected '" + std::string(key) + "', got '" + got + "'");
  return ls;
}

inline std::vector<double> read_vector(std::istream& in, std::string_view key, std::size_t n) {
  auto ls = expect_line(in, key);
  std::vector<double> v(n);
  for (double& x : v)
    if (!(ls >> x)) throw FormatError("model: short '" + std::string(key) + "' record");
  return v;
}

}  // namespace detail

inline void save_model(std::ostream& out, const Model& model) {
  using detail::fmt_real;
  out << "laughsense-model 1\n";
  const Standardizer& st = std::visit([](const auto& m) -> const Standardizer& { return m.standardizer; }, model);
  if (const auto* svm = std::get_if<LinearSvmModel>(&model)) {
    out << "learner svm\n";
    out << "dim " << st.means.size() << '\n';
    detail::write_vector(out, "mean", st.means);
    detail::write_vector(out, "std", st.stds);
    out << "c " << fmt_real(svm->c) << '\n';
    out << "bias " << fmt_real(svm->bias) << '\n';
    detail::write_vector(out, "weights", svm->weights);
  } else {
    const auto& gbt = std::get<GbtModel>(model);
    const GbtParams& p = gbt.params;
    out << "learner gbt\n";
    out << "dim " << st.means.size() << '\n';
    detail::write_vector(out, "mean", st.means);
    detail::write_vector(out, "std", st.stds);
    out << "params " << fmt_real(p.eta) << ' ' << p.max_depth << ' ' << fmt_real(p.subsample) << ' '
        << fmt_real(p.lambda) << ' ' << p.rounds << ' ' << fmt_real(p.min_child_weight) << ' '
        << fmt_real(p.gamma) << ' ' << fmt_real(p.base_score) << '\n';
    out << "trees " << gbt.trees.size() << '\n';
    for (const auto& tree : gbt.trees) {
      out << "tree " << tree.nodes.size() << '\n';
      for (const auto& n : tree.nodes)
        out << "node " << n.feature << ' ' << fmt_real(n.threshold) << ' ' << n.left << ' ' << n.right
            << ' ' << fmt_real(n.weight) << '\n';
    }
  }
  out << "end\n";
}

inline Model load_model(std::istream& in) {
  {
    auto ls = detail::expect_line(in, "laughsense-model");
    int version = 0;
    if (!(ls >> version) || version != 1) throw FormatError("model: unsupported format version");
  }
  std::string learner;
  detail::expect_line(in, "learner") >> learner;
  std::size_t dim = 0;
  if (!(detail::expect_line(in, "dim") >> dim)) throw FormatError("model: bad dim");
  Standardizer st;
  st.means = detail::read_vector(in, "mean", dim);
  st.stds = detail::read_vector(in, "std", dim);

  Model result;
  if (learner == "svm") {
    LinearSvmModel m;
    m.standardizer = std::move(st);
    if (!(detail::expect_line(in, "c") >> m.c)) throw FormatError("model: bad c");
    if (!(detail::expect_line(in, "bias") >> m.bias)) throw FormatError("model: bad bias");
    m.weights = detail::read_vector(in, "weights", dim);
    result = std::move(m);
  } else if (learner == "gbt") {
    GbtModel m;
    m.standardizer = std::move(st);
    GbtParams& p = m.params;
    auto ls = detail::expect_line(in, "params");
    if (!(ls >> p.eta >> p.max_depth >> p.subsample >> p.lambda >> p.rounds >> p.min_child_weight >>
          p.gamma >> p.base_score))
      throw FormatError("model: bad params record");
    std::size_t n_trees = 0;
    if (!(detail::expect_line(in, "trees") >> n_trees)) throw FormatError("model: bad trees count");
    for (std::size_t t = 0; t < n_trees; ++t) {
      std::size_t n_nodes = 0;
      if (!(detail::expect_line(in, "tree") >> n_nodes) || n_nodes == 0) throw FormatError("model: bad tree");
      RegressionTree tree;
      for (std::size_t k = 0; k < n_nodes; ++k) {
        auto nl = detail::expect_line(in, "node");
        TreeNode node;
        if (!(nl >> node.feature >> node.threshold >> node.left >> node.right >> node.weight))
          throw FormatError("model: bad node record");
        const auto limit = static_cast<int>(n_nodes);
        if (!node.is_leaf() && (node.feature >= static_cast<int>(dim) || node.left <= static_cast<int>(k) ||
                                node.right <= static_cast<int>(k) || node.left >= limit || node.right >= limit))
          throw FormatError("model: node references out of range");
        tree.nodes.push_back(node);
      }
      m.trees.push_back(std::move(tree));
    }
    result = std::move(m);
  } else {
    throw FormatError("model: unknown learner '" + learner + "'");
  }
  detail::expect_line(in, "end");
  return result;
}

}  // namespace laughsense::learn
