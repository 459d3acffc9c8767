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
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "laughsense/error.hpp"
#include "laughsense/features.hpp"
#include "laughsense/sample.hpp"

namespace laughsense::stats {

inline constexpr double kAlpha = 0.05;

namespace detail {

// Continued fraction for the incomplete beta function (modified Lentz).
inline double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 20000;
  constexpr double kEps = 1e-16;
  constexpr double kFloor = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kFloor) d = kFloor;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFloor) d = kFloor;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFloor) c = kFloor;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFloor) d = kFloor;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFloor) c = kFloor;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  return h;
}

}  // namespace detail

/// Regularized incomplete beta I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw InvalidArgument("incomplete_beta: a, b must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                           b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

/// P(|T| >= |t|) for Student's t with df degrees of freedom.
inline double student_t_two_tailed(double t, double df) {
  if (!(df > 0.0)) throw InvalidArgument("student_t_two_tailed: df must be positive");
  if (std::isnan(t)) throw InvalidArgument("student_t_two_tailed: t is NaN");
  if (std::isinf(t)) return 0.0;
  const double x = df / (df + t * t);
  return std::clamp(incomplete_beta(0.5 * df, 0.5, x), 0.0, 1.0);
}

struct TTestResult {
  std::string feature_name;
  double mean_a = 0.0;
  double mean_b = 0.0;
  double t = 0.0;
  double df = 0.0;
  double p_two_tailed = 1.0;
  bool significant = false;
  bool degenerate = false;  // both samples had zero variance

  /// "a", "b" or "=": the class with the larger mean.
  [[nodiscard]] std::string higher() const {
    if (mean_a > mean_b) return "a";
    if (mean_b > mean_a) return "b";
    return "=";
  }
};

namespace detail {

struct Moments {
  double n = 0.0;
  double mean = 0.0;
  double var = 0.0;  // unbiased
};

inline Moments moments(std::span<const double> x) {
  Moments m;
  m.n = static_cast<double>(x.size());
  m.mean = std::accumulate(x.begin(), x.end(), 0.0) / m.n;
  double ss = 0.0;
  for (double v : x) ss += (v - m.mean) * (v - m.mean);
  m.var = ss / (m.n - 1.0);
  return m;
}

}  // namespace detail

/// Welch's unequal-variance t-test with Welch-Satterthwaite degrees of freedom.
inline TTestResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw InvalidArgument("welch_t_test: each sample needs >= 2 values");
  const detail::Moments ma = detail::moments(a);
  const detail::Moments mb = detail::moments(b);
  const double va = ma.var / ma.n;
  const double vb = mb.var / mb.n;
  const double se2 = va + vb;
  if (!(se2 > 0.0)) throw InvalidArgument("welch_t_test: degenerate (zero) variance in both samples");
  TTestResult r;
  r.mean_a = ma.mean;
  r.mean_b = mb.mean;
  r.t = (ma.mean - mb.mean) / std::sqrt(se2);
  r.df = se2 * se2 / (va * va / (ma.n - 1.0) + vb * vb / (mb.n - 1.0));
  r.p_two_tailed = student_t_two_tailed(r.t, r.df);
  r.significant = r.p_two_tailed < kAlpha;
  return r;
}

/// One Welch test per feature, class a against class b, in feature order.
/// A feature that is constant within both classes yields a degenerate row:
/// p = 1 when the two constants agree, otherwise t = +-inf and p = 0.
inline std::vector<TTestResult> significance_table(std::span<const LabeledSample> dataset) {
  std::array<std::vector<double>, kFeatureCount> col_a;
  std::array<std::vector<double>, kFeatureCount> col_b;
  for (const LabeledSample& s : dataset) {
    const auto v = s.features.to_array();
    auto& cols = s.label == Label::kLaughWith ? col_a : col_b;
    for (std::size_t j = 0; j < kFeatureCount; ++j) cols[j].push_back(v[j]);
  }
  if (col_a[0].size() < 2 || col_b[0].size() < 2)
    throw InvalidArgument("significance_table: both classes need at least 2 samples");

  std::vector<TTestResult> rows;
  rows.reserve(kFeatureCount);
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    TTestResult r;
    const detail::Moments ma = detail::moments(col_a[j]);
    const detail::Moments mb = detail::moments(col_b[j]);
    if (ma.var > 0.0 || mb.var > 0.0) {
      r = welch_t_test(col_a[j], col_b[j]);
    } else {
      r.mean_a = ma.mean;
      r.mean_b = mb.mean;
      r.degenerate = true;
      r.df = ma.n + mb.n - 2.0;
      if (ma.mean == mb.mean) {
        r.t = 0.0;
        r.p_two_tailed = 1.0;
      } else {
        r.t = ma.mean > mb.mean ? std::numeric_limits<double>::infinity()
                                : -std::numeric_limits<double>::infinity();
        r.p_two_tailed = 0.0;
      }
      r.significant = r.p_two_tailed < kAlpha;
    }
    r.feature_name = std::string(kFeatureNames[j]);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace laughsense::stats
