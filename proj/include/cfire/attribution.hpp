/*
 * Copyright 2026 The CFIRE Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Local attribution methods and their binarization into important-feature
// sets. Every explainer attributes the logit of the class the model predicts
// for x, and a feature is "absent" when it takes its baseline value.

#ifndef CFIRE_ATTRIBUTION_HPP_
#define CFIRE_ATTRIBUTION_HPP_

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cfire/blackbox.hpp"
#include "cfire/common.hpp"
#include "cfire/dataset.hpp"

namespace cfire {

enum class ExplainerKind { kKernelShap, kLime, kIntegratedGradients };

// Canonical order, also used for tie-breaking between explainers.
inline constexpr std::array<ExplainerKind, 3> kAllExplainers = {
    ExplainerKind::kKernelShap, ExplainerKind::kLime, ExplainerKind::kIntegratedGradients};

inline std::string ExplainerName(ExplainerKind kind) {
  switch (kind) {
    case ExplainerKind::kKernelShap:
      return "KS";
    case ExplainerKind::kLime:
      return "LI";
    case ExplainerKind::kIntegratedGradients:
      return "IG";
  }
  return "?";
}

inline ExplainerKind ParseExplainer(std::string name) {
  for (char& ch : name) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  for (ExplainerKind k : kAllExplainers)
    if (ExplainerName(k) == name) return k;
  Fail(ErrorKind::kConfig, "unknown explainer '" + name + "' (expected ks, li or ig)");
}

struct AttributionVector {
  std::vector<double> weights;
  std::string explainer_id;
  std::size_t sample_index = 0;
  ClassId target_class = 0;
  // Non-empty when the estimator had to fall back (degenerate system etc.).
  std::string note;
};

struct ExplainerParams {
  double iota = 0.01;
  int ks_budget = 300;
  int lime_budget = 300;
  int ig_steps = 200;
  // Reference point for "feature absent". Usually the training mean.
  std::vector<double> baseline;
  // Per-feature perturbation scale for LIME. Usually the training std.
  std::vector<double> lime_scale;
  // Gaussian proximity kernel width on standardized distances; <= 0 selects
  // 0.75 * sqrt(d).
  double lime_kernel_width = 0.0;
  double lime_ridge = 1e-3;
  std::uint64_t seed = 0;

  // Baseline and LIME scale taken from the black-box training data.
  static ExplainerParams FromTrainingData(const Dataset& train, std::uint64_t seed = 0) {
    ExplainerParams p;
    p.baseline = train.Mean();
    p.lime_scale = train.StdDev();
    p.seed = seed;
    return p;
  }
};

namespace detail {

inline void CheckBaseline(const ExplainerParams& p, std::size_t d) {
  if (p.baseline.size() != d)
    Fail(ErrorKind::kConfig, "baseline has " + std::to_string(p.baseline.size()) +
                                 " entries, expected " + std::to_string(d));
  for (double b : p.baseline)
    if (!std::isfinite(b)) Fail(ErrorKind::kConfig, "baseline is not finite");
}

inline void CheckFinite(const std::vector<double>& w, const char* who) {
  for (double v : w)
    if (!std::isfinite(v)) Fail(ErrorKind::kExplainer, std::string(who) + ": non-finite attribution");
}

inline std::mt19937_64 SampleRng(const ExplainerParams& p, std::size_t sample_index) {
  return std::mt19937_64(MixSeed(p.seed ^ static_cast<std::uint64_t>(sample_index)));
}

}  // namespace detail

// Midpoint-rule path integral from the baseline to x.
inline AttributionVector IntegratedGradients(const BlackBox& model, std::span<const double> x,
                                             const ExplainerParams& p,
                                             std::size_t sample_index = 0) {
  if (!model.HasGradient())
    Fail(ErrorKind::kExplainer, "integrated gradients needs a model with gradients");
  if (p.ig_steps <= 0) Fail(ErrorKind::kConfig, "ig_steps must be positive");
  const std::size_t d = x.size();
  detail::CheckBaseline(p, d);
  const ClassId c = model.Predict(x);
  std::vector<double> avg(d, 0.0), point(d);
  for (int k = 1; k <= p.ig_steps; ++k) {
    const double alpha = (k - 0.5) / p.ig_steps;
    for (std::size_t j = 0; j < d; ++j) point[j] = p.baseline[j] + alpha * (x[j] - p.baseline[j]);
    const auto g = model.Gradient(point, c);
    for (std::size_t j = 0; j < d; ++j) avg[j] += g[j];
  }
  AttributionVector out{std::vector<double>(d), "IG", sample_index, c, {}};
  for (std::size_t j = 0; j < d; ++j)
    out.weights[j] = (x[j] - p.baseline[j]) * avg[j] / p.ig_steps;
  detail::CheckFinite(out.weights, "IG");
  return out;
}

// Kernel SHAP. When the budget covers all 2^d - 2 proper coalitions they are
// enumerated with their exact kernel weights; otherwise coalition sizes are
// drawn from the Shapley kernel and paired with their complements. The
// efficiency constraint is eliminated analytically, so the attributions always
// sum to f(x) - f(baseline).
inline AttributionVector KernelShap(const BlackBox& model, std::span<const double> x,
                                    const ExplainerParams& p, std::size_t sample_index = 0) {
  const std::size_t d = x.size();
  if (d == 0) Fail(ErrorKind::kExplainer, "KS needs at least one feature");
  if (p.ks_budget <= 0) Fail(ErrorKind::kConfig, "ks_budget must be positive");
  detail::CheckBaseline(p, d);
  const ClassId c = model.Predict(x);
  const double f0 = model.Logit(p.baseline, c);
  const double fx = model.Logit(x, c);
  const double delta = fx - f0;
  AttributionVector out{std::vector<double>(d, 0.0), "KS", sample_index, c, {}};
  if (d == 1) {
    out.weights[0] = delta;
    return out;
  }

  std::vector<std::vector<char>> coalitions;
  std::vector<double> weights;
  const bool exhaustive = d < 31 && ((std::size_t{1} << d) - 2) <= static_cast<std::size_t>(p.ks_budget);
  auto rng = detail::SampleRng(p, sample_index);
  auto binom = [](std::size_t n, std::size_t k) {
    double r = 1.0;
    for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return r;
  };

  auto sample_kernel = [&]() {
    std::vector<double> size_mass(d - 1);
    for (std::size_t s = 1; s < d; ++s)
      size_mass[s - 1] = static_cast<double>(d - 1) / static_cast<double>(s * (d - s));
    std::discrete_distribution<std::size_t> size_dist(size_mass.begin(), size_mass.end());
    std::vector<std::size_t> perm(d);
    std::iota(perm.begin(), perm.end(), 0);
    const int pairs = std::max(1, p.ks_budget / 2);
    for (int t = 0; t < pairs; ++t) {
      const std::size_t s = size_dist(rng) + 1;
      std::shuffle(perm.begin(), perm.end(), rng);
      std::vector<char> z(d, 0);
      for (std::size_t i = 0; i < s; ++i) z[perm[i]] = 1;
      std::vector<char> comp(d);
      for (std::size_t i = 0; i < d; ++i) comp[i] = !z[i];
      coalitions.push_back(std::move(z));
      coalitions.push_back(std::move(comp));
      weights.push_back(1.0);
      weights.push_back(1.0);
    }
  };
  auto sample_uniform = [&]() {
    std::bernoulli_distribution coin(0.5);
    coalitions.clear();
    weights.clear();
    while (coalitions.size() < static_cast<std::size_t>(std::max(p.ks_budget, 2))) {
      std::vector<char> z(d);
      std::size_t s = 0;
      for (std::size_t i = 0; i < d; ++i) s += (z[i] = coin(rng));
      if (s == 0 || s == d) continue;
      coalitions.push_back(std::move(z));
      weights.push_back(1.0);
    }
  };

  if (exhaustive) {
    for (std::uint64_t mask = 1; mask + 1 < (std::uint64_t{1} << d); ++mask) {
      std::vector<char> z(d);
      std::size_t s = 0;
      for (std::size_t i = 0; i < d; ++i) s += (z[i] = (mask >> i) & 1);
      coalitions.push_back(std::move(z));
      weights.push_back(static_cast<double>(d - 1) /
                        (binom(d, s) * static_cast<double>(s * (d - s))));
    }
  } else {
    sample_kernel();
  }

  auto solve = [&](Eigen::VectorXd& beta) {
    const std::size_t m = coalitions.size();
    const std::size_t q = d - 1;
    Eigen::MatrixXd a(m, q);
    Eigen::VectorXd b(m);
    std::vector<double> probe(d);
    for (std::size_t k = 0; k < m; ++k) {
      const auto& z = coalitions[k];
      for (std::size_t j = 0; j < d; ++j) probe[j] = z[j] ? x[j] : p.baseline[j];
      const double y = model.Logit(probe, c) - f0;
      const double last = z[d - 1];
      for (std::size_t j = 0; j < q; ++j) a(k, j) = z[j] - last;
      b(k) = y - last * delta;
    }
    Eigen::VectorXd sw(m);
    for (std::size_t k = 0; k < m; ++k) sw(k) = std::sqrt(weights[k]);
    const Eigen::MatrixXd wa = sw.asDiagonal() * a;
    const Eigen::VectorXd wb = sw.asDiagonal() * b;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(wa);
    if (qr.rank() < static_cast<Eigen::Index>(q)) return false;
    beta = qr.solve(wb);
    return true;
  };

  Eigen::VectorXd beta;
  if (!solve(beta)) {
    sample_uniform();
    out.note = "degenerate kernel sample; fell back to uniform coalition sampling";
    if (!solve(beta)) Fail(ErrorKind::kExplainer, "KS: degenerate coalition system");
  }
  double rest = 0.0;
  for (std::size_t j = 0; j + 1 < d; ++j) {
    out.weights[j] = beta(j);
    rest += beta(j);
  }
  out.weights[d - 1] = delta - rest;
  detail::CheckFinite(out.weights, "KS");
  return out;
}

// Local linear surrogate fitted by weighted ridge regression on Gaussian
// perturbations around x. Weights are reported in the original feature units.
inline AttributionVector LimeLocal(const BlackBox& model, std::span<const double> x,
                                   const ExplainerParams& p, std::size_t sample_index = 0) {
  const std::size_t d = x.size();
  if (d == 0) Fail(ErrorKind::kExplainer, "LIME needs at least one feature");
  if (p.lime_budget <= 0) Fail(ErrorKind::kConfig, "lime_budget must be positive");
  std::vector<double> scale = p.lime_scale;
  if (scale.empty()) scale.assign(d, 1.0);
  if (scale.size() != d) Fail(ErrorKind::kConfig, "lime_scale has wrong length");
  for (double& s : scale)
    if (!(s > 1e-12) || !std::isfinite(s)) s = 1.0;
  const double width =
      p.lime_kernel_width > 0 ? p.lime_kernel_width : 0.75 * std::sqrt(static_cast<double>(d));

  const ClassId c = model.Predict(x);
  auto rng = detail::SampleRng(p, sample_index);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t m = static_cast<std::size_t>(p.lime_budget);
  Eigen::MatrixXd u(m, d);
  Eigen::VectorXd y(m), w(m);
  std::vector<double> probe(d);
  for (std::size_t k = 0; k < m; ++k) {
    double dist2 = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      // The first row is x itself.
      const double e = k == 0 ? 0.0 : normal(rng);
      u(k, j) = e;
      dist2 += e * e;
      probe[j] = x[j] + scale[j] * e;
    }
    y(k) = model.Logit(probe, c);
    w(k) = std::exp(-dist2 / (width * width));
  }

  const double wsum = w.sum();
  const Eigen::RowVectorXd u_mean = (w.transpose() * u) / wsum;
  const double y_mean = w.dot(y) / wsum;
  const Eigen::MatrixXd uc = u.rowwise() - u_mean;
  const Eigen::VectorXd yc = y.array() - y_mean;
  const Eigen::MatrixXd gram = uc.transpose() * w.asDiagonal() * uc;
  const Eigen::VectorXd rhs = uc.transpose() * (w.array() * yc.array()).matrix();

  AttributionVector out{std::vector<double>(d), "LI", sample_index, c, {}};
  double ridge = p.lime_ridge;
  Eigen::VectorXd beta;
  for (int attempt = 0;; ++attempt) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram + ridge * Eigen::MatrixXd::Identity(d, d));
    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
      beta = ldlt.solve(rhs);
      if (beta.allFinite()) break;
    }
    if (attempt >= 8) Fail(ErrorKind::kExplainer, "LIME: singular regression system");
    ridge = ridge > 0 ? ridge * 10.0 : 1e-6;
    out.note = "singular surrogate system; ridge raised to " + std::to_string(ridge);
  }
  for (std::size_t j = 0; j < d; ++j) out.weights[j] = beta(j) / scale[j];
  detail::CheckFinite(out.weights, "LI");
  return out;
}

// { i : |w_i| / sum_j |w_j| > iota }, or empty when all weights are zero.
inline FeatureSet ImportantFeatures(std::span<const double> w, double iota) {
  if (!(iota > 0.0 && iota < 1.0)) Fail(ErrorKind::kConfig, "iota must lie in (0,1)");
  double total = 0.0;
  for (double v : w) total += std::abs(v);
  FeatureSet out;
  if (total == 0.0) return out;
  for (std::size_t i = 0; i < w.size(); ++i)
    if (std::abs(w[i]) / total > iota) out.push_back(static_cast<int>(i));
  return out;
}

// A local explainer bound to its parameters.
struct Explainer {
  using Fn = std::function<AttributionVector(const BlackBox&, std::span<const double>,
                                             std::size_t)>;
  std::string id;
  Fn fn;

  AttributionVector operator()(const BlackBox& model, std::span<const double> x,
                               std::size_t sample_index) const {
    return fn(model, x, sample_index);
  }
};

inline Explainer MakeExplainer(ExplainerKind kind, const ExplainerParams& params) {
  switch (kind) {
    case ExplainerKind::kKernelShap:
      return {"KS", [params](const BlackBox& m, std::span<const double> x, std::size_t i) {
                return KernelShap(m, x, params, i);
              }};
    case ExplainerKind::kLime:
      return {"LI", [params](const BlackBox& m, std::span<const double> x, std::size_t i) {
                return LimeLocal(m, x, params, i);
              }};
    case ExplainerKind::kIntegratedGradients:
      return {"IG", [params](const BlackBox& m, std::span<const double> x, std::size_t i) {
                return IntegratedGradients(m, x, params, i);
              }};
  }
  Fail(ErrorKind::kConfig, "unknown explainer kind");
}

// Attributions for the given rows of `ds`; sample_index is the row index.
inline std::vector<AttributionVector> ExplainRows(const BlackBox& model,
                                                  const Explainer& explainer,
                                                  const Dataset& ds,
                                                  std::span<const std::size_t> rows) {
  std::vector<AttributionVector> out(rows.size());
  ParallelFor(rows.size(), [&](std::size_t k) {
    try {
      out[k] = explainer(model, ds.row(rows[k]), rows[k]);
    } catch (const Error& e) {
      throw Error(ErrorKind::kExplainer, explainer.id + " failed on sample " +
                                             std::to_string(rows[k]) + ": " + e.what());
    }
  });
  return out;
}

// One row per attribution: sample index followed by the d weights.
inline void WriteAttributionCsv(const std::vector<AttributionVector>& rows,
                                const std::vector<std::string>& feature_names,
                                std::ostream& out) {
  out << "sample";
  for (const auto& name : feature_names) out << "," << name;
  out << "\n";
  char buf[32];
  for (const auto& a : rows) {
    out << a.sample_index;
    for (double w : a.weights) {
      std::snprintf(buf, sizeof(buf), "%.17g", w);
      out << "," << buf;
    }
    out << "\n";
  }
}

}  // namespace cfire

#endif  // CFIRE_ATTRIBUTION_HPP_
