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

// Faithfulness and compactness measures of a rule model against its black
// box, and their aggregation over an ensemble of equally good models.

#ifndef CFIRE_EVAL_HPP_
#define CFIRE_EVAL_HPP_

#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "cfire/blackbox.hpp"
#include "cfire/common.hpp"
#include "cfire/dataset.hpp"
#include "cfire/rulemodel.hpp"

namespace cfire {

enum class ChanceLevel {
  kUniform,       // 1 / number of classes
  kMajorityRate,  // share of the most frequent model prediction
};

enum class PrecLocalMode {
  kWinningTerm,        // features of the term that decided the prediction
  kAllSatisfiedTerms,  // mean over every satisfied term of the predicted class
};

struct EvalOptions {
  ChanceLevel chance = ChanceLevel::kUniform;
  PrecLocalMode prec_local_mode = PrecLocalMode::kWinningTerm;
};

struct EvalReport {
  double precision = 0.0;
  double coverage = 0.0;
  double f1 = 0.0;
  std::size_t size = 0;
  bool complete = false;
  double prec_local = 0.0;
  // True when no sample was eligible for Prec-L (or no explanations given).
  bool prec_local_vacuous = true;
  std::map<ClassId, std::size_t> per_class_term_counts;
  std::size_t n_samples = 0;
  std::size_t n_covered = 0;
  std::size_t n_agree = 0;
};

struct MetricStats {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
};

struct EnsembleReport {
  MetricStats precision, coverage, f1, size, prec_local;
  double completeness_rate = 0.0;
  std::size_t n_models = 0;
};

// Harmonic mean of precision and coverage; 0 when both are 0.
inline double F1Score(double precision, double coverage) {
  const double denom = precision + coverage;
  return denom == 0.0 ? 0.0 : 2.0 * precision * coverage / denom;
}

struct PrecLocalResult {
  double value = 0.0;
  bool vacuous = true;
};

// Agreement between the features the rules use and the features the local
// explainer marked important, over samples where the rules reproduce the model.
// `explanations[i]` is I(x_i); a missing entry is an error only for agreeing
// samples.
inline PrecLocalResult PrecLocal(const RuleModel& rm,
                                 std::span<const std::optional<FeatureSet>> explanations,
                                 const BlackBox& model, const Dataset& data,
                                 PrecLocalMode mode = PrecLocalMode::kWinningTerm) {
  if (explanations.size() != data.size())
    Fail(ErrorKind::kData, "explanations do not line up with the evaluation samples");
  auto term_score = [](const RuleTerm& term, const FeatureSet& important) {
    const FeatureSet f = term.box.Features();
    if (f.empty()) return 0.0;
    return static_cast<double>(Intersect(f, important).size()) / static_cast<double>(f.size());
  };
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto pred = PredictRules(rm, data.row(i));
    if (!pred.class_id || *pred.class_id != model.Predict(data.row(i))) continue;
    if (!explanations[i])
      Fail(ErrorKind::kData, "no explanation for agreeing sample " + std::to_string(i));
    const FeatureSet& important = *explanations[i];
    double score = 0.0;
    if (mode == PrecLocalMode::kWinningTerm) {
      const auto& ref = *pred.winning_term;
      score = term_score(rm.rules[ref.dnf].terms[ref.term], important);
    } else {
      double sum = 0.0;
      std::size_t n = 0;
      for (const auto& dnf : rm.rules) {
        if (dnf.class_id != *pred.class_id) continue;
        for (const auto& term : dnf.terms)
          if (term.box.Covers(data.row(i))) {
            sum += term_score(term, important);
            ++n;
          }
      }
      score = n == 0 ? 0.0 : sum / static_cast<double>(n);
    }
    total += score;
    ++count;
  }
  if (count == 0) return {0.0, true};
  return {total / static_cast<double>(count), false};
}

inline PrecLocalResult PrecLocal(const RuleModel& rm, const std::vector<FeatureSet>& explanations,
                                 const BlackBox& model, const Dataset& data,
                                 PrecLocalMode mode = PrecLocalMode::kWinningTerm) {
  std::vector<std::optional<FeatureSet>> wrapped(explanations.begin(), explanations.end());
  return PrecLocal(rm, wrapped, model, data, mode);
}

// Precision on covered samples, coverage, F1, size and completeness. Prec-L is
// filled in only when per-sample important features are supplied.
inline EvalReport Evaluate(const RuleModel& rm, const BlackBox& model, const Dataset& data,
                           const EvalOptions& options = {},
                           const std::vector<FeatureSet>* explanations = nullptr) {
  if (data.empty()) Fail(ErrorKind::kData, "evaluation set is empty");
  EvalReport r;
  r.n_samples = data.size();
  const auto truth = model.PredictAll(data);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto pred = PredictRules(rm, data.row(i));
    if (!pred.class_id) continue;
    ++r.n_covered;
    r.n_agree += *pred.class_id == truth[i];
  }
  r.coverage = static_cast<double>(r.n_covered) / static_cast<double>(r.n_samples);
  r.precision = r.n_covered == 0 ? 0.0
                                 : static_cast<double>(r.n_agree) / static_cast<double>(r.n_covered);
  r.f1 = F1Score(r.precision, r.coverage);

  const int k = model.num_classes();
  for (ClassId c = 0; c < k; ++c) r.per_class_term_counts[c] = 0;
  for (const auto& dnf : rm.rules) r.per_class_term_counts[dnf.class_id] += dnf.terms.size();
  r.size = rm.Size();

  double chance = k > 0 ? 1.0 / k : 1.0;
  if (options.chance == ChanceLevel::kMajorityRate) {
    std::map<ClassId, std::size_t> freq;
    for (ClassId c : truth) ++freq[c];
    std::size_t top = 0;
    for (const auto& [c, n] : freq) top = std::max(top, n);
    chance = static_cast<double>(top) / static_cast<double>(truth.size());
  }
  bool every_class = true;
  for (const auto& [c, n] : r.per_class_term_counts) every_class = every_class && n > 0;
  r.complete = r.precision > chance && every_class;

  if (explanations) {
    const auto pl = PrecLocal(rm, *explanations, model, data, options.prec_local_mode);
    r.prec_local = pl.value;
    r.prec_local_vacuous = pl.vacuous;
  }
  return r;
}

inline MetricStats Stats(const std::vector<double>& values) {
  MetricStats s;
  if (values.empty()) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(var / static_cast<double>(values.size()));
  return s;
}

inline EnsembleReport AggregateReports(const std::vector<EvalReport>& reports) {
  if (reports.empty()) Fail(ErrorKind::kData, "cannot aggregate zero reports");
  std::vector<double> prec, cov, f1, size, pl;
  std::size_t complete = 0;
  for (const auto& r : reports) {
    prec.push_back(r.precision);
    cov.push_back(r.coverage);
    f1.push_back(r.f1);
    size.push_back(static_cast<double>(r.size));
    pl.push_back(r.prec_local);
    complete += r.complete;
  }
  EnsembleReport e;
  e.precision = Stats(prec);
  e.coverage = Stats(cov);
  e.f1 = Stats(f1);
  e.size = Stats(size);
  e.prec_local = Stats(pl);
  e.n_models = reports.size();
  e.completeness_rate = static_cast<double>(complete) / static_cast<double>(reports.size());
  return e;
}

inline EnsembleReport EvaluateEnsemble(const std::vector<RuleModel>& rule_models,
                                       const std::vector<const BlackBox*>& models,
                                       const Dataset& data, const EvalOptions& options = {},
                                       std::vector<EvalReport>* per_model = nullptr) {
  if (rule_models.size() != models.size())
    Fail(ErrorKind::kData, "rule models and black boxes are not paired (" +
                               std::to_string(rule_models.size()) + " vs " +
                               std::to_string(models.size()) + ")");
  if (rule_models.empty()) Fail(ErrorKind::kData, "empty ensemble");
  std::vector<EvalReport> reports;
  for (std::size_t i = 0; i < models.size(); ++i)
    reports.push_back(Evaluate(rule_models[i], *models[i], data, options));
  auto out = AggregateReports(reports);
  if (per_model) *per_model = std::move(reports);
  return out;
}

inline nlohmann::ordered_json ToJson(const EvalReport& r) {
  nlohmann::ordered_json counts = nlohmann::ordered_json::object();
  for (const auto& [c, n] : r.per_class_term_counts) counts[std::to_string(c)] = n;
  return {{"precision", r.precision},
          {"coverage", r.coverage},
          {"f1", r.f1},
          {"size", r.size},
          {"complete", r.complete},
          {"prec_local", r.prec_local},
          {"prec_local_vacuous", r.prec_local_vacuous},
          {"per_class_term_counts", counts},
          {"n_samples", r.n_samples},
          {"n_covered", r.n_covered},
          {"n_agree", r.n_agree}};
}

inline nlohmann::ordered_json ToJson(const EnsembleReport& e) {
  auto stats = [](const MetricStats& s) {
    return nlohmann::ordered_json{{"mean", s.mean}, {"std", s.std}};
  };
  return {{"n_models", e.n_models},
          {"precision", stats(e.precision)},
          {"coverage", stats(e.coverage)},
          {"f1", stats(e.f1)},
          {"size", stats(e.size)},
          {"prec_local", stats(e.prec_local)},
          {"completeness_rate", e.completeness_rate}};
}

// One row per model; `labels[i]` names row i (e.g. the model index).
inline void WriteReportCsv(const std::vector<EvalReport>& reports,
                           const std::vector<std::string>& labels, std::ostream& out) {
  out << "model,precision,coverage,f1,size,complete,prec_local\n";
  char buf[160];
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.6f,%zu,%d,%.6f", r.precision, r.coverage, r.f1,
                  r.size, r.complete ? 1 : 0, r.prec_local);
    out << (i < labels.size() ? labels[i] : std::to_string(i)) << "," << buf << "\n";
  }
}

}  // namespace cfire

#endif  // CFIRE_EVAL_HPP_
