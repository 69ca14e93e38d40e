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

// Global rule models: one DNF of bounded boxes per class, assembled from
// closed sets of locally important features and reduced by greedy set cover.

#ifndef CFIRE_RULEMODEL_HPP_
#define CFIRE_RULEMODEL_HPP_

#include <algorithm>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "cfire/attribution.hpp"
#include "cfire/blackbox.hpp"
#include "cfire/boxes.hpp"
#include "cfire/common.hpp"
#include "cfire/dataset.hpp"
#include "cfire/itemsets.hpp"

namespace cfire {

// A selected term, frozen with the statistics it had on X at build time.
struct RuleTerm {
  Box box;
  FeatureSet source_set;
  double precision = 0.0;
  std::size_t covered = 0;

  bool operator==(const RuleTerm&) const = default;
};

struct ClassDNF {
  ClassId class_id = 0;
  std::vector<RuleTerm> terms;

  bool operator==(const ClassDNF&) const = default;
};

struct CandidateOutcome {
  std::string explainer;
  double accuracy = 0.0;
  std::size_t size = 0;
  std::string error;

  bool operator==(const CandidateOutcome&) const = default;
};

struct Provenance {
  std::uint64_t seed = 0;
  std::uint64_t dataset_fingerprint = 0;
  std::size_t n_samples = 0;
  double accuracy_on_input = 0.0;
  std::vector<CandidateOutcome> candidates;
  std::vector<std::string> warnings;

  bool operator==(const Provenance&) const = default;
};

struct RuleModel {
  std::vector<ClassDNF> rules;
  std::string explainer_id;
  double iota = 0.01;
  double tau = 0.01;
  BoxParams box_params;
  std::vector<std::string> feature_names;
  Provenance provenance;

  std::size_t Size() const {
    std::size_t n = 0;
    for (const auto& dnf : rules) n += dnf.terms.size();
    return n;
  }

  bool operator==(const RuleModel& o) const {
    return rules == o.rules && explainer_id == o.explainer_id && iota == o.iota &&
           tau == o.tau && box_params.max_depth == o.box_params.max_depth &&
           box_params.purity_threshold == o.box_params.purity_threshold &&
           box_params.min_leaf_positives == o.box_params.min_leaf_positives &&
           feature_names == o.feature_names && provenance == o.provenance;
  }
};

struct TermRef {
  std::size_t dnf = 0;   // position in RuleModel::rules
  std::size_t term = 0;  // position in ClassDNF::terms
};

struct Prediction {
  std::optional<ClassId> class_id;  // empty = abstain
  std::optional<TermRef> winning_term;
  int n_satisfied_classes = 0;

  bool abstained() const { return !class_id.has_value(); }
};

enum class EmptyClassPolicy { kWarn, kError };

struct CfireParams {
  double iota = 0.01;
  double tau = 0.01;
  BoxParams box;
  EmptyClassPolicy on_empty_class = EmptyClassPolicy::kWarn;
  std::uint64_t seed = 0;

  void Validate() const {
    if (!(iota > 0.0 && iota < 1.0)) Fail(ErrorKind::kConfig, "iota must lie in (0,1)");
    if (!(tau > 0.0 && tau <= 1.0)) Fail(ErrorKind::kConfig, "tau must lie in (0,1]");
    box.Validate();
  }
};

// Greedy set cover: repeatedly take the term adding the most uncovered
// positives (ties: higher precision, fewer constraints, earlier position).
// Returns positions into `terms` in selection order.
inline std::vector<std::size_t> GreedySelectIndices(const std::vector<CandidateTerm>& terms,
                                                    std::span<const std::size_t> positives) {
  std::size_t universe = 0;
  for (std::size_t p : positives) universe = std::max(universe, p + 1);
  std::vector<char> wanted(universe, 0), covered(universe, 0);
  for (std::size_t p : positives) wanted[p] = 1;
  std::vector<char> taken(terms.size(), 0);
  std::vector<std::size_t> picks;
  for (;;) {
    std::size_t best = terms.size(), best_gain = 0;
    for (std::size_t t = 0; t < terms.size(); ++t) {
      if (taken[t]) continue;
      std::size_t gain = 0;
      for (std::size_t r : terms[t].covered_positive_indices)
        gain += r < universe && wanted[r] && !covered[r];
      if (gain == 0) continue;
      bool better = best == terms.size() || gain > best_gain;
      if (!better && gain == best_gain) {
        const auto& a = terms[t];
        const auto& b = terms[best];
        better = a.precision_on_input > b.precision_on_input ||
                 (a.precision_on_input == b.precision_on_input && a.box.size() < b.box.size());
      }
      if (better) {
        best = t;
        best_gain = gain;
      }
    }
    if (best == terms.size()) break;
    taken[best] = 1;
    picks.push_back(best);
    for (std::size_t r : terms[best].covered_positive_indices)
      if (r < universe && wanted[r]) covered[r] = 1;
  }
  return picks;
}

inline std::vector<CandidateTerm> GreedySelect(const std::vector<CandidateTerm>& terms,
                                               std::span<const std::size_t> positives) {
  std::vector<CandidateTerm> out;
  for (std::size_t t : GreedySelectIndices(terms, positives)) out.push_back(terms[t]);
  return out;
}

// Covering terms are compared by precision, then covered count; the first in
// (class id, term position) order wins what remains.
inline Prediction PredictRules(const RuleModel& rm, std::span<const double> x) {
  Prediction out;
  std::vector<ClassId> satisfied;
  const RuleTerm* best = nullptr;
  ClassId best_class = 0;
  for (std::size_t k = 0; k < rm.rules.size(); ++k) {
    const auto& dnf = rm.rules[k];
    bool any = false;
    for (std::size_t t = 0; t < dnf.terms.size(); ++t) {
      const auto& term = dnf.terms[t];
      if (!term.box.Covers(x)) continue;
      any = true;
      bool better = best == nullptr;
      if (!better) {
        if (term.precision != best->precision) {
          better = term.precision > best->precision;
        } else if (term.covered != best->covered) {
          better = term.covered > best->covered;
        } else if (dnf.class_id != best_class) {
          better = dnf.class_id < best_class;
        }
      }
      if (better) {
        best = &term;
        best_class = dnf.class_id;
        out.winning_term = TermRef{k, t};
      }
    }
    if (any) satisfied.push_back(dnf.class_id);
  }
  std::sort(satisfied.begin(), satisfied.end());
  satisfied.erase(std::unique(satisfied.begin(), satisfied.end()), satisfied.end());
  out.n_satisfied_classes = static_cast<int>(satisfied.size());
  if (best != nullptr) out.class_id = best_class;
  return out;
}

// Fraction of rows where the rules reproduce the model; abstentions count as
// misses.
inline double RuleAccuracy(const RuleModel& rm, std::span<const ClassId> model_predictions,
                           const Dataset& data) {
  if (data.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto p = PredictRules(rm, data.row(i));
    hits += p.class_id && *p.class_id == model_predictions[i];
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

// Per-sample side outputs of a Cfire run.
struct CfireTrace {
  std::vector<AttributionVector> attributions;  // one per row of X, row order
  std::vector<FeatureSet> important;            // I(x) per row of X
  std::vector<std::size_t> closed_sets_per_class;
  std::vector<std::size_t> candidates_per_class;
};

// Builds one DNF per class from the local explanations of `explainer` on X.
inline RuleModel Cfire(const BlackBox& model, const Explainer& explainer, const Dataset& x,
                       const CfireParams& params, CfireTrace* trace = nullptr) {
  params.Validate();
  if (x.empty()) Fail(ErrorKind::kData, "input set is empty");
  const auto predictions = model.PredictAll(x);
  const int k = std::max(model.num_classes(),
                         *std::max_element(predictions.begin(), predictions.end()) + 1);

  RuleModel rm;
  rm.explainer_id = explainer.id;
  rm.iota = params.iota;
  rm.tau = params.tau;
  rm.box_params = params.box;
  rm.feature_names = x.feature_names();
  rm.provenance.seed = params.seed;
  rm.provenance.dataset_fingerprint = x.Fingerprint();
  rm.provenance.n_samples = x.size();
  if (trace) {
    trace->attributions.assign(x.size(), {});
    trace->important.assign(x.size(), {});
    trace->closed_sets_per_class.assign(k, 0);
    trace->candidates_per_class.assign(k, 0);
  }

  for (ClassId c = 0; c < k; ++c) {
    const ClassBlock block = MakeClassBlock(x, predictions, c);
    ClassDNF dnf{c, {}};
    if (block.indices.empty()) {
      const std::string msg = "class " + std::to_string(c) + " has no samples in the input set";
      if (params.on_empty_class == EmptyClassPolicy::kError) Fail(ErrorKind::kData, msg);
      rm.provenance.warnings.push_back(msg);
      rm.rules.push_back(std::move(dnf));
      continue;
    }
    std::vector<std::size_t> negatives;
    negatives.reserve(x.size() - block.indices.size());
    for (std::size_t i = 0; i < x.size(); ++i)
      if (predictions[i] != c) negatives.push_back(i);

    auto attributions = ExplainRows(model, explainer, x, block.indices);
    std::vector<FeatureSet> transactions;
    transactions.reserve(block.indices.size());
    for (std::size_t j = 0; j < block.indices.size(); ++j) {
      transactions.push_back(ImportantFeatures(attributions[j].weights, params.iota));
      if (!attributions[j].note.empty())
        rm.provenance.warnings.push_back(explainer.id + " sample " +
                                         std::to_string(block.indices[j]) + ": " +
                                         attributions[j].note);
      if (trace) {
        trace->important[block.indices[j]] = transactions.back();
        trace->attributions[block.indices[j]] = attributions[j];
      }
    }
    const TransactionDB db(std::move(transactions), x.dim());
    auto closed = EnumerateClosed(db, params.tau);
    // The empty set would yield an unconstrained term; it is never used.
    std::erase_if(closed, [](const ClosedSet& s) { return s.features.empty(); });

    std::vector<std::vector<CandidateTerm>> per_set(closed.size());
    ParallelFor(closed.size(), [&](std::size_t s) {
      std::vector<std::size_t> supporting;
      supporting.reserve(closed[s].support_indices.size());
      for (std::size_t t : closed[s].support_indices) supporting.push_back(block.indices[t]);
      per_set[s] = LearnTerms(closed[s].features, x, supporting, block.indices, negatives,
                              params.box);
    });
    std::vector<CandidateTerm> candidates;
    for (auto& terms : per_set)
      for (auto& t : terms) candidates.push_back(std::move(t));
    if (trace) {
      trace->closed_sets_per_class[c] = closed.size();
      trace->candidates_per_class[c] = candidates.size();
    }

    for (std::size_t t : GreedySelectIndices(candidates, block.indices)) {
      const auto& cand = candidates[t];
      dnf.terms.push_back({cand.box, cand.source_set, cand.precision_on_input,
                           cand.covered_positive_indices.size()});
    }
    if (dnf.terms.empty())
      rm.provenance.warnings.push_back("class " + std::to_string(c) + " received no terms");
    rm.rules.push_back(std::move(dnf));
  }
  rm.provenance.accuracy_on_input = RuleAccuracy(rm, predictions, x);
  return rm;
}

// Runs Cfire once per explainer and keeps the model that best reproduces the
// black box on X. Earlier explainers win ties, so pass them in canonical order.
inline RuleModel CfireMulti(const BlackBox& model, const std::vector<Explainer>& explainers,
                            const Dataset& x, const CfireParams& params,
                            std::vector<CfireTrace>* traces = nullptr) {
  if (explainers.empty()) Fail(ErrorKind::kConfig, "no explainers given");
  std::vector<CandidateOutcome> outcomes;
  std::optional<RuleModel> best;
  std::string errors;
  if (traces) traces->assign(explainers.size(), {});
  for (std::size_t e = 0; e < explainers.size(); ++e) {
    CandidateOutcome outcome{explainers[e].id, 0.0, 0, {}};
    try {
      RuleModel rm = Cfire(model, explainers[e], x, params, traces ? &(*traces)[e] : nullptr);
      outcome.accuracy = rm.provenance.accuracy_on_input;
      outcome.size = rm.Size();
      if (!best || outcome.accuracy > best->provenance.accuracy_on_input) best = std::move(rm);
    } catch (const Error& err) {
      outcome.error = err.what();
      errors += (errors.empty() ? "" : "; ") + explainers[e].id + ": " + err.what();
    }
    outcomes.push_back(std::move(outcome));
  }
  if (!best) Fail(ErrorKind::kExplainer, "every explainer failed: " + errors);
  best->provenance.candidates = std::move(outcomes);
  return std::move(*best);
}

// ---------------------------------------------------------------------------
// Documents.

namespace detail {

using Json = nlohmann::ordered_json;

inline std::string HexU64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline const Json& Require(const Json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) Fail(ErrorKind::kSchema, path + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) Fail(ErrorKind::kSchema, path + "." + key + ": missing");
  return *it;
}

inline double RequireNumber(const Json& obj, const std::string& key, const std::string& path) {
  const Json& v = Require(obj, key, path);
  if (!v.is_number()) Fail(ErrorKind::kSchema, path + "." + key + ": expected a number");
  return v.get<double>();
}

inline std::int64_t RequireInt(const Json& obj, const std::string& key, const std::string& path) {
  const Json& v = Require(obj, key, path);
  if (!v.is_number_integer()) Fail(ErrorKind::kSchema, path + "." + key + ": expected an integer");
  return v.get<std::int64_t>();
}

inline const Json& RequireArray(const Json& obj, const std::string& key, const std::string& path) {
  const Json& v = Require(obj, key, path);
  if (!v.is_array()) Fail(ErrorKind::kSchema, path + "." + key + ": expected an array");
  return v;
}

inline std::string NameOf(const RuleModel& rm, int feature) {
  if (feature >= 0 && static_cast<std::size_t>(feature) < rm.feature_names.size())
    return rm.feature_names[feature];
  return "x" + std::to_string(feature);
}

}  // namespace detail

inline nlohmann::ordered_json ToJson(const RuleModel& rm) {
  using detail::Json;
  Json classes = Json::array();
  for (const auto& dnf : rm.rules) {
    Json terms = Json::array();
    for (const auto& term : dnf.terms) {
      Json constraints = Json::array();
      for (const auto& c : term.box.constraints())
        constraints.push_back(
            {{"feature", c.feature}, {"name", detail::NameOf(rm, c.feature)}, {"lo", c.lo}, {"hi", c.hi}});
      terms.push_back({{"constraints", constraints},
                       {"precision", term.precision},
                       {"covered", term.covered},
                       {"source", term.source_set}});
    }
    classes.push_back({{"class_id", dnf.class_id}, {"terms", terms}});
  }
  Json candidates = Json::array();
  for (const auto& c : rm.provenance.candidates)
    candidates.push_back(
        {{"explainer", c.explainer}, {"accuracy", c.accuracy}, {"size", c.size}, {"error", c.error}});
  Json doc;
  doc["classes"] = classes;
  doc["explainer"] = rm.explainer_id;
  doc["feature_names"] = rm.feature_names;
  doc["params"] = {{"iota", rm.iota},
                   {"tau", rm.tau},
                   {"max_depth", rm.box_params.max_depth},
                   {"purity_threshold", rm.box_params.purity_threshold},
                   {"min_leaf_positives", rm.box_params.min_leaf_positives}};
  doc["provenance"] = {{"seed", rm.provenance.seed},
                       {"dataset_fingerprint", detail::HexU64(rm.provenance.dataset_fingerprint)},
                       {"n_samples", rm.provenance.n_samples},
                       {"accuracy_on_input", rm.provenance.accuracy_on_input},
                       {"candidates", candidates},
                       {"warnings", rm.provenance.warnings}};
  return doc;
}

inline std::string Serialize(const RuleModel& rm) { return ToJson(rm).dump(2) + "\n"; }

// Parses a rule-model document. Only "classes" (with class ids, constraint
// bounds and features) is mandatory; everything else falls back to defaults.
inline RuleModel Deserialize(const std::string& text) {
  using detail::Json;
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    Fail(ErrorKind::kSchema, std::string("$: not valid JSON: ") + e.what());
  }
  RuleModel rm;
  if (!doc.is_object()) Fail(ErrorKind::kSchema, "$: expected an object");
  if (auto it = doc.find("feature_names"); it != doc.end()) {
    if (!it->is_array()) Fail(ErrorKind::kSchema, "$.feature_names: expected an array");
    for (const auto& n : *it) {
      if (!n.is_string()) Fail(ErrorKind::kSchema, "$.feature_names: expected strings");
      rm.feature_names.push_back(n.get<std::string>());
    }
  }
  const Json& classes = detail::RequireArray(doc, "classes", "$");
  for (std::size_t k = 0; k < classes.size(); ++k) {
    const std::string cpath = "$.classes[" + std::to_string(k) + "]";
    ClassDNF dnf;
    dnf.class_id = static_cast<ClassId>(detail::RequireInt(classes[k], "class_id", cpath));
    const Json& terms = detail::RequireArray(classes[k], "terms", cpath);
    for (std::size_t t = 0; t < terms.size(); ++t) {
      const std::string tpath = cpath + ".terms[" + std::to_string(t) + "]";
      RuleTerm term;
      const Json& cons = detail::RequireArray(terms[t], "constraints", tpath);
      std::vector<Interval> intervals;
      for (std::size_t i = 0; i < cons.size(); ++i) {
        const std::string ipath = tpath + ".constraints[" + std::to_string(i) + "]";
        Interval iv;
        iv.feature = static_cast<int>(detail::RequireInt(cons[i], "feature", ipath));
        iv.lo = detail::RequireNumber(cons[i], "lo", ipath);
        iv.hi = detail::RequireNumber(cons[i], "hi", ipath);
        intervals.push_back(iv);
      }
      try {
        term.box = Box(std::move(intervals));
      } catch (const Error& e) {
        Fail(ErrorKind::kSchema, tpath + ".constraints: " + e.what());
      }
      if (terms[t].contains("precision"))
        term.precision = detail::RequireNumber(terms[t], "precision", tpath);
      if (terms[t].contains("covered"))
        term.covered = static_cast<std::size_t>(detail::RequireInt(terms[t], "covered", tpath));
      if (auto it = terms[t].find("source"); it != terms[t].end()) {
        if (!it->is_array()) Fail(ErrorKind::kSchema, tpath + ".source: expected an array");
        term.source_set = it->get<FeatureSet>();
      } else {
        term.source_set = term.box.Features();
      }
      dnf.terms.push_back(std::move(term));
    }
    rm.rules.push_back(std::move(dnf));
  }
  for (std::size_t a = 0; a < rm.rules.size(); ++a)
    for (std::size_t b = a + 1; b < rm.rules.size(); ++b)
      if (rm.rules[a].class_id == rm.rules[b].class_id)
        Fail(ErrorKind::kSchema, "$.classes[" + std::to_string(b) + "].class_id: duplicate class id");

  if (doc.contains("explainer")) {
    if (!doc["explainer"].is_string()) Fail(ErrorKind::kSchema, "$.explainer: expected a string");
    rm.explainer_id = doc["explainer"].get<std::string>();
  }
  if (auto it = doc.find("params"); it != doc.end()) {
    const Json& p = *it;
    if (p.contains("iota")) rm.iota = detail::RequireNumber(p, "iota", "$.params");
    if (p.contains("tau")) rm.tau = detail::RequireNumber(p, "tau", "$.params");
    if (p.contains("max_depth"))
      rm.box_params.max_depth = static_cast<int>(detail::RequireInt(p, "max_depth", "$.params"));
    if (p.contains("purity_threshold"))
      rm.box_params.purity_threshold = detail::RequireNumber(p, "purity_threshold", "$.params");
    if (p.contains("min_leaf_positives"))
      rm.box_params.min_leaf_positives =
          static_cast<int>(detail::RequireInt(p, "min_leaf_positives", "$.params"));
  }
  if (auto it = doc.find("provenance"); it != doc.end()) {
    const Json& p = *it;
    const std::string path = "$.provenance";
    if (p.contains("seed")) rm.provenance.seed = detail::Require(p, "seed", path).get<std::uint64_t>();
    if (p.contains("dataset_fingerprint")) {
      const Json& f = p["dataset_fingerprint"];
      if (!f.is_string()) Fail(ErrorKind::kSchema, path + ".dataset_fingerprint: expected a hex string");
      rm.provenance.dataset_fingerprint = std::stoull(f.get<std::string>(), nullptr, 16);
    }
    if (p.contains("n_samples"))
      rm.provenance.n_samples = static_cast<std::size_t>(detail::RequireInt(p, "n_samples", path));
    if (p.contains("accuracy_on_input"))
      rm.provenance.accuracy_on_input = detail::RequireNumber(p, "accuracy_on_input", path);
    if (p.contains("candidates")) {
      const Json& cands = detail::RequireArray(p, "candidates", path);
      for (std::size_t i = 0; i < cands.size(); ++i) {
        const std::string cp = path + ".candidates[" + std::to_string(i) + "]";
        CandidateOutcome c;
        c.explainer = detail::Require(cands[i], "explainer", cp).get<std::string>();
        c.accuracy = detail::RequireNumber(cands[i], "accuracy", cp);
        c.size = static_cast<std::size_t>(detail::RequireInt(cands[i], "size", cp));
        if (cands[i].contains("error")) c.error = cands[i]["error"].get<std::string>();
        rm.provenance.candidates.push_back(std::move(c));
      }
    }
    if (p.contains("warnings"))
      rm.provenance.warnings = detail::RequireArray(p, "warnings", path).get<std::vector<std::string>>();
  }
  return rm;
}

// Human-readable form: one DNF per class, e.g.
//   class 1 <- (petal_len ∈ [1, 1.9] ∧ petal_wid ∈ [0.1, 0.6])   prec 0.98, covers 40
inline std::string PrettyPrint(const RuleModel& rm) {
  std::ostringstream out;
  char buf[64];
  auto num = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return std::string(buf);
  };
  out << "explainer " << rm.explainer_id << ", " << rm.Size() << " terms\n";
  for (const auto& dnf : rm.rules) {
    out << "class " << dnf.class_id << " <-";
    if (dnf.terms.empty()) out << " (no terms)\n";
    for (std::size_t t = 0; t < dnf.terms.size(); ++t) {
      const auto& term = dnf.terms[t];
      out << (t == 0 ? " " : "\n    OR ") << "(";
      const auto& cons = term.box.constraints();
      for (std::size_t i = 0; i < cons.size(); ++i)
        out << (i ? " ∧ " : "") << detail::NameOf(rm, cons[i].feature) << " ∈ [" << num(cons[i].lo)
            << ", " << num(cons[i].hi) << "]";
      out << ")   prec " << num(term.precision) << ", covers " << term.covered;
    }
    if (!dnf.terms.empty()) out << "\n";
  }
  return out.str();
}

}  // namespace cfire

#endif  // CFIRE_RULEMODEL_HPP_
