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

// End-to-end run: load -> split -> train ensemble -> explain -> extract
// rules -> evaluate -> emit.
//
// Randomness derives from the root seed: the split uses
// DeriveSeed(seed, kSplit, 0), model i trains with seed
// DeriveSeed(seed, kModel, 0) + i and is explained with
// DeriveSeed(seed, kExplain, i).

#ifndef CFIRE_PIPELINE_HPP_
#define CFIRE_PIPELINE_HPP_

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "cfire/attribution.hpp"
#include "cfire/blackbox.hpp"
#include "cfire/dataset.hpp"
#include "cfire/eval.hpp"
#include "cfire/rulemodel.hpp"

namespace cfire {

struct RunConfig {
  std::string data_path;
  std::optional<std::string> label_column;
  SplitSpec split{0.8, 0.1, 0.1, 0};
  std::uint64_t seed = 0;
  int n_models = 10;
  std::vector<ExplainerKind> explainers{kAllExplainers.begin(), kAllExplainers.end()};
  double iota = 0.01;
  double tau = 0.01;
  int max_depth = 7;
  double purity = 0.95;
  bool dump_attributions = false;
  std::string out_dir = "cfire_out";
  MlpConfig mlp;
  int ks_budget = 300;
  int lime_budget = 300;
  int ig_steps = 200;

  void Validate() const {
    if (data_path.empty()) Fail(ErrorKind::kConfig, "data: path is required");
    if (!label_column) Fail(ErrorKind::kConfig, "label_col: a label column is required to train the black boxes");
    if (n_models < 1) Fail(ErrorKind::kConfig, "models: must be at least 1");
    if (explainers.empty()) Fail(ErrorKind::kConfig, "explainers: at least one is required");
    if (!(iota > 0.0 && iota < 1.0)) Fail(ErrorKind::kConfig, "iota: must lie in (0,1)");
    if (!(tau > 0.0 && tau <= 1.0)) Fail(ErrorKind::kConfig, "tau: must lie in (0,1]");
    if (max_depth < 0) Fail(ErrorKind::kConfig, "max_depth: must be non-negative");
    if (!(purity > 0.5 && purity <= 1.0)) Fail(ErrorKind::kConfig, "purity: must lie in (0.5,1]");
    const double fr[3] = {split.train_fraction, split.input_fraction, split.test_fraction};
    for (double f : fr)
      if (!(f > 0.0 && f < 1.0)) Fail(ErrorKind::kConfig, "split: fractions must lie in (0,1)");
    if (std::abs(fr[0] + fr[1] + fr[2] - 1.0) > 1e-9)
      Fail(ErrorKind::kConfig, "split: fractions must sum to 1");
    if (out_dir.empty()) Fail(ErrorKind::kConfig, "out: directory is required");
    if (mlp.hidden_width <= 0 || mlp.epochs <= 0 || !(mlp.learning_rate > 0))
      Fail(ErrorKind::kConfig, "mlp: hyperparameters must be positive");
    if (ks_budget <= 0 || lime_budget <= 0 || ig_steps <= 0)
      Fail(ErrorKind::kConfig, "explainer budgets must be positive");
  }
};

struct ModelOutcome {
  std::size_t index = 0;
  bool ok = false;
  std::string error;
  double test_accuracy = 0.0;
  RuleModel rules;
  EvalReport report;
};

struct RunResult {
  int exit_code = 0;
  std::vector<ModelOutcome> models;
  std::optional<EnsembleReport> ensemble;
};

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kConfig = 1;
inline constexpr int kData = 2;
inline constexpr int kAllModelsFailed = 3;
}  // namespace exit_code

namespace detail {

inline std::string ModelTag(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%03zu", i);
  return buf;
}

inline void WriteFile(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorKind::kData, "cannot write '" + path.string() + "'");
  out << text;
}

}  // namespace detail

// Runs one black box through rule extraction and test-set evaluation.
inline ModelOutcome ProcessModel(std::size_t index, const Mlp& model, const SplitResult& parts,
                                 const RunConfig& cfg,
                                 std::vector<CfireTrace>* traces = nullptr) {
  ModelOutcome out;
  out.index = index;
  out.test_accuracy = Accuracy(model, parts.test);
  ExplainerParams ep = ExplainerParams::FromTrainingData(
      parts.train, DeriveSeed(cfg.seed, seed_tag::kExplain, index));
  ep.iota = cfg.iota;
  ep.ks_budget = cfg.ks_budget;
  ep.lime_budget = cfg.lime_budget;
  ep.ig_steps = cfg.ig_steps;

  std::vector<Explainer> explainers;
  for (ExplainerKind kind : kAllExplainers)
    if (std::find(cfg.explainers.begin(), cfg.explainers.end(), kind) != cfg.explainers.end())
      explainers.push_back(MakeExplainer(kind, ep));

  CfireParams cp;
  cp.iota = cfg.iota;
  cp.tau = cfg.tau;
  cp.box.max_depth = cfg.max_depth;
  cp.box.purity_threshold = cfg.purity;
  cp.seed = ep.seed;
  out.rules = CfireMulti(model, explainers, parts.input, cp, traces);

  // Prec-L on the test split uses the selected explainer's attributions.
  const Explainer* chosen = nullptr;
  for (const auto& e : explainers)
    if (e.id == out.rules.explainer_id) chosen = &e;
  std::vector<std::size_t> rows(parts.test.size());
  std::iota(rows.begin(), rows.end(), 0);
  const auto attributions = ExplainRows(model, *chosen, parts.test, rows);
  std::vector<FeatureSet> important;
  important.reserve(attributions.size());
  for (const auto& a : attributions) important.push_back(ImportantFeatures(a.weights, cfg.iota));
  out.report = Evaluate(out.rules, model, parts.test, {}, &important);
  out.ok = true;
  return out;
}

inline RunResult Run(const RunConfig& cfg, std::ostream& log) {
  RunResult result;
  try {
    cfg.Validate();
  } catch (const Error& e) {
    log << "config error: " << e.what() << "\n";
    result.exit_code = exit_code::kConfig;
    return result;
  }

  SplitResult parts;
  try {
    const Dataset data = LoadCsv(cfg.data_path, cfg.label_column);
    SplitSpec spec = cfg.split;
    spec.seed = cfg.seed;
    parts = Split(data, spec);
  } catch (const Error& e) {
    log << "data error: " << e.what() << "\n";
    result.exit_code = e.kind() == ErrorKind::kConfig ? exit_code::kConfig : exit_code::kData;
    return result;
  }
  log << "split: train " << parts.train.size() << ", input " << parts.input.size() << ", test "
      << parts.test.size() << ", d " << parts.train.dim() << "\n";

  const std::filesystem::path out_dir(cfg.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    log << "config error: out: cannot create '" << cfg.out_dir << "': " << ec.message() << "\n";
    result.exit_code = exit_code::kConfig;
    return result;
  }

  const std::size_t n = static_cast<std::size_t>(cfg.n_models);
  result.models.resize(n);
  std::vector<std::vector<CfireTrace>> traces(n);
  const std::uint64_t model_seed = DeriveSeed(cfg.seed, seed_tag::kModel, 0);
  ParallelFor(n, [&](std::size_t i) {
    ModelOutcome& slot = result.models[i];
    slot.index = i;
    try {
      MlpConfig mc = cfg.mlp;
      mc.seed = model_seed + i;
      const Mlp model = TrainMlp(parts.train, mc);
      slot = ProcessModel(i, model, parts, cfg, cfg.dump_attributions ? &traces[i] : nullptr);
    } catch (const Error& e) {
      slot.ok = false;
      slot.error = std::string("model ") + std::to_string(i) + ": " + e.what();
    }
  });

  // Single writer, in model order.
  std::vector<EvalReport> reports;
  std::vector<std::string> labels;
  std::ostringstream summary;
  summary << "data " << cfg.data_path << "; train " << parts.train.size() << ", input "
          << parts.input.size() << ", test " << parts.test.size() << "; seed " << cfg.seed << "\n";
  for (const auto& m : result.models) {
    const std::string tag = detail::ModelTag(m.index);
    if (!m.ok) {
      log << "model " << tag << " failed: " << m.error << "\n";
      summary << "model " << tag << ": FAILED (" << m.error << ")\n";
      continue;
    }
    detail::WriteFile(out_dir / ("rulemodel_" + tag + ".json"), Serialize(m.rules));
    detail::WriteFile(out_dir / ("rules_" + tag + ".txt"), PrettyPrint(m.rules));
    nlohmann::ordered_json rep = ToJson(m.report);
    rep["model"] = m.index;
    rep["explainer"] = m.rules.explainer_id;
    rep["black_box_test_accuracy"] = m.test_accuracy;
    detail::WriteFile(out_dir / ("report_" + tag + ".json"), rep.dump(2) + "\n");
    if (cfg.dump_attributions) {
      std::filesystem::create_directories(out_dir / "attributions");
      for (const auto& tr : traces[m.index]) {
        if (tr.attributions.empty()) continue;
        std::string id;
        for (const auto& a : tr.attributions)
          if (!a.explainer_id.empty()) id = a.explainer_id;
        if (id.empty()) continue;
        std::ostringstream csv;
        std::vector<AttributionVector> present;
        for (const auto& a : tr.attributions)
          if (!a.explainer_id.empty()) present.push_back(a);
        WriteAttributionCsv(present, parts.input.feature_names(), csv);
        detail::WriteFile(out_dir / "attributions" / ("model_" + tag + "_" + id + ".csv"), csv.str());
      }
    }
    reports.push_back(m.report);
    labels.push_back(tag);
    char line[200];
    std::snprintf(line, sizeof(line),
                  "model %s: explainer %s, black-box test acc %.4f, precision %.4f, coverage %.4f, "
                  "f1 %.4f, size %zu, complete %s, prec-L %.4f\n",
                  tag.c_str(), m.rules.explainer_id.c_str(), m.test_accuracy, m.report.precision,
                  m.report.coverage, m.report.f1, m.report.size, m.report.complete ? "yes" : "no",
                  m.report.prec_local);
    summary << line;
  }

  if (reports.empty()) {
    log << "all models failed\n";
    detail::WriteFile(out_dir / "summary.txt", summary.str());
    result.exit_code = exit_code::kAllModelsFailed;
    return result;
  }
  result.ensemble = AggregateReports(reports);
  nlohmann::ordered_json ens = ToJson(*result.ensemble);
  ens["failed_models"] = n - reports.size();
  detail::WriteFile(out_dir / "ensemble_report.json", ens.dump(2) + "\n");
  std::ostringstream csv;
  WriteReportCsv(reports, labels, csv);
  detail::WriteFile(out_dir / "ensemble_report.csv", csv.str());
  const auto& e = *result.ensemble;
  char line[300];
  std::snprintf(line, sizeof(line),
                "ensemble (%zu models): precision %.3f±%.3f, f1 %.3f±%.3f, coverage %.3f±%.3f, "
                "size %.2f±%.2f, prec-L %.3f±%.3f, completeness %.3f\n",
                e.n_models, e.precision.mean, e.precision.std, e.f1.mean, e.f1.std,
                e.coverage.mean, e.coverage.std, e.size.mean, e.size.std, e.prec_local.mean,
                e.prec_local.std, e.completeness_rate);
  summary << line;
  detail::WriteFile(out_dir / "summary.txt", summary.str());
  log << summary.str();
  result.exit_code = exit_code::kOk;
  return result;
}

}  // namespace cfire

#endif  // CFIRE_PIPELINE_HPP_
