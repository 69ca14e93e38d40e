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

#include "cfire/eval.hpp"

#include <gtest/gtest.h>

#include <sstream>

namespace cfire {
namespace {

RuleTerm Term(std::vector<Interval> cons, double precision = 1.0, std::size_t covered = 1) {
  return {Box(std::move(cons)), {}, precision, covered};
}

// Ten samples x0 = 0..9 with model prediction = 1 iff x0 >= 5 (logits on x0).
LinearModel StepModel() { return LinearModel({{-1, 0}, {1, 0}}, {4.5, -4.5}); }

Dataset TenSamples() {
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 10; ++i) rows.push_back({static_cast<double>(i), 0.0});
  return Dataset::FromRows(rows);
}

// Covers x0 in 0..7 (8 samples). Samples 0..4 and 6 agree with the model;
// 5 falls in a class-0 term, and at 7 a class-0 term outranks the class-1 one.
RuleModel EightCoveredSixAgree() {
  RuleModel rm;
  rm.rules = {{0, {Term({{0, 0, 4}}), Term({{0, 5, 5}}), Term({{0, 7, 7}}, 0.9)}},
              {1, {Term({{0, 6, 6}}), Term({{0, 7, 7}}, 0.5)}}};
  return rm;
}

TEST(F1Test, HarmonicMean) {
  EXPECT_DOUBLE_EQ(F1Score(0.75, 0.8), 2 * 0.75 * 0.8 / 1.55);
  EXPECT_EQ(F1Score(0, 0), 0.0);
  EXPECT_EQ(F1Score(1, 1), 1.0);
}

TEST(EvaluateTest, WorkedExample) {
  const auto rm = EightCoveredSixAgree();
  const auto model = StepModel();
  const auto r = Evaluate(rm, model, TenSamples());
  EXPECT_EQ(r.n_samples, 10u);
  EXPECT_EQ(r.n_covered, 8u);
  EXPECT_EQ(r.n_agree, 6u);
  EXPECT_DOUBLE_EQ(r.precision, 0.75);
  EXPECT_DOUBLE_EQ(r.coverage, 0.8);
  EXPECT_NEAR(r.f1, 0.7742, 5e-5);
  EXPECT_EQ(r.size, 5u);
  EXPECT_TRUE(r.complete);
  EXPECT_EQ(r.per_class_term_counts.at(0), 3u);
  EXPECT_EQ(r.per_class_term_counts.at(1), 2u);
}

TEST(EvaluateTest, MissingClassIsIncomplete) {
  RuleModel rm;
  rm.rules = {{0, {Term({{0, 0, 4}})}}};
  const auto r = Evaluate(rm, StepModel(), TenSamples());
  EXPECT_DOUBLE_EQ(r.precision, 1.0);
  EXPECT_DOUBLE_EQ(r.coverage, 0.5);
  EXPECT_FALSE(r.complete);
  EXPECT_EQ(r.per_class_term_counts.at(1), 0u);
}

TEST(EvaluateTest, PrecisionAtChanceIsIncomplete) {
  RuleModel rm;
  rm.rules = {{0, {Term({{0, 0, 9}})}}, {1, {Term({{0, 100, 101}})}}};
  const auto r = Evaluate(rm, StepModel(), TenSamples());
  EXPECT_DOUBLE_EQ(r.precision, 0.5);
  EXPECT_FALSE(r.complete);
  EvalOptions majority;
  majority.chance = ChanceLevel::kMajorityRate;
  EXPECT_FALSE(Evaluate(rm, StepModel(), TenSamples(), majority).complete);
}

TEST(EvaluateTest, NothingCoveredGivesZeroPrecision) {
  RuleModel rm;
  rm.rules = {{0, {Term({{0, 50, 60}})}}, {1, {Term({{0, 70, 80}})}}};
  const auto r = Evaluate(rm, StepModel(), TenSamples());
  EXPECT_EQ(r.precision, 0.0);
  EXPECT_EQ(r.coverage, 0.0);
  EXPECT_EQ(r.f1, 0.0);
  EXPECT_FALSE(r.complete);
}

TEST(PrecLocalTest, SingleSampleExamples) {
  RuleModel rm;
  rm.rules = {{0, {Term({{1, -1, 1}, {2, -1, 1}})}}};
  const LinearModel model({{0, 0, 0, 0, 0, 0}}, {0});
  const auto data = Dataset::FromRows({{0, 0, 0, 0, 0, 0}});
  EXPECT_DOUBLE_EQ(PrecLocal(rm, std::vector<FeatureSet>{{1, 2, 5}}, model, data).value, 1.0);
  EXPECT_DOUBLE_EQ(PrecLocal(rm, std::vector<FeatureSet>{{2}}, model, data).value, 0.5);
  const auto empty = PrecLocal(rm, std::vector<FeatureSet>{{}}, model, data);
  EXPECT_EQ(empty.value, 0.0);
  EXPECT_FALSE(empty.vacuous);
}

TEST(PrecLocalTest, FullPartialAndVacuous) {
  RuleModel rm;
  rm.rules = {{0, {Term({{0, 0, 4}, {1, -1, 1}})}}, {1, {Term({{0, 5, 9}})}}};
  const auto model = StepModel();
  const auto data = TenSamples();
  std::vector<FeatureSet> both(10, FeatureSet{0, 1});
  EXPECT_DOUBLE_EQ(PrecLocal(rm, both, model, data).value, 1.0);
  std::vector<FeatureSet> only0(10, FeatureSet{0});
  // Class 0 terms use {0,1} -> 1/2; class 1 terms use {0} -> 1.
  EXPECT_DOUBLE_EQ(PrecLocal(rm, only0, model, data).value, 0.75);
  std::vector<FeatureSet> half(10, FeatureSet{0});
  for (int i = 5; i < 10; ++i) half[i] = {1};
  EXPECT_DOUBLE_EQ(PrecLocal(rm, half, model, data).value, 0.25);

  RuleModel none;
  none.rules = {{0, {Term({{0, 50, 60}})}}, {1, {}}};
  const auto v = PrecLocal(none, both, model, data);
  EXPECT_TRUE(v.vacuous);
  EXPECT_EQ(v.value, 0.0);
}

TEST(PrecLocalTest, WinningTermVersusAllSatisfiedTerms) {
  RuleModel rm;
  rm.rules = {{0, {Term({{0, 0, 9}}, 1.0, 9), Term({{0, 0, 9}, {1, -1, 1}}, 0.5, 1)}},
              {1, {Term({{0, 100, 101}})}}};
  const auto model = StepModel();
  const auto data = TenSamples();
  std::vector<FeatureSet> imp(10, FeatureSet{1});
  // Winning term uses {0}: overlap 0. Mean over both satisfied terms: (0 + 0.5) / 2.
  EXPECT_DOUBLE_EQ(PrecLocal(rm, imp, model, data, PrecLocalMode::kWinningTerm).value, 0.0);
  EXPECT_DOUBLE_EQ(PrecLocal(rm, imp, model, data, PrecLocalMode::kAllSatisfiedTerms).value, 0.25);
}

TEST(PrecLocalTest, MissingExplanationForAgreeingSampleIsAnError) {
  RuleModel rm;
  rm.rules = {{0, {Term({{0, 0, 4}})}}, {1, {}}};
  std::vector<std::optional<FeatureSet>> ex(10);
  ex[0] = ex[1] = ex[2] = ex[3] = FeatureSet{0};
  EXPECT_THROW(PrecLocal(rm, ex, StepModel(), TenSamples()), Error);
  ex[4] = FeatureSet{0};
  EXPECT_DOUBLE_EQ(PrecLocal(rm, ex, StepModel(), TenSamples()).value, 1.0);
  EXPECT_THROW(PrecLocal(rm, std::vector<FeatureSet>(3), StepModel(), TenSamples()), Error);
}

TEST(EnsembleTest, MeanAndPopulationStd) {
  EvalReport a, b;
  a.precision = 0.8;
  b.precision = 1.0;
  a.size = 4;
  b.size = 6;
  a.complete = true;
  const auto e = AggregateReports({a, b});
  EXPECT_DOUBLE_EQ(e.precision.mean, 0.9);
  EXPECT_NEAR(e.precision.std, 0.1, 1e-15);
  EXPECT_DOUBLE_EQ(e.size.mean, 5.0);
  EXPECT_DOUBLE_EQ(e.completeness_rate, 0.5);
  EXPECT_EQ(e.n_models, 2u);
  EXPECT_THROW(AggregateReports({}), Error);
}

TEST(EnsembleTest, EvaluateEnsemblePairsModels) {
  const auto model = StepModel();
  const auto data = TenSamples();
  std::vector<RuleModel> rms = {EightCoveredSixAgree(), EightCoveredSixAgree()};
  std::vector<EvalReport> per;
  const auto e = EvaluateEnsemble(rms, {&model, &model}, data, {}, &per);
  ASSERT_EQ(per.size(), 2u);
  EXPECT_DOUBLE_EQ(e.precision.mean, 0.75);
  EXPECT_EQ(e.precision.std, 0.0);
  EXPECT_THROW(EvaluateEnsemble(rms, {&model}, data), Error);
}

TEST(ReportOutputTest, JsonAndCsv) {
  const auto r = Evaluate(EightCoveredSixAgree(), StepModel(), TenSamples());
  const auto j = ToJson(r);
  EXPECT_EQ(j["n_covered"], 8);
  EXPECT_EQ(j["per_class_term_counts"]["1"], 2);
  std::ostringstream csv;
  WriteReportCsv({r}, {"m0"}, csv);
  EXPECT_EQ(csv.str(),
            "model,precision,coverage,f1,size,complete,prec_local\n"
            "m0,0.750000,0.800000,0.774194,5,1,0.000000\n");
}

}  // namespace
}  // namespace cfire
