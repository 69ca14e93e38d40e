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

#include "cfire/attribution.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "cfire/blackbox.hpp"
#include "oracles.hpp"

namespace cfire {
namespace {

double Sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

ExplainerParams ZeroBaseline(std::size_t d) {
  ExplainerParams p;
  p.baseline.assign(d, 0.0);
  return p;
}

Mlp SmallMlp(std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<std::vector<double>> rows;
  std::vector<ClassId> labels;
  for (int i = 0; i < 200; ++i) {
    std::vector<double> r(d);
    for (auto& v : r) v = g(rng);
    labels.push_back(r[0] * r[1] + 0.5 * r[2] > 0 ? 1 : 0);
    rows.push_back(std::move(r));
  }
  MlpConfig cfg;
  cfg.hidden_width = 16;
  cfg.epochs = 40;
  cfg.seed = seed;
  return TrainMlp(Dataset::FromRows(rows, labels), cfg);
}

TEST(ExplainerNameTest, ParseIsCaseInsensitive) {
  EXPECT_EQ(ParseExplainer("ks"), ExplainerKind::kKernelShap);
  EXPECT_EQ(ParseExplainer("Li"), ExplainerKind::kLime);
  EXPECT_EQ(ParseExplainer("IG"), ExplainerKind::kIntegratedGradients);
  EXPECT_THROW(ParseExplainer("shap"), Error);
  EXPECT_EQ(ExplainerName(ExplainerKind::kLime), "LI");
}

TEST(IntegratedGradientsTest, ExactForLinearModels) {
  const LinearModel m({{2, -3, 0.5}, {0, 0, 0}}, {0, 0});
  const std::vector<double> x = {1, -1, 4};
  auto p = ZeroBaseline(3);
  p.baseline = {0.5, 0.5, 0.5};
  const auto a = IntegratedGradients(m, x, p);
  EXPECT_EQ(a.target_class, 0);
  EXPECT_EQ(a.explainer_id, "IG");
  const std::vector<double> want = {2 * 0.5, -3 * -1.5, 0.5 * 3.5};
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(a.weights[i], want[i], 1e-12);
}

TEST(IntegratedGradientsTest, ZeroPathGivesZero) {
  const LinearModel m({{2, -3}, {1, 1}}, {0, 0});
  const std::vector<double> x = {0.3, 0.7};
  auto p = ZeroBaseline(2);
  p.baseline = x;
  for (double w : IntegratedGradients(m, x, p).weights) EXPECT_EQ(w, 0.0);
}

TEST(IntegratedGradientsTest, CompletenessOnAnMlp) {
  const Mlp m = SmallMlp(4, 3);
  auto p = ZeroBaseline(4);
  p.ig_steps = 200;
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int t = 0; t < 10; ++t) {
    const std::vector<double> x = {g(rng), g(rng), g(rng), g(rng)};
    const auto a = IntegratedGradients(m, x, p);
    const double gap = m.Logit(x, a.target_class) - m.Logit(p.baseline, a.target_class);
    EXPECT_NEAR(Sum(a.weights), gap, 1e-2);
  }
}

TEST(IntegratedGradientsTest, NeedsGradientsAndValidConfig) {
  const CallableModel m(2, 2, [](std::span<const double> x) { return std::vector<double>{x[0], x[1]}; });
  EXPECT_THROW(IntegratedGradients(m, std::vector<double>{1, 2}, ZeroBaseline(2)), Error);
  const LinearModel lin({{1, 1}}, {0});
  auto p = ZeroBaseline(2);
  p.ig_steps = 0;
  EXPECT_THROW(IntegratedGradients(lin, std::vector<double>{1, 2}, p), Error);
  EXPECT_THROW(IntegratedGradients(lin, std::vector<double>{1, 2}, ZeroBaseline(3)), Error);
}

TEST(KernelShapTest, ConstantModelGivesZero) {
  const CallableModel m(5, 2, [](std::span<const double>) { return std::vector<double>{1, 0}; });
  const auto a = KernelShap(m, std::vector<double>{1, 2, 3, 4, 5}, ZeroBaseline(5));
  for (double w : a.weights) EXPECT_NEAR(w, 0.0, 1e-12);
}

TEST(KernelShapTest, AdditiveModelRecoversTerms) {
  // f(x) = x0^2 + 2 sin(x1) + 0.5 x2 + 3 x3: phi_i = g_i(x_i) - g_i(b_i).
  const CallableModel m(4, 1, [](std::span<const double> x) {
    return std::vector<double>{x[0] * x[0] + 2 * std::sin(x[1]) + 0.5 * x[2] + 3 * x[3]};
  });
  const std::vector<double> x = {1.5, 1.0, -2.0, 0.3};
  const auto a = KernelShap(m, x, ZeroBaseline(4));
  const std::vector<double> want = {2.25, 2 * std::sin(1.0), -1.0, 0.9};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(a.weights[i], want[i], 0.05);
}

TEST(KernelShapTest, EfficiencyHoldsExactly) {
  const Mlp m = SmallMlp(8, 4);
  auto p = ZeroBaseline(8);
  p.ks_budget = 60;  // below 2^8 - 2, so coalitions are sampled
  const std::vector<double> x = {1, -1, 0.5, 2, -0.3, 0.1, 0.7, -2};
  const auto a = KernelShap(m, x, p);
  const double gap = m.Logit(x, a.target_class) - m.Logit(p.baseline, a.target_class);
  EXPECT_NEAR(Sum(a.weights), gap, 1e-9 * std::max(1.0, std::abs(gap)));
}

TEST(KernelShapTest, MatchesExactShapleyOnSixFeatures) {
  const Mlp m = SmallMlp(6, 5);
  ExplainerParams p = ZeroBaseline(6);
  p.baseline = {0.1, -0.2, 0.3, 0.0, 0.2, -0.1};
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int t = 0; t < 5; ++t) {
    std::vector<double> x(6);
    for (auto& v : x) v = g(rng);
    const auto a = KernelShap(m, x, p);
    const auto exact = oracle::ExactShapley(
        [&](const std::vector<double>& z) { return m.Logit(z, a.target_class); }, x, p.baseline);
    for (int i = 0; i < 6; ++i) EXPECT_NEAR(a.weights[i], exact[i], 0.1) << "t=" << t << " i=" << i;
  }
}

TEST(KernelShapTest, SampledEstimateIsCloseToExact) {
  const Mlp m = SmallMlp(10, 6);
  ExplainerParams p = ZeroBaseline(10);
  p.ks_budget = 600;
  const std::vector<double> x = {1, -1, 0.5, 2, -0.3, 0.1, 0.7, -2, 0.4, 1.2};
  const auto a = KernelShap(m, x, p);
  const auto exact = oracle::ExactShapley(
      [&](const std::vector<double>& z) { return m.Logit(z, a.target_class); }, x, p.baseline);
  double scale = 0.0;
  for (double e : exact) scale = std::max(scale, std::abs(e));
  for (int i = 0; i < 10; ++i) EXPECT_NEAR(a.weights[i], exact[i], 0.15 * scale + 0.05);
}

TEST(KernelShapTest, DeterministicPerSeedAndSample) {
  const Mlp m = SmallMlp(9, 7);
  ExplainerParams p = ZeroBaseline(9);
  p.ks_budget = 100;
  p.seed = 3;
  const std::vector<double> x = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  EXPECT_EQ(KernelShap(m, x, p, 4).weights, KernelShap(m, x, p, 4).weights);
  EXPECT_NE(KernelShap(m, x, p, 4).weights, KernelShap(m, x, p, 5).weights);
}

TEST(KernelShapTest, SingleFeatureGetsTheWholeGap) {
  const LinearModel m({{3}}, {1});
  const auto a = KernelShap(m, std::vector<double>{2}, ZeroBaseline(1));
  ASSERT_EQ(a.weights.size(), 1u);
  EXPECT_DOUBLE_EQ(a.weights[0], 6.0);
}

TEST(LimeTest, RecoversLinearCoefficients) {
  const LinearModel m({{2, -1, 0.5, 0}, {0, 0, 0, 0}}, {5, 0});
  ExplainerParams p;
  p.lime_scale = {1, 2, 0.5, 1};
  p.lime_budget = 500;
  const std::vector<double> x = {1, 1, 1, 1};
  const auto a = LimeLocal(m, x, p);
  EXPECT_EQ(a.explainer_id, "LI");
  const std::vector<double> want = {2, -1, 0.5, 0};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(a.weights[i], want[i], 0.05 * std::max(0.1, std::abs(want[i])));
}

TEST(LimeTest, ConstantModelGivesNearZero) {
  const CallableModel m(3, 1, [](std::span<const double>) { return std::vector<double>{4.0}; });
  for (double w : LimeLocal(m, std::vector<double>{1, 2, 3}, {}).weights) EXPECT_LE(std::abs(w), 1e-3);
}

TEST(LimeTest, DeterministicPerSeed) {
  const Mlp m = SmallMlp(4, 8);
  ExplainerParams p;
  p.seed = 11;
  const std::vector<double> x = {0.1, 0.2, 0.3, 0.4};
  EXPECT_EQ(LimeLocal(m, x, p, 2).weights, LimeLocal(m, x, p, 2).weights);
  p.seed = 12;
  const auto other = LimeLocal(m, x, p, 2).weights;
  p.seed = 11;
  EXPECT_NE(LimeLocal(m, x, p, 2).weights, other);
}

TEST(ImportantFeaturesTest, ThresholdOnNormalizedMagnitude) {
  EXPECT_EQ(ImportantFeatures(std::vector<double>{0.5, -0.3, 0.195, 0.005}, 0.01), (FeatureSet{0, 1, 2}));
  EXPECT_EQ(ImportantFeatures(std::vector<double>{1, 0, 0}, 0.01), (FeatureSet{0}));
  EXPECT_TRUE(ImportantFeatures(std::vector<double>{0, 0, 0}, 0.01).empty());
  // Exactly at the threshold is not important.
  EXPECT_EQ(ImportantFeatures(std::vector<double>{0.75, 0.25}, 0.25), (FeatureSet{0}));
  EXPECT_THROW(ImportantFeatures(std::vector<double>{1}, 0.0), Error);
  EXPECT_THROW(ImportantFeatures(std::vector<double>{1}, 1.0), Error);
}

TEST(ImportantFeaturesTest, InvariantToPositiveRescaling) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> w(7), s(7);
    for (auto& v : w) v = g(rng);
    const double c = std::exp(g(rng) * 3);
    for (int i = 0; i < 7; ++i) s[i] = w[i] * c;
    EXPECT_EQ(ImportantFeatures(w, 0.1), ImportantFeatures(s, 0.1));
  }
}

TEST(ExplainRowsTest, UsesRowIndexAsSampleIndex) {
  const Mlp m = SmallMlp(4, 9);
  std::vector<std::vector<double>> rows = {{0, 1, 2, 3}, {1, 1, 1, 1}, {-1, 0, 1, 0}};
  const auto ds = Dataset::FromRows(rows);
  auto p = ExplainerParams::FromTrainingData(ds, 5);
  const auto ex = MakeExplainer(ExplainerKind::kLime, p);
  const std::vector<std::size_t> pick = {2, 0};
  const auto out = ExplainRows(m, ex, ds, pick);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].sample_index, 2u);
  EXPECT_EQ(out[0].weights, LimeLocal(m, ds.row(2), p, 2).weights);

  std::ostringstream csv;
  WriteAttributionCsv(out, ds.feature_names(), csv);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "sample,x0,x1,x2,x3");
}

TEST(ExplainRowsTest, FailuresNameTheSample) {
  const CallableModel m(2, 2, [](std::span<const double> x) { return std::vector<double>{x[0], x[1]}; });
  const auto ds = Dataset::FromRows({{1, 2}, {3, 4}});
  const auto ex = MakeExplainer(ExplainerKind::kIntegratedGradients, ZeroBaseline(2));
  const std::vector<std::size_t> rows = {1};
  try {
    ExplainRows(m, ex, ds, rows);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kExplainer);
    EXPECT_NE(std::string(e.what()).find("sample 1"), std::string::npos) << e.what();
  }
}

}  // namespace
}  // namespace cfire
