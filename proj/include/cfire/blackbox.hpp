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

// Black-box classifiers. The rule extractor only ever sees the BlackBox
// interface; the one-hidden-layer MLP below exists so that the gradient-based
// explainer has something differentiable to work on.

#ifndef CFIRE_BLACKBOX_HPP_
#define CFIRE_BLACKBOX_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cfire/common.hpp"
#include "cfire/dataset.hpp"

namespace cfire {

class BlackBox {
 public:
  virtual ~BlackBox() = default;

  virtual std::size_t num_features() const = 0;
  virtual int num_classes() const = 0;
  virtual std::vector<double> Logits(std::span<const double> x) const = 0;

  // argmax of the logits; the lowest class id wins ties.
  virtual ClassId Predict(std::span<const double> x) const {
    const auto logits = Logits(x);
    return static_cast<ClassId>(std::max_element(logits.begin(), logits.end()) -
                                logits.begin());
  }

  virtual bool HasGradient() const { return false; }

  // d logit_c / d x.
  virtual std::vector<double> Gradient(std::span<const double> /*x*/,
                                       ClassId /*c*/) const {
    Fail(ErrorKind::kModel, "model has no gradient capability");
  }

  double Logit(std::span<const double> x, ClassId c) const { return Logits(x)[c]; }

  std::vector<ClassId> PredictAll(const Dataset& ds) const {
    std::vector<ClassId> out(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) out[i] = Predict(ds.row(i));
    return out;
  }
};

inline double Accuracy(const BlackBox& model, const Dataset& ds) {
  const auto& labels = ds.labels();
  if (ds.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < ds.size(); ++i)
    hits += model.Predict(ds.row(i)) == labels[i];
  return static_cast<double>(hits) / static_cast<double>(ds.size());
}

// logits = W x + b.
class LinearModel final : public BlackBox {
 public:
  LinearModel(std::vector<std::vector<double>> weights, std::vector<double> bias)
      : weights_(std::move(weights)), bias_(std::move(bias)) {
    if (weights_.empty() || weights_.size() != bias_.size())
      Fail(ErrorKind::kModel, "linear model needs one bias per class");
    for (const auto& w : weights_)
      if (w.size() != weights_.front().size())
        Fail(ErrorKind::kModel, "ragged linear weights");
  }

  std::size_t num_features() const override { return weights_.front().size(); }
  int num_classes() const override { return static_cast<int>(weights_.size()); }

  std::vector<double> Logits(std::span<const double> x) const override {
    std::vector<double> out(bias_);
    for (std::size_t c = 0; c < weights_.size(); ++c)
      for (std::size_t j = 0; j < x.size(); ++j) out[c] += weights_[c][j] * x[j];
    return out;
  }

  bool HasGradient() const override { return true; }
  std::vector<double> Gradient(std::span<const double>, ClassId c) const override {
    return weights_.at(c);
  }

 private:
  std::vector<std::vector<double>> weights_;
  std::vector<double> bias_;
};

// Wraps an arbitrary logit function. Mostly useful in tests and for plugging
// in models trained elsewhere.
class CallableModel final : public BlackBox {
 public:
  using LogitFn = std::function<std::vector<double>(std::span<const double>)>;

  CallableModel(std::size_t d, int k, LogitFn fn)
      : d_(d), k_(k), fn_(std::move(fn)) {}

  std::size_t num_features() const override { return d_; }
  int num_classes() const override { return k_; }
  std::vector<double> Logits(std::span<const double> x) const override { return fn_(x); }

 private:
  std::size_t d_;
  int k_;
  LogitFn fn_;
};

struct MlpConfig {
  int hidden_width = 32;
  int epochs = 300;
  double learning_rate = 0.02;
  int batch_size = 32;
  double momentum = 0.9;
  std::uint64_t seed = 0;
};

// One tanh hidden layer followed by a linear output layer. Inputs are
// standardized with statistics fitted on the training data.
class Mlp final : public BlackBox {
 public:
  std::size_t num_features() const override { return d_; }
  int num_classes() const override { return k_; }
  int hidden_width() const { return h_; }

  std::vector<double> Logits(std::span<const double> x) const override {
    std::vector<double> hidden(h_);
    return Forward(x, hidden);
  }

  bool HasGradient() const override { return true; }

  std::vector<double> Gradient(std::span<const double> x, ClassId c) const override {
    if (c < 0 || c >= k_) Fail(ErrorKind::kModel, "class id out of range");
    std::vector<double> hidden(h_);
    Forward(x, hidden);
    std::vector<double> grad(d_, 0.0);
    for (int u = 0; u < h_; ++u) {
      const double back = w2_[c * h_ + u] * (1.0 - hidden[u] * hidden[u]);
      const double* w1_row = &w1_[u * d_];
      for (std::size_t j = 0; j < d_; ++j) grad[j] += back * w1_row[j];
    }
    for (std::size_t j = 0; j < d_; ++j) {
      grad[j] /= scale_[j];
      if (!std::isfinite(grad[j])) Fail(ErrorKind::kModel, "non-finite gradient");
    }
    return grad;
  }

  // All trainable parameters, flattened in a fixed order.
  std::vector<double> Parameters() const {
    std::vector<double> p;
    p.insert(p.end(), w1_.begin(), w1_.end());
    p.insert(p.end(), b1_.begin(), b1_.end());
    p.insert(p.end(), w2_.begin(), w2_.end());
    p.insert(p.end(), b2_.begin(), b2_.end());
    return p;
  }

  // Copy whose output layer is multiplied by s.
  Mlp WithScaledOutput(double s) const {
    Mlp out(*this);
    for (double& w : out.w2_) w *= s;
    for (double& b : out.b2_) b *= s;
    return out;
  }

  const std::vector<double>& input_mean() const { return mean_; }
  const std::vector<double>& input_scale() const { return scale_; }

  friend Mlp TrainMlp(const Dataset& train, const MlpConfig& cfg);

 private:
  std::vector<double> Forward(std::span<const double> x, std::vector<double>& hidden) const {
    if (x.size() != d_) Fail(ErrorKind::kModel, "input has wrong dimensionality");
    std::vector<double> z(d_);
    for (std::size_t j = 0; j < d_; ++j) z[j] = (x[j] - mean_[j]) / scale_[j];
    for (int u = 0; u < h_; ++u) {
      double a = b1_[u];
      const double* w1_row = &w1_[u * d_];
      for (std::size_t j = 0; j < d_; ++j) a += w1_row[j] * z[j];
      hidden[u] = std::tanh(a);
    }
    std::vector<double> out(b2_);
    for (int c = 0; c < k_; ++c) {
      const double* w2_row = &w2_[c * h_];
      for (int u = 0; u < h_; ++u) out[c] += w2_row[u] * hidden[u];
    }
    return out;
  }

  std::size_t d_ = 0;
  int h_ = 0;
  int k_ = 0;
  std::vector<double> mean_, scale_;
  std::vector<double> w1_, b1_;  // h x d, h
  std::vector<double> w2_, b2_;  // k x h, k
};

// Mini-batch gradient descent with momentum on softmax cross-entropy.
// Deterministic given cfg.seed.
inline Mlp TrainMlp(const Dataset& train, const MlpConfig& cfg) {
  if (cfg.hidden_width <= 0 || cfg.epochs <= 0 || !(cfg.learning_rate > 0) ||
      !std::isfinite(cfg.learning_rate) ||
      cfg.batch_size <= 0)
    Fail(ErrorKind::kConfig, "MLP hyperparameters must be positive");
  const auto& labels = train.labels();
  if (train.empty()) Fail(ErrorKind::kData, "empty training set");
  const int k = *std::max_element(labels.begin(), labels.end()) + 1;
  {
    std::vector<char> present(k, 0);
    for (ClassId y : labels) present[y] = 1;
    if (std::count(present.begin(), present.end(), 1) < 2)
      Fail(ErrorKind::kData, "training data contains a single class");
  }

  Mlp m;
  m.d_ = train.dim();
  m.h_ = cfg.hidden_width;
  m.k_ = k;
  const std::size_t d = m.d_;
  const int h = m.h_;
  m.mean_ = train.Mean();
  m.scale_ = train.StdDev();
  for (double& s : m.scale_)
    if (!(s > 1e-12)) s = 1.0;

  std::mt19937_64 rng(cfg.seed);
  auto he_uniform = [&rng](std::vector<double>& w, std::size_t fan_in) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (double& v : w) v = dist(rng);
  };
  m.w1_.resize(h * d);
  m.b1_.assign(h, 0.0);
  m.w2_.resize(k * h);
  m.b2_.assign(k, 0.0);
  he_uniform(m.w1_, d);
  he_uniform(m.w2_, h);

  const std::size_t n = train.size();
  std::vector<double> z(n * d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) z[i * d + j] = (train.at(i, j) - m.mean_[j]) / m.scale_[j];

  std::vector<double> gw1(h * d), gb1(h), gw2(k * h), gb2(k);
  std::vector<double> vw1(h * d, 0.0), vb1(h, 0.0), vw2(k * h, 0.0), vb2(k, 0.0);
  std::vector<double> hidden(h), probs(k), delta_h(h);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const std::size_t batch = std::min<std::size_t>(cfg.batch_size, n);

  auto step = [&](std::vector<double>& w, std::vector<double>& v,
                  const std::vector<double>& g, double inv_b) {
    for (std::size_t i = 0; i < w.size(); ++i) {
      v[i] = cfg.momentum * v[i] - cfg.learning_rate * g[i] * inv_b;
      w[i] += v[i];
    }
  };

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t end = std::min(n, start + batch);
      std::fill(gw1.begin(), gw1.end(), 0.0);
      std::fill(gb1.begin(), gb1.end(), 0.0);
      std::fill(gw2.begin(), gw2.end(), 0.0);
      std::fill(gb2.begin(), gb2.end(), 0.0);
      for (std::size_t b = start; b < end; ++b) {
        const std::size_t i = order[b];
        const double* zi = &z[i * d];
        for (int u = 0; u < h; ++u) {
          double a = m.b1_[u];
          for (std::size_t j = 0; j < d; ++j) a += m.w1_[u * d + j] * zi[j];
          hidden[u] = std::tanh(a);
        }
        double max_logit = -INFINITY;
        for (int c = 0; c < k; ++c) {
          double o = m.b2_[c];
          for (int u = 0; u < h; ++u) o += m.w2_[c * h + u] * hidden[u];
          probs[c] = o;
          max_logit = std::max(max_logit, o);
        }
        double norm = 0.0;
        for (int c = 0; c < k; ++c) norm += (probs[c] = std::exp(probs[c] - max_logit));
        for (int c = 0; c < k; ++c) probs[c] /= norm;
        epoch_loss -= std::log(std::max(probs[labels[i]], 1e-300));

        std::fill(delta_h.begin(), delta_h.end(), 0.0);
        for (int c = 0; c < k; ++c) {
          const double err = probs[c] - (labels[i] == c ? 1.0 : 0.0);
          gb2[c] += err;
          for (int u = 0; u < h; ++u) {
            gw2[c * h + u] += err * hidden[u];
            delta_h[u] += err * m.w2_[c * h + u];
          }
        }
        for (int u = 0; u < h; ++u) {
          const double du = delta_h[u] * (1.0 - hidden[u] * hidden[u]);
          gb1[u] += du;
          for (std::size_t j = 0; j < d; ++j) gw1[u * d + j] += du * zi[j];
        }
      }
      const double inv_b = 1.0 / static_cast<double>(end - start);
      step(m.w1_, vw1, gw1, inv_b);
      step(m.b1_, vb1, gb1, inv_b);
      step(m.w2_, vw2, gw2, inv_b);
      step(m.b2_, vb2, gb2, inv_b);
    }
    bool finite = std::isfinite(epoch_loss);
    for (const auto* w : {&m.w1_, &m.b1_, &m.w2_, &m.b2_})
      for (double v : *w) finite = finite && std::isfinite(v);
    if (!finite)
      Fail(ErrorKind::kModel, "training diverged (non-finite loss or weights) at epoch " + std::to_string(epoch));
  }
  return m;
}

// Largest relative deviation between the analytic gradient and central
// differences (step 1e-5) over all input dimensions.
inline double GradientCheck(const BlackBox& model, std::span<const double> x, ClassId c) {
  if (!model.HasGradient()) Fail(ErrorKind::kModel, "model has no gradient capability");
  const auto analytic = model.Gradient(x, c);
  constexpr double kStep = 1e-5;
  std::vector<double> probe(x.begin(), x.end());
  double worst = 0.0;
  for (std::size_t j = 0; j < probe.size(); ++j) {
    if (!std::isfinite(analytic[j])) Fail(ErrorKind::kModel, "non-finite gradient");
    const double orig = probe[j];
    probe[j] = orig + kStep;
    const double up = model.Logit(probe, c);
    probe[j] = orig - kStep;
    const double down = model.Logit(probe, c);
    probe[j] = orig;
    const double fd = (up - down) / (2.0 * kStep);
    worst = std::max(worst, std::abs(analytic[j] - fd) / (std::abs(fd) + 1e-8));
  }
  return worst;
}

struct RashomonEnsemble {
  std::vector<std::shared_ptr<const Mlp>> models;
  std::vector<double> accuracies;
};

// n models with seeds cfg.seed + 0..n-1. Accuracies are measured on `eval`
// when given, otherwise on `train`.
inline RashomonEnsemble TrainEnsemble(const Dataset& train, const MlpConfig& cfg, int n,
                                      const Dataset* eval = nullptr) {
  if (n < 1) Fail(ErrorKind::kConfig, "ensemble size must be at least 1");
  RashomonEnsemble ens;
  ens.models.resize(n);
  ens.accuracies.resize(n);
  ParallelFor(static_cast<std::size_t>(n), [&](std::size_t i) {
    MlpConfig member = cfg;
    member.seed = cfg.seed + i;
    try {
      auto model = std::make_shared<const Mlp>(TrainMlp(train, member));
      ens.accuracies[i] = Accuracy(*model, eval ? *eval : train);
      ens.models[i] = std::move(model);
    } catch (const Error& e) {
      throw Error(e.kind(), "model " + std::to_string(i) + ": " + e.what());
    }
  });
  return ens;
}

// Answers predictions by exact lookup of previously recorded samples. Logits
// are available only when a logits table was supplied.
class PredictionOracle final : public BlackBox {
 public:
  PredictionOracle(const Dataset& samples, std::vector<ClassId> predictions,
                   std::optional<std::vector<std::vector<double>>> logits = std::nullopt)
      : d_(samples.dim()) {
    if (predictions.size() != samples.size())
      Fail(ErrorKind::kData, "prediction count " + std::to_string(predictions.size()) +
                                 " does not match sample count " +
                                 std::to_string(samples.size()));
    if (logits && logits->size() != samples.size())
      Fail(ErrorKind::kData, "logit row count does not match sample count");
    k_ = predictions.empty() ? 0
                             : *std::max_element(predictions.begin(), predictions.end()) + 1;
    if (logits && !logits->empty()) k_ = std::max<int>(k_, logits->front().size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      auto r = samples.row(i);
      Entry e{predictions[i], {}};
      if (logits) e.logits = (*logits)[i];
      table_[std::vector<double>(r.begin(), r.end())] = std::move(e);
    }
    has_logits_ = logits.has_value();
  }

  std::size_t num_features() const override { return d_; }
  int num_classes() const override { return k_; }

  ClassId Predict(std::span<const double> x) const override { return Find(x).prediction; }

  std::vector<double> Logits(std::span<const double> x) const override {
    const Entry& e = Find(x);
    if (!has_logits_) Fail(ErrorKind::kModel, "prediction oracle has no logits table");
    return e.logits;
  }

 private:
  struct Entry {
    ClassId prediction;
    std::vector<double> logits;
  };

  const Entry& Find(std::span<const double> x) const {
    auto it = table_.find(std::vector<double>(x.begin(), x.end()));
    if (it == table_.end()) Fail(ErrorKind::kModel, "unknown sample queried from prediction oracle");
    return it->second;
  }

  std::size_t d_;
  int k_ = 0;
  bool has_logits_ = false;
  std::map<std::vector<double>, Entry> table_;
};

// samples_path: dataset CSV; predictions_path: one-column CSV of class ids
// (header row required); logits_path: optional CSV with one column per class.
inline PredictionOracle LoadPredictionOracle(
    const std::string& samples_path, const std::string& predictions_path,
    const std::optional<std::string>& logits_path = std::nullopt) {
  const Dataset samples = LoadCsv(samples_path);
  const Dataset preds = LoadCsv(predictions_path);
  if (preds.dim() != 1)
    Fail(ErrorKind::kData, "'" + predictions_path + "' must have exactly one column");
  std::vector<ClassId> predictions(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double v = preds.at(i, 0);
    if (v != std::floor(v) || v < 0)
      Fail(ErrorKind::kData, "'" + predictions_path + "': row " + std::to_string(i + 1) +
                                 " is not a class id");
    predictions[i] = static_cast<ClassId>(v);
  }
  std::optional<std::vector<std::vector<double>>> logits;
  if (logits_path) {
    const Dataset table = LoadCsv(*logits_path);
    auto& rows = logits.emplace();
    for (std::size_t i = 0; i < table.size(); ++i) {
      auto r = table.row(i);
      rows.emplace_back(r.begin(), r.end());
    }
  }
  return PredictionOracle(samples, std::move(predictions), std::move(logits));
}

}  // namespace cfire

#endif  // CFIRE_BLACKBOX_HPP_
