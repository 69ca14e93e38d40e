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

// Tabular numeric datasets: CSV loading, train/input/test splitting and
// per-class blocks of predicted labels.

#ifndef CFIRE_DATASET_HPP_
#define CFIRE_DATASET_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "cfire/common.hpp"

namespace cfire {

// Row-major real matrix with named columns and optional integer labels.
// Immutable once constructed.
class Dataset {
 public:
  Dataset() = default;

  Dataset(std::vector<double> values, std::size_t d,
          std::vector<std::string> feature_names,
          std::optional<std::vector<ClassId>> labels = std::nullopt)
      : values_(std::move(values)),
        d_(d),
        feature_names_(std::move(feature_names)),
        labels_(std::move(labels)) {
    Validate();
  }

  // Builds a dataset from row vectors; feature names default to x0..x{d-1}.
  static Dataset FromRows(const std::vector<std::vector<double>>& rows,
                          std::optional<std::vector<ClassId>> labels = std::nullopt,
                          std::vector<std::string> names = {}) {
    if (rows.empty()) Fail(ErrorKind::kData, "dataset has no rows");
    const std::size_t d = rows.front().size();
    std::vector<double> values;
    values.reserve(rows.size() * d);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != d) {
        Fail(ErrorKind::kData, "row " + std::to_string(i) + " has " +
                                   std::to_string(rows[i].size()) +
                                   " values, expected " + std::to_string(d));
      }
      values.insert(values.end(), rows[i].begin(), rows[i].end());
    }
    if (names.empty()) names = DefaultNames(d);
    return Dataset(std::move(values), d, std::move(names), std::move(labels));
  }

  static std::vector<std::string> DefaultNames(std::size_t d) {
    std::vector<std::string> names;
    names.reserve(d);
    for (std::size_t i = 0; i < d; ++i) names.push_back("x" + std::to_string(i));
    return names;
  }

  std::size_t size() const { return d_ == 0 ? 0 : values_.size() / d_; }
  std::size_t dim() const { return d_; }
  bool empty() const { return size() == 0; }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * d_, d_};
  }
  double at(std::size_t i, std::size_t j) const { return values_[i * d_ + j]; }

  const std::vector<double>& values() const { return values_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  bool has_labels() const { return labels_.has_value(); }
  const std::vector<ClassId>& labels() const {
    if (!labels_) Fail(ErrorKind::kData, "dataset has no labels");
    return *labels_;
  }

  Dataset Subset(std::span<const std::size_t> indices) const {
    std::vector<double> values;
    values.reserve(indices.size() * d_);
    std::optional<std::vector<ClassId>> labels;
    if (labels_) labels.emplace().reserve(indices.size());
    for (std::size_t idx : indices) {
      if (idx >= size()) Fail(ErrorKind::kData, "subset index out of range");
      auto r = row(idx);
      values.insert(values.end(), r.begin(), r.end());
      if (labels_) labels->push_back((*labels_)[idx]);
    }
    return Dataset(std::move(values), d_, feature_names_, std::move(labels));
  }

  Dataset WithLabels(std::vector<ClassId> labels) const {
    return Dataset(values_, d_, feature_names_, std::move(labels));
  }

  // Per-feature mean and population standard deviation.
  std::vector<double> Mean() const {
    std::vector<double> mean(d_, 0.0);
    for (std::size_t i = 0; i < size(); ++i)
      for (std::size_t j = 0; j < d_; ++j) mean[j] += at(i, j);
    for (double& m : mean) m /= static_cast<double>(std::max<std::size_t>(1, size()));
    return mean;
  }

  std::vector<double> StdDev() const {
    const auto mean = Mean();
    std::vector<double> var(d_, 0.0);
    for (std::size_t i = 0; i < size(); ++i)
      for (std::size_t j = 0; j < d_; ++j) {
        const double diff = at(i, j) - mean[j];
        var[j] += diff * diff;
      }
    for (double& v : var)
      v = std::sqrt(v / static_cast<double>(std::max<std::size_t>(1, size())));
    return var;
  }

  // FNV-1a over shape, names and the bit patterns of all values.
  std::uint64_t Fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](const void* data, std::size_t len) {
      const auto* p = static_cast<const unsigned char*>(data);
      for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
      }
    };
    const std::uint64_t shape[2] = {size(), d_};
    feed(shape, sizeof(shape));
    for (const auto& name : feature_names_) feed(name.data(), name.size() + 1);
    feed(values_.data(), values_.size() * sizeof(double));
    return h;
  }

 private:
  void Validate() const {
    if (d_ == 0) Fail(ErrorKind::kData, "dataset dimensionality must be positive");
    if (values_.size() % d_ != 0)
      Fail(ErrorKind::kData, "value count is not a multiple of d");
    if (feature_names_.size() != d_)
      Fail(ErrorKind::kData, "feature_names has " +
                                 std::to_string(feature_names_.size()) +
                                 " entries, expected " + std::to_string(d_));
    std::set<std::string> seen;
    for (const auto& name : feature_names_)
      if (!seen.insert(name).second)
        Fail(ErrorKind::kData, "duplicate feature name '" + name + "'");
    for (std::size_t k = 0; k < values_.size(); ++k)
      if (!std::isfinite(values_[k]))
        Fail(ErrorKind::kData, "non-finite value at row " + std::to_string(k / d_) +
                                   ", column " + std::to_string(k % d_));
    if (labels_ && labels_->size() != size())
      Fail(ErrorKind::kData, "label count does not match sample count");
  }

  std::vector<double> values_;
  std::size_t d_ = 0;
  std::vector<std::string> feature_names_;
  std::optional<std::vector<ClassId>> labels_;
};

struct SplitSpec {
  double train_fraction = 0.8;
  double input_fraction = 0.1;
  double test_fraction = 0.1;
  std::uint64_t seed = 0;
};

struct SplitResult {
  Dataset train;
  Dataset input;
  Dataset test;
  // Row indices of the source dataset that went into each part.
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> input_indices;
  std::vector<std::size_t> test_indices;
};

struct ClassBlock {
  ClassId class_id = 0;
  std::vector<std::size_t> indices;
};

namespace detail {

inline std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

inline std::string Trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

inline bool ParseReal(const std::string& text, double& out) {
  if (text.empty()) return false;
  const char* begin = text.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  return end == begin + text.size() && std::isfinite(out);
}

}  // namespace detail

// Reads a comma-separated file with a header row. `label_column`, when given,
// must name a column of integer class ids; every other column is a feature.
inline Dataset LoadCsv(const std::string& path,
                       const std::optional<std::string>& label_column = std::nullopt) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kData, "cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) Fail(ErrorKind::kData, "'" + path + "' is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.size() >= 3 && std::memcmp(line.data(), "\xEF\xBB\xBF", 3) == 0)
    line.erase(0, 3);

  std::vector<std::string> header = detail::SplitCsvLine(line);
  for (auto& h : header) h = detail::Trim(h);
  {
    std::set<std::string> seen;
    for (const auto& h : header)
      if (!seen.insert(h).second)
        Fail(ErrorKind::kData, "'" + path + "': duplicate header name '" + h + "'");
  }
  std::optional<std::size_t> label_idx;
  if (label_column) {
    auto it = std::find(header.begin(), header.end(), *label_column);
    if (it == header.end())
      Fail(ErrorKind::kData, "'" + path + "': no column named '" + *label_column + "'");
    label_idx = static_cast<std::size_t>(it - header.begin());
  }
  std::vector<std::string> names;
  for (std::size_t j = 0; j < header.size(); ++j)
    if (!label_idx || j != *label_idx) names.push_back(header[j]);
  if (names.empty()) Fail(ErrorKind::kData, "'" + path + "': no feature columns");

  std::vector<double> values;
  std::vector<ClassId> labels;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::Trim(line).empty()) continue;
    ++row;
    const auto cells = detail::SplitCsvLine(line);
    if (cells.size() != header.size())
      Fail(ErrorKind::kData, "'" + path + "': row " + std::to_string(row) + " has " +
                                 std::to_string(cells.size()) + " cells, expected " +
                                 std::to_string(header.size()));
    for (std::size_t j = 0; j < cells.size(); ++j) {
      double v = 0.0;
      const std::string cell = detail::Trim(cells[j]);
      if (!detail::ParseReal(cell, v))
        Fail(ErrorKind::kData, "'" + path + "': row " + std::to_string(row) +
                                   ", column '" + header[j] + "': cannot parse '" +
                                   cell + "' as a finite real");
      if (label_idx && j == *label_idx) {
        if (v != std::floor(v) || v < 0)
          Fail(ErrorKind::kData, "'" + path + "': row " + std::to_string(row) +
                                     ", column '" + header[j] +
                                     "': class id must be a non-negative integer");
        labels.push_back(static_cast<ClassId>(v));
      } else {
        values.push_back(v);
      }
    }
  }
  if (row == 0) Fail(ErrorKind::kData, "'" + path + "' has a header but no data rows");
  std::optional<std::vector<ClassId>> maybe_labels;
  if (label_idx) maybe_labels = std::move(labels);
  const std::size_t d = names.size();
  return Dataset(std::move(values), d, std::move(names), std::move(maybe_labels));
}

// Writes the dataset in the format LoadCsv reads. Labels, when present, go in
// a trailing column named `label_column`.
inline void WriteCsv(const Dataset& ds, std::ostream& out,
                     const std::string& label_column = "label") {
  const auto& names = ds.feature_names();
  for (std::size_t j = 0; j < names.size(); ++j) out << (j ? "," : "") << names[j];
  if (ds.has_labels()) out << "," << label_column;
  out << "\n";
  char buf[32];
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t j = 0; j < ds.dim(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", ds.at(i, j));
      out << (j ? "," : "") << buf;
    }
    if (ds.has_labels()) out << "," << ds.labels()[i];
    out << "\n";
  }
}

// Shuffles row indices uniformly and cuts them into train/input/test parts.
// Input and test sizes are floored; the remainder goes to train.
inline SplitResult Split(const Dataset& ds, const SplitSpec& spec) {
  const double fractions[3] = {spec.train_fraction, spec.input_fraction,
                               spec.test_fraction};
  for (double f : fractions)
    if (!(f > 0.0 && f < 1.0))
      Fail(ErrorKind::kConfig, "split fractions must lie in (0,1)");
  if (std::abs(fractions[0] + fractions[1] + fractions[2] - 1.0) > 1e-9)
    Fail(ErrorKind::kConfig, "split fractions must sum to 1");
  const std::size_t n = ds.size();
  if (n < 3) Fail(ErrorKind::kData, "split needs at least 3 samples");

  const auto n_input = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * spec.input_fraction + 1e-9));
  const auto n_test = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * spec.test_fraction + 1e-9));
  if (n_input == 0 || n_test == 0 || n_input + n_test >= n)
    Fail(ErrorKind::kData, "a split part is empty after rounding (n=" +
                               std::to_string(n) + ")");

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(DeriveSeed(spec.seed, seed_tag::kSplit, 0));
  std::shuffle(perm.begin(), perm.end(), rng);

  SplitResult out;
  out.input_indices.assign(perm.begin(), perm.begin() + n_input);
  out.test_indices.assign(perm.begin() + n_input, perm.begin() + n_input + n_test);
  out.train_indices.assign(perm.begin() + n_input + n_test, perm.end());
  out.train = ds.Subset(out.train_indices);
  out.input = ds.Subset(out.input_indices);
  out.test = ds.Subset(out.test_indices);
  return out;
}

// Indices i (ascending) with predictions[i] == c. Empty blocks are legal.
inline ClassBlock MakeClassBlock(const Dataset& ds, std::span<const ClassId> predictions,
                                 ClassId c) {
  if (predictions.size() != ds.size())
    Fail(ErrorKind::kData, "prediction count does not match sample count");
  ClassBlock block{c, {}};
  for (std::size_t i = 0; i < predictions.size(); ++i)
    if (predictions[i] == c) block.indices.push_back(i);
  return block;
}

}  // namespace cfire

#endif  // CFIRE_DATASET_HPP_
