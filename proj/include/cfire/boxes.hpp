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

// Axis-aligned boxes over feature subspaces, and the conversion of a closed
// feature set into candidate terms. A term starts as the smallest box around
// the supporting positives; if that box swallows out-of-class samples it is
// refined with a depth-limited Gini tree restricted to the set's features.

#ifndef CFIRE_BOXES_HPP_
#define CFIRE_BOXES_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "cfire/common.hpp"
#include "cfire/dataset.hpp"

namespace cfire {

struct Interval {
  int feature = 0;
  double lo = 0.0;
  double hi = 0.0;

  bool operator==(const Interval&) const = default;
};

// Conjunction of closed interval constraints, at most one per feature, kept
// sorted by feature index. All bounds are finite.
class Box {
 public:
  Box() = default;
  explicit Box(std::vector<Interval> constraints) : constraints_(std::move(constraints)) {
    std::sort(constraints_.begin(), constraints_.end(),
              [](const Interval& a, const Interval& b) { return a.feature < b.feature; });
    for (std::size_t k = 0; k < constraints_.size(); ++k) {
      const auto& c = constraints_[k];
      if (k > 0 && constraints_[k - 1].feature == c.feature)
        Fail(ErrorKind::kSchema, "box has two constraints on feature " + std::to_string(c.feature));
      if (!std::isfinite(c.lo) || !std::isfinite(c.hi))
        Fail(ErrorKind::kSchema, "box bound on feature " + std::to_string(c.feature) + " is not finite");
      if (c.lo > c.hi)
        Fail(ErrorKind::kSchema, "box interval on feature " + std::to_string(c.feature) + " is empty");
    }
  }

  const std::vector<Interval>& constraints() const { return constraints_; }
  std::size_t size() const { return constraints_.size(); }

  FeatureSet Features() const {
    FeatureSet f;
    f.reserve(constraints_.size());
    for (const auto& c : constraints_) f.push_back(c.feature);
    return f;
  }

  // Closed on both ends; unconstrained dimensions are ignored.
  bool Covers(std::span<const double> x) const {
    for (const auto& c : constraints_)
      if (!(c.lo <= x[c.feature] && x[c.feature] <= c.hi)) return false;
    return true;
  }

  bool operator==(const Box&) const = default;

 private:
  std::vector<Interval> constraints_;
};

inline bool TermCovers(const Box& box, std::span<const double> x) { return box.Covers(x); }

struct CandidateTerm {
  Box box;
  FeatureSet source_set;
  // Indices (into X) of same-class samples inside the box.
  std::vector<std::size_t> covered_positive_indices;
  // Fraction of X samples inside the box that the model assigns this class.
  double precision_on_input = 0.0;
};

struct BoxParams {
  int max_depth = 7;
  double purity_threshold = 0.95;
  int min_leaf_positives = 1;

  void Validate() const {
    if (max_depth < 0) Fail(ErrorKind::kConfig, "max_depth must be non-negative");
    if (!(purity_threshold > 0.5 && purity_threshold <= 1.0))
      Fail(ErrorKind::kConfig, "purity_threshold must lie in (0.5, 1]");
    if (min_leaf_positives < 1) Fail(ErrorKind::kConfig, "min_leaf_positives must be positive");
  }
};

// Per-feature [min, max] of the selected rows.
inline Box MinimalBox(const Dataset& data, std::span<const std::size_t> rows,
                      const FeatureSet& features) {
  if (rows.empty()) Fail(ErrorKind::kData, "minimal box of an empty sample set");
  if (features.empty()) Fail(ErrorKind::kData, "minimal box over an empty feature set");
  std::vector<Interval> out;
  out.reserve(features.size());
  for (int f : features) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t r : rows) {
      lo = std::min(lo, data.at(r, f));
      hi = std::max(hi, data.at(r, f));
    }
    out.push_back({f, lo, hi});
  }
  return Box(std::move(out));
}

namespace detail {

class TermTree {
 public:
  TermTree(const Dataset& data, const FeatureSet& features, const BoxParams& params)
      : data_(data), features_(features), params_(params) {}

  std::vector<Box> Grow(std::vector<std::size_t> pos, std::vector<std::size_t> neg) {
    std::vector<Region> region(features_.size());
    Node(pos, neg, region, 0);
    return std::move(boxes_);
  }

 private:
  struct Region {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
  };

  // Fraction of positives among the node's samples inside the positives'
  // bounding box; only those negatives would be misclassified by the term.
  double BoxPurity(const Box& box, const std::vector<std::size_t>& pos,
                   const std::vector<std::size_t>& neg) const {
    std::size_t inside = 0;
    for (std::size_t r : neg) inside += box.Covers(data_.row(r));
    return static_cast<double>(pos.size()) / static_cast<double>(pos.size() + inside);
  }

  void Node(const std::vector<std::size_t>& pos, const std::vector<std::size_t>& neg,
            std::vector<Region>& region, int depth) {
    if (pos.empty()) return;
    const Box box = Clip(MinimalBox(data_, pos, features_), region);
    if (BoxPurity(box, pos, neg) >= params_.purity_threshold) {
      if (static_cast<int>(pos.size()) >= params_.min_leaf_positives) boxes_.push_back(box);
      return;
    }
    if (depth >= params_.max_depth) return;

    const auto split = BestSplit(pos, neg);
    if (!split.valid) return;
    std::vector<std::size_t> lpos, rpos, lneg, rneg;
    const int f = features_[split.slot];
    for (std::size_t r : pos) (data_.at(r, f) <= split.threshold ? lpos : rpos).push_back(r);
    for (std::size_t r : neg) (data_.at(r, f) <= split.threshold ? lneg : rneg).push_back(r);

    const Region saved = region[split.slot];
    region[split.slot].hi = std::min(saved.hi, split.threshold);
    Node(lpos, lneg, region, depth + 1);
    region[split.slot] = saved;
    region[split.slot].lo = std::max(saved.lo, split.threshold);
    Node(rpos, rneg, region, depth + 1);
    region[split.slot] = saved;
  }

  Box Clip(const Box& box, const std::vector<Region>& region) const {
    std::vector<Interval> out = box.constraints();
    for (std::size_t k = 0; k < out.size(); ++k) {
      out[k].lo = std::max(out[k].lo, region[k].lo);
      out[k].hi = std::min(out[k].hi, region[k].hi);
    }
    return Box(std::move(out));
  }

  struct Split {
    bool valid = false;
    std::size_t slot = 0;
    double threshold = 0.0;
    double gain = 0.0;
  };

  static double Gini(double p, double n) {
    const double t = p + n;
    if (t == 0) return 0.0;
    const double a = p / t, b = n / t;
    return 1.0 - a * a - b * b;
  }

  // Midpoint thresholds between adjacent distinct values; the largest Gini
  // gain wins, ties go to the lower feature index and then lower threshold.
  Split BestSplit(const std::vector<std::size_t>& pos, const std::vector<std::size_t>& neg) {
    const double np = static_cast<double>(pos.size());
    const double nn = static_cast<double>(neg.size());
    const double total = np + nn;
    const double parent = Gini(np, nn);
    Split best;
    std::vector<std::pair<double, char>> vals;
    vals.reserve(pos.size() + neg.size());
    for (std::size_t slot = 0; slot < features_.size(); ++slot) {
      const int f = features_[slot];
      vals.clear();
      for (std::size_t r : pos) vals.emplace_back(data_.at(r, f), 1);
      for (std::size_t r : neg) vals.emplace_back(data_.at(r, f), 0);
      std::sort(vals.begin(), vals.end());
      double lp = 0, ln = 0;
      for (std::size_t k = 0; k + 1 < vals.size(); ++k) {
        (vals[k].second ? lp : ln) += 1;
        if (vals[k].first == vals[k + 1].first) continue;
        const double rp = np - lp, rn = nn - ln;
        const double child = ((lp + ln) * Gini(lp, ln) + (rp + rn) * Gini(rp, rn)) / total;
        const double gain = parent - child;
        if (gain > best.gain + 1e-12) {
          best.valid = true;
          best.slot = slot;
          best.threshold = vals[k].first + 0.5 * (vals[k + 1].first - vals[k].first);
          best.gain = gain;
        }
      }
    }
    return best;
  }

  const Dataset& data_;
  const FeatureSet& features_;
  const BoxParams& params_;
  std::vector<Box> boxes_;
};

}  // namespace detail

// Boxes for closed set `features`: `supporting` are the same-class rows whose
// important features contain the set, `negatives` the rows assigned other
// classes. Supporting rows in leaves below the purity threshold stay uncovered.
inline std::vector<Box> LearnBoxes(const FeatureSet& features, const Dataset& data,
                                   std::span<const std::size_t> supporting,
                                   std::span<const std::size_t> negatives,
                                   const BoxParams& params) {
  params.Validate();
  if (supporting.empty()) Fail(ErrorKind::kData, "closed set has no supporting samples");
  if (features.empty()) Fail(ErrorKind::kData, "cannot learn boxes for the empty feature set");
  const Box bounding = MinimalBox(data, supporting, features);
  bool consistent = true;
  for (std::size_t r : negatives)
    if (bounding.Covers(data.row(r))) {
      consistent = false;
      break;
    }
  if (consistent) return {bounding};
  return detail::TermTree(data, features, params)
      .Grow({supporting.begin(), supporting.end()}, {negatives.begin(), negatives.end()});
}

// Candidate terms for a closed set, annotated with the same-class rows they
// cover (`positives` = all rows of the class) and their precision on X.
inline std::vector<CandidateTerm> LearnTerms(const FeatureSet& features, const Dataset& data,
                                             std::span<const std::size_t> supporting,
                                             std::span<const std::size_t> positives,
                                             std::span<const std::size_t> negatives,
                                             const BoxParams& params) {
  std::vector<CandidateTerm> out;
  for (auto& box : LearnBoxes(features, data, supporting, negatives, params)) {
    CandidateTerm term;
    term.source_set = features;
    for (std::size_t r : positives)
      if (box.Covers(data.row(r))) term.covered_positive_indices.push_back(r);
    std::size_t wrong = 0;
    for (std::size_t r : negatives) wrong += box.Covers(data.row(r));
    const std::size_t right = term.covered_positive_indices.size();
    term.precision_on_input =
        right + wrong == 0 ? 0.0 : static_cast<double>(right) / static_cast<double>(right + wrong);
    term.box = std::move(box);
    out.push_back(std::move(term));
  }
  return out;
}

}  // namespace cfire

#endif  // CFIRE_BOXES_HPP_
