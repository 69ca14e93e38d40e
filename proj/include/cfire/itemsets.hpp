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

// Closed frequent itemset mining over a multiset of feature subsets.
//
// Enumeration is divide and conquer over prefix-preserving closure
// extensions: a closed set P with core item k is extended by every item
// i > k not in P; the candidate closure Q = clo(P + i) is the intersection of
// the transactions supporting P + i, and it is kept only if Q agrees with P
// on all items below i. Every closed set has exactly one such parent, so no
// duplicate checks against earlier output are needed and the delay between
// two outputs is polynomial.

#ifndef CFIRE_ITEMSETS_HPP_
#define CFIRE_ITEMSETS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "cfire/common.hpp"

namespace cfire {

struct TransactionDB {
  // Multiset semantics: duplicates are separate transactions.
  std::vector<FeatureSet> transactions;
  std::size_t ground_size = 0;

  TransactionDB() = default;
  TransactionDB(std::vector<FeatureSet> txs, std::size_t d)
      : transactions(std::move(txs)), ground_size(d) {
    for (std::size_t t = 0; t < transactions.size(); ++t) {
      auto& tx = transactions[t];
      std::sort(tx.begin(), tx.end());
      tx.erase(std::unique(tx.begin(), tx.end()), tx.end());
      if (!tx.empty() && (tx.front() < 0 || static_cast<std::size_t>(tx.back()) >= d))
        Fail(ErrorKind::kData, "transaction " + std::to_string(t) +
                                   " has an item outside the ground set");
    }
  }

  std::size_t size() const { return transactions.size(); }
  bool empty() const { return transactions.empty(); }
};

struct ClosedSet {
  FeatureSet features;
  std::size_t support_count = 0;
  // Ascending transaction indices.
  std::vector<std::size_t> support_indices;

  bool operator==(const ClosedSet&) const = default;
};

// ceil(tau * n), guarded against representation error (0.1 * 30 must be 3).
inline std::size_t MinSupportCount(double tau, std::size_t n) {
  const double raw = tau * static_cast<double>(n);
  const auto t = static_cast<std::size_t>(std::ceil(raw - 1e-9 * std::max(1.0, raw)));
  return std::max<std::size_t>(1, t);
}

// Transactions (ascending indices) that contain every item of f.
inline std::vector<std::size_t> Support(const TransactionDB& db, const FeatureSet& f) {
  std::vector<std::size_t> out;
  for (std::size_t t = 0; t < db.size(); ++t)
    if (IsSubset(f, db.transactions[t])) out.push_back(t);
  return out;
}

// Support descending, then lexicographic on the feature list.
inline void SortCanonical(std::vector<ClosedSet>& sets) {
  std::sort(sets.begin(), sets.end(), [](const ClosedSet& a, const ClosedSet& b) {
    if (a.support_count != b.support_count) return a.support_count > b.support_count;
    return a.features < b.features;
  });
}

namespace detail {

class ClosedMiner {
 public:
  ClosedMiner(const TransactionDB& db, std::size_t min_support)
      : db_(db), min_support_(min_support), counts_(db.ground_size, 0) {
    occurrences_.resize(db.ground_size);
    for (std::size_t t = 0; t < db.size(); ++t)
      for (int item : db.transactions[t]) occurrences_[item].push_back(t);
  }

  std::vector<ClosedSet> Run() {
    std::vector<std::size_t> all(db_.size());
    for (std::size_t t = 0; t < all.size(); ++t) all[t] = t;
    if (all.size() >= min_support_) {
      FeatureSet root = Closure(all);
      Emit(root, all);
      Expand(root, all, -1);
    }
    return std::move(out_);
  }

 private:
  FeatureSet Closure(const std::vector<std::size_t>& support) {
    for (std::size_t t : support)
      for (int item : db_.transactions[t]) ++counts_[item];
    FeatureSet closure;
    for (std::size_t t : support)
      for (int item : db_.transactions[t]) {
        if (counts_[item] == support.size()) closure.push_back(item);
        counts_[item] = 0;
      }
    std::sort(closure.begin(), closure.end());
    closure.erase(std::unique(closure.begin(), closure.end()), closure.end());
    return closure;
  }

  void Emit(const FeatureSet& items, const std::vector<std::size_t>& support) {
    out_.push_back({items, support.size(), support});
  }

  // Q preserves the prefix of P below item i.
  static bool PrefixPreserved(const FeatureSet& p, const FeatureSet& q, int i) {
    auto pe = std::lower_bound(p.begin(), p.end(), i);
    auto qe = std::lower_bound(q.begin(), q.end(), i);
    return std::equal(p.begin(), pe, q.begin(), qe);
  }

  void Expand(const FeatureSet& p, const std::vector<std::size_t>& support, int core) {
    std::vector<std::size_t> narrowed;
    for (int i = core + 1; i < static_cast<int>(db_.ground_size); ++i) {
      if (std::binary_search(p.begin(), p.end(), i)) continue;
      const auto& occ = occurrences_[i];
      if (occ.size() < min_support_) continue;
      narrowed.clear();
      std::set_intersection(support.begin(), support.end(), occ.begin(), occ.end(),
                            std::back_inserter(narrowed));
      if (narrowed.size() < min_support_) continue;
      FeatureSet q = Closure(narrowed);
      if (!PrefixPreserved(p, q, i)) continue;
      Emit(q, narrowed);
      std::vector<std::size_t> child_support(narrowed);
      Expand(q, child_support, i);
    }
  }

  const TransactionDB& db_;
  std::size_t min_support_;
  std::vector<std::vector<std::size_t>> occurrences_;
  std::vector<std::size_t> counts_;
  std::vector<ClosedSet> out_;
};

}  // namespace detail

// All closed sets F with |support(F)| >= ceil(tau * |db|), canonically sorted.
// The empty set appears only when no item is shared by every transaction.
inline std::vector<ClosedSet> EnumerateClosed(const TransactionDB& db, double tau) {
  if (db.empty()) Fail(ErrorKind::kData, "cannot mine an empty transaction database");
  if (!(tau > 0.0 && tau <= 1.0)) Fail(ErrorKind::kConfig, "tau must lie in (0,1]");
  auto sets = detail::ClosedMiner(db, MinSupportCount(tau, db.size())).Run();
  SortCanonical(sets);
  return sets;
}

// Number of non-empty frequent sets, by exhaustive scan. Diagnostic only.
inline std::uint64_t CountFrequent(const TransactionDB& db, double tau) {
  if (db.ground_size > 20) Fail(ErrorKind::kConfig, "CountFrequent needs a ground set of at most 20 items");
  const std::size_t t = MinSupportCount(tau, db.size());
  std::vector<std::uint32_t> masks;
  for (const auto& tx : db.transactions) {
    std::uint32_t m = 0;
    for (int item : tx) m |= 1u << item;
    masks.push_back(m);
  }
  std::uint64_t count = 0;
  for (std::uint32_t f = 1; f < (1u << db.ground_size); ++f) {
    std::size_t s = 0;
    for (std::uint32_t m : masks) s += (m & f) == f;
    count += s >= t;
  }
  return count;
}

// One line per transaction, space-separated feature indices.
inline void WriteTransactions(const TransactionDB& db, std::ostream& out) {
  for (const auto& tx : db.transactions) {
    for (std::size_t k = 0; k < tx.size(); ++k) out << (k ? " " : "") << tx[k];
    out << "\n";
  }
}

}  // namespace cfire

#endif  // CFIRE_ITEMSETS_HPP_
