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

// Synthetic tasks with known ground-truth rules.

#ifndef CFIRE_SYNTHETIC_HPP_
#define CFIRE_SYNTHETIC_HPP_

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "cfire/dataset.hpp"

namespace cfire {

// Uniform samples in [0,1]^d. Class 1 iff (x0, x1) lies in the lower-left
// square [0, 0.3]^2 or the upper-right square [0.7, 1]^2; every other
// dimension is noise.
inline bool InTwoBoxes(std::span<const double> x) {
  return (x[0] <= 0.3 && x[1] <= 0.3) || (x[0] >= 0.7 && x[1] >= 0.7);
}

inline Dataset MakeTwoBoxTask(std::size_t n, std::size_t d, std::uint64_t seed) {
  if (d < 2) Fail(ErrorKind::kConfig, "two-box task needs d >= 2");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> values(n * d);
  std::vector<ClassId> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) values[i * d + j] = unit(rng);
    labels[i] = InTwoBoxes({&values[i * d], d}) ? 1 : 0;
  }
  return Dataset(std::move(values), d, Dataset::DefaultNames(d), std::move(labels));
}

// Spambase-shaped data: d non-negative, right-skewed frequency-like columns.
// Class 1 iff the first three columns jointly exceed their typical values.
inline Dataset MakeSpamLikeTask(std::size_t n, std::size_t d, std::uint64_t seed) {
  if (d < 3) Fail(ErrorKind::kConfig, "spam-like task needs d >= 3");
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> values(n * d);
  std::vector<ClassId> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    double* row = &values[i * d];
    for (std::size_t j = 0; j < d; ++j) row[j] = std::round(expo(rng) * 100.0) / 100.0;
    labels[i] = (row[0] + row[1] > 2.0 && row[2] < 1.5) ? 1 : 0;
  }
  return Dataset(std::move(values), d, Dataset::DefaultNames(d), std::move(labels));
}

}  // namespace cfire

#endif  // CFIRE_SYNTHETIC_HPP_
