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

#ifndef CFIRE_COMMON_HPP_
#define CFIRE_COMMON_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace cfire {

using ClassId = int;

// Sorted, duplicate-free list of feature indices.
using FeatureSet = std::vector<int>;

// Broad failure categories. The CLI maps these onto exit codes.
enum class ErrorKind {
  kConfig,
  kData,
  kModel,
  kExplainer,
  kSchema,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void Fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

// splitmix64 finalizer; used to derive independent generator seeds from one
// root seed.
inline std::uint64_t MixSeed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for stream `index` of pipeline stage `tag` under `root`.
inline std::uint64_t DeriveSeed(std::uint64_t root, std::uint64_t tag,
                                std::uint64_t index) {
  return MixSeed(MixSeed(root ^ MixSeed(tag)) ^ index);
}

// Stage tags for DeriveSeed.
namespace seed_tag {
inline constexpr std::uint64_t kSplit = 1;
inline constexpr std::uint64_t kModel = 2;
inline constexpr std::uint64_t kExplain = 3;
}  // namespace seed_tag

inline bool IsSortedUnique(const FeatureSet& f) {
  return std::adjacent_find(f.begin(), f.end(),
                            [](int a, int b) { return a >= b; }) == f.end();
}

inline bool IsSubset(const FeatureSet& sub, const FeatureSet& super) {
  return std::includes(super.begin(), super.end(), sub.begin(), sub.end());
}

inline FeatureSet Intersect(const FeatureSet& a, const FeatureSet& b) {
  FeatureSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(out));
  return out;
}

// Worker count from CFIRE_THREADS, defaulting to hardware concurrency.
inline int ThreadCount() {
  if (const char* env = std::getenv("CFIRE_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs body(i) for i in [0, n). Every index writes only its own output slot,
// so results do not depend on scheduling. The first exception is rethrown.
inline void ParallelFor(std::size_t n, const std::function<void(std::size_t)>& body,
                        int threads = ThreadCount()) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::mutex mu;
  std::exception_ptr first_error;
  std::size_t next = 0;
  auto worker = [&]() {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (next >= n || first_error) return;
        i = next++;
      }
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const int count = static_cast<int>(std::min<std::size_t>(threads, n));
  pool.reserve(count);
  for (int t = 0; t < count; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace cfire

#endif  // CFIRE_COMMON_HPP_
