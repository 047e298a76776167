// Copyright 2026 The mssg Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace mssg {

/// Malformed input: invalid game data, off-simplex distributions, shape
/// mismatches, oversized deviation grids. CLI maps this to exit code 1.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Violated solver precondition: delta/epsilon out of the admissible range,
/// saturated game, missing level point. CLI maps this to exit code 3.
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Default absolute tolerance for utility comparisons.
inline constexpr double kDefaultTol = 1e-9;

inline bool almost_equal(double a, double b, double tol = kDefaultTol) {
  return std::abs(a - b) <= tol;
}

/// Worker-thread budget. Honors the MSSG_THREADS environment variable,
/// otherwise uses the hardware concurrency. Always at least 1.
inline int thread_count() {
  if (const char* env = std::getenv("MSSG_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs fn(chunk_index, begin, end) over a contiguous partition of [0, n).
/// Chunk boundaries depend only on n and the thread budget, so any
/// per-chunk results can be merged deterministically in chunk order.
inline void parallel_chunks(
    std::size_t n, const std::function<void(int, std::size_t, std::size_t)>& fn) {
  int workers = std::min<std::size_t>(thread_count(), std::max<std::size_t>(n, 1));
  if (workers <= 1 || n <= 1) {
    fn(0, 0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::size_t chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    std::size_t begin = std::min(n, w * chunk);
    std::size_t end = std::min(n, begin + chunk);
    pool.emplace_back([&fn, w, begin, end] { fn(w, begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace mssg
