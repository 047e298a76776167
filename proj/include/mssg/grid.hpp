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

#include <cmath>
#include <cstddef>
#include <vector>

#include "mssg/common.hpp"
#include "mssg/game.hpp"

namespace mssg {

/// Hard cap on enumerated deviation points per grid sweep.
inline constexpr std::size_t kGridPointGuard = 10'000'000;

/// A budget-constrained lattice of coverage vectors: per-target candidate
/// values (sorted, unique, within [0,1]) whose sum may not exceed the budget.
struct BudgetGrid {
  std::vector<std::vector<double>> axis_values;
  double budget = 0.0;

  int dims() const { return static_cast<int>(axis_values.size()); }
};

/// Uniform lattice of the given step, together with any extra candidate
/// vectors (componentwise) so reference points such as a profile's own
/// allocation are always enumerable.
inline BudgetGrid make_budget_grid(
    int m, double step, double budget,
    const std::vector<CoverageVector>& extra_points = {}) {
  if (!(step > 0.0)) throw DomainError("grid: step must be positive");
  if (!(budget >= 0.0)) throw DomainError("grid: budget must be non-negative");
  BudgetGrid grid;
  grid.budget = budget;
  grid.axis_values.resize(m);
  double top = std::min(1.0, budget);
  for (int t = 0; t < m; ++t) {
    std::vector<double>& vals = grid.axis_values[t];
    for (int s = 0; s * step <= top + 1e-12; ++s)
      vals.push_back(std::min(s * step, 1.0));
    for (const auto& x : extra_points) {
      if (static_cast<int>(x.size()) != m)
        throw DomainError("grid: extra point length mismatch");
      double v = std::clamp(x[t], 0.0, 1.0);
      if (v <= budget + 1e-12) vals.push_back(v);
    }
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end(),
                           [](double a, double b) { return std::abs(a - b) < 1e-12; }),
               vals.end());
  }
  return grid;
}

namespace detail {

template <class Visitor>
void grid_dfs(const BudgetGrid& grid, int axis, double remaining,
              std::vector<double>& x, Visitor&& visit) {
  if (axis == grid.dims()) {
    visit(const_cast<const std::vector<double>&>(x));
    return;
  }
  for (double v : grid.axis_values[axis]) {
    if (v > remaining + 1e-12) break;
    x[axis] = v;
    grid_dfs(grid, axis + 1, remaining - v, x, visit);
  }
  x[axis] = 0.0;
}

inline void grid_count_dfs(const BudgetGrid& grid, int axis, double remaining,
                           std::size_t limit, std::size_t& count) {
  if (count > limit) return;
  if (axis == grid.dims()) {
    ++count;
    return;
  }
  for (double v : grid.axis_values[axis]) {
    if (v > remaining + 1e-12) break;
    grid_count_dfs(grid, axis + 1, remaining - v, limit, count);
    if (count > limit) return;
  }
}

}  // namespace detail

/// Number of grid points, stopping early once `limit` is exceeded.
inline std::size_t count_points(const BudgetGrid& grid,
                                std::size_t limit = kGridPointGuard) {
  std::size_t count = 0;
  detail::grid_count_dfs(grid, 0, grid.budget, limit, count);
  return count;
}

inline void enforce_grid_guard(const BudgetGrid& grid, const char* where) {
  if (count_points(grid) > kGridPointGuard)
    throw DomainError(std::string(where) +
                      ": deviation grid exceeds 10^7 points, use a coarser step");
}

/// Single-threaded enumeration; Visitor receives a reused buffer.
template <class Visitor>
void for_each_point(const BudgetGrid& grid, Visitor&& visit) {
  std::vector<double> x(grid.dims(), 0.0);
  detail::grid_dfs(grid, 0, grid.budget, x, visit);
}

struct GridBest {
  double value = -std::numeric_limits<double>::infinity();
  std::vector<double> point;
  bool found = false;
};

/// Parallel argmax of a pure score over the grid. ScoreFactory yields one
/// stateful scorer per worker (so scratch buffers stay thread-local). Ties
/// keep the lexicographically earliest point, independent of thread count.
template <class ScoreFactory>
GridBest grid_argmax(const BudgetGrid& grid, ScoreFactory&& make_score) {
  if (grid.dims() == 0) return {};
  const std::vector<double>& first = grid.axis_values[0];
  std::vector<GridBest> partial(first.size());

  parallel_chunks(first.size(), [&](int, std::size_t begin, std::size_t end) {
    auto score = make_score();
    std::vector<double> x(grid.dims(), 0.0);
    for (std::size_t idx = begin; idx < end; ++idx) {
      double v = first[idx];
      if (v > grid.budget + 1e-12) continue;
      GridBest& best = partial[idx];
      x.assign(grid.dims(), 0.0);
      x[0] = v;
      detail::grid_dfs(grid, 1, grid.budget - v, x,
                       [&](const std::vector<double>& pt) {
                         double s = score(pt);
                         if (!best.found || s > best.value) {
                           best.value = s;
                           best.point = pt;
                           best.point[0] = v;
                           best.found = true;
                         }
                       });
    }
  });

  GridBest best;
  for (const GridBest& p : partial) {
    if (p.found && (!best.found || p.value > best.value)) best = p;
  }
  return best;
}

}  // namespace mssg
