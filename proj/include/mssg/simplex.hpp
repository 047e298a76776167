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
#include <limits>
#include <string>
#include <vector>

#include "mssg/common.hpp"

namespace mssg {

enum class LpStatus { optimal, infeasible, unbounded };

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  std::vector<double> x;
  double objective = 0.0;
  double infeasibility = 0.0;  // phase-1 residual when infeasible
};

/// Maximize c.x subject to A_ge x >= b_ge, A_eq x = b_eq, x >= 0.
///
/// Dense two-phase simplex on the full tableau with Bland's rule, which
/// cannot cycle on the degenerate optimal faces these games produce. Problem
/// sizes here are tiny (m variables, n+1 rows), so no factorization is kept.
inline LpSolution solve_lp(const std::vector<double>& c,
                           const std::vector<std::vector<double>>& a_ge,
                           const std::vector<double>& b_ge,
                           const std::vector<std::vector<double>>& a_eq,
                           const std::vector<double>& b_eq) {
  constexpr double kPivotTol = 1e-9;
  const int n = static_cast<int>(c.size());
  const int rows_ge = static_cast<int>(a_ge.size());
  const int rows_eq = static_cast<int>(a_eq.size());
  const int rows = rows_ge + rows_eq;

  // Columns: n structural, rows_ge surplus, then one artificial per row.
  const int surplus0 = n;
  const int art0 = n + rows_ge;
  const int cols = art0 + rows;

  std::vector<std::vector<double>> t(rows, std::vector<double>(cols + 1, 0.0));
  std::vector<int> basis(rows);

  for (int r = 0; r < rows; ++r) {
    const bool ge = r < rows_ge;
    const std::vector<double>& row = ge ? a_ge[r] : a_eq[r - rows_ge];
    double rhs = ge ? b_ge[r] : b_eq[r - rows_ge];
    if (static_cast<int>(row.size()) != n)
      throw DomainError("solve_lp: constraint length mismatch");
    double sign = rhs < 0.0 ? -1.0 : 1.0;
    for (int j = 0; j < n; ++j) t[r][j] = sign * row[j];
    if (ge) t[r][surplus0 + r] = -sign;
    t[r][art0 + r] = 1.0;
    t[r][cols] = sign * rhs;
    basis[r] = art0 + r;
  }

  auto pivot = [&](int pr, int pc) {
    double div = t[pr][pc];
    for (int j = 0; j <= cols; ++j) t[pr][j] /= div;
    for (int r = 0; r < rows; ++r) {
      if (r == pr) continue;
      double f = t[r][pc];
      if (f == 0.0) continue;
      for (int j = 0; j <= cols; ++j) t[r][j] -= f * t[pr][j];
    }
    basis[pr] = pc;
  };

  // Runs Bland simplex for min cost over the active columns [0, active_cols).
  auto run = [&](const std::vector<double>& cost, int active_cols) {
    while (true) {
      // Reduced costs z_j = cost_j - cost_B . B^-1 A_j; entering column is the
      // smallest index with z_j < -tol.
      int enter = -1;
      for (int j = 0; j < active_cols && enter < 0; ++j) {
        bool basic = false;
        for (int r = 0; r < rows; ++r)
          if (basis[r] == j) basic = true;
        if (basic) continue;
        double z = cost[j];
        for (int r = 0; r < rows; ++r) z -= cost[basis[r]] * t[r][j];
        if (z < -kPivotTol) enter = j;
      }
      if (enter < 0) return true;  // optimal
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int r = 0; r < rows; ++r) {
        if (t[r][enter] > kPivotTol) {
          double ratio = t[r][cols] / t[r][enter];
          if (ratio < best - 1e-12 ||
              (std::abs(ratio - best) <= 1e-12 &&
               (leave < 0 || basis[r] < basis[leave]))) {
            best = ratio;
            leave = r;
          }
        }
      }
      if (leave < 0) return false;  // unbounded
      pivot(leave, enter);
    }
  };

  // Phase 1: drive the artificials out.
  std::vector<double> cost1(cols, 0.0);
  for (int j = art0; j < cols; ++j) cost1[j] = 1.0;
  run(cost1, cols);
  double phase1 = 0.0;
  for (int r = 0; r < rows; ++r)
    if (basis[r] >= art0) phase1 += t[r][cols];
  LpSolution sol;
  if (phase1 > 1e-7) {
    sol.status = LpStatus::infeasible;
    sol.infeasibility = phase1;
    return sol;
  }
  // Pivot any residual (zero-valued) artificials out of the basis.
  for (int r = 0; r < rows; ++r) {
    if (basis[r] < art0) continue;
    int enter = -1;
    for (int j = 0; j < art0 && enter < 0; ++j)
      if (std::abs(t[r][j]) > kPivotTol) enter = j;
    if (enter >= 0) pivot(r, enter);
    // A row with no eligible pivot is redundant; its artificial stays at 0.
  }

  // Phase 2: minimize -c over structural and surplus columns.
  std::vector<double> cost2(cols, 0.0);
  for (int j = 0; j < n; ++j) cost2[j] = -c[j];
  if (!run(cost2, art0)) {
    sol.status = LpStatus::unbounded;
    return sol;
  }

  sol.status = LpStatus::optimal;
  sol.x.assign(n, 0.0);
  for (int r = 0; r < rows; ++r)
    if (basis[r] < n) sol.x[basis[r]] = t[r][cols];
  sol.objective = 0.0;
  for (int j = 0; j < n; ++j) sol.objective += c[j] * sol.x[j];
  return sol;
}

}  // namespace mssg
