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

#include <optional>
#include <vector>

#include "mssg/common.hpp"
#include "mssg/game.hpp"

namespace mssg {

struct AllocStep {
  int defender = 0;
  int target = 0;
  double amount = 0.0;
};

/// Outcome of a water-filling walk: the per-defender profile, the combined
/// coverage, the last target that received a positive allocation (t*), the
/// unspent budget per defender, and the allocation order.
struct AllocResult {
  StrategyProfile profile;
  CoverageVector coverage;
  std::optional<int> last_target;
  std::vector<double> residual;
  std::vector<AllocStep> walk;

  double total_residual() const {
    double r = 0.0;
    for (double v : residual) r += v;
    return r;
  }
};

namespace detail {

inline AllocResult run_alloc_walk(double u, double u_tilde, const GameSpec& g,
                                  CombineMode mode) {
  g.validate();
  const int n = g.num_defenders();
  const int m = g.num_targets();
  const CoverageVector level = level_coverage(u, g);

  AllocResult res;
  res.profile.allocations.assign(n, CoverageVector(m, 0.0));
  res.profile.budgets = g.resources;
  res.coverage.assign(m, 0.0);
  res.residual.assign(n, 0.0);

  for (int i = 0; i < n; ++i) {
    PreferenceOrder pref = preference_order(i, u_tilde, g);
    double remaining = g.resources[i];
    for (int t : pref.order) {
      double gap;
      if (mode == CombineMode::independent) {
        double head = 1.0 - res.coverage[t];
        gap = head <= 0.0 ? 0.0 : (level[t] - res.coverage[t]) / head;
      } else {
        gap = level[t] - res.coverage[t];
      }
      gap = std::clamp(gap, 0.0, 1.0);
      double x = std::min(gap, remaining);
      if (x <= 0.0) continue;
      res.profile.allocations[i][t] = x;
      if (mode == CombineMode::independent)
        res.coverage[t] = 1.0 - (1.0 - res.coverage[t]) * (1.0 - x);
      else
        res.coverage[t] = std::min(1.0, res.coverage[t] + x);
      remaining -= x;
      res.last_target = t;
      res.walk.push_back({i, t, x});
    }
    res.residual[i] = std::max(0.0, remaining);
  }
  return res;
}

// Largest per-target shortfall against the level demand, ignoring clamps.
inline double level_shortfall(const AllocResult& r, double u, const GameSpec& g) {
  CoverageVector level = level_coverage(u, g);
  double worst = 0.0;
  for (int t = 0; t < g.num_targets(); ++t)
    worst = std::max(worst, level[t] - r.coverage[t]);
  return worst;
}

}  // namespace detail

/// Water-filling allocation for uncoordinated defenders. Each defender, in
/// index order, walks its preference order at level u_tilde from least to most
/// preferred, topping each target up to the level-u coverage under the product
/// rule until its budget runs out. An infeasibly low u just leaves targets
/// below level.
inline AllocResult alloc(double u, double u_tilde, const GameSpec& g) {
  return detail::run_alloc_walk(u, u_tilde, g, CombineMode::independent);
}

/// The pooled-coalition variant: identical walk, but coverage adds up (one
/// coalition spending the combined budget; the per-defender split is kept for
/// bookkeeping only).
inline AllocResult gc_alloc(double u, double u_tilde, const GameSpec& g) {
  return detail::run_alloc_walk(u, u_tilde, g, CombineMode::additive);
}

/// Binary search for the level input u* at which the chosen walk spends every
/// resource exactly while reaching level everywhere. Games with resources to
/// spare at every level have no interior level point and are rejected.
inline double find_level_input(const GameSpec& g, CombineMode mode, double tol) {
  if (!(tol > 0.0)) throw DomainError("find_level_input: tol must be positive");
  auto run = [&](double u) {
    return detail::run_alloc_walk(u, u, g, mode);
  };
  double lo = g.min_attacker_penalty();
  double hi = g.max_attacker_reward();
  double u = hi;
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    u = 0.5 * (lo + hi);
    AllocResult r = run(u);
    double shortfall = detail::level_shortfall(r, u, g);
    double residual = r.total_residual();
    if (shortfall <= tol && residual <= tol) return u;
    if (shortfall > tol)
      lo = u;  // demand unmet: level too low
    else
      hi = u;  // resources left over: level too high
  }
  u = 0.5 * (lo + hi);
  AllocResult r = run(u);
  double scale = std::max(1.0, g.total_resources());
  if (r.total_residual() > std::max(tol, 1e-7) * scale)
    throw PreconditionError(
        "find_level_input: no level point, resources remain unspent at every "
        "level (saturated or degenerate game)");
  return u;
}

}  // namespace mssg
