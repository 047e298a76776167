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
#include <string>
#include <vector>

#include "mssg/abf.hpp"
#include "mssg/alloc.hpp"
#include "mssg/common.hpp"
#include "mssg/game.hpp"
#include "mssg/grid.hpp"
#include "json.hpp"

namespace mssg {

/// Game-derived constants behind the equilibrium guarantee. With a level
/// point u* and last target t*:
///   a = max_t (r^a-p^a), b = min_t (r^a-p^a), g = min_t (u* - p^a(t)),
///   A = 4 m a^2 / (b g),
///   B = max_i (r^d_i(t*)-p^d_i(t*)) * (8 m a^3 sum_t(r^a-p^a)/(b g^2) + A),
///   C = max_i r^d_i(t*) + max_i sum_t r^d_i(t),
///   delta0 = b g^2 / (8 m a^2), epsilon0 = 1/m.
/// The construction tolerates any (delta, epsilon) attacker below
/// (delta0, epsilon0) and its equilibrium defect is zeta = B delta + C epsilon.
struct NeConstants {
  double A = 0.0, B = 0.0, C = 0.0;
  double delta0 = 0.0, epsilon0 = 0.0;
  double a = 0.0, b = 0.0, g = 0.0;
};

inline void to_json(nlohmann::json& j, const NeConstants& k) {
  j = nlohmann::json{{"A", k.A},           {"B", k.B},
                     {"C", k.C},           {"delta0", k.delta0},
                     {"epsilon0", k.epsilon0}, {"a", k.a},
                     {"b", k.b},           {"g", k.g}};
}

inline void from_json(const nlohmann::json& j, NeConstants& k) {
  j.at("A").get_to(k.A);
  j.at("B").get_to(k.B);
  j.at("C").get_to(k.C);
  j.at("delta0").get_to(k.delta0);
  j.at("epsilon0").get_to(k.epsilon0);
  j.at("a").get_to(k.a);
  j.at("b").get_to(k.b);
  j.at("g").get_to(k.g);
}

inline NeConstants ne_constants(const GameSpec& gs, double u_star, int t_star) {
  check_target(t_star, gs);
  const int m = gs.num_targets();
  NeConstants k;
  k.a = gs.attacker_gap_max();
  k.b = gs.attacker_gap_min();
  k.g = std::numeric_limits<double>::infinity();
  for (int t = 0; t < m; ++t)
    k.g = std::min(k.g, u_star - gs.attacker_penalty[t]);
  if (!(k.g > 0.0))
    throw PreconditionError(
        "ne_constants: g = min_t(u* - p^a(t)) <= 0; the level point touches an "
        "attacker penalty (boundary case)");
  k.A = 4.0 * m * k.a * k.a / (k.b * k.g);
  double gap_sum = 0.0;
  for (int t = 0; t < m; ++t)
    gap_sum += gs.attacker_reward[t] - gs.attacker_penalty[t];
  double worst_gap_tstar = 0.0;
  double best_reward_tstar = -std::numeric_limits<double>::infinity();
  double best_reward_sum = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < gs.num_defenders(); ++i) {
    worst_gap_tstar =
        std::max(worst_gap_tstar,
                 gs.defender_reward[i][t_star] - gs.defender_penalty[i][t_star]);
    best_reward_tstar = std::max(best_reward_tstar, gs.defender_reward[i][t_star]);
    double sum = 0.0;
    for (int t = 0; t < m; ++t) sum += gs.defender_reward[i][t];
    best_reward_sum = std::max(best_reward_sum, sum);
  }
  k.B = worst_gap_tstar *
        (8.0 * m * k.a * k.a * k.a * gap_sum / (k.b * k.g * k.g) + k.A);
  k.C = best_reward_tstar + best_reward_sum;
  k.delta0 = k.b * k.g * k.g / (8.0 * m * k.a * k.a);
  k.epsilon0 = 1.0 / m;
  return k;
}

inline double deviation_slack(double grid_step, const GameSpec& g) {
  double worst = 0.0;
  for (int i = 0; i < g.num_defenders(); ++i) {
    double sum = 0.0;
    for (int t = 0; t < g.num_targets(); ++t)
      sum += g.defender_reward[i][t] - g.defender_penalty[i][t];
    worst = std::max(worst, sum);
  }
  return grid_step * worst;
}

/// Result of a unilateral-deviation sweep: the largest gain any defender can
/// realize on the grid, the witnessing deviation, and the pass verdict at
/// zeta plus the grid-coarsening allowance.
struct DeviationEvidence {
  bool pass = false;
  double zeta = 0.0;
  double grid_step = 0.0;
  double slack = 0.0;
  double max_gain = 0.0;
  int witness_defender = -1;
  CoverageVector witness;
  std::vector<double> per_defender_gain;
};

inline void to_json(nlohmann::json& j, const DeviationEvidence& e) {
  j = nlohmann::json{{"pass", e.pass},
                     {"zeta", e.zeta},
                     {"grid_step", e.grid_step},
                     {"slack", e.slack},
                     {"max_gain", e.max_gain},
                     {"witness_defender", e.witness_defender},
                     {"witness", e.witness},
                     {"per_defender_gain", e.per_defender_gain}};
}

/// Checks the zeta-equilibrium property by exhaustive unilateral deviation
/// search: every defender's alternatives are enumerated on a budget grid
/// (which always contains the defender's current allocation), the others held
/// fixed, and the best gain compared against zeta + slack.
inline DeviationEvidence verify_ne(const StrategyProfile& profile, double zeta,
                                   const GameSpec& g, const Abf& abf,
                                   double grid_step) {
  g.validate();
  profile.validate();
  if (profile.num_players() != g.num_defenders())
    throw DomainError("verify_ne: profile player count mismatch");
  if (!(grid_step > 0.0)) throw DomainError("verify_ne: grid step must be positive");
  const int n = g.num_defenders();
  const int m = g.num_targets();

  CoverageVector base_cov = combine_coverage(profile, CombineMode::independent);

  DeviationEvidence ev;
  ev.zeta = zeta;
  ev.grid_step = grid_step;
  ev.slack = deviation_slack(grid_step, g);
  ev.max_gain = -std::numeric_limits<double>::infinity();
  ev.per_defender_gain.resize(n);

  for (int i = 0; i < n; ++i) {
    double base_u = expected_defender_utility(base_cov, i, abf, g);
    // Coverage contributed by everyone else, fixed during i's deviation.
    CoverageVector rest(m, 1.0);
    for (int jdx = 0; jdx < n; ++jdx) {
      if (jdx == i) continue;
      for (int t = 0; t < m; ++t) rest[t] *= 1.0 - profile.allocations[jdx][t];
    }
    BudgetGrid grid = make_budget_grid(m, grid_step, g.resources[i],
                                       {profile.allocations[i]});
    enforce_grid_guard(grid, "verify_ne");

    GridBest best = grid_argmax(grid, [&]() {
      CoverageVector cov(m), us(m), ws(m);
      return [&, cov, us, ws](const CoverageVector& x) mutable {
        for (int t = 0; t < m; ++t) cov[t] = 1.0 - rest[t] * (1.0 - x[t]);
        return detail::expected_utility_noalloc(cov.data(), i, abf, g, us.data(),
                                                ws.data());
      };
    });
    double gain = best.found ? best.value - base_u : 0.0;
    ev.per_defender_gain[i] = gain;
    if (gain > ev.max_gain) {
      ev.max_gain = gain;
      ev.witness_defender = i;
      ev.witness = best.point;
    }
  }
  ev.pass = ev.max_gain <= zeta + ev.slack;
  return ev;
}

/// Report of the equilibrium construction: the profile, its defect zeta, the
/// constants it came from, and optional verification evidence.
struct SolveReport {
  StrategyProfile profile;
  CoverageVector coverage;
  double zeta = 0.0;
  NeConstants constants;
  std::optional<int> t_star;
  double u_star = 0.0;
  double delta = 0.0;
  double epsilon = 0.0;
  std::optional<DeviationEvidence> verification;
};

inline void to_json(nlohmann::json& j, const SolveReport& r) {
  j = nlohmann::json{{"profile", r.profile},
                     {"coverage", r.coverage},
                     {"zeta", r.zeta},
                     {"constants", r.constants},
                     {"t_star", r.t_star ? nlohmann::json(*r.t_star)
                                         : nlohmann::json(nullptr)},
                     {"u_star", r.u_star},
                     {"delta", r.delta},
                     {"epsilon", r.epsilon}};
  if (r.verification) j["verification"] = *r.verification;
}

/// Equilibrium construction: locate the level input u* (to precision delta^2),
/// derive the game constants, reject out-of-range attackers and saturated
/// games, then allocate at the offset level u* - A*delta so a single target
/// t* stays attractive to the attacker. The result is a (B delta + C epsilon)
/// approximate equilibrium.
inline SolveReport calc_ne(const GameSpec& g, const Abf& abf) {
  g.validate();
  const double delta = abf.delta;
  const double epsilon = abf.epsilon;

  double u_star;
  try {
    u_star = find_level_input(g, CombineMode::independent, delta * delta);
  } catch (const PreconditionError&) {
    throw PreconditionError(
        "calc_ne: no level point exists; the game is saturated or has no "
        "resources to place");
  }
  AllocResult at_level = alloc(u_star, u_star, g);
  if (!at_level.last_target)
    throw PreconditionError("calc_ne: no defender can allocate any resource");
  NeConstants k = ne_constants(g, u_star, *at_level.last_target);
  if (!(delta < k.delta0))
    throw PreconditionError("calc_ne: delta=" + std::to_string(delta) +
                            " violates the bound delta0=" +
                            std::to_string(k.delta0));
  if (!(epsilon < k.epsilon0))
    throw PreconditionError("calc_ne: epsilon=" + std::to_string(epsilon) +
                            " violates the bound epsilon0=" +
                            std::to_string(k.epsilon0));
  double alpha = k.A * delta / k.b;
  if (alpha >= 1.0 || check_saturation(g, abf, alpha))
    throw PreconditionError(
        "calc_ne: game is A*delta-saturated (alpha=" + std::to_string(alpha) +
        "); the construction requires a non-saturated game");

  AllocResult final = alloc(u_star - k.A * delta, u_star, g);

  // The guarantee needs exactly one under-covered, unclamped target.
  CoverageVector level = level_coverage(u_star - k.A * delta, g);
  int shortfalls = 0;
  for (int t = 0; t < g.num_targets(); ++t)
    if (level[t] < 1.0 - 1e-12 && final.coverage[t] + 1e-9 < level[t])
      ++shortfalls;
  if (shortfalls > 1)
    throw PreconditionError(
        "calc_ne: more than one under-covered target; delta is too large for "
        "this game");

  SolveReport report;
  report.profile = final.profile;
  report.coverage = final.coverage;
  report.constants = k;
  report.t_star = final.last_target;
  report.u_star = u_star;
  report.delta = delta;
  report.epsilon = epsilon;
  report.zeta = k.B * delta + k.C * epsilon;
  return report;
}

}  // namespace mssg
