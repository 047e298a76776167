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

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mssg/abf.hpp"
#include "mssg/alloc.hpp"
#include "mssg/common.hpp"
#include "mssg/equilibrium.hpp"
#include "mssg/game.hpp"
#include "mssg/grid.hpp"
#include "mssg/simplex.hpp"
#include "json.hpp"

namespace mssg {

/// A partition of the defenders plus one pooled coverage vector per coalition.
/// Coalitions pool their coverage additively; across coalitions protection
/// composes by the product rule.
struct CoalitionStructure {
  std::vector<std::vector<int>> partition;
  std::vector<CoverageVector> strategies;

  int num_coalitions() const { return static_cast<int>(partition.size()); }

  double coalition_budget(const GameSpec& g, int c) const {
    double k = 0.0;
    for (int i : partition[c]) k += g.resources[i];
    return k;
  }

  void validate(const GameSpec& g) const {
    if (partition.size() != strategies.size())
      throw DomainError("coalition structure: partition/strategy count mismatch");
    std::vector<int> seen(g.num_defenders(), 0);
    for (int c = 0; c < num_coalitions(); ++c) {
      for (int i : partition[c]) {
        check_defender(i, g);
        if (seen[i]++)
          throw DomainError("coalition structure: defender " + std::to_string(i) +
                            " appears in two coalitions");
      }
      if (static_cast<int>(strategies[c].size()) != g.num_targets())
        throw DomainError("coalition structure: strategy length mismatch");
      double spent = 0.0;
      for (double v : strategies[c]) {
        if (!(v >= -1e-12) || !(v <= 1.0 + 1e-12))
          throw DomainError("coalition structure: coverage outside [0,1]");
        spent += v;
      }
      if (spent > coalition_budget(g, c) + 1e-9)
        throw DomainError("coalition structure: coalition " + std::to_string(c) +
                          " exceeds its pooled budget");
    }
    for (int i = 0; i < g.num_defenders(); ++i)
      if (!seen[i])
        throw DomainError("coalition structure: defender " + std::to_string(i) +
                          " missing from the partition");
  }

  /// Overall coverage: product rule across coalitions.
  CoverageVector combined() const {
    if (strategies.empty()) return {};
    CoverageVector c(strategies.front().size(), 0.0);
    for (const auto& s : strategies)
      for (std::size_t t = 0; t < c.size(); ++t)
        c[t] = 1.0 - (1.0 - c[t]) * (1.0 - std::clamp(s[t], 0.0, 1.0));
    return c;
  }
};

inline void to_json(nlohmann::json& j, const CoalitionStructure& cs) {
  j = nlohmann::json{{"partition", cs.partition}, {"strategies", cs.strategies}};
}

inline void from_json(const nlohmann::json& j, CoalitionStructure& cs) {
  j.at("partition").get_to(cs.partition);
  j.at("strategies").get_to(cs.strategies);
}

inline CoalitionStructure grand_structure(const GameSpec& g, CoverageVector c) {
  CoalitionStructure cs;
  cs.partition.emplace_back();
  for (int i = 0; i < g.num_defenders(); ++i) cs.partition[0].push_back(i);
  cs.strategies.push_back(std::move(c));
  return cs;
}

inline CoalitionStructure singleton_structure(const StrategyProfile& x) {
  CoalitionStructure cs;
  for (int i = 0; i < x.num_players(); ++i) {
    cs.partition.push_back({i});
    cs.strategies.push_back(x.allocations[i]);
  }
  return cs;
}

inline std::vector<double> structure_utilities(const CoalitionStructure& cs,
                                               const GameSpec& g, const Abf& abf) {
  CoverageVector c = cs.combined();
  std::vector<double> u(g.num_defenders());
  for (int i = 0; i < g.num_defenders(); ++i)
    u[i] = expected_defender_utility(c, i, abf, g);
  return u;
}

/// Constants of the cooperative guarantee. With inverse attacker gaps
/// inv_t = 1/(r^a(t)-p^a(t)) and S = sum_t inv_t:
///   A = 1 + S / min_t inv_t          (walk offset; GC allocation runs at
///                                     u = min-max height - A*delta)
///   B = max_i (r^d_i(t*)-p^d_i(t*)) * [inv_{t*} + S + S^2 (r^a(t*)-p^a(t*))]
///   C = max_i sum_t r^d_i(t)
///   delta0 = 1/S, epsilon0 = 1/m.
/// The constructed structure resists coalition deviations up to
/// zeta = B*delta + C*epsilon.
struct CoreConstants {
  double A = 0.0, B = 0.0, C = 0.0;
  double delta0 = 0.0, epsilon0 = 0.0;
};

inline void to_json(nlohmann::json& j, const CoreConstants& k) {
  j = nlohmann::json{{"A", k.A},
                     {"B", k.B},
                     {"C", k.C},
                     {"delta0", k.delta0},
                     {"epsilon0", k.epsilon0}};
}

inline double core_offset_A(const GameSpec& g) {
  double inv_sum = 0.0;
  double inv_min = std::numeric_limits<double>::infinity();
  for (int t = 0; t < g.num_targets(); ++t) {
    double inv = 1.0 / (g.attacker_reward[t] - g.attacker_penalty[t]);
    inv_sum += inv;
    inv_min = std::min(inv_min, inv);
  }
  return 1.0 + inv_sum / inv_min;
}

inline CoreConstants core_constants(const GameSpec& g, int t_star) {
  check_target(t_star, g);
  const int m = g.num_targets();
  double inv_sum = 0.0;
  for (int t = 0; t < m; ++t)
    inv_sum += 1.0 / (g.attacker_reward[t] - g.attacker_penalty[t]);
  double gap_star = g.attacker_reward[t_star] - g.attacker_penalty[t_star];
  double worst_gap = 0.0;
  double best_sum = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < g.num_defenders(); ++i) {
    worst_gap = std::max(worst_gap, g.defender_reward[i][t_star] -
                                        g.defender_penalty[i][t_star]);
    double sum = 0.0;
    for (int t = 0; t < m; ++t) sum += g.defender_reward[i][t];
    best_sum = std::max(best_sum, sum);
  }
  CoreConstants k;
  k.A = core_offset_A(g);
  k.B = worst_gap * (1.0 / gap_star + inv_sum + inv_sum * inv_sum * gap_star);
  k.C = best_sum;
  k.delta0 = 1.0 / inv_sum;
  k.epsilon0 = 1.0 / m;
  return k;
}

/// Optimal attack distribution for the cooperative reduction: maximize the
/// summed defender utility subject to every defender keeping at least its
/// status-quo utility.
struct CoreLpSolution {
  AttackDistribution distribution;
  double objective = 0.0;
  std::vector<int> binding_constraints;
};

inline void to_json(nlohmann::json& j, const CoreLpSolution& s) {
  j = nlohmann::json{{"distribution", s.distribution},
                     {"objective", s.objective},
                     {"binding_constraints", s.binding_constraints}};
}

inline CoreLpSolution core_lp(const CoverageVector& c_hat,
                              const std::vector<double>& u_hat,
                              const GameSpec& g) {
  const int m = g.num_targets();
  const int n = g.num_defenders();
  if (static_cast<int>(u_hat.size()) != n)
    throw DomainError("core_lp: utility floor count mismatch");

  std::vector<double> weights(m, 0.0);
  std::vector<std::vector<double>> rows(n, std::vector<double>(m));
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < m; ++t) {
      rows[i][t] = defender_target_utility(c_hat[t], t, i, g);
      weights[t] += rows[i][t];
    }
  LpSolution lp = solve_lp(weights, rows, u_hat,
                           {std::vector<double>(m, 1.0)}, {1.0});
  if (lp.status == LpStatus::infeasible)
    throw DomainError(
        "core_lp: infeasible, no attack distribution meets the utility floors "
        "(phase-1 residual=" + std::to_string(lp.infeasibility) + ")");
  if (lp.status == LpStatus::unbounded)
    throw DomainError("core_lp: unbounded (malformed input)");

  CoreLpSolution sol;
  sol.distribution = lp.x;
  for (double& p : sol.distribution) p = std::clamp(p, 0.0, 1.0);
  sol.objective = lp.objective;
  for (int i = 0; i < n; ++i) {
    double v = 0.0;
    for (int t = 0; t < m; ++t) v += sol.distribution[t] * rows[i][t];
    if (std::abs(v - u_hat[i]) <= 1e-7) sol.binding_constraints.push_back(i);
  }
  return sol;
}

/// Grand-coalition coverage realizing the attack distribution p: invert the
/// attacker-utility line on each target at the induced utility vector. The
/// result stays inside the pooled budget because every induced utility sits
/// at or above the min-max height.
inline CoverageVector realize_distribution(const AttackDistribution& p,
                                           const GameSpec& g, const Abf& abf,
                                           double u_bar) {
  std::vector<double> u = induce_distribution(p, u_bar, abf);
  CoverageVector c(g.num_targets());
  for (int t = 0; t < g.num_targets(); ++t)
    c[t] = std::clamp((g.attacker_reward[t] - u[t]) /
                          (g.attacker_reward[t] - g.attacker_penalty[t]),
                      0.0, 1.0);
  double spent = 0.0;
  for (double v : c) spent += v;
  if (spent > g.total_resources() + 1e-9)
    throw DomainError("realize_distribution: induced coverage exceeds the pooled "
                      "budget");
  return c;
}

struct SubsetResistant {
  CoalitionStructure cs;
  std::vector<double> u_hat;
  int t_star = -1;
  CoreConstants constants;
  double u_bar = 0.0;
};

/// Stage one of the cooperative construction: the grand coalition allocates at
/// u_bar - A*delta, leaving exactly one target attractive. The resulting
/// structure resists every proper-subset deviation up to B*delta + C*epsilon.
inline SubsetResistant build_subset_resistant(const GameSpec& g, const Abf& abf) {
  g.validate();
  const double delta = abf.delta;
  const double epsilon = abf.epsilon;
  const int m = g.num_targets();

  double inv_sum = 0.0;
  for (int t = 0; t < m; ++t)
    inv_sum += 1.0 / (g.attacker_reward[t] - g.attacker_penalty[t]);
  double delta0 = 1.0 / inv_sum;
  if (!(delta < delta0))
    throw PreconditionError("build_subset_resistant: delta=" +
                            std::to_string(delta) +
                            " violates the bound delta0=" + std::to_string(delta0));
  if (!(epsilon < 1.0 / m))
    throw PreconditionError("build_subset_resistant: epsilon=" +
                            std::to_string(epsilon) +
                            " violates the bound epsilon0=" +
                            std::to_string(1.0 / m));
  double A = core_offset_A(g);
  double alpha = A * delta / g.attacker_gap_min();
  if (alpha >= 1.0 || check_saturation(g, abf, alpha))
    throw PreconditionError(
        "build_subset_resistant: game is A*delta-saturated (alpha=" +
        std::to_string(alpha) + ")");

  double u_bar = min_max_height(g, 1e-11);
  AllocResult walk = gc_alloc(u_bar - A * delta, u_bar, g);
  if (!walk.last_target)
    throw PreconditionError("build_subset_resistant: no resources to allocate");

  SubsetResistant out;
  out.u_bar = u_bar;
  out.t_star = *walk.last_target;
  out.constants = core_constants(g, out.t_star);
  out.cs = grand_structure(g, walk.coverage);
  out.u_hat.resize(g.num_defenders());
  for (int i = 0; i < g.num_defenders(); ++i)
    out.u_hat[i] = expected_defender_utility(walk.coverage, i, abf, g);
  return out;
}

/// Full cooperative pipeline: subset-resistant structure, the attack LP over
/// its utilities, realization of the optimal distribution near the min-max
/// height. zeta = B*delta + C*epsilon with the CoreConstants.
struct CoreReport {
  CoalitionStructure cs;
  CoreLpSolution lp;
  std::vector<double> u_hat;
  std::vector<double> final_utilities;
  std::vector<double> induced_utilities;
  double zeta = 0.0;
  CoreConstants constants;
  int t_star = -1;
  double u_bar = 0.0;
  double delta = 0.0;
  double epsilon = 0.0;
};

inline void to_json(nlohmann::json& j, const CoreReport& r) {
  j = nlohmann::json{{"structure", r.cs},
                     {"lp", r.lp},
                     {"u_hat", r.u_hat},
                     {"final_utilities", r.final_utilities},
                     {"induced_utilities", r.induced_utilities},
                     {"zeta", r.zeta},
                     {"constants", r.constants},
                     {"t_star", r.t_star},
                     {"u_bar", r.u_bar},
                     {"delta", r.delta},
                     {"epsilon", r.epsilon}};
}

inline CoreReport build_core_solution(const GameSpec& g, const Abf& abf) {
  SubsetResistant stage1 = build_subset_resistant(g, abf);
  CoreReport report;
  report.u_hat = stage1.u_hat;
  report.t_star = stage1.t_star;
  report.constants = stage1.constants;
  report.u_bar = stage1.u_bar;
  report.delta = abf.delta;
  report.epsilon = abf.epsilon;
  report.lp = core_lp(stage1.cs.strategies[0], stage1.u_hat, g);
  report.induced_utilities =
      induce_distribution(report.lp.distribution, stage1.u_bar, abf);
  CoverageVector c(g.num_targets());
  for (int t = 0; t < g.num_targets(); ++t)
    c[t] = std::clamp((g.attacker_reward[t] - report.induced_utilities[t]) /
                          (g.attacker_reward[t] - g.attacker_penalty[t]),
                      0.0, 1.0);
  double spent = 0.0;
  for (double v : c) spent += v;
  if (spent > g.total_resources() + 1e-9)
    throw DomainError("build_core_solution: realized coverage exceeds the "
                      "pooled budget");
  report.cs = grand_structure(g, c);
  report.final_utilities = structure_utilities(report.cs, g, abf);
  report.zeta =
      report.constants.B * abf.delta + report.constants.C * abf.epsilon;
  return report;
}

/// A revenge response and its effect on the deviators.
struct RevengeOutcome {
  bool feasible = false;
  CoverageVector coverage;           // revengers' pooled vector
  int steered_target = -1;           // the target left attractive
  double min_deviator_gain = std::numeric_limits<double>::infinity();
};

/// Builds revenge responses against a deviation (D, x_D) from a coalition
/// structure. Plans form a steering family: pick a target t0, leave it alone,
/// and cover every other target far enough that its attacker utility trails
/// t0's by at least delta, spending any leftover budget pushing them lower
/// still (a water-fill to a common level). Candidates are tried in ascending
/// order of the deviators' reference utility at the min-max level coverage;
/// the plan with the least favorable outcome for the deviators wins.
class RevengePlanner {
 public:
  RevengePlanner(const CoalitionStructure& cs, const GameSpec& g, const Abf& abf)
      : g_(g), abf_(abf) {
    cs.validate(g);
    base_cov_ = cs.combined();
    base_util_.resize(g.num_defenders());
    for (int i = 0; i < g.num_defenders(); ++i)
      base_util_[i] = expected_defender_utility(base_cov_, i, abf, g);
    u_bar_ = min_max_height(g, 1e-11);
    ref_cov_ = level_coverage(u_bar_, g);
    total_budget_ = g.total_resources();
  }

  const std::vector<double>& baselines() const { return base_util_; }
  double u_bar() const { return u_bar_; }

  RevengeOutcome plan(const std::vector<int>& deviators,
                      const CoverageVector& x_d) const {
    const int m = g_.num_targets();
    const double delta = abf_.delta;
    double k_d = 0.0;
    for (int i : deviators) k_d += g_.resources[i];
    double k_r = total_budget_ - k_d;

    RevengeOutcome best;
    CoverageVector cov(m), us(m), ws(m);
    auto consider = [&](const CoverageVector& x_r, int t0) {
      for (int t = 0; t < m; ++t)
        cov[t] = 1.0 - (1.0 - x_d[t]) * (1.0 - x_r[t]);
      double min_gain = std::numeric_limits<double>::infinity();
      for (int i : deviators)
        min_gain = std::min(min_gain,
                            detail::expected_utility_noalloc(
                                cov.data(), i, abf_, g_, us.data(), ws.data()) -
                                base_util_[i]);
      if (!best.feasible || min_gain < best.min_deviator_gain) {
        best.feasible = true;
        best.coverage = x_r;
        best.steered_target = t0;
        best.min_deviator_gain = min_gain;
      }
    };

    // The do-nothing response is always available.
    consider(CoverageVector(m, 0.0), -1);

    // Candidate steering targets, preferring those worst for the deviators at
    // the reference level.
    std::vector<int> candidates(m);
    std::iota(candidates.begin(), candidates.end(), 0);
    auto ref = [&](int t) {
      double v = std::numeric_limits<double>::infinity();
      for (int i : deviators)
        v = std::min(v, defender_target_utility(ref_cov_[t], t, i, g_));
      return v;
    };
    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](int a, int b) { return ref(a) < ref(b); });

    for (int t0 : candidates) {
      double u0 = attacker_utility(x_d[t0], t0, g_);
      bool reachable = true;
      for (int t = 0; t < m && reachable; ++t)
        if (t != t0 && g_.attacker_penalty[t] > u0 - delta + 1e-12)
          reachable = false;
      if (!reachable) continue;

      auto level_at = [&](double level_u, int t) {
        if (level_u >= g_.attacker_reward[t]) return 0.0;
        return std::min(1.0, (g_.attacker_reward[t] - level_u) /
                                 (g_.attacker_reward[t] - g_.attacker_penalty[t]));
      };
      auto cost_at = [&](double level_u) {
        double cost = 0.0;
        for (int t = 0; t < m; ++t) {
          if (t == t0) continue;
          double head = 1.0 - x_d[t];
          double need = head <= 1e-12
                            ? 0.0
                            : std::clamp((level_at(level_u, t) - x_d[t]) / head,
                                         0.0, 1.0);
          cost += need;
        }
        return cost;
      };
      double hi = u0 - delta;
      if (cost_at(hi) > k_r + 1e-9) continue;  // cannot open the delta gap
      double lo = g_.min_attacker_penalty();
      if (cost_at(lo) > k_r) {
        for (int it = 0; it < 100 && hi - lo > 1e-12; ++it) {
          double mid = 0.5 * (lo + hi);
          if (cost_at(mid) > k_r)
            lo = mid;
          else
            hi = mid;
        }
      } else {
        hi = lo;  // budget covers the deepest push everywhere
      }
      CoverageVector x_r(m, 0.0);
      for (int t = 0; t < m; ++t) {
        if (t == t0) continue;
        double head = 1.0 - x_d[t];
        x_r[t] = head <= 1e-12
                     ? 0.0
                     : std::clamp((level_at(hi, t) - x_d[t]) / head, 0.0, 1.0);
      }
      consider(x_r, t0);
    }
    if (best.steered_target == -1 && best.feasible) {
      // Only the null response exists; treat it as a legitimate plan.
    }
    return best;
  }

  /// Minimum gain the deviators can guarantee against this family; a large
  /// sentinel when even the null response leaves every deviator ahead is NOT
  /// returned here -- the caller compares against zeta.
  double guaranteed_min_gain(const std::vector<int>& deviators,
                             const CoverageVector& x_d) const {
    RevengeOutcome out = plan(deviators, x_d);
    return out.min_deviator_gain;
  }

 private:
  const GameSpec& g_;
  const Abf& abf_;
  CoverageVector base_cov_;
  std::vector<double> base_util_;
  CoverageVector ref_cov_;
  double u_bar_ = 0.0;
  double total_budget_ = 0.0;
};

/// The proof's revenge construction against a single deviation. Deviators must
/// form a proper subset.
inline RevengeOutcome constructive_revenge(const std::vector<int>& deviators,
                                           const CoverageVector& x_d,
                                           const CoalitionStructure& cs,
                                           const GameSpec& g, const Abf& abf) {
  if (deviators.empty())
    throw DomainError("constructive_revenge: empty deviator set");
  if (static_cast<int>(deviators.size()) >= g.num_defenders())
    throw DomainError("constructive_revenge: deviators must be a proper subset");
  RevengePlanner planner(cs, g, abf);
  return planner.plan(deviators, x_d);
}

/// Verification evidence for one deviating subset.
struct SubsetEvidence {
  std::vector<int> deviators;
  double max_guaranteed_gain = 0.0;
  CoverageVector witness;
  bool refuted = true;
};

struct AlphaCoreEvidence {
  bool pass = false;
  double zeta = 0.0;
  double grid_step = 0.0;
  double slack = 0.0;
  std::vector<SubsetEvidence> subsets;
};

inline void to_json(nlohmann::json& j, const AlphaCoreEvidence& e) {
  nlohmann::json subsets = nlohmann::json::array();
  for (const auto& s : e.subsets)
    subsets.push_back({{"deviators", s.deviators},
                       {"max_guaranteed_gain", s.max_guaranteed_gain},
                       {"witness", s.witness},
                       {"refuted", s.refuted}});
  j = nlohmann::json{{"pass", e.pass},
                     {"zeta", e.zeta},
                     {"grid_step", e.grid_step},
                     {"slack", e.slack},
                     {"subsets", subsets}};
}

/// Checks the approximate-core property: every proper deviating subset must be
/// refutable by a revenge response (each plan leaves some deviator gaining at
/// most zeta plus grid slack), and no grand-coalition deviation may make every
/// defender better off by more than zeta. Deviations are enumerated on a
/// pooled budget grid per subset.
inline AlphaCoreEvidence verify_alpha_core(const CoalitionStructure& cs,
                                           double zeta, const GameSpec& g,
                                           const Abf& abf, double grid_step) {
  g.validate();
  cs.validate(g);
  if (!(grid_step > 0.0))
    throw DomainError("verify_alpha_core: grid step must be positive");
  const int n = g.num_defenders();
  const int m = g.num_targets();
  if (n > 16)
    throw DomainError("verify_alpha_core: subset enumeration over more than 16 "
                      "defenders is not supported");

  RevengePlanner planner(cs, g, abf);
  const std::vector<double>& base = planner.baselines();

  AlphaCoreEvidence ev;
  ev.zeta = zeta;
  ev.grid_step = grid_step;
  ev.slack = deviation_slack(grid_step, g);

  constexpr double kUnrefutable = 1e30;
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    std::vector<int> devs;
    double k_d = 0.0;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) {
        devs.push_back(i);
        k_d += g.resources[i];
      }
    bool grand = static_cast<int>(devs.size()) == n;

    std::vector<CoverageVector> extras;
    if (grand) extras.push_back(cs.combined());
    BudgetGrid grid = make_budget_grid(m, grid_step, k_d, extras);
    enforce_grid_guard(grid, "verify_alpha_core");

    GridBest best = grid_argmax(grid, [&]() {
      CoverageVector us(m), ws(m);
      return [&, us, ws](const CoverageVector& x_d) mutable -> double {
        if (grand) {
          double min_gain = std::numeric_limits<double>::infinity();
          for (int i : devs)
            min_gain = std::min(min_gain,
                                detail::expected_utility_noalloc(
                                    x_d.data(), i, abf, g, us.data(), ws.data()) -
                                    base[i]);
          return min_gain;
        }
        RevengeOutcome out = planner.plan(devs, x_d);
        if (!out.feasible) return kUnrefutable;
        return out.min_deviator_gain;
      };
    });

    SubsetEvidence se;
    se.deviators = devs;
    se.max_guaranteed_gain = best.found ? best.value : 0.0;
    se.witness = best.point;
    se.refuted = se.max_guaranteed_gain <= zeta + ev.slack;
    ev.subsets.push_back(std::move(se));
  }
  ev.pass = true;
  for (const auto& s : ev.subsets) ev.pass = ev.pass && s.refuted;
  return ev;
}

/// Evidence for a gamma-style deviation check: the deviators play x_D and the
/// remaining defenders respond independently on their own grids.
struct GammaEvidence {
  bool confirmed = false;             // every response leaves all deviators ahead
  double worst_deviator_utility = 0.0;
  double min_gain = 0.0;
  std::vector<double> deviator_baselines;
};

inline void to_json(nlohmann::json& j, const GammaEvidence& e) {
  j = nlohmann::json{{"confirmed", e.confirmed},
                     {"worst_deviator_utility", e.worst_deviator_utility},
                     {"min_gain", e.min_gain},
                     {"deviator_baselines", e.deviator_baselines}};
}

/// True iff the deviation (D, x_D) strictly gains for every deviator against
/// every non-cooperative grid response of the remaining defenders.
inline GammaEvidence check_gamma_deviation(const CoalitionStructure& cs,
                                           const std::vector<int>& deviators,
                                           const CoverageVector& x_d,
                                           const GameSpec& g, const Abf& abf,
                                           double grid_step) {
  g.validate();
  cs.validate(g);
  if (deviators.empty()) throw DomainError("check_gamma_deviation: empty set");
  if (!(grid_step > 0.0))
    throw DomainError("check_gamma_deviation: grid step must be positive");
  const int n = g.num_defenders();
  const int m = g.num_targets();

  double k_d = 0.0;
  std::vector<char> is_dev(n, 0);
  for (int i : deviators) {
    check_defender(i, g);
    is_dev[i] = 1;
    k_d += g.resources[i];
  }
  double spent = 0.0;
  for (double v : x_d) spent += v;
  if (spent > k_d + 1e-9)
    throw DomainError("check_gamma_deviation: x_D exceeds the deviators' pooled "
                      "budget");

  std::vector<double> base = structure_utilities(cs, g, abf);
  std::vector<int> responders;
  for (int i = 0; i < n; ++i)
    if (!is_dev[i]) responders.push_back(i);

  GammaEvidence ev;
  for (int i : deviators) ev.deviator_baselines.push_back(base[i]);

  std::vector<BudgetGrid> grids;
  for (int r : responders) {
    grids.push_back(make_budget_grid(m, grid_step, g.resources[r]));
    enforce_grid_guard(grids.back(), "check_gamma_deviation");
  }

  struct Worst {
    double utility = std::numeric_limits<double>::infinity();
    double gain = std::numeric_limits<double>::infinity();
  };

  // Residual protection 1-x_D as the starting head for the product rule.
  CoverageVector head0(m);
  for (int t = 0; t < m; ++t) head0[t] = 1.0 - std::clamp(x_d[t], 0.0, 1.0);

  // Per-worker scratch: one head buffer per recursion level plus the
  // coverage/utility/weight buffers of the fused evaluation.
  struct Scratch {
    std::vector<CoverageVector> heads;
    CoverageVector c, u, w;
  };
  auto make_scratch = [&]() {
    Scratch s;
    s.heads.assign(grids.size() + 1, CoverageVector(m, 0.0));
    s.c.assign(m, 0.0);
    s.u.assign(m, 0.0);
    s.w.assign(m, 0.0);
    return s;
  };
  auto evaluate = [&](const CoverageVector& head, Scratch& s, Worst& w) {
    for (int t = 0; t < m; ++t) s.c[t] = 1.0 - head[t];
    for (int i : deviators) {
      double util = detail::expected_utility_noalloc(s.c.data(), i, abf, g,
                                                     s.u.data(), s.w.data());
      w.utility = std::min(w.utility, util);
      w.gain = std::min(w.gain, util - base[i]);
    }
  };
  std::function<void(std::size_t, Scratch&, Worst&)> sweep =
      [&](std::size_t level, Scratch& s, Worst& w) {
        if (level == grids.size()) {
          evaluate(s.heads[level], s, w);
          return;
        }
        for_each_point(grids[level], [&](const CoverageVector& y) {
          for (int t = 0; t < m; ++t)
            s.heads[level + 1][t] = s.heads[level][t] * (1.0 - y[t]);
          sweep(level + 1, s, w);
        });
      };

  Worst total;
  if (grids.empty()) {
    Scratch s = make_scratch();
    evaluate(head0, s, total);
  } else {
    // Parallelize over the first responder's grid points.
    std::vector<CoverageVector> first_points;
    for_each_point(grids[0], [&](const CoverageVector& y) {
      first_points.push_back(y);
    });
    std::vector<Worst> partial(first_points.size());
    parallel_chunks(first_points.size(), [&](int, std::size_t lo, std::size_t hi) {
      Scratch s = make_scratch();
      for (std::size_t idx = lo; idx < hi; ++idx) {
        for (int t = 0; t < m; ++t)
          s.heads[1][t] = head0[t] * (1.0 - first_points[idx][t]);
        sweep(1, s, partial[idx]);
      }
    });
    for (const Worst& w : partial) {
      total.utility = std::min(total.utility, w.utility);
      total.gain = std::min(total.gain, w.gain);
    }
  }

  ev.worst_deviator_utility = total.utility;
  ev.min_gain = total.gain;
  ev.confirmed = total.gain > 0.0;
  return ev;
}

/// A deviating coalition's canonical isolated play: the pooled walk toward
/// the full game's min-max level. The pool runs dry on the coalition's
/// least-preferred prefix, leaving its favorite targets open for the attack.
inline CoverageVector default_subcoalition_deviation(
    const std::vector<int>& deviators, const GameSpec& g) {
  if (deviators.empty())
    throw DomainError("default_subcoalition_deviation: empty set");
  GameSpec sub;
  sub.attacker_reward = g.attacker_reward;
  sub.attacker_penalty = g.attacker_penalty;
  for (int i : deviators) {
    check_defender(i, g);
    sub.resources.push_back(g.resources[i]);
    sub.defender_reward.push_back(g.defender_reward[i]);
    sub.defender_penalty.push_back(g.defender_penalty[i]);
  }
  sub.validate();
  double u_bar = min_max_height(g, 1e-11);
  return gc_alloc(u_bar, u_bar, sub).coverage;
}

enum class RevengeMode { none, constructive, grid_noncooperative };

struct DeviationSearch {
  double best_gain = 0.0;
  CoverageVector witness;
  bool found = false;
};

/// Shared deviation-search engine: the maximum gain an actor set can
/// guarantee on a pooled budget grid, under the stated response of everyone
/// else (frozen strategies, the constructive revenge family, or independent
/// grid responses).
inline DeviationSearch grid_best_deviation(const std::vector<int>& actors,
                                           const CoalitionStructure& base,
                                           const GameSpec& g, const Abf& abf,
                                           double grid_step, RevengeMode mode) {
  g.validate();
  base.validate(g);
  DeviationSearch out;
  if (actors.empty()) return out;  // empty actor set gains nothing
  const int m = g.num_targets();
  const int n = g.num_defenders();

  std::vector<char> is_actor(n, 0);
  double k_d = 0.0;
  for (int i : actors) {
    check_defender(i, g);
    is_actor[i] = 1;
    k_d += g.resources[i];
  }
  std::vector<double> baseline = structure_utilities(base, g, abf);

  BudgetGrid grid = make_budget_grid(m, grid_step, k_d);
  enforce_grid_guard(grid, "grid_best_deviation");

  if (mode == RevengeMode::none) {
    // Non-actors keep playing their coalition strategies; actors must form a
    // union of whole coalitions for this to be well defined.
    CoverageVector rest(m, 1.0);
    for (int c = 0; c < base.num_coalitions(); ++c) {
      bool all_in = true, none_in = true;
      for (int i : base.partition[c]) (is_actor[i] ? none_in : all_in) = false;
      if (!all_in && !none_in)
        throw DomainError("grid_best_deviation: actor set splits a coalition");
      if (none_in)
        for (int t = 0; t < m; ++t) rest[t] *= 1.0 - base.strategies[c][t];
    }
    GridBest best = grid_argmax(grid, [&]() {
      CoverageVector scratch(m);
      return [&, scratch](const CoverageVector& x) mutable {
        for (int t = 0; t < m; ++t) scratch[t] = 1.0 - rest[t] * (1.0 - x[t]);
        double min_gain = std::numeric_limits<double>::infinity();
        for (int i : actors)
          min_gain = std::min(min_gain, expected_defender_utility(scratch, i, abf, g) -
                                            baseline[i]);
        return min_gain;
      };
    });
    out.best_gain = best.found ? best.value : 0.0;
    out.witness = best.point;
    out.found = best.found;
    return out;
  }

  if (mode == RevengeMode::constructive) {
    if (static_cast<int>(actors.size()) >= n)
      throw DomainError("grid_best_deviation: constructive revenge needs a "
                        "proper actor subset");
    RevengePlanner planner(base, g, abf);
    GridBest best = grid_argmax(grid, [&]() {
      return [&](const CoverageVector& x_d) {
        RevengeOutcome o = planner.plan(actors, x_d);
        return o.feasible ? o.min_deviator_gain : 1e30;
      };
    });
    out.best_gain = best.found ? best.value : 0.0;
    out.witness = best.point;
    out.found = best.found;
    return out;
  }

  // grid_noncooperative: worst case over independent responder grids.
  GridBest best = grid_argmax(grid, [&]() {
    return [&](const CoverageVector& x_d) {
      GammaEvidence ge = check_gamma_deviation(base, actors, x_d, g, abf, grid_step);
      return ge.min_gain;
    };
  });
  out.best_gain = best.found ? best.value : 0.0;
  out.witness = best.point;
  out.found = best.found;
  return out;
}

}  // namespace mssg
