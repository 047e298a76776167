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
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "mssg/abf.hpp"
#include "mssg/common.hpp"
#include "json.hpp"

namespace mssg {

/// Per-target protection probabilities, entries in [0,1].
using CoverageVector = std::vector<double>;

/// A security game: n defenders with fractional resource budgets protect m
/// targets against a single attacker. Rewards strictly exceed penalties for
/// every player and target.
struct GameSpec {
  std::vector<double> resources;                     // k_i, one per defender
  std::vector<double> attacker_reward;               // r^a(t)
  std::vector<double> attacker_penalty;              // p^a(t)
  std::vector<std::vector<double>> defender_reward;  // r^d_i(t), [i][t]
  std::vector<std::vector<double>> defender_penalty; // p^d_i(t), [i][t]

  int num_defenders() const { return static_cast<int>(resources.size()); }
  int num_targets() const { return static_cast<int>(attacker_reward.size()); }

  double total_resources() const {
    return std::accumulate(resources.begin(), resources.end(), 0.0);
  }

  double attacker_gap_min() const {  // b = min_t (r^a - p^a)
    double b = std::numeric_limits<double>::infinity();
    for (int t = 0; t < num_targets(); ++t)
      b = std::min(b, attacker_reward[t] - attacker_penalty[t]);
    return b;
  }

  double attacker_gap_max() const {  // a = max_t (r^a - p^a)
    double a = 0.0;
    for (int t = 0; t < num_targets(); ++t)
      a = std::max(a, attacker_reward[t] - attacker_penalty[t]);
    return a;
  }

  double max_attacker_reward() const {
    return *std::max_element(attacker_reward.begin(), attacker_reward.end());
  }

  double min_attacker_penalty() const {
    return *std::min_element(attacker_penalty.begin(), attacker_penalty.end());
  }

  double max_attacker_penalty() const {
    return *std::max_element(attacker_penalty.begin(), attacker_penalty.end());
  }

  /// Throws DomainError naming the first violated structural constraint.
  void validate() const {
    const int n = num_defenders();
    const int m = num_targets();
    if (n < 1) throw DomainError("game: needs at least one defender");
    if (m < 2) throw DomainError("game: needs at least two targets");
    if (static_cast<int>(attacker_penalty.size()) != m)
      throw DomainError("game: attacker penalty length mismatch");
    if (static_cast<int>(defender_reward.size()) != n ||
        static_cast<int>(defender_penalty.size()) != n)
      throw DomainError("game: defender payoff row count mismatch");
    for (int i = 0; i < n; ++i) {
      if (!(resources[i] >= 0.0) || !std::isfinite(resources[i]))
        throw DomainError("game: resources must be non-negative (defender " +
                          std::to_string(i) + ")");
      if (static_cast<int>(defender_reward[i].size()) != m ||
          static_cast<int>(defender_penalty[i].size()) != m)
        throw DomainError("game: defender payoff length mismatch (defender " +
                          std::to_string(i) + ")");
    }
    for (int t = 0; t < m; ++t) {
      if (!std::isfinite(attacker_reward[t]) || !std::isfinite(attacker_penalty[t]))
        throw DomainError("game: non-finite attacker payoff (target " +
                          std::to_string(t) + ")");
      if (!(attacker_reward[t] > attacker_penalty[t]))
        throw DomainError(
            "game: attacker reward must exceed attacker penalty (target " +
            std::to_string(t) + ")");
      for (int i = 0; i < n; ++i) {
        if (!std::isfinite(defender_reward[i][t]) ||
            !std::isfinite(defender_penalty[i][t]))
          throw DomainError("game: non-finite defender payoff (defender " +
                            std::to_string(i) + ", target " + std::to_string(t) +
                            ")");
        if (!(defender_reward[i][t] >= defender_penalty[i][t]))
          throw DomainError(
              "game: defender reward must be at least defender penalty "
              "(defender " +
              std::to_string(i) + ", target " + std::to_string(t) + ")");
      }
    }
  }
};

inline void to_json(nlohmann::json& j, const GameSpec& g) {
  nlohmann::json defenders = nlohmann::json::array();
  for (int i = 0; i < g.num_defenders(); ++i)
    defenders.push_back({{"resources", g.resources[i]},
                         {"reward", g.defender_reward[i]},
                         {"penalty", g.defender_penalty[i]}});
  j = nlohmann::json{
      {"defenders", defenders},
      {"attacker",
       {{"reward", g.attacker_reward}, {"penalty", g.attacker_penalty}}}};
}

inline void from_json(const nlohmann::json& j, GameSpec& g) {
  g = GameSpec{};
  const auto& attacker = j.at("attacker");
  attacker.at("reward").get_to(g.attacker_reward);
  attacker.at("penalty").get_to(g.attacker_penalty);
  for (const auto& d : j.at("defenders")) {
    g.resources.push_back(d.at("resources").get<double>());
    g.defender_reward.push_back(d.at("reward").get<std::vector<double>>());
    g.defender_penalty.push_back(d.at("penalty").get<std::vector<double>>());
  }
  g.validate();
}

/// One coverage vector per player (defender or coalition) plus the matching
/// resource budgets.
struct StrategyProfile {
  std::vector<CoverageVector> allocations;
  std::vector<double> budgets;

  int num_players() const { return static_cast<int>(allocations.size()); }

  void validate() const {
    if (allocations.size() != budgets.size())
      throw DomainError("profile: allocation/budget count mismatch");
    for (int i = 0; i < num_players(); ++i) {
      double spent = 0.0;
      for (double x : allocations[i]) {
        if (!(x >= -1e-12) || !(x <= 1.0 + 1e-12))
          throw DomainError("profile: coverage entry outside [0,1] (player " +
                            std::to_string(i) + ")");
        spent += x;
      }
      if (spent > budgets[i] + 1e-9)
        throw DomainError("profile: allocation exceeds budget (player " +
                          std::to_string(i) + ")");
    }
  }
};

inline void to_json(nlohmann::json& j, const StrategyProfile& x) {
  j = nlohmann::json{{"allocations", x.allocations}, {"budgets", x.budgets}};
}

inline void from_json(const nlohmann::json& j, StrategyProfile& x) {
  j.at("allocations").get_to(x.allocations);
  j.at("budgets").get_to(x.budgets);
  x.validate();
}

inline void check_target(int t, const GameSpec& g) {
  if (t < 0 || t >= g.num_targets())
    throw std::out_of_range("target index out of range");
}

inline void check_defender(int i, const GameSpec& g) {
  if (i < 0 || i >= g.num_defenders())
    throw std::out_of_range("defender index out of range");
}

/// Attacker utility of an attack on t: (1-c_t) r^a(t) + c_t p^a(t).
inline double attacker_utility(double c_t, int t, const GameSpec& g) {
  check_target(t, g);
  return (1.0 - c_t) * g.attacker_reward[t] + c_t * g.attacker_penalty[t];
}

inline double attacker_utility(const CoverageVector& c, int t, const GameSpec& g) {
  check_target(t, g);
  return attacker_utility(c.at(t), t, g);
}

inline std::vector<double> attacker_utilities(const CoverageVector& c,
                                              const GameSpec& g) {
  std::vector<double> u(g.num_targets());
  for (int t = 0; t < g.num_targets(); ++t) u[t] = attacker_utility(c[t], t, g);
  return u;
}

/// Defender i's utility when t is attacked: c_t r^d_i(t) + (1-c_t) p^d_i(t).
inline double defender_target_utility(double c_t, int t, int i, const GameSpec& g) {
  check_target(t, g);
  check_defender(i, g);
  return c_t * g.defender_reward[i][t] + (1.0 - c_t) * g.defender_penalty[i][t];
}

inline double defender_target_utility(const CoverageVector& c, int t, int i,
                                      const GameSpec& g) {
  return defender_target_utility(c.at(t), t, i, g);
}

enum class CombineMode { independent, additive };

/// Overall coverage induced by the players' vectors: uncoordinated players
/// protect independently (product rule), a pooled coalition adds its members'
/// probabilities, clamped at 1.
inline CoverageVector combine_coverage(const StrategyProfile& x, CombineMode mode) {
  x.validate();
  if (x.allocations.empty()) throw DomainError("combine_coverage: empty profile");
  std::size_t m = x.allocations.front().size();
  CoverageVector c(m, 0.0);
  for (const auto& xi : x.allocations) {
    if (xi.size() != m) throw DomainError("combine_coverage: length mismatch");
    for (std::size_t t = 0; t < m; ++t) {
      if (mode == CombineMode::independent)
        c[t] = 1.0 - (1.0 - c[t]) * (1.0 - xi[t]);
      else
        c[t] = std::min(1.0, c[t] + xi[t]);
    }
  }
  for (double& v : c) v = std::clamp(v, 0.0, 1.0);
  return c;
}

namespace detail {

// Allocation-free expected utility for hot enumeration loops. Caller supplies
// two scratch buffers of length m.
inline double expected_utility_noalloc(const double* c, int i, const Abf& abf,
                                       const GameSpec& g, double* u, double* w) {
  const int m = g.num_targets();
  double hi = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < m; ++t) {
    u[t] = (1.0 - c[t]) * g.attacker_reward[t] + c[t] * g.attacker_penalty[t];
    hi = std::max(hi, abf.scale * u[t]);
  }
  double z = 0.0;
  for (int t = 0; t < m; ++t) {
    w[t] = std::exp(abf.scale * u[t] - hi);
    z += w[t];
  }
  double util = 0.0;
  for (int t = 0; t < m; ++t)
    util += (c[t] * g.defender_reward[i][t] +
             (1.0 - c[t]) * g.defender_penalty[i][t]) *
            w[t];
  return util / z;
}

}  // namespace detail

/// Expected utility of defender i when the attacker responds to the coverage
/// through the behavior function.
inline double expected_defender_utility(const CoverageVector& c, int i,
                                        const Abf& abf, const GameSpec& g) {
  check_defender(i, g);
  AttackDistribution w = abf.eval(attacker_utilities(c, g));
  double u = 0.0;
  for (int t = 0; t < g.num_targets(); ++t)
    u += defender_target_utility(c[t], t, i, g) * w[t];
  return u;
}

/// Best attacker utility over all targets.
inline double height(const CoverageVector& c, const GameSpec& g) {
  double h = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < g.num_targets(); ++t)
    h = std::max(h, attacker_utility(c[t], t, g));
  return h;
}

/// Coverage that holds every target's attacker utility at u. Targets whose
/// reward is already at or below u stay uncovered; targets whose penalty
/// exceeds u are clamped to full coverage (their utility floors at p^a(t)).
inline CoverageVector level_coverage(double u, const GameSpec& g) {
  CoverageVector c(g.num_targets(), 0.0);
  for (int t = 0; t < g.num_targets(); ++t) {
    if (u >= g.attacker_reward[t]) {
      c[t] = 0.0;
    } else {
      c[t] = std::min(1.0, (g.attacker_reward[t] - u) /
                               (g.attacker_reward[t] - g.attacker_penalty[t]));
    }
  }
  return c;
}

/// Pooled level-coverage demand at u.
inline double level_demand(double u, const GameSpec& g) {
  CoverageVector c = level_coverage(u, g);
  return std::accumulate(c.begin(), c.end(), 0.0);
}

/// Mini-max height: the smallest u whose level coverage fits in the pooled
/// budget K, found by binary search to within tol.
inline double min_max_height(const GameSpec& g, double tol = kDefaultTol) {
  if (!(tol > 0.0)) throw DomainError("min_max_height: tol must be positive");
  double K = g.total_resources();
  double lo = g.min_attacker_penalty();
  double hi = g.max_attacker_reward();
  if (level_demand(hi, g) > K) return hi;  // K == 0 and nothing coverable
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    double mid = 0.5 * (lo + hi);
    double demand = level_demand(mid, g);
    if (std::abs(demand - K) <= 1e-15 * std::max(1.0, K)) return mid;
    if (demand > K)
      lo = mid;
    else
      hi = mid;
  }
  return hi;
}

/// A defender's target ranking, ascending in the utility the defender draws
/// from an attack at the inducing level coverage. Ties break on target index.
struct PreferenceOrder {
  std::vector<int> order;
  double level = 0.0;  // the inducing utility u
};

inline PreferenceOrder preference_order(int i, double u, const GameSpec& g) {
  check_defender(i, g);
  CoverageVector c = level_coverage(u, g);
  PreferenceOrder pref;
  pref.level = u;
  pref.order.resize(g.num_targets());
  std::iota(pref.order.begin(), pref.order.end(), 0);
  std::stable_sort(pref.order.begin(), pref.order.end(), [&](int a, int b) {
    return defender_target_utility(c[a], a, i, g) <
           defender_target_utility(c[b], b, i, g);
  });
  return pref;
}

/// True when some pooled-feasible coverage keeps a target covered at least
/// 1-alpha while it is still attacked with probability >= epsilon. The probe
/// fixes c_t = min(1, 1-alpha) and water-fills the remaining budget onto the
/// other targets, which maximizes t's attack probability under the axioms.
inline bool check_saturation(const GameSpec& g, const Abf& abf, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw DomainError("check_saturation: alpha must lie in (0,1)");
  const int m = g.num_targets();
  const double K = g.total_resources();
  for (int t = 0; t < m; ++t) {
    double c_t = std::min(1.0, 1.0 - alpha);
    double rest = K - c_t;
    if (rest < 0.0) continue;
    // Lowest common utility the other targets can be pushed to with `rest`.
    double lo = g.min_attacker_penalty();
    double hi = g.max_attacker_reward();
    auto rest_demand = [&](double u) {
      CoverageVector c = level_coverage(u, g);
      double d = 0.0;
      for (int s = 0; s < m; ++s)
        if (s != t) d += c[s];
      return d;
    };
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
      double mid = 0.5 * (lo + hi);
      if (rest_demand(mid) > rest)
        lo = mid;
      else
        hi = mid;
    }
    CoverageVector c = level_coverage(hi, g);
    c[t] = c_t;
    AttackDistribution w = abf.eval(attacker_utilities(c, g));
    if (w[t] >= abf.epsilon) return true;
  }
  return false;
}

}  // namespace mssg
