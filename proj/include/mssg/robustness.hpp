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
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mssg/abf.hpp"
#include "mssg/common.hpp"
#include "mssg/core.hpp"
#include "mssg/equilibrium.hpp"
#include "mssg/game.hpp"
#include "json.hpp"

namespace mssg {

/// How to draw nearby games: sup-norm radius eta, which payoff groups move,
/// and whether the attacker model's scale jitters.
struct PerturbationSpec {
  double eta = 0.0;
  bool perturb_rewards = true;
  bool perturb_penalties = true;
  bool perturb_abf = true;
  std::uint64_t rng_seed = 0;
};

/// Sup-norm distance between two games: the largest payoff entry difference,
/// and a probe-sampled sup-norm estimate of the attacker-model gap over the
/// payoff box.
inline double game_distance(const GameSpec& g1, const Abf& a1, const GameSpec& g2,
                            const Abf& a2, int abf_probe_samples,
                            std::uint64_t rng_seed) {
  if (g1.num_defenders() != g2.num_defenders() ||
      g1.num_targets() != g2.num_targets())
    throw DomainError("game_distance: shape mismatch");
  const int m = g1.num_targets();
  double d = 0.0;
  for (int t = 0; t < m; ++t) {
    d = std::max(d, std::abs(g1.attacker_reward[t] - g2.attacker_reward[t]));
    d = std::max(d, std::abs(g1.attacker_penalty[t] - g2.attacker_penalty[t]));
  }
  for (int i = 0; i < g1.num_defenders(); ++i)
    for (int t = 0; t < m; ++t) {
      d = std::max(d, std::abs(g1.defender_reward[i][t] - g2.defender_reward[i][t]));
      d = std::max(d,
                   std::abs(g1.defender_penalty[i][t] - g2.defender_penalty[i][t]));
    }
  std::mt19937_64 rng(rng_seed);
  std::vector<double> u(m);
  for (int s = 0; s < abf_probe_samples; ++s) {
    for (int t = 0; t < m; ++t) {
      double lo = std::max(0.0, std::min(g1.attacker_penalty[t],
                                         g2.attacker_penalty[t]));
      double hi = std::max(g1.attacker_reward[t], g2.attacker_reward[t]);
      u[t] = std::uniform_real_distribution<double>(lo, hi)(rng);
    }
    AttackDistribution w1 = a1.eval(u);
    AttackDistribution w2 = a2.eval(u);
    for (int t = 0; t < m; ++t) d = std::max(d, std::abs(w1[t] - w2[t]));
  }
  return d;
}

/// Draws an eta-near game: each flagged payoff entry shifts by an independent
/// uniform draw in [-eta, eta], shrinking both shifts of a pair symmetrically
/// whenever they would close the reward-penalty gap. The attacker model only
/// jitters its scale (staying in the certified family), validated by probe
/// sampling to keep the output-distribution gap within eta.
inline std::pair<GameSpec, Abf> perturb_game(const GameSpec& g, const Abf& abf,
                                             const PerturbationSpec& spec) {
  if (!(spec.eta >= 0.0)) throw DomainError("perturb_game: eta must be >= 0");
  if (spec.eta == 0.0) return {g, abf};
  if (!spec.perturb_rewards && !spec.perturb_penalties && !spec.perturb_abf)
    throw DomainError("perturb_game: eta > 0 requires at least one flag");
  std::mt19937_64 rng(spec.rng_seed);
  std::uniform_real_distribution<double> shift(-spec.eta, spec.eta);

  GameSpec out = g;
  auto nudge = [&](double& r, double& p) {
    double dr = shift(rng);
    double dp = shift(rng);
    if (!spec.perturb_rewards) dr = 0.0;
    if (!spec.perturb_penalties) dp = 0.0;
    double gap = r - p;
    if (gap + (dr - dp) <= 0.0) {
      double lambda = 0.9 * gap / (dp - dr);
      dr *= lambda;
      dp *= lambda;
    }
    r += dr;
    p += dp;
  };
  for (int t = 0; t < g.num_targets(); ++t)
    nudge(out.attacker_reward[t], out.attacker_penalty[t]);
  for (int i = 0; i < g.num_defenders(); ++i)
    for (int t = 0; t < g.num_targets(); ++t)
      nudge(out.defender_reward[i][t], out.defender_penalty[i][t]);

  Abf out_abf = abf;
  if (spec.perturb_abf) {
    double direction = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
    double min_scale = std::log(1.0 / abf.epsilon) / abf.delta * (1.0 + 1e-9);
    std::mt19937_64 probe_rng(spec.rng_seed ^ 0x9e3779b97f4a7c15ull);
    const int probes = 128;
    std::vector<std::vector<double>> probe_u(probes,
                                             std::vector<double>(g.num_targets()));
    for (auto& u : probe_u)
      for (int t = 0; t < g.num_targets(); ++t)
        u[t] = std::uniform_real_distribution<double>(
            std::max(0.0, g.attacker_penalty[t]), g.attacker_reward[t])(probe_rng);
    double rho = std::min(0.5, spec.eta);
    for (int it = 0; it < 60; ++it) {
      double candidate = std::max(abf.scale * (1.0 + direction * rho), min_scale);
      Abf trial = Abf::softmax(candidate, abf.delta, abf.epsilon);
      double gap = 0.0;
      for (const auto& u : probe_u) {
        AttackDistribution w1 = abf.eval(u);
        AttackDistribution w2 = trial.eval(u);
        for (std::size_t t = 0; t < w1.size(); ++t)
          gap = std::max(gap, std::abs(w1[t] - w2[t]));
      }
      if (gap <= spec.eta) {
        out_abf = trial;
        break;
      }
      rho *= 0.5;
    }
  }
  out.validate();
  return {out, out_abf};
}

/// Upper estimate of the attacker-model gradient norm over the payoff box
/// inflated by eta: the sampled maximum of the analytic softmax Jacobian
/// Frobenius norm, plus deterministic equal-utility probes (where the norm
/// peaks for two targets), inflated by a 10% margin.
inline double lipschitz_bound(const Abf& abf, const GameSpec& g, double eta,
                              int samples, std::uint64_t rng_seed) {
  if (!(eta >= 0.0)) throw DomainError("lipschitz_bound: eta must be >= 0");
  const int m = g.num_targets();
  std::vector<double> lo(m), hi(m);
  double lo_max = -std::numeric_limits<double>::infinity();
  double hi_min = std::numeric_limits<double>::infinity();
  for (int t = 0; t < m; ++t) {
    lo[t] = std::max(0.0, g.attacker_penalty[t] - eta);
    hi[t] = g.attacker_reward[t] + eta;
    lo_max = std::max(lo_max, lo[t]);
    hi_min = std::min(hi_min, hi[t]);
  }
  double best = 0.0;
  std::vector<double> u(m);
  if (lo_max <= hi_min) {
    for (int q = 0; q <= 4; ++q) {
      double v = lo_max + (hi_min - lo_max) * q / 4.0;
      std::fill(u.begin(), u.end(), v);
      best = std::max(best, softmax_jacobian_frobenius(abf, u));
    }
  }
  std::mt19937_64 rng(rng_seed);
  for (int s = 0; s < samples; ++s) {
    for (int t = 0; t < m; ++t)
      u[t] = std::uniform_real_distribution<double>(lo[t], hi[t])(rng);
    best = std::max(best, softmax_jacobian_frobenius(abf, u));
  }
  return 1.1 * best;
}

/// The utility-stability constant b: nearby games shift any defender's
/// expected utility by at most (b/2) * eta. Uses the sampled Lipschitz bound
/// K of the attacker model: b = 2 max_i (1 + (1 + K sqrt(m)) sum_t r^d_i(t)).
inline double robustness_constant(const GameSpec& g, const Abf& abf, double eta) {
  double K = lipschitz_bound(abf, g, eta, 4096, 0x5eedbeef);
  double m = static_cast<double>(g.num_targets());
  double worst = 0.0;
  for (int i = 0; i < g.num_defenders(); ++i) {
    double sum = 0.0;
    for (int t = 0; t < g.num_targets(); ++t) sum += g.defender_reward[i][t];
    worst = std::max(worst, 1.0 + (1.0 + K * std::sqrt(m)) * sum);
  }
  return 2.0 * worst;
}

enum class SolutionKind { ne, alpha_core };

struct RobustnessSample {
  std::uint64_t seed = 0;
  double distance = 0.0;
  double max_gain = 0.0;
  bool pass = false;
};

struct RobustnessEvidence {
  bool pass = false;
  SolutionKind kind = SolutionKind::ne;
  double eta = 0.0;
  double b = 0.0;
  double threshold = 0.0;  // zeta + b*eta
  double zeta = 0.0;
  double grid_step = 0.0;
  double max_gain = 0.0;   // worst observed deviation gain over all samples
  std::vector<RobustnessSample> samples;
};

inline void to_json(nlohmann::json& j, const RobustnessEvidence& e) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& s : e.samples)
    rows.push_back({{"seed", s.seed},
                    {"distance", s.distance},
                    {"max_gain", s.max_gain},
                    {"pass", s.pass}});
  j = nlohmann::json{{"pass", e.pass},
                     {"kind", e.kind == SolutionKind::ne ? "ne" : "alpha_core"},
                     {"eta", e.eta},
                     {"b", e.b},
                     {"threshold", e.threshold},
                     {"zeta", e.zeta},
                     {"grid_step", e.grid_step},
                     {"max_gain", e.max_gain},
                     {"samples", rows}};
}

inline std::string to_csv(const RobustnessEvidence& e) {
  std::ostringstream os;
  os << "seed,distance,max_gain,pass\n";
  for (const auto& s : e.samples)
    os << s.seed << ',' << s.distance << ',' << s.max_gain << ','
       << (s.pass ? 1 : 0) << '\n';
  return os.str();
}

/// Empirical robustness certificate: draw eta-near games and re-verify the
/// solution in each at the loosened threshold zeta + b*eta. With eta = 0 this
/// reduces exactly to the base verifier.
inline RobustnessEvidence certify_robust(const StrategyProfile& profile,
                                         double zeta, const GameSpec& g,
                                         const Abf& abf, double eta, int samples,
                                         double grid_step,
                                         std::uint64_t rng_seed) {
  if (samples < 1) throw DomainError("certify_robust: samples must be >= 1");
  RobustnessEvidence ev;
  ev.kind = SolutionKind::ne;
  ev.eta = eta;
  ev.zeta = zeta;
  ev.grid_step = grid_step;
  ev.b = eta > 0.0 ? robustness_constant(g, abf, eta) : 0.0;
  ev.threshold = zeta + ev.b * eta;
  ev.pass = true;
  ev.max_gain = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    std::uint64_t seed = rng_seed + static_cast<std::uint64_t>(s);
    PerturbationSpec ps{eta, true, true, true, seed};
    auto [gp, ap] = perturb_game(g, abf, ps);
    DeviationEvidence de = verify_ne(profile, ev.threshold, gp, ap, grid_step);
    RobustnessSample row;
    row.seed = seed;
    row.distance = eta > 0.0 ? game_distance(g, abf, gp, ap, 64, seed ^ 0x7f4a) : 0.0;
    row.max_gain = de.max_gain;
    row.pass = de.pass;
    ev.max_gain = std::max(ev.max_gain, de.max_gain);
    ev.pass = ev.pass && de.pass;
    ev.samples.push_back(row);
  }
  return ev;
}

inline RobustnessEvidence certify_robust(const CoalitionStructure& cs,
                                         double zeta, const GameSpec& g,
                                         const Abf& abf, double eta, int samples,
                                         double grid_step,
                                         std::uint64_t rng_seed) {
  if (samples < 1) throw DomainError("certify_robust: samples must be >= 1");
  RobustnessEvidence ev;
  ev.kind = SolutionKind::alpha_core;
  ev.eta = eta;
  ev.zeta = zeta;
  ev.grid_step = grid_step;
  ev.b = eta > 0.0 ? robustness_constant(g, abf, eta) : 0.0;
  ev.threshold = zeta + ev.b * eta;
  ev.pass = true;
  ev.max_gain = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    std::uint64_t seed = rng_seed + static_cast<std::uint64_t>(s);
    PerturbationSpec ps{eta, true, true, true, seed};
    auto [gp, ap] = perturb_game(g, abf, ps);
    AlphaCoreEvidence ae = verify_alpha_core(cs, ev.threshold, gp, ap, grid_step);
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& sub : ae.subsets)
      worst = std::max(worst, sub.max_guaranteed_gain);
    RobustnessSample row;
    row.seed = seed;
    row.distance = eta > 0.0 ? game_distance(g, abf, gp, ap, 64, seed ^ 0x7f4a) : 0.0;
    row.max_gain = worst;
    row.pass = ae.pass;
    ev.max_gain = std::max(ev.max_gain, worst);
    ev.pass = ev.pass && ae.pass;
    ev.samples.push_back(row);
  }
  return ev;
}

}  // namespace mssg
