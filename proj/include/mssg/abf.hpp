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
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "mssg/common.hpp"
#include "json.hpp"

namespace mssg {

/// Attack probabilities over targets; entries in [0,1], summing to 1.
using AttackDistribution = std::vector<double>;

inline double logaddexp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

/// Smallest integer scale n with exp(-n*delta) < epsilon, i.e. the least
/// integer strictly greater than ln(1/epsilon)/delta.
inline int derive_scale(double delta, double epsilon) {
  if (!(delta > 0.0)) throw DomainError("derive_scale: delta must be positive");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw DomainError("derive_scale: epsilon must lie in (0,1)");
  double x = std::log(1.0 / epsilon) / delta;
  if (x > 1e9) throw DomainError("derive_scale: required scale exceeds 1e9");
  return static_cast<int>(std::floor(x + 1e-12)) + 1;
}

/// Probabilistic attacker model: a scaled softmax over attacker utilities,
/// carrying the (delta, epsilon) pair it is certified for. Any target whose
/// utility trails the best by more than delta is attacked with probability
/// below epsilon.
struct Abf {
  double scale = 1.0;
  double delta = 0.0;
  double epsilon = 0.0;

  static Abf softmax(double scale, double delta, double epsilon) {
    if (!(scale > 0.0)) throw DomainError("Abf: scale must be positive");
    if (!(delta > 0.0)) throw DomainError("Abf: delta must be positive");
    if (!(epsilon > 0.0 && epsilon < 1.0))
      throw DomainError("Abf: epsilon must lie in (0,1)");
    if (!(std::exp(-scale * delta) < epsilon))
      throw DomainError(
          "Abf: certificate invalid, exp(-scale*delta) must be below epsilon");
    return Abf{scale, delta, epsilon};
  }

  /// Softmax with the minimal integer scale certified for (delta, epsilon).
  static Abf for_parameters(double delta, double epsilon) {
    return softmax(static_cast<double>(derive_scale(delta, epsilon)), delta,
                   epsilon);
  }

  /// Attack distribution for an attacker utility vector. Stabilized by
  /// max-subtraction; scale*u can exceed the bare exp range.
  AttackDistribution eval(const std::vector<double>& u) const {
    if (u.empty()) throw DomainError("Abf::eval: empty utility vector");
    double hi = -std::numeric_limits<double>::infinity();
    for (double v : u) {
      if (!std::isfinite(v)) throw DomainError("Abf::eval: non-finite utility");
      hi = std::max(hi, scale * v);
    }
    AttackDistribution w(u.size());
    double z = 0.0;
    for (std::size_t t = 0; t < u.size(); ++t) {
      w[t] = std::exp(scale * u[t] - hi);
      z += w[t];
    }
    for (double& v : w) v /= z;
    return w;
  }
};

inline void to_json(nlohmann::json& j, const Abf& a) {
  j = nlohmann::json{
      {"kind", "softmax"}, {"scale", a.scale}, {"delta", a.delta},
      {"epsilon", a.epsilon}};
}

inline void from_json(const nlohmann::json& j, Abf& a) {
  if (j.at("kind").get<std::string>() != "softmax")
    throw DomainError("Abf: unknown kind, only \"softmax\" is supported");
  a = Abf::softmax(j.at("scale").get<double>(), j.at("delta").get<double>(),
                   j.at("epsilon").get<double>());
}

inline void validate_distribution(const AttackDistribution& p,
                                  double tol = kDefaultTol) {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= -1e-12))
      throw DomainError("distribution: negative probability entry");
    sum += v;
  }
  if (!(std::abs(sum - 1.0) <= tol))
    throw DomainError("distribution: probabilities do not sum to 1");
}

/// Behavior-axiom check results (simplex output, coordinate monotonicity,
/// conditional independence, (delta,epsilon) sensitivity), with the worst
/// observed violation magnitude per axiom.
struct AxiomReport {
  bool simplex_ok = false;
  bool monotone_ok = false;
  bool independence_ok = false;
  bool sensitivity_ok = false;
  double worst_simplex_gap = 0.0;       // max |sum - 1| over trials
  double worst_monotone_step = 0.0;     // min probability increase observed
  double worst_independence_gap = 0.0;  // max conditional-ratio drift
  double worst_sensitivity_prob = 0.0;  // max prob of a delta-dominated target
  int trials = 0;

  bool pass() const {
    return simplex_ok && monotone_ok && independence_ok && sensitivity_ok;
  }
};

/// Runs the axiom checks against an arbitrary evaluator mapping utility
/// vectors to attack distributions, so user-supplied behavior models can be
/// screened with the same machinery as the built-in softmax.
template <class F>
AxiomReport check_axioms_fn(F&& omega, int m, int trials, std::uint64_t rng_seed,
                            double delta, double epsilon) {
  if (m < 2) throw DomainError("check_axioms: need at least 2 targets");
  if (trials < 1) throw DomainError("check_axioms: need at least 1 trial");
  std::mt19937_64 rng(rng_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> coord(0, m - 1);

  AxiomReport rep;
  rep.trials = trials;
  rep.worst_monotone_step = std::numeric_limits<double>::infinity();

  bool simplex_ok = true, monotone_ok = true, independence_ok = true,
       sensitivity_ok = true;
  std::vector<double> u(m), u2(m);
  for (int trial = 0; trial < trials; ++trial) {
    for (int t = 0; t < m; ++t) u[t] = unit(rng);

    // Axiom 1: output is a probability distribution.
    std::vector<double> w = omega(u);
    double sum = 0.0;
    for (double v : w) {
      sum += v;
      if (v < -1e-12 || v > 1.0 + 1e-12) simplex_ok = false;
    }
    rep.worst_simplex_gap = std::max(rep.worst_simplex_gap, std::abs(sum - 1.0));
    if (std::abs(sum - 1.0) > 1e-12) simplex_ok = false;

    // Axiom 2: strictly monotone in each coordinate.
    int t0 = coord(rng);
    u2 = u;
    u2[t0] += 0.01;
    std::vector<double> w2 = omega(u2);
    double step = w2[t0] - w[t0];
    rep.worst_monotone_step = std::min(rep.worst_monotone_step, step);
    if (!(step > 0.0)) monotone_ok = false;

    // Axiom 3: conditional ratios inside S ignore utilities outside S.
    std::vector<int> in_s;
    for (int t = 0; t < m; ++t)
      if (unit(rng) < 0.5) in_s.push_back(t);
    if (in_s.empty()) in_s.push_back(coord(rng));
    if (static_cast<int>(in_s.size()) == m) in_s.pop_back();
    int ts = in_s[static_cast<std::size_t>(unit(rng) * in_s.size()) % in_s.size()];
    auto cond_ratio = [&](const std::vector<double>& dist) {
      double mass = 0.0;
      for (int t : in_s) mass += dist[t];
      return dist[ts] / mass;
    };
    double before = cond_ratio(w);
    u2 = u;
    for (int t = 0; t < m; ++t) {
      bool outside = true;
      for (int s : in_s)
        if (s == t) outside = false;
      if (outside) u2[t] = unit(rng);
    }
    double after = cond_ratio(omega(u2));
    double drift = std::abs(after - before);
    rep.worst_independence_gap = std::max(rep.worst_independence_gap, drift);
    if (drift > 1e-9) independence_ok = false;

    // (delta, epsilon) sensitivity on an adversarial vector: one coordinate
    // sits delta above the rest.
    int top = coord(rng);
    double base = 0.2 + 0.6 * unit(rng);
    for (int t = 0; t < m; ++t) u2[t] = base - 0.3 * unit(rng);
    u2[top] = base + delta * (1.0 + 1e-9);
    std::vector<double> ws = omega(u2);
    for (int t = 0; t < m; ++t) {
      if (t == top) continue;
      rep.worst_sensitivity_prob = std::max(rep.worst_sensitivity_prob, ws[t]);
      if (!(ws[t] < epsilon)) sensitivity_ok = false;
    }
  }
  rep.simplex_ok = simplex_ok;
  rep.monotone_ok = monotone_ok;
  rep.independence_ok = independence_ok;
  rep.sensitivity_ok = sensitivity_ok;
  return rep;
}

inline AxiomReport check_axioms(const Abf& abf, int m, int trials,
                                std::uint64_t rng_seed) {
  return check_axioms_fn([&](const std::vector<double>& u) { return abf.eval(u); },
                         m, trials, rng_seed, abf.delta, abf.epsilon);
}

/// Frobenius norm of the softmax Jacobian at u; entries scale*w_t(d_ts - w_s).
inline double softmax_jacobian_frobenius(const Abf& abf,
                                         const std::vector<double>& u) {
  AttackDistribution w = abf.eval(u);
  const int m = static_cast<int>(w.size());
  double f2 = 0.0;
  for (int t = 0; t < m; ++t)
    for (int s = 0; s < m; ++s) {
      double e = abf.scale * w[t] * ((t == s ? 1.0 : 0.0) - w[s]);
      f2 += e * e;
    }
  return std::sqrt(f2);
}

/// Builds a utility vector u with eval(abf, u) close to a requested attack
/// distribution p, keeping every u_t inside [u_base, u_base + 2m*delta).
///
/// Targets are placed in ascending order of p. The first positive-mass target
/// sits at u_base + m*delta; each later one is bisected so its conditional
/// mass among the targets placed so far matches p's conditional. The search
/// bracket is [prev - delta, prev + delta], extended upward when the requested
/// conditional exceeds what +delta can reach, but never far enough for any
/// later coordinate to leave the band. Zero-mass targets go to u_base itself.
/// The sup-norm error of the round trip is at most (m^2)*epsilon.
inline std::vector<double> induce_distribution(const AttackDistribution& p,
                                               double u_base, const Abf& abf) {
  validate_distribution(p);
  const int m = static_cast<int>(p.size());
  const double delta = abf.delta;
  const double n = abf.scale;
  const double cap = u_base + 2.0 * m * delta;
  const double guard = std::max(1e-12, 1e-7 * delta);

  std::vector<int> order(m);
  for (int t = 0; t < m; ++t) order[t] = t;
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return p[a] < p[b]; });

  std::vector<double> u(m, u_base);
  std::vector<int> live;
  for (int t : order)
    if (p[t] > 1e-15) live.push_back(t);
  if (live.empty()) throw DomainError("induce_distribution: zero distribution");

  double lse = 0.0;      // log sum of exp(n*u_j) over placed targets
  double cum = 0.0;      // cumulative mass of placed targets
  double prev = 0.0;
  for (std::size_t k = 0; k < live.size(); ++k) {
    int t = live[k];
    if (k == 0) {
      u[t] = u_base + m * delta;
      lse = n * u[t];
      cum = p[t];
      prev = u[t];
      continue;
    }
    double ratio_goal = p[t] / (cum + p[t]);
    auto ratio_at = [&](double v) {
      double s = n * v;
      double hi = std::max(lse, s);
      return std::exp(s - hi) / (std::exp(lse - hi) + std::exp(s - hi));
    };
    double lo = prev - delta;
    double hi = prev + delta;
    std::size_t remaining = live.size() - 1 - k;
    double hi_cap = cap - static_cast<double>(remaining) * delta - guard;
    if (ratio_at(hi) < ratio_goal) hi = hi_cap;
    for (int it = 0; it < 80; ++it) {
      double mid = 0.5 * (lo + hi);
      if (ratio_at(mid) < ratio_goal)
        lo = mid;
      else
        hi = mid;
    }
    double v = 0.5 * (lo + hi);
    u[t] = v;
    lse = logaddexp(lse, n * v);
    cum += p[t];
    prev = v;
  }
  return u;
}

}  // namespace mssg
