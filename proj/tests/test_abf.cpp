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

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "mssg/abf.hpp"

using Catch::Approx;
using namespace mssg;

TEST_CASE("derive_scale picks the least integer strictly above ln(1/eps)/delta") {
  CHECK(derive_scale(0.01, 0.1) == 231);
  CHECK(derive_scale(1.0, 1.0 / std::exp(1.0)) == 2);
  CHECK(derive_scale((7.0 - 3.0 * std::sqrt(5.0)) / 12.0, 1.0 / 15.0) == 112);
  CHECK_THROWS_AS(derive_scale(0.0, 0.1), DomainError);
  CHECK_THROWS_AS(derive_scale(0.01, 0.0), DomainError);
  CHECK_THROWS_AS(derive_scale(0.01, 1.0), DomainError);
}

TEST_CASE("softmax certificate is enforced") {
  CHECK_NOTHROW(Abf::softmax(250.0, 0.01, 0.1));
  // exp(-100*0.01) = e^-1 > 0.1 violates the sensitivity bound
  CHECK_THROWS_AS(Abf::softmax(100.0, 0.01, 0.1), DomainError);
  CHECK_THROWS_AS(Abf::softmax(-1.0, 0.01, 0.1), DomainError);
}

TEST_CASE("eval: symmetry, a frozen logit gap, and the point-mass limit") {
  Abf abf = Abf::softmax(250.0, 0.01, 0.1);

  AttackDistribution w = abf.eval({0.5, 0.5});
  CHECK(w[0] == Approx(0.5).margin(1e-15));
  CHECK(w[1] == Approx(0.5).margin(1e-15));

  // gap 0.02 at scale 250 is 5 logits: 1/(1+e^-5)
  w = abf.eval({0.51, 0.49});
  CHECK(w[0] == Approx(0.9933071490757153).margin(1e-12));

  Abf sharp = Abf::softmax(1e4, 0.01, 0.1);
  w = sharp.eval({1.0, 0.0, 0.0, 0.0});
  CHECK(w[0] >= 1.0 - 0.1);

  // a single target always receives the whole mass
  w = abf.eval({0.37});
  CHECK(w[0] == Approx(1.0));

  CHECK_THROWS_AS(abf.eval({0.1, std::nan("")}), DomainError);
  CHECK_THROWS_AS(abf.eval({}), DomainError);
}

TEST_CASE("eval is invariant to common shifts and handles large scale inputs") {
  Abf abf = Abf::softmax(250.0, 0.01, 0.1);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> u(4), v(4);
    double shift = 10.0 * unit(rng) - 5.0;
    for (int t = 0; t < 4; ++t) {
      u[t] = unit(rng);
      v[t] = u[t] + shift;
    }
    AttackDistribution a = abf.eval(u);
    AttackDistribution b = abf.eval(v);
    for (int t = 0; t < 4; ++t) CHECK(a[t] == Approx(b[t]).margin(1e-12));
  }
}

TEST_CASE("analytic Jacobian matches central finite differences") {
  Abf abf = Abf::softmax(5.0, 0.1, 0.7);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double h = 1e-6;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> u(3);
    for (double& x : u) x = unit(rng);
    AttackDistribution w = abf.eval(u);
    for (int t = 0; t < 3; ++t)
      for (int s = 0; s < 3; ++s) {
        std::vector<double> up = u, dn = u;
        up[s] += h;
        dn[s] -= h;
        double numeric = (abf.eval(up)[t] - abf.eval(dn)[t]) / (2 * h);
        double analytic = abf.scale * w[t] * ((t == s ? 1.0 : 0.0) - w[s]);
        CHECK(numeric == Approx(analytic).margin(1e-6));
      }
  }
}

TEST_CASE("axiom checks pass for softmax across scales and sizes") {
  std::vector<Abf> family = {Abf::softmax(1.0, 1.0, 0.5),
                             Abf::softmax(231.0, 0.01, 0.1),
                             Abf::softmax(250.0, 0.01, 0.1)};
  for (const Abf& abf : family)
    for (int m = 2; m <= 6; ++m) {
      AxiomReport rep = check_axioms(abf, m, 200, 1234 + m);
      INFO("scale=" << abf.scale << " m=" << m);
      CHECK(rep.simplex_ok);
      CHECK(rep.monotone_ok);
      CHECK(rep.independence_ok);
      CHECK(rep.sensitivity_ok);
      CHECK(rep.worst_simplex_gap <= 1e-12);
      CHECK(rep.worst_sensitivity_prob < abf.epsilon);
    }
}

TEST_CASE("axiom checks flag a broken (unnormalized) evaluator") {
  auto broken = [](const std::vector<double>& u) {
    std::vector<double> w(u.size());
    for (std::size_t t = 0; t < u.size(); ++t) w[t] = std::exp(u[t]);
    return w;
  };
  AxiomReport rep = check_axioms_fn(broken, 3, 50, 99, 0.5, 0.3);
  CHECK_FALSE(rep.simplex_ok);
  CHECK_FALSE(rep.pass());
}

TEST_CASE("induce_distribution: uniform target is exact") {
  Abf abf = Abf::softmax(231.0, 0.01, 0.1);
  for (int m : {2, 3, 5}) {
    AttackDistribution p(m, 1.0 / m);
    std::vector<double> u = induce_distribution(p, 0.3, abf);
    for (double v : u) CHECK(v == Approx(0.3 + m * abf.delta).margin(1e-6));
  }
}

TEST_CASE("induce_distribution: two-point logit gap inversion") {
  Abf abf = Abf::softmax(250.0, 0.01, 0.1);
  double p1 = 1.0 / (1.0 + std::exp(-5.0));
  AttackDistribution p = {p1, 1.0 - p1};
  std::vector<double> u = induce_distribution(p, 0.5, abf);
  // the exact inversion needs a 0.02 utility gap (5 logits at scale 250)
  CHECK(u[0] - u[1] == Approx(std::log(p[0] / p[1]) / 250.0).margin(1e-4));
  AttackDistribution back = abf.eval(u);
  CHECK(std::abs(back[0] - p[0]) <= 1e-4);
}

TEST_CASE("induce_distribution: zero-mass targets pin to the band floor") {
  Abf abf = Abf::softmax(231.0, 0.01, 0.1);
  AttackDistribution p = {0.0, 0.3, 0.7};
  std::vector<double> u = induce_distribution(p, 1.0, abf);
  CHECK(u[0] == Approx(1.0));
  CHECK(u[1] >= 1.0);
  CHECK(u[2] < 1.0 + 2 * 3 * abf.delta);
  AttackDistribution back = abf.eval(u);
  CHECK(back[0] < abf.epsilon);
}

TEST_CASE("induce_distribution round trip stays inside the stated bounds") {
  Abf abf = Abf::softmax(231.0, 0.01, 0.1);
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int m : {2, 3, 4, 6}) {
    for (int trial = 0; trial < 50; ++trial) {
      AttackDistribution p(m);
      double sum = 0.0;
      for (double& v : p) {
        v = -std::log(unit(rng));
        sum += v;
      }
      for (double& v : p) v /= sum;
      double u_base = unit(rng);
      std::vector<double> u = induce_distribution(p, u_base, abf);
      for (double v : u) {
        CHECK(v >= u_base);
        CHECK(v < u_base + 2.0 * m * abf.delta);
      }
      AttackDistribution back = abf.eval(u);
      double gap = 0.0;
      for (int t = 0; t < m; ++t) gap = std::max(gap, std::abs(back[t] - p[t]));
      CHECK(gap <= m * m * abf.epsilon);
    }
  }
  CHECK_THROWS_AS(
      induce_distribution(AttackDistribution{0.4, 0.4}, 0.0, abf),
      DomainError);
}
