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

#include "mssg/oracle.hpp"
#include "mssg/robustness.hpp"

using Catch::Approx;
using namespace mssg;

TEST_CASE("game distance: identity, a single shifted entry, and scale jitter") {
  ExampleGame ex = example(ExampleId::worked_robust);
  CHECK(game_distance(ex.game, *ex.abf, ex.game, *ex.abf, 32, 1) == 0.0);

  GameSpec shifted = ex.game;
  shifted.attacker_reward[1] += 0.3;
  CHECK(game_distance(ex.game, *ex.abf, shifted, *ex.abf, 32, 1) ==
        Approx(0.3));

  Abf other = Abf::softmax(251.0, 0.01, 0.1);
  CHECK(game_distance(ex.game, *ex.abf, ex.game, other, 256, 1) > 0.0);

  GameSpec small = ex.game;
  small.attacker_reward.pop_back();
  small.attacker_penalty.pop_back();
  small.defender_reward[0].pop_back();
  small.defender_penalty[0].pop_back();
  CHECK_THROWS_AS(game_distance(ex.game, *ex.abf, small, *ex.abf, 8, 1),
                  DomainError);
}

TEST_CASE("perturbation: zero radius is the identity, draws stay eta-near") {
  ExampleGame ex = example(ExampleId::worked_robust);
  auto [same_game, same_abf] = perturb_game(ex.game, *ex.abf, {0.0, true, true,
                                                               true, 7});
  CHECK(same_game.attacker_reward == ex.game.attacker_reward);
  CHECK(same_abf.scale == ex.abf->scale);

  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    PerturbationSpec spec{0.001, true, true, true, seed};
    auto [gp, ap] = perturb_game(ex.game, *ex.abf, spec);
    CHECK_NOTHROW(gp.validate());
    CHECK(game_distance(ex.game, *ex.abf, gp, ap, 64, seed) <= 0.001 + 1e-12);
  }
  CHECK_THROWS_AS(
      perturb_game(ex.game, *ex.abf, {0.5, false, false, false, 1}),
      DomainError);
}

TEST_CASE("Lipschitz estimate of the attack map") {
  ExampleGame ex = example(ExampleId::worked_robust);
  // scale 1: the two-target Jacobian norm peaks at 1/2; margin brings 0.55
  Abf unit = Abf::softmax(1.0, 1.0, 0.5);
  double k1 = lipschitz_bound(unit, ex.game, 0.0, 512, 3);
  CHECK(k1 == Approx(0.55).margin(1e-9));
  // the bound scales linearly with the softmax sharpness
  double k250 = lipschitz_bound(*ex.abf, ex.game, 0.0, 512, 3);
  CHECK(k250 == Approx(137.5).margin(1e-9));
  // a nearly flat behavior function has a vanishing gradient
  Abf flat = Abf::softmax(1e-6, 1e7, 0.9);
  CHECK(lipschitz_bound(flat, ex.game, 0.0, 128, 3) < 1e-5);
}

TEST_CASE("utility-stability constant on the worked fixture") {
  ExampleGame ex = example(ExampleId::worked_robust);
  double b = robustness_constant(ex.game, *ex.abf, 0.0);
  double expected = 2.0 * (1.0 + (1.0 + 137.5 * std::sqrt(2.0)) * 4.0);
  CHECK(b == Approx(expected).margin(1e-6));

  GameSpec doubled = ex.game;
  for (double& v : doubled.defender_reward[0]) v *= 2.0;
  double b2 = robustness_constant(doubled, *ex.abf, 0.0);
  double expected2 = 2.0 * (1.0 + (1.0 + 137.5 * std::sqrt(2.0)) * 8.0);
  CHECK(b2 == Approx(expected2).margin(1e-6));

  // with a nearly flat attacker the constant collapses to 2(1 + sum rewards)
  Abf flat = Abf::softmax(1e-6, 1e7, 0.9);
  CHECK(robustness_constant(ex.game, flat, 0.0) ==
        Approx(2.0 * (1.0 + 4.0)).margin(1e-3));
}

TEST_CASE("sampled utility shifts stay below (b/2) eta") {
  ExampleGame ex = example(ExampleId::worked_robust);
  const double eta = 0.01;
  double b = robustness_constant(ex.game, *ex.abf, eta);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int violations = 0;
  for (int s = 0; s < 300; ++s) {
    CoverageVector c = {unit(rng), unit(rng)};
    PerturbationSpec spec{eta, true, true, true, 1000 + (std::uint64_t)s};
    auto [gp, ap] = perturb_game(ex.game, *ex.abf, spec);
    double before = expected_defender_utility(c, 0, *ex.abf, ex.game);
    double after = expected_defender_utility(c, 0, ap, gp);
    if (std::abs(after - before) > 0.5 * b * eta) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("certification at eta = 0 reproduces the base verifier") {
  ExampleGame ex = example(ExampleId::worked_robust);
  RobustnessEvidence ev = certify_robust(*ex.known_profile, *ex.known_zeta,
                                         ex.game, *ex.abf, 0.0, 3, 0.01, 42);
  DeviationEvidence base =
      verify_ne(*ex.known_profile, *ex.known_zeta, ex.game, *ex.abf, 0.01);
  CHECK(ev.pass == base.pass);
  CHECK(ev.threshold == Approx(*ex.known_zeta));
  for (const auto& row : ev.samples) {
    CHECK(row.max_gain == Approx(base.max_gain).margin(1e-15));
    CHECK(row.distance == 0.0);
    CHECK(row.pass == base.pass);
  }
}

TEST_CASE("certification passes on the worked equilibrium at eta = 0.001") {
  ExampleGame ex = example(ExampleId::worked_robust);
  RobustnessEvidence ev = certify_robust(*ex.known_profile, *ex.known_zeta,
                                         ex.game, *ex.abf, 0.001, 20, 0.01, 42);
  CHECK(ev.pass);
  CHECK(ev.b > 0.0);
  CHECK(ev.threshold == Approx(*ex.known_zeta + ev.b * 0.001));
  std::string csv = to_csv(ev);
  CHECK(csv.rfind("seed,distance,max_gain,pass\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 21);
}

TEST_CASE("a knife-edge optimum of the classic model breaks under perturbation") {
  // full coverage (1,1) is only optimal under exact tie-breaking; after a
  // small legal change to the second target's payoffs the profile loses
  // almost everything and a deviation recovers it
  ExampleGame ex = example(ExampleId::no_nse);
  GameSpec near = ex.game;
  double delta = 0.5;
  near.attacker_reward[1] = delta / 2 + 1e-9;
  near.attacker_penalty[1] = delta / 2 - 1e-9;
  near.validate();
  Abf sharp = Abf::softmax(1e4, 0.01, 0.1);
  StrategyProfile full{{CoverageVector{1.0, 1.0}}, {2.0}};
  DeviationEvidence ev = verify_ne(full, 0.3, near, sharp, 0.01);
  CHECK_FALSE(ev.pass);
  CHECK(ev.max_gain >= 1.5);
}
