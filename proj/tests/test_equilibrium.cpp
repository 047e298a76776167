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

#include "mssg/equilibrium.hpp"
#include "mssg/grid.hpp"
#include "mssg/oracle.hpp"

using Catch::Approx;
using namespace mssg;

TEST_CASE("constants on the worked fixture") {
  ExampleGame ex = example(ExampleId::worked_robust);
  double u_star = find_level_input(ex.game, CombineMode::independent, 1e-9);
  REQUIRE(u_star == 0.5);
  AllocResult at_level = alloc(u_star, u_star, ex.game);
  NeConstants k = ne_constants(ex.game, u_star, *at_level.last_target);
  CHECK(k.a == 1.0);
  CHECK(k.b == 1.0);
  CHECK(k.g == 0.5);
  CHECK(k.A == Approx(16.0));
  CHECK(k.B == Approx(144.0));
  CHECK(k.C == Approx(7.0));
  CHECK(k.delta0 == 0.015625);  // exactly 1/64
  CHECK(k.epsilon0 == 0.5);
}

TEST_CASE("A is invariant under attacker payoff scaling") {
  ExampleGame ex = example(ExampleId::worked_robust);
  GameSpec scaled = ex.game;
  for (double& v : scaled.attacker_reward) v *= 2.0;
  for (double& v : scaled.attacker_penalty) v *= 2.0;
  double u1 = find_level_input(ex.game, CombineMode::independent, 1e-9);
  double u2 = find_level_input(scaled, CombineMode::independent, 1e-9);
  CHECK(u2 == Approx(2.0 * u1));
  NeConstants k1 = ne_constants(ex.game, u1, 0);
  NeConstants k2 = ne_constants(scaled, u2, 0);
  CHECK(k2.a == Approx(2.0 * k1.a));
  CHECK(k2.b == Approx(2.0 * k1.b));
  CHECK(k2.g == Approx(2.0 * k1.g));
  CHECK(k2.A == Approx(k1.A));
}

TEST_CASE("the boundary case g <= 0 is rejected") {
  // enough resources to push the level input below the largest penalty
  GameSpec g;
  g.resources = {1.2};
  g.attacker_reward = {1.0, 1.0};
  g.attacker_penalty = {0.95, 0.0};
  g.defender_reward = {{2.0, 2.0}};
  g.defender_penalty = {{1.0, 1.0}};
  g.validate();
  double u_star = find_level_input(g, CombineMode::independent, 1e-9);
  CHECK(u_star < 0.95);
  CHECK_THROWS_AS(ne_constants(g, u_star, 0), PreconditionError);
}

TEST_CASE("calc_ne on the worked fixture follows the offset construction") {
  ExampleGame ex = example(ExampleId::worked_robust);
  SolveReport report = calc_ne(ex.game, *ex.abf);
  CHECK(report.u_star == 0.5);
  // offset A*delta = 0.16 below the level point
  CHECK(report.coverage[0] == Approx(0.34).margin(1e-9));
  CHECK(report.coverage[1] == Approx(0.66).margin(1e-9));
  REQUIRE(report.t_star.has_value());
  CHECK(*report.t_star == 0);
  CHECK(report.zeta == Approx(144.0 * 0.01 + 7.0 * 0.1));

  // efficiency: the whole budget is spent
  double spent = 0.0;
  for (double x : report.profile.allocations[0]) spent += x;
  CHECK(spent == Approx(1.0).margin(1e-6));

  // the steered target beats every other covered target by at least delta
  std::vector<double> u = attacker_utilities(report.coverage, ex.game);
  for (int t = 0; t < ex.game.num_targets(); ++t) {
    if (t == *report.t_star || report.coverage[t] <= 0.0) continue;
    CHECK(u[*report.t_star] - u[t] >= ex.abf->delta);
  }
}

TEST_CASE("calc_ne rejects out-of-range attacker parameters by name") {
  ExampleGame ex = example(ExampleId::worked_robust);
  Abf wide = Abf::softmax(500.0, 0.02, 0.1);  // delta above delta0 = 1/64
  CHECK_THROWS_WITH(calc_ne(ex.game, wide),
                    Catch::Matchers::ContainsSubstring("delta0"));
  Abf heavy = Abf::softmax(250.0, 0.01, 0.6);  // epsilon above 1/2
  CHECK_THROWS_WITH(calc_ne(ex.game, heavy),
                    Catch::Matchers::ContainsSubstring("epsilon0"));
}

TEST_CASE("calc_ne approaches the level split as the attacker sharpens") {
  ExampleGame ex = example(ExampleId::worked_robust);
  Abf sharp = Abf::for_parameters(1e-4, 1e-3);
  SolveReport report = calc_ne(ex.game, sharp);
  CHECK(report.coverage[0] == Approx(0.5 - 16.0 * 1e-4).margin(1e-6));
  CHECK(report.coverage[1] == Approx(0.5 + 16.0 * 1e-4).margin(1e-6));
  CHECK(report.zeta == Approx(144.0 * 1e-4 + 7.0 * 1e-3).margin(1e-9));
  CHECK(report.zeta < 0.05);
}

TEST_CASE("verify_ne accepts the worked profile at the hand bound") {
  ExampleGame ex = example(ExampleId::worked_robust);
  DeviationEvidence ev =
      verify_ne(*ex.known_profile, *ex.known_zeta, ex.game, *ex.abf, 0.005);
  CHECK(ev.pass);
  CHECK(ev.max_gain <= 0.05);
  CHECK(ev.slack == Approx(0.005 * 2.0));
}

TEST_CASE("verify_ne rejects a deliberately weak profile with a witness") {
  ExampleGame ex = example(ExampleId::worked_robust);
  StrategyProfile weak{{CoverageVector{0.2, 0.2}}, {1.0}};
  DeviationEvidence ev = verify_ne(weak, *ex.known_zeta, ex.game, *ex.abf, 0.01);
  CHECK_FALSE(ev.pass);
  CHECK(ev.max_gain > 0.5);
  CHECK(ev.witness_defender == 0);
  CHECK(!ev.witness.empty());
}

TEST_CASE("a grid-optimal profile shows zero gain against its own grid") {
  ExampleGame ex = example(ExampleId::worked_robust);
  BudgetGrid grid = make_budget_grid(2, 0.01, 1.0);
  double best = -1e300;
  CoverageVector best_x;
  for_each_point(grid, [&](const CoverageVector& x) {
    double u = expected_defender_utility(x, 0, *ex.abf, ex.game);
    if (u > best) {
      best = u;
      best_x = x;
    }
  });
  StrategyProfile profile{{best_x}, {1.0}};
  DeviationEvidence ev = verify_ne(profile, 0.0, ex.game, *ex.abf, 0.01);
  CHECK(ev.max_gain == Approx(0.0).margin(1e-12));
  CHECK(ev.pass);
}

TEST_CASE("certified bounds shrink with the grid step") {
  ExampleGame ex = example(ExampleId::worked_robust);
  double previous = 1e300;
  for (double step : {0.05, 0.02, 0.01}) {
    DeviationEvidence ev =
        verify_ne(*ex.known_profile, *ex.known_zeta, ex.game, *ex.abf, step);
    double bound = ev.max_gain + ev.slack;
    CHECK(bound <= previous + 1e-12);
    previous = bound;
  }
}

TEST_CASE("oversized deviation grids are refused") {
  GameSpec g;
  g.resources = {2.0, 1.0};
  g.attacker_reward = {1.0, 1.0, 1.0, 1.0};
  g.attacker_penalty = {0.0, 0.0, 0.0, 0.0};
  g.defender_reward = {{1, 1, 1, 1}, {1, 1, 1, 1}};
  g.defender_penalty = {{0, 0, 0, 0}, {0, 0, 0, 0}};
  g.validate();
  StrategyProfile x{{CoverageVector{0.5, 0.5, 0.5, 0.5},
                     CoverageVector{0.25, 0.25, 0.25, 0.25}},
                    {2.0, 1.0}};
  Abf abf = Abf::softmax(250.0, 0.01, 0.1);
  CHECK_THROWS_WITH(verify_ne(x, 1.0, g, abf, 0.001),
                    Catch::Matchers::ContainsSubstring("coarser"));
}
