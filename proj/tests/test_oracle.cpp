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

#include "mssg/oracle.hpp"

using Catch::Approx;
using namespace mssg;

TEST_CASE("fixtures carry the expected shapes and parameters") {
  ExampleGame t2 = example(ExampleId::table2_gamma_empty);
  CHECK(t2.game.num_defenders() == 4);
  CHECK(t2.game.num_targets() == 6);
  for (double k : t2.game.resources) CHECK(k == 1.0);
  REQUIRE(t2.abf.has_value());
  CHECK(t2.abf->delta == Approx((7.0 - 3.0 * std::sqrt(5.0)) / 12.0));
  CHECK(t2.abf->epsilon == Approx(1.0 / 15.0));
  CHECK(t2.abf->scale == 112.0);

  CHECK_NOTHROW(example(ExampleId::no_nse).game.validate());
  CHECK(example(ExampleId::no_nse).game.resources == std::vector<double>{2.0});

  ExampleGame worked = example(ExampleId::worked_robust);
  CHECK(min_max_height(worked.game) == 0.5);
  CHECK(worked.abf->scale == 250.0);
  REQUIRE(worked.known_profile.has_value());
  CHECK(worked.known_zeta == Approx(0.265));

  CHECK(example("table1_unstable").id == "table1_unstable");
  CHECK_THROWS_AS(example("nope"), DomainError);
}

TEST_CASE("fixtures export as the standard game JSON") {
  ExampleGame ex = example(ExampleId::worked_robust);
  nlohmann::json j = ex;
  CHECK(j.at("id") == "worked_robust");
  GameSpec game = j.at("game").get<GameSpec>();
  CHECK(game.num_targets() == 2);
  Abf abf = j.at("abf").get<Abf>();
  CHECK(abf.scale == 250.0);
  nlohmann::json none = example(ExampleId::no_nse);
  CHECK(none.at("abf").is_null());
}

TEST_CASE("near-full coverage approaches the top reward as coverage recedes") {
  ExampleGame ex = example(ExampleId::no_nse);
  Abf sharp = Abf::softmax(1e4, 0.01, 0.1);
  double previous = 0.0;
  for (double e : {0.1, 0.01, 0.001}) {
    double u = expected_defender_utility({1.0 - e, 1.0}, 0, sharp, ex.game);
    CHECK(u >= 3.0 - e - 0.01);
    CHECK(u >= previous);
    previous = u;
  }
  // at exact full coverage the attacker splits and the utility drops to 2
  double at_full = expected_defender_utility({1.0, 1.0}, 0, sharp, ex.game);
  CHECK(at_full == Approx(2.0).margin(0.01));
}

TEST_CASE("deviation search refines monotonically on nested grids") {
  ExampleGame ex = example(ExampleId::worked_robust);
  CoalitionStructure cs = singleton_structure(*ex.known_profile);
  double previous = -1e300;
  for (double step : {0.08, 0.04, 0.02}) {
    DeviationSearch s =
        grid_best_deviation({0}, cs, ex.game, *ex.abf, step, RevengeMode::none);
    CHECK(s.found);
    CHECK(s.best_gain >= previous - 1e-12);
    previous = s.best_gain;
  }
}

TEST_CASE("noncooperative response search matches the gamma floor") {
  ExampleGame ex = example(ExampleId::table2_gamma_empty);
  double u_bar = min_max_height(ex.game, 1e-11);
  CoalitionStructure level =
      grand_structure(ex.game, level_coverage(u_bar, ex.game));
  CoverageVector x_d = default_subcoalition_deviation({0, 1}, ex.game);
  GammaEvidence ev =
      check_gamma_deviation(level, {0, 1}, x_d, ex.game, *ex.abf, 0.5);
  CHECK(ev.confirmed);
  CHECK(ev.worst_deviator_utility >= 4.0);
}
