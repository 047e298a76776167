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
#include <optional>
#include <string>

#include "mssg/common.hpp"
#include "mssg/core.hpp"
#include "mssg/equilibrium.hpp"
#include "mssg/game.hpp"
#include "json.hpp"

namespace mssg {

enum class ExampleId { no_nse, worked_robust, table1_unstable, table2_gamma_empty };

/// A named fixture game, with an attacker model when the scenario fixes one
/// and, where known, a reference solution and its defect.
struct ExampleGame {
  std::string id;
  GameSpec game;
  std::optional<Abf> abf;
  std::string notes;
  std::optional<double> known_zeta;
  std::optional<StrategyProfile> known_profile;
};

inline ExampleGame example(ExampleId id) {
  ExampleGame ex;
  switch (id) {
    case ExampleId::no_nse: {
      ex.id = "no_nse";
      ex.game.resources = {2.0};
      ex.game.attacker_reward = {1.0, 1.0};
      ex.game.attacker_penalty = {0.0, 0.0};
      ex.game.defender_reward = {{3.0, 1.0}};
      ex.game.defender_penalty = {{2.0, 0.0}};
      ex.notes =
          "single defender, two equally attractive targets; with a "
          "deterministic tie-breaking attacker no exact equilibrium exists "
          "(utility approaches 3 but is discontinuous at full coverage)";
      break;
    }
    case ExampleId::worked_robust: {
      ex.id = "worked_robust";
      ex.game.resources = {1.0};
      ex.game.attacker_reward = {1.0, 1.0};
      ex.game.attacker_penalty = {0.0, 0.0};
      ex.game.defender_reward = {{3.0, 1.0}};
      ex.game.defender_penalty = {{2.0, 0.0}};
      ex.abf = Abf::softmax(250.0, 0.01, 0.1);
      ex.known_zeta = 0.265;
      ex.known_profile =
          StrategyProfile{{CoverageVector{0.49, 0.51}}, {1.0}};
      ex.notes =
          "two-target single-defender game with a hand-checkable approximate "
          "equilibrium at coverage (0.49, 0.51); min-max height 0.5";
      break;
    }
    case ExampleId::table1_unstable: {
      ex.id = "table1_unstable";
      ex.game.resources = {1.0, 1.0};
      ex.game.attacker_reward = {1.0, 1.0, 1.0};
      ex.game.attacker_penalty = {0.0, 0.0, 0.0};
      ex.game.defender_reward = {{1.0, 300.0, 2.0}, {300.0, 1.0, 2.0}};
      ex.game.defender_penalty = {{1.0, 300.0, 2.0}, {300.0, 1.0, 2.0}};
      ex.abf = Abf::softmax(static_cast<double>(derive_scale(0.01, 1.0 / 400.0)),
                            0.01, 1.0 / 400.0);
      ex.notes =
          "two defenders with opposed high-value targets; the plain pooled "
          "allocation is unstable (the grand coalition can steer the attack "
          "to the opposed pair), while distributions splitting mass between "
          "the first two targets are stable";
      break;
    }
    case ExampleId::table2_gamma_empty: {
      ex.id = "table2_gamma_empty";
      double delta = (7.0 - 3.0 * std::sqrt(5.0)) / 12.0;
      double epsilon = 1.0 / 15.0;
      ex.game.resources = {1.0, 1.0, 1.0, 1.0};
      ex.game.attacker_reward = {1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
      ex.game.attacker_penalty = {0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
      ex.game.defender_reward = {{1, 1, 1, 6, 6, 6},
                                 {1, 1, 1, 6, 6, 6},
                                 {6, 6, 6, 1, 1, 1},
                                 {6, 6, 6, 1, 1, 1}};
      ex.game.defender_penalty = {{0, 0, 0, 5, 5, 5},
                                  {0, 0, 0, 5, 5, 5},
                                  {5, 5, 5, 0, 0, 0},
                                  {5, 5, 5, 0, 0, 0}};
      ex.abf = Abf::softmax(static_cast<double>(derive_scale(delta, epsilon)),
                            delta, epsilon);
      ex.notes =
          "four defenders in two opposed pairs over six targets; either pair "
          "can guarantee itself utility 4 by deviating against uncoordinated "
          "responses, yet no structure gives all four at least 4, so no "
          "structure survives every non-cooperative deviation check";
      break;
    }
  }
  ex.game.validate();
  return ex;
}

inline ExampleGame example(const std::string& id) {
  if (id == "no_nse") return example(ExampleId::no_nse);
  if (id == "worked_robust") return example(ExampleId::worked_robust);
  if (id == "table1_unstable") return example(ExampleId::table1_unstable);
  if (id == "table2_gamma_empty") return example(ExampleId::table2_gamma_empty);
  throw DomainError("example: unknown id \"" + id +
                    "\" (expected no_nse, worked_robust, table1_unstable, "
                    "table2_gamma_empty)");
}

inline void to_json(nlohmann::json& j, const ExampleGame& ex) {
  j = nlohmann::json{{"id", ex.id}, {"game", ex.game}, {"notes", ex.notes}};
  j["abf"] = ex.abf ? nlohmann::json(*ex.abf) : nlohmann::json(nullptr);
  if (ex.known_zeta) j["known_zeta"] = *ex.known_zeta;
  if (ex.known_profile) j["known_profile"] = *ex.known_profile;
}

}  // namespace mssg
