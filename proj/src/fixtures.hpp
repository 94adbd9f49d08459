#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mdp.hpp"

namespace cgail {

struct Fixture {
  TabularMDP mdp;
  // Expert shipped with the fixture, if it has one.
  std::optional<PolicyTable> expert;
};

// "two_corridor": 5 states, 2 actions. From the start state the agent picks
// one of two corridors; the end of corridor A pays more than corridor B.
//
// "entropy_chain": 3 states, 2 actions, with an expert whose entropy differs
// between the two successor states of the start state.
Fixture BuiltinFixture(const std::string& name);
std::vector<std::string> BuiltinFixtureNames();

}  // namespace cgail
