#pragma once

#include <string>

#include "mdp.hpp"

namespace cgail {

// JSON document {"n_states", "n_actions", "transition", "init_dist", "gamma",
// "eval_reward"} with transition indexed [s][a][s'].
TabularMDP ParseMdpJson(const std::string& text);
TabularMDP LoadMdpJson(const std::string& path);
std::string MdpToJson(const TabularMDP& mdp);

// {"probs": [[...], ...]} or a bare nested array.
PolicyTable ParsePolicyJson(const std::string& text);

}  // namespace cgail
