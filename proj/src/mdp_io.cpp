#include "mdp_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "error.hpp"

namespace cgail {
namespace {

using nlohmann::json;

const json& Field(const json& doc, const char* name) {
  if (!doc.is_object() || !doc.contains(name)) {
    throw ValidationError(std::string(name) + ": missing field");
  }
  return doc.at(name);
}

double Number(const json& v, const std::string& where) {
  if (!v.is_number()) throw ValidationError(where + ": expected a number");
  return v.get<double>();
}

int Count(const json& doc, const char* name) {
  const json& v = Field(doc, name);
  if (!v.is_number_integer() || v.get<long long>() <= 0) {
    throw ValidationError(std::string(name) + ": expected a positive integer");
  }
  return static_cast<int>(v.get<long long>());
}

const json& Array(const json& v, std::size_t n, const std::string& where) {
  if (!v.is_array()) throw ValidationError(where + ": expected an array");
  if (v.size() != n) {
    throw ValidationError(where + ": expected " + std::to_string(n) +
                          " entries, got " + std::to_string(v.size()));
  }
  return v;
}

std::string Idx(std::size_t i) { return "[" + std::to_string(i) + "]"; }

Matrix ParseMatrix(const json& v, int rows, int cols, const std::string& name) {
  Array(v, rows, name);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    const json& row = Array(v[i], cols, name + Idx(i));
    for (int j = 0; j < cols; ++j) m(i, j) = Number(row[j], name + Idx(i) + Idx(j));
  }
  return m;
}

}  // namespace

TabularMDP ParseMdpJson(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("mdp: invalid JSON: ") + e.what());
  }
  const int n_s = Count(doc, "n_states");
  const int n_a = Count(doc, "n_actions");
  const json& trans = Array(Field(doc, "transition"), n_s, "transition");
  std::vector<Matrix> transition(n_a, Matrix::Zero(n_s, n_s));
  for (int s = 0; s < n_s; ++s) {
    const json& per_action = Array(trans[s], n_a, "transition" + Idx(s));
    for (int a = 0; a < n_a; ++a) {
      const std::string where = "transition" + Idx(s) + Idx(a);
      const json& row = Array(per_action[a], n_s, where);
      for (int t = 0; t < n_s; ++t) {
        transition[a](s, t) = Number(row[t], where + Idx(t));
      }
    }
  }
  const json& p0 = Array(Field(doc, "init_dist"), n_s, "init_dist");
  Vector init(n_s);
  for (int s = 0; s < n_s; ++s) init(s) = Number(p0[s], "init_dist" + Idx(s));
  const double gamma = Number(Field(doc, "gamma"), "gamma");
  Matrix reward = ParseMatrix(Field(doc, "eval_reward"), n_s, n_a, "eval_reward");
  return TabularMDP(std::move(transition), std::move(init), gamma,
                    std::move(reward));
}

TabularMDP LoadMdpJson(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open MDP file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseMdpJson(buffer.str());
}

std::string MdpToJson(const TabularMDP& mdp) {
  json doc;
  doc["n_states"] = mdp.n_states();
  doc["n_actions"] = mdp.n_actions();
  json trans = json::array();
  for (int s = 0; s < mdp.n_states(); ++s) {
    json per_action = json::array();
    for (int a = 0; a < mdp.n_actions(); ++a) {
      json row = json::array();
      for (int t = 0; t < mdp.n_states(); ++t) row.push_back(mdp.transition(s, a, t));
      per_action.push_back(row);
    }
    trans.push_back(per_action);
  }
  doc["transition"] = trans;
  doc["init_dist"] = std::vector<double>(mdp.init_dist().data(),
                                         mdp.init_dist().data() + mdp.n_states());
  doc["gamma"] = mdp.gamma();
  json reward = json::array();
  for (int s = 0; s < mdp.n_states(); ++s) {
    json row = json::array();
    for (int a = 0; a < mdp.n_actions(); ++a) row.push_back(mdp.eval_reward()(s, a));
    reward.push_back(row);
  }
  doc["eval_reward"] = reward;
  return doc.dump(2);
}

PolicyTable ParsePolicyJson(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("policy: invalid JSON: ") + e.what());
  }
  const json& probs = doc.is_object() ? Field(doc, "probs") : doc;
  if (!probs.is_array() || probs.empty() || !probs[0].is_array()) {
    throw ValidationError("probs: expected a nested array");
  }
  return PolicyTable(ParseMatrix(probs, static_cast<int>(probs.size()),
                                 static_cast<int>(probs[0].size()), "probs"));
}

}  // namespace cgail
