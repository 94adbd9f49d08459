#include "fixtures.hpp"

#include "error.hpp"

namespace cgail {
namespace {

Fixture TwoCorridor() {
  constexpr int kS = 5;
  std::vector<Matrix> p(2, Matrix::Zero(kS, kS));
  // start: action 0 heads into corridor A (1 -> 2), action 1 into B (3 -> 4)
  p[0](0, 1) = 0.9;
  p[0](0, 3) = 0.1;
  p[1](0, 3) = 0.9;
  p[1](0, 1) = 0.1;
  p[0](1, 2) = 1.0;
  p[1](1, 0) = 1.0;
  p[0](3, 4) = 1.0;
  p[1](3, 0) = 1.0;
  for (int a = 0; a < 2; ++a) {
    p[a](2, 0) = 1.0;
    p[a](4, 0) = 1.0;
  }
  Vector p0 = Vector::Zero(kS);
  p0(0) = 1.0;
  Matrix r = Matrix::Zero(kS, 2);
  r(2, 0) = 1.0;
  r(2, 1) = 0.5;
  r(4, 0) = 0.3;
  r(4, 1) = 0.2;
  TabularMDP mdp(std::move(p), std::move(p0), 0.9, std::move(r));
  PolicyTable expert = SoftOptimalPolicy(mdp, 0.1);
  return Fixture{std::move(mdp), std::move(expert)};
}

Fixture EntropyChain() {
  constexpr int kS = 3;
  std::vector<Matrix> p(2, Matrix::Zero(kS, kS));
  p[0](0, 1) = 1.0;
  p[1](0, 2) = 1.0;
  for (int a = 0; a < 2; ++a) {
    p[a](1, 0) = 1.0;
    p[a](2, 0) = 1.0;
  }
  Vector p0 = Vector::Zero(kS);
  p0(0) = 1.0;
  Matrix r = Matrix::Zero(kS, 2);
  r(1, 0) = 1.0;
  r(2, 1) = 0.5;
  TabularMDP mdp(std::move(p), std::move(p0), 0.9, std::move(r));
  Matrix e(kS, 2);
  e << 0.7, 0.3,
       0.5, 0.5,
       0.95, 0.05;
  return Fixture{std::move(mdp), PolicyTable(std::move(e))};
}

}  // namespace

Fixture BuiltinFixture(const std::string& name) {
  if (name == "two_corridor") return TwoCorridor();
  if (name == "entropy_chain") return EntropyChain();
  throw ValidationError("mdp: unknown builtin fixture '" + name + "'");
}

std::vector<std::string> BuiltinFixtureNames() {
  return {"two_corridor", "entropy_chain"};
}

}  // namespace cgail
