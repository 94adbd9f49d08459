#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "rng.hpp"

namespace cgail {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kProbTol = 1e-12;
inline constexpr double kPolicyFloor = 1e-8;  // epsilon_pi
inline constexpr double kDiscClamp = 1e-6;    // delta_D

// Finite MDP. transition(a) is the |S|x|S| matrix P[s][a][.] for action a.
// eval_reward is only read by policy_return; learning code never touches it.
class TabularMDP {
 public:
  TabularMDP(std::vector<Matrix> transition, Vector init_dist, double gamma,
             Matrix eval_reward);

  int n_states() const { return static_cast<int>(init_dist_.size()); }
  int n_actions() const { return static_cast<int>(transition_.size()); }
  double gamma() const { return gamma_; }
  const Matrix& transition(int action) const { return transition_[action]; }
  double transition(int s, int a, int next) const {
    return transition_[a](s, next);
  }
  const Vector& init_dist() const { return init_dist_; }
  const Matrix& eval_reward() const { return eval_reward_; }

 private:
  std::vector<Matrix> transition_;
  Vector init_dist_;
  double gamma_;
  Matrix eval_reward_;
};

// Row-stochastic action table pi[s][a]. Entries below kPolicyFloor are
// clamped and the affected rows renormalized at construction; rows that
// need no clamping are left bit-identical.
class PolicyTable {
 public:
  explicit PolicyTable(Matrix probs);

  static PolicyTable Uniform(int n_states, int n_actions);
  static PolicyTable FromLogits(const Matrix& logits);

  const Matrix& probs() const { return probs_; }
  double operator()(int s, int a) const { return probs_(s, a); }
  int n_states() const { return static_cast<int>(probs_.rows()); }
  int n_actions() const { return static_cast<int>(probs_.cols()); }
  // Total absolute change applied by the floor.
  double floor_magnitude() const { return floor_magnitude_; }

 private:
  Matrix probs_;
  double floor_magnitude_ = 0.0;
};

// D[s][a] clamped to [kDiscClamp, 1 - kDiscClamp].
class DiscriminatorTable {
 public:
  explicit DiscriminatorTable(Matrix values);
  static DiscriminatorTable Constant(int n_states, int n_actions, double v);

  const Matrix& values() const { return values_; }
  double operator()(int s, int a) const { return values_(s, a); }
  double clamp_magnitude() const { return clamp_magnitude_; }

 private:
  Matrix values_;
  double clamp_magnitude_ = 0.0;
};

struct ValueTables {
  Vector occupancy;
  Matrix q;
  Matrix advantage;
};

struct Step {
  int state;
  int action;
};
using Trajectory = std::vector<Step>;

// P_pi[s][s'] = sum_a pi(a|s) P[s][a][s'].
Matrix PolicyTransition(const TabularMDP& mdp, const PolicyTable& policy);

// Unnormalized discounted occupancy, rho = p0 + gamma P_pi^T rho.
Vector SolveOccupancy(const TabularMDP& mdp, const PolicyTable& policy);

// Q for the per-step reward log D(s,a) + lambda log pi(a|s). The conditioned
// first action also receives its entropy reward.
Matrix SolveQEntropy(const TabularMDP& mdp, const PolicyTable& policy,
                     const DiscriminatorTable& disc, double lambda);

// Q for an arbitrary per-pair reward table.
Matrix SolveQ(const TabularMDP& mdp, const PolicyTable& policy,
              const Matrix& reward);

Matrix Advantage(const Matrix& q, const PolicyTable& policy);

ValueTables SolveValueTables(const TabularMDP& mdp, const PolicyTable& policy,
                             const DiscriminatorTable& disc, double lambda);

// Exact discounted return under eval_reward.
double PolicyReturn(const TabularMDP& mdp, const PolicyTable& policy);

// Max-norm residual of the entropy Bellman system for a given Q.
double BellmanResidual(const TabularMDP& mdp, const PolicyTable& policy,
                       const DiscriminatorTable& disc, double lambda,
                       const Matrix& q);

std::vector<Trajectory> SampleTrajectories(const TabularMDP& mdp,
                                           const PolicyTable& policy,
                                           int n_traj, int horizon,
                                           std::uint64_t seed);
// Same, drawing from (and advancing) a caller-owned generator.
std::vector<Trajectory> SampleTrajectories(const TabularMDP& mdp,
                                           const PolicyTable& policy,
                                           int n_traj, int horizon, Rng& rng);

// Soft-optimal policy for eval_reward at the given temperature, computed by
// soft value iteration to a fixed point.
PolicyTable SoftOptimalPolicy(const TabularMDP& mdp, double temperature);

// Per-state entropy H(pi(.|s)).
Vector PolicyEntropy(const PolicyTable& policy);

}  // namespace cgail
