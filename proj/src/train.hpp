#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mdp.hpp"
#include "metrics.hpp"
#include "onestep.hpp"

namespace cgail {

enum class InitPolicy { kUniform, kExpert };

InitPolicy ParseInitPolicy(const std::string& name);
const char* InitPolicyName(InitPolicy init);

struct TrainConfig {
  double k = 0.0;
  double lambda = 0.01;
  double alpha = 0.0;  // read only with oracle_policy_controller
  double lr_disc = 20.0;
  double lr_policy = 0.5;
  int n_traj_per_iter = 10;
  int horizon = 20;
  int iterations = 300;
  std::uint64_t seed = 0;
  bool oracle_policy_controller = false;
  // Expert demonstrations, drawn once per run.
  int n_expert_traj = 50;
  // Rollouts behind the per-iteration state Wasserstein estimate.
  int eval_traj = 100;
  int eval_horizon = 50;
  GroundCost ground_cost = GroundCost::kHop;
  InitPolicy init_policy = InitPolicy::kUniform;

  void Validate() const;
};

// Random streams derived from TrainConfig::seed.
enum TrainStream : std::uint64_t {
  kLearnerStream = 0,
  kExpertStream = 1,
  kEvalStream = 2,
  kExpertEvalStream = 3,
};

struct TrainingRecord {
  int iter = 0;
  double ret = 0.0;
  double normalized_return = 0.0;
  double disc_mean = 0.0;
  // Both averaged over the distinct (s, a) pairs seen in this iteration's
  // learner and expert batches.
  double disc_dev_half = 0.0;
  double tv_to_expert = 0.0;
  double wasserstein_state = 0.0;
  double regularizer_value = 0.0;
};

struct TrainingTrace {
  std::vector<TrainingRecord> records;
  Matrix policy_logits;
  Matrix disc_logits;
};

// Return anchors: 0 for the uniform policy, 1 for the expert.
struct ReturnAnchors {
  double uniform = 0.0;
  double expert = 1.0;
  double Normalize(double ret) const { return (ret - uniform) / (expert - uniform); }
};
ReturnAnchors ComputeAnchors(const TabularMDP& mdp, const PolicyTable& expert);

// Empirical (s, a) frequencies of a batch, normalized by its step count.
Matrix PairFrequencies(const std::vector<Trajectory>& batch, int n_states,
                       int n_actions);

// Mean of log D over learner steps plus mean of log(1 - D) over expert steps,
// minus (k/2)(D - 1/2)^2 averaged within each batch.
double DiscLossControlled(const Matrix& disc,
                          const std::vector<Trajectory>& learner,
                          const std::vector<Trajectory>& expert, double k);

// (k/2)(mean over learner of (D - 1/2)^2 + mean over expert of the same).
double DiscRegularizer(const Matrix& disc, const std::vector<Trajectory>& learner,
                       const std::vector<Trajectory>& expert, double k);

// d(DiscLossControlled)/dD(s, a).
Matrix DiscLossGradient(const Matrix& disc, const std::vector<Trajectory>& learner,
                        const std::vector<Trajectory>& expert, double k);

// Chain rule through D = sigmoid(phi).
Matrix DiscLogitGradient(const Matrix& disc_logits,
                         const std::vector<Trajectory>& learner,
                         const std::vector<Trajectory>& expert, double k);

// Logistic function, clamped to [kDiscClamp, 1 - kDiscClamp].
Matrix Sigmoid(const Matrix& logits);

struct PolicyObjectiveEstimate {
  double objective = 0.0;
  Matrix gradient;  // w.r.t. the softmax logits
};

// Sampled V_pi and its REINFORCE gradient. Reward log D + lambda log pi,
// discounted return-to-go, per-state batch-mean baseline, each step weighted
// by gamma^n, averaged over trajectories.
PolicyObjectiveEstimate PolicyObjective(const Matrix& logits, const Matrix& disc,
                                        double lambda, double gamma,
                                        const std::vector<Trajectory>& batch);

// Per-state weights c(s) from the empirical visitation of a batch.
Vector StateFrequencies(const std::vector<Trajectory>& batch, int n_states);

// The controller term Phi subtracted from V_pi:
//   sum_{s,a} (alpha/2) pi^2 / pi_E + (c log(1/2) + c lambda log pi_E
//             + c lambda - alpha) pi,   with c = c(s).
// Throws kDegenerate if pi_E(a|s) is at the floor on a state with c(s) > 0.
double ControllerPotential(const PolicyTable& policy, const PolicyTable& expert,
                           const Vector& state_weight, double lambda,
                           double alpha);

// dPhi/dtheta through the softmax.
Matrix ControllerPotentialLogitGradient(const PolicyTable& policy,
                                        const PolicyTable& expert,
                                        const Vector& state_weight,
                                        double lambda, double alpha);

// V_pi' = V_pi - Phi with exact occupancies for V_pi.
double PolicyLossOracleControlled(const TabularMDP& mdp, const PolicyTable& policy,
                                  const PolicyTable& expert,
                                  const DiscriminatorTable& disc,
                                  const Vector& state_weight, double lambda,
                                  double alpha);

// One-step counterparts: d/dx of the first equals the controlled dx, and
// -d/dy of the second equals the controlled dy.
double ScalarDiscObjectiveControlled(const ScalarSystemParams& p, double x,
                                     double y);
double ScalarPolicyObjectiveControlled(const ScalarSystemParams& p, double x,
                                       double y);

// Alternates one discriminator ascent step and one policy descent step per
// iteration, recording metrics after both updates. Throws kDivergence on a
// non-finite return or a policy logit beyond 1e3 in magnitude.
TrainingTrace Train(const TabularMDP& mdp, const PolicyTable& expert,
                    const TrainConfig& config);

// max - min of normalized return over the last `window` records.
double OscillationRange(const std::vector<double>& normalized_returns, int window);

// First index with value >= 0.95 * max; nullopt if never (only possible for
// NaN-free traces whose max is negative).
std::optional<int> ConvergenceStep(const std::vector<double>& normalized_returns);

std::vector<double> NormalizedReturns(const TrainingTrace& trace);

}  // namespace cgail
