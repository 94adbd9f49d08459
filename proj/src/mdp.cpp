#include "mdp.hpp"

#include <cmath>
#include <string>

#include "error.hpp"
#include "rng.hpp"

namespace cgail {
namespace {

std::string Index(int i) { return "[" + std::to_string(i) + "]"; }

void CheckProbabilityRow(const Eigen::Ref<const Eigen::RowVectorXd>& row,
                         const std::string& field) {
  double sum = 0.0;
  for (Eigen::Index j = 0; j < row.size(); ++j) {
    const double p = row(j);
    if (!std::isfinite(p) || p < 0.0) {
      throw ValidationError(field + Index(static_cast<int>(j)) +
                            ": probability must be finite and >= 0, got " +
                            std::to_string(p));
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kProbTol) {
    throw ValidationError(field + ": probabilities sum to " +
                          std::to_string(sum) + ", expected 1");
  }
}

Vector SolveDense(const Matrix& a, const Vector& b, const char* what) {
  Eigen::PartialPivLU<Matrix> lu(a);
  Vector x = lu.solve(b);
  const double residual = (a * x - b).lpNorm<Eigen::Infinity>();
  const double scale = 1.0 + b.lpNorm<Eigen::Infinity>();
  if (!x.allFinite() || !(residual <= 1e-9 * scale)) {
    throw Error(ErrorCode::kSingular,
                std::string(what) + ": linear solve failed (residual " +
                    std::to_string(residual) + ")");
  }
  return x;
}

}  // namespace

TabularMDP::TabularMDP(std::vector<Matrix> transition, Vector init_dist,
                       double gamma, Matrix eval_reward)
    : transition_(std::move(transition)),
      init_dist_(std::move(init_dist)),
      gamma_(gamma),
      eval_reward_(std::move(eval_reward)) {
  const auto n_s = init_dist_.size();
  if (n_s == 0) throw ValidationError("n_states: must be positive");
  if (transition_.empty()) throw ValidationError("n_actions: must be positive");
  if (!(gamma_ >= 0.0 && gamma_ < 1.0)) {
    throw ValidationError("gamma: must lie in [0, 1), got " +
                          std::to_string(gamma_));
  }
  for (int a = 0; a < n_actions(); ++a) {
    if (transition_[a].rows() != n_s || transition_[a].cols() != n_s) {
      throw ValidationError("transition: action " + std::to_string(a) +
                            " has wrong shape");
    }
  }
  for (int s = 0; s < n_states(); ++s) {
    for (int a = 0; a < n_actions(); ++a) {
      CheckProbabilityRow(transition_[a].row(s),
                          "transition" + Index(s) + Index(a));
    }
  }
  CheckProbabilityRow(init_dist_.transpose(), "init_dist");
  if (eval_reward_.rows() != n_s || eval_reward_.cols() != n_actions()) {
    throw ValidationError("eval_reward: expected shape [n_states][n_actions]");
  }
  for (int s = 0; s < n_states(); ++s) {
    for (int a = 0; a < n_actions(); ++a) {
      if (!std::isfinite(eval_reward_(s, a))) {
        throw ValidationError("eval_reward" + Index(s) + Index(a) +
                              ": must be finite");
      }
    }
  }
}

PolicyTable::PolicyTable(Matrix probs) : probs_(std::move(probs)) {
  if (probs_.rows() == 0 || probs_.cols() == 0) {
    throw ValidationError("policy: empty table");
  }
  for (Eigen::Index s = 0; s < probs_.rows(); ++s) {
    CheckProbabilityRow(probs_.row(s), "policy" + Index(static_cast<int>(s)));
    if (probs_.row(s).minCoeff() >= kPolicyFloor) continue;
    Eigen::RowVectorXd row = probs_.row(s).cwiseMax(kPolicyFloor);
    row /= row.sum();
    floor_magnitude_ += (row - probs_.row(s)).cwiseAbs().sum();
    probs_.row(s) = row;
  }
}

PolicyTable PolicyTable::Uniform(int n_states, int n_actions) {
  return PolicyTable(Matrix::Constant(n_states, n_actions, 1.0 / n_actions));
}

PolicyTable PolicyTable::FromLogits(const Matrix& logits) {
  Matrix probs(logits.rows(), logits.cols());
  for (Eigen::Index s = 0; s < logits.rows(); ++s) {
    const double m = logits.row(s).maxCoeff();
    Eigen::RowVectorXd e = (logits.row(s).array() - m).exp();
    probs.row(s) = e / e.sum();
  }
  // Softmax rows can miss 1 by an ulp or two; renormalizing does not fix
  // that, so the validation tolerance absorbs it.
  return PolicyTable(std::move(probs));
}

DiscriminatorTable::DiscriminatorTable(Matrix values)
    : values_(std::move(values)) {
  for (Eigen::Index i = 0; i < values_.size(); ++i) {
    double& v = values_.data()[i];
    if (!std::isfinite(v)) {
      throw ValidationError("discriminator: entries must be finite");
    }
    const double clamped = std::clamp(v, kDiscClamp, 1.0 - kDiscClamp);
    clamp_magnitude_ += std::abs(clamped - v);
    v = clamped;
  }
}

DiscriminatorTable DiscriminatorTable::Constant(int n_states, int n_actions,
                                                double v) {
  return DiscriminatorTable(Matrix::Constant(n_states, n_actions, v));
}

Matrix PolicyTransition(const TabularMDP& mdp, const PolicyTable& policy) {
  const int n = mdp.n_states();
  Matrix p_pi = Matrix::Zero(n, n);
  for (int a = 0; a < mdp.n_actions(); ++a) {
    p_pi += policy.probs().col(a).asDiagonal() * mdp.transition(a);
  }
  return p_pi;
}

Vector SolveOccupancy(const TabularMDP& mdp, const PolicyTable& policy) {
  const int n = mdp.n_states();
  const Matrix a = Matrix::Identity(n, n) -
                   mdp.gamma() * PolicyTransition(mdp, policy).transpose();
  return SolveDense(a, mdp.init_dist(), "occupancy");
}

Matrix SolveQ(const TabularMDP& mdp, const PolicyTable& policy,
              const Matrix& reward) {
  const int n = mdp.n_states();
  const Vector r_pi = reward.cwiseProduct(policy.probs()).rowwise().sum();
  const Matrix a =
      Matrix::Identity(n, n) - mdp.gamma() * PolicyTransition(mdp, policy);
  const Vector v = SolveDense(a, r_pi, "q-values");
  Matrix q = reward;
  for (int act = 0; act < mdp.n_actions(); ++act) {
    q.col(act) += mdp.gamma() * (mdp.transition(act) * v);
  }
  return q;
}

namespace {

Matrix EntropyReward(const PolicyTable& policy, const DiscriminatorTable& disc,
                     double lambda) {
  return disc.values().array().log() +
         lambda * policy.probs().array().log();
}

}  // namespace

Matrix SolveQEntropy(const TabularMDP& mdp, const PolicyTable& policy,
                     const DiscriminatorTable& disc, double lambda) {
  if (!std::isfinite(lambda) || lambda < 0.0) {
    throw ValidationError("lambda: must be finite and >= 0");
  }
  return SolveQ(mdp, policy, EntropyReward(policy, disc, lambda));
}

Matrix Advantage(const Matrix& q, const PolicyTable& policy) {
  if (q.rows() != policy.probs().rows() || q.cols() != policy.probs().cols()) {
    throw Error(ErrorCode::kInvalidArgument, "advantage: shape mismatch");
  }
  const Vector mean = q.cwiseProduct(policy.probs()).rowwise().sum();
  return q.colwise() - mean;
}

ValueTables SolveValueTables(const TabularMDP& mdp, const PolicyTable& policy,
                             const DiscriminatorTable& disc, double lambda) {
  ValueTables out;
  out.occupancy = SolveOccupancy(mdp, policy);
  out.q = SolveQEntropy(mdp, policy, disc, lambda);
  out.advantage = Advantage(out.q, policy);
  return out;
}

double PolicyReturn(const TabularMDP& mdp, const PolicyTable& policy) {
  const Vector rho = SolveOccupancy(mdp, policy);
  const Vector r_pi =
      mdp.eval_reward().cwiseProduct(policy.probs()).rowwise().sum();
  return rho.dot(r_pi);
}

double BellmanResidual(const TabularMDP& mdp, const PolicyTable& policy,
                       const DiscriminatorTable& disc, double lambda,
                       const Matrix& q) {
  const Matrix reward = EntropyReward(policy, disc, lambda);
  const Vector v = q.cwiseProduct(policy.probs()).rowwise().sum();
  double worst = 0.0;
  for (int a = 0; a < mdp.n_actions(); ++a) {
    const Vector backup =
        reward.col(a) + mdp.gamma() * (mdp.transition(a) * v);
    worst = std::max(worst, (backup - q.col(a)).lpNorm<Eigen::Infinity>());
  }
  return worst;
}

std::vector<Trajectory> SampleTrajectories(const TabularMDP& mdp,
                                           const PolicyTable& policy,
                                           int n_traj, int horizon,
                                           std::uint64_t seed) {
  Rng rng(seed);
  return SampleTrajectories(mdp, policy, n_traj, horizon, rng);
}

std::vector<Trajectory> SampleTrajectories(const TabularMDP& mdp,
                                           const PolicyTable& policy,
                                           int n_traj, int horizon, Rng& rng) {
  if (horizon < 1) throw ValidationError("horizon: must be >= 1");
  if (n_traj < 0) throw ValidationError("n_traj: must be >= 0");
  std::vector<Trajectory> out(n_traj);
  for (auto& traj : out) {
    traj.reserve(horizon);
    int s = rng.Categorical(mdp.init_dist());
    for (int n = 0; n < horizon; ++n) {
      const int a = rng.Categorical(policy.probs().row(s));
      traj.push_back({s, a});
      s = rng.Categorical(mdp.transition(a).row(s));
    }
  }
  return out;
}

PolicyTable SoftOptimalPolicy(const TabularMDP& mdp, double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw ValidationError("expert.temperature: must be positive");
  }
  const int n_s = mdp.n_states();
  const int n_a = mdp.n_actions();
  Vector v = Vector::Zero(n_s);
  Matrix q(n_s, n_a);
  for (int iter = 0; iter < 200000; ++iter) {
    for (int a = 0; a < n_a; ++a) {
      q.col(a) = mdp.eval_reward().col(a) + mdp.gamma() * mdp.transition(a) * v;
    }
    Vector next(n_s);
    for (int s = 0; s < n_s; ++s) {
      const double m = q.row(s).maxCoeff();
      next(s) = m + temperature *
                        std::log(((q.row(s).array() - m) / temperature)
                                     .exp()
                                     .sum());
    }
    const double delta = (next - v).lpNorm<Eigen::Infinity>();
    v = next;
    if (delta < 1e-14 * (1.0 + v.lpNorm<Eigen::Infinity>())) break;
  }
  for (int a = 0; a < n_a; ++a) {
    q.col(a) = mdp.eval_reward().col(a) + mdp.gamma() * mdp.transition(a) * v;
  }
  return PolicyTable::FromLogits(q / temperature);
}

Vector PolicyEntropy(const PolicyTable& policy) {
  const auto& p = policy.probs();
  return -(p.array() * p.array().log()).rowwise().sum();
}

}  // namespace cgail
