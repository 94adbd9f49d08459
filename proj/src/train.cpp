#include "train.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include "error.hpp"
#include "gail_flow.hpp"

namespace cgail {

InitPolicy ParseInitPolicy(const std::string& name) {
  if (name == "uniform") return InitPolicy::kUniform;
  if (name == "expert") return InitPolicy::kExpert;
  throw ValidationError("init_policy: expected 'uniform' or 'expert', got '" +
                        name + "'");
}

const char* InitPolicyName(InitPolicy init) {
  return init == InitPolicy::kUniform ? "uniform" : "expert";
}

void TrainConfig::Validate() const {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(k) || k < 0.0) throw ValidationError("k: must be >= 0");
  if (!finite(lambda) || lambda < 0.0) throw ValidationError("lambda: must be >= 0");
  if (!finite(alpha)) throw ValidationError("alpha: must be finite");
  if (!finite(lr_disc) || lr_disc <= 0.0) throw ValidationError("lr_disc: must be > 0");
  if (!finite(lr_policy) || lr_policy <= 0.0) {
    throw ValidationError("lr_policy: must be > 0");
  }
  if (n_traj_per_iter < 1) throw ValidationError("n_traj_per_iter: must be >= 1");
  if (horizon < 1) throw ValidationError("horizon: must be >= 1");
  if (iterations < 1) throw ValidationError("iterations: must be >= 1");
  if (n_expert_traj < 1) throw ValidationError("n_expert_traj: must be >= 1");
  if (eval_traj < 1) throw ValidationError("eval_traj: must be >= 1");
  if (eval_horizon < 1) throw ValidationError("eval_horizon: must be >= 1");
}

ReturnAnchors ComputeAnchors(const TabularMDP& mdp, const PolicyTable& expert) {
  ReturnAnchors a;
  a.uniform = PolicyReturn(mdp, PolicyTable::Uniform(mdp.n_states(), mdp.n_actions()));
  a.expert = PolicyReturn(mdp, expert);
  if (!(std::abs(a.expert - a.uniform) > 1e-12)) {
    throw Error(ErrorCode::kDegenerate,
                "normalized return: expert and uniform policies have the same return");
  }
  return a;
}

namespace {

double StepCount(const std::vector<Trajectory>& batch) {
  double n = 0.0;
  for (const auto& t : batch) n += static_cast<double>(t.size());
  if (n == 0.0) throw ValidationError("batch: must contain at least one step");
  return n;
}

double BatchMean(const Matrix& table, const std::vector<Trajectory>& batch,
                 double (*fn)(double)) {
  double sum = 0.0;
  for (const auto& t : batch) {
    for (const Step& st : t) sum += fn(table(st.state, st.action));
  }
  return sum / StepCount(batch);
}

double LogOf(double v) { return std::log(v); }
double LogOneMinus(double v) { return std::log1p(-v); }
double SquaredOffHalf(double v) { return (v - 0.5) * (v - 0.5); }

}  // namespace

Matrix PairFrequencies(const std::vector<Trajectory>& batch, int n_states,
                       int n_actions) {
  Matrix f = Matrix::Zero(n_states, n_actions);
  for (const auto& t : batch) {
    for (const Step& st : t) f(st.state, st.action) += 1.0;
  }
  return f / StepCount(batch);
}

double DiscRegularizer(const Matrix& disc, const std::vector<Trajectory>& learner,
                       const std::vector<Trajectory>& expert, double k) {
  return 0.5 * k *
         (BatchMean(disc, learner, SquaredOffHalf) +
          BatchMean(disc, expert, SquaredOffHalf));
}

double DiscLossControlled(const Matrix& disc,
                          const std::vector<Trajectory>& learner,
                          const std::vector<Trajectory>& expert, double k) {
  return BatchMean(disc, learner, LogOf) + BatchMean(disc, expert, LogOneMinus) -
         DiscRegularizer(disc, learner, expert, k);
}

Matrix DiscLossGradient(const Matrix& disc, const std::vector<Trajectory>& learner,
                        const std::vector<Trajectory>& expert, double k) {
  const auto ns = static_cast<int>(disc.rows());
  const auto na = static_cast<int>(disc.cols());
  const Matrix fl = PairFrequencies(learner, ns, na);
  const Matrix fe = PairFrequencies(expert, ns, na);
  const Matrix ones = Matrix::Ones(ns, na);
  Matrix g = fl.cwiseQuotient(disc) - fe.cwiseQuotient(ones - disc);
  if (k != 0.0) {
    g -= k * (disc.array() - 0.5).matrix().cwiseProduct(fl + fe);
  }
  return g;
}

Matrix Sigmoid(const Matrix& logits) {
  return logits.unaryExpr([](double z) {
    return std::clamp(1.0 / (1.0 + std::exp(-z)), kDiscClamp, 1.0 - kDiscClamp);
  });
}

Matrix DiscLogitGradient(const Matrix& disc_logits,
                         const std::vector<Trajectory>& learner,
                         const std::vector<Trajectory>& expert, double k) {
  const auto ns = static_cast<int>(disc_logits.rows());
  const auto na = static_cast<int>(disc_logits.cols());
  const Matrix d = Sigmoid(disc_logits);
  const Matrix fl = PairFrequencies(learner, ns, na);
  const Matrix fe = PairFrequencies(expert, ns, na);
  // dlogD/dphi = 1 - D, dlog(1-D)/dphi = -D.
  Matrix g = fl.cwiseProduct(Matrix::Ones(ns, na) - d) - fe.cwiseProduct(d);
  if (k != 0.0) {
    const Matrix slope = d.cwiseProduct(Matrix::Ones(ns, na) - d);
    g -= k * (d.array() - 0.5).matrix().cwiseProduct(slope).cwiseProduct(fl + fe);
  }
  return g;
}

PolicyObjectiveEstimate PolicyObjective(const Matrix& logits, const Matrix& disc,
                                        double lambda, double gamma,
                                        const std::vector<Trajectory>& batch) {
  if (batch.empty()) throw ValidationError("batch: must contain a trajectory");
  const PolicyTable policy = PolicyTable::FromLogits(logits);
  const Matrix& pi = policy.probs();
  const auto ns = pi.rows();
  const auto na = pi.cols();
  const Matrix reward =
      disc.array().log().matrix() + lambda * pi.array().log().matrix();

  std::vector<std::vector<double>> to_go(batch.size());
  Vector base_sum = Vector::Zero(ns);
  Vector base_count = Vector::Zero(ns);
  double objective = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Trajectory& t = batch[i];
    to_go[i].resize(t.size());
    double acc = 0.0;
    for (std::size_t n = t.size(); n-- > 0;) {
      acc = reward(t[n].state, t[n].action) + gamma * acc;
      to_go[i][n] = acc;
      base_sum(t[n].state) += acc;
      base_count(t[n].state) += 1.0;
    }
    objective += acc;
  }
  const double n_traj = static_cast<double>(batch.size());
  PolicyObjectiveEstimate out;
  out.objective = objective / n_traj;
  out.gradient = Matrix::Zero(ns, na);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Trajectory& t = batch[i];
    double discount = 1.0;
    for (std::size_t n = 0; n < t.size(); ++n) {
      const int s = t[n].state;
      const double adv = to_go[i][n] - base_sum(s) / base_count(s);
      const double w = discount * adv / n_traj;
      out.gradient.row(s) -= w * pi.row(s);
      out.gradient(s, t[n].action) += w;
      discount *= gamma;
    }
  }
  return out;
}

Vector StateFrequencies(const std::vector<Trajectory>& batch, int n_states) {
  Vector c = Vector::Zero(n_states);
  for (const auto& t : batch) {
    for (const Step& st : t) c(st.state) += 1.0;
  }
  return c / StepCount(batch);
}

namespace {

void CheckControllerInputs(const PolicyTable& policy, const PolicyTable& expert,
                           const Vector& state_weight) {
  if (policy.n_states() != expert.n_states() ||
      policy.n_actions() != expert.n_actions() ||
      state_weight.size() != policy.n_states()) {
    throw Error(ErrorCode::kInvalidArgument, "controller: shape mismatch");
  }
  for (int s = 0; s < expert.n_states(); ++s) {
    if (state_weight(s) <= 0.0) continue;
    for (int a = 0; a < expert.n_actions(); ++a) {
      if (expert(s, a) <= kPolicyFloor) {
        throw Error(ErrorCode::kDegenerate,
                    "controller: expert[" + std::to_string(s) + "][" +
                        std::to_string(a) + "] is at the policy floor");
      }
    }
  }
}

// dPhi/dpi(s, a).
Matrix PotentialSlope(const PolicyTable& policy, const PolicyTable& expert,
                      const Vector& c, double lambda, double alpha) {
  Matrix g(policy.n_states(), policy.n_actions());
  for (int s = 0; s < policy.n_states(); ++s) {
    for (int a = 0; a < policy.n_actions(); ++a) {
      const double e = expert(s, a);
      g(s, a) = alpha * policy(s, a) / e + c(s) * std::log(0.5) +
                c(s) * lambda * std::log(e) + c(s) * lambda - alpha;
    }
  }
  return g;
}

}  // namespace

double ControllerPotential(const PolicyTable& policy, const PolicyTable& expert,
                           const Vector& state_weight, double lambda,
                           double alpha) {
  CheckControllerInputs(policy, expert, state_weight);
  double total = 0.0;
  for (int s = 0; s < policy.n_states(); ++s) {
    const double c = state_weight(s);
    for (int a = 0; a < policy.n_actions(); ++a) {
      const double y = policy(s, a);
      const double e = expert(s, a);
      total += 0.5 * alpha * y * y / e +
               (c * std::log(0.5) + c * lambda * std::log(e) + c * lambda - alpha) * y;
    }
  }
  return total;
}

Matrix ControllerPotentialLogitGradient(const PolicyTable& policy,
                                        const PolicyTable& expert,
                                        const Vector& state_weight,
                                        double lambda, double alpha) {
  CheckControllerInputs(policy, expert, state_weight);
  const Matrix g = PotentialSlope(policy, expert, state_weight, lambda, alpha);
  const Matrix& pi = policy.probs();
  Matrix out(pi.rows(), pi.cols());
  for (Eigen::Index s = 0; s < pi.rows(); ++s) {
    const double mean = pi.row(s).dot(g.row(s));
    out.row(s) = pi.row(s).cwiseProduct(g.row(s).array().matrix() -
                                        Eigen::RowVectorXd::Constant(pi.cols(), mean));
  }
  return out;
}

double PolicyLossOracleControlled(const TabularMDP& mdp, const PolicyTable& policy,
                                  const PolicyTable& expert,
                                  const DiscriminatorTable& disc,
                                  const Vector& state_weight, double lambda,
                                  double alpha) {
  return ObjectiveVPi(mdp, policy, disc, lambda) -
         ControllerPotential(policy, expert, state_weight, lambda, alpha);
}

double ScalarDiscObjectiveControlled(const ScalarSystemParams& p, double x,
                                     double y) {
  return p.c * y * std::log(x) + p.c * p.expert_prob * std::log1p(-x) -
         0.5 * p.k * (x - 0.5) * (x - 0.5);
}

double ScalarPolicyObjectiveControlled(const ScalarSystemParams& p, double x,
                                       double y) {
  const double e = p.expert_prob;
  const double linear = p.c * std::log(0.5) + p.c * p.lambda * std::log(e) +
                        p.c * p.lambda - p.alpha;
  return p.c * y * (std::log(x) + p.lambda * std::log(y)) -
         (0.5 * p.alpha * y * y / e + linear * y);
}

namespace {

void RecordDiscStats(const Matrix& disc, const std::vector<Trajectory>& learner,
                     const std::vector<Trajectory>& expert, TrainingRecord& rec) {
  std::set<std::pair<int, int>> seen;
  for (const auto* batch : {&learner, &expert}) {
    for (const auto& t : *batch) {
      for (const Step& st : t) seen.insert({st.state, st.action});
    }
  }
  double sum = 0.0, dev = 0.0;
  for (const auto& [s, a] : seen) {
    sum += disc(s, a);
    dev += std::abs(disc(s, a) - 0.5);
  }
  rec.disc_mean = sum / static_cast<double>(seen.size());
  rec.disc_dev_half = dev / static_cast<double>(seen.size());
}

}  // namespace

TrainingTrace Train(const TabularMDP& mdp, const PolicyTable& expert,
                    const TrainConfig& config) {
  config.Validate();
  if (expert.n_states() != mdp.n_states() || expert.n_actions() != mdp.n_actions()) {
    throw ValidationError("expert: shape does not match the MDP");
  }
  const ReturnAnchors anchors = ComputeAnchors(mdp, expert);
  const Matrix cost = StateCost(mdp, config.ground_cost);

  Rng learner_rng(config.seed, kLearnerStream);
  Rng expert_rng(config.seed, kExpertStream);
  Rng eval_rng(config.seed, kEvalStream);
  Rng expert_eval_rng(config.seed, kExpertEvalStream);

  const auto expert_batch = SampleTrajectories(mdp, expert, config.n_expert_traj,
                                               config.horizon, expert_rng);
  const EmpiricalStateDistribution expert_states = StateDistribution(
      SampleTrajectories(mdp, expert, config.eval_traj, config.eval_horizon,
                         expert_eval_rng),
      cost);

  Matrix theta = config.init_policy == InitPolicy::kExpert
                     ? Matrix(expert.probs().array().log().matrix())
                     : Matrix::Zero(mdp.n_states(), mdp.n_actions());
  Matrix phi = Matrix::Zero(mdp.n_states(), mdp.n_actions());

  TrainingTrace trace;
  trace.records.reserve(config.iterations);
  for (int it = 0; it < config.iterations; ++it) {
    const PolicyTable policy = PolicyTable::FromLogits(theta);
    const auto batch = SampleTrajectories(mdp, policy, config.n_traj_per_iter,
                                          config.horizon, learner_rng);

    phi += config.lr_disc * DiscLogitGradient(phi, batch, expert_batch, config.k);
    const Matrix disc = Sigmoid(phi);

    const PolicyObjectiveEstimate est =
        PolicyObjective(theta, disc, config.lambda, mdp.gamma(), batch);
    Matrix grad = est.gradient;
    if (config.oracle_policy_controller) {
      grad -= ControllerPotentialLogitGradient(
          policy, expert, StateFrequencies(batch, mdp.n_states()), config.lambda,
          config.alpha);
    }
    theta -= config.lr_policy * grad;
    if (!theta.allFinite() || theta.cwiseAbs().maxCoeff() > 1e3) {
      throw Error(ErrorCode::kDivergence, "train: policy logits exceeded 1e3 at iteration " +
                                              std::to_string(it));
    }

    const PolicyTable updated = PolicyTable::FromLogits(theta);
    TrainingRecord rec;
    rec.iter = it;
    rec.ret = PolicyReturn(mdp, updated);
    rec.normalized_return = anchors.Normalize(rec.ret);
    if (!std::isfinite(rec.normalized_return)) {
      throw Error(ErrorCode::kDivergence,
                  "train: non-finite return at iteration " + std::to_string(it));
    }
    RecordDiscStats(disc, batch, expert_batch, rec);
    rec.tv_to_expert = PolicyDistanceToExpert(mdp, updated, expert);
    rec.wasserstein_state = Wasserstein(
        StateDistribution(SampleTrajectories(mdp, updated, config.eval_traj,
                                             config.eval_horizon, eval_rng),
                          cost),
        expert_states);
    rec.regularizer_value = DiscRegularizer(disc, batch, expert_batch, config.k);
    trace.records.push_back(rec);
  }
  trace.policy_logits = std::move(theta);
  trace.disc_logits = std::move(phi);
  return trace;
}

double OscillationRange(const std::vector<double>& values, int window) {
  if (window < 1 || static_cast<std::size_t>(window) > values.size()) {
    throw ValidationError("window: must be in [1, iterations]");
  }
  const auto first = values.end() - window;
  const auto [lo, hi] = std::minmax_element(first, values.end());
  return *hi - *lo;
}

std::optional<int> ConvergenceStep(const std::vector<double>& values) {
  if (values.empty()) return std::nullopt;
  const double target = 0.95 * *std::max_element(values.begin(), values.end());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] >= target) return static_cast<int>(i);
  }
  return std::nullopt;
}

std::vector<double> NormalizedReturns(const TrainingTrace& trace) {
  std::vector<double> out;
  out.reserve(trace.records.size());
  for (const auto& r : trace.records) out.push_back(r.normalized_return);
  return out;
}

}  // namespace cgail
