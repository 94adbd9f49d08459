#include "gail_flow.hpp"

#include <cmath>
#include <string>

#include "error.hpp"

namespace cgail {

double ObjectiveVD(const TabularMDP& mdp, const PolicyTable& policy,
                   const PolicyTable& expert, const DiscriminatorTable& disc) {
  const Vector rho = SolveOccupancy(mdp, policy);
  const Vector rho_e = SolveOccupancy(mdp, expert);
  const Matrix log_d = disc.values().array().log();
  const Matrix log_1md = (1.0 - disc.values().array()).log();
  return (rho.asDiagonal() * policy.probs()).cwiseProduct(log_d).sum() +
         (rho_e.asDiagonal() * expert.probs()).cwiseProduct(log_1md).sum();
}

double ObjectiveVPi(const TabularMDP& mdp, const PolicyTable& policy,
                    const DiscriminatorTable& disc, double lambda) {
  const Vector rho = SolveOccupancy(mdp, policy);
  const Matrix reward = disc.values().array().log() +
                        lambda * policy.probs().array().log();
  return (rho.asDiagonal() * policy.probs()).cwiseProduct(reward).sum();
}

Matrix DiscDrift(const TabularMDP& mdp, const PolicyTable& policy,
                 const PolicyTable& expert, const DiscriminatorTable& disc) {
  const Vector rho = SolveOccupancy(mdp, policy);
  const Vector rho_e = SolveOccupancy(mdp, expert);
  const auto d = disc.values().array();
  return ((rho.asDiagonal() * policy.probs()).array() / d -
          (rho_e.asDiagonal() * expert.probs()).array() / (1.0 - d))
      .matrix();
}

Matrix PolicyDrift(const TabularMDP& mdp, const PolicyTable& policy,
                   const DiscriminatorTable& disc, double lambda) {
  const ValueTables v = SolveValueTables(mdp, policy, disc, lambda);
  return -(v.occupancy.asDiagonal() * v.advantage);
}

DriftReport Drifts(const TabularMDP& mdp, const PolicyTable& policy,
                   const PolicyTable& expert, const DiscriminatorTable& disc,
                   double lambda) {
  DriftReport r;
  r.d_disc = DiscDrift(mdp, policy, expert, disc);
  r.d_policy = PolicyDrift(mdp, policy, disc, lambda);
  r.max_abs_disc_drift = r.d_disc.lpNorm<Eigen::Infinity>();
  r.max_abs_policy_drift = r.d_policy.lpNorm<Eigen::Infinity>();
  return r;
}

DriftReport DesiredStateReport(const TabularMDP& mdp, const PolicyTable& expert,
                               double lambda) {
  const auto half =
      DiscriminatorTable::Constant(mdp.n_states(), mdp.n_actions(), 0.5);
  return Drifts(mdp, expert, expert, half, lambda);
}

double PolicyDistanceToExpert(const TabularMDP& mdp, const PolicyTable& policy,
                              const PolicyTable& expert) {
  const Vector rho_e = SolveOccupancy(mdp, expert);
  const Vector tv =
      0.5 * (policy.probs() - expert.probs()).cwiseAbs().rowwise().sum();
  return rho_e.dot(tv) / rho_e.sum();
}

namespace {

struct Projected {
  FlowState state;
  double magnitude;
};

Projected Project(Matrix policy, Matrix disc, double t) {
  double magnitude = 0.0;
  for (Eigen::Index s = 0; s < policy.rows(); ++s) {
    Eigen::RowVectorXd row = policy.row(s).cwiseMax(kPolicyFloor);
    row /= row.sum();
    magnitude = std::max(magnitude,
                         (row - policy.row(s)).lpNorm<Eigen::Infinity>());
    policy.row(s) = row;
  }
  for (Eigen::Index i = 0; i < disc.size(); ++i) {
    double& d = disc.data()[i];
    const double c = std::clamp(d, kDiscClamp, 1.0 - kDiscClamp);
    magnitude = std::max(magnitude, std::abs(c - d));
    d = c;
  }
  return {FlowState{PolicyTable(std::move(policy)),
                    DiscriminatorTable(std::move(disc)), t},
          magnitude};
}

FlowRecord Record(const TabularMDP& mdp, const PolicyTable& expert,
                  const FlowState& state, const DriftReport& drift,
                  double lambda, int step, double projection) {
  FlowRecord r;
  r.step = step;
  r.t = state.t;
  r.vd = ObjectiveVD(mdp, state.policy, expert, state.disc);
  r.vpi = ObjectiveVPi(mdp, state.policy, state.disc, lambda);
  r.max_abs_disc_drift = drift.max_abs_disc_drift;
  r.max_abs_policy_drift = drift.max_abs_policy_drift;
  r.policy_distance_to_expert = PolicyDistanceToExpert(mdp, state.policy, expert);
  r.projection_magnitude = projection;
  return r;
}

}  // namespace

FlowTrace IntegrateFlow(const TabularMDP& mdp, const PolicyTable& expert,
                        const FlowState& init, double lambda, double dt,
                        int steps) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw ValidationError("dt: must be positive and finite");
  }
  if (steps < 0) throw ValidationError("steps: must be >= 0");
  const double limit = 0.5 / dt;

  FlowTrace trace;
  trace.states.reserve(steps + 1);
  trace.drifts.reserve(steps + 1);
  trace.records.reserve(steps + 1);

  trace.states.push_back(init);
  trace.drifts.push_back(Drifts(mdp, init.policy, expert, init.disc, lambda));
  trace.records.push_back(
      Record(mdp, expert, init, trace.drifts.back(), lambda, 0, 0.0));

  for (int step = 1; step <= steps; ++step) {
    const FlowState& cur = trace.states.back();
    const DriftReport& drift = trace.drifts.back();
    const double worst =
        std::max(drift.max_abs_disc_drift, drift.max_abs_policy_drift);
    if (!(worst <= limit)) {
      throw Error(ErrorCode::kStepSize,
                  "flow: drift magnitude " + std::to_string(worst) +
                      " exceeds 0.5/dt at step " + std::to_string(step) +
                      "; reduce dt");
    }
    Matrix policy = cur.policy.probs() + dt * drift.d_policy;
    Matrix disc = cur.disc.values() + dt * drift.d_disc;
    Projected next = Project(std::move(policy), std::move(disc),
                             init.t + step * dt);
    trace.states.push_back(std::move(next.state));
    const FlowState& s = trace.states.back();
    trace.drifts.push_back(Drifts(mdp, s.policy, expert, s.disc, lambda));
    trace.records.push_back(Record(mdp, expert, s, trace.drifts.back(), lambda,
                                   step, next.magnitude));
  }
  return trace;
}

}  // namespace cgail
