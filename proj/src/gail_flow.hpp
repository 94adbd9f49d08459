#pragma once

#include <vector>

#include "mdp.hpp"

namespace cgail {

struct FlowState {
  PolicyTable policy;
  DiscriminatorTable disc;
  double t = 0.0;
};

struct DriftReport {
  Matrix d_disc;
  Matrix d_policy;
  double max_abs_policy_drift = 0.0;
  double max_abs_disc_drift = 0.0;
};

// One row of the flow trace CSV.
struct FlowRecord {
  int step = 0;
  double t = 0.0;
  double vd = 0.0;
  double vpi = 0.0;
  double max_abs_disc_drift = 0.0;
  double max_abs_policy_drift = 0.0;
  double policy_distance_to_expert = 0.0;
  double projection_magnitude = 0.0;
};

struct FlowTrace {
  std::vector<FlowState> states;
  std::vector<DriftReport> drifts;
  std::vector<FlowRecord> records;
};

// V_D = E_pi[log D] + E_piE[log(1 - D)] with exact occupancies.
double ObjectiveVD(const TabularMDP& mdp, const PolicyTable& policy,
                   const PolicyTable& expert, const DiscriminatorTable& disc);

// V_pi = E_pi[log D] - lambda E_pi[-log pi].
double ObjectiveVPi(const TabularMDP& mdp, const PolicyTable& policy,
                    const DiscriminatorTable& disc, double lambda);

// dD/dt = rho_pi pi / D - rho_E pi_E / (1 - D).
Matrix DiscDrift(const TabularMDP& mdp, const PolicyTable& policy,
                 const PolicyTable& expert, const DiscriminatorTable& disc);

// dpi/dt = -rho_pi(s) A(s, a) with the entropy-augmented advantage.
Matrix PolicyDrift(const TabularMDP& mdp, const PolicyTable& policy,
                   const DiscriminatorTable& disc, double lambda);

DriftReport Drifts(const TabularMDP& mdp, const PolicyTable& policy,
                   const PolicyTable& expert, const DiscriminatorTable& disc,
                   double lambda);

// Drifts at pi = pi_E, D = 1/2, evaluated without any projection.
DriftReport DesiredStateReport(const TabularMDP& mdp, const PolicyTable& expert,
                               double lambda);

// Total variation between learner and expert, averaged over the normalized
// expert occupancy.
double PolicyDistanceToExpert(const TabularMDP& mdp, const PolicyTable& policy,
                              const PolicyTable& expert);

// Explicit Euler on (D, pi). After each step D is clamped and pi is floored
// and renormalized; the max-abs change made by that projection is logged.
// Throws kStepSize when any drift entry exceeds 0.5 / dt.
FlowTrace IntegrateFlow(const TabularMDP& mdp, const PolicyTable& expert,
                        const FlowState& init, double lambda, double dt,
                        int steps);

}  // namespace cgail
