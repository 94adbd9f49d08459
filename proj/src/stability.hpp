#pragma once

#include <array>
#include <vector>

#include "onestep.hpp"

namespace cgail {

// Linearization of the controlled one-step system at (1/2, E).
struct Jacobian2x2 {
  double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;
  double det = 0.0;
  double trace = 0.0;
  std::array<double, 2> eig_real{};
  std::array<double, 2> eig_imag{};
};

struct StabilityVerdict {
  bool assumption_holds = false;
  bool eig_stable = false;
  bool det_trace_stable = false;
  bool agree = false;
  // |trace| or |det| below 1e-9: linearization inconclusive.
  bool marginal = false;
};

struct AssumptionTerms {
  bool holds = false;
  double k = 0.0;
  // 8c^2 lam - 8c alpha - 4c^2 + c k lam - k alpha, must be > 0.
  double det_term = 0.0;
  // (k^2 + 32c(-c lam + alpha)) / 32c, must be < 0.
  double trace_term = 0.0;
};

// Fills det, trace and eigenvalues from the four entries. Real roots use the
// cancellation-free pair q = (tr + sign(tr) sqrt(disc)) / 2, det / q, so the
// signs of the eigenvalues agree with the det/trace test exactly.
Jacobian2x2 FromEntries(double a11, double a12, double a21, double a22);

// [[-8cE - k, 2c], [-2c, (-c lam + alpha) / E]].
Jacobian2x2 JacobianClosedForm(const ScalarSystemParams& p);

// Central differences of DriftControlled at (1/2, E).
Jacobian2x2 JacobianNumeric(const ScalarSystemParams& p, double step = 1e-6);

// Determinant expansion as printed alongside the closed-form Jacobian in the
// original derivation. Kept for comparison only; it differs from the entry
// determinant by 8c^2 in the numerator.
double PrintedDeterminant(const ScalarSystemParams& p);

AssumptionTerms AssumptionCheck(const ScalarSystemParams& p);

StabilityVerdict Classify(const ScalarSystemParams& p);

struct ParamRange {
  double lo = 0.0;
  double hi = 0.0;
  int n = 1;

  std::vector<double> Values() const;
};

struct AuditSpec {
  ParamRange c, lambda, expert_prob, k, alpha;
  double dt = 1e-3;
  double horizon = 50.0;
  double tolerance = 1e-6;
  // Initial state = (1/2 + dx, E + dy_rel * E).
  double perturb_x = 0.02;
  double perturb_y_rel = 0.02;
  int threads = 1;
};

struct AuditRow {
  ScalarSystemParams params;
  Jacobian2x2 jacobian;
  StabilityVerdict verdict;
  bool converged = false;
  double terminal_distance = 0.0;
  long clamp_events = 0;
  bool counterexample = false;
};

struct AuditTable {
  std::vector<AuditRow> rows;
  int assumption_rows = 0;
  int counterexamples = 0;
  int marginal_rows = 0;
};

// Every tuple of the Cartesian grid (in c, lambda, E, k, alpha order) gets a
// verdict and one perturbed RK4 trajectory. Counterexamples are
// non-marginal rows where the assumption holds and the trajectory did not
// end within `tolerance` of (1/2, E).
AuditTable GridAudit(const AuditSpec& spec);

}  // namespace cgail
