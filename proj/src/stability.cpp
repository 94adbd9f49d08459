#include "stability.hpp"

#include <cmath>

#include "error.hpp"
#include "parallel.hpp"

namespace cgail {

Jacobian2x2 FromEntries(double a11, double a12, double a21, double a22) {
  Jacobian2x2 j;
  j.a11 = a11;
  j.a12 = a12;
  j.a21 = a21;
  j.a22 = a22;
  j.det = a11 * a22 - a12 * a21;
  j.trace = a11 + a22;
  const double disc = j.trace * j.trace - 4.0 * j.det;
  if (disc >= 0.0) {
    const double root = std::sqrt(disc);
    const double q = 0.5 * (j.trace + (j.trace >= 0.0 ? root : -root));
    if (q == 0.0) {
      j.eig_real = {0.0, 0.0};
    } else {
      j.eig_real = {q, j.det / q};
    }
    j.eig_imag = {0.0, 0.0};
  } else {
    const double im = 0.5 * std::sqrt(-disc);
    j.eig_real = {0.5 * j.trace, 0.5 * j.trace};
    j.eig_imag = {im, -im};
  }
  return j;
}

Jacobian2x2 JacobianClosedForm(const ScalarSystemParams& p) {
  p.Validate();
  const double c = p.c;
  const double e = p.expert_prob;
  return FromEntries(-8.0 * c * e - p.k, 2.0 * c, -2.0 * c,
                     (-c * p.lambda + p.alpha) / e);
}

Jacobian2x2 JacobianNumeric(const ScalarSystemParams& p, double step) {
  p.Validate();
  const double x = 0.5;
  const double y = p.expert_prob;
  const Drift2 xp = DriftControlled(p, x + step, y);
  const Drift2 xm = DriftControlled(p, x - step, y);
  const Drift2 yp = DriftControlled(p, x, y + step);
  const Drift2 ym = DriftControlled(p, x, y - step);
  const double h2 = 2.0 * step;
  return FromEntries((xp.dx - xm.dx) / h2, (yp.dx - ym.dx) / h2,
                     (xp.dy - xm.dy) / h2, (yp.dy - ym.dy) / h2);
}

double PrintedDeterminant(const ScalarSystemParams& p) {
  const double c = p.c;
  const double e = p.expert_prob;
  return ((8.0 * c * c * p.lambda - 8.0 * c * p.alpha - 4.0 * c * c) * e +
          (c * p.k * p.lambda - p.k * p.alpha)) /
         e;
}

AssumptionTerms AssumptionCheck(const ScalarSystemParams& p) {
  const double c = p.c;
  AssumptionTerms t;
  t.k = p.k;
  t.det_term = 8.0 * c * c * p.lambda - 8.0 * c * p.alpha - 4.0 * c * c +
               c * p.k * p.lambda - p.k * p.alpha;
  t.trace_term = (p.k * p.k + 32.0 * c * (-c * p.lambda + p.alpha)) / (32.0 * c);
  t.holds = t.k > 0.0 && t.det_term > 0.0 && t.trace_term < 0.0;
  return t;
}

StabilityVerdict Classify(const ScalarSystemParams& p) {
  const Jacobian2x2 j = JacobianClosedForm(p);
  StabilityVerdict v;
  v.assumption_holds = AssumptionCheck(p).holds;
  v.eig_stable = j.eig_real[0] < 0.0 && j.eig_real[1] < 0.0;
  v.det_trace_stable = j.det > 0.0 && j.trace < 0.0;
  v.agree = v.eig_stable == v.det_trace_stable;
  v.marginal = std::abs(j.trace) < 1e-9 || std::abs(j.det) < 1e-9;
  return v;
}

std::vector<double> ParamRange::Values() const {
  if (n < 1) throw ValidationError("range: resolution must be >= 1");
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    throw ValidationError("range: bounds must be finite");
  }
  if (n == 1) return {lo};
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) {
    v[i] = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
  }
  return v;
}

AuditTable GridAudit(const AuditSpec& spec) {
  if (!(spec.dt > 0.0) || !(spec.horizon > 0.0)) {
    throw ValidationError("audit: dt and horizon must be positive");
  }
  std::vector<ScalarSystemParams> tuples;
  for (double c : spec.c.Values())
    for (double lam : spec.lambda.Values())
      for (double e : spec.expert_prob.Values())
        for (double k : spec.k.Values())
          for (double alpha : spec.alpha.Values())
            tuples.push_back({c, lam, e, k, alpha});
  for (const auto& t : tuples) t.Validate();

  const long steps = std::lround(spec.horizon / spec.dt);
  AuditTable table;
  table.rows.resize(tuples.size());
  ParallelFor(tuples.size(), spec.threads, [&](std::size_t i) {
    AuditRow& row = table.rows[i];
    row.params = tuples[i];
    row.jacobian = JacobianClosedForm(row.params);
    row.verdict = Classify(row.params);
    const ScalarState start{0.5 + spec.perturb_x,
                            row.params.expert_prob * (1.0 + spec.perturb_y_rel),
                            0.0};
    const ScalarTrajectory traj =
        Integrate(row.params, start, true, spec.dt, steps, Integrator::kRk4,
                  static_cast<int>(std::max<long>(steps, 1)));
    row.terminal_distance = DistanceToDesired(row.params, traj.terminal);
    row.converged = row.terminal_distance < spec.tolerance;
    row.clamp_events = traj.clamp_events;
    row.counterexample = row.verdict.assumption_holds &&
                         !row.verdict.marginal && !row.converged;
  });
  for (const auto& row : table.rows) {
    table.assumption_rows += row.verdict.assumption_holds;
    table.counterexamples += row.counterexample;
    table.marginal_rows += row.verdict.marginal;
  }
  return table;
}

}  // namespace cgail
