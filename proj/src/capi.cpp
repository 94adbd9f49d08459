#include "cgail/cgail.h"

#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "fixtures.hpp"
#include "gail_flow.hpp"
#include "mdp.hpp"
#include "mdp_io.hpp"
#include "metrics.hpp"
#include "onestep.hpp"
#include "report.hpp"
#include "stability.hpp"
#include "train.hpp"

struct cgail_mdp {
  cgail::TabularMDP mdp;
};

struct cgail_policy {
  cgail::PolicyTable policy;
};

struct cgail_flow_trace {
  cgail::FlowTrace trace;
};

struct cgail_trajectory {
  cgail::ScalarSystemParams params;
  bool controlled;
  cgail::ScalarTrajectory traj;
};

struct cgail_audit {
  cgail::AuditTable table;
};

struct cgail_training_trace {
  cgail::TrainConfig config;
  cgail::TrainingTrace trace;
};

struct cgail_aggregate {
  std::vector<cgail::RunSummary> runs;
  std::vector<cgail::AggregateRow> rows;
  bool dirty = true;

  const std::vector<cgail::AggregateRow>& Rows() {
    if (dirty) {
      rows = cgail::Aggregate(runs);
      dirty = false;
    }
    return rows;
  }
};

namespace {

using cgail::Error;
using cgail::ErrorCode;
using cgail::Matrix;
using cgail::Vector;

thread_local std::string g_last_error;

cgail_status ToStatus(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return CGAIL_ERR_INVALID_ARGUMENT;
    case ErrorCode::kConfig: return CGAIL_ERR_CONFIG;
    case ErrorCode::kIo: return CGAIL_ERR_IO;
    case ErrorCode::kSingular: return CGAIL_ERR_SINGULAR;
    case ErrorCode::kStepSize: return CGAIL_ERR_STEP_SIZE;
    case ErrorCode::kNonFinite: return CGAIL_ERR_NON_FINITE;
    case ErrorCode::kDivergence: return CGAIL_ERR_DIVERGENCE;
    case ErrorCode::kDegenerate: return CGAIL_ERR_DEGENERATE;
    case ErrorCode::kInfeasible: return CGAIL_ERR_INFEASIBLE;
  }
  return CGAIL_ERR_INTERNAL;
}

template <typename Fn>
cgail_status Guard(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return CGAIL_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return ToStatus(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return CGAIL_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CGAIL_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return CGAIL_ERR_INTERNAL;
  }
}

void Require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::kInvalidArgument, what);
}

Matrix ReadMatrix(const double* data, int rows, int cols) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = data[i * cols + j];
  return m;
}

void WriteMatrix(const Matrix& m, double* out) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i * m.cols() + j] = m(i, j);
}

cgail::DiscriminatorTable ReadDisc(const double* disc, const cgail::TabularMDP& mdp) {
  Require(disc != nullptr, "disc: null pointer");
  return cgail::DiscriminatorTable(ReadMatrix(disc, mdp.n_states(), mdp.n_actions()));
}

cgail::ScalarSystemParams FromC(const cgail_scalar_params* p) {
  Require(p != nullptr, "params: null pointer");
  cgail::ScalarSystemParams s{p->c, p->lambda, p->expert_prob, p->k, p->alpha};
  s.Validate();
  return s;
}

cgail_scalar_params ToC(const cgail::ScalarSystemParams& p) {
  return {p.c, p.lambda, p.expert_prob, p.k, p.alpha};
}

cgail_jacobian ToC(const cgail::Jacobian2x2& j) {
  cgail_jacobian out;
  out.a11 = j.a11;
  out.a12 = j.a12;
  out.a21 = j.a21;
  out.a22 = j.a22;
  out.det = j.det;
  out.trace = j.trace;
  for (int i = 0; i < 2; ++i) {
    out.eig_re[i] = j.eig_real[i];
    out.eig_im[i] = j.eig_imag[i];
  }
  return out;
}

cgail_verdict VerdictToC(const cgail::ScalarSystemParams& p,
                         const cgail::StabilityVerdict& v) {
  const cgail::AssumptionTerms terms = cgail::AssumptionCheck(p);
  cgail_verdict out;
  out.assumption_holds = v.assumption_holds;
  out.eig_stable = v.eig_stable;
  out.det_trace_stable = v.det_trace_stable;
  out.agree = v.agree;
  out.marginal = v.marginal;
  out.det_term = terms.det_term;
  out.trace_term = terms.trace_term;
  return out;
}

cgail::ParamRange FromC(const cgail_range& r) { return {r.lo, r.hi, r.n}; }

cgail::TrainConfig FromC(const cgail_train_config* c) {
  Require(c != nullptr, "config: null pointer");
  cgail::TrainConfig t;
  t.k = c->k;
  t.lambda = c->lambda;
  t.alpha = c->alpha;
  t.lr_disc = c->lr_disc;
  t.lr_policy = c->lr_policy;
  t.n_traj_per_iter = c->n_traj_per_iter;
  t.horizon = c->horizon;
  t.iterations = c->iterations;
  t.seed = c->seed;
  t.oracle_policy_controller = c->oracle_policy_controller != 0;
  t.n_expert_traj = c->n_expert_traj;
  t.eval_traj = c->eval_traj;
  t.eval_horizon = c->eval_horizon;
  if (c->ground_cost != CGAIL_COST_HOP && c->ground_cost != CGAIL_COST_DISCRETE) {
    throw cgail::ValidationError("ground_cost: unknown value");
  }
  t.ground_cost = c->ground_cost == CGAIL_COST_HOP ? cgail::GroundCost::kHop
                                                   : cgail::GroundCost::kDiscrete;
  if (c->init_policy != CGAIL_INIT_UNIFORM && c->init_policy != CGAIL_INIT_EXPERT) {
    throw cgail::ValidationError("init_policy: unknown value");
  }
  t.init_policy = c->init_policy == CGAIL_INIT_UNIFORM ? cgail::InitPolicy::kUniform
                                                       : cgail::InitPolicy::kExpert;
  return t;
}

void CopyString(const std::string& s, char* buf, size_t len, size_t* needed) {
  if (needed) *needed = s.size() + 1;
  if (buf == nullptr || len == 0) return;
  if (len < s.size() + 1) {
    throw Error(ErrorCode::kInvalidArgument, "buffer too small");
  }
  std::memcpy(buf, s.c_str(), s.size() + 1);
}

}  // namespace

extern "C" {

const char* cgail_last_error(void) { return g_last_error.c_str(); }

const char* cgail_status_name(cgail_status status) {
  switch (status) {
    case CGAIL_OK: return "ok";
    case CGAIL_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case CGAIL_ERR_CONFIG: return "config";
    case CGAIL_ERR_IO: return "io";
    case CGAIL_ERR_SINGULAR: return "singular";
    case CGAIL_ERR_STEP_SIZE: return "step_size";
    case CGAIL_ERR_NON_FINITE: return "non_finite";
    case CGAIL_ERR_DIVERGENCE: return "divergence";
    case CGAIL_ERR_DEGENERATE: return "degenerate";
    case CGAIL_ERR_INFEASIBLE: return "infeasible";
    case CGAIL_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* cgail_version(void) { return "0.1.0"; }

/* MDPs and policies */

cgail_status cgail_mdp_create(int n_states, int n_actions, const double* transition,
                              const double* init_dist, double gamma,
                              const double* eval_reward, cgail_mdp** out) {
  return Guard([&] {
    Require(out && transition && init_dist && eval_reward, "cgail_mdp_create: null pointer");
    Require(n_states > 0 && n_actions > 0, "cgail_mdp_create: sizes must be positive");
    std::vector<Matrix> p(n_actions, Matrix::Zero(n_states, n_states));
    for (int s = 0; s < n_states; ++s)
      for (int a = 0; a < n_actions; ++a)
        for (int t = 0; t < n_states; ++t)
          p[a](s, t) = transition[(s * n_actions + a) * n_states + t];
    Vector p0 = Eigen::Map<const Vector>(init_dist, n_states);
    *out = new cgail_mdp{cgail::TabularMDP(std::move(p), std::move(p0), gamma,
                                           ReadMatrix(eval_reward, n_states, n_actions))};
  });
}

cgail_status cgail_mdp_from_json(const char* text, cgail_mdp** out) {
  return Guard([&] {
    Require(text && out, "cgail_mdp_from_json: null pointer");
    *out = new cgail_mdp{cgail::ParseMdpJson(text)};
  });
}

cgail_status cgail_mdp_load(const char* path, cgail_mdp** out) {
  return Guard([&] {
    Require(path && out, "cgail_mdp_load: null pointer");
    *out = new cgail_mdp{cgail::LoadMdpJson(path)};
  });
}

cgail_status cgail_mdp_builtin(const char* name, cgail_mdp** mdp, cgail_policy** expert) {
  return Guard([&] {
    Require(name && mdp, "cgail_mdp_builtin: null pointer");
    cgail::Fixture f = cgail::BuiltinFixture(name);
    auto m = std::make_unique<cgail_mdp>(cgail_mdp{std::move(f.mdp)});
    if (expert) {
      *expert = f.expert ? new cgail_policy{std::move(*f.expert)} : nullptr;
    }
    *mdp = m.release();
  });
}

cgail_status cgail_builtin_names(char* buf, size_t len) {
  return Guard([&] {
    std::string joined;
    for (const auto& n : cgail::BuiltinFixtureNames()) {
      if (!joined.empty()) joined += ',';
      joined += n;
    }
    Require(buf != nullptr, "cgail_builtin_names: null pointer");
    CopyString(joined, buf, len, nullptr);
  });
}

cgail_status cgail_mdp_to_json(const cgail_mdp* mdp, char* buf, size_t len,
                               size_t* needed) {
  return Guard([&] {
    Require(mdp != nullptr, "cgail_mdp_to_json: null pointer");
    CopyString(cgail::MdpToJson(mdp->mdp), buf, len, needed);
  });
}

void cgail_mdp_free(cgail_mdp* mdp) { delete mdp; }
int cgail_mdp_n_states(const cgail_mdp* mdp) { return mdp ? mdp->mdp.n_states() : 0; }
int cgail_mdp_n_actions(const cgail_mdp* mdp) { return mdp ? mdp->mdp.n_actions() : 0; }
double cgail_mdp_gamma(const cgail_mdp* mdp) { return mdp ? mdp->mdp.gamma() : 0.0; }

cgail_status cgail_policy_create(int n_states, int n_actions, const double* probs,
                                 cgail_policy** out) {
  return Guard([&] {
    Require(probs && out, "cgail_policy_create: null pointer");
    Require(n_states > 0 && n_actions > 0, "cgail_policy_create: sizes must be positive");
    *out = new cgail_policy{cgail::PolicyTable(ReadMatrix(probs, n_states, n_actions))};
  });
}

cgail_status cgail_policy_from_json(const char* text, cgail_policy** out) {
  return Guard([&] {
    Require(text && out, "cgail_policy_from_json: null pointer");
    *out = new cgail_policy{cgail::ParsePolicyJson(text)};
  });
}

cgail_status cgail_policy_uniform(int n_states, int n_actions, cgail_policy** out) {
  return Guard([&] {
    Require(out != nullptr, "cgail_policy_uniform: null pointer");
    Require(n_states > 0 && n_actions > 0, "cgail_policy_uniform: sizes must be positive");
    *out = new cgail_policy{cgail::PolicyTable::Uniform(n_states, n_actions)};
  });
}

cgail_status cgail_policy_soft_optimal(const cgail_mdp* mdp, double temperature,
                                       cgail_policy** out) {
  return Guard([&] {
    Require(mdp && out, "cgail_policy_soft_optimal: null pointer");
    *out = new cgail_policy{cgail::SoftOptimalPolicy(mdp->mdp, temperature)};
  });
}

cgail_status cgail_policy_probs(const cgail_policy* policy, double* out, size_t len) {
  return Guard([&] {
    Require(policy && out, "cgail_policy_probs: null pointer");
    Require(len >= static_cast<size_t>(policy->policy.probs().size()),
            "cgail_policy_probs: buffer too small");
    WriteMatrix(policy->policy.probs(), out);
  });
}

void cgail_policy_free(cgail_policy* policy) { delete policy; }

/* exact evaluation */

cgail_status cgail_occupancy(const cgail_mdp* mdp, const cgail_policy* policy,
                             double* out, size_t len) {
  return Guard([&] {
    Require(mdp && policy && out, "cgail_occupancy: null pointer");
    Require(len >= static_cast<size_t>(mdp->mdp.n_states()), "cgail_occupancy: buffer too small");
    const Vector rho = cgail::SolveOccupancy(mdp->mdp, policy->policy);
    for (Eigen::Index i = 0; i < rho.size(); ++i) out[i] = rho(i);
  });
}

cgail_status cgail_policy_return(const cgail_mdp* mdp, const cgail_policy* policy,
                                 double* out) {
  return Guard([&] {
    Require(mdp && policy && out, "cgail_policy_return: null pointer");
    *out = cgail::PolicyReturn(mdp->mdp, policy->policy);
  });
}

cgail_status cgail_value_tables(const cgail_mdp* mdp, const cgail_policy* policy,
                                const double* disc, double lambda, double* occupancy,
                                double* q, double* advantage) {
  return Guard([&] {
    Require(mdp && policy, "cgail_value_tables: null pointer");
    const cgail::ValueTables v = cgail::SolveValueTables(
        mdp->mdp, policy->policy, ReadDisc(disc, mdp->mdp), lambda);
    if (occupancy) {
      for (Eigen::Index i = 0; i < v.occupancy.size(); ++i) occupancy[i] = v.occupancy(i);
    }
    if (q) WriteMatrix(v.q, q);
    if (advantage) WriteMatrix(v.advantage, advantage);
  });
}

/* flow */

cgail_status cgail_objective_vd(const cgail_mdp* mdp, const cgail_policy* policy,
                                const cgail_policy* expert, const double* disc,
                                double* out) {
  return Guard([&] {
    Require(mdp && policy && expert && out, "cgail_objective_vd: null pointer");
    *out = cgail::ObjectiveVD(mdp->mdp, policy->policy, expert->policy,
                              ReadDisc(disc, mdp->mdp));
  });
}

cgail_status cgail_objective_vpi(const cgail_mdp* mdp, const cgail_policy* policy,
                                 const double* disc, double lambda, double* out) {
  return Guard([&] {
    Require(mdp && policy && out, "cgail_objective_vpi: null pointer");
    *out = cgail::ObjectiveVPi(mdp->mdp, policy->policy, ReadDisc(disc, mdp->mdp), lambda);
  });
}

cgail_status cgail_drifts(const cgail_mdp* mdp, const cgail_policy* policy,
                          const cgail_policy* expert, const double* disc,
                          double lambda, double* d_disc, double* d_policy) {
  return Guard([&] {
    Require(mdp && policy && expert, "cgail_drifts: null pointer");
    const cgail::DriftReport r = cgail::Drifts(mdp->mdp, policy->policy, expert->policy,
                                               ReadDisc(disc, mdp->mdp), lambda);
    if (d_disc) WriteMatrix(r.d_disc, d_disc);
    if (d_policy) WriteMatrix(r.d_policy, d_policy);
  });
}

cgail_status cgail_desired_state_report(const cgail_mdp* mdp, const cgail_policy* expert,
                                        double lambda, double* max_abs_disc_drift,
                                        double* max_abs_policy_drift) {
  return Guard([&] {
    Require(mdp && expert && max_abs_disc_drift && max_abs_policy_drift,
            "cgail_desired_state_report: null pointer");
    const cgail::DriftReport r = cgail::DesiredStateReport(mdp->mdp, expert->policy, lambda);
    *max_abs_disc_drift = r.max_abs_disc_drift;
    *max_abs_policy_drift = r.max_abs_policy_drift;
  });
}

cgail_status cgail_flow_integrate(const cgail_mdp* mdp, const cgail_policy* expert,
                                  const cgail_policy* init_policy, const double* init_disc,
                                  double lambda, double dt, int steps,
                                  cgail_flow_trace** out) {
  return Guard([&] {
    Require(mdp && expert && init_policy && out, "cgail_flow_integrate: null pointer");
    const int ns = mdp->mdp.n_states();
    const int na = mdp->mdp.n_actions();
    cgail::DiscriminatorTable disc = init_disc
                                         ? ReadDisc(init_disc, mdp->mdp)
                                         : cgail::DiscriminatorTable::Constant(ns, na, 0.5);
    const cgail::FlowState init{init_policy->policy, std::move(disc), 0.0};
    *out = new cgail_flow_trace{
        cgail::IntegrateFlow(mdp->mdp, expert->policy, init, lambda, dt, steps)};
  });
}

size_t cgail_flow_trace_length(const cgail_flow_trace* trace) {
  return trace ? trace->trace.records.size() : 0;
}

cgail_status cgail_flow_trace_record(const cgail_flow_trace* trace, size_t i,
                                     cgail_flow_record* out) {
  return Guard([&] {
    Require(trace && out, "cgail_flow_trace_record: null pointer");
    Require(i < trace->trace.records.size(), "cgail_flow_trace_record: index out of range");
    const cgail::FlowRecord& r = trace->trace.records[i];
    *out = {r.step, r.t, r.vd, r.vpi, r.max_abs_disc_drift, r.max_abs_policy_drift,
            r.policy_distance_to_expert, r.projection_magnitude};
  });
}

cgail_status cgail_flow_trace_write_csv(const cgail_flow_trace* trace, const char* path) {
  return Guard([&] {
    Require(trace && path, "cgail_flow_trace_write_csv: null pointer");
    cgail::WriteTextFile(path, cgail::FlowCsv(trace->trace));
  });
}

void cgail_flow_trace_free(cgail_flow_trace* trace) { delete trace; }

/* one-step system */

cgail_status cgail_scalar_drift(const cgail_scalar_params* p, double x, double y,
                                int controlled, double* dx, double* dy) {
  return Guard([&] {
    Require(dx && dy, "cgail_scalar_drift: null pointer");
    const cgail::Drift2 d = cgail::Drift(FromC(p), x, y, controlled != 0);
    *dx = d.dx;
    *dy = d.dy;
  });
}

cgail_status cgail_controller(const cgail_scalar_params* p, double x, double y,
                              double* u1, double* u2) {
  return Guard([&] {
    Require(u1 && u2, "cgail_controller: null pointer");
    const cgail::ScalarSystemParams s = FromC(p);
    *u1 = cgail::ControllerU1(s, x);
    *u2 = cgail::ControllerU2(s, y);
  });
}

cgail_status cgail_scalar_integrate(const cgail_scalar_params* p, double x0, double y0,
                                    int controlled, double dt, long steps,
                                    cgail_integrator integrator, int record_every,
                                    cgail_trajectory** out) {
  return Guard([&] {
    Require(out != nullptr, "cgail_scalar_integrate: null pointer");
    Require(integrator == CGAIL_EULER || integrator == CGAIL_RK4,
            "cgail_scalar_integrate: unknown integrator");
    const cgail::ScalarSystemParams s = FromC(p);
    const cgail::Integrator kind =
        integrator == CGAIL_EULER ? cgail::Integrator::kEuler : cgail::Integrator::kRk4;
    *out = new cgail_trajectory{
        s, controlled != 0,
        cgail::Integrate(s, {x0, y0, 0.0}, controlled != 0, dt, steps, kind, record_every)};
  });
}

size_t cgail_trajectory_length(const cgail_trajectory* traj) {
  return traj ? traj->traj.states.size() : 0;
}

cgail_status cgail_trajectory_state(const cgail_trajectory* traj, size_t i, double* t,
                                    double* x, double* y) {
  return Guard([&] {
    Require(traj != nullptr, "cgail_trajectory_state: null pointer");
    Require(i < traj->traj.states.size(), "cgail_trajectory_state: index out of range");
    const cgail::ScalarState& s = traj->traj.states[i];
    if (t) *t = s.t;
    if (x) *x = s.x;
    if (y) *y = s.y;
  });
}

cgail_status cgail_trajectory_terminal(const cgail_trajectory* traj, double* t, double* x,
                                       double* y) {
  return Guard([&] {
    Require(traj != nullptr, "cgail_trajectory_terminal: null pointer");
    const cgail::ScalarState& s = traj->traj.terminal;
    if (t) *t = s.t;
    if (x) *x = s.x;
    if (y) *y = s.y;
  });
}

long cgail_trajectory_clamp_events(const cgail_trajectory* traj) {
  return traj ? traj->traj.clamp_events : 0;
}

double cgail_trajectory_terminal_distance(const cgail_trajectory* traj) {
  return traj ? cgail::DistanceToDesired(traj->params, traj->traj.terminal) : 0.0;
}

cgail_status cgail_trajectory_write_csv(const cgail_trajectory* traj, const char* path) {
  return Guard([&] {
    Require(traj && path, "cgail_trajectory_write_csv: null pointer");
    cgail::WriteTextFile(path, cgail::TrajectoryCsv(traj->params, traj->traj,
                                                    traj->controlled));
  });
}

void cgail_trajectory_free(cgail_trajectory* traj) { delete traj; }

cgail_status cgail_find_equilibria(const cgail_scalar_params* p, int controlled, int grid,
                                   double* xs, double* ys, double* residuals, size_t cap,
                                   size_t* count) {
  return Guard([&] {
    Require(count != nullptr, "cgail_find_equilibria: null pointer");
    const auto roots = cgail::FindEquilibria(FromC(p), controlled != 0, grid);
    *count = roots.size();
    for (size_t i = 0; i < roots.size() && i < cap; ++i) {
      if (xs) xs[i] = roots[i].x;
      if (ys) ys[i] = roots[i].y;
      if (residuals) residuals[i] = roots[i].residual;
    }
  });
}

/* stability */

cgail_status cgail_jacobian_closed_form(const cgail_scalar_params* p, cgail_jacobian* out) {
  return Guard([&] {
    Require(out != nullptr, "cgail_jacobian_closed_form: null pointer");
    *out = ToC(cgail::JacobianClosedForm(FromC(p)));
  });
}

cgail_status cgail_jacobian_numeric(const cgail_scalar_params* p, double step,
                                    cgail_jacobian* out) {
  return Guard([&] {
    Require(out != nullptr, "cgail_jacobian_numeric: null pointer");
    Require(step > 0.0, "cgail_jacobian_numeric: step must be positive");
    *out = ToC(cgail::JacobianNumeric(FromC(p), step));
  });
}

cgail_status cgail_classify(const cgail_scalar_params* p, cgail_verdict* out) {
  return Guard([&] {
    Require(out != nullptr, "cgail_classify: null pointer");
    const cgail::ScalarSystemParams s = FromC(p);
    *out = VerdictToC(s, cgail::Classify(s));
  });
}

void cgail_audit_spec_default(cgail_audit_spec* spec) {
  if (!spec) return;
  const cgail::AuditSpec d;
  spec->c = {0.1, 2.0, 5};
  spec->lambda = {0.1, 2.0, 5};
  spec->expert_prob = {0.05, 0.95, 5};
  spec->k = {1.0, 5.0, 5};
  spec->alpha = {-1.0, 1.0, 5};
  spec->dt = d.dt;
  spec->horizon = d.horizon;
  spec->tolerance = d.tolerance;
  spec->perturb_x = d.perturb_x;
  spec->perturb_y_rel = d.perturb_y_rel;
  spec->threads = 1;
}

cgail_status cgail_audit_run(const cgail_audit_spec* spec, cgail_audit** out) {
  return Guard([&] {
    Require(spec && out, "cgail_audit_run: null pointer");
    cgail::AuditSpec s;
    s.c = FromC(spec->c);
    s.lambda = FromC(spec->lambda);
    s.expert_prob = FromC(spec->expert_prob);
    s.k = FromC(spec->k);
    s.alpha = FromC(spec->alpha);
    s.dt = spec->dt;
    s.horizon = spec->horizon;
    s.tolerance = spec->tolerance;
    s.perturb_x = spec->perturb_x;
    s.perturb_y_rel = spec->perturb_y_rel;
    s.threads = spec->threads;
    *out = new cgail_audit{cgail::GridAudit(s)};
  });
}

size_t cgail_audit_length(const cgail_audit* audit) {
  return audit ? audit->table.rows.size() : 0;
}

cgail_status cgail_audit_row_at(const cgail_audit* audit, size_t i, cgail_audit_row* out) {
  return Guard([&] {
    Require(audit && out, "cgail_audit_row_at: null pointer");
    Require(i < audit->table.rows.size(), "cgail_audit_row_at: index out of range");
    const cgail::AuditRow& r = audit->table.rows[i];
    out->params = ToC(r.params);
    out->jacobian = ToC(r.jacobian);
    out->verdict = VerdictToC(r.params, r.verdict);
    out->converged = r.converged;
    out->terminal_distance = r.terminal_distance;
    out->clamp_events = r.clamp_events;
    out->counterexample = r.counterexample;
  });
}

size_t cgail_audit_assumption_rows(const cgail_audit* audit) {
  return audit ? static_cast<size_t>(audit->table.assumption_rows) : 0;
}
size_t cgail_audit_counterexamples(const cgail_audit* audit) {
  return audit ? static_cast<size_t>(audit->table.counterexamples) : 0;
}
size_t cgail_audit_marginal_rows(const cgail_audit* audit) {
  return audit ? static_cast<size_t>(audit->table.marginal_rows) : 0;
}

cgail_status cgail_audit_write_csv(const cgail_audit* audit, const char* path) {
  return Guard([&] {
    Require(audit && path, "cgail_audit_write_csv: null pointer");
    cgail::WriteTextFile(path, cgail::AuditCsv(audit->table));
  });
}

void cgail_audit_free(cgail_audit* audit) { delete audit; }

/* training */

void cgail_train_config_default(cgail_train_config* config) {
  if (!config) return;
  const cgail::TrainConfig d;
  config->k = d.k;
  config->lambda = d.lambda;
  config->alpha = d.alpha;
  config->lr_disc = d.lr_disc;
  config->lr_policy = d.lr_policy;
  config->n_traj_per_iter = d.n_traj_per_iter;
  config->horizon = d.horizon;
  config->iterations = d.iterations;
  config->seed = d.seed;
  config->oracle_policy_controller = d.oracle_policy_controller;
  config->n_expert_traj = d.n_expert_traj;
  config->eval_traj = d.eval_traj;
  config->eval_horizon = d.eval_horizon;
  config->ground_cost = CGAIL_COST_HOP;
  config->init_policy = CGAIL_INIT_UNIFORM;
}

cgail_status cgail_train(const cgail_mdp* mdp, const cgail_policy* expert,
                         const cgail_train_config* config, cgail_training_trace** out) {
  return Guard([&] {
    Require(mdp && expert && out, "cgail_train: null pointer");
    const cgail::TrainConfig c = FromC(config);
    *out = new cgail_training_trace{c, cgail::Train(mdp->mdp, expert->policy, c)};
  });
}

size_t cgail_training_trace_length(const cgail_training_trace* trace) {
  return trace ? trace->trace.records.size() : 0;
}

cgail_status cgail_training_trace_record(const cgail_training_trace* trace, size_t i,
                                         cgail_training_record* out) {
  return Guard([&] {
    Require(trace && out, "cgail_training_trace_record: null pointer");
    Require(i < trace->trace.records.size(), "cgail_training_trace_record: index out of range");
    const cgail::TrainingRecord& r = trace->trace.records[i];
    *out = {r.iter, r.ret, r.normalized_return, r.disc_mean, r.disc_dev_half,
            r.tv_to_expert, r.wasserstein_state, r.regularizer_value};
  });
}

cgail_status cgail_training_trace_summary(const cgail_training_trace* trace, int window,
                                          cgail_run_summary* out) {
  return Guard([&] {
    Require(trace && out, "cgail_training_trace_summary: null pointer");
    const cgail::TrainingSummary s = cgail::Summarize(trace->trace, trace->config, "", window);
    out->group = nullptr;
    out->k = trace->config.k;
    out->seed = trace->config.seed;
    out->has_convergence_step = s.convergence_step.has_value();
    out->convergence_step = s.convergence_step.value_or(-1);
    out->oscillation_range = s.oscillation_range;
    out->final_normalized_return = s.final_normalized_return;
    out->final_wasserstein = s.final_wasserstein;
  });
}

cgail_status cgail_training_trace_write_csv(const cgail_training_trace* trace,
                                            const char* path) {
  return Guard([&] {
    Require(trace && path, "cgail_training_trace_write_csv: null pointer");
    cgail::WriteTextFile(path, cgail::TrainingCsv(trace->trace));
  });
}

cgail_status cgail_training_trace_write_summary(const cgail_training_trace* trace,
                                                const char* group, int window,
                                                const char* path) {
  return Guard([&] {
    Require(trace && group && path, "cgail_training_trace_write_summary: null pointer");
    cgail::WriteTextFile(path, cgail::TrainingSummaryJson(cgail::Summarize(
                                   trace->trace, trace->config, group, window)));
  });
}

void cgail_training_trace_free(cgail_training_trace* trace) { delete trace; }

cgail_status cgail_oscillation_range(const double* returns, size_t n, int window,
                                     double* out) {
  return Guard([&] {
    Require(returns && out, "cgail_oscillation_range: null pointer");
    *out = cgail::OscillationRange(std::vector<double>(returns, returns + n), window);
  });
}

cgail_status cgail_convergence_step(const double* returns, size_t n, int* found,
                                    int* step) {
  return Guard([&] {
    Require(found && step && (returns || n == 0), "cgail_convergence_step: null pointer");
    const auto s = cgail::ConvergenceStep(std::vector<double>(returns, returns + n));
    *found = s.has_value();
    *step = s.value_or(-1);
  });
}

/* metrics and aggregation */

cgail_status cgail_transport_cost(const double* p, const double* q, const double* cost,
                                  size_t n, double* out) {
  return Guard([&] {
    Require(p && q && cost && out, "cgail_transport_cost: null pointer");
    const int m = static_cast<int>(n);
    *out = cgail::TransportCost(Eigen::Map<const Vector>(p, m),
                                Eigen::Map<const Vector>(q, m), ReadMatrix(cost, m, m));
  });
}

cgail_status cgail_hop_distance(const cgail_mdp* mdp, double* out, size_t len) {
  return Guard([&] {
    Require(mdp && out, "cgail_hop_distance: null pointer");
    const Matrix d = cgail::HopDistance(mdp->mdp);
    Require(len >= static_cast<size_t>(d.size()), "cgail_hop_distance: buffer too small");
    WriteMatrix(d, out);
  });
}

cgail_status cgail_aggregate_create(cgail_aggregate** out) {
  return Guard([&] {
    Require(out != nullptr, "cgail_aggregate_create: null pointer");
    *out = new cgail_aggregate;
  });
}

cgail_status cgail_aggregate_add(cgail_aggregate* agg, const cgail_run_summary* run) {
  return Guard([&] {
    Require(agg && run && run->group, "cgail_aggregate_add: null pointer");
    cgail::RunSummary r;
    r.group = run->group;
    r.k = run->k;
    r.seed = run->seed;
    if (run->has_convergence_step) r.convergence_step = run->convergence_step;
    r.oscillation_range = run->oscillation_range;
    r.final_normalized_return = run->final_normalized_return;
    r.final_wasserstein = run->final_wasserstein;
    agg->runs.push_back(std::move(r));
    agg->dirty = true;
  });
}

cgail_status cgail_aggregate_add_file(cgail_aggregate* agg, const char* path) {
  return Guard([&] {
    Require(agg && path, "cgail_aggregate_add_file: null pointer");
    agg->runs.push_back(cgail::ParseTrainingSummaryJson(cgail::ReadTextFile(path)));
    agg->dirty = true;
  });
}

size_t cgail_aggregate_length(cgail_aggregate* agg) {
  if (!agg) return 0;
  size_t n = 0;
  Guard([&] { n = agg->Rows().size(); });
  return n;
}

cgail_status cgail_aggregate_row_at(cgail_aggregate* agg, size_t i,
                                    cgail_aggregate_row* out) {
  return Guard([&] {
    Require(agg && out, "cgail_aggregate_row_at: null pointer");
    const auto& rows = agg->Rows();
    Require(i < rows.size(), "cgail_aggregate_row_at: index out of range");
    const cgail::AggregateRow& r = rows[i];
    auto conv = [](const cgail::MeanStd& m) { return cgail_mean_std{m.mean, m.std, m.count}; };
    out->group = r.group.c_str();
    out->runs = r.runs;
    out->convergence_step = conv(r.convergence_step);
    out->oscillation_range = conv(r.oscillation_range);
    out->final_normalized_return = conv(r.final_normalized_return);
    out->final_wasserstein = conv(r.final_wasserstein);
  });
}

cgail_status cgail_aggregate_write_csv(cgail_aggregate* agg, const char* path) {
  return Guard([&] {
    Require(agg && path, "cgail_aggregate_write_csv: null pointer");
    cgail::WriteTextFile(path, cgail::AggregateCsv(agg->Rows()));
  });
}

cgail_status cgail_aggregate_write_json(cgail_aggregate* agg, const char* path) {
  return Guard([&] {
    Require(agg && path, "cgail_aggregate_write_json: null pointer");
    cgail::WriteTextFile(path, cgail::AggregateJson(agg->Rows()));
  });
}

void cgail_aggregate_free(cgail_aggregate* agg) { delete agg; }

/* one-step batch output */

cgail_status cgail_write_sweep_summary(const cgail_trajectory* const* trajs, size_t n,
                                       double tolerance, const char* path) {
  return Guard([&] {
    Require(path && (trajs || n == 0), "cgail_write_sweep_summary: null pointer");
    std::vector<cgail::SweepRow> rows;
    rows.reserve(n);
    for (size_t i = 0; i < n; ++i) {
      Require(trajs[i] != nullptr, "cgail_write_sweep_summary: null trajectory");
      cgail::SweepRow r;
      r.params = trajs[i]->params;
      r.terminal_distance = cgail::DistanceToDesired(r.params, trajs[i]->traj.terminal);
      r.converged = r.terminal_distance < tolerance;
      r.clamp_events = trajs[i]->traj.clamp_events;
      rows.push_back(r);
    }
    cgail::WriteTextFile(path, cgail::SweepSummaryCsv(rows));
  });
}

cgail_status cgail_write_equilibria_csv(const double* xs, const double* ys,
                                        const double* residuals, size_t n,
                                        const char* path) {
  return Guard([&] {
    Require(path && ((xs && ys && residuals) || n == 0),
            "cgail_write_equilibria_csv: null pointer");
    std::vector<cgail::Equilibrium> roots;
    for (size_t i = 0; i < n; ++i) roots.push_back({xs[i], ys[i], residuals[i]});
    cgail::WriteTextFile(path, cgail::EquilibriaCsv(roots));
  });
}

}  // extern "C"
