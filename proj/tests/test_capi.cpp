#include <gtest/gtest.h>

#include <cgail/cgail.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CApi : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("cgail_capi_" + std::string(::testing::UnitTest::GetInstance()
                                            ->current_test_info()
                                            ->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string Path(const char* name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

TEST_F(CApi, StatusNamesAndVersion) {
  EXPECT_STREQ(cgail_status_name(CGAIL_OK), "ok");
  EXPECT_STREQ(cgail_status_name(CGAIL_ERR_DIVERGENCE), "divergence");
  EXPECT_STRNE(cgail_version(), "");
}

TEST_F(CApi, NullPointersAndLastError) {
  cgail_mdp* mdp = nullptr;
  EXPECT_EQ(cgail_mdp_builtin(nullptr, &mdp, nullptr), CGAIL_ERR_INVALID_ARGUMENT);
  EXPECT_STRNE(cgail_last_error(), "");
  EXPECT_EQ(cgail_mdp_builtin("two_corridor", &mdp, nullptr), CGAIL_OK);
  EXPECT_STREQ(cgail_last_error(), "");
  EXPECT_EQ(cgail_policy_return(mdp, nullptr, nullptr), CGAIL_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(cgail_mdp_n_states(nullptr), 0);
  EXPECT_EQ(cgail_trajectory_length(nullptr), 0u);
  cgail_mdp_free(mdp);
  cgail_mdp_free(nullptr);
  cgail_policy_free(nullptr);
  cgail_audit_free(nullptr);
}

TEST_F(CApi, UnknownFixtureAndBadJson) {
  cgail_mdp* mdp = nullptr;
  EXPECT_NE(cgail_mdp_builtin("no_such_mdp", &mdp, nullptr), CGAIL_OK);
  EXPECT_EQ(mdp, nullptr);
  EXPECT_EQ(cgail_mdp_from_json("{\"n_states\": 2", &mdp), CGAIL_ERR_CONFIG);
  EXPECT_EQ(cgail_mdp_load(Path("missing.json").c_str(), &mdp), CGAIL_ERR_IO);
  char names[256];
  ASSERT_EQ(cgail_builtin_names(names, sizeof(names)), CGAIL_OK);
  EXPECT_NE(std::string(names).find("two_corridor"), std::string::npos);
}

TEST_F(CApi, CreateValidatesTransitions) {
  // Two states, one action; row 1 sums to 0.9.
  const double p[] = {0.5, 0.5, 0.4, 0.5};
  const double p0[] = {1.0, 0.0};
  const double r[] = {0.0, 1.0};
  cgail_mdp* mdp = nullptr;
  EXPECT_EQ(cgail_mdp_create(2, 1, p, p0, 0.9, r, &mdp), CGAIL_ERR_CONFIG);
  EXPECT_NE(std::string(cgail_last_error()).find("transition[1][0]"), std::string::npos);
  const double ok[] = {0.5, 0.5, 0.4, 0.6};
  ASSERT_EQ(cgail_mdp_create(2, 1, ok, p0, 0.9, r, &mdp), CGAIL_OK);
  EXPECT_EQ(cgail_mdp_n_states(mdp), 2);
  EXPECT_EQ(cgail_mdp_gamma(mdp), 0.9);

  size_t needed = 0;
  ASSERT_EQ(cgail_mdp_to_json(mdp, nullptr, 0, &needed), CGAIL_OK);
  std::vector<char> small(needed - 1);
  EXPECT_EQ(cgail_mdp_to_json(mdp, small.data(), small.size(), nullptr),
            CGAIL_ERR_INVALID_ARGUMENT);
  std::vector<char> buf(needed);
  ASSERT_EQ(cgail_mdp_to_json(mdp, buf.data(), buf.size(), nullptr), CGAIL_OK);
  cgail_mdp* copy = nullptr;
  ASSERT_EQ(cgail_mdp_from_json(buf.data(), &copy), CGAIL_OK);
  EXPECT_EQ(cgail_mdp_n_states(copy), 2);
  cgail_mdp_free(copy);
  cgail_mdp_free(mdp);
}

TEST_F(CApi, ExactEvaluation) {
  cgail_mdp* mdp = nullptr;
  cgail_policy* expert = nullptr;
  ASSERT_EQ(cgail_mdp_builtin("two_corridor", &mdp, &expert), CGAIL_OK);
  ASSERT_NE(expert, nullptr);
  const int ns = cgail_mdp_n_states(mdp), na = cgail_mdp_n_actions(mdp);
  std::vector<double> rho(ns);
  ASSERT_EQ(cgail_occupancy(mdp, expert, rho.data(), rho.size()), CGAIL_OK);
  double mass = 0.0;
  for (double v : rho) mass += v;
  EXPECT_NEAR(mass, 1.0 / (1.0 - cgail_mdp_gamma(mdp)), 1e-10);
  EXPECT_EQ(cgail_occupancy(mdp, expert, rho.data(), 1), CGAIL_ERR_INVALID_ARGUMENT);

  std::vector<double> disc(ns * na, 0.5), q(ns * na), adv(ns * na), occ(ns);
  ASSERT_EQ(cgail_value_tables(mdp, expert, disc.data(), 0.0, occ.data(), q.data(), adv.data()),
            CGAIL_OK);
  for (double a : adv) EXPECT_NEAR(a, 0.0, 1e-10);

  double max_disc = 1, max_pol = 1;
  ASSERT_EQ(cgail_desired_state_report(mdp, expert, 0.0, &max_disc, &max_pol), CGAIL_OK);
  EXPECT_LT(max_disc, 1e-10);
  EXPECT_LT(max_pol, 1e-10);

  std::vector<double> dd(ns * na), dp(ns * na);
  ASSERT_EQ(cgail_drifts(mdp, expert, expert, disc.data(), 0.0, dd.data(), dp.data()), CGAIL_OK);
  for (double v : dd) EXPECT_NEAR(v, 0.0, 1e-10);

  double vd = 0.0;
  ASSERT_EQ(cgail_objective_vd(mdp, expert, expert, disc.data(), &vd), CGAIL_OK);
  EXPECT_NEAR(vd, 2.0 * std::log(0.5) / (1.0 - cgail_mdp_gamma(mdp)), 1e-10);

  double ret_e = 0.0, ret_u = 0.0;
  cgail_policy* uniform = nullptr;
  ASSERT_EQ(cgail_policy_uniform(ns, na, &uniform), CGAIL_OK);
  ASSERT_EQ(cgail_policy_return(mdp, expert, &ret_e), CGAIL_OK);
  ASSERT_EQ(cgail_policy_return(mdp, uniform, &ret_u), CGAIL_OK);
  EXPECT_GT(ret_e, ret_u);

  std::vector<double> hops(ns * ns);
  ASSERT_EQ(cgail_hop_distance(mdp, hops.data(), hops.size()), CGAIL_OK);
  EXPECT_EQ(hops[0], 0.0);
  cgail_policy_free(uniform);
  cgail_policy_free(expert);
  cgail_mdp_free(mdp);
}

TEST_F(CApi, FlowTraceAndCsv) {
  cgail_mdp* mdp = nullptr;
  cgail_policy* expert = nullptr;
  ASSERT_EQ(cgail_mdp_builtin("entropy_chain", &mdp, &expert), CGAIL_OK);
  cgail_flow_trace* trace = nullptr;
  ASSERT_EQ(cgail_flow_integrate(mdp, expert, expert, nullptr, 1.0, 0.01, 50, &trace), CGAIL_OK);
  ASSERT_EQ(cgail_flow_trace_length(trace), 51u);
  cgail_flow_record rec;
  ASSERT_EQ(cgail_flow_trace_record(trace, 50, &rec), CGAIL_OK);
  EXPECT_EQ(rec.step, 50);
  EXPECT_GT(rec.policy_distance_to_expert, 0.0);
  EXPECT_EQ(cgail_flow_trace_record(trace, 51, &rec), CGAIL_ERR_INVALID_ARGUMENT);
  ASSERT_EQ(cgail_flow_trace_write_csv(trace, Path("a.csv").c_str()), CGAIL_OK);
  ASSERT_EQ(cgail_flow_trace_write_csv(trace, Path("b.csv").c_str()), CGAIL_OK);
  EXPECT_EQ(Slurp(Path("a.csv")), Slurp(Path("b.csv")));
  EXPECT_EQ(cgail_flow_trace_write_csv(trace, Path("nodir/c.csv").c_str()), CGAIL_ERR_IO);

  cgail_flow_trace* bad = nullptr;
  EXPECT_EQ(cgail_flow_integrate(mdp, expert, expert, nullptr, 1.0, 10.0, 5, &bad),
            CGAIL_ERR_STEP_SIZE);
  EXPECT_EQ(bad, nullptr);
  cgail_flow_trace_free(trace);
  cgail_policy_free(expert);
  cgail_mdp_free(mdp);
}

TEST_F(CApi, ScalarSystem) {
  const cgail_scalar_params p = {1.0, 1.0, 0.5, 1.0, 0.0};
  double dx = 1, dy = 1;
  ASSERT_EQ(cgail_scalar_drift(&p, 0.5, 0.5, 1, &dx, &dy), CGAIL_OK);
  EXPECT_EQ(dx, 0.0);
  EXPECT_EQ(dy, 0.0);
  ASSERT_EQ(cgail_scalar_drift(&p, 0.5, 0.5, 0, &dx, &dy), CGAIL_OK);
  EXPECT_NEAR(dy, 0.3862943611198906, 1e-15);
  double u1 = 0, u2 = 0;
  ASSERT_EQ(cgail_controller(&p, 0.75, 0.5, &u1, &u2), CGAIL_OK);
  EXPECT_EQ(u1, -0.25);
  EXPECT_NEAR(u2, -0.3862943611198906, 1e-15);

  const cgail_scalar_params bad = {-1.0, 1.0, 0.5, 0.0, 0.0};
  EXPECT_EQ(cgail_scalar_drift(&bad, 0.5, 0.5, 0, &dx, &dy), CGAIL_ERR_CONFIG);

  cgail_trajectory* a = nullptr;
  cgail_trajectory* b = nullptr;
  ASSERT_EQ(cgail_scalar_integrate(&p, 0.55, 0.45, 1, 1e-3, 20000, CGAIL_RK4, 1000, &a), CGAIL_OK);
  ASSERT_EQ(cgail_scalar_integrate(&p, 0.55, 0.45, 1, 1e-3, 20000, CGAIL_RK4, 1000, &b), CGAIL_OK);
  EXPECT_EQ(cgail_trajectory_length(a), 21u);
  EXPECT_LT(cgail_trajectory_terminal_distance(a), 1e-6);
  EXPECT_EQ(cgail_trajectory_clamp_events(a), 0);
  double t, x, y;
  ASSERT_EQ(cgail_trajectory_terminal(a, &t, &x, &y), CGAIL_OK);
  EXPECT_NEAR(t, 20.0, 1e-9);
  ASSERT_EQ(cgail_trajectory_write_csv(a, Path("a.csv").c_str()), CGAIL_OK);
  ASSERT_EQ(cgail_trajectory_write_csv(b, Path("b.csv").c_str()), CGAIL_OK);
  EXPECT_EQ(Slurp(Path("a.csv")), Slurp(Path("b.csv")));

  const cgail_trajectory* both[] = {a, b};
  ASSERT_EQ(cgail_write_sweep_summary(both, 2, 1e-6, Path("sweep.csv").c_str()), CGAIL_OK);
  const std::string sweep = Slurp(Path("sweep.csv"));
  EXPECT_EQ(sweep.rfind("c,lambda,E,k,alpha,converged,terminal_distance,clamp_events\n", 0), 0u);
  EXPECT_NE(sweep.find("1,1,0.5,1,0,true,"), std::string::npos);

  cgail_trajectory* blown = nullptr;
  EXPECT_EQ(cgail_scalar_integrate(&p, NAN, 0.45, 1, 1e-3, 10, CGAIL_RK4, 1, &blown),
            CGAIL_ERR_NON_FINITE);
  cgail_trajectory_free(a);
  cgail_trajectory_free(b);
}

TEST_F(CApi, EquilibriaRespectCapacity) {
  const cgail_scalar_params p = {1.0, 1.0, 0.5, 0.0, 0.0};
  size_t count = 0;
  ASSERT_EQ(cgail_find_equilibria(&p, 0, 20, nullptr, nullptr, nullptr, 0, &count), CGAIL_OK);
  ASSERT_EQ(count, 1u);
  double x = 0, y = 0, r = 1;
  ASSERT_EQ(cgail_find_equilibria(&p, 0, 20, &x, &y, &r, 1, &count), CGAIL_OK);
  EXPECT_NEAR(x, 0.5654448141543782, 1e-9);
  EXPECT_NEAR(y, 0.6506018482486314, 1e-9);
  EXPECT_LT(r, 1e-10);
  ASSERT_EQ(cgail_write_equilibria_csv(&x, &y, &r, 1, Path("eq.csv").c_str()), CGAIL_OK);
  EXPECT_EQ(Slurp(Path("eq.csv")).rfind("x,y,residual\n0.565444814154378", 0), 0u);
}

TEST_F(CApi, StabilityAndAudit) {
  const cgail_scalar_params p = {1.0, 1.0, 0.5, 1.0, 0.0};
  cgail_jacobian j;
  ASSERT_EQ(cgail_jacobian_closed_form(&p, &j), CGAIL_OK);
  EXPECT_EQ(j.a11, -5.0);
  EXPECT_EQ(j.det, 14.0);
  cgail_jacobian n;
  ASSERT_EQ(cgail_jacobian_numeric(&p, 1e-6, &n), CGAIL_OK);
  EXPECT_NEAR(n.a22, -2.0, 1e-6);
  cgail_verdict v;
  ASSERT_EQ(cgail_classify(&p, &v), CGAIL_OK);
  EXPECT_TRUE(v.assumption_holds && v.eig_stable && v.agree);
  EXPECT_DOUBLE_EQ(v.trace_term, -0.96875);

  cgail_audit_spec spec;
  cgail_audit_spec_default(&spec);
  EXPECT_EQ(spec.c.n, 5);
  spec.c = {0.5, 1.0, 2};
  spec.lambda = {1.0, 1.0, 1};
  spec.expert_prob = {0.3, 0.7, 2};
  spec.k = {1.0, 1.0, 1};
  spec.alpha = {0.0, 0.0, 1};
  spec.horizon = 30.0;
  cgail_audit* audit = nullptr;
  ASSERT_EQ(cgail_audit_run(&spec, &audit), CGAIL_OK);
  ASSERT_EQ(cgail_audit_length(audit), 4u);
  EXPECT_EQ(cgail_audit_counterexamples(audit), 0u);
  cgail_audit_row row;
  ASSERT_EQ(cgail_audit_row_at(audit, 3, &row), CGAIL_OK);
  EXPECT_EQ(row.params.c, 1.0);
  EXPECT_EQ(row.params.expert_prob, 0.7);
  EXPECT_EQ(cgail_audit_row_at(audit, 4, &row), CGAIL_ERR_INVALID_ARGUMENT);
  ASSERT_EQ(cgail_audit_write_csv(audit, Path("audit.csv").c_str()), CGAIL_OK);
  cgail_audit_free(audit);

  spec.c = {1.0, 1.0, 0};
  EXPECT_EQ(cgail_audit_run(&spec, &audit), CGAIL_ERR_CONFIG);
}

TEST_F(CApi, TrainingSummaryAndAggregate) {
  cgail_mdp* mdp = nullptr;
  cgail_policy* expert = nullptr;
  ASSERT_EQ(cgail_mdp_builtin("two_corridor", &mdp, &expert), CGAIL_OK);
  cgail_train_config cfg;
  cgail_train_config_default(&cfg);
  EXPECT_EQ(cfg.iterations, 300);
  cfg.iterations = 60;
  cfg.eval_traj = 20;

  cgail_aggregate* agg = nullptr;
  ASSERT_EQ(cgail_aggregate_create(&agg), CGAIL_OK);
  for (int seed = 0; seed < 2; ++seed) {
    cfg.seed = seed;
    cgail_training_trace* a = nullptr;
    cgail_training_trace* b = nullptr;
    ASSERT_EQ(cgail_train(mdp, expert, &cfg, &a), CGAIL_OK);
    ASSERT_EQ(cgail_train(mdp, expert, &cfg, &b), CGAIL_OK);
    ASSERT_EQ(cgail_training_trace_length(a), 60u);
    const std::string ta = Path("ta.csv"), tb = Path("tb.csv");
    ASSERT_EQ(cgail_training_trace_write_csv(a, ta.c_str()), CGAIL_OK);
    ASSERT_EQ(cgail_training_trace_write_csv(b, tb.c_str()), CGAIL_OK);
    EXPECT_EQ(Slurp(ta), Slurp(tb));

    cgail_run_summary s;
    ASSERT_EQ(cgail_training_trace_summary(a, 20, &s), CGAIL_OK);
    EXPECT_EQ(s.group, nullptr);
    EXPECT_EQ(s.seed, static_cast<uint64_t>(seed));
    cgail_training_record last;
    ASSERT_EQ(cgail_training_trace_record(a, 59, &last), CGAIL_OK);
    EXPECT_EQ(s.final_normalized_return, last.normalized_return);

    const std::string summary = Path(seed == 0 ? "s0.json" : "s1.json");
    ASSERT_EQ(cgail_training_trace_write_summary(a, "k=0", 20, summary.c_str()), CGAIL_OK);
    ASSERT_EQ(cgail_aggregate_add_file(agg, summary.c_str()), CGAIL_OK);
    s.group = "manual";
    ASSERT_EQ(cgail_aggregate_add(agg, &s), CGAIL_OK);
    EXPECT_EQ(cgail_training_trace_summary(a, 61, &s), CGAIL_ERR_CONFIG);
    cgail_training_trace_free(a);
    cgail_training_trace_free(b);
  }
  ASSERT_EQ(cgail_aggregate_length(agg), 2u);
  cgail_aggregate_row r0, r1;
  ASSERT_EQ(cgail_aggregate_row_at(agg, 0, &r0), CGAIL_OK);
  ASSERT_EQ(cgail_aggregate_row_at(agg, 1, &r1), CGAIL_OK);
  EXPECT_STREQ(r0.group, "k=0");
  EXPECT_STREQ(r1.group, "manual");
  EXPECT_EQ(r0.runs, 2);
  EXPECT_EQ(r0.final_wasserstein.mean, r1.final_wasserstein.mean);
  ASSERT_EQ(cgail_aggregate_write_csv(agg, Path("agg.csv").c_str()), CGAIL_OK);
  ASSERT_EQ(cgail_aggregate_write_json(agg, Path("agg.json").c_str()), CGAIL_OK);
  EXPECT_EQ(cgail_aggregate_add_file(agg, Path("missing.json").c_str()), CGAIL_ERR_IO);
  cgail_aggregate_free(agg);

  cfg.lr_policy = 1e7;
  cgail_training_trace* t = nullptr;
  EXPECT_EQ(cgail_train(mdp, expert, &cfg, &t), CGAIL_ERR_DIVERGENCE);
  EXPECT_EQ(t, nullptr);
  cgail_policy* uniform = nullptr;
  ASSERT_EQ(cgail_policy_uniform(5, 2, &uniform), CGAIL_OK);
  cfg.lr_policy = 0.5;
  EXPECT_EQ(cgail_train(mdp, uniform, &cfg, &t), CGAIL_ERR_DEGENERATE);
  cgail_policy_free(uniform);
  cgail_policy_free(expert);
  cgail_mdp_free(mdp);
}

TEST_F(CApi, TraceMetricsAndTransport) {
  const double returns[] = {0.0, 0.8, 1.0, 0.8, 1.0};
  double range = 0;
  ASSERT_EQ(cgail_oscillation_range(returns, 5, 4, &range), CGAIL_OK);
  EXPECT_NEAR(range, 0.2, 1e-15);
  int found = 0, step = -1;
  ASSERT_EQ(cgail_convergence_step(returns, 5, &found, &step), CGAIL_OK);
  EXPECT_EQ(found, 1);
  EXPECT_EQ(step, 2);
  const double neg[] = {-1.0, -2.0};
  ASSERT_EQ(cgail_convergence_step(neg, 2, &found, &step), CGAIL_OK);
  EXPECT_EQ(found, 0);

  const double p[] = {0.5, 0.5, 0.0}, q[] = {0.0, 0.5, 0.5};
  const double cost[] = {0, 1, 2, 1, 0, 1, 2, 1, 0};
  double w = 0;
  ASSERT_EQ(cgail_transport_cost(p, q, cost, 3, &w), CGAIL_OK);
  EXPECT_NEAR(w, 1.0, 1e-12);
  const double light[] = {0.5, 0.4, 0.0};
  EXPECT_EQ(cgail_transport_cost(light, q, cost, 3, &w), CGAIL_ERR_INFEASIBLE);
}

}  // namespace
