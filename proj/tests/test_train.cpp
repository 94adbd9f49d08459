#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "error.hpp"
#include "fixtures.hpp"
#include "gail_flow.hpp"
#include "rng.hpp"
#include "train.hpp"
#include "support/instances.hpp"

namespace cgail {
namespace {

using testing::RandomDisc;
using testing::RandomMdp;
using testing::RandomParams;
using testing::RandomPolicy;
using testing::RelErr;

const std::vector<Trajectory> kOneLearner = {{{0, 0}}};
const std::vector<Trajectory> kOneExpert = {{{1, 1}}};

TEST(DiscLoss, Examples) {
  Matrix d(2, 2);
  d << 0.3, 0.6, 0.8, 0.2;
  const std::vector<Trajectory> learner = {{{0, 0}, {0, 1}}, {{1, 0}}};
  const std::vector<Trajectory> expert = {{{1, 1}, {0, 0}}};
  const double vanilla = (std::log(0.3) + std::log(0.6) + std::log(0.8)) / 3.0 +
                         (std::log(0.8) + std::log(0.7)) / 2.0;
  EXPECT_NEAR(DiscLossControlled(d, learner, expert, 0.0), vanilla, 1e-15);

  const Matrix half = Matrix::Constant(2, 2, 0.5);
  EXPECT_EQ(DiscLossControlled(half, learner, expert, 3.0), 2.0 * std::log(0.5));
  EXPECT_EQ(DiscRegularizer(half, learner, expert, 3.0), 0.0);

  const Matrix q = Matrix::Constant(2, 2, 0.75);
  EXPECT_DOUBLE_EQ(DiscRegularizer(q, kOneLearner, {{{0, 0}}}, 1.0), 2 * 0.03125);
  EXPECT_DOUBLE_EQ(DiscLossControlled(q, kOneLearner, kOneExpert, 1.0) -
                       DiscLossControlled(q, kOneLearner, kOneExpert, 0.0),
                   -2 * 0.03125);
  // Penalty slope at a pair seen once in one batch: -k (D - 1/2).
  const Matrix g1 = DiscLossGradient(q, kOneLearner, kOneExpert, 1.0);
  const Matrix g0 = DiscLossGradient(q, kOneLearner, kOneExpert, 0.0);
  EXPECT_DOUBLE_EQ(g1(0, 0) - g0(0, 0), -0.25);
  EXPECT_DOUBLE_EQ(g1(0, 0) - g0(0, 0), ControllerU1({1, 1, 0.5, 1.0, 0}, 0.75));
  EXPECT_EQ(g1(0, 1), 0.0);
}

std::vector<Trajectory> RandomBatch(std::mt19937_64& rng, int ns, int na, int n, int len) {
  std::uniform_int_distribution<int> s(0, ns - 1), a(0, na - 1);
  std::vector<Trajectory> out(n);
  for (auto& t : out) {
    for (int i = 0; i < len; ++i) t.push_back({s(rng), a(rng)});
  }
  return out;
}

TEST(DiscLoss, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 20; ++trial) {
    const int ns = 2 + trial % 3, na = 2;
    const auto learner = RandomBatch(rng, ns, na, 3, 4);
    const auto expert = RandomBatch(rng, ns, na, 2, 5);
    const double k = trial % 4 == 0 ? 0.0 : 0.5 * trial;
    const Matrix d = RandomDisc(rng, ns, na).values();
    const Matrix phi = d.unaryExpr([](double v) { return std::log(v / (1 - v)); });
    const Matrix gd = DiscLossGradient(d, learner, expert, k);
    const Matrix gphi = DiscLogitGradient(phi, learner, expert, k);
    const double h = 1e-6;
    for (int i = 0; i < d.size(); ++i) {
      Matrix up = d, dn = d;
      up.data()[i] += h;
      dn.data()[i] -= h;
      const double fd = (DiscLossControlled(up, learner, expert, k) -
                         DiscLossControlled(dn, learner, expert, k)) / (2 * h);
      EXPECT_LT(RelErr(fd, gd.data()[i], 1e-7), 1e-6);
      Matrix pu = phi, pd = phi;
      pu.data()[i] += h;
      pd.data()[i] -= h;
      const double fphi = (DiscLossControlled(Sigmoid(pu), learner, expert, k) -
                           DiscLossControlled(Sigmoid(pd), learner, expert, k)) / (2 * h);
      EXPECT_LT(RelErr(fphi, gphi.data()[i], 1e-7), 1e-6);
    }
  }
}

TEST(PolicyObjective, ConstantRewardGradientVanishesWithBatchSize) {
  std::mt19937_64 rng(62);
  const TabularMDP mdp = RandomMdp(rng, 3, 2, 0.9);
  const Matrix logits = Matrix::Zero(3, 2);
  const Matrix half = Matrix::Constant(3, 2, 0.5);
  auto grad_norm = [&](int n) {
    const auto batch =
        SampleTrajectories(mdp, PolicyTable::FromLogits(logits), n, 20, 7);
    return PolicyObjective(logits, half, 0.0, mdp.gamma(), batch).gradient.cwiseAbs().maxCoeff();
  };
  const double small = grad_norm(20), large = grad_norm(20000);
  EXPECT_LT(large, 0.05);
  EXPECT_LT(large, small / 5.0);
  // The sampled objective is exact for a constant reward.
  const auto batch = SampleTrajectories(mdp, PolicyTable::FromLogits(logits), 5, 20, 8);
  const double expected = std::log(0.5) * (1 - std::pow(0.9, 20)) / (1 - 0.9);
  EXPECT_NEAR(PolicyObjective(logits, half, 0.0, 0.9, batch).objective, expected, 1e-12);
}

TEST(PolicyObjective, GradientMatchesExactObjectiveFiniteDifference) {
  std::mt19937_64 rng(63);
  const TabularMDP mdp = RandomMdp(rng, 2, 2, 0.8);
  const DiscriminatorTable disc = RandomDisc(rng, 2, 2, 0.2, 0.8);
  const double lambda = 0.3;
  Matrix logits(2, 2);
  logits << 0.4, -0.2, -0.5, 0.3;
  const auto batch =
      SampleTrajectories(mdp, PolicyTable::FromLogits(logits), 10000, 100, 9);
  const Matrix g = PolicyObjective(logits, disc.values(), lambda, mdp.gamma(), batch).gradient;

  Matrix exact(2, 2);
  const double h = 1e-5;
  for (int i = 0; i < logits.size(); ++i) {
    Matrix up = logits, dn = logits;
    up.data()[i] += h;
    dn.data()[i] -= h;
    exact.data()[i] = (ObjectiveVPi(mdp, PolicyTable::FromLogits(up), disc, lambda) -
                       ObjectiveVPi(mdp, PolicyTable::FromLogits(dn), disc, lambda)) /
                      (2 * h);
  }
  const double scale = exact.cwiseAbs().maxCoeff();
  ASSERT_GT(scale, 1e-2);
  for (int i = 0; i < g.size(); ++i) {
    EXPECT_LT(std::abs(g.data()[i] - exact.data()[i]) / scale, 0.05) << "entry " << i;
  }
}

TEST(PolicyObjective, EntropyOnlyDescentReachesUniform) {
  std::mt19937_64 rng(64);
  const TabularMDP mdp = RandomMdp(rng, 3, 3, 0.9);
  Matrix logits(3, 3);
  logits << 1.0, -1.0, 0.0, 0.5, 0.5, -2.0, -1.0, 2.0, 0.0;
  const Matrix disc = Matrix::Constant(3, 3, 0.4);
  for (int it = 0; it < 400; ++it) {
    const auto batch =
        SampleTrajectories(mdp, PolicyTable::FromLogits(logits), 50, 20, 1000 + it);
    logits -= 0.1 * PolicyObjective(logits, disc, 1.0, mdp.gamma(), batch).gradient;
  }
  const Matrix pi = PolicyTable::FromLogits(logits).probs();
  for (int s = 0; s < 3; ++s) {
    const double entropy = -(pi.row(s).array() * pi.row(s).array().log()).sum();
    EXPECT_NEAR(entropy, std::log(3.0), 1e-2) << "state " << s;
  }
}

TEST(Controller, PotentialAtExpertMatchesClosedForm) {
  std::mt19937_64 rng(65);
  for (int trial = 0; trial < 20; ++trial) {
    const int ns = 2 + trial % 4, na = 2 + trial % 3;
    const PolicyTable expert = RandomPolicy(rng, ns, na, 0.05);
    const Vector c = testing::RandomSimplexRow(rng, ns).transpose();
    const double lambda = 0.1 * trial, alpha = -1.0 + 0.1 * trial;
    // With pi = pi_E each state contributes -alpha/2 + c (log 1/2 + lambda - lambda H(E)).
    double expected = 0.0;
    for (int s = 0; s < ns; ++s) {
      double neg_entropy = 0.0;
      for (int a = 0; a < na; ++a) neg_entropy += expert(s, a) * std::log(expert(s, a));
      expected += -0.5 * alpha + c(s) * (std::log(0.5) + lambda + lambda * neg_entropy);
    }
    EXPECT_NEAR(ControllerPotential(expert, expert, c, lambda, alpha), expected, 1e-12);
  }
}

TEST(Controller, LogitGradientMatchesFiniteDifference) {
  std::mt19937_64 rng(66);
  for (int trial = 0; trial < 10; ++trial) {
    const int ns = 3, na = 2 + trial % 2;
    const PolicyTable expert = RandomPolicy(rng, ns, na, 0.05);
    const Matrix logits = RandomPolicy(rng, ns, na).probs().array().log();
    const Vector c = testing::RandomSimplexRow(rng, ns).transpose();
    const Matrix g = ControllerPotentialLogitGradient(PolicyTable::FromLogits(logits), expert,
                                                      c, 0.7, 0.4 * trial - 1.5);
    const double h = 1e-6;
    for (int i = 0; i < logits.size(); ++i) {
      Matrix up = logits, dn = logits;
      up.data()[i] += h;
      dn.data()[i] -= h;
      const double fd = (ControllerPotential(PolicyTable::FromLogits(up), expert, c, 0.7,
                                             0.4 * trial - 1.5) -
                         ControllerPotential(PolicyTable::FromLogits(dn), expert, c, 0.7,
                                             0.4 * trial - 1.5)) /
                        (2 * h);
      EXPECT_NEAR(fd, g.data()[i], 1e-7);
    }
  }
}

TEST(Controller, OracleLossSubtractsPotential) {
  const Fixture f = BuiltinFixture("two_corridor");
  std::mt19937_64 rng(67);
  const PolicyTable pi = RandomPolicy(rng, 5, 2);
  const DiscriminatorTable d = RandomDisc(rng, 5, 2);
  const Vector c = Vector::Constant(5, 0.2);
  EXPECT_NEAR(PolicyLossOracleControlled(f.mdp, pi, *f.expert, d, c, 0.5, 0.3),
              ObjectiveVPi(f.mdp, pi, d, 0.5) - ControllerPotential(pi, *f.expert, c, 0.5, 0.3),
              1e-12);
}

TEST(Controller, ScalarObjectivesGenerateControlledDrift) {
  std::mt19937_64 rng(68);
  const double h = 1e-6;
  for (int i = 0; i < 100; ++i) {
    const ScalarSystemParams p = RandomParams(rng);
    std::uniform_real_distribution<double> ux(0.1, 0.9), uy(0.05, 1.5);
    const double x = ux(rng), y = uy(rng);
    const Drift2 f = DriftControlled(p, x, y);
    const double dvx = (ScalarDiscObjectiveControlled(p, x + h, y) -
                        ScalarDiscObjectiveControlled(p, x - h, y)) / (2 * h);
    const double dvy = (ScalarPolicyObjectiveControlled(p, x, y + h) -
                        ScalarPolicyObjectiveControlled(p, x, y - h)) / (2 * h);
    EXPECT_NEAR(dvx, f.dx, 1e-6 * (1 + std::abs(f.dx)));
    EXPECT_NEAR(-dvy, f.dy, 1e-6 * (1 + std::abs(f.dy)));

    const double e = p.expert_prob;
    const double sx = (ScalarDiscObjectiveControlled(p, 0.5 + h, e) -
                       ScalarDiscObjectiveControlled(p, 0.5 - h, e)) / (2 * h);
    const double sy = (ScalarPolicyObjectiveControlled(p, 0.5, e + h) -
                       ScalarPolicyObjectiveControlled(p, 0.5, e - h)) / (2 * h);
    EXPECT_NEAR(sx, 0.0, 1e-7);
    EXPECT_NEAR(sy, 0.0, 1e-7);
  }
}

TEST(Controller, DegenerateExpertIsRejected) {
  Matrix e(2, 2);
  e << 1.0, 0.0, 0.5, 0.5;
  const PolicyTable expert(e);
  const PolicyTable pi = PolicyTable::Uniform(2, 2);
  try {
    ControllerPotential(pi, expert, Vector::Constant(2, 0.5), 1.0, 0.0);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::kDegenerate);
  }
  // An unvisited state may carry a floored expert row.
  Vector c(2);
  c << 0.0, 1.0;
  EXPECT_NO_THROW(ControllerPotential(pi, expert, c, 1.0, 0.0));
}

TEST(StateFrequencies, NormalizedCounts) {
  const Vector c = StateFrequencies({{{0, 1}, {2, 0}}, {{2, 1}, {2, 0}}}, 3);
  EXPECT_DOUBLE_EQ(c(0), 0.25);
  EXPECT_EQ(c(1), 0.0);
  EXPECT_DOUBLE_EQ(c(2), 0.75);
}

TrainConfig ShortConfig() {
  TrainConfig c;
  c.iterations = 40;
  c.eval_traj = 20;
  c.eval_horizon = 20;
  return c;
}

TEST(Train, DeterministicWithOneRecordPerIteration) {
  const Fixture f = BuiltinFixture("two_corridor");
  TrainConfig c = ShortConfig();
  c.k = 1.0;
  c.seed = 11;
  const TrainingTrace a = Train(f.mdp, *f.expert, c);
  const TrainingTrace b = Train(f.mdp, *f.expert, c);
  ASSERT_EQ(a.records.size(), 40u);
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].iter, static_cast<int>(i));
    EXPECT_EQ(a.records[i].ret, b.records[i].ret);
    EXPECT_EQ(a.records[i].wasserstein_state, b.records[i].wasserstein_state);
    EXPECT_EQ(a.records[i].disc_mean, b.records[i].disc_mean);
  }
  EXPECT_EQ(a.policy_logits, b.policy_logits);
  EXPECT_EQ(a.disc_logits, b.disc_logits);
  c.seed = 12;
  EXPECT_NE(Train(f.mdp, *f.expert, c).policy_logits, a.policy_logits);
}

TEST(Train, DiscriminatorStaysInOpenInterval) {
  const Fixture f = BuiltinFixture("two_corridor");
  TrainConfig c = ShortConfig();
  c.lr_disc = 200.0;
  const TrainingTrace t = Train(f.mdp, *f.expert, c);
  const Matrix d = Sigmoid(t.disc_logits);
  EXPECT_GT(d.minCoeff(), 0.0);
  EXPECT_LT(d.maxCoeff(), 1.0);
  for (const auto& r : t.records) {
    EXPECT_GT(r.disc_mean, 0.0);
    EXPECT_LT(r.disc_mean, 1.0);
    EXPECT_GE(r.tv_to_expert, 0.0);
    EXPECT_GE(r.wasserstein_state, 0.0);
    EXPECT_EQ(r.regularizer_value, 0.0);
  }
}

TEST(Train, RecordsAgreeWithIndependentEvaluation) {
  const Fixture f = BuiltinFixture("two_corridor");
  TrainConfig c = ShortConfig();
  c.iterations = 5;
  const TrainingTrace t = Train(f.mdp, *f.expert, c);
  const PolicyTable last = PolicyTable::FromLogits(t.policy_logits);
  const double uniform = PolicyReturn(f.mdp, PolicyTable::Uniform(5, 2));
  const double expert = PolicyReturn(f.mdp, *f.expert);
  EXPECT_EQ(t.records.back().ret, PolicyReturn(f.mdp, last));
  EXPECT_NEAR(t.records.back().normalized_return,
              (t.records.back().ret - uniform) / (expert - uniform), 1e-12);
  EXPECT_EQ(t.records.back().tv_to_expert, PolicyDistanceToExpert(f.mdp, last, *f.expert));
}

// Alternating updates without any regularizer code, drawing from the same
// random streams as Train.
TEST(Train, ZeroGainMatchesVanillaLoop) {
  const Fixture f = BuiltinFixture("two_corridor");
  TrainConfig c = ShortConfig();
  c.seed = 5;
  const TrainingTrace t = Train(f.mdp, *f.expert, c);

  Rng learner(c.seed, kLearnerStream), expert_rng(c.seed, kExpertStream);
  const auto expert_batch =
      SampleTrajectories(f.mdp, *f.expert, c.n_expert_traj, c.horizon, expert_rng);
  Matrix theta = Matrix::Zero(5, 2), phi = Matrix::Zero(5, 2);
  std::vector<double> returns;
  for (int it = 0; it < c.iterations; ++it) {
    const auto batch = SampleTrajectories(f.mdp, PolicyTable::FromLogits(theta),
                                          c.n_traj_per_iter, c.horizon, learner);
    const Matrix fl = PairFrequencies(batch, 5, 2), fe = PairFrequencies(expert_batch, 5, 2);
    Matrix step(5, 2);
    for (int s = 0; s < 5; ++s) {
      for (int a = 0; a < 2; ++a) {
        const double d = std::clamp(1.0 / (1.0 + std::exp(-phi(s, a))), kDiscClamp, 1.0 - kDiscClamp);
        step(s, a) = fl(s, a) * (1.0 - d) - fe(s, a) * d;
      }
    }
    phi += c.lr_disc * step;
    const Matrix disc = Sigmoid(phi);
    theta -= c.lr_policy *
             PolicyObjective(theta, disc, c.lambda, f.mdp.gamma(), batch).gradient;
    returns.push_back(PolicyReturn(f.mdp, PolicyTable::FromLogits(theta)));
  }
  EXPECT_EQ(t.disc_logits, phi);
  EXPECT_EQ(t.policy_logits, theta);
  for (int it = 0; it < c.iterations; ++it) EXPECT_EQ(t.records[it].ret, returns[it]);
}

TEST(Train, ControlledCheatStartStaysNearExpert) {
  const Fixture f = BuiltinFixture("two_corridor");
  for (std::uint64_t seed : {0u, 1u, 2u}) {
    TrainConfig c;
    c.k = 1.0;
    c.iterations = 200;
    c.seed = seed;
    c.init_policy = InitPolicy::kExpert;
    c.eval_traj = 10;
    const TrainingTrace t = Train(f.mdp, *f.expert, c);
    for (const auto& r : t.records) {
      ASSERT_GE(r.normalized_return, 0.9) << "seed " << seed << " iter " << r.iter;
      ASSERT_LE(r.normalized_return, 1.1) << "seed " << seed << " iter " << r.iter;
    }
  }
}

TEST(Train, OracleControllerRunsAndStaysFinite) {
  const Fixture f = BuiltinFixture("two_corridor");
  TrainConfig c = ShortConfig();
  c.k = 1.0;
  c.alpha = 0.5;
  c.oracle_policy_controller = true;
  const TrainingTrace t = Train(f.mdp, *f.expert, c);
  EXPECT_TRUE(t.policy_logits.allFinite());
  EXPECT_NE(t.policy_logits, Train(f.mdp, *f.expert, ShortConfig()).policy_logits);
}

TEST(Train, Errors) {
  const Fixture f = BuiltinFixture("two_corridor");
  TrainConfig c = ShortConfig();
  c.lr_policy = 1e7;
  try {
    Train(f.mdp, *f.expert, c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDivergence);
  }
  TrainConfig bad = ShortConfig();
  bad.iterations = 0;
  EXPECT_THROW(Train(f.mdp, *f.expert, bad), Error);
  bad = ShortConfig();
  bad.k = -1.0;
  EXPECT_THROW(Train(f.mdp, *f.expert, bad), Error);
  EXPECT_THROW(Train(f.mdp, PolicyTable::Uniform(4, 2), ShortConfig()), Error);
  try {
    Train(f.mdp, PolicyTable::Uniform(5, 2), ShortConfig());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerate);
  }
}

TEST(TraceMetrics, OscillationRange) {
  EXPECT_EQ(OscillationRange({0.5, 0.5, 0.5}, 3), 0.0);
  EXPECT_NEAR(OscillationRange({0.0, 0.8, 1.0, 0.8, 1.0}, 4), 0.2, 1e-15);
  EXPECT_EQ(OscillationRange({-3.0, 0.8, 1.0}, 1), 0.0);
  EXPECT_THROW(OscillationRange({1.0}, 2), Error);
  EXPECT_THROW(OscillationRange({1.0}, 0), Error);
}

TEST(TraceMetrics, ConvergenceStep) {
  EXPECT_EQ(ConvergenceStep({0.0, 0.0, 0.0}), 0);
  EXPECT_EQ(ConvergenceStep({0.1, 0.5, 0.96, 0.9, 1.0}), 2);
  EXPECT_EQ(ConvergenceStep({0.1, 0.2, 0.3}), 2);
  EXPECT_FALSE(ConvergenceStep({}).has_value());
  EXPECT_FALSE(ConvergenceStep({-1.0, -2.0}).has_value());
}

TEST(Config, ParseInitPolicy) {
  EXPECT_EQ(ParseInitPolicy("expert"), InitPolicy::kExpert);
  EXPECT_STREQ(InitPolicyName(InitPolicy::kUniform), "uniform");
  EXPECT_THROW(ParseInitPolicy("random"), Error);
}

}  // namespace
}  // namespace cgail
