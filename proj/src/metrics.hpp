#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mdp.hpp"

namespace cgail {

enum class GroundCost { kHop, kDiscrete };

GroundCost ParseGroundCost(const std::string& name);
const char* GroundCostName(GroundCost cost);

// Distribution over a finite set of states with its ground-cost matrix.
struct EmpiricalStateDistribution {
  std::vector<int> support;
  Vector weights;
  Matrix pairwise_cost;

  void Validate() const;
};

// Shortest-path hop counts on the undirected graph whose edges are the
// nonzero transitions of the MDP. Unreachable pairs cost n_states.
Matrix HopDistance(const TabularMDP& mdp);

// 0 on the diagonal, sqrt(2) elsewhere (L2 between one-hot embeddings).
Matrix DiscreteDistance(int n_states);

Matrix StateCost(const TabularMDP& mdp, GroundCost cost);

// Empirical state frequencies of a trajectory batch over all MDP states.
EmpiricalStateDistribution StateDistribution(const std::vector<Trajectory>& batch,
                                             const Matrix& cost);

// Exact optimal transport cost between two distributions on the same
// support, by successive shortest augmenting paths on the bipartite
// transport network.
double Wasserstein(const EmpiricalStateDistribution& p,
                   const EmpiricalStateDistribution& q);

// Dense form: weights p, q and a cost matrix.
double TransportCost(const Vector& p, const Vector& q, const Matrix& cost);

struct RunSummary {
  std::string group;  // e.g. "k=1"
  double k = 0.0;
  std::uint64_t seed = 0;
  std::optional<int> convergence_step;
  double oscillation_range = 0.0;
  double final_normalized_return = 0.0;
  double final_wasserstein = 0.0;
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population
  int count = 0;
};

struct AggregateRow {
  std::string group;
  int runs = 0;
  // Runs whose trace never reached 95% of its max are left out here.
  MeanStd convergence_step;
  MeanStd oscillation_range;
  MeanStd final_normalized_return;
  MeanStd final_wasserstein;
};

MeanStd ComputeMeanStd(const std::vector<double>& values);

// One row per group, ordered by group name.
std::vector<AggregateRow> Aggregate(const std::vector<RunSummary>& runs);

}  // namespace cgail
