#include "metrics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>

#include "error.hpp"

namespace cgail {

GroundCost ParseGroundCost(const std::string& name) {
  if (name == "hop") return GroundCost::kHop;
  if (name == "discrete") return GroundCost::kDiscrete;
  throw ValidationError("ground_cost: expected 'hop' or 'discrete', got '" +
                        name + "'");
}

const char* GroundCostName(GroundCost cost) {
  return cost == GroundCost::kHop ? "hop" : "discrete";
}

void EmpiricalStateDistribution::Validate() const {
  const auto n = static_cast<Eigen::Index>(support.size());
  if (weights.size() != n || pairwise_cost.rows() != n ||
      pairwise_cost.cols() != n) {
    throw ValidationError("state distribution: support, weights and cost sizes differ");
  }
  if ((weights.array() < 0.0).any() || std::abs(weights.sum() - 1.0) > 1e-9) {
    throw ValidationError("state distribution: weights must be >= 0 and sum to 1");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (pairwise_cost(i, i) != 0.0) {
      throw ValidationError("state distribution: cost diagonal must be zero");
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      if (pairwise_cost(i, j) < 0.0 ||
          std::abs(pairwise_cost(i, j) - pairwise_cost(j, i)) > 1e-12) {
        throw ValidationError("state distribution: cost must be symmetric and >= 0");
      }
    }
  }
}

Matrix HopDistance(const TabularMDP& mdp) {
  const int n = mdp.n_states();
  std::vector<std::vector<int>> adj(n);
  for (int s = 0; s < n; ++s) {
    for (int t = 0; t < n; ++t) {
      if (s == t) continue;
      bool edge = false;
      for (int a = 0; a < mdp.n_actions() && !edge; ++a) {
        edge = mdp.transition(s, a, t) > 0.0 || mdp.transition(t, a, s) > 0.0;
      }
      if (edge) adj[s].push_back(t);
    }
  }
  Matrix dist = Matrix::Constant(n, n, static_cast<double>(n));
  for (int src = 0; src < n; ++src) {
    std::vector<int> hops(n, -1);
    std::deque<int> queue{src};
    hops[src] = 0;
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (int v : adj[u]) {
        if (hops[v] >= 0) continue;
        hops[v] = hops[u] + 1;
        queue.push_back(v);
      }
    }
    for (int t = 0; t < n; ++t) {
      if (hops[t] >= 0) dist(src, t) = hops[t];
    }
  }
  return dist;
}

Matrix DiscreteDistance(int n_states) {
  Matrix d = Matrix::Constant(n_states, n_states, std::sqrt(2.0));
  d.diagonal().setZero();
  return d;
}

Matrix StateCost(const TabularMDP& mdp, GroundCost cost) {
  return cost == GroundCost::kHop ? HopDistance(mdp)
                                  : DiscreteDistance(mdp.n_states());
}

EmpiricalStateDistribution StateDistribution(const std::vector<Trajectory>& batch,
                                             const Matrix& cost) {
  const auto n = cost.rows();
  EmpiricalStateDistribution d;
  d.support.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) d.support[i] = static_cast<int>(i);
  d.weights = Vector::Zero(n);
  double total = 0.0;
  for (const auto& traj : batch) {
    for (const Step& step : traj) {
      d.weights(step.state) += 1.0;
      total += 1.0;
    }
  }
  if (total == 0.0) throw ValidationError("state distribution: empty batch");
  d.weights /= total;
  d.pairwise_cost = cost;
  return d;
}

double TransportCost(const Vector& p, const Vector& q, const Matrix& cost) {
  const int n = static_cast<int>(p.size());
  const int m = static_cast<int>(q.size());
  if (cost.rows() != n || cost.cols() != m) {
    throw Error(ErrorCode::kInvalidArgument, "transport: cost shape mismatch");
  }
  const double mass_p = p.sum();
  const double mass_q = q.sum();
  if (std::abs(mass_p - mass_q) > 1e-9 || (p.array() < 0.0).any() ||
      (q.array() < 0.0).any()) {
    throw Error(ErrorCode::kInfeasible,
                "transport: weights must be nonnegative with equal total mass");
  }
  const double eps = 1e-14 * std::max(1.0, mass_p);
  constexpr double kInf = std::numeric_limits<double>::infinity();

  // Nodes 0..n-1 are sources, n..n+m-1 sinks.
  const int nodes = n + m;
  Vector supply = p;
  Vector demand = q;
  Matrix flow = Matrix::Zero(n, m);
  std::vector<double> pot(nodes, 0.0), dist(nodes);
  std::vector<int> prev(nodes);
  std::vector<char> done(nodes);

  for (int iter = 0; iter < 4 * (n + m) * (n + m) + 16; ++iter) {
    bool any_supply = false;
    for (int i = 0; i < n; ++i) any_supply |= supply(i) > eps;
    if (!any_supply) break;

    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(prev.begin(), prev.end(), -1);
    std::fill(done.begin(), done.end(), 0);
    for (int i = 0; i < n; ++i) {
      if (supply(i) > eps) dist[i] = 0.0;
    }
    // Dense Dijkstra on reduced costs.
    for (int round = 0; round < nodes; ++round) {
      int u = -1;
      for (int v = 0; v < nodes; ++v) {
        if (!done[v] && dist[v] < kInf && (u < 0 || dist[v] < dist[u])) u = v;
      }
      if (u < 0) break;
      done[u] = 1;
      if (u < n) {
        for (int j = 0; j < m; ++j) {
          const double rc = std::max(0.0, cost(u, j) + pot[u] - pot[n + j]);
          if (dist[u] + rc < dist[n + j]) {
            dist[n + j] = dist[u] + rc;
            prev[n + j] = u;
          }
        }
      } else {
        const int j = u - n;
        for (int i = 0; i < n; ++i) {
          if (flow(i, j) <= eps) continue;
          const double rc = std::max(0.0, -cost(i, j) + pot[u] - pot[i]);
          if (dist[u] + rc < dist[i]) {
            dist[i] = dist[u] + rc;
            prev[i] = u;
          }
        }
      }
    }
    int sink = -1;
    for (int j = 0; j < m; ++j) {
      if (demand(j) > eps && dist[n + j] < kInf &&
          (sink < 0 || dist[n + j] < dist[n + sink])) {
        sink = j;
      }
    }
    if (sink < 0) {
      throw Error(ErrorCode::kInfeasible, "transport: no augmenting path");
    }
    const double reach = dist[n + sink];
    for (int v = 0; v < nodes; ++v) pot[v] += std::min(dist[v], reach);

    double amount = demand(sink);
    int v = n + sink;
    while (prev[v] >= 0) {
      const int u = prev[v];
      if (u >= n) amount = std::min(amount, flow(v, u - n));  // backward arc
      v = u;
    }
    amount = std::min(amount, supply(v));
    const int source = v;
    v = n + sink;
    while (prev[v] >= 0) {
      const int u = prev[v];
      if (u < n) {
        flow(u, v - n) += amount;
      } else {
        flow(v, u - n) -= amount;
      }
      v = u;
    }
    supply(source) -= amount;
    demand(sink) -= amount;
  }
  return flow.cwiseProduct(cost).sum();
}

double Wasserstein(const EmpiricalStateDistribution& p,
                   const EmpiricalStateDistribution& q) {
  p.Validate();
  q.Validate();
  if (p.support != q.support || p.pairwise_cost != q.pairwise_cost) {
    throw Error(ErrorCode::kInvalidArgument,
                "wasserstein: distributions must share support and cost");
  }
  return TransportCost(p.weights, q.weights, p.pairwise_cost);
}

MeanStd ComputeMeanStd(const std::vector<double>& values) {
  MeanStd out;
  out.count = static_cast<int>(values.size());
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / out.count;
  double sq = 0.0;
  for (double v : values) sq += (v - out.mean) * (v - out.mean);
  out.std = std::sqrt(sq / out.count);
  return out;
}

std::vector<AggregateRow> Aggregate(const std::vector<RunSummary>& runs) {
  std::map<std::pair<double, std::string>, std::vector<const RunSummary*>> groups;
  for (const auto& r : runs) groups[{r.k, r.group}].push_back(&r);
  std::vector<AggregateRow> rows;
  for (const auto& [key, members] : groups) {
    std::vector<double> conv, osc, ret, w;
    for (const RunSummary* r : members) {
      if (r->convergence_step) conv.push_back(*r->convergence_step);
      osc.push_back(r->oscillation_range);
      ret.push_back(r->final_normalized_return);
      w.push_back(r->final_wasserstein);
    }
    AggregateRow row;
    row.group = key.second;
    row.runs = static_cast<int>(members.size());
    row.convergence_step = ComputeMeanStd(conv);
    row.oscillation_range = ComputeMeanStd(osc);
    row.final_normalized_return = ComputeMeanStd(ret);
    row.final_wasserstein = ComputeMeanStd(w);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace cgail
