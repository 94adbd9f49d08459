#include "report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "error.hpp"

namespace cgail {
namespace {

using ojson = nlohmann::ordered_json;

class CsvBuilder {
 public:
  explicit CsvBuilder(std::initializer_list<const char*> header) {
    bool first = true;
    for (const char* h : header) {
      if (!first) out_ += ',';
      out_ += h;
      first = false;
    }
    out_ += '\n';
  }

  CsvBuilder& Num(double v) { return Cell(FormatNumber(v)); }
  CsvBuilder& Int(long long v) { return Cell(std::to_string(v)); }
  CsvBuilder& Bool(bool v) { return Cell(v ? "true" : "false"); }
  CsvBuilder& Text(const std::string& v) { return Cell(v); }
  void EndRow() {
    out_ += '\n';
    row_open_ = false;
  }
  const std::string& str() const { return out_; }

 private:
  CsvBuilder& Cell(const std::string& v) {
    if (row_open_) out_ += ',';
    out_ += v;
    row_open_ = true;
    return *this;
  }

  std::string out_;
  bool row_open_ = false;
};

ojson Number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

ojson MeanStdJson(const MeanStd& m) {
  ojson j;
  j["mean"] = Number(m.mean);
  j["std"] = Number(m.std);
  j["count"] = m.count;
  return j;
}

}  // namespace

std::string FormatNumber(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string TrajectoryCsv(const ScalarSystemParams& p, const ScalarTrajectory& traj,
                          bool controlled) {
  CsvBuilder csv({"t", "x", "y", "dx", "dy", "u1", "u2", "dist_to_desired"});
  for (const ScalarState& s : traj.states) {
    const Drift2 d = Drift(p, s.x, s.y, controlled);
    csv.Num(s.t).Num(s.x).Num(s.y).Num(d.dx).Num(d.dy)
        .Num(controlled ? ControllerU1(p, s.x) : 0.0)
        .Num(controlled ? ControllerU2(p, s.y) : 0.0)
        .Num(DistanceToDesired(p, s))
        .EndRow();
  }
  return csv.str();
}

std::string SweepSummaryCsv(const std::vector<SweepRow>& rows) {
  CsvBuilder csv({"c", "lambda", "E", "k", "alpha", "converged", "terminal_distance",
                  "clamp_events"});
  for (const SweepRow& r : rows) {
    csv.Num(r.params.c).Num(r.params.lambda).Num(r.params.expert_prob)
        .Num(r.params.k).Num(r.params.alpha).Bool(r.converged)
        .Num(r.terminal_distance).Int(r.clamp_events)
        .EndRow();
  }
  return csv.str();
}

std::string EquilibriaCsv(const std::vector<Equilibrium>& roots) {
  CsvBuilder csv({"x", "y", "residual"});
  for (const Equilibrium& e : roots) csv.Num(e.x).Num(e.y).Num(e.residual).EndRow();
  return csv.str();
}

std::string AuditCsv(const AuditTable& table) {
  CsvBuilder csv({"c", "lambda", "E", "k", "alpha", "assumption_holds", "det", "trace",
                  "eig1_re", "eig1_im", "eig2_re", "eig2_im", "converged",
                  "terminal_distance"});
  for (const AuditRow& r : table.rows) {
    const Jacobian2x2& j = r.jacobian;
    csv.Num(r.params.c).Num(r.params.lambda).Num(r.params.expert_prob)
        .Num(r.params.k).Num(r.params.alpha).Bool(r.verdict.assumption_holds)
        .Num(j.det).Num(j.trace)
        .Num(j.eig_real[0]).Num(j.eig_imag[0]).Num(j.eig_real[1]).Num(j.eig_imag[1])
        .Bool(r.converged).Num(r.terminal_distance)
        .EndRow();
  }
  return csv.str();
}

std::string FlowCsv(const FlowTrace& trace) {
  CsvBuilder csv({"step", "t", "vd", "vpi", "max_abs_disc_drift",
                  "max_abs_policy_drift", "policy_distance_to_expert",
                  "projection_magnitude"});
  for (const FlowRecord& r : trace.records) {
    csv.Int(r.step).Num(r.t).Num(r.vd).Num(r.vpi).Num(r.max_abs_disc_drift)
        .Num(r.max_abs_policy_drift).Num(r.policy_distance_to_expert)
        .Num(r.projection_magnitude)
        .EndRow();
  }
  return csv.str();
}

std::string TrainingCsv(const TrainingTrace& trace) {
  CsvBuilder csv({"iter", "return", "normalized_return", "disc_mean", "disc_dev_half",
                  "tv_to_expert", "wasserstein_state", "regularizer_value"});
  for (const TrainingRecord& r : trace.records) {
    csv.Int(r.iter).Num(r.ret).Num(r.normalized_return).Num(r.disc_mean)
        .Num(r.disc_dev_half).Num(r.tv_to_expert).Num(r.wasserstein_state)
        .Num(r.regularizer_value)
        .EndRow();
  }
  return csv.str();
}

TrainingSummary Summarize(const TrainingTrace& trace, const TrainConfig& config,
                          const std::string& group, int window) {
  if (trace.records.empty()) throw ValidationError("summary: empty trace");
  const std::vector<double> returns = NormalizedReturns(trace);
  TrainingSummary s;
  s.group = group;
  s.config = config;
  s.window = window;
  s.convergence_step = ConvergenceStep(returns);
  s.oscillation_range = OscillationRange(returns, window);
  s.final_normalized_return = returns.back();
  s.final_wasserstein = trace.records.back().wasserstein_state;
  return s;
}

std::string TrainingSummaryJson(const TrainingSummary& s) {
  const TrainConfig& c = s.config;
  ojson j;
  j["schema_version"] = 1;
  j["group"] = s.group;
  j["k"] = c.k;
  j["seed"] = c.seed;
  j["lambda"] = c.lambda;
  j["alpha"] = c.alpha;
  j["lr_disc"] = c.lr_disc;
  j["lr_policy"] = c.lr_policy;
  j["n_traj_per_iter"] = c.n_traj_per_iter;
  j["horizon"] = c.horizon;
  j["iterations"] = c.iterations;
  j["oracle_policy_controller"] = c.oracle_policy_controller;
  j["ground_cost"] = GroundCostName(c.ground_cost);
  j["init_policy"] = InitPolicyName(c.init_policy);
  j["window"] = s.window;
  j["convergence_step"] =
      s.convergence_step ? ojson(*s.convergence_step) : ojson(nullptr);
  j["oscillation_range"] = Number(s.oscillation_range);
  j["final_normalized_return"] = Number(s.final_normalized_return);
  j["final_wasserstein"] = Number(s.final_wasserstein);
  return j.dump(2) + "\n";
}

RunSummary ParseTrainingSummaryJson(const std::string& text) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const ojson::parse_error& e) {
    throw ValidationError(std::string("summary: invalid JSON: ") + e.what());
  }
  if (!j.is_object() || j.value("schema_version", 0) != 1) {
    throw ValidationError("summary: schema_version must be 1");
  }
  auto num = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_number()) {
      throw ValidationError(std::string("summary.") + key + ": expected a number");
    }
    return j[key].get<double>();
  };
  RunSummary r;
  if (!j.contains("group") || !j["group"].is_string()) {
    throw ValidationError("summary.group: expected a string");
  }
  r.group = j["group"].get<std::string>();
  r.k = num("k");
  r.seed = static_cast<std::uint64_t>(num("seed"));
  if (j.contains("convergence_step") && j["convergence_step"].is_number_integer()) {
    r.convergence_step = j["convergence_step"].get<int>();
  }
  r.oscillation_range = num("oscillation_range");
  r.final_normalized_return = num("final_normalized_return");
  r.final_wasserstein = num("final_wasserstein");
  return r;
}

std::string AggregateCsv(const std::vector<AggregateRow>& rows) {
  CsvBuilder csv({"group", "runs", "convergence_step_mean", "convergence_step_std",
                  "convergence_step_count", "oscillation_range_mean",
                  "oscillation_range_std", "final_normalized_return_mean",
                  "final_normalized_return_std", "final_wasserstein_mean",
                  "final_wasserstein_std"});
  for (const AggregateRow& r : rows) {
    csv.Text(r.group).Int(r.runs)
        .Num(r.convergence_step.mean).Num(r.convergence_step.std)
        .Int(r.convergence_step.count)
        .Num(r.oscillation_range.mean).Num(r.oscillation_range.std)
        .Num(r.final_normalized_return.mean).Num(r.final_normalized_return.std)
        .Num(r.final_wasserstein.mean).Num(r.final_wasserstein.std)
        .EndRow();
  }
  return csv.str();
}

std::string AggregateJson(const std::vector<AggregateRow>& rows) {
  ojson j;
  j["schema_version"] = 1;
  j["groups"] = ojson::array();
  for (const AggregateRow& r : rows) {
    ojson g;
    g["group"] = r.group;
    g["runs"] = r.runs;
    g["convergence_step"] = MeanStdJson(r.convergence_step);
    g["oscillation_range"] = MeanStdJson(r.oscillation_range);
    g["final_normalized_return"] = MeanStdJson(r.final_normalized_return);
    g["final_wasserstein"] = MeanStdJson(r.final_wasserstein);
    j["groups"].push_back(std::move(g));
  }
  return j.dump(2) + "\n";
}

void WriteTextFile(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "failed writing '" + path + "'");
}

std::string ReadTextFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace cgail
