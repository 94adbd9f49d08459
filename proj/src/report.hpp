#pragma once

#include <string>
#include <vector>

#include "gail_flow.hpp"
#include "metrics.hpp"
#include "onestep.hpp"
#include "stability.hpp"
#include "train.hpp"

namespace cgail {

// Shortest round-trip decimal form; "nan", "inf", "-inf" for the rest.
std::string FormatNumber(double v);

std::string TrajectoryCsv(const ScalarSystemParams& p, const ScalarTrajectory& traj,
                          bool controlled);

struct SweepRow {
  ScalarSystemParams params;
  bool converged = false;
  double terminal_distance = 0.0;
  long clamp_events = 0;
};
std::string SweepSummaryCsv(const std::vector<SweepRow>& rows);

std::string EquilibriaCsv(const std::vector<Equilibrium>& roots);

std::string AuditCsv(const AuditTable& table);

std::string FlowCsv(const FlowTrace& trace);

std::string TrainingCsv(const TrainingTrace& trace);

struct TrainingSummary {
  std::string group;
  TrainConfig config;
  int window = 50;
  std::optional<int> convergence_step;
  double oscillation_range = 0.0;
  double final_normalized_return = 0.0;
  double final_wasserstein = 0.0;
};
TrainingSummary Summarize(const TrainingTrace& trace, const TrainConfig& config,
                          const std::string& group, int window);
std::string TrainingSummaryJson(const TrainingSummary& summary);
RunSummary ParseTrainingSummaryJson(const std::string& text);

std::string AggregateCsv(const std::vector<AggregateRow>& rows);
std::string AggregateJson(const std::vector<AggregateRow>& rows);

void WriteTextFile(const std::string& path, const std::string& content);
std::string ReadTextFile(const std::string& path);

}  // namespace cgail
