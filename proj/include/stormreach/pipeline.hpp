#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "stormreach/config.hpp"

namespace stormreach {

struct FitOutput {
  ErrorModelSet models;
  FitReport report;
};

struct PlanOutput {
  StormField field;
  ReachAvoidProblem problem;
  Solution solution;
  std::size_t start_state{};
  double v0{};
};

/// Contents of plan_summary.json.
struct PlanSummary {
  std::string nowcast_issue_time;
  std::uint64_t seed{};
  int steps{};
  double dt_min{};
  int storm_horizons{};
  std::vector<int> clusters;
  AircraftState start{};
  std::size_t start_state{};
  GoalBox goal{};
  double v0{};
};

PlanSummary parse_plan_summary(const std::string& text);

/// Per-horizon (m, s) and logistic/normal BIC table.
std::string format_fit_table(const FitReport& report);

/// Fits error models on the archive and writes the model file.
/// Throws SchemaError if the archive holds fewer than two files.
FitOutput cmd_fit(const RunConfig& config, std::ostream& log);

/// Storm field, kernel (cached under <output_dir>/cache), DP solution, plan_summary.json.
PlanOutput cmd_plan(const RunConfig& config, std::ostream& log);

/// Rollouts of the stored policy. Storms for observed scoring come from the archive
/// files issued at and after the nowcast time.
RolloutReport cmd_simulate(const RunConfig& config, std::ostream& log);

void cmd_all(const RunConfig& config, std::ostream& log);

/// Observed cell boxes of the archive files at issue + k * 10 min for k = 0..horizons.
/// Throws ParseError naming the first missing file.
ObservedStorms load_observed_storms(const RunConfig& config, int horizons);

}  // namespace stormreach
