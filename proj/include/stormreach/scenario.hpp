#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "stormreach/config.hpp"
#include "stormreach/nowcast.hpp"

namespace stormreach {

/// Synthetic nowcast archive with scripted storm motion and growth.
///
/// Kinds:
///   gap        two storm clusters either side of the direct route, 40-minute plan
///   far-start  start roughly 50 minutes of flight from the goal, 60-minute plan
///   clear      a single distant cluster, start close to the goal
struct Scenario {
  std::string kind;
  RunConfig config;  // paths relative to the scenario directory
  std::vector<NowcastFile> archive;
  IssueTime planning_time{};
  std::vector<Point2> cluster_centers;  // truth cluster centers at planning time
};

std::vector<std::string> scenario_kinds();

/// Throws DomainError for an unknown kind.
Scenario make_scenario(const std::string& kind, std::uint64_t seed);

/// Writes <dir>/archive/*.csv and <dir>/config.json; returns the config path.
std::filesystem::path write_scenario(const std::filesystem::path& dir, const Scenario& scenario);

}  // namespace stormreach
