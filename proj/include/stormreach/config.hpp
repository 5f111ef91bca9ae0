#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "stormreach/kernel.hpp"
#include "stormreach/reach_avoid.hpp"
#include "stormreach/simulate.hpp"
#include "stormreach/stats.hpp"
#include "stormreach/storm_field.hpp"

namespace stormreach {

/// Everything a pipeline run needs. Relative paths resolve against the config file's directory.
struct RunConfig {
  std::filesystem::path archive_dir;
  std::filesystem::path nowcast_file;
  std::filesystem::path model_file;  // defaults to <output_dir>/error_models.json
  std::filesystem::path output_dir;

  double frame_lat0{38.0};
  double frame_lon0{-98.0};
  std::optional<double> standard_parallel;

  GridSpec grid{};  // steps derived from horizon_min / dt_min
  AircraftParams aircraft{};
  StormFieldOptions storm{};  // horizons derived from horizon_min
  FitOptions fit{};

  AircraftState start{};
  GoalBox goal{};
  double horizon_min{40.0};

  RolloutOptions simulate{};
  bool write_trajectories{true};
  bool write_pgm{true};

  std::optional<std::uint64_t> seed;

  PlanarFrame frame() const;
  /// Number of 10-minute storm horizons covering the planning horizon.
  int storm_horizons() const;
};

/// Throws ParseError on malformed JSON or unknown enum values, DomainError on bad values.
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const RunConfig& config, const std::filesystem::path& base_dir);

}  // namespace stormreach
