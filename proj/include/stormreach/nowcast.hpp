#pragma once

#include <array>
#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stormreach/geo.hpp"

namespace stormreach {

inline constexpr int kMaxForecastHorizons = 6;
inline constexpr int kNowcastStepMinutes = 10;

using IssueTime = std::chrono::sys_seconds;

/// One row of a nowcast file.
struct StormCellObservation {
  int id{};
  int pixels{1};
  GeoPoint center{};
  double radius_km{};
  double north{};  // latitude, degrees
  double south{};
  double west{};  // longitude, degrees
  double east{};
  /// Entry k holds the center forecast for t0 + 10(k+1) minutes; absent past the cell's lifetime.
  std::array<std::optional<GeoPoint>, kMaxForecastHorizons> center_forecasts{};
  double heading_deg{};  // clockwise from North
  double speed_kmh{};

  int forecast_count() const;

  friend bool operator==(const StormCellObservation&, const StormCellObservation&) = default;
};

struct NowcastFile {
  IssueTime issue_time{};
  std::vector<StormCellObservation> cells;

  const StormCellObservation* find(int id) const;

  friend bool operator==(const NowcastFile&, const NowcastFile&) = default;
};

/// Header line of the `;`-delimited nowcast schema.
std::string_view nowcast_header();

/// Throws SchemaError naming the cell if an observation breaks an invariant.
void validate_observation(const StormCellObservation& obs);

/// Parses file contents. Errors: ParseError (line/column) or SchemaError.
NowcastFile parse_nowcast_text(std::string_view text, IssueTime issue_time);

/// Parses `nowcast_YYYYMMDD_HHMM.csv`; the issue time comes from the file name.
NowcastFile parse_nowcast(const std::filesystem::path& path);

std::string format_nowcast(const NowcastFile& file);

/// Writes `file` into `dir` under its canonical name and returns the path.
std::filesystem::path write_nowcast(const std::filesystem::path& dir, const NowcastFile& file);

std::string nowcast_filename(IssueTime t);
IssueTime issue_time_from_filename(std::string_view name);
std::string format_issue_time(IssueTime t);

/// All `nowcast_*.csv` files in `dir`, sorted by issue time.
std::vector<NowcastFile> load_archive(const std::filesystem::path& dir);

}  // namespace stormreach
