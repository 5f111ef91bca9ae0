#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "stormreach/ellipse.hpp"
#include "stormreach/grid.hpp"
#include "stormreach/kmeans.hpp"
#include "stormreach/rng.hpp"
#include "stormreach/stats.hpp"
#include "stormreach/storm_cell.hpp"

namespace stormreach {

/// Probability-of-storm grids p(x, y) at horizons tau = 0..N (10-minute spacing).
/// tau = 0 is the deterministic union of observed cell boxes.
struct StormField {
  PlaneGrid grid{};
  int step_minutes{kNowcastStepMinutes};
  int samples{};
  std::vector<std::vector<double>> values;  // [tau][grid.flat(ix, iy)]
  std::vector<int> clusters;                // K used at each tau (0 at tau = 0)

  int horizons() const { return static_cast<int>(values.size()) - 1; }
  double at(int tau, int ix, int iy) const { return values[static_cast<std::size_t>(tau)][grid.flat(ix, iy)]; }
};

struct StormFieldOptions {
  int clusters = 12;  // 0 selects K with the elbow rule
  int k_max = 20;
  double elbow_threshold = 0.15;
  int samples = 100;
  int horizons = 4;
  /// km per radian applied to the heading feature; <= 0 uses half the domain diagonal / pi.
  double heading_weight = 0.0;
  MveOptions mve{};
};

/// The four extremity points (W, E, S, N) of a cell.
std::array<Point2, 4> extremity_points(const StormCellState& cell);

/// One stochastic realization of the cell at horizon tau: forecast center plus sampled
/// logistic center error; extremities grown by half of the summed per-step size increments.
/// Throws std::out_of_range unless 1 <= tau <= models.horizons().
StormCellState sample_cell_path(const PlanarCell& cell, const ErrorModelSet& models, int tau, Rng& rng);

/// 1 - prod(1 - p_k): probability of at least one of independent events.
double merge_probabilities(std::span<const double> probabilities);

/// Clustering features at horizon tau from the deterministic forecasts.
std::vector<Feature> forecast_features(std::span<const PlanarCell> cells, int tau, double heading_weight);

double default_heading_weight(const PlaneGrid& grid);

/// Clusters the forecasts per horizon, draws `samples` joint realizations per cluster,
/// encloses each in a minimum-volume ellipse and merges per-cluster containment
/// frequencies. Identical seed gives a bit-identical field.
StormField build_storm_field(std::span<const PlanarCell> cells, const ErrorModelSet& models, const PlaneGrid& grid,
                             const StormFieldOptions& options, std::uint64_t seed);

/// Deterministic tau = 0 layer: 1 where a grid center lies in an observed box.
std::vector<double> observed_box_layer(std::span<const StormCellState> cells, const PlaneGrid& grid);

/// Linear interpolation between bracketing horizons; out-of-range times are clamped with a warning.
std::vector<double> interpolate_field(const StormField& field, double minutes);

/// CSV: rows = y index (south first), columns = x index.
std::string format_grid_csv(std::span<const double> values, const PlaneGrid& grid);
std::vector<double> parse_grid_csv(const std::string& text, const PlaneGrid& grid);
/// 8-bit binary graymap, north row first, 255 = probability 1.
std::string format_pgm(std::span<const double> values, const PlaneGrid& grid);
/// Values quantized to k / 255.
std::vector<double> parse_pgm(const std::string& bytes, const PlaneGrid& grid);

/// Writes field_tau<k>.csv (and .pgm when requested) for every horizon.
void write_storm_field(const std::filesystem::path& dir, const StormField& field, bool with_pgm);
StormField read_storm_field(const std::filesystem::path& dir, const PlaneGrid& grid, int horizons);

}  // namespace stormreach
