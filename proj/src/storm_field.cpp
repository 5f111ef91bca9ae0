#include "stormreach/storm_field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "stormreach/errors.hpp"
#include "stormreach/parallel.hpp"
#include "stormreach/text_format.hpp"

namespace stormreach {
namespace {

void rasterize(const Ellipse& e, const PlaneGrid& grid, std::vector<std::uint32_t>& counts) {
  const double hx = e.half_extent_x(), hy = e.half_extent_y();
  if (e.center.x + hx < grid.x_min || e.center.x - hx > grid.x_max || e.center.y + hy < grid.y_min ||
      e.center.y - hy > grid.y_max)
    return;
  const int x0 = grid.x_index(e.center.x - hx), x1 = grid.x_index(e.center.x + hx);
  const int y0 = grid.y_index(e.center.y - hy), y1 = grid.y_index(e.center.y + hy);
  for (int iy = y0; iy <= y1; ++iy)
    for (int ix = x0; ix <= x1; ++ix)
      if (e.contains({grid.x_center(ix), grid.y_center(iy)})) ++counts[grid.flat(ix, iy)];
}

}  // namespace

std::array<Point2, 4> extremity_points(const StormCellState& c) {
  return {Point2{c.west, c.center.y}, Point2{c.east, c.center.y}, Point2{c.center.x, c.south},
          Point2{c.center.x, c.north}};
}

StormCellState sample_cell_path(const PlanarCell& cell, const ErrorModelSet& models, int tau, Rng& rng) {
  if (tau < 1 || tau > models.horizons())
    throw std::out_of_range(fmt::format("horizon {} outside fitted range 1..{}", tau, models.horizons()));
  const auto& s0 = cell.state;
  const auto& mx = models.center_x[static_cast<std::size_t>(tau - 1)];
  const auto& my = models.center_y[static_cast<std::size_t>(tau - 1)];
  const Point2 fc = cell.forecast_center(tau);

  StormCellState out = s0;
  out.center = {fc.x + sample_logistic(rng, mx.m, mx.s), fc.y + sample_logistic(rng, my.m, my.s)};

  const auto gw = models.width_growth.at(s0.pixels);
  const auto gh = models.height_growth.at(s0.pixels);
  double sum_dw = 0, sum_dh = 0;
  for (int i = 0; i < tau; ++i) sum_dw += sample_logistic(rng, gw.m, gw.s);
  for (int i = 0; i < tau; ++i) sum_dh += sample_logistic(rng, gh.m, gh.s);

  // A shrinking cell collapses onto its center rather than inverting.
  out.west = out.center.x + std::min(0.0, (s0.west - s0.center.x) - 0.5 * sum_dw);
  out.east = out.center.x + std::max(0.0, (s0.east - s0.center.x) + 0.5 * sum_dw);
  out.south = out.center.y + std::min(0.0, (s0.south - s0.center.y) - 0.5 * sum_dh);
  out.north = out.center.y + std::max(0.0, (s0.north - s0.center.y) + 0.5 * sum_dh);
  return out;
}

double merge_probabilities(std::span<const double> probabilities) {
  double none = 1.0;
  for (double p : probabilities) none *= (1.0 - p);
  return 1.0 - none;
}

double default_heading_weight(const PlaneGrid& grid) {
  return 0.5 * std::hypot(grid.x_max - grid.x_min, grid.y_max - grid.y_min) / M_PI;
}

std::vector<Feature> forecast_features(std::span<const PlanarCell> cells, int tau, double heading_weight) {
  std::vector<Feature> f;
  f.reserve(cells.size());
  for (const auto& c : cells) {
    const Point2 p = c.forecast_center(tau);
    f.push_back({p.x, p.y, heading_weight * c.state.heading_rad});
  }
  return f;
}

std::vector<double> observed_box_layer(std::span<const StormCellState> cells, const PlaneGrid& grid) {
  std::vector<double> layer(grid.size(), 0.0);
  for (const auto& c : cells) {
    if (c.east < grid.x_min || c.west > grid.x_max || c.north < grid.y_min || c.south > grid.y_max) continue;
    for (int iy = grid.y_index(c.south); iy <= grid.y_index(c.north); ++iy)
      for (int ix = grid.x_index(c.west); ix <= grid.x_index(c.east); ++ix)
        if (c.contains({grid.x_center(ix), grid.y_center(iy)})) layer[grid.flat(ix, iy)] = 1.0;
  }
  return layer;
}

StormField build_storm_field(std::span<const PlanarCell> cells, const ErrorModelSet& models, const PlaneGrid& grid,
                             const StormFieldOptions& options, std::uint64_t seed) {
  grid.validate();
  if (options.samples < 1) throw DomainError("storm field needs at least one sample per cluster");
  if (options.horizons < 0) throw DomainError("negative horizon count");
  if (options.horizons > models.horizons())
    throw std::out_of_range(fmt::format("storm field horizon {} exceeds fitted error models ({})", options.horizons,
                                        models.horizons()));

  StormField field;
  field.grid = grid;
  field.samples = options.samples;

  std::vector<StormCellState> current;
  for (const auto& c : cells) current.push_back(c.state);
  field.values.push_back(observed_box_layer(current, grid));
  field.clusters.push_back(0);

  const double weight = options.heading_weight > 0 ? options.heading_weight : default_heading_weight(grid);
  const auto ns = static_cast<double>(options.samples);

  for (int tau = 1; tau <= options.horizons; ++tau) {
    std::vector<double> none(grid.size(), 1.0);
    if (cells.empty()) {
      field.values.emplace_back(grid.size(), 0.0);
      field.clusters.push_back(0);
      continue;
    }
    const auto features = forecast_features(cells, tau, weight);
    Rng cluster_rng = make_stream(seed, {static_cast<std::uint64_t>(tau), 0xC1u});
    const int n = static_cast<int>(features.size());
    const int k = options.clusters > 0
                      ? std::min(options.clusters, n)
                      : select_k(features, options.k_max, cluster_rng, options.elbow_threshold);
    const auto assignment = kmeans(features, k, cluster_rng);

    std::vector<std::vector<const PlanarCell*>> members(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < cells.size(); ++i)
      members[static_cast<std::size_t>(assignment.labels[i])].push_back(&cells[i]);

    std::vector<std::vector<std::uint32_t>> counts(static_cast<std::size_t>(k));
    parallel_for(0, static_cast<std::size_t>(k), [&](std::size_t ci) {
      auto& cnt = counts[ci];
      cnt.assign(grid.size(), 0);
      if (members[ci].empty()) return;
      Rng rng = make_stream(seed, {static_cast<std::uint64_t>(tau), ci, 0x5Au});
      std::vector<Point2> pts;
      for (int j = 0; j < options.samples; ++j) {
        pts.clear();
        for (const auto* cell : members[ci]) {
          const auto realized = sample_cell_path(*cell, models, tau, rng);
          const auto ext = extremity_points(realized);
          pts.insert(pts.end(), ext.begin(), ext.end());
        }
        const auto e = min_volume_ellipse(pts, options.mve);
        rasterize(e, grid, cnt);
      }
    });

    for (const auto& cnt : counts)
      for (std::size_t g = 0; g < grid.size(); ++g) none[g] *= 1.0 - static_cast<double>(cnt[g]) / ns;
    std::vector<double> layer(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) layer[g] = std::clamp(1.0 - none[g], 0.0, 1.0);
    field.values.push_back(std::move(layer));
    field.clusters.push_back(k);
  }
  return field;
}

std::vector<double> interpolate_field(const StormField& field, double minutes) {
  if (field.values.empty()) throw DomainError("empty storm field");
  const double t_max = static_cast<double>(field.horizons() * field.step_minutes);
  if (minutes < 0 || minutes > t_max) {
    warn(fmt::format("storm field requested at {} min, clamped to [0, {}]", minutes, t_max));
    minutes = std::clamp(minutes, 0.0, t_max);
  }
  const double u = minutes / field.step_minutes;
  const int lo = std::min(static_cast<int>(std::floor(u)), field.horizons());
  const int hi = std::min(lo + 1, field.horizons());
  const double f = u - lo;
  const auto& a = field.values[static_cast<std::size_t>(lo)];
  if (f == 0.0 || lo == hi) return a;
  const auto& b = field.values[static_cast<std::size_t>(hi)];
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = (1.0 - f) * a[i] + f * b[i];
  return out;
}

std::string format_grid_csv(std::span<const double> values, const PlaneGrid& grid) {
  if (values.size() != grid.size()) throw DimensionError("grid CSV: value count does not match grid");
  std::string out;
  for (int iy = 0; iy < grid.n_y; ++iy) {
    for (int ix = 0; ix < grid.n_x; ++ix) {
      if (ix) out += ',';
      out += format_double(values[grid.flat(ix, iy)]);
    }
    out += '\n';
  }
  return out;
}

std::vector<double> parse_grid_csv(const std::string& text, const PlaneGrid& grid) {
  std::vector<double> values;
  values.reserve(grid.size());
  int rows = 0;
  for (auto line : split(text, '\n')) {
    line = trim(line);
    if (line.empty()) continue;
    ++rows;
    const auto cols = split(line, ',');
    if (static_cast<int>(cols.size()) != grid.n_x)
      throw DimensionError(fmt::format("grid CSV row {} has {} columns, expected {}", rows, cols.size(), grid.n_x));
    for (std::size_t c = 0; c < cols.size(); ++c) {
      double v{};
      if (!parse_double(cols[c], v)) throw ParseError(fmt::format("grid CSV row {}, column {}: not a number", rows, c + 1), static_cast<std::size_t>(rows), c + 1);
      values.push_back(v);
    }
  }
  if (rows != grid.n_y) throw DimensionError(fmt::format("grid CSV has {} rows, expected {}", rows, grid.n_y));
  return values;
}

std::string format_pgm(std::span<const double> values, const PlaneGrid& grid) {
  std::string out = fmt::format("P5\n{} {}\n255\n", grid.n_x, grid.n_y);
  for (int iy = grid.n_y - 1; iy >= 0; --iy)
    for (int ix = 0; ix < grid.n_x; ++ix)
      out += static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * std::clamp(values[grid.flat(ix, iy)], 0.0, 1.0))));
  return out;
}

std::vector<double> parse_pgm(const std::string& bytes, const PlaneGrid& grid) {
  const std::string header = fmt::format("P5\n{} {}\n255\n", grid.n_x, grid.n_y);
  if (bytes.compare(0, header.size(), header) != 0) throw ParseError("PGM header does not match the grid");
  if (bytes.size() != header.size() + grid.size()) throw DimensionError("PGM payload size does not match the grid");
  std::vector<double> v(grid.size());
  std::size_t i = header.size();
  for (int iy = grid.n_y - 1; iy >= 0; --iy)
    for (int ix = 0; ix < grid.n_x; ++ix) v[grid.flat(ix, iy)] = static_cast<unsigned char>(bytes[i++]) / 255.0;
  return v;
}

void write_storm_field(const std::filesystem::path& dir, const StormField& field, bool with_pgm) {
  std::filesystem::create_directories(dir);
  for (int tau = 0; tau <= field.horizons(); ++tau) {
    const auto& v = field.values[static_cast<std::size_t>(tau)];
    write_text_file((dir / fmt::format("field_tau{}.csv", tau)).string(), format_grid_csv(v, field.grid));
    if (with_pgm) write_text_file((dir / fmt::format("field_tau{}.pgm", tau)).string(), format_pgm(v, field.grid));
  }
}

StormField read_storm_field(const std::filesystem::path& dir, const PlaneGrid& grid, int horizons) {
  StormField field;
  field.grid = grid;
  for (int tau = 0; tau <= horizons; ++tau) {
    const auto path = dir / fmt::format("field_tau{}.csv", tau);
    if (!std::filesystem::exists(path)) throw ParseError("missing storm field file " + path.string());
    field.values.push_back(parse_grid_csv(read_text_file(path.string()), grid));
    field.clusters.push_back(0);
  }
  return field;
}

}  // namespace stormreach
