#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "doctest.h"
#include "stormreach/errors.hpp"
#include "stormreach/storm_field.hpp"
#include "stormreach/text_format.hpp"
#include "test_util.hpp"

using namespace stormreach;

namespace {

PlanarCell make_cell(int id, Point2 c, double hw, double hh, Point2 velocity_per_step) {
  PlanarCell cell;
  cell.id = id;
  cell.state.center = c;
  cell.state.west = c.x - hw;
  cell.state.east = c.x + hw;
  cell.state.south = c.y - hh;
  cell.state.north = c.y + hh;
  cell.state.pixels = 100;
  cell.state.heading_rad = std::atan2(velocity_per_step.y, velocity_per_step.x);
  cell.state.speed_kmh = 6.0 * std::hypot(velocity_per_step.x, velocity_per_step.y);
  for (int j = 1; j <= kMaxForecastHorizons; ++j)
    cell.forecasts[j - 1] = Point2{c.x + j * velocity_per_step.x, c.y + j * velocity_per_step.y};
  return cell;
}

ErrorModelSet models_with(double center_s, double growth_m, double growth_s) {
  auto m = zero_noise_models(kMaxForecastHorizons);
  for (auto& x : m.center_x) x = {0.0, center_s};
  for (auto& y : m.center_y) y = {0.0, center_s};
  m.width_growth = {growth_m, growth_s, 0.0, 0.0, true};
  m.height_growth = {growth_m, growth_s, 0.0, 0.0, true};
  return m;
}

const PlaneGrid kGrid{-100, 100, 40, -100, 100, 40};

}  // namespace

TEST_CASE("heading conversions") {
  CHECK(heading_from_dirn(0) == doctest::Approx(M_PI / 2));   // north
  CHECK(heading_from_dirn(90) == doctest::Approx(0.0));       // east
  CHECK(heading_from_dirn(180) == doctest::Approx(-M_PI / 2));
  CHECK(std::abs(heading_from_dirn(270)) == doctest::Approx(M_PI));
  for (double d : {0.0, 33.0, 181.0, 359.0}) CHECK(dirn_from_heading(heading_from_dirn(d)) == doctest::Approx(d));
  CHECK(wrap_angle(3 * M_PI / 2) == doctest::Approx(-M_PI / 2));
}

TEST_CASE("missing forecast horizons are extrapolated") {
  auto c = make_cell(1, {0, 0}, 5, 5, {10, 0});
  c.forecasts[4].reset();
  c.forecasts[5].reset();
  CHECK(c.forecast_center(5).x == doctest::Approx(50.0));
  CHECK(c.forecast_center(6).x == doctest::Approx(60.0));
  PlanarCell none = c;
  for (auto& f : none.forecasts) f.reset();
  CHECK(none.forecast_center(3).x == doctest::Approx(30.0));  // 60 km/h for 30 min
}

TEST_CASE("sample_cell_path") {
  const auto cell = make_cell(1, {0, 0}, 5, 3, {4, 2});
  Rng rng = make_stream(1);
  SUBCASE("zero noise gives the deterministic forecast") {
    const auto s = sample_cell_path(cell, zero_noise_models(4), 2, rng);
    CHECK(s.center.x == doctest::Approx(8));
    CHECK(s.center.y == doctest::Approx(4));
    CHECK(s.width() == doctest::Approx(10));
    CHECK(s.height() == doctest::Approx(6));
  }
  SUBCASE("deterministic growth accumulates per step") {
    const auto s = sample_cell_path(cell, models_with(0.0, 2.0, 0.0), 3, rng);
    CHECK(s.width() == doctest::Approx(16));
    CHECK(0.5 * (s.west + s.east) == doctest::Approx(12));
    CHECK(s.height() == doctest::Approx(12));
  }
  SUBCASE("shrinking collapses onto the center") {
    const auto s = sample_cell_path(cell, models_with(0.0, -20.0, 0.0), 1, rng);
    CHECK(s.width() == 0.0);
    CHECK(s.west == s.center.x);
  }
  SUBCASE("center error spread matches s pi / sqrt 3") {
    const auto m = models_with(1.0, 0.0, 0.0);
    double sum = 0, sum2 = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
      const double x = sample_cell_path(cell, m, 1, rng).center.x - 4.0;
      sum += x;
      sum2 += x * x;
    }
    const double sd = std::sqrt(sum2 / n - (sum / n) * (sum / n));
    CHECK(sd == doctest::Approx(std::numbers::pi / std::sqrt(3.0)).epsilon(0.02));
  }
  CHECK_THROWS_AS(sample_cell_path(cell, zero_noise_models(4), 5, rng), std::out_of_range);
  CHECK_THROWS_AS(sample_cell_path(cell, zero_noise_models(4), 0, rng), std::out_of_range);
}

TEST_CASE("merge formula") {
  const std::vector<double> half{0.5, 0.5};
  CHECK(merge_probabilities(half) == 0.75);
  CHECK(merge_probabilities(std::vector<double>{}) == 0.0);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> p(1 + i % 6);
    for (auto& v : p) v = u(rng);
    const double m = merge_probabilities(p);
    CHECK(m >= *std::max_element(p.begin(), p.end()) - 1e-15);
    double sum = 0;
    for (double v : p) sum += v;
    CHECK(m <= std::min(1.0, sum) + 1e-15);
  }
}

TEST_CASE("field with zero noise and one sample is the MVE indicator") {
  const std::vector<PlanarCell> cells{make_cell(1, {-40, 0}, 6, 4, {2, 0}), make_cell(2, {-30, 10}, 5, 5, {2, 0}),
                                      make_cell(3, {50, -50}, 8, 3, {0, 3})};
  StormFieldOptions opt;
  opt.clusters = 2;
  opt.samples = 1;
  opt.horizons = 2;
  const auto f = build_storm_field(cells, zero_noise_models(2), kGrid, opt, 5);
  CHECK(f.horizons() == 2);
  for (const auto& layer : f.values)
    for (double v : layer) CHECK((v == 0.0 || v == 1.0));
  // The lone third cell's ellipse at tau = 1 is the ellipse through its extremities.
  const Point2 c3{50, -47};
  CHECK(f.at(1, kGrid.x_index(c3.x), kGrid.y_index(c3.y)) == 1.0);
  CHECK(f.at(1, kGrid.x_index(0), kGrid.y_index(80)) == 0.0);
  // tau = 0 is the union of observed boxes.
  CHECK(f.at(0, kGrid.x_index(-40), kGrid.y_index(0)) == 1.0);
  CHECK(f.at(0, kGrid.x_index(0), kGrid.y_index(0)) == 0.0);
}

TEST_CASE("empty nowcast gives an all-zero field") {
  StormFieldOptions opt;
  opt.horizons = 3;
  const auto f = build_storm_field(std::vector<PlanarCell>{}, zero_noise_models(3), kGrid, opt, 1);
  for (const auto& layer : f.values)
    for (double v : layer) CHECK(v == 0.0);
}

TEST_CASE("field values, determinism and Monte Carlo stability") {
  std::vector<PlanarCell> cells;
  for (int i = 0; i < 8; ++i) cells.push_back(make_cell(i + 1, {-60.0 + 15 * i, 10.0 * (i % 3)}, 4, 4, {3, -1}));
  const auto models = models_with(2.0, 0.2, 0.5);
  StormFieldOptions opt;
  opt.clusters = 3;
  opt.samples = 100;
  opt.horizons = 3;
  const auto a = build_storm_field(cells, models, kGrid, opt, 77);
  const auto b = build_storm_field(cells, models, kGrid, opt, 77);
  CHECK(a.values == b.values);
  for (const auto& layer : a.values)
    for (double v : layer) CHECK((v >= 0.0 && v <= 1.0));

  // Single cluster: the merged value is that cluster's containment frequency.
  opt.clusters = 1;
  const auto one = build_storm_field(cells, models, kGrid, opt, 3);
  opt.samples = 200;
  const auto two = build_storm_field(cells, models, kGrid, opt, 3);
  // 99% binomial bound: |p_n - p_2n| <= 2/sqrt(n) + 2.58 sqrt(p(1-p)(1/n + 1/2n)).
  for (std::size_t g = 0; g < kGrid.size(); ++g) {
    const double p = two.values[3][g];
    const double slack = 2.0 / std::sqrt(100.0) + 2.58 * std::sqrt(p * (1 - p) * (1.0 / 100 + 1.0 / 200));
    CHECK(std::abs(one.values[3][g] - p) <= slack);
  }
  opt.horizons = 7;
  CHECK_THROWS_AS(build_storm_field(cells, models, kGrid, opt, 3), std::out_of_range);
}

TEST_CASE("automatic K with the elbow rule") {
  std::vector<PlanarCell> cells;
  // Coincident forecasts within each group: SSE(2) = 0 stops the scan at K = 2.
  for (int i = 0; i < 6; ++i) cells.push_back(make_cell(i + 1, {-70.0, -70.0}, 3, 3, {1, 0}));
  for (int i = 0; i < 6; ++i) cells.push_back(make_cell(20 + i, {70.0, 70.0}, 3, 3, {1, 0}));
  StormFieldOptions opt;
  opt.clusters = 0;
  opt.horizons = 1;
  opt.samples = 5;
  const auto f = build_storm_field(cells, zero_noise_models(1), kGrid, opt, 1);
  CHECK(f.clusters[1] == 2);
}

TEST_CASE("time interpolation") {
  StormField f;
  f.grid = {0, 2, 2, 0, 1, 1};
  f.values = {{0.0, 1.0}, {0.2, 0.5}, {0.4, 0.0}};
  CHECK(interpolate_field(f, 10.0) == f.values[1]);
  CHECK(interpolate_field(f, 15.0)[0] == doctest::Approx(0.3));
  CHECK(interpolate_field(f, 15.0)[1] == doctest::Approx(0.25));
  WarningCapture w;
  CHECK(interpolate_field(f, 45.0) == f.values[2]);
  CHECK(w.messages.size() == 1);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  for (auto& layer : f.values)
    for (auto& v : layer) v = u(rng);
  for (double t = 0; t <= 20; t += 0.7)
    for (double v : interpolate_field(f, t)) CHECK((v >= 0 && v <= 1));
}

TEST_CASE("grid CSV and PGM export") {
  const PlaneGrid g{0, 3, 3, 0, 2, 2};
  const std::vector<double> v{0.0, 0.25, 1.0 / 3.0, 0.5, 0.75, 1.0};
  const auto text = format_grid_csv(v, g);
  CHECK(text.substr(0, text.find('\n')) == "0,0.25,0.3333333333333333");
  CHECK(parse_grid_csv(text, g) == v);
  CHECK_THROWS_AS(parse_grid_csv(text, PlaneGrid{0, 3, 3, 0, 3, 3}), DimensionError);
  CHECK_THROWS_AS(parse_grid_csv("0,1,x\n0,0,0\n", g), ParseError);
  const auto pgm = format_pgm(v, g);
  CHECK(pgm.substr(0, 11) == "P5\n3 2\n255\n");
  CHECK(static_cast<unsigned char>(pgm[11]) == 128);  // north row first: 0.5
  CHECK(static_cast<unsigned char>(pgm[13]) == 255);

  StormField f;
  f.grid = g;
  f.values = {v, v};
  const auto dir = std::filesystem::temp_directory_path() / "stormreach_field_test";
  std::filesystem::remove_all(dir);
  write_storm_field(dir, f, true);
  CHECK(std::filesystem::exists(dir / "field_tau1.pgm"));
  CHECK(read_storm_field(dir, g, 1).values == f.values);
  CHECK_THROWS_AS(read_storm_field(dir, g, 2), ParseError);
  std::filesystem::remove_all(dir);
}
