#include "stormreach/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "stormreach/errors.hpp"
#include "stormreach/rng.hpp"
#include "stormreach/text_format.hpp"

namespace stormreach {
namespace {

constexpr int kHistorySteps = 18;  // files before the planning nowcast
constexpr int kFutureSteps = kMaxForecastHorizons;
constexpr double kStepHours = kNowcastStepMinutes / 60.0;

struct ClusterScript {
  Point2 center;    // at planning time
  Point2 velocity;  // km/h
  double radius;    // cell centers are scattered within this radius
  int cells;
};

struct TruthCell {
  int id{};
  int cluster{};
  double x{}, y{}, vx{}, vy{};
  double hw{}, hh{};  // half extents, km
  int born{}, dies{};  // step indices, alive for born <= k < dies
};

struct Snapshot {
  double x, y, vx, vy, hw, hh;
};

class Generator {
 public:
  Generator(std::vector<ClusterScript> clusters, std::uint64_t seed) : clusters_(std::move(clusters)), seed_(seed) {}

  /// Simulates steps 0..total-1; planning nowcast is at step kHistorySteps.
  std::vector<std::vector<std::pair<TruthCell, Snapshot>>> run(int total) {
    std::vector<std::vector<std::pair<TruthCell, Snapshot>>> frames(static_cast<std::size_t>(total));
    Rng rng = make_stream(seed_, {0x5CE4u});
    std::vector<TruthCell> alive;
    for (std::size_t c = 0; c < clusters_.size(); ++c)
      for (int i = 0; i < clusters_[c].cells; ++i) alive.push_back(spawn(static_cast<int>(c), 0, rng, true));

    for (int k = 0; k < total; ++k) {
      for (auto& cell : alive) frames[static_cast<std::size_t>(k)].push_back({cell, {cell.x, cell.y, cell.vx, cell.vy, cell.hw, cell.hh}});
      // Advance the truth by one step.
      for (auto& cell : alive) {
        cell.vx += 2.0 * sample_standard_normal(rng);
        cell.vy += 2.0 * sample_standard_normal(rng);
        cell.x += cell.vx * kStepHours + sample_logistic(rng, 0.0, 0.5);
        cell.y += cell.vy * kStepHours + sample_logistic(rng, 0.0, 0.5);
        const double pix = std::max(1.0, std::numbers::pi * cell.hw * cell.hh);
        const double s = 0.15 + 0.08 * std::log(pix);
        cell.hw = std::clamp(cell.hw + 0.5 * sample_logistic(rng, 0.1, s), 3.0, 18.0);
        cell.hh = std::clamp(cell.hh + 0.5 * sample_logistic(rng, 0.1, s), 3.0, 18.0);
      }
      for (auto& cell : alive)
        if (cell.dies <= k + 1) cell = spawn(cell.cluster, k + 1, rng, false);
    }
    return frames;
  }

 private:
  TruthCell spawn(int cluster, int step, Rng& rng, bool initial) {
    const auto& cs = clusters_[static_cast<std::size_t>(cluster)];
    // Cluster center drifts with the cluster velocity; planning time is kHistorySteps.
    const double dt = (step - kHistorySteps) * kStepHours;
    const double r = cs.radius * std::sqrt(uniform_open(rng));
    const double a = 2.0 * std::numbers::pi * uniform_open(rng);
    TruthCell c;
    c.id = next_id_++;
    c.cluster = cluster;
    c.x = cs.center.x + cs.velocity.x * dt + r * std::cos(a);
    c.y = cs.center.y + cs.velocity.y * dt + r * std::sin(a);
    c.vx = cs.velocity.x + 3.0 * sample_standard_normal(rng);
    c.vy = cs.velocity.y + 3.0 * sample_standard_normal(rng);
    c.hw = 4.0 + 5.0 * uniform_open(rng);
    c.hh = 4.0 + 5.0 * uniform_open(rng);
    const int life = 10 + static_cast<int>(uniform_open(rng) * 12.0);
    c.born = step;
    c.dies = step + (initial ? static_cast<int>(uniform_open(rng) * life) + 1 : life);
    return c;
  }

  std::vector<ClusterScript> clusters_;
  std::uint64_t seed_;
  int next_id_{1};
};

StormCellObservation observe(const TruthCell& cell, const Snapshot& s, int step, const PlanarFrame& frame) {
  StormCellObservation o;
  o.id = cell.id;
  o.pixels = std::max(1, static_cast<int>(std::lround(std::numbers::pi * s.hw * s.hh)));
  o.center = frame.unproject({s.x, s.y});
  o.radius_km = std::sqrt(s.hw * s.hh);
  o.north = frame.unproject({s.x, s.y + s.hh}).lat;
  o.south = frame.unproject({s.x, s.y - s.hh}).lat;
  o.west = frame.unproject({s.x - s.hw, s.y}).lon;
  o.east = frame.unproject({s.x + s.hw, s.y}).lon;
  const double speed = std::hypot(s.vx, s.vy);
  o.speed_kmh = speed;
  o.heading_deg = speed > 0 ? dirn_from_heading(std::atan2(s.vy, s.vx)) : 0.0;
  // Linear extrapolation; no forecast past the cell's scripted lifetime.
  for (int j = 1; j <= kMaxForecastHorizons; ++j) {
    if (step + j >= cell.dies) break;
    const double h = j * kStepHours;
    o.center_forecasts[static_cast<std::size_t>(j - 1)] = frame.unproject({s.x + s.vx * h, s.y + s.vy * h});
  }
  return o;
}

RunConfig base_config() {
  RunConfig c;
  c.archive_dir = "archive";
  c.output_dir = "out";
  c.model_file = "out/error_models.json";
  c.grid.plane = {-650.0, 100.0, 33, -550.0, 200.0, 28};
  c.grid.n_heading = 32;
  c.grid.dt_min = 2.0;
  c.goal = {-490.0, -470.0, -230.0, -210.0};
  c.storm.clusters = 12;
  c.storm.samples = 100;
  c.simulate.rollouts = 10000;
  c.fit.horizons = kMaxForecastHorizons;
  return c;
}

Point2 along(Point2 a, Point2 b, double f) { return {a.x + f * (b.x - a.x), a.y + f * (b.y - a.y)}; }

}  // namespace

std::vector<std::string> scenario_kinds() { return {"gap", "far-start", "clear"}; }

Scenario make_scenario(const std::string& kind, std::uint64_t seed) {
  Scenario sc;
  sc.kind = kind;
  sc.config = base_config();
  sc.config.seed = seed;
  RunConfig& c = sc.config;
  const Point2 goal{-480.0, -220.0};
  std::vector<ClusterScript> clusters;

  if (kind == "gap") {
    c.start = {-365.0, 100.0, -1.92};
    c.horizon_min = 40.0;
    const Point2 s0{c.start.x, c.start.y};
    const Point2 mid = along(s0, goal, 0.5);
    const double len = std::hypot(goal.x - s0.x, goal.y - s0.y);
    const Point2 n{(goal.y - s0.y) / len, -(goal.x - s0.x) / len};  // unit normal to the route
    const double offset = 105.0;
    clusters.push_back({{mid.x - offset * n.x, mid.y - offset * n.y}, {18.0, 8.0}, 40.0, 14});
    clusters.push_back({{mid.x + offset * n.x, mid.y + offset * n.y}, {18.0, 8.0}, 40.0, 14});
    clusters.push_back({{-120.0, -420.0}, {15.0, 10.0}, 40.0, 6});
  } else if (kind == "far-start") {
    c.start = {60.0, 160.0, -2.5};
    c.horizon_min = 60.0;
    const Point2 s0{c.start.x, c.start.y};
    const double len = std::hypot(goal.x - s0.x, goal.y - s0.y);
    const Point2 n{(goal.y - s0.y) / len, -(goal.x - s0.x) / len};
    const Point2 p = along(s0, goal, 0.55);
    clusters.push_back({{p.x + 70.0 * n.x, p.y + 70.0 * n.y}, {15.0, 8.0}, 30.0, 7});
    clusters.push_back({{-560.0, 120.0}, {15.0, 8.0}, 35.0, 7});
    clusters.push_back({{-120.0, -420.0}, {15.0, 10.0}, 40.0, 6});
  } else if (kind == "clear") {
    c.start = {-420.0, -120.0, -2.0};
    c.horizon_min = 40.0;
    clusters.push_back({{-50.0, 120.0}, {15.0, 8.0}, 35.0, 8});
    clusters.push_back({{-100.0, -450.0}, {15.0, 10.0}, 35.0, 6});
  } else {
    throw DomainError("unknown scenario '" + kind + "'");
  }
  c.grid.steps = static_cast<int>(std::lround(c.horizon_min / c.grid.dt_min));
  c.storm.horizons = c.storm_horizons();

  const PlanarFrame frame = c.frame();
  Generator gen(clusters, seed);
  const int total = kHistorySteps + 1 + kFutureSteps;
  const auto frames = gen.run(total);
  using namespace std::chrono;
  const IssueTime t0 = sys_days{year{2016} / December / 19} + hours(7) + minutes(30);
  for (int k = 0; k < total; ++k) {
    NowcastFile f;
    f.issue_time = t0 + minutes(k * kNowcastStepMinutes);
    for (const auto& [cell, snap] : frames[static_cast<std::size_t>(k)]) f.cells.push_back(observe(cell, snap, k, frame));
    std::sort(f.cells.begin(), f.cells.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    sc.archive.push_back(std::move(f));
  }
  sc.planning_time = sc.archive[kHistorySteps].issue_time;
  c.nowcast_file = std::filesystem::path("archive") / nowcast_filename(sc.planning_time);
  for (const auto& cs : clusters) sc.cluster_centers.push_back(cs.center);
  return sc;
}

std::filesystem::path write_scenario(const std::filesystem::path& dir, const Scenario& sc) {
  std::filesystem::create_directories(dir / "archive");
  for (const auto& f : sc.archive) write_nowcast(dir / "archive", f);
  RunConfig c = sc.config;
  c.archive_dir = dir / c.archive_dir;
  c.nowcast_file = dir / c.nowcast_file;
  c.model_file = dir / c.model_file;
  c.output_dir = dir / c.output_dir;
  const auto path = dir / "config.json";
  write_text_file(path.string(), config_to_json(c, dir));
  return path;
}

}  // namespace stormreach
