// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails. Usage: acceptance [work_dir]
#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "oracles.hpp"
#include "stormreach/ellipse.hpp"
#include "stormreach/errors.hpp"
#include "stormreach/kernel.hpp"
#include "stormreach/parallel.hpp"
#include "stormreach/pipeline.hpp"
#include "stormreach/reach_avoid.hpp"
#include "stormreach/rng.hpp"
#include "stormreach/scenario.hpp"
#include "stormreach/simulate.hpp"
#include "stormreach/stats.hpp"
#include "stormreach/storm_field.hpp"
#include "stormreach/text_format.hpp"

using namespace stormreach;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Result {
  bool pass;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// ---------------------------------------------------------------------------
// 1. Kernel rows are probability distributions.

Result kernel_normalization() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1001);
  std::uniform_real_distribution<double> u(0, 1);
  std::uniform_int_distribution<int> cells(2, 12), headings(3, 16);
  double worst = 0;
  std::size_t rows = 0;
  bool negative = false;
  for (int draw = 0; draw < 1000; ++draw) {
    GridSpec g;
    const double x0 = -200 + 400 * u(rng), y0 = -200 + 400 * u(rng);
    g.plane = {x0, x0 + 20 + 300 * u(rng), cells(rng), y0, y0 + 20 + 300 * u(rng), cells(rng)};
    g.n_heading = headings(rng);
    g.dt_min = 0.5 + 3 * u(rng);
    g.steps = 1;
    AircraftParams p;
    p.airspeed_kmh = 100 + 900 * u(rng);
    p.turn_rate = 0.95 * M_PI / g.dt_min * u(rng) + 1e-3;
    p.wind_u_kmh = -80 + 160 * u(rng);
    p.wind_v_kmh = -80 + 160 * u(rng);
    p.sigma2_x = u(rng) < 0.1 ? 0.0 : 50 * u(rng) * u(rng);
    p.sigma2_y = u(rng) < 0.1 ? 0.0 : 50 * u(rng) * u(rng);
    p.sigma2_heading = u(rng) < 0.1 ? 0.0 : 0.5 * u(rng) * u(rng);
    const auto k = build_kernel(g, p);
    for (std::size_t s = 0; s < g.num_states(); ++s)
      for (int c = 0; c < kNumControls; ++c) {
        double sum = 0;
        for (const auto& e : k.row(s, c)) {
          negative |= e.probability < 0;
          sum += e.probability;
        }
        worst = std::max(worst, std::abs(sum - 1.0));
        ++rows;
      }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-9 && !negative && secs < 60,
          fmt::format("max |row sum - 1| = {:.2e} over {} rows from 1000 draws, {:.1f} s", worst, rows, secs)};
}

// ---------------------------------------------------------------------------
// 2. DP value against Monte Carlo of the chain.

Result dp_vs_monte_carlo() {
  const auto t0 = Clock::now();
  GridSpec g;
  g.plane = {0, 100, 10, 0, 100, 10};
  g.n_heading = 8;
  g.dt_min = 1.0;
  g.steps = 6;
  AircraftParams p;
  p.airspeed_kmh = 900;  // 1.5 cells per step
  p.turn_rate = M_PI / 4;
  p.wind_u_kmh = 0;
  p.wind_v_kmh = 60;
  p.sigma2_x = p.sigma2_y = 25;
  p.sigma2_heading = 0.1;
  const auto k = build_kernel(g, p);
  auto pb = make_problem(g, {70, 90, 30, 60});
  for (int iy = 3; iy <= 6; ++iy)
    for (int ix = 4; ix <= 5; ++ix)
      for (auto& layer : pb.obstacle) layer[g.plane.flat(ix, iy)] = 0.35;  // static obstacle
  const auto sol = solve(pb, k);
  const std::size_t s0 = g.state_index(1, 4, g.heading_index(0.0));
  const double v0 = sol.value[0][s0];
  const int n = 100000;
  const double se = oracle::binomial_se(v0, n);
  bool ok = v0 > 0.05 && v0 < 0.95;
  std::string parts;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const double lib = markov_rollout_success(sol, pb, k, s0, n, seed);
    const double ref = oracle::chain_success_rate(sol, pb, k, s0, n, 1000 + seed);
    ok = ok && std::abs(lib - v0) <= 3 * se && std::abs(ref - v0) <= 3 * se;
    parts += fmt::format(" {:.4f}/{:.4f}", lib, ref);
  }
  const double secs = seconds_since(t0);
  return {ok && secs < 120, fmt::format("V0 = {:.4f}, 3 SE = {:.4f}, rollout/oracle per seed:{}, {:.1f} s", v0, 3 * se,
                                        parts, secs)};
}

// ---------------------------------------------------------------------------
// 3. Logistic maximum likelihood recovers its parameters.

Result logistic_recovery() {
  double worst_m = 0, worst_s = 0, worst_sigma = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng = make_stream(seed, {3});
    std::vector<double> xs(10000);
    for (auto& x : xs) x = sample_logistic(rng, 1.5, 0.7);
    const auto fit = fit_logistic_mle(xs);
    worst_m = std::max(worst_m, std::abs(fit.m - 1.5));
    worst_s = std::max(worst_s, std::abs(fit.s - 0.7));
    const double sigma = fit.s * M_PI / std::sqrt(3.0);
    worst_sigma = std::max(worst_sigma, std::abs(fit.stddev() - sigma) / sigma);
  }
  return {worst_m <= 0.05 && worst_s <= 0.05 && worst_sigma <= 4e-16,
          fmt::format("5 seeds x 10000 draws: max |m - 1.5| = {:.4f}, max |s - 0.7| = {:.4f}, sigma rel err {:.1e}",
                      worst_m, worst_s, worst_sigma)};
}

// ---------------------------------------------------------------------------
// 4. BIC prefers the logistic model on logistic data.

Result bic_selection() {
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng = make_stream(seed, {4});
    std::vector<double> xs(5000);
    for (auto& x : xs) x = sample_logistic(rng, -0.4, 1.3);
    const auto s = summarize_fit(xs);
    wins += s.bic_logistic < s.bic_normal;
  }
  return {wins >= 95, fmt::format("logistic preferred in {}/100 repetitions (n = 5000)", wins)};
}

// ---------------------------------------------------------------------------
// 5. Minimum-volume ellipses contain their points and are near-optimal.

std::vector<Point2> random_set(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-1, 1);
  std::normal_distribution<double> g(0, 1);
  const int shape = static_cast<int>(rng() % 4);
  const double scale = std::exp(3 * u(rng)), aspect = std::exp(2 * u(rng)), rot = M_PI * u(rng);
  const double cx = 500 * u(rng), cy = 500 * u(rng);
  std::vector<Point2> pts;
  for (int i = 0; i < n; ++i) {
    double a = 0, b = 0;
    switch (shape) {
      case 0: a = u(rng); b = u(rng); break;
      case 1: a = g(rng); b = g(rng); break;
      case 2: { const double t = M_PI * u(rng); a = std::cos(t); b = std::sin(t); break; }
      default: a = u(rng); b = 0.02 * u(rng); break;  // nearly collinear
    }
    b *= aspect;
    pts.push_back({cx + scale * (std::cos(rot) * a - std::sin(rot) * b), cy + scale * (std::sin(rot) * a + std::cos(rot) * b)});
  }
  return pts;
}

Result mve_correctness() {
  std::mt19937_64 rng(5005);
  std::uniform_int_distribution<int> big(3, 60), small(3, 8);
  int contained = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto pts = random_set(rng, big(rng));
    const auto e = min_volume_ellipse(pts);
    contained += std::all_of(pts.begin(), pts.end(), [&](const Point2& p) { return e.contains(p, 1e-9); });
  }
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    auto pts = random_set(rng, small(rng));
    const auto e = min_volume_ellipse(pts);
    const double ref = oracle::brute_force_mve_area(pts);
    worst = std::max(worst, std::abs(e.area() / ref - 1.0));
  }
  return {contained == 1000 && worst <= 0.01,
          fmt::format("containment {}/1000 sets; max relative area gap to brute force {:.2e} over 100 sets of 3-8 points",
                      contained, worst)};
}

// ---------------------------------------------------------------------------
// 6. Probability merge.

Result merge_formula() {
  std::mt19937_64 rng(6006);
  std::uniform_real_distribution<double> u(0, 1);
  std::uniform_int_distribution<int> len(1, 25);
  int bad = 0;
  for (int i = 0; i < 10000; ++i) {
    std::vector<double> p(static_cast<std::size_t>(len(rng)));
    for (auto& v : p) {
      const double r = u(rng);
      v = r < 0.05 ? 0.0 : r < 0.08 ? 1.0 : u(rng) * u(rng);
    }
    double none = 1.0;
    for (double v : p) none *= 1.0 - v;
    const double merged = merge_probabilities(p);
    const double mx = *std::max_element(p.begin(), p.end());
    double sum = 0;
    for (double v : p) sum += v;
    if (merged != 1.0 - none || merged < mx - 1e-15 || merged > std::min(1.0, sum) + 1e-15) ++bad;
  }
  return {bad == 0, fmt::format("{} violations over 10000 random vectors", bad)};
}

// ---------------------------------------------------------------------------
// 7. Value monotonicity in the goal set and the storm probabilities.

Result value_monotonicity() {
  std::mt19937_64 rng(7007);
  std::uniform_real_distribution<double> u(0, 1);
  int violations = 0;
  double worst = 0;
  for (int problem = 0; problem < 50; ++problem) {
    GridSpec g;
    g.plane = {0, 100, 6 + static_cast<int>(rng() % 6), 0, 100, 6 + static_cast<int>(rng() % 6)};
    g.n_heading = 4 + static_cast<int>(rng() % 9);
    g.dt_min = 1.0;
    g.steps = 3 + static_cast<int>(rng() % 6);
    AircraftParams p;
    p.airspeed_kmh = 300 + 900 * u(rng);
    p.turn_rate = 0.3 + 1.5 * u(rng);
    p.wind_u_kmh = -60 + 120 * u(rng);
    p.wind_v_kmh = -60 + 120 * u(rng);
    p.sigma2_x = p.sigma2_y = 1 + 60 * u(rng);
    p.sigma2_heading = 0.3 * u(rng);
    const auto k = build_kernel(g, p);
    const double gx = 20 + 60 * u(rng), gy = 20 + 60 * u(rng);
    auto pb = make_problem(g, {gx - 12, gx + 12, gy - 12, gy + 12});
    for (auto& layer : pb.obstacle)
      for (auto& v : layer) v = u(rng) < 0.3 ? u(rng) : 0.0;
    auto bigger = pb;
    bigger.goal_cells = goal_mask(g.plane, {gx - 25, gx + 25, gy - 18, gy + 18});
    auto stormier = pb;
    for (auto& layer : stormier.obstacle)
      for (auto& v : layer) v = std::min(1.0, v + (u(rng) < 0.5 ? 0.3 * u(rng) : 0.0));
    const auto base = solve(pb, k), vb = solve(bigger, k), vs = solve(stormier, k);
    for (std::size_t t = 0; t < base.value.size(); ++t)
      for (std::size_t s = 0; s < g.num_states(); ++s) {
        const double d1 = base.value[t][s] - vb.value[t][s], d2 = vs.value[t][s] - base.value[t][s];
        worst = std::max({worst, d1, d2});
        violations += d1 > 1e-12 || d2 > 1e-12;
      }
  }
  return {violations == 0, fmt::format("{} violations over 50 problems (largest wrong-way change {:.1e})", violations,
                                       std::max(worst, 0.0))};
}

// ---------------------------------------------------------------------------
// 8. Gap scenario through the full pipeline.

bool segments_cross(Point2 a, Point2 b, Point2 c, Point2 d) {
  auto orient = [](Point2 p, Point2 q, Point2 r) { return (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x); };
  const double o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
  return o1 * o2 <= 0 && o3 * o4 <= 0;
}

Result gap_scenario(const fs::path& work, std::string& diagnostics) {
  const auto dir = work / "gap";
  fs::remove_all(dir);
  const auto sc = make_scenario("gap", 2024);
  const auto t0 = Clock::now();
  const auto config = load_config(write_scenario(dir, sc));
  std::ostringstream log;
  cmd_fit(config, log);
  const auto plan = cmd_plan(config, log);
  const auto rep = cmd_simulate(config, log);
  const double secs = seconds_since(t0);

  const double avoid = 1.0 - static_cast<double>(rep.count(Outcome::kStormHit)) / rep.n;
  bool between = false;
  const auto& mean = rep.envelope.mean;
  for (std::size_t i = 0; i + 1 < mean.size(); ++i)
    between |= segments_cross(mean[i], mean[i + 1], sc.cluster_centers[0], sc.cluster_centers[1]);
  const bool ok = avoid >= 0.99 && plan.v0 >= 0.95 && between && secs < 600;

  // Secondary comparisons, reported but not scored.
  const int n = 10000;
  const double chain = markov_rollout_success(plan.solution, plan.problem, build_kernel(config.grid, config.aircraft),
                                              plan.start_state, n, 77);
  RolloutOptions field_opts = config.simulate;
  field_opts.scoring = Scoring::kField;
  field_opts.rollouts = n;
  field_opts.seed = 78;
  const auto field = rollout(plan.solution, plan.problem, config.aircraft, config.start, field_opts);
  diagnostics = fmt::format(
      "    gap diagnostics: observed-scored success {:.4f} (reached {}, storm-hit {}, lost {}, timed-out {}), "
      "mean goal time {:.0f} s\n"
      "    gap diagnostics: chain rollout {:.4f}, continuous field-scored success {:.4f} (storm-hit {}), 3 SE {:.4f}\n",
      rep.success_fraction, rep.count(Outcome::kReached), rep.count(Outcome::kStormHit), rep.count(Outcome::kLost),
      rep.count(Outcome::kTimedOut), rep.mean_flight_time_s, chain, field.success_fraction,
      field.count(Outcome::kStormHit), 3 * oracle::binomial_se(plan.v0, n));
  return {ok, fmt::format("V0 = {:.4f}, storm avoidance {:.4f} over {} rollouts, mean path between clusters: {}, "
                          "pipeline {:.1f} s",
                          plan.v0, avoid, rep.n, between ? "yes" : "no", secs)};
}

// ---------------------------------------------------------------------------
// 9. Longer horizon from a far start.

Result horizon_extension(const fs::path& work) {
  const auto dir = work / "far_start";
  fs::remove_all(dir);
  const auto sc = make_scenario("far-start", 31);
  auto c60 = load_config(write_scenario(dir, sc));
  std::ostringstream log;
  cmd_fit(c60, log);
  const double v60 = cmd_plan(c60, log).v0;

  auto c40 = c60;
  c40.horizon_min = 40;
  c40.grid.steps = static_cast<int>(std::lround(40 / c40.grid.dt_min));
  c40.storm.horizons = c40.storm_horizons();
  c40.output_dir = dir / "out40";
  const double v40 = cmd_plan(c40, log).v0;

  // Zero-noise reach bound: ground speed is at most airspeed + |wind|.
  const auto& g = c60.goal;
  const double dx = std::max({g.x_min - c60.start.x, 0.0, c60.start.x - g.x_max});
  const double dy = std::max({g.y_min - c60.start.y, 0.0, c60.start.y - g.y_max});
  const double distance = std::hypot(dx, dy);
  const double reach40 = (c60.aircraft.airspeed_kmh + std::hypot(c60.aircraft.wind_u_kmh, c60.aircraft.wind_v_kmh)) * 40 / 60;
  const bool beyond = distance > reach40;
  const bool ok = v60 >= v40 && (!beyond || v60 > v40);
  return {ok, fmt::format("V0(60 min) = {:.4f}, V0(40 min) = {:.4f}; goal {:.0f} km away, 40-min reach bound {:.0f} km{}",
                          v60, v40, distance, reach40, beyond ? " (strict increase required)" : "")};
}

// ---------------------------------------------------------------------------
// 10. Determinism of the whole pipeline.

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = read_text_file(e.path().string());
  return files;
}

Result determinism(const fs::path& work) {
  const auto dir = work / "determinism";
  fs::remove_all(dir);
  auto config = load_config(write_scenario(dir, make_scenario("gap", 99)));
  std::ostringstream log;
  const int threads = worker_threads();
  config.output_dir = dir / "run_a";
  config.model_file = config.output_dir / "error_models.json";
  set_worker_threads(1);
  cmd_all(config, log);
  config.output_dir = dir / "run_b";
  config.model_file = config.output_dir / "error_models.json";
  set_worker_threads(4);
  cmd_all(config, log);
  set_worker_threads(threads);
  const auto a = snapshot(dir / "run_a"), b = snapshot(dir / "run_b");
  std::size_t differing = 0;
  for (const auto& [name, bytes] : a) {
    const auto it = b.find(name);
    differing += it == b.end() || it->second != bytes;
  }
  const bool ok = a.size() == b.size() && differing == 0 && a.size() > 10;
  return {ok, fmt::format("{} files in run A, {} in run B, {} differ (1 vs 4 worker threads)", a.size(), b.size(),
                          differing)};
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "stormreach_acceptance";
  fs::create_directories(work);
  int warnings = 0;
  set_warning_handler([&](std::string_view) { ++warnings; });

  struct Criterion {
    int id;
    const char* name;
    std::function<Result()> run;
  };
  std::string gap_diag;
  const std::vector<Criterion> criteria{
      {1, "kernel normalization", kernel_normalization},
      {2, "DP vs Monte Carlo", dp_vs_monte_carlo},
      {3, "logistic MLE recovery", logistic_recovery},
      {4, "BIC selection", bic_selection},
      {5, "MVE correctness", mve_correctness},
      {6, "probability merge", merge_formula},
      {7, "value monotonicity", value_monotonicity},
      {8, "gap scenario", [&] { return gap_scenario(work, gap_diag); }},
      {9, "horizon extension", [&] { return horizon_extension(work); }},
      {10, "pipeline determinism", [&] { return determinism(work); }},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Result r;
    try {
      r = c.run();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    failed += !r.pass;
    std::cout << fmt::format("criterion {:>2} {} {}: {}\n", c.id, r.pass ? "PASS" : "FAIL", c.name, r.detail);
    if (c.id == 8) std::cout << gap_diag;
    std::cout.flush();
  }
  std::cout << fmt::format("{} of {} criteria passed ({} library warnings suppressed)\n", criteria.size() - failed,
                           criteria.size(), warnings);
  return failed == 0 ? 0 : 1;
}
