#include "stormreach/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "stormreach/errors.hpp"
#include "stormreach/parallel.hpp"
#include "stormreach/text_format.hpp"

namespace stormreach {
namespace {

constexpr double kNever = std::numeric_limits<double>::infinity();

// Smallest u in [0, 1] with a + u (b - a) inside the rectangle, or kNever (Liang-Barsky).
double segment_enters_box(Point2 a, Point2 b, double x0, double x1, double y0, double y1) {
  double lo = 0.0, hi = 1.0;
  const double d[2] = {b.x - a.x, b.y - a.y};
  const double p[2] = {a.x, a.y};
  const double mins[2] = {x0, y0}, maxs[2] = {x1, y1};
  for (int i = 0; i < 2; ++i) {
    if (d[i] == 0.0) {
      if (p[i] < mins[i] || p[i] > maxs[i]) return kNever;
      continue;
    }
    double u0 = (mins[i] - p[i]) / d[i], u1 = (maxs[i] - p[i]) / d[i];
    if (u0 > u1) std::swap(u0, u1);
    lo = std::max(lo, u0);
    hi = std::min(hi, u1);
    if (lo > hi) return kNever;
  }
  return lo;
}

// Entry parameter into the inscribed ellipse of the box.
double segment_enters_ellipse(Point2 a, Point2 b, const StormCellState& c) {
  const double cx = 0.5 * (c.west + c.east), cy = 0.5 * (c.south + c.north);
  const double ax = 0.5 * c.width(), ay = 0.5 * c.height();
  if (ax <= 0 || ay <= 0) return kNever;
  const double px = (a.x - cx) / ax, py = (a.y - cy) / ay;
  const double dx = (b.x - a.x) / ax, dy = (b.y - a.y) / ay;
  const double qa = dx * dx + dy * dy, qb = 2 * (px * dx + py * dy), qc = px * px + py * py - 1.0;
  if (qc <= 0) return 0.0;
  if (qa == 0) return kNever;
  const double disc = qb * qb - 4 * qa * qc;
  if (disc < 0) return kNever;
  const double u = (-qb - std::sqrt(disc)) / (2 * qa);
  return u >= 0 && u <= 1 ? u : kNever;
}

double segment_enters_storm(Point2 a, Point2 b, const StormCellState& c, HitShape shape) {
  if (shape == HitShape::kBox) return segment_enters_box(a, b, c.west, c.east, c.south, c.north);
  return segment_enters_ellipse(a, b, c);
}

Trajectory run_one(const Solution& sol, const ReachAvoidProblem& problem, const AircraftParams& params,
                   AircraftState s0, const RolloutOptions& options, const ObservedStorms* observed,
                   std::span<const std::size_t> goal_cells, Rng rng) {
  const GridSpec& g = problem.grid;
  const PlaneGrid& pg = g.plane;
  const int n_steps = g.steps;
  const auto nh = static_cast<std::size_t>(g.n_heading);
  const double sx = std::sqrt(params.sigma2_x), sy = std::sqrt(params.sigma2_y), sl = std::sqrt(params.sigma2_heading);
  const bool use_observed = options.scoring == Scoring::kObserved && observed;

  Trajectory tr;
  tr.states.reserve(static_cast<std::size_t>(n_steps) + 1);
  tr.controls.assign(static_cast<std::size_t>(n_steps), 0);
  AircraftState s = s0;
  tr.states.push_back(s);
  auto finish = [&](Outcome o, int step) {
    tr.outcome = o;
    if (o == Outcome::kReached) tr.goal_step = step;
    while (tr.states.size() < static_cast<std::size_t>(n_steps) + 1) tr.states.push_back(tr.states.back());
    return tr;
  };

  for (int t = 0;; ++t) {
    const auto state = g.state_of(s.x, s.y, s.heading);
    if (!state) return finish(Outcome::kLost, t);
    const std::size_t cell = *state / nh;
    if (problem.in_goal(cell)) return finish(Outcome::kReached, t);
    if (t == n_steps) return finish(Outcome::kTimedOut, t);
    if (options.scoring == Scoring::kField) {
      if (uniform_open(rng) < problem.obstacle[static_cast<std::size_t>(t)][cell]) return finish(Outcome::kStormHit, t);
    }
    const auto active = use_observed ? observed->active(t * g.dt_min) : std::span<const StormCellState>{};
    if (t == 0)
      for (const auto& c : active)
        if (segment_enters_storm({s.x, s.y}, {s.x, s.y}, c, options.hit_shape) == 0.0)
          return finish(Outcome::kStormHit, t);

    const int code = sol.policy[static_cast<std::size_t>(t)][*state];
    tr.controls[static_cast<std::size_t>(t)] = static_cast<std::int8_t>(code);
    const auto m = mean_successor(params, g.dt_min, s.x, s.y, s.heading, code);
    const double nx = sample_standard_normal(rng), ny = sample_standard_normal(rng), nl = sample_standard_normal(rng);
    const AircraftState next{m[0] + sx * nx, m[1] + sy * ny, wrap_angle(m[2] + sl * nl)};

    // The aircraft flies the straight segment between samples: score the first contact
    // with a storm box or a goal cell along it.
    const Point2 a{s.x, s.y}, b{next.x, next.y};
    double u_storm = kNever, u_goal = kNever;
    for (const auto& c : active) u_storm = std::min(u_storm, segment_enters_storm(a, b, c, options.hit_shape));
    for (std::size_t gc : goal_cells) {
      const int ix = static_cast<int>(gc % static_cast<std::size_t>(pg.n_x));
      const int iy = static_cast<int>(gc / static_cast<std::size_t>(pg.n_x));
      const double x0 = pg.x_min + ix * pg.dx(), y0 = pg.y_min + iy * pg.dy();
      u_goal = std::min(u_goal, segment_enters_box(a, b, x0, x0 + pg.dx(), y0, y0 + pg.dy()));
    }
    s = next;
    tr.states.push_back(s);
    if (u_storm < kNever && u_storm <= u_goal) return finish(Outcome::kStormHit, t + 1);
    if (u_goal < kNever) return finish(Outcome::kReached, t + 1);
  }
}

}  // namespace

const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::kReached: return "reached";
    case Outcome::kStormHit: return "storm-hit";
    case Outcome::kLost: return "lost";
    case Outcome::kTimedOut: return "timed-out";
  }
  return "?";
}

std::span<const StormCellState> ObservedStorms::active(double minutes) const {
  if (slots.empty()) return {};
  const auto k = std::clamp(static_cast<long>(std::floor(minutes / step_minutes + 1e-9)), 0L,
                            static_cast<long>(slots.size()) - 1);
  return slots[static_cast<std::size_t>(k)];
}

double Envelope::mean_width() const {
  if (stddev.empty()) return 0.0;
  double w = 0;
  for (const auto& s : stddev) w += 4.0 * std::sqrt(s.x * s.x + s.y * s.y);
  return w / static_cast<double>(stddev.size());
}

Envelope envelope(std::span<const Trajectory> trajectories) {
  Envelope env;
  if (trajectories.empty()) return env;
  if (trajectories.size() == 1) warn("envelope of a single trajectory has zero width");
  const std::size_t len = trajectories.front().states.size();
  for (const auto& t : trajectories)
    if (t.states.size() != len) throw DimensionError("envelope needs trajectories of equal length");
  const double n = static_cast<double>(trajectories.size());
  env.mean.resize(len);
  env.stddev.resize(len);
  env.lower.resize(len);
  env.upper.resize(len);
  for (std::size_t k = 0; k < len; ++k) {
    double mx = 0, my = 0;
    for (const auto& t : trajectories) {
      mx += t.states[k].x;
      my += t.states[k].y;
    }
    mx /= n;
    my /= n;
    double vx = 0, vy = 0;
    for (const auto& t : trajectories) {
      vx += (t.states[k].x - mx) * (t.states[k].x - mx);
      vy += (t.states[k].y - my) * (t.states[k].y - my);
    }
    const Point2 sd{std::sqrt(vx / n), std::sqrt(vy / n)};
    env.mean[k] = {mx, my};
    env.stddev[k] = sd;
    env.lower[k] = {mx - 2 * sd.x, my - 2 * sd.y};
    env.upper[k] = {mx + 2 * sd.x, my + 2 * sd.y};
  }
  return env;
}

RolloutReport rollout(const Solution& sol, const ReachAvoidProblem& problem, const AircraftParams& params,
                      AircraftState s0, const RolloutOptions& options, const ObservedStorms* observed) {
  if (!problem.grid.state_of(s0.x, s0.y, s0.heading)) throw DomainError("initial state outside the grid");
  if (!(sol.grid == problem.grid) || sol.steps() != problem.grid.steps)
    throw DimensionError("policy and problem grids differ");
  if (options.rollouts < 1) throw DomainError("need at least one rollout");
  if (options.scoring == Scoring::kObserved && !observed) throw DomainError("observed scoring needs observed storms");

  std::vector<std::size_t> goal_cells;
  for (std::size_t c = 0; c < problem.goal_cells.size(); ++c)
    if (problem.goal_cells[c]) goal_cells.push_back(c);
  std::vector<Trajectory> runs(static_cast<std::size_t>(options.rollouts));
  parallel_for(0, runs.size(), [&](std::size_t i) {
    runs[i] = run_one(sol, problem, params, s0, options, observed, goal_cells, make_stream(options.seed, {i, 0x70u}));
  });

  RolloutReport rep;
  rep.n = options.rollouts;
  double time_sum = 0;
  for (const auto& r : runs) {
    ++rep.counts[static_cast<std::size_t>(r.outcome)];
    if (r.outcome == Outcome::kReached) time_sum += r.goal_step * problem.grid.dt_min * 60.0;
  }
  const int reached = rep.count(Outcome::kReached);
  STORMREACH_ASSERT(rep.counts[0] + rep.counts[1] + rep.counts[2] + rep.counts[3] == rep.n,
                    "rollout outcomes do not partition the runs");
  rep.success_fraction = static_cast<double>(reached) / rep.n;
  rep.mean_flight_time_s = reached > 0 ? time_sum / reached : 0.0;
  rep.envelope = envelope(runs);
  if (options.keep_trajectories) rep.trajectories = std::move(runs);
  return rep;
}

double markov_rollout_success(const Solution& sol, const ReachAvoidProblem& problem, const TransitionKernel& kernel,
                              std::size_t s0, int rollouts, std::uint64_t seed) {
  const GridSpec& g = problem.grid;
  const std::size_t ns = g.num_states();
  const auto nh = static_cast<std::size_t>(g.n_heading);
  if (s0 >= ns) throw DomainError("initial state outside the grid");
  std::vector<int> success(static_cast<std::size_t>(rollouts), 0);
  parallel_for(0, success.size(), [&](std::size_t i) {
    Rng rng = make_stream(seed, {i, 0x3Cu});
    std::size_t s = s0;
    for (int t = 0; t <= g.steps; ++t) {
      const std::size_t cell = s / nh;
      if (problem.in_goal(cell)) {
        success[i] = 1;
        return;
      }
      if (t == g.steps) return;
      if (uniform_open(rng) < problem.obstacle[static_cast<std::size_t>(t)][cell]) return;
      const int c = control_index(sol.policy[static_cast<std::size_t>(t)][s]);
      double u = uniform_open(rng);
      const auto row = kernel.row(s, c);
      std::size_t next = row.back().state;
      for (const auto& e : row) {
        u -= e.probability;
        if (u <= 0) {
          next = e.state;
          break;
        }
      }
      if (next >= ns) return;  // lost
      s = next;
    }
  });
  int total = 0;
  for (int v : success) total += v;
  return static_cast<double>(total) / rollouts;
}

std::string format_trajectories_csv(std::span<const Trajectory> trajectories) {
  std::string out = "rollout,t,x,y,heading,u,outcome\n";
  for (std::size_t r = 0; r < trajectories.size(); ++r) {
    const auto& tr = trajectories[r];
    for (std::size_t k = 0; k < tr.states.size(); ++k) {
      const auto& s = tr.states[k];
      const int u = k < tr.controls.size() ? tr.controls[k] : 0;
      out += fmt::format("{},{},{},{},{},{},{}\n", r, k, format_double(s.x), format_double(s.y),
                         format_double(s.heading), u, outcome_name(tr.outcome));
    }
  }
  return out;
}

std::string format_report(const RolloutReport& r, double dt_min) {
  std::string out;
  out += fmt::format("rollouts: {}\n", r.n);
  for (auto o : {Outcome::kReached, Outcome::kStormHit, Outcome::kLost, Outcome::kTimedOut})
    out += fmt::format("{}: {}\n", outcome_name(o), r.count(o));
  out += fmt::format("success_fraction: {}\n", format_double(r.success_fraction));
  out += fmt::format("mean_flight_time_s: {}\n", format_double(r.mean_flight_time_s));
  out += fmt::format("mean_envelope_width_km: {}\n", format_double(r.envelope.mean_width()));
  out += "step,minutes,mean_x,mean_y,lower_x,lower_y,upper_x,upper_y\n";
  for (std::size_t k = 0; k < r.envelope.mean.size(); ++k)
    out += fmt::format("{},{},{},{},{},{},{},{}\n", k, format_double(k * dt_min), format_double(r.envelope.mean[k].x),
                       format_double(r.envelope.mean[k].y), format_double(r.envelope.lower[k].x),
                       format_double(r.envelope.lower[k].y), format_double(r.envelope.upper[k].x),
                       format_double(r.envelope.upper[k].y));
  return out;
}

namespace {

Outcome outcome_from_name(std::string_view name, std::size_t line) {
  for (auto o : {Outcome::kReached, Outcome::kStormHit, Outcome::kLost, Outcome::kTimedOut})
    if (name == outcome_name(o)) return o;
  throw ParseError(fmt::format("line {}: unknown outcome '{}'", line, name), line, 0);
}

double field_double(std::string_view v, std::size_t line, std::size_t col) {
  double d{};
  if (!parse_double(v, d)) throw ParseError(fmt::format("line {}, column {}: expected a number", line, col), line, col);
  return d;
}

int field_int(std::string_view v, std::size_t line, std::size_t col) {
  int i{};
  if (!parse_int(v, i)) throw ParseError(fmt::format("line {}, column {}: expected an integer", line, col), line, col);
  return i;
}

}  // namespace

std::vector<Trajectory> parse_trajectories_csv(const std::string& text) {
  const auto lines = split(text, '\n');
  if (lines.empty() || trim(lines[0]) != "rollout,t,x,y,heading,u,outcome")
    throw ParseError("trajectories CSV: unexpected header", 1, 0);
  std::vector<Trajectory> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto line = trim(lines[i]);
    if (line.empty()) continue;
    const auto c = split(line, ',');
    if (c.size() != 7) throw ParseError(fmt::format("line {}: expected 7 columns", i + 1), i + 1, 0);
    const int r = field_int(c[0], i + 1, 1), t = field_int(c[1], i + 1, 2);
    if (r == static_cast<int>(out.size()) && t == 0) out.emplace_back();
    if (out.empty() || r != static_cast<int>(out.size()) - 1 || t != static_cast<int>(out.back().states.size()))
      throw ParseError(fmt::format("line {}: rows out of order", i + 1), i + 1, 0);
    auto& tr = out.back();
    tr.states.push_back({field_double(c[2], i + 1, 3), field_double(c[3], i + 1, 4), field_double(c[4], i + 1, 5)});
    tr.controls.push_back(static_cast<std::int8_t>(field_int(c[5], i + 1, 6)));
    tr.outcome = outcome_from_name(c[6], i + 1);
  }
  for (auto& tr : out) tr.controls.pop_back();  // the final state carries no control
  return out;
}

RolloutReport parse_report(const std::string& text) {
  RolloutReport r;
  const auto lines = split(text, '\n');
  std::size_t i = 0;
  auto value = [&](std::string_view key) {
    if (i >= lines.size()) throw ParseError(fmt::format("report: missing '{}'", key), i + 1, 0);
    const auto line = trim(lines[i]);
    const auto colon = line.find(": ");
    if (colon == std::string_view::npos || line.substr(0, colon) != key)
      throw ParseError(fmt::format("report line {}: expected '{}'", i + 1, key), i + 1, 0);
    ++i;
    return line.substr(colon + 2);
  };
  r.n = field_int(value("rollouts"), i, 2);
  for (auto o : {Outcome::kReached, Outcome::kStormHit, Outcome::kLost, Outcome::kTimedOut})
    r.counts[static_cast<std::size_t>(o)] = field_int(value(outcome_name(o)), i, 2);
  r.success_fraction = field_double(value("success_fraction"), i, 2);
  r.mean_flight_time_s = field_double(value("mean_flight_time_s"), i, 2);
  field_double(value("mean_envelope_width_km"), i, 2);
  if (i >= lines.size() || trim(lines[i]) != "step,minutes,mean_x,mean_y,lower_x,lower_y,upper_x,upper_y")
    throw ParseError("report: missing envelope table", i + 1, 0);
  for (++i; i < lines.size(); ++i) {
    const auto line = trim(lines[i]);
    if (line.empty()) continue;
    const auto c = split(line, ',');
    if (c.size() != 8) throw ParseError(fmt::format("report line {}: expected 8 columns", i + 1), i + 1, 0);
    double v[8];
    for (std::size_t k = 0; k < 8; ++k) v[k] = field_double(c[k], i + 1, k + 1);
    r.envelope.mean.push_back({v[2], v[3]});
    r.envelope.lower.push_back({v[4], v[5]});
    r.envelope.upper.push_back({v[6], v[7]});
    r.envelope.stddev.push_back({0.5 * (v[6] - v[2]), 0.5 * (v[7] - v[3])});
  }
  return r;
}

}  // namespace stormreach
