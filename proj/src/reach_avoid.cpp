#include "stormreach/reach_avoid.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "stormreach/errors.hpp"
#include "stormreach/parallel.hpp"
#include "stormreach/text_format.hpp"

namespace stormreach {
namespace {

// Relative slack so ties survive rounding when values are rescaled.
constexpr double kTieTolerance = 1e-12;

}  // namespace

std::vector<bool> goal_mask(const PlaneGrid& grid, const GoalBox& goal) {
  std::vector<bool> mask(grid.size(), false);
  bool any = false;
  for (int iy = 0; iy < grid.n_y; ++iy)
    for (int ix = 0; ix < grid.n_x; ++ix)
      if (goal.contains({grid.x_center(ix), grid.y_center(iy)})) {
        mask[grid.flat(ix, iy)] = true;
        any = true;
      }
  if (!any) throw DomainError("goal box contains no grid cell center");
  return mask;
}

ReachAvoidProblem make_problem(const GridSpec& grid, const GoalBox& goal) {
  grid.validate();
  ReachAvoidProblem p;
  p.grid = grid;
  p.goal = goal;
  p.goal_cells = goal_mask(grid.plane, goal);
  p.obstacle.assign(static_cast<std::size_t>(grid.steps), std::vector<double>(grid.plane.size(), 0.0));
  return p;
}

ReachAvoidProblem make_problem(const GridSpec& grid, const GoalBox& goal, const StormField& field) {
  if (!(field.grid == grid.plane)) throw DimensionError("storm field grid does not match the planner grid");
  auto p = make_problem(grid, goal);
  for (int t = 0; t < grid.steps; ++t) p.obstacle[static_cast<std::size_t>(t)] = interpolate_field(field, t * grid.dt_min);
  return p;
}

Solution solve(const ReachAvoidProblem& problem, const TransitionKernel& kernel) {
  const GridSpec& grid = problem.grid;
  if (!(kernel.grid == grid)) throw DimensionError("kernel was built on a different grid");
  if (problem.goal_cells.size() != grid.plane.size()) throw DimensionError("goal mask size mismatch");
  if (problem.obstacle.size() != static_cast<std::size_t>(grid.steps))
    throw DimensionError("obstacle layers must cover every decision step");
  for (const auto& layer : problem.obstacle)
    if (layer.size() != grid.plane.size()) throw DimensionError("obstacle layer size mismatch");

  const std::size_t ns = grid.num_states();
  const auto nh = static_cast<std::size_t>(grid.n_heading);
  Solution sol;
  sol.grid = grid;
  sol.value.assign(static_cast<std::size_t>(grid.steps) + 1, std::vector<double>(ns, 0.0));
  sol.policy.assign(static_cast<std::size_t>(grid.steps), std::vector<std::int8_t>(ns, 0));

  auto& terminal = sol.value.back();
  for (std::size_t s = 0; s < ns; ++s) terminal[s] = problem.in_goal(s / nh) ? 1.0 : 0.0;

  // Straight first, then +Omega, then -Omega.
  constexpr int order[kNumControls] = {control_index(0), control_index(1), control_index(-1)};

  for (int t = grid.steps - 1; t >= 0; --t) {
    const auto& next = sol.value[static_cast<std::size_t>(t) + 1];
    auto& cur = sol.value[static_cast<std::size_t>(t)];
    auto& pol = sol.policy[static_cast<std::size_t>(t)];
    const auto& obstacle = problem.obstacle[static_cast<std::size_t>(t)];
    parallel_for(0, ns, [&](std::size_t s) {
      const std::size_t cell = s / nh;
      if (problem.in_goal(cell)) {
        cur[s] = 1.0;
        pol[s] = 0;
        return;
      }
      double best = -1.0;
      int best_idx = order[0];
      for (int c : order) {
        double q = 0.0;
        for (const auto& e : kernel.row(s, c))
          if (e.state < ns) q += e.probability * next[e.state];
        if (q > best + kTieTolerance * std::max(1.0, std::abs(best))) {
          best = q;
          best_idx = c;
        }
      }
      const double safe = std::clamp(1.0 - obstacle[cell], 0.0, 1.0);
      cur[s] = std::clamp(safe * best, 0.0, 1.0);
      pol[s] = static_cast<std::int8_t>(control_code(best_idx));
    });
  }
  return sol;
}

double evaluate(const Solution& sol, int t, double x, double y, double heading) {
  const auto s = sol.grid.state_of(x, y, heading);
  if (!s) return 0.0;
  return sol.value.at(static_cast<std::size_t>(t))[*s];
}

int policy_at(const Solution& sol, int t, double x, double y, double heading) {
  const auto s = sol.grid.state_of(x, y, heading);
  if (!s) return 0;
  return sol.policy.at(static_cast<std::size_t>(t))[*s];
}

std::string format_policy_csv(const Solution& sol) {
  const auto& g = sol.grid;
  std::string out;
  for (int t = 0; t < sol.steps(); ++t)
    for (int k = 0; k < g.n_heading; ++k)
      for (int iy = 0; iy < g.plane.n_y; ++iy) {
        for (int ix = 0; ix < g.plane.n_x; ++ix) {
          if (ix) out += ',';
          out += std::to_string(sol.policy[static_cast<std::size_t>(t)][g.state_index(ix, iy, k)]);
        }
        out += '\n';
      }
  return out;
}

Solution parse_policy_csv(const std::string& text, const GridSpec& grid) {
  Solution sol;
  sol.grid = grid;
  sol.policy.assign(static_cast<std::size_t>(grid.steps), std::vector<std::int8_t>(grid.num_states(), 0));
  std::size_t row = 0;
  const std::size_t expected_rows =
      static_cast<std::size_t>(grid.steps) * static_cast<std::size_t>(grid.n_heading) * static_cast<std::size_t>(grid.plane.n_y);
  for (auto line : split(text, '\n')) {
    line = trim(line);
    if (line.empty()) continue;
    if (row >= expected_rows) throw DimensionError("policy CSV has more rows than the grid");
    const auto cols = split(line, ',');
    if (static_cast<int>(cols.size()) != grid.plane.n_x)
      throw DimensionError(fmt::format("policy CSV row {} has {} columns, expected {}", row + 1, cols.size(), grid.plane.n_x));
    const int iy = static_cast<int>(row % static_cast<std::size_t>(grid.plane.n_y));
    const int k = static_cast<int>((row / static_cast<std::size_t>(grid.plane.n_y)) % static_cast<std::size_t>(grid.n_heading));
    const auto t = row / (static_cast<std::size_t>(grid.plane.n_y) * static_cast<std::size_t>(grid.n_heading));
    for (int ix = 0; ix < grid.plane.n_x; ++ix) {
      int code{};
      if (!parse_int(cols[static_cast<std::size_t>(ix)], code) || code < -1 || code > 1)
        throw ParseError(fmt::format("policy CSV row {}, column {}: bad control code", row + 1, ix + 1), row + 1,
                         static_cast<std::size_t>(ix) + 1);
      sol.policy[t][grid.state_index(ix, iy, k)] = static_cast<std::int8_t>(code);
    }
    ++row;
  }
  if (row != expected_rows) throw DimensionError(fmt::format("policy CSV has {} rows, expected {}", row, expected_rows));
  return sol;
}

void write_solution(const std::filesystem::path& dir, const Solution& sol) {
  const auto values_dir = dir / "values";
  std::filesystem::create_directories(values_dir);
  const auto& g = sol.grid;
  std::vector<double> slice(g.plane.size());
  for (std::size_t t = 0; t < sol.value.size(); ++t)
    for (int k = 0; k < g.n_heading; ++k) {
      for (int iy = 0; iy < g.plane.n_y; ++iy)
        for (int ix = 0; ix < g.plane.n_x; ++ix) slice[g.plane.flat(ix, iy)] = sol.value[t][g.state_index(ix, iy, k)];
      write_text_file((values_dir / fmt::format("t{}_h{}.csv", t, k)).string(), format_grid_csv(slice, g.plane));
    }
  write_text_file((dir / "policy.csv").string(), format_policy_csv(sol));
}

}  // namespace stormreach
