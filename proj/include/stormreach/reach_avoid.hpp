#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "stormreach/kernel.hpp"
#include "stormreach/storm_field.hpp"

namespace stormreach {

/// Axis-aligned goal box in (x, y); all headings.
struct GoalBox {
  double x_min{}, x_max{}, y_min{}, y_max{};

  bool contains(Point2 p) const { return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max; }
};

/// Goal set on the grid plus the storm probability at every decision step t = 0..N-1.
struct ReachAvoidProblem {
  GridSpec grid{};
  GoalBox goal{};
  std::vector<bool> goal_cells;               // plane cells whose center lies in the goal box
  std::vector<std::vector<double>> obstacle;  // [t][plane cell], p in [0, 1]

  bool in_goal(std::size_t plane_cell) const { return goal_cells[plane_cell]; }
};

/// Goal cells from the box; throws DomainError if no cell center lies inside it.
std::vector<bool> goal_mask(const PlaneGrid& grid, const GoalBox& goal);

/// Problem without storms.
ReachAvoidProblem make_problem(const GridSpec& grid, const GoalBox& goal);
/// Storm probabilities at t * dt minutes interpolated from the field.
/// Throws DimensionError if the field lives on a different plane grid.
ReachAvoidProblem make_problem(const GridSpec& grid, const GoalBox& goal, const StormField& field);

struct Solution {
  GridSpec grid{};
  std::vector<std::vector<double>> value;         // [t = 0..N][state]
  std::vector<std::vector<std::int8_t>> policy;   // [t = 0..N-1][state], codes -1/0/+1

  int steps() const { return static_cast<int>(policy.size()); }
};

/// Backward recursion V_N = 1_G, V_t = 1_G + clamp(1_{not G} - p_t) * max_u E[V_{t+1}].
/// Ties prefer straight flight, then +Omega. The lost state has value 0.
Solution solve(const ReachAvoidProblem& problem, const TransitionKernel& kernel);

/// Value of the cell containing (x, y, heading) at step t; 0 outside the grid.
double evaluate(const Solution& solution, int t, double x, double y, double heading);
/// Policy code at the containing cell; 0 outside the grid.
int policy_at(const Solution& solution, int t, double x, double y, double heading);

/// values/t<t>_h<k>.csv for every step and heading slice, plus policy.csv with
/// rows ordered (t, heading, y) and one column per x index.
void write_solution(const std::filesystem::path& dir, const Solution& solution);
std::string format_policy_csv(const Solution& solution);
/// Reads policy.csv back; values are left empty.
Solution parse_policy_csv(const std::string& text, const GridSpec& grid);

}  // namespace stormreach
