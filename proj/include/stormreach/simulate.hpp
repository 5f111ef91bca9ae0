#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "stormreach/reach_avoid.hpp"

namespace stormreach {

enum class Outcome : std::uint8_t { kReached, kStormHit, kLost, kTimedOut };

const char* outcome_name(Outcome o);

struct AircraftState {
  double x{}, y{}, heading{};
};

/// States at t = 0..N. After termination the last state is repeated so every
/// trajectory has N + 1 entries.
struct Trajectory {
  std::vector<AircraftState> states;
  std::vector<std::int8_t> controls;  // N entries; 0 after termination
  Outcome outcome{Outcome::kTimedOut};
  int goal_step{-1};
};

/// Observed storm boxes by nowcast slot: slot k is active during [k, k+1) * step_minutes.
struct ObservedStorms {
  int step_minutes{10};
  std::vector<std::vector<StormCellState>> slots;

  std::span<const StormCellState> active(double minutes) const;
};

enum class Scoring : std::uint8_t { kObserved, kField };
enum class HitShape : std::uint8_t { kBox, kEllipse };

struct RolloutOptions {
  int rollouts = 10000;
  std::uint64_t seed = 0;
  Scoring scoring = Scoring::kObserved;
  HitShape hit_shape = HitShape::kBox;
  bool keep_trajectories = false;
};

struct Envelope {
  std::vector<Point2> mean;
  std::vector<Point2> stddev;
  std::vector<Point2> lower;  // mean - 2 sigma
  std::vector<Point2> upper;  // mean + 2 sigma

  /// Average over steps of 4 * sqrt(var_x + var_y).
  double mean_width() const;
};

struct RolloutReport {
  int n{};
  std::array<int, 4> counts{};  // indexed by Outcome
  double success_fraction{};
  double mean_flight_time_s{};  // over rollouts that reached the goal
  Envelope envelope;
  std::vector<Trajectory> trajectories;  // only with keep_trajectories

  int count(Outcome o) const { return counts[static_cast<std::size_t>(o)]; }
};

/// Per-step mean and standard deviation of (x, y); bounds at +-2 sigma. A single
/// trajectory yields zero width with a warning; needs equal lengths.
Envelope envelope(std::span<const Trajectory> trajectories);

/// Closed-loop continuous rollouts of the unicycle with Gaussian noise, control from the
/// nearest-cell policy. A rollout succeeds when its grid cell is a goal cell before any
/// storm hit. Storms come from `observed` (Scoring::kObserved) or are drawn per step
/// from the problem's probability layers (Scoring::kField). Throws DomainError if s0 is
/// outside the grid.
RolloutReport rollout(const Solution& policy, const ReachAvoidProblem& problem, const AircraftParams& params,
                      AircraftState s0, const RolloutOptions& options, const ObservedStorms* observed = nullptr);

/// Rollouts of the discretized Markov chain itself (same kernel as the solver), scored
/// against the probabilistic storm layers. Fraction of successful runs.
double markov_rollout_success(const Solution& policy, const ReachAvoidProblem& problem, const TransitionKernel& kernel,
                              std::size_t s0, int rollouts, std::uint64_t seed);

/// One row per (rollout, step): rollout,t,x,y,heading,u,outcome.
std::string format_trajectories_csv(std::span<const Trajectory> trajectories);
std::string format_report(const RolloutReport& report, double dt_min);

/// Readers for the two formats above. Trajectories come back without goal_step; the
/// report comes back with its envelope but no trajectories.
std::vector<Trajectory> parse_trajectories_csv(const std::string& text);
RolloutReport parse_report(const std::string& text);

}  // namespace stormreach
