#include "stormreach/pipeline.hpp"

#include <chrono>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "json.hpp"
#include "stormreach/errors.hpp"
#include "stormreach/text_format.hpp"

namespace stormreach {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::uint64_t require_seed(const RunConfig& c) {
  if (!c.seed) throw DomainError("config: seed is required (set \"seed\" or pass --seed)");
  return *c.seed;
}

void require_file(const std::filesystem::path& p) {
  if (!std::filesystem::exists(p)) throw ParseError("missing file " + p.string());
}

std::string summary_json(const RunConfig& c, const PlanOutput& plan, IssueTime issue) {
  nlohmann::ordered_json j;
  j["nowcast_issue_time"] = format_issue_time(issue);
  j["seed"] = *c.seed;
  j["steps"] = c.grid.steps;
  j["dt_min"] = c.grid.dt_min;
  j["storm_horizons"] = plan.field.horizons();
  j["clusters"] = plan.field.clusters;
  j["start"] = {c.start.x, c.start.y, c.start.heading};
  j["start_state"] = plan.start_state;
  j["goal"] = {c.goal.x_min, c.goal.x_max, c.goal.y_min, c.goal.y_max};
  j["v0"] = plan.v0;
  return j.dump(2) + "\n";
}

}  // namespace

PlanSummary parse_plan_summary(const std::string& text) {
  PlanSummary p;
  try {
    const auto j = nlohmann::json::parse(text);
    p.nowcast_issue_time = j.at("nowcast_issue_time").get<std::string>();
    p.seed = j.at("seed").get<std::uint64_t>();
    p.steps = j.at("steps").get<int>();
    p.dt_min = j.at("dt_min").get<double>();
    p.storm_horizons = j.at("storm_horizons").get<int>();
    p.clusters = j.at("clusters").get<std::vector<int>>();
    const auto s = j.at("start").get<std::array<double, 3>>();
    p.start = {s[0], s[1], s[2]};
    p.start_state = j.at("start_state").get<std::size_t>();
    const auto g = j.at("goal").get<std::array<double, 4>>();
    p.goal = {g[0], g[1], g[2], g[3]};
    p.v0 = j.at("v0").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("plan summary: ") + e.what());
  }
  return p;
}

std::string format_fit_table(const FitReport& r) {
  std::string out = fmt::format("files used: {}\n", r.files_used);
  out += "axis,tau_min,n,m,s,sigma,bic_logistic,bic_normal,preferred\n";
  auto row = [&](const char* axis, int tau, const AxisFitSummary& a) {
    out += fmt::format("{},{},{},{},{},{},{},{},{}\n", axis, tau, a.n, format_double(a.logistic.m),
                       format_double(a.logistic.s), format_double(a.logistic.stddev()), format_double(a.bic_logistic),
                       format_double(a.bic_normal), a.bic_logistic < a.bic_normal ? "logistic" : "normal");
  };
  for (std::size_t i = 0; i < r.center_x.size(); ++i) {
    const int tau = static_cast<int>(i + 1) * kNowcastStepMinutes;
    row("x", tau, r.center_x[i]);
    row("y", tau, r.center_y[i]);
  }
  row("dw", kNowcastStepMinutes, r.width);
  row("dh", kNowcastStepMinutes, r.height);
  return out;
}

FitOutput cmd_fit(const RunConfig& c, std::ostream& log) {
  if (c.archive_dir.empty()) throw DomainError("config: paths.archive_dir is required for fit");
  if (!std::filesystem::is_directory(c.archive_dir)) throw ParseError("missing archive directory " + c.archive_dir.string());
  const auto t0 = Clock::now();
  auto archive = load_archive(c.archive_dir);
  if (archive.size() < 2)
    throw SchemaError(fmt::format("archive {} holds {} nowcast file(s); at least 2 consecutive files are needed",
                                  c.archive_dir.string(), archive.size()));
  // Only files issued up to the planning nowcast are training data.
  if (!c.nowcast_file.empty()) {
    const auto issue = issue_time_from_filename(c.nowcast_file.filename().string());
    std::erase_if(archive, [&](const NowcastFile& f) { return f.issue_time > issue; });
    if (archive.size() < 2) throw SchemaError("fewer than 2 archive files precede the planning nowcast");
  }
  FitOutput out;
  out.models = fit_error_models(archive, c.frame(), c.fit, &out.report);
  std::filesystem::create_directories(c.model_file.parent_path());
  write_text_file(c.model_file.string(), serialize_error_models(out.models));
  log << format_fit_table(out.report);
  log << fmt::format("fit: {:.3f} s, wrote {}\n", seconds_since(t0), c.model_file.string());
  return out;
}

PlanOutput cmd_plan(const RunConfig& c, std::ostream& log) {
  const std::uint64_t seed = require_seed(c);
  require_file(c.model_file);
  if (c.nowcast_file.empty()) throw DomainError("config: paths.nowcast_file is required for plan");
  require_file(c.nowcast_file);
  const auto models = parse_error_models(read_text_file(c.model_file.string()));
  if (models.horizons() < c.storm_horizons())
    throw DimensionError(fmt::format("model file covers {} horizons but the plan needs {}", models.horizons(),
                                     c.storm_horizons()));
  const auto nowcast = parse_nowcast(c.nowcast_file);
  const auto cells = to_planar(nowcast, c.frame());
  c.aircraft.validate(c.grid);

  PlanOutput out;
  auto t = Clock::now();
  out.field = build_storm_field(cells, models, c.grid.plane, c.storm, make_stream(seed, {0xF1E1Du})());
  write_storm_field(c.output_dir, out.field, c.write_pgm);
  const double t_field = seconds_since(t);

  t = Clock::now();
  TransitionKernel kernel;
  const auto cache = c.output_dir / "cache" / fmt::format("kernel_{:016x}.bin", kernel_cache_key(c.grid, c.aircraft));
  const bool cached = load_kernel(cache, c.grid, c.aircraft, kernel);
  if (!cached) {
    kernel = build_kernel(c.grid, c.aircraft);
    std::filesystem::create_directories(cache.parent_path());
    save_kernel(cache, kernel);
  }
  const double t_kernel = seconds_since(t);

  t = Clock::now();
  out.problem = make_problem(c.grid, c.goal, out.field);
  out.solution = solve(out.problem, kernel);
  write_solution(c.output_dir, out.solution);
  const double t_solve = seconds_since(t);

  const auto s0 = c.grid.state_of(c.start.x, c.start.y, c.start.heading);
  if (!s0) throw DomainError("problem.start lies outside the grid");
  out.start_state = *s0;
  out.v0 = out.solution.value[0][*s0];
  write_text_file((c.output_dir / "plan_summary.json").string(), summary_json(c, out, nowcast.issue_time));

  log << fmt::format("plan: {} cells, K per horizon [{}]\n", cells.size(), fmt::join(out.field.clusters, ", "));
  log << fmt::format("timing: storm field {:.3f} s, kernel {:.3f} s ({}), dp {:.3f} s\n", t_field, t_kernel,
                     cached ? "cached" : "built", t_solve);
  log << fmt::format("V0(s0) = {}\n", format_double(out.v0));
  return out;
}

ObservedStorms load_observed_storms(const RunConfig& c, int horizons) {
  ObservedStorms obs;
  obs.step_minutes = kNowcastStepMinutes;
  const auto issue = issue_time_from_filename(c.nowcast_file.filename().string());
  const auto frame = c.frame();
  for (int k = 0; k <= horizons; ++k) {
    const auto name = nowcast_filename(issue + std::chrono::minutes(k * kNowcastStepMinutes));
    std::filesystem::path path = k == 0 ? c.nowcast_file : c.archive_dir / name;
    require_file(path);
    std::vector<StormCellState> slot;
    for (const auto& cell : to_planar(parse_nowcast(path), frame)) slot.push_back(cell.state);
    obs.slots.push_back(std::move(slot));
  }
  return obs;
}

RolloutReport cmd_simulate(const RunConfig& c, std::ostream& log) {
  const std::uint64_t seed = require_seed(c);
  const auto summary_path = c.output_dir / "plan_summary.json";
  const auto policy_path = c.output_dir / "policy.csv";
  require_file(summary_path);
  require_file(policy_path);
  const auto summary = parse_plan_summary(read_text_file(summary_path.string()));
  const int horizons = summary.storm_horizons;
  if (summary.steps != c.grid.steps) throw DimensionError("plan artifacts were produced for a different horizon");

  const auto t0 = Clock::now();
  const auto field = read_storm_field(c.output_dir, c.grid.plane, horizons);
  const auto problem = make_problem(c.grid, c.goal, field);
  const auto policy = parse_policy_csv(read_text_file(policy_path.string()), c.grid);

  RolloutOptions opts = c.simulate;
  opts.seed = make_stream(seed, {0x5111u})();
  opts.keep_trajectories = c.write_trajectories;
  ObservedStorms observed;
  if (opts.scoring == Scoring::kObserved) observed = load_observed_storms(c, horizons);
  auto report = rollout(policy, problem, c.aircraft, c.start, opts,
                        opts.scoring == Scoring::kObserved ? &observed : nullptr);

  if (c.write_trajectories)
    write_text_file((c.output_dir / "trajectories.csv").string(), format_trajectories_csv(report.trajectories));
  write_text_file((c.output_dir / "rollout_report.txt").string(), format_report(report, c.grid.dt_min));
  log << fmt::format("simulate: {} rollouts in {:.3f} s, success {} ({} reached, {} storm-hit, {} lost, {} timed-out)\n",
                     report.n, seconds_since(t0), format_double(report.success_fraction),
                     report.count(Outcome::kReached), report.count(Outcome::kStormHit), report.count(Outcome::kLost),
                     report.count(Outcome::kTimedOut));
  return report;
}

void cmd_all(const RunConfig& c, std::ostream& log) {
  cmd_fit(c, log);
  cmd_plan(c, log);
  cmd_simulate(c, log);
}

}  // namespace stormreach
