#include "stormreach/config.hpp"

#include <cmath>

#include <fmt/format.h>

#include "json.hpp"
#include "stormreach/errors.hpp"
#include "stormreach/text_format.hpp"

namespace stormreach {
namespace {

using nlohmann::json;

template <class T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

std::string relative_to(const std::filesystem::path& p, const std::filesystem::path& base) {
  if (p.empty()) return {};
  return p.lexically_relative(base).generic_string();
}

}  // namespace

PlanarFrame RunConfig::frame() const {
  return standard_parallel ? PlanarFrame(frame_lat0, frame_lon0, *standard_parallel) : PlanarFrame(frame_lat0, frame_lon0);
}

int RunConfig::storm_horizons() const {
  return static_cast<int>(std::ceil(horizon_min / kNowcastStepMinutes - 1e-9));
}

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  RunConfig c;
  try {
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();

    const auto& paths = j.at("paths");
    if (paths.contains("archive_dir")) c.archive_dir = resolve(base_dir, paths.at("archive_dir").get<std::string>());
    if (paths.contains("nowcast_file")) c.nowcast_file = resolve(base_dir, paths.at("nowcast_file").get<std::string>());
    c.output_dir = resolve(base_dir, paths.value("output_dir", std::string("out")));
    if (paths.contains("model_file")) c.model_file = resolve(base_dir, paths.at("model_file").get<std::string>());

    if (j.contains("frame")) {
      const auto& f = j.at("frame");
      read_opt(f, "lat0", c.frame_lat0);
      read_opt(f, "lon0", c.frame_lon0);
      if (f.contains("standard_parallel")) c.standard_parallel = f.at("standard_parallel").get<double>();
    }

    const auto& g = j.at("grid");
    const auto xr = g.at("x").get<std::array<double, 2>>();
    const auto yr = g.at("y").get<std::array<double, 2>>();
    c.grid.plane = {xr[0], xr[1], g.at("nx").get<int>(), yr[0], yr[1], g.at("ny").get<int>()};
    c.grid.n_heading = g.at("nheading").get<int>();
    read_opt(g, "dt_min", c.grid.dt_min);

    if (j.contains("aircraft")) {
      const auto& a = j.at("aircraft");
      read_opt(a, "airspeed_kmh", c.aircraft.airspeed_kmh);
      read_opt(a, "turn_rate_rad_per_min", c.aircraft.turn_rate);
      if (a.contains("wind_u_ms")) c.aircraft.wind_u_kmh = a.at("wind_u_ms").get<double>() * 3.6;
      if (a.contains("wind_v_ms")) c.aircraft.wind_v_kmh = a.at("wind_v_ms").get<double>() * 3.6;
      read_opt(a, "sigma2_x_km2", c.aircraft.sigma2_x);
      read_opt(a, "sigma2_y_km2", c.aircraft.sigma2_y);
      read_opt(a, "sigma2_heading_rad2", c.aircraft.sigma2_heading);
    }

    if (j.contains("storm")) {
      const auto& s = j.at("storm");
      if (s.contains("clusters")) {
        const auto& k = s.at("clusters");
        if (k.is_string()) {
          if (k.get<std::string>() != "auto") throw ParseError("config: storm.clusters must be an integer or \"auto\"");
          c.storm.clusters = 0;
        } else {
          c.storm.clusters = k.get<int>();
        }
      }
      read_opt(s, "k_max", c.storm.k_max);
      read_opt(s, "elbow_threshold", c.storm.elbow_threshold);
      read_opt(s, "samples", c.storm.samples);
      read_opt(s, "heading_weight_km_per_rad", c.storm.heading_weight);
      read_opt(s, "mve_tolerance", c.storm.mve.tolerance);
      read_opt(s, "pad_km", c.storm.mve.pad);
    }

    if (j.contains("fit")) {
      const auto& f = j.at("fit");
      read_opt(f, "horizons", c.fit.horizons);
      read_opt(f, "window", c.fit.window);
      read_opt(f, "min_bucket", c.fit.growth.min_bucket);
    }

    const auto& p = j.at("problem");
    const auto s0 = p.at("start").get<std::array<double, 3>>();
    c.start = {s0[0], s0[1], s0[2]};
    const auto goal = p.at("goal").get<std::array<double, 4>>();
    c.goal = {goal[0], goal[1], goal[2], goal[3]};
    read_opt(p, "horizon_min", c.horizon_min);

    if (j.contains("simulate")) {
      const auto& s = j.at("simulate");
      read_opt(s, "rollouts", c.simulate.rollouts);
      const auto scoring = s.value("scoring", std::string("observed"));
      if (scoring == "observed")
        c.simulate.scoring = Scoring::kObserved;
      else if (scoring == "field")
        c.simulate.scoring = Scoring::kField;
      else
        throw ParseError("config: simulate.scoring must be \"observed\" or \"field\"");
      const auto shape = s.value("hit_shape", std::string("box"));
      if (shape == "box")
        c.simulate.hit_shape = HitShape::kBox;
      else if (shape == "ellipse")
        c.simulate.hit_shape = HitShape::kEllipse;
      else
        throw ParseError("config: simulate.hit_shape must be \"box\" or \"ellipse\"");
      read_opt(s, "write_trajectories", c.write_trajectories);
    }
    if (j.contains("output")) read_opt(j.at("output"), "pgm", c.write_pgm);
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }

  if (c.model_file.empty()) c.model_file = c.output_dir / "error_models.json";
  if (!(c.horizon_min > 0)) throw DomainError("config: problem.horizon_min must be positive");
  const double steps = c.horizon_min / c.grid.dt_min;
  if (std::abs(steps - std::round(steps)) > 1e-9)
    throw DomainError("config: horizon_min must be a multiple of grid.dt_min");
  c.grid.steps = static_cast<int>(std::lround(steps));
  c.grid.validate();
  c.storm.horizons = c.storm_horizons();
  if (c.storm.horizons > kMaxForecastHorizons)
    throw DomainError(fmt::format("config: horizon_min exceeds the {}-minute nowcast range",
                                  kMaxForecastHorizons * kNowcastStepMinutes));
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ParseError("config file '" + path.string() + "' not found");
  const auto base = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  return parse_config(read_text_file(path.string()), base);
}

std::string config_to_json(const RunConfig& c, const std::filesystem::path& base_dir) {
  json j;
  if (c.seed) j["seed"] = *c.seed;
  j["paths"] = {{"archive_dir", relative_to(c.archive_dir, base_dir)},
                {"nowcast_file", relative_to(c.nowcast_file, base_dir)},
                {"model_file", relative_to(c.model_file, base_dir)},
                {"output_dir", relative_to(c.output_dir, base_dir)}};
  j["frame"] = {{"lat0", c.frame_lat0}, {"lon0", c.frame_lon0}};
  if (c.standard_parallel) j["frame"]["standard_parallel"] = *c.standard_parallel;
  const auto& p = c.grid.plane;
  j["grid"] = {{"x", {p.x_min, p.x_max}}, {"nx", p.n_x},          {"y", {p.y_min, p.y_max}},
               {"ny", p.n_y},             {"nheading", c.grid.n_heading}, {"dt_min", c.grid.dt_min}};
  const auto& a = c.aircraft;
  j["aircraft"] = {{"airspeed_kmh", a.airspeed_kmh},   {"turn_rate_rad_per_min", a.turn_rate},
                   {"wind_u_ms", a.wind_u_kmh / 3.6},  {"wind_v_ms", a.wind_v_kmh / 3.6},
                   {"sigma2_x_km2", a.sigma2_x},       {"sigma2_y_km2", a.sigma2_y},
                   {"sigma2_heading_rad2", a.sigma2_heading}};
  j["storm"] = {{"k_max", c.storm.k_max},
                {"elbow_threshold", c.storm.elbow_threshold},
                {"samples", c.storm.samples},
                {"heading_weight_km_per_rad", c.storm.heading_weight},
                {"mve_tolerance", c.storm.mve.tolerance},
                {"pad_km", c.storm.mve.pad}};
  if (c.storm.clusters > 0)
    j["storm"]["clusters"] = c.storm.clusters;
  else
    j["storm"]["clusters"] = "auto";
  j["fit"] = {{"horizons", c.fit.horizons}, {"window", c.fit.window}, {"min_bucket", c.fit.growth.min_bucket}};
  j["problem"] = {{"start", {c.start.x, c.start.y, c.start.heading}},
                  {"goal", {c.goal.x_min, c.goal.x_max, c.goal.y_min, c.goal.y_max}},
                  {"horizon_min", c.horizon_min}};
  j["simulate"] = {{"rollouts", c.simulate.rollouts},
                   {"scoring", c.simulate.scoring == Scoring::kObserved ? "observed" : "field"},
                   {"hit_shape", c.simulate.hit_shape == HitShape::kBox ? "box" : "ellipse"},
                   {"write_trajectories", c.write_trajectories}};
  j["output"] = {{"pgm", c.write_pgm}};
  return j.dump(2) + "\n";
}

}  // namespace stormreach
