#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "stormreach/ellipse.hpp"
#include "stormreach/errors.hpp"
#include "stormreach/kernel.hpp"
#include "stormreach/kmeans.hpp"
#include "stormreach/nowcast.hpp"
#include "stormreach/parallel.hpp"
#include "stormreach/pipeline.hpp"
#include "stormreach/reach_avoid.hpp"
#include "stormreach/scenario.hpp"
#include "stormreach/simulate.hpp"
#include "stormreach/stats.hpp"
#include "stormreach/storm_field.hpp"

namespace py = pybind11;
using namespace stormreach;

namespace {

std::vector<Point2> to_points(const std::vector<std::pair<double, double>>& xy) {
  std::vector<Point2> pts;
  pts.reserve(xy.size());
  for (const auto& [x, y] : xy) pts.push_back({x, y});
  return pts;
}

py::array_t<double> value_array(const Solution& sol) {
  const auto& g = sol.grid;
  py::array_t<double> out({sol.value.size(), static_cast<std::size_t>(g.plane.n_y), static_cast<std::size_t>(g.plane.n_x),
                           static_cast<std::size_t>(g.n_heading)});
  auto v = out.mutable_unchecked<4>();
  for (std::size_t t = 0; t < sol.value.size(); ++t)
    for (int iy = 0; iy < g.plane.n_y; ++iy)
      for (int ix = 0; ix < g.plane.n_x; ++ix)
        for (int k = 0; k < g.n_heading; ++k)
          v(static_cast<py::ssize_t>(t), iy, ix, k) = sol.value[t][g.state_index(ix, iy, k)];
  return out;
}

py::dict report_dict(const RolloutReport& r) {
  py::dict d;
  d["n"] = r.n;
  for (auto o : {Outcome::kReached, Outcome::kStormHit, Outcome::kLost, Outcome::kTimedOut})
    d[outcome_name(o)] = r.count(o);
  d["success_fraction"] = r.success_fraction;
  d["mean_flight_time_s"] = r.mean_flight_time_s;
  std::vector<std::pair<double, double>> mean;
  for (const auto& p : r.envelope.mean) mean.emplace_back(p.x, p.y);
  d["mean_path"] = mean;
  return d;
}

RunConfig config_with(const std::filesystem::path& path, std::optional<std::uint64_t> seed,
                      std::optional<std::filesystem::path> out) {
  auto c = load_config(path);
  if (seed) c.seed = seed;
  if (out) {
    const bool default_model = c.model_file == c.output_dir / "error_models.json";
    c.output_dir = *out;
    if (default_model) c.model_file = c.output_dir / "error_models.json";
  }
  return c;
}

}  // namespace

PYBIND11_MODULE(_stormreach, m) {
  m.doc() = "Storm-avoiding trajectory planning from thunderstorm nowcasts";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<SchemaError>(m, "SchemaError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<DegenerateError>(m, "DegenerateError", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);

  m.def("set_threads", &set_worker_threads, py::arg("n"));

  py::class_<PlanarFrame>(m, "PlanarFrame")
      .def(py::init<double, double>(), py::arg("lat0") = 38.0, py::arg("lon0") = -98.0)
      .def(py::init<double, double, double>(), py::arg("lat0"), py::arg("lon0"), py::arg("standard_parallel"))
      .def("project",
           [](const PlanarFrame& f, double lon, double lat) {
             const auto p = f.project({lon, lat});
             return std::make_pair(p.x, p.y);
           },
           py::arg("lon"), py::arg("lat"))
      .def("unproject",
           [](const PlanarFrame& f, double x, double y) {
             const auto g = f.unproject({x, y});
             return std::make_pair(g.lon, g.lat);
           },
           py::arg("x"), py::arg("y"));

  m.def("fit_logistic",
        [](const std::vector<double>& xs) {
          const auto f = fit_logistic_mle(xs);
          return std::make_pair(f.m, f.s);
        },
        py::arg("samples"), "Maximum likelihood (m, s) of a logistic distribution.");
  m.def("compare_fits",
        [](const std::vector<double>& xs) {
          const auto s = summarize_fit(xs);
          py::dict d;
          d["m"] = s.logistic.m;
          d["s"] = s.logistic.s;
          d["bic_logistic"] = s.bic_logistic;
          d["bic_normal"] = s.bic_normal;
          return d;
        },
        py::arg("samples"));

  m.def("min_volume_ellipse",
        [](const std::vector<std::pair<double, double>>& xy, double tolerance, double pad) {
          const auto pts = to_points(xy);
          const auto e = min_volume_ellipse(pts, {tolerance, pad});
          py::dict d;
          d["center"] = std::make_pair(e.center.x, e.center.y);
          d["matrix"] = std::vector<std::vector<double>>{{e.m11, e.m12}, {e.m12, e.m22}};
          d["area"] = e.area();
          d["semi_axes"] = std::make_pair(e.semi_major(), e.semi_minor());
          return d;
        },
        py::arg("points"), py::arg("tolerance") = 1e-4, py::arg("pad") = 1.0);

  m.def("merge_probabilities", [](const std::vector<double>& p) { return merge_probabilities(p); }, py::arg("p"));

  m.def("kmeans",
        [](const std::vector<std::array<double, 3>>& features, int k, std::uint64_t seed) {
          Rng rng = make_stream(seed);
          std::vector<Feature> f(features.begin(), features.end());
          const auto a = kmeans(f, k, rng);
          return std::make_pair(a.labels, a.sse);
        },
        py::arg("features"), py::arg("k"), py::arg("seed") = 0);

  m.def("solve_reach_avoid",
        [](std::pair<double, double> x_range, int nx, std::pair<double, double> y_range, int ny, int n_heading,
           double dt_min, int steps, std::array<double, 4> goal, std::optional<py::array_t<double>> obstacle,
           double airspeed_kmh, double turn_rate, double wind_u_kmh, double wind_v_kmh, double sigma2_xy,
           double sigma2_heading) {
          GridSpec g;
          g.plane = {x_range.first, x_range.second, nx, y_range.first, y_range.second, ny};
          g.n_heading = n_heading;
          g.dt_min = dt_min;
          g.steps = steps;
          AircraftParams p{airspeed_kmh, turn_rate, wind_u_kmh, wind_v_kmh, sigma2_xy, sigma2_xy, sigma2_heading};
          auto pb = make_problem(g, {goal[0], goal[1], goal[2], goal[3]});
          if (obstacle) {
            // (steps, ny, nx) or (ny, nx) for a static field
            const auto a = obstacle->unchecked();
            const bool static_field = a.ndim() == 2;
            if (!(static_field ? a.shape(0) == ny && a.shape(1) == nx
                               : a.ndim() == 3 && a.shape(0) == steps && a.shape(1) == ny && a.shape(2) == nx))
              throw DimensionError("obstacle must have shape (ny, nx) or (steps, ny, nx)");
            for (int t = 0; t < steps; ++t)
              for (int iy = 0; iy < ny; ++iy)
                for (int ix = 0; ix < nx; ++ix)
                  pb.obstacle[static_cast<std::size_t>(t)][g.plane.flat(ix, iy)] =
                      static_field ? obstacle->at(iy, ix) : obstacle->at(t, iy, ix);
          }
          const auto sol = solve(pb, build_kernel(g, p));
          return value_array(sol);
        },
        py::arg("x_range"), py::arg("nx"), py::arg("y_range"), py::arg("ny"), py::arg("n_heading"),
        py::arg("dt_min"), py::arg("steps"), py::arg("goal"), py::arg("obstacle") = py::none(),
        py::arg("airspeed_kmh") = 792.0, py::arg("turn_rate") = 0.3, py::arg("wind_u_kmh") = 2.6 * 3.6,
        py::arg("wind_v_kmh") = 5.6 * 3.6, py::arg("sigma2_xy") = 0.25, py::arg("sigma2_heading") = 4e-5,
        "Value function V[t, iy, ix, heading] of the reach-avoid problem.");

  m.def("scenario_kinds", &scenario_kinds);
  m.def("gen_scenario",
        [](const std::string& kind, std::uint64_t seed, const std::filesystem::path& dir) {
          return write_scenario(dir, make_scenario(kind, seed));
        },
        py::arg("kind"), py::arg("seed"), py::arg("out"), "Writes a synthetic scenario; returns the config path.");

  m.def("fit",
        [](const std::filesystem::path& config, std::optional<std::filesystem::path> out) {
          std::ostringstream log;
          const auto r = cmd_fit(config_with(config, std::nullopt, out), log);
          return std::make_pair(r.models.horizons(), log.str());
        },
        py::arg("config"), py::arg("out") = py::none());
  m.def("plan",
        [](const std::filesystem::path& config, std::optional<std::uint64_t> seed, std::optional<std::filesystem::path> out) {
          std::ostringstream log;
          const auto r = cmd_plan(config_with(config, seed, out), log);
          py::dict d;
          d["v0"] = r.v0;
          d["start_state"] = r.start_state;
          d["clusters"] = r.field.clusters;
          d["values"] = value_array(r.solution);
          d["log"] = log.str();
          return d;
        },
        py::arg("config"), py::arg("seed") = py::none(), py::arg("out") = py::none());
  m.def("simulate",
        [](const std::filesystem::path& config, std::optional<std::uint64_t> seed, std::optional<std::filesystem::path> out) {
          std::ostringstream log;
          return report_dict(cmd_simulate(config_with(config, seed, out), log));
        },
        py::arg("config"), py::arg("seed") = py::none(), py::arg("out") = py::none());
  m.def("run_all",
        [](const std::filesystem::path& config, std::optional<std::uint64_t> seed, std::optional<std::filesystem::path> out) {
          std::ostringstream log;
          cmd_all(config_with(config, seed, out), log);
          return log.str();
        },
        py::arg("config"), py::arg("seed") = py::none(), py::arg("out") = py::none());
}
