#include "stormreach/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include <fmt/format.h>

#include "stormreach/errors.hpp"
#include "stormreach/parallel.hpp"
#include "stormreach/storm_cell.hpp"

namespace stormreach {
namespace {

struct AxisWeights {
  std::vector<std::pair<int, double>> inside;  // (cell index, weight)
  double inside_total{};
  double outside_total{};
};

// Unnormalized Gaussian weights at cell centers lo + (i + 0.5) d (lo + i d when periodic).
// Cells with index outside [0, n) are collected in outside_total.
AxisWeights axis_weights(double mean, double sigma, double lo, double d, int n, bool periodic) {
  const double u = (mean - lo) / d - (periodic ? 0.0 : 0.5);  // fractional index of the mean
  const double reach = 4.0 * sigma / d;
  int i0 = static_cast<int>(std::floor(u - reach)) - 1;
  int i1 = static_cast<int>(std::ceil(u + reach)) + 1;
  if (!periodic) {
    i0 = std::max(i0, -2 * n - 2);
    i1 = std::min(i1, 3 * n + 2);
  } else if (i1 - i0 >= 4 * n) {
    i0 = static_cast<int>(std::floor(u)) - 2 * n;
    i1 = i0 + 4 * n;
  }
  double max_log = -std::numeric_limits<double>::infinity();
  std::vector<double> logs;
  logs.reserve(static_cast<std::size_t>(i1 - i0 + 1));
  for (int i = i0; i <= i1; ++i) {
    const double z = (static_cast<double>(i) - u) * d / sigma;
    logs.push_back(-0.5 * z * z);
    max_log = std::max(max_log, logs.back());
  }
  AxisWeights w;
  for (int i = i0; i <= i1; ++i) {
    const double wt = std::exp(logs[static_cast<std::size_t>(i - i0)] - max_log);
    if (wt == 0.0) continue;
    if (periodic) {
      const int k = ((i % n) + n) % n;
      auto it = std::find_if(w.inside.begin(), w.inside.end(), [k](const auto& e) { return e.first == k; });
      if (it == w.inside.end())
        w.inside.emplace_back(k, wt);
      else
        it->second += wt;
      w.inside_total += wt;
    } else if (i < 0 || i >= n) {
      w.outside_total += wt;
    } else {
      w.inside.emplace_back(i, wt);
      w.inside_total += wt;
    }
  }
  return w;
}

template <class T>
void put(std::string& buf, const T& v) {
  buf.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
bool get(std::ifstream& is, T& v) {
  return static_cast<bool>(is.read(reinterpret_cast<char*>(&v), sizeof(T)));
}

constexpr std::uint64_t kCacheMagic = 0x4b52414d52545353ULL;

}  // namespace

void AircraftParams::validate(const GridSpec& grid) const {
  if (!(airspeed_kmh > 0)) throw DomainError("airspeed must be positive");
  if (!(turn_rate > 0)) throw DomainError("turn rate must be positive");
  if (!(grid.dt_min * turn_rate < M_PI)) throw DomainError("one time step may not turn more than half a circle");
  if (sigma2_x < 0 || sigma2_y < 0 || sigma2_heading < 0) throw DomainError("noise variances must be non-negative");
}

std::array<double, 3> mean_successor(const AircraftParams& p, double dt_min, double x, double y, double heading,
                                     int code) {
  const double dt_h = dt_min / 60.0;
  return {x + dt_h * (p.airspeed_kmh * std::cos(heading) + p.wind_u_kmh),
          y + dt_h * (p.airspeed_kmh * std::sin(heading) + p.wind_v_kmh),
          heading + dt_min * code * p.turn_rate};
}

TransitionKernel build_kernel(const GridSpec& grid, const AircraftParams& params) {
  grid.validate();
  params.validate(grid);

  auto floored = [](double v, const char* name) {
    if (v < kVarianceFloor) {
      warn(fmt::format("{} variance {} replaced by floor {}", name, v, kVarianceFloor));
      return kVarianceFloor;
    }
    return v;
  };
  const double sx = std::sqrt(floored(params.sigma2_x, "x"));
  const double sy = std::sqrt(floored(params.sigma2_y, "y"));
  const double sl = std::sqrt(floored(params.sigma2_heading, "heading"));

  TransitionKernel k;
  k.grid = grid;
  k.params = params;
  const std::size_t ns = grid.num_states();
  const std::size_t rows = ns * kNumControls;
  std::vector<std::vector<Successor>> per_row(rows);
  const PlaneGrid& pg = grid.plane;

  parallel_for(0, ns, [&](std::size_t s) {
    const int ik = static_cast<int>(s % static_cast<std::size_t>(grid.n_heading));
    const std::size_t cell = s / static_cast<std::size_t>(grid.n_heading);
    const int ix = static_cast<int>(cell % static_cast<std::size_t>(pg.n_x));
    const int iy = static_cast<int>(cell / static_cast<std::size_t>(pg.n_x));
    for (int c = 0; c < kNumControls; ++c) {
      const auto m = mean_successor(params, grid.dt_min, pg.x_center(ix), pg.y_center(iy), grid.heading_center(ik),
                                    control_code(c));
      const auto wx = axis_weights(m[0], sx, pg.x_min, pg.dx(), pg.n_x, false);
      const auto wy = axis_weights(m[1], sy, pg.y_min, pg.dy(), pg.n_y, false);
      const auto wl = axis_weights(m[2], sl, -M_PI, grid.dheading(), grid.n_heading, true);
      const double tx = wx.inside_total + wx.outside_total;
      const double ty = wy.inside_total + wy.outside_total;
      const double total = tx * ty * wl.inside_total;

      auto& out = per_row[s * kNumControls + static_cast<std::size_t>(c)];
      for (const auto& [jx, px] : wx.inside)
        for (const auto& [jy, py] : wy.inside)
          for (const auto& [jk, pl] : wl.inside) {
            const double p = px * py * pl / total;
            if (p > 0) out.push_back({static_cast<std::uint32_t>(grid.state_index(jx, jy, jk)), p});
          }
      const double lost = (wx.outside_total * ty + wx.inside_total * wy.outside_total) / (tx * ty);
      if (lost > 0) out.push_back({k.lost_state(), lost});
      std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.state < b.state; });
    }
  });

  k.offsets.resize(rows + 1);
  k.offsets[0] = 0;
  for (std::size_t r = 0; r < rows; ++r) k.offsets[r + 1] = k.offsets[r] + per_row[r].size();
  k.entries.reserve(k.offsets[rows]);
  for (auto& r : per_row) k.entries.insert(k.entries.end(), r.begin(), r.end());
  return k;
}

std::uint64_t kernel_cache_key(const GridSpec& g, const AircraftParams& p) {
  std::string buf;
  for (double v : {g.plane.x_min, g.plane.x_max, g.plane.y_min, g.plane.y_max, g.dt_min, p.airspeed_kmh, p.turn_rate,
                   p.wind_u_kmh, p.wind_v_kmh, p.sigma2_x, p.sigma2_y, p.sigma2_heading})
    put(buf, v);
  for (int v : {g.plane.n_x, g.plane.n_y, g.n_heading}) put(buf, v);
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : buf) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void save_kernel(const std::filesystem::path& path, const TransitionKernel& k) {
  std::string buf;
  put(buf, kCacheMagic);
  put(buf, kernel_cache_key(k.grid, k.params));
  put(buf, static_cast<std::uint64_t>(k.offsets.size()));
  put(buf, static_cast<std::uint64_t>(k.entries.size()));
  buf.append(reinterpret_cast<const char*>(k.offsets.data()), k.offsets.size() * sizeof(std::uint64_t));
  for (const auto& e : k.entries) {
    put(buf, e.state);
    put(buf, e.probability);
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write kernel cache " + path.string());
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

bool load_kernel(const std::filesystem::path& path, const GridSpec& grid, const AircraftParams& params,
                 TransitionKernel& out) {
  std::ifstream is(path, std::ios::binary);
  if (!is) return false;
  std::uint64_t magic{}, key{}, n_off{}, n_ent{};
  if (!get(is, magic) || magic != kCacheMagic || !get(is, key) || key != kernel_cache_key(grid, params)) return false;
  if (!get(is, n_off) || !get(is, n_ent) || n_off != grid.num_states() * kNumControls + 1) return false;
  TransitionKernel k;
  k.grid = grid;
  k.params = params;
  k.offsets.resize(n_off);
  if (!is.read(reinterpret_cast<char*>(k.offsets.data()), static_cast<std::streamsize>(n_off * sizeof(std::uint64_t))))
    return false;
  k.entries.resize(n_ent);
  for (auto& e : k.entries)
    if (!get(is, e.state) || !get(is, e.probability)) return false;
  if (k.offsets.back() != n_ent) return false;
  out = std::move(k);
  return true;
}

}  // namespace stormreach
