#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "stormreach/grid.hpp"

namespace stormreach {

/// Unicycle aircraft at constant airspeed with yaw-rate advisories {-Omega, 0, +Omega}.
struct AircraftParams {
  double airspeed_kmh{792.0};
  double turn_rate{0.3};  // rad/min
  double wind_u_kmh{2.6 * 3.6};  // West-to-East
  double wind_v_kmh{5.6 * 3.6};  // South-to-North
  double sigma2_x{0.25};  // km^2 per step
  double sigma2_y{0.25};
  double sigma2_heading{4e-5};  // rad^2 per step

  void validate(const GridSpec& grid) const;

  friend bool operator==(const AircraftParams&, const AircraftParams&) = default;
};

inline constexpr int kNumControls = 3;
/// Control index 0, 1, 2 <-> code -1, 0, +1 <-> yaw rate -Omega, 0, +Omega.
inline constexpr int control_code(int index) { return index - 1; }
inline constexpr int control_index(int code) { return code + 1; }

struct Successor {
  std::uint32_t state;  // == num_states for the absorbing "lost" state
  double probability;
};

/// Deterministic part of one step: (x, y, heading) after dt minutes under control code.
std::array<double, 3> mean_successor(const AircraftParams& params, double dt_min, double x, double y, double heading,
                                     int code);

/// Sparse per-(state, control) successor distributions in CSR layout.
struct TransitionKernel {
  GridSpec grid{};
  AircraftParams params{};
  std::vector<std::uint64_t> offsets;  // size num_states * 3 + 1
  std::vector<Successor> entries;

  std::uint32_t lost_state() const { return static_cast<std::uint32_t>(grid.num_states()); }
  std::span<const Successor> row(std::size_t state, int control_idx) const {
    const std::size_t r = state * kNumControls + static_cast<std::size_t>(control_idx);
    return {entries.data() + offsets[r], entries.data() + offsets[r + 1]};
  }
};

inline constexpr double kVarianceFloor = 1e-12;

/// Gaussian density at successor cell centers (truncated to +-4 sigma plus one cell per
/// dimension), normalized per row. Heading wraps; (x, y) mass beyond the grid goes to
/// the lost state. Zero variances are floored at 1e-12 with a warning.
TransitionKernel build_kernel(const GridSpec& grid, const AircraftParams& params);

/// Stable key for caching a kernel built from (grid, params).
std::uint64_t kernel_cache_key(const GridSpec& grid, const AircraftParams& params);
void save_kernel(const std::filesystem::path& path, const TransitionKernel& kernel);
/// Returns false if the file is missing or was built for a different key.
bool load_kernel(const std::filesystem::path& path, const GridSpec& grid, const AircraftParams& params,
                 TransitionKernel& out);

}  // namespace stormreach
