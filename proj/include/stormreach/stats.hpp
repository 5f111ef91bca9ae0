#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "stormreach/geo.hpp"
#include "stormreach/nowcast.hpp"

namespace stormreach {

/// Logistic distribution with location m and scale s >= 0.
struct LogisticModel {
  double m{};
  double s{};

  double stddev() const { return s * M_PI / std::sqrt(3.0); }

  friend bool operator==(const LogisticModel&, const LogisticModel&) = default;
};

struct NormalFit {
  double mean{};
  double stddev{};
};

double logistic_log_likelihood(std::span<const double> samples, LogisticModel model);
double normal_log_likelihood(std::span<const double> samples, NormalFit fit);

/// Damped Newton maximum likelihood fit, started from (median, sd*sqrt(3)/pi).
/// Converges until the gradient of the mean log-likelihood is below 1e-8.
/// Throws DegenerateError with fewer than two distinct values.
LogisticModel fit_logistic_mle(std::span<const double> samples);

/// MLE of the scale with the location held fixed at `m`. Returns 0 if every sample equals m.
double fit_logistic_scale(std::span<const double> samples, double m);

/// Closed-form MLE (divisor n). Zero spread returns stddev 0 and emits a warning.
NormalFit fit_normal_mle(std::span<const double> samples);

/// k ln(n) - 2 loglik; lower is better. Throws DomainError for n == 0.
double bic(double loglik, int k_params, std::size_t n_samples);

struct SizeDeltaSample {
  int pixels{1};
  double delta{};  // km per 10-minute step
};

/// Logistic model of a size increment whose scale grows with ln(pixels):
/// s(pix) = max(s_min, a + b ln pix), location constant.
struct GrowthScaleModel {
  double location{};
  double a{};
  double b{};
  double s_min{1e-3};
  bool size_independent{false};

  LogisticModel at(double pixels) const;
  bool non_decreasing() const { return b >= 0.0; }

  friend bool operator==(const GrowthScaleModel&, const GrowthScaleModel&) = default;
};

struct GrowthFitOptions {
  std::size_t min_bucket = 30;
  double s_min = 1e-3;
};

/// Pooled location; per-bucket scale MLEs regressed on ln(pixels). Buckets are
/// power-of-two pixel bins, sparse bins merged upward. Falls back to a
/// size-independent model (with a warning) when fewer than two buckets remain.
GrowthScaleModel fit_growth_scale(std::span<const SizeDeltaSample> samples, GrowthFitOptions options = {});

/// Observed minus forecast center for one cell at one horizon.
struct CenterErrorSample {
  int horizon{};  // 1-based, in 10-minute steps
  int cell_id{};
  double dx{};
  double dy{};
};

/// Width/height change of a cell over one 10-minute observation step.
struct SizeStepSample {
  int cell_id{};
  int pixels{1};  // at the start of the step
  double dw{};
  double dh{};
};

struct ErrorSamples {
  std::vector<CenterErrorSample> center;
  std::vector<SizeStepSample> size;
};

/// Pairs forecasts with later observations of the same cell ID. The archive must be
/// sorted with 10-minute spacing (SchemaError otherwise).
ErrorSamples pair_errors(std::span<const NowcastFile> archive, const PlanarFrame& frame,
                         int max_horizon = kMaxForecastHorizons);

struct ErrorModelSet {
  std::vector<LogisticModel> center_x;  // index tau - 1
  std::vector<LogisticModel> center_y;
  GrowthScaleModel width_growth;
  GrowthScaleModel height_growth;

  int horizons() const { return static_cast<int>(center_x.size()); }

  friend bool operator==(const ErrorModelSet&, const ErrorModelSet&) = default;
};

struct FitOptions {
  int horizons = 4;
  int window = 0;  // last W files; 0 = all
  GrowthFitOptions growth{};
};

struct AxisFitSummary {
  std::size_t n{};
  LogisticModel logistic{};
  NormalFit normal{};
  double bic_logistic{};
  double bic_normal{};
};

struct FitReport {
  std::vector<AxisFitSummary> center_x;
  std::vector<AxisFitSummary> center_y;
  AxisFitSummary width;
  AxisFitSummary height;
  std::size_t files_used{};
};

AxisFitSummary summarize_fit(std::span<const double> samples);

ErrorModelSet fit_error_models(std::span<const NowcastFile> archive, const PlanarFrame& frame,
                               const FitOptions& options, FitReport* report = nullptr);

std::string serialize_error_models(const ErrorModelSet& models);
ErrorModelSet parse_error_models(const std::string& text);

/// Models with zero scale and zero location everywhere, for deterministic propagation.
ErrorModelSet zero_noise_models(int horizons);

}  // namespace stormreach
