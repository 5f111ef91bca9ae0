#include "stormreach/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include <fmt/format.h>
#include "json.hpp"

#include "stormreach/errors.hpp"
#include "stormreach/storm_cell.hpp"

namespace stormreach {
namespace {

constexpr double kGradTol = 1e-8;
constexpr int kMaxNewtonIters = 500;

// log cosh(a) without overflow.
double log_cosh(double a) {
  a = std::abs(a);
  return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
}

double median(std::vector<double> v) {
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

bool has_two_distinct(std::span<const double> xs) {
  return std::any_of(xs.begin(), xs.end(), [&](double x) { return x != xs.front(); });
}

struct LogisticDerivs {
  double gm{}, gs{}, hmm{}, hms{}, hss{};
};

// Derivatives of the mean log-likelihood with respect to (m, s).
LogisticDerivs logistic_derivs(std::span<const double> xs, double m, double s) {
  double sum_t = 0, sum_zt = 0, sum_sech = 0, sum_cross = 0, sum_ss = 0;
  for (double x : xs) {
    const double z = (x - m) / s;
    const double t = std::tanh(0.5 * z);
    const double sech2 = 1.0 - t * t;
    sum_t += t;
    sum_zt += z * t;
    sum_sech += sech2;
    sum_cross += t + 0.5 * z * sech2;
    sum_ss += 2.0 * z * t + 0.5 * z * z * sech2;
  }
  const double n = static_cast<double>(xs.size());
  LogisticDerivs d;
  d.gm = sum_t / (n * s);
  d.gs = (sum_zt - n) / (n * s);
  d.hmm = -sum_sech / (2.0 * n * s * s);
  d.hms = -sum_cross / (n * s * s);
  d.hss = -(sum_ss - n) / (n * s * s);
  return d;
}

}  // namespace

double logistic_log_likelihood(std::span<const double> xs, LogisticModel model) {
  if (!(model.s > 0)) return -std::numeric_limits<double>::infinity();
  double ll = 0;
  const double c = -std::log(4.0 * model.s);
  for (double x : xs) ll += c - 2.0 * log_cosh(0.5 * (x - model.m) / model.s);
  return ll;
}

double normal_log_likelihood(std::span<const double> xs, NormalFit fit) {
  if (!(fit.stddev > 0)) return -std::numeric_limits<double>::infinity();
  double ss = 0;
  for (double x : xs) ss += (x - fit.mean) * (x - fit.mean);
  const double n = static_cast<double>(xs.size());
  return -0.5 * n * std::log(2.0 * M_PI * fit.stddev * fit.stddev) - ss / (2.0 * fit.stddev * fit.stddev);
}

LogisticModel fit_logistic_mle(std::span<const double> xs) {
  if (xs.size() < 2 || !has_two_distinct(xs))
    throw DegenerateError("logistic fit needs at least two distinct values");

  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double var = 0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= n;

  double m = median(std::vector<double>(xs.begin(), xs.end()));
  double s = std::sqrt(var) * std::sqrt(3.0) / M_PI;
  double ll = logistic_log_likelihood(xs, {m, s}) / n;

  for (int iter = 0; iter < kMaxNewtonIters; ++iter) {
    const auto d = logistic_derivs(xs, m, s);
    if (std::hypot(d.gm, d.gs) < kGradTol) return {m, s};

    double step_m, step_s;
    const double det = d.hmm * d.hss - d.hms * d.hms;
    if (d.hmm < 0 && det > 0) {
      step_m = -(d.hss * d.gm - d.hms * d.gs) / det;
      step_s = -(-d.hms * d.gm + d.hmm * d.gs) / det;
    } else {
      // Not locally concave: plain ascent scaled by s^2.
      step_m = d.gm * s * s;
      step_s = d.gs * s * s;
    }

    double t = 1.0;
    bool moved = false;
    while (t > 1e-12) {
      const double nm = m + t * step_m;
      const double ns = s + t * step_s;
      if (ns > 0) {
        const double nll = logistic_log_likelihood(xs, {nm, ns}) / n;
        if (nll >= ll) {
          m = nm;
          s = ns;
          ll = nll;
          moved = true;
          break;
        }
      }
      t *= 0.5;
    }
    if (!moved) break;  // at the optimum to working precision
  }
  const auto d = logistic_derivs(xs, m, s);
  if (std::hypot(d.gm, d.gs) > 1e-6)
    warn(fmt::format("logistic fit stopped with gradient norm {:.3g}", std::hypot(d.gm, d.gs)));
  return {m, s};
}

double fit_logistic_scale(std::span<const double> xs, double m) {
  if (xs.empty()) throw DegenerateError("scale fit needs samples");
  double ms = 0;
  for (double x : xs) ms += (x - m) * (x - m);
  ms /= static_cast<double>(xs.size());
  if (ms == 0.0) return 0.0;
  double s = std::sqrt(ms) * std::sqrt(3.0) / M_PI;
  for (int iter = 0; iter < kMaxNewtonIters; ++iter) {
    const auto d = logistic_derivs(xs, m, s);
    if (std::abs(d.gs) < kGradTol) break;
    double step = d.hss < 0 ? -d.gs / d.hss : d.gs * s * s;
    while (s + step <= 0) step *= 0.5;
    s += step;
  }
  return s;
}

NormalFit fit_normal_mle(std::span<const double> xs) {
  if (xs.empty()) throw DegenerateError("normal fit needs samples");
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double var = 0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= n;
  if (var == 0.0) warn("normal fit on samples with zero spread; stddev is 0");
  return {mean, std::sqrt(var)};
}

double bic(double loglik, int k_params, std::size_t n_samples) {
  if (n_samples == 0) throw DomainError("BIC needs at least one sample");
  return k_params * std::log(static_cast<double>(n_samples)) - 2.0 * loglik;
}

LogisticModel GrowthScaleModel::at(double pixels) const {
  const double raw = size_independent ? a : a + b * std::log(std::max(pixels, 1.0));
  return {location, std::max(s_min, raw)};
}

GrowthScaleModel fit_growth_scale(std::span<const SizeDeltaSample> samples, GrowthFitOptions options) {
  if (samples.empty()) throw DegenerateError("growth fit needs samples");
  std::vector<double> all;
  all.reserve(samples.size());
  for (const auto& smp : samples) all.push_back(smp.delta);

  GrowthScaleModel model;
  model.s_min = options.s_min;
  if (!has_two_distinct(all)) {
    warn("size increments have zero spread; using a size-independent zero-scale model");
    model.location = all.front();
    model.a = 0.0;
    model.size_independent = true;
    return model;
  }
  model.location = fit_logistic_mle(all).m;

  // Power-of-two pixel bins.
  std::map<int, std::vector<const SizeDeltaSample*>> bins;
  for (const auto& smp : samples) bins[static_cast<int>(std::floor(std::log2(std::max(smp.pixels, 1))))].push_back(&smp);

  std::vector<std::vector<const SizeDeltaSample*>> buckets;
  std::vector<const SizeDeltaSample*> pending;
  for (auto& [edge, members] : bins) {
    pending.insert(pending.end(), members.begin(), members.end());
    if (pending.size() >= options.min_bucket) {
      buckets.push_back(std::move(pending));
      pending.clear();
    }
  }
  if (!pending.empty()) {
    if (buckets.empty())
      buckets.push_back(std::move(pending));
    else
      buckets.back().insert(buckets.back().end(), pending.begin(), pending.end());
  }

  if (buckets.size() < 2) {
    warn("insufficient spread in cell size for a size-dependent growth model; using a size-independent fit");
    model.a = std::max(options.s_min, fit_logistic_scale(all, model.location));
    model.size_independent = true;
    return model;
  }

  std::vector<double> xs, ys;
  for (const auto& bucket : buckets) {
    std::vector<double> deltas;
    double log_pix = 0;
    for (const auto* smp : bucket) {
      deltas.push_back(smp->delta);
      log_pix += std::log(static_cast<double>(std::max(smp->pixels, 1)));
    }
    xs.push_back(log_pix / static_cast<double>(bucket.size()));
    ys.push_back(fit_logistic_scale(deltas, model.location));
  }
  const double k = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / k;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / k;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  model.b = sxx > 0 ? sxy / sxx : 0.0;
  model.a = my - model.b * mx;
  if (model.b < 0) warn(fmt::format("growth scale decreases with cell size (b = {:.4g})", model.b));
  return model;
}

ErrorSamples pair_errors(std::span<const NowcastFile> archive, const PlanarFrame& frame, int max_horizon) {
  ErrorSamples out;
  for (std::size_t i = 1; i < archive.size(); ++i) {
    if (archive[i].issue_time - archive[i - 1].issue_time != std::chrono::minutes(kNowcastStepMinutes))
      throw SchemaError(fmt::format("archive files {} and {} are not {} minutes apart",
                                    nowcast_filename(archive[i - 1].issue_time),
                                    nowcast_filename(archive[i].issue_time), kNowcastStepMinutes));
  }
  max_horizon = std::clamp(max_horizon, 0, kMaxForecastHorizons);

  for (std::size_t i = 0; i < archive.size(); ++i) {
    for (const auto& obs : archive[i].cells) {
      for (int tau = 1; tau <= max_horizon; ++tau) {
        const auto j = i + static_cast<std::size_t>(tau);
        if (j >= archive.size()) break;
        const auto& fc = obs.center_forecasts[tau - 1];
        if (!fc) continue;
        const auto* later = archive[j].find(obs.id);
        if (!later) continue;
        const Point2 observed = frame.project(later->center);
        const Point2 predicted = frame.project(*fc);
        out.center.push_back({tau, obs.id, observed.x - predicted.x, observed.y - predicted.y});
      }
      if (i + 1 < archive.size()) {
        if (const auto* next = archive[i + 1].find(obs.id)) {
          const auto a = to_planar(obs, frame).state;
          const auto b = to_planar(*next, frame).state;
          out.size.push_back({obs.id, obs.pixels, b.width() - a.width(), b.height() - a.height()});
        }
      }
    }
  }
  return out;
}

AxisFitSummary summarize_fit(std::span<const double> xs) {
  AxisFitSummary s;
  s.n = xs.size();
  s.logistic = fit_logistic_mle(xs);
  s.normal = fit_normal_mle(xs);
  s.bic_logistic = bic(logistic_log_likelihood(xs, s.logistic), 2, xs.size());
  s.bic_normal = bic(normal_log_likelihood(xs, s.normal), 2, xs.size());
  return s;
}

ErrorModelSet fit_error_models(std::span<const NowcastFile> archive, const PlanarFrame& frame,
                               const FitOptions& options, FitReport* report) {
  if (options.horizons < 1 || options.horizons > kMaxForecastHorizons)
    throw DomainError(fmt::format("horizons must be in [1, {}]", kMaxForecastHorizons));
  if (archive.size() < 2) throw DegenerateError("fitting needs an archive of at least two consecutive nowcasts");
  if (options.window > 0 && static_cast<std::size_t>(options.window) < archive.size())
    archive = archive.subspan(archive.size() - static_cast<std::size_t>(options.window));

  const auto samples = pair_errors(archive, frame, options.horizons);
  ErrorModelSet models;
  FitReport local;
  local.files_used = archive.size();
  for (int tau = 1; tau <= options.horizons; ++tau) {
    std::vector<double> dx, dy;
    for (const auto& s : samples.center)
      if (s.horizon == tau) {
        dx.push_back(s.dx);
        dy.push_back(s.dy);
      }
    if (dx.size() < 2 || !has_two_distinct(dx) || !has_two_distinct(dy))
      throw DegenerateError(fmt::format("not enough forecast/observation pairs at {} min", tau * kNowcastStepMinutes));
    local.center_x.push_back(summarize_fit(dx));
    local.center_y.push_back(summarize_fit(dy));
    models.center_x.push_back(local.center_x.back().logistic);
    models.center_y.push_back(local.center_y.back().logistic);
  }

  std::vector<SizeDeltaSample> dw, dh;
  std::vector<double> dw_raw, dh_raw;
  for (const auto& s : samples.size) {
    dw.push_back({s.pixels, s.dw});
    dh.push_back({s.pixels, s.dh});
    dw_raw.push_back(s.dw);
    dh_raw.push_back(s.dh);
  }
  if (dw.size() < 2 || !has_two_distinct(dw_raw) || !has_two_distinct(dh_raw))
    throw DegenerateError("not enough consecutive observations of the same cells to fit size changes");
  models.width_growth = fit_growth_scale(dw, options.growth);
  models.height_growth = fit_growth_scale(dh, options.growth);
  local.width = summarize_fit(dw_raw);
  local.height = summarize_fit(dh_raw);
  if (report) *report = std::move(local);
  return models;
}

namespace {

nlohmann::json growth_to_json(const GrowthScaleModel& g) {
  return {{"location", g.location}, {"a", g.a}, {"b", g.b}, {"s_min", g.s_min}, {"size_independent", g.size_independent}};
}

GrowthScaleModel growth_from_json(const nlohmann::json& j) {
  GrowthScaleModel g;
  g.location = j.at("location").get<double>();
  g.a = j.at("a").get<double>();
  g.b = j.at("b").get<double>();
  g.s_min = j.at("s_min").get<double>();
  g.size_independent = j.at("size_independent").get<bool>();
  return g;
}

}  // namespace

std::string serialize_error_models(const ErrorModelSet& models) {
  nlohmann::json j;
  j["format"] = "stormreach-error-models";
  j["version"] = 1;
  auto& hs = j["horizons"] = nlohmann::json::array();
  for (int tau = 1; tau <= models.horizons(); ++tau) {
    const auto& x = models.center_x[tau - 1];
    const auto& y = models.center_y[tau - 1];
    hs.push_back({{"tau", tau},
                  {"minutes", tau * kNowcastStepMinutes},
                  {"center_x", {{"m", x.m}, {"s", x.s}}},
                  {"center_y", {{"m", y.m}, {"s", y.s}}}});
  }
  j["width_growth"] = growth_to_json(models.width_growth);
  j["height_growth"] = growth_to_json(models.height_growth);
  return j.dump(2) + "\n";
}

ErrorModelSet parse_error_models(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("error model file: ") + e.what());
  }
  try {
    if (j.at("format") != "stormreach-error-models") throw ParseError("not an error model file");
    ErrorModelSet m;
    int expected = 1;
    for (const auto& h : j.at("horizons")) {
      if (h.at("tau").get<int>() != expected++) throw ParseError("error model horizons must be consecutive from 1");
      m.center_x.push_back({h.at("center_x").at("m").get<double>(), h.at("center_x").at("s").get<double>()});
      m.center_y.push_back({h.at("center_y").at("m").get<double>(), h.at("center_y").at("s").get<double>()});
      if (m.center_x.back().s < 0 || m.center_y.back().s < 0) throw ParseError("negative logistic scale");
    }
    m.width_growth = growth_from_json(j.at("width_growth"));
    m.height_growth = growth_from_json(j.at("height_growth"));
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("error model file: ") + e.what());
  }
}

ErrorModelSet zero_noise_models(int horizons) {
  ErrorModelSet m;
  m.center_x.assign(static_cast<std::size_t>(horizons), LogisticModel{0.0, 0.0});
  m.center_y = m.center_x;
  m.width_growth = {0.0, 0.0, 0.0, 0.0, true};
  m.height_growth = m.width_growth;
  return m;
}

}  // namespace stormreach
