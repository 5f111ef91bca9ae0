#include "stormreach/kmeans.hpp"

#include <algorithm>
#include <limits>

#include "stormreach/errors.hpp"

namespace stormreach {
namespace {

int nearest_centroid(const Feature& f, const std::vector<Feature>& centroids, double* dist = nullptr) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = squared_distance(f, centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  if (dist) *dist = best_d;
  return best;
}

std::vector<Feature> seed_plus_plus(std::span<const Feature> pts, int k, Rng& rng) {
  std::vector<Feature> centroids;
  centroids.push_back(pts[static_cast<std::size_t>(uniform_open(rng) * static_cast<double>(pts.size())) % pts.size()]);
  std::vector<double> d2(pts.size(), std::numeric_limits<double>::infinity());
  while (static_cast<int>(centroids.size()) < k) {
    double total = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      d2[i] = std::min(d2[i], squared_distance(pts[i], centroids.back()));
      total += d2[i];
    }
    std::size_t pick = 0;
    if (total > 0) {
      double target = uniform_open(rng) * total;
      for (pick = 0; pick + 1 < pts.size(); ++pick) {
        target -= d2[pick];
        if (target <= 0 && d2[pick] > 0) break;
      }
    } else {
      pick = static_cast<std::size_t>(uniform_open(rng) * static_cast<double>(pts.size())) % pts.size();
    }
    centroids.push_back(pts[pick]);
  }
  return centroids;
}

void update_centroids(std::span<const Feature> pts, ClusterAssignment& a) {
  std::vector<Feature> sums(static_cast<std::size_t>(a.k), Feature{0, 0, 0});
  std::vector<std::size_t> counts(static_cast<std::size_t>(a.k), 0);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    auto& s = sums[static_cast<std::size_t>(a.labels[i])];
    for (int d = 0; d < 3; ++d) s[d] += pts[i][d];
    ++counts[static_cast<std::size_t>(a.labels[i])];
  }
  for (std::size_t c = 0; c < sums.size(); ++c)
    if (counts[c] > 0)
      for (int d = 0; d < 3; ++d) a.centroids[c][d] = sums[c][d] / static_cast<double>(counts[c]);
}

// Gives every empty cluster the point farthest from its current centroid.
void reseed_empty(std::span<const Feature> pts, ClusterAssignment& a) {
  std::vector<std::size_t> counts(static_cast<std::size_t>(a.k), 0);
  for (int l : a.labels) ++counts[static_cast<std::size_t>(l)];
  for (int c = 0; c < a.k; ++c) {
    if (counts[static_cast<std::size_t>(c)] > 0) continue;
    std::size_t far = pts.size();
    double far_d = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (counts[static_cast<std::size_t>(a.labels[i])] < 2) continue;
      const double d = squared_distance(pts[i], a.centroids[static_cast<std::size_t>(a.labels[i])]);
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    if (far == pts.size()) continue;  // only duplicates left; cluster stays empty
    --counts[static_cast<std::size_t>(a.labels[far])];
    a.labels[far] = c;
    counts[static_cast<std::size_t>(c)] = 1;
    a.centroids[static_cast<std::size_t>(c)] = pts[far];
  }
}

ClusterAssignment lloyd(std::span<const Feature> pts, int k, Rng& rng, int max_iterations) {
  ClusterAssignment a;
  a.k = k;
  a.centroids = seed_plus_plus(pts, k, rng);
  a.labels.assign(pts.size(), -1);
  double prev_sse = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < max_iterations; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const int l = nearest_centroid(pts[i], a.centroids);
      if (l != a.labels[i]) {
        a.labels[i] = l;
        changed = true;
      }
    }
    if (!changed && iter > 0) break;
    reseed_empty(pts, a);
    update_centroids(pts, a);
    const double sse = cluster_sse(pts, a);
    STORMREACH_ASSERT(sse <= prev_sse * (1.0 + 1e-12) + 1e-12, "k-means SSE increased across a Lloyd iteration");
    prev_sse = sse;
  }
  a.sse = cluster_sse(pts, a);
  return a;
}

}  // namespace

double squared_distance(const Feature& a, const Feature& b) {
  const double d0 = a[0] - b[0], d1 = a[1] - b[1], d2 = a[2] - b[2];
  return d0 * d0 + d1 * d1 + d2 * d2;
}

double cluster_sse(std::span<const Feature> features, const ClusterAssignment& a) {
  double s = 0;
  for (std::size_t i = 0; i < features.size(); ++i)
    s += squared_distance(features[i], a.centroids[static_cast<std::size_t>(a.labels[i])]);
  return s;
}

ClusterAssignment kmeans(std::span<const Feature> features, int k, Rng& rng, KMeansOptions options) {
  if (features.empty()) throw DomainError("k-means needs at least one feature");
  if (k < 1 || static_cast<std::size_t>(k) > features.size())
    throw DomainError("k-means needs 1 <= K <= number of features");
  ClusterAssignment best;
  best.sse = std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(1, options.restarts); ++r) {
    auto a = lloyd(features, k, rng, options.max_iterations);
    if (a.sse < best.sse) best = std::move(a);
  }
  return best;
}

std::vector<double> sse_curve(std::span<const Feature> features, int k_max, Rng& rng, KMeansOptions options) {
  const int top = std::min<int>(k_max, static_cast<int>(features.size()));
  std::vector<double> curve;
  for (int k = 1; k <= top; ++k) curve.push_back(kmeans(features, k, rng, options).sse);
  return curve;
}

int select_k(std::span<const Feature> features, int k_max, Rng& rng, double threshold, KMeansOptions options) {
  if (features.size() <= 1) return 1;
  const auto curve = sse_curve(features, std::max(1, k_max), rng, options);
  for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
    if (curve[i] <= 0) return static_cast<int>(i) + 1;
    if ((curve[i] - curve[i + 1]) / curve[i] < threshold) return static_cast<int>(i) + 1;
  }
  return static_cast<int>(curve.size());
}

}  // namespace stormreach
