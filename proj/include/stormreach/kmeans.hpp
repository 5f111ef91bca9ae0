#pragma once

#include <array>
#include <span>
#include <vector>

#include "stormreach/rng.hpp"

namespace stormreach {

/// Clustering feature o = (x^c, y^c, w * xi): center in km and scaled heading.
using Feature = std::array<double, 3>;

/// Labels are 0-based cluster indices.
struct ClusterAssignment {
  int k{};
  std::vector<int> labels;
  std::vector<Feature> centroids;
  double sse{};
};

struct KMeansOptions {
  int restarts = 10;
  int max_iterations = 100;
};

double squared_distance(const Feature& a, const Feature& b);
double cluster_sse(std::span<const Feature> features, const ClusterAssignment& assignment);

/// Lloyd's algorithm from k-means++ seeds; best of `restarts` runs by SSE. Empty
/// clusters are re-seeded at the point farthest from its centroid. Throws
/// DomainError for K < 1, K > n or empty input; InternalError if SSE ever increases.
ClusterAssignment kmeans(std::span<const Feature> features, int k, Rng& rng, KMeansOptions options = {});

/// SSE for K = 1..min(k_max, n).
std::vector<double> sse_curve(std::span<const Feature> features, int k_max, Rng& rng, KMeansOptions options = {});

/// Elbow rule: smallest K whose relative drop SSE(K) -> SSE(K+1) is below `threshold`.
int select_k(std::span<const Feature> features, int k_max, Rng& rng, double threshold = 0.15,
             KMeansOptions options = {});

}  // namespace stormreach
