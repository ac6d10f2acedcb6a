#include "keyclip/anchors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace keyclip {

std::vector<std::size_t> find_valleys(const SimilarityCurve& curve) {
  std::vector<std::size_t> valleys;
  const auto& s = curve.scores;
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    if (s[i] < s[i - 1] && s[i] <= s[i + 1]) {
      valleys.push_back(i);
    }
  }
  return valleys;
}

namespace {

std::size_t argmax_in(const SimilarityCurve& curve, std::size_t first, std::size_t last) {
  std::size_t best = first;
  for (std::size_t i = first + 1; i <= last; ++i) {
    if (curve[i] > curve[best]) best = i;
  }
  return best;
}

}  // namespace

std::vector<std::size_t> basin_peaks(const SimilarityCurve& curve, const std::vector<std::size_t>& valleys) {
  std::vector<std::size_t> peaks;
  if (curve.size() == 0) return peaks;

  std::size_t first = 0;
  for (std::size_t v : valleys) {
    peaks.push_back(argmax_in(curve, first, v));
    first = v;
  }
  peaks.push_back(argmax_in(curve, first, curve.size() - 1));

  std::sort(peaks.begin(), peaks.end());
  peaks.erase(std::unique(peaks.begin(), peaks.end()), peaks.end());
  return peaks;
}

namespace {

// Nearest centroid; on equal distance the smaller centroid value wins, then
// the lower cluster index.
std::vector<std::size_t> assign_points(const std::vector<double>& points, const std::vector<double>& centroids) {
  std::vector<std::size_t> assign(points.size());
  for (std::size_t p = 0; p < points.size(); ++p) {
    std::size_t best = 0;
    double best_d = std::abs(points[p] - centroids[0]);
    for (std::size_t j = 1; j < centroids.size(); ++j) {
      const double d = std::abs(points[p] - centroids[j]);
      if (d < best_d || (d == best_d && centroids[j] < centroids[best])) {
        best = j;
        best_d = d;
      }
    }
    assign[p] = best;
  }
  return assign;
}

std::vector<std::size_t> cluster_sizes(const std::vector<std::size_t>& assign, std::size_t k) {
  std::vector<std::size_t> sizes(k, 0);
  for (std::size_t a : assign) ++sizes[a];
  return sizes;
}

// Moves the point farthest from its centroid into each empty cluster. Donor
// clusters must keep at least one member.
void reseed_empty(const std::vector<double>& points, std::vector<double>& centroids,
                  std::vector<std::size_t>& assign) {
  const std::size_t k = centroids.size();
  auto sizes = cluster_sizes(assign, k);
  for (std::size_t j = 0; j < k; ++j) {
    if (sizes[j] != 0) continue;
    std::size_t far = points.size();
    double far_d = -1.0;
    for (std::size_t p = 0; p < points.size(); ++p) {
      if (sizes[assign[p]] < 2) continue;
      const double d = std::abs(points[p] - centroids[assign[p]]);
      if (d > far_d) {
        far = p;
        far_d = d;
      }
    }
    if (far == points.size() || far_d <= 0.0) continue;  // nothing separable left
    --sizes[assign[far]];
    assign[far] = j;
    sizes[j] = 1;
    centroids[j] = points[far];
  }
}

void update_centroids(const std::vector<double>& points, const std::vector<std::size_t>& assign,
                      std::vector<double>& centroids) {
  const std::size_t k = centroids.size();
  std::vector<double> sum(k, 0.0);
  std::vector<std::size_t> count(k, 0);
  for (std::size_t p = 0; p < points.size(); ++p) {
    sum[assign[p]] += points[p];
    ++count[assign[p]];
  }
  for (std::size_t j = 0; j < k; ++j) {
    if (count[j] > 0) centroids[j] = sum[j] / static_cast<double>(count[j]);
  }
}

}  // namespace

std::vector<std::vector<std::size_t>> kmeans_1d(const std::vector<std::size_t>& points, std::size_t k,
                                                std::uint64_t /*seed*/) {
  if (k == 0 || k > points.size()) {
    throw Error(ErrorCode::kKTooLarge,
                "k=" + std::to_string(k) + " over " + std::to_string(points.size()) + " points");
  }
  const std::size_t n = points.size();
  std::vector<double> xs(points.begin(), points.end());

  std::vector<double> centroids(k);
  for (std::size_t j = 0; j < k; ++j) {
    // floor((j + 0.5) * n / k) computed exactly in integers
    centroids[j] = xs[((2 * j + 1) * n) / (2 * k)];
  }

  auto assign = assign_points(xs, centroids);
  for (int iter = 0; iter < kKMeansMaxIterations; ++iter) {
    reseed_empty(xs, centroids, assign);
    update_centroids(xs, assign, centroids);
    auto next = assign_points(xs, centroids);
    if (next == assign) break;
    assign = std::move(next);
  }
  reseed_empty(xs, centroids, assign);
  update_centroids(xs, assign, centroids);

  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return centroids[a] < centroids[b]; });

  std::vector<std::vector<std::size_t>> clusters(k);
  std::vector<std::size_t> rank(k);
  for (std::size_t r = 0; r < k; ++r) rank[order[r]] = r;
  for (std::size_t p = 0; p < n; ++p) clusters[rank[assign[p]]].push_back(points[p]);
  return clusters;
}

AnchorSet select_anchors(const SimilarityCurve& curve, const SelectionConfig& cfg) {
  AnchorSet out;
  if (curve.size() == 0) return out;

  auto candidates = basin_peaks(curve, find_valleys(curve));
  if (candidates.size() <= cfg.k_anchor) {
    out.indices = std::move(candidates);
    return out;
  }

  for (const auto& cluster : kmeans_1d(candidates, cfg.k_anchor, cfg.seed)) {
    if (cluster.empty()) continue;
    std::size_t best = cluster.front();
    for (std::size_t i : cluster) {
      if (curve[i] > curve[best] || (curve[i] == curve[best] && i < best)) best = i;
    }
    out.indices.push_back(best);
  }
  std::sort(out.indices.begin(), out.indices.end());
  return out;
}

}  // namespace keyclip
