#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "crashrules/common.hpp"
#include "crashrules/encode.hpp"
#include "crashrules/parallel.hpp"
#include "crashrules/rng.hpp"

namespace crashrules {

struct KMeansOptions {
  std::uint64_t seed = 0;
  std::size_t max_iter = 300;
  std::size_t restarts = 10;
  double tol = 1e-9;  // max-norm centroid movement
};

struct ClusterModel {
  std::uint32_t k = 0;
  std::size_t dims = 0;
  std::vector<double> centroids;  // k x dims, row-major
  std::vector<std::uint32_t> assignments;
  double wcss = 0.0;
  std::size_t iterations = 0;
  std::uint64_t seed = 0;
  std::vector<double> wcss_history;  // objective after each Lloyd step

  std::size_t cluster_size(std::uint32_t cluster) const {
    std::size_t n = 0;
    for (auto a : assignments) n += (a == cluster);
    return n;
  }
};

struct LloydStep {
  std::vector<std::uint32_t> assignments;
  std::vector<double> centroids;  // updated
  double wcss = 0.0;
};

namespace detail {

inline double squared_distance(const double* a, const double* b,
                               std::size_t dims) {
  double total = 0.0;
  for (std::size_t d = 0; d < dims; ++d) {
    const double diff = a[d] - b[d];
    total += diff * diff;
  }
  return total;
}

}  // namespace detail

/// One Lloyd iteration: nearest-centroid assignment (ties -> lowest index),
/// centroid update by cluster mean, and empty-cluster repair that moves the
/// point farthest from its centroid into the empty slot.
inline LloydStep lloyd_step(const Matrix& points,
                            const std::vector<double>& centroids) {
  const std::size_t dims = points.cols;
  if (points.rows == 0) fail("cluster", "lloyd_step on empty matrix");
  if (centroids.empty() || dims == 0 || centroids.size() % dims != 0) {
    fail("cluster", "centroid dimensions do not match the data");
  }
  const std::size_t k = centroids.size() / dims;

  LloydStep step;
  step.assignments.resize(points.rows);
  std::vector<double> dist_sq(points.rows);
  for (std::size_t i = 0; i < points.rows; ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t best_c = 0;
    for (std::size_t c = 0; c < k; ++c) {
      const double d = detail::squared_distance(points.row(i),
                                                centroids.data() + c * dims,
                                                dims);
      if (d < best) {
        best = d;
        best_c = static_cast<std::uint32_t>(c);
      }
    }
    step.assignments[i] = best_c;
    dist_sq[i] = best;
  }

  std::vector<double> sums(k * dims, 0.0);
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < points.rows; ++i) {
    const std::uint32_t c = step.assignments[i];
    ++counts[c];
    for (std::size_t d = 0; d < dims; ++d) {
      sums[c * dims + d] += points.at(i, d);
    }
  }

  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] == 0) {
      // Reseed at the farthest point whose donor cluster keeps >= 1 member.
      std::size_t pick = points.rows;
      double pick_dist = -1.0;
      for (std::size_t i = 0; i < points.rows; ++i) {
        if (counts[step.assignments[i]] < 2) continue;
        if (dist_sq[i] > pick_dist) {
          pick_dist = dist_sq[i];
          pick = i;
        }
      }
      if (pick == points.rows) {
        fail("cluster", "internal: cannot repair empty cluster");
      }
      const std::uint32_t donor = step.assignments[pick];
      --counts[donor];
      ++counts[c];
      for (std::size_t d = 0; d < dims; ++d) {
        sums[donor * dims + d] -= points.at(pick, d);
        sums[c * dims + d] += points.at(pick, d);
      }
      step.assignments[pick] = static_cast<std::uint32_t>(c);
      dist_sq[pick] = 0.0;
    }
  }

  step.centroids.resize(k * dims);
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t d = 0; d < dims; ++d) {
      step.centroids[c * dims + d] =
          sums[c * dims + d] / static_cast<double>(counts[c]);
    }
  }
  step.wcss = 0.0;
  for (std::size_t i = 0; i < points.rows; ++i) {
    step.wcss += detail::squared_distance(
        points.row(i), step.centroids.data() + step.assignments[i] * dims,
        dims);
  }
  return step;
}

/// Lloyd iterations from explicit initial centroids until the centroids
/// move less than `tol` in max-norm (or max_iter is hit).
inline ClusterModel lloyd_run(const Matrix& points,
                              std::vector<double> centroids,
                              std::size_t max_iter, double tol) {
  ClusterModel model;
  model.dims = points.cols;
  model.k = static_cast<std::uint32_t>(centroids.size() / points.cols);
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    LloydStep step = lloyd_step(points, centroids);
    model.iterations = iter + 1;
    model.wcss_history.push_back(step.wcss);
    double move = 0.0;
    for (std::size_t j = 0; j < centroids.size(); ++j) {
      move = std::max(move, std::fabs(step.centroids[j] - centroids[j]));
    }
    centroids = std::move(step.centroids);
    model.assignments = std::move(step.assignments);
    model.wcss = step.wcss;
    if (move < tol) break;
  }
  model.centroids = std::move(centroids);
  return model;
}

/// k-means++ seeding: squared-distance-weighted draws after a uniform
/// first pick. Falls back to a uniform draw when all weights are zero.
inline std::vector<double> kmeanspp_init(const Matrix& points, std::uint32_t k,
                                         Rng& rng) {
  const std::size_t dims = points.cols;
  std::vector<double> centroids;
  centroids.reserve(k * dims);

  std::size_t first = static_cast<std::size_t>(rng.next_below(points.rows));
  centroids.insert(centroids.end(), points.row(first),
                   points.row(first) + dims);

  std::vector<double> dist_sq(points.rows,
                              std::numeric_limits<double>::infinity());
  for (std::uint32_t c = 1; c < k; ++c) {
    const double* last = centroids.data() + (c - 1) * dims;
    double total = 0.0;
    for (std::size_t i = 0; i < points.rows; ++i) {
      dist_sq[i] = std::min(dist_sq[i],
                            detail::squared_distance(points.row(i), last, dims));
      total += dist_sq[i];
    }
    std::size_t pick;
    if (total <= 0.0) {
      pick = static_cast<std::size_t>(rng.next_below(points.rows));
    } else {
      const double r = rng.next_double() * total;
      double cumulative = 0.0;
      pick = points.rows - 1;
      for (std::size_t i = 0; i < points.rows; ++i) {
        cumulative += dist_sq[i];
        if (cumulative > r) {
          pick = i;
          break;
        }
      }
    }
    centroids.insert(centroids.end(), points.row(pick),
                     points.row(pick) + dims);
  }
  return centroids;
}

/// Best-of-restarts k-means. Deterministic for a fixed (seed, restarts):
/// restart r draws its stream from Rng::mix(seed, r) and ties on WCSS go to
/// the lower restart index, so concurrent execution matches serial.
inline ClusterModel kmeans_fit(const Matrix& points, std::uint32_t k,
                               const KMeansOptions& opts) {
  if (points.rows == 0) fail("cluster", "empty matrix");
  if (k < 1) fail("cluster", "k must be >= 1");
  if (k > points.rows) {
    fail("cluster", "k = " + std::to_string(k) + " exceeds " +
                        std::to_string(points.rows) + " rows");
  }
  if (opts.max_iter < 1) fail("cluster", "max_iter must be >= 1");

  const std::size_t restarts = std::max<std::size_t>(1, opts.restarts);
  std::vector<ClusterModel> runs(restarts);
  parallel_for(restarts, [&](std::size_t r) {
    Rng rng(Rng::mix(opts.seed, r));
    runs[r] = lloyd_run(points, kmeanspp_init(points, k, rng), opts.max_iter,
                        opts.tol);
  });
  std::size_t best = 0;
  for (std::size_t r = 1; r < restarts; ++r) {
    if (runs[r].wcss < runs[best].wcss) best = r;
  }
  ClusterModel model = std::move(runs[best]);
  model.seed = opts.seed;
  return model;
}

struct ElbowPoint {
  std::uint32_t k;
  double wcss;
};

struct ElbowCurve {
  std::vector<ElbowPoint> points;
  std::uint32_t chosen_k = 0;
};

/// Knee of the WCSS curve: both axes are normalized to [0, 1] (k by rank,
/// WCSS by min-max), then the point with the largest perpendicular distance
/// to the chord between the first and last points wins; ties -> smallest k.
inline std::uint32_t select_elbow(const std::vector<ElbowPoint>& points) {
  if (points.size() < 3) {
    fail("cluster", "elbow selection needs at least 3 curve points");
  }
  const std::size_t n = points.size();
  double w_min = points[0].wcss, w_max = points[0].wcss;
  for (const auto& p : points) {
    w_min = std::min(w_min, p.wcss);
    w_max = std::max(w_max, p.wcss);
  }
  const double span = w_max - w_min;

  auto norm_x = [&](std::size_t i) {
    return static_cast<double>(i) / static_cast<double>(n - 1);
  };
  auto norm_y = [&](std::size_t i) {
    return span > 0.0 ? (points[i].wcss - w_min) / span : 0.0;
  };

  const double x0 = norm_x(0), y0 = norm_y(0);
  const double x1 = norm_x(n - 1), y1 = norm_y(n - 1);
  const double dx = x1 - x0, dy = y1 - y0;
  const double chord = std::sqrt(dx * dx + dy * dy);

  std::size_t best = 0;
  double best_dist = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dist =
        std::fabs(dy * norm_x(i) - dx * norm_y(i) + x1 * y0 - y1 * x0) / chord;
    if (dist > best_dist) {
      best_dist = dist;
      best = i;
    }
  }
  return points[best].k;
}

/// WCSS for each k in [k_min, k_max], each the best of `restarts` runs.
inline ElbowCurve wcss_sweep(const Matrix& points, std::uint32_t k_min,
                             std::uint32_t k_max, const KMeansOptions& opts) {
  if (k_min < 1 || k_min > k_max) {
    fail("cluster", "invalid k range [" + std::to_string(k_min) + ", " +
                        std::to_string(k_max) + "]");
  }
  if (k_max > points.rows) {
    fail("cluster", "k range exceeds " + std::to_string(points.rows) +
                        " rows");
  }
  ElbowCurve curve;
  for (std::uint32_t k = k_min; k <= k_max; ++k) {
    curve.points.push_back({k, kmeans_fit(points, k, opts).wcss});
  }
  curve.chosen_k =
      curve.points.size() >= 3 ? select_elbow(curve.points) : k_min;
  return curve;
}

}  // namespace crashrules
