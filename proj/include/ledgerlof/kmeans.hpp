#pragma once

#include "error.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

namespace ledgerlof {

enum class KMeansInit {
  Random,       ///< k distinct rows from a seeded shuffle
  FurthestPoint ///< first row from the shuffle, then repeatedly the row farthest from all chosen
};

struct KMeansOptions
{
  int k = 7;
  std::uint64_t seed = 0;
  int max_iter = 100;
  KMeansInit init = KMeansInit::Random;
  unsigned threads = 0;
};

/// Result of Lloyd's algorithm. `assignments[i]` is the cluster of row i and
/// `wcss` the within-cluster sum of squares against `centroids`.
template <typename Scalar> struct Clustering
{
  int k = 0;
  RowMatrix<Scalar> centroids;
  std::vector<int> assignments;
  Scalar wcss = 0;
  std::vector<Scalar> wcss_history; // objective after every centroid update
  int iterations = 0;
  bool converged = false;

  std::vector<Index> cluster_sizes() const
  {
    std::vector<Index> sizes(static_cast<std::size_t>(k), 0);
    for (int a : assignments) { ++sizes[static_cast<std::size_t>(a)]; }
    return sizes;
  }
};

/// Number of distinct rows, compared exactly.
template <typename Scalar> Index count_distinct_rows(RowMatrix<Scalar> const &points)
{
  std::vector<Index> order(static_cast<std::size_t>(points.rows()));
  std::iota(order.begin(), order.end(), Index{0});
  auto const less = [&](Index a, Index b) {
    for (Index j = 0; j < points.cols(); ++j) {
      if (points(a, j) != points(b, j)) { return points(a, j) < points(b, j); }
    }
    return false;
  };
  std::sort(order.begin(), order.end(), less);
  Index distinct = order.empty() ? 0 : 1;
  for (std::size_t i = 1; i < order.size(); ++i) { distinct += less(order[i - 1], order[i]) ? 1 : 0; }
  return distinct;
}

/// Nearest centroid of `point`; ties go to the lowest index.
template <typename Scalar, typename Derived>
std::pair<int, Scalar> nearest_centroid(RowMatrix<Scalar> const &centroids, Eigen::MatrixBase<Derived> const &point)
{
  int best = 0;
  Scalar best_d2 = std::numeric_limits<Scalar>::infinity();
  for (Index c = 0; c < centroids.rows(); ++c) {
    Scalar const d2 = squared_distance(centroids.row(c), point);
    if (d2 < best_d2) {
      best_d2 = d2;
      best = static_cast<int>(c);
    }
  }
  return {best, best_d2};
}

namespace detail {

template <typename Scalar>
std::vector<Index> initial_seeds(RowMatrix<Scalar> const &points, KMeansOptions const &opt)
{
  auto const n = points.rows();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(opt.seed);
  rng.shuffle(order.begin(), order.end());

  std::vector<Index> seeds;
  auto const is_new = [&](Index r) {
    return std::none_of(seeds.begin(), seeds.end(), [&](Index s) { return points.row(s) == points.row(r); });
  };
  if (opt.init == KMeansInit::Random) {
    for (Index r : order) {
      if (static_cast<int>(seeds.size()) == opt.k) { break; }
      if (is_new(r)) { seeds.push_back(r); }
    }
  } else {
    seeds.push_back(order.front());
    std::vector<Scalar> closest(static_cast<std::size_t>(n), std::numeric_limits<Scalar>::infinity());
    while (static_cast<int>(seeds.size()) < opt.k) {
      Index far = -1;
      Scalar far_d2 = -1;
      for (Index r = 0; r < n; ++r) {
        auto &c = closest[static_cast<std::size_t>(r)];
        c = std::min(c, squared_distance(points.row(r), points.row(seeds.back())));
        if (c > far_d2) {
          far_d2 = c;
          far = r;
        }
      }
      seeds.push_back(far);
    }
  }
  return seeds;
}

template <typename Scalar>
void update_centroids(RowMatrix<Scalar> const &points, std::vector<int> &assignments, RowMatrix<Scalar> &centroids)
{
  auto const k = centroids.rows();
  auto const n = points.rows();
  while (true) {
    centroids.setZero();
    std::vector<Index> sizes(static_cast<std::size_t>(k), 0);
    for (Index i = 0; i < n; ++i) {
      auto const c = assignments[static_cast<std::size_t>(i)];
      centroids.row(c) += points.row(i);
      ++sizes[static_cast<std::size_t>(c)];
    }
    Index empty = -1;
    for (Index c = 0; c < k; ++c) {
      if (sizes[static_cast<std::size_t>(c)] == 0) {
        if (empty < 0) { empty = c; }
      } else {
        centroids.row(c) /= static_cast<Scalar>(sizes[static_cast<std::size_t>(c)]);
      }
    }
    if (empty < 0) { return; }
    // Reseed the empty cluster with the point farthest from its own centroid.
    Index far = -1;
    Scalar far_d2 = 0;
    for (Index i = 0; i < n; ++i) {
      auto const c = assignments[static_cast<std::size_t>(i)];
      if (sizes[static_cast<std::size_t>(c)] < 2) { continue; }
      Scalar const d2 = squared_distance(points.row(i), centroids.row(c));
      if (d2 > far_d2) {
        far_d2 = d2;
        far = i;
      }
    }
    if (far < 0) { throw InfeasibleError("cannot repair empty cluster: too few distinct points"); }
    assignments[static_cast<std::size_t>(far)] = static_cast<int>(empty);
  }
}

template <typename Scalar>
Scalar objective(RowMatrix<Scalar> const &points, std::vector<int> const &assignments, RowMatrix<Scalar> const &centroids)
{
  Scalar total = 0;
  for (Index i = 0; i < points.rows(); ++i) {
    total += squared_distance(points.row(i), centroids.row(assignments[static_cast<std::size_t>(i)]));
  }
  return total;
}

} // namespace detail

/// Lloyd's algorithm. Rows are seeded in the order given; callers that need
/// results independent of row order should sort rows by a stable key first
/// (the FeatureMatrix overload in clustering.hpp does this with node ids).
/// Throws InfeasibleError when k exceeds the number of distinct rows.
template <typename Scalar> Clustering<Scalar> kmeans(RowMatrix<Scalar> const &points, KMeansOptions const &opt)
{
  if (opt.k < 1) { throw InfeasibleError("k must be positive"); }
  if (opt.max_iter < 1) { throw ConfigError("max_iter must be positive"); }
  auto const distinct = count_distinct_rows(points);
  if (opt.k > distinct) {
    throw InfeasibleError("k = " + std::to_string(opt.k) + " exceeds the " + std::to_string(distinct) +
                          " distinct points");
  }
  auto const n = points.rows();

  Clustering<Scalar> result;
  result.k = opt.k;
  result.centroids.resize(opt.k, points.cols());
  auto const seeds = detail::initial_seeds(points, opt);
  for (int c = 0; c < opt.k; ++c) { result.centroids.row(c) = points.row(seeds[static_cast<std::size_t>(c)]); }

  auto &assign = result.assignments;
  assign.assign(static_cast<std::size_t>(n), 0);
  parallel_for(n, opt.threads, [&](Index begin, Index end) {
    for (Index i = begin; i < end; ++i) {
      assign[static_cast<std::size_t>(i)] = nearest_centroid(result.centroids, points.row(i)).first;
    }
  });

  std::vector<char> moved(static_cast<std::size_t>(n));
  for (int iter = 1; iter <= opt.max_iter; ++iter) {
    detail::update_centroids(points, assign, result.centroids);
    result.wcss_history.push_back(detail::objective(points, assign, result.centroids));
    result.iterations = iter;

    // Reassign, keeping the current cluster unless another is strictly closer.
    parallel_for(n, opt.threads, [&](Index begin, Index end) {
      for (Index i = begin; i < end; ++i) {
        auto &a = assign[static_cast<std::size_t>(i)];
        auto const current = squared_distance(points.row(i), result.centroids.row(a));
        auto const [best, best_d2] = nearest_centroid(result.centroids, points.row(i));
        moved[static_cast<std::size_t>(i)] = best_d2 < current ? 1 : 0;
        if (best_d2 < current) { a = best; }
      }
    });
    if (std::none_of(moved.begin(), moved.end(), [](char m) { return m != 0; })) {
      result.converged = true;
      break;
    }
    if (iter == opt.max_iter) {
      detail::update_centroids(points, assign, result.centroids);
      result.wcss_history.push_back(detail::objective(points, assign, result.centroids));
    }
  }
  result.wcss = result.wcss_history.back();
  return result;
}

/// Size-weighted Shannon entropy (nats) of each cluster's values, summed over
/// features. Every feature column is cut into `bins` equal-width bins over its
/// global range; a constant column lands in a single bin.
template <typename Scalar>
double cross_cluster_entropy(RowMatrix<Scalar> const &points, std::vector<int> const &assignments, int k, int bins = 10)
{
  auto const n = points.rows();
  if (n == 0) { return 0.0; }
  std::vector<std::size_t> counts(static_cast<std::size_t>(k) * static_cast<std::size_t>(bins));
  std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
  for (int a : assignments) { ++sizes[static_cast<std::size_t>(a)]; }

  double total = 0.0;
  for (Index j = 0; j < points.cols(); ++j) {
    std::fill(counts.begin(), counts.end(), 0);
    Scalar const lo = points.col(j).minCoeff();
    Scalar const hi = points.col(j).maxCoeff();
    for (Index i = 0; i < n; ++i) {
      int b = 0;
      if (hi > lo) {
        b = static_cast<int>(std::floor(static_cast<double>((points(i, j) - lo) / (hi - lo)) * bins));
        b = std::clamp(b, 0, bins - 1);
      }
      ++counts[static_cast<std::size_t>(assignments[static_cast<std::size_t>(i)]) * static_cast<std::size_t>(bins) +
               static_cast<std::size_t>(b)];
    }
    for (int c = 0; c < k; ++c) {
      auto const size = sizes[static_cast<std::size_t>(c)];
      if (size == 0) { continue; }
      double h = 0.0;
      for (int b = 0; b < bins; ++b) {
        auto const cnt = counts[static_cast<std::size_t>(c) * static_cast<std::size_t>(bins) + static_cast<std::size_t>(b)];
        if (cnt == 0) { continue; }
        double const p = static_cast<double>(cnt) / static_cast<double>(size);
        h -= p * std::log(p);
      }
      total += static_cast<double>(size) / static_cast<double>(n) * h;
    }
  }
  return total;
}

struct KSelection
{
  int best_k = 0;
  std::vector<std::pair<int, double>> entropies;
};

/// Runs kmeans for every k in [lo, hi] and keeps the k with the smallest
/// cross-cluster entropy (smallest k on ties). A matrix whose rows are all
/// identical has zero entropy under any partition, so no clustering is run.
template <typename Scalar>
KSelection select_k(RowMatrix<Scalar> const &points, int lo, int hi, KMeansOptions base = {})
{
  if (lo < 1 || hi < lo) { throw ConfigError("k range must satisfy 1 <= lo <= hi"); }
  KSelection sel;
  bool const degenerate = count_distinct_rows(points) == 1;
  double best = std::numeric_limits<double>::infinity();
  for (int k = lo; k <= hi; ++k) {
    double e = 0.0;
    if (!degenerate) {
      base.k = k;
      auto const c = kmeans(points, base);
      e = cross_cluster_entropy(points, c.assignments, k);
    }
    sel.entropies.emplace_back(k, e);
    if (e < best) {
      best = e;
      sel.best_k = k;
    }
  }
  return sel;
}

} // namespace ledgerlof
