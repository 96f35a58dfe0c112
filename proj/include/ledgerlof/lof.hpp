#pragma once

#include "error.hpp"
#include "knn.hpp"
#include "parallel.hpp"
#include "types.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <unordered_map>
#include <string>
#include <vector>

namespace ledgerlof {

enum class LofMode { Exact, ClusterRestricted };

std::string to_string(LofMode mode);
LofMode parse_lof_mode(std::string const &text);

struct NeighborQuery
{
  int k_neighbors = 7;
  LofMode mode = LofMode::Exact;
};

/// Local outlier factors for every row of a point matrix.
///
/// Neighborhoods use the inclusive rule: N_k(A) holds every other row within
/// k-distance(A), so ties can make it larger than k. When the reachability
/// distances from A sum to zero (A sits on k or more duplicates) lrd(A) is
/// +inf. lof(A) is then 1; a finite-lrd row with an infinite-lrd neighbor gets
/// lof = +inf.
///
/// In ClusterRestricted mode neighbors of a row are searched only among rows
/// with the same cluster assignment. Rows whose cluster has at most k members
/// are searched exactly instead and listed in `fallback_rows()`.
///
/// Identical rows are stored once with a multiplicity, so large groups of
/// duplicates cost no more than a single point.
template <typename Scalar> class LofModel
{
public:
  LofModel(RowMatrix<Scalar> const &points, NeighborQuery q, std::vector<int> const *assignments = nullptr,
           unsigned threads = 0)
      : points_(points), query_(q)
  {
    auto const n = points.rows();
    if (q.k_neighbors < 1) { throw ConfigError("k_neighbors must be positive"); }
    if (n <= q.k_neighbors) {
      throw InsufficientDataError("LOF with k = " + std::to_string(q.k_neighbors) + " needs more than " +
                                  std::to_string(q.k_neighbors) + " points, got " + std::to_string(n));
    }
    if (q.mode == LofMode::ClusterRestricted) {
      if (assignments == nullptr) { throw ConfigError("cluster-restricted LOF requires a clustering"); }
      if (static_cast<Index>(assignments->size()) != n) {
        throw ConsistencyError("clustering does not cover the feature matrix");
      }
    }
    auto const sn = static_cast<std::size_t>(n);
    home_pool_.assign(sn, 0);
    home_group_.assign(sn, 0);

    // Decide where every row searches for neighbors.
    std::vector<Index> global_rows;
    if (q.mode == LofMode::Exact) {
      global_rows.resize(sn);
      std::iota(global_rows.begin(), global_rows.end(), Index{0});
    } else {
      std::map<int, std::vector<Index>> members;
      for (Index i = 0; i < n; ++i) { members[(*assignments)[static_cast<std::size_t>(i)]].push_back(i); }
      bool any_fallback = false;
      for (auto const &[cluster, rows] : members) { any_fallback |= static_cast<Index>(rows.size()) <= q.k_neighbors; }
      if (any_fallback) {
        global_rows.resize(sn);
        std::iota(global_rows.begin(), global_rows.end(), Index{0});
        add_pool(global_rows, {});
      }
      for (auto const &[cluster, rows] : members) {
        if (static_cast<Index>(rows.size()) > q.k_neighbors) {
          add_pool(rows, rows);
        } else {
          fallback_.insert(fallback_.end(), rows.begin(), rows.end());
        }
      }
      std::sort(fallback_.begin(), fallback_.end());
      global_rows = fallback_;
    }
    if (q.mode == LofMode::Exact) {
      add_pool(global_rows, global_rows);
    } else if (!fallback_.empty()) {
      set_home(pools_.front(), 0, fallback_);
    }

    k_distance_.assign(sn, 0);
    lrd_.assign(sn, 0);
    lof_.assign(sn, 0);

    // Phase 1: k-distances and neighbor groups.
    for (std::size_t p = 0; p < pools_.size(); ++p) {
      auto &pool = *pools_[p];
      auto const groups = static_cast<Index>(pool.reps.size());
      pool.kdist.assign(pool.reps.size(), 0);
      pool.neighbors.resize(pool.reps.size());
      pool.count.assign(pool.reps.size(), 0);
      parallel_for(groups, threads, [&](Index begin, Index end) {
        for (Index g = begin; g < end; ++g) {
          if (pool.needed[static_cast<std::size_t>(g)]) { search(pool, g); }
        }
      });
      for (Index g = 0; g < groups; ++g) {
        for (Index r : pool.members[static_cast<std::size_t>(g)]) {
          if (home_pool_[static_cast<std::size_t>(r)] == p) {
            k_distance_[static_cast<std::size_t>(r)] = pool.kdist[static_cast<std::size_t>(g)];
          }
        }
      }
    }

    // Phase 2: local reachability densities.
    for (std::size_t p = 0; p < pools_.size(); ++p) {
      auto &pool = *pools_[p];
      summarize_members(pool, k_distance_, pool.kd_min, pool.kd_max, pool.kd_sum, nullptr);
      std::vector<Scalar> lrd(pool.reps.size(), 0);
      parallel_for(static_cast<Index>(pool.reps.size()), threads, [&](Index begin, Index end) {
        for (Index g = begin; g < end; ++g) {
          if (pool.needed[static_cast<std::size_t>(g)]) { lrd[static_cast<std::size_t>(g)] = group_lrd(pool, g); }
        }
      });
      assign_home(pool, p, lrd, lrd_);
    }

    // Phase 3: outlier factors.
    for (std::size_t p = 0; p < pools_.size(); ++p) {
      auto &pool = *pools_[p];
      std::vector<Scalar> unused_min, unused_max;
      summarize_members(pool, lrd_, unused_min, unused_max, pool.lrd_sum, &pool.lrd_inf);
      std::vector<Scalar> lof(pool.reps.size(), 0);
      parallel_for(static_cast<Index>(pool.reps.size()), threads, [&](Index begin, Index end) {
        for (Index g = begin; g < end; ++g) {
          if (pool.needed[static_cast<std::size_t>(g)]) { lof[static_cast<std::size_t>(g)] = group_lof(pool, g); }
        }
      });
      assign_home(pool, p, lof, lof_);
    }
  }

  LofModel(LofModel const &) = delete;
  LofModel &operator=(LofModel const &) = delete;

  Index size() const { return points_.rows(); }
  NeighborQuery const &query() const { return query_; }

  Scalar k_distance(Index a) const { return k_distance_.at(static_cast<std::size_t>(a)); }

  /// N_k(a) as rows, sorted by distance then row.
  std::vector<Index> neighbors(Index a) const
  {
    auto const &pool = *pools_[home_pool_.at(static_cast<std::size_t>(a))];
    auto const g = static_cast<std::size_t>(home_group_[static_cast<std::size_t>(a)]);
    std::vector<std::pair<Scalar, Index>> rows;
    for (Index r : pool.members[g]) {
      if (r != a) { rows.emplace_back(Scalar{0}, r); }
    }
    for (auto const &[h, d] : pool.neighbors[g]) {
      for (Index r : pool.members[static_cast<std::size_t>(h)]) { rows.emplace_back(d, r); }
    }
    std::sort(rows.begin(), rows.end());
    std::vector<Index> out;
    out.reserve(rows.size());
    for (auto const &[d, r] : rows) { out.push_back(r); }
    return out;
  }

  Scalar reachability_distance(Index a, Index b) const
  {
    if (a == b) { throw DomainError("reachability distance of a point to itself"); }
    return std::max(k_distance(b), std::sqrt(squared_distance(points_.row(a), points_.row(b))));
  }
  Scalar lrd(Index a) const { return lrd_.at(static_cast<std::size_t>(a)); }
  Scalar lof(Index a) const { return lof_.at(static_cast<std::size_t>(a)); }
  std::vector<Scalar> const &lof_scores() const { return lof_; }
  /// Rows scored exactly in ClusterRestricted mode because their cluster was too small.
  std::vector<Index> const &fallback_rows() const { return fallback_; }

private:
  // Candidate set for a neighbor search. Rows with identical values form one
  // group; the tree holds one representative row per group.
  struct Pool
  {
    std::vector<Index> reps;
    std::vector<std::vector<Index>> members;
    std::unique_ptr<KdTree<Scalar>> tree;
    std::unordered_map<Index, Index> group_of_rep;
    std::vector<char> needed; // group holds at least one row searching here

    std::vector<Scalar> kdist;
    std::vector<std::vector<std::pair<Index, Scalar>>> neighbors; // (group, distance), own group excluded
    std::vector<Index> count;                                     // |N_k| for a row of the group

    std::vector<Scalar> kd_min, kd_max, kd_sum; // over member rows
    std::vector<Scalar> lrd_sum;                // finite member lrds
    std::vector<Index> lrd_inf;                 // members with infinite lrd
  };

  static Scalar infinity() { return std::numeric_limits<Scalar>::infinity(); }

  void add_pool(std::vector<Index> rows, std::vector<Index> const &home_rows)
  {
    auto pool = std::make_unique<Pool>();
    auto const less = [&](Index a, Index b) {
      for (Index j = 0; j < points_.cols(); ++j) {
        if (points_(a, j) != points_(b, j)) { return points_(a, j) < points_(b, j); }
      }
      return a < b;
    };
    std::sort(rows.begin(), rows.end(), less);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i == 0 || points_.row(rows[i]) != points_.row(rows[i - 1])) {
        pool->group_of_rep.emplace(rows[i], static_cast<Index>(pool->reps.size()));
        pool->reps.push_back(rows[i]);
        pool->members.emplace_back();
      }
      pool->members.back().push_back(rows[i]);
    }
    pool->tree = std::make_unique<KdTree<Scalar>>(points_, pool->reps);
    pool->needed.assign(pool->reps.size(), 0);
    pools_.push_back(std::move(pool));
    set_home(pools_.back(), pools_.size() - 1, home_rows);
  }

  void set_home(std::unique_ptr<Pool> const &pool, std::size_t p, std::vector<Index> const &home_rows)
  {
    if (home_rows.empty()) { return; }
    std::vector<Index> group_of(static_cast<std::size_t>(points_.rows()), -1);
    for (std::size_t g = 0; g < pool->members.size(); ++g) {
      for (Index r : pool->members[g]) { group_of[static_cast<std::size_t>(r)] = static_cast<Index>(g); }
    }
    for (Index r : home_rows) {
      auto const g = group_of[static_cast<std::size_t>(r)];
      home_pool_[static_cast<std::size_t>(r)] = p;
      home_group_[static_cast<std::size_t>(r)] = g;
      pool->needed[static_cast<std::size_t>(g)] = 1;
    }
  }

  void search(Pool &pool, Index g)
  {
    auto const sg = static_cast<std::size_t>(g);
    auto const k = static_cast<Index>(query_.k_neighbors);
    auto const row = points_.row(pool.reps[sg]);
    auto const self = static_cast<Index>(pool.members[sg].size()) - 1;
    Scalar kd2 = 0;
    if (self < k) {
      // Every group holds at least one row, so the k nearest groups suffice.
      Index seen = self;
      for (auto const &[d2, rep] : pool.tree->knn(row, k, pool.reps[sg])) {
        seen += static_cast<Index>(group_size(pool, rep));
        if (seen >= k) {
          kd2 = d2;
          break;
        }
      }
    }
    pool.kdist[sg] = std::sqrt(kd2);
    Index count = self;
    for (auto const &[d2, rep] : pool.tree->within(row, kd2, pool.reps[sg])) {
      auto const h = group_index(pool, rep);
      pool.neighbors[sg].emplace_back(h, std::sqrt(d2));
      count += static_cast<Index>(pool.members[static_cast<std::size_t>(h)].size());
    }
    pool.count[sg] = count;
  }

  static Index group_index(Pool const &pool, Index rep) { return pool.group_of_rep.at(rep); }

  void summarize_members(Pool &pool, std::vector<Scalar> const &row_values, std::vector<Scalar> &mins,
                         std::vector<Scalar> &maxs, std::vector<Scalar> &sums, std::vector<Index> *infs)
  {
    auto const groups = pool.reps.size();
    mins.assign(groups, 0);
    maxs.assign(groups, 0);
    sums.assign(groups, 0);
    if (infs != nullptr) { infs->assign(groups, 0); }
    for (std::size_t g = 0; g < groups; ++g) {
      bool first = true;
      for (Index r : pool.members[g]) {
        Scalar const v = row_values[static_cast<std::size_t>(r)];
        if (infs != nullptr && std::isinf(v)) {
          ++(*infs)[g];
          continue;
        }
        mins[g] = first ? v : std::min(mins[g], v);
        maxs[g] = first ? v : std::max(maxs[g], v);
        sums[g] += v;
        first = false;
      }
    }
  }

  // Sum over the rows B of group h of max(k-distance(B), d).
  Scalar reach_sum(Pool const &pool, std::size_t h, Scalar d) const
  {
    if (pool.kd_min[h] == pool.kd_max[h]) {
      return static_cast<Scalar>(pool.members[h].size()) * std::max(pool.kd_min[h], d);
    }
    Scalar sum = 0;
    for (Index r : pool.members[h]) { sum += std::max(k_distance_[static_cast<std::size_t>(r)], d); }
    return sum;
  }

  Scalar group_lrd(Pool const &pool, Index g) const
  {
    auto const sg = static_cast<std::size_t>(g);
    // Own duplicates sit at distance 0, so each contributes its k-distance;
    // the searching row itself has the group's k-distance.
    Scalar sum = pool.kd_sum[sg] - pool.kdist[sg];
    for (auto const &[h, d] : pool.neighbors[sg]) { sum += reach_sum(pool, static_cast<std::size_t>(h), d); }
    return sum > 0 ? static_cast<Scalar>(pool.count[sg]) / sum : infinity();
  }

  Scalar group_lof(Pool const &pool, Index g) const
  {
    auto const sg = static_cast<std::size_t>(g);
    Scalar const own = home_value(pool, g, lrd_);
    if (std::isinf(own)) { return Scalar{1}; }
    Scalar sum = pool.lrd_sum[sg] - own;
    Index inf = pool.lrd_inf[sg];
    for (auto const &[h, d] : pool.neighbors[sg]) {
      sum += pool.lrd_sum[static_cast<std::size_t>(h)];
      inf += pool.lrd_inf[static_cast<std::size_t>(h)];
    }
    if (inf > 0) { return infinity(); }
    return sum / static_cast<Scalar>(pool.count[sg]) / own;
  }

  // Value of a row that searches in this pool and belongs to group g.
  Scalar home_value(Pool const &pool, Index g, std::vector<Scalar> const &row_values) const
  {
    for (Index r : pool.members[static_cast<std::size_t>(g)]) {
      if (pools_[home_pool_[static_cast<std::size_t>(r)]].get() == &pool) { return row_values[static_cast<std::size_t>(r)]; }
    }
    return Scalar{0};
  }

  void assign_home(Pool const &pool, std::size_t p, std::vector<Scalar> const &group_values, std::vector<Scalar> &row_values)
  {
    for (std::size_t g = 0; g < pool.reps.size(); ++g) {
      for (Index r : pool.members[g]) {
        if (home_pool_[static_cast<std::size_t>(r)] == p) { row_values[static_cast<std::size_t>(r)] = group_values[g]; }
      }
    }
  }

  static std::size_t group_size(Pool const &pool, Index rep) { return pool.members[static_cast<std::size_t>(group_index(pool, rep))].size(); }

  RowMatrix<Scalar> points_; // the kd-trees point into this copy
  NeighborQuery query_;
  std::vector<std::unique_ptr<Pool>> pools_;
  std::vector<std::size_t> home_pool_;
  std::vector<Index> home_group_;
  std::vector<Scalar> k_distance_;
  std::vector<Scalar> lrd_;
  std::vector<Scalar> lof_;
  std::vector<Index> fallback_;
};

/// lof / max lof. When the maximum is infinite, infinite scores map to 1 and
/// all others to 0.
template <typename Scalar> std::vector<Scalar> relative_lof(std::vector<Scalar> const &lof)
{
  std::vector<Scalar> out(lof.size(), Scalar{0});
  if (lof.empty()) { return out; }
  Scalar const top = *std::max_element(lof.begin(), lof.end());
  for (std::size_t i = 0; i < lof.size(); ++i) {
    if (std::isinf(top)) {
      out[i] = std::isinf(lof[i]) ? Scalar{1} : Scalar{0};
    } else {
      out[i] = top > 0 ? lof[i] / top : Scalar{0};
    }
  }
  return out;
}

} // namespace ledgerlof
