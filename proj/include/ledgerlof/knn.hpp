#pragma once

#include "types.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <utility>
#include <vector>

namespace ledgerlof {

/// A (squared distance, row) pair. Ordered by distance, then row.
template <typename Scalar> using Neighbor = std::pair<Scalar, Index>;

/// kd-tree over a subset of the rows of a matrix. The matrix must outlive the
/// tree. Distances are `squared_distance`, so results agree bit for bit with
/// a linear scan.
template <typename Scalar> class KdTree
{
public:
  explicit KdTree(RowMatrix<Scalar> const &points, int leaf_size = 16) : KdTree(points, all_rows(points), leaf_size) {}

  KdTree(RowMatrix<Scalar> const &points, std::vector<Index> rows, int leaf_size = 16)
      : points_(&points), rows_(std::move(rows)), leaf_size_(std::max(1, leaf_size))
  {
    if (!rows_.empty()) { build(0, static_cast<Index>(rows_.size())); }
  }

  Index size() const { return static_cast<Index>(rows_.size()); }

  /// The k nearest rows to `query`, skipping row `exclude` (pass -1 to keep
  /// all). Sorted by (distance, row). Fewer than k when the tree is small.
  template <typename Derived>
  std::vector<Neighbor<Scalar>> knn(Eigen::MatrixBase<Derived> const &query, Index k, Index exclude = -1) const
  {
    std::priority_queue<Neighbor<Scalar>> heap;
    if (!nodes_.empty() && k > 0) { knn_search(0, query, k, exclude, heap); }
    std::vector<Neighbor<Scalar>> out(heap.size());
    for (auto i = out.size(); i > 0; --i) {
      out[i - 1] = heap.top();
      heap.pop();
    }
    return out;
  }

  /// Every row with squared distance <= r2, skipping `exclude`. Sorted by
  /// (distance, row).
  template <typename Derived>
  std::vector<Neighbor<Scalar>> within(Eigen::MatrixBase<Derived> const &query, Scalar r2, Index exclude = -1) const
  {
    std::vector<Neighbor<Scalar>> out;
    if (!nodes_.empty()) { radius_search(0, query, r2, exclude, out); }
    std::sort(out.begin(), out.end());
    return out;
  }

private:
  struct Node
  {
    Index begin, end;
    Index split_dim = -1; // -1 marks a leaf
    Scalar split = 0;
    Index left = -1, right = -1;
  };

  static std::vector<Index> all_rows(RowMatrix<Scalar> const &points)
  {
    std::vector<Index> rows(static_cast<std::size_t>(points.rows()));
    std::iota(rows.begin(), rows.end(), Index{0});
    return rows;
  }

  Index build(Index begin, Index end)
  {
    auto const id = static_cast<Index>(nodes_.size());
    nodes_.push_back(Node{begin, end});
    if (end - begin <= leaf_size_) { return id; }

    auto const &p = *points_;
    Index dim = 0;
    Scalar spread = -1;
    for (Index j = 0; j < p.cols(); ++j) {
      Scalar lo = p(rows_[static_cast<std::size_t>(begin)], j), hi = lo;
      for (Index i = begin; i < end; ++i) {
        Scalar const v = p(rows_[static_cast<std::size_t>(i)], j);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (hi - lo > spread) {
        spread = hi - lo;
        dim = j;
      }
    }
    if (spread <= 0) { return id; } // all coincident: keep as a leaf

    Index const mid = begin + (end - begin) / 2;
    auto const first = rows_.begin() + begin;
    std::nth_element(first, rows_.begin() + mid, rows_.begin() + end,
                     [&](Index a, Index b) { return p(a, dim) < p(b, dim); });
    Scalar const split = p(rows_[static_cast<std::size_t>(mid)], dim);

    nodes_[static_cast<std::size_t>(id)].split_dim = dim;
    nodes_[static_cast<std::size_t>(id)].split = split;
    Index const left = build(begin, mid);
    Index const right = build(mid, end);
    nodes_[static_cast<std::size_t>(id)].left = left;
    nodes_[static_cast<std::size_t>(id)].right = right;
    return id;
  }

  // Rows left of `mid` are <= split and rows right of it are >= split, so a
  // query on one side is at least |q - split| away from the other side.
  template <typename Derived>
  void knn_search(Index id, Eigen::MatrixBase<Derived> const &q, Index k, Index exclude,
                  std::priority_queue<Neighbor<Scalar>> &heap) const
  {
    auto const &node = nodes_[static_cast<std::size_t>(id)];
    if (node.split_dim < 0) {
      for (Index i = node.begin; i < node.end; ++i) {
        Index const r = rows_[static_cast<std::size_t>(i)];
        if (r == exclude) { continue; }
        Neighbor<Scalar> const cand{squared_distance(points_->row(r), q), r};
        if (static_cast<Index>(heap.size()) < k) {
          heap.push(cand);
        } else if (cand < heap.top()) {
          heap.pop();
          heap.push(cand);
        }
      }
      return;
    }
    Scalar const diff = q(node.split_dim) - node.split;
    Index const near = diff < 0 ? node.left : node.right;
    Index const far = diff < 0 ? node.right : node.left;
    knn_search(near, q, k, exclude, heap);
    if (static_cast<Index>(heap.size()) < k || diff * diff <= heap.top().first) { knn_search(far, q, k, exclude, heap); }
  }

  template <typename Derived>
  void radius_search(Index id, Eigen::MatrixBase<Derived> const &q, Scalar r2, Index exclude,
                     std::vector<Neighbor<Scalar>> &out) const
  {
    auto const &node = nodes_[static_cast<std::size_t>(id)];
    if (node.split_dim < 0) {
      for (Index i = node.begin; i < node.end; ++i) {
        Index const r = rows_[static_cast<std::size_t>(i)];
        if (r == exclude) { continue; }
        Scalar const d2 = squared_distance(points_->row(r), q);
        if (d2 <= r2) { out.emplace_back(d2, r); }
      }
      return;
    }
    Scalar const diff = q(node.split_dim) - node.split;
    Index const near = diff < 0 ? node.left : node.right;
    Index const far = diff < 0 ? node.right : node.left;
    radius_search(near, q, r2, exclude, out);
    if (diff * diff <= r2) { radius_search(far, q, r2, exclude, out); }
  }

  RowMatrix<Scalar> const *points_;
  std::vector<Index> rows_;
  Index leaf_size_;
  std::vector<Node> nodes_;
};

} // namespace ledgerlof
