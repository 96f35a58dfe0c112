#pragma once

#include "clustering.hpp"
#include "features.hpp"
#include "ledger.hpp"
#include "scoring.hpp"

#include <filesystem>
#include <utility>
#include <vector>

namespace ledgerlof {

struct CentroidRatio
{
  double ratio = 0;
  /// Outliers whose cluster has zero spread; each contributed a ratio of 1.
  std::vector<NodeId> zero_spread_outliers;
};

/// Mean over the top_n results of d(outlier, its centroid) divided by the
/// largest distance from that centroid to any of its members.
CentroidRatio centroid_ratio(std::vector<LofResult> const &results, Clustering<double> const &c,
                             FeatureMatrix const &m, Index top_n);

struct DualSets
{
  std::vector<NodeId> top_user_outliers;
  std::vector<NodeId> top_tx_outliers;
  std::vector<NodeId> x_n; // transactions touched by the top user outliers, ascending
  std::vector<NodeId> y_m; // users party to the top transaction outliers, ascending
  double a1 = 0;
  double a2 = 0;
  double m_de = 0;
};

/// (A1 + A2) / 2.
double dual_evaluation_metric(double a1, double a2);

/// Dual metric over two ranked id lists linked by an incidence relation of
/// (a, b) pairs. The top n of `ranked_a` select X (the b ids incident to them)
/// and A1 is the share of X found among the |X| best-ranked b ids; A2 mirrors
/// this from the b side with the top m. In the returned sets `a` plays the
/// user role and `b` the transaction role. Throws UndefinedMetricError when
/// either derived set is empty.
DualSets dual_metric(std::vector<NodeId> const &ranked_a, std::vector<NodeId> const &ranked_b,
                     std::vector<std::pair<NodeId, NodeId>> const &incidence, Index n, Index m);

/// Ledger form: a user is incident to every transaction where it appears as an
/// input or output party.
DualSets dual_metric(std::vector<LofResult> const &user_results, std::vector<LofResult> const &tx_results,
                     Ledger const &ledger, Index n = 100, Index m = 100);

struct LabelHit
{
  NodeId label = 0;
  Index rank = 0;
};

/// Labels found among the first top_n results, in rank order.
std::vector<LabelHit> label_check(std::vector<LofResult> const &results, std::vector<NodeId> const &labels,
                                  Index top_n);

/// Planted or known node ids, split by graph kind. On disk one id per line
/// prefixed with `user:` or `tx:`.
struct Labels
{
  std::vector<NodeId> users;
  std::vector<NodeId> txs;
};

Labels read_labels(std::filesystem::path const &path);
void write_labels(std::filesystem::path const &path, Labels const &labels);

} // namespace ledgerlof
