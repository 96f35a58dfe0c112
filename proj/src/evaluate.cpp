#include "ledgerlof/evaluate.hpp"

#include "ledgerlof/error.hpp"
#include "ledgerlof/tsv.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>
#include <unordered_set>

namespace ledgerlof {

CentroidRatio centroid_ratio(std::vector<LofResult> const &results, Clustering<double> const &c,
                             FeatureMatrix const &m, Index top_n)
{
  if (top_n < 1) { throw ConfigError("top_n must be positive"); }
  if (top_n > static_cast<Index>(results.size())) {
    throw InsufficientDataError("top_n = " + std::to_string(top_n) + " exceeds the " +
                                std::to_string(results.size()) + " scored nodes");
  }
  std::vector<double> spread(static_cast<std::size_t>(c.k), 0.0);
  for (Index i = 0; i < m.rows(); ++i) {
    auto const k = static_cast<std::size_t>(c.assignments[static_cast<std::size_t>(i)]);
    spread[k] = std::max(spread[k], std::sqrt(squared_distance(m.values.row(i), c.centroids.row(static_cast<Index>(k)))));
  }
  CentroidRatio out;
  double sum = 0;
  for (Index t = 0; t < top_n; ++t) {
    auto const id = results[static_cast<std::size_t>(t)].node_id;
    auto const row = m.row_of(id);
    auto const k = c.assignments[static_cast<std::size_t>(row)];
    double const max_d = spread[static_cast<std::size_t>(k)];
    if (max_d == 0.0) {
      sum += 1.0;
      out.zero_spread_outliers.push_back(id);
    } else {
      sum += std::sqrt(squared_distance(m.values.row(row), c.centroids.row(k))) / max_d;
    }
  }
  out.ratio = sum / static_cast<double>(top_n);
  return out;
}

double dual_evaluation_metric(double a1, double a2) { return (a1 + a2) / 2.0; }

namespace {

std::vector<NodeId> head(std::vector<NodeId> const &ranked, Index n)
{
  auto const count = std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(std::max<Index>(n, 0)));
  return {ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(count)};
}

// Share of `derived` found among the |derived| best entries of `ranked`.
double overlap(std::vector<NodeId> const &derived, std::vector<NodeId> const &ranked)
{
  auto const top = head(ranked, static_cast<Index>(derived.size()));
  std::unordered_set<NodeId> const best(top.begin(), top.end());
  auto const hits = std::count_if(derived.begin(), derived.end(), [&](NodeId id) { return best.count(id) > 0; });
  return static_cast<double>(hits) / static_cast<double>(derived.size());
}

std::vector<NodeId> ids_of(std::vector<LofResult> const &results)
{
  std::vector<NodeId> ids;
  ids.reserve(results.size());
  for (auto const &r : results) { ids.push_back(r.node_id); }
  return ids;
}

} // namespace

DualSets dual_metric(std::vector<NodeId> const &ranked_a, std::vector<NodeId> const &ranked_b,
                     std::vector<std::pair<NodeId, NodeId>> const &incidence, Index n, Index m)
{
  DualSets d;
  d.top_user_outliers = head(ranked_a, n);
  d.top_tx_outliers = head(ranked_b, m);
  std::unordered_set<NodeId> const top_a(d.top_user_outliers.begin(), d.top_user_outliers.end());
  std::unordered_set<NodeId> const top_b(d.top_tx_outliers.begin(), d.top_tx_outliers.end());
  std::set<NodeId> x, y;
  for (auto const &[a, b] : incidence) {
    if (top_a.count(a) > 0) { x.insert(b); }
    if (top_b.count(b) > 0) { y.insert(a); }
  }
  if (x.empty()) { throw UndefinedMetricError("X_N is empty: the top user outliers take part in no transaction"); }
  if (y.empty()) { throw UndefinedMetricError("Y_M is empty: the top transaction outliers have no parties"); }
  d.x_n.assign(x.begin(), x.end());
  d.y_m.assign(y.begin(), y.end());
  d.a1 = overlap(d.x_n, ranked_b);
  d.a2 = overlap(d.y_m, ranked_a);
  d.m_de = dual_evaluation_metric(d.a1, d.a2);
  return d;
}

DualSets dual_metric(std::vector<LofResult> const &user_results, std::vector<LofResult> const &tx_results,
                     Ledger const &ledger, Index n, Index m)
{
  std::vector<std::pair<NodeId, NodeId>> incidence;
  for (auto const &rec : ledger) {
    for (auto const &in : rec.inputs) { incidence.emplace_back(in.user_id, rec.tx_id); }
    for (auto const &out : rec.outputs) { incidence.emplace_back(out.user_id, rec.tx_id); }
  }
  return dual_metric(ids_of(user_results), ids_of(tx_results), incidence, n, m);
}

std::vector<LabelHit> label_check(std::vector<LofResult> const &results, std::vector<NodeId> const &labels,
                                  Index top_n)
{
  std::unordered_set<NodeId> const wanted(labels.begin(), labels.end());
  std::vector<LabelHit> hits;
  auto const limit = std::min<std::size_t>(results.size(), static_cast<std::size_t>(std::max<Index>(top_n, 0)));
  for (std::size_t i = 0; i < limit; ++i) {
    if (wanted.count(results[i].node_id) > 0) { hits.push_back({results[i].node_id, results[i].rank}); }
  }
  return hits;
}

Labels read_labels(std::filesystem::path const &path)
{
  Labels labels;
  auto const lines = tsv::read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    if (line.empty()) { continue; }
    if (line.starts_with("user:")) {
      labels.users.push_back(tsv::parse_uint(line.substr(5), i + 1));
    } else if (line.starts_with("tx:")) {
      labels.txs.push_back(tsv::parse_uint(line.substr(3), i + 1));
    } else {
      throw ParseError(i + 1, "label must start with user: or tx:");
    }
  }
  return labels;
}

void write_labels(std::filesystem::path const &path, Labels const &labels)
{
  tsv::write_atomically(path, [&](std::ostream &out) {
    for (auto id : labels.users) { out << "user:" << id << '\n'; }
    for (auto id : labels.txs) { out << "tx:" << id << '\n'; }
  });
}

} // namespace ledgerlof
