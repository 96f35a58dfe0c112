#include "ledgerlof/clustering.hpp"

#include "ledgerlof/error.hpp"
#include "ledgerlof/tsv.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <unordered_map>

namespace ledgerlof {

namespace {

std::vector<Index> order_by_node_id(FeatureMatrix const &m)
{
  std::vector<Index> order(static_cast<std::size_t>(m.rows()));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    return m.node_ids[static_cast<std::size_t>(a)] < m.node_ids[static_cast<std::size_t>(b)];
  });
  return order;
}

RowMatrixXd permuted(FeatureMatrix const &m, std::vector<Index> const &order)
{
  RowMatrixXd out(m.rows(), m.cols());
  for (std::size_t i = 0; i < order.size(); ++i) { out.row(static_cast<Index>(i)) = m.values.row(order[i]); }
  return out;
}

} // namespace

Clustering<double> kmeans(FeatureMatrix const &m, KMeansOptions const &opt)
{
  auto const order = order_by_node_id(m);
  auto c = kmeans(permuted(m, order), opt);
  std::vector<int> assignments(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) { assignments[static_cast<std::size_t>(order[i])] = c.assignments[i]; }
  c.assignments = std::move(assignments);
  return c;
}

KSelection select_k(FeatureMatrix const &m, int lo, int hi, KMeansOptions const &base)
{
  return select_k(permuted(m, order_by_node_id(m)), lo, hi, base);
}

std::pair<int, double> assign(FeatureMatrix const &m, Clustering<double> const &c, NodeId node)
{
  auto const [cluster, d2] = nearest_centroid(c.centroids, m.values.row(m.row_of(node)));
  return {cluster, std::sqrt(d2)};
}

void write_assignments(std::filesystem::path const &path, FeatureMatrix const &m, Clustering<double> const &c)
{
  tsv::write_atomically(path, [&](std::ostream &out) {
    out << "node_id\tcluster\tdistance\n";
    for (Index i = 0; i < m.rows(); ++i) {
      auto const cluster = c.assignments[static_cast<std::size_t>(i)];
      double const d = std::sqrt(squared_distance(m.values.row(i), c.centroids.row(cluster)));
      out << m.node_ids[static_cast<std::size_t>(i)] << '\t' << cluster << '\t' << tsv::format_double(d) << '\n';
    }
  });
}

void write_centroids(std::filesystem::path const &path, FeatureMatrix const &m, Clustering<double> const &c)
{
  auto const sizes = c.cluster_sizes();
  tsv::write_atomically(path, [&](std::ostream &out) {
    out << "cluster\tsize";
    for (auto const &name : m.feature_names) { out << '\t' << name; }
    out << '\n';
    for (Index k = 0; k < c.centroids.rows(); ++k) {
      out << k << '\t' << sizes[static_cast<std::size_t>(k)];
      for (Index j = 0; j < c.centroids.cols(); ++j) { out << '\t' << tsv::format_double(c.centroids(k, j)); }
      out << '\n';
    }
  });
}

Clustering<double> read_clustering(std::filesystem::path const &assignments, std::filesystem::path const &centroids,
                                   FeatureMatrix const &m)
{
  Clustering<double> c;
  auto const clines = tsv::read_lines(centroids);
  if (clines.empty()) { throw ParseError(1, "centroid file is empty"); }
  auto const cheader = tsv::split(clines[0]);
  if (cheader.size() != static_cast<std::size_t>(m.cols()) + 2 || cheader[0] != "cluster") {
    throw ParseError(1, "centroid header does not match the feature matrix");
  }
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 1; i < clines.size(); ++i) {
    if (clines[i].empty()) { continue; }
    auto const f = tsv::split(clines[i]);
    if (f.size() != cheader.size()) { throw ParseError(i + 1, "wrong number of columns"); }
    if (tsv::parse_uint(f[0], i + 1) != rows.size()) { throw ParseError(i + 1, "clusters must be listed as 0, 1, ..."); }
    std::vector<double> row;
    for (std::size_t j = 2; j < f.size(); ++j) { row.push_back(tsv::parse_double(f[j], i + 1)); }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) { throw ParseError(1, "centroid file has no clusters"); }
  c.k = static_cast<int>(rows.size());
  c.centroids.resize(c.k, m.cols());
  for (Index k = 0; k < c.k; ++k) {
    for (Index j = 0; j < m.cols(); ++j) {
      c.centroids(k, j) = rows[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
    }
  }

  std::unordered_map<NodeId, Index> row_of;
  for (Index i = 0; i < m.rows(); ++i) { row_of.emplace(m.node_ids[static_cast<std::size_t>(i)], i); }
  c.assignments.assign(static_cast<std::size_t>(m.rows()), -1);
  auto const alines = tsv::read_lines(assignments);
  if (alines.empty() || alines[0] != "node_id\tcluster\tdistance") {
    throw ParseError(1, "assignment header must be node_id, cluster, distance");
  }
  for (std::size_t i = 1; i < alines.size(); ++i) {
    if (alines[i].empty()) { continue; }
    auto const f = tsv::split(alines[i]);
    if (f.size() != 3) { throw ParseError(i + 1, "wrong number of columns"); }
    auto const node = tsv::parse_uint(f[0], i + 1);
    auto const cluster = tsv::parse_uint(f[1], i + 1);
    if (cluster >= static_cast<std::uint64_t>(c.k)) { throw ParseError(i + 1, "cluster index out of range"); }
    auto const it = row_of.find(node);
    if (it == row_of.end()) { throw ConsistencyError("node " + std::to_string(node) + " is not in the feature matrix"); }
    c.assignments[static_cast<std::size_t>(it->second)] = static_cast<int>(cluster);
  }
  for (Index i = 0; i < m.rows(); ++i) {
    if (c.assignments[static_cast<std::size_t>(i)] < 0) {
      throw ConsistencyError("node " + std::to_string(m.node_ids[static_cast<std::size_t>(i)]) +
                             " has no cluster assignment");
    }
    c.wcss += squared_distance(m.values.row(i), c.centroids.row(c.assignments[static_cast<std::size_t>(i)]));
  }
  c.wcss_history.push_back(c.wcss);
  c.converged = true;
  return c;
}

} // namespace ledgerlof
