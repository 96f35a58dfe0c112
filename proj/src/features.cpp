#include "ledgerlof/features.hpp"

#include "ledgerlof/error.hpp"
#include "ledgerlof/parallel.hpp"
#include "ledgerlof/tsv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

namespace ledgerlof {

Index FeatureMatrix::row_of(NodeId id) const
{
  auto const it = std::find(node_ids.begin(), node_ids.end(), id);
  if (it == node_ids.end()) { throw LookupError("node " + std::to_string(id) + " not in feature matrix"); }
  return static_cast<Index>(it - node_ids.begin());
}

Index FeatureMatrix::column_of(std::string const &name) const
{
  auto const it = std::find(feature_names.begin(), feature_names.end(), name);
  if (it == feature_names.end()) { throw LookupError("no feature named " + name); }
  return static_cast<Index>(it - feature_names.begin());
}

std::vector<std::string> const &user_feature_names()
{
  static std::vector<std::string> const names{"in_degree",      "out_degree",         "mean_in_value",
                                              "mean_out_value", "mean_time_interval", "clustering_coefficient"};
  return names;
}

std::vector<std::string> const &tx_feature_names()
{
  static std::vector<std::string> const names{"in_degree", "out_degree", "total_value"};
  return names;
}

namespace {

double mean_edge_value(NodeGraph const &g, std::vector<std::size_t> const &edges)
{
  if (edges.empty()) { return 0.0; }
  double sum = 0;
  for (auto e : edges) { sum += g.edges[e].value; }
  return sum / static_cast<double>(edges.size());
}

double clustering_coefficient(Adjacency const &adj, Index v, std::vector<char> &mark)
{
  auto const &nbrs = adj.undirected[static_cast<std::size_t>(v)];
  auto const d = nbrs.size();
  if (d < 2) { return 0.0; }
  for (auto u : nbrs) { mark[static_cast<std::size_t>(u)] = 1; }
  std::size_t links = 0;
  for (auto u : nbrs) {
    for (auto w : adj.undirected[static_cast<std::size_t>(u)]) { links += mark[static_cast<std::size_t>(w)]; }
  }
  for (auto u : nbrs) { mark[static_cast<std::size_t>(u)] = 0; }
  // each neighbour pair was counted from both ends
  return static_cast<double>(links) / static_cast<double>(d * (d - 1));
}

} // namespace

FeatureMatrix extract_user_features(NodeGraph const &g, unsigned threads)
{
  if (g.kind != GraphKind::User) { throw DomainError("user features need a user graph"); }
  Adjacency const adj(g);
  FeatureMatrix m;
  m.graph_kind = GraphKind::User;
  m.feature_names = user_feature_names();
  m.node_ids = g.nodes;
  m.values.setZero(g.node_count(), 6);

  parallel_for(g.node_count(), threads, [&](Index begin, Index end) {
    std::vector<char> mark(g.nodes.size(), 0);
    std::vector<std::int64_t> stamps;
    for (Index v = begin; v < end; ++v) {
      auto const &in = adj.in_edges[static_cast<std::size_t>(v)];
      auto const &out = adj.out_edges[static_cast<std::size_t>(v)];
      stamps.clear();
      for (auto e : in) { stamps.push_back(g.edges[e].timestamp); }
      for (auto e : out) {
        if (g.edges[e].src != g.edges[e].dst) { stamps.push_back(g.edges[e].timestamp); }
      }
      double interval = 0.0;
      if (stamps.size() >= 2) {
        auto const [lo, hi] = std::minmax_element(stamps.begin(), stamps.end());
        interval = static_cast<double>(*hi - *lo) / static_cast<double>(stamps.size() - 1);
      }
      m.values(v, 0) = static_cast<double>(in.size());
      m.values(v, 1) = static_cast<double>(out.size());
      m.values(v, 2) = mean_edge_value(g, in);
      m.values(v, 3) = mean_edge_value(g, out);
      m.values(v, 4) = interval;
      m.values(v, 5) = clustering_coefficient(adj, v, mark);
    }
  });
  return m;
}

FeatureMatrix extract_tx_features(NodeGraph const &g, Ledger const &records, unsigned threads)
{
  if (g.kind != GraphKind::Transaction) { throw DomainError("transaction features need a transaction graph"); }
  std::unordered_map<std::uint64_t, std::size_t> by_id;
  by_id.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) { by_id.emplace(records[i].tx_id, i); }

  Adjacency const adj(g);
  FeatureMatrix m;
  m.graph_kind = GraphKind::Transaction;
  m.feature_names = tx_feature_names();
  m.node_ids = g.nodes;
  m.values.setZero(g.node_count(), 3);
  for (Index v = 0; v < g.node_count(); ++v) {
    if (!by_id.contains(g.nodes[static_cast<std::size_t>(v)])) {
      throw ConsistencyError("tx " + std::to_string(g.nodes[static_cast<std::size_t>(v)]) + " missing from ledger");
    }
  }
  parallel_for(g.node_count(), threads, [&](Index begin, Index end) {
    for (Index v = begin; v < end; ++v) {
      auto const &rec = records[by_id.at(g.nodes[static_cast<std::size_t>(v)])];
      m.values(v, 0) = static_cast<double>(adj.in_edges[static_cast<std::size_t>(v)].size());
      m.values(v, 1) = static_cast<double>(adj.out_edges[static_cast<std::size_t>(v)].size());
      m.values(v, 2) = rec.total_output().coins();
    }
  });
  return m;
}

FeatureMatrix extract_extended_features(NodeGraph const &g, Ledger const &records)
{
  Adjacency const adj(g);
  FeatureMatrix m;
  m.graph_kind = g.kind;
  m.node_ids = g.nodes;
  auto const n = g.node_count();

  auto unique_count = [&](std::vector<std::size_t> const &edges, bool use_src) {
    std::unordered_set<NodeId> ids;
    for (auto e : edges) { ids.insert(use_src ? g.edges[e].src : g.edges[e].dst); }
    return static_cast<double>(ids.size());
  };

  if (g.kind == GraphKind::User) {
    m.feature_names = {"unique_in_degree", "unique_out_degree", "balance", "creation_date", "active_duration"};
    m.values.setZero(n, 5);
    std::vector<double> balance(g.nodes.size(), 0.0);
    std::vector<std::int64_t> first(g.nodes.size(), std::numeric_limits<std::int64_t>::max());
    std::vector<std::int64_t> last(g.nodes.size(), std::numeric_limits<std::int64_t>::min());
    auto touch = [&](NodeId user, std::int64_t ts) {
      auto const r = static_cast<std::size_t>(g.index_of(user));
      first[r] = std::min(first[r], ts);
      last[r] = std::max(last[r], ts);
      return r;
    };
    for (auto const &rec : records) {
      for (auto const &in : rec.inputs) { balance[touch(in.user_id, rec.timestamp)] -= in.value.coins(); }
      for (auto const &out : rec.outputs) { balance[touch(out.user_id, rec.timestamp)] += out.value.coins(); }
    }
    for (Index v = 0; v < n; ++v) {
      auto const r = static_cast<std::size_t>(v);
      m.values(v, 0) = unique_count(adj.in_edges[r], true);
      m.values(v, 1) = unique_count(adj.out_edges[r], false);
      m.values(v, 2) = balance[r];
      m.values(v, 3) = static_cast<double>(first[r]);
      m.values(v, 4) = static_cast<double>(last[r] - first[r]);
    }
  } else {
    m.feature_names = {"unique_in_degree", "unique_out_degree", "party_count", "balance", "creation_date",
                       "active_duration"};
    m.values.setZero(n, 6);
    std::unordered_map<std::uint64_t, LedgerRecord const *> by_id;
    for (auto const &rec : records) { by_id.emplace(rec.tx_id, &rec); }
    for (Index v = 0; v < n; ++v) {
      auto const r = static_cast<std::size_t>(v);
      auto const it = by_id.find(g.nodes[r]);
      if (it == by_id.end()) { throw ConsistencyError("tx " + std::to_string(g.nodes[r]) + " missing from ledger"); }
      auto const &rec = *it->second;
      std::unordered_set<NodeId> parties;
      for (auto const &in : rec.inputs) { parties.insert(in.user_id); }
      for (auto const &out : rec.outputs) { parties.insert(out.user_id); }
      double in_value = 0, out_value = 0;
      std::int64_t lo = rec.timestamp, hi = rec.timestamp;
      for (auto e : adj.in_edges[r]) {
        in_value += g.edges[e].value;
        lo = std::min(lo, g.edges[e].timestamp);
        hi = std::max(hi, g.edges[e].timestamp);
      }
      for (auto e : adj.out_edges[r]) {
        out_value += g.edges[e].value;
        lo = std::min(lo, g.edges[e].timestamp);
        hi = std::max(hi, g.edges[e].timestamp);
      }
      m.values(v, 0) = unique_count(adj.in_edges[r], true);
      m.values(v, 1) = unique_count(adj.out_edges[r], false);
      m.values(v, 2) = static_cast<double>(parties.size());
      m.values(v, 3) = in_value - out_value;
      m.values(v, 4) = static_cast<double>(lo);
      m.values(v, 5) = static_cast<double>(hi - lo);
    }
  }
  return m;
}

FeatureMatrix normalize(FeatureMatrix const &raw)
{
  FeatureMatrix m = raw;
  auto const n = m.rows();
  m.values = raw.values.unaryExpr([](double x) { return x >= 0 ? std::log1p(x) : -std::log1p(-x); });
  for (Index j = 0; j < m.cols(); ++j) {
    auto col = m.values.col(j);
    if (n == 0) { continue; }
    if (col.maxCoeff() == col.minCoeff()) {
      col.setZero();
      continue;
    }
    double const mean = col.mean();
    col.array() -= mean;
    double const sd = std::sqrt(col.squaredNorm() / static_cast<double>(n));
    if (sd == 0.0) {
      col.setZero();
    } else {
      col /= sd;
    }
  }
  return m;
}

void write_features(std::ostream &out, FeatureMatrix const &m)
{
  out << "node_id";
  for (auto const &name : m.feature_names) { out << '\t' << name; }
  out << '\n';
  for (Index i = 0; i < m.rows(); ++i) {
    out << m.node_ids[static_cast<std::size_t>(i)];
    for (Index j = 0; j < m.cols(); ++j) { out << '\t' << tsv::format_double(m.values(i, j)); }
    out << '\n';
  }
}

void write_features(std::filesystem::path const &path, FeatureMatrix const &m)
{
  tsv::write_atomically(path, [&](std::ostream &out) { write_features(out, m); });
}

FeatureMatrix read_features(std::filesystem::path const &path)
{
  auto const lines = tsv::read_lines(path);
  if (lines.empty()) { throw ParseError(1, "feature file is empty"); }
  auto const header = tsv::split(lines[0]);
  if (header.empty() || header[0] != "node_id") { throw ParseError(1, "feature header must start with node_id"); }
  FeatureMatrix m;
  for (std::size_t j = 1; j < header.size(); ++j) { m.feature_names.emplace_back(header[j]); }
  m.graph_kind = std::find(m.feature_names.begin(), m.feature_names.end(), "total_value") != m.feature_names.end()
                   ? GraphKind::Transaction
                   : GraphKind::User;
  std::vector<std::vector<std::string_view>> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) { continue; }
    auto fields = tsv::split(lines[i]);
    if (fields.size() != header.size()) { throw ParseError(i + 1, "wrong number of columns"); }
    m.node_ids.push_back(tsv::parse_uint(fields[0], i + 1));
    rows.push_back(std::move(fields));
  }
  auto const cols = static_cast<Index>(m.feature_names.size());
  m.values.resize(static_cast<Index>(rows.size()), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (Index j = 0; j < cols; ++j) {
      m.values(static_cast<Index>(i), j) = tsv::parse_double(rows[i][static_cast<std::size_t>(j) + 1], i + 2);
    }
  }
  return m;
}

} // namespace ledgerlof
