#include "ledgerlof/graph.hpp"

#include "ledgerlof/error.hpp"

#include <algorithm>

namespace ledgerlof {

std::string_view to_string(GraphKind kind) { return kind == GraphKind::User ? "user" : "tx"; }

GraphKind parse_graph_kind(std::string_view text)
{
  if (text == "user") { return GraphKind::User; }
  if (text == "tx" || text == "transaction") { return GraphKind::Transaction; }
  throw ConfigError("unknown graph kind '" + std::string(text) + "' (expected user or tx)");
}

Index NodeGraph::index_of(NodeId id) const
{
  auto const it = std::lower_bound(nodes.begin(), nodes.end(), id);
  if (it == nodes.end() || *it != id) { return -1; }
  return static_cast<Index>(it - nodes.begin());
}

bool same_structure(NodeGraph const &a, NodeGraph const &b)
{
  if (a.kind != b.kind || a.nodes != b.nodes || a.edges.size() != b.edges.size()) { return false; }
  auto ea = a.edges;
  auto eb = b.edges;
  std::sort(ea.begin(), ea.end());
  std::sort(eb.begin(), eb.end());
  return ea == eb;
}

namespace {

void sort_unique(std::vector<NodeId> &ids)
{
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
}

} // namespace

NodeGraph build_user_graph(Ledger const &records)
{
  NodeGraph g;
  g.kind = GraphKind::User;
  for (auto const &rec : records) {
    for (auto const &in : rec.inputs) { g.nodes.push_back(in.user_id); }
    for (auto const &out : rec.outputs) { g.nodes.push_back(out.user_id); }
  }
  sort_unique(g.nodes);

  std::vector<std::pair<NodeId, std::int64_t>> senders; // user, contributed satoshis
  for (auto const &rec : records) {
    if (rec.inputs.empty()) { continue; }
    senders.clear();
    for (auto const &in : rec.inputs) {
      auto it = std::find_if(senders.begin(), senders.end(), [&](auto const &s) { return s.first == in.user_id; });
      if (it == senders.end()) {
        senders.emplace_back(in.user_id, in.value.satoshis());
      } else {
        it->second += in.value.satoshis();
      }
    }
    std::int64_t total = 0;
    for (auto const &s : senders) { total += s.second; }

    for (auto const &out : rec.outputs) {
      for (auto const &[user, contributed] : senders) {
        double const share = total > 0 ? static_cast<double>(contributed) / static_cast<double>(total)
                                       : 1.0 / static_cast<double>(senders.size());
        double const value = senders.size() == 1 ? out.value.coins() : out.value.coins() * share;
        g.edges.push_back(Edge{user, out.user_id, value, rec.timestamp, rec.tx_id});
      }
    }
  }
  return g;
}

NodeGraph build_tx_graph(Ledger const &records)
{
  NodeGraph g;
  g.kind = GraphKind::Transaction;
  g.nodes.reserve(records.size());
  for (auto const &rec : records) { g.nodes.push_back(rec.tx_id); }
  sort_unique(g.nodes);
  for (auto const &rec : records) {
    for (auto const &in : rec.inputs) {
      if (in.src_tx_id) { g.edges.push_back(Edge{*in.src_tx_id, rec.tx_id, in.value.coins(), rec.timestamp, rec.tx_id}); }
    }
  }
  return g;
}

NodeGraph build_graph(Ledger const &records, GraphKind kind)
{
  return kind == GraphKind::User ? build_user_graph(records) : build_tx_graph(records);
}

Adjacency::Adjacency(NodeGraph const &g)
  : out_edges(g.nodes.size()), in_edges(g.nodes.size()), undirected(g.nodes.size())
{
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    auto const s = g.index_of(g.edges[e].src);
    auto const d = g.index_of(g.edges[e].dst);
    if (s < 0 || d < 0) { throw ConsistencyError("edge endpoint missing from node set"); }
    out_edges[static_cast<std::size_t>(s)].push_back(e);
    in_edges[static_cast<std::size_t>(d)].push_back(e);
    if (s != d) {
      undirected[static_cast<std::size_t>(s)].push_back(d);
      undirected[static_cast<std::size_t>(d)].push_back(s);
    }
  }
  for (auto &nbrs : undirected) {
    std::sort(nbrs.begin(), nbrs.end());
    nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
  }
}

} // namespace ledgerlof
