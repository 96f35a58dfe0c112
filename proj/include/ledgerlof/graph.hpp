#pragma once

#include "ledger.hpp"
#include "types.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace ledgerlof {

enum class GraphKind { User, Transaction };

std::string_view to_string(GraphKind kind);
GraphKind parse_graph_kind(std::string_view text);

struct Edge
{
  NodeId src = 0;
  NodeId dst = 0;
  double value = 0; // BTC
  std::int64_t timestamp = 0;
  std::uint64_t tx_id = 0;

  friend bool operator==(Edge const &, Edge const &) = default;
  friend auto operator<=>(Edge const &, Edge const &) = default;
};

/// Directed multigraph over users or transactions. `nodes` is sorted and
/// unique; `edges` keep ledger order, so building twice from the same ledger
/// gives identical graphs.
struct NodeGraph
{
  GraphKind kind = GraphKind::User;
  std::vector<NodeId> nodes;
  std::vector<Edge> edges;

  Index node_count() const { return static_cast<Index>(nodes.size()); }
  /// Row position of `id` in `nodes`, or -1.
  Index index_of(NodeId id) const;
};

/// Same node set and same edge multiset (edge order ignored).
bool same_structure(NodeGraph const &a, NodeGraph const &b);

/// One edge per (input user, output) pair. When several users fund a
/// transaction, each output is split across them in proportion to their input
/// contributions (equally if every input is zero). Multiple inputs from one
/// user are merged first. Coinbase records add their output users as nodes only.
NodeGraph build_user_graph(Ledger const &records);

/// Node per record; edge src_tx -> tx carrying the input's value for every
/// input that names a source. Edge A -> B reads "B takes money from A".
NodeGraph build_tx_graph(Ledger const &records);

NodeGraph build_graph(Ledger const &records, GraphKind kind);

/// Per-node adjacency derived from a NodeGraph, indexed by node row.
struct Adjacency
{
  std::vector<std::vector<std::size_t>> out_edges; // edge indices
  std::vector<std::vector<std::size_t>> in_edges;
  std::vector<std::vector<Index>> undirected; // distinct neighbour rows, sorted, no self

  explicit Adjacency(NodeGraph const &g);
};

} // namespace ledgerlof
