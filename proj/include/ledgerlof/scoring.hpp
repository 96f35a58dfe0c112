#pragma once

#include "clustering.hpp"
#include "features.hpp"
#include "lof.hpp"

#include <filesystem>
#include <vector>

namespace ledgerlof {

struct LofResult
{
  NodeId node_id = 0;
  double k_distance = 0;
  double lrd = 0;
  double lof = 0;
  double relative_lof = 0;
  Index rank = 0; // 1-based
  bool flagged = false;
};

/// What a scoring run did, for the run manifest.
struct LofReport
{
  NeighborQuery query;
  bool approximate = false;          // true in ClusterRestricted mode
  std::vector<NodeId> fallback_nodes; // scored exactly because their cluster was too small
};

/// Scores every node, sorted by lof descending with ties broken by ascending
/// node id. The first `top_n` results are flagged.
std::vector<LofResult> score_all(FeatureMatrix const &m, NeighborQuery const &q, Clustering<double> const *c,
                                 Index top_n, unsigned threads = 0, LofReport *report = nullptr);

/// `rank  node_id  lof  relative_lof`, one row per result in rank order.
void write_lof(std::filesystem::path const &path, std::vector<LofResult> const &results);
/// Reads a file written by write_lof. Only rank, node id, lof and relative lof
/// are restored; results come back in rank order.
std::vector<LofResult> read_lof(std::filesystem::path const &path);

} // namespace ledgerlof
