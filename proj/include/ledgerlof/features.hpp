#pragma once

#include "graph.hpp"
#include "ledger.hpp"
#include "types.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace ledgerlof {

/// Node ids paired with one feature vector per row.
struct FeatureMatrix
{
  GraphKind graph_kind = GraphKind::User;
  std::vector<std::string> feature_names;
  std::vector<NodeId> node_ids;
  RowMatrixXd values;

  Index rows() const { return values.rows(); }
  Index cols() const { return values.cols(); }
  /// Row holding `id`; throws LookupError when absent.
  Index row_of(NodeId id) const;
  Index column_of(std::string const &name) const;
};

std::vector<std::string> const &user_feature_names();
std::vector<std::string> const &tx_feature_names();

/// In/out degree (multi-edges counted), mean incoming/outgoing edge value,
/// mean gap between the sorted timestamps of all incident edges, and the local
/// clustering coefficient of the undirected simple projection. Degenerate
/// nodes get 0 for any mean or coefficient without enough events.
FeatureMatrix extract_user_features(NodeGraph const &g, unsigned threads = 0);

/// In-degree (parents spent from), out-degree (children spending it) and the
/// record's total output value.
FeatureMatrix extract_tx_features(NodeGraph const &g, Ledger const &records, unsigned threads = 0);

/// Raw features left out of the clustering set: unique degrees, balance,
/// creation date and active duration (plus party count for transactions).
FeatureMatrix extract_extended_features(NodeGraph const &g, Ledger const &records);

/// log(1 + x) per entry (sign-preserving for negative entries), then each
/// column standardised to mean 0 and population standard deviation 1.
/// Constant columns become all zero.
FeatureMatrix normalize(FeatureMatrix const &raw);

void write_features(std::ostream &out, FeatureMatrix const &m);
void write_features(std::filesystem::path const &path, FeatureMatrix const &m);
FeatureMatrix read_features(std::filesystem::path const &path);

} // namespace ledgerlof
