#pragma once

#include "features.hpp"
#include "kmeans.hpp"

#include <filesystem>
#include <utility>

namespace ledgerlof {

/// kmeans on a feature matrix. Rows are seeded in ascending node-id order, so
/// permuting the rows of `m` permutes the assignments and nothing else.
/// `assignments` follow the row order of `m`.
Clustering<double> kmeans(FeatureMatrix const &m, KMeansOptions const &opt);

KSelection select_k(FeatureMatrix const &m, int lo, int hi, KMeansOptions const &base = {});

/// Nearest centroid of `node` and the Euclidean distance to it; ties go to
/// the lowest cluster index. Throws LookupError for an unknown node.
std::pair<int, double> assign(FeatureMatrix const &m, Clustering<double> const &c, NodeId node);

/// `node_id  cluster  distance`, one row per node in matrix order.
void write_assignments(std::filesystem::path const &path, FeatureMatrix const &m, Clustering<double> const &c);
/// `cluster  size  <feature names...>`, one row per centroid.
void write_centroids(std::filesystem::path const &path, FeatureMatrix const &m, Clustering<double> const &c);
/// Rebuilds a clustering aligned with the rows of `m` from the two files above.
Clustering<double> read_clustering(std::filesystem::path const &assignments, std::filesystem::path const &centroids,
                                   FeatureMatrix const &m);

} // namespace ledgerlof
