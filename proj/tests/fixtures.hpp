// Shared test data builders.
#pragma once

#include "ledgerlof/ledger.hpp"
#include "ledgerlof/random.hpp"
#include "ledgerlof/types.hpp"

#include <filesystem>
#include <sstream>
#include <string>

namespace fixtures {

using namespace ledgerlof;

inline Ledger ledger_from(std::string const &body)
{
  std::istringstream in("tx_id,timestamp,inputs,outputs\n" + body);
  return parse_ledger(in);
}

inline RowMatrixXd uniform_points(Index n, Index dims, std::uint64_t seed, double scale = 1.0)
{
  Rng rng(seed);
  RowMatrixXd x(n, dims);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < dims; ++j) { x(i, j) = rng.uniform(0.0, scale); }
  }
  return x;
}

/// `blobs` Gaussian blobs of `per_blob` points with the given radius (sd),
/// centres on a line `spacing` apart. Labels hold the generating blob.
inline RowMatrixXd blob_points(int blobs, Index per_blob, Index dims, double radius, double spacing,
                               std::uint64_t seed, std::vector<int> *labels = nullptr)
{
  Rng rng(seed);
  RowMatrixXd x(blobs * per_blob, dims);
  for (int b = 0; b < blobs; ++b) {
    for (Index i = 0; i < per_blob; ++i) {
      auto const row = b * per_blob + i;
      for (Index j = 0; j < dims; ++j) { x(row, j) = (j == 0 ? b * spacing : 0.0) + radius * rng.normal(); }
      if (labels != nullptr) { labels->push_back(b); }
    }
  }
  return x;
}

/// A fresh empty directory under the system temp directory.
inline std::filesystem::path temp_dir(std::string const &name)
{
  auto const dir = std::filesystem::temp_directory_path() / ("ledgerlof_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

} // namespace fixtures
