#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace ledgerlof::cli {

/// Lowercase hex SHA-256 of a file's bytes.
std::string file_sha256(std::filesystem::path const &path);

/// Record of one subcommand run, written as JSON next to its primary output.
struct RunManifest
{
  std::vector<std::string> command_line;
  std::string subcommand;
  std::map<std::string, std::string> config; // every option of the subcommand, given or default
  std::string seed;
  std::vector<std::filesystem::path> inputs;
  std::vector<std::filesystem::path> outputs;
  std::map<std::string, std::string> metadata;
  double seconds = 0;

  /// Digests are computed here, from the files as they are on disk.
  void write(std::filesystem::path const &path) const;
};

std::filesystem::path manifest_path_for(std::filesystem::path const &primary_output);

} // namespace ledgerlof::cli
