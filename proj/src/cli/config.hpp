#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace CLI {
class App;
}

namespace ledgerlof::cli {

struct ConfigEntry
{
  std::string key;
  std::string value;
  std::size_t line = 0;
};

/// Reads `key = value` lines. Blank lines and lines starting with '#' are skipped.
std::vector<ConfigEntry> read_config(std::filesystem::path const &path);

/// Appends `--key value` to `args` for every entry that names an option of
/// `sub` (or of `app`) not already given on the command line. Throws
/// ConfigError for keys no subcommand knows.
void merge_config(std::vector<std::string> &args, std::vector<ConfigEntry> const &entries, CLI::App const &app,
                  CLI::App const *sub);

/// Value of `--config`, if present.
std::string find_config_path(std::vector<std::string> const &args);

} // namespace ledgerlof::cli
