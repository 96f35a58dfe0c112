#include "config.hpp"

#include "ledgerlof/error.hpp"
#include "ledgerlof/tsv.hpp"

#include <CLI11.hpp>

#include <algorithm>

namespace ledgerlof::cli {

namespace {

std::string trim(std::string_view s)
{
  auto const first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) { return {}; }
  auto const last = s.find_last_not_of(" \t");
  return std::string(s.substr(first, last - first + 1));
}

bool given(std::vector<std::string> const &args, std::string const &flag)
{
  return std::any_of(args.begin(), args.end(), [&](std::string const &a) {
    return a == flag || a.starts_with(flag + "=");
  });
}

CLI::Option const *find_option(CLI::App const *app, std::string const &flag)
{
  if (app == nullptr) { return nullptr; }
  for (auto const *opt : app->get_options()) {
    auto const &names = opt->get_lnames();
    if (std::find(names.begin(), names.end(), flag.substr(2)) != names.end()) { return opt; }
  }
  return nullptr;
}

bool known_anywhere(CLI::App const &app, std::string const &flag)
{
  if (find_option(&app, flag) != nullptr) { return true; }
  auto const subs = app.get_subcommands([](CLI::App const *) { return true; });
  return std::any_of(subs.begin(), subs.end(), [&](CLI::App const *s) { return find_option(s, flag) != nullptr; });
}

} // namespace

std::vector<ConfigEntry> read_config(std::filesystem::path const &path)
{
  std::vector<ConfigEntry> entries;
  auto const lines = tsv::read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto const line = trim(lines[i]);
    if (line.empty() || line.front() == '#') { continue; }
    auto const eq = line.find('=');
    if (eq == std::string::npos) { throw ConfigError(path.string() + " line " + std::to_string(i + 1) + ": expected key = value"); }
    ConfigEntry e{trim(std::string_view(line).substr(0, eq)), trim(std::string_view(line).substr(eq + 1)), i + 1};
    if (e.value.size() >= 2 && e.value.front() == '"' && e.value.back() == '"') { e.value = e.value.substr(1, e.value.size() - 2); }
    std::replace(e.key.begin(), e.key.end(), '_', '-');
    if (e.key.empty()) { throw ConfigError(path.string() + " line " + std::to_string(i + 1) + ": empty key"); }
    entries.push_back(std::move(e));
  }
  return entries;
}

void merge_config(std::vector<std::string> &args, std::vector<ConfigEntry> const &entries, CLI::App const &app,
                  CLI::App const *sub)
{
  for (auto const &e : entries) {
    auto const flag = "--" + e.key;
    if (e.key == "config") { continue; }
    if (!known_anywhere(app, flag)) { throw ConfigError("unknown config key '" + e.key + "' on line " + std::to_string(e.line)); }
    auto const *opt = find_option(sub, flag);
    if (opt == nullptr) { opt = find_option(&app, flag); }
    if (opt == nullptr || given(args, flag)) { continue; }
    if (opt->get_expected_max() == 0) {
      if (e.value == "true" || e.value == "1") { args.push_back(flag); }
    } else {
      args.push_back(flag);
      args.push_back(e.value);
    }
  }
}

std::string find_config_path(std::vector<std::string> const &args)
{
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) { return args[i + 1]; }
    if (args[i].starts_with("--config=")) { return args[i].substr(9); }
  }
  return {};
}

} // namespace ledgerlof::cli
