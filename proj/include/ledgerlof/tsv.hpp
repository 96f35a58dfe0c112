#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace ledgerlof::tsv {

/// Shortest representation that parses back to the same double.
std::string format_double(double value);

std::vector<std::string_view> split(std::string_view line, char sep = '\t');

double parse_double(std::string_view field, std::size_t line);
std::uint64_t parse_uint(std::string_view field, std::size_t line);
std::int64_t parse_int(std::string_view field, std::size_t line);

/// Writes through a temporary sibling file and renames it into place.
void write_atomically(std::filesystem::path const &path, std::function<void(std::ostream &)> const &writer);

/// Reads every line, stripping a trailing '\r'. Throws Error("io") if unreadable.
std::vector<std::string> read_lines(std::filesystem::path const &path);

} // namespace ledgerlof::tsv
