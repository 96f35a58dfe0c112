#include "ledgerlof/tsv.hpp"

#include "ledgerlof/error.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

namespace ledgerlof::tsv {

std::string format_double(double value)
{
  if (std::isnan(value)) { return "nan"; }
  if (std::isinf(value)) { return value > 0 ? "inf" : "-inf"; }
  std::array<char, 64> buf{};
  auto const [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) { throw Error("format", "cannot format double"); }
  return std::string(buf.data(), ptr);
}

std::vector<std::string_view> split(std::string_view line, char sep)
{
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    auto const pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

double parse_double(std::string_view field, std::size_t line)
{
  if (field == "inf") { return std::numeric_limits<double>::infinity(); }
  if (field == "-inf") { return -std::numeric_limits<double>::infinity(); }
  double value = 0;
  auto const [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty()) {
    throw ParseError(line, "expected a real number, got '" + std::string(field) + "'");
  }
  return value;
}

std::uint64_t parse_uint(std::string_view field, std::size_t line)
{
  std::uint64_t value = 0;
  auto const [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty()) {
    throw ParseError(line, "expected an unsigned integer, got '" + std::string(field) + "'");
  }
  return value;
}

std::int64_t parse_int(std::string_view field, std::size_t line)
{
  std::int64_t value = 0;
  auto const [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty()) {
    throw ParseError(line, "expected an integer, got '" + std::string(field) + "'");
  }
  return value;
}

void write_atomically(std::filesystem::path const &path, std::function<void(std::ostream &)> const &writer)
{
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) { throw Error("io", "cannot open " + tmp.string() + " for writing"); }
    writer(out);
    out.flush();
    if (!out) { throw Error("io", "write failed for " + tmp.string()); }
  }
  std::filesystem::rename(tmp, path);
}

std::vector<std::string> read_lines(std::filesystem::path const &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) { throw Error("io", "cannot open " + path.string()); }
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') { line.pop_back(); }
    lines.push_back(std::move(line));
  }
  return lines;
}

} // namespace ledgerlof::tsv
