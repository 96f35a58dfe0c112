#include "ledgerlof/ledger.hpp"

#include "ledgerlof/error.hpp"
#include "ledgerlof/tsv.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <unordered_map>

namespace ledgerlof {

std::optional<Amount> Amount::parse(std::string_view text)
{
  if (text.empty()) { return std::nullopt; }
  auto const dot = text.find('.');
  auto const whole = text.substr(0, dot);
  auto const frac = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
  if (whole.empty() || frac.size() > 8) { return std::nullopt; }
  if (dot != std::string_view::npos && frac.empty()) { return std::nullopt; }

  std::int64_t coins = 0;
  auto [p1, e1] = std::from_chars(whole.data(), whole.data() + whole.size(), coins);
  if (e1 != std::errc{} || p1 != whole.data() + whole.size() || coins < 0 || whole.front() == '-' ||
      whole.front() == '+') {
    return std::nullopt;
  }
  std::int64_t fraction = 0;
  if (!frac.empty()) {
    auto [p2, e2] = std::from_chars(frac.data(), frac.data() + frac.size(), fraction);
    if (e2 != std::errc{} || p2 != frac.data() + frac.size() || frac.front() == '-' || frac.front() == '+') {
      return std::nullopt;
    }
    for (auto i = frac.size(); i < 8; ++i) { fraction *= 10; }
  }
  if (coins > (std::numeric_limits<std::int64_t>::max() - fraction) / kSatoshisPerCoin) { return std::nullopt; }
  return Amount(coins * kSatoshisPerCoin + fraction);
}

std::string Amount::to_string() const
{
  auto const whole = sats_ / kSatoshisPerCoin;
  auto frac = sats_ % kSatoshisPerCoin;
  std::string digits = std::to_string(frac);
  digits.insert(0, 8 - digits.size(), '0');
  while (digits.size() > 1 && digits.back() == '0') { digits.pop_back(); }
  return std::to_string(whole) + "." + digits;
}

Amount LedgerRecord::total_input() const
{
  Amount total;
  for (auto const &in : inputs) { total += in.value; }
  return total;
}

Amount LedgerRecord::total_output() const
{
  Amount total;
  for (auto const &out : outputs) { total += out.value; }
  return total;
}

namespace {

std::string_view trim(std::string_view s)
{
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) { s.remove_prefix(1); }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) { s.remove_suffix(1); }
  return s;
}

std::string_view unquote(std::string_view s)
{
  s = trim(s);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') { s = trim(s.substr(1, s.size() - 2)); }
  return s;
}

std::vector<std::string_view> split_csv(std::string_view line, std::size_t line_no)
{
  std::vector<std::string_view> fields;
  bool quoted = false;
  std::size_t start = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') {
      quoted = !quoted;
    } else if (line[i] == ',' && !quoted) {
      fields.push_back(unquote(line.substr(start, i - start)));
      start = i + 1;
    }
  }
  if (quoted) { throw ParseError(line_no, "unterminated quote"); }
  fields.push_back(unquote(line.substr(start)));
  return fields;
}

NodeId parse_id(std::string_view field, std::size_t line_no, char const *what)
{
  NodeId value = 0;
  auto const [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size()) {
    throw ParseError(line_no, std::string("bad ") + what + " '" + std::string(field) + "'");
  }
  return value;
}

Amount parse_amount(std::string_view field, std::size_t line_no)
{
  auto const value = Amount::parse(field);
  if (!value) { throw ParseError(line_no, "bad value '" + std::string(field) + "'"); }
  return *value;
}

LedgerRecord parse_row(std::string_view line, std::size_t line_no)
{
  auto const fields = split_csv(line, line_no);
  if (fields.size() != 4) {
    throw ParseError(line_no, "expected 4 fields, found " + std::to_string(fields.size()));
  }
  LedgerRecord rec;
  rec.tx_id = parse_id(fields[0], line_no, "tx_id");
  rec.timestamp = tsv::parse_int(fields[1], line_no);

  if (!fields[2].empty()) {
    for (auto const part : tsv::split(fields[2], ';')) {
      auto const triple = tsv::split(trim(part), ':');
      if (triple.size() != 3) { throw ParseError(line_no, "input must be src_txid:user:value"); }
      TxInput in;
      if (!triple[0].empty()) { in.src_tx_id = parse_id(triple[0], line_no, "src_txid"); }
      in.user_id = parse_id(triple[1], line_no, "user id");
      in.value = parse_amount(triple[2], line_no);
      rec.inputs.push_back(in);
    }
  }
  if (fields[3].empty()) { throw ParseError(line_no, "record has no outputs"); }
  for (auto const part : tsv::split(fields[3], ';')) {
    auto const pair = tsv::split(trim(part), ':');
    if (pair.size() != 2) { throw ParseError(line_no, "output must be user:value"); }
    rec.outputs.push_back(TxOutput{parse_id(pair[0], line_no, "user id"), parse_amount(pair[1], line_no)});
  }
  return rec;
}

} // namespace

Ledger parse_ledger(std::istream &in)
{
  Ledger records;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') { line.pop_back(); }
    if (!header_seen) {
      if (trim(line) != kLedgerHeader) { throw ParseError(line_no, "expected header '" + std::string(kLedgerHeader) + "'"); }
      header_seen = true;
      continue;
    }
    if (trim(line).empty()) { continue; }
    records.push_back(parse_row(line, line_no));
  }
  if (!header_seen) { throw ParseError(1, "missing header"); }
  validate_ledger(records);
  return records;
}

Ledger parse_ledger(std::filesystem::path const &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) { throw Error("io", "cannot open ledger " + path.string()); }
  return parse_ledger(in);
}

void validate_ledger(Ledger const &records)
{
  std::unordered_map<std::uint64_t, std::int64_t> seen;
  seen.reserve(records.size());
  for (auto const &rec : records) {
    if (rec.outputs.empty()) { throw IntegrityError("tx " + std::to_string(rec.tx_id) + " has no outputs"); }
    for (auto const &in : rec.inputs) {
      if (!in.src_tx_id) { continue; }
      auto const it = seen.find(*in.src_tx_id);
      if (it == seen.end()) {
        throw IntegrityError("tx " + std::to_string(rec.tx_id) + " spends unknown or later tx " +
                             std::to_string(*in.src_tx_id));
      }
      if (it->second > rec.timestamp) {
        throw IntegrityError("tx " + std::to_string(rec.tx_id) + " spends tx " + std::to_string(*in.src_tx_id) +
                             " which has a later timestamp");
      }
    }
    if (!seen.emplace(rec.tx_id, rec.timestamp).second) {
      throw IntegrityError("duplicate tx_id " + std::to_string(rec.tx_id));
    }
  }
}

std::string format_record(LedgerRecord const &rec)
{
  std::string line = std::to_string(rec.tx_id) + "," + std::to_string(rec.timestamp) + ",";
  for (std::size_t i = 0; i < rec.inputs.size(); ++i) {
    auto const &in = rec.inputs[i];
    if (i) { line += ';'; }
    if (in.src_tx_id) { line += std::to_string(*in.src_tx_id); }
    line += ':' + std::to_string(in.user_id) + ':' + in.value.to_string();
  }
  line += ',';
  for (std::size_t i = 0; i < rec.outputs.size(); ++i) {
    if (i) { line += ';'; }
    line += std::to_string(rec.outputs[i].user_id) + ':' + rec.outputs[i].value.to_string();
  }
  return line;
}

void write_ledger(std::ostream &out, Ledger const &records)
{
  out << kLedgerHeader << '\n';
  for (auto const &rec : records) { out << format_record(rec) << '\n'; }
}

void write_ledger(std::filesystem::path const &path, Ledger const &records)
{
  tsv::write_atomically(path, [&](std::ostream &out) { write_ledger(out, records); });
}

} // namespace ledgerlof
