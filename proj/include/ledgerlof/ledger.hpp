#pragma once

#include "types.hpp"

#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ledgerlof {

/// A BTC amount held as an integer number of satoshis (1e-8 BTC), so the
/// ledger's decimal values round-trip exactly.
class Amount
{
public:
  static constexpr std::int64_t kSatoshisPerCoin = 100'000'000;

  constexpr Amount() = default;
  static constexpr Amount from_satoshis(std::int64_t sats) { return Amount(sats); }

  /// Parses a non-negative decimal with at most eight fractional digits.
  static std::optional<Amount> parse(std::string_view text);

  constexpr std::int64_t satoshis() const { return sats_; }
  constexpr double coins() const { return static_cast<double>(sats_) / static_cast<double>(kSatoshisPerCoin); }

  /// Shortest decimal form with at least one fractional digit, e.g. "50.0", "0.5", "49.12345678".
  std::string to_string() const;

  constexpr Amount &operator+=(Amount other)
  {
    sats_ += other.sats_;
    return *this;
  }
  friend constexpr Amount operator+(Amount a, Amount b) { return Amount(a.sats_ + b.sats_); }
  friend constexpr auto operator<=>(Amount, Amount) = default;

private:
  constexpr explicit Amount(std::int64_t sats) : sats_(sats) {}
  std::int64_t sats_ = 0;
};

struct TxInput
{
  std::optional<std::uint64_t> src_tx_id;
  NodeId user_id = 0;
  Amount value;

  friend bool operator==(TxInput const &, TxInput const &) = default;
};

struct TxOutput
{
  NodeId user_id = 0;
  Amount value;

  friend bool operator==(TxOutput const &, TxOutput const &) = default;
};

struct LedgerRecord
{
  std::uint64_t tx_id = 0;
  std::int64_t timestamp = 0;
  std::vector<TxInput> inputs;
  std::vector<TxOutput> outputs;

  bool is_coinbase() const { return inputs.empty(); }
  Amount total_input() const;
  Amount total_output() const;

  friend bool operator==(LedgerRecord const &, LedgerRecord const &) = default;
};

using Ledger = std::vector<LedgerRecord>;

inline constexpr std::string_view kLedgerHeader = "tx_id,timestamp,inputs,outputs";

/// Reads a ledger CSV. Throws ParseError (with the 1-based line number) on
/// malformed rows and IntegrityError on duplicate ids or dangling input sources.
Ledger parse_ledger(std::filesystem::path const &path);
Ledger parse_ledger(std::istream &in);

/// Checks the record invariants that span rows. parse_ledger calls this.
void validate_ledger(Ledger const &records);

void write_ledger(std::ostream &out, Ledger const &records);
void write_ledger(std::filesystem::path const &path, Ledger const &records);

std::string format_record(LedgerRecord const &record);

} // namespace ledgerlof
