#pragma once

#include "evaluate.hpp"
#include "ledger.hpp"

#include <cstdint>
#include <string>

namespace ledgerlof {

enum class AnomalyProfile {
  ExtremeValue, ///< payments among anomalies worth 50 to 100 times the median payment
  RingCluster,  ///< cliques of 3 to 5 anomalies paying each other, clustering coefficient 1
  BurstSender,  ///< one burst of 20 to 50 payments to ordinary users within seconds
};

std::string to_string(AnomalyProfile profile);
AnomalyProfile parse_anomaly_profile(std::string const &text);

struct SynthConfig
{
  std::uint64_t n_users = 10'000;
  /// Total records including one coinbase per user and the anomaly payments.
  /// 0 picks the count that matches the expected degree sum.
  std::uint64_t n_tx = 0;
  double degree_exponent = 2.5;
  double densification_exponent = 1.3;
  double anomaly_rate = 0.01;
  AnomalyProfile anomaly_profile = AnomalyProfile::ExtremeValue;
  std::uint64_t seed = 1;

  /// round(anomaly_rate * n_users), at least 1 when the rate is positive.
  std::uint64_t anomaly_count() const;
};

struct SynthOutput
{
  Ledger ledger;
  Labels labels; // anomalous users and the records they planted
};

/// Growth model: users join one at a time, each with a coinbase record. User
/// j joins before payment P * (j / n)^alpha, so payments grow as users^alpha.
/// Each ordinary user draws how many payments it sends and receives from a
/// discrete power law with the configured exponent; every payment pairs a
/// sender and a receiver drawn by remaining count among joined users. Payment
/// values are Pareto distributed (minimum 0.1, tail index 1.5) and spend the
/// sender's most recent receipts. Anomalous users take no part in ordinary
/// payments; they act only through their profile.
///
/// Throws ConfigError for an infeasible configuration.
SynthOutput generate(SynthConfig const &cfg);

} // namespace ledgerlof
