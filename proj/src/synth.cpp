#include "ledgerlof/synth.hpp"

#include "ledgerlof/error.hpp"
#include "ledgerlof/random.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace ledgerlof {

std::string to_string(AnomalyProfile profile)
{
  switch (profile) {
  case AnomalyProfile::ExtremeValue: return "extreme-value";
  case AnomalyProfile::RingCluster: return "ring-cluster";
  case AnomalyProfile::BurstSender: return "burst-sender";
  }
  return "unknown";
}

AnomalyProfile parse_anomaly_profile(std::string const &text)
{
  if (text == "extreme-value" || text == "ExtremeValue") { return AnomalyProfile::ExtremeValue; }
  if (text == "ring-cluster" || text == "RingCluster") { return AnomalyProfile::RingCluster; }
  if (text == "burst-sender" || text == "BurstSender") { return AnomalyProfile::BurstSender; }
  throw ConfigError("unknown anomaly profile '" + text + "' (expected extreme-value, ring-cluster or burst-sender)");
}

std::uint64_t SynthConfig::anomaly_count() const
{
  if (anomaly_rate <= 0.0) { return 0; }
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(anomaly_rate * static_cast<double>(n_users))));
}

namespace {

constexpr std::int64_t kStartTime = 1'600'000'000;
constexpr double kMeanGapSeconds = 30.0;
constexpr double kMinPayment = 0.1;
constexpr double kPaymentTail = 1.5;
constexpr std::int64_t kCoinbaseSats = 50 * Amount::kSatoshisPerCoin;

/// Inverse-CDF sampler for P(k) proportional to k^-gamma on 1..kmax.
class DiscretePowerLaw
{
public:
  DiscretePowerLaw(double gamma, std::uint64_t kmax) : cdf_(kmax)
  {
    double acc = 0.0;
    for (std::uint64_t k = 1; k <= kmax; ++k) {
      acc += std::pow(static_cast<double>(k), -gamma);
      cdf_[k - 1] = acc;
    }
    for (auto &c : cdf_) { c /= acc; }
  }

  std::uint64_t draw(Rng &rng) const
  {
    double const u = rng.uniform();
    return static_cast<std::uint64_t>(std::upper_bound(cdf_.begin(), cdf_.end() - 1, u) - cdf_.begin()) + 1;
  }

  double mean() const
  {
    double m = cdf_[0];
    for (std::size_t k = 1; k < cdf_.size(); ++k) { m += static_cast<double>(k + 1) * (cdf_[k] - cdf_[k - 1]); }
    return m;
  }

private:
  std::vector<double> cdf_;
};

/// Fenwick tree of non-negative integer weights supporting weighted draws.
class WeightTree
{
public:
  explicit WeightTree(std::size_t n) : tree_(n + 1, 0) {}

  void add(std::size_t i, std::int64_t delta)
  {
    total_ += delta;
    for (++i; i < tree_.size(); i += i & (~i + 1)) { tree_[i] += delta; }
  }

  std::int64_t total() const { return total_; }

  /// Index whose cumulative weight interval holds `target` (0 <= target < total).
  std::size_t find(std::int64_t target) const
  {
    std::size_t pos = 0;
    std::size_t step = 1;
    while (step * 2 < tree_.size()) { step *= 2; }
    for (; step > 0; step /= 2) {
      if (pos + step < tree_.size() && tree_[pos + step] <= target) {
        pos += step;
        target -= tree_[pos];
      }
    }
    return pos;
  }

private:
  std::vector<std::int64_t> tree_;
  std::int64_t total_ = 0;
};

/// Moves the sum of `counts` to `target` by adding or removing single units at
/// entries drawn in proportion to their current value. This scales the
/// sequence roughly uniformly and so keeps the shape of its tail.
void reconcile(std::vector<std::uint64_t> &counts, std::uint64_t target, Rng &rng)
{
  auto sum = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  if (sum == target) { return; }
  WeightTree weights(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) { weights.add(i, static_cast<std::int64_t>(counts[i])); }
  while (sum < target) {
    auto const i = weights.find(static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(weights.total()))));
    ++counts[i];
    weights.add(i, 1);
    ++sum;
  }
  // Only entries above 1 may shrink, so weight them by their surplus.
  WeightTree surplus(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) { surplus.add(i, static_cast<std::int64_t>(counts[i]) - 1); }
  while (sum > target) {
    if (surplus.total() == 0) { throw ConfigError("n_tx is too small for the number of users"); }
    auto const i = surplus.find(static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(surplus.total()))));
    --counts[i];
    surplus.add(i, -1);
    --sum;
  }
}

/// One planned anomalous payment, or a burst when `burst` > 0.
struct PlannedEvent
{
  std::uint64_t at = 0; // ordinary-payment index before which it happens
  std::size_t sender = 0;
  std::size_t receiver = 0;
  double multiplier = 0; // payment = multiplier * median, or an ordinary draw when 0
  std::uint64_t burst = 0;
};

class Generator
{
public:
  explicit Generator(SynthConfig const &cfg) : cfg_(cfg), rng_(cfg.seed) { validate(); }

  SynthOutput run()
  {
    auto const n = cfg_.n_users;
    auto const anomalies = cfg_.anomaly_count();

    // Users are numbered 1..n in join order; the first two are always ordinary.
    std::vector<std::size_t> candidates(n - 2);
    std::iota(candidates.begin(), candidates.end(), std::size_t{2});
    rng_.shuffle(candidates.begin(), candidates.end());
    anomalous_.assign(n, false);
    std::vector<std::size_t> planted(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(anomalies));
    std::sort(planted.begin(), planted.end());
    for (auto u : planted) { anomalous_[u] = true; }

    DiscretePowerLaw const law(cfg_.degree_exponent, n);
    auto const anomaly_records = plan_anomaly_sizes(planted, law);
    auto const ordinary = n - anomalies;
    std::uint64_t payments = 0;
    if (cfg_.n_tx == 0) {
      payments = static_cast<std::uint64_t>(std::llround(law.mean() * static_cast<double>(ordinary)));
    } else {
      if (cfg_.n_tx < n + anomaly_records + ordinary) {
        throw ConfigError("n_tx = " + std::to_string(cfg_.n_tx) + " leaves fewer ordinary payments than ordinary users");
      }
      payments = cfg_.n_tx - n - anomaly_records;
    }

    send_.assign(n, 0);
    recv_.assign(n, 0);
    std::vector<std::uint64_t> sends, receives;
    for (std::size_t u = 0; u < n; ++u) {
      if (anomalous_[u]) { continue; }
      sends.push_back(law.draw(rng_));
      receives.push_back(law.draw(rng_));
    }
    reconcile(sends, payments, rng_);
    reconcile(receives, payments, rng_);
    for (std::size_t u = 0, i = 0; u < n; ++u) {
      if (anomalous_[u]) { continue; }
      send_[u] = sends[i];
      recv_[u] = receives[i];
      ++i;
    }

    join_at_.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      double const frac = std::pow(static_cast<double>(j) / static_cast<double>(n), cfg_.densification_exponent);
      join_at_[j] = j < 2 ? 0 : static_cast<std::uint64_t>(std::floor(frac * static_cast<double>(payments)));
    }
    auto events = plan_events(planted, payments);

    send_pool_ = WeightTree(n);
    recv_pool_ = WeightTree(n);
    receipts_.assign(n, {});
    std::size_t joined = 0;
    std::size_t next_event = 0;
    auto const join = [&] {
      coinbase(joined);
      send_pool_.add(joined, static_cast<std::int64_t>(send_[joined]));
      recv_pool_.add(joined, static_cast<std::int64_t>(recv_[joined]));
      ++joined;
    };

    for (std::uint64_t p = 0; p <= payments; ++p) {
      while (joined < n && join_at_[joined] <= p) { join(); }
      while (next_event < events.size() && events[next_event].at <= p) { play(events[next_event++]); }
      if (p == payments) { break; }
      while (send_pool_.total() == 0 && joined < n) { join(); }
      auto const sender = send_pool_.find(draw(send_pool_));
      std::size_t receiver = 0;
      while (true) {
        auto const own = static_cast<std::int64_t>(recv_[sender]);
        recv_pool_.add(sender, -own);
        bool const found = recv_pool_.total() > 0;
        if (found) { receiver = recv_pool_.find(draw(recv_pool_)); }
        recv_pool_.add(sender, own);
        if (found) { break; }
        if (joined < n) {
          join();
          continue;
        }
        receiver = any_other_ordinary(sender, joined);
        break;
      }
      --send_[sender];
      send_pool_.add(sender, -1);
      if (recv_[receiver] > 0) {
        --recv_[receiver];
        recv_pool_.add(receiver, -1);
      }
      pay(sender, receiver, ordinary_amount(), false);
    }
    while (joined < n) { join(); }

    SynthOutput out;
    out.ledger = std::move(ledger_);
    for (auto u : planted) { out.labels.users.push_back(user_id(u)); }
    out.labels.txs = std::move(planted_txs_);
    return out;
  }

private:
  void validate() const
  {
    if (cfg_.n_users < 3) { throw ConfigError("n_users must be at least 3"); }
    if (!(cfg_.degree_exponent > 1.0)) { throw ConfigError("degree_exponent must exceed 1"); }
    if (!(cfg_.densification_exponent > 1.0)) { throw ConfigError("densification_exponent must exceed 1"); }
    if (!(cfg_.anomaly_rate >= 0.0 && cfg_.anomaly_rate <= 0.1)) {
      throw ConfigError("anomaly_rate must lie in [0, 0.1]");
    }
    auto const a = cfg_.anomaly_count();
    if (a > cfg_.n_users - 2) { throw ConfigError("more anomalies than users available"); }
    if (cfg_.anomaly_profile != AnomalyProfile::BurstSender && a == 1) {
      throw ConfigError("profile " + to_string(cfg_.anomaly_profile) + " needs at least two anomalous users");
    }
    if (cfg_.anomaly_profile == AnomalyProfile::RingCluster && a > 0 && a < 3) {
      throw ConfigError("ring-cluster needs at least three anomalous users");
    }
  }

  static NodeId user_id(std::size_t u) { return static_cast<NodeId>(u) + 1; }

  std::int64_t draw(WeightTree const &pool)
  {
    return static_cast<std::int64_t>(rng_.below(static_cast<std::uint64_t>(pool.total())));
  }

  std::size_t any_other_ordinary(std::size_t sender, std::size_t joined)
  {
    while (true) {
      auto const u = static_cast<std::size_t>(rng_.below(joined));
      if (u != sender && !anomalous_[u]) { return u; }
    }
  }

  // Number of anomalous payment records, fixed before the ordinary budget.
  std::uint64_t plan_anomaly_sizes(std::vector<std::size_t> const &planted, DiscretePowerLaw const &law)
  {
    std::uint64_t records = 0;
    switch (cfg_.anomaly_profile) {
    case AnomalyProfile::ExtremeValue:
      for (std::size_t i = 0; i < planted.size(); ++i) {
        extreme_sends_.push_back(law.draw(rng_));
        records += extreme_sends_.back();
      }
      break;
    case AnomalyProfile::RingCluster: {
      auto remaining = planted.size();
      while (remaining > 0) {
        std::size_t size = remaining <= 5 ? remaining : 3 + rng_.below(3);
        if (remaining - size > 0 && remaining - size < 3) { size = remaining - 3; }
        ring_sizes_.push_back(size);
        records += size * (size - 1);
        remaining -= size;
      }
      break;
    }
    case AnomalyProfile::BurstSender:
      for (std::size_t i = 0; i < planted.size(); ++i) {
        burst_sizes_.push_back(20 + rng_.below(31));
        records += burst_sizes_.back();
      }
      break;
    }
    return records;
  }

  std::uint64_t time_after(std::size_t a, std::size_t b, std::uint64_t payments)
  {
    auto const start = std::max(join_at_[a], join_at_[b]);
    return start + rng_.below(payments - start + 1);
  }

  std::vector<PlannedEvent> plan_events(std::vector<std::size_t> const &planted, std::uint64_t payments)
  {
    std::vector<PlannedEvent> events;
    switch (cfg_.anomaly_profile) {
    case AnomalyProfile::ExtremeValue: {
      // The first payment of each anomaly follows a random cycle so every
      // anomaly both sends and receives; later ones pick any other anomaly.
      std::vector<std::size_t> cycle(planted.size());
      std::iota(cycle.begin(), cycle.end(), std::size_t{0});
      rng_.shuffle(cycle.begin(), cycle.end());
      std::vector<std::size_t> successor(planted.size());
      for (std::size_t j = 0; j < cycle.size(); ++j) { successor[cycle[j]] = cycle[(j + 1) % cycle.size()]; }
      for (std::size_t i = 0; i < planted.size(); ++i) {
        for (std::uint64_t s = 0; s < extreme_sends_[i]; ++s) {
          auto other = successor[i];
          if (s > 0) {
            other = rng_.below(planted.size() - 1);
            if (other >= i) { ++other; }
          }
          auto const a = planted[i], b = planted[other];
          events.push_back({time_after(a, b, payments), a, b, rng_.uniform(50.0, 100.0), 0});
        }
      }
      break;
    }
    case AnomalyProfile::RingCluster: {
      std::size_t first = 0;
      for (auto size : ring_sizes_) {
        for (std::size_t i = first; i < first + size; ++i) {
          for (std::size_t j = first; j < first + size; ++j) {
            if (i == j) { continue; }
            events.push_back({time_after(planted[i], planted[j], payments), planted[i], planted[j], 0.0, 0});
          }
        }
        first += size;
      }
      break;
    }
    case AnomalyProfile::BurstSender:
      for (std::size_t i = 0; i < planted.size(); ++i) {
        auto const a = planted[i];
        events.push_back({time_after(a, a, payments), a, a, 0.0, burst_sizes_[i]});
      }
      break;
    }
    std::stable_sort(events.begin(), events.end(),
                     [](PlannedEvent const &x, PlannedEvent const &y) { return x.at < y.at; });
    return events;
  }

  void play(PlannedEvent const &e)
  {
    if (e.burst == 0) {
      auto const amount = e.multiplier > 0 ? e.multiplier * median_payment() : ordinary_amount();
      pay(e.sender, e.receiver, amount, true);
      return;
    }
    // Joined ordinary users exist: users 0 and 1 join before any payment.
    auto const joined = static_cast<std::size_t>(
        std::upper_bound(join_at_.begin(), join_at_.end(), e.at) - join_at_.begin());
    for (std::uint64_t b = 0; b < e.burst; ++b) {
      pay(e.sender, any_other_ordinary(e.sender, joined), ordinary_amount(), true, b > 0);
    }
  }

  static double median_payment() { return kMinPayment * std::pow(2.0, 1.0 / kPaymentTail); }

  double ordinary_amount()
  {
    double u = rng_.uniform();
    while (u <= 0.0) { u = rng_.uniform(); }
    return kMinPayment * std::pow(u, -1.0 / kPaymentTail);
  }

  std::int64_t next_timestamp(bool tight)
  {
    now_ += tight ? 1 : 1 + static_cast<std::int64_t>(std::floor(rng_.exponential(kMeanGapSeconds)));
    return now_;
  }

  void coinbase(std::size_t u)
  {
    LedgerRecord rec;
    rec.tx_id = ledger_.size() + 1;
    rec.timestamp = next_timestamp(false);
    rec.outputs.push_back({user_id(u), Amount::from_satoshis(kCoinbaseSats)});
    receipts_[u].push_back(rec.tx_id);
    ledger_.push_back(std::move(rec));
  }

  void pay(std::size_t sender, std::size_t receiver, double coins, bool planted, bool tight = false)
  {
    auto const sats = std::max<std::int64_t>(
        1, std::llround(coins * static_cast<double>(Amount::kSatoshisPerCoin)));
    LedgerRecord rec;
    rec.tx_id = ledger_.size() + 1;
    rec.timestamp = next_timestamp(tight);

    // Spend the most recent receipts: one, plus a geometric number more.
    auto const &owned = receipts_[sender];
    std::size_t count = 1;
    while (count < 4 && rng_.uniform() < 0.5) { ++count; }
    count = std::min(count, owned.size());
    auto const share = sats / static_cast<std::int64_t>(count);
    for (std::size_t i = 0; i < count; ++i) {
      auto const value = i + 1 == count ? sats - share * static_cast<std::int64_t>(count - 1) : share;
      rec.inputs.push_back({owned[owned.size() - count + i], user_id(sender), Amount::from_satoshis(value)});
    }
    rec.outputs.push_back({user_id(receiver), Amount::from_satoshis(sats)});
    receipts_[receiver].push_back(rec.tx_id);
    if (planted) { planted_txs_.push_back(rec.tx_id); }
    ledger_.push_back(std::move(rec));
  }

  SynthConfig cfg_;
  Rng rng_;
  std::vector<bool> anomalous_;
  std::vector<std::uint64_t> send_, recv_, join_at_;
  std::vector<std::uint64_t> extreme_sends_, burst_sizes_;
  std::vector<std::size_t> ring_sizes_;
  WeightTree send_pool_{0}, recv_pool_{0};
  std::vector<std::vector<std::uint64_t>> receipts_;
  Ledger ledger_;
  std::vector<NodeId> planted_txs_;
  std::int64_t now_ = kStartTime;
};

} // namespace

SynthOutput generate(SynthConfig const &cfg) { return Generator(cfg).run(); }

} // namespace ledgerlof
