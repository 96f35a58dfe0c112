#include "fixtures.hpp"

#include "ledgerlof/error.hpp"
#include "ledgerlof/features.hpp"
#include "ledgerlof/graph.hpp"
#include "ledgerlof/synth.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

using namespace ledgerlof;

namespace {

SynthConfig small(AnomalyProfile profile, std::uint64_t seed = 1)
{
  SynthConfig cfg;
  cfg.n_users = 2000;
  cfg.anomaly_profile = profile;
  cfg.seed = seed;
  return cfg;
}

std::string text(Ledger const &l)
{
  std::ostringstream out;
  write_ledger(out, l);
  return out.str();
}

} // namespace

TEST_CASE("anomaly count")
{
  SynthConfig cfg;
  cfg.n_users = 50'000;
  CHECK(cfg.anomaly_count() == 500);
  cfg.n_users = 20;
  cfg.anomaly_rate = 0.01;
  CHECK(cfg.anomaly_count() == 1);
  cfg.anomaly_rate = 0;
  CHECK(cfg.anomaly_count() == 0);
}

TEST_CASE("rate 0 plants nothing")
{
  auto cfg = small(AnomalyProfile::ExtremeValue);
  cfg.anomaly_rate = 0;
  auto const out = generate(cfg);
  CHECK(out.labels.users.empty());
  CHECK(out.labels.txs.empty());
}

TEST_CASE("same seed gives byte-identical ledgers, different seeds differ")
{
  auto const a = text(generate(small(AnomalyProfile::ExtremeValue, 7)).ledger);
  auto const b = text(generate(small(AnomalyProfile::ExtremeValue, 7)).ledger);
  auto const c = text(generate(small(AnomalyProfile::ExtremeValue, 8)).ledger);
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("every profile yields a valid ledger with labels that exist")
{
  for (auto profile : {AnomalyProfile::ExtremeValue, AnomalyProfile::RingCluster, AnomalyProfile::BurstSender}) {
    CAPTURE(to_string(profile));
    auto const out = generate(small(profile));
    CHECK_NOTHROW(validate_ledger(out.ledger));
    std::istringstream in(text(out.ledger));
    CHECK_NOTHROW(parse_ledger(in));

    auto const g = build_user_graph(out.ledger);
    std::set<NodeId> users(g.nodes.begin(), g.nodes.end());
    std::set<NodeId> txs;
    for (auto const &r : out.ledger) { txs.insert(r.tx_id); }
    CHECK(out.labels.users.size() == 20);
    CHECK(!out.labels.txs.empty());
    for (auto id : out.labels.users) { CHECK(users.count(id) == 1); }
    for (auto id : out.labels.txs) { CHECK(txs.count(id) == 1); }

    for (auto const &r : out.ledger) {
      if (!r.is_coinbase()) { CHECK(r.total_output() <= r.total_input()); }
    }
    std::set<NodeId> coinbase_users;
    for (auto const &r : out.ledger) {
      if (r.is_coinbase()) { coinbase_users.insert(r.outputs.front().user_id); }
    }
    CHECK(coinbase_users.size() == 2000);
  }
}

TEST_CASE("requested record count is honoured")
{
  auto cfg = small(AnomalyProfile::ExtremeValue);
  cfg.n_tx = 9000;
  CHECK(generate(cfg).ledger.size() == 9000);
}

TEST_CASE("ring members have clustering coefficient 1")
{
  auto const out = generate(small(AnomalyProfile::RingCluster, 4));
  auto const m = extract_user_features(build_user_graph(out.ledger));
  auto const col = m.column_of("clustering_coefficient");
  for (auto id : out.labels.users) { CHECK(m.values(m.row_of(id), col) == 1.0); }
}

TEST_CASE("burst senders have out-degree at least 20")
{
  auto const out = generate(small(AnomalyProfile::BurstSender, 5));
  auto const m = extract_user_features(build_user_graph(out.ledger));
  auto const col = m.column_of("out_degree");
  for (auto id : out.labels.users) { CHECK(m.values(m.row_of(id), col) >= 20.0); }
}

TEST_CASE("extreme-value anomalies receive far more than ordinary users")
{
  auto const out = generate(small(AnomalyProfile::ExtremeValue, 6));
  auto const m = extract_user_features(build_user_graph(out.ledger));
  auto const col = m.column_of("mean_in_value");
  std::set<NodeId> planted(out.labels.users.begin(), out.labels.users.end());
  std::vector<double> ordinary;
  for (Index i = 0; i < m.rows(); ++i) {
    if (planted.count(m.node_ids[static_cast<std::size_t>(i)]) == 0 && m.values(i, col) > 0) {
      ordinary.push_back(m.values(i, col));
    }
  }
  std::nth_element(ordinary.begin(), ordinary.begin() + static_cast<std::ptrdiff_t>(ordinary.size() / 2), ordinary.end());
  double const median = ordinary[ordinary.size() / 2];
  for (auto id : planted) { CHECK(m.values(m.row_of(id), col) > 20.0 * median); }
}

TEST_CASE("profile names")
{
  for (auto p : {AnomalyProfile::ExtremeValue, AnomalyProfile::RingCluster, AnomalyProfile::BurstSender}) {
    CHECK(parse_anomaly_profile(to_string(p)) == p);
  }
  CHECK(parse_anomaly_profile("RingCluster") == AnomalyProfile::RingCluster);
  CHECK_THROWS_AS(parse_anomaly_profile("sybil"), ConfigError);
}

TEST_CASE("infeasible configurations")
{
  auto bad = [](auto mutate) {
    SynthConfig cfg;
    cfg.n_users = 100;
    mutate(cfg);
    return cfg;
  };
  CHECK_THROWS_AS(generate(bad([](SynthConfig &c) { c.n_users = 2; })), ConfigError);
  CHECK_THROWS_AS(generate(bad([](SynthConfig &c) { c.degree_exponent = 1.0; })), ConfigError);
  CHECK_THROWS_AS(generate(bad([](SynthConfig &c) { c.densification_exponent = 0.5; })), ConfigError);
  CHECK_THROWS_AS(generate(bad([](SynthConfig &c) { c.anomaly_rate = 0.2; })), ConfigError);
  CHECK_THROWS_AS(generate(bad([](SynthConfig &c) { c.anomaly_rate = -0.01; })), ConfigError);
  CHECK_THROWS_AS(generate(bad([](SynthConfig &c) { c.n_tx = 50; })), ConfigError);
  // One anomaly cannot form a ring or pay another anomaly.
  CHECK_THROWS_AS(generate(bad([](SynthConfig &c) { c.anomaly_rate = 0.01; })), ConfigError);
  CHECK_THROWS_AS(generate(bad([](SynthConfig &c) {
                    c.anomaly_rate = 0.02;
                    c.anomaly_profile = AnomalyProfile::RingCluster;
                  })),
                  ConfigError);
  CHECK_NOTHROW(generate(bad([](SynthConfig &c) {
    c.anomaly_rate = 0.01;
    c.anomaly_profile = AnomalyProfile::BurstSender;
  })));
}
