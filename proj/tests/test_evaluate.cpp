#include "fixtures.hpp"

#include "ledgerlof/error.hpp"
#include "ledgerlof/evaluate.hpp"
#include "ledgerlof/features.hpp"
#include "ledgerlof/graph.hpp"
#include "ledgerlof/scoring.hpp"
#include "ledgerlof/synth.hpp"

#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <set>

using namespace ledgerlof;
using fixtures::ledger_from;

namespace {

std::vector<LofResult> ranked(std::vector<NodeId> const &ids)
{
  std::vector<LofResult> out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    LofResult r;
    r.node_id = ids[i];
    r.rank = static_cast<Index>(i + 1);
    r.lof = static_cast<double>(ids.size() - i);
    out.push_back(r);
  }
  return out;
}

struct Fixture30
{
  FeatureMatrix m;
  Clustering<double> c;
};

// Three 1-D clusters of ten points each; node id = row + 1.
Fixture30 thirty()
{
  Fixture30 f;
  f.m.feature_names = {"x"};
  f.m.values.resize(30, 1);
  f.c.k = 3;
  f.c.centroids.resize(3, 1);
  for (int i = 0; i < 30; ++i) {
    f.m.node_ids.push_back(static_cast<NodeId>(i + 1));
    int const cl = i / 10, j = i % 10;
    double v = 0;
    if (cl == 0) { v = j; }
    if (cl == 1) { v = 100 + j; }
    if (cl == 2) { v = j == 9 ? 210 : 200; }
    f.m.values(i, 0) = v;
    f.c.assignments.push_back(cl);
  }
  f.c.centroids << 4.5, 104.5, 201;
  return f;
}

} // namespace

TEST_CASE("centroid ratio on the 30-point instance")
{
  auto const f = thirty();
  // Top three: value 9 (ratio 4.5 / 4.5), value 102 (2.5 / 4.5), value 210 (9 / 9).
  auto const results = ranked({10, 13, 30, 1, 2});
  auto const r = centroid_ratio(results, f.c, f.m, 3);
  CHECK(r.ratio == doctest::Approx(23.0 / 27.0).epsilon(1e-12));
  CHECK(r.zero_spread_outliers.empty());
  CHECK_THROWS_AS(centroid_ratio(results, f.c, f.m, 6), InsufficientDataError);
}

TEST_CASE("centroid ratio extremes")
{
  auto f = thirty();
  // Farthest member of each cluster: values 0 (or 9), 100, 210.
  CHECK(centroid_ratio(ranked({1, 11, 30}), f.c, f.m, 3).ratio == doctest::Approx(1.0));
  // Outliers sitting exactly on their centroids.
  f.c.centroids << 3, 104, 200;
  CHECK(centroid_ratio(ranked({4, 15, 21}), f.c, f.m, 3).ratio == 0.0);
}

TEST_CASE("translation leaves the centroid ratio unchanged")
{
  auto f = thirty();
  auto const base = centroid_ratio(ranked({10, 13, 30}), f.c, f.m, 3).ratio;
  f.m.values.array() += 1234.5;
  f.c.centroids.array() += 1234.5;
  CHECK(centroid_ratio(ranked({10, 13, 30}), f.c, f.m, 3).ratio == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("a singleton cluster counts as ratio 1 and is reported")
{
  FeatureMatrix m;
  m.feature_names = {"x"};
  m.node_ids = {1, 2, 3};
  m.values.resize(3, 1);
  m.values << 0, 2, 50;
  Clustering<double> c;
  c.k = 2;
  c.centroids.resize(2, 1);
  c.centroids << 1, 50;
  c.assignments = {0, 0, 1};
  auto const r = centroid_ratio(ranked({3, 1}), c, m, 2);
  CHECK(r.ratio == doctest::Approx(1.0));
  CHECK(r.zero_spread_outliers == std::vector<NodeId>{3});
}

TEST_CASE("m_DE from the published A1 and A2")
{
  CHECK(dual_evaluation_metric(0.72, 0.37) == doctest::Approx(0.545).epsilon(1e-15));
}

TEST_CASE("5-transaction ledger where outliers coincide")
{
  auto const l = ledger_from("1,1,,1:50.0\n2,2,,2:50.0\n3,3,1:1:50.0,3:50.0\n4,4,,4:50.0\n5,5,4:4:50.0,5:50.0\n");
  auto const d = dual_metric(ranked({1, 3, 2, 4, 5}), ranked({3, 1, 2, 4, 5}), l, 1, 1);
  CHECK(d.top_user_outliers == std::vector<NodeId>{1});
  CHECK(d.top_tx_outliers == std::vector<NodeId>{3});
  CHECK(d.x_n == std::vector<NodeId>{1, 3});
  CHECK(d.y_m == std::vector<NodeId>{1, 3});
  CHECK(d.a1 == 1.0);
  CHECK(d.a2 == 1.0);
  CHECK(d.m_de == 1.0);
}

TEST_CASE("5-transaction ledger with partial agreement")
{
  auto const l = ledger_from("1,1,,1:50.0\n2,2,,2:50.0\n3,3,1:1:50.0,3:50.0\n4,4,,4:50.0\n5,5,4:4:50.0,5:50.0\n");
  auto const d = dual_metric(ranked({4, 1, 2, 3, 5}), ranked({5, 2, 4, 1, 3}), l, 2, 1);
  CHECK(d.x_n == std::vector<NodeId>{1, 3, 4, 5});
  CHECK(d.y_m == std::vector<NodeId>{4, 5});
  CHECK(d.a1 == 0.75);
  CHECK(d.a2 == 0.5);
  CHECK(d.m_de == 0.625);
}

TEST_CASE("no overlap, undefined metric and role symmetry")
{
  std::vector<std::pair<NodeId, NodeId>> inc{{1, 12}, {2, 12}, {3, 10}, {4, 11}};
  auto const d = dual_metric({1, 2, 3, 4}, {10, 11, 12}, inc, 1, 1);
  CHECK(d.x_n == std::vector<NodeId>{12});
  CHECK(d.y_m == std::vector<NodeId>{3});
  CHECK(d.a1 == 0.0);
  CHECK(d.a2 == 0.0);
  CHECK(d.m_de == 0.0);

  CHECK_THROWS_AS(dual_metric({5, 1}, {10, 11, 12}, inc, 1, 1), UndefinedMetricError);
  CHECK_THROWS_AS(dual_metric({1, 2}, {13, 10}, inc, 1, 1), UndefinedMetricError);

  std::vector<std::pair<NodeId, NodeId>> flipped;
  for (auto [a, b] : inc) { flipped.emplace_back(b, a); }
  std::vector<NodeId> const users{4, 1, 3, 2}, txs{12, 11, 10};
  auto const ab = dual_metric(users, txs, inc, 2, 1);
  auto const ba = dual_metric(txs, users, flipped, 1, 2);
  CHECK(ab.a1 == ba.a2);
  CHECK(ab.a2 == ba.a1);
  CHECK(ab.m_de == ba.m_de);
  CHECK(ab.m_de >= 0.0);
  CHECK(ab.m_de <= 1.0);
}

TEST_CASE("label checks")
{
  auto const results = ranked({7, 3, 9, 1, 4});
  CHECK(label_check(results, {100, 1}, 3).empty());
  auto const hits = label_check(results, {4, 7, 1}, 5);
  REQUIRE(hits.size() == 3);
  CHECK(hits[0].label == 7);
  CHECK(hits[0].rank == 1);
  CHECK(hits[1].label == 1);
  CHECK(hits[1].rank == 4);
  CHECK(hits[2].label == 4);
}

TEST_CASE("planted labels: hits equal an independent set intersection")
{
  SynthConfig cfg;
  cfg.n_users = 3000;
  cfg.seed = 3;
  auto const out = generate(cfg);
  auto const m = normalize(extract_user_features(build_user_graph(out.ledger)));
  auto const results = score_all(m, {}, nullptr, 100);
  std::set<NodeId> top;
  for (Index i = 0; i < 100; ++i) { top.insert(results[static_cast<std::size_t>(i)].node_id); }
  std::size_t expected = 0;
  for (auto id : out.labels.users) { expected += top.count(id); }
  CHECK(label_check(results, out.labels.users, 100).size() == expected);
}

TEST_CASE("labels file round trip and bad lines")
{
  auto const dir = fixtures::temp_dir("labels");
  Labels labels{{5, 2, 9}, {40}};
  write_labels(dir / "labels.txt", labels);
  auto const back = read_labels(dir / "labels.txt");
  CHECK(back.users == labels.users);
  CHECK(back.txs == labels.txs);
  std::ofstream(dir / "bad.txt") << "user:1\nnode:2\n";
  CHECK_THROWS_AS(read_labels(dir / "bad.txt"), ParseError);
}
