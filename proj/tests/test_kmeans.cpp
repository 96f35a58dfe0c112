#include "fixtures.hpp"
#include "oracle.hpp"

#include "ledgerlof/clustering.hpp"
#include "ledgerlof/error.hpp"
#include "ledgerlof/kmeans.hpp"

#include <doctest.h>

#include <map>
#include <set>

using namespace ledgerlof;

namespace {

FeatureMatrix as_features(RowMatrixXd const &x)
{
  FeatureMatrix m;
  for (Index j = 0; j < x.cols(); ++j) { m.feature_names.push_back("f" + std::to_string(j)); }
  for (Index i = 0; i < x.rows(); ++i) { m.node_ids.push_back(static_cast<NodeId>(100 + i)); }
  m.values = x;
  return m;
}

double purity(std::vector<int> const &assignments, std::vector<int> const &labels)
{
  std::map<int, std::map<int, int>> table;
  for (std::size_t i = 0; i < labels.size(); ++i) { ++table[assignments[i]][labels[i]]; }
  int agree = 0;
  for (auto const &[c, row] : table) {
    int best = 0;
    for (auto const &[l, count] : row) { best = std::max(best, count); }
    agree += best;
  }
  return static_cast<double>(agree) / static_cast<double>(labels.size());
}

bool non_increasing(std::vector<double> const &h)
{
  for (std::size_t i = 1; i < h.size(); ++i) {
    if (h[i] > h[i - 1]) { return false; }
  }
  return true;
}

} // namespace

TEST_CASE("two separated pairs in 1-D")
{
  RowMatrixXd x(4, 1);
  x << 0, 0.1, 10, 10.1;
  KMeansOptions opt;
  opt.k = 2;
  auto const c = kmeans(x, opt);
  std::set<double> centres{c.centroids(0, 0), c.centroids(1, 0)};
  CHECK(*centres.begin() == doctest::Approx(0.05));
  CHECK(*centres.rbegin() == doctest::Approx(10.05));
  CHECK(c.wcss == doctest::Approx(0.01));
  CHECK(c.converged);
}

TEST_CASE("k = 1 gives the mean and n times the total variance")
{
  auto const x = fixtures::uniform_points(50, 3, 7);
  KMeansOptions opt;
  opt.k = 1;
  auto const c = kmeans(x, opt);
  Eigen::RowVectorXd const mean = x.colwise().mean();
  CHECK((c.centroids.row(0) - mean).norm() < 1e-12);
  double const total = (x.rowwise() - mean).squaredNorm();
  CHECK(c.wcss == doctest::Approx(total).epsilon(1e-12));
}

TEST_CASE("three tight blobs are recovered with purity 1")
{
  std::vector<int> labels;
  auto const x = fixtures::blob_points(3, 20, 2, 0.1, 10.0, 3, &labels);
  KMeansOptions opt;
  opt.k = 3;
  opt.init = KMeansInit::FurthestPoint;
  auto const c = kmeans(x, opt);
  CHECK(purity(c.assignments, labels) == 1.0);
  for (auto s : c.cluster_sizes()) { CHECK(s == 20); }
}

TEST_CASE("invariants: wcss recomputes, no empty cluster, objective non-increasing")
{
  auto const x = fixtures::uniform_points(400, 4, 21);
  for (int k : {2, 5, 9}) {
    for (std::uint64_t seed : {0u, 1u, 2u}) {
      for (auto init : {KMeansInit::Random, KMeansInit::FurthestPoint}) {
        KMeansOptions opt;
        opt.k = k;
        opt.seed = seed;
        opt.init = init;
        auto const c = kmeans(x, opt);
        CHECK(non_increasing(c.wcss_history));
        double wcss = 0;
        for (Index i = 0; i < x.rows(); ++i) {
          auto const a = c.assignments[static_cast<std::size_t>(i)];
          REQUIRE(a >= 0);
          REQUIRE(a < k);
          wcss += (x.row(i) - c.centroids.row(a)).squaredNorm();
        }
        CHECK(c.wcss == doctest::Approx(wcss).epsilon(1e-9));
        for (auto s : c.cluster_sizes()) { CHECK(s > 0); }
      }
    }
  }
}

TEST_CASE("empty clusters are repaired on data with many duplicates")
{
  RowMatrixXd x(30, 1);
  for (Index i = 0; i < 30; ++i) { x(i, 0) = i < 25 ? 0.0 : static_cast<double>(i); }
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    KMeansOptions opt;
    opt.k = 6;
    opt.seed = seed;
    auto const c = kmeans(x, opt);
    for (auto s : c.cluster_sizes()) { CHECK(s > 0); }
    CHECK(non_increasing(c.wcss_history));
  }
}

TEST_CASE("k beyond the distinct rows is infeasible")
{
  RowMatrixXd x(5, 2);
  x << 1, 1, 1, 1, 2, 2, 2, 2, 3, 3;
  KMeansOptions opt;
  opt.k = 4;
  CHECK_THROWS_AS(kmeans(x, opt), InfeasibleError);
  opt.k = 3;
  CHECK_NOTHROW(kmeans(x, opt));
  opt.k = 0;
  CHECK_THROWS_AS(kmeans(x, opt), InfeasibleError);
}

TEST_CASE("same input, k and seed give bit-identical output, also across thread counts")
{
  auto const x = fixtures::uniform_points(500, 5, 8);
  KMeansOptions opt;
  opt.k = 7;
  opt.seed = 42;
  opt.threads = 1;
  auto const a = kmeans(x, opt);
  opt.threads = 3;
  auto const b = kmeans(x, opt);
  CHECK(a.assignments == b.assignments);
  CHECK(a.centroids == b.centroids);
  CHECK(a.wcss_history == b.wcss_history);
}

TEST_CASE("permuting feature rows permutes assignments identically")
{
  auto const x = fixtures::uniform_points(200, 3, 13);
  auto const m = as_features(x);
  FeatureMatrix shuffled = m;
  std::vector<Index> perm(200);
  for (Index i = 0; i < 200; ++i) { perm[static_cast<std::size_t>(i)] = (i * 37) % 200; }
  for (Index i = 0; i < 200; ++i) {
    shuffled.node_ids[static_cast<std::size_t>(i)] = m.node_ids[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
    shuffled.values.row(i) = m.values.row(perm[static_cast<std::size_t>(i)]);
  }
  KMeansOptions opt;
  opt.k = 4;
  opt.seed = 5;
  auto const a = kmeans(m, opt);
  auto const b = kmeans(shuffled, opt);
  CHECK(a.centroids == b.centroids);
  for (auto id : m.node_ids) { CHECK(assign(m, a, id).first == assign(shuffled, b, id).first); }
}

TEST_CASE("entropy matches the oracle and select_k finds two blobs")
{
  // One tight blob and a copy shifted far along every axis.
  auto const blob = fixtures::blob_points(1, 40, 3, 0.05, 0.0, 6);
  RowMatrixXd x(80, 3);
  x.topRows(40) = blob;
  x.bottomRows(40) = blob.array() + 20.0;
  KMeansOptions base;
  base.seed = 3;
  auto const sel = select_k(x, 2, 4, base);
  REQUIRE(sel.entropies.size() == 3);
  for (auto const &[k, e] : sel.entropies) {
    base.k = k;
    auto const c = kmeans(x, base);
    CHECK(e == doctest::Approx(oracle::entropy(x, c.assignments)).epsilon(1e-12));
  }
  double best = 1e300;
  int best_k = 0;
  for (auto const &[k, e] : sel.entropies) {
    if (e < best) { best = e, best_k = k; }
  }
  CHECK(sel.best_k == best_k);
  CHECK(sel.best_k == 2);
}

TEST_CASE("identical points tie at the smallest k")
{
  RowMatrixXd x = RowMatrixXd::Constant(12, 2, 0.5);
  auto const sel = select_k(x, 2, 5);
  CHECK(sel.best_k == 2);
  for (auto const &[k, e] : sel.entropies) { CHECK(e == sel.entropies.front().second); }
}

TEST_CASE("the 2..10 range yields nine entries")
{
  auto const x = fixtures::uniform_points(300, 6, 31);
  auto const sel = select_k(as_features(x), 2, 10);
  CHECK(sel.entropies.size() == 9);
  CHECK(sel.entropies.front().first == 2);
  CHECK(sel.entropies.back().first == 10);
  CHECK_THROWS_AS(select_k(x, 3, 2), ConfigError);
}

TEST_CASE("assign: exact match, tie rule, oracle and unknown node")
{
  auto const m = as_features(fixtures::blob_points(4, 25, 2, 0.5, 5.0, 2));
  KMeansOptions opt;
  opt.k = 4;
  auto const c = kmeans(m, opt);
  for (Index i = 0; i < m.rows(); ++i) {
    auto const [cl, d] = assign(m, c, m.node_ids[static_cast<std::size_t>(i)]);
    auto const [ocl, od] = oracle::nearest(c.centroids, m.values.row(i));
    CHECK(cl == ocl);
    CHECK(d == doctest::Approx(od).epsilon(1e-12));
  }
  CHECK_THROWS_AS(assign(m, c, 1), LookupError);

  Clustering<double> fixed;
  fixed.k = 4;
  fixed.centroids.resize(4, 1);
  fixed.centroids << 0, -1, 1, 7;
  FeatureMatrix p;
  p.feature_names = {"x"};
  p.node_ids = {1, 2};
  p.values.resize(2, 1);
  p.values << 0, 7;
  fixed.assignments = {0, 3};
  CHECK(assign(p, fixed, 1) == std::pair<int, double>{0, 0.0});
  CHECK(assign(p, fixed, 2) == std::pair<int, double>{3, 0.0});
  // Point 0 is equidistant from centroids 1 (-1) and 2 (1) once centroid 0 moves away.
  fixed.centroids(0, 0) = 50;
  CHECK(assign(p, fixed, 1) == std::pair<int, double>{1, 1.0});
}

TEST_CASE("clustering TSV round trip")
{
  auto const dir = fixtures::temp_dir("kmeans");
  auto const m = as_features(fixtures::uniform_points(60, 3, 4));
  KMeansOptions opt;
  opt.k = 3;
  auto const c = kmeans(m, opt);
  write_assignments(dir / "a.tsv", m, c);
  write_centroids(dir / "c.tsv", m, c);
  auto const back = read_clustering(dir / "a.tsv", dir / "c.tsv", m);
  CHECK(back.k == 3);
  CHECK(back.centroids.isApprox(c.centroids, 1e-12));
  // Rows come back in node-id order, which is the same order here.
  CHECK(back.assignments == c.assignments);
  CHECK(back.wcss == doctest::Approx(c.wcss).epsilon(1e-9));
}
