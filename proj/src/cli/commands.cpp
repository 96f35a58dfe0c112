#include "ledgerlof/cli.hpp"

#include "config.hpp"
#include "manifest.hpp"

#include "ledgerlof/clustering.hpp"
#include "ledgerlof/error.hpp"
#include "ledgerlof/evaluate.hpp"
#include "ledgerlof/features.hpp"
#include "ledgerlof/graph.hpp"
#include "ledgerlof/ledger.hpp"
#include "ledgerlof/powerlaw.hpp"
#include "ledgerlof/scoring.hpp"
#include "ledgerlof/synth.hpp"
#include "ledgerlof/tsv.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>

namespace ledgerlof::cli {

namespace {

namespace fs = std::filesystem;

/// Problems with the invocation itself; reported with exit code 2.
class UsageError : public Error
{
public:
  explicit UsageError(std::string const &message) : Error("usage", message) {}
};

struct Stage
{
  std::ostream &out;
  unsigned threads = 0;
  RunManifest manifest;

  void input(fs::path const &p) { manifest.inputs.push_back(p); }
  void output(fs::path const &p) { manifest.outputs.push_back(p); }
  void meta(std::string const &key, std::string const &value) { manifest.metadata[key] = value; }
};

std::string fmt(double v) { return tsv::format_double(v); }

// ---------------------------------------------------------------- synth

struct SynthArgs
{
  SynthConfig cfg;
  std::string profile = "extreme-value";
  fs::path out, labels;
};

void add_synth(CLI::App &app, SynthArgs &a)
{
  auto *s = app.add_subcommand("synth", "Generate a synthetic ledger with planted anomalies");
  s->add_option("--n-users", a.cfg.n_users, "Number of users")->capture_default_str();
  s->add_option("--n-tx", a.cfg.n_tx, "Total records; 0 picks one to match the degree law")->capture_default_str();
  s->add_option("--degree-exponent", a.cfg.degree_exponent, "Target degree exponent gamma")->capture_default_str();
  s->add_option("--densification-exponent", a.cfg.densification_exponent, "Target densification exponent alpha")
      ->capture_default_str();
  s->add_option("--anomaly-rate", a.cfg.anomaly_rate, "Share of users planted as anomalies")->capture_default_str();
  s->add_option("--anomaly-profile", a.profile, "extreme-value, ring-cluster or burst-sender")->capture_default_str();
  s->add_option("--seed", a.cfg.seed, "Random seed")->capture_default_str();
  s->add_option("--out", a.out, "Ledger CSV to write")->required();
  s->add_option("--labels", a.labels, "Labels file to write");
}

void run_synth(SynthArgs &a, Stage &st)
{
  a.cfg.anomaly_profile = parse_anomaly_profile(a.profile);
  auto const result = generate(a.cfg);
  write_ledger(a.out, result.ledger);
  st.output(a.out);
  if (!a.labels.empty()) {
    write_labels(a.labels, result.labels);
    st.output(a.labels);
  }
  st.manifest.seed = std::to_string(a.cfg.seed);
  st.meta("records", std::to_string(result.ledger.size()));
  st.meta("planted_users", std::to_string(result.labels.users.size()));
  st.out << "records=" << result.ledger.size() << " users=" << a.cfg.n_users
         << " planted_users=" << result.labels.users.size() << '\n';
}

// ---------------------------------------------------------------- build

struct BuildArgs
{
  fs::path ledger, out, nodes;
  std::string graph = "user";
};

void add_build(CLI::App &app, BuildArgs &a)
{
  auto *s = app.add_subcommand("build", "Parse a ledger and write the user or transaction graph");
  s->alias("ingest");
  s->add_option("--ledger", a.ledger, "Ledger CSV")->required()->check(CLI::ExistingFile);
  s->add_option("--graph", a.graph, "user or tx")->capture_default_str();
  s->add_option("--out", a.out, "Edge TSV to write")->required();
  s->add_option("--nodes", a.nodes, "Node list TSV to write");
}

void run_build(BuildArgs const &a, Stage &st)
{
  auto const kind = parse_graph_kind(a.graph);
  st.input(a.ledger);
  auto const records = parse_ledger(a.ledger);
  auto const g = build_graph(records, kind);
  tsv::write_atomically(a.out, [&](std::ostream &o) {
    o << "src\tdst\tvalue\ttimestamp\ttx_id\n";
    for (auto const &e : g.edges) {
      o << e.src << '\t' << e.dst << '\t' << fmt(e.value) << '\t' << e.timestamp << '\t' << e.tx_id << '\n';
    }
  });
  st.output(a.out);
  if (!a.nodes.empty()) {
    tsv::write_atomically(a.nodes, [&](std::ostream &o) {
      o << "node_id\n";
      for (auto id : g.nodes) { o << id << '\n'; }
    });
    st.output(a.nodes);
  }
  st.meta("graph", std::string(to_string(kind)));
  st.meta("nodes", std::to_string(g.node_count()));
  st.meta("edges", std::to_string(g.edges.size()));
  st.out << "records=" << records.size() << " nodes=" << g.node_count() << " edges=" << g.edges.size() << '\n';
}

// ---------------------------------------------------------------- features

struct FeaturesArgs
{
  fs::path ledger, out, raw, extended;
  std::string graph = "user";
};

void add_features(CLI::App &app, FeaturesArgs &a)
{
  auto *s = app.add_subcommand("features", "Extract and normalize per-node features");
  s->add_option("--ledger", a.ledger, "Ledger CSV")->required()->check(CLI::ExistingFile);
  s->add_option("--graph", a.graph, "user or tx")->capture_default_str();
  s->add_option("--out", a.out, "Normalized feature TSV to write")->required();
  s->add_option("--raw", a.raw, "Raw feature TSV to write");
  s->add_option("--extended", a.extended, "Extended feature TSV to write");
}

FeatureMatrix raw_features(Ledger const &records, NodeGraph const &g, unsigned threads)
{
  return g.kind == GraphKind::User ? extract_user_features(g, threads) : extract_tx_features(g, records, threads);
}

void run_features(FeaturesArgs const &a, Stage &st)
{
  auto const kind = parse_graph_kind(a.graph);
  st.input(a.ledger);
  auto const records = parse_ledger(a.ledger);
  auto const g = build_graph(records, kind);
  auto const raw = raw_features(records, g, st.threads);
  write_features(a.out, normalize(raw));
  st.output(a.out);
  if (!a.raw.empty()) {
    write_features(a.raw, raw);
    st.output(a.raw);
  }
  if (!a.extended.empty()) {
    write_features(a.extended, extract_extended_features(g, records));
    st.output(a.extended);
  }
  st.meta("graph", std::string(to_string(kind)));
  st.meta("nodes", std::to_string(raw.rows()));
  st.out << "nodes=" << raw.rows() << " features=" << raw.cols() << '\n';
}

// ---------------------------------------------------------------- powerlaw

struct PowerlawArgs
{
  fs::path ledger, out, summary;
  std::string graph = "user";
  std::string fit = "densification";
  std::string feature = "in_degree";
  std::string binning = "log";
  double ratio = 2.0;
  int snapshots = kDefaultSnapshots;
  double threshold = kDefaultDeviationThreshold;
};

void add_powerlaw(CLI::App &app, PowerlawArgs &a)
{
  auto *s = app.add_subcommand("powerlaw", "Fit a densification or degree power law");
  s->add_option("--ledger", a.ledger, "Ledger CSV")->required()->check(CLI::ExistingFile);
  s->add_option("--graph", a.graph, "user or tx")->capture_default_str();
  s->add_option("--fit", a.fit, "densification or distribution")->capture_default_str();
  s->add_option("--feature", a.feature, "Raw feature whose distribution is fitted")->capture_default_str();
  s->add_option("--binning", a.binning, "log or exact")->capture_default_str();
  s->add_option("--ratio", a.ratio, "Log bin ratio")->capture_default_str();
  s->add_option("--snapshots", a.snapshots, "Snapshots for densification")->capture_default_str();
  s->add_option("--threshold", a.threshold, "Deviation threshold in residual standard deviations")
      ->capture_default_str();
  s->add_option("--out", a.out, "Fit point TSV to write")->required();
  s->add_option("--summary", a.summary, "File to receive the summary line");
}

void run_powerlaw(PowerlawArgs const &a, Stage &st)
{
  auto const kind = parse_graph_kind(a.graph);
  st.input(a.ledger);
  auto const records = parse_ledger(a.ledger);
  PowerLawFit fit;
  if (a.fit == "densification") {
    fit = densification_fit(densification_series(records, kind, a.snapshots));
  } else if (a.fit == "distribution") {
    Binning binning;
    if (a.binning == "log") {
      binning = Binning::log(a.ratio);
    } else if (a.binning == "exact") {
      binning = Binning::exact();
    } else {
      throw ConfigError("unknown binning '" + a.binning + "' (expected log or exact)");
    }
    auto const g = build_graph(records, kind);
    auto const m = raw_features(records, g, st.threads);
    auto const col = m.column_of(a.feature);
    std::vector<double> values(static_cast<std::size_t>(m.rows()));
    for (Index i = 0; i < m.rows(); ++i) { values[static_cast<std::size_t>(i)] = m.values(i, col); }
    fit = distribution_fit(values, binning);
  } else {
    throw ConfigError("unknown fit '" + a.fit + "' (expected densification or distribution)");
  }
  tsv::write_atomically(a.out, [&](std::ostream &o) { write_fit_points(o, fit); });
  st.output(a.out);
  auto const summary = fit_summary(fit);
  if (!a.summary.empty()) {
    tsv::write_atomically(a.summary, [&](std::ostream &o) { o << summary << '\n'; });
    st.output(a.summary);
  }
  auto const deviating = deviation_points(fit, a.threshold);
  st.meta("exponent", fmt(fit.exponent));
  st.meta("r2", fmt(fit.r_squared));
  st.meta("deviation_points", std::to_string(deviating.size()));
  st.out << summary << '\n';
}

// ---------------------------------------------------------------- cluster

struct ClusterArgs
{
  fs::path features, out, centroids, entropy;
  int k = 7;
  std::string select_k;
  std::uint64_t seed = 0;
  int max_iter = 100;
  std::string init = "random";
};

void add_cluster(CLI::App &app, ClusterArgs &a)
{
  auto *s = app.add_subcommand("cluster", "Cluster nodes with k-means");
  s->add_option("--features", a.features, "Normalized feature TSV")->required()->check(CLI::ExistingFile);
  auto *k = s->add_option("--k", a.k, "Number of clusters")->capture_default_str();
  s->add_option("--select-k", a.select_k, "Pick k by entropy from a range lo..hi")->excludes(k);
  s->add_option("--seed", a.seed, "Random seed")->capture_default_str();
  s->add_option("--max-iter", a.max_iter, "Iteration limit")->capture_default_str();
  s->add_option("--init", a.init, "random or furthest")->capture_default_str();
  s->add_option("--out", a.out, "Assignment TSV to write")->required();
  s->add_option("--centroids", a.centroids, "Centroid TSV to write")->required();
  s->add_option("--entropy", a.entropy, "Entropy curve TSV to write (with --select-k)");
}

std::pair<int, int> parse_range(std::string const &text)
{
  auto const dots = text.find("..");
  if (dots == std::string::npos) { throw ConfigError("k range must look like lo..hi"); }
  try {
    return {std::stoi(text.substr(0, dots)), std::stoi(text.substr(dots + 2))};
  } catch (std::exception const &) {
    throw ConfigError("k range must look like lo..hi");
  }
}

void run_cluster(ClusterArgs const &a, Stage &st)
{
  st.input(a.features);
  auto const m = read_features(a.features);
  KMeansOptions opt;
  opt.k = a.k;
  opt.seed = a.seed;
  opt.max_iter = a.max_iter;
  opt.threads = st.threads;
  if (a.init == "random") {
    opt.init = KMeansInit::Random;
  } else if (a.init == "furthest") {
    opt.init = KMeansInit::FurthestPoint;
  } else {
    throw ConfigError("unknown init '" + a.init + "' (expected random or furthest)");
  }
  if (!a.select_k.empty()) {
    auto const [lo, hi] = parse_range(a.select_k);
    auto const sel = select_k(m, lo, hi, opt);
    opt.k = sel.best_k;
    if (!a.entropy.empty()) {
      tsv::write_atomically(a.entropy, [&](std::ostream &o) {
        o << "k\tentropy\n";
        for (auto const &[k, e] : sel.entropies) { o << k << '\t' << fmt(e) << '\n'; }
      });
      st.output(a.entropy);
    }
  }
  auto const c = kmeans(m, opt);
  write_assignments(a.out, m, c);
  write_centroids(a.centroids, m, c);
  st.output(a.out);
  st.output(a.centroids);
  st.manifest.seed = std::to_string(a.seed);
  st.meta("k", std::to_string(c.k));
  st.meta("wcss", fmt(c.wcss));
  st.meta("iterations", std::to_string(c.iterations));
  st.meta("converged", c.converged ? "true" : "false");
  st.out << "k=" << c.k << " wcss=" << fmt(c.wcss) << " iterations=" << c.iterations << '\n';
}

// ---------------------------------------------------------------- lof

struct LofArgs
{
  fs::path features, assignments, centroids, out, top_out;
  int k_neighbors = 7;
  std::string mode = "exact";
  Index top = 100;
};

void add_lof(CLI::App &app, LofArgs &a)
{
  auto *s = app.add_subcommand("lof", "Score nodes with the local outlier factor");
  s->add_option("--features", a.features, "Normalized feature TSV")->required()->check(CLI::ExistingFile);
  s->add_option("--k-neighbors", a.k_neighbors, "Neighborhood size")->capture_default_str();
  s->add_option("--mode", a.mode, "exact or cluster")->capture_default_str();
  s->add_option("--assignments", a.assignments, "Assignment TSV (cluster mode)")->check(CLI::ExistingFile);
  s->add_option("--centroids", a.centroids, "Centroid TSV (cluster mode)")->check(CLI::ExistingFile);
  s->add_option("--top", a.top, "Number of outliers to flag")->capture_default_str();
  s->add_option("--out", a.out, "Ranked LOF TSV to write")->required();
  s->add_option("--top-out", a.top_out, "TSV of the flagged outliers only");
}

void run_lof(LofArgs const &a, Stage &st)
{
  st.input(a.features);
  auto const m = read_features(a.features);
  NeighborQuery q{a.k_neighbors, parse_lof_mode(a.mode)};
  std::optional<Clustering<double>> c;
  if (q.mode == LofMode::ClusterRestricted) {
    if (a.assignments.empty() || a.centroids.empty()) {
      throw UsageError("--mode cluster needs --assignments and --centroids");
    }
    st.input(a.assignments);
    st.input(a.centroids);
    c = read_clustering(a.assignments, a.centroids, m);
  }
  LofReport report;
  auto const results = score_all(m, q, c ? &*c : nullptr, a.top, st.threads, &report);
  write_lof(a.out, results);
  st.output(a.out);
  if (!a.top_out.empty()) {
    auto const n = std::min<std::size_t>(results.size(), static_cast<std::size_t>(a.top));
    write_lof(a.top_out, {results.begin(), results.begin() + static_cast<std::ptrdiff_t>(n)});
    st.output(a.top_out);
  }
  st.meta("mode", to_string(q.mode));
  st.meta("approximate", report.approximate ? "true" : "false");
  st.meta("k_neighbors", std::to_string(q.k_neighbors));
  st.meta("fallback_nodes", std::to_string(report.fallback_nodes.size()));
  st.out << "scored=" << results.size() << " mode=" << to_string(q.mode)
         << (report.approximate ? " approximate=true" : "") << " fallback_nodes=" << report.fallback_nodes.size()
         << '\n';
  auto const shown = std::min<std::size_t>(results.size(), static_cast<std::size_t>(std::min<Index>(a.top, 10)));
  for (std::size_t i = 0; i < shown; ++i) {
    st.out << results[i].rank << '\t' << results[i].node_id << '\t' << fmt(results[i].lof) << '\n';
  }
}

// ---------------------------------------------------------------- eval

struct EvalArgs
{
  fs::path ledger, user_lof, tx_lof, labels, out;
  fs::path user_features, user_assignments, user_centroids;
  fs::path tx_features, tx_assignments, tx_centroids;
  Index n = 100, m = 100, top = 100;
};

void add_eval(CLI::App &app, EvalArgs &a)
{
  auto *s = app.add_subcommand("eval", "Evaluate outlier rankings");
  s->add_option("--ledger", a.ledger, "Ledger CSV")->required()->check(CLI::ExistingFile);
  s->add_option("--user-lof", a.user_lof, "Ranked user LOF TSV")->required()->check(CLI::ExistingFile);
  s->add_option("--tx-lof", a.tx_lof, "Ranked transaction LOF TSV")->required()->check(CLI::ExistingFile);
  s->add_option("--n", a.n, "Top user outliers for the dual metric")->capture_default_str();
  s->add_option("--m", a.m, "Top transaction outliers for the dual metric")->capture_default_str();
  s->add_option("--top", a.top, "Top outliers for centroid ratios and label checks")->capture_default_str();
  s->add_option("--labels", a.labels, "Labels file")->check(CLI::ExistingFile);
  s->add_option("--user-features", a.user_features, "User feature TSV")->check(CLI::ExistingFile);
  s->add_option("--user-assignments", a.user_assignments, "User assignment TSV")->check(CLI::ExistingFile);
  s->add_option("--user-centroids", a.user_centroids, "User centroid TSV")->check(CLI::ExistingFile);
  s->add_option("--tx-features", a.tx_features, "Transaction feature TSV")->check(CLI::ExistingFile);
  s->add_option("--tx-assignments", a.tx_assignments, "Transaction assignment TSV")->check(CLI::ExistingFile);
  s->add_option("--tx-centroids", a.tx_centroids, "Transaction centroid TSV")->check(CLI::ExistingFile);
  s->add_option("--out", a.out, "Report to write")->required();
}

std::optional<std::string> maybe_ratio(std::vector<LofResult> const &results, fs::path const &features,
                                       fs::path const &assignments, fs::path const &centroids, Index top, Stage &st)
{
  auto const given = !features.empty() + !assignments.empty() + !centroids.empty();
  if (given == 0) { return std::nullopt; }
  if (given != 3) { throw UsageError("centroid ratios need features, assignments and centroids together"); }
  st.input(features);
  st.input(assignments);
  st.input(centroids);
  auto const m = read_features(features);
  auto const c = read_clustering(assignments, centroids, m);
  auto const r = centroid_ratio(results, c, m, top);
  return fmt(r.ratio);
}

void run_eval(EvalArgs const &a, Stage &st)
{
  st.input(a.ledger);
  st.input(a.user_lof);
  st.input(a.tx_lof);
  auto const records = parse_ledger(a.ledger);
  auto const users = read_lof(a.user_lof);
  auto const txs = read_lof(a.tx_lof);

  std::vector<std::pair<std::string, std::string>> report;
  if (auto r = maybe_ratio(users, a.user_features, a.user_assignments, a.user_centroids, a.top, st)) {
    report.emplace_back("centroid_ratio_user", *r);
  }
  if (auto r = maybe_ratio(txs, a.tx_features, a.tx_assignments, a.tx_centroids, a.top, st)) {
    report.emplace_back("centroid_ratio_tx", *r);
  }
  report.emplace_back("N", std::to_string(a.n));
  report.emplace_back("M", std::to_string(a.m));
  try {
    auto const d = dual_metric(users, txs, records, a.n, a.m);
    report.emplace_back("X_N", std::to_string(d.x_n.size()));
    report.emplace_back("Y_M", std::to_string(d.y_m.size()));
    report.emplace_back("A1", fmt(d.a1));
    report.emplace_back("A2", fmt(d.a2));
    report.emplace_back("m_DE", fmt(d.m_de));
  } catch (UndefinedMetricError const &e) {
    report.emplace_back("m_DE", "undefined");
    report.emplace_back("dual_error", e.what());
  }
  if (!a.labels.empty()) {
    st.input(a.labels);
    auto const labels = read_labels(a.labels);
    std::string hits;
    std::size_t count = 0;
    auto const add = [&](std::string const &prefix, std::vector<LabelHit> const &found) {
      for (auto const &h : found) {
        hits += (hits.empty() ? "" : ",") + prefix + std::to_string(h.label) + "@" + std::to_string(h.rank);
        ++count;
      }
    };
    add("user:", label_check(users, labels.users, a.top));
    add("tx:", label_check(txs, labels.txs, a.top));
    report.emplace_back("label_count", std::to_string(labels.users.size() + labels.txs.size()));
    report.emplace_back("label_hit_count", std::to_string(count));
    report.emplace_back("label_hits", hits);
  }
  tsv::write_atomically(a.out, [&](std::ostream &o) {
    for (auto const &[k, v] : report) { o << k << '=' << v << '\n'; }
  });
  st.output(a.out);
  for (auto const &[k, v] : report) {
    if (k != "label_hits") { st.out << k << '=' << v << '\n'; }
  }
}

// ---------------------------------------------------------------- plot

struct PlotArgs
{
  std::string kind = "powerlaw";
  fs::path in, features, lof, assignments, out;
  std::string x, y;
  double threshold = kDefaultDeviationThreshold;
  Index top = 100;
};

void add_plot(CLI::App &app, PlotArgs &a)
{
  auto *s = app.add_subcommand("plot", "Write plot-ready TSV data");
  s->add_option("--kind", a.kind, "powerlaw or scatter")->capture_default_str();
  s->add_option("--in", a.in, "Fit point TSV (powerlaw)")->check(CLI::ExistingFile);
  s->add_option("--threshold", a.threshold, "Deviation threshold (powerlaw)")->capture_default_str();
  s->add_option("--features", a.features, "Feature TSV (scatter)")->check(CLI::ExistingFile);
  s->add_option("--lof", a.lof, "Ranked LOF TSV (scatter)")->check(CLI::ExistingFile);
  s->add_option("--assignments", a.assignments, "Assignment TSV (scatter)")->check(CLI::ExistingFile);
  s->add_option("--x", a.x, "Feature on the x axis (scatter)");
  s->add_option("--y", a.y, "Feature on the y axis (scatter)");
  s->add_option("--top", a.top, "Outliers to highlight (scatter)")->capture_default_str();
  s->add_option("--out", a.out, "Plot TSV to write")->required();
}

void plot_powerlaw(PlotArgs const &a, Stage &st)
{
  if (a.in.empty()) { throw UsageError("plot --kind powerlaw needs --in"); }
  st.input(a.in);
  auto const lines = tsv::read_lines(a.in);
  if (lines.empty() || lines[0] != "log_x\tlog_y\tfitted_y\tresidual") {
    throw ParseError(1, "fit point header must be log_x, log_y, fitted_y, residual");
  }
  std::vector<std::array<double, 4>> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) { continue; }
    auto const f = tsv::split(lines[i]);
    if (f.size() != 4) { throw ParseError(i + 1, "wrong number of columns"); }
    rows.push_back({tsv::parse_double(f[0], i + 1), tsv::parse_double(f[1], i + 1), tsv::parse_double(f[2], i + 1),
                    tsv::parse_double(f[3], i + 1)});
  }
  double ss = 0;
  for (auto const &r : rows) { ss += r[3] * r[3]; }
  double const sd = rows.empty() ? 0.0 : std::sqrt(ss / static_cast<double>(rows.size()));
  std::size_t flagged = 0;
  tsv::write_atomically(a.out, [&](std::ostream &o) {
    o << "x\ty\tfit\tflag\n";
    for (auto const &r : rows) {
      bool const flag = std::abs(r[3]) > a.threshold * sd;
      flagged += flag ? 1 : 0;
      o << fmt(r[0]) << '\t' << fmt(r[1]) << '\t' << fmt(r[2]) << '\t' << (flag ? 1 : 0) << '\n';
    }
  });
  st.output(a.out);
  st.out << "points=" << rows.size() << " flagged=" << flagged << '\n';
}

void plot_scatter(PlotArgs const &a, Stage &st)
{
  if (a.features.empty() || a.lof.empty()) { throw UsageError("plot --kind scatter needs --features and --lof"); }
  st.input(a.features);
  st.input(a.lof);
  auto const m = read_features(a.features);
  if (m.cols() < 2 && (a.x.empty() || a.y.empty())) { throw UsageError("scatter needs two feature columns"); }
  auto const xc = a.x.empty() ? Index{0} : m.column_of(a.x);
  auto const yc = a.y.empty() ? Index{1} : m.column_of(a.y);
  auto const results = read_lof(a.lof);
  std::vector<char> outlier(static_cast<std::size_t>(m.rows()), 0);
  auto const n = std::min<std::size_t>(results.size(), static_cast<std::size_t>(std::max<Index>(a.top, 0)));
  for (std::size_t i = 0; i < n; ++i) { outlier[static_cast<std::size_t>(m.row_of(results[i].node_id))] = 1; }
  std::vector<int> cluster(static_cast<std::size_t>(m.rows()), -1);
  if (!a.assignments.empty()) {
    st.input(a.assignments);
    auto const lines = tsv::read_lines(a.assignments);
    for (std::size_t i = 1; i < lines.size(); ++i) {
      if (lines[i].empty()) { continue; }
      auto const f = tsv::split(lines[i]);
      if (f.size() != 3) { throw ParseError(i + 1, "wrong number of columns"); }
      cluster[static_cast<std::size_t>(m.row_of(tsv::parse_uint(f[0], i + 1)))] =
          static_cast<int>(tsv::parse_uint(f[1], i + 1));
    }
  }
  tsv::write_atomically(a.out, [&](std::ostream &o) {
    o << "node_id\tx\ty\tcluster\toutlier\n";
    for (Index i = 0; i < m.rows(); ++i) {
      auto const si = static_cast<std::size_t>(i);
      o << m.node_ids[si] << '\t' << fmt(m.values(i, xc)) << '\t' << fmt(m.values(i, yc)) << '\t' << cluster[si]
        << '\t' << static_cast<int>(outlier[si]) << '\n';
    }
  });
  st.output(a.out);
  st.meta("x", m.feature_names[static_cast<std::size_t>(xc)]);
  st.meta("y", m.feature_names[static_cast<std::size_t>(yc)]);
  st.out << "points=" << m.rows() << " outliers=" << n << '\n';
}

void run_plot(PlotArgs const &a, Stage &st)
{
  if (a.kind == "powerlaw") {
    plot_powerlaw(a, st);
  } else if (a.kind == "scatter") {
    plot_scatter(a, st);
  } else {
    throw ConfigError("unknown plot kind '" + a.kind + "' (expected powerlaw or scatter)");
  }
}

// ---------------------------------------------------------------- driver

std::string one_line(std::string text)
{
  std::replace(text.begin(), text.end(), '\t', ' ');
  std::replace(text.begin(), text.end(), '\n', ' ');
  std::replace(text.begin(), text.end(), '\r', ' ');
  return text;
}

int report_error(std::ostream &err, std::string const &kind, std::string const &message, int code)
{
  err << "error\tkind=" << kind << "\tmessage=" << one_line(message) << '\n';
  return code;
}

CLI::App *chosen_subcommand(CLI::App &app, std::vector<std::string> const &args)
{
  for (auto const &a : args) {
    if (a.starts_with("-")) { continue; }
    for (auto *s : app.get_subcommands([](CLI::App const *) { return true; })) {
      if (s->check_name(a)) { return s; }
    }
  }
  return nullptr;
}

std::map<std::string, std::string> snapshot(CLI::App const *sub)
{
  std::map<std::string, std::string> out;
  for (auto const *opt : sub->get_options()) {
    if (opt->get_lnames().empty() || opt->get_lnames().front() == "help") { continue; }
    auto const &key = opt->get_lnames().front();
    if (opt->count() > 0) {
      std::string joined;
      for (auto const &r : opt->results()) { joined += (joined.empty() ? "" : " ") + r; }
      out[key] = joined;
    } else {
      out[key] = opt->get_default_str();
    }
  }
  return out;
}

} // namespace

int run(std::vector<std::string> args, std::ostream &out, std::ostream &err)
{
  CLI::App app{"Anomaly detection on transaction ledgers", "ledgerlof"};
  app.require_subcommand(1);
  app.fallthrough();
  unsigned threads = 0;
  std::string config_path;
  app.add_option("--threads", threads, "Worker threads (0 = all cores)")->capture_default_str();
  app.add_option("--config", config_path, "File of key = value lines supplying default flags");

  SynthArgs synth;
  BuildArgs build;
  FeaturesArgs features;
  PowerlawArgs powerlaw;
  ClusterArgs cluster;
  LofArgs lof;
  EvalArgs eval;
  PlotArgs plot;
  add_synth(app, synth);
  add_build(app, build);
  add_features(app, features);
  add_powerlaw(app, powerlaw);
  add_cluster(app, cluster);
  add_lof(app, lof);
  add_eval(app, eval);
  add_plot(app, plot);

  if (args.empty()) {
    err << app.help();
    return 2;
  }

  auto const command_line = args;
  try {
    auto const cfg = find_config_path(args);
    if (!cfg.empty()) {
      if (!fs::exists(cfg)) { return report_error(err, "usage", "config file not found: " + cfg, 2); }
      merge_config(args, read_config(cfg), app, chosen_subcommand(app, args));
    }
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (CLI::CallForHelp const &) {
    out << app.help();
    return 0;
  } catch (CLI::ParseError const &e) {
    return report_error(err, "usage", e.what(), 2);
  } catch (Error const &e) {
    return report_error(err, e.kind(), e.what(), 2);
  }

  auto *sub = app.get_subcommands().front();
  Stage stage{out, resolve_threads(threads), {}};
  stage.manifest.command_line = command_line;
  stage.manifest.subcommand = sub->get_name();
  stage.manifest.config = snapshot(sub);
  stage.manifest.config["threads"] = std::to_string(threads);

  std::map<std::string, std::function<void(Stage &)>> const commands{
      {"synth", [&](Stage &s) { run_synth(synth, s); }},
      {"build", [&](Stage &s) { run_build(build, s); }},
      {"features", [&](Stage &s) { run_features(features, s); }},
      {"powerlaw", [&](Stage &s) { run_powerlaw(powerlaw, s); }},
      {"cluster", [&](Stage &s) { run_cluster(cluster, s); }},
      {"lof", [&](Stage &s) { run_lof(lof, s); }},
      {"eval", [&](Stage &s) { run_eval(eval, s); }},
      {"plot", [&](Stage &s) { run_plot(plot, s); }},
  };

  auto const start = std::chrono::steady_clock::now();
  try {
    commands.at(sub->get_name())(stage);
    stage.manifest.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    stage.manifest.write(manifest_path_for(stage.manifest.outputs.front()));
  } catch (UsageError const &e) {
    return report_error(err, e.kind(), e.what(), 2);
  } catch (ParseError const &e) {
    return report_error(err, e.kind(), e.what(), 2);
  } catch (ConfigError const &e) {
    return report_error(err, e.kind(), e.what(), 2);
  } catch (Error const &e) {
    return report_error(err, e.kind(), e.what(), 1);
  } catch (std::exception const &e) {
    return report_error(err, "internal", e.what(), 1);
  }
  return 0;
}

} // namespace ledgerlof::cli
