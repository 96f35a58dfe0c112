#include "ledgerlof/scoring.hpp"

#include "ledgerlof/error.hpp"
#include "ledgerlof/tsv.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>

namespace ledgerlof {

std::string to_string(LofMode mode) { return mode == LofMode::Exact ? "exact" : "cluster"; }

LofMode parse_lof_mode(std::string const &text)
{
  if (text == "exact") { return LofMode::Exact; }
  if (text == "cluster" || text == "cluster-restricted") { return LofMode::ClusterRestricted; }
  throw ConfigError("unknown LOF mode '" + text + "' (expected exact or cluster)");
}

std::vector<LofResult> score_all(FeatureMatrix const &m, NeighborQuery const &q, Clustering<double> const *c,
                                 Index top_n, unsigned threads, LofReport *report)
{
  if (top_n < 0) { throw ConfigError("top_n must not be negative"); }
  if (q.mode == LofMode::ClusterRestricted && c == nullptr) {
    throw ConfigError("cluster-restricted LOF requires a clustering");
  }
  LofModel<double> model(m.values, q, c != nullptr ? &c->assignments : nullptr, threads);
  auto const relative = relative_lof(model.lof_scores());

  std::vector<LofResult> results(static_cast<std::size_t>(m.rows()));
  for (Index i = 0; i < m.rows(); ++i) {
    auto &r = results[static_cast<std::size_t>(i)];
    r.node_id = m.node_ids[static_cast<std::size_t>(i)];
    r.k_distance = model.k_distance(i);
    r.lrd = model.lrd(i);
    r.lof = model.lof(i);
    r.relative_lof = relative[static_cast<std::size_t>(i)];
  }
  std::sort(results.begin(), results.end(), [](LofResult const &a, LofResult const &b) {
    if (a.lof != b.lof) { return a.lof > b.lof; }
    return a.node_id < b.node_id;
  });
  for (std::size_t i = 0; i < results.size(); ++i) {
    results[i].rank = static_cast<Index>(i) + 1;
    results[i].flagged = static_cast<Index>(i) < top_n;
  }

  if (report != nullptr) {
    report->query = q;
    report->approximate = q.mode == LofMode::ClusterRestricted;
    report->fallback_nodes.clear();
    for (Index row : model.fallback_rows()) { report->fallback_nodes.push_back(m.node_ids[static_cast<std::size_t>(row)]); }
  }
  return results;
}

void write_lof(std::filesystem::path const &path, std::vector<LofResult> const &results)
{
  tsv::write_atomically(path, [&](std::ostream &out) {
    out << "rank\tnode_id\tlof\trelative_lof\n";
    for (auto const &r : results) {
      out << r.rank << '\t' << r.node_id << '\t' << tsv::format_double(r.lof) << '\t'
          << tsv::format_double(r.relative_lof) << '\n';
    }
  });
}

std::vector<LofResult> read_lof(std::filesystem::path const &path)
{
  auto const lines = tsv::read_lines(path);
  if (lines.empty() || lines[0] != "rank\tnode_id\tlof\trelative_lof") {
    throw ParseError(1, "LOF header must be rank, node_id, lof, relative_lof");
  }
  std::vector<LofResult> results;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) { continue; }
    auto const f = tsv::split(lines[i]);
    if (f.size() != 4) { throw ParseError(i + 1, "wrong number of columns"); }
    LofResult r;
    r.rank = static_cast<Index>(tsv::parse_uint(f[0], i + 1));
    r.node_id = tsv::parse_uint(f[1], i + 1);
    r.lof = tsv::parse_double(f[2], i + 1);
    r.relative_lof = tsv::parse_double(f[3], i + 1);
    if (r.rank != static_cast<Index>(results.size()) + 1) { throw ParseError(i + 1, "ranks must run 1, 2, ..."); }
    results.push_back(r);
  }
  return results;
}

} // namespace ledgerlof
