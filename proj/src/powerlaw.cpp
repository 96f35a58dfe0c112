#include "ledgerlof/powerlaw.hpp"

#include "ledgerlof/error.hpp"
#include "ledgerlof/tsv.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>
#include <unordered_set>

namespace ledgerlof {

PowerLawFit fit_line(std::span<double const> log_x, std::span<double const> log_y)
{
  auto const n = log_x.size();
  if (n < 2 || log_y.size() != n) { throw InsufficientDataError("need at least two points to fit a line"); }
  double const mx = std::accumulate(log_x.begin(), log_x.end(), 0.0) / static_cast<double>(n);
  double const my = std::accumulate(log_y.begin(), log_y.end(), 0.0) / static_cast<double>(n);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double const dx = log_x[i] - mx;
    double const dy = log_y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) { throw InsufficientDataError("all x coordinates coincide"); }

  PowerLawFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0;
  fit.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double const r = log_y[i] - fit.fitted(log_x[i]);
    ss_res += r * r;
    fit.points.push_back({log_x[i], log_y[i], r});
  }
  fit.residual_sd = std::sqrt(ss_res / static_cast<double>(n));
  if (syy == 0.0) {
    fit.r_squared = 1.0;
  } else {
    fit.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  }
  return fit;
}

DensificationSeries densification_series(Ledger const &records, GraphKind kind, int snapshots)
{
  if (snapshots < 1) { throw ConfigError("snapshot count must be positive"); }
  DensificationSeries series;
  auto const total = records.size();
  if (total == 0) { return series; }

  std::unordered_set<NodeId> users;
  std::vector<NodeId> senders;
  std::uint64_t nodes = 0, edges = 0;
  int next = 1;
  for (std::size_t i = 0; i < total; ++i) {
    auto const &rec = records[i];
    if (kind == GraphKind::User) {
      senders.clear();
      for (auto const &in : rec.inputs) {
        users.insert(in.user_id);
        if (std::find(senders.begin(), senders.end(), in.user_id) == senders.end()) { senders.push_back(in.user_id); }
      }
      for (auto const &out : rec.outputs) { users.insert(out.user_id); }
      nodes = users.size();
      edges += senders.size() * rec.outputs.size();
    } else {
      ++nodes;
      for (auto const &in : rec.inputs) { edges += in.src_tx_id ? 1 : 0; }
    }
    // snapshot s closes after record ceil(s * total / snapshots)
    while (next <= snapshots &&
           i + 1 >= (static_cast<std::size_t>(next) * total + static_cast<std::size_t>(snapshots) - 1) /
                      static_cast<std::size_t>(snapshots)) {
      Snapshot snap{rec.timestamp, nodes, edges};
      if (!series.snapshots.empty() && series.snapshots.back().t >= snap.t) {
        series.snapshots.back() = snap;
      } else {
        series.snapshots.push_back(snap);
      }
      ++next;
    }
  }
  return series;
}

PowerLawFit densification_fit(DensificationSeries const &series)
{
  std::vector<double> lx, ly;
  for (auto const &s : series.snapshots) {
    if (s.nodes >= 2 && s.edges >= 1) {
      lx.push_back(std::log10(static_cast<double>(s.nodes)));
      ly.push_back(std::log10(static_cast<double>(s.edges)));
    }
  }
  if (lx.size() < 3) { throw InsufficientDataError("densification fit needs at least 3 snapshots with N >= 2 and E >= 1"); }
  auto fit = fit_line(lx, ly);
  fit.exponent = fit.slope;
  fit.outlier_points = deviation_points(fit, kDefaultDeviationThreshold);
  return fit;
}

namespace {

struct Bin
{
  double lo = 0;
  double hi = 0;
  std::size_t count = 0;
  double sum = 0;
};

std::vector<double> positive_values(std::span<double const> values)
{
  std::vector<double> pos;
  for (double v : values) {
    if (v > 0 && std::isfinite(v)) { pos.push_back(v); }
  }
  if (pos.size() < 10) { throw InsufficientDataError("distribution fit needs at least 10 positive values"); }
  auto const [lo, hi] = std::minmax_element(pos.begin(), pos.end());
  if (*lo == *hi) { throw DegenerateDistributionError("all values are identical"); }
  return pos;
}

std::vector<Bin> make_bins(std::vector<double> const &pos, Binning binning)
{
  std::vector<Bin> bins;
  if (binning.mode == Binning::Mode::Exact) {
    std::map<double, std::size_t> counts;
    for (double v : pos) { ++counts[v]; }
    for (auto const &[v, c] : counts) { bins.push_back({v, v, c, v * static_cast<double>(c)}); }
    return bins;
  }
  if (!(binning.ratio > 1.0)) { throw ConfigError("log binning ratio must exceed 1"); }
  double const b0 = *std::min_element(pos.begin(), pos.end());
  double const top = *std::max_element(pos.begin(), pos.end());
  std::vector<double> edges{b0};
  while (edges.back() <= top) { edges.push_back(edges.back() * binning.ratio); }
  bins.resize(edges.size() - 1);
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) { bins[i].lo = edges[i], bins[i].hi = edges[i + 1]; }
  for (double v : pos) {
    auto const it = std::upper_bound(edges.begin(), edges.end(), v);
    auto const i = static_cast<std::size_t>(it - edges.begin()) - 1;
    ++bins[i].count;
    bins[i].sum += v;
  }
  return bins;
}

} // namespace

std::vector<BinRange> distribution_bins(std::span<double const> values, Binning binning)
{
  auto const pos = positive_values(values);
  std::vector<BinRange> out;
  for (auto const &b : make_bins(pos, binning)) {
    if (b.count == 0) { continue; }
    double const x = b.sum / static_cast<double>(b.count);
    out.push_back({b.lo, b.hi, std::log10(x)});
  }
  return out;
}

PowerLawFit distribution_fit(std::span<double const> values, Binning binning)
{
  auto const pos = positive_values(values);
  bool const integral = std::all_of(pos.begin(), pos.end(), [](double v) { return v == std::floor(v); });
  auto const n = static_cast<double>(pos.size());

  std::vector<double> lx, ly;
  for (auto const &b : make_bins(pos, binning)) {
    if (b.count == 0) { continue; }
    double p = static_cast<double>(b.count) / n;
    if (binning.mode == Binning::Mode::Log) {
      double const width = integral ? std::ceil(b.hi) - std::ceil(b.lo) : b.hi - b.lo;
      p /= width;
    }
    lx.push_back(std::log10(b.sum / static_cast<double>(b.count)));
    ly.push_back(std::log10(p));
  }
  if (lx.size() < 2) { throw DegenerateDistributionError("values fall into a single bin"); }
  auto fit = fit_line(lx, ly);
  fit.exponent = -fit.slope;
  fit.outlier_points = deviation_points(fit, kDefaultDeviationThreshold);
  return fit;
}

std::vector<FitPoint> deviation_points(PowerLawFit const &fit, double threshold)
{
  std::vector<FitPoint> out;
  if (fit.residual_sd == 0.0) { return out; }
  double const cut = threshold * fit.residual_sd;
  for (auto const &p : fit.points) {
    if (std::abs(p.residual) > cut) { out.push_back(p); }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](FitPoint const &a, FitPoint const &b) { return std::abs(a.residual) > std::abs(b.residual); });
  return out;
}

void write_fit_points(std::ostream &out, PowerLawFit const &fit)
{
  out << "log_x\tlog_y\tfitted_y\tresidual\n";
  for (auto const &p : fit.points) {
    out << tsv::format_double(p.log_x) << '\t' << tsv::format_double(p.log_y) << '\t'
        << tsv::format_double(fit.fitted(p.log_x)) << '\t' << tsv::format_double(p.residual) << '\n';
  }
}

std::string fit_summary(PowerLawFit const &fit)
{
  return "exponent=" + tsv::format_double(fit.exponent) + " r2=" + tsv::format_double(fit.r_squared);
}

} // namespace ledgerlof
