#pragma once

#include "graph.hpp"
#include "ledger.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace ledgerlof {

struct Snapshot
{
  std::int64_t t = 0;
  std::uint64_t nodes = 0;
  std::uint64_t edges = 0;
};

/// Node and edge counts of a growing graph, strictly increasing in t.
struct DensificationSeries
{
  std::vector<Snapshot> snapshots;
};

/// One fitted point in log10 space.
struct FitPoint
{
  double log_x = 0;
  double log_y = 0;
  double residual = 0; // log_y minus the fitted line

  friend bool operator==(FitPoint const &, FitPoint const &) = default;
};

/// Least-squares line through log10(y) = intercept + slope * log10(x).
/// `exponent` is the slope for densification and minus the slope for
/// distributions, so both are reported as positive constants for the usual laws.
struct PowerLawFit
{
  double exponent = 0;
  double slope = 0;
  double intercept = 0;
  double r_squared = 0;
  double residual_sd = 0;
  std::vector<FitPoint> points;
  std::vector<FitPoint> outlier_points; // deviation_points(fit, kDefaultDeviationThreshold)

  double fitted(double log_x) const { return intercept + slope * log_x; }
};

inline constexpr double kDefaultDeviationThreshold = 3.0;
inline constexpr int kDefaultSnapshots = 20;

/// How a sample is turned into (k, P(k)) pairs.
struct Binning
{
  enum class Mode { Exact, Log };
  Mode mode = Mode::Log;
  double ratio = 2.0;

  /// Geometric bins [b0 r^i, b0 r^(i+1)) anchored at the smallest positive
  /// value; P is the bin count over (sample size x bin width), x the mean
  /// value inside the bin. Integer samples measure width in integers.
  static Binning log(double ratio = 2.0) { return {Mode::Log, ratio}; }
  /// One point per distinct value with P = count / sample size.
  static Binning exact() { return {Mode::Exact, 0.0}; }
};

/// Ordinary least squares in the given coordinates (already logged).
/// r_squared is 1 when the residuals vanish, including the flat case.
PowerLawFit fit_line(std::span<double const> log_x, std::span<double const> log_y);

/// Snapshots after equal numbers of ledger records (the last one at the end).
DensificationSeries densification_series(Ledger const &records, GraphKind kind, int snapshots = kDefaultSnapshots);

/// Fit of log E against log N over snapshots with N >= 2 and E >= 1. Throws
/// InsufficientDataError with fewer than three usable snapshots.
PowerLawFit densification_fit(DensificationSeries const &series);

/// Log-log fit of the empirical distribution of the positive entries of
/// `values`; exponent is gamma in P(k) ~ k^-gamma. Needs at least ten positive
/// values that are not all equal.
PowerLawFit distribution_fit(std::span<double const> values, Binning binning = Binning::log());

/// Points whose absolute residual exceeds threshold x residual_sd, largest
/// absolute residual first.
std::vector<FitPoint> deviation_points(PowerLawFit const &fit, double threshold);

/// Bin edges used by distribution_fit for a log binning of `values`, so callers
/// can map a deviating point back to the sample entries that produced it.
struct BinRange
{
  double lo = 0;
  double hi = 0;
  double log_x = 0;
};
std::vector<BinRange> distribution_bins(std::span<double const> values, Binning binning = Binning::log());

/// TSV with header `log_x log_y fitted_y residual`.
void write_fit_points(std::ostream &out, PowerLawFit const &fit);
std::string fit_summary(PowerLawFit const &fit);

} // namespace ledgerlof
