#pragma once

// Bias-bounded estimates and the stratified percentile bootstrap.
//
// With group estimates y_j, the bias proxy is b = min_j y_j; every group (and
// any pooled or coarser group) gets the interval [y - b, y]. The bootstrap
// resamples within each cell of the finest stratification, recomputes b per
// replication and reports percentile intervals for both endpoints.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "voucher/estimators.hpp"
#include "voucher/survey.hpp"

namespace voucher {

struct BoundedEstimate {
  std::string group;
  double point = 0.0;
  double bias_bound = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

/// min_j of the group estimates. Throws std::invalid_argument when empty.
double bias_bound(std::span<const double> group_estimates);
double bias_bound(std::span<const RateEstimate> group_estimates);

/// One entry per group followed by the overall entry; all share the same bias bound.
std::vector<BoundedEstimate> bounded_estimates(std::span<const RateEstimate> group_estimates,
                                               const RateEstimate& overall);

/// Order-statistic quantile with linear interpolation at rank q * (n - 1)
/// (0-based). Throws std::invalid_argument for an empty sample or q outside [0, 1].
double percentile(std::span<const double> samples, double q);

// ---------------------------------------------------------------------------
// Measurement model shared with the synthetic population generator.

enum class NoiseKind : std::uint8_t { categorical };

/// y = theta_k + eta_j + B_k + nu_j + noise, with eta and nu averaging to zero
/// under the group weights and every individual bias carrying sign D.
struct NoiseModelSpec {
  double theta = 0.0;
  std::vector<double> eta;
  double bias = 0.0;
  std::vector<double> nu;
  int bias_sign = 1;
  NoiseKind noise = NoiseKind::categorical;

  /// Checks sizes, the sign of D and the weighted zero-mean conditions (1e-12).
  /// Throws ConfigError.
  void validate(std::span<const double> group_weights) const;
};

// ---------------------------------------------------------------------------
// Bootstrap

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double x) const noexcept { return lo <= x && x <= hi; }
  double width() const noexcept { return hi - lo; }
  bool operator==(const Interval&) const = default;
};

struct ConfidenceRegion {
  Interval ci_lower;  // percentile interval of the bias-adjusted statistic
  Interval ci_upper;  // percentile interval of the unadjusted statistic
  Interval combined;  // hull of both

  bool operator==(const ConfidenceRegion&) const = default;
};

enum class PercentileMode : std::uint8_t {
  two_sided,     // [Q(alpha/2), Q(1 - alpha/2)]
  one_sided_tails  // [Q(alpha), Q(1 - alpha)], e.g. 5th/95th at alpha = 0.05
};

/// Per-replication snapshot handed to an observer. Cell vectors are indexed
/// by the cell index of the bootstrap scheme (non-empty cells only ever).
struct ReplicationView {
  std::size_t replication = 0;
  std::span<const std::size_t> cell_sizes;
  std::span<const double> cell_estimates;
  double bias = 0.0;
};

struct BootstrapConfig {
  std::size_t replications = 2000;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  /// Finest stratification; resampling and the bias proxy use its cells.
  StratificationScheme scheme = StratificationScheme::finest();
  /// Coarser groupings to report, each a coarsening of `scheme`.
  std::vector<StratificationScheme> reporting;
  PercentileMode mode = PercentileMode::two_sided;
  /// 0 picks std::thread::hardware_concurrency(). Results do not depend on it.
  unsigned workers = 0;
  /// Called once per replication, possibly concurrently from several workers.
  std::function<void(const ReplicationView&)> observer;

  /// Throws ConfigError for B_s = 0, alpha outside (0, 1] or a reporting
  /// grouping that is not a coarsening of the scheme.
  void validate() const;
  /// The percentile levels (low, high) implied by alpha and the mode.
  std::pair<double, double> levels() const;
  /// Non-empty when B_s is too small to resolve the requested percentiles.
  std::string resolution_warning() const;
};

struct GroupRegion {
  std::string grouping;  // scheme name, "overall" for the pooled group
  std::string group;
  std::size_t n = 0;
  BoundedEstimate estimate;
  ConfidenceRegion region;
};

struct BootstrapResult {
  VoucherKind voucher = VoucherKind::dining;
  Metric metric = Metric::substitution;
  std::size_t replications = 0;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  std::vector<GroupRegion> cells;     // finest scheme
  std::vector<GroupRegion> reported;  // reporting groupings, in order
  GroupRegion overall;
  std::vector<std::string> warnings;
};

/// Stratified bootstrap over every voucher-k record of `ds`. Replication r,
/// cell j draws from Substream(seed, {r, j}). Throws ValidationError naming
/// the stratum when a cell of the scheme is empty.
BootstrapResult stratified_bootstrap(const Dataset& ds, Metric metric, const BootstrapConfig& cfg, VoucherKind k,
                                     const VoucherSpec& spec);

}  // namespace voucher
