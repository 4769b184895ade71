#pragma once

// Synthetic survey populations with analytically known ground truth.
//
// Substitution answers: the true answer is "No" with probability theta_j; a
// one-sided reporting bias then flips true "Yes" answers to "No" (D = +1) or
// true "No" answers to "Yes" (D = -1) so the reported rate is theta_j + b_j.
// Spending brackets: the true bracket is drawn from the group distribution and
// shifted one bracket up (D = +1) or down (D = -1) with the group's shift
// probability. Sampling noise is the categorical draw itself.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "voucher/inference.hpp"
#include "voucher/survey.hpp"

namespace voucher {

struct SyntheticGroup {
  DemographicProfile profile;
  std::size_t n_original = 0;
  std::size_t n_extra = 0;
  double es_eta = 0.0;  // group effect on the true substitution probability
  double es_nu = 0.0;   // group deviation of the substitution reporting bias
  std::vector<double> brackets;        // true bracket distribution, original wave
  std::vector<double> brackets_extra;  // extra wave; empty means same as `brackets`
  double shift_prob = 0.0;             // probability of a one-bracket reporting shift

  std::string label() const;
};

struct VoucherPopulation {
  VoucherKind kind = VoucherKind::dining;
  /// false models non-recipients: every outcome is zero.
  bool recipients = true;
  double es_theta = 0.0;
  double es_bias = 0.0;
  int es_bias_sign = 1;
  int ic_bias_sign = 1;
  std::vector<SyntheticGroup> groups;

  NoiseModelSpec es_model() const;
};

struct PopulationSpec {
  std::uint64_t seed = 1;
  std::vector<VoucherPopulation> vouchers;

  /// Throws ConfigError describing the first violated constraint.
  void validate(const VoucherCatalog& catalog) const;
};

struct GroupTruth {
  std::string label;
  std::size_t n = 0;
  double es_true = 0.0;
  double es_bias = 0.0;
  double es_reported = 0.0;      // upper-bound target
  double es_lower_target = 0.0;  // reported - min over groups of reported
  double ic_true = 0.0;
  double ic_bias = 0.0;
  double ic_reported = 0.0;
  double ic_lower_target = 0.0;
};

struct VoucherTruth {
  VoucherKind kind = VoucherKind::dining;
  std::vector<GroupTruth> groups;  // present groups only, in spec order
  GroupTruth overall;
  double es_bias_proxy = 0.0;  // min_j of reported substitution rates
  double ic_bias_proxy = 0.0;
  NoiseModelSpec es_model;
  NoiseModelSpec ic_model;  // derived from the bracket distributions
  std::optional<double> intensity_true;
  std::optional<double> intensity_reported;
  std::vector<std::string> absent_groups;  // groups with n_original = 0
};

struct GroundTruth {
  std::uint64_t seed = 0;
  std::vector<VoucherTruth> vouchers;

  const VoucherTruth& at(VoucherKind k) const;
};

struct SyntheticSurvey {
  Dataset dataset;
  GroundTruth truth;
  /// Realized individual reporting biases, aligned with dataset.records().
  std::vector<double> es_bias_draws;
  std::vector<double> ic_bias_draws;
};

/// Analytic ground truth of a spec (no sampling).
GroundTruth ground_truth(const PopulationSpec& spec, const VoucherCatalog& catalog);

SyntheticSurvey generate(const PopulationSpec& spec, const VoucherCatalog& catalog);

PopulationSpec default_population_spec();
PopulationSpec load_population_spec(std::istream& in);
PopulationSpec load_population_spec_file(const std::string& path);
void write_population_spec(std::ostream& out, const PopulationSpec& spec);
void write_ground_truth(std::ostream& out, const GroundTruth& truth);

// ---------------------------------------------------------------------------
// Coverage

struct CoverageCell {
  VoucherKind voucher = VoucherKind::dining;
  Metric metric = Metric::substitution;
  std::string group;
  std::size_t trials = 0;
  std::size_t upper_hits = 0;     // ci_upper contains the reported mean
  std::size_t lower_hits = 0;     // ci_lower contains the bias-adjusted target
  std::size_t combined_hits = 0;  // combined region contains the true effect

  double upper_coverage() const { return trials ? static_cast<double>(upper_hits) / trials : 0.0; }
  double lower_coverage() const { return trials ? static_cast<double>(lower_hits) / trials : 0.0; }
  double combined_coverage() const { return trials ? static_cast<double>(combined_hits) / trials : 0.0; }
};

struct CoverageSummary {
  std::size_t trials = 0;
  std::vector<CoverageCell> cells;  // per voucher, metric, scheme cell, then "overall"

  const CoverageCell& find(VoucherKind k, Metric m, const std::string& group) const;
};

/// Repeats generate + stratified_bootstrap `trials` times (at least 100) with
/// seeds derived from the spec seed and cfg.seed, counting how often each
/// interval covers its analytic target. Every cell of cfg.scheme must contain
/// at least one synthetic group; cells holding several groups use their
/// n-weighted mixture as the target. Deterministic for any worker count.
CoverageSummary coverage_experiment(const PopulationSpec& spec, const VoucherCatalog& catalog,
                                    const BootstrapConfig& cfg, std::size_t trials);

}  // namespace voucher
