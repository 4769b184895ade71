#pragma once

// Point estimators over survey records: expenditure substitution, induced
// consumption, bracket shares and treatment intensity.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "voucher/survey.hpp"

namespace voucher {

enum class Metric : std::uint8_t { substitution, induced };

std::string_view to_string(Metric m) noexcept;

struct RateEstimate {
  Metric metric = Metric::substitution;
  VoucherKind voucher = VoucherKind::dining;
  std::string group = "overall";
  std::size_t n = 0;
  double value = 0.0;
  /// Substitution only: count of "No" answers; the exact rate is substituted / n.
  std::size_t substituted = 0;
};

struct BracketDistribution {
  std::vector<std::size_t> counts;
  std::vector<double> shares;
  std::size_t n = 0;
};

struct IntensityEstimate {
  VoucherKind voucher = VoucherKind::dining;
  double value = 0.0;  // NT$ per respondent
  std::size_t n_original = 0;
  std::size_t n_extra = 0;

  /// Program-level total in NT$ millions for the given recipient count.
  double program_total_millions(double recipients) const { return value * recipients / 1e6; }
};

// All record-level estimators require a non-empty subset of a single voucher
// kind and throw UndefinedEstimate / ValidationError otherwise. Summation runs
// in index order so results are reproducible bit for bit.

RateEstimate substitution_rate(std::span<const SurveyRecord> records, std::string group = "overall");

BracketDistribution bracket_distribution(std::span<const SurveyRecord> records, const BracketSchedule& schedule);

RateEstimate induced_rate(std::span<const SurveyRecord> records, const VoucherSpec& spec,
                          std::string group = "overall");

IntensityEstimate treatment_intensity(std::span<const SurveyRecord> original, std::span<const SurveyRecord> extra,
                                      const VoucherSpec& spec);

// Count-level kernels shared with the bootstrap.
double substitution_from_counts(std::size_t substituted, std::size_t n);
double induced_from_counts(std::span<const std::size_t> bracket_counts, std::size_t n, const VoucherSpec& spec);

// ---------------------------------------------------------------------------
// Whole-dataset summaries

struct EstimateRow {
  VoucherKind voucher = VoucherKind::dining;
  std::string grouping;  // scheme name, "overall" for the pooled row
  std::string group;
  Metric metric = Metric::substitution;
  std::size_t n = 0;
  double value = 0.0;  // NaN when n == 0
  bool empty() const noexcept { return n == 0; }
};

struct SampleCount {
  VoucherKind voucher = VoucherKind::dining;
  std::string grouping;
  std::string group;
  std::size_t n = 0;
};

struct EstimateOptions {
  /// Extra-wave records normally feed only the intensity comparison.
  bool include_extra_wave = false;
};

struct EstimateSummary {
  std::vector<SampleCount> counts;
  std::vector<EstimateRow> rates;
  std::vector<IntensityEstimate> intensity;  // vouchers with both waves present
  std::vector<VoucherKind> intensity_missing;  // vouchers lacking one of the waves
};

EstimateSummary summarize(const Dataset& ds, const VoucherCatalog& catalog,
                          std::span<const StratificationScheme> groupings, const EstimateOptions& options = {});

}  // namespace voucher
