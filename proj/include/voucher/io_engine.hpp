#pragma once

// Regional input-output propagation: behaviorally adjusted final demand is
// pushed through a Leontief inverse and weighted by value-added coefficients.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "voucher/survey.hpp"

namespace voucher {

inline constexpr std::size_t kRegionalSectorCount = 19;

struct SectorTable {
  std::vector<std::string> sector_names;
  Eigen::MatrixXd leontief;  // L = (I - A)^-1
  Eigen::VectorXd value_added;

  std::size_t size() const noexcept { return sector_names.size(); }
};

/// Checks L >= 0, diag(L) >= 1 and value-added coefficients in (0, 1].
/// Throws ValidationError ("not a Leontief inverse" for a diagonal below 1).
void validate_table(const SectorTable& table);

/// Reads the sector table CSV: header row, one named row per sector, then an
/// "added_value" row. `expected_sectors` = 0 accepts any square size.
SectorTable load_table(std::istream& in, std::size_t expected_sectors = kRegionalSectorCount);
SectorTable load_table_file(const std::string& path, std::size_t expected_sectors = kRegionalSectorCount);
void write_table(std::ostream& out, const SectorTable& table);

/// A = I - L^-1 via LU with partial pivoting. Throws NumericError when L is
/// numerically singular.
Eigen::MatrixXd technical_from_inverse(const Eigen::MatrixXd& leontief);

/// (I - A)^-1 via LU with partial pivoting. Throws NumericError when singular.
Eigen::MatrixXd leontief_from_technical(const Eigen::MatrixXd& technical);

double spectral_radius(const Eigen::MatrixXd& m);

// ---------------------------------------------------------------------------
// Scenarios

struct ScenarioEntry {
  VoucherKind voucher = VoucherKind::dining;
  double original_amount = 0.0;  // NT$ millions
  double es = 0.0;
  double ic = 0.0;
  /// Adjusted demand taken verbatim instead of original * (1 - ES)(1 + IC).
  std::optional<double> induced_override;

  double adjusted() const;
};

struct ScenarioSpec {
  std::string label;
  std::vector<ScenarioEntry> entries;
  /// Permits negative induced demand (contraction scenarios).
  bool contraction = false;

  double original_total() const;
  /// Throws ConfigError on negative amounts, ES outside [0, 1], IC < 0, a
  /// negative induced demand without the contraction flag, or a voucher listed twice.
  void validate() const;
};

struct DemandVector {
  Eigen::VectorXd delta;  // NT$ millions per sector
  bool allow_negative = false;
};

/// Maps adjusted per-voucher demand onto target sectors (summed in voucher
/// order). Throws ConfigError naming any voucher without a target sector in
/// range.
DemandVector induced_demand(const ScenarioSpec& scenario, const VoucherCatalog& catalog,
                            std::size_t sectors = kRegionalSectorCount);

/// Raw original amounts mapped to sectors, ignoring ES/IC.
DemandVector baseline_demand(const ScenarioSpec& scenario, const VoucherCatalog& catalog,
                             std::size_t sectors = kRegionalSectorCount);

struct ImpactReport {
  std::string label;
  std::vector<std::string> sector_names;
  Eigen::VectorXd gdp;  // per-sector GDP contribution, NT$ millions
  double total = 0.0;
  double original_total = 0.0;
  double output_multiplier = 0.0;  // total / original_total, 0 when no spending
};

/// gdp_i = va_i * sum_j L_ij * dF_j. Throws ValidationError on dimension
/// mismatch or on negative demand that is not flagged.
ImpactReport impact(const SectorTable& table, const DemandVector& demand, double original_total,
                    std::string label = {});

struct ScenarioDifference {
  std::string label;  // compared scenario
  Eigen::VectorXd per_sector;
  double total = 0.0;
};

struct DifferenceTable {
  std::string baseline_label;
  std::vector<std::string> sector_names;
  std::vector<ScenarioDifference> rows;  // one per report after the first
};

/// Differences of every report against the first. Throws ValidationError when
/// sector sets differ.
DifferenceTable scenario_compare(const std::vector<ImpactReport>& reports);

/// Parses a scenario file: {"scenarios": [{"label", "vouchers": {kind: {...}}}]}.
std::vector<ScenarioSpec> load_scenarios(std::istream& in);
std::vector<ScenarioSpec> load_scenarios_file(const std::string& path);

}  // namespace voucher
