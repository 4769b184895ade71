#pragma once

// Survey data model: voucher kinds, bracket schedules, respondent records,
// demographic stratification and validated CSV ingestion.

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace voucher {

enum class VoucherKind : std::uint8_t { accommodation, dining, cultural, sports, market, agricultural };

inline constexpr std::size_t kVoucherKindCount = 6;
inline constexpr std::array<VoucherKind, kVoucherKindCount> kVoucherKinds{
    VoucherKind::accommodation, VoucherKind::dining, VoucherKind::cultural,
    VoucherKind::sports,        VoucherKind::market, VoucherKind::agricultural};

constexpr std::size_t index_of(VoucherKind k) noexcept { return static_cast<std::size_t>(k); }
std::string_view to_string(VoucherKind k) noexcept;
std::optional<VoucherKind> parse_voucher_kind(std::string_view token);

// ---------------------------------------------------------------------------
// Bracket schedules

/// One spending bracket in NT$. Interior brackets are inclusive integer ranges
/// [lo, hi]; the first bracket is the degenerate "no additional spending" one
/// and the last is open-ended with recorded lower bound `lo`.
struct Bracket {
  double lo = 0.0;
  double hi = 0.0;
  bool open_ended = false;

  bool operator==(const Bracket&) const = default;
};

class BracketSchedule {
 public:
  /// `interior` lists the bounded paid brackets in increasing order; the
  /// schedule is [none, interior..., more-than top_lower]. Adjacent brackets
  /// must satisfy next.lo == prev.hi + granularity (1 NT$ for printed schedules).
  /// Throws ConfigError when the schedule is not contiguous and increasing.
  BracketSchedule(std::vector<std::pair<double, double>> interior, double top_lower,
                  double granularity = 1.0);

  /// Number of brackets C, including the "none" and open-ended ones.
  std::size_t size() const noexcept { return brackets_.size(); }
  const Bracket& bracket(std::size_t c) const;
  std::span<const Bracket> brackets() const noexcept { return brackets_; }
  double granularity() const noexcept { return granularity_; }

  /// 0 for bracket 0, (lo + hi) / 2 for interior brackets, lo for the top one.
  /// Throws std::out_of_range for c >= size().
  double midpoint(std::size_t c) const;
  double largest_midpoint() const { return midpoint(size() - 1); }

  /// Same schedule with every boundary (and the granularity) multiplied by `factor`.
  BracketSchedule scaled(double factor) const;

  std::string label(std::size_t c) const;

  bool operator==(const BracketSchedule&) const = default;

 private:
  std::vector<Bracket> brackets_;
  double granularity_ = 1.0;
};

inline double midpoint(const BracketSchedule& schedule, std::size_t c) { return schedule.midpoint(c); }

// ---------------------------------------------------------------------------
// Voucher configuration

struct VoucherSpec {
  VoucherKind kind = VoucherKind::dining;
  double face_value_original = 0.0;  // F_k, NT$
  double face_value_extra = 0.0;     // second-round bonus voucher, NT$
  BracketSchedule schedule;
  /// 1-based sector index into the regional table; nullopt when unmapped.
  std::optional<std::size_t> target_sector;
  /// Recipient count used to scale per-respondent intensity to a program
  /// total. 0 means unknown.
  double recipients = 0.0;
};

/// Voucher configuration for all kinds present in a config file.
class VoucherCatalog {
 public:
  VoucherCatalog() = default;

  void set(VoucherSpec spec);
  bool contains(VoucherKind k) const noexcept { return specs_[index_of(k)].has_value(); }
  /// Throws ConfigError naming the voucher when it is not configured.
  const VoucherSpec& at(VoucherKind k) const;
  const VoucherSpec* find(VoucherKind k) const noexcept;

 private:
  std::array<std::optional<VoucherSpec>, kVoucherKindCount> specs_;
};

/// The program's first- and second-round face values, the printed bracket
/// schedules and the voucher-to-sector mapping of the regional table.
VoucherCatalog default_catalog();

/// Parses the JSON voucher configuration. Throws ConfigError.
VoucherCatalog load_catalog(std::istream& in);
VoucherCatalog load_catalog_file(const std::string& path);
void write_catalog(std::ostream& out, const VoucherCatalog& catalog);

// ---------------------------------------------------------------------------
// Respondents

enum class Gender : std::uint8_t { male, female };
enum class Residence : std::uint8_t { taipei, northern_adjacent, other };
enum class AgeBand : std::uint8_t { under_20, from_20_to_29, from_30_to_39, from_40_to_49, from_50_to_59, from_60 };
enum class Wave : std::uint8_t { original, extra };

std::string_view to_string(Gender g) noexcept;
std::string_view to_string(Residence r) noexcept;
std::string_view to_string(AgeBand a) noexcept;
std::string_view to_string(Wave w) noexcept;
std::optional<Gender> parse_gender(std::string_view token);
std::optional<Residence> parse_residence(std::string_view token);
std::optional<AgeBand> parse_age_band(std::string_view token);
std::optional<Wave> parse_wave(std::string_view token);

struct DemographicProfile {
  Gender gender = Gender::male;
  Residence residence = Residence::taipei;
  AgeBand age = AgeBand::under_20;

  bool operator==(const DemographicProfile&) const = default;
};

struct SurveyRecord {
  std::string respondent_id;
  VoucherKind voucher = VoucherKind::dining;
  DemographicProfile profile;
  /// "Yes": the purchase was made because of the voucher.
  bool triggered = true;
  std::size_t bracket_index = 0;
  Wave wave = Wave::original;

  /// v_ki: 1 when the respondent answered "No" (pure substitution).
  bool substituted() const noexcept { return !triggered; }

  bool operator==(const SurveyRecord&) const = default;
};

// ---------------------------------------------------------------------------
// Stratification

enum class Dimension : std::uint8_t { gender, residence, age };

std::string_view to_string(Dimension d) noexcept;
/// Parses "gender", "residence+age", "gender*residence*age", ... Throws ConfigError.
std::vector<Dimension> parse_dimensions(std::string_view spec);

/// Maps raw survey answers onto the levels used for grouping. Defaults follow
/// the reported tables: Taipei vs other cities, and <30 / 30-49 / >49.
struct Coarsening {
  std::array<std::string, 3> residence{"taipei", "other_cities", "other_cities"};
  std::array<std::string, 6> age{"<30", "<30", "30-49", "30-49", ">49", ">49"};

  bool operator==(const Coarsening&) const = default;
};

struct GroupKey {
  std::vector<std::string> levels;  // one per scheme dimension, in scheme order

  /// "female/taipei/<30"; "overall" for a key with no levels.
  std::string label() const;
  bool operator==(const GroupKey&) const = default;
};

class StratificationScheme {
 public:
  explicit StratificationScheme(std::vector<Dimension> dimensions, Coarsening coarsening = {});

  /// gender x residence x age under the default coarsening (12 cells).
  static StratificationScheme finest();

  const std::vector<Dimension>& dimensions() const noexcept { return dimensions_; }
  const Coarsening& coarsening() const noexcept { return coarsening_; }

  /// J, the number of cells in the cartesian product of the dimension levels.
  std::size_t group_count() const noexcept { return group_count_; }
  std::size_t group_of(const DemographicProfile& profile) const;
  GroupKey key(std::size_t group) const;

  const std::vector<std::string>& levels(Dimension d) const;
  std::size_t level_index(Dimension d, const DemographicProfile& profile) const;

  /// True when every cell of this scheme lies inside exactly one cell of `coarser`.
  bool refines(const StratificationScheme& coarser) const;
  /// Cell of `coarser` containing cell `group` of this scheme. Requires refines(coarser).
  std::size_t project(std::size_t group, const StratificationScheme& coarser) const;

  std::string name() const;

 private:
  std::vector<std::size_t> decompose(std::size_t group) const;

  std::vector<Dimension> dimensions_;
  Coarsening coarsening_;
  std::array<std::vector<std::string>, 3> levels_;
  std::size_t group_count_ = 1;
};

// ---------------------------------------------------------------------------
// Datasets

class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<SurveyRecord> records);

  std::span<const SurveyRecord> records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }

  /// n_k over all waves.
  std::size_t count(VoucherKind k) const noexcept { return counts_[index_of(k)][0] + counts_[index_of(k)][1]; }
  std::size_t count(VoucherKind k, Wave w) const noexcept {
    return counts_[index_of(k)][static_cast<std::size_t>(w)];
  }

  std::vector<SurveyRecord> of_kind(VoucherKind k) const;
  std::vector<SurveyRecord> of_kind(VoucherKind k, Wave w) const;
  Dataset only_wave(Wave w) const;

  bool operator==(const Dataset& other) const { return records_ == other.records_; }

 private:
  std::vector<SurveyRecord> records_;
  std::array<std::array<std::size_t, 2>, kVoucherKindCount> counts_{};
};

struct Stratum {
  std::size_t index = 0;  // cell index in the scheme
  GroupKey key;
  std::vector<SurveyRecord> records;

  bool empty() const noexcept { return records.empty(); }
};

/// Partitions the voucher-k records of `ds` by `scheme`. Every cell of the
/// scheme is returned in cell order, empty ones included; when `ds` holds no
/// voucher-k record the result is empty.
std::vector<Stratum> stratify(const Dataset& ds, const StratificationScheme& scheme, VoucherKind k);

// ---------------------------------------------------------------------------
// Ingestion

struct IngestIssue {
  std::size_t row = 0;  // 1-based source line; 1 is the header
  std::string field;
  std::string message;
};

struct IngestReport {
  Dataset dataset;  // valid rows only
  std::vector<IngestIssue> issues;
  std::size_t rows_read = 0;

  bool ok() const noexcept { return issues.empty(); }
};

inline constexpr std::array<std::string_view, 8> kSurveyColumns{
    "respondent_id", "voucher_type", "gender", "residence", "age_band", "triggered", "bracket_index", "wave"};

/// Reads every row and collects all problems instead of stopping at the first.
IngestReport ingest_checked(std::istream& in, const VoucherCatalog& catalog);

/// Strict ingest: throws IngestError for the first bad row (ValidationError
/// for a missing or malformed header).
Dataset ingest(std::istream& in, const VoucherCatalog& catalog);

/// Writes the survey file format accepted by ingest.
void write_survey(std::ostream& out, const Dataset& ds);

}  // namespace voucher
