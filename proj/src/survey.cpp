#include "voucher/survey.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <stdexcept>
#include <tuple>

#include <json.hpp>

#include "voucher/csv.hpp"
#include "voucher/error.hpp"

namespace voucher {

namespace {

std::string normalize(std::string_view token) {
  auto begin = token.find_first_not_of(" \t");
  auto end = token.find_last_not_of(" \t");
  if (begin == std::string_view::npos) return {};
  std::string out(token.substr(begin, end - begin + 1));
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return out;
}

template <typename Enum, std::size_t N>
std::optional<Enum> parse_from(std::string_view token, const std::array<std::string_view, N>& names) {
  const std::string key = normalize(token);
  for (std::size_t i = 0; i < N; ++i) {
    if (key == names[i]) return static_cast<Enum>(i);
  }
  return std::nullopt;
}

constexpr std::array<std::string_view, 6> kVoucherNames{"accommodation", "dining", "cultural",
                                                        "sports",        "market", "agricultural"};
constexpr std::array<std::string_view, 2> kGenderNames{"male", "female"};
constexpr std::array<std::string_view, 3> kResidenceNames{"taipei", "northern_adjacent", "other"};
constexpr std::array<std::string_view, 6> kAgeNames{"under_20", "20_29", "30_39", "40_49", "50_59", "60_plus"};
constexpr std::array<std::string_view, 2> kWaveNames{"original", "extra"};
constexpr std::array<std::string_view, 3> kDimensionNames{"gender", "residence", "age"};

std::string format_amount(double v) {
  if (v == std::floor(v) && std::abs(v) < 1e15) return std::to_string(static_cast<long long>(v));
  std::string s = std::to_string(v);
  s.erase(s.find_last_not_of('0') + 1);
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

}  // namespace

std::string_view to_string(VoucherKind k) noexcept { return kVoucherNames[index_of(k)]; }
std::optional<VoucherKind> parse_voucher_kind(std::string_view token) {
  return parse_from<VoucherKind>(token, kVoucherNames);
}

std::string_view to_string(Gender g) noexcept { return kGenderNames[static_cast<std::size_t>(g)]; }
std::string_view to_string(Residence r) noexcept { return kResidenceNames[static_cast<std::size_t>(r)]; }
std::string_view to_string(AgeBand a) noexcept { return kAgeNames[static_cast<std::size_t>(a)]; }
std::string_view to_string(Wave w) noexcept { return kWaveNames[static_cast<std::size_t>(w)]; }
std::string_view to_string(Dimension d) noexcept { return kDimensionNames[static_cast<std::size_t>(d)]; }

std::optional<Gender> parse_gender(std::string_view token) { return parse_from<Gender>(token, kGenderNames); }
std::optional<Residence> parse_residence(std::string_view token) {
  return parse_from<Residence>(token, kResidenceNames);
}
std::optional<AgeBand> parse_age_band(std::string_view token) { return parse_from<AgeBand>(token, kAgeNames); }
std::optional<Wave> parse_wave(std::string_view token) { return parse_from<Wave>(token, kWaveNames); }

// ---------------------------------------------------------------------------
// BracketSchedule

BracketSchedule::BracketSchedule(std::vector<std::pair<double, double>> interior, double top_lower,
                                 double granularity)
    : granularity_(granularity) {
  if (!(granularity > 0.0)) throw ConfigError("bracket granularity must be positive");
  brackets_.push_back(Bracket{0.0, 0.0, false});
  double expected_lo = granularity;
  for (const auto& [lo, hi] : interior) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || hi < lo) {
      throw ConfigError("bracket [" + format_amount(lo) + ", " + format_amount(hi) + "] is not an increasing range");
    }
    if (lo != expected_lo) {
      throw ConfigError("brackets are not contiguous: expected a bracket starting at " + format_amount(expected_lo) +
                        ", got " + format_amount(lo));
    }
    brackets_.push_back(Bracket{lo, hi, false});
    expected_lo = hi + granularity;
  }
  if (top_lower != expected_lo) {
    throw ConfigError("open-ended top bracket must start at " + format_amount(expected_lo) + ", got " +
                      format_amount(top_lower));
  }
  brackets_.push_back(Bracket{top_lower, top_lower, true});
}

const Bracket& BracketSchedule::bracket(std::size_t c) const {
  if (c >= brackets_.size()) throw std::out_of_range("bracket index out of range");
  return brackets_[c];
}

double BracketSchedule::midpoint(std::size_t c) const {
  const Bracket& b = bracket(c);
  if (c == 0) return 0.0;
  if (b.open_ended) return b.lo;
  return (b.lo + b.hi) / 2.0;
}

BracketSchedule BracketSchedule::scaled(double factor) const {
  std::vector<std::pair<double, double>> interior;
  for (std::size_t c = 1; c + 1 < brackets_.size(); ++c) {
    interior.emplace_back(brackets_[c].lo * factor, brackets_[c].hi * factor);
  }
  return BracketSchedule(std::move(interior), brackets_.back().lo * factor, granularity_ * factor);
}

std::string BracketSchedule::label(std::size_t c) const {
  const Bracket& b = bracket(c);
  if (c == 0) return "none";
  if (b.open_ended) return "more than " + format_amount(b.lo);
  return format_amount(b.lo) + "-" + format_amount(b.hi);
}

// ---------------------------------------------------------------------------
// VoucherCatalog

void VoucherCatalog::set(VoucherSpec spec) {
  if (!(spec.face_value_extra > 0.0) || !(spec.face_value_original > spec.face_value_extra)) {
    throw ConfigError("voucher '" + std::string(to_string(spec.kind)) +
                      "': face values must satisfy original > extra > 0");
  }
  if (spec.target_sector && *spec.target_sector == 0) {
    throw ConfigError("voucher '" + std::string(to_string(spec.kind)) + "': target_sector is 1-based");
  }
  if (spec.recipients < 0.0) {
    throw ConfigError("voucher '" + std::string(to_string(spec.kind)) + "': recipients must be non-negative");
  }
  const auto i = index_of(spec.kind);
  specs_[i].emplace(std::move(spec));
}

const VoucherSpec& VoucherCatalog::at(VoucherKind k) const {
  if (const auto* spec = find(k)) return *spec;
  throw ConfigError("voucher '" + std::string(to_string(k)) + "' is not configured");
}

const VoucherSpec* VoucherCatalog::find(VoucherKind k) const noexcept {
  const auto& slot = specs_[index_of(k)];
  return slot ? &*slot : nullptr;
}

VoucherCatalog default_catalog() {
  const BracketSchedule accommodation({{1, 1000}, {1001, 3000}, {3001, 5000}, {5001, 8000}, {8001, 10000}, {10001, 20000}},
                                      20001);
  const BracketSchedule standard({{1, 50}, {51, 100}, {101, 250}, {251, 500}, {501, 1000}, {1001, 2000}}, 2001);

  // Sector indices follow the regional table: 11 retail trade and food
  // services, 13 accommodation, 18 arts, entertainment and recreation.
  VoucherCatalog catalog;
  catalog.set({VoucherKind::accommodation, 1000, 500, accommodation, 13});
  catalog.set({VoucherKind::dining, 500, 100, standard, 11});
  catalog.set({VoucherKind::cultural, 500, 100, standard, 18});
  catalog.set({VoucherKind::sports, 500, 100, standard, 18});
  catalog.set({VoucherKind::market, 1000, 100, standard, 11});
  catalog.set({VoucherKind::agricultural, 500, 100, standard, 11});
  return catalog;
}

namespace {

VoucherSpec parse_voucher_entry(const nlohmann::json& entry) {
  const auto kind_token = entry.at("kind").get<std::string>();
  const auto kind = parse_voucher_kind(kind_token);
  if (!kind) throw ConfigError("unknown voucher kind '" + kind_token + "'");

  const auto& brackets = entry.at("brackets");
  if (!brackets.is_array() || brackets.empty()) {
    throw ConfigError("voucher '" + kind_token + "': brackets must be a non-empty list");
  }
  std::vector<std::pair<double, double>> interior;
  for (std::size_t i = 0; i + 1 < brackets.size(); ++i) {
    const auto& b = brackets[i];
    if (!b.is_array() || b.size() != 2) {
      throw ConfigError("voucher '" + kind_token + "': bracket " + std::to_string(i + 1) + " must be [lo, hi]");
    }
    interior.emplace_back(b[0].get<double>(), b[1].get<double>());
  }
  const auto& top = brackets.back();
  if (!top.is_array() || top.size() != 1) {
    throw ConfigError("voucher '" + kind_token + "': last bracket must be [lower_bound] (open-ended)");
  }
  const double granularity = entry.value("granularity", 1.0);

  std::optional<std::size_t> sector;
  if (entry.contains("target_sector") && !entry.at("target_sector").is_null()) {
    const auto raw = entry.at("target_sector").get<long long>();
    if (raw < 1) throw ConfigError("voucher '" + kind_token + "': target_sector must be >= 1");
    sector = static_cast<std::size_t>(raw);
  }
  return VoucherSpec{*kind,
                     entry.at("face_value_original").get<double>(),
                     entry.at("face_value_extra").get<double>(),
                     BracketSchedule(std::move(interior), top[0].get<double>(), granularity),
                     sector,
                     entry.value("recipients", 0.0)};
}

}  // namespace

VoucherCatalog load_catalog(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("voucher config is not valid JSON: ") + e.what());
  }
  VoucherCatalog catalog;
  try {
    const auto& list = doc.at("vouchers");
    for (const auto& entry : list) {
      auto spec = parse_voucher_entry(entry);
      if (catalog.contains(spec.kind)) {
        throw ConfigError("voucher '" + std::string(to_string(spec.kind)) + "' configured twice");
      }
      catalog.set(std::move(spec));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("voucher config: ") + e.what());
  }
  return catalog;
}

VoucherCatalog load_catalog_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open voucher config '" + path + "'");
  return load_catalog(in);
}

void write_catalog(std::ostream& out, const VoucherCatalog& catalog) {
  nlohmann::ordered_json doc;
  doc["vouchers"] = nlohmann::ordered_json::array();
  for (VoucherKind k : kVoucherKinds) {
    const auto* spec = catalog.find(k);
    if (!spec) continue;
    nlohmann::ordered_json entry;
    entry["kind"] = std::string(to_string(k));
    entry["face_value_original"] = spec->face_value_original;
    entry["face_value_extra"] = spec->face_value_extra;
    auto brackets = nlohmann::ordered_json::array();
    const auto all = spec->schedule.brackets();
    for (std::size_t c = 1; c < all.size(); ++c) {
      if (all[c].open_ended) {
        brackets.push_back({all[c].lo});
      } else {
        brackets.push_back({all[c].lo, all[c].hi});
      }
    }
    entry["brackets"] = brackets;
    if (spec->schedule.granularity() != 1.0) entry["granularity"] = spec->schedule.granularity();
    entry["target_sector"] = spec->target_sector ? nlohmann::ordered_json(*spec->target_sector) : nlohmann::ordered_json(nullptr);
    entry["recipients"] = spec->recipients;
    doc["vouchers"].push_back(entry);
  }
  out << doc.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Stratification

std::vector<Dimension> parse_dimensions(std::string_view spec) {
  std::vector<Dimension> dims;
  const std::string text = normalize(spec);
  if (text.empty() || text == "overall" || text == "none") return dims;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto stop = text.find_first_of("+*x", start);
    const auto token = text.substr(start, stop == std::string::npos ? std::string::npos : stop - start);
    const auto dim = parse_from<Dimension>(token, kDimensionNames);
    if (!dim) throw ConfigError("unknown grouping dimension '" + token + "'");
    if (std::find(dims.begin(), dims.end(), *dim) != dims.end()) {
      throw ConfigError("grouping dimension '" + token + "' repeated");
    }
    dims.push_back(*dim);
    if (stop == std::string::npos) break;
    start = stop + 1;
  }
  return dims;
}

std::string GroupKey::label() const {
  if (levels.empty()) return "overall";
  std::string out;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (i) out.push_back('/');
    out += levels[i];
  }
  return out;
}

namespace {

std::vector<std::string> unique_in_order(std::span<const std::string> values) {
  std::vector<std::string> out;
  for (const auto& v : values) {
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  }
  return out;
}

}  // namespace

StratificationScheme::StratificationScheme(std::vector<Dimension> dimensions, Coarsening coarsening)
    : dimensions_(std::move(dimensions)), coarsening_(std::move(coarsening)) {
  levels_[static_cast<std::size_t>(Dimension::gender)] = {"male", "female"};
  levels_[static_cast<std::size_t>(Dimension::residence)] = unique_in_order(coarsening_.residence);
  levels_[static_cast<std::size_t>(Dimension::age)] = unique_in_order(coarsening_.age);
  for (std::size_t i = 0; i < dimensions_.size(); ++i) {
    for (std::size_t j = i + 1; j < dimensions_.size(); ++j) {
      if (dimensions_[i] == dimensions_[j]) throw ConfigError("stratification dimension repeated");
    }
  }
  for (Dimension d : dimensions_) group_count_ *= levels(d).size();
}

StratificationScheme StratificationScheme::finest() {
  return StratificationScheme({Dimension::gender, Dimension::residence, Dimension::age});
}

const std::vector<std::string>& StratificationScheme::levels(Dimension d) const {
  return levels_[static_cast<std::size_t>(d)];
}

std::size_t StratificationScheme::level_index(Dimension d, const DemographicProfile& profile) const {
  const std::string* raw = nullptr;
  switch (d) {
    case Dimension::gender:
      return static_cast<std::size_t>(profile.gender);
    case Dimension::residence:
      raw = &coarsening_.residence[static_cast<std::size_t>(profile.residence)];
      break;
    case Dimension::age:
      raw = &coarsening_.age[static_cast<std::size_t>(profile.age)];
      break;
  }
  const auto& lv = levels(d);
  return static_cast<std::size_t>(std::find(lv.begin(), lv.end(), *raw) - lv.begin());
}

std::size_t StratificationScheme::group_of(const DemographicProfile& profile) const {
  std::size_t g = 0;
  for (Dimension d : dimensions_) g = g * levels(d).size() + level_index(d, profile);
  return g;
}

std::vector<std::size_t> StratificationScheme::decompose(std::size_t group) const {
  if (group >= group_count_) throw std::out_of_range("group index out of range");
  std::vector<std::size_t> idx(dimensions_.size());
  for (std::size_t i = dimensions_.size(); i-- > 0;) {
    const auto radix = levels(dimensions_[i]).size();
    idx[i] = group % radix;
    group /= radix;
  }
  return idx;
}

GroupKey StratificationScheme::key(std::size_t group) const {
  const auto idx = decompose(group);
  GroupKey key;
  for (std::size_t i = 0; i < dimensions_.size(); ++i) key.levels.push_back(levels(dimensions_[i])[idx[i]]);
  return key;
}

bool StratificationScheme::refines(const StratificationScheme& coarser) const {
  for (Dimension d : coarser.dimensions_) {
    if (std::find(dimensions_.begin(), dimensions_.end(), d) == dimensions_.end()) return false;
    if (d == Dimension::residence && coarsening_.residence != coarser.coarsening_.residence) return false;
    if (d == Dimension::age && coarsening_.age != coarser.coarsening_.age) return false;
  }
  return true;
}

std::size_t StratificationScheme::project(std::size_t group, const StratificationScheme& coarser) const {
  if (!refines(coarser)) throw ConfigError("scheme '" + coarser.name() + "' is not a coarsening of '" + name() + "'");
  const auto idx = decompose(group);
  std::size_t g = 0;
  for (Dimension d : coarser.dimensions_) {
    const auto pos = static_cast<std::size_t>(std::find(dimensions_.begin(), dimensions_.end(), d) - dimensions_.begin());
    g = g * coarser.levels(d).size() + idx[pos];
  }
  return g;
}

std::string StratificationScheme::name() const {
  if (dimensions_.empty()) return "overall";
  std::string out;
  for (std::size_t i = 0; i < dimensions_.size(); ++i) {
    if (i) out.push_back('*');
    out += to_string(dimensions_[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dataset

Dataset::Dataset(std::vector<SurveyRecord> records) : records_(std::move(records)) {
  for (const auto& r : records_) ++counts_[index_of(r.voucher)][static_cast<std::size_t>(r.wave)];
}

std::vector<SurveyRecord> Dataset::of_kind(VoucherKind k) const {
  std::vector<SurveyRecord> out;
  out.reserve(count(k));
  for (const auto& r : records_) {
    if (r.voucher == k) out.push_back(r);
  }
  return out;
}

std::vector<SurveyRecord> Dataset::of_kind(VoucherKind k, Wave w) const {
  std::vector<SurveyRecord> out;
  out.reserve(count(k, w));
  for (const auto& r : records_) {
    if (r.voucher == k && r.wave == w) out.push_back(r);
  }
  return out;
}

Dataset Dataset::only_wave(Wave w) const {
  std::vector<SurveyRecord> out;
  for (const auto& r : records_) {
    if (r.wave == w) out.push_back(r);
  }
  return Dataset(std::move(out));
}

std::vector<Stratum> stratify(const Dataset& ds, const StratificationScheme& scheme, VoucherKind k) {
  std::vector<Stratum> strata;
  if (ds.count(k) == 0) return strata;
  strata.resize(scheme.group_count());
  for (std::size_t g = 0; g < strata.size(); ++g) {
    strata[g].index = g;
    strata[g].key = scheme.key(g);
  }
  for (const auto& r : ds.records()) {
    if (r.voucher == k) strata[scheme.group_of(r.profile)].records.push_back(r);
  }
  return strata;
}

// ---------------------------------------------------------------------------
// Ingestion

namespace {

struct ColumnMap {
  std::array<std::size_t, kSurveyColumns.size()> index{};
  std::size_t width = 0;
};

std::optional<ColumnMap> parse_header(const std::vector<std::string>& fields, std::string& problem) {
  ColumnMap map;
  map.width = fields.size();
  std::array<bool, kSurveyColumns.size()> seen{};
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const auto name = normalize(fields[i]);
    for (std::size_t c = 0; c < kSurveyColumns.size(); ++c) {
      if (name == kSurveyColumns[c]) {
        if (seen[c]) {
          problem = "duplicate column '" + name + "'";
          return std::nullopt;
        }
        seen[c] = true;
        map.index[c] = i;
      }
    }
  }
  std::string missing;
  for (std::size_t c = 0; c < kSurveyColumns.size(); ++c) {
    if (!seen[c]) missing += (missing.empty() ? "" : ", ") + std::string(kSurveyColumns[c]);
  }
  if (!missing.empty()) {
    problem = "missing header: required columns not found: " + missing;
    return std::nullopt;
  }
  return map;
}

std::optional<std::size_t> parse_index(std::string_view token) {
  const auto text = normalize(token);
  if (text.empty() || text.size() > 9) return std::nullopt;
  std::size_t value = 0;
  for (char ch : text) {
    if (ch < '0' || ch > '9') return std::nullopt;
    value = value * 10 + static_cast<std::size_t>(ch - '0');
  }
  return value;
}

std::optional<bool> parse_triggered(std::string_view token) {
  const auto text = normalize(token);
  if (text == "yes") return true;
  if (text == "no") return false;
  return std::nullopt;
}

class Ingestor {
 public:
  explicit Ingestor(const VoucherCatalog& catalog) : catalog_(catalog) {}

  IngestReport run(std::istream& in, bool stop_at_first) {
    IngestReport report;
    std::string line;
    std::size_t line_no = 0;
    std::optional<ColumnMap> columns;
    std::vector<SurveyRecord> records;

    while (csv::read_line(in, line)) {
      ++line_no;
      if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
      if (!columns) {
        auto fields = csv::split_line(line);
        std::string problem = "missing header: first line is not a valid CSV header";
        if (fields) columns = parse_header(*fields, problem);
        if (!columns) {
          report.issues.push_back({line_no, "header", problem});
          return report;
        }
        continue;
      }
      if (line.find_first_not_of(" \t") == std::string::npos) continue;
      ++report.rows_read;
      const auto before = report.issues.size();
      auto record = parse_row(line, line_no, *columns, report.issues);
      if (record) records.push_back(std::move(*record));
      if (stop_at_first && report.issues.size() > before) return report;
    }
    report.dataset = Dataset(std::move(records));
    return report;
  }

 private:
  std::optional<SurveyRecord> parse_row(const std::string& line, std::size_t row, const ColumnMap& columns,
                                        std::vector<IngestIssue>& issues) {
    const auto fields = csv::split_line(line);
    if (!fields) {
      issues.push_back({row, "(row)", "malformed CSV quoting"});
      return std::nullopt;
    }
    if (fields->size() != columns.width) {
      issues.push_back({row, "(row)", "expected " + std::to_string(columns.width) + " fields, found " +
                                          std::to_string(fields->size())});
      return std::nullopt;
    }
    auto field = [&](std::size_t c) -> const std::string& { return (*fields)[columns.index[c]]; };
    const auto before = issues.size();
    auto fail = [&](std::size_t c, std::string message) {
      issues.push_back({row, std::string(kSurveyColumns[c]), std::move(message)});
    };

    SurveyRecord rec;
    rec.respondent_id = field(0);
    if (normalize(rec.respondent_id).empty()) fail(0, "respondent_id is empty");

    const auto kind = parse_voucher_kind(field(1));
    if (!kind) {
      fail(1, "unknown voucher kind '" + field(1) + "'");
    } else if (!catalog_.contains(*kind)) {
      fail(1, "voucher kind '" + field(1) + "' is not configured");
    } else {
      rec.voucher = *kind;
    }

    if (auto g = parse_gender(field(2))) rec.profile.gender = *g;
    else fail(2, "invalid gender '" + field(2) + "'");
    if (auto r = parse_residence(field(3))) rec.profile.residence = *r;
    else fail(3, "invalid residence '" + field(3) + "'");
    if (auto a = parse_age_band(field(4))) rec.profile.age = *a;
    else fail(4, "invalid age_band '" + field(4) + "'");
    if (auto t = parse_triggered(field(5))) rec.triggered = *t;
    else fail(5, "triggered must be yes or no, got '" + field(5) + "'");

    if (auto idx = parse_index(field(6))) {
      rec.bracket_index = *idx;
      if (kind && catalog_.contains(*kind) && *idx >= catalog_.at(*kind).schedule.size()) {
        fail(6, "bracket index out of range: " + std::to_string(*idx) + " (schedule has " +
                    std::to_string(catalog_.at(*kind).schedule.size()) + " brackets)");
      }
    } else {
      fail(6, "bracket_index is not a non-negative integer: '" + field(6) + "'");
    }

    if (auto w = parse_wave(field(7))) rec.wave = *w;
    else fail(7, "wave must be original or extra, got '" + field(7) + "'");

    if (issues.size() != before) return std::nullopt;

    auto key = std::make_tuple(rec.respondent_id, rec.voucher, rec.wave);
    if (!seen_.insert(key).second) {
      fail(0, "duplicate (respondent_id, voucher, wave) = (" + rec.respondent_id + ", " +
                  std::string(to_string(rec.voucher)) + ", " + std::string(to_string(rec.wave)) + ")");
      return std::nullopt;
    }
    return rec;
  }

  const VoucherCatalog& catalog_;
  std::set<std::tuple<std::string, VoucherKind, Wave>> seen_;
};

}  // namespace

IngestReport ingest_checked(std::istream& in, const VoucherCatalog& catalog) {
  return Ingestor(catalog).run(in, false);
}

Dataset ingest(std::istream& in, const VoucherCatalog& catalog) {
  auto report = Ingestor(catalog).run(in, true);
  if (!report.issues.empty()) {
    const auto& issue = report.issues.front();
    if (issue.field == "header") throw ValidationError(issue.message);
    throw IngestError(issue.row, issue.field, issue.message);
  }
  return std::move(report.dataset);
}

void write_survey(std::ostream& out, const Dataset& ds) {
  std::vector<std::string> header(kSurveyColumns.begin(), kSurveyColumns.end());
  out << csv::join(header) << '\n';
  for (const auto& r : ds.records()) {
    out << csv::join({r.respondent_id, std::string(to_string(r.voucher)), std::string(to_string(r.profile.gender)),
                      std::string(to_string(r.profile.residence)), std::string(to_string(r.profile.age)),
                      r.triggered ? "yes" : "no", std::to_string(r.bracket_index), std::string(to_string(r.wave))})
        << '\n';
  }
}

}  // namespace voucher
