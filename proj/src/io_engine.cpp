#include "voucher/io_engine.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "voucher/csv.hpp"
#include "voucher/error.hpp"

namespace voucher {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

double parse_number(const std::string& token, std::size_t row, std::size_t col) {
  const auto text = trim(token);
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw ValidationError("sector table row " + std::to_string(row) + ", column " + std::to_string(col) +
                          ": not a number: '" + token + "'");
  }
  return value;
}

}  // namespace

void validate_table(const SectorTable& table) {
  const auto n = static_cast<Eigen::Index>(table.size());
  if (n == 0) throw ValidationError("sector table is empty");
  if (table.leontief.rows() != n || table.leontief.cols() != n || table.value_added.size() != n) {
    throw ValidationError("sector table dimensions do not match the sector list");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (table.leontief(i, j) < 0.0) {
        throw ValidationError("negative entry at (" + std::to_string(i + 1) + ", " + std::to_string(j + 1) + ")");
      }
    }
    if (table.leontief(i, i) < 1.0) {
      throw ValidationError("not a Leontief inverse: diagonal entry " + std::to_string(i + 1) + " is below 1 (" +
                            std::to_string(table.leontief(i, i)) +
                            "); the file may hold technical coefficients instead of (I - A)^-1");
    }
    const double va = table.value_added(i);
    if (!(va > 0.0 && va <= 1.0)) {
      throw ValidationError("value-added coefficient for sector " + std::to_string(i + 1) + " outside (0, 1]");
    }
  }
}

SectorTable load_table(std::istream& in, std::size_t expected_sectors) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> row_lines;
  while (csv::read_line(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = csv::split_line(line);
    if (!fields) throw ValidationError("sector table line " + std::to_string(line_no) + ": malformed CSV");
    rows.push_back(std::move(*fields));
    row_lines.push_back(line_no);
  }
  if (rows.empty()) throw ValidationError("sector table is empty");
  if (trim(rows.front().front()) != "sector") {
    throw ValidationError("sector table: header row must start with 'sector'");
  }
  const std::size_t n = rows.front().size() - 1;
  if (rows.size() != n + 2) {
    throw ValidationError("sector table: wrong dimensions: header lists " + std::to_string(n) + " columns but found " +
                          std::to_string(rows.size() - 1) + " data rows (expected " + std::to_string(n) +
                          " sectors plus added_value)");
  }
  if (expected_sectors != 0 && n != expected_sectors) {
    throw ValidationError("sector table: wrong dimensions: expected " + std::to_string(expected_sectors) +
                          " sectors, found " + std::to_string(n));
  }
  SectorTable table;
  table.leontief.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  table.value_added.resize(static_cast<Eigen::Index>(n));
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != n + 1) {
      throw ValidationError("sector table line " + std::to_string(row_lines[r]) + ": wrong dimensions: expected " +
                            std::to_string(n + 1) + " fields, found " + std::to_string(row.size()));
    }
    const bool va_row = r == rows.size() - 1;
    if (va_row && trim(row.front()) != "added_value") {
      throw ValidationError("sector table: last row must be 'added_value'");
    }
    for (std::size_t c = 1; c <= n; ++c) {
      const double v = parse_number(row[c], row_lines[r], c);
      if (va_row) {
        table.value_added(static_cast<Eigen::Index>(c - 1)) = v;
      } else {
        table.leontief(static_cast<Eigen::Index>(r - 1), static_cast<Eigen::Index>(c - 1)) = v;
      }
    }
    if (!va_row) table.sector_names.push_back(trim(row.front()));
  }
  validate_table(table);
  return table;
}

SectorTable load_table_file(const std::string& path, std::size_t expected_sectors) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open sector table '" + path + "'");
  return load_table(in, expected_sectors);
}

void write_table(std::ostream& out, const SectorTable& table) {
  std::vector<std::string> header{"sector"};
  for (std::size_t j = 0; j < table.size(); ++j) header.push_back(std::to_string(j + 1));
  out << csv::join(header) << '\n';
  auto number = [](double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
  };
  for (std::size_t i = 0; i < table.size(); ++i) {
    std::vector<std::string> row{table.sector_names[i]};
    for (std::size_t j = 0; j < table.size(); ++j) {
      row.push_back(number(table.leontief(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
    }
    out << csv::join(row) << '\n';
  }
  std::vector<std::string> va{"added_value"};
  for (std::size_t j = 0; j < table.size(); ++j) va.push_back(number(table.value_added(static_cast<Eigen::Index>(j))));
  out << csv::join(va) << '\n';
}

namespace {

Eigen::MatrixXd checked_inverse(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) throw NumericError(std::string(what) + ": matrix must be square");
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-12)) {
    throw NumericError(std::string(what) + ": matrix is numerically singular (rcond " + std::to_string(rcond) + ")");
  }
  return lu.inverse();
}

}  // namespace

Eigen::MatrixXd technical_from_inverse(const Eigen::MatrixXd& leontief) {
  const auto inv = checked_inverse(leontief, "technical_from_inverse");
  return Eigen::MatrixXd::Identity(leontief.rows(), leontief.cols()) - inv;
}

Eigen::MatrixXd leontief_from_technical(const Eigen::MatrixXd& technical) {
  return checked_inverse(Eigen::MatrixXd::Identity(technical.rows(), technical.cols()) - technical,
                         "leontief_from_technical");
}

double spectral_radius(const Eigen::MatrixXd& m) {
  Eigen::EigenSolver<Eigen::MatrixXd> solver(m, false);
  if (solver.info() != Eigen::Success) throw NumericError("eigenvalue computation did not converge");
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// Scenarios

double ScenarioEntry::adjusted() const {
  if (induced_override) return *induced_override;
  return original_amount * (1.0 - es) * (1.0 + ic);
}

double ScenarioSpec::original_total() const {
  double total = 0.0;
  for (const auto& e : entries) total += e.original_amount;
  return total;
}

void ScenarioSpec::validate() const {
  std::set<VoucherKind> seen;
  for (const auto& e : entries) {
    const std::string name(to_string(e.voucher));
    if (!seen.insert(e.voucher).second) throw ConfigError("scenario '" + label + "': voucher '" + name + "' listed twice");
    if (!(e.original_amount >= 0.0)) throw ConfigError("scenario '" + label + "': negative original amount for " + name);
    if (!(e.es >= 0.0 && e.es <= 1.0)) throw ConfigError("scenario '" + label + "': ES outside [0, 1] for " + name);
    if (!(e.ic >= 0.0)) throw ConfigError("scenario '" + label + "': negative IC for " + name);
    if (e.induced_override && !std::isfinite(*e.induced_override)) {
      throw ConfigError("scenario '" + label + "': induced demand is not finite for " + name);
    }
    if (e.induced_override && *e.induced_override < 0.0 && !contraction) {
      throw ConfigError("scenario '" + label + "': negative induced demand for " + name +
                        " requires \"contraction\": true");
    }
  }
}

namespace {

template <typename AmountFn>
DemandVector map_to_sectors(const ScenarioSpec& scenario, const VoucherCatalog& catalog, std::size_t sectors,
                            AmountFn amount) {
  scenario.validate();
  DemandVector demand;
  demand.delta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sectors));
  // Voucher order, not file order, fixes the summation order per sector.
  for (VoucherKind k : kVoucherKinds) {
    for (const auto& e : scenario.entries) {
      if (e.voucher != k) continue;
      const auto* spec = catalog.find(k);
      const std::string name(to_string(k));
      if (!spec || !spec->target_sector) {
        throw ConfigError("scenario '" + scenario.label + "': voucher '" + name + "' has no target sector mapping");
      }
      if (*spec->target_sector > sectors) {
        throw ConfigError("voucher '" + name + "' maps to sector " + std::to_string(*spec->target_sector) +
                          " but the table has " + std::to_string(sectors));
      }
      demand.delta(static_cast<Eigen::Index>(*spec->target_sector - 1)) += amount(e);
    }
  }
  demand.allow_negative = scenario.contraction;
  return demand;
}

}  // namespace

DemandVector induced_demand(const ScenarioSpec& scenario, const VoucherCatalog& catalog, std::size_t sectors) {
  return map_to_sectors(scenario, catalog, sectors, [](const ScenarioEntry& e) { return e.adjusted(); });
}

DemandVector baseline_demand(const ScenarioSpec& scenario, const VoucherCatalog& catalog, std::size_t sectors) {
  return map_to_sectors(scenario, catalog, sectors, [](const ScenarioEntry& e) { return e.original_amount; });
}

ImpactReport impact(const SectorTable& table, const DemandVector& demand, double original_total, std::string label) {
  const auto n = static_cast<Eigen::Index>(table.size());
  if (demand.delta.size() != n) {
    throw ValidationError("demand vector has " + std::to_string(demand.delta.size()) + " sectors, table has " +
                          std::to_string(n));
  }
  if (!demand.delta.allFinite()) throw ValidationError("demand vector has non-finite entries");
  if (!demand.allow_negative && (demand.delta.array() < 0.0).any()) {
    throw ValidationError("negative final demand requires the contraction flag");
  }
  ImpactReport report;
  report.label = std::move(label);
  report.sector_names = table.sector_names;
  report.gdp = table.value_added.cwiseProduct(table.leontief * demand.delta);
  report.total = report.gdp.sum();
  report.original_total = original_total;
  report.output_multiplier = original_total != 0.0 ? report.total / original_total : 0.0;
  return report;
}

DifferenceTable scenario_compare(const std::vector<ImpactReport>& reports) {
  DifferenceTable table;
  if (reports.empty()) return table;
  const auto& base = reports.front();
  table.baseline_label = base.label;
  table.sector_names = base.sector_names;
  for (std::size_t i = 1; i < reports.size(); ++i) {
    if (reports[i].sector_names != base.sector_names) {
      throw ValidationError("scenario '" + reports[i].label + "' uses a different sector set than '" + base.label + "'");
    }
    table.rows.push_back({reports[i].label, reports[i].gdp - base.gdp, reports[i].total - base.total});
  }
  return table;
}

std::vector<ScenarioSpec> load_scenarios(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("scenario file is not valid JSON: ") + e.what());
  }
  std::vector<ScenarioSpec> out;
  try {
    for (const auto& item : doc.at("scenarios")) {
      ScenarioSpec spec;
      spec.label = item.at("label").get<std::string>();
      spec.contraction = item.value("contraction", false);
      for (const auto& [name, v] : item.at("vouchers").items()) {
        const auto kind = parse_voucher_kind(name);
        if (!kind) throw ConfigError("scenario '" + spec.label + "': unknown voucher '" + name + "'");
        ScenarioEntry e;
        e.voucher = *kind;
        e.original_amount = v.at("original_amount").get<double>();
        e.es = v.value("es", 0.0);
        e.ic = v.value("ic", 0.0);
        if (v.contains("induced_demand")) e.induced_override = v.at("induced_demand").get<double>();
        spec.entries.push_back(e);
      }
      spec.validate();
      out.push_back(std::move(spec));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("scenario file: ") + e.what());
  }
  if (out.empty()) throw ConfigError("scenario file lists no scenarios");
  return out;
}

std::vector<ScenarioSpec> load_scenarios_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
  return load_scenarios(in);
}

}  // namespace voucher
