#include "voucher/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "voucher/csv.hpp"
#include "voucher/error.hpp"

namespace voucher {

using ordered_json = nlohmann::ordered_json;

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw NumericError("sha256 digest failed");
  }
  std::string hex;
  hex.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return sha256_hex(bytes);
}

void RunManifest::add_input(std::string role, const std::string& path) {
  inputs.push_back({std::move(role), path, sha256_file(path)});
}

void RunManifest::add_builtin(std::string role, const std::string& content) {
  inputs.push_back({std::move(role), "<builtin>", sha256_hex(content)});
}

std::string format_full(double value) {
  if (std::isnan(value)) return "NA";
  char buffer[64];
  const auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, end);
}

std::string format_fixed(double value, int decimals) {
  if (std::isnan(value)) return "NA";
  // Avoid printing "-0.000".
  const double scale = std::pow(10.0, decimals);
  if (std::round(value * scale) == 0.0) value = 0.0;
  return fmt::format("{:.{}f}", value, decimals);
}

namespace {

ordered_json manifest_json(const RunManifest& m) {
  ordered_json j;
  j["tool_version"] = m.tool_version;
  j["command"] = m.command;
  j["inputs"] = ordered_json::array();
  for (const auto& in : m.inputs) j["inputs"].push_back({{"role", in.role}, {"path", in.path}, {"sha256", in.sha256}});
  if (m.seed) j["seed"] = *m.seed;
  if (m.alpha) j["alpha"] = *m.alpha;
  if (m.replications) j["replications"] = *m.replications;
  if (!m.scenario_labels.empty()) j["scenarios"] = m.scenario_labels;
  for (const auto& [key, value] : m.settings) j["settings"][key] = value;
  return j;
}

ordered_json json_number(double v) { return std::isnan(v) ? ordered_json(nullptr) : ordered_json(v); }

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) { out << csv::join(fields) << '\n'; }

std::string percent(double v) { return format_fixed(100.0 * v, 1); }

// Column-aligned text table: first column left-aligned, the rest right-aligned.
void write_aligned(std::ostream& out, const std::vector<std::vector<std::string>>& rows) {
  if (rows.empty()) return;
  std::vector<std::size_t> widths(rows.front().size(), 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size() && c < widths.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
  }
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) line += "  ";
      line += c == 0 ? fmt::format("{:<{}}", row[c], widths[c]) : fmt::format("{:>{}}", row[c], widths[c]);
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out << line << '\n';
  }
}

}  // namespace

void write_manifest_json(std::ostream& out, const RunManifest& manifest) {
  out << manifest_json(manifest).dump(2) << '\n';
}

void write_manifest_comment(std::ostream& out, const RunManifest& manifest) {
  out << "# tool_version: " << manifest.tool_version << '\n';
  out << "# command: " << manifest.command << '\n';
  for (const auto& in : manifest.inputs) {
    out << "# input " << in.role << ": " << in.path << " sha256=" << in.sha256 << '\n';
  }
  if (manifest.seed) out << "# seed: " << *manifest.seed << '\n';
  if (manifest.alpha) out << "# alpha: " << format_full(*manifest.alpha) << '\n';
  if (manifest.replications) out << "# replications: " << *manifest.replications << '\n';
  if (!manifest.scenario_labels.empty()) {
    out << "# scenarios:";
    for (const auto& label : manifest.scenario_labels) out << ' ' << label;
    out << '\n';
  }
  for (const auto& [key, value] : manifest.settings) out << "# " << key << ": " << value << '\n';
}

ReportFormat parse_report_format(const std::string& token) {
  if (token == "csv") return ReportFormat::csv;
  if (token == "json") return ReportFormat::json;
  if (token == "text") return ReportFormat::text;
  throw ConfigError("unknown format '" + token + "' (expected csv, json or text)");
}

std::string extension(ReportFormat format) {
  switch (format) {
    case ReportFormat::csv: return "csv";
    case ReportFormat::json: return "json";
    case ReportFormat::text: return "txt";
  }
  return "txt";
}

// ---------------------------------------------------------------------------
// Estimates

void write_estimates(std::ostream& out, const EstimateSummary& summary, const VoucherCatalog& catalog,
                     const RunManifest& manifest, ReportFormat format) {
  if (format == ReportFormat::json) {
    ordered_json doc;
    doc["manifest"] = manifest_json(manifest);
    doc["counts"] = ordered_json::array();
    for (const auto& c : summary.counts) {
      doc["counts"].push_back(
          {{"voucher", to_string(c.voucher)}, {"grouping", c.grouping}, {"group", c.group}, {"n", c.n}});
    }
    doc["estimates"] = ordered_json::array();
    for (const auto& r : summary.rates) {
      doc["estimates"].push_back({{"voucher", to_string(r.voucher)},
                                  {"grouping", r.grouping},
                                  {"group", r.group},
                                  {"metric", to_string(r.metric)},
                                  {"value", json_number(r.value)},
                                  {"n", r.n}});
    }
    doc["intensity"] = ordered_json::array();
    for (const auto& it : summary.intensity) {
      const auto& spec = catalog.at(it.voucher);
      doc["intensity"].push_back({{"voucher", to_string(it.voucher)},
                                  {"value", it.value},
                                  {"n_original", it.n_original},
                                  {"n_extra", it.n_extra},
                                  {"recipients", spec.recipients},
                                  {"program_total_millions", it.program_total_millions(spec.recipients)}});
    }
    doc["intensity_missing"] = ordered_json::array();
    for (auto k : summary.intensity_missing) doc["intensity_missing"].push_back(to_string(k));
    out << doc.dump(2) << '\n';
    return;
  }

  write_manifest_comment(out, manifest);
  if (format == ReportFormat::csv) {
    write_csv_row(out, {"voucher", "grouping", "group", "metric", "value", "n"});
    for (const auto& r : summary.rates) {
      write_csv_row(out, {std::string(to_string(r.voucher)), r.grouping, r.group, std::string(to_string(r.metric)),
                          format_full(r.value), std::to_string(r.n)});
    }
    return;
  }

  out << "\nSample sizes\n";
  std::vector<std::vector<std::string>> counts{{"voucher", "grouping", "group", "n"}};
  for (const auto& c : summary.counts) {
    counts.push_back({std::string(to_string(c.voucher)), c.grouping, c.group, std::to_string(c.n)});
  }
  write_aligned(out, counts);

  out << "\nEstimates (%)\n";
  std::vector<std::vector<std::string>> rows{{"voucher", "grouping", "group", "metric", "value", "n"}};
  for (const auto& r : summary.rates) {
    rows.push_back({std::string(to_string(r.voucher)), r.grouping, r.group, std::string(to_string(r.metric)),
                    r.empty() ? "empty" : percent(r.value), std::to_string(r.n)});
  }
  write_aligned(out, rows);

  out << "\nTreatment intensity\n";
  if (summary.intensity.empty()) {
    out << "no voucher has both original and extra-wave records; intensity omitted\n";
  } else {
    std::vector<std::vector<std::string>> it_rows{
        {"voucher", "NT$ per respondent", "n_original", "n_extra", "program total (NT$M)"}};
    for (const auto& it : summary.intensity) {
      const auto& spec = catalog.at(it.voucher);
      it_rows.push_back({std::string(to_string(it.voucher)), format_fixed(it.value, 3), std::to_string(it.n_original),
                         std::to_string(it.n_extra),
                         spec.recipients > 0 ? format_fixed(it.program_total_millions(spec.recipients), 3) : "n/a"});
    }
    write_aligned(out, it_rows);
  }
  for (auto k : summary.intensity_missing) {
    out << "notice: intensity for '" << to_string(k) << "' omitted (one survey wave is missing)\n";
  }
}

// ---------------------------------------------------------------------------
// Confidence regions

namespace {

template <typename F>
void for_each_region(const std::vector<BootstrapResult>& results, F&& f) {
  for (const auto& res : results) {
    for (const auto& g : res.cells) f(res, g);
    for (const auto& g : res.reported) f(res, g);
    f(res, res.overall);
  }
}

}  // namespace

void write_regions(std::ostream& out, const std::vector<BootstrapResult>& results, const RunManifest& manifest,
                   ReportFormat format) {
  if (format == ReportFormat::json) {
    ordered_json doc;
    doc["manifest"] = manifest_json(manifest);
    doc["regions"] = ordered_json::array();
    for_each_region(results, [&](const BootstrapResult& res, const GroupRegion& g) {
      const auto& r = g.region;
      doc["regions"].push_back({{"voucher", to_string(res.voucher)},
                                {"grouping", g.grouping},
                                {"group", g.group},
                                {"metric", to_string(res.metric)},
                                {"n", g.n},
                                {"estimate", g.estimate.point},
                                {"bias_bound", g.estimate.bias_bound},
                                {"lower", g.estimate.lower},
                                {"lower_ci_lo", r.ci_lower.lo},
                                {"lower_ci_hi", r.ci_lower.hi},
                                {"upper_ci_lo", r.ci_upper.lo},
                                {"upper_ci_hi", r.ci_upper.hi},
                                {"combined_lo", r.combined.lo},
                                {"combined_hi", r.combined.hi},
                                {"B_s", res.replications},
                                {"alpha", res.alpha},
                                {"seed", res.seed}});
    });
    doc["warnings"] = ordered_json::array();
    for (const auto& res : results) {
      for (const auto& w : res.warnings) doc["warnings"].push_back(w);
    }
    out << doc.dump(2) << '\n';
    return;
  }

  write_manifest_comment(out, manifest);
  if (format == ReportFormat::csv) {
    write_csv_row(out, {"voucher", "grouping", "group", "metric", "n", "estimate", "lower", "lower_ci_lo",
                        "lower_ci_hi", "upper_ci_lo", "upper_ci_hi", "combined_lo", "combined_hi", "B_s", "alpha",
                        "seed"});
    for_each_region(results, [&](const BootstrapResult& res, const GroupRegion& g) {
      const auto& r = g.region;
      write_csv_row(out, {std::string(to_string(res.voucher)), g.grouping, g.group, std::string(to_string(res.metric)),
                          std::to_string(g.n), format_full(g.estimate.point), format_full(g.estimate.lower),
                          format_full(r.ci_lower.lo), format_full(r.ci_lower.hi), format_full(r.ci_upper.lo),
                          format_full(r.ci_upper.hi), format_full(r.combined.lo), format_full(r.combined.hi),
                          std::to_string(res.replications), format_full(res.alpha), std::to_string(res.seed)});
    });
    return;
  }

  for (const auto& res : results) {
    out << '\n' << to_string(res.voucher) << ' ' << to_string(res.metric) << " (%, B_s = " << res.replications
        << ", alpha = " << format_full(res.alpha) << ")\n";
    std::vector<std::vector<std::string>> rows{
        {"group", "n", "upper", "lower", "upper CI", "lower CI", "combined"}};
    auto add = [&](const GroupRegion& g) {
      const auto& r = g.region;
      rows.push_back({g.group, std::to_string(g.n), percent(g.estimate.upper), percent(g.estimate.lower),
                      "[" + percent(r.ci_upper.lo) + ", " + percent(r.ci_upper.hi) + "]",
                      "[" + percent(r.ci_lower.lo) + ", " + percent(r.ci_lower.hi) + "]",
                      "[" + percent(r.combined.lo) + ", " + percent(r.combined.hi) + "]"});
    };
    for (const auto& g : res.reported) add(g);
    add(res.overall);
    write_aligned(out, rows);
    for (const auto& w : res.warnings) out << "warning: " << w << '\n';
  }
}

void write_plot_data(std::ostream& out, const std::vector<BootstrapResult>& results, const RunManifest& manifest) {
  write_manifest_comment(out, manifest);
  write_csv_row(out, {"voucher", "metric", "grouping", "group", "interval", "point", "lo", "hi"});
  for_each_region(results, [&](const BootstrapResult& res, const GroupRegion& g) {
    const std::string v(to_string(res.voucher));
    const std::string m(to_string(res.metric));
    const auto& r = g.region;
    write_csv_row(out, {v, m, g.grouping, g.group, "upper", format_full(g.estimate.upper), format_full(r.ci_upper.lo),
                        format_full(r.ci_upper.hi)});
    write_csv_row(out, {v, m, g.grouping, g.group, "lower", format_full(g.estimate.lower), format_full(r.ci_lower.lo),
                        format_full(r.ci_lower.hi)});
  });
}

void write_interval_svg(std::ostream& out, const BootstrapResult& result) {
  std::vector<const GroupRegion*> groups;
  for (const auto& g : result.reported) groups.push_back(&g);
  groups.push_back(&result.overall);

  double top = 0.0;
  for (const auto* g : groups) top = std::max({top, g->region.combined.hi, g->estimate.upper});
  top = top > 0.0 ? std::ceil(top * 10.0) / 10.0 : 1.0;

  const int row_height = 28;
  const int left = 160;
  const int plot_width = 420;
  const int height = static_cast<int>(groups.size()) * row_height + 60;
  auto x_of = [&](double v) { return left + plot_width * std::clamp(v / top, 0.0, 1.0); };

  out << R"(<svg xmlns="http://www.w3.org/2000/svg" width=")" << left + plot_width + 40 << R"(" height=")" << height
      << R"(" font-family="sans-serif" font-size="12">)" << '\n';
  out << fmt::format(R"(<text x="10" y="18">{} {} (B_s = {}, alpha = {})</text>)", to_string(result.voucher),
                     to_string(result.metric), result.replications, format_full(result.alpha))
      << '\n';
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const auto* g = groups[i];
    const double y = 40.0 + static_cast<double>(i) * row_height;
    out << fmt::format(R"(<text x="10" y="{:.1f}">{}</text>)", y + 4, g->group) << '\n';
    out << fmt::format(R"(<line x1="{:.1f}" y1="{:.1f}" x2="{:.1f}" y2="{:.1f}" stroke="#1f77b4" stroke-width="3"/>)",
                       x_of(g->region.ci_upper.lo), y - 4, x_of(g->region.ci_upper.hi), y - 4)
        << '\n';
    out << fmt::format(R"(<line x1="{:.1f}" y1="{:.1f}" x2="{:.1f}" y2="{:.1f}" stroke="#d62728" stroke-width="3"/>)",
                       x_of(g->region.ci_lower.lo), y + 4, x_of(g->region.ci_lower.hi), y + 4)
        << '\n';
    out << fmt::format(R"(<circle cx="{:.1f}" cy="{:.1f}" r="3" fill="#1f77b4"/>)", x_of(g->estimate.upper), y - 4)
        << '\n';
    out << fmt::format(R"(<circle cx="{:.1f}" cy="{:.1f}" r="3" fill="#d62728"/>)", x_of(g->estimate.lower), y + 4)
        << '\n';
  }
  const double axis_y = 40.0 + static_cast<double>(groups.size()) * row_height - 10;
  out << fmt::format(R"(<line x1="{}" y1="{:.1f}" x2="{}" y2="{:.1f}" stroke="black"/>)", left, axis_y,
                     left + plot_width, axis_y)
      << '\n';
  for (int t = 0; t <= 4; ++t) {
    const double v = top * t / 4.0;
    out << fmt::format(R"(<text x="{:.1f}" y="{:.1f}" text-anchor="middle">{}%</text>)", x_of(v), axis_y + 16,
                       format_fixed(100.0 * v, 0))
        << '\n';
  }
  out << "</svg>\n";
}

// ---------------------------------------------------------------------------
// Impact

void write_impact(std::ostream& out, const std::vector<ImpactReport>& reports, const DifferenceTable& differences,
                  const RunManifest& manifest, ReportFormat format) {
  if (format == ReportFormat::json) {
    ordered_json doc;
    doc["manifest"] = manifest_json(manifest);
    doc["scenarios"] = ordered_json::array();
    for (const auto& r : reports) {
      ordered_json s;
      s["label"] = r.label;
      s["sectors"] = ordered_json::array();
      for (std::size_t i = 0; i < r.sector_names.size(); ++i) {
        s["sectors"].push_back({{"index", i + 1}, {"sector", r.sector_names[i]}, {"gdp", r.gdp[static_cast<Eigen::Index>(i)]}});
      }
      s["total"] = r.total;
      s["original_total"] = r.original_total;
      s["output_multiplier"] = r.output_multiplier;
      doc["scenarios"].push_back(s);
    }
    doc["differences"] = ordered_json::array();
    for (const auto& d : differences.rows) {
      ordered_json s;
      s["label"] = d.label;
      s["baseline"] = differences.baseline_label;
      s["per_sector"] = ordered_json::array();
      for (Eigen::Index i = 0; i < d.per_sector.size(); ++i) s["per_sector"].push_back(d.per_sector[i]);
      s["total"] = d.total;
      doc["differences"].push_back(s);
    }
    out << doc.dump(2) << '\n';
    return;
  }

  write_manifest_comment(out, manifest);
  if (format == ReportFormat::csv) {
    write_csv_row(out, {"scenario", "index", "sector", "gdp", "difference"});
    for (std::size_t s = 0; s < reports.size(); ++s) {
      const auto& r = reports[s];
      const ScenarioDifference* diff = s > 0 && s - 1 < differences.rows.size() ? &differences.rows[s - 1] : nullptr;
      for (std::size_t i = 0; i < r.sector_names.size(); ++i) {
        const auto idx = static_cast<Eigen::Index>(i);
        write_csv_row(out, {r.label, std::to_string(i + 1), r.sector_names[i], format_full(r.gdp[idx]),
                            diff ? format_full(diff->per_sector[idx]) : "0"});
      }
      write_csv_row(out, {r.label, "", "total", format_full(r.total), diff ? format_full(diff->total) : "0"});
      write_csv_row(out, {r.label, "", "original_total", format_full(r.original_total), ""});
      write_csv_row(out, {r.label, "", "output_multiplier", format_full(r.output_multiplier), ""});
    }
    return;
  }

  if (reports.empty()) return;
  std::vector<std::string> header{"sector"};
  for (std::size_t s = 0; s < reports.size(); ++s) {
    header.push_back(reports[s].label);
    if (s > 0) header.push_back("diff vs " + reports.front().label);
  }
  std::vector<std::vector<std::string>> rows{header};
  const auto& names = reports.front().sector_names;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    std::vector<std::string> row{fmt::format("{:>2} {}", i + 1, names[i])};
    for (std::size_t s = 0; s < reports.size(); ++s) {
      row.push_back(format_fixed(reports[s].gdp[idx], 3));
      if (s > 0) row.push_back(format_fixed(differences.rows[s - 1].per_sector[idx], 3));
    }
    rows.push_back(std::move(row));
  }
  std::vector<std::string> total{"Total"};
  std::vector<std::string> multiplier{"Output multiplier"};
  for (std::size_t s = 0; s < reports.size(); ++s) {
    total.push_back(format_fixed(reports[s].total, 3));
    multiplier.push_back(format_fixed(reports[s].output_multiplier, 3));
    if (s > 0) {
      total.push_back(format_fixed(differences.rows[s - 1].total, 3));
      multiplier.push_back("");
    }
  }
  rows.push_back(std::move(total));
  rows.push_back(std::move(multiplier));
  out << "\nGDP contribution by sector (NT$ millions)\n";
  write_aligned(out, rows);
}

void write_validation(std::ostream& out, const IngestReport& report) {
  for (const auto& issue : report.issues) {
    out << "row " << issue.row << ", field " << issue.field << ": " << issue.message << '\n';
  }
  out << report.issues.size() << (report.issues.size() == 1 ? " error" : " errors") << " in "
      << report.rows_read << " rows\n";
}

}  // namespace voucher
