#pragma once

// Report serialization: flat CSV/JSON for machines, aligned text for people.
// Every report carries the run manifest; CSV and text embed it as leading
// "# " comment lines.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "voucher/estimators.hpp"
#include "voucher/inference.hpp"
#include "voucher/io_engine.hpp"

namespace voucher {

inline constexpr const char* kToolVersion = "1.0.0";

struct InputDigest {
  std::string role;  // "survey", "config", "table", ...
  std::string path;
  std::string sha256;
};

struct RunManifest {
  std::string tool_version = kToolVersion;
  std::string command;
  std::vector<InputDigest> inputs;
  std::optional<std::uint64_t> seed;
  std::optional<double> alpha;
  std::optional<std::size_t> replications;
  std::vector<std::string> scenario_labels;
  std::vector<std::pair<std::string, std::string>> settings;

  /// Hashes the file at `path` and records it. Throws ConfigError if unreadable.
  void add_input(std::string role, const std::string& path);
  void add_builtin(std::string role, const std::string& content);
};

std::string sha256_hex(const std::string& bytes);
/// Throws ConfigError when the file cannot be read.
std::string sha256_file(const std::string& path);

/// Shortest round-trip representation; "NA" for NaN.
std::string format_full(double value);
std::string format_fixed(double value, int decimals);

void write_manifest_json(std::ostream& out, const RunManifest& manifest);
void write_manifest_comment(std::ostream& out, const RunManifest& manifest);

enum class ReportFormat { csv, json, text };
ReportFormat parse_report_format(const std::string& token);
std::string extension(ReportFormat format);

/// Program totals for intensity use each voucher's configured recipient count.
void write_estimates(std::ostream& out, const EstimateSummary& summary, const VoucherCatalog& catalog,
                     const RunManifest& manifest, ReportFormat format);
void write_regions(std::ostream& out, const std::vector<BootstrapResult>& results, const RunManifest& manifest,
                   ReportFormat format);
/// Interval endpoints per group and metric, one row per interval kind.
void write_plot_data(std::ostream& out, const std::vector<BootstrapResult>& results, const RunManifest& manifest);
/// Static interval chart for one voucher and metric (reported groups plus overall).
void write_interval_svg(std::ostream& out, const BootstrapResult& result);
void write_impact(std::ostream& out, const std::vector<ImpactReport>& reports, const DifferenceTable& differences,
                  const RunManifest& manifest, ReportFormat format);
void write_validation(std::ostream& out, const IngestReport& report);

}  // namespace voucher
