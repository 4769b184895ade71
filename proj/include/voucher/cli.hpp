#pragma once

// Batch command-line surface: validate, estimate, bootstrap, impact, simulate.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "voucher/report.hpp"

namespace voucher::cli {

enum ExitCode : int { ok = 0, validation_failure = 1, config_error = 2, numeric_failure = 3 };

struct CommonOptions {
  std::string config;  // empty: built-in voucher configuration
  std::string out_dir;  // empty: stdout only
  ReportFormat format = ReportFormat::text;
  std::uint64_t seed = 1;
  bool seed_given = false;
};

struct ValidateArgs {
  CommonOptions common;
  std::string survey;
};

struct EstimateArgs {
  CommonOptions common;
  std::string survey;
  std::string group_by = "gender,residence,age";
  bool include_extra_wave = false;
};

struct BootstrapArgs {
  CommonOptions common;
  std::string survey;
  std::string group_by = "gender,residence,age";
  std::string finest = "gender*residence*age";
  double alpha = 0.05;
  std::size_t replications = 2000;
  std::string metric = "both";  // es, ic or both
  std::vector<std::string> vouchers;  // empty: every voucher present
  std::string percentile_mode = "two-sided";
  unsigned workers = 0;
  bool svg = false;
  bool include_extra_wave = false;
};

struct ImpactArgs {
  CommonOptions common;
  std::string table;
  std::string scenarios;
};

struct SimulateArgs {
  CommonOptions common;
  std::string popspec;  // empty: built-in default population
};

int cmd_validate(const ValidateArgs& args, std::ostream& out, std::ostream& err);
int cmd_estimate(const EstimateArgs& args, std::ostream& out, std::ostream& err);
int cmd_bootstrap(const BootstrapArgs& args, std::ostream& out, std::ostream& err);
int cmd_impact(const ImpactArgs& args, std::ostream& out, std::ostream& err);
int cmd_simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err);

/// Parses "gender,residence+age" into one scheme per comma-separated item;
/// "overall" or an empty string yields no groupings.
std::vector<StratificationScheme> parse_groupings(const std::string& spec);

/// Location of the shipped data files (table, scenarios, configuration).
std::string data_dir();

/// Full entry point. Error messages go to `err`; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace voucher::cli
