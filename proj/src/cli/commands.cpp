#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include "voucher/cli.hpp"
#include "voucher/error.hpp"
#include "voucher/estimators.hpp"
#include "voucher/inference.hpp"
#include "voucher/io_engine.hpp"
#include "voucher/report.hpp"
#include "voucher/survey.hpp"
#include "voucher/synthgen.hpp"

#ifndef VOUCHER_DATA_DIR
#define VOUCHER_DATA_DIR "data"
#endif

namespace voucher::cli {

namespace fs = std::filesystem;

std::string data_dir() { return VOUCHER_DATA_DIR; }

std::vector<StratificationScheme> parse_groupings(const std::string& spec) {
  std::vector<StratificationScheme> out;
  std::stringstream items(spec);
  std::string item;
  while (std::getline(items, item, ',')) {
    const auto dims = parse_dimensions(item);
    if (!dims.empty()) out.emplace_back(dims);
  }
  return out;
}

namespace {

VoucherCatalog catalog_for(const CommonOptions& common, RunManifest& manifest) {
  if (common.config.empty()) {
    auto catalog = default_catalog();
    std::ostringstream text;
    write_catalog(text, catalog);
    manifest.add_builtin("config", text.str());
    return catalog;
  }
  manifest.add_input("config", common.config);
  return load_catalog_file(common.config);
}

IngestReport read_survey(const std::string& path, const VoucherCatalog& catalog, RunManifest& manifest) {
  if (path.empty()) throw ConfigError("no survey file given (--survey)");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read survey '" + path + "'");
  manifest.add_input("survey", path);
  return ingest_checked(in, catalog);
}

Dataset checked_dataset(const std::string& path, const VoucherCatalog& catalog, RunManifest& manifest,
                        std::ostream& err) {
  auto report = read_survey(path, catalog, manifest);
  if (!report.ok()) {
    write_validation(err, report);
    throw ValidationError("survey '" + path + "' failed validation");
  }
  return std::move(report.dataset);
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw ConfigError("cannot write '" + path.string() + "'");
  return file;
}

// Prints the report to `out` in the requested format. With an output
// directory, also persists the machine form (csv or json), the text form and
// the manifest next to each other.
void emit(const CommonOptions& common, const std::string& base, const RunManifest& manifest, std::ostream& out,
          const std::function<void(std::ostream&, ReportFormat)>& writer) {
  writer(out, common.format);
  if (common.out_dir.empty()) return;
  fs::create_directories(common.out_dir);
  const auto machine = common.format == ReportFormat::json ? ReportFormat::json : ReportFormat::csv;
  {
    auto file = open_output(fs::path(common.out_dir) / (base + "." + extension(machine)));
    writer(file, machine);
  }
  {
    auto file = open_output(fs::path(common.out_dir) / (base + ".txt"));
    writer(file, ReportFormat::text);
  }
  auto file = open_output(fs::path(common.out_dir) / (base + ".manifest.json"));
  write_manifest_json(file, manifest);
}

}  // namespace

int cmd_validate(const ValidateArgs& args, std::ostream& out, std::ostream& /*err*/) {
  RunManifest manifest;
  manifest.command = "validate";
  const auto catalog = catalog_for(args.common, manifest);
  const auto report = read_survey(args.survey, catalog, manifest);
  write_validation(out, report);
  return report.ok() ? ok : validation_failure;
}

int cmd_estimate(const EstimateArgs& args, std::ostream& out, std::ostream& err) {
  RunManifest manifest;
  manifest.command = "estimate";
  const auto catalog = catalog_for(args.common, manifest);
  const auto groupings = parse_groupings(args.group_by);
  manifest.settings.emplace_back("group_by", args.group_by);
  manifest.settings.emplace_back("include_extra_wave", args.include_extra_wave ? "true" : "false");
  const auto dataset = checked_dataset(args.survey, catalog, manifest, err);

  voucher::EstimateOptions options;
  options.include_extra_wave = args.include_extra_wave;
  const auto summary = summarize(dataset, catalog, groupings, options);
  for (const auto& row : summary.rates) {
    if (row.empty() && row.metric == Metric::substitution) {
      err << "notice: group '" << row.group << "' of voucher '" << to_string(row.voucher) << "' is empty\n";
    }
  }
  emit(args.common, "estimates", manifest, out,
       [&](std::ostream& os, ReportFormat f) { write_estimates(os, summary, catalog, manifest, f); });
  return ok;
}

int cmd_bootstrap(const BootstrapArgs& args, std::ostream& out, std::ostream& err) {
  RunManifest manifest;
  manifest.command = "bootstrap";
  const auto catalog = catalog_for(args.common, manifest);

  BootstrapConfig cfg;
  cfg.replications = args.replications;
  cfg.alpha = args.alpha;
  cfg.seed = args.common.seed;
  cfg.scheme = StratificationScheme(parse_dimensions(args.finest));
  cfg.reporting = parse_groupings(args.group_by);
  cfg.workers = args.workers;
  if (args.percentile_mode == "two-sided") {
    cfg.mode = PercentileMode::two_sided;
  } else if (args.percentile_mode == "one-sided") {
    cfg.mode = PercentileMode::one_sided_tails;
  } else {
    throw ConfigError("unknown percentile mode '" + args.percentile_mode + "' (expected two-sided or one-sided)");
  }
  cfg.validate();

  std::vector<Metric> metrics;
  if (args.metric == "es" || args.metric == "both") metrics.push_back(Metric::substitution);
  if (args.metric == "ic" || args.metric == "both") metrics.push_back(Metric::induced);
  if (metrics.empty()) throw ConfigError("unknown metric '" + args.metric + "' (expected es, ic or both)");

  std::vector<VoucherKind> selected;
  for (const auto& token : args.vouchers) {
    const auto k = parse_voucher_kind(token);
    if (!k) throw ConfigError("unknown voucher '" + token + "'");
    selected.push_back(*k);
  }

  manifest.seed = cfg.seed;
  manifest.alpha = cfg.alpha;
  manifest.replications = cfg.replications;
  manifest.settings.emplace_back("finest", cfg.scheme.name());
  manifest.settings.emplace_back("group_by", args.group_by);
  manifest.settings.emplace_back("percentile_mode", args.percentile_mode);
  manifest.settings.emplace_back("include_extra_wave", args.include_extra_wave ? "true" : "false");

  const auto all = checked_dataset(args.survey, catalog, manifest, err);
  const auto dataset = args.include_extra_wave ? all : all.only_wave(Wave::original);

  std::vector<BootstrapResult> results;
  for (VoucherKind k : kVoucherKinds) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), k) == selected.end()) continue;
    if (dataset.count(k) == 0) {
      if (!selected.empty()) throw ValidationError("survey has no records for voucher '" + std::string(to_string(k)) + "'");
      continue;
    }
    for (Metric m : metrics) results.push_back(stratified_bootstrap(dataset, m, cfg, k, catalog.at(k)));
  }
  if (const auto warning = cfg.resolution_warning(); !warning.empty()) err << "warning: " << warning << '\n';

  emit(args.common, "regions", manifest, out,
       [&](std::ostream& os, ReportFormat f) { write_regions(os, results, manifest, f); });
  if (!args.common.out_dir.empty()) {
    auto plot = open_output(fs::path(args.common.out_dir) / "plot_data.csv");
    write_plot_data(plot, results, manifest);
    if (args.svg) {
      for (const auto& r : results) {
        const auto name = std::string("intervals_") + std::string(to_string(r.voucher)) + "_" +
                          (r.metric == Metric::substitution ? "es" : "ic") + ".svg";
        auto svg = open_output(fs::path(args.common.out_dir) / name);
        write_interval_svg(svg, r);
      }
    }
  }
  return ok;
}

int cmd_impact(const ImpactArgs& args, std::ostream& out, std::ostream& /*err*/) {
  RunManifest manifest;
  manifest.command = "impact";
  const auto catalog = catalog_for(args.common, manifest);
  const std::string table_path = args.table.empty() ? data_dir() + "/table_a.csv" : args.table;
  const std::string scenario_path = args.scenarios.empty() ? data_dir() + "/scenarios.json" : args.scenarios;
  manifest.add_input("table", table_path);
  manifest.add_input("scenarios", scenario_path);

  const auto table = load_table_file(table_path);
  validate_table(table);
  const auto scenarios = load_scenarios_file(scenario_path);
  if (scenarios.empty()) throw ConfigError("scenario file '" + scenario_path + "' defines no scenarios");
  for (const auto& s : scenarios) manifest.scenario_labels.push_back(s.label);

  std::vector<ImpactReport> reports;
  for (const auto& s : scenarios) {
    s.validate();
    reports.push_back(impact(table, induced_demand(s, catalog, table.size()), s.original_total(), s.label));
  }
  const auto differences = scenario_compare(reports);
  emit(args.common, "impact", manifest, out,
       [&](std::ostream& os, ReportFormat f) { write_impact(os, reports, differences, manifest, f); });
  return ok;
}

int cmd_simulate(const SimulateArgs& args, std::ostream& out, std::ostream& /*err*/) {
  RunManifest manifest;
  manifest.command = "simulate";
  const auto catalog = catalog_for(args.common, manifest);
  PopulationSpec spec;
  if (args.popspec.empty()) {
    spec = default_population_spec();
    std::ostringstream text;
    write_population_spec(text, spec);
    manifest.add_builtin("popspec", text.str());
  } else {
    manifest.add_input("popspec", args.popspec);
    spec = load_population_spec_file(args.popspec);
  }
  if (args.common.seed_given) spec.seed = args.common.seed;
  manifest.seed = spec.seed;

  const auto survey = generate(spec, catalog);
  const fs::path dir = args.common.out_dir.empty() ? fs::path(".") : fs::path(args.common.out_dir);
  fs::create_directories(dir);
  {
    auto file = open_output(dir / "survey.csv");
    write_survey(file, survey.dataset);
  }
  {
    auto file = open_output(dir / "ground_truth.json");
    write_ground_truth(file, survey.truth);
  }
  {
    auto file = open_output(dir / "simulate.manifest.json");
    write_manifest_json(file, manifest);
  }
  out << "wrote " << survey.dataset.size() << " records to " << (dir / "survey.csv").string() << '\n';
  out << "wrote ground truth to " << (dir / "ground_truth.json").string() << '\n';
  for (const auto& v : survey.truth.vouchers) {
    for (const auto& g : v.absent_groups) {
      out << "notice: group " << g << " of voucher '" << to_string(v.kind) << "' has no respondents\n";
    }
  }
  return ok;
}

}  // namespace voucher::cli
