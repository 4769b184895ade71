#include <cstdlib>
#include <optional>
#include <ostream>

#include <CLI11.hpp>

#include "voucher/cli.hpp"
#include "voucher/error.hpp"

namespace voucher::cli {

namespace {

struct CommonFlags {
  std::string config;
  std::string out_dir;
  std::string format = "text";
  std::optional<std::uint64_t> seed;

  void attach(CLI::App& cmd, bool with_seed) {
    cmd.add_option("--config", config, "Voucher configuration JSON (default: built-in)");
    cmd.add_option("--out-dir", out_dir, "Directory for report files")->envname("VOUCHER_OUT_DIR");
    cmd.add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json", "text"}));
    if (with_seed) cmd.add_option("--seed", seed, "Random seed")->envname("VOUCHER_SEED");
  }

  CommonOptions resolve() const {
    CommonOptions c;
    c.config = config;
    c.out_dir = out_dir;
    c.format = parse_report_format(format);
    if (seed) {
      c.seed = *seed;
      c.seed_given = true;
    }
    return c;
  }
};

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Consumption-voucher survey estimation, bootstrap inference and input-output impact"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  ValidateArgs validate_args;
  CommonFlags validate_flags;
  auto* validate = app.add_subcommand("validate", "Check a survey file against the schema");
  validate_flags.attach(*validate, false);
  validate->add_option("survey,--survey", validate_args.survey, "Survey CSV")->required();

  EstimateArgs estimate_args;
  CommonFlags estimate_flags;
  auto* estimate = app.add_subcommand("estimate", "Substitution, induced consumption and intensity estimates");
  estimate_flags.attach(*estimate, false);
  estimate->add_option("survey,--survey", estimate_args.survey, "Survey CSV")->required();
  estimate->add_option("--group-by", estimate_args.group_by, "Comma-separated groupings, e.g. gender,residence+age")
      ->capture_default_str();
  estimate->add_flag("--include-extra-wave", estimate_args.include_extra_wave,
                     "Pool extra-wave records into the rate estimates");

  BootstrapArgs bootstrap_args;
  CommonFlags bootstrap_flags;
  auto* bootstrap = app.add_subcommand("bootstrap", "Stratified bootstrap confidence regions");
  bootstrap_flags.attach(*bootstrap, true);
  bootstrap->add_option("survey,--survey", bootstrap_args.survey, "Survey CSV")->required();
  bootstrap->add_option("--alpha", bootstrap_args.alpha, "Significance level")->capture_default_str();
  bootstrap->add_option("--replications,-B", bootstrap_args.replications, "Bootstrap replications")
      ->capture_default_str();
  bootstrap->add_option("--group-by", bootstrap_args.group_by, "Comma-separated reporting groupings")
      ->capture_default_str();
  bootstrap->add_option("--finest", bootstrap_args.finest, "Resampling strata and bias-proxy cells")
      ->capture_default_str();
  bootstrap->add_option("--metric", bootstrap_args.metric, "es, ic or both")->capture_default_str();
  bootstrap->add_option("--voucher", bootstrap_args.vouchers, "Restrict to these vouchers");
  bootstrap->add_option("--percentile-mode", bootstrap_args.percentile_mode, "two-sided or one-sided")
      ->capture_default_str();
  bootstrap->add_option("--workers", bootstrap_args.workers, "Worker threads (0 = all cores)");
  bootstrap->add_flag("--svg", bootstrap_args.svg, "Also render interval charts into --out-dir");
  bootstrap->add_flag("--include-extra-wave", bootstrap_args.include_extra_wave,
                      "Resample extra-wave records as well");

  ImpactArgs impact_args;
  CommonFlags impact_flags;
  auto* impact_cmd = app.add_subcommand("impact", "Input-output GDP impact of voucher scenarios");
  impact_flags.attach(*impact_cmd, false);
  impact_cmd->add_option("--table", impact_args.table, "Sector table CSV (default: shipped table)");
  impact_cmd->add_option("--scenarios", impact_args.scenarios, "Scenario JSON (default: shipped scenarios)");

  SimulateArgs simulate_args;
  CommonFlags simulate_flags;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic survey with known ground truth");
  simulate_flags.attach(*simulate, true);
  simulate->add_option("--popspec", simulate_args.popspec, "Population spec JSON (default: built-in)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : config_error;
  }

  try {
    if (*validate) {
      validate_args.common = validate_flags.resolve();
      return cmd_validate(validate_args, out, err);
    }
    if (*estimate) {
      estimate_args.common = estimate_flags.resolve();
      return cmd_estimate(estimate_args, out, err);
    }
    if (*bootstrap) {
      bootstrap_args.common = bootstrap_flags.resolve();
      return cmd_bootstrap(bootstrap_args, out, err);
    }
    if (*impact_cmd) {
      impact_args.common = impact_flags.resolve();
      return cmd_impact(impact_args, out, err);
    }
    if (*simulate) {
      simulate_args.common = simulate_flags.resolve();
      return cmd_simulate(simulate_args, out, err);
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return validation_failure;
  } catch (const UndefinedEstimate& e) {
    err << "error: " << e.what() << '\n';
    return validation_failure;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return config_error;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return numeric_failure;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return numeric_failure;
  }
  return config_error;
}

}  // namespace voucher::cli
