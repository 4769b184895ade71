#include <doctest.h>

#include <atomic>
#include <cmath>
#include <mutex>
#include <random>

#include "support/generators.hpp"
#include "voucher/error.hpp"
#include "voucher/estimators.hpp"
#include "voucher/inference.hpp"
#include "voucher/rng.hpp"

using namespace voucher;

namespace {

RateEstimate rate(std::string group, double value) {
  return RateEstimate{Metric::substitution, VoucherKind::dining, std::move(group), 10, value, 0};
}

// n records of a profile with the given number answering "No" and bracket draws
// cycling through `brackets`.
void add_cell(std::vector<SurveyRecord>& out, VoucherKind k, DemographicProfile p, std::size_t n, std::size_t no,
              std::vector<std::size_t> brackets = {0}) {
  for (std::size_t i = 0; i < n; ++i) {
    SurveyRecord r;
    r.respondent_id = "c" + std::to_string(out.size());
    r.voucher = k;
    r.profile = p;
    r.triggered = i >= no;
    r.bracket_index = brackets[i % brackets.size()];
    out.push_back(r);
  }
}

constexpr DemographicProfile kYoung{Gender::male, Residence::taipei, AgeBand::from_20_to_29};
constexpr DemographicProfile kMiddle{Gender::male, Residence::taipei, AgeBand::from_30_to_39};
constexpr DemographicProfile kOlder{Gender::male, Residence::taipei, AgeBand::from_50_to_59};

BootstrapConfig age_config(std::size_t reps, std::uint64_t seed) {
  BootstrapConfig cfg;
  cfg.replications = reps;
  cfg.seed = seed;
  cfg.scheme = StratificationScheme({Dimension::age});
  return cfg;
}

Dataset three_strata() {
  std::vector<SurveyRecord> records;
  add_cell(records, VoucherKind::dining, kYoung, 40, 12, {0, 1, 2, 4});
  add_cell(records, VoucherKind::dining, kMiddle, 25, 5, {0, 0, 3});
  add_cell(records, VoucherKind::dining, kOlder, 60, 30, {1, 5, 7, 0});
  return Dataset(records);
}

}  // namespace

TEST_CASE("bias bound is the minimum group estimate") {
  const std::vector<double> three{0.3, 0.2, 0.5};
  CHECK(bias_bound(three) == 0.2);
  const std::vector<double> one{0.4};
  CHECK(bias_bound(one) == 0.4);
  CHECK_THROWS_AS(bias_bound(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("bounded estimates subtract the bias bound") {
  const std::vector<RateEstimate> groups{rate("a", 0.3), rate("b", 0.2), rate("c", 0.5)};
  const auto bounds = bounded_estimates(groups, rate("overall", 0.35));
  REQUIRE(bounds.size() == 4);
  const double lowers[] = {0.3 - 0.2, 0.0, 0.5 - 0.2, 0.35 - 0.2};
  const double uppers[] = {0.3, 0.2, 0.5, 0.35};
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(bounds[i].lower == lowers[i]);
    CHECK(bounds[i].upper == uppers[i]);
    CHECK(bounds[i].bias_bound == 0.2);
  }
  CHECK(bounds[3].group == "overall");

  const std::vector<RateEstimate> equal{rate("a", 0.25), rate("b", 0.25)};
  for (const auto& b : bounded_estimates(equal, rate("overall", 0.25))) {
    CHECK(b.lower == 0.0);
    CHECK(b.upper == 0.25);
  }
  const std::vector<RateEstimate> zero_min{rate("a", 0.0), rate("b", 0.9)};
  const auto z = bounded_estimates(zero_min, rate("overall", 0.45));
  CHECK(z[0].lower == 0.0);
  CHECK(z[0].upper == 0.0);
  CHECK(z[1].lower == 0.9);
}

TEST_CASE("bias bound rejects mixed metrics") {
  std::vector<RateEstimate> groups{rate("a", 0.3), rate("b", 0.2)};
  groups[1].metric = Metric::induced;
  CHECK_THROWS_AS(bias_bound(std::span<const RateEstimate>(groups)), std::invalid_argument);
}

TEST_CASE("property: shifting every group by a constant moves only the upper bounds") {
  gen::Rng rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<RateEstimate> groups;
    for (int j = 0; j < 5; ++j) groups.push_back(rate("g" + std::to_string(j), u(rng)));
    const double delta = u(rng);
    auto shifted = groups;
    for (auto& g : shifted) g.value += delta;
    const auto before = bounded_estimates(groups, rate("overall", 0.5));
    const auto after = bounded_estimates(shifted, rate("overall", 0.5 + delta));
    for (std::size_t i = 0; i < before.size(); ++i) {
      CHECK(after[i].lower == doctest::Approx(before[i].lower).epsilon(1e-12));
      CHECK(after[i].upper == doctest::Approx(before[i].upper + delta).epsilon(1e-12));
    }
  }
}

TEST_CASE("percentile with linear interpolation") {
  const std::vector<double> s{4, 1, 3, 2};
  CHECK(percentile(s, 0.0) == 1.0);
  CHECK(percentile(s, 1.0) == 4.0);
  CHECK(percentile(s, 0.5) == 2.5);
  CHECK(percentile(s, 1.0 / 3.0) == doctest::Approx(2.0));
  CHECK_THROWS_AS(percentile(std::vector<double>{}, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(percentile(s, 1.5), std::invalid_argument);
}

TEST_CASE("bootstrap configuration checks") {
  BootstrapConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.replications = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.replications = 100;
  cfg.alpha = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.alpha = 1.0;
  CHECK_NOTHROW(cfg.validate());
  cfg.mode = PercentileMode::one_sided_tails;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  BootstrapConfig coarse;
  coarse.scheme = StratificationScheme({Dimension::gender});
  coarse.reporting = {StratificationScheme({Dimension::age})};
  CHECK_THROWS_AS(coarse.validate(), ConfigError);
}

TEST_CASE("percentile resolution warning") {
  BootstrapConfig cfg;
  cfg.replications = 10;
  CHECK_FALSE(cfg.resolution_warning().empty());
  cfg.replications = 40;
  CHECK(cfg.resolution_warning().empty());
  cfg.mode = PercentileMode::one_sided_tails;
  cfg.replications = 19;
  CHECK_FALSE(cfg.resolution_warning().empty());
  const auto [lo, hi] = cfg.levels();
  CHECK(lo == 0.05);
  CHECK(hi == 0.95);
}

TEST_CASE("noise model constraints") {
  NoiseModelSpec m;
  m.theta = 0.2;
  m.bias = 0.05;
  m.eta = {-0.1, 0.1};
  m.nu = {0.02, -0.02};
  const std::vector<double> equal{1.0, 1.0};
  CHECK_NOTHROW(m.validate(equal));
  const std::vector<double> unequal{1.0, 3.0};
  CHECK_THROWS_AS(m.validate(unequal), ConfigError);
  m.nu = {0.1, -0.1};
  CHECK_THROWS_AS(m.validate(equal), ConfigError);  // bias + nu = -0.05 against D = +1
  m.nu = {0.0};
  CHECK_THROWS_AS(m.validate(equal), ConfigError);
}

TEST_CASE("substreams are reproducible and distinct") {
  Substream a(7, {1, 2});
  Substream b(7, {1, 2});
  Substream c(7, {2, 1});
  bool differs = false;
  for (int i = 0; i < 16; ++i) {
    const auto x = a();
    CHECK(x == b());
    differs = differs || x != c();
  }
  CHECK(differs);
  Substream d(9, {});
  for (int i = 0; i < 1000; ++i) {
    CHECK(d.below(7) < 7);
    const double u = d.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  CHECK(d.below(1) == 0);
}

TEST_CASE("bounded draws are close to uniform") {
  Substream s(1234, {5});
  std::vector<int> counts(6, 0);
  const int n = 60000;
  for (int i = 0; i < n; ++i) ++counts[s.below(6)];
  for (int c : counts) CHECK(std::abs(c - n / 6) < 400);  // about 4.4 standard deviations
}

TEST_CASE("degenerate data collapses every interval") {
  std::vector<SurveyRecord> records;
  for (const auto& p : {kYoung, kMiddle, kOlder}) add_cell(records, VoucherKind::dining, p, 20, 20, {2});
  const auto catalog = default_catalog();
  for (Metric m : {Metric::substitution, Metric::induced}) {
    const auto res = stratified_bootstrap(Dataset(records), m, age_config(200, 3), VoucherKind::dining,
                                          catalog.at(VoucherKind::dining));
    const auto& r = res.overall.region;
    CHECK(r.ci_upper.width() == 0.0);
    CHECK(r.ci_lower.width() == 0.0);
    CHECK(r.ci_upper.lo == res.overall.estimate.point);
    CHECK(r.ci_lower.lo == 0.0);
  }
}

TEST_CASE("non-recipients give zero point, lower and upper") {
  std::vector<SurveyRecord> records;
  for (const auto& p : {kYoung, kMiddle, kOlder}) add_cell(records, VoucherKind::sports, p, 15, 0, {0});
  const auto catalog = default_catalog();
  for (Metric m : {Metric::substitution, Metric::induced}) {
    const auto res = stratified_bootstrap(Dataset(records), m, age_config(100, 1), VoucherKind::sports,
                                          catalog.at(VoucherKind::sports));
    for (const auto& g : res.cells) {
      CHECK(g.estimate.point == 0.0);
      CHECK(g.estimate.lower == 0.0);
      CHECK(g.region.combined == Interval{0.0, 0.0});
    }
  }
}

TEST_CASE("stratum sizes are preserved in every replication") {
  std::vector<SurveyRecord> records;
  add_cell(records, VoucherKind::market, kYoung, 3, 1, {0, 1});
  add_cell(records, VoucherKind::market, kOlder, 997, 400, {0, 2, 3});
  auto cfg = age_config(300, 17);
  const auto catalog = default_catalog();
  // The 30-49 cell is empty under the age scheme.
  CHECK_THROWS_AS(stratified_bootstrap(Dataset(records), Metric::substitution, cfg, VoucherKind::market,
                                       catalog.at(VoucherKind::market)),
                  ValidationError);

  std::atomic<int> seen{0};
  std::atomic<int> bad{0};
  std::vector<SurveyRecord> two;
  auto female = kOlder;
  female.gender = Gender::female;
  add_cell(two, VoucherKind::market, kYoung, 3, 1, {0, 1});
  add_cell(two, VoucherKind::market, female, 997, 400, {0, 2, 3});
  cfg.scheme = StratificationScheme({Dimension::gender});
  cfg.observer = [&](const ReplicationView& v) {
    ++seen;
    if (v.cell_sizes.size() != 2 || v.cell_sizes[0] != 3 || v.cell_sizes[1] != 997) ++bad;
  };
  cfg.workers = 3;
  (void)stratified_bootstrap(Dataset(two), Metric::induced, cfg, VoucherKind::market, catalog.at(VoucherKind::market));
  CHECK(seen == 300);
  CHECK(bad == 0);
}

TEST_CASE("empty stratum is named in the error") {
  std::vector<SurveyRecord> records;
  add_cell(records, VoucherKind::dining, kYoung, 10, 2);
  add_cell(records, VoucherKind::dining, kOlder, 10, 2);
  const auto catalog = default_catalog();
  try {
    (void)stratified_bootstrap(Dataset(records), Metric::substitution, age_config(50, 1), VoucherKind::dining,
                               catalog.at(VoucherKind::dining));
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("30-49") != std::string::npos);
  }
}

TEST_CASE("bootstrap results do not depend on the worker count") {
  const auto ds = three_strata();
  const auto catalog = default_catalog();
  for (Metric m : {Metric::substitution, Metric::induced}) {
    auto cfg = age_config(257, 99);
    cfg.reporting = {StratificationScheme({})};
    cfg.workers = 1;
    const auto serial = stratified_bootstrap(ds, m, cfg, VoucherKind::dining, catalog.at(VoucherKind::dining));
    for (unsigned w : {2u, 3u, 8u}) {
      cfg.workers = w;
      const auto parallel = stratified_bootstrap(ds, m, cfg, VoucherKind::dining, catalog.at(VoucherKind::dining));
      REQUIRE(parallel.cells.size() == serial.cells.size());
      for (std::size_t j = 0; j < serial.cells.size(); ++j) CHECK(parallel.cells[j].region == serial.cells[j].region);
      CHECK(parallel.overall.region == serial.overall.region);
    }
    cfg.seed = 100;
    const auto other = stratified_bootstrap(ds, m, cfg, VoucherKind::dining, catalog.at(VoucherKind::dining));
    CHECK_FALSE(other.overall.region == serial.overall.region);
  }
}

TEST_CASE("argmin cell has a zero lower statistic in every replication") {
  const auto ds = three_strata();
  auto cfg = age_config(400, 5);
  std::mutex mutex;
  int violations = 0;
  cfg.observer = [&](const ReplicationView& v) {
    double min = v.cell_estimates[0];
    for (double e : v.cell_estimates) min = std::min(min, e);
    std::size_t zero_lowers = 0;
    for (double e : v.cell_estimates) zero_lowers += (e - v.bias == 0.0) ? 1 : 0;
    std::lock_guard lock(mutex);
    if (v.bias != min || zero_lowers == 0) ++violations;
  };
  const auto catalog = default_catalog();
  (void)stratified_bootstrap(ds, Metric::substitution, cfg, VoucherKind::dining, catalog.at(VoucherKind::dining));
  CHECK(violations == 0);
}

TEST_CASE("regions are ordered and the combined region is the hull") {
  const auto ds = three_strata();
  const auto catalog = default_catalog();
  auto cfg = age_config(2000, 8);
  cfg.reporting = {StratificationScheme({})};
  const auto res = stratified_bootstrap(ds, Metric::substitution, cfg, VoucherKind::dining,
                                        catalog.at(VoucherKind::dining));
  auto check = [](const GroupRegion& g) {
    const auto& r = g.region;
    CHECK(r.ci_lower.lo <= r.ci_upper.hi);
    CHECK(r.ci_upper.lo <= r.ci_upper.hi);
    CHECK(r.combined.lo == std::min(r.ci_lower.lo, r.ci_upper.lo));
    CHECK(r.combined.hi == std::max(r.ci_lower.hi, r.ci_upper.hi));
    CHECK(g.estimate.lower == g.estimate.upper - g.estimate.bias_bound);
    CHECK(r.ci_upper.contains(g.estimate.point));
  };
  for (const auto& g : res.cells) check(g);
  for (const auto& g : res.reported) check(g);
  check(res.overall);
  CHECK(res.overall.n == 125);
  REQUIRE(res.reported.size() == 1);
  CHECK(res.reported[0].region == res.overall.region);
}

TEST_CASE("one-sided tail mode narrows the interval") {
  const auto ds = three_strata();
  const auto catalog = default_catalog();
  auto cfg = age_config(1000, 4);
  const auto two = stratified_bootstrap(ds, Metric::induced, cfg, VoucherKind::dining, catalog.at(VoucherKind::dining));
  cfg.mode = PercentileMode::one_sided_tails;
  const auto one = stratified_bootstrap(ds, Metric::induced, cfg, VoucherKind::dining, catalog.at(VoucherKind::dining));
  CHECK(one.overall.region.ci_upper.width() <= two.overall.region.ci_upper.width());
  CHECK(one.overall.region.ci_upper.lo >= two.overall.region.ci_upper.lo);
}

TEST_CASE("alpha of one gives zero-width median intervals") {
  const auto ds = three_strata();
  const auto catalog = default_catalog();
  auto cfg = age_config(301, 4);
  cfg.alpha = 1.0;
  const auto res = stratified_bootstrap(ds, Metric::substitution, cfg, VoucherKind::dining,
                                        catalog.at(VoucherKind::dining));
  CHECK(res.overall.region.ci_upper.width() == 0.0);
}

TEST_CASE("small replication counts carry a warning") {
  const auto ds = three_strata();
  const auto catalog = default_catalog();
  const auto res = stratified_bootstrap(ds, Metric::substitution, age_config(10, 1), VoucherKind::dining,
                                        catalog.at(VoucherKind::dining));
  CHECK(res.warnings.size() == 1);
}
