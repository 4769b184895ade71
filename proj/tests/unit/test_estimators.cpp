#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "support/generators.hpp"
#include "support/oracles.hpp"
#include "voucher/error.hpp"
#include "voucher/estimators.hpp"

using namespace voucher;

namespace {

SurveyRecord rec(VoucherKind k, bool triggered, std::size_t bracket, Wave wave = Wave::original) {
  static std::size_t id = 0;
  SurveyRecord r;
  r.respondent_id = "e" + std::to_string(id++);
  r.voucher = k;
  r.triggered = triggered;
  r.bracket_index = bracket;
  r.wave = wave;
  return r;
}

std::vector<SurveyRecord> answers(std::size_t no, std::size_t yes) {
  std::vector<SurveyRecord> out;
  for (std::size_t i = 0; i < no; ++i) out.push_back(rec(VoucherKind::dining, false, 0));
  for (std::size_t i = 0; i < yes; ++i) out.push_back(rec(VoucherKind::dining, true, 0));
  return out;
}

std::vector<SurveyRecord> in_brackets(VoucherKind k, std::initializer_list<std::size_t> brackets,
                                      Wave wave = Wave::original) {
  std::vector<SurveyRecord> out;
  for (auto b : brackets) out.push_back(rec(k, true, b, wave));
  return out;
}

}  // namespace

TEST_CASE("substitution rate on small enumerated samples") {
  CHECK(substitution_rate(answers(0, 5)).value == 0.0);
  CHECK(substitution_rate(answers(5, 0)).value == 1.0);
  const auto e = substitution_rate(answers(2, 3));
  CHECK(e.value == 0.4);
  CHECK(e.n == 5);
  CHECK(e.substituted == 2);
  CHECK(e.group == "overall");
}

TEST_CASE("estimators reject empty and mixed subsets") {
  const auto catalog = default_catalog();
  std::vector<SurveyRecord> none;
  CHECK_THROWS_AS(substitution_rate(none), UndefinedEstimate);
  CHECK_THROWS_AS(induced_rate(none, catalog.at(VoucherKind::dining)), UndefinedEstimate);
  auto mixed = answers(1, 1);
  mixed.push_back(rec(VoucherKind::sports, true, 0));
  CHECK_THROWS_AS(substitution_rate(mixed), ValidationError);
}

TEST_CASE("bracket shares") {
  const auto catalog = default_catalog();
  const auto& schedule = catalog.at(VoucherKind::dining).schedule;
  const auto point = bracket_distribution(in_brackets(VoucherKind::dining, {0, 0, 0, 0}), schedule);
  CHECK(point.shares == std::vector<double>{1, 0, 0, 0, 0, 0, 0, 0});

  const auto two = bracket_distribution(in_brackets(VoucherKind::dining, {1, 1, 3, 3}), schedule);
  CHECK(two.shares == std::vector<double>{0, 0.5, 0, 0.5, 0, 0, 0, 0});
  CHECK(two.counts == std::vector<std::size_t>{0, 2, 0, 2, 0, 0, 0, 0});

  const auto one = bracket_distribution(in_brackets(VoucherKind::dining, {6}), schedule);
  CHECK(std::count(one.shares.begin(), one.shares.end(), 1.0) == 1);
  CHECK(one.shares[6] == 1.0);
}

TEST_CASE("induced consumption from midpoints") {
  const auto catalog = default_catalog();
  const auto& dining = catalog.at(VoucherKind::dining);
  CHECK(induced_rate(in_brackets(VoucherKind::dining, {0, 0, 0}), dining).value == 0.0);
  CHECK(induced_rate(in_brackets(VoucherKind::dining, {4}), dining).value == doctest::Approx(0.751).epsilon(1e-15));

  // 629 of 1000 respondents in NT$3,001-5,000 put accommodation IC at the
  // printed overall upper value of 251.6%.
  std::vector<SurveyRecord> records;
  for (int i = 0; i < 1000; ++i) records.push_back(rec(VoucherKind::accommodation, true, i < 629 ? 3 : 0));
  const auto ic = induced_rate(records, catalog.at(VoucherKind::accommodation)).value;
  CHECK(ic == doctest::Approx(2.516).epsilon(0.001));
}

TEST_CASE("treatment intensity") {
  const auto catalog = default_catalog();
  const auto& dining = catalog.at(VoucherKind::dining);
  const auto same = treatment_intensity(in_brackets(VoucherKind::dining, {1, 2, 5}),
                                        in_brackets(VoucherKind::dining, {5, 2, 1}, Wave::extra), dining);
  CHECK(same.value == 0.0);

  const auto up = treatment_intensity(in_brackets(VoucherKind::dining, {5, 5}),
                                      in_brackets(VoucherKind::dining, {0, 0, 0}, Wave::extra), dining);
  CHECK(up.value == 750.5);
  CHECK(up.n_original == 2);
  CHECK(up.n_extra == 3);

  const auto down = treatment_intensity(in_brackets(VoucherKind::dining, {0}),
                                        in_brackets(VoucherKind::dining, {7, 7}, Wave::extra), dining);
  CHECK(down.value == -dining.schedule.largest_midpoint());
  CHECK(up.program_total_millions(2e6) == doctest::Approx(1501.0));
}

TEST_CASE("property: estimators match the record-loop oracles") {
  const auto catalog = default_catalog();
  gen::Rng rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    const auto k = gen::kind(rng);
    const auto& spec = catalog.at(k);
    const auto records = gen::records(rng, k, catalog, 20);
    CHECK(substitution_rate(records).value == oracle::es(records));
    CHECK(bracket_distribution(records, spec.schedule).shares == oracle::shares(records, spec.schedule.size()));
    CHECK(std::abs(induced_rate(records, spec).value - oracle::ic(records, spec)) <= 1e-12);

    const auto extra = gen::records(rng, k, catalog, 20, Wave::extra);
    const double it = treatment_intensity(records, extra, spec).value;
    const double expected = oracle::it(records, extra, spec);
    CHECK(std::abs(it - expected) <= 1e-12 * std::max(1.0, std::abs(expected)));
  }
}

TEST_CASE("property: estimators are invariant to record order") {
  const auto catalog = default_catalog();
  gen::Rng rng(22);
  for (int trial = 0; trial < 100; ++trial) {
    const auto k = gen::kind(rng);
    const auto& spec = catalog.at(k);
    auto records = gen::records(rng, k, catalog, 30);
    const auto es = substitution_rate(records).value;
    const auto ic = induced_rate(records, spec).value;
    std::shuffle(records.begin(), records.end(), rng);
    CHECK(substitution_rate(records).value == es);
    CHECK(induced_rate(records, spec).value == ic);
  }
}

TEST_CASE("property: scaling brackets and face value together leaves IC unchanged") {
  const auto catalog = default_catalog();
  gen::Rng rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const auto k = gen::kind(rng);
    const auto& spec = catalog.at(k);
    auto doubled = spec;
    doubled.schedule = spec.schedule.scaled(2.0);
    doubled.face_value_original = 2.0 * spec.face_value_original;
    auto boundaries_only = spec;
    boundaries_only.schedule = spec.schedule.scaled(2.0);

    const auto records = gen::records(rng, k, catalog, 30);
    const auto extra = gen::records(rng, k, catalog, 30, Wave::extra);
    CHECK(induced_rate(records, doubled).value == doctest::Approx(induced_rate(records, spec).value).epsilon(1e-12));
    const double it = treatment_intensity(records, extra, spec).value;
    CHECK(treatment_intensity(records, extra, boundaries_only).value == doctest::Approx(2.0 * it).epsilon(1e-12));
  }
}

TEST_CASE("summary rows per grouping and overall") {
  const auto catalog = default_catalog();
  gen::Rng rng(24);
  const auto ds = gen::dataset(rng, catalog, 300);
  const std::vector<StratificationScheme> groupings{StratificationScheme({Dimension::gender})};
  const auto summary = summarize(ds, catalog, groupings);

  for (auto k : kVoucherKinds) {
    const auto n = ds.count(k, Wave::original);
    std::size_t gender_rows = 0;
    for (const auto& row : summary.rates) {
      if (row.voucher != k || row.metric != Metric::substitution) continue;
      if (row.grouping == "gender") ++gender_rows;
      if (row.grouping == "overall") CHECK(row.n == n);
    }
    CHECK(gender_rows == (n > 0 ? 2u : 0u));
  }
}

TEST_CASE("intensity needs both waves") {
  const auto catalog = default_catalog();
  const Dataset only_original(in_brackets(VoucherKind::dining, {1, 2}));
  const auto summary = summarize(only_original, catalog, {});
  CHECK(summary.intensity.empty());
  REQUIRE(summary.intensity_missing.size() == 1);
  CHECK(summary.intensity_missing[0] == VoucherKind::dining);

  auto both = in_brackets(VoucherKind::dining, {1, 2});
  for (auto& r : in_brackets(VoucherKind::dining, {0}, Wave::extra)) both.push_back(r);
  const auto with_extra = summarize(Dataset(both), catalog, {});
  REQUIRE(with_extra.intensity.size() == 1);
  CHECK(with_extra.intensity[0].value == doctest::Approx((25.5 + 75.5) / 2.0));
}

TEST_CASE("extra-wave records stay out of the rates unless requested") {
  const auto catalog = default_catalog();
  auto records = answers(1, 1);
  records.push_back(rec(VoucherKind::dining, false, 0, Wave::extra));
  const Dataset ds(records);
  const auto overall = [&](const EstimateSummary& s) {
    for (const auto& row : s.rates) {
      if (row.metric == Metric::substitution && row.grouping == "overall") return row;
    }
    return EstimateRow{};
  };
  CHECK(overall(summarize(ds, catalog, {})).value == 0.5);
  voucher::EstimateOptions pooled;
  pooled.include_extra_wave = true;
  CHECK(overall(summarize(ds, catalog, {}, pooled)).n == 3);
}
