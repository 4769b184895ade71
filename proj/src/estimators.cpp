#include "voucher/estimators.hpp"

#include <cmath>
#include <limits>

#include "voucher/error.hpp"

namespace voucher {

std::string_view to_string(Metric m) noexcept {
  return m == Metric::substitution ? "expenditure_substitution" : "induced_consumption";
}

namespace {

void require_single_kind(std::span<const SurveyRecord> records, const char* what) {
  if (records.empty()) throw UndefinedEstimate(std::string("undefined estimate: ") + what + " of an empty subset");
  const auto kind = records.front().voucher;
  for (const auto& r : records) {
    if (r.voucher != kind) {
      throw ValidationError(std::string(what) + ": records mix voucher kinds '" + std::string(to_string(kind)) +
                            "' and '" + std::string(to_string(r.voucher)) + "'");
    }
  }
}

}  // namespace

double substitution_from_counts(std::size_t substituted, std::size_t n) {
  if (n == 0) throw UndefinedEstimate("undefined estimate: substitution rate with n = 0");
  return static_cast<double>(substituted) / static_cast<double>(n);
}

double induced_from_counts(std::span<const std::size_t> bracket_counts, std::size_t n, const VoucherSpec& spec) {
  if (n == 0) throw UndefinedEstimate("undefined estimate: induced rate with n = 0");
  const double total = static_cast<double>(n);
  double sum = 0.0;
  for (std::size_t c = 0; c < bracket_counts.size(); ++c) {
    sum += spec.schedule.midpoint(c) * (static_cast<double>(bracket_counts[c]) / total);
  }
  return sum / spec.face_value_original;
}

RateEstimate substitution_rate(std::span<const SurveyRecord> records, std::string group) {
  require_single_kind(records, "substitution rate");
  std::size_t no = 0;
  for (const auto& r : records) no += r.substituted() ? 1 : 0;
  return RateEstimate{Metric::substitution, records.front().voucher, std::move(group), records.size(),
                      substitution_from_counts(no, records.size()), no};
}

BracketDistribution bracket_distribution(std::span<const SurveyRecord> records, const BracketSchedule& schedule) {
  require_single_kind(records, "bracket distribution");
  BracketDistribution dist;
  dist.n = records.size();
  dist.counts.assign(schedule.size(), 0);
  for (const auto& r : records) {
    if (r.bracket_index >= schedule.size()) {
      throw ValidationError("bracket index out of range: " + std::to_string(r.bracket_index));
    }
    ++dist.counts[r.bracket_index];
  }
  dist.shares.resize(schedule.size());
  for (std::size_t c = 0; c < schedule.size(); ++c) {
    dist.shares[c] = static_cast<double>(dist.counts[c]) / static_cast<double>(dist.n);
  }
  return dist;
}

RateEstimate induced_rate(std::span<const SurveyRecord> records, const VoucherSpec& spec, std::string group) {
  const auto dist = bracket_distribution(records, spec.schedule);
  if (records.front().voucher != spec.kind) {
    throw ValidationError("induced rate: records are '" + std::string(to_string(records.front().voucher)) +
                          "' but the spec is '" + std::string(to_string(spec.kind)) + "'");
  }
  return RateEstimate{Metric::induced, spec.kind, std::move(group), dist.n,
                      induced_from_counts(dist.counts, dist.n, spec)};
}

IntensityEstimate treatment_intensity(std::span<const SurveyRecord> original, std::span<const SurveyRecord> extra,
                                      const VoucherSpec& spec) {
  const auto first = bracket_distribution(original, spec.schedule);
  const auto second = bracket_distribution(extra, spec.schedule);
  if (original.front().voucher != extra.front().voucher || original.front().voucher != spec.kind) {
    throw ValidationError("treatment intensity: both subsets must be of voucher '" +
                          std::string(to_string(spec.kind)) + "'");
  }
  double value = 0.0;
  for (std::size_t c = 0; c < spec.schedule.size(); ++c) {
    value += spec.schedule.midpoint(c) * (first.shares[c] - second.shares[c]);
  }
  return IntensityEstimate{spec.kind, value, first.n, second.n};
}

EstimateSummary summarize(const Dataset& ds, const VoucherCatalog& catalog,
                          std::span<const StratificationScheme> groupings, const EstimateOptions& options) {
  EstimateSummary out;
  const Dataset rates_input = options.include_extra_wave ? ds : ds.only_wave(Wave::original);
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();

  for (VoucherKind k : kVoucherKinds) {
    const auto* spec = catalog.find(k);
    if (!spec || ds.count(k) == 0) continue;

    const auto pooled = rates_input.of_kind(k);
    const std::size_t n = pooled.size();
    for (const auto& scheme : groupings) {
      for (const auto& stratum : stratify(rates_input, scheme, k)) {
        const auto label = stratum.key.label();
        out.counts.push_back({k, scheme.name(), label, stratum.records.size()});
        for (Metric m : {Metric::substitution, Metric::induced}) {
          EstimateRow row{k, scheme.name(), label, m, stratum.records.size(), nan};
          if (!stratum.empty()) {
            row.value = m == Metric::substitution ? substitution_rate(stratum.records).value
                                                  : induced_rate(stratum.records, *spec).value;
          }
          out.rates.push_back(std::move(row));
        }
      }
    }
    out.counts.push_back({k, "overall", "overall", n});
    for (Metric m : {Metric::substitution, Metric::induced}) {
      EstimateRow row{k, "overall", "overall", m, n, nan};
      if (n > 0) row.value = m == Metric::substitution ? substitution_rate(pooled).value : induced_rate(pooled, *spec).value;
      out.rates.push_back(std::move(row));
    }

    const auto original = ds.of_kind(k, Wave::original);
    const auto extra = ds.of_kind(k, Wave::extra);
    if (!original.empty() && !extra.empty()) {
      out.intensity.push_back(treatment_intensity(original, extra, *spec));
    } else {
      out.intensity_missing.push_back(k);
    }
  }
  return out;
}

}  // namespace voucher
