#include "voucher/inference.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "voucher/error.hpp"
#include "voucher/rng.hpp"

namespace voucher {

double bias_bound(std::span<const double> group_estimates) {
  if (group_estimates.empty()) throw std::invalid_argument("bias bound of an empty group list");
  return *std::min_element(group_estimates.begin(), group_estimates.end());
}

double bias_bound(std::span<const RateEstimate> group_estimates) {
  if (group_estimates.empty()) throw std::invalid_argument("bias bound of an empty group list");
  std::vector<double> values;
  values.reserve(group_estimates.size());
  for (const auto& e : group_estimates) {
    if (e.voucher != group_estimates.front().voucher || e.metric != group_estimates.front().metric) {
      throw std::invalid_argument("bias bound over estimates of different vouchers or metrics");
    }
    values.push_back(e.value);
  }
  return bias_bound(values);
}

std::vector<BoundedEstimate> bounded_estimates(std::span<const RateEstimate> group_estimates,
                                               const RateEstimate& overall) {
  const double b = bias_bound(group_estimates);
  std::vector<BoundedEstimate> out;
  out.reserve(group_estimates.size() + 1);
  for (const auto& e : group_estimates) out.push_back({e.group, e.value, b, e.value - b, e.value});
  out.push_back({overall.group, overall.value, b, overall.value - b, overall.value});
  return out;
}

double percentile(std::span<const double> samples, double q) {
  if (samples.empty()) throw std::invalid_argument("percentile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("percentile level must lie in [0, 1]");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double rank = q * static_cast<double>(sorted.size() - 1);
  const auto below = static_cast<std::size_t>(std::floor(rank));
  const auto above = std::min(below + 1, sorted.size() - 1);
  const double frac = rank - static_cast<double>(below);
  if (frac == 0.0) return sorted[below];
  return sorted[below] + frac * (sorted[above] - sorted[below]);
}

void NoiseModelSpec::validate(std::span<const double> group_weights) const {
  if (eta.size() != group_weights.size() || nu.size() != group_weights.size()) {
    throw ConfigError("noise model: eta and nu need one entry per group");
  }
  if (bias_sign != 1 && bias_sign != -1) throw ConfigError("noise model: bias sign must be +1 or -1");
  double total = 0.0;
  double eta_mean = 0.0;
  double nu_mean = 0.0;
  for (std::size_t j = 0; j < group_weights.size(); ++j) {
    if (group_weights[j] < 0.0) throw ConfigError("noise model: negative group weight");
    total += group_weights[j];
    eta_mean += group_weights[j] * eta[j];
    nu_mean += group_weights[j] * nu[j];
  }
  if (total > 0.0) {
    eta_mean /= total;
    nu_mean /= total;
  }
  if (std::abs(eta_mean) > 1e-12) throw ConfigError("noise model: group effects eta must average to zero");
  if (std::abs(nu_mean) > 1e-12) throw ConfigError("noise model: group bias deviations nu must average to zero");
  for (std::size_t j = 0; j < nu.size(); ++j) {
    if ((bias + nu[j]) * bias_sign < 0.0) {
      throw ConfigError("noise model: group " + std::to_string(j) + " bias has the wrong sign for D");
    }
  }
}

void BootstrapConfig::validate() const {
  if (replications == 0) throw ConfigError("bootstrap replications must be at least 1");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in (0, 1]");
  if (mode == PercentileMode::one_sided_tails && alpha > 0.5) {
    throw ConfigError("one-sided tail mode needs alpha <= 0.5");
  }
  for (const auto& s : reporting) {
    if (!scheme.refines(s)) {
      throw ConfigError("reporting grouping '" + s.name() + "' is not a coarsening of '" + scheme.name() + "'");
    }
  }
}

std::pair<double, double> BootstrapConfig::levels() const {
  if (mode == PercentileMode::two_sided) return {alpha / 2.0, 1.0 - alpha / 2.0};
  return {alpha, 1.0 - alpha};
}

std::string BootstrapConfig::resolution_warning() const {
  const auto [lo, hi] = levels();
  const double tail = std::min(lo, 1.0 - hi);
  if (tail <= 0.0) return {};
  const auto needed = static_cast<std::size_t>(std::ceil(1.0 / tail - 1e-9));
  if (replications >= needed) return {};
  return "replications (" + std::to_string(replications) + ") below " + std::to_string(needed) +
         " needed to resolve the " + std::to_string(tail * 100.0).substr(0, 5) + "% percentile";
}

namespace {

using Kernel = std::function<double(std::span<const std::size_t>, std::size_t)>;

struct GroupSlot {
  std::string grouping;
  std::string group;
  std::vector<std::size_t> cells;  // member cells of the finest scheme
};

}  // namespace

BootstrapResult stratified_bootstrap(const Dataset& ds, Metric metric, const BootstrapConfig& cfg, VoucherKind k,
                                     const VoucherSpec& spec) {
  cfg.validate();
  if (spec.kind != k) throw ConfigError("bootstrap: voucher spec does not match the requested voucher");

  const auto strata = stratify(ds, cfg.scheme, k);
  if (strata.empty()) {
    throw ValidationError("no records of voucher '" + std::string(to_string(k)) + "' to bootstrap");
  }
  for (const auto& s : strata) {
    if (s.empty()) {
      throw ValidationError("empty stratum '" + s.key.label() + "' for voucher '" + std::string(to_string(k)) +
                            "' under scheme " + cfg.scheme.name());
    }
  }

  const std::size_t categories = metric == Metric::substitution ? 2 : spec.schedule.size();
  const Kernel kernel = metric == Metric::substitution
                            ? Kernel([](std::span<const std::size_t> c, std::size_t n) {
                                return substitution_from_counts(c[1], n);
                              })
                            : Kernel([&spec](std::span<const std::size_t> c, std::size_t n) {
                                return induced_from_counts(c, n, spec);
                              });

  const std::size_t cell_count = strata.size();
  std::vector<std::vector<std::uint32_t>> outcomes(cell_count);
  for (std::size_t j = 0; j < cell_count; ++j) {
    outcomes[j].reserve(strata[j].records.size());
    for (const auto& r : strata[j].records) {
      if (metric == Metric::induced && r.bracket_index >= categories) {
        throw ValidationError("bracket index out of range for respondent '" + r.respondent_id + "'");
      }
      outcomes[j].push_back(metric == Metric::substitution ? (r.substituted() ? 1U : 0U)
                                                            : static_cast<std::uint32_t>(r.bracket_index));
    }
  }

  // Statistic slots: finest cells, then each reporting grouping, then overall.
  std::vector<GroupSlot> slots;
  for (std::size_t j = 0; j < cell_count; ++j) slots.push_back({cfg.scheme.name(), strata[j].key.label(), {j}});
  for (const auto& scheme : cfg.reporting) {
    const auto first = slots.size();
    for (std::size_t g = 0; g < scheme.group_count(); ++g) slots.push_back({scheme.name(), scheme.key(g).label(), {}});
    for (std::size_t j = 0; j < cell_count; ++j) slots[first + cfg.scheme.project(j, scheme)].cells.push_back(j);
  }
  {
    GroupSlot pooled{"overall", "overall", {}};
    for (std::size_t j = 0; j < cell_count; ++j) pooled.cells.push_back(j);
    slots.push_back(std::move(pooled));
  }

  // Evaluates every slot from per-cell category counts; returns the bias proxy.
  auto evaluate = [&](const std::vector<std::size_t>& cell_counts, std::span<const std::size_t> cell_sizes,
                      std::vector<double>& cell_est, std::vector<double>& slot_est, std::vector<std::size_t>& scratch) {
    for (std::size_t j = 0; j < cell_count; ++j) {
      cell_est[j] = kernel(std::span(cell_counts).subspan(j * categories, categories), cell_sizes[j]);
    }
    const double b = *std::min_element(cell_est.begin(), cell_est.end());
    for (std::size_t s = 0; s < slots.size(); ++s) {
      if (slots[s].cells.size() == 1) {
        slot_est[s] = cell_est[slots[s].cells.front()];
        continue;
      }
      std::fill(scratch.begin(), scratch.end(), 0);
      std::size_t n = 0;
      for (std::size_t j : slots[s].cells) {
        for (std::size_t c = 0; c < categories; ++c) scratch[c] += cell_counts[j * categories + c];
        n += cell_sizes[j];
      }
      slot_est[s] = kernel(scratch, n);
    }
    return b;
  };

  std::vector<std::size_t> sizes(cell_count);
  for (std::size_t j = 0; j < cell_count; ++j) sizes[j] = outcomes[j].size();

  BootstrapResult result;
  result.voucher = k;
  result.metric = metric;
  result.replications = cfg.replications;
  result.alpha = cfg.alpha;
  result.seed = cfg.seed;
  if (auto w = cfg.resolution_warning(); !w.empty()) result.warnings.push_back(std::move(w));

  // Point estimates from the observed data.
  std::vector<double> point_cells(cell_count);
  std::vector<double> point_slots(slots.size());
  double point_bias = 0.0;
  {
    std::vector<std::size_t> counts(cell_count * categories, 0);
    for (std::size_t j = 0; j < cell_count; ++j) {
      for (auto y : outcomes[j]) ++counts[j * categories + y];
    }
    std::vector<std::size_t> scratch(categories);
    point_bias = evaluate(counts, sizes, point_cells, point_slots, scratch);
  }

  const std::size_t reps = cfg.replications;
  std::vector<double> lower_stats(slots.size() * reps);
  std::vector<double> upper_stats(slots.size() * reps);

  auto run_block = [&](std::size_t begin, std::size_t end) {
    std::vector<std::size_t> counts(cell_count * categories);
    std::vector<std::size_t> drawn_sizes(cell_count);
    std::vector<double> cell_est(cell_count);
    std::vector<double> slot_est(slots.size());
    std::vector<std::size_t> scratch(categories);
    for (std::size_t r = begin; r < end; ++r) {
      std::fill(counts.begin(), counts.end(), 0);
      for (std::size_t j = 0; j < cell_count; ++j) {
        Substream rng(cfg.seed, {static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(j)});
        const auto& cell = outcomes[j];
        const std::uint64_t n = cell.size();
        std::size_t* row = counts.data() + j * categories;
        for (std::uint64_t i = 0; i < n; ++i) ++row[cell[rng.below(n)]];
        drawn_sizes[j] = static_cast<std::size_t>(n);
      }
      const double b = evaluate(counts, drawn_sizes, cell_est, slot_est, scratch);
      for (std::size_t s = 0; s < slots.size(); ++s) {
        lower_stats[s * reps + r] = slot_est[s] - b;
        upper_stats[s * reps + r] = slot_est[s];
      }
      if (cfg.observer) cfg.observer(ReplicationView{r, drawn_sizes, cell_est, b});
    }
  };

  unsigned workers = cfg.workers ? cfg.workers : std::max(1U, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, reps));
  if (workers <= 1) {
    run_block(0, reps);
  } else {
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const std::size_t chunk = (reps + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(reps, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back([&, begin, end] {
        try {
          run_block(begin, end);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  const auto [q_lo, q_hi] = cfg.levels();
  auto make_region = [&](std::size_t s) {
    GroupRegion out;
    out.grouping = slots[s].grouping;
    out.group = slots[s].group;
    for (std::size_t j : slots[s].cells) out.n += sizes[j];
    out.estimate = {slots[s].group, point_slots[s], point_bias, point_slots[s] - point_bias, point_slots[s]};
    const std::span<const double> lower(lower_stats.data() + s * reps, reps);
    const std::span<const double> upper(upper_stats.data() + s * reps, reps);
    out.region.ci_lower = {percentile(lower, q_lo), percentile(lower, q_hi)};
    out.region.ci_upper = {percentile(upper, q_lo), percentile(upper, q_hi)};
    out.region.combined = {std::min(out.region.ci_lower.lo, out.region.ci_upper.lo),
                           std::max(out.region.ci_lower.hi, out.region.ci_upper.hi)};
    return out;
  };

  for (std::size_t s = 0; s < cell_count; ++s) result.cells.push_back(make_region(s));
  for (std::size_t s = cell_count; s + 1 < slots.size(); ++s) result.reported.push_back(make_region(s));
  result.overall = make_region(slots.size() - 1);
  return result;
}

}  // namespace voucher
