#pragma once

// Small random generators for property tests.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "voucher/survey.hpp"

namespace gen {

using Rng = std::mt19937_64;

inline voucher::DemographicProfile profile(Rng& rng) {
  std::uniform_int_distribution<int> g(0, 1), r(0, 2), a(0, 5);
  return {static_cast<voucher::Gender>(g(rng)), static_cast<voucher::Residence>(r(rng)),
          static_cast<voucher::AgeBand>(a(rng))};
}

inline voucher::SurveyRecord record(Rng& rng, voucher::VoucherKind kind, const voucher::VoucherCatalog& catalog,
                                    std::size_t id, voucher::Wave wave = voucher::Wave::original) {
  std::uniform_int_distribution<std::size_t> bracket(0, catalog.at(kind).schedule.size() - 1);
  std::bernoulli_distribution coin(0.5);
  voucher::SurveyRecord r;
  r.respondent_id = "r" + std::to_string(id);
  r.voucher = kind;
  r.profile = profile(rng);
  r.triggered = coin(rng);
  r.bracket_index = bracket(rng);
  r.wave = wave;
  return r;
}

// Records of one voucher kind, 1..max_size of them.
inline std::vector<voucher::SurveyRecord> records(Rng& rng, voucher::VoucherKind kind,
                                                  const voucher::VoucherCatalog& catalog, std::size_t max_size,
                                                  voucher::Wave wave = voucher::Wave::original) {
  std::uniform_int_distribution<std::size_t> size(1, max_size);
  const std::size_t n = size(rng);
  std::vector<voucher::SurveyRecord> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(record(rng, kind, catalog, i, wave));
  return out;
}

inline voucher::VoucherKind kind(Rng& rng) {
  std::uniform_int_distribution<std::size_t> k(0, voucher::kVoucherKinds.size() - 1);
  return voucher::kVoucherKinds[k(rng)];
}

// A mixed dataset with unique (id, voucher, wave) keys.
inline voucher::Dataset dataset(Rng& rng, const voucher::VoucherCatalog& catalog, std::size_t max_size) {
  std::uniform_int_distribution<std::size_t> size(1, max_size);
  std::bernoulli_distribution extra(0.2);
  const std::size_t n = size(rng);
  std::vector<voucher::SurveyRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(record(rng, kind(rng), catalog, i, extra(rng) ? voucher::Wave::extra : voucher::Wave::original));
  }
  return voucher::Dataset(std::move(out));
}

}  // namespace gen
