#pragma once

// Independent reference implementations. Each follows the textbook formula
// record by record and never calls into the library's estimator kernels.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "voucher/survey.hpp"

namespace oracle {

// Bracket midpoint from raw bounds: 0 for "none", (lo + hi) / 2 for an
// interior bracket, the lower bound for the open top bracket.
inline double midpoint_from_bounds(const voucher::BracketSchedule& s, std::size_t c) {
  const auto& b = s.bracket(c);
  if (c == 0) return 0.0;
  if (c + 1 == s.size()) return b.lo;
  return (b.lo + b.hi) / 2.0;
}

inline double es(const std::vector<voucher::SurveyRecord>& records) {
  std::size_t no = 0;
  for (const auto& r : records) {
    if (!r.triggered) ++no;
  }
  return static_cast<double>(no) / static_cast<double>(records.size());
}

inline std::vector<double> shares(const std::vector<voucher::SurveyRecord>& records, std::size_t brackets) {
  std::vector<std::size_t> counts(brackets, 0);
  for (const auto& r : records) ++counts.at(r.bracket_index);
  std::vector<double> out;
  for (auto c : counts) out.push_back(static_cast<double>(c) / static_cast<double>(records.size()));
  return out;
}

// IC as the mean midpoint spending per respondent divided by the face value.
inline double ic(const std::vector<voucher::SurveyRecord>& records, const voucher::VoucherSpec& spec) {
  double total = 0.0;
  for (const auto& r : records) total += midpoint_from_bounds(spec.schedule, r.bracket_index);
  return total / static_cast<double>(records.size()) / spec.face_value_original;
}

inline double it(const std::vector<voucher::SurveyRecord>& original, const std::vector<voucher::SurveyRecord>& extra,
                 const voucher::VoucherSpec& spec) {
  double a = 0.0;
  double b = 0.0;
  for (const auto& r : original) a += midpoint_from_bounds(spec.schedule, r.bracket_index);
  for (const auto& r : extra) b += midpoint_from_bounds(spec.schedule, r.bracket_index);
  return a / static_cast<double>(original.size()) - b / static_cast<double>(extra.size());
}

using Matrix = std::vector<std::vector<double>>;

// gdp_i = va_i * sum_j L_ij dF_j, returned per sector.
inline std::vector<double> impact(const Matrix& leontief, const std::vector<double>& va,
                                  const std::vector<double>& demand) {
  const std::size_t n = va.size();
  std::vector<double> gdp(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double output = 0.0;
    for (std::size_t j = 0; j < n; ++j) output += leontief[i][j] * demand[j];
    gdp[i] = va[i] * output;
  }
  return gdp;
}

// Gauss-Jordan elimination with partial pivoting.
inline Matrix inverse(Matrix a) {
  const std::size_t n = a.size();
  Matrix inv(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    if (std::abs(a[pivot][col]) < 1e-15) throw std::runtime_error("singular matrix");
    std::swap(a[col], a[pivot]);
    std::swap(inv[col], inv[pivot]);
    const double d = a[col][col];
    for (std::size_t k = 0; k < n; ++k) {
      a[col][k] /= d;
      inv[col][k] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col];
      if (f == 0.0) continue;
      for (std::size_t k = 0; k < n; ++k) {
        a[r][k] -= f * a[col][k];
        inv[r][k] -= f * inv[col][k];
      }
    }
  }
  return inv;
}

inline Matrix multiply(const Matrix& a, const Matrix& b) {
  const std::size_t n = a.size();
  const std::size_t m = b.front().size();
  Matrix out(n, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < b.size(); ++k) {
      for (std::size_t j = 0; j < m; ++j) out[i][j] += a[i][k] * b[k][j];
    }
  }
  return out;
}

}  // namespace oracle
