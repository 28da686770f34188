#pragma once

// Pearson chi-square machinery with in-house upper-tail p-values.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "respchain/chain_core.hpp"

namespace respchain {

/// Residual magnitude above which a cell is flagged.
inline constexpr double kResidualCriterion = 2.0;

struct ChiSquareOutcome {
  double statistic = 0.0;
  int df = 1;
  double p_value = 1.0;
  /// (O - E)/sqrt(E), in cell order (row-major for contingency tables).
  std::vector<double> std_residuals;
  /// 0-based cells with |residual| > 2.
  std::vector<std::size_t> flagged_cells;
  /// Subset of flagged cells where observed exceeds expected.
  std::vector<std::size_t> over_represented_cells;
  std::vector<std::string> warnings;
};

struct GoodnessOfFit {};
struct Contingency {
  std::size_t rows = 0;
  std::size_t cols = 0;
};

struct ChiSquareStatistic {
  double statistic = 0.0;
  int df = 0;
};

namespace detail {

// P(a, x) by its power series; converges quickly for x < a + 1.
inline double lower_gamma_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < 10000; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-16)
      break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Q(a, x) by the Legendre continued fraction (modified Lentz); for x >= a+1.
inline double upper_gamma_fraction(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny)
      d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny)
      c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16)
      break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

} // namespace detail

/// Regularized upper incomplete gamma Q(a, x).
inline double regularized_upper_gamma(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0))
    throw ValidationError("regularized_upper_gamma: need a > 0, x >= 0");
  if (x == 0.0)
    return 1.0;
  if (std::isinf(x))
    return 0.0;
  if (x < a + 1.0)
    return 1.0 - detail::lower_gamma_series(a, x);
  return detail::upper_gamma_fraction(a, x);
}

/// Upper-tail probability of a chi-square variable: Q(df/2, statistic/2).
inline double chi_square_p(double statistic, int df) {
  if (df < 1)
    throw ValidationError("chi_square_p: df must be >= 1");
  if (!(statistic >= 0.0))
    throw ValidationError("chi_square_p: statistic must be >= 0");
  const double q = regularized_upper_gamma(0.5 * df, 0.5 * statistic);
  return std::clamp(q, 0.0, 1.0);
}

inline ChiSquareStatistic
chi_square_statistic(std::span<const double> observed,
                     std::span<const double> expected,
                     const std::variant<GoodnessOfFit, Contingency> &layout =
                         GoodnessOfFit{}) {
  if (observed.size() != expected.size())
    throw ValidationError("chi_square_statistic: observed and expected "
                          "lengths differ");
  if (observed.size() < 2)
    throw ValidationError("chi_square_statistic: need at least 2 cells");
  ChiSquareStatistic out;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (!(observed[i] >= 0.0))
      throw ValidationError("chi_square_statistic: negative observed cell");
    if (!(expected[i] > 0.0))
      throw ValidationError("chi_square_statistic: expected cell " +
                            std::to_string(i + 1) +
                            " is zero; pool categories or floor it");
    const double d = observed[i] - expected[i];
    out.statistic += d * d / expected[i];
  }
  if (const auto *c = std::get_if<Contingency>(&layout)) {
    if (c->rows < 2 || c->cols < 2 || c->rows * c->cols != observed.size())
      throw ValidationError("chi_square_statistic: contingency shape does "
                            "not match the cell count");
    out.df = static_cast<int>((c->rows - 1) * (c->cols - 1));
  } else {
    out.df = static_cast<int>(observed.size() - 1);
  }
  return out;
}

struct StandardizedResiduals {
  std::vector<double> residuals;
  std::vector<std::size_t> flagged;
};

inline StandardizedResiduals
standardized_residuals(std::span<const double> observed,
                       std::span<const double> expected) {
  if (observed.size() != expected.size())
    throw ValidationError("standardized_residuals: length mismatch");
  StandardizedResiduals out;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (!(expected[i] > 0.0))
      throw ValidationError("standardized_residuals: expected cell " +
                            std::to_string(i + 1) + " is not positive");
    const double r = (observed[i] - expected[i]) / std::sqrt(expected[i]);
    out.residuals.push_back(r);
    if (std::abs(r) > kResidualCriterion)
      out.flagged.push_back(i);
  }
  return out;
}

namespace detail {

inline ChiSquareOutcome
finish_outcome(std::span<const double> observed, std::span<const double> expected,
               const std::variant<GoodnessOfFit, Contingency> &layout) {
  const auto stat = chi_square_statistic(observed, expected, layout);
  auto res = standardized_residuals(observed, expected);
  ChiSquareOutcome out;
  out.statistic = stat.statistic;
  out.df = stat.df;
  out.p_value = chi_square_p(stat.statistic, stat.df);
  out.std_residuals = std::move(res.residuals);
  out.flagged_cells = std::move(res.flagged);
  for (std::size_t i : out.flagged_cells)
    if (out.std_residuals[i] > 0.0)
      out.over_represented_cells.push_back(i);
  for (std::size_t i = 0; i < expected.size(); ++i)
    if (expected[i] < 1.0)
      out.warnings.push_back("expected count in cell " + std::to_string(i + 1) +
                             " is below 1");
  return out;
}

} // namespace detail

inline ChiSquareOutcome goodness_of_fit(std::span<const double> observed,
                                        std::span<const double> expected) {
  return detail::finish_outcome(observed, expected, GoodnessOfFit{});
}

/// Pearson test of independence; `table` is rows x cols, expected counts
/// come from the margins.
inline ChiSquareOutcome
contingency_test(const std::vector<std::vector<double>> &table) {
  const std::size_t rows = table.size();
  if (rows < 2)
    throw ValidationError("contingency_test: need at least 2 rows");
  const std::size_t cols = table.front().size();
  std::vector<double> row_sum(rows, 0.0), col_sum(cols, 0.0);
  double total = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (table[r].size() != cols)
      throw ValidationError("contingency_test: ragged table");
    for (std::size_t c = 0; c < cols; ++c) {
      row_sum[r] += table[r][c];
      col_sum[c] += table[r][c];
      total += table[r][c];
    }
  }
  if (!(total > 0.0))
    throw ValidationError("contingency_test: empty table");
  std::vector<double> observed, expected;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      observed.push_back(table[r][c]);
      expected.push_back(row_sum[r] * col_sum[c] / total);
    }
  return detail::finish_outcome(observed, expected, Contingency{rows, cols});
}

/// 2x2 test of group membership against on/off-diagonal transitions.
inline ChiSquareOutcome inertia_association_test(const InertiaSummary &g1,
                                                 const InertiaSummary &g2) {
  if (g1.total() <= 0 || g2.total() <= 0)
    throw ValidationError("inertia_association_test: both groups need "
                          "transitions");
  return contingency_test({{static_cast<double>(g1.on_diagonal),
                            static_cast<double>(g1.off_diagonal)},
                           {static_cast<double>(g2.on_diagonal),
                            static_cast<double>(g2.off_diagonal)}});
}

/// Goodness of fit of the focal stationary distribution (observed) against
/// the reference one (expected), both scaled to `n` transitions.
inline ChiSquareOutcome stationary_gof(std::span<const double> reference,
                                       std::span<const double> focal,
                                       double n) {
  if (reference.size() != focal.size())
    throw ValidationError("stationary_gof: distributions differ in length");
  if (!(n > 0.0))
    throw ValidationError("stationary_gof: n must be positive");
  std::vector<double> observed, expected;
  for (std::size_t i = 0; i < focal.size(); ++i) {
    observed.push_back(focal[i] * n);
    expected.push_back(reference[i] * n);
  }
  return goodness_of_fit(observed, expected);
}

/// Null hypothesis: every class equally frequent.
inline ChiSquareOutcome
equiprobability_test(std::span<const std::int64_t> class_counts) {
  if (class_counts.size() < 2)
    throw ValidationError("equiprobability_test: need at least 2 classes");
  double total = 0.0;
  std::vector<double> observed;
  for (auto c : class_counts) {
    if (c < 0)
      throw ValidationError("equiprobability_test: negative count");
    observed.push_back(static_cast<double>(c));
    total += static_cast<double>(c);
  }
  if (!(total > 0.0))
    throw ValidationError("equiprobability_test: no observations");
  std::vector<double> expected(observed.size(),
                               total / static_cast<double>(observed.size()));
  return goodness_of_fit(observed, expected);
}

} // namespace respchain
