#pragma once

// First-order Markov chain estimation and analysis over a finite response
// scale: transition counting, row normalization, pooling, matrix powers,
// stationary distributions by power iteration, structural checks and
// inertia (self-transition) summaries.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "respchain/error.hpp"
#include "respchain/matrix.hpp"
#include "respchain/state_space.hpp"

namespace respchain {

/// Slack allowed on the sum of a defined row.
inline constexpr double kRowSumSlack = 1e-9;

class TransitionCounts {
public:
  explicit TransitionCounts(std::size_t states) : counts_(states, 0) {}

  explicit TransitionCounts(SquareMatrix<std::int64_t> counts)
      : counts_(std::move(counts)) {
    for (auto c : counts_.data()) {
      if (c < 0)
        throw ValidationError("transition counts must be non-negative");
      total_ += c;
    }
  }

  std::size_t size() const noexcept { return counts_.size(); }
  std::int64_t total() const noexcept { return total_; }

  /// 0-based source and destination.
  std::int64_t operator()(std::size_t from, std::size_t to) const {
    return counts_(from, to);
  }

  void add(std::size_t from, std::size_t to, std::int64_t n = 1) {
    counts_(from, to) += n;
    total_ += n;
  }

  std::vector<std::int64_t> row_totals() const {
    std::vector<std::int64_t> out(size(), 0);
    for (std::size_t i = 0; i < size(); ++i)
      out[i] = counts_.row_sum(i);
    return out;
  }

  const SquareMatrix<std::int64_t> &matrix() const noexcept { return counts_; }

  friend bool operator==(const TransitionCounts &,
                         const TransitionCounts &) = default;

private:
  SquareMatrix<std::int64_t> counts_;
  std::int64_t total_ = 0;
};

/// Row-stochastic matrix whose rows may be undefined (never a source in the
/// data). Undefined rows hold zeros and are excluded from the stochastic
/// invariant.
class TransitionMatrix {
public:
  TransitionMatrix() = default;

  /// Every row defined.
  explicit TransitionMatrix(RealMatrix probs)
      : TransitionMatrix(probs, std::vector<bool>(probs.size(), true)) {}

  TransitionMatrix(RealMatrix probs, std::vector<bool> defined_rows)
      : probs_(std::move(probs)), defined_(std::move(defined_rows)) {
    if (probs_.size() < 2)
      throw ValidationError("transition matrix needs at least 2 states");
    if (defined_.size() != probs_.size())
      throw ValidationError("transition matrix: mask length mismatch");
    for (std::size_t i = 0; i < probs_.size(); ++i) {
      for (double v : probs_.row(i)) {
        if (!(v >= 0.0) || v > 1.0 + kRowSumSlack)
          throw ValidationError("transition matrix: row " +
                                std::to_string(i + 1) +
                                " has an entry outside [0,1]");
      }
      const double s = probs_.row_sum(i);
      if (defined_[i] && std::abs(s - 1.0) > kRowSumSlack)
        throw ValidationError("transition matrix: row " +
                              std::to_string(i + 1) + " sums to " +
                              std::to_string(s));
      if (!defined_[i] && s != 0.0)
        throw ValidationError("transition matrix: undefined row " +
                              std::to_string(i + 1) + " carries mass");
    }
  }

  std::size_t size() const noexcept { return probs_.size(); }
  double operator()(std::size_t i, std::size_t j) const { return probs_(i, j); }
  const RealMatrix &probs() const noexcept { return probs_; }
  bool row_defined(std::size_t i) const { return defined_.at(i); }
  const std::vector<bool> &defined_rows() const noexcept { return defined_; }

  bool fully_defined() const {
    return std::all_of(defined_.begin(), defined_.end(),
                       [](bool b) { return b; });
  }

  friend bool operator==(const TransitionMatrix &,
                         const TransitionMatrix &) = default;

private:
  RealMatrix probs_;
  std::vector<bool> defined_;
};

struct StationaryResult {
  std::vector<double> distribution;
  int power_at_convergence = 0;
  bool converged = false;
  double tolerance_used = 0.0;
  /// Max absolute entry change at the last comparison made.
  double final_difference = 0.0;
};

struct StationaryOptions {
  double tolerance = 5e-4;
  int max_power = 64;
};

struct InertiaSummary {
  std::int64_t on_diagonal = 0;
  std::int64_t off_diagonal = 0;
  double proportion = 0.0;

  std::int64_t total() const noexcept { return on_diagonal + off_diagonal; }
};

// ---------------------------------------------------------------------------
// Estimation

inline TransitionCounts count_transitions(const ResponseSequence &seq,
                                          const StateSpace &space) {
  validate_for_transitions(seq, space);
  TransitionCounts counts(space.size());
  for (std::size_t k = 1; k < seq.states.size(); ++k)
    counts.add(static_cast<std::size_t>(seq.states[k - 1] - 1),
               static_cast<std::size_t>(seq.states[k] - 1));
  return counts;
}

/// Divides each row by its total. Rows with a zero total stay undefined
/// unless `smoothing_alpha` > 0, in which case alpha is first added to every
/// cell and all rows become defined.
inline TransitionMatrix normalize_rows(const TransitionCounts &counts,
                                       double smoothing_alpha = 0.0) {
  if (!(smoothing_alpha >= 0.0) || !std::isfinite(smoothing_alpha))
    throw ValidationError("smoothing alpha must be a finite value >= 0");
  const std::size_t n = counts.size();
  RealMatrix probs(n);
  std::vector<bool> defined(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    double row_total = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      row_total += static_cast<double>(counts(i, j)) + smoothing_alpha;
    if (row_total <= 0.0)
      continue;
    defined[i] = true;
    for (std::size_t j = 0; j < n; ++j)
      probs(i, j) =
          (static_cast<double>(counts(i, j)) + smoothing_alpha) / row_total;
  }
  return TransitionMatrix(std::move(probs), std::move(defined));
}

/// Element-wise sum of per-participant counts. Transitions across
/// participant boundaries never exist here, since each input was counted
/// within one sequence.
inline TransitionCounts pool_counts(std::span<const TransitionCounts> cohort) {
  if (cohort.empty())
    throw ValidationError("pool_counts: empty cohort");
  TransitionCounts pooled(cohort.front().size());
  for (const auto &c : cohort) {
    if (c.size() != pooled.size())
      throw ValidationError("pool_counts: mismatched state counts (" +
                            std::to_string(c.size()) + " vs " +
                            std::to_string(pooled.size()) + ")");
    for (std::size_t i = 0; i < c.size(); ++i)
      for (std::size_t j = 0; j < c.size(); ++j)
        if (c(i, j) != 0)
          pooled.add(i, j, c(i, j));
  }
  return pooled;
}

/// Log2 probability of the sequence conditional on its first state: the sum
/// of single-step log transition probabilities. -inf if any step has zero
/// probability or leaves from an undefined row.
inline double path_log2_probability(const ResponseSequence &seq,
                                    const TransitionMatrix &p) {
  StateSpace space(p.size());
  validate_for_transitions(seq, space);
  double acc = 0.0;
  for (std::size_t k = 1; k < seq.states.size(); ++k) {
    const auto from = static_cast<std::size_t>(seq.states[k - 1] - 1);
    const auto to = static_cast<std::size_t>(seq.states[k] - 1);
    const double prob = p(from, to);
    if (!p.row_defined(from) || prob <= 0.0)
      return -std::numeric_limits<double>::infinity();
    acc += std::log2(prob);
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Structure

namespace detail {

inline std::vector<std::vector<std::size_t>>
adjacency(const TransitionMatrix &p) {
  std::vector<std::vector<std::size_t>> adj(p.size());
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < p.size(); ++j)
      if (p(i, j) > 0.0)
        adj[i].push_back(j);
  return adj;
}

} // namespace detail

/// Strongly connected components of the graph of nonzero transitions
/// (Tarjan). Returns component id per state; ids are in reverse topological
/// order of the condensation.
inline std::vector<std::size_t> communicating_classes(const TransitionMatrix &p) {
  const auto adj = detail::adjacency(p);
  const std::size_t n = p.size();
  constexpr auto unset = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> index(n, unset), low(n, 0), comp(n, unset);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::size_t next_index = 0, next_comp = 0;

  std::function<void(std::size_t)> visit = [&](std::size_t v) {
    index[v] = low[v] = next_index++;
    stack.push_back(v);
    on_stack[v] = true;
    for (std::size_t w : adj[v]) {
      if (index[w] == unset) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::size_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp[w] = next_comp;
      } while (w != v);
      ++next_comp;
    }
  };
  for (std::size_t v = 0; v < n; ++v)
    if (index[v] == unset)
      visit(v);
  return comp;
}

/// True iff every state reaches every other through nonzero transitions.
inline bool is_irreducible(const TransitionMatrix &p) {
  const auto comp = communicating_classes(p);
  return std::all_of(comp.begin(), comp.end(),
                     [&](std::size_t c) { return c == comp.front(); });
}

/// Period of each state: gcd of the lengths of all closed walks through it.
/// 0 marks a state with no return path.
inline std::vector<std::size_t> state_periods(const TransitionMatrix &p) {
  const auto adj = detail::adjacency(p);
  const auto comp = communicating_classes(p);
  const std::size_t n = p.size();
  constexpr auto unset = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> period(n, 0);
  std::vector<bool> done(n, false);

  for (std::size_t root = 0; root < n; ++root) {
    if (done[root])
      continue;
    // BFS levels inside the class; the period is the gcd over internal edges
    // u->v of level(u) + 1 - level(v).
    std::vector<std::size_t> level(n, unset);
    std::vector<std::size_t> queue{root};
    level[root] = 0;
    std::size_t g = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const std::size_t u = queue[head];
      for (std::size_t v : adj[u]) {
        if (comp[v] != comp[root])
          continue;
        if (level[v] == unset) {
          level[v] = level[u] + 1;
          queue.push_back(v);
        } else {
          const auto diff = static_cast<long long>(level[u]) + 1 -
                            static_cast<long long>(level[v]);
          g = std::gcd(g, static_cast<std::size_t>(std::llabs(diff)));
        }
      }
    }
    for (std::size_t v : queue) {
      period[v] = g;
      done[v] = true;
    }
  }
  return period;
}

inline bool is_aperiodic(const TransitionMatrix &p) {
  const auto periods = state_periods(p);
  return std::all_of(periods.begin(), periods.end(),
                     [](std::size_t d) { return d == 1; });
}

// ---------------------------------------------------------------------------
// Powers and long-run behavior

namespace detail {

inline void require_fully_defined(const TransitionMatrix &p, const char *op) {
  if (!p.fully_defined()) {
    std::string rows;
    for (std::size_t i = 0; i < p.size(); ++i)
      if (!p.row_defined(i))
        rows += (rows.empty() ? "" : ",") + std::to_string(i + 1);
    throw StructuralError(std::string(op) + ": row(s) " + rows +
                          " undefined; pool participants or apply smoothing "
                          "before this operation");
  }
}

// Renormalizes to absorb roundoff accumulated by repeated products.
inline TransitionMatrix as_stochastic(RealMatrix m) {
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double s = m.row_sum(i);
    for (double &v : m.row(i))
      v = std::clamp(v / s, 0.0, 1.0);
  }
  return TransitionMatrix(std::move(m));
}

} // namespace detail

inline TransitionMatrix matrix_power(const TransitionMatrix &p, int n) {
  detail::require_fully_defined(p, "matrix_power");
  if (n < 1)
    throw ValidationError("matrix_power: exponent must be >= 1, got " +
                          std::to_string(n));
  RealMatrix acc = p.probs();
  for (int k = 1; k < n; ++k)
    acc = multiply(acc, p.probs());
  return detail::as_stochastic(std::move(acc));
}

/// P^1 .. P^count, in order.
inline std::vector<TransitionMatrix> successive_powers(const TransitionMatrix &p,
                                                       int count) {
  detail::require_fully_defined(p, "successive_powers");
  std::vector<TransitionMatrix> out;
  RealMatrix acc = p.probs();
  for (int k = 1; k <= count; ++k) {
    if (k > 1)
      acc = multiply(acc, p.probs());
    out.push_back(detail::as_stochastic(acc));
  }
  return out;
}

/// Power iteration. P^n is accepted once max|P^(n+1) - P^n| < tolerance;
/// `power_at_convergence` is that n (1 for a chain whose rows are already
/// identical). The returned distribution is the mean of the rows of P^n,
/// which at convergence agree within the tolerance.
inline StationaryResult stationary(const TransitionMatrix &p,
                                   const StationaryOptions &opts = {}) {
  detail::require_fully_defined(p, "stationary");
  if (!(opts.tolerance > 0.0))
    throw ValidationError("stationary: tolerance must be positive");
  if (opts.max_power < 1)
    throw ValidationError("stationary: max_power must be >= 1");
  if (!is_irreducible(p))
    throw StructuralError("stationary: chain is not irreducible");
  if (!is_aperiodic(p))
    throw StructuralError("stationary: chain is not aperiodic");

  const std::size_t n = p.size();
  StationaryResult result;
  result.tolerance_used = opts.tolerance;

  RealMatrix current = p.probs();
  int power = 1;
  for (;; ++power) {
    RealMatrix next = multiply(current, p.probs());
    result.final_difference = max_abs_difference(next, current);
    if (result.final_difference < opts.tolerance) {
      result.converged = true;
      break;
    }
    if (power >= opts.max_power)
      break;
    current = std::move(next);
  }
  result.power_at_convergence = power;

  result.distribution.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      result.distribution[j] += current(i, j);
  const double total = std::accumulate(result.distribution.begin(),
                                       result.distribution.end(), 0.0);
  for (double &v : result.distribution)
    v /= total;
  return result;
}

/// max_j |(pi P)_j - pi_j|.
inline double fixed_point_residual(const TransitionMatrix &p,
                                   std::span<const double> pi) {
  if (pi.size() != p.size())
    throw ValidationError("fixed_point_residual: length mismatch");
  double worst = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
      acc += pi[i] * p(i, j);
    worst = std::max(worst, std::abs(acc - pi[j]));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Inertia

inline InertiaSummary inertia(const TransitionCounts &counts) {
  if (counts.total() < 1)
    throw ValidationError("inertia: no transitions");
  InertiaSummary s;
  for (std::size_t i = 0; i < counts.size(); ++i)
    s.on_diagonal += counts(i, i);
  s.off_diagonal = counts.total() - s.on_diagonal;
  s.proportion =
      static_cast<double>(s.on_diagonal) / static_cast<double>(counts.total());
  return s;
}

/// Expected number of self-transitions: sum_i p_ii * f_i, where f_i is the
/// number of transitions leaving state i.
inline double expected_inertia(const TransitionMatrix &p,
                               std::span<const std::int64_t> row_totals) {
  if (row_totals.size() != p.size())
    throw ValidationError("expected_inertia: row totals length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (row_totals[i] < 0)
      throw ValidationError("expected_inertia: negative row total");
    if (row_totals[i] == 0)
      continue;
    if (!p.row_defined(i))
      throw ValidationError("expected_inertia: row " + std::to_string(i + 1) +
                            " is undefined but has a positive total");
    acc += p(i, i) * static_cast<double>(row_totals[i]);
  }
  return acc;
}

} // namespace respchain
