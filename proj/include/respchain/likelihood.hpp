#pragma once

// Log2 likelihood-ratio scoring of a sequence under two competing chains,
// plus binary and multi-model classification on top of those scores.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "respchain/chain_core.hpp"
#include "respchain/theoretical_models.hpp"

namespace respchain {

/// A cell replaced by the epsilon floor before a ratio was taken.
struct FloorSubstitution {
  std::size_t from = 0; // 0-based
  std::size_t to = 0;
  bool in_numerator = false;
  double original = 0.0;
};

struct EpsilonPolicy {
  double floor = 0.0;
  std::vector<FloorSubstitution> substitutions;
};

struct RatioMatrix {
  RealMatrix values;
  EpsilonPolicy epsilon_policy;
};

struct LogRatioMatrix {
  RealMatrix values;
  std::string numerator_name;
  std::string denominator_name;
  EpsilonPolicy epsilon_policy;

  double beta(std::size_t from, std::size_t to) const { return values(from, to); }
};

struct TransitionTerm {
  State from = 0; // 1-based, as in the sequence
  State to = 0;
  std::int64_t count = 0;
  double contribution = 0.0;
};

struct SequenceScore {
  std::string participant_id;
  double score = 0.0;
  /// Observed transitions only, ordered by (from, to).
  std::vector<TransitionTerm> per_transition_terms;
};

struct MultiModelVerdict {
  std::map<std::string, double> scores;
  /// Candidate names in the order they were supplied.
  std::vector<std::string> order;
  std::string assigned_model;
  bool tie = false;
};

/// Element-wise num/den. Zero cells in either matrix are raised to
/// `epsilon_floor` first, and each substitution is recorded.
inline RatioMatrix ratio_matrix(const TransitionMatrix &num,
                                const TransitionMatrix &den,
                                double epsilon_floor = kDefaultEpsilonFloor) {
  if (num.size() != den.size())
    throw ValidationError("ratio_matrix: matrices have different sizes");
  if (!(epsilon_floor >= 0.0))
    throw ValidationError("ratio_matrix: epsilon floor must be >= 0");
  for (const auto *m : {&num, &den})
    for (std::size_t i = 0; i < m->size(); ++i)
      if (!m->row_defined(i))
        throw StructuralError("ratio_matrix: row " + std::to_string(i + 1) +
                              " is undefined in the " +
                              (m == &num ? "numerator" : "denominator") +
                              "; pool more data or apply smoothing");

  const std::size_t k = num.size();
  RatioMatrix out{RealMatrix(k), EpsilonPolicy{epsilon_floor, {}}};
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      double a = num(i, j);
      double b = den(i, j);
      if (b == 0.0) {
        if (epsilon_floor == 0.0)
          throw ValidationError("ratio_matrix: zero denominator cell (" +
                                std::to_string(i + 1) + "," +
                                std::to_string(j + 1) +
                                ") with epsilon floor 0");
        out.epsilon_policy.substitutions.push_back({i, j, false, b});
        b = epsilon_floor;
      }
      if (a == 0.0 && epsilon_floor > 0.0) {
        out.epsilon_policy.substitutions.push_back({i, j, true, a});
        a = epsilon_floor;
      }
      out.values(i, j) = a / b;
    }
  return out;
}

inline LogRatioMatrix log2_matrix(const RealMatrix &ratios,
                                  std::string numerator_name = "numerator",
                                  std::string denominator_name = "denominator",
                                  EpsilonPolicy policy = {}) {
  const std::size_t k = ratios.size();
  LogRatioMatrix out{RealMatrix(k), std::move(numerator_name),
                     std::move(denominator_name), std::move(policy)};
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      const double r = ratios(i, j);
      if (!(r > 0.0) || !std::isfinite(r))
        throw ValidationError("log2_matrix: ratio at (" +
                              std::to_string(i + 1) + "," +
                              std::to_string(j + 1) +
                              ") is not a finite positive number");
      out.values(i, j) = std::log2(r);
    }
  return out;
}

inline LogRatioMatrix log2_matrix(RatioMatrix ratios,
                                  std::string numerator_name = "numerator",
                                  std::string denominator_name = "denominator") {
  return log2_matrix(ratios.values, std::move(numerator_name),
                     std::move(denominator_name),
                     std::move(ratios.epsilon_policy));
}

/// Convenience: ratio_matrix followed by log2_matrix.
inline LogRatioMatrix log_ratio(const TransitionMatrix &num,
                                const TransitionMatrix &den,
                                std::string numerator_name,
                                std::string denominator_name,
                                double epsilon_floor = kDefaultEpsilonFloor) {
  return log2_matrix(ratio_matrix(num, den, epsilon_floor),
                     std::move(numerator_name), std::move(denominator_name));
}

/// Sum over observed transitions of count * beta. Positive favors the
/// numerator model.
inline SequenceScore score_sequence(const ResponseSequence &seq,
                                    const LogRatioMatrix &lr) {
  const StateSpace space(lr.values.size());
  const TransitionCounts counts = count_transitions(seq, space);
  SequenceScore out;
  out.participant_id = seq.participant_id;
  for (std::size_t i = 0; i < counts.size(); ++i)
    for (std::size_t j = 0; j < counts.size(); ++j) {
      const std::int64_t c = counts(i, j);
      if (c == 0)
        continue;
      const double term = static_cast<double>(c) * lr.beta(i, j);
      out.per_transition_terms.push_back({static_cast<State>(i + 1),
                                          static_cast<State>(j + 1), c, term});
      out.score += term;
    }
  return out;
}

/// Score of exactly zero or above goes to the numerator label.
inline const std::string &classify_binary(const SequenceScore &score,
                                          const std::string &numerator_label,
                                          const std::string &denominator_label,
                                          double cutoff = 0.0) {
  return score.score >= cutoff ? numerator_label : denominator_label;
}

struct NamedModel {
  std::string name;
  TransitionMatrix matrix;
};

/// Scores the sequence against each candidate relative to `reference`. The
/// reference wins iff every score is negative; otherwise the highest score
/// wins, and exact ties (1e-12) go to the earliest candidate with `tie` set.
inline MultiModelVerdict classify_multimodel(const ResponseSequence &seq,
                                             const std::vector<NamedModel> &candidates,
                                             const NamedModel &reference,
                                             double epsilon_floor = kDefaultEpsilonFloor) {
  if (candidates.empty())
    throw ValidationError("classify_multimodel: no candidate models");
  MultiModelVerdict v;
  std::vector<double> ordered;
  for (const auto &c : candidates) {
    if (c.matrix.size() != reference.matrix.size())
      throw ValidationError("classify_multimodel: model '" + c.name +
                            "' has a different number of states");
    const auto lr = log_ratio(c.matrix, reference.matrix, c.name,
                              reference.name, epsilon_floor);
    const double s = score_sequence(seq, lr).score;
    if (!v.scores.emplace(c.name, s).second)
      throw ValidationError("classify_multimodel: duplicate model name '" +
                            c.name + "'");
    v.order.push_back(c.name);
    ordered.push_back(s);
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < ordered.size(); ++i)
    if (ordered[i] > ordered[best] + 1e-12)
      best = i;
  if (ordered[best] < 0.0) {
    v.assigned_model = reference.name;
    return v;
  }
  v.assigned_model = candidates[best].name;
  for (std::size_t i = 0; i < ordered.size(); ++i)
    if (i != best && std::abs(ordered[i] - ordered[best]) <= 1e-12)
      v.tie = true;
  return v;
}

} // namespace respchain
