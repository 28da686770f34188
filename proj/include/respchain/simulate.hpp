#pragma once

// Synthetic response sequences drawn from a transition matrix.
//
// Reproducibility contract: sequence i of a cohort is drawn from a
// std::mt19937_64 seeded with splitmix64(master_seed + i). Each uniform
// variate is (engine() >> 11) * 2^-53, and a state is chosen by scanning the
// cumulative row (or initial distribution) for the first entry exceeding the
// variate. The first variate picks the initial state, and each later one
// picks the next state from the current state's row.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "respchain/chain_core.hpp"

namespace respchain {

struct SimulationSpec {
  TransitionMatrix matrix;
  /// Empty means the chain's stationary distribution when it has one,
  /// uniform otherwise.
  std::vector<double> initial_distribution;
  std::size_t length = 16;
  std::size_t count = 1;
  std::uint64_t seed = 0;
  std::string id_prefix = "S";
  std::optional<std::string> group;
};

struct InitialDistribution {
  std::vector<double> probabilities;
  /// "supplied", "stationary" or "uniform".
  std::string source;
};

/// SplitMix64 output function applied to `x`.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_sequence_seed(std::uint64_t master, std::size_t index) {
  return splitmix64(master + static_cast<std::uint64_t>(index));
}

inline double uniform01(std::mt19937_64 &engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

inline InitialDistribution resolve_initial(const SimulationSpec &spec) {
  const std::size_t k = spec.matrix.size();
  if (!spec.initial_distribution.empty()) {
    if (spec.initial_distribution.size() != k)
      throw ValidationError("simulation: initial distribution has " +
                            std::to_string(spec.initial_distribution.size()) +
                            " entries for " + std::to_string(k) + " states");
    double s = 0.0;
    for (double v : spec.initial_distribution) {
      if (!(v >= 0.0))
        throw ValidationError("simulation: negative initial probability");
      s += v;
    }
    if (std::abs(s - 1.0) > kRowSumSlack)
      throw ValidationError("simulation: initial distribution sums to " +
                            std::to_string(s));
    return {spec.initial_distribution, "supplied"};
  }
  if (spec.matrix.fully_defined() && is_irreducible(spec.matrix) &&
      is_aperiodic(spec.matrix)) {
    const auto st = stationary(spec.matrix, {1e-13, 100000});
    if (st.converged)
      return {st.distribution, "stationary"};
  }
  return {std::vector<double>(k, 1.0 / static_cast<double>(k)), "uniform"};
}

namespace detail {

inline std::size_t draw(std::span<const double> probs, double u) {
  double cum = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t j = 0; j < probs.size(); ++j) {
    if (probs[j] <= 0.0)
      continue;
    last_positive = j;
    cum += probs[j];
    if (u < cum)
      return j;
  }
  return last_positive;
}

inline void require_reachable_rows_defined(const TransitionMatrix &p,
                                           std::span<const double> initial) {
  std::vector<bool> seen(p.size(), false);
  std::vector<std::size_t> queue;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (initial[i] > 0.0) {
      seen[i] = true;
      queue.push_back(i);
    }
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const std::size_t u = queue[head];
    if (!p.row_defined(u))
      throw StructuralError("simulation: undefined row " +
                            std::to_string(u + 1) + " is reachable");
    for (std::size_t v = 0; v < p.size(); ++v)
      if (p(u, v) > 0.0 && !seen[v]) {
        seen[v] = true;
        queue.push_back(v);
      }
  }
}

inline std::string participant_id(const std::string &prefix, std::size_t index,
                                  std::size_t count) {
  const int width = static_cast<int>(std::max<std::size_t>(
      4, std::to_string(count).size()));
  char buf[32];
  std::snprintf(buf, sizeof buf, "%0*zu", width, index + 1);
  return prefix + buf;
}

inline ResponseSequence draw_sequence(const SimulationSpec &spec,
                                      std::span<const double> initial,
                                      std::size_t index) {
  std::mt19937_64 engine(derive_sequence_seed(spec.seed, index));
  ResponseSequence seq;
  seq.participant_id = participant_id(spec.id_prefix, index, spec.count);
  seq.group = spec.group;
  seq.states.reserve(spec.length);
  std::size_t state = draw(initial, uniform01(engine));
  seq.states.push_back(static_cast<State>(state + 1));
  for (std::size_t k = 1; k < spec.length; ++k) {
    state = draw(spec.matrix.probs().row(state), uniform01(engine));
    seq.states.push_back(static_cast<State>(state + 1));
  }
  return seq;
}

inline std::vector<double> validated_initial(const SimulationSpec &spec) {
  if (spec.length < 2)
    throw ValidationError("simulation: length must be >= 2");
  if (spec.count < 1)
    throw ValidationError("simulation: count must be >= 1");
  auto initial = resolve_initial(spec).probabilities;
  require_reachable_rows_defined(spec.matrix, initial);
  return initial;
}

} // namespace detail

/// Sequence `index` of the cohort described by `spec`.
inline ResponseSequence generate_sequence(const SimulationSpec &spec,
                                          std::size_t index = 0) {
  const auto initial = detail::validated_initial(spec);
  return detail::draw_sequence(spec, initial, index);
}

/// `spec.count` sequences. The output does not depend on `threads`.
inline std::vector<ResponseSequence> generate_cohort(const SimulationSpec &spec,
                                                     unsigned threads = 1) {
  const auto initial = detail::validated_initial(spec);
  std::vector<ResponseSequence> out(spec.count);
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(spec.count)));
  if (threads == 1) {
    for (std::size_t i = 0; i < spec.count; ++i)
      out[i] = detail::draw_sequence(spec, initial, i);
    return out;
  }
  std::vector<std::jthread> workers;
  for (unsigned t = 0; t < threads; ++t)
    workers.emplace_back([&, t] {
      for (std::size_t i = t; i < spec.count; i += threads)
        out[i] = detail::draw_sequence(spec, initial, i);
    });
  workers.clear();
  return out;
}

} // namespace respchain
