#pragma once

// Reference chains that need no training data: a drunkard's-walk chain
// (stay or move one step), the maximum-entropy chain (uniform rows), and
// rank-one chains lifted from a target stationary vector.

#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "respchain/chain_core.hpp"

namespace respchain {

namespace model_names {
inline constexpr const char *drunkards_walk = "DWM";
inline constexpr const char *max_entropy = "MEM";
inline constexpr const char *symmetric = "symmetric";
inline constexpr const char *skewed_positive = "skewed+";
inline constexpr const char *skewed_negative = "skewed-";
} // namespace model_names

inline constexpr double kDefaultEpsilonFloor = 0.01;

/// Builds a chain that stays with probability `stay`, moves to an adjacent
/// state with probability `step` and jumps further with probability
/// `epsilon_floor`. Edge rows have one neighbor; the mass of the missing
/// neighbor moves onto it, so the edge step is 1 - stay - (K-2)*epsilon.
inline TransitionMatrix drunkards_walk(const StateSpace &space, double stay,
                                       double step,
                                       double epsilon_floor = kDefaultEpsilonFloor) {
  if (!(stay > 0.0) || !(step > 0.0) || !(epsilon_floor > 0.0))
    throw ValidationError(
        "drunkards_walk: stay, step and epsilon_floor must be positive");
  const std::size_t k = space.size();
  const auto far_cells_interior = static_cast<double>(k >= 3 ? k - 3 : 0);
  const auto far_cells_edge = static_cast<double>(k - 2);

  if (k >= 3) {
    const double residual = stay + 2.0 * step + far_cells_interior * epsilon_floor - 1.0;
    if (std::abs(residual) > 1e-6)
      throw ValidationError("drunkards_walk: interior rows sum to 1" +
                            std::string(residual >= 0 ? "+" : "") +
                            std::to_string(residual) + ", not 1");
  }
  const double edge_step = 1.0 - stay - far_cells_edge * epsilon_floor;
  if (!(edge_step > 0.0))
    throw ValidationError("drunkards_walk: edge rows cannot close (edge step " +
                          std::to_string(edge_step) + ")");

  RealMatrix m(k, epsilon_floor);
  for (std::size_t i = 0; i < k; ++i) {
    m(i, i) = stay;
    const bool edge = (i == 0 || i + 1 == k);
    const double s = edge ? edge_step : step;
    if (i > 0)
      m(i, i - 1) = s;
    if (i + 1 < k)
      m(i, i + 1) = s;
  }
  // The interior check above allows 1e-6 of slack; absorb it on the diagonal
  // so the result is stochastic at full precision.
  for (std::size_t i = 0; i < k; ++i)
    m(i, i) += 1.0 - m.row_sum(i);
  return TransitionMatrix(std::move(m));
}

/// Solves the interior-row closure for `step`: (1 - stay - (K-3)*epsilon)/2.
inline double drunkards_walk_closing_step(const StateSpace &space, double stay,
                                          double epsilon_floor = kDefaultEpsilonFloor) {
  if (space.size() < 3)
    throw ValidationError("drunkards_walk_closing_step: needs K >= 3");
  return (1.0 - stay - static_cast<double>(space.size() - 3) * epsilon_floor) / 2.0;
}

inline TransitionMatrix max_entropy(const StateSpace &space) {
  const std::size_t k = space.size();
  return TransitionMatrix(RealMatrix(k, 1.0 / static_cast<double>(k)));
}

/// Rank-one chain with every row equal to `vector`; its stationary
/// distribution is `vector` itself.
inline TransitionMatrix from_stationary_vector(std::span<const double> vector) {
  if (vector.size() < 2)
    throw ValidationError("from_stationary_vector: need at least 2 states");
  for (double v : vector)
    if (!(v >= 0.0))
      throw ValidationError("from_stationary_vector: negative entry");
  const double s = std::accumulate(vector.begin(), vector.end(), 0.0);
  if (std::abs(s - 1.0) > kRowSumSlack)
    throw ValidationError("from_stationary_vector: entries sum to " +
                          std::to_string(s) + ", not 1");
  RealMatrix m(vector.size());
  for (std::size_t i = 0; i < vector.size(); ++i)
    for (std::size_t j = 0; j < vector.size(); ++j)
      m(i, j) = vector[j];
  return TransitionMatrix(std::move(m));
}

// Example state-probability profiles for a 5-point scale.
inline const std::vector<double> &symmetric_profile() {
  static const std::vector<double> v{0.10, 0.20, 0.40, 0.20, 0.10};
  return v;
}
inline const std::vector<double> &skewed_positive_profile() {
  static const std::vector<double> v{0.25, 0.40, 0.20, 0.10, 0.05};
  return v;
}
inline const std::vector<double> &skewed_negative_profile() {
  static const std::vector<double> v{0.05, 0.10, 0.20, 0.40, 0.25};
  return v;
}

enum class ModelKind { drunkards_walk, max_entropy, from_stationary_vector, explicit_matrix };

struct DrunkardsWalkParams {
  double stay = 0.50;
  double step = 0.24;
  double epsilon_floor = kDefaultEpsilonFloor;
};

struct MaxEntropyParams {};

struct StationaryVectorParams {
  std::vector<double> vector;
};

/// A transition matrix given cell by cell, e.g. one estimated elsewhere.
struct ExplicitMatrixParams {
  std::vector<std::vector<double>> rows;
};

struct TheoreticalModelSpec {
  std::string name;
  std::variant<DrunkardsWalkParams, MaxEntropyParams, StationaryVectorParams,
               ExplicitMatrixParams>
      parameters;

  ModelKind kind() const {
    return static_cast<ModelKind>(parameters.index());
  }
};

inline TransitionMatrix build_model(const TheoreticalModelSpec &spec,
                                    const StateSpace &space) {
  struct Visitor {
    const StateSpace &space;
    TransitionMatrix operator()(const DrunkardsWalkParams &p) const {
      return drunkards_walk(space, p.stay, p.step, p.epsilon_floor);
    }
    TransitionMatrix operator()(const MaxEntropyParams &) const {
      return max_entropy(space);
    }
    TransitionMatrix operator()(const StationaryVectorParams &p) const {
      if (p.vector.size() != space.size())
        throw ValidationError("model vector has " +
                              std::to_string(p.vector.size()) +
                              " entries for " + std::to_string(space.size()) +
                              " states");
      return from_stationary_vector(p.vector);
    }
    TransitionMatrix operator()(const ExplicitMatrixParams &p) const {
      if (p.rows.size() != space.size())
        throw ValidationError("model matrix has " + std::to_string(p.rows.size()) +
                              " rows for " + std::to_string(space.size()) + " states");
      RealMatrix m(space.size());
      for (std::size_t i = 0; i < p.rows.size(); ++i) {
        if (p.rows[i].size() != space.size())
          throw ValidationError("model matrix row " + std::to_string(i + 1) + " has " +
                                std::to_string(p.rows[i].size()) + " entries");
        for (std::size_t j = 0; j < space.size(); ++j)
          m(i, j) = p.rows[i][j];
      }
      return TransitionMatrix(std::move(m));
    }
  };
  return std::visit(Visitor{space}, spec.parameters);
}

/// DWM, MEM, symmetric, skewed+ and skewed-. The three profile models are
/// defined for 5-state scales only and are omitted otherwise.
inline std::vector<TheoreticalModelSpec> builtin_models(const StateSpace &space) {
  std::vector<TheoreticalModelSpec> out;
  out.push_back({model_names::max_entropy, MaxEntropyParams{}});
  if (space.size() == 5) {
    out.push_back({model_names::drunkards_walk, DrunkardsWalkParams{}});
    out.push_back({model_names::symmetric,
                   StationaryVectorParams{symmetric_profile()}});
    out.push_back({model_names::skewed_positive,
                   StationaryVectorParams{skewed_positive_profile()}});
    out.push_back({model_names::skewed_negative,
                   StationaryVectorParams{skewed_negative_profile()}});
  } else if (space.size() >= 3) {
    DrunkardsWalkParams p;
    p.step = drunkards_walk_closing_step(space, p.stay, p.epsilon_floor);
    if (p.step > 0.0)
      out.push_back({model_names::drunkards_walk, p});
  }
  return out;
}

} // namespace respchain
