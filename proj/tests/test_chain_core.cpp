#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numeric>
#include <random>

#include "respchain/chain_core.hpp"
#include "respchain/theoretical_models.hpp"
#include "test_support.hpp"

using namespace respchain;
using namespace respchain::testing;

namespace {

// Independent oracle: scan every adjacent pair into a map keyed by (from,to).
std::map<std::pair<int, int>, std::int64_t>
brute_force_pairs(const ResponseSequence &s) {
  std::map<std::pair<int, int>, std::int64_t> out;
  for (std::size_t i = 0; i + 1 < s.states.size(); ++i)
    ++out[{s.states[i], s.states[i + 1]}];
  return out;
}

// Dominant left eigenvector of P, normalized to sum 1.
std::vector<double> eigen_stationary(const TransitionMatrix &p) {
  const auto k = static_cast<Eigen::Index>(p.size());
  Eigen::MatrixXd pt(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j)
      pt(j, i) = p(i, j);
  Eigen::EigenSolver<Eigen::MatrixXd> es(pt);
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < k; ++i)
    if (std::abs(es.eigenvalues()[i] - 1.0) < std::abs(es.eigenvalues()[best] - 1.0))
      best = i;
  Eigen::VectorXd v = es.eigenvectors().col(best).real();
  v /= v.sum();
  return {v.data(), v.data() + k};
}

// Warshall transitive closure over nonzero transitions.
bool closure_strongly_connected(const TransitionMatrix &p) {
  const std::size_t k = p.size();
  std::vector<std::vector<bool>> r(k, std::vector<bool>(k, false));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      r[i][j] = (i == j) || p(i, j) > 0.0;
  for (std::size_t m = 0; m < k; ++m)
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j)
        if (r[i][m] && r[m][j])
          r[i][j] = true;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      if (!r[i][j])
        return false;
  return true;
}

// gcd of every n <= limit with a closed walk of length n through `state`,
// found by boolean matrix powers.
std::size_t cycle_gcd(const TransitionMatrix &p, std::size_t state,
                      std::size_t limit) {
  const std::size_t k = p.size();
  std::vector<std::vector<bool>> a(k, std::vector<bool>(k)), cur;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      a[i][j] = p(i, j) > 0.0;
  cur = a;
  std::size_t g = 0;
  for (std::size_t n = 1; n <= limit; ++n) {
    if (cur[state][state])
      g = std::gcd(g, n);
    std::vector<std::vector<bool>> next(k, std::vector<bool>(k, false));
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t m = 0; m < k; ++m)
        if (cur[i][m])
          for (std::size_t j = 0; j < k; ++j)
            if (a[m][j])
              next[i][j] = true;
    cur = std::move(next);
  }
  return g;
}

} // namespace

// ---------------------------------------------------------------------------
// count_transitions

TEST(CountTransitions, WorkedExampleSequence) {
  const auto c = count_transitions(make_sequence("O05", kO05), StateSpace(5));
  EXPECT_EQ(c.total(), 15);
  EXPECT_EQ(c(1, 2), 1); // 2->3
  EXPECT_EQ(c(1, 3), 3); // 2->4
  EXPECT_EQ(c(2, 1), 4); // 3->2
  EXPECT_EQ(c(2, 2), 2); // 3->3
  EXPECT_EQ(c(3, 2), 3); // 4->3
  EXPECT_EQ(c(3, 3), 2); // 4->4
  std::int64_t listed = 1 + 3 + 4 + 2 + 3 + 2;
  EXPECT_EQ(listed, c.total());
}

TEST(CountTransitions, ConstantSequence) {
  const auto c = count_transitions(make_sequence("c", "1111"), StateSpace(5));
  EXPECT_EQ(c(0, 0), 3);
  EXPECT_EQ(c.total(), 3);
}

TEST(CountTransitions, MatchesBruteForcePairScan) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = random_sequence(50, 5, rng);
    const auto c = count_transitions(s, StateSpace(5));
    const auto oracle = brute_force_pairs(s);
    for (int i = 1; i <= 5; ++i)
      for (int j = 1; j <= 5; ++j) {
        auto it = oracle.find({i, j});
        EXPECT_EQ(c(i - 1, j - 1), it == oracle.end() ? 0 : it->second);
      }
    EXPECT_EQ(c.total(), 49);
  }
}

TEST(CountTransitions, RejectsOutOfRangeState) {
  try {
    count_transitions(make_sequence("bad", "1261"), StateSpace(5));
    FAIL() << "expected a validation error";
  } catch (const ValidationError &e) {
    EXPECT_NE(std::string(e.what()).find("position 3"), std::string::npos);
  }
}

TEST(CountTransitions, RejectsShortSequence) {
  EXPECT_THROW(count_transitions(make_sequence("one", "3"), StateSpace(5)),
               ValidationError);
}

// ---------------------------------------------------------------------------
// normalize_rows

TEST(NormalizeRows, WorkedExampleMatrix) {
  const auto p =
      normalize_rows(count_transitions(make_sequence("O05", kO05), StateSpace(5)));
  EXPECT_FALSE(p.row_defined(0));
  EXPECT_FALSE(p.row_defined(4));
  EXPECT_DOUBLE_EQ(p(1, 2), 0.25);
  EXPECT_DOUBLE_EQ(p(1, 3), 0.75);
  EXPECT_DOUBLE_EQ(p(2, 1), 4.0 / 6.0);
  EXPECT_DOUBLE_EQ(p(2, 2), 2.0 / 6.0);
  EXPECT_DOUBLE_EQ(p(3, 2), 0.60);
  EXPECT_DOUBLE_EQ(p(3, 3), 0.40);
  for (std::size_t j = 0; j < 5; ++j) {
    EXPECT_EQ(p(0, j), 0.0);
    EXPECT_EQ(p(4, j), 0.0);
  }
}

TEST(NormalizeRows, OneHotRow) {
  TransitionCounts c(5);
  c.add(0, 1, 7);
  const auto p = normalize_rows(c);
  EXPECT_TRUE(p.row_defined(0));
  EXPECT_EQ(p(0, 1), 1.0);
  for (std::size_t i = 1; i < 5; ++i)
    EXPECT_FALSE(p.row_defined(i));
}

TEST(NormalizeRows, AllZeroCountsLeaveEveryRowUndefined) {
  const auto p = normalize_rows(TransitionCounts(4));
  for (std::size_t i = 0; i < 4; ++i)
    EXPECT_FALSE(p.row_defined(i));
}

TEST(NormalizeRows, DefinedRowsSumToOneProperty) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> d(0, 40);
  std::bernoulli_distribution zero_row(0.2);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 2 + trial % 7;
    TransitionCounts c(k);
    for (std::size_t i = 0; i < k; ++i) {
      if (zero_row(rng))
        continue;
      for (std::size_t j = 0; j < k; ++j)
        c.add(i, j, d(rng));
    }
    const auto p = normalize_rows(c);
    for (std::size_t i = 0; i < k; ++i) {
      if (p.row_defined(i))
        EXPECT_NEAR(p.probs().row_sum(i), 1.0, 1e-9);
      else
        EXPECT_EQ(p.probs().row_sum(i), 0.0);
    }
  }
}

TEST(NormalizeRows, SmoothingDefinesEveryRow) {
  TransitionCounts c(3);
  c.add(0, 0, 2);
  const auto p = normalize_rows(c, 0.5);
  EXPECT_TRUE(p.fully_defined());
  EXPECT_DOUBLE_EQ(p(0, 0), 2.5 / 3.5);
  EXPECT_DOUBLE_EQ(p(1, 2), 1.0 / 3.0);
}

// ---------------------------------------------------------------------------
// pool_counts

TEST(PoolCounts, CohortTotalsFollowTransitionsPerParticipant) {
  std::mt19937_64 rng(3);
  for (auto [n, expected] : {std::pair{73, 1095}, std::pair{27, 405}}) {
    std::vector<TransitionCounts> cohort;
    for (int i = 0; i < n; ++i)
      cohort.push_back(count_transitions(random_sequence(16, 5, rng), StateSpace(5)));
    EXPECT_EQ(pool_counts(cohort).total(), expected);
  }
}

TEST(PoolCounts, SingleParticipantIsIdentity) {
  const auto c = count_transitions(make_sequence("O05", kO05), StateSpace(5));
  std::vector<TransitionCounts> one{c};
  EXPECT_EQ(pool_counts(one), c);
}

TEST(PoolCounts, NeverCountsAcrossParticipantBoundaries) {
  const auto a = make_sequence("a", "1111");
  const auto b = make_sequence("b", "5555");
  std::vector<TransitionCounts> cohort{count_transitions(a, StateSpace(5)),
                                       count_transitions(b, StateSpace(5))};
  const auto pooled = pool_counts(cohort);
  EXPECT_EQ(pooled.total(), 6);
  EXPECT_EQ(pooled(0, 4), 0); // concatenation would add a 1->5 transition
  EXPECT_EQ(pooled(0, 0), 3);
  EXPECT_EQ(pooled(4, 4), 3);
}

TEST(PoolCounts, RejectsMismatchedStateCounts) {
  std::vector<TransitionCounts> cohort{TransitionCounts(5), TransitionCounts(4)};
  EXPECT_THROW(pool_counts(cohort), ValidationError);
}

// ---------------------------------------------------------------------------
// Markov property

TEST(PathProbability, StepwiseLogEqualsProductOracle) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 2 + trial % 5;
    const auto p = random_positive_matrix(k, rng);
    const auto s = random_sequence(2 + trial % 11, static_cast<int>(k), rng);
    double product = 1.0;
    for (std::size_t i = 0; i + 1 < s.states.size(); ++i)
      product *= p(s.states[i] - 1, s.states[i + 1] - 1);
    EXPECT_NEAR(path_log2_probability(s, p), std::log2(product), 1e-9);
  }
}

// ---------------------------------------------------------------------------
// matrix_power

TEST(MatrixPower, AdhdSquareFirstRow) {
  const auto p2 = matrix_power(adhd_matrix(), 2);
  const double expected[] = {0.182, 0.274, 0.388, 0.132, 0.023};
  for (std::size_t j = 0; j < 5; ++j)
    EXPECT_NEAR(p2(0, j), expected[j], 0.001);
}

TEST(MatrixPower, FirstPowerIsUnchanged) {
  EXPECT_EQ(max_abs_difference(matrix_power(ocd_matrix(), 1).probs(),
                               ocd_matrix().probs()),
            0.0);
}

TEST(MatrixPower, CubeMatchesRepeatedMultiplication) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = random_positive_matrix(2 + trial % 6, rng);
    const auto oracle = multiply(multiply(p.probs(), p.probs()), p.probs());
    const auto p3 = matrix_power(p, 3);
    EXPECT_LT(max_abs_difference(p3.probs(), oracle), 1e-12);
    for (std::size_t i = 0; i < p.size(); ++i)
      EXPECT_NEAR(p3.probs().row_sum(i), 1.0, 1e-9);
  }
}

TEST(MatrixPower, UndefinedRowsAreRejected) {
  const auto p =
      normalize_rows(count_transitions(make_sequence("O05", kO05), StateSpace(5)));
  try {
    matrix_power(p, 2);
    FAIL();
  } catch (const StructuralError &e) {
    EXPECT_NE(std::string(e.what()).find("smoothing"), std::string::npos);
  }
}

// ---------------------------------------------------------------------------
// Structure

TEST(Structure, PublishedMatricesAreIrreducibleAndAperiodic) {
  EXPECT_TRUE(is_irreducible(adhd_matrix()));
  EXPECT_TRUE(is_aperiodic(adhd_matrix()));
  EXPECT_TRUE(is_irreducible(ocd_matrix()));
  EXPECT_TRUE(is_aperiodic(ocd_matrix()));
}

TEST(Structure, IdentityIsReducible) {
  EXPECT_FALSE(is_irreducible(TransitionMatrix(RealMatrix::identity(5))));
}

TEST(Structure, SwapHasPeriodTwo) {
  const TransitionMatrix swap(RealMatrix{{0, 1}, {1, 0}});
  EXPECT_TRUE(is_irreducible(swap));
  EXPECT_FALSE(is_aperiodic(swap));
  EXPECT_EQ(state_periods(swap), (std::vector<std::size_t>{2, 2}));
}

TEST(Structure, ThreeCycleHasPeriodThree) {
  const TransitionMatrix cyc(RealMatrix{{0, 1, 0}, {0, 0, 1}, {1, 0, 0}});
  EXPECT_EQ(state_periods(cyc), (std::vector<std::size_t>{3, 3, 3}));
}

TEST(Structure, IrreducibilityMatchesClosureOracle) {
  std::mt19937_64 rng(21);
  int reducible = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const auto p = random_sparse_matrix(2 + trial % 7, 0.6, rng);
    const bool oracle = closure_strongly_connected(p);
    reducible += !oracle;
    EXPECT_EQ(is_irreducible(p), oracle);
  }
  EXPECT_GT(reducible, 10); // the generator exercises both outcomes
}

TEST(Structure, PeriodsMatchCycleLengthGcdOracle) {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 2 + trial % 6;
    const auto p = random_sparse_matrix(k, 0.7, rng);
    const auto periods = state_periods(p);
    for (std::size_t s = 0; s < k; ++s)
      EXPECT_EQ(periods[s], cycle_gcd(p, s, 3 * k * k)) << "state " << s;
  }
}

TEST(Structure, PositiveDiagonalIrreducibleIsAperiodic) {
  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 2 + trial % 7;
    auto base = random_sparse_matrix(k, 0.5, rng).probs();
    for (std::size_t i = 0; i < k; ++i) {
      base(i, i) += 0.2;
      base(i, (i + 1) % k) += 0.2; // ring keeps it irreducible
      const double s = base.row_sum(i);
      for (double &v : base.row(i))
        v /= s;
    }
    const TransitionMatrix p(base);
    ASSERT_TRUE(is_irreducible(p));
    EXPECT_TRUE(is_aperiodic(p));
  }
}

// ---------------------------------------------------------------------------
// stationary

TEST(Stationary, AdhdMatrix) {
  const auto r = stationary(adhd_matrix());
  ASSERT_TRUE(r.converged);
  const double expected[] = {0.145, 0.260, 0.412, 0.155, 0.028};
  for (std::size_t j = 0; j < 5; ++j)
    EXPECT_NEAR(r.distribution[j], expected[j], 0.002);
  EXPECT_LE(r.power_at_convergence, 8);
  EXPECT_EQ(r.tolerance_used, 5e-4);
}

TEST(Stationary, OcdMatrix) {
  const auto r = stationary(ocd_matrix());
  ASSERT_TRUE(r.converged);
  const double expected[] = {0.097, 0.221, 0.384, 0.223, 0.075};
  for (std::size_t j = 0; j < 5; ++j)
    EXPECT_NEAR(r.distribution[j], expected[j], 0.002);
  EXPECT_LE(r.power_at_convergence, 12);
  EXPECT_GT(r.power_at_convergence,
            stationary(adhd_matrix()).power_at_convergence);
}

TEST(Stationary, MaxEntropyConvergesAtFirstPower) {
  const auto r = stationary(max_entropy(StateSpace(5)));
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.power_at_convergence, 1);
  for (double v : r.distribution)
    EXPECT_DOUBLE_EQ(v, 0.2);
}

TEST(Stationary, MatchesEigenOracleOnRandomChains) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 2 + trial % 7;
    const auto p = random_positive_matrix(k, rng);
    const auto r = stationary(p, {1e-13, 10000});
    ASSERT_TRUE(r.converged);
    const auto oracle = eigen_stationary(p);
    for (std::size_t j = 0; j < k; ++j)
      EXPECT_NEAR(r.distribution[j], oracle[j], 1e-8);
    EXPECT_NEAR(std::accumulate(r.distribution.begin(), r.distribution.end(), 0.0),
                1.0, 1e-9);
    EXPECT_LT(fixed_point_residual(p, r.distribution), 1e-10);
  }
}

TEST(Stationary, StructuralGateRejectsPeriodicAndReducible) {
  EXPECT_THROW(stationary(TransitionMatrix(RealMatrix{{0, 1}, {1, 0}})),
               StructuralError);
  EXPECT_THROW(stationary(TransitionMatrix(RealMatrix::identity(3))),
               StructuralError);
}

TEST(Stationary, StructuralGateOnRandomSparseChains) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = random_sparse_matrix(2 + trial % 6, 0.65, rng);
    const bool ok = is_irreducible(p) && is_aperiodic(p);
    if (ok) {
      EXPECT_NO_THROW(stationary(p, {5e-4, 100000}));
    } else {
      EXPECT_THROW(stationary(p), StructuralError);
    }
  }
}

TEST(Stationary, ReportsNonConvergenceWithBestEstimate) {
  const auto r = stationary(ocd_matrix(), {1e-15, 3});
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.power_at_convergence, 3);
  EXPECT_NEAR(std::accumulate(r.distribution.begin(), r.distribution.end(), 0.0),
              1.0, 1e-12);
}

// ---------------------------------------------------------------------------
// inertia

TEST(Inertia, WorkedExample) {
  const auto s =
      inertia(count_transitions(make_sequence("O05", kO05), StateSpace(5)));
  EXPECT_EQ(s.on_diagonal, 4);
  EXPECT_EQ(s.off_diagonal, 11);
  EXPECT_NEAR(s.proportion, 4.0 / 15.0, 1e-12);
}

TEST(Inertia, ConstantAndAlternating) {
  EXPECT_EQ(inertia(count_transitions(make_sequence("c", "22222"), StateSpace(5)))
                .proportion,
            1.0);
  EXPECT_EQ(inertia(count_transitions(make_sequence("a", "12121212"), StateSpace(5)))
                .proportion,
            0.0);
}

TEST(Inertia, EmptyCountsRejected) {
  EXPECT_THROW(inertia(TransitionCounts(5)), ValidationError);
}

TEST(ExpectedInertia, UniformCase) {
  const std::vector<std::int64_t> f{3, 3, 3, 3, 3};
  EXPECT_NEAR(expected_inertia(max_entropy(StateSpace(5)), f), 3.0, 1e-12);
}

TEST(ExpectedInertia, WorkedExampleRowTotals) {
  const auto c = count_transitions(make_sequence("O05", kO05), StateSpace(5));
  const auto f = c.row_totals();
  EXPECT_EQ(f, (std::vector<std::int64_t>{0, 4, 6, 5, 0}));
  EXPECT_NEAR(expected_inertia(normalize_rows(c), f), 4.0, 1e-12);
}

TEST(ExpectedInertia, Identity) {
  const std::vector<std::int64_t> f{1, 1, 1, 1, 1};
  EXPECT_NEAR(expected_inertia(TransitionMatrix(RealMatrix::identity(5)), f), 5.0,
              1e-12);
}

TEST(ExpectedInertia, PositiveTotalOnUndefinedRowRejected) {
  const auto p =
      normalize_rows(count_transitions(make_sequence("O05", kO05), StateSpace(5)));
  const std::vector<std::int64_t> f{1, 4, 6, 5, 0};
  EXPECT_THROW(expected_inertia(p, f), ValidationError);
}

// ---------------------------------------------------------------------------
// Types

TEST(StateSpace, Validation) {
  EXPECT_THROW(StateSpace(1), ValidationError);
  EXPECT_THROW(StateSpace(2, {"a", "a"}), ValidationError);
  EXPECT_THROW(StateSpace(3, {"a", "b"}), ValidationError);
  EXPECT_EQ(StateSpace(3).labels(), (std::vector<std::string>{"1", "2", "3"}));
}

TEST(TransitionMatrixType, RejectsNonStochasticRows) {
  EXPECT_THROW(TransitionMatrix(RealMatrix{{0.5, 0.4}, {0.5, 0.5}}),
               ValidationError);
  EXPECT_THROW(TransitionMatrix(RealMatrix{{1.5, -0.5}, {0.5, 0.5}}),
               ValidationError);
  EXPECT_THROW(TransitionMatrix(RealMatrix{{0.0, 0.0}, {0.5, 0.5}},
                                std::vector<bool>{true, true}),
               ValidationError);
}
