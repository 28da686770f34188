#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "respchain/error.hpp"

namespace respchain {

/// Dense row-major square matrix. Indices are 0-based.
template <typename T> class SquareMatrix {
public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n, T fill = T{})
      : n_(n), data_(n * n, fill) {}

  /// Builds from nested rows; every row must have as many entries as there
  /// are rows.
  SquareMatrix(std::initializer_list<std::initializer_list<T>> rows)
      : n_(rows.size()), data_() {
    data_.reserve(n_ * n_);
    for (const auto &row : rows) {
      if (row.size() != n_)
        throw ValidationError("square matrix: ragged row");
      data_.insert(data_.end(), row.begin(), row.end());
    }
  }

  static SquareMatrix identity(std::size_t n) {
    SquareMatrix m(n);
    for (std::size_t i = 0; i < n; ++i)
      m(i, i) = T{1};
    return m;
  }

  std::size_t size() const noexcept { return n_; }

  T &operator()(std::size_t i, std::size_t j) {
    assert(i < n_ && j < n_);
    return data_[i * n_ + j];
  }
  const T &operator()(std::size_t i, std::size_t j) const {
    assert(i < n_ && j < n_);
    return data_[i * n_ + j];
  }

  std::span<T> row(std::size_t i) { return {data_.data() + i * n_, n_}; }
  std::span<const T> row(std::size_t i) const {
    return {data_.data() + i * n_, n_};
  }

  T row_sum(std::size_t i) const {
    T s{};
    for (const T &v : row(i))
      s += v;
    return s;
  }

  std::span<const T> data() const noexcept { return data_; }

  friend bool operator==(const SquareMatrix &, const SquareMatrix &) = default;

private:
  std::size_t n_ = 0;
  std::vector<T> data_;
};

using RealMatrix = SquareMatrix<double>;

inline RealMatrix multiply(const RealMatrix &a, const RealMatrix &b) {
  if (a.size() != b.size())
    throw ValidationError("multiply: dimension mismatch");
  const std::size_t n = a.size();
  RealMatrix out(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0)
        continue;
      for (std::size_t j = 0; j < n; ++j)
        out(i, j) += aik * b(k, j);
    }
  return out;
}

inline double max_abs_difference(const RealMatrix &a, const RealMatrix &b) {
  if (a.size() != b.size())
    throw ValidationError("max_abs_difference: dimension mismatch");
  double worst = 0.0;
  auto lhs = a.data();
  auto rhs = b.data();
  for (std::size_t i = 0; i < lhs.size(); ++i)
    worst = std::max(worst, std::abs(lhs[i] - rhs[i]));
  return worst;
}

} // namespace respchain
