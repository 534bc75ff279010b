#pragma once

// Flat log-depth solvers. Kogge-Stone applies the sparse factors
// I + (AZ)^{2^t} one at a time by recursive doubling; Brent-Kung runs the
// work-efficient upsweep/downsweep network over the affine pair operator
// (v', f') o (v, f) = (v' + f' v, f' f).

#include <vector>

#include "swr/recurrence.hpp"

namespace swr {

/// Work and depth counters. One pair operation updates one (v_i, f_i) slot.
struct ScanStats {
  int stages = 0;
  long long pair_ops = 0;
};

/// F = diag(f) Z^offset. Only f_i with i >= offset (0-based) are meaningful.
template <typename Scalar>
struct ShiftedDiagonal {
  Vector<Scalar> f;
  Index offset = 1;

  Index size() const { return f.size(); }

  Matrix<Scalar> dense() const {
    Matrix<Scalar> m = Matrix<Scalar>::Zero(size(), size());
    for (Index i = offset; i < size(); ++i) m(i, i - offset) = f[i];
    return m;
  }

  /// F^2 = diag(f o shift(f, s)) Z^{2s}.
  ShiftedDiagonal squared() const {
    Vector<Scalar> next = Vector<Scalar>::Zero(size());
    for (Index i = 2 * offset; i < size(); ++i) next[i] = f[i] * f[i - offset];
    return {std::move(next), 2 * offset};
  }
};

inline Index next_power_of_two(Index n) {
  Index p = 1;
  while (p < n) p *= 2;
  return p;
}

inline int ceil_log2(Index n) {
  int stages = 0;
  for (Index p = 1; p < n; p *= 2) ++stages;
  return stages;
}

namespace detail {

template <typename Scalar>
void pad_rows(Vector<Scalar>& f, TimeMajor<Scalar>& v, Index rows) {
  const Index n = f.size();
  if (rows == n) return;
  f.conservativeResize(rows);
  f.tail(rows - n).setZero();
  v.conservativeResize(rows, Eigen::NoChange);
  v.bottomRows(rows - n).setZero();
}

/// Runs at most `max_stages` Kogge-Stone stages on an already-folded input.
/// After stage t, v = sum_{k < 2^(t+1)} (AZ)^k u.
template <typename Scalar>
TimeMajor<Scalar> kogge_stone_stages(Vector<Scalar> f, TimeMajor<Scalar> v, int max_stages,
                                     ScanStats* stats) {
  const Index n = f.size();
  int stage = 0;
  for (Index s = 1; s <= n - 1 && stage < max_stages; s *= 2, ++stage) {
    const Index m = n - s;
    v.bottomRows(m) += (f.tail(m).asDiagonal() * v.topRows(m)).eval();
    f.tail(m) = f.tail(m).cwiseProduct(f.head(m)).eval();
    if (stats) {
      ++stats->stages;
      stats->pair_ops += m;
    }
  }
  return v;
}

}  // namespace detail

template <typename Scalar>
StateSequence<Scalar> kogge_stone_solve(const CoefficientSequence<Scalar>& a, const InputSequence<Scalar>& u,
                                        ScanStats* stats = nullptr) {
  const Index n = a.size();
  Vector<Scalar> f = a.values();
  TimeMajor<Scalar> v = u.folded(a);
  detail::pad_rows(f, v, next_power_of_two(n));
  v = detail::kogge_stone_stages(std::move(f), std::move(v), ceil_log2(n), stats);
  return {v.topRows(n)};
}

/// The factors I + (AZ)^{2^t}, t = 0..log2(n)-1, in application order. Their
/// product (last factor leftmost) is L.
template <typename Scalar>
std::vector<Matrix<Scalar>> kogge_stone_factors(const CoefficientSequence<Scalar>& a) {
  const Index n = a.size();
  if (n < 2 || next_power_of_two(n) != n) throw ShapeError("Kogge-Stone factors need n a power of two >= 2");
  std::vector<Matrix<Scalar>> factors;
  ShiftedDiagonal<Scalar> power{a.values(), 1};
  while (power.offset < n) {
    factors.push_back(Matrix<Scalar>::Identity(n, n) + power.dense());
    power = power.squared();
  }
  return factors;
}

template <typename Scalar>
StateSequence<Scalar> brent_kung_solve(const CoefficientSequence<Scalar>& a, const InputSequence<Scalar>& u,
                                       ScanStats* stats = nullptr) {
  const Index n = a.size();
  const Index padded = next_power_of_two(n);
  Vector<Scalar> f = a.values();
  TimeMajor<Scalar> v = u.folded(a);
  detail::pad_rows(f, v, padded);

  // Slot i absorbs slot j < i: (v_i, f_i) <- (v_i, f_i) o (v_j, f_j).
  auto combine = [&](Index i, Index j) {
    v.row(i) += f[i] * v.row(j);
    f[i] *= f[j];
    if (stats) ++stats->pair_ops;
  };

  for (Index s = 1; s < padded; s *= 2) {
    for (Index i = 2 * s - 1; i < padded; i += 2 * s) combine(i, i - s);
    if (stats) ++stats->stages;
  }
  for (Index s = padded / 4; s >= 1; s /= 2) {
    for (Index i = 3 * s - 1; i < padded; i += 2 * s) combine(i, i - s);
    if (stats) ++stats->stages;
  }
  return {v.topRows(n)};
}

}  // namespace swr
