#pragma once

// Scalar linear recurrence x_i = a_i x_{i-1} + u_i with d channels sharing
// one coefficient sequence, its transfer operator L = (I - AZ)^{-1}, and the
// sequential solve every other solver is checked against.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <type_traits>
#include <utility>

#include "swr/numerics.hpp"

namespace swr {

using Index = Eigen::Index;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
/// Time-major n x d storage: one row per step, one column per channel.
template <typename Scalar>
using TimeMajor = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

namespace detail {

template <typename Derived>
void require_finite(const Eigen::DenseBase<Derived>& values, const char* what) {
  if constexpr (std::is_floating_point_v<typename Derived::Scalar>) {
    if (!values.derived().allFinite()) throw DomainError(std::string(what) + " must be finite");
  }
}

}  // namespace detail

/// The coefficients a_1..a_n. Stability is not required; zeros are allowed.
template <typename Scalar>
class CoefficientSequence {
 public:
  explicit CoefficientSequence(Vector<Scalar> a) : a_(std::move(a)) {
    if (a_.size() == 0) throw ShapeError("coefficient sequence is empty");
    detail::require_finite(a_, "coefficients");
  }

  Index size() const { return a_.size(); }
  const Vector<Scalar>& values() const { return a_; }
  Scalar operator[](Index i) const { return a_[i]; }

 private:
  Vector<Scalar> a_;
};

/// Inputs u (n x d) and the initial state x_0 (length d).
template <typename Scalar>
class InputSequence {
 public:
  explicit InputSequence(TimeMajor<Scalar> u)
      : u_(std::move(u)), x0_(RowVector<Scalar>::Zero(u_.cols())) {
    validate();
  }

  InputSequence(TimeMajor<Scalar> u, RowVector<Scalar> x0) : u_(std::move(u)), x0_(std::move(x0)) {
    validate();
  }

  Index length() const { return u_.rows(); }
  Index channels() const { return u_.cols(); }
  const TimeMajor<Scalar>& values() const { return u_; }
  const RowVector<Scalar>& initial_state() const { return x0_; }
  bool has_initial_state() const { return !(x0_.array() == Scalar(0)).all(); }

  /// u with the initial state folded in: u_1 <- u_1 + a_1 x_0.
  TimeMajor<Scalar> folded(const CoefficientSequence<Scalar>& a) const {
    if (a.size() != length()) {
      throw ShapeError("coefficients have length " + std::to_string(a.size()) + " but inputs have " +
                       std::to_string(length()));
    }
    TimeMajor<Scalar> out = u_;
    out.row(0) += a[0] * x0_;
    return out;
  }

 private:
  void validate() const {
    if (u_.rows() == 0 || u_.cols() == 0) throw ShapeError("input sequence is empty");
    if (x0_.size() != u_.cols()) throw ShapeError("initial state width differs from channel count");
    detail::require_finite(u_, "inputs");
    detail::require_finite(x0_, "initial state");
  }

  TimeMajor<Scalar> u_;
  RowVector<Scalar> x0_;
};

template <typename Scalar>
struct StateSequence {
  TimeMajor<Scalar> x;

  Index length() const { return x.rows(); }
  Index channels() const { return x.cols(); }
};

/// Dense lower-triangular operator with L(i, j) = a_{i:j+1}.
template <typename Scalar>
struct TransferOperator {
  Matrix<Scalar> entries;
  bool unit_diagonal = true;

  Index size() const { return entries.rows(); }
};

using Coefficients = CoefficientSequence<double>;
using Inputs = InputSequence<double>;
using States = StateSequence<double>;

/// Down-shift Z^k on R^n: ones on the k-th subdiagonal.
template <typename Scalar>
Matrix<Scalar> shift_matrix(Index n, Index k) {
  Matrix<Scalar> z = Matrix<Scalar>::Zero(n, n);
  for (Index i = k; i < n; ++i) z(i, i - k) = Scalar(1);
  return z;
}

/// The weighted shift AZ.
template <typename Scalar>
Matrix<Scalar> weighted_shift(const CoefficientSequence<Scalar>& a) {
  const Index n = a.size();
  return a.values().asDiagonal() * shift_matrix<Scalar>(n, 1);
}

template <typename Scalar>
StateSequence<Scalar> sequential_solve(const CoefficientSequence<Scalar>& a,
                                       const InputSequence<Scalar>& u) {
  TimeMajor<Scalar> x = u.folded(a);
  for (Index i = 1; i < x.rows(); ++i) x.row(i) += a[i] * x.row(i - 1);
  return {std::move(x)};
}

/// Reference materialization: every entry is its own product a_i ... a_{j+1}.
/// O(n^3); meant for tests and small inspections.
template <typename Scalar>
TransferOperator<Scalar> materialize_transfer_naive(const CoefficientSequence<Scalar>& a) {
  const Index n = a.size();
  Matrix<Scalar> l = Matrix<Scalar>::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j <= i; ++j) {
      Scalar product(1);
      for (Index k = j + 1; k <= i; ++k) product *= a[k];
      l(i, j) = product;
    }
  }
  return {std::move(l), true};
}

/// Column-wise cumulative-product materialization, O(n^2).
template <typename Scalar>
TransferOperator<Scalar> materialize_transfer(const CoefficientSequence<Scalar>& a) {
  const Index n = a.size();
  Matrix<Scalar> l = Matrix<Scalar>::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    l(j, j) = Scalar(1);
    for (Index i = j + 1; i < n; ++i) l(i, j) = l(i - 1, j) * a[i];
  }
  return {std::move(l), true};
}

/// x = L u for inputs without an initial state (there is no a_1 in L to fold
/// x_0 with). Use the three-argument overload otherwise.
template <typename Scalar>
StateSequence<Scalar> apply_transfer(const TransferOperator<Scalar>& l, const InputSequence<Scalar>& u) {
  if (l.size() != u.length()) throw ShapeError("operator size differs from sequence length");
  if (u.has_initial_state()) {
    throw ShapeError("nonzero initial state needs the coefficients to fold; pass them explicitly");
  }
  return {l.entries * u.values()};
}

template <typename Scalar>
StateSequence<Scalar> apply_transfer(const TransferOperator<Scalar>& l, const CoefficientSequence<Scalar>& a,
                                     const InputSequence<Scalar>& u) {
  if (l.size() != u.length()) throw ShapeError("operator size differs from sequence length");
  return {l.entries * u.folded(a)};
}

/// (AZ)^k, supported on the k-th subdiagonal with entries a_{i:i-k+1}.
template <typename Scalar>
Matrix<Scalar> nilpotency_check(const CoefficientSequence<Scalar>& a, Index k) {
  const Index n = a.size();
  if (k < 0 || k > n) throw DomainError("power must lie in [0, n]");
  Matrix<Scalar> m = Matrix<Scalar>::Zero(n, n);
  for (Index i = k; i < n; ++i) {
    Scalar product(1);
    for (Index p = i - k + 1; p <= i; ++p) product *= a[p];
    m(i, i - k) = product;
  }
  return m;
}

/// Smallest m with (AZ)^m = 0: one more than the longest run of nonzero
/// coefficients among a_2..a_n.
template <typename Scalar>
Index nilpotency_index(const CoefficientSequence<Scalar>& a) {
  Index longest = 0;
  Index run = 0;
  for (Index i = 1; i < a.size(); ++i) {
    run = (a[i] != Scalar(0)) ? run + 1 : 0;
    longest = std::max(longest, run);
  }
  return longest + 1;
}

/// max |got - want| / max |want|; zero when both vanish.
template <typename DerivedA, typename DerivedB>
double max_relative_error(const Eigen::MatrixBase<DerivedA>& got, const Eigen::MatrixBase<DerivedB>& want) {
  if (got.rows() != want.rows() || got.cols() != want.cols()) throw ShapeError("shape mismatch in comparison");
  if (!got.template cast<double>().allFinite()) return std::numeric_limits<double>::infinity();
  const double diff = (got.template cast<double>() - want.template cast<double>()).cwiseAbs().maxCoeff();
  const double scale = want.template cast<double>().cwiseAbs().maxCoeff();
  if (scale == 0.0) return diff;
  return diff / scale;
}

}  // namespace swr
