#include <gtest/gtest.h>

#include "oracles.hpp"
#include "swr/recurrence.hpp"

using namespace swr;

namespace {

Vector<double> random_vector(SeededRng& rng, Index n, double lo, double hi) {
  Vector<double> v(n);
  for (Index i = 0; i < n; ++i) v[i] = rng.uniform(lo, hi);
  return v;
}

TimeMajor<double> random_inputs(SeededRng& rng, Index n, Index d) {
  TimeMajor<double> u(n, d);
  for (Index i = 0; i < n; ++i) {
    for (Index c = 0; c < d; ++c) u(i, c) = rng.uniform(-1.0, 1.0);
  }
  return u;
}

TimeMajor<double> column(std::initializer_list<double> values) {
  TimeMajor<double> u(static_cast<Index>(values.size()), 1);
  Index i = 0;
  for (double v : values) u(i++, 0) = v;
  return u;
}

}  // namespace

TEST(Sequences, RejectEmptyAndNonFinite) {
  EXPECT_THROW(Coefficients(Vector<double>()), ShapeError);
  Vector<double> a(2);
  a << 0.5, NAN;
  EXPECT_THROW(Coefficients{a}, DomainError);
  EXPECT_THROW(Inputs(TimeMajor<double>(0, 1)), ShapeError);
  EXPECT_THROW(Inputs(TimeMajor<double>::Zero(3, 2), RowVector<double>::Zero(3)), ShapeError);
}

TEST(SequentialSolve, HalfDecayExample) {
  Vector<double> a = Vector<double>::Constant(4, 0.5);
  const States x = sequential_solve(Coefficients(a), Inputs(column({1, 1, 1, 1})));
  EXPECT_EQ(x.x(0, 0), 1.0);
  EXPECT_EQ(x.x(1, 0), 1.5);
  EXPECT_EQ(x.x(2, 0), 1.75);
  EXPECT_EQ(x.x(3, 0), 1.875);
}

TEST(SequentialSolve, ZeroCoefficientsPassInputsThrough) {
  SeededRng rng(1);
  const TimeMajor<double> u = random_inputs(rng, 10, 3);
  const States x = sequential_solve(Coefficients(Vector<double>::Zero(10)), Inputs(u, RowVector<double>::Ones(3)));
  EXPECT_EQ(x.x, u);
}

TEST(SequentialSolve, UnitCoefficientsArePrefixSums) {
  SeededRng rng(2);
  const TimeMajor<double> u = random_inputs(rng, 12, 2);
  const States x = sequential_solve(Coefficients(Vector<double>::Ones(12)), Inputs(u));
  TimeMajor<double> sums = u;
  for (Index i = 1; i < 12; ++i) sums.row(i) += sums.row(i - 1);
  EXPECT_EQ(x.x, sums);
}

TEST(SequentialSolve, InitialStateFold) {
  SeededRng rng(3);
  const Vector<double> a = random_vector(rng, 20, -1.5, 1.5);
  const TimeMajor<double> u = random_inputs(rng, 20, 4);
  const RowVector<double> x0 = RowVector<double>::LinSpaced(4, -1.0, 2.0);
  const States x = sequential_solve(Coefficients(a), Inputs(u, x0));
  EXPECT_LE(max_relative_error(x.x, oracle::recurrence(a, u, x0)), 1e-15);
}

TEST(SequentialSolve, LengthMismatchThrows) {
  EXPECT_THROW(sequential_solve(Coefficients(Vector<double>::Ones(3)), Inputs(TimeMajor<double>::Ones(4, 1))),
               ShapeError);
}

TEST(Transfer, NaiveEntriesArePathProducts) {
  Vector<double> a(4);
  a << 9.0, 2.0, 3.0, 5.0;
  const TransferOperator<double> l = materialize_transfer_naive(Coefficients(a));
  Matrix<double> want(4, 4);
  want << 1, 0, 0, 0,  //
      2, 1, 0, 0,      //
      6, 3, 1, 0,      //
      30, 15, 5, 1;
  EXPECT_EQ(l.entries, want);
  EXPECT_TRUE(l.unit_diagonal);
}

TEST(Transfer, ConstantCoefficientsAreGeometric) {
  const double rho = 0.75;
  const TransferOperator<double> l = materialize_transfer_naive(Coefficients(Vector<double>::Constant(8, rho)));
  for (Index i = 0; i < 8; ++i) {
    for (Index j = 0; j < 8; ++j) {
      EXPECT_DOUBLE_EQ(l.entries(i, j), i >= j ? std::pow(rho, static_cast<double>(i - j)) : 0.0);
    }
  }
}

TEST(Transfer, CumprodAgreesWithNaiveAndNeumann) {
  SeededRng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector<double> a = random_vector(rng, 17, -2.0, 2.0);
    const Coefficients c(a);
    const Matrix<double> naive = materialize_transfer_naive(c).entries;
    EXPECT_LE(max_relative_error(materialize_transfer(c).entries, naive), 1e-14);
    EXPECT_LE(max_relative_error(oracle::neumann_series(a), naive), 1e-13);
  }
}

TEST(Transfer, InvertsIdentityMinusWeightedShift) {
  SeededRng rng(5);
  const Vector<double> a = random_vector(rng, 12, -1.0, 1.0);
  const Coefficients c(a);
  const Matrix<double> l = materialize_transfer(c).entries;
  const Matrix<double> system = Matrix<double>::Identity(12, 12) - weighted_shift(c);
  EXPECT_LE((system * l - Matrix<double>::Identity(12, 12)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Transfer, ApplyMatchesSequential) {
  SeededRng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector<double> a = random_vector(rng, 33, 0.0, 1.0);
    const TimeMajor<double> u = random_inputs(rng, 33, 3);
    const RowVector<double> x0 = RowVector<double>::Constant(3, 0.5);
    const Coefficients c(a);
    const TransferOperator<double> l = materialize_transfer(c);
    EXPECT_LE(max_relative_error(apply_transfer(l, Inputs(u)).x, sequential_solve(c, Inputs(u)).x), 1e-14);
    EXPECT_LE(max_relative_error(apply_transfer(l, c, Inputs(u, x0)).x, sequential_solve(c, Inputs(u, x0)).x),
              1e-14);
    EXPECT_THROW(apply_transfer(l, Inputs(u, x0)), ShapeError);
  }
}

TEST(Nilpotency, PowersMatchBruteForceInIntegers) {
  SeededRng rng(7);
  for (Index n : {2, 4, 8, 16}) {
    Vector<long long> a(n);
    for (Index i = 0; i < n; ++i) a[i] = static_cast<long long>(rng.next_u64() % 5) - 2;
    const CoefficientSequence<long long> c(a);
    const auto m = oracle::weighted_shift(a);
    for (int k = 0; k <= n; ++k) EXPECT_EQ(nilpotency_check(c, k), oracle::matrix_power(m, k)) << n << ' ' << k;
    EXPECT_TRUE(nilpotency_check(c, n).isZero());
  }
}

TEST(Nilpotency, CornerEntryOfPowerNMinusOne) {
  Vector<long long> a(5);
  a << 7, 2, 3, -1, 4;
  const auto m = nilpotency_check(CoefficientSequence<long long>(a), 4);
  EXPECT_EQ(m(4, 0), 2 * 3 * -1 * 4);
  EXPECT_EQ(m.cwiseAbs().sum(), 24);
}

TEST(Nilpotency, IndexIsLongestRunPlusOne) {
  SeededRng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const Index n = 1 + static_cast<Index>(rng.next_u64() % 12);
    Vector<long long> a(n);
    for (Index i = 0; i < n; ++i) a[i] = (rng.next_unit() < 0.3) ? 0 : 1 + static_cast<long long>(rng.next_u64() % 3);
    const auto m = oracle::weighted_shift(a);
    int brute = 0;
    while (!oracle::matrix_power(m, brute).isZero()) ++brute;
    EXPECT_EQ(nilpotency_index(CoefficientSequence<long long>(a)), brute);
  }
}

TEST(Nilpotency, RejectsPowerOutOfRange) {
  const Coefficients c(Vector<double>::Ones(3));
  EXPECT_THROW(nilpotency_check(c, 4), DomainError);
  EXPECT_THROW(nilpotency_check(c, -1), DomainError);
}

TEST(Nilpotency, ShiftActsAsWeightedShift) {
  // (AZ) x shifts x down by one and scales entry i by a_i.
  SeededRng rng(9);
  const Vector<double> a = random_vector(rng, 9, -1.0, 1.0);
  const Vector<double> x = random_vector(rng, 9, -1.0, 1.0);
  const Vector<double> y = weighted_shift(Coefficients(a)) * x;
  EXPECT_EQ(y[0], 0.0);
  for (Index i = 1; i < 9; ++i) EXPECT_EQ(y[i], a[i] * x[i - 1]);
}

TEST(RelativeError, Conventions) {
  Matrix<double> want(1, 2);
  want << 2.0, -4.0;
  Matrix<double> got(1, 2);
  got << 2.0, -3.0;
  EXPECT_DOUBLE_EQ(max_relative_error(got, want), 0.25);
  EXPECT_EQ(max_relative_error(Matrix<double>::Zero(1, 2), Matrix<double>::Zero(1, 2)), 0.0);
  got(0, 0) = NAN;
  EXPECT_TRUE(std::isinf(max_relative_error(got, want)));
}
