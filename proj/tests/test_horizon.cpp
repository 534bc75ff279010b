#include <gtest/gtest.h>

#include "oracles.hpp"
#include "swr/horizon.hpp"

using namespace swr;

TEST(HorizonPointwise, Examples) {
  EXPECT_EQ(horizon_pointwise({0.5, 1e-4, 1.0, std::nullopt}), 14);
  EXPECT_EQ(horizon_pointwise({0.9, 1e-3, 1.0, std::nullopt}), 66);
  for (double rho : {0.01, 0.5, 0.999}) EXPECT_EQ(horizon_pointwise({rho, 1.0, 1.0, std::nullopt}), 0);
}

TEST(HorizonPointwise, MatchesDirectSearch) {
  SeededRng rng(40);
  for (int i = 0; i < 2000; ++i) {
    const double rho = rng.uniform(0.05, 0.995);
    const double eps = std::pow(10.0, rng.uniform(-12.0, -0.01));
    EXPECT_EQ(horizon_pointwise({rho, eps, 1.0, std::nullopt}), oracle::pointwise_search(rho, eps))
        << rho << ' ' << eps;
  }
}

TEST(HorizonTail, Examples) {
  EXPECT_EQ(horizon_tail({0.5, 1e-4, 1.0, std::nullopt}), 14);
  EXPECT_EQ(horizon_tail({0.5, 1.0, 1.0, std::nullopt}), 0);
  // eps (1 - rho) >= 1: the whole tail is already below eps.
  EXPECT_EQ(horizon_tail({0.2, 2.0, 1.0, std::nullopt}), 0);
  const long long k = horizon_tail({0.9375, std::ldexp(1.0, -6), 1.0, std::nullopt});
  EXPECT_EQ(k, oracle::tail_search(0.9375, std::ldexp(1.0, -6)));
  EXPECT_EQ(k, 107);
}

TEST(HorizonTail, MatchesDirectTailSummation) {
  SeededRng rng(41);
  for (int i = 0; i < 500; ++i) {
    const double rho = rng.uniform(0.05, 0.98);
    const double eps = std::pow(10.0, rng.uniform(-10.0, 0.0));
    EXPECT_EQ(horizon_tail({rho, eps, 1.0, std::nullopt}), oracle::tail_search(rho, eps)) << rho << ' ' << eps;
  }
}

TEST(HorizonTail, NuOnlyScalesTheBound) {
  const HorizonResult a = evaluate_horizon({0.8, 1e-6, 1.0, std::nullopt});
  const HorizonResult b = evaluate_horizon({0.8, 1e-6, 4.0, std::nullopt});
  EXPECT_EQ(a.k_tail, b.k_tail);
  EXPECT_DOUBLE_EQ(b.tail_error_bound, 4.0 * a.tail_error_bound);
  EXPECT_LT(a.tail_error_bound, 1e-6);
}

TEST(Horizon, DomainViolationsThrow) {
  EXPECT_THROW(horizon_pointwise({1.0, 1e-3, 1.0, std::nullopt}), DomainError);
  EXPECT_THROW(horizon_pointwise({0.0, 1e-3, 1.0, std::nullopt}), DomainError);
  EXPECT_THROW(horizon_tail({0.5, 0.0, 1.0, std::nullopt}), DomainError);
  EXPECT_THROW(horizon_tail({0.5, 1e-3, 0.0, std::nullopt}), DomainError);
  EXPECT_THROW(geometric_tail_bound(1.0, 1.0, 3), DomainError);
  EXPECT_EQ(geometric_tail_bound(0.0, 1.0, 3), 0.0);
}

TEST(HorizonUnderflow, ReproducesFormatTable) {
  struct Row {
    PrecisionFormat f;
    long long normal, subnormal;
  };
  for (const Row& r : {Row{PrecisionFormat::fp32(), 1465264032, 1732732863},
                       Row{PrecisionFormat::fp16(), 19869, 34061}, Row{PrecisionFormat::bf16(), 22314, 23554},
                       Row{PrecisionFormat::fp8e5m2(), 72, 83}, Row{PrecisionFormat::fp8e4m3(), 64, 96}}) {
    const UnderflowHorizon k = horizon_underflow(r.f);
    EXPECT_EQ(k.k_normal, r.normal) << r.f.name;
    EXPECT_EQ(k.k_subnormal, r.subnormal) << r.f.name;
  }
}

TEST(HorizonUnderflow, MatchesPowlSearch) {
  for (const auto& name : PrecisionFormat::preset_names()) {
    const auto f = PrecisionFormat::from_name(name);
    if (f.mantissa_bits > 30) continue;
    const UnderflowHorizon k = horizon_underflow(f);
    EXPECT_EQ(k.k_normal, oracle::underflow_search(f.mantissa_bits, f.min_exponent())) << name;
    EXPECT_EQ(k.k_subnormal, oracle::underflow_search(f.mantissa_bits, f.min_exponent() - f.mantissa_bits)) << name;
  }
}

TEST(HorizonUnderflow, IteratedProductInFormatLastsThatLong) {
  // Repeated multiplication, carried in long double, for a small format.
  const auto f = PrecisionFormat::fp8e5m2();
  const double rho = max_representable_contraction(f);
  long double p = 1.0L;
  long long k = 0;
  while (p * rho >= f.smallest_normal()) {
    p *= rho;
    ++k;
  }
  EXPECT_EQ(k, horizon_underflow(f).k_normal);
}
