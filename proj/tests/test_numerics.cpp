#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

#include "oracles.hpp"
#include "swr/numerics.hpp"

using namespace swr;

namespace {

double random_double(SeededRng& rng, int min_exp, int max_exp) {
  const double mant = 1.0 + rng.next_unit();
  const int e = min_exp + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(max_exp - min_exp + 1));
  const double sign = (rng.next_u64() & 1u) ? -1.0 : 1.0;
  return sign * std::ldexp(mant, e);
}

std::uint64_t bits_of(double x) { return std::bit_cast<std::uint64_t>(x); }

}  // namespace

TEST(PrecisionFormat, PresetsCarryTableTriples) {
  struct Row {
    PrecisionFormat f;
    int p, e, bias;
  };
  for (const Row& r : {Row{PrecisionFormat::fp32(), 23, 8, 127}, Row{PrecisionFormat::fp16(), 10, 5, 15},
                       Row{PrecisionFormat::bf16(), 7, 8, 127}, Row{PrecisionFormat::fp8e4m3(), 3, 4, 7},
                       Row{PrecisionFormat::fp8e5m2(), 2, 5, 15}}) {
    EXPECT_EQ(r.f.mantissa_bits, r.p) << r.f.name;
    EXPECT_EQ(r.f.exponent_bits, r.e) << r.f.name;
    EXPECT_EQ(r.f.bias, r.bias) << r.f.name;
    EXPECT_EQ(r.f.smallest_normal(), std::ldexp(1.0, 1 - r.bias));
    EXPECT_EQ(r.f.smallest_subnormal(), std::ldexp(1.0, 1 - r.bias - r.p));
    EXPECT_EQ(PrecisionFormat::from_name(r.f.name), r.f);
  }
}

TEST(PrecisionFormat, LargestFiniteMatchesNativeTypes) {
  EXPECT_EQ(PrecisionFormat::fp32().largest_finite(), static_cast<double>(std::numeric_limits<float>::max()));
  EXPECT_EQ(PrecisionFormat::fp64().largest_finite(), std::numeric_limits<double>::max());
  EXPECT_EQ(PrecisionFormat::fp16().largest_finite(), 65504.0);
  EXPECT_EQ(PrecisionFormat::fp8e5m2().largest_finite(), 57344.0);
}

TEST(PrecisionFormat, RejectsInvalidAndUnknown) {
  PrecisionFormat bad = PrecisionFormat::bf16();
  bad.mantissa_bits = 0;
  EXPECT_THROW(bad.validate(), DomainError);
  bad = PrecisionFormat::bf16();
  bad.exponent_bits = 1;
  EXPECT_THROW(bad.validate(), DomainError);
  EXPECT_THROW(PrecisionFormat::from_name("fp12"), DomainError);
}

TEST(MaxContraction, TableValues) {
  EXPECT_EQ(max_representable_contraction(PrecisionFormat::bf16()), 0.99609375);
  EXPECT_EQ(max_representable_contraction(PrecisionFormat::fp8e5m2()), 0.875);
  EXPECT_EQ(max_representable_contraction(PrecisionFormat::fp16()), 0.99951171875);
}

TEST(MaxContraction, IsRepresentableAndBelowOne) {
  for (const auto& name : PrecisionFormat::preset_names()) {
    const auto f = PrecisionFormat::from_name(name);
    const double rho = max_representable_contraction(f);
    EXPECT_LT(rho, 1.0);
    EXPECT_EQ(quantize(rho, f), rho) << name;
  }
}

TEST(Quantize, Examples) {
  const auto bf16 = PrecisionFormat::bf16();
  EXPECT_EQ(quantize(0.0, bf16), 0.0);
  // 1 - 2^-9 sits exactly between 1 - 2^-8 (odd significand) and 1 (even).
  EXPECT_EQ(quantize(1.0 - std::ldexp(1.0, -9), bf16), 1.0);
  EXPECT_EQ(quantize(1.0 - std::ldexp(1.0, -9) - std::ldexp(1.0, -30), bf16), 1.0 - std::ldexp(1.0, -8));
  EXPECT_EQ(quantize(std::ldexp(1.0, -150), PrecisionFormat::fp32()), 0.0);
  EXPECT_EQ(quantize(std::ldexp(1.0, -149), PrecisionFormat::fp32()), std::ldexp(1.0, -149));
}

TEST(Quantize, TieCheckedAgainstEnumeration) {
  const oracle::Bf16Table table;
  const double x = 1.0 - std::ldexp(1.0, -9);
  EXPECT_EQ(quantize(x, PrecisionFormat::bf16()), table.nearest(x));
}

TEST(Quantize, SpecialValues) {
  const auto fp16 = PrecisionFormat::fp16();
  EXPECT_TRUE(std::isnan(quantize(std::nan(""), fp16)));
  EXPECT_EQ(quantize(INFINITY, fp16), INFINITY);
  EXPECT_EQ(quantize(-INFINITY, fp16), -INFINITY);
  EXPECT_EQ(quantize(65519.0, fp16), 65504.0);
  EXPECT_EQ(quantize(65520.0, fp16), INFINITY);  // tie above max rounds to the 2^16 overflow
  EXPECT_EQ(quantize(-1e9, fp16), -INFINITY);
  EXPECT_TRUE(std::signbit(quantize(-std::ldexp(1.0, -30), fp16)));
  EXPECT_EQ(quantize(-std::ldexp(1.0, -30), fp16), 0.0);
}

TEST(Quantize, FlushToZeroWithoutSubnormals) {
  const auto ftz = PrecisionFormat::fp32().without_subnormals();
  EXPECT_EQ(quantize(std::ldexp(1.0, -130), ftz), 0.0);
  EXPECT_TRUE(std::signbit(quantize(-std::ldexp(1.0, -130), ftz)));
  EXPECT_EQ(quantize(std::ldexp(1.0, -126), ftz), std::ldexp(1.0, -126));
  EXPECT_EQ(quantize(std::ldexp(1.0, -130), PrecisionFormat::fp32()), std::ldexp(1.0, -130));
}

TEST(Quantize, Fp32MatchesNativeRoundingOnAMillionDoubles) {
  SeededRng rng(2024);
  const auto fp32 = PrecisionFormat::fp32();
  long long mismatches = 0;
  for (int i = 0; i < 1000000; ++i) {
    // Exponents from deep below the subnormal range up to just under the max.
    const double x = random_double(rng, -160, 126);
    if (bits_of(quantize(x, fp32)) != bits_of(oracle::via_float(x))) ++mismatches;
  }
  EXPECT_EQ(mismatches, 0);
}

TEST(Quantize, Fp32HalfwayCasesMatchNative) {
  SeededRng rng(5);
  const auto fp32 = PrecisionFormat::fp32();
  for (int i = 0; i < 20000; ++i) {
    // A float plus exactly half of its ulp.
    const float f = static_cast<float>(random_double(rng, -140, 120));
    const double next = static_cast<double>(std::nextafter(f, INFINITY));
    const double mid = 0.5 * (static_cast<double>(f) + next);
    ASSERT_EQ(bits_of(quantize(mid, fp32)), bits_of(oracle::via_float(mid))) << mid;
  }
}

TEST(Quantize, Bf16MatchesEnumeration) {
  const oracle::Bf16Table table;
  SeededRng rng(11);
  const auto bf16 = PrecisionFormat::bf16();
  for (int i = 0; i < 100000; ++i) {
    const double x = random_double(rng, -135, 127);
    ASSERT_EQ(quantize(x, bf16), table.nearest(x)) << x;
  }
}

TEST(Quantize, IdempotentAndMonotone) {
  SeededRng rng(3);
  for (const auto& name : PrecisionFormat::preset_names()) {
    const auto f = PrecisionFormat::from_name(name);
    for (int i = 0; i < 20000; ++i) {
      const double x = random_double(rng, f.min_exponent() - f.mantissa_bits - 3, f.max_exponent() + 1);
      const double y = random_double(rng, f.min_exponent() - f.mantissa_bits - 3, f.max_exponent() + 1);
      const double qx = quantize(x, f);
      ASSERT_EQ(bits_of(quantize(qx, f)), bits_of(qx)) << name << ' ' << x;
      const double lo = std::min(x, y);
      const double hi = std::max(x, y);
      ASSERT_LE(quantize(lo, f), quantize(hi, f)) << name << ' ' << lo << ' ' << hi;
    }
  }
}

TEST(Rounding, EmulateAccumulatesInAtLeastFp32) {
  const Rounding r = Rounding::emulate(PrecisionFormat::bf16());
  ASSERT_TRUE(r.accumulate.has_value());
  EXPECT_EQ(*r.accumulate, PrecisionFormat::fp32());
  const Rounding wide = Rounding::emulate(PrecisionFormat::fp64());
  EXPECT_EQ(*wide.accumulate, PrecisionFormat::fp64());
  EXPECT_EQ(Rounding::exact()(0.1), 0.1);
  EXPECT_EQ(r(1.0 + std::ldexp(1.0, -10)), 1.0);
}

TEST(SeededRng, MatchesSplitMixReference) {
  SeededRng rng(0);
  for (std::uint64_t expected : oracle::kSplitMixSeed0) EXPECT_EQ(rng.next_u64(), expected);
}

TEST(SeededRng, FirstUnitDraw) {
  SeededRng rng(0);
  EXPECT_EQ(rng.next_unit(), 0.8833108082136426);
}

TEST(SeededRng, DeterministicPerSeed) {
  SeededRng a(42);
  SeededRng b(42);
  SeededRng c(43);
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const double x = a.uniform(-2.0, 3.0);
    EXPECT_EQ(x, b.uniform(-2.0, 3.0));
    EXPECT_GE(x, -2.0);
    EXPECT_LT(x, 3.0);
    differs = differs || x != c.uniform(-2.0, 3.0);
  }
  EXPECT_TRUE(differs);
}

TEST(SeededRng, EmptyIntervalThrows) {
  SeededRng rng(1);
  EXPECT_THROW(rng.uniform(1.0, 1.0), DomainError);
  EXPECT_THROW(rng.uniform(2.0, 1.0), DomainError);
}

TEST(TolerancePolicy, AcceptsAndValidates) {
  const TolerancePolicy tol(1e-6, 1e-12);
  EXPECT_TRUE(tol.accepts(1e-7, 1.0));
  EXPECT_FALSE(tol.accepts(1e-5, 1.0));
  EXPECT_TRUE(tol.accepts(1e-13, 0.0));
  EXPECT_THROW(TolerancePolicy(-1.0, 0.0), DomainError);
  EXPECT_THROW(TolerancePolicy(0.0, -1.0), DomainError);
}
