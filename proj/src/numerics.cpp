#include "swr/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace swr {

PrecisionFormat PrecisionFormat::fp64() { return {52, 11, 1023, true, "fp64"}; }
PrecisionFormat PrecisionFormat::fp32() { return {23, 8, 127, true, "fp32"}; }
PrecisionFormat PrecisionFormat::fp16() { return {10, 5, 15, true, "fp16"}; }
PrecisionFormat PrecisionFormat::bf16() { return {7, 8, 127, true, "bf16"}; }
PrecisionFormat PrecisionFormat::fp8e4m3() { return {3, 4, 7, true, "fp8e4m3"}; }
PrecisionFormat PrecisionFormat::fp8e5m2() { return {2, 5, 15, true, "fp8e5m2"}; }

std::vector<std::string> PrecisionFormat::preset_names() {
  return {"fp32", "fp16", "bf16", "fp8e5m2", "fp8e4m3", "fp64"};
}

PrecisionFormat PrecisionFormat::from_name(std::string_view name) {
  if (name == "fp64") return fp64();
  if (name == "fp32") return fp32();
  if (name == "fp16") return fp16();
  if (name == "bf16") return bf16();
  if (name == "fp8e4m3") return fp8e4m3();
  if (name == "fp8e5m2") return fp8e5m2();
  throw DomainError("unknown precision format '" + std::string(name) + "'");
}

double PrecisionFormat::smallest_normal() const { return std::ldexp(1.0, min_exponent()); }

double PrecisionFormat::smallest_subnormal() const {
  return std::ldexp(1.0, min_exponent() - mantissa_bits);
}

double PrecisionFormat::largest_finite() const {
  return std::ldexp(2.0 - std::ldexp(1.0, -mantissa_bits), max_exponent());
}

void PrecisionFormat::validate() const {
  if (mantissa_bits < 1 || exponent_bits < 2) {
    throw DomainError("precision format '" + name + "' needs p >= 1 and e >= 2");
  }
  if (mantissa_bits > 52 || max_exponent() > 1023 || min_exponent() - mantissa_bits < -1074) {
    throw DomainError("precision format '" + name + "' is wider than fp64");
  }
}

PrecisionFormat PrecisionFormat::without_subnormals() const {
  PrecisionFormat copy = *this;
  copy.subnormals_enabled = false;
  copy.name += "-ftz";
  return copy;
}

bool operator==(const PrecisionFormat& lhs, const PrecisionFormat& rhs) {
  return lhs.mantissa_bits == rhs.mantissa_bits && lhs.exponent_bits == rhs.exponent_bits &&
         lhs.bias == rhs.bias && lhs.subnormals_enabled == rhs.subnormals_enabled;
}

double quantize(double x, const PrecisionFormat& fmt) {
  if (!std::isfinite(x) || x == 0.0) return x;
  const double magnitude = std::fabs(x);
  if (!fmt.subnormals_enabled && magnitude < fmt.smallest_normal()) return std::copysign(0.0, x);

  int binade = 0;
  std::frexp(magnitude, &binade);
  // magnitude lies in [2^(binade-1), 2^binade); subnormals share the
  // quantum of the lowest normal binade.
  const int exponent = std::max(binade - 1, fmt.min_exponent());
  const int quantum = exponent - fmt.mantissa_bits;
  double rounded = std::ldexp(std::nearbyint(std::ldexp(magnitude, -quantum)), quantum);
  if (rounded > fmt.largest_finite()) rounded = std::numeric_limits<double>::infinity();
  return std::copysign(rounded, x);
}

double max_representable_contraction(const PrecisionFormat& fmt) {
  return 1.0 - std::ldexp(1.0, -fmt.mantissa_bits - 1);
}

Rounding Rounding::emulate(const PrecisionFormat& fmt) {
  const PrecisionFormat single = PrecisionFormat::fp32();
  return {fmt, fmt.mantissa_bits >= single.mantissa_bits ? fmt : single};
}

std::uint64_t SeededRng::next_u64() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double SeededRng::next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double SeededRng::uniform(double lo, double hi) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw DomainError("uniform draw needs a finite interval with lo < hi");
  }
  const double value = lo + (hi - lo) * next_unit();
  return value < hi ? value : std::nextafter(hi, lo);
}

TolerancePolicy::TolerancePolicy(double rel, double abs) : rel_tol(rel), abs_tol(abs) {
  if (!(rel >= 0.0) || !(abs >= 0.0)) throw DomainError("tolerances must be non-negative");
}

}  // namespace swr
