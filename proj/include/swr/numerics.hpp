#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace swr {

/// Thrown when sequence lengths, channel counts or block shapes disagree.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a scalar argument lies outside an operation's domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A binary floating-point format with `mantissa_bits` stored fraction bits,
/// `exponent_bits` exponent bits and the given bias. The all-ones exponent is
/// reserved for inf/NaN, so the largest finite value is
/// (2 - 2^-p) * 2^(2^e - 2 - bias).
///
/// Values are carried in `double`; a format only describes rounding.
struct PrecisionFormat {
  int mantissa_bits = 52;
  int exponent_bits = 11;
  int bias = 1023;
  bool subnormals_enabled = true;
  std::string name = "fp64";

  static PrecisionFormat fp64();
  static PrecisionFormat fp32();
  static PrecisionFormat fp16();
  static PrecisionFormat bf16();
  static PrecisionFormat fp8e4m3();
  static PrecisionFormat fp8e5m2();

  /// Looks a preset up by name ("fp64", "fp32", "fp16", "bf16", "fp8e4m3",
  /// "fp8e5m2"). Throws DomainError for unknown names.
  static PrecisionFormat from_name(std::string_view name);
  static std::vector<std::string> preset_names();

  int min_exponent() const { return 1 - bias; }
  int max_exponent() const { return (1 << exponent_bits) - 2 - bias; }
  double smallest_normal() const;
  double smallest_subnormal() const;
  double largest_finite() const;

  /// Throws DomainError unless p >= 1 and e >= 2.
  void validate() const;

  PrecisionFormat without_subnormals() const;
};

bool operator==(const PrecisionFormat& lhs, const PrecisionFormat& rhs);

/// Rounds `x` to the nearest value representable in `fmt` (ties to even).
/// Overflow goes to +-inf, results below the subnormal range become signed
/// zero, and NaN propagates.
double quantize(double x, const PrecisionFormat& fmt);

/// Largest value below one that `fmt` can represent: 1 - 2^(-p-1).
double max_representable_contraction(const PrecisionFormat& fmt);

/// Per-operation rounding used by emulated arithmetic. An empty storage
/// format means plain fp64. Reductions (sums of products) round to
/// `accumulate` before the final store.
struct Rounding {
  std::optional<PrecisionFormat> storage;
  std::optional<PrecisionFormat> accumulate;

  static Rounding exact() { return {}; }
  /// Storage in `fmt`, accumulation in whichever of `fmt` and fp32 is wider.
  static Rounding emulate(const PrecisionFormat& fmt);

  double operator()(double x) const { return storage ? quantize(x, *storage) : x; }
  double acc(double x) const { return accumulate ? quantize(x, *accumulate) : x; }
};

/// SplitMix64 generator. Streams are reproducible across implementations.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed = 0) : state_(seed) {}

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double next_unit();
  /// Uniform in [lo, hi). Throws DomainError unless lo < hi.
  double uniform(double lo, double hi);

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

struct TolerancePolicy {
  double rel_tol = 1e-12;
  double abs_tol = 0.0;

  TolerancePolicy() = default;
  TolerancePolicy(double rel, double abs);

  bool accepts(double error, double scale) const { return error <= abs_tol + rel_tol * scale; }
};

}  // namespace swr
