#include "swr/horizon.hpp"

#include <algorithm>
#include <cmath>

namespace swr {
namespace {

void check_query(const HorizonQuery& q) {
  if (!(q.rho > 0.0 && q.rho < 1.0)) throw DomainError("contraction rho must lie in (0, 1)");
  if (!(q.eps > 0.0) || !std::isfinite(q.eps)) throw DomainError("target accuracy eps must be positive");
  if (!(q.nu > 0.0) || !std::isfinite(q.nu)) throw DomainError("input bound nu must be positive");
}

long long clamp_to_lag(long double k) { return k <= 0.0L ? 0 : static_cast<long long>(k); }

}  // namespace

long long horizon_pointwise(const HorizonQuery& q) {
  check_query(q);
  const long double ratio = std::log(static_cast<long double>(q.eps)) / std::log(static_cast<long double>(q.rho));
  return clamp_to_lag(std::ceil(ratio));
}

long long horizon_tail(const HorizonQuery& q) {
  check_query(q);
  const long double rho = q.rho;
  const long double target = static_cast<long double>(q.eps) * (1.0L - rho);
  return clamp_to_lag(std::ceil(std::log(target) / std::log(rho)) - 1.0L);
}

UnderflowHorizon horizon_underflow(const PrecisionFormat& fmt) {
  fmt.validate();
  const long double ln2 = std::log(2.0L);
  const long double log_rho = std::log1p(-std::ldexp(1.0L, -fmt.mantissa_bits - 1));
  const long double log_normal = static_cast<long double>(fmt.min_exponent()) * ln2;
  const long double log_subnormal = static_cast<long double>(fmt.min_exponent() - fmt.mantissa_bits) * ln2;
  return {clamp_to_lag(std::floor(log_normal / log_rho)), clamp_to_lag(std::floor(log_subnormal / log_rho))};
}

HorizonResult evaluate_horizon(const HorizonQuery& q) {
  HorizonResult result;
  result.k_pointwise = horizon_pointwise(q);
  result.k_tail = horizon_tail(q);
  if (q.format) result.underflow = horizon_underflow(*q.format);
  result.tail_error_bound = geometric_tail_bound(q.rho, q.nu, result.k_tail);
  return result;
}

double geometric_tail_bound(double rho, double nu, long long retained_lag) {
  if (!(rho >= 0.0 && rho < 1.0)) throw DomainError("tail bound needs 0 <= rho < 1");
  if (rho == 0.0) return 0.0;
  return nu * std::pow(rho, static_cast<double>(retained_lag + 1)) / (1.0 - rho);
}

}  // namespace swr
