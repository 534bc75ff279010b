#pragma once

// Computational horizon of a contractive recurrence: how many lags matter
// for a target accuracy, and how many a floating format can represent at all.

#include <optional>
#include <vector>

#include "swr/numerics.hpp"

namespace swr {

struct HorizonQuery {
  double rho = 0.5;  // contraction, 0 < rho < 1
  double eps = 1e-4; // relative target accuracy, > 0
  double nu = 1.0;   // input bound, > 0
  std::optional<PrecisionFormat> format;
};

struct UnderflowHorizon {
  long long k_normal = 0;
  long long k_subnormal = 0;
};

struct HorizonResult {
  long long k_pointwise = 0;
  long long k_tail = 0;
  std::optional<UnderflowHorizon> underflow;
  /// nu * rho^(k_tail + 1) / (1 - rho): absolute error bound at k_tail.
  double tail_error_bound = 0.0;
};

/// ceil(log eps / log rho), clamped at 0.
long long horizon_pointwise(const HorizonQuery& q);

/// ceil(log(eps (1 - rho)) / log rho) - 1, clamped at 0: the smallest k with
/// rho^(k+1) / (1 - rho) < eps, except that an exact tie counts as met.
long long horizon_tail(const HorizonQuery& q);

/// Largest lag k with rho^k >= eps for rho = 1 - 2^(-p-1) and eps the
/// smallest normal (resp. subnormal) magnitude of the format.
UnderflowHorizon horizon_underflow(const PrecisionFormat& fmt);

HorizonResult evaluate_horizon(const HorizonQuery& q);

/// nu * rho^(retained_lag + 1) / (1 - rho): the geometric tail dropped when
/// every lag up to `retained_lag` is kept.
double geometric_tail_bound(double rho, double nu, long long retained_lag);

}  // namespace swr
