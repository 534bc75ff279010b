#pragma once

// Tile materialization under emulated reduced precision. Four constructions
// of L_t = tril(a_{t,i:j+1}):
//   ratio           tril(g g^{-T}) from cumulative products g and reciprocals
//   log-outer-diff  exp(p_i - p_j) from log-prefix sums p
//   log-cumsum      exp of a masked column-wise cumulative sum of log a
//   linear-cumprod  masked column-wise cumulative product of a (default)
// Each has a matching reverse pass that replays the same rounded operations.

#include <optional>
#include <string_view>
#include <vector>

#include "swr/hierarchical.hpp"

namespace swr {

enum class Materialization { ratio, log_outer_diff, log_cumsum, linear_cumprod };

std::string_view to_string(Materialization m);
/// Accepts "ratio", "log-outer-diff", "log-cumsum", "linear-cumprod".
Materialization parse_materialization(std::string_view name);
std::vector<Materialization> all_materializations();

/// One l x l tile from the block's coefficients. Non-finite entries are
/// returned as computed. Log constructions throw DomainError for a <= 0.
Matrix<double> materialize_tile(const Vector<double>& a_block, Materialization strategy, const Rounding& rounding);

/// d/da of sum_ij upstream(i, j) * L(i, j) through the same construction.
Vector<double> tile_backward(const Vector<double>& a_block, Materialization strategy, const Rounding& rounding,
                             const Matrix<double>& upstream);

/// Coefficients are first rounded to `fmt`; every subsequent scalar
/// operation is rounded too. No format means plain fp64.
BlockFactors<double> build_block_factors(const Coefficients& a, const BlockPartition& part,
                                         Materialization strategy = Materialization::linear_cumprod,
                                         const std::optional<PrecisionFormat>& fmt = std::nullopt);

/// Gradient of sum_t <upstream_t, L_t> with respect to every coefficient.
Vector<double> block_factors_backward(const Coefficients& a, const BlockPartition& part, Materialization strategy,
                                      const std::optional<PrecisionFormat>& fmt,
                                      const std::vector<Matrix<double>>& upstream);

/// 100 * max|approx - ref| / max|ref|; infinity when approx is not finite.
double pct_error(const Matrix<double>& approx, const Matrix<double>& ref);

struct SweepPoint {
  double rho = 0.0;
  Materialization strategy = Materialization::linear_cumprod;
  double forward_pct = 0.0;
  double backward_pct = 0.0;
  bool finite = true;
};

/// Constant-coefficient tiles a_i = rho, built in `fmt` and compared with an
/// fp64 linear-cumprod reference on the same rounded coefficients.
std::vector<SweepPoint> materialization_sweep(const std::vector<double>& rhos, Index block_size,
                                              const PrecisionFormat& fmt,
                                              const std::vector<Materialization>& strategies);

std::vector<double> log_spaced(double lo, double hi, int points);

}  // namespace swr
