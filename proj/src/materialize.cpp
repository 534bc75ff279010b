#include "swr/materialize.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace swr {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool uses_logs(Materialization m) {
  return m == Materialization::log_outer_diff || m == Materialization::log_cumsum;
}

void require_positive(const Vector<double>& a, Materialization m) {
  if (uses_logs(m) && (a.array() <= 0.0).any()) {
    throw DomainError(std::string(to_string(m)) + " needs strictly positive coefficients");
  }
}

Vector<double> rounded_logs(const Vector<double>& a, const Rounding& r) {
  Vector<double> la(a.size());
  for (Index i = 0; i < a.size(); ++i) la[i] = r(std::log(a[i]));
  return la;
}

Matrix<double> tile_linear_cumprod(const Vector<double>& a, const Rounding& r) {
  const Index l = a.size();
  // Tile a along columns, pre-mask i <= j with 1, cumulative product down
  // each column, keep the lower triangle.
  Matrix<double> p = Matrix<double>::Ones(l, l);
  for (Index j = 0; j < l; ++j) {
    for (Index i = 1; i < l; ++i) {
      const double factor = i > j ? a[i] : 1.0;
      p(i, j) = r(p(i - 1, j) * factor);
    }
  }
  return p.triangularView<Eigen::Lower>();
}

Vector<double> cumulative_products(const Vector<double>& a, const Rounding& r) {
  Vector<double> g(a.size());
  g[0] = a[0];
  for (Index i = 1; i < a.size(); ++i) g[i] = r(g[i - 1] * a[i]);
  return g;
}

Matrix<double> tile_ratio(const Vector<double>& a, const Rounding& r) {
  const Index l = a.size();
  const Vector<double> g = cumulative_products(a, r);
  Matrix<double> tile = Matrix<double>::Zero(l, l);
  for (Index j = 0; j < l; ++j) {
    const double inv = r(1.0 / g[j]);
    for (Index i = j; i < l; ++i) tile(i, j) = r(g[i] * inv);
  }
  return tile;
}

Matrix<double> tile_log_outer_diff(const Vector<double>& a, const Rounding& r) {
  const Index l = a.size();
  const Vector<double> la = rounded_logs(a, r);
  Vector<double> p(l);
  p[0] = la[0];
  for (Index i = 1; i < l; ++i) p[i] = r(p[i - 1] + la[i]);
  Matrix<double> tile(l, l);
  for (Index j = 0; j < l; ++j) {
    for (Index i = 0; i < l; ++i) {
      const double log_entry = i >= j ? r(p[i] - p[j]) : kNegInf;
      tile(i, j) = r(std::exp(log_entry));
    }
  }
  return tile;
}

Matrix<double> tile_log_cumsum(const Vector<double>& a, const Rounding& r) {
  const Index l = a.size();
  const Vector<double> la = rounded_logs(a, r);
  // (log a) tiled along columns, inclusive upper triangle zeroed, summed down
  // each column, strict upper triangle masked to -inf before exp.
  Matrix<double> s = Matrix<double>::Zero(l, l);
  for (Index j = 0; j < l; ++j) {
    for (Index i = 1; i < l; ++i) s(i, j) = r(s(i - 1, j) + (i > j ? la[i] : 0.0));
  }
  Matrix<double> tile(l, l);
  for (Index j = 0; j < l; ++j) {
    for (Index i = 0; i < l; ++i) tile(i, j) = r(std::exp(i >= j ? s(i, j) : kNegInf));
  }
  return tile;
}

// Reverse passes. Element-wise results are rounded to storage; sums over a
// row or column are accumulated in the wider format first.

Vector<double> backward_linear_cumprod(const Vector<double>& a, const Rounding& r, const Matrix<double>& upstream) {
  const Index l = a.size();
  const Matrix<double> p = tile_linear_cumprod(a, r);
  Vector<double> grad = Vector<double>::Zero(l);
  for (Index j = 0; j < l; ++j) {
    double carry = 0.0;
    for (Index i = l - 1; i > j; --i) {
      carry = r(carry + upstream(i, j));
      grad[i] = r.acc(grad[i] + r(carry * p(i - 1, j)));
      carry = r(carry * a[i]);
    }
  }
  for (Index i = 0; i < l; ++i) grad[i] = r(grad[i]);
  return grad;
}

Vector<double> backward_ratio(const Vector<double>& a, const Rounding& r, const Matrix<double>& upstream) {
  const Index l = a.size();
  const Vector<double> g = cumulative_products(a, r);
  Vector<double> inv(l);
  for (Index j = 0; j < l; ++j) inv[j] = r(1.0 / g[j]);

  Vector<double> grad_g(l);
  Vector<double> grad_inv(l);
  for (Index i = 0; i < l; ++i) {
    double sum = 0.0;
    for (Index j = 0; j <= i; ++j) sum = r.acc(sum + r(upstream(i, j) * inv[j]));
    grad_g[i] = r(sum);
  }
  for (Index j = 0; j < l; ++j) {
    double sum = 0.0;
    for (Index i = j; i < l; ++i) sum = r.acc(sum + r(upstream(i, j) * g[i]));
    grad_inv[j] = r(sum);
  }
  // inv = 1/g contributes -grad_inv * inv^2.
  for (Index j = 0; j < l; ++j) grad_g[j] = r(grad_g[j] - r(grad_inv[j] * r(inv[j] * inv[j])));

  Vector<double> grad(l);
  double carry = 0.0;
  for (Index i = l - 1; i >= 1; --i) {
    carry = r(carry + grad_g[i]);
    grad[i] = r(carry * g[i - 1]);
    carry = r(carry * a[i]);
  }
  grad[0] = r(carry + grad_g[0]);
  return grad;
}

Vector<double> backward_log_outer_diff(const Vector<double>& a, const Rounding& r, const Matrix<double>& upstream) {
  const Index l = a.size();
  const Matrix<double> tile = tile_log_outer_diff(a, r);
  Matrix<double> grad_d = Matrix<double>::Zero(l, l);
  for (Index j = 0; j < l; ++j) {
    for (Index i = j; i < l; ++i) grad_d(i, j) = r(upstream(i, j) * tile(i, j));
  }
  // d(p_i - p_j): +1 for the row index, -1 for the column index.
  Vector<double> grad_p(l);
  for (Index k = 0; k < l; ++k) {
    double sum = 0.0;
    for (Index j = 0; j <= k; ++j) sum = r.acc(sum + grad_d(k, j));
    for (Index i = k; i < l; ++i) sum = r.acc(sum - grad_d(i, k));
    grad_p[k] = r(sum);
  }
  Vector<double> grad(l);
  double suffix = 0.0;
  for (Index k = l - 1; k >= 0; --k) {
    suffix = r(suffix + grad_p[k]);
    grad[k] = r(suffix / a[k]);
  }
  return grad;
}

Vector<double> backward_log_cumsum(const Vector<double>& a, const Rounding& r, const Matrix<double>& upstream) {
  const Index l = a.size();
  const Matrix<double> tile = tile_log_cumsum(a, r);
  Vector<double> grad_log = Vector<double>::Zero(l);
  for (Index j = 0; j < l; ++j) {
    double suffix = 0.0;
    for (Index i = l - 1; i > j; --i) {
      suffix = r(suffix + r(upstream(i, j) * tile(i, j)));
      grad_log[i] = r.acc(grad_log[i] + suffix);
    }
  }
  Vector<double> grad(l);
  for (Index k = 0; k < l; ++k) grad[k] = r(r(grad_log[k]) / a[k]);
  return grad;
}

Vector<double> segment_of(const Coefficients& a, const BlockPartition& part, Index t, const Rounding& r) {
  const Index l = part.block_size();
  Vector<double> block(l);
  for (Index j = 0; j < l; ++j) block[j] = r(a[l * t + j]);
  return block;
}

Rounding rounding_for(const std::optional<PrecisionFormat>& fmt) {
  if (!fmt) return Rounding::exact();
  fmt->validate();
  return Rounding::emulate(*fmt);
}

}  // namespace

std::string_view to_string(Materialization m) {
  switch (m) {
    case Materialization::ratio:
      return "ratio";
    case Materialization::log_outer_diff:
      return "log-outer-diff";
    case Materialization::log_cumsum:
      return "log-cumsum";
    case Materialization::linear_cumprod:
      return "linear-cumprod";
  }
  return "unknown";
}

Materialization parse_materialization(std::string_view name) {
  for (Materialization m : all_materializations()) {
    if (to_string(m) == name) return m;
  }
  throw DomainError("unknown materialization strategy '" + std::string(name) + "'");
}

std::vector<Materialization> all_materializations() {
  return {Materialization::ratio, Materialization::log_outer_diff, Materialization::log_cumsum,
          Materialization::linear_cumprod};
}

Matrix<double> materialize_tile(const Vector<double>& a_block, Materialization strategy, const Rounding& rounding) {
  if (a_block.size() == 0) throw ShapeError("empty block");
  require_positive(a_block, strategy);
  switch (strategy) {
    case Materialization::ratio:
      return tile_ratio(a_block, rounding);
    case Materialization::log_outer_diff:
      return tile_log_outer_diff(a_block, rounding);
    case Materialization::log_cumsum:
      return tile_log_cumsum(a_block, rounding);
    case Materialization::linear_cumprod:
      return tile_linear_cumprod(a_block, rounding);
  }
  throw DomainError("unknown materialization strategy");
}

Vector<double> tile_backward(const Vector<double>& a_block, Materialization strategy, const Rounding& rounding,
                             const Matrix<double>& upstream) {
  const Index l = a_block.size();
  if (l == 0) throw ShapeError("empty block");
  if (upstream.rows() != l || upstream.cols() != l) throw ShapeError("upstream gradient must be l x l");
  require_positive(a_block, strategy);
  switch (strategy) {
    case Materialization::ratio:
      return backward_ratio(a_block, rounding, upstream);
    case Materialization::log_outer_diff:
      return backward_log_outer_diff(a_block, rounding, upstream);
    case Materialization::log_cumsum:
      return backward_log_cumsum(a_block, rounding, upstream);
    case Materialization::linear_cumprod:
      return backward_linear_cumprod(a_block, rounding, upstream);
  }
  throw DomainError("unknown materialization strategy");
}

BlockFactors<double> build_block_factors(const Coefficients& a, const BlockPartition& part,
                                         Materialization strategy, const std::optional<PrecisionFormat>& fmt) {
  detail::check_partition(a, part);
  require_positive(a.values(), strategy);
  const Rounding r = rounding_for(fmt);
  const Index l = part.block_size();
  const Index b = part.blocks();

  BlockFactors<double> factors;
  factors.tiles.reserve(static_cast<std::size_t>(b));
  factors.g.resize(l, b);
  factors.r.resize(l, b);
  factors.c.resize(b);
  for (Index t = 0; t < b; ++t) {
    const Vector<double> block = segment_of(a, part, t, r);
    Matrix<double> tile = materialize_tile(block, strategy, r);
    for (Index i = 0; i < l; ++i) factors.g(i, t) = r(block[0] * tile(i, 0));
    factors.r.col(t) = tile.row(l - 1).transpose();
    factors.c[t] = factors.g(l - 1, t);
    factors.nonfinite = factors.nonfinite || !tile.allFinite();
    factors.tiles.push_back(std::move(tile));
  }
  return factors;
}

Vector<double> block_factors_backward(const Coefficients& a, const BlockPartition& part, Materialization strategy,
                                      const std::optional<PrecisionFormat>& fmt,
                                      const std::vector<Matrix<double>>& upstream) {
  detail::check_partition(a, part);
  require_positive(a.values(), strategy);
  if (static_cast<Index>(upstream.size()) != part.blocks()) throw ShapeError("need one upstream tile per block");
  const Rounding r = rounding_for(fmt);
  const Index l = part.block_size();
  Vector<double> grad(part.length());
  for (Index t = 0; t < part.blocks(); ++t) {
    grad.segment(l * t, l) = tile_backward(segment_of(a, part, t, r), strategy, r,
                                           upstream[static_cast<std::size_t>(t)]);
  }
  return grad;
}

double pct_error(const Matrix<double>& approx, const Matrix<double>& ref) {
  if (approx.rows() != ref.rows() || approx.cols() != ref.cols()) throw ShapeError("shape mismatch");
  if (!approx.allFinite()) return std::numeric_limits<double>::infinity();
  const double scale = ref.cwiseAbs().maxCoeff();
  const double diff = (approx - ref).cwiseAbs().maxCoeff();
  return scale == 0.0 ? (diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity()) : 100.0 * diff / scale;
}

std::vector<SweepPoint> materialization_sweep(const std::vector<double>& rhos, Index block_size,
                                              const PrecisionFormat& fmt,
                                              const std::vector<Materialization>& strategies) {
  if (block_size < 1) throw ShapeError("block size must be at least 1");
  fmt.validate();
  const Rounding low = Rounding::emulate(fmt);
  const Matrix<double> ones = Matrix<double>::Ones(block_size, block_size);

  std::vector<SweepPoint> points;
  for (double rho : rhos) {
    const Vector<double> block = Vector<double>::Constant(block_size, quantize(rho, fmt));
    const Matrix<double> ref_tile = tile_linear_cumprod(block, Rounding::exact());
    const Vector<double> ref_grad = backward_linear_cumprod(block, Rounding::exact(), ones);
    for (Materialization s : strategies) {
      const Matrix<double> tile = materialize_tile(block, s, low);
      const Vector<double> grad = tile_backward(block, s, low, ones);
      points.push_back({rho, s, pct_error(tile, ref_tile), pct_error(grad, ref_grad),
                        tile.allFinite() && grad.allFinite()});
    }
  }
  return points;
}

std::vector<double> log_spaced(double lo, double hi, int points) {
  if (!(lo > 0.0) || !(hi >= lo) || points < 1) throw DomainError("log spacing needs 0 < lo <= hi and points >= 1");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(points));
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (int i = 0; i < points; ++i) {
    const double frac = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
    out.push_back(i == points - 1 ? hi : std::pow(10.0, a + (b - a) * frac));
  }
  return out;
}

}  // namespace swr
