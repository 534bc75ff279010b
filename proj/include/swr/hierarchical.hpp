#pragma once

// Two-level decomposition L = blockdiag(L_t) + G Z_b T R and the three-stage
// solver built on it: local tile solves, a carrier recurrence over block
// boundaries, and a rank-one reconstruction.

#include <string>
#include <string_view>
#include <vector>

#include "swr/flat_scans.hpp"

namespace swr {

/// Tiling of n steps into b blocks of length l. Indices are 0-based:
/// step l*t + j is local index j of block t.
class BlockPartition {
 public:
  BlockPartition(Index length, Index block_size) : n_(length), l_(block_size) {
    if (l_ < 1) throw ShapeError("block size must be at least 1");
    if (n_ < 1) throw ShapeError("sequence length must be at least 1");
    if (n_ % l_ != 0) {
      throw ShapeError("length " + std::to_string(n_) + " is not a multiple of block size " + std::to_string(l_));
    }
  }

  /// Smallest partition with blocks of `block_size` covering `length` steps.
  static BlockPartition covering(Index length, Index block_size) {
    if (block_size < 1) throw ShapeError("block size must be at least 1");
    return {((length + block_size - 1) / block_size) * block_size, block_size};
  }

  Index length() const { return n_; }
  Index block_size() const { return l_; }
  Index blocks() const { return n_ / l_; }
  Index global_index(Index t, Index j) const { return l_ * t + j; }

  friend bool operator==(const BlockPartition&, const BlockPartition&) = default;

 private:
  Index n_;
  Index l_;
};

/// Per-block pieces of the decomposition. Column t of `g` holds
/// g_t = (a_{t,1}, a_{t,2:1}, ..., a_{t,l:1}), column t of `r` holds the last
/// row of L_t, and c_t = g_{t,l}.
template <typename Scalar>
struct BlockFactors {
  std::vector<Matrix<Scalar>> tiles;
  Matrix<Scalar> g;
  Matrix<Scalar> r;
  Vector<Scalar> c;
  bool nonfinite = false;

  Index blocks() const { return static_cast<Index>(tiles.size()); }
  Index block_size() const { return g.rows(); }
};

template <typename Scalar>
struct CarrierSystem {
  Vector<Scalar> c;
  TimeMajor<Scalar> v;
  Matrix<Scalar> T;
};

enum class CarrierStrategy { dense, scan };

inline std::string_view to_string(CarrierStrategy s) { return s == CarrierStrategy::dense ? "dense-T" : "scan-T"; }

namespace detail {

template <typename Scalar>
void check_partition(const CoefficientSequence<Scalar>& a, const BlockPartition& part) {
  if (a.size() != part.length()) {
    throw ShapeError("partition covers " + std::to_string(part.length()) + " steps but sequence has " +
                     std::to_string(a.size()));
  }
}

/// Unit lower-triangular tile of one block by column-wise cumulative products.
template <typename Scalar, typename Derived>
Matrix<Scalar> cumprod_tile(const Eigen::MatrixBase<Derived>& a_block) {
  const Index l = a_block.size();
  Matrix<Scalar> tile = Matrix<Scalar>::Zero(l, l);
  for (Index j = 0; j < l; ++j) {
    tile(j, j) = Scalar(1);
    for (Index i = j + 1; i < l; ++i) tile(i, j) = tile(i - 1, j) * a_block[i];
  }
  return tile;
}

template <typename Scalar>
void fill_interfaces(BlockFactors<Scalar>& factors, const Vector<Scalar>& a, Index l) {
  const Index b = factors.blocks();
  factors.g.resize(l, b);
  factors.r.resize(l, b);
  factors.c.resize(b);
  for (Index t = 0; t < b; ++t) {
    const Matrix<Scalar>& tile = factors.tiles[static_cast<std::size_t>(t)];
    factors.g.col(t) = a[l * t] * tile.col(0);
    factors.r.col(t) = tile.row(l - 1).transpose();
    factors.c[t] = factors.g(l - 1, t);
  }
}

}  // namespace detail

/// Exact (unrounded) block factors via the linear-space cumulative product.
template <typename Scalar>
BlockFactors<Scalar> block_factors(const CoefficientSequence<Scalar>& a, const BlockPartition& part) {
  detail::check_partition(a, part);
  const Index l = part.block_size();
  BlockFactors<Scalar> factors;
  factors.tiles.reserve(static_cast<std::size_t>(part.blocks()));
  for (Index t = 0; t < part.blocks(); ++t) {
    factors.tiles.push_back(detail::cumprod_tile<Scalar>(a.values().segment(l * t, l)));
  }
  detail::fill_interfaces(factors, a.values(), l);
  return factors;
}

/// Carrier system with T = (I_b - C Z_b)^{-1}, so T(t-1, s) = c_{s+1} ... c_{t-1}.
template <typename Scalar>
CarrierSystem<Scalar> carrier_system(const BlockFactors<Scalar>& factors) {
  const CoefficientSequence<Scalar> c(factors.c);
  return {factors.c, TimeMajor<Scalar>(), materialize_transfer(c).entries};
}

/// The jagged truncation T ~ I_b.
template <typename Scalar>
CarrierSystem<Scalar> truncated_carrier_system(const BlockFactors<Scalar>& factors) {
  const Index b = factors.blocks();
  return {factors.c, TimeMajor<Scalar>(), Matrix<Scalar>::Identity(b, b)};
}

/// Dense blockdiag(L_t) + G Z_b T R.
template <typename Scalar>
TransferOperator<Scalar> assemble_decomposition(const BlockFactors<Scalar>& factors,
                                                const CarrierSystem<Scalar>& carrier) {
  const Index b = factors.blocks();
  const Index l = factors.block_size();
  const Index n = b * l;
  if (carrier.T.rows() != b || carrier.T.cols() != b) throw ShapeError("carrier operator has wrong size");

  Matrix<Scalar> local = Matrix<Scalar>::Zero(n, n);
  Matrix<Scalar> g = Matrix<Scalar>::Zero(n, b);
  Matrix<Scalar> r = Matrix<Scalar>::Zero(b, n);
  for (Index t = 0; t < b; ++t) {
    local.block(l * t, l * t, l, l) = factors.tiles[static_cast<std::size_t>(t)];
    g.block(l * t, t, l, 1) = factors.g.col(t);
    r.block(t, l * t, 1, l) = factors.r.col(t).transpose();
  }
  Matrix<Scalar> coupled = g * shift_matrix<Scalar>(b, 1) * carrier.T * r;
  return {local + coupled, true};
}

/// Three-stage hierarchical solve. `carriers`, when given, receives the
/// carrier states s_1..s_b (b x d).
template <typename Scalar>
StateSequence<Scalar> hierarchical_solve(const CoefficientSequence<Scalar>& a, const InputSequence<Scalar>& u,
                                         const BlockPartition& part,
                                         CarrierStrategy strategy = CarrierStrategy::dense,
                                         TimeMajor<Scalar>* carriers = nullptr) {
  detail::check_partition(a, part);
  const Index l = part.block_size();
  const Index b = part.blocks();
  const TimeMajor<Scalar> uf = u.folded(a);
  const BlockFactors<Scalar> factors = block_factors(a, part);

  // Stage I: local solves and interface extraction.
  TimeMajor<Scalar> x(uf.rows(), uf.cols());
  TimeMajor<Scalar> v(b, uf.cols());
  for (Index t = 0; t < b; ++t) {
    x.middleRows(l * t, l).noalias() = factors.tiles[static_cast<std::size_t>(t)] * uf.middleRows(l * t, l);
    v.row(t) = x.row(l * t + l - 1);
  }

  // Stage II: carrier system s = (I - C Z_b)^{-1} v.
  TimeMajor<Scalar> s;
  if (strategy == CarrierStrategy::dense) {
    s = carrier_system(factors).T * v;
  } else {
    s = kogge_stone_solve(CoefficientSequence<Scalar>(factors.c), InputSequence<Scalar>(v)).x;
  }

  // Stage III: x_t = w_t + g_t s_{t-1}, s_0 = 0.
  for (Index t = 1; t < b; ++t) x.middleRows(l * t, l).noalias() += factors.g.col(t) * s.row(t - 1);

  if (carriers) *carriers = std::move(s);
  return {std::move(x)};
}

}  // namespace swr
