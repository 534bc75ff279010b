#pragma once

// Sliding window recurrences. The uniform window keeps lags 0..k-1 (a banded
// L). The jagged window replaces the carrier operator T by I_b, keeping each
// diagonal tile plus the rank-one coupling to the previous block; the Block
// Two-Pass (B2P) solver evaluates it without forming any off-diagonal tile.

#include <string>
#include <string_view>

#include "swr/hierarchical.hpp"
#include "swr/horizon.hpp"

namespace swr {

enum class WindowKind { uniform, jagged, full };

struct WindowSpec {
  WindowKind kind = WindowKind::jagged;
  /// Bandwidth k for uniform windows, block size l for jagged ones.
  Index width = 16;

  static WindowSpec uniform(Index k) { return {WindowKind::uniform, k}; }
  static WindowSpec jagged(Index block) { return {WindowKind::jagged, block}; }
  static WindowSpec full() { return {WindowKind::full, 0}; }

  void validate() const {
    if (kind != WindowKind::full && width < 1) throw DomainError("window width must be at least 1");
  }
};

inline std::string_view to_string(WindowKind kind) {
  switch (kind) {
    case WindowKind::uniform:
      return "uniform";
    case WindowKind::jagged:
      return "jagged";
    case WindowKind::full:
      return "full";
  }
  return "unknown";
}

namespace b2p {

/// Pass I for block t: w_t = L_t u_t written into `x`, and the boundary
/// value w_{t,l} into row t of `carriers`.
template <typename Scalar>
void local_pass(const Vector<Scalar>& a, const TimeMajor<Scalar>& u_folded, Index block, Index t,
                TimeMajor<Scalar>& x, TimeMajor<Scalar>& carriers) {
  const Index begin = block * t;
  const Matrix<Scalar> tile = detail::cumprod_tile<Scalar>(a.segment(begin, block));
  x.middleRows(begin, block).noalias() = tile * u_folded.middleRows(begin, block);
  carriers.row(t) = x.row(begin + block - 1);
}

/// Pass II for block t >= 1: x_t += g_t v_{t-1}, g_t = (a_{t,1}, ..., a_{t,l:1}).
template <typename Scalar>
void neighbor_pass(const Vector<Scalar>& a, Index block, Index t, const TimeMajor<Scalar>& carriers,
                   TimeMajor<Scalar>& x) {
  if (t == 0) return;
  const Index begin = block * t;
  Scalar g = a[begin];
  for (Index j = 0; j < block; ++j) {
    if (j > 0) g *= a[begin + j];
    x.row(begin + j) += g * carriers.row(t - 1);
  }
}

}  // namespace b2p

/// Block Two-Pass solve of the jagged window. Requires n = b * l.
template <typename Scalar>
StateSequence<Scalar> jagged_window_solve(const CoefficientSequence<Scalar>& a, const InputSequence<Scalar>& u,
                                          const BlockPartition& part) {
  detail::check_partition(a, part);
  const TimeMajor<Scalar> uf = u.folded(a);
  const Index l = part.block_size();
  TimeMajor<Scalar> x(uf.rows(), uf.cols());
  TimeMajor<Scalar> carriers(part.blocks(), uf.cols());
  for (Index t = 0; t < part.blocks(); ++t) b2p::local_pass(a.values(), uf, l, t, x, carriers);
  for (Index t = 1; t < part.blocks(); ++t) b2p::neighbor_pass(a.values(), l, t, carriers, x);
  return {std::move(x)};
}

namespace detail {

/// Right-pads with a = 0, u = 0 to a whole number of blocks.
template <typename Scalar>
std::pair<CoefficientSequence<Scalar>, InputSequence<Scalar>> pad_to_blocks(const CoefficientSequence<Scalar>& a,
                                                                           const InputSequence<Scalar>& u,
                                                                           const BlockPartition& part) {
  const Index n = a.size();
  Vector<Scalar> ap = Vector<Scalar>::Zero(part.length());
  ap.head(n) = a.values();
  TimeMajor<Scalar> up = TimeMajor<Scalar>::Zero(part.length(), u.channels());
  up.topRows(n) = u.folded(a);
  return {CoefficientSequence<Scalar>(std::move(ap)), InputSequence<Scalar>(std::move(up))};
}

}  // namespace detail

/// B2P for any n: the tail block is zero-padded and the first n rows returned.
template <typename Scalar>
StateSequence<Scalar> jagged_window_solve(const CoefficientSequence<Scalar>& a, const InputSequence<Scalar>& u,
                                          Index block_size) {
  const BlockPartition part = BlockPartition::covering(a.size(), block_size);
  if (part.length() == a.size()) return jagged_window_solve(a, u, part);
  auto [ap, up] = detail::pad_to_blocks(a, u, part);
  StateSequence<Scalar> padded = jagged_window_solve(ap, up, part);
  return {padded.x.topRows(a.size())};
}

/// B2P with the carrier recurrence kept in full: Pass II reads the exact
/// carrier s_{t-1} = c_{t-1} s_{t-2} + v_{t-1} instead of v_{t-1}.
template <typename Scalar>
StateSequence<Scalar> b2p_full_carrier_solve(const CoefficientSequence<Scalar>& a, const InputSequence<Scalar>& u,
                                             const BlockPartition& part) {
  detail::check_partition(a, part);
  const TimeMajor<Scalar> uf = u.folded(a);
  const Index l = part.block_size();
  const Index b = part.blocks();
  TimeMajor<Scalar> x(uf.rows(), uf.cols());
  TimeMajor<Scalar> carriers(b, uf.cols());
  for (Index t = 0; t < b; ++t) b2p::local_pass(a.values(), uf, l, t, x, carriers);
  for (Index t = 1; t < b; ++t) {
    Scalar attenuation(1);
    for (Index j = 0; j < l; ++j) attenuation *= a[l * t + j];
    carriers.row(t) += attenuation * carriers.row(t - 1);
  }
  for (Index t = 1; t < b; ++t) b2p::neighbor_pass(a.values(), l, t, carriers, x);
  return {std::move(x)};
}

/// Uniform window of bandwidth k (lags 0..k-1). Powers of two run log2(k)
/// Kogge-Stone stages; other k use the banded sum directly.
template <typename Scalar>
StateSequence<Scalar> uniform_window_solve(const CoefficientSequence<Scalar>& a, const InputSequence<Scalar>& u,
                                           Index k) {
  if (k < 1) throw DomainError("bandwidth k must be at least 1");
  const Index n = a.size();
  if (k >= n) return sequential_solve(a, u);
  const TimeMajor<Scalar> uf = u.folded(a);
  if (next_power_of_two(k) == k) {
    Vector<Scalar> f = a.values();
    TimeMajor<Scalar> v = uf;
    detail::pad_rows(f, v, next_power_of_two(n));
    v = detail::kogge_stone_stages(std::move(f), std::move(v), ceil_log2(k), nullptr);
    return {v.topRows(n)};
  }
  TimeMajor<Scalar> x(n, uf.cols());
  for (Index i = 0; i < n; ++i) {
    x.row(i) = uf.row(i);
    Scalar product(1);
    for (Index lag = 1; lag < k && lag <= i; ++lag) {
      product *= a[i - lag + 1];
      x.row(i) += product * uf.row(i - lag);
    }
  }
  return {std::move(x)};
}

/// Dense banded operator sum_{j<k} (AZ)^j.
template <typename Scalar>
TransferOperator<Scalar> banded_operator(const CoefficientSequence<Scalar>& a, Index k) {
  if (k < 1) throw DomainError("bandwidth k must be at least 1");
  TransferOperator<Scalar> l = materialize_transfer(a);
  for (Index j = 0; j < l.size(); ++j) {
    for (Index i = j + k; i < l.size(); ++i) l.entries(i, j) = Scalar(0);
  }
  return l;
}

/// Dense jagged operator blockdiag(L_t) + G Z_b R.
template <typename Scalar>
TransferOperator<Scalar> jagged_operator(const CoefficientSequence<Scalar>& a, const BlockPartition& part) {
  const BlockFactors<Scalar> factors = block_factors(a, part);
  return assemble_decomposition(factors, truncated_carrier_system(factors));
}

/// Dispatches on the window kind; jagged windows pad a partial tail block.
template <typename Scalar>
StateSequence<Scalar> window_solve(const CoefficientSequence<Scalar>& a, const InputSequence<Scalar>& u,
                                   const WindowSpec& window) {
  window.validate();
  switch (window.kind) {
    case WindowKind::uniform:
      return uniform_window_solve(a, u, window.width);
    case WindowKind::jagged:
      return jagged_window_solve(a, u, window.width);
    case WindowKind::full:
      return sequential_solve(a, u);
  }
  throw DomainError("unknown window kind");
}

/// Largest lag kept in every row: k - 1 for uniform, l for jagged.
inline Index retained_lag(const WindowSpec& w, Index n) {
  switch (w.kind) {
    case WindowKind::uniform:
      return w.width - 1;
    case WindowKind::jagged:
      return w.width;
    case WindowKind::full:
      return n;
  }
  return 0;
}

/// Largest lag kept in some row: k - 1 for uniform, 2l - 1 for jagged.
inline Index widest_lag(const WindowSpec& w, Index n) {
  switch (w.kind) {
    case WindowKind::uniform:
      return w.width - 1;
    case WindowKind::jagged:
      return 2 * w.width - 1;
    case WindowKind::full:
      return n;
  }
  return 0;
}

struct TruncationReport {
  Vector<double> channel_error;  // ||x - x~||_inf per channel
  double max_error = 0.0;
  double relative_error = 0.0;   // max_error / ||x||_inf
  double rho = 0.0;              // max |a_i|
  double nu = 0.0;               // max |u_i| after folding
  double tail_bound = 0.0;       // nu rho^(K+1) / (1 - rho), K = retained lag; inf if rho >= 1
  Index retained_lag = 0;
  Index widest_lag = 0;
};

inline TruncationReport truncation_error_report(const Coefficients& a, const Inputs& u, const WindowSpec& window) {
  const States exact = sequential_solve(a, u);
  const States approx = window_solve(a, u, window);
  const TimeMajor<double> diff = (exact.x - approx.x).cwiseAbs();

  TruncationReport report;
  report.channel_error = diff.colwise().maxCoeff().transpose();
  report.max_error = report.channel_error.maxCoeff();
  const double scale = exact.x.cwiseAbs().maxCoeff();
  report.relative_error = scale > 0.0 ? report.max_error / scale : report.max_error;
  report.rho = a.values().cwiseAbs().maxCoeff();
  report.nu = u.folded(a).cwiseAbs().maxCoeff();
  report.retained_lag = retained_lag(window, a.size());
  report.widest_lag = widest_lag(window, a.size());
  if (window.kind == WindowKind::full || report.retained_lag >= a.size() - 1) {
    report.tail_bound = 0.0;
  } else if (report.rho < 1.0) {
    report.tail_bound = geometric_tail_bound(report.rho, report.nu, report.retained_lag);
  } else {
    report.tail_bound = std::numeric_limits<double>::infinity();
  }
  return report;
}

}  // namespace swr
