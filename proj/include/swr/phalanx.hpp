#pragma once

// Toy-scale forward pass of a Phalanx sequence-mixing layer:
//   a = sigmoid(W u), q = Q u, k = sigmoid(K u), v = V u   (per head)
//   x = L~ (k o v)      per head, with that head's coefficients
//   y = O (q o x + v)
// Heads own d = D / h channels. Q and K may be shared across groups of
// consecutive heads.

#include <json.hpp>

#include <vector>

#include "swr/window.hpp"

namespace swr {

struct LayerConfig {
  Index model_dim = 64;
  Index heads = 4;
  Index head_dim = 16;
  Index block_size = 16;
  Index q_groups = 4;
  Index k_groups = 4;

  /// D = model_dim split into `heads` heads, no gate sharing.
  static LayerConfig make(Index model_dim, Index heads, Index block_size = 16);

  void validate() const;
  Index q_group_of(Index head) const { return head / (heads / q_groups); }
  Index k_group_of(Index head) const { return head / (heads / k_groups); }
};

struct LayerParams {
  Matrix<double> W;              // h x D
  std::vector<Matrix<double>> Q; // q_groups slices of d x D
  std::vector<Matrix<double>> K; // k_groups slices of d x D
  std::vector<Matrix<double>> V; // h slices of d x D
  Matrix<double> O;              // D x (h d), column block eta belongs to head eta
};

/// Head features, time-major. Column eta*d + mu of q/k/v is channel mu of head eta.
struct Features {
  TimeMajor<double> a; // n x h
  TimeMajor<double> q;
  TimeMajor<double> k;
  TimeMajor<double> v;
};

double sigmoid(double z);

void validate_params(const LayerParams& params, const LayerConfig& cfg);

Features featurize(const TimeMajor<double>& u, const LayerParams& params, const LayerConfig& cfg);

/// y (n x D). Jagged windows use B2P with the config's block size unless
/// `window.width` says otherwise; partial tail blocks are zero-padded.
TimeMajor<double> layer_forward(const TimeMajor<double>& u, const LayerParams& params, const LayerConfig& cfg,
                                const WindowSpec& window);

/// Entries uniform in [-1/sqrt(D), 1/sqrt(D)), drawn in the order W, Q, K, V, O.
LayerParams init_params(const LayerConfig& cfg, SeededRng& rng);

/// Reorders heads: head eta of the result is head perm[eta] of `params`.
/// Requires ungrouped gates.
LayerParams permute_heads(const LayerParams& params, const LayerConfig& cfg, const std::vector<Index>& perm);

nlohmann::json params_to_json(const LayerParams& params, const LayerConfig& cfg);

}  // namespace swr
