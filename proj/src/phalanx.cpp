#include "swr/phalanx.hpp"

#include <cmath>
#include <string>

namespace swr {
namespace {

Matrix<double> random_matrix(Index rows, Index cols, double scale, SeededRng& rng) {
  Matrix<double> m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(-scale, scale);
  }
  return m;
}

std::vector<Matrix<double>> random_slices(Index count, Index rows, Index cols, double scale, SeededRng& rng) {
  std::vector<Matrix<double>> slices;
  for (Index s = 0; s < count; ++s) slices.push_back(random_matrix(rows, cols, scale, rng));
  return slices;
}

void check_slices(const std::vector<Matrix<double>>& slices, Index count, Index rows, Index cols, const char* name) {
  if (static_cast<Index>(slices.size()) != count) throw ShapeError(std::string(name) + " has the wrong slice count");
  for (const auto& s : slices) {
    if (s.rows() != rows || s.cols() != cols) throw ShapeError(std::string(name) + " slice has the wrong shape");
  }
}

nlohmann::json to_json(const Matrix<double>& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json to_json(const std::vector<Matrix<double>>& slices) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& s : slices) out.push_back(to_json(s));
  return out;
}

}  // namespace

LayerConfig LayerConfig::make(Index model_dim, Index heads, Index block_size) {
  if (heads < 1 || model_dim % heads != 0) throw ShapeError("model dim must split evenly across heads");
  LayerConfig cfg{model_dim, heads, model_dim / heads, block_size, heads, heads};
  cfg.validate();
  return cfg;
}

void LayerConfig::validate() const {
  if (model_dim < 1 || heads < 1 || head_dim < 1) throw ShapeError("layer dimensions must be positive");
  if (model_dim != heads * head_dim) throw ShapeError("model dim must equal heads * head dim");
  if (block_size < 1) throw ShapeError("block size must be at least 1");
  if (q_groups < 1 || heads % q_groups != 0) throw ShapeError("q groups must divide the head count");
  if (k_groups < 1 || heads % k_groups != 0) throw ShapeError("k groups must divide the head count");
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void validate_params(const LayerParams& params, const LayerConfig& cfg) {
  cfg.validate();
  const Index D = cfg.model_dim;
  const Index d = cfg.head_dim;
  if (params.W.rows() != cfg.heads || params.W.cols() != D) throw ShapeError("W must be h x D");
  check_slices(params.Q, cfg.q_groups, d, D, "Q");
  check_slices(params.K, cfg.k_groups, d, D, "K");
  check_slices(params.V, cfg.heads, d, D, "V");
  if (params.O.rows() != D || params.O.cols() != cfg.heads * d) throw ShapeError("O must be D x (h d)");
}

Features featurize(const TimeMajor<double>& u, const LayerParams& params, const LayerConfig& cfg) {
  validate_params(params, cfg);
  if (u.cols() != cfg.model_dim) throw ShapeError("input width differs from model dim");
  if (u.rows() == 0) throw ShapeError("empty input sequence");
  const Index n = u.rows();
  const Index h = cfg.heads;
  const Index d = cfg.head_dim;

  Features f;
  f.a = (u * params.W.transpose()).unaryExpr([](double z) { return sigmoid(z); });
  f.q.resize(n, h * d);
  f.k.resize(n, h * d);
  f.v.resize(n, h * d);
  for (Index eta = 0; eta < h; ++eta) {
    const auto& q = params.Q[static_cast<std::size_t>(cfg.q_group_of(eta))];
    const auto& k = params.K[static_cast<std::size_t>(cfg.k_group_of(eta))];
    const auto& v = params.V[static_cast<std::size_t>(eta)];
    f.q.middleCols(eta * d, d).noalias() = u * q.transpose();
    f.k.middleCols(eta * d, d) = (u * k.transpose()).unaryExpr([](double z) { return sigmoid(z); });
    f.v.middleCols(eta * d, d).noalias() = u * v.transpose();
  }
  return f;
}

TimeMajor<double> layer_forward(const TimeMajor<double>& u, const LayerParams& params, const LayerConfig& cfg,
                                const WindowSpec& window) {
  const Features f = featurize(u, params, cfg);
  const Index h = cfg.heads;
  const Index d = cfg.head_dim;

  TimeMajor<double> mixed(u.rows(), h * d);
  for (Index eta = 0; eta < h; ++eta) {
    const Coefficients a(f.a.col(eta));
    const Inputs gated(TimeMajor<double>(f.k.middleCols(eta * d, d).cwiseProduct(f.v.middleCols(eta * d, d))));
    const States x = window_solve(a, gated, window);
    mixed.middleCols(eta * d, d) =
        f.q.middleCols(eta * d, d).cwiseProduct(x.x) + f.v.middleCols(eta * d, d);
  }
  return mixed * params.O.transpose();
}

LayerParams init_params(const LayerConfig& cfg, SeededRng& rng) {
  cfg.validate();
  const Index D = cfg.model_dim;
  const Index d = cfg.head_dim;
  const double s = 1.0 / std::sqrt(static_cast<double>(D));
  LayerParams p;
  p.W = random_matrix(cfg.heads, D, s, rng);
  p.Q = random_slices(cfg.q_groups, d, D, s, rng);
  p.K = random_slices(cfg.k_groups, d, D, s, rng);
  p.V = random_slices(cfg.heads, d, D, s, rng);
  p.O = random_matrix(D, cfg.heads * d, s, rng);
  return p;
}

LayerParams permute_heads(const LayerParams& params, const LayerConfig& cfg, const std::vector<Index>& perm) {
  validate_params(params, cfg);
  if (cfg.q_groups != cfg.heads || cfg.k_groups != cfg.heads) throw ShapeError("head permutation needs ungrouped gates");
  if (static_cast<Index>(perm.size()) != cfg.heads) throw ShapeError("permutation has the wrong length");
  const Index d = cfg.head_dim;
  LayerParams out = params;
  for (Index eta = 0; eta < cfg.heads; ++eta) {
    const Index src = perm[static_cast<std::size_t>(eta)];
    if (src < 0 || src >= cfg.heads) throw ShapeError("permutation entry out of range");
    out.W.row(eta) = params.W.row(src);
    out.Q[static_cast<std::size_t>(eta)] = params.Q[static_cast<std::size_t>(src)];
    out.K[static_cast<std::size_t>(eta)] = params.K[static_cast<std::size_t>(src)];
    out.V[static_cast<std::size_t>(eta)] = params.V[static_cast<std::size_t>(src)];
    out.O.middleCols(eta * d, d) = params.O.middleCols(src * d, d);
  }
  return out;
}

nlohmann::json params_to_json(const LayerParams& params, const LayerConfig& cfg) {
  validate_params(params, cfg);
  return {{"config",
           {{"D", cfg.model_dim},
            {"h", cfg.heads},
            {"d", cfg.head_dim},
            {"l", cfg.block_size},
            {"q_groups", cfg.q_groups},
            {"k_groups", cfg.k_groups}}},
          {"W", to_json(params.W)},
          {"Q", to_json(params.Q)},
          {"K", to_json(params.K)},
          {"V", to_json(params.V)},
          {"O", to_json(params.O)}};
}

}  // namespace swr
