#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "swr/flat_scans.hpp"
#include "swr/hierarchical.hpp"
#include "swr/horizon.hpp"
#include "swr/io.hpp"
#include "swr/materialize.hpp"
#include "swr/phalanx.hpp"
#include "swr/pipeline.hpp"
#include "swr/window.hpp"

namespace swr::cli {
namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

bool is_blocked(const std::string& algo) {
  return algo == "hierarchical" || algo == "hierarchical-scan" || algo == "b2p" || algo == "b2p-full" ||
         algo == "b2p-parallel";
}

States run_blocked(const std::string& algo, const Coefficients& a, const Inputs& u, const BlockPartition& part,
                   const SolverParams& params) {
  if (algo == "hierarchical") return hierarchical_solve(a, u, part, CarrierStrategy::dense);
  if (algo == "hierarchical-scan") return hierarchical_solve(a, u, part, CarrierStrategy::scan);
  if (algo == "b2p") return jagged_window_solve(a, u, part);
  if (algo == "b2p-full") return b2p_full_carrier_solve(a, u, part);
  const Index seg = params.segment_len > 0 ? params.segment_len : part.blocks();
  return pipeline_b2p(a, u, PipelinePlan(part, params.workers, seg));
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream stream(text);
  while (std::getline(stream, item, sep)) {
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

template <typename T>
std::vector<T> split_numbers(const std::string& text) {
  std::vector<T> values;
  for (const auto& item : split(text, ',')) {
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw DomainError("not an integer: '" + item + "'");
    values.push_back(static_cast<T>(v));
  }
  if (values.empty()) throw DomainError("empty list");
  return values;
}

/// Writes to `path`, or to `fallback` when the path is empty or "-".
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty() && path != "-") {
      file_.open(path);
      if (!file_) throw InputError("cannot write " + path);
      stream_ = &file_;
    }
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

std::string pow2_label(int exponent) { return "2^" + std::to_string(exponent); }

void horizon_row(std::ostream& out, const PrecisionFormat& fmt) {
  const UnderflowHorizon k = horizon_underflow(fmt);
  char rho[32];
  std::snprintf(rho, sizeof rho, "%.12f", max_representable_contraction(fmt));
  out << fmt.name << ',' << fmt.mantissa_bits << ',' << fmt.exponent_bits << ',' << fmt.bias << ',' << rho << ','
      << pow2_label(fmt.min_exponent()) << ',' << pow2_label(fmt.min_exponent() - fmt.mantissa_bits) << ','
      << k.k_normal << ',' << k.k_subnormal << '\n';
}

double rel_diff(const TimeMajor<double>& got, const TimeMajor<double>& want) { return max_relative_error(got, want); }

struct Check {
  std::string name;
  bool pass;
  double error;
};

}  // namespace

const std::vector<std::string>& algorithm_names() {
  static const std::vector<std::string> names = {"sequential",   "kogge-stone", "brent-kung",
                                                 "hierarchical", "hierarchical-scan", "b2p",
                                                 "b2p-full",     "b2p-parallel", "uniform"};
  return names;
}

States run_algorithm(const std::string& algo, const Coefficients& a, const Inputs& u, const SolverParams& params,
                     std::ostream* warn) {
  if (algo == "sequential") return sequential_solve(a, u);
  if (algo == "kogge-stone") return kogge_stone_solve(a, u);
  if (algo == "brent-kung") return brent_kung_solve(a, u);
  if (algo == "uniform") return uniform_window_solve(a, u, params.k);
  if (!is_blocked(algo)) throw DomainError("unknown algorithm '" + algo + "'");
  if (params.workers < 1) throw DomainError("workers must be at least 1");

  const BlockPartition part = BlockPartition::covering(a.size(), params.l);
  if (part.length() == a.size()) return run_blocked(algo, a, u, part, params);
  if (warn) {
    *warn << "warning: n=" << a.size() << " is not a multiple of l=" << params.l << "; zero-padding to "
          << part.length() << " and keeping the first " << a.size() << " rows\n";
  }
  auto [ap, up] = detail::pad_to_blocks(a, u, part);
  const States padded = run_blocked(algo, ap, up, part, params);
  return {padded.x.topRows(a.size())};
}

Index retained_lag_of(const std::string& algo, const SolverParams& params, Index n) {
  if (algo == "uniform") return params.k - 1;
  if (algo == "b2p" || algo == "b2p-parallel") return params.l;
  return n;
}

std::pair<Coefficients, Inputs> random_problem(std::uint64_t seed, Index n, Index d, double rho) {
  if (n < 1 || d < 1) throw ShapeError("n and d must be positive");
  if (!(rho > 0.0)) throw DomainError("rho must be positive");
  SeededRng rng(seed);
  Vector<double> a(n);
  for (Index i = 0; i < n; ++i) a[i] = rng.uniform(0.0, rho);
  TimeMajor<double> u(n, d);
  for (Index i = 0; i < n; ++i) {
    for (Index c = 0; c < d; ++c) u(i, c) = rng.uniform(-1.0, 1.0);
  }
  return {Coefficients(std::move(a)), Inputs(std::move(u))};
}

int cmd_solve(const SolveOptions& opt, std::ostream& out, std::ostream& err) {
  if (opt.random == !opt.input.empty()) throw DomainError("give exactly one of --input and --random");
  if (opt.digits < 1 || opt.digits > 17) throw DomainError("--digits must be in [1, 17]");

  SequenceFile data;
  if (opt.random) {
    auto [a, u] = random_problem(opt.seed, opt.n, opt.d);
    data.a = a.values();
    data.u = u.values();
  } else {
    data = read_sequence(opt.input);
  }
  const Coefficients a = data.coefficients();
  const Inputs u = data.inputs();

  if (!opt.write_input.empty()) {
    Sink sink(opt.write_input, out);
    write_sequence_csv(*sink, data.a, data.u, 17);
  }

  const auto start = Clock::now();
  const States x = run_algorithm(opt.algo, a, u, opt.params, &err);
  const double ms = elapsed_ms(start);

  std::ostringstream csv;
  write_states_csv(csv, x.x, opt.digits);
  const std::string bytes = csv.str();
  const bool to_stdout = opt.output == "-";
  if (!opt.output.empty()) {
    Sink sink(opt.output, out);
    *sink << bytes;
  }
  std::ostream& report = to_stdout ? err : out;
  char time[32];
  std::snprintf(time, sizeof time, "%.3f", ms);
  report << "n=" << a.size() << " d=" << u.channels() << " algo=" << opt.algo << " time_ms=" << time
         << " checksum=" << hex64(fnv1a64(bytes)) << '\n';
  return ok;
}

int cmd_compare(const CompareOptions& opt, std::ostream& out, std::ostream& err) {
  if (opt.report != "csv") throw DomainError("only --report csv is supported");
  if (opt.seeds < 1) throw DomainError("--seeds must be at least 1");
  if (!(opt.rho > 0.0)) throw DomainError("--rho must be positive");

  Sink sink(opt.csv, out);
  std::ostream& csv = *sink;
  csv << "seed,n,algo_a,algo_b,max_abs_err,max_rel_err,tail_bound\n";
  bool violated = false;
  for (int s = 0; s < opt.seeds; ++s) {
    const std::uint64_t seed = opt.seed + static_cast<std::uint64_t>(s);
    const auto [a, u] = random_problem(seed, opt.n, opt.d, opt.rho);
    const States xa = run_algorithm(opt.algo, a, u, opt.params, s == 0 ? &err : nullptr);
    const States xb = run_algorithm(opt.against, a, u, opt.params, nullptr);

    const double abs_err = (xa.x - xb.x).cwiseAbs().maxCoeff();
    const double rel_err = max_relative_error(xa.x, xb.x);
    const Index n = a.size();
    const Index lag = std::min(retained_lag_of(opt.algo, opt.params, n), retained_lag_of(opt.against, opt.params, n));
    double bound = 0.0;
    if (lag < n - 1) {
      const double rho = a.values().cwiseAbs().maxCoeff();
      const double nu = u.folded(a).cwiseAbs().maxCoeff();
      bound = rho < 1.0 ? geometric_tail_bound(rho, nu, lag) : std::numeric_limits<double>::infinity();
    }
    csv << seed << ',' << n << ',' << opt.algo << ',' << opt.against << ',' << format_real(abs_err, 6) << ','
        << format_real(rel_err, 6) << ',' << format_real(bound, 6) << '\n';
    if (opt.assert_tol >= 0.0 && !(rel_err <= opt.assert_tol)) violated = true;
  }
  if (violated) {
    err << "error: max_rel_err exceeds --assert-tol " << opt.assert_tol << '\n';
    return tolerance;
  }
  return ok;
}

int cmd_materialize(const MaterializeOptions& opt, std::ostream& out, std::ostream&) {
  const auto sweep = split(opt.rho_sweep, ':');
  if (sweep.size() != 3) throw DomainError("--rho-sweep expects lo:hi:points");
  double lo = 0.0;
  double hi = 0.0;
  int points = 0;
  try {
    lo = std::stod(sweep[0]);
    hi = std::stod(sweep[1]);
    points = std::stoi(sweep[2]);
  } catch (const std::exception&) {
    throw DomainError("--rho-sweep expects lo:hi:points");
  }
  if (!(lo > 0.0) || !(hi >= lo) || points < 1) throw DomainError("--rho-sweep needs 0 < lo <= hi and points >= 1");

  std::vector<Materialization> strategies;
  if (opt.strategy == "all") {
    strategies = all_materializations();
  } else {
    for (const auto& name : split(opt.strategy, ',')) strategies.push_back(parse_materialization(name));
  }
  const PrecisionFormat fmt = PrecisionFormat::from_name(opt.format);

  Sink sink(opt.csv, out);
  std::ostream& csv = *sink;
  csv << "rho,strategy,fwd_pct_err,bwd_pct_err,finite\n";
  for (const SweepPoint& p : materialization_sweep(log_spaced(lo, hi, points), opt.l, fmt, strategies)) {
    csv << format_real(p.rho, 10) << ',' << to_string(p.strategy) << ',' << format_real(p.forward_pct, 6) << ','
        << format_real(p.backward_pct, 6) << ',' << (p.finite ? 1 : 0) << '\n';
  }
  return ok;
}

int cmd_horizon(const HorizonOptions& opt, std::ostream& out, std::ostream&) {
  Sink sink(opt.csv, out);
  std::ostream& os = *sink;
  if (!opt.format.empty()) {
    os << "format,p,e,bias,rho,eps,eps_subnormal,k_normal,k_subnormal\n";
    if (opt.format == "all") {
      for (const char* name : {"fp32", "fp16", "bf16", "fp8e5m2", "fp8e4m3"}) {
        horizon_row(os, PrecisionFormat::from_name(name));
      }
    } else {
      horizon_row(os, PrecisionFormat::from_name(opt.format));
    }
    return ok;
  }
  if (opt.grid) {
    if (opt.grid_points < 2) throw DomainError("--grid-points must be at least 2");
    os << "eps,rho,k_pointwise,k_tail\n";
    const std::vector<double> eps = log_spaced(1e-5, 1e-1, opt.grid_points);
    for (double e : eps) {
      for (int j = 0; j < opt.grid_points; ++j) {
        // rho on [0.1, 0.99], linear.
        const double rho = 0.1 + (0.99 - 0.1) * j / (opt.grid_points - 1);
        const HorizonQuery q{rho, e, opt.nu, std::nullopt};
        os << format_real(e, 8) << ',' << format_real(rho, 8) << ',' << horizon_pointwise(q) << ','
           << horizon_tail(q) << '\n';
      }
    }
    return ok;
  }
  if (!opt.rho_given && !opt.eps_given) throw DomainError("horizon needs --format, --grid, or --rho/--eps");
  const HorizonResult r = evaluate_horizon({opt.rho, opt.eps, opt.nu, std::nullopt});
  os << "k_pointwise,k_tail\n" << r.k_pointwise << ',' << r.k_tail << '\n';
  return ok;
}

int cmd_bench(const BenchOptions& opt, std::ostream& out, std::ostream& err) {
  if (opt.runs < 5) throw DomainError("--runs must be at least 5");
  if (opt.warmup < 0) throw DomainError("--warmup must be non-negative");
  const auto algos = split(opt.algos, ',');
  const auto ns = split_numbers<Index>(opt.ns);
  const auto workers = split_numbers<int>(opt.workers);
  if (algos.empty()) throw DomainError("--algo list is empty");

  Sink sink(opt.csv, out);
  std::ostream& csv = *sink;
  csv << "algo,n,l,workers,median_ms,tokens_per_s\n";
  for (Index n : ns) {
    const auto [a, u] = random_problem(opt.seed, n, opt.d);
    for (const auto& algo : algos) {
      const bool threaded = algo == "b2p-parallel";
      for (int w : threaded ? workers : std::vector<int>{1}) {
        SolverParams params{opt.l, opt.k, w, opt.segment_len};
        for (int i = 0; i < opt.warmup; ++i) run_algorithm(algo, a, u, params, i == 0 ? &err : nullptr);
        std::vector<double> times;
        double sink_value = 0.0;
        for (int r = 0; r < opt.runs; ++r) {
          const auto start = Clock::now();
          const States x = run_algorithm(algo, a, u, params);
          times.push_back(elapsed_ms(start));
          sink_value += x.x(n - 1, 0);
        }
        std::nth_element(times.begin(), times.begin() + times.size() / 2, times.end());
        const double median = times[times.size() / 2];
        const double tps = median > 0.0 ? static_cast<double>(n) / (median / 1000.0) : 0.0;
        csv << algo << ',' << n << ',' << opt.l << ',' << w << ',' << format_real(median, 6) << ','
            << format_real(tps, 6) << '\n';
        if (!std::isfinite(sink_value)) err << "warning: " << algo << " produced non-finite output\n";
      }
    }
  }
  return ok;
}

int cmd_layer(const LayerOptions& opt, std::ostream& out, std::ostream&) {
  LayerConfig cfg = LayerConfig::make(opt.D, opt.h, opt.l);
  if (opt.q_groups > 0) cfg.q_groups = opt.q_groups;
  if (opt.k_groups > 0) cfg.k_groups = opt.k_groups;
  cfg.validate();
  if (opt.n < 1) throw ShapeError("--n must be positive");

  WindowSpec window;
  if (opt.window == "jagged") {
    window = WindowSpec::jagged(opt.l);
  } else if (opt.window == "full") {
    window = WindowSpec::full();
  } else if (opt.window == "uniform") {
    window = WindowSpec::uniform(opt.k);
  } else {
    throw DomainError("--window must be jagged, uniform or full");
  }

  SeededRng rng(opt.seed);
  const LayerParams params = init_params(cfg, rng);
  TimeMajor<double> u(opt.n, cfg.model_dim);
  for (Index i = 0; i < u.rows(); ++i) {
    for (Index c = 0; c < u.cols(); ++c) u(i, c) = rng.uniform(-1.0, 1.0);
  }

  if (!opt.export_params.empty()) {
    std::ofstream file(opt.export_params);
    if (!file) throw InputError("cannot write " + opt.export_params);
    file << params_to_json(params, cfg).dump(2) << '\n';
  }

  const TimeMajor<double> y = layer_forward(u, params, cfg, window);
  std::ostringstream bytes;
  write_states_csv(bytes, y, 17);
  out << "n=" << opt.n << " D=" << cfg.model_dim << " h=" << cfg.heads << " d=" << cfg.head_dim
      << " window=" << opt.window << " checksum=" << hex64(fnv1a64(bytes.str())) << '\n';

  constexpr double tol = 1e-12;
  std::vector<Check> checks;
  const Features f = featurize(u, params, cfg);
  auto residual = [&](const Features& feats, const LayerParams& p) {
    TimeMajor<double> r(feats.v.rows(), cfg.model_dim);
    r = feats.v * p.O.transpose();
    return r;
  };

  {
    LayerParams p = params;
    for (auto& q : p.Q) q.setZero();
    const TimeMajor<double> got = layer_forward(u, p, cfg, window);
    const double e = rel_diff(got, residual(f, p));
    checks.push_back({"q_zero_residual", e == 0.0, e});
  }
  {
    // k -> 0: large negative K on positive inputs drives sigma to exactly zero.
    LayerParams p = params;
    for (auto& k : p.K) k.setConstant(-1e4);
    const TimeMajor<double> upos = (u.array() + 1.0) * 0.5 + 0.25;
    const TimeMajor<double> got = layer_forward(upos, p, cfg, window);
    const double e = rel_diff(got, residual(featurize(upos, p, cfg), p));
    checks.push_back({"k_zero_residual", e == 0.0, e});
  }
  {
    const TimeMajor<double> head = u.topRows(std::min<Index>(opt.n, 2 * opt.l));
    const double e =
        rel_diff(layer_forward(head, params, cfg, WindowSpec::jagged(opt.l)), layer_forward(head, params, cfg, WindowSpec::full()));
    checks.push_back({"prefix_jagged_full", e <= tol, e});
  }
  {
    const TimeMajor<double> full = layer_forward(u, params, cfg, WindowSpec::full());
    const double e1 = rel_diff(layer_forward(u, params, cfg, WindowSpec::uniform(opt.n)), full);
    const double e2 = rel_diff(layer_forward(u, params, cfg, WindowSpec::jagged(opt.n)), full);
    const double e = std::max(e1, e2);
    checks.push_back({"window_consistency", e <= tol, e});
  }
  if (cfg.q_groups == cfg.heads && cfg.k_groups == cfg.heads) {
    std::vector<Index> perm(static_cast<std::size_t>(cfg.heads));
    for (Index eta = 0; eta < cfg.heads; ++eta) perm[static_cast<std::size_t>(eta)] = cfg.heads - 1 - eta;
    const LayerParams p = permute_heads(params, cfg, perm);
    const double e = rel_diff(layer_forward(u, p, cfg, window), y);
    checks.push_back({"head_permutation", e <= tol, e});
  }
  {
    LayerConfig grouped = cfg;
    if (cfg.q_groups == cfg.heads && cfg.heads % 2 == 0) grouped.q_groups = cfg.heads / 2;
    if (cfg.k_groups == cfg.heads && cfg.heads % 2 == 0) grouped.k_groups = cfg.heads / 2;
    SeededRng grng(opt.seed);
    const Features g = featurize(u, init_params(grouped, grng), grouped);
    const Index d = cfg.head_dim;
    bool equal = true;
    for (Index eta = 1; eta < cfg.heads; ++eta) {
      if (grouped.q_group_of(eta) == grouped.q_group_of(eta - 1)) {
        equal = equal && g.q.middleCols(eta * d, d) == g.q.middleCols((eta - 1) * d, d);
      }
      if (grouped.k_group_of(eta) == grouped.k_group_of(eta - 1)) {
        equal = equal && g.k.middleCols(eta * d, d) == g.k.middleCols((eta - 1) * d, d);
      }
    }
    checks.push_back({"group_sharing", equal, equal ? 0.0 : 1.0});
  }

  bool all = true;
  for (const Check& c : checks) {
    out << "check " << c.name << ' ' << (c.pass ? "PASS" : "FAIL") << " err=" << format_real(c.error, 3) << '\n';
    all = all && c.pass;
  }
  return all ? ok : tolerance;
}

}  // namespace swr::cli
