// swr: solve, compare, materialize, horizon, bench and layer subcommands.
//
// --config FILE.json supplies defaults for the chosen subcommand: each key is
// a flag name without dashes. Flags given on the command line win.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "swr/io.hpp"

namespace {

using swr::cli::ExitCode;

const std::vector<std::string> kSubcommands = {"solve", "compare", "materialize", "horizon", "bench", "layer"};

std::uint64_t default_seed() {
  const char* env = std::getenv("SWR_SEED");
  if (!env || !*env) return 0;
  try {
    return std::stoull(env);
  } catch (const std::exception&) {
    throw swr::DomainError(std::string("SWR_SEED is not an unsigned integer: ") + env);
  }
}

std::vector<std::string> config_args(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw swr::InputError("cannot open config " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw swr::InputError("malformed config " + path + ": " + e.what());
  }
  if (!doc.is_object()) throw swr::InputError("config must be a JSON object");

  std::vector<std::string> args;
  for (const auto& [key, value] : doc.items()) {
    const std::string flag = "--" + key;
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back(flag);
    } else if (value.is_string()) {
      args.push_back(flag);
      args.push_back(value.get<std::string>());
    } else if (value.is_number() || value.is_array()) {
      std::string text;
      if (value.is_array()) {
        for (const auto& item : value) {
          if (!text.empty()) text += ',';
          text += item.is_string() ? item.get<std::string>() : item.dump();
        }
      } else {
        text = value.dump();
      }
      args.push_back(flag);
      args.push_back(text);
    } else {
      throw swr::InputError("config key '" + key + "' has an unsupported value");
    }
  }
  return args;
}

/// Removes --config, then splices its arguments in right after the subcommand
/// so that later command-line flags override them.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + 2));
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (path.empty()) return args;

  const auto extra = config_args(path);
  for (std::size_t i = 0; i < args.size(); ++i) {
    for (const auto& sub : kSubcommands) {
      if (args[i] == sub) {
        args.insert(args.begin() + static_cast<std::ptrdiff_t>(i + 1), extra.begin(), extra.end());
        return args;
      }
    }
  }
  throw swr::DomainError("--config needs a subcommand");
}

void add_solver_params(CLI::App* cmd, swr::cli::SolverParams& p) {
  cmd->add_option("--l", p.l, "block size for blocked solvers")->capture_default_str();
  cmd->add_option("--k", p.k, "bandwidth for the uniform window")->capture_default_str();
  cmd->add_option("--workers", p.workers, "threads for b2p-parallel")->capture_default_str();
  cmd->add_option("--segment-len", p.segment_len, "blocks per barrier segment (0: one segment)")
      ->capture_default_str();
}

std::string algo_help() {
  std::string text = "one of:";
  for (const auto& name : swr::cli::algorithm_names()) text += " " + name;
  return text;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace swr::cli;
  try {
    const std::uint64_t seed = default_seed();

    CLI::App app{"Linear recurrence solvers, sliding-window truncations and horizon analysis"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "JSON file of flag defaults for the subcommand");

    SolveOptions solve;
    solve.seed = seed;
    auto* s = app.add_subcommand("solve", "run one solver and write the states as CSV");
    s->add_option("--algo", solve.algo, algo_help())->capture_default_str();
    s->add_option("--input", solve.input, "sequence file (.csv or .json)");
    s->add_flag("--random", solve.random, "generate a ~ U(0,1), u ~ U(-1,1)");
    s->add_option("--n", solve.n, "length for --random")->capture_default_str();
    s->add_option("--d", solve.d, "channels for --random")->capture_default_str();
    s->add_option("--seed", solve.seed, "seed for --random (default $SWR_SEED or 0)");
    s->add_option("--output,-o", solve.output, "state CSV path ('-' for stdout)");
    s->add_option("--write-input", solve.write_input, "also write the input sequence as CSV");
    s->add_option("--digits", solve.digits, "significant digits in the state CSV")->capture_default_str();
    add_solver_params(s, solve.params);

    CompareOptions compare;
    compare.seed = seed;
    auto* c = app.add_subcommand("compare", "per-seed error of one solver against another");
    c->add_option("--algo", compare.algo, algo_help())->capture_default_str();
    c->add_option("--against", compare.against, "reference solver")->capture_default_str();
    c->add_option("--n", compare.n)->capture_default_str();
    c->add_option("--d", compare.d)->capture_default_str();
    c->add_option("--seed", compare.seed, "first seed");
    c->add_option("--seeds", compare.seeds, "number of consecutive seeds")->capture_default_str();
    c->add_option("--rho", compare.rho, "coefficients drawn from U(0, rho)")->capture_default_str();
    c->add_option("--assert-tol", compare.assert_tol, "exit 4 if any max_rel_err exceeds this");
    c->add_option("--report", compare.report, "report format (csv)")->capture_default_str();
    c->add_option("--csv", compare.csv, "output path (default stdout)");
    add_solver_params(c, compare.params);

    MaterializeOptions mat;
    auto* m = app.add_subcommand("materialize", "tile materialization error sweep under emulated precision");
    m->add_option("--strategy", mat.strategy, "ratio, log-outer-diff, log-cumsum, linear-cumprod or all")
        ->capture_default_str();
    m->add_option("--format", mat.format, "precision preset")->capture_default_str();
    m->add_option("--rho-sweep", mat.rho_sweep, "lo:hi:points, log-spaced")->capture_default_str();
    m->add_option("--l", mat.l, "block size")->capture_default_str();
    m->add_option("--csv", mat.csv, "output path (default stdout)");

    HorizonOptions hz;
    auto* h = app.add_subcommand("horizon", "bandwidth needed for a target accuracy or before underflow");
    h->add_option("--format", hz.format, "precision preset, or 'all'");
    auto* rho_opt = h->add_option("--rho", hz.rho, "contraction factor")->capture_default_str();
    auto* eps_opt = h->add_option("--eps", hz.eps, "target accuracy")->capture_default_str();
    h->add_option("--nu", hz.nu, "input bound")->capture_default_str();
    h->add_flag("--grid", hz.grid, "emit an eps x rho grid of k as CSV");
    h->add_option("--grid-points", hz.grid_points, "grid points per axis")->capture_default_str();
    h->add_option("--csv", hz.csv, "output path (default stdout)");

    BenchOptions bench;
    bench.seed = seed;
    auto* b = app.add_subcommand("bench", "median wall time over repeated runs");
    b->add_option("--algo", bench.algos, "comma-separated solvers")->capture_default_str();
    b->add_option("--n", bench.ns, "comma-separated lengths")->capture_default_str();
    b->add_option("--workers", bench.workers, "comma-separated worker counts")->capture_default_str();
    b->add_option("--l", bench.l)->capture_default_str();
    b->add_option("--k", bench.k)->capture_default_str();
    b->add_option("--d", bench.d)->capture_default_str();
    b->add_option("--segment-len", bench.segment_len)->capture_default_str();
    b->add_option("--runs", bench.runs, "timed runs (>= 5)")->capture_default_str();
    b->add_option("--warmup", bench.warmup, "discarded runs")->capture_default_str();
    b->add_option("--seed", bench.seed);
    b->add_option("--csv", bench.csv, "output path (default stdout)");

    LayerOptions layer;
    auto* y = app.add_subcommand("layer", "Phalanx layer forward pass with invariant checks");
    y->set_help_flag("--help", "Print this help message and exit");  // frees -h for the head count
    y->add_option("--D", layer.D, "model dimension")->capture_default_str();
    y->add_option("--h", layer.h, "heads")->capture_default_str();
    y->add_option("--n", layer.n, "sequence length")->capture_default_str();
    y->add_option("--l", layer.l, "block size")->capture_default_str();
    y->add_option("--k", layer.k, "bandwidth for --window uniform")->capture_default_str();
    y->add_option("--q-groups", layer.q_groups, "Q gate groups (0: per head)");
    y->add_option("--k-groups", layer.k_groups, "K gate groups (0: per head)");
    y->add_option("--seed", layer.seed)->capture_default_str();
    y->add_option("--window", layer.window, "jagged, uniform or full")->capture_default_str();
    y->add_option("--export-params", layer.export_params, "write parameters as JSON");

    std::vector<std::string> args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());
    try {
      app.parse(args);
    } catch (const CLI::ParseError& e) {
      return app.exit(e) == 0 ? ok : usage;
    }
    hz.rho_given = rho_opt->count() > 0;
    hz.eps_given = eps_opt->count() > 0;

    if (s->parsed()) return cmd_solve(solve, std::cout, std::cerr);
    if (c->parsed()) return cmd_compare(compare, std::cout, std::cerr);
    if (m->parsed()) return cmd_materialize(mat, std::cout, std::cerr);
    if (h->parsed()) return cmd_horizon(hz, std::cout, std::cerr);
    if (b->parsed()) return cmd_bench(bench, std::cout, std::cerr);
    if (y->parsed()) return cmd_layer(layer, std::cout, std::cerr);
    return usage;
  } catch (const swr::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return unreadable;
  } catch (const swr::ShapeError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return bad_shape;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return usage;
  }
}
