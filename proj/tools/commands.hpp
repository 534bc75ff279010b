#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "swr/recurrence.hpp"

namespace swr::cli {

enum ExitCode : int { ok = 0, usage = 1, unreadable = 2, bad_shape = 3, tolerance = 4 };

/// Knobs shared by every solver selector.
struct SolverParams {
  Index l = 16;
  Index k = 16;
  int workers = 1;
  Index segment_len = 0;  // blocks per barrier segment; 0 = one segment
};

const std::vector<std::string>& algorithm_names();

/// Runs the named solver. Blocked solvers zero-pad a partial tail block and
/// note it on `warn`.
States run_algorithm(const std::string& algo, const Coefficients& a, const Inputs& u, const SolverParams& params,
                     std::ostream* warn = nullptr);

/// Largest lag the algorithm keeps in every row (n for exact solvers).
Index retained_lag_of(const std::string& algo, const SolverParams& params, Index n);

/// a ~ U(0, rho) for n steps, then u ~ U(-1, 1) row by row.
std::pair<Coefficients, Inputs> random_problem(std::uint64_t seed, Index n, Index d, double rho = 1.0);

struct SolveOptions {
  std::string algo = "sequential";
  std::string input;
  bool random = false;
  Index n = 64;
  Index d = 1;
  std::uint64_t seed = 0;
  SolverParams params;
  std::string output;
  std::string write_input;
  int digits = 17;
};

struct CompareOptions {
  std::string algo = "b2p";
  std::string against = "sequential";
  Index n = 64;
  Index d = 1;
  std::uint64_t seed = 0;
  int seeds = 1;
  double rho = 1.0;
  SolverParams params;
  double assert_tol = -1.0;  // negative: no assertion
  std::string report = "csv";
  std::string csv;
};

struct MaterializeOptions {
  std::string strategy = "all";
  std::string format = "bf16";
  std::string rho_sweep = "1e-4:1:32";
  Index l = 16;
  std::string csv;
};

struct HorizonOptions {
  std::string format;
  double rho = 0.5;
  double eps = 1e-4;
  double nu = 1.0;
  bool rho_given = false;
  bool eps_given = false;
  bool grid = false;
  int grid_points = 30;
  std::string csv;
};

struct BenchOptions {
  std::string algos = "b2p-parallel";
  std::string ns = "4096";
  std::string workers = "1";
  Index l = 16;
  Index k = 16;
  Index d = 16;
  Index segment_len = 0;
  int runs = 5;
  int warmup = 1;
  std::uint64_t seed = 0;
  std::string csv;
};

struct LayerOptions {
  Index D = 64;
  Index h = 4;
  Index n = 128;
  Index l = 16;
  Index k = 16;
  Index q_groups = 0;  // 0: one group per head
  Index k_groups = 0;
  std::uint64_t seed = 3;
  std::string window = "jagged";
  std::string export_params;
};

int cmd_solve(const SolveOptions& opt, std::ostream& out, std::ostream& err);
int cmd_compare(const CompareOptions& opt, std::ostream& out, std::ostream& err);
int cmd_materialize(const MaterializeOptions& opt, std::ostream& out, std::ostream& err);
int cmd_horizon(const HorizonOptions& opt, std::ostream& out, std::ostream& err);
int cmd_bench(const BenchOptions& opt, std::ostream& out, std::ostream& err);
int cmd_layer(const LayerOptions& opt, std::ostream& out, std::ostream& err);

}  // namespace swr::cli
