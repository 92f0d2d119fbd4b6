#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fpt/regimes.hpp"

namespace fpt {

struct Tolerances {
  double oracle = 1e-12;
  double identity = 1e-10;
  double duality = 1e-12;
  double regime_a = 0.10;
  double regime_b = 0.10;
  double regime_c = 0.15;
  double prop4 = 0.15;
  double prop13_sx = 0.10;
  double prop13_sy = 0.15;
  double stability = 0.05;
  double constant_drift = 0.05;
  double c2_drift = 0.20;
  double q_reflection = 0.02;
  double riv = 0.15;
  double lc_cv = 0.10;
  double mc_fraction = 0.95;
  double mc_sigmas = 4.0;
};

struct RunConfig {
  std::string law = "lazy:p=0.45";
  /// exact-oracle | identities | regimeA | regimeB | regimeC | prop4 | prop13 | stable-identities |
  /// mc-crosscheck | all
  std::string suite = "all";
  /// Empty selects the per-suite default.
  std::string ngrid;
  /// Fixed barrier for regime A, prop4 variant A and the MC histogram.
  long x = 5;
  /// x_n = x / c_n for regime B.
  double xn = 1.0;
  /// K schedule for regime C; the first entry is the reference the last must beat.
  std::string kgrid = "10,50,100";
  /// K for the large-deviation estimates.
  double k13 = 30.0;
  /// Horizon and barrier/endpoint ranges of the identity sweep; 0 selects 200/30/30 for bounded
  /// steps and 100/20/20 otherwise.
  long nmax = 0;
  long xmax = 0;
  long ymax = 0;
  /// Horizon of the row-sum duality check.
  long ndual = 1000;
  /// Horizon of the MC histogram (0: 1024 for bounded laws, 256 otherwise).
  long mc_horizon = 0;
  long mc_paths = 100000;
  int threads = 1;
  std::string out = "fpt-out";
  std::uint64_t seed = 1;
  /// Largest DP window in sites.
  long mem_cap = 1L << 24;
  /// Window depth for unbounded steps; regime C uses heavy_depth_c.
  long heavy_depth = 1L << 16;
  long heavy_depth_c = 1L << 18;
  Tolerances tol;
};

enum class Status { Pass, Fail, Skip };
std::string status_name(Status s);

/// One checked contract. `value` is compared against `threshold` in the direction the check names.
struct Contract {
  std::string suite;
  std::string statement;
  std::string check;
  double value = 0.0;
  double threshold = 0.0;
  Status status = Status::Pass;
  std::string detail;
};

struct RunResult {
  std::vector<Contract> contracts;
  std::vector<ConvergenceReport> reports;
  bool ok() const;
};

/// "2^10..2^14" (doubling range), "100..800" (doubling from 100), or a comma list.
std::vector<long> parse_ngrid(const std::string& spec);
std::vector<double> parse_list(const std::string& key, const std::string& spec);

/// Throws ConfigError naming the offending key.
void validate(const RunConfig& cfg);

const std::vector<std::string>& suite_names();

/// Runs the selected suites, writes their CSVs under cfg.out plus summary.csv and contracts.csv.
RunResult run(const RunConfig& cfg);

}  // namespace fpt
