#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "fpt/errors.hpp"
#include "fpt/suites.hpp"

namespace {

void print_summary(const fpt::RunResult& r) {
  long pass = 0, fail = 0, skip = 0;
  for (const auto& c : r.contracts) {
    const std::string tag = c.status == fpt::Status::Pass ? "PASS" : c.status == fpt::Status::Fail ? "FAIL" : "SKIP";
    std::cout << "[" << tag << "] " << c.suite << " " << c.statement << ": " << c.check;
    if (c.status != fpt::Status::Skip) std::cout << " = " << c.value << " (threshold " << c.threshold << ")";
    if (!c.detail.empty()) std::cout << "  " << c.detail;
    std::cout << '\n';
    (c.status == fpt::Status::Pass ? pass : c.status == fpt::Status::Fail ? fail : skip)++;
  }
  for (const auto& rep : r.reports)
    std::cout << "report " << rep.statement << " " << rep.law << " " << rep.x_rule << ": last " << rep.last_value
              << ", drift " << rep.top_octave_drift << ", slope " << rep.slope << ", " << fpt::verdict_name(rep.verdict)
              << '\n';
  std::cout << pass << " passed, " << fail << " failed, " << skip << " skipped\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact and asymptotic first-passage computations for lattice random walks"};
  app.require_subcommand(1);
  fpt::RunConfig cfg;

  CLI::App* run = app.add_subcommand("run", "Run verification suites and write CSV reports");
  run->set_config("--config", "", "INI file with flat key = value entries (keys are the long flag names)");
  run->add_option("--law", cfg.law, "Step law, e.g. lazy:p=0.45, simple, pareto:alpha=0.8")->capture_default_str();
  run->add_option("--suite", cfg.suite,
                  "exact-oracle | identities | regimeA | regimeB | regimeC | prop4 | prop13 | "
                  "stable-identities | mc-crosscheck | all")
      ->capture_default_str();
  run->add_option("--ngrid", cfg.ngrid, "n-grid such as 2^10..2^14 or 128,256 (default per suite)");
  run->add_option("--x", cfg.x, "Fixed barrier for regime A, prop4 A and the MC histogram")->capture_default_str();
  run->add_option("--xn", cfg.xn, "x / c_n for regime B")->capture_default_str();
  run->add_option("--kgrid", cfg.kgrid, "K schedule for regime C")->capture_default_str();
  run->add_option("--k13", cfg.k13, "x / c_n for the large-deviation estimates")->capture_default_str();
  run->add_option("--nmax", cfg.nmax, "Horizon of the identity sweep (0: per-law default)")->capture_default_str();
  run->add_option("--xmax", cfg.xmax, "Largest barrier of the identity sweep (0: per-law default)")
      ->capture_default_str();
  run->add_option("--ymax", cfg.ymax, "Largest endpoint distance of the identity sweep (0: per-law default)")
      ->capture_default_str();
  run->add_option("--ndual", cfg.ndual, "Horizon of the row-sum duality check")->capture_default_str();
  run->add_option("--mc-horizon", cfg.mc_horizon, "Horizon of the MC histogram (0: per law)")->capture_default_str();
  run->add_option("--mc-paths", cfg.mc_paths, "Monte Carlo paths per estimate")->capture_default_str();
  run->add_option("--threads", cfg.threads, "Monte Carlo worker threads")->capture_default_str();
  run->add_option("--out", cfg.out, "Output directory")->capture_default_str();
  run->add_option("--seed", cfg.seed, "Master seed")->capture_default_str();
  run->add_option("--mem-cap", cfg.mem_cap, "Largest DP window in lattice sites")->capture_default_str();
  run->add_option("--heavy-depth", cfg.heavy_depth, "Window depth for unbounded steps")->capture_default_str();
  run->add_option("--heavy-depth-c", cfg.heavy_depth_c, "Window depth for regime C")->capture_default_str();

  auto& t = cfg.tol;
  run->add_option("--tol-oracle", t.oracle)->capture_default_str();
  run->add_option("--tol-identity", t.identity)->capture_default_str();
  run->add_option("--tol-duality", t.duality)->capture_default_str();
  run->add_option("--tol-regime-a", t.regime_a)->capture_default_str();
  run->add_option("--tol-regime-b", t.regime_b)->capture_default_str();
  run->add_option("--tol-regime-c", t.regime_c)->capture_default_str();
  run->add_option("--tol-prop4", t.prop4)->capture_default_str();
  run->add_option("--tol-prop13-sx", t.prop13_sx)->capture_default_str();
  run->add_option("--tol-prop13-sy", t.prop13_sy)->capture_default_str();
  run->add_option("--tol-stability", t.stability)->capture_default_str();
  run->add_option("--tol-constant-drift", t.constant_drift)->capture_default_str();
  run->add_option("--tol-c2-drift", t.c2_drift)->capture_default_str();
  run->add_option("--tol-q-reflection", t.q_reflection)->capture_default_str();
  run->add_option("--tol-riv", t.riv)->capture_default_str();
  run->add_option("--tol-lc-cv", t.lc_cv)->capture_default_str();
  run->add_option("--tol-mc-fraction", t.mc_fraction)->capture_default_str();
  run->add_option("--tol-mc-sigmas", t.mc_sigmas)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const fpt::RunResult r = fpt::run(cfg);
    print_summary(r);
    return r.ok() ? 0 : 1;
  } catch (const fpt::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const fpt::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
