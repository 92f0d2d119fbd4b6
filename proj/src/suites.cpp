#include "fpt/suites.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "fpt/csv.hpp"
#include "fpt/errors.hpp"
#include "fpt/mc.hpp"
#include "fpt/stable.hpp"

namespace fpt {

namespace {

bool bounded(const StepLaw& law) {
  return law.min_step() != std::numeric_limits<long>::min() && law.max_step() != std::numeric_limits<long>::max();
}

bool spectrally_negative(const StepLaw& law) {
  return law.alpha() < 2.0 && std::abs(law.alpha() * law.rho() - 1.0) < 1e-12;
}

std::string error_kind(const Error& e) {
  if (dynamic_cast<const WindowOverflow*>(&e)) return "WindowOverflow";
  if (dynamic_cast<const DefectTooLarge*>(&e)) return "DefectTooLarge";
  if (dynamic_cast<const AtomTooLarge*>(&e)) return "AtomTooLarge";
  if (dynamic_cast<const QuadratureFailure*>(&e)) return "QuadratureFailure";
  if (dynamic_cast<const NormalizationUnavailable*>(&e)) return "NormalizationUnavailable";
  if (dynamic_cast<const SingularIntegrand*>(&e)) return "SingularIntegrand";
  if (dynamic_cast<const ResolutionTooCoarse*>(&e)) return "ResolutionTooCoarse";
  if (dynamic_cast<const PreconditionViolated*>(&e)) return "PreconditionViolated";
  if (dynamic_cast<const NonConvergence*>(&e)) return "NonConvergence";
  if (dynamic_cast<const InvalidLaw*>(&e)) return "InvalidLaw";
  return "Error";
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

// Largest |ratio - 1| over the grid is non-increasing from point to point.
bool monotone_improvement(const ConvergenceReport& r) {
  for (std::size_t i = 1; i < r.ratio.size(); ++i)
    if (std::abs(r.ratio[i] - 1.0) > std::abs(r.ratio[i - 1] - 1.0)) return false;
  return true;
}

// Suite context: collects contracts and reports, owns the output directory.
class Suite {
 public:
  Suite(std::string name, const RunConfig& cfg, const StepLaw& law, RunResult& out)
      : name_(std::move(name)), cfg_(cfg), law_(law), out_(out) {}

  const RunConfig& cfg() const { return cfg_; }
  const StepLaw& law() const { return law_; }

  WindowPolicy policy(long depth = 0) const {
    WindowPolicy p;
    p.heavy_depth = depth > 0 ? depth : cfg_.heavy_depth;
    p.mem_cap_sites = cfg_.mem_cap;
    return p;
  }

  std::string path(const std::string& file) const {
    return (std::filesystem::path(cfg_.out) / (name_ + "_" + file + ".csv")).string();
  }

  std::vector<long> grid(const std::string& bounded_default, const std::string& heavy_default) const {
    if (!cfg_.ngrid.empty()) return parse_ngrid(cfg_.ngrid);
    return parse_ngrid(bounded(law_) ? bounded_default : heavy_default);
  }

  void add(const std::string& statement, const std::string& check, double value, double threshold, bool passed,
           const std::string& detail = "") {
    Contract c;
    c.suite = name_;
    c.statement = statement;
    c.check = check;
    c.value = value;
    c.threshold = threshold;
    c.status = passed ? Status::Pass : Status::Fail;
    c.detail = detail;
    out_.contracts.push_back(c);
  }
  void at_most(const std::string& statement, const std::string& check, double value, double threshold,
               const std::string& detail = "") {
    add(statement, check, value, threshold, std::isfinite(value) && value <= threshold, detail);
  }
  void at_least(const std::string& statement, const std::string& check, double value, double threshold,
                const std::string& detail = "") {
    add(statement, check, value, threshold, std::isfinite(value) && value >= threshold, detail);
  }
  void holds(const std::string& statement, const std::string& check, bool ok, const std::string& detail = "") {
    add(statement, check, ok ? 1.0 : 0.0, 1.0, ok, detail);
  }
  void skip(const std::string& statement, const std::string& reason) {
    Contract c;
    c.suite = name_;
    c.statement = statement;
    c.check = "applicable";
    c.status = Status::Skip;
    c.detail = reason;
    out_.contracts.push_back(c);
  }

  void report(const ConvergenceReport& r) {
    out_.reports.push_back(r);
    mine_.push_back(r);
  }

  /// Trend contract for a target-1 report: within tol at the last point and converging.
  void converging(const ConvergenceReport& r, double tol) {
    report(r);
    const std::string cell = r.x_rule;
    at_most(r.statement, "last |ratio-1| " + cell, r.last_error(), tol);
    holds(r.statement, "verdict converging " + cell, r.verdict == Verdict::Converging, verdict_name(r.verdict));
  }

  /// Runs one cell; library failures become failed contracts naming the cell.
  void cell(const std::string& statement, const std::string& where, const std::function<void()>& body) {
    try {
      body();
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      add(statement, "completed", 0.0, 1.0, false, error_kind(e) + " at " + where + ": " + e.what());
    }
  }

  void flush() const {
    if (!mine_.empty()) write_report_csv(path("reports"), mine_);
  }

 private:
  std::string name_;
  const RunConfig& cfg_;
  const StepLaw& law_;
  RunResult& out_;
  std::vector<ConvergenceReport> mine_;
};

RenewalTables renewal_up_to(const Suite& s, long xmax) {
  LadderOptions lo;
  lo.horizon = bounded(s.law()) ? 64 : 512;
  lo.store_width = 2;
  lo.height_cap = xmax + 2;
  // Heights need small window loss; the deeper regime-C window keeps it below the tolerance.
  lo.depth = s.cfg().heavy_depth_c;
  lo.height_defect_tol = bounded(s.law()) ? 1e-9 : 1e-3;
  lo.policy = s.policy();
  return renewal_functions(ladder_height_pmfs(s.law(), lo), xmax);
}

// ---------------------------------------------------------------------------------------------
// exact-oracle

// Exhaustive enumeration of all paths of length <= nmax, tracking every barrier 0..xmax at once.
struct Enumeration {
  long lo = 0;
  std::vector<std::vector<long double>> fp;                   // [x][n]
  std::vector<std::vector<std::vector<long double>>> killed;  // [x][n][site - lo]
};

Enumeration enumerate_paths(const StepLaw& law, long xmax, long nmax) {
  std::vector<std::pair<long, long double>> steps;
  for (long k = law.min_step(); k <= law.max_step(); ++k)
    if (law.pmf(k) > 0.0) steps.emplace_back(k, static_cast<long double>(law.pmf(k)));
  Enumeration e;
  e.lo = std::min(0L, nmax * law.min_step());
  const auto width = static_cast<std::size_t>(xmax - e.lo + 1);
  const auto X = static_cast<std::size_t>(xmax + 1);
  const auto N = static_cast<std::size_t>(nmax + 1);
  e.fp.assign(X, std::vector<long double>(N, 0.0L));
  e.killed.assign(X, std::vector<std::vector<long double>>(N, std::vector<long double>(width, 0.0L)));
  std::function<void(long, long, long, long double)> dfs = [&](long n, long s, long m, long double p) {
    for (const auto& [k, pk] : steps) {
      const long s2 = s + k;
      const long m2 = std::max(m, s2);
      const long double p2 = p * pk;
      const auto n2 = static_cast<std::size_t>(n + 1);
      for (long x = m; x <= std::min(s2 - 1, xmax); ++x) e.fp[static_cast<std::size_t>(x)][n2] += p2;
      for (long x = m2; x <= xmax; ++x)
        e.killed[static_cast<std::size_t>(x)][n2][static_cast<std::size_t>(s2 - e.lo)] += p2;
      if (m2 <= xmax && n + 1 < nmax) dfs(n + 1, s2, m2, p2);
    }
  };
  dfs(0, 0, 0, 1.0L);
  return e;
}

void suite_exact_oracle(Suite& s) {
  const StepLaw& law = s.law();
  constexpr long kX = 3;
  constexpr long kN = 12;
  if (law.min_step() < -2 || law.max_step() > 2) {
    s.skip("oracle", "enumeration needs support within [-2, 2]");
    return;
  }
  s.cell("oracle", "x<=3,n<=12", [&] {
    const Enumeration e = enumerate_paths(law, kX, kN);
    CsvWriter csv(s.path("oracle"), {"x", "n", "fp", "fp_oracle", "surv", "surv_oracle", "max_snapshot_diff"});
    double worst = 0.0;
    for (long x = 0; x <= kX; ++x) {
      const auto xi = static_cast<std::size_t>(x);
      const FirstPassageTable t = first_passage_table(law, x, kN, s.policy());
      for (long n = 1; n <= kN; ++n) {
        const auto ni = static_cast<std::size_t>(n);
        long double surv = 0.0L;
        for (long double v : e.killed[xi][ni]) surv += v;
        const KilledLawVector snap = killed_snapshot(law, x, n, s.policy());
        double snap_diff = 0.0;
        for (long site = e.lo; site <= x; ++site)
          snap_diff = std::max(
              snap_diff,
              std::abs(snap.at(site) - static_cast<double>(e.killed[xi][ni][static_cast<std::size_t>(site - e.lo)])));
        const double fpd = std::abs(t.fp[ni] - static_cast<double>(e.fp[xi][ni]));
        const double svd = std::abs(t.surv[ni] - static_cast<double>(surv));
        worst = std::max({worst, fpd, svd, snap_diff});
        csv.row(x, n, t.fp[ni], static_cast<double>(e.fp[xi][ni]), t.surv[ni], static_cast<double>(surv), snap_diff);
      }
    }
    s.at_most("oracle", "max abs diff vs enumeration", worst, s.cfg().tol.oracle);
  });
}

// ---------------------------------------------------------------------------------------------
// identities

void suite_identities(Suite& s) {
  const StepLaw& law = s.law();
  const RunConfig& cfg = s.cfg();
  const bool heavy = !bounded(law);
  const long nmax = cfg.nmax > 0 ? cfg.nmax : (heavy ? 100 : 200);
  const long xmax = cfg.xmax > 0 ? cfg.xmax : (heavy ? 20 : 30);
  const long ymax = cfg.ymax > 0 ? cfg.ymax : (heavy ? 20 : 30);
  const long ndual = heavy ? std::min(cfg.ndual, nmax) : cfg.ndual;

  s.cell("decomposition", "n<=" + std::to_string(nmax) + ",x<=" + std::to_string(xmax) + ",y<=" + std::to_string(ymax),
         [&] {
           LadderOptions lo;
           lo.horizon = std::max(nmax, ndual);
           lo.store_width = std::max(xmax, ymax) + 2;
           lo.height_cap = 4;
           lo.height_defect_tol = 1.0;
           lo.depth = heavy ? cfg.heavy_depth : 0;
           lo.policy = s.policy();
           const LadderTables t = build_ladder_tables(law, lo);
           write_ladder_csv(s.path("ladder"), t, lo.store_width - 1);

           const DecompositionSweep sw = decomposition_sweep(law, t, nmax, xmax, ymax, s.policy());
           {
             CsvWriter csv(s.path("decomposition"), {"nmax", "xmax", "ymax", "cells", "max_residual", "worst_n",
                                                     "worst_x", "worst_y", "max_defect"});
             csv.row(nmax, xmax, ymax, sw.cells, sw.max_residual, sw.worst_n, sw.worst_x, sw.worst_y, sw.max_defect);
           }
           s.at_most("decomposition", "max relative residual", sw.max_residual, cfg.tol.identity,
                     "worst n=" + std::to_string(sw.worst_n) + " x=" + std::to_string(sw.worst_x) +
                         " y=" + std::to_string(sw.worst_y));

           // P(tau > n) from the gminus rows against 1 - sum P(T_0 = m) from the killed engine.
           const FirstPassageTable f0 = first_passage_table(law, 0, ndual, s.policy());
           CsvWriter csv(s.path("duality"), {"n", "gminus_rowsum", "gminus_defect", "one_minus_cum_fp", "abs_diff"});
           long double cum = 0.0L;
           double worst_excess = 0.0;
           double worst = 0.0;
           for (long n = 1; n <= ndual; ++n) {
             const auto ni = static_cast<std::size_t>(n);
             cum += f0.fp[ni];
             const double rhs = static_cast<double>(1.0L - cum);
             const double diff = std::abs(t.gminus_rowsum[ni] - rhs);
             const double allowance = t.gminus_defect[ni] + f0.defect[ni];
             worst = std::max(worst, diff);
             worst_excess = std::max(worst_excess, diff - allowance);
             csv.row(n, t.gminus_rowsum[ni], t.gminus_defect[ni], rhs, diff);
           }
           s.at_most("duality", "max |rowsum - (1 - sum fp)| minus defects, n<=" + std::to_string(ndual), worst_excess,
                     cfg.tol.duality, "raw max diff " + fmt(worst));
         });

  // Constants (k4, k5, k6) and the C2 row bound need long horizons with full rows.
  s.cell("constants", "constant diagnostics", [&] {
    const std::vector<long> cgrid = parse_ngrid(heavy ? "2^6..2^9" : "2^7..2^14");
    const long nmax = cgrid.back();
    const long xmax = static_cast<long>(std::ceil(2.0 * law.norming(static_cast<double>(nmax)))) + 2;
    LadderOptions lo;
    lo.horizon = nmax;
    lo.store_width = 2;
    lo.full_rows = cgrid;
    lo.height_cap = xmax + 2;
    lo.height_defect_tol = heavy ? 1e-3 : 1e-9;
    lo.depth = heavy ? cfg.heavy_depth : 0;
    lo.policy = s.policy();
    const LadderTables t = build_ladder_tables(law, lo);
    // Heavy ladder heights truncated at the grid horizon inflate U(c_n) and V(c_n); resolve them over
    // four times the horizon instead.
    LadderHeights heights = t.heights;
    if (heavy) {
      LadderOptions ho = lo;
      ho.horizon = 4 * nmax;
      ho.full_rows.clear();
      ho.height_defect_tol = 1e-2;
      heights = ladder_height_pmfs(law, ho);
    }
    const RenewalTables r = renewal_functions(heights, xmax);
    write_renewal_csv(s.path("renewal"), r);
    const ConstantDiagnostics d = constant_diagnostics(law, t, r, cgrid);
    {
      CsvWriter csv(s.path("constants"), {"n", "cn", "k4", "k5", "k6", "erickson"});
      for (const auto& row : d.rows) csv.row(row.n, row.cn, row.k4, row.k5, row.k6, row.erickson);
    }
    s.at_most("k4", "top-octave drift", d.drift_k4, cfg.tol.constant_drift);
    s.at_most("k5", "top-octave drift", d.drift_k5, cfg.tol.constant_drift);
    s.at_most("k6", "top-octave drift", d.drift_k6, cfg.tol.constant_drift);
    const RenewalBound l3 = renewal_ratio_bound(law, t, r, cgrid);
    {
      CsvWriter csv(s.path("c2_bound"), {"n", "c2_g", "c2_gminus"});
      for (const auto& row : l3.rows) csv.row(row.n, row.c2_g, row.c2_gminus);
    }
    s.at_most("c2-bound", "fitted C2 top-octave drift", l3.drift, cfg.tol.c2_drift, "C2=" + fmt(l3.c2));
  });
}

// ---------------------------------------------------------------------------------------------
// regimes

void local_regimeA(Suite& s, const RenewalTables& r, const std::vector<long>& grid) {
  const StepLaw& law = s.law();
  const RunConfig& cfg = s.cfg();
  const std::string xs = "x=" + std::to_string(cfg.x);
  const ConvergenceReport a = regimeA(law, r.U, XRule::fixed(cfg.x), grid, s.policy());
  s.converging(a, cfg.tol.regime_a);
  s.holds("local-small-x", "monotone improvement " + xs, monotone_improvement(a));

  const ConvergenceReport zero = regimeA(law, r.U, XRule::fixed(0), grid, s.policy());
  s.report(zero);
  bool exact = true;
  for (double v : zero.ratio) exact = exact && v == 1.0;
  s.holds("local-small-x", "x=0 ratio identically 1", exact);

  const ConvergenceReport sq = regimeA(law, r.U, XRule::sqrt_cn(), grid, s.policy());
  s.report(sq);
  s.holds("local-small-x", "verdict converging " + sq.x_rule, sq.verdict == Verdict::Converging,
          verdict_name(sq.verdict));
}

void suite_regimeA(Suite& s) {
  const StepLaw& law = s.law();
  const RunConfig& cfg = s.cfg();
  const std::vector<long> grid = s.grid("2^11..2^14", "2^7..2^10");
  const std::string xs = "x=" + std::to_string(cfg.x);

  if (spectrally_negative(law)) {
    s.cell("local-small-x", xs, [&] {
      const EppelReport rep = eppel_regimeA_speclneg(law, cfg.x, grid, s.policy());
      s.converging(rep.regime_a, cfg.tol.regime_a);
      s.converging(rep.regime_a_tail, cfg.tol.regime_a);
      s.report(rep.omega);
      s.at_most("omega", "top-octave drift", rep.omega.top_octave_drift, 0.10);
      CsvWriter csv(s.path("delta"), {"n", "n_tail_at_delta_cn"});
      for (std::size_t i = 0; i < grid.size() && i < rep.delta_diagnostic.size(); ++i)
        csv.row(grid[i], rep.delta_diagnostic[i]);
      // Identically zero once delta_n c_n clears the bounded right support.
      const auto& dd = rep.delta_diagnostic;
      const bool shrinking = dd.size() < 2 || dd.back() < dd.front() || dd.back() == 0.0;
      s.holds("delta", "n F(delta_n c_n) tends to 0", shrinking);
      s.holds("one-big-jump", "regime C rejected for alpha rho = 1", !rep.regime_c_skipped.empty(),
              rep.regime_c_skipped);
    });
    return;
  }

  s.cell("local-small-x", xs, [&] {
    const long sq = XRule::sqrt_cn().at(law, grid.back());
    const RenewalTables r = renewal_up_to(s, std::max(cfg.x, sq) + 1);
    if (law.aperiodic())
      local_regimeA(s, r, grid);
    else
      s.skip("local-small-x", "periodic law: local passage probabilities vanish on one residue class");
    const ConvergenceReport tail = regimeA_tail(law, r.U, XRule::fixed(cfg.x), grid, s.policy());
    s.converging(tail, cfg.tol.regime_a);
    ConvergenceReport tail0 = regimeA_tail(law, r.U, XRule::fixed(0), grid, s.policy());
    s.report(tail0);
    bool exact_tail = true;
    for (double v : tail0.ratio) exact_tail = exact_tail && v == 1.0;
    s.holds("tail-small-x", "x=0 ratio identically 1", exact_tail);
  });
}

void suite_regimeB(Suite& s) {
  const StepLaw& law = s.law();
  const RunConfig& cfg = s.cfg();
  const std::vector<long> grid = s.grid("2^10..2^14", "2^7..2^10");
  const bool gaussian = law.alpha() == 2.0;
  if (!law.aperiodic()) {
    s.skip("local-scaled-x", "periodic law: local passage probabilities vanish on one residue class");
    return;
  }
  std::vector<double> xns{cfg.xn};
  for (double v : {0.5, 2.0})
    if (std::abs(v - cfg.xn) > 1e-12) xns.push_back(v);
  for (double xn : xns) {
    s.cell("local-scaled-x", "x_n=" + fmt(xn), [&] {
      if (gaussian) {
        const ConvergenceReport r = regimeB(law, brownian_h, xn, grid, s.policy());
        if (xn == cfg.xn) {
          s.converging(r, cfg.tol.regime_b);
        } else {
          s.report(r);
          s.holds("local-scaled-x", "verdict converging " + r.x_rule, r.verdict == Verdict::Converging,
                  verdict_name(r.verdict));
        }
        return;
      }
      // No closed-form h: n P(T_x = n) must settle at a constant (compared with the passage-density integral in
      // stable-identities).
      ConvergenceReport r = regimeB(law, [](double) { return 1.0; }, xn, grid, s.policy());
      r.target = std::numeric_limits<double>::quiet_NaN();
      finalize_report(r);
      s.report(r);
      s.at_most("local-scaled-x", "top-octave drift " + r.x_rule, r.top_octave_drift, cfg.tol.regime_b);
    });
  }
}

void suite_regimeC(Suite& s) {
  const StepLaw& law = s.law();
  const RunConfig& cfg = s.cfg();
  if (law.alpha() >= 2.0) {
    s.skip("one-big-jump", "finite-variance law: F(x) vanishes or decays too fast for regime C");
    return;
  }
  if (spectrally_negative(law)) {
    try {
      regimeC(law, 50.0, {512}, s.policy());
      s.holds("one-big-jump", "PreconditionViolated for alpha rho = 1", false);
    } catch (const PreconditionViolated& e) {
      s.holds("one-big-jump", "PreconditionViolated for alpha rho = 1", true, e.what());
    }
    return;
  }
  const std::vector<long> grid = s.grid("2^9", "2^9");
  const std::vector<double> ks = parse_list("kgrid", cfg.kgrid);
  std::vector<double> err;
  for (double k : ks) {
    s.cell("one-big-jump", "K=" + fmt(k), [&] {
      const ConvergenceReport r = regimeC(law, k, grid, s.policy(cfg.heavy_depth_c));
      s.report(r);
      err.push_back(r.last_error());
      if (k != ks.front()) s.at_most("one-big-jump", "last |ratio-1| " + r.x_rule, r.last_error(), cfg.tol.regime_c);
    });
  }
  if (err.size() == ks.size() && ks.size() >= 2)
    s.add("one-big-jump", "K=" + fmt(ks.back()) + " closer to 1 than K=" + fmt(ks.front()), err.back(), err.front(),
          err.back() < err.front());
  s.cell("one-big-jump-integrated", "K=" + fmt(ks.back()),
         [&] { s.report(regimeC_integrated(law, ks.back(), grid, s.policy(cfg.heavy_depth_c))); });
}

void suite_prop4(Suite& s) {
  const StepLaw& law = s.law();
  const RunConfig& cfg = s.cfg();
  const std::vector<long> grid = s.grid("2^10..2^13", "2^7..2^10");
  const bool gaussian = law.alpha() == 2.0;
  constexpr long kY = 2;
  if (!law.aperiodic()) {
    s.skip("killed-xy-fixed", "periodic law: the killed local law vanishes on one residue class");
    return;
  }
  s.cell("killed-xy-fixed", "inputs", [&] {
    Prop4Inputs in;
    in.renewal = renewal_up_to(s, std::max(cfg.x, kY) + 1);
    in.f0 = stable_density(StableModel::of_law(law), 0.0);
    const double x = static_cast<double>(cfg.x);
    const ConvergenceReport a = prop4_checks(law, in, Prop4Variant::A, x, kY, grid, s.policy());
    s.converging(a, cfg.tol.prop4);
    if (!gaussian) {
      s.skip("killed-y-scaled", "meander densities have no closed form; variants B, C, D run for alpha = 2");
      return;
    }
    LadderOptions lo;
    lo.horizon = grid.back();
    lo.store_width = 2;
    lo.height_cap = 4;
    lo.height_defect_tol = 1.0;
    lo.policy = s.policy();
    const LadderTables t = build_ladder_tables(law, lo);
    in.tau_tail = t.tau_tail;
    in.tauminus_tail = t.tauminus_tail;
    in.p = brownian_meander_p;
    in.ptilde = brownian_meander_p;
    in.q = brownian_q;
    s.converging(prop4_checks(law, in, Prop4Variant::B, x, 1.0, grid, s.policy()), cfg.tol.prop4);
    s.converging(prop4_checks(law, in, Prop4Variant::D, 1.0, kY, grid, s.policy()), cfg.tol.prop4);
    const ConvergenceReport c = prop4_checks(law, in, Prop4Variant::C, 1.0, 1.0, grid, s.policy());
    s.report(c);
    s.at_most(c.statement, "last |ratio-1| " + c.x_rule, c.last_error(), 0.10);
  });
}

void suite_prop13(Suite& s) {
  const StepLaw& law = s.law();
  const RunConfig& cfg = s.cfg();
  if (law.alpha() >= 2.0 || spectrally_negative(law)) {
    s.skip("ld-tail", "requires alpha rho < 1 with heavy right tail");
    return;
  }
  const std::vector<long> grid = s.grid("2^7..2^9", "2^7..2^9");
  for (auto v : {Prop13Variant::Sx, Prop13Variant::S1, Prop13Variant::Sy, Prop13Variant::S3}) {
    s.cell(prop13_name(v), "K=" + fmt(cfg.k13), [&] {
      const ConvergenceReport r = prop13_checks(law, v, cfg.k13, grid, s.policy());
      s.report(r);
      const double tol = v == Prop13Variant::Sx ? cfg.tol.prop13_sx : cfg.tol.prop13_sy;
      s.at_most(r.statement, "last |ratio-1| " + r.x_rule, r.last_error(), tol);
    });
  }
}

// ---------------------------------------------------------------------------------------------
// stable identities

void meander_stability(Suite& s, const LadderTables& t, long n, double zmax, bool both_sides) {
  const StepLaw& law = s.law();
  for (auto side : {MeanderSide::Positive, MeanderSide::Negative}) {
    if (side == MeanderSide::Negative && !both_sides) continue;
    const bool pos = side == MeanderSide::Positive;
    const DensityGrid g = extract_meander(law, t, n, lattice_zgrid(law, n, zmax, side), side);
    write_density_csv(s.path(pos ? "meander_p" : "meander_ptilde"), g);
    s.at_most(pos ? "meander" : "meander-dual", "two-n uniform change n=" + std::to_string(n),
              g.uniform_relative_error(), s.cfg().tol.stability);
    if (law.alpha() == 2.0) {
      const double v = g(1.0);
      s.at_most(pos ? "meander" : "meander-dual", "|p(1) / Rayleigh - 1|", std::abs(v / brownian_meander_p(1.0) - 1.0),
                0.05);
    }
  }
}

void suite_stable(Suite& s) {
  const StepLaw& law = s.law();
  const RunConfig& cfg = s.cfg();
  const StableModel model = StableModel::of_law(law);
  const bool gaussian = law.alpha() == 2.0;

  if (law.aperiodic()) {
    s.cell("local-limit", "f(0)", [&] {
      const LocalLimitReport lr =
          local_limit_f0_check(law, parse_ngrid(bounded(law) ? "2^10..2^13" : "2^7..2^10"), s.policy());
      CsvWriter csv(s.path("local_limit"), {"n", "cn_p0", "defect", "f0"});
      for (const auto& row : lr.rows) csv.row(row.n, row.value, row.defect, lr.f0);
      s.at_most("local-limit", "top-octave drift of c_n P(S_n=0)", lr.drift, 0.05);
      s.at_most("local-limit", "|c_n P(S_n=0) / f(0) - 1|", lr.rel_error_last, 0.05);
    });
  } else {
    s.skip("local-limit", "periodic law");
  }

  if (gaussian && !law.aperiodic()) {
    s.skip("meander", "periodic law: meander extraction needs aperiodic rows");
  } else if (gaussian) {
    s.cell("meander", "n=2^13", [&] {
      constexpr long n = 1L << 13;
      LadderOptions lo;
      lo.horizon = n;
      lo.store_width = 2;
      lo.full_rows = {n / 2, n};
      lo.height_cap = 4;
      lo.height_defect_tol = 1.0;
      lo.policy = s.policy();
      meander_stability(s, build_ladder_tables(law, lo), n, 6.0, true);
    });
  }
  if (gaussian) {
    s.cell("killed-density", "x=1", [&] {
      // q-pipeline plumbing with closed-form inputs against the reflection oracle.
      std::vector<double> zg;
      for (int i = 0; i <= 1200; ++i) zg.push_back(0.01 * i);
      const DensityGrid p = tabulate(brownian_meander_p, zg, Provenance::ClosedForm);
      const KilledDensity q(StableModel::brownian(), 1.0, brownian_sup_cdf(1.0), p, p);
      CsvWriter csv(s.path("q"), {"w", "q", "reflection"});
      double worst = 0.0;
      for (int i = 0; i <= 29; ++i) {
        const double w = 0.1 + 0.1 * i;
        const double v = q(w);
        const double ref = brownian_q(1.0, w);
        worst = std::max(worst, std::abs(v / ref - 1.0));
        csv.row(w, v, ref);
      }
      s.at_most("killed-density", "max |q / reflection - 1| on [0.1, 3]", worst, cfg.tol.q_reflection);
    });
    s.cell("boundary-proportionality", "Brownian boundary", [&] {
      std::vector<double> zg;
      for (int i = 0; i <= 600; ++i) zg.push_back(0.01 * i);
      const DensityGrid p = tabulate(brownian_meander_p, zg, Provenance::ClosedForm);
      std::vector<double> xs, h;
      for (double x = 0.5; x <= 2.0 + 1e-9; x += 0.25) {
        xs.push_back(x);
        h.push_back(brownian_h(x));
      }
      const ProportionalityReport pr = spectrally_negative_check(StableModel::brownian(), p, xs, h);
      s.at_most("boundary-proportionality", "|mean ratio / sqrt(2 pi) - 1|",
                std::abs(pr.mean / std::sqrt(2.0 * M_PI) - 1.0), 1e-9);
    });
    return;
  }

  if (spectrally_negative(law)) {
    s.cell("boundary-proportionality", "n=2^13", [&] {
      constexpr long n = 1L << 13;
      const double cn = law.norming(static_cast<double>(n));
      LadderOptions lo;
      lo.horizon = n;
      lo.store_width = static_cast<long>(2.2 * cn) + 2;
      lo.full_rows = {n / 2, n};
      lo.height_cap = 4;
      lo.height_defect_tol = 1.0;
      // Only the upward-killed rows are used; the gminus window just needs to exist.
      lo.depth = std::max<long>(1024, static_cast<long>(32.0 * cn));
      lo.policy = s.policy();
      const LadderTables t = build_ladder_tables(law, lo);
      meander_stability(s, t, n, 4.0, false);
      const DensityGrid p =
          extract_meander(law, t, n, lattice_zgrid(law, n, 3.0, MeanderSide::Positive), MeanderSide::Positive);
      std::vector<long> xl;
      std::vector<double> xr;
      for (double x = 0.5; x <= 2.0 + 1e-9; x += 0.25) {
        xl.push_back(std::lround(x * cn));
        xr.push_back(static_cast<double>(xl.back()) / cn);
      }
      std::vector<double> h;
      for (double v : passage_pmf_via_ladder(t, xl, n)) h.push_back(static_cast<double>(n) * v);
      const ProportionalityReport pr = spectrally_negative_check(model, p, xr, h);
      CsvWriter csv(s.path("boundary"), {"x", "p", "h", "ratio"});
      for (std::size_t i = 0; i < xr.size(); ++i) csv.row(xr[i], p(xr[i]), h[i], pr.ratio[i]);
      s.at_most("boundary-proportionality", "coefficient of variation of p/h", pr.cv, cfg.tol.lc_cv);
    });
    return;
  }

  s.cell("passage-density-integral", "n=2^10", [&] {
    constexpr long n = 1L << 10;
    constexpr long n_sup = 1L << 12;
    const double cn = law.norming(static_cast<double>(n));
    const std::vector<double> xs{1.0, 0.5, 2.0};
    LadderOptions lo;
    lo.horizon = n;
    lo.store_width = static_cast<long>(std::ceil(xs.back() * cn * 1.1)) + 2;
    lo.full_rows = {n / 2, n};
    lo.height_cap = 4;
    lo.height_defect_tol = 1.0;
    lo.depth = cfg.heavy_depth;
    lo.policy = s.policy();
    const LadderTables t = build_ladder_tables(law, lo);
    meander_stability(s, t, n, 12.0, true);
    DensityGrid p =
        extract_meander(law, t, n, lattice_zgrid(law, n, 12.0, MeanderSide::Positive), MeanderSide::Positive);
    DensityGrid pt =
        extract_meander(law, t, n, lattice_zgrid(law, n, 12.0, MeanderSide::Negative), MeanderSide::Negative);

    std::vector<long> xl;
    for (double x : xs) xl.push_back(std::lround(x * cn));
    const std::vector<double> pmf = passage_pmf_via_ladder(t, xl, n);
    const double c_sup = law.norming(static_cast<double>(n_sup));
    std::vector<long> xsup;
    for (double x : xs) xsup.push_back(std::lround(x * c_sup));
    McOptions mo;
    mo.paths = cfg.mc_paths;
    mo.seed = cfg.seed;
    mo.cell = 0x5c;
    mo.threads = cfg.threads;
    const std::vector<McEstimate> sup = sample_sup_event(law, xsup, n_sup, mo);

    std::vector<double> xr, riv, emp;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      xr.push_back(static_cast<double>(xl[i]) / cn);
      const KilledDensity q(model, xr.back(), sup[i].estimate, p, pt);
      riv.push_back(riv_integral(model, q));
      emp.push_back(static_cast<double>(n) * pmf[i]);
    }
    const RivCheck rc = h_via_riv(model, xr, riv, emp, 0);
    CsvWriter csv(s.path("passage_density"),
                  {"x", "sup_prob", "sup_stderr", "integral", "predicted", "empirical", "rel_error"});
    for (std::size_t i = 0; i < rc.rows.size(); ++i) {
      const auto& row = rc.rows[i];
      csv.row(row.x, sup[i].estimate, sup[i].stderr_, row.riv, row.predicted, row.empirical, row.rel_error);
      if (i != 0)
        s.at_most("passage-density-integral", "|h(integral) / h(empirical) - 1| x=" + fmt(row.x), row.rel_error,
                  cfg.tol.riv, "k7=" + fmt(rc.k7));
    }
  });
}

// ---------------------------------------------------------------------------------------------
// mc-crosscheck

void suite_mc(Suite& s) {
  const StepLaw& law = s.law();
  const RunConfig& cfg = s.cfg();
  const long N = cfg.mc_horizon > 0 ? cfg.mc_horizon : (bounded(law) ? 1024 : 256);
  const std::string where = "x=" + std::to_string(cfg.x) + ",N=" + std::to_string(N);
  s.cell("mc-histogram", where, [&] {
    McOptions mo;
    mo.paths = cfg.mc_paths;
    mo.seed = cfg.seed;
    mo.cell = 0x1000 + static_cast<std::uint64_t>(cfg.x);
    mo.threads = cfg.threads;
    const McHistogram h = sample_first_passage(law, cfg.x, N, mo);
    write_histogram_csv(s.path("histogram"), h);
    const FirstPassageTable t = first_passage_table(law, cfg.x, N, s.policy());
    const McAgreement a = compare_histogram(h, t.fp, cfg.tol.mc_sigmas);
    s.at_least("mc-histogram", "fraction of bins within " + fmt(cfg.tol.mc_sigmas) + " SE", a.fraction,
               cfg.tol.mc_fraction,
               std::to_string(a.within) + "/" + std::to_string(a.bins) + " bins, worst z " + fmt(a.worst_z));

    McOptions other = mo;
    other.threads = mo.threads == 1 ? 2 : 1;
    const McHistogram h2 = sample_first_passage(law, cfg.x, N, other);
    bool same = true;
    for (long n = 1; n <= N; ++n) {
      const auto ni = static_cast<std::size_t>(n);
      same = same && h.bins[ni].estimate == h2.bins[ni].estimate && h.bins[ni].stderr_ == h2.bins[ni].stderr_;
    }
    s.holds("mc-histogram", "bit-identical across thread counts", same);
  });

  s.cell("mc-sup-event", "sup event x=0", [&] {
    constexpr long n = 64;
    McOptions mo;
    mo.paths = cfg.mc_paths;
    mo.seed = cfg.seed;
    mo.cell = 0x2000;
    mo.threads = cfg.threads;
    const McEstimate e = sample_sup_event(law, {0}, n, mo).front();
    LadderOptions lo;
    lo.horizon = n;
    lo.store_width = 2;
    lo.height_cap = 4;
    lo.height_defect_tol = 1.0;
    lo.policy = s.policy();
    const LadderTables t = build_ladder_tables(law, lo);
    const double exact = t.tau_tail[static_cast<std::size_t>(n)];
    s.at_most("mc-sup-event", "|P(max <= 0) - P(tau > n)| / SE, n=64", std::abs(e.estimate - exact) / e.stderr_, 3.0);
  });
}

using SuiteFn = void (*)(Suite&);

const std::vector<std::pair<std::string, SuiteFn>>& registry() {
  static const std::vector<std::pair<std::string, SuiteFn>> r{{"exact-oracle", suite_exact_oracle},
                                                              {"identities", suite_identities},
                                                              {"regimeA", suite_regimeA},
                                                              {"regimeB", suite_regimeB},
                                                              {"regimeC", suite_regimeC},
                                                              {"prop4", suite_prop4},
                                                              {"prop13", suite_prop13},
                                                              {"stable-identities", suite_stable},
                                                              {"mc-crosscheck", suite_mc}};
  return r;
}

}  // namespace

std::string status_name(Status s) {
  switch (s) {
    case Status::Pass:
      return "pass";
    case Status::Fail:
      return "fail";
    case Status::Skip:
      return "skip";
  }
  return "";
}

bool RunResult::ok() const {
  return std::none_of(contracts.begin(), contracts.end(), [](const Contract& c) { return c.status == Status::Fail; });
}

std::vector<long> parse_ngrid(const std::string& spec) {
  auto number = [&](const std::string& tok) -> long {
    const auto caret = tok.find('^');
    try {
      std::size_t used = 0;
      if (caret == std::string::npos) {
        const long v = std::stol(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
      }
      const long base = std::stol(tok.substr(0, caret), &used);
      if (used != caret) throw std::invalid_argument(tok);
      const std::string e = tok.substr(caret + 1);
      const long ex = std::stol(e, &used);
      if (used != e.size() || ex < 0 || ex > 40) throw std::invalid_argument(tok);
      long v = 1;
      for (long i = 0; i < ex; ++i) v *= base;
      return v;
    } catch (const std::logic_error&) {
      throw ConfigError("ngrid: cannot parse '" + tok + "' in '" + spec + "'");
    }
  };
  std::vector<long> out;
  const auto dots = spec.find("..");
  if (dots != std::string::npos) {
    const long a = number(spec.substr(0, dots));
    const long b = number(spec.substr(dots + 2));
    if (a < 1 || b < a) throw ConfigError("ngrid: range '" + spec + "' must satisfy 1 <= start <= end");
    for (long v = a; v <= b; v *= 2) out.push_back(v);
  } else {
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(number(tok));
  }
  if (out.empty()) throw ConfigError("ngrid: empty grid '" + spec + "'");
  for (long v : out)
    if (v < 1) throw ConfigError("ngrid: entries must be >= 1 in '" + spec + "'");
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<double> parse_list(const std::string& key, const std::string& spec) {
  std::vector<double> out;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::logic_error&) {
      throw ConfigError(key + ": cannot parse '" + tok + "'");
    }
  }
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [name, fn] : registry()) v.push_back(name);
    v.push_back("all");
    return v;
  }();
  return names;
}

void validate(const RunConfig& cfg) {
  parse_law(cfg.law);
  const auto& names = suite_names();
  if (std::find(names.begin(), names.end(), cfg.suite) == names.end())
    throw ConfigError("suite: unknown suite '" + cfg.suite + "'");
  if (!cfg.ngrid.empty()) parse_ngrid(cfg.ngrid);
  for (double k : parse_list("kgrid", cfg.kgrid))
    if (!(k > 0.0)) throw ConfigError("kgrid: entries must be positive");
  if (cfg.x < 0) throw ConfigError("x: must be >= 0");
  if (!(cfg.xn > 0.0)) throw ConfigError("xn: must be positive");
  if (!(cfg.k13 > 0.0)) throw ConfigError("k13: must be positive");
  if (cfg.nmax < 0) throw ConfigError("nmax: must be >= 0");
  if (cfg.xmax < 0) throw ConfigError("xmax: must be >= 0");
  if (cfg.ymax < 0) throw ConfigError("ymax: must be >= 0");
  if (cfg.ndual < 1) throw ConfigError("ndual: must be >= 1");
  if (cfg.mc_paths < 10000) throw ConfigError("mc-paths: at least 10000 paths are required");
  if (cfg.mc_horizon < 0) throw ConfigError("mc-horizon: must be >= 0");
  if (cfg.threads < 1) throw ConfigError("threads: must be >= 1");
  if (cfg.mem_cap < 1024) throw ConfigError("mem-cap: must be at least 1024 sites");
  if (cfg.heavy_depth < 16 || cfg.heavy_depth_c < 16) throw ConfigError("heavy-depth: must be at least 16");
  const Tolerances& t = cfg.tol;
  for (double v :
       {t.oracle, t.identity, t.duality, t.regime_a, t.regime_b, t.regime_c, t.prop4, t.prop13_sx, t.prop13_sy,
        t.stability, t.constant_drift, t.c2_drift, t.q_reflection, t.riv, t.lc_cv, t.mc_fraction, t.mc_sigmas})
    if (!(v > 0.0)) throw ConfigError("tol: tolerances must be positive");
}

RunResult run(const RunConfig& cfg) {
  validate(cfg);
  const StepLaw law = parse_law(cfg.law);
  std::error_code ec;
  std::filesystem::create_directories(cfg.out, ec);
  if (ec) throw ConfigError("out: cannot create " + cfg.out + ": " + ec.message());

  RunResult result;
  for (const auto& [name, fn] : registry()) {
    if (cfg.suite != "all" && cfg.suite != name) continue;
    Suite s(name, cfg, law, result);
    fn(s);
    s.flush();
  }

  std::stable_sort(result.reports.begin(), result.reports.end(),
                   [](const ConvergenceReport& a, const ConvergenceReport& b) {
                     return std::tie(a.statement, a.law, a.x_rule) < std::tie(b.statement, b.law, b.x_rule);
                   });
  std::stable_sort(result.contracts.begin(), result.contracts.end(), [](const Contract& a, const Contract& b) {
    return std::tie(a.suite, a.statement) < std::tie(b.suite, b.statement);
  });
  write_summary_csv((std::filesystem::path(cfg.out) / "summary.csv").string(), result.reports);
  CsvWriter csv((std::filesystem::path(cfg.out) / "contracts.csv").string(),
                {"suite", "statement", "check", "value", "threshold", "status", "detail"});
  for (const auto& c : result.contracts)
    csv.row(c.suite, c.statement, c.check, c.value, c.threshold, status_name(c.status), c.detail);
  return result;
}

}  // namespace fpt
