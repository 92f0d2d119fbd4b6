// Acceptance suite: one PASS/FAIL line per criterion. Exit status 0 iff every criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "fpt/errors.hpp"
#include "fpt/exact.hpp"
#include "fpt/ladder.hpp"
#include "fpt/mc.hpp"
#include "fpt/regimes.hpp"
#include "fpt/stable.hpp"
#include "oracle.hpp"

using namespace fpt;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Clock {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::map<long, long double> masses(const StepLaw& law) {
  std::map<long, long double> m;
  for (long k = law.min_step(); k <= law.max_step(); ++k)
    if (law.pmf(k) > 0.0) m[k] = law.pmf(k);
  return m;
}

RenewalTables renewal(const StepLaw& law, long xmax) {
  LadderOptions o;
  o.horizon = 64;
  o.height_cap = 64;
  return renewal_functions(ladder_height_pmfs(law, o), xmax);
}

WindowPolicy depth(long d) {
  WindowPolicy p;
  p.heavy_depth = d;
  return p;
}

/// Every consecutive |ratio - 1| is no larger than the one before.
bool monotone(const ConvergenceReport& r) {
  for (std::size_t i = 1; i < r.ratio.size(); ++i)
    if (std::abs(r.ratio[i] - 1.0) > std::abs(r.ratio[i - 1] - 1.0)) return false;
  return true;
}

Outcome oracle_criterion() {
  const Clock clock;
  const std::vector<StepLaw> laws{StepLaw::simple(), StepLaw::bounded_lazy(0.45),
                                  StepLaw::finite_table({{-2, 0.2}, {-1, 0.2}, {0, 0.1}, {1, 0.4}, {2, 0.1}}),
                                  StepLaw::finite_table({{-2, 0.25}, {0, 0.25}, {1, 0.5}})};
  double worst = 0.0;
  for (const auto& law : laws) {
    for (long x = 0; x <= 3; ++x) {
      const auto ref = oracle::enumerate(masses(law), x, 12);
      const auto t = first_passage_table(law, x, 12);
      for (long n = 1; n <= 12; ++n) {
        const auto ni = static_cast<std::size_t>(n);
        worst = std::max(worst, std::abs(t.fp[ni] - static_cast<double>(ref.fp[ni])));
        const auto snap = killed_snapshot(law, x, n);
        for (long s = ref.lo; s <= x; ++s)
          worst = std::max(worst, std::abs(snap.at(s) - static_cast<double>(ref.killed_at(n, s))));
      }
    }
  }
  const double secs = clock.seconds();
  return {worst <= 1e-12 && secs < 10.0,
          std::to_string(laws.size()) + " laws, max abs diff " + num(worst) + ", " + num(secs) + " s"};
}

DecompositionSweep sweep(const StepLaw& law, long nmax, long xy, long heavy_depth) {
  LadderOptions lo;
  lo.horizon = nmax;
  lo.store_width = xy + 2;
  lo.height_cap = 4;
  lo.height_defect_tol = 1.0;
  lo.depth = heavy_depth;
  lo.policy = depth(heavy_depth > 0 ? heavy_depth : 1L << 17);
  const LadderTables t = build_ladder_tables(law, lo);
  return decomposition_sweep(law, t, nmax, xy, xy, lo.policy);
}

Outcome identity_criterion() {
  const Clock clock;
  const auto lazy = sweep(StepLaw::bounded_lazy(0.45), 200, 30, 0);
  const auto pareto = sweep(StepLaw::pareto_lattice(0.8), 100, 20, 1L << 16);
  const double secs = clock.seconds();
  return {lazy.max_residual <= 1e-10 && pareto.max_residual <= 1e-10 && secs < 120.0,
          "lazy " + num(lazy.max_residual) + ", pareto " + num(pareto.max_residual) + " (defect " +
              num(pareto.max_defect) + "), " + num(secs) + " s"};
}

Outcome duality_criterion() {
  double worst = 0.0;
  for (const auto& law : {StepLaw::bounded_lazy(0.45), StepLaw::finite_table({{-2, 0.25}, {0, 0.25}, {1, 0.5}})}) {
    LadderOptions lo;
    lo.horizon = 1000;
    lo.store_width = 2;
    lo.height_cap = 4;
    lo.height_defect_tol = 1.0;
    const LadderTables t = build_ladder_tables(law, lo);
    const auto f0 = first_passage_table(law, 0, 1000);
    long double cum = 0.0L;
    for (std::size_t n = 1; n <= 1000; ++n) {
      cum += f0.fp[n];
      worst = std::max(worst, std::abs(t.gminus_rowsum[n] - static_cast<double>(1.0L - cum)));
    }
  }
  return {worst <= 1e-12, "max |rowsum - (1 - sum fp)| over n <= 1000: " + num(worst)};
}

Outcome regime_a_criterion() {
  const Clock clock;
  const StepLaw law = StepLaw::bounded_lazy(0.45);
  const RenewalTables r = renewal(law, 8);
  const std::vector<long> grid{1L << 11, 1L << 12, 1L << 13, 1L << 14};
  const auto a = regimeA(law, r.U, XRule::fixed(5), grid);
  const auto zero = regimeA(law, r.U, XRule::fixed(0), grid);
  bool exact = true;
  for (double v : zero.ratio) exact = exact && v == 1.0;
  const double secs = clock.seconds();
  return {a.last_error() <= 0.10 && monotone(a) && exact && secs < 60.0,
          "ratio at 2^14 " + num(a.last_value) + (monotone(a) ? ", monotone" : ", not monotone") +
              (exact ? ", x=0 exact" : ", x=0 inexact") + ", " + num(secs) + " s"};
}

Outcome regime_b_criterion() {
  const Clock clock;
  const auto r = regimeB(StepLaw::bounded_lazy(0.45), brownian_h, 1.0, {1L << 11, 1L << 12, 1L << 13, 1L << 14});
  const double secs = clock.seconds();
  return {r.last_error() <= 0.10 && r.improving() && secs < 60.0,
          "ratio at 2^14 " + num(r.last_value) + (r.improving() ? ", improving" : ", not improving") + ", " +
              num(secs) + " s"};
}

Outcome regime_c_criterion() {
  const Clock clock;
  const StepLaw law = StepLaw::pareto_lattice(0.8);
  const WindowPolicy p = depth(1L << 18);
  const auto k10 = regimeC(law, 10.0, {512}, p);
  const auto k50 = regimeC(law, 50.0, {512}, p);
  const auto k100 = regimeC(law, 100.0, {512}, p);
  const double secs = clock.seconds();
  return {k50.last_error() <= 0.15 && k100.last_error() < k10.last_error() && secs < 300.0,
          "K=10 " + num(k10.last_value) + ", K=50 " + num(k50.last_value) + ", K=100 " + num(k100.last_value) + ", " +
              num(secs) + " s"};
}

Outcome prop13_criterion() {
  const StepLaw law = StepLaw::pareto_lattice(0.8);
  const WindowPolicy p = depth(1L << 17);
  const auto sx = prop13_checks(law, Prop13Variant::Sx, 30.0, {512}, p);
  const auto sy = prop13_checks(law, Prop13Variant::Sy, 30.0, {512}, p);
  return {sx.last_error() <= 0.10 && sy.last_error() <= 0.15,
          "tail " + num(sx.last_value) + ", local " + num(sy.last_value)};
}

Outcome stable_criterion() {
  const Clock clock;
  std::string detail;
  bool pass = true;

  // Meander against passage density: proportional for the spectrally negative family.
  {
    const StepLaw law = StepLaw::spectrally_negative(1.5, 0.2);
    constexpr long n = 1L << 13;
    const double cn = law.norming(static_cast<double>(n));
    LadderOptions lo;
    lo.horizon = n;
    lo.store_width = static_cast<long>(2.2 * cn) + 2;
    lo.full_rows = {n / 2, n};
    lo.height_cap = 4;
    lo.height_defect_tol = 1.0;
    lo.depth = std::max<long>(1024, static_cast<long>(32.0 * cn));
    const LadderTables t = build_ladder_tables(law, lo);
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
    const auto pr = spectrally_negative_check(StableModel::of_law(law), p, xr, h);
    pass = pass && pr.cv <= 0.10;
    detail += "proportionality cv " + num(pr.cv);
  }

  // Passage density from the killed density integral: heavy symmetric law, k7 fixed at x = 1, predictions at x = 0.5
  // and 2.
  {
    const StepLaw law = StepLaw::pareto_lattice(0.8);
    const StableModel model = StableModel::of_law(law);
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
    lo.depth = 1L << 16;
    lo.policy = depth(1L << 16);
    const LadderTables t = build_ladder_tables(law, lo);
    const DensityGrid p =
        extract_meander(law, t, n, lattice_zgrid(law, n, 12.0, MeanderSide::Positive), MeanderSide::Positive);
    const DensityGrid pt =
        extract_meander(law, t, n, lattice_zgrid(law, n, 12.0, MeanderSide::Negative), MeanderSide::Negative);
    std::vector<long> xl, xsup;
    const double c_sup = law.norming(static_cast<double>(n_sup));
    for (double x : xs) {
      xl.push_back(std::lround(x * cn));
      xsup.push_back(std::lround(x * c_sup));
    }
    const auto pmf = passage_pmf_via_ladder(t, xl, n);
    McOptions mo;
    mo.paths = 100000;
    mo.seed = 1;
    mo.cell = 0x5c;
    const auto sup = sample_sup_event(law, xsup, n_sup, mo);
    std::vector<double> xr, riv, emp;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      xr.push_back(static_cast<double>(xl[i]) / cn);
      const KilledDensity q(model, xr.back(), sup[i].estimate, p, pt);
      riv.push_back(riv_integral(model, q));
      emp.push_back(static_cast<double>(n) * pmf[i]);
    }
    const RivCheck rc = h_via_riv(model, xr, riv, emp, 0);
    for (std::size_t i = 1; i < rc.rows.size(); ++i) {
      pass = pass && rc.rows[i].rel_error <= 0.15;
      detail += ", integral x=" + num(rc.rows[i].x) + " " + num(rc.rows[i].rel_error);
    }
  }

  // Brownian q-pipeline against reflection.
  {
    std::vector<double> zg;
    for (int i = 0; i <= 1200; ++i) zg.push_back(0.01 * i);
    const DensityGrid p = tabulate(brownian_meander_p, zg, Provenance::ClosedForm);
    double worst = 0.0;
    for (double x : {0.5, 1.0, 2.0}) {
      const KilledDensity q(StableModel::brownian(), x, brownian_sup_cdf(x), p, p);
      for (int i = 0; i <= 29; ++i) {
        const double w = 0.1 + 0.1 * i;
        worst = std::max(worst, std::abs(q(w) / brownian_q(x, w) - 1.0));
      }
    }
    pass = pass && worst <= 0.02;
    detail += ", Brownian q " + num(worst);
  }
  return {pass, detail + ", " + num(clock.seconds()) + " s"};
}

Outcome constants_criterion() {
  const StepLaw law = StepLaw::bounded_lazy(0.45);
  // Meander two-n stability.
  constexpr long n = 1L << 13;
  LadderOptions mo;
  mo.horizon = n;
  mo.store_width = 2;
  mo.full_rows = {n / 2, n};
  mo.height_cap = 4;
  mo.height_defect_tol = 1.0;
  const LadderTables mt = build_ladder_tables(law, mo);
  double stab = 0.0;
  for (auto side : {MeanderSide::Positive, MeanderSide::Negative})
    stab = std::max(stab, extract_meander(law, mt, n, lattice_zgrid(law, n, 6.0, side), side).uniform_relative_error());

  // Constants and the C2 row bound.
  const std::vector<long> grid{1L << 7, 1L << 8, 1L << 9, 1L << 10, 1L << 11, 1L << 12, 1L << 13, 1L << 14};
  const long xmax = static_cast<long>(std::ceil(2.0 * law.norming(static_cast<double>(grid.back())))) + 2;
  LadderOptions lo;
  lo.horizon = grid.back();
  lo.store_width = 2;
  lo.full_rows = grid;
  lo.height_cap = xmax + 2;
  lo.height_defect_tol = 1e-9;
  const LadderTables t = build_ladder_tables(law, lo);
  const RenewalTables r = renewal_functions(t.heights, xmax);
  const auto d = constant_diagnostics(law, t, r, grid);
  const auto l3 = renewal_ratio_bound(law, t, r, grid);
  const double kmax = std::max({d.drift_k4, d.drift_k5, d.drift_k6});
  return {stab <= 0.05 && l3.drift <= 0.20 && kmax <= 0.05, "meander two-n " + num(stab) + ", C2 drift " +
                                                                num(l3.drift) + ", k4/k5/k6 drift " + num(d.drift_k4) +
                                                                "/" + num(d.drift_k5) + "/" + num(d.drift_k6)};
}

Outcome mc_criterion() {
  const StepLaw law = StepLaw::bounded_lazy(0.45);
  constexpr long x = 5;
  constexpr long N = 1024;
  McOptions mo;
  mo.paths = 100000;
  mo.seed = 1;
  mo.cell = 0x1000 + x;
  const McHistogram h = sample_first_passage(law, x, N, mo);
  const auto exact = first_passage_table(law, x, N);
  const McAgreement a = compare_histogram(h, exact.fp, 4.0);
  McOptions threaded = mo;
  threaded.threads = 3;
  const McHistogram again = sample_first_passage(law, x, N, mo);
  const McHistogram h3 = sample_first_passage(law, x, N, threaded);
  bool same = true;
  for (std::size_t n = 1; n < h.bins.size(); ++n)
    same = same && h.bins[n].estimate == again.bins[n].estimate && h.bins[n].estimate == h3.bins[n].estimate &&
           h.bins[n].stderr_ == h3.bins[n].stderr_;
  return {a.fraction >= 0.95 && same, std::to_string(a.within) + "/" + std::to_string(a.bins) + " bins within 4 SE" +
                                          (same ? ", deterministic" : ", NOT deterministic")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"brute-force oracle", oracle_criterion},
      {"first-maximum decomposition", identity_criterion},
      {"duality and conservation", duality_criterion},
      {"regime A local limit", regime_a_criterion},
      {"regime B against Brownian passage density", regime_b_criterion},
      {"regime C one big jump", regime_c_criterion},
      {"large-deviation local estimates", prop13_criterion},
      {"stable identities", stable_criterion},
      {"meander stability and constants", constants_criterion},
      {"MC crosscheck", mc_criterion},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
