#include "fpt/regimes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fpt/csv.hpp"
#include "fpt/errors.hpp"

namespace fpt {

namespace {

long nmax_of(const std::vector<long>& ngrid) {
  if (ngrid.empty()) throw PreconditionViolated("empty n-grid");
  return *std::max_element(ngrid.begin(), ngrid.end());
}

void require_not_spectrally_negative(const StepLaw& law, const char* who) {
  if (std::abs(law.alpha() * law.rho() - 1.0) < 1e-12)
    throw PreconditionViolated(std::string(who) + ": alpha * rho = 1, the one-big-jump regime does not apply");
}

double cn_of(const StepLaw& law, long n) { return law.norming(static_cast<double>(n)); }

double renewal_at(const std::vector<double>& v, long x, const char* name) {
  if (x < 0 || x >= static_cast<long>(v.size()))
    throw PreconditionViolated(std::string(name) + " table does not reach " + std::to_string(x));
  return v[static_cast<std::size_t>(x)];
}

// Killed walks at barrier x(n) for every n of the grid, one DP per distinct barrier.
template <class Visit>
void sweep_killed(const StepLaw& law, const XRule& rule, const std::vector<long>& ngrid, const WindowPolicy& policy,
                  Visit visit) {
  if (rule.kind == XRule::Kind::Fixed) {
    const long x = rule.at(law, 1);
    const long nmax = nmax_of(ngrid);
    StripWalk walk(law, killed_strip(law, x, nmax, policy), 0, {}, policy.convolve);
    std::vector<long> sorted = ngrid;
    std::sort(sorted.begin(), sorted.end());
    double surv = 1.0;
    std::size_t next = 0;
    for (long n = 1; n <= nmax; ++n) {
      const double fp = walk.step().up;
      surv -= fp;
      while (next < sorted.size() && sorted[next] == n) {
        visit(n, x, walk, fp, surv);
        ++next;
      }
    }
    return;
  }
  for (long n : ngrid) {
    const long x = rule.at(law, n);
    StripWalk walk(law, killed_strip(law, x, n, policy), 0, {}, policy.convolve);
    double surv = 1.0;
    double fp = 0.0;
    for (long k = 1; k <= n; ++k) {
      fp = walk.step().up;
      surv -= fp;
    }
    visit(n, x, walk, fp, surv);
  }
}

std::vector<long> sorted_grid(const std::vector<long>& ngrid) {
  std::vector<long> s = ngrid;
  std::sort(s.begin(), s.end());
  return s;
}

}  // namespace

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Converging:
      return "converging";
    case Verdict::FlatAtConstant:
      return "flat-at-constant";
    case Verdict::Inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

double ConvergenceReport::last_error() const {
  if (ratio.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::isnan(target) ? 0.0 : std::abs(ratio.back() - target);
}

bool ConvergenceReport::improving() const {
  if (std::isnan(target) || ratio.size() < 3) return false;
  const std::size_t k = ratio.size();
  const double e0 = std::abs(ratio[k - 3] - target);
  const double e1 = std::abs(ratio[k - 2] - target);
  const double e2 = std::abs(ratio[k - 1] - target);
  const double slack = 1e-14;
  return e1 <= e0 + slack && e2 <= e1 + slack;
}

void finalize_report(ConvergenceReport& r, double flat_tol) {
  if (r.ratio.empty()) return;
  r.last_value = r.ratio.back();
  r.top_octave_drift = top_octave_drift(r.ratio);
  // Slope fit.
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < r.ratio.size(); ++i) {
    const double v = std::isnan(r.target) ? r.ratio[i] : std::abs(r.ratio[i] - r.target);
    if (v > 0.0 && std::isfinite(v)) {
      lx.push_back(std::log(static_cast<double>(r.n[i])));
      ly.push_back(std::log(v));
    }
  }
  r.slope = 0.0;
  if (lx.size() >= 2) {
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      mx += lx[i];
      my += ly[i];
    }
    mx /= static_cast<double>(lx.size());
    my /= static_cast<double>(lx.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sxy += (lx[i] - mx) * (ly[i] - my);
      sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    r.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  }
  bool finite = true;
  for (double v : r.ratio) finite = finite && std::isfinite(v) && v > 0.0;
  if (!finite) {
    r.verdict = Verdict::Inconclusive;
  } else if (!std::isnan(r.target) && r.improving()) {
    r.verdict = Verdict::Converging;
  } else if (r.top_octave_drift <= flat_tol) {
    r.verdict = Verdict::FlatAtConstant;
  } else {
    r.verdict = Verdict::Inconclusive;
  }
}

long XRule::at(const StepLaw& law, long n) const {
  switch (kind) {
    case Kind::Fixed:
      return static_cast<long>(value);
    case Kind::SqrtCn:
      return static_cast<long>(std::floor(std::sqrt(cn_of(law, n))));
    case Kind::ScaledCn:
      return std::lround(value * cn_of(law, n));
  }
  return 0;
}

std::string XRule::describe() const {
  switch (kind) {
    case Kind::Fixed:
      return "x=" + std::to_string(static_cast<long>(value));
    case Kind::SqrtCn:
      return "x=floor(sqrt(c_n))";
    case Kind::ScaledCn: {
      std::string k = std::to_string(value);
      k.erase(k.find_last_not_of('0') + 1);
      if (!k.empty() && k.back() == '.') k.pop_back();
      return "x=round(" + k + "*c_n)";
    }
  }
  return "";
}

ConvergenceReport regimeA(const StepLaw& law, const std::vector<double>& U, const XRule& rule,
                          const std::vector<long>& ngrid, const WindowPolicy& policy) {
  ConvergenceReport r;
  r.statement = "local-small-x";
  r.law = law.name();
  r.x_rule = rule.describe();
  const auto grid = sorted_grid(ngrid);
  const FirstPassageTable t0 = first_passage_table(law, 0, grid.back(), policy);
  sweep_killed(law, rule, grid, policy, [&](long n, long x, const StripWalk&, double fp, double) {
    r.n.push_back(n);
    r.x.push_back(x);
    r.ratio.push_back(fp / (renewal_at(U, x, "U") * t0.fp[static_cast<std::size_t>(n)]));
  });
  finalize_report(r);
  return r;
}

ConvergenceReport regimeA_tail(const StepLaw& law, const std::vector<double>& U, const XRule& rule,
                               const std::vector<long>& ngrid, const WindowPolicy& policy) {
  ConvergenceReport r;
  r.statement = "tail-small-x";
  r.law = law.name();
  r.x_rule = rule.describe();
  const auto grid = sorted_grid(ngrid);
  const FirstPassageTable t0 = first_passage_table(law, 0, grid.back(), policy);
  sweep_killed(law, rule, grid, policy, [&](long n, long x, const StripWalk&, double, double surv) {
    r.n.push_back(n);
    r.x.push_back(x);
    r.ratio.push_back(surv / (renewal_at(U, x, "U") * t0.surv[static_cast<std::size_t>(n)]));
  });
  finalize_report(r);
  return r;
}

ConvergenceReport regimeB(const StepLaw& law, const std::function<double(double)>& h, double x_over_cn,
                          const std::vector<long>& ngrid, const WindowPolicy& policy) {
  ConvergenceReport r;
  r.statement = "local-scaled-x";
  r.law = law.name();
  const XRule rule = XRule::scaled(x_over_cn);
  r.x_rule = rule.describe();
  sweep_killed(law, rule, sorted_grid(ngrid), policy, [&](long n, long x, const StripWalk&, double fp, double) {
    const double xn = static_cast<double>(x) / cn_of(law, n);
    r.n.push_back(n);
    r.x.push_back(x);
    r.ratio.push_back(static_cast<double>(n) * fp / h(xn));
  });
  finalize_report(r);
  return r;
}

ConvergenceReport regimeC(const StepLaw& law, double K, const std::vector<long>& ngrid, const WindowPolicy& policy) {
  require_not_spectrally_negative(law, "regimeC");
  ConvergenceReport r;
  r.statement = "one-big-jump";
  r.law = law.name();
  const XRule rule = XRule::scaled(K);
  r.x_rule = rule.describe();
  sweep_killed(law, rule, sorted_grid(ngrid), policy, [&](long n, long x, const StripWalk&, double fp, double) {
    r.n.push_back(n);
    r.x.push_back(x);
    r.ratio.push_back(fp / law.tail(x));
  });
  finalize_report(r);
  return r;
}

ConvergenceReport regimeC_integrated(const StepLaw& law, double K, const std::vector<long>& ngrid,
                                     const WindowPolicy& policy) {
  require_not_spectrally_negative(law, "regimeC_integrated");
  ConvergenceReport r;
  r.statement = "one-big-jump-integrated";
  r.law = law.name();
  const XRule rule = XRule::scaled(K);
  r.x_rule = rule.describe();
  sweep_killed(law, rule, sorted_grid(ngrid), policy, [&](long n, long x, const StripWalk&, double, double surv) {
    r.n.push_back(n);
    r.x.push_back(x);
    r.ratio.push_back((1.0 - surv) / (static_cast<double>(n) * law.tail(x)));
  });
  finalize_report(r);
  return r;
}

std::string prop4_name(Prop4Variant v) {
  switch (v) {
    case Prop4Variant::A:
      return "killed-xy-fixed";
    case Prop4Variant::B:
      return "killed-y-scaled";
    case Prop4Variant::D:
      return "killed-x-scaled";
    case Prop4Variant::C:
      return "killed-xy-scaled";
  }
  return "";
}

ConvergenceReport prop4_checks(const StepLaw& law, const Prop4Inputs& in, Prop4Variant variant, double a, double b,
                               const std::vector<long>& ngrid, const WindowPolicy& policy) {
  ConvergenceReport r;
  r.statement = prop4_name(variant);
  r.law = law.name();
  const bool x_fixed = variant == Prop4Variant::A || variant == Prop4Variant::B;
  const bool y_fixed = variant == Prop4Variant::A || variant == Prop4Variant::D;
  const XRule rule = x_fixed ? XRule::fixed(static_cast<long>(a)) : XRule::scaled(a);
  r.x_rule = rule.describe() + (y_fixed ? ";y=" + std::to_string(static_cast<long>(b))
                                        : ";" + XRule::scaled(b).describe().replace(0, 1, "y"));
  sweep_killed(law, rule, sorted_grid(ngrid), policy, [&](long n, long x, const StripWalk& walk, double, double) {
    const double cn = cn_of(law, n);
    const long y = y_fixed ? static_cast<long>(b) : std::lround(b * cn);
    const double lhs = walk.mass_at(x - y);
    const double xn = static_cast<double>(x) / cn;
    const double yn = static_cast<double>(y) / cn;
    const auto ni = static_cast<std::size_t>(n);
    double pred = 0.0;
    switch (variant) {
      case Prop4Variant::A:
        pred =
            renewal_at(in.renewal.U, x, "U") * in.f0 * renewal_at(in.renewal.V, y, "V") / (static_cast<double>(n) * cn);
        break;
      case Prop4Variant::B:
        pred = renewal_at(in.renewal.U, x, "U") * in.tau_tail.at(ni) * in.ptilde(yn) / cn;
        break;
      case Prop4Variant::D:
        pred = renewal_at(in.renewal.V, y, "V") * in.tauminus_tail.at(ni) * in.p(xn) / cn;
        break;
      case Prop4Variant::C:
        pred = in.q(xn, yn) / cn;
        break;
    }
    r.n.push_back(n);
    r.x.push_back(x);
    r.ratio.push_back(lhs / pred);
  });
  finalize_report(r);
  return r;
}

std::string prop13_name(Prop13Variant v) {
  switch (v) {
    case Prop13Variant::Sx:
      return "ld-tail";
    case Prop13Variant::S1:
      return "ld-tail-killed";
    case Prop13Variant::Sy:
      return "ld-local";
    case Prop13Variant::S3:
      return "ld-local-killed";
  }
  return "";
}

ConvergenceReport prop13_checks(const StepLaw& law, Prop13Variant variant, double K, const std::vector<long>& ngrid,
                                const WindowPolicy& policy) {
  require_not_spectrally_negative(law, "prop13_checks");
  ConvergenceReport r;
  r.statement = prop13_name(variant);
  r.law = law.name();
  const XRule rule = XRule::scaled(K);
  r.x_rule = rule.describe();
  const auto grid = sorted_grid(ngrid);
  const long nmax = grid.back();
  const long xmax = rule.at(law, nmax);
  const bool killed = variant == Prop13Variant::S1 || variant == Prop13Variant::S3;

  Strip full;
  full.lower = Edge::Truncation;
  full.upper = Edge::Truncation;
  full.lo = law.min_step() == std::numeric_limits<long>::min() ? -policy.heavy_depth : nmax * law.min_step();
  full.hi = law.max_step() == std::numeric_limits<long>::max() ? policy.heavy_depth : nmax * law.max_step();
  if (full.hi <= xmax) throw WindowOverflow("prop13_checks: window does not reach x = " + std::to_string(xmax));
  if (full.hi - full.lo + 1 > policy.mem_cap_sites) throw WindowOverflow("prop13_checks: window exceeds memory cap");
  StripWalk free_walk(law, full, 0, {}, policy.convolve);
  std::optional<StripWalk> pos_walk;
  if (killed)
    pos_walk.emplace(law, Strip{1, full.hi, Edge::Barrier, Edge::Truncation}, 0, OvershootCapture{}, policy.convolve);

  auto above = [](const StripWalk& w, long x) {
    long double s = w.absorbed_up();
    for (long site = x + 1; site <= w.strip().hi; ++site) s += w.mass_at(site);
    return static_cast<double>(s);
  };

  std::size_t next = 0;
  for (long n = 1; n <= nmax; ++n) {
    free_walk.step();
    if (pos_walk) pos_walk->step();
    while (next < grid.size() && grid[next] == n) {
      const long x = rule.at(law, n);
      const double nn = static_cast<double>(n);
      const double rho = law.rho();
      double v = 0.0;
      switch (variant) {
        case Prop13Variant::Sx:
          v = above(free_walk, x) / (nn * law.tail(x));
          break;
        case Prop13Variant::Sy:
          v = free_walk.mass_at(x) / (nn * law.local_mass(x, 1));
          break;
        case Prop13Variant::S1: {
          const double surv = 1.0 - pos_walk->absorbed_down();
          v = above(*pos_walk, x) / (above(free_walk, x) * surv / rho);
          break;
        }
        case Prop13Variant::S3: {
          const double surv = 1.0 - pos_walk->absorbed_down();
          v = pos_walk->mass_at(x) / (nn * law.local_mass(x, 1) * surv / rho);
          break;
        }
      }
      r.n.push_back(n);
      r.x.push_back(x);
      r.ratio.push_back(v);
      ++next;
    }
  }
  finalize_report(r);
  return r;
}

EppelReport eppel_regimeA_speclneg(const StepLaw& law, long x, const std::vector<long>& ngrid,
                                   const WindowPolicy& policy) {
  if (std::abs(law.alpha() * law.rho() - 1.0) > 1e-12)
    throw PreconditionViolated("eppel_regimeA_speclneg: requires the alpha * rho = 1 family");
  if (law.max_step() != 1) throw PreconditionViolated("eppel_regimeA_speclneg: expects upward steps of size 1");
  const auto grid = sorted_grid(ngrid);
  const long nmax = grid.back();
  // Upward skip-free: mass below x - nmax can never pass x within the horizon, so this depth is exact.
  WindowPolicy exact_policy = policy;
  exact_policy.heavy_depth = nmax + x + 2;

  LadderOptions lo;
  lo.horizon = nmax;
  lo.store_width = 2;
  lo.height_cap = std::max<long>(x + 2, 64);
  lo.depth = nmax + 2;
  lo.policy = exact_policy;
  const LadderTables t = build_ladder_tables(law, lo);

  EppelReport rep;
  const long vmax = std::min<long>(
      lo.height_cap - 1,
      std::max<long>(x, static_cast<long>(std::pow(static_cast<double>(nmax), -0.25) * cn_of(law, nmax)) + 1));
  const RenewalTables rt = renewal_functions(t.heights, vmax);
  rep.regime_a = regimeA(law, rt.U, XRule::fixed(x), grid, exact_policy);
  rep.regime_a_tail = regimeA_tail(law, rt.U, XRule::fixed(x), grid, exact_policy);

  const double f0 = stable_density(StableModel::of_law(law), 0.0);
  rep.omega.statement = "omega";
  rep.omega.law = law.name();
  rep.omega.x_rule = "x=0,delta_n=n^-1/4";
  rep.omega.target = 1.0;
  for (long n : grid) {
    const double cn = cn_of(law, n);
    const double delta = std::pow(static_cast<double>(n), -0.25);
    const long ymax = std::min<long>(static_cast<long>(std::floor(delta * cn)), vmax);
    long double omega = 0.0L;
    for (long y = 0; y <= ymax; ++y) omega += rt.V[static_cast<std::size_t>(y)] * law.tail(y);
    const double ratio = static_cast<double>(n) * cn * t.tau_pmf(n) / (f0 * static_cast<double>(omega));
    rep.omega.n.push_back(n);
    rep.omega.x.push_back(0);
    rep.omega.ratio.push_back(ratio);
    rep.delta_diagnostic.push_back(static_cast<double>(n) * law.tail(static_cast<long>(std::floor(delta * cn))));
  }
  finalize_report(rep.omega, 0.10);
  try {
    regimeC(law, 10.0, grid, policy);
  } catch (const PreconditionViolated& e) {
    rep.regime_c_skipped = e.what();
  }
  return rep;
}

std::vector<double> passage_pmf_via_ladder(const LadderTables& t, const std::vector<long>& xs, long n) {
  if (n < 1) throw PreconditionViolated("passage_pmf_via_ladder: n must be >= 1");
  std::vector<double> out;
  for (long x : xs) out.push_back(t.survival_via_max(x, n - 1) - t.survival_via_max(x, n));
  return out;
}

void write_report_csv(const std::string& path, const std::vector<ConvergenceReport>& reports) {
  CsvWriter csv(path, {"statement", "law", "x_rule", "n", "x", "ratio"});
  for (const auto& r : reports)
    for (std::size_t i = 0; i < r.ratio.size(); ++i) csv.row(r.statement, r.law, r.x_rule, r.n[i], r.x[i], r.ratio[i]);
}

void write_summary_csv(const std::string& path, const std::vector<ConvergenceReport>& reports) {
  CsvWriter csv(path, {"statement", "law", "x_rule", "last_value", "drift", "slope", "verdict"});
  for (const auto& r : reports)
    csv.row(r.statement, r.law, r.x_rule, r.last_value, r.top_octave_drift, r.slope, verdict_name(r.verdict));
}

}  // namespace fpt
