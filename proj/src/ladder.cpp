#include "fpt/ladder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fpt/csv.hpp"
#include "fpt/errors.hpp"

namespace fpt {

namespace {

constexpr long kUnbounded = std::numeric_limits<long>::max();

long reach(long step_bound, long horizon, long heavy) {
  return step_bound == kUnbounded ? heavy : std::max(1L, horizon * step_bound);
}

// Spread the still-unresolved mass with the shape of the final step's overshoot.
void redistribute(std::vector<double>& pmf, double& tail, double& moved, double remaining,
                  const std::vector<double>& last_shape, double last_flux) {
  moved = remaining;
  if (remaining <= 0.0) return;
  if (last_flux <= 0.0) {
    tail += remaining;
    return;
  }
  long double captured = 0.0L;
  for (std::size_t k = 0; k < last_shape.size(); ++k) {
    const double share = last_shape[k] / last_flux;
    pmf[k] += remaining * share;
    captured += share;
  }
  tail += remaining * std::max(0.0, 1.0 - static_cast<double>(captured));
}

}  // namespace

double LadderTables::g(long m, long u) const {
  if (m < 0 || m > horizon) throw PreconditionViolated("g: row " + std::to_string(m) + " outside horizon");
  if (u < 0) return 0.0;
  if (u < store_width) return g_cols[static_cast<std::size_t>(m)][static_cast<std::size_t>(u)];
  const auto it = g_full.find(m);
  if (it == g_full.end()) throw PreconditionViolated("g: row " + std::to_string(m) + " not stored");
  return u < static_cast<long>(it->second.size()) ? it->second[static_cast<std::size_t>(u)] : 0.0;
}

double LadderTables::gminus(long m, long u) const {
  if (m < 0 || m > horizon) throw PreconditionViolated("gminus: row " + std::to_string(m) + " outside horizon");
  if (u < 0) return 0.0;
  if (u < store_width) return gminus_cols[static_cast<std::size_t>(m)][static_cast<std::size_t>(u)];
  const auto it = gminus_full.find(m);
  if (it == gminus_full.end()) throw PreconditionViolated("gminus: row " + std::to_string(m) + " not stored");
  return u < static_cast<long>(it->second.size()) ? it->second[static_cast<std::size_t>(u)] : 0.0;
}

double LadderTables::survival_via_max(long x, long n) const {
  if (x >= store_width) throw PreconditionViolated("survival_via_max: x beyond stored columns");
  if (n > horizon) throw PreconditionViolated("survival_via_max: n beyond horizon");
  long double s = 0.0L;
  for (long r = 0; r <= n; ++r) {
    long double row = 0.0L;
    const auto& cols = g_cols[static_cast<std::size_t>(r)];
    for (long z = 0; z <= x; ++z) row += cols[static_cast<std::size_t>(z)];
    s += row * tau_tail[static_cast<std::size_t>(n - r)];
  }
  return static_cast<double>(s);
}

LadderTables build_ladder_tables(const StepLaw& law, const LadderOptions& opts) {
  const long M = opts.horizon;
  if (M < 1) throw PreconditionViolated("ladder: horizon must be >= 1");
  const long heavy = opts.depth > 0 ? opts.depth : opts.policy.heavy_depth;
  const long min_step = law.min_step();
  const long down_bound = min_step == std::numeric_limits<long>::min() ? kUnbounded : -min_step;

  LadderTables t;
  t.law = law.name();
  t.horizon = M;
  t.g_depth = reach(law.max_step(), M, heavy);
  t.gminus_depth = reach(down_bound, M, heavy);
  if (t.g_depth > opts.policy.mem_cap_sites || t.gminus_depth + 1 > opts.policy.mem_cap_sites)
    throw WindowOverflow("ladder: window exceeds memory cap");
  t.store_width = std::max(1L, opts.store_width);
  const long cap = std::max(1L, opts.height_cap);

  StripWalk gw(law, Strip{1, t.g_depth, Edge::Barrier, Edge::Truncation}, 0, OvershootCapture{0, cap},
               opts.policy.convolve);
  StripWalk mw(law, Strip{-t.gminus_depth, 0, Edge::Truncation, Edge::Barrier}, 0, OvershootCapture{cap, 0},
               opts.policy.convolve);

  const auto rows = static_cast<std::size_t>(M + 1);
  const auto width = static_cast<std::size_t>(t.store_width);
  t.g_cols.assign(rows, std::vector<double>(width, 0.0));
  t.gminus_cols.assign(rows, std::vector<double>(width, 0.0));
  t.g_cols[0][0] = 1.0;
  t.gminus_cols[0][0] = 1.0;
  t.tau_tail.assign(rows, 1.0);
  t.tauminus_tail.assign(rows, 1.0);
  t.g_rowsum.assign(rows, 1.0);
  t.gminus_rowsum.assign(rows, 1.0);
  t.g_defect.assign(rows, 0.0);
  t.gminus_defect.assign(rows, 0.0);

  auto& h = t.heights;
  h.q_H.assign(static_cast<std::size_t>(cap), 0.0);
  h.q_Hminus.assign(static_cast<std::size_t>(cap), 0.0);
  long double up_total = 0.0L;
  long double down_total = 0.0L;
  // Overshoot shape of the latest step with positive exit flux (periodic walks skip steps).
  std::vector<double> shape_H(static_cast<std::size_t>(cap), 0.0);
  std::vector<double> shape_Hminus(static_cast<std::size_t>(cap), 0.0);
  double flux_H = 0.0;
  double flux_Hminus = 0.0;

  for (long m : opts.full_rows) {
    if (m == 0) {
      t.g_full[0] = {1.0};
      t.gminus_full[0] = {1.0};
    }
  }
  std::vector<bool> want_full(rows, false);
  for (long m : opts.full_rows)
    if (m >= 1 && m <= M) want_full[static_cast<std::size_t>(m)] = true;

  for (long m = 1; m <= M; ++m) {
    const auto i = static_cast<std::size_t>(m);

    const StepFlux& fm = mw.step();
    up_total += fm.up;
    const auto& oa = mw.overshoot_above();
    for (long k = 1; k < cap; ++k) h.q_H[static_cast<std::size_t>(k)] += oa[static_cast<std::size_t>(k - 1)];
    if (fm.up > 0.0) {
      flux_H = fm.up;
      for (long k = 1; k < cap; ++k) shape_H[static_cast<std::size_t>(k)] = oa[static_cast<std::size_t>(k - 1)];
    }
    t.tau_tail[i] = t.tau_tail[i - 1] - fm.up;
    t.gminus_rowsum[i] = mw.total();
    t.gminus_defect[i] = mw.defect();

    const StepFlux& fg = gw.step();
    down_total += fg.down;
    const auto& ob = gw.overshoot_below();
    for (long k = 0; k < cap; ++k) h.q_Hminus[static_cast<std::size_t>(k)] += ob[static_cast<std::size_t>(k)];
    if (fg.down > 0.0) {
      flux_Hminus = fg.down;
      std::copy(ob.begin(), ob.end(), shape_Hminus.begin());
    }
    t.tauminus_tail[i] = t.tauminus_tail[i - 1] - fg.down;
    t.g_rowsum[i] = gw.total();
    t.g_defect[i] = gw.defect();

    const auto gm = gw.masses();  // site 1 + j
    const auto mm = mw.masses();  // site -depth + j
    for (long u = 1; u < t.store_width && u <= t.g_depth; ++u)
      t.g_cols[i][static_cast<std::size_t>(u)] = gm[static_cast<std::size_t>(u - 1)];
    for (long u = 0; u < t.store_width && u <= t.gminus_depth; ++u)
      t.gminus_cols[i][static_cast<std::size_t>(u)] = mm[static_cast<std::size_t>(t.gminus_depth - u)];
    if (want_full[i]) {
      std::vector<double> grow(static_cast<std::size_t>(t.g_depth + 1), 0.0);
      std::copy(gm.begin(), gm.end(), grow.begin() + 1);
      t.g_full[m] = std::move(grow);
      std::vector<double> mrow(static_cast<std::size_t>(t.gminus_depth + 1), 0.0);
      for (long u = 0; u <= t.gminus_depth; ++u)
        mrow[static_cast<std::size_t>(u)] = mm[static_cast<std::size_t>(t.gminus_depth - u)];
      t.gminus_full[m] = std::move(mrow);
    }
  }

  // Heights: captured part, then the unresolved tail beyond the capture.
  long double cap_H = 0.0L;
  long double cap_Hm = 0.0L;
  for (double v : h.q_H) cap_H += v;
  for (double v : h.q_Hminus) cap_Hm += v;
  h.tail_H = std::max(0.0, static_cast<double>(up_total - cap_H));
  h.tail_Hminus = std::max(0.0, static_cast<double>(down_total - cap_Hm));
  redistribute(h.q_H, h.tail_H, h.redistributed_H, t.tau_tail[static_cast<std::size_t>(M)], shape_H, flux_H);
  redistribute(h.q_Hminus, h.tail_Hminus, h.redistributed_Hminus, t.tauminus_tail[static_cast<std::size_t>(M)],
               shape_Hminus, flux_Hminus);
  h.defect_H = mw.defect();
  h.defect_Hminus = gw.defect();

  // Renewal function of the strict ascending ladder times.
  std::vector<long double> renewal(rows, 0.0L);
  renewal[0] = 1.0L;
  for (long m = 1; m <= M; ++m) {
    long double s = 0.0L;
    for (long k = 1; k <= m; ++k)
      s += static_cast<long double>(t.tau_pmf(k)) * renewal[static_cast<std::size_t>(m - k)];
    renewal[static_cast<std::size_t>(m)] = s;
  }
  t.Gamma.assign(rows, 0.0);
  long double acc = 0.0L;
  for (std::size_t m = 0; m < rows; ++m) {
    acc += renewal[m];
    t.Gamma[m] = static_cast<double>(acc);
  }
  return t;
}

LadderHeights ladder_height_pmfs(const StepLaw& law, const LadderOptions& opts) {
  LadderOptions o = opts;
  o.store_width = 1;
  o.full_rows.clear();
  LadderHeights h = build_ladder_tables(law, o).heights;
  const double worst = std::max(h.defect_H, h.defect_Hminus);
  if (worst > opts.height_defect_tol)
    throw DefectTooLarge("ladder heights: window loss " + std::to_string(worst) + " exceeds tolerance");
  return h;
}

RenewalTables renewal_functions(const LadderHeights& heights, long xmax) {
  const long cap = static_cast<long>(heights.q_H.size());
  if (xmax < 0 || xmax >= cap) throw PreconditionViolated("renewal_functions: xmax beyond resolved heights");
  const double atom = heights.q_Hminus[0];
  if (atom >= 1.0 - 1e-9) throw AtomTooLarge("renewal_functions: q_H-(0) too close to 1");

  RenewalTables r;
  const auto len = static_cast<std::size_t>(xmax + 1);
  r.u_mass.assign(len, 0.0);
  r.v_mass.assign(len, 0.0);
  r.U.assign(len, 0.0);
  r.V.assign(len, 0.0);
  r.A.assign(len, 0.0);
  long double cu = 0.0L;
  long double cv = 0.0L;
  long double ca = 0.0L;
  long double cdf_H = 0.0L;
  for (long y = 0; y <= xmax; ++y) {
    long double su = y == 0 ? 1.0L : 0.0L;
    long double sv = y == 0 ? 1.0L : 0.0L;
    for (long w = 1; w <= y; ++w) {
      su += static_cast<long double>(heights.q_H[static_cast<std::size_t>(w)]) *
            r.u_mass[static_cast<std::size_t>(y - w)];
      sv += static_cast<long double>(heights.q_Hminus[static_cast<std::size_t>(w)]) *
            r.v_mass[static_cast<std::size_t>(y - w)];
    }
    const auto i = static_cast<std::size_t>(y);
    r.u_mass[i] = static_cast<double>(su);
    r.v_mass[i] = static_cast<double>(sv / (1.0L - atom));
    cu += r.u_mass[i];
    cv += r.v_mass[i];
    r.U[i] = static_cast<double>(cu);
    r.V[i] = static_cast<double>(cv);
    cdf_H += heights.q_H[i];
    ca += std::max(0.0L, 1.0L - cdf_H);
    r.A[i] = static_cast<double>(ca);
  }
  return r;
}

DecompositionResult decomposition_check(const LadderTables& t, const KilledLawVector& snap, long y) {
  const long x = snap.barrier;
  const long n = snap.n;
  DecompositionResult d;
  d.lhs = snap.at(x - y);
  long double s = 0.0L;
  for (long z = 0; z <= std::min(x, y); ++z)
    for (long r = 0; r <= n; ++r) s += static_cast<long double>(t.g(r, x - z)) * t.gminus(n - r, y - z);
  d.rhs = static_cast<double>(s);
  const double diff = std::abs(d.lhs - d.rhs);
  // FFT roundoff leaves ~1e-16 of the row mass on structurally empty cells; scale by at least 1e-6 of it.
  const double floor = kResidualMassFloor * snap.total();
  d.residual = diff / std::max(d.lhs, floor > 0.0 ? floor : 1.0);
  return d;
}

DecompositionSweep decomposition_sweep(const StepLaw& law, const LadderTables& t, long nmax, long xmax, long ymax,
                                       const WindowPolicy& policy) {
  if (nmax > t.horizon || xmax >= t.store_width || ymax >= t.store_width)
    throw PreconditionViolated("decomposition_sweep: grid exceeds ladder tables");
  WindowPolicy aligned = policy;
  aligned.heavy_depth = t.gminus_depth;
  DecompositionSweep out;
  for (long x = 0; x <= xmax; ++x) {
    StripWalk walk(law, killed_strip(law, x, nmax, aligned), 0, {}, aligned.convolve);
    for (long n = 1; n <= nmax; ++n) {
      walk.step();
      const KilledLawVector snap = snapshot_of(walk);
      out.max_defect = std::max(out.max_defect, snap.defect);
      for (long y = 0; y <= ymax; ++y) {
        const auto d = decomposition_check(t, snap, y);
        ++out.cells;
        if (d.residual > out.max_residual) {
          out.max_residual = d.residual;
          out.worst_n = n;
          out.worst_x = x;
          out.worst_y = y;
        }
      }
    }
  }
  return out;
}

double top_octave_drift(const std::vector<double>& values) {
  if (values.size() < 2) return 0.0;
  const double a = values[values.size() - 2];
  const double b = values.back();
  return std::abs(b - a) / std::abs(b);
}

ConstantDiagnostics constant_diagnostics(const StepLaw& law, const LadderTables& t, const RenewalTables& r,
                                         const std::vector<long>& ngrid) {
  ConstantDiagnostics out;
  std::vector<double> k4, k5, k6, ek;
  for (long n : ngrid) {
    if (n > t.horizon) throw PreconditionViolated("constant_diagnostics: n beyond ladder horizon");
    ConstantRow row;
    row.n = n;
    row.cn = law.norming(static_cast<double>(n));
    const auto idx = static_cast<std::size_t>(std::floor(row.cn));
    if (idx >= r.U.size()) throw PreconditionViolated("constant_diagnostics: renewal tables too short");
    const double pt = t.tau_tail[static_cast<std::size_t>(n)];
    const double ptm = t.tauminus_tail[static_cast<std::size_t>(n)];
    row.k4 = r.U[idx] * pt;
    row.k5 = static_cast<double>(n) * pt * ptm;
    row.k6 = r.U[idx] * r.V[idx] / static_cast<double>(n);
    row.erickson = r.U[idx] * r.A[idx] / row.cn;
    out.rows.push_back(row);
    k4.push_back(row.k4);
    k5.push_back(row.k5);
    k6.push_back(row.k6);
    ek.push_back(row.erickson);
  }
  out.drift_k4 = top_octave_drift(k4);
  out.drift_k5 = top_octave_drift(k5);
  out.drift_k6 = top_octave_drift(k6);
  out.drift_erickson = top_octave_drift(ek);
  return out;
}

RenewalBound renewal_ratio_bound(const StepLaw& law, const LadderTables& t, const RenewalTables& r,
                                 const std::vector<long>& ngrid) {
  RenewalBound out;
  std::vector<double> seq;
  for (long n : ngrid) {
    RenewalBoundRow row;
    row.n = n;
    const double cn = law.norming(static_cast<double>(n));
    const long xmax = static_cast<long>(std::floor(2.0 * cn));
    if (xmax >= static_cast<long>(r.U.size()))
      throw PreconditionViolated("renewal_ratio_bound: renewal tables too short");
    const double scale = static_cast<double>(n) * cn;
    for (long x = 0; x <= xmax; ++x) {
      const auto i = static_cast<std::size_t>(x);
      if (x >= 1) row.c2_g = std::max(row.c2_g, t.g(n, x) * scale / r.U[i]);
      row.c2_gminus = std::max(row.c2_gminus, t.gminus(n, x) * scale / r.V[i]);
    }
    out.rows.push_back(row);
    seq.push_back(std::max(row.c2_g, row.c2_gminus));
    out.c2 = std::max(out.c2, seq.back());
  }
  out.drift = top_octave_drift(seq);
  return out;
}

void write_ladder_csv(const std::string& path, const LadderTables& t, long max_u) {
  CsvWriter csv(path, {"m", "u", "g", "gminus"});
  const long umax = std::min(max_u, t.store_width - 1);
  for (long m = 0; m <= t.horizon; ++m)
    for (long u = 0; u <= umax; ++u) csv.row(m, u, t.g(m, u), t.gminus(m, u));
}

void write_renewal_csv(const std::string& path, const RenewalTables& r) {
  CsvWriter csv(path, {"x", "U", "V"});
  for (std::size_t x = 0; x < r.U.size(); ++x) csv.row(x, r.U[x], r.V[x]);
}

}  // namespace fpt
