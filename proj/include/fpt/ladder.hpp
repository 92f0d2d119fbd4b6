#pragma once

#include <map>
#include <string>
#include <vector>

#include "fpt/exact.hpp"
#include "fpt/steps.hpp"

namespace fpt {

// Conventions: tau = min{n >= 1 : S_n > 0} (strict ascending),
// tau- = min{n >= 1 : S_n <= 0} (weak descending).

struct LadderOptions {
  /// Largest time index M.
  long horizon = 256;
  /// Columns u = 0 .. store_width-1 of g and gminus are kept for every m.
  long store_width = 64;
  /// Rows kept over the whole window.
  std::vector<long> full_rows;
  /// Ladder-height pmfs are resolved for heights y < height_cap.
  long height_cap = 256;
  /// Window depth for unbounded directions; 0 uses policy.heavy_depth.
  long depth = 0;
  /// Largest window loss tolerated by the ladder-height pmfs.
  double height_defect_tol = 1e-6;
  WindowPolicy policy{};
};

/// Ladder-height laws. q_H[y] = P(H = y) (q_H[0] = 0), q_Hminus[y] = P(H- = -y), y < cap.
struct LadderHeights {
  std::vector<double> q_H;
  std::vector<double> q_Hminus;
  /// P(H >= cap), P(-H- >= cap).
  double tail_H = 0.0;
  double tail_Hminus = 0.0;
  /// Mass P(tau > M) (resp. tau-) assigned using the overshoot shape of step M.
  /// Exact when the last-step shape equals the conditional shape (e.g. skip-free steps).
  double redistributed_H = 0.0;
  double redistributed_Hminus = 0.0;
  /// Window loss of the DP that produced each pmf.
  double defect_H = 0.0;
  double defect_Hminus = 0.0;
};

struct LadderTables {
  std::string law;
  long horizon = 0;
  long store_width = 0;
  /// Window [1, g_depth] for g and [-gminus_depth, 0] for gminus.
  long g_depth = 0;
  long gminus_depth = 0;

  /// g_cols[m][u] = P(S_m = u, tau- > m); gminus_cols[m][u] = P(S_m = -u, tau > m).
  std::vector<std::vector<double>> g_cols;
  std::vector<std::vector<double>> gminus_cols;
  std::map<long, std::vector<double>> g_full;
  std::map<long, std::vector<double>> gminus_full;

  /// P(tau > m), P(tau- > m). Each equals the row sum plus the row's window defect.
  std::vector<double> tau_tail;
  std::vector<double> tauminus_tail;
  std::vector<double> g_rowsum;
  std::vector<double> gminus_rowsum;
  std::vector<double> g_defect;
  std::vector<double> gminus_defect;
  /// Gamma[n] = sum_{j >= 0} P(tau_j <= n), tau_j the j-th strict ascending ladder time.
  std::vector<double> Gamma;

  LadderHeights heights;

  /// Throws PreconditionViolated when (m, u) was not stored.
  double g(long m, long u) const;
  double gminus(long m, long u) const;
  /// P(tau = m).
  double tau_pmf(long m) const { return tau_tail[m - 1] - tau_tail[m]; }
  double tauminus_pmf(long m) const { return tauminus_tail[m - 1] - tauminus_tail[m]; }
  /// P(T_x > n) = sum_{r <= n} sum_{z <= x} g(r, z) P(tau > n - r), split at the first maximum.
  /// Needs store_width > x.
  double survival_via_max(long x, long n) const;
};

LadderTables build_ladder_tables(const StepLaw& law, const LadderOptions& opts);

/// Ladder-height pmfs alone. Throws DefectTooLarge when the window loss exceeds the tolerance.
LadderHeights ladder_height_pmfs(const StepLaw& law, const LadderOptions& opts);

struct RenewalTables {
  std::vector<double> U;
  std::vector<double> u_mass;
  std::vector<double> V;
  std::vector<double> v_mass;
  /// A[y] = sum_{w=0}^{y} P(H > w).
  std::vector<double> A;
};

/// U, V on 0..xmax. Throws AtomTooLarge if q_Hminus[0] >= 1 - 1e-9.
RenewalTables renewal_functions(const LadderHeights& heights, long xmax);

/// Cells lighter than this fraction of the surviving mass are compared against that floor.
inline constexpr double kResidualMassFloor = 1e-6;

/// Relative residual of the first-maximum decomposition of P(S_n = x - y, T_x > n).
struct DecompositionResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;  // |lhs - rhs| / max(lhs, kResidualMassFloor * P(T_x > n))
};

DecompositionResult decomposition_check(const LadderTables& t, const KilledLawVector& snap, long y);

struct DecompositionSweep {
  long cells = 0;
  double max_residual = 0.0;
  long worst_n = 0;
  long worst_x = 0;
  long worst_y = 0;
  double max_defect = 0.0;
};

/// All cells 1 <= n <= nmax, 0 <= x <= xmax, 0 <= y <= ymax. Killed windows use depth t.g_depth
/// so the three DPs truncate at matching depths.
DecompositionSweep decomposition_sweep(const StepLaw& law, const LadderTables& t, long nmax, long xmax, long ymax,
                                       const WindowPolicy& policy = {});

struct ConstantRow {
  long n = 0;
  double cn = 0.0;
  double k4 = 0.0;        // U(c_n) P(tau > n)
  double k5 = 0.0;        // n P(tau > n) P(tau- > n)
  double k6 = 0.0;        // U(c_n) V(c_n) / n
  double erickson = 0.0;  // U(c_n) A(c_n) / c_n
};

struct ConstantDiagnostics {
  std::vector<ConstantRow> rows;
  /// |r(N) - r(N/2)| / |r(N)| for each column over the top octave.
  double drift_k4 = 0.0;
  double drift_k5 = 0.0;
  double drift_k6 = 0.0;
  double drift_erickson = 0.0;
};

ConstantDiagnostics constant_diagnostics(const StepLaw& law, const LadderTables& t, const RenewalTables& r,
                                         const std::vector<long>& ngrid);

/// Rows of g and gminus against the renewal functions: sup_n of these ratios is the constant C2.
struct RenewalBoundRow {
  long n = 0;
  double c2_g = 0.0;       // max_{1 <= x <= 2 c_n} g(n,x) n c_n / U(x)
  double c2_gminus = 0.0;  // max_{0 <= x <= 2 c_n} gminus(n,x) n c_n / V(x)
};

struct RenewalBound {
  std::vector<RenewalBoundRow> rows;
  double c2 = 0.0;
  double drift = 0.0;
};

/// Needs full rows for every n in ngrid and renewal tables reaching 2 c_n.
RenewalBound renewal_ratio_bound(const StepLaw& law, const LadderTables& t, const RenewalTables& r,
                                 const std::vector<long>& ngrid);

/// Relative change of the last two entries.
double top_octave_drift(const std::vector<double>& values);

void write_ladder_csv(const std::string& path, const LadderTables& t, long max_u);
void write_renewal_csv(const std::string& path, const RenewalTables& r);

}  // namespace fpt
