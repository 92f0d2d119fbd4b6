#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fpt/exact.hpp"
#include "fpt/ladder.hpp"
#include "fpt/stable.hpp"
#include "fpt/steps.hpp"

namespace fpt {

enum class Verdict { Converging, FlatAtConstant, Inconclusive };
std::string verdict_name(Verdict v);

/// Ratio sequence of an exact quantity against its asymptotic prediction on an n-grid.
struct ConvergenceReport {
  std::string statement;
  std::string law;
  std::string x_rule;
  std::vector<long> n;
  std::vector<long> x;
  std::vector<double> ratio;
  /// NaN means "some constant".
  double target = 1.0;
  double last_value = 0.0;
  double top_octave_drift = 0.0;
  /// Least-squares slope of log|ratio - target| (or log ratio for a constant target) on log n.
  double slope = 0.0;
  Verdict verdict = Verdict::Inconclusive;

  /// |ratio - target| at the last grid point.
  double last_error() const;
  /// Each of the last three points is at least as close to the target as the one before.
  bool improving() const;
};

/// Fills last_value, drift, slope and verdict from the ratio sequence.
/// Converging needs non-increasing |ratio - 1| over the last three points;
/// FlatAtConstant needs drift <= flat_tol.
void finalize_report(ConvergenceReport& r, double flat_tol = 0.05);

/// Barrier schedule x(n).
struct XRule {
  enum class Kind { Fixed, SqrtCn, ScaledCn };
  Kind kind = Kind::Fixed;
  double value = 0.0;

  static XRule fixed(long x) { return {Kind::Fixed, static_cast<double>(x)}; }
  static XRule sqrt_cn() { return {Kind::SqrtCn, 0.0}; }
  static XRule scaled(double k) { return {Kind::ScaledCn, k}; }
  long at(const StepLaw& law, long n) const;
  std::string describe() const;
};

/// P(T_x = n) / (U(x) P(T = n)). `U` must reach every x the rule produces.
ConvergenceReport regimeA(const StepLaw& law, const std::vector<double>& U, const XRule& rule,
                          const std::vector<long>& ngrid, const WindowPolicy& policy = {});
/// P(T_x > n) / (U(x) P(T > n)).
ConvergenceReport regimeA_tail(const StepLaw& law, const std::vector<double>& U, const XRule& rule,
                               const std::vector<long>& ngrid, const WindowPolicy& policy = {});

/// n P(T_x = n) / h_{x_n}(1) with x = round(x_over_cn c_n) and x_n the realized x / c_n.
ConvergenceReport regimeB(const StepLaw& law, const std::function<double(double)>& h, double x_over_cn,
                          const std::vector<long>& ngrid, const WindowPolicy& policy = {});

/// P(T_x = n) / F(x) with x = round(K c_n). Throws PreconditionViolated when alpha rho = 1.
ConvergenceReport regimeC(const StepLaw& law, double K, const std::vector<long>& ngrid,
                          const WindowPolicy& policy = {});
/// P(T_x <= n) / (n F(x)), the integrated one-big-jump form.
ConvergenceReport regimeC_integrated(const StepLaw& law, double K, const std::vector<long>& ngrid,
                                     const WindowPolicy& policy = {});

/// Everything the local estimates of the killed law compare against.
struct Prop4Inputs {
  RenewalTables renewal;
  std::vector<double> tau_tail;
  std::vector<double> tauminus_tail;
  double f0 = 0.0;
  std::function<double(double)> p;
  std::function<double(double)> ptilde;
  /// q(x_n, y_n).
  std::function<double(double, double)> q;
};

enum class Prop4Variant { A, B, D, C };
std::string prop4_name(Prop4Variant v);

/// Ratio of P(S_n = x - y, T_x > n) to
///   A: U(x) f(0) V(y) / (n c_n)        (x, y fixed: a = x, b = y)
///   B: U(x) P(tau > n) p~(y_n) / c_n   (x = a fixed, y = round(b c_n))
///   D: V(y) P(tau- > n) p(x_n) / c_n   (x = round(a c_n), y = b fixed)
///   C: q_{x_n}(y_n) / c_n              (x = round(a c_n), y = round(b c_n))
ConvergenceReport prop4_checks(const StepLaw& law, const Prop4Inputs& in, Prop4Variant variant, double a, double b,
                               const std::vector<long>& ngrid, const WindowPolicy& policy = {});

enum class Prop13Variant { Sx, S1, Sy, S3 };
std::string prop13_name(Prop13Variant v);

/// x = round(K c_n) with
///   Sx: P(S_n > x) / (n F(x))
///   S1: P(S_n > x, tau- > n) / (P(S_n > x) P(tau- > n) / rho)
///   Sy: P(S_n = x) / (n f_x^1)
///   S3: P(S_n = x, tau- > n) / (n f_x^1 P(tau- > n) / rho)
/// Throws PreconditionViolated when alpha rho = 1.
ConvergenceReport prop13_checks(const StepLaw& law, Prop13Variant variant, double K, const std::vector<long>& ngrid,
                                const WindowPolicy& policy = {});

struct EppelReport {
  ConvergenceReport regime_a;
  ConvergenceReport regime_a_tail;
  /// n c_n P(tau = n) / (f(0) omega(n)), omega(n) = sum_{y <= delta_n c_n} V(y) F(y).
  ConvergenceReport omega;
  /// n F(delta_n c_n) with delta_n = n^-1/4; must tend to 0.
  std::vector<double> delta_diagnostic;
  /// Message of the PreconditionViolated raised by regimeC.
  std::string regime_c_skipped;
};

/// Regime-A checks for the alpha rho = 1 family plus the omega(n) diagnostic.
EppelReport eppel_regimeA_speclneg(const StepLaw& law, long x, const std::vector<long>& ngrid,
                                   const WindowPolicy& policy = {});

/// P(T_x = n) for every x in xs at fixed n, from one set of ladder tables.
std::vector<double> passage_pmf_via_ladder(const LadderTables& t, const std::vector<long>& xs, long n);

void write_report_csv(const std::string& path, const std::vector<ConvergenceReport>& reports);
void write_summary_csv(const std::string& path, const std::vector<ConvergenceReport>& reports);

}  // namespace fpt
