#pragma once

#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fpt {

/// Step families shipped with the toolkit.
///
/// BoundedLazy and FiniteTable are finite-variance (alpha = 2). ParetoLattice has
/// power tails P(X = k) ∝ |k|^(-alpha-1) on both sides plus an atom at 0.
/// SpectrallyNegative has a power left tail and a single up-step of size +1,
/// centered so the walk is attracted to a stable law with alpha * rho = 1.
enum class Family { BoundedLazy, ParetoLattice, SpectrallyNegative, FiniteTable };

enum class NormingMode { Variance, RightTailInversion, LeftTailInversion };

/// Lévy tail coefficients of the limit Y_1 under the walk's own norming:
/// nu((x, inf)) = right * x^-alpha, nu((-inf, -x)) = left * x^-alpha.
struct TailWeights {
  double right = 0.0;
  double left = 0.0;
};

/// Sum_{k >= n} k^-s for s > 1, n >= 1 (direct summation below a horizon,
/// Euler-Maclaurin remainder above it).
double hurwitz_tail(double s, long n);

/// An aperiodic integer-lattice step law. Immutable after construction.
class StepLaw {
 public:
  static StepLaw bounded_lazy(double p);
  /// Symmetric simple walk. Periodic (span 2); accepted for oracle work only.
  static StepLaw simple();
  static StepLaw pareto_lattice(double alpha, double atom0 = 0.2, double right_weight = 0.5);
  static StepLaw spectrally_negative(double alpha = 1.5, double atom0 = 0.2);
  static StepLaw finite_table(const std::map<long, double>& masses);

  Family family() const { return family_; }
  const std::string& name() const { return name_; }

  double alpha() const { return alpha_; }
  double rho() const { return rho_; }
  double eta() const { return 1.0 / alpha_; }
  /// NaN when the first moment does not exist.
  double mean() const { return mean_; }
  /// +inf for heavy-tailed families.
  double variance() const { return variance_; }

  bool finite_support() const { return !right_.has_value() && !left_.has_value(); }
  /// Smallest / largest step with positive mass (numeric_limits extremes when unbounded).
  long min_step() const;
  long max_step() const;
  bool symmetric() const { return symmetric_; }
  bool aperiodic() const { return span_ == 1; }
  long span() const { return span_; }

  NormingMode norming_mode() const;
  TailWeights limit_tail_weights() const;

  /// P(X = k).
  double pmf(long k) const;
  /// P(X > x) for any integer x.
  double tail(long x) const;
  /// P(X < -x) for any integer x.
  double left_tail(long x) const;
  /// P(X in [x, x + delta)).
  double local_mass(long x, long delta) const;
  /// Norming sequence c_n, continuous in n.
  double norming(double n) const;

  /// pmf(k) for k in [lo, hi].
  std::vector<double> pmf_table(long lo, long hi) const;
  /// tail(d) for d = 0 .. count-1.
  std::vector<double> tail_table(long count) const;
  /// left_tail(d) for d = 0 .. count-1.
  std::vector<double> left_tail_table(long count) const;

 private:
  struct PowerSide {
    double coef = 0.0;  // P(X = ±k) = coef * k^-s for k >= 1
    double s = 2.0;
    std::vector<double> cached;  // hurwitz_tail(s, k) for k < kCacheHorizon
    double sum_from(long k) const;
  };

  StepLaw() = default;
  void finalize();
  double tail_interp(double t) const;
  double finite_sum_above(long x) const;
  double finite_sum_below(long x) const;

  Family family_ = Family::FiniteTable;
  std::string name_;
  long fin_lo_ = 0;
  std::vector<double> fin_;  // finite atoms on [fin_lo_, fin_lo_ + size)
  std::optional<PowerSide> right_;
  std::optional<PowerSide> left_;
  double alpha_ = 2.0;
  double rho_ = 0.5;
  double mean_ = 0.0;
  double variance_ = 0.0;
  bool symmetric_ = false;
  long span_ = 1;
  TailWeights weights_{};
};

/// Parse "simple", "lazy:p=0.45", "pareto:alpha=0.8,atom=0.2,wplus=0.5",
/// "specneg:alpha=1.5,atom=0.2" or "table:-1=0.25,0=0.5,1=0.25".
/// Throws ConfigError naming `law` on malformed input.
StepLaw parse_law(const std::string& spec);

/// Positivity parameter of a strictly stable law from its index and tail weights.
double stable_positivity(double alpha, double right_weight, double left_weight);

}  // namespace fpt
