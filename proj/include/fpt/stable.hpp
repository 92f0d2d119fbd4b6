#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fpt/ladder.hpp"
#include "fpt/steps.hpp"

namespace fpt {

/// Strictly stable limit Y_1 of S_n / c_n under the walk's own norming.
/// Levy tails nu((y, inf)) = c_plus * y^-alpha, nu((-inf, -y)) = c_minus * y^-alpha.
struct StableModel {
  double alpha = 2.0;
  double rho = 0.5;
  double eta = 0.5;
  double c_plus = 0.0;
  double c_minus = 0.0;

  static StableModel brownian();
  /// alpha < 2 uses the law's limit tail weights; alpha = 2 gives the standard normal.
  static StableModel of_law(const StepLaw& law);

  bool gaussian() const { return alpha == 2.0; }
  double beta() const { return (c_plus - c_minus) / (c_plus + c_minus); }
  /// Scale sigma^alpha of the characteristic exponent.
  double scale() const;
};

/// Density of Y_1. Oscillatory-integral quadrature for alpha < 2 (absolute error <= 1e-8).
/// Throws QuadratureFailure, or PreconditionViolated for asymmetric alpha = 1.
double stable_density(const StableModel& model, double y);

// Brownian closed forms.
double normal_pdf(double x);
double normal_cdf(double x);
/// Rayleigh meander density p(x) = x exp(-x^2/2).
double brownian_meander_p(double x);
/// Passage density h_x(1) = x exp(-x^2/2) / sqrt(2 pi).
double brownian_h(double x);
/// q_x(w) = phi(x - w) - phi(x + w) by reflection.
double brownian_q(double x, double w);
/// P(sup_{t<=1} B_t < x) = 2 Phi(x) - 1.
double brownian_sup_cdf(double x);

enum class Provenance { ClosedForm, Quadrature, Extracted };
std::string provenance_name(Provenance p);

/// Tabulated density on increasing abscissae with a per-point error estimate.
struct DensityGrid {
  std::vector<double> z;
  std::vector<double> value;
  std::vector<double> error;
  Provenance provenance = Provenance::ClosedForm;
  /// Time index used for extraction (0 otherwise).
  long n = 0;
  /// Beyond the last abscissa the density decays like z^-tail_exponent; 0 means it vanishes.
  double tail_exponent = 0.0;

  /// Linear interpolation, 0 below z = 0, power extrapolation above the grid.
  double operator()(double x) const;
  /// Trapezoid integral over the grid.
  double integral() const;
  /// Largest error / value over points with value >= floor * max value.
  double max_relative_error(double floor = 0.05) const;
  /// max error / max value; the two-n stability measure in the uniform norm.
  double uniform_relative_error() const;
};

DensityGrid tabulate(const std::function<double(double)>& f, const std::vector<double>& zgrid, Provenance prov);

enum class MeanderSide { Positive, Negative };

/// p-hat(z) = c_n g(n, round(z c_n)) / P(tau- > n)     (Positive, estimates p)
/// p~-hat(z) = c_n gminus(n, round(z c_n)) / P(tau > n) (Negative, estimates p~)
/// Errors are |p-hat_n - p-hat_{n/2}| (both rows must be stored as full rows).
/// Throws ResolutionTooCoarse when c_n < 20.
DensityGrid extract_meander(const StepLaw& law, const LadderTables& t, long n, const std::vector<double>& zgrid,
                            MeanderSide side);
/// Every lattice point u / c_n, u = 1 .. floor(zmax c_n) (u = 0 included for Negative).
std::vector<double> lattice_zgrid(const StepLaw& law, long n, double zmax, MeanderSide side);

struct LocalLimitRow {
  long n = 0;
  double value = 0.0;  // c_n P(S_n = 0)
  double defect = 0.0;
};

struct LocalLimitReport {
  std::vector<LocalLimitRow> rows;
  double f0 = 0.0;
  double drift = 0.0;
  double rel_error_last = 0.0;
};

/// Throws PreconditionViolated for periodic laws.
LocalLimitReport local_limit_f0_check(const StepLaw& law, const std::vector<long>& ngrid,
                                      const WindowPolicy& policy = {});

/// Killed density q_x(w) built from the ladder renewal densities
///   u(t, z) = t^(rho - eta - 1) p(z t^-eta),  u-(t, z) = t^(-rho - eta) p~(z t^-eta),
///   J(x, w) = int_0^1 int_0^(x ^ w) u(t, x - z) u-(1 - t, w - z) dz dt,
/// scaled so that int_0^inf q_x(w) dw = P(sup_{t<=1} Y_t < x).
class KilledDensity {
 public:
  /// `sup_prob` is the independent total-mass oracle; NaN raises NormalizationUnavailable.
  KilledDensity(const StableModel& model, double x, double sup_prob, DensityGrid p, DensityGrid ptilde,
                double tol = 1e-7);

  double operator()(double w) const { return scale_ * raw(w); }
  double raw(double w) const;
  double x() const { return x_; }
  double normalization() const { return scale_; }
  double total_raw() const { return total_raw_; }

 private:
  StableModel model_;
  double x_;
  DensityGrid p_;
  DensityGrid ptilde_;
  double tol_;
  double total_raw_ = 0.0;
  double scale_ = 1.0;
};

/// int_0^inf q_x(w) w^-alpha dw (the passage density up to the constant k7).
/// Requires alpha rho < 1; throws SingularIntegrand when the integrand is not integrable at 0.
double riv_integral(const StableModel& model, const KilledDensity& q);

struct RivCheckRow {
  double x = 0.0;
  double riv = 0.0;        // int q_x(w) w^-alpha dw
  double predicted = 0.0;  // k7 * riv
  double empirical = 0.0;  // independent h_x(1)
  double rel_error = 0.0;
};

struct RivCheck {
  double k7 = 0.0;
  double calibration_x = 0.0;
  std::vector<RivCheckRow> rows;
};

/// Fixes k7 at rows[calib_index] and predicts the remaining points parameter-free.
RivCheck h_via_riv(const StableModel& model, const std::vector<double>& xs, const std::vector<double>& riv,
                   const std::vector<double>& empirical, std::size_t calib_index);

struct ProportionalityReport {
  std::vector<double> x;
  std::vector<double> ratio;  // p(x) / h_x(1)
  double mean = 0.0;
  double cv = 0.0;
};

/// p(x) / h_x(1) over the supplied points. Throws PreconditionViolated unless alpha rho = 1.
ProportionalityReport spectrally_negative_check(const StableModel& model, const DensityGrid& p,
                                                const std::vector<double>& xs, const std::vector<double>& h);

void write_density_csv(const std::string& path, const DensityGrid& grid);

}  // namespace fpt
