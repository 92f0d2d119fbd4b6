#include "fpt/stable.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>

#include "fpt/csv.hpp"
#include "fpt/errors.hpp"

namespace fpt {

namespace bq = boost::math::quadrature;
using std::numbers::pi;

StableModel StableModel::brownian() { return StableModel{}; }

StableModel StableModel::of_law(const StepLaw& law) {
  StableModel m;
  m.alpha = law.alpha();
  m.rho = law.rho();
  m.eta = 1.0 / m.alpha;
  if (m.alpha < 2.0) {
    const TailWeights w = law.limit_tail_weights();
    m.c_plus = w.right;
    m.c_minus = w.left;
  }
  return m;
}

double StableModel::scale() const {
  if (gaussian()) return 0.5;
  // int (1 - cos ty) d(c y^-alpha) = c Gamma(1 - alpha) cos(pi alpha / 2) |t|^alpha.
  const double c = c_plus + c_minus;
  if (alpha == 1.0) return c * pi / 2.0;
  return c * std::tgamma(1.0 - alpha) * std::cos(pi * alpha / 2.0);
}

double stable_density(const StableModel& model, double y) {
  if (model.gaussian()) return normal_pdf(y);
  const double a = model.scale();
  double skew = 0.0;
  if (model.alpha == 1.0) {
    if (model.c_plus != model.c_minus)
      throw PreconditionViolated("stable_density: asymmetric alpha = 1 is not supported");
  } else {
    skew = a * model.beta() * std::tan(pi * model.alpha / 2.0);
  }
  const double alpha = model.alpha;
  auto integrand = [&](double t) {
    const double ta = std::pow(t, alpha);
    return std::exp(-a * ta) * std::cos(skew * ta - t * y);
  };
  // e^{-a t^alpha} < 1e-19 beyond t_end.
  const double t_end = std::pow(44.0 / a, 1.0 / alpha);
  const double piece = std::min(1.0, pi / std::max(1.0, std::abs(y) + std::abs(skew)));
  long double total = 0.0L;
  double err_total = 0.0;
  for (double lo = 0.0; lo < t_end; lo += piece) {
    double err = 0.0;
    total += bq::gauss_kronrod<double, 31>::integrate(integrand, lo, std::min(lo + piece, t_end), 12, 1e-13, &err);
    err_total += err;
  }
  if (err_total > 1e-8 * pi)
    throw QuadratureFailure("stable_density: achieved error " + std::to_string(err_total / pi));
  return static_cast<double>(total) / pi;
}

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * pi); }
double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
double brownian_meander_p(double x) { return x <= 0.0 ? 0.0 : x * std::exp(-0.5 * x * x); }
double brownian_h(double x) { return x <= 0.0 ? 0.0 : x * normal_pdf(x); }
double brownian_q(double x, double w) { return w < 0.0 ? 0.0 : normal_pdf(x - w) - normal_pdf(x + w); }
double brownian_sup_cdf(double x) { return x <= 0.0 ? 0.0 : 2.0 * normal_cdf(x) - 1.0; }

std::string provenance_name(Provenance p) {
  switch (p) {
    case Provenance::ClosedForm:
      return "closed-form";
    case Provenance::Quadrature:
      return "quadrature";
    case Provenance::Extracted:
      return "extracted";
  }
  return "unknown";
}

double DensityGrid::operator()(double x) const {
  if (z.empty() || x < 0.0) return 0.0;
  if (x <= z.front()) return z.front() > 0.0 ? value.front() * x / z.front() : value.front();
  if (x >= z.back()) {
    if (x == z.back()) return value.back();
    return tail_exponent > 0.0 ? value.back() * std::pow(x / z.back(), -tail_exponent) : 0.0;
  }
  const auto it = std::upper_bound(z.begin(), z.end(), x);
  const auto i = static_cast<std::size_t>(it - z.begin());
  const double w = (x - z[i - 1]) / (z[i] - z[i - 1]);
  return value[i - 1] + w * (value[i] - value[i - 1]);
}

double DensityGrid::integral() const {
  long double s = 0.0L;
  for (std::size_t i = 1; i < z.size(); ++i) s += 0.5L * (value[i] + value[i - 1]) * (z[i] - z[i - 1]);
  return static_cast<double>(s);
}

double DensityGrid::max_relative_error(double floor) const {
  const double top = value.empty() ? 0.0 : *std::max_element(value.begin(), value.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < value.size(); ++i)
    if (value[i] >= floor * top && value[i] > 0.0) worst = std::max(worst, error[i] / value[i]);
  return worst;
}

double DensityGrid::uniform_relative_error() const {
  if (value.empty()) return 0.0;
  const double top = *std::max_element(value.begin(), value.end());
  const double err = *std::max_element(error.begin(), error.end());
  return top > 0.0 ? err / top : 0.0;
}

DensityGrid tabulate(const std::function<double(double)>& f, const std::vector<double>& zgrid, Provenance prov) {
  DensityGrid g;
  g.provenance = prov;
  g.z = zgrid;
  g.value.reserve(zgrid.size());
  for (double z : zgrid) g.value.push_back(f(z));
  g.error.assign(zgrid.size(), 0.0);
  return g;
}

std::vector<double> lattice_zgrid(const StepLaw& law, long n, double zmax, MeanderSide side) {
  const double cn = law.norming(static_cast<double>(n));
  const long umax = static_cast<long>(std::floor(zmax * cn));
  std::vector<double> z;
  for (long u = side == MeanderSide::Positive ? 1 : 0; u <= umax; ++u) z.push_back(static_cast<double>(u) / cn);
  return z;
}

DensityGrid extract_meander(const StepLaw& law, const LadderTables& t, long n, const std::vector<double>& zgrid,
                            MeanderSide side) {
  const double cn = law.norming(static_cast<double>(n));
  if (cn < 20.0) throw ResolutionTooCoarse("extract_meander: c_n = " + std::to_string(cn) + " < 20 sites per unit");
  const long half = n / 2;
  const double ch = law.norming(static_cast<double>(half));
  const bool pos = side == MeanderSide::Positive;
  auto row = [&](long m, long u) { return pos ? t.g(m, u) : t.gminus(m, u); };
  const double tail_n = pos ? t.tauminus_tail[static_cast<std::size_t>(n)] : t.tau_tail[static_cast<std::size_t>(n)];
  const double tail_h =
      pos ? t.tauminus_tail[static_cast<std::size_t>(half)] : t.tau_tail[static_cast<std::size_t>(half)];
  const long depth = pos ? t.g_depth : t.gminus_depth;

  DensityGrid g;
  g.provenance = Provenance::Extracted;
  g.n = n;
  g.tail_exponent = law.alpha() < 2.0 ? law.alpha() + 1.0 : 0.0;
  for (double z : zgrid) {
    const long u = std::lround(z * cn);
    if (u > depth) break;
    const double v = cn * row(n, u) / tail_n;
    // The half row is read at the same z; sites u/c_n and u'/c_{n/2} do not coincide.
    const double sh = z * ch;
    const long uh = static_cast<long>(std::floor(sh));
    const double w = sh - static_cast<double>(uh);
    const double lo_h = (pos && uh < 1) ? 0.0 : row(half, uh);
    const double hi_h = w > 0.0 && uh + 1 <= depth ? row(half, uh + 1) : 0.0;
    const double vh = ch * ((1.0 - w) * lo_h + w * hi_h) / tail_h;
    g.z.push_back(z);
    g.value.push_back(v);
    g.error.push_back(std::abs(v - vh));
  }
  return g;
}

LocalLimitReport local_limit_f0_check(const StepLaw& law, const std::vector<long>& ngrid, const WindowPolicy& policy) {
  if (!law.aperiodic()) throw PreconditionViolated("local_limit_f0_check: law is periodic");
  if (ngrid.empty()) throw PreconditionViolated("local_limit_f0_check: empty grid");
  const long nmax = *std::max_element(ngrid.begin(), ngrid.end());
  Strip s;
  s.lower = Edge::Truncation;
  s.upper = Edge::Truncation;
  s.lo = law.min_step() == std::numeric_limits<long>::min() ? -policy.heavy_depth : nmax * law.min_step();
  s.hi = law.max_step() == std::numeric_limits<long>::max() ? policy.heavy_depth : nmax * law.max_step();
  if (s.hi - s.lo + 1 > policy.mem_cap_sites) throw WindowOverflow("local_limit_f0_check: window exceeds memory cap");
  StripWalk walk(law, s, 0, {}, policy.convolve);

  LocalLimitReport rep;
  rep.f0 = stable_density(StableModel::of_law(law), 0.0);
  std::vector<long> sorted = ngrid;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> seq;
  std::size_t next = 0;
  for (long n = 1; n <= nmax && next < sorted.size(); ++n) {
    walk.step();
    while (next < sorted.size() && sorted[next] == n) {
      LocalLimitRow row;
      row.n = n;
      row.value = law.norming(static_cast<double>(n)) * walk.mass_at(0);
      row.defect = walk.defect();
      rep.rows.push_back(row);
      seq.push_back(row.value);
      ++next;
    }
  }
  rep.drift = top_octave_drift(seq);
  rep.rel_error_last = std::abs(seq.back() / rep.f0 - 1.0);
  return rep;
}

namespace {

// Composite 8-point Gauss-Legendre on panels that halve toward the flagged endpoints.
// Resolves power-type endpoint behaviour and features of width down to (b - a) 2^-levels.
template <class F>
double graded(const F& f, double a, double b, int levels, bool toward_a, bool toward_b) {
  if (!(b > a)) return 0.0;
  using rule = bq::gauss<double, 8>;
  if (toward_a && toward_b) {
    const double mid = 0.5 * (a + b);
    return graded(f, a, mid, levels, true, false) + graded(f, mid, b, levels, false, true);
  }
  if (!toward_a && !toward_b) return rule::integrate(f, a, b);
  const double len = b - a;
  long double s = 0.0L;
  for (int k = 0; k < levels; ++k) {
    const double hi = len * std::ldexp(1.0, -k);
    const double lo = len * std::ldexp(1.0, -k - 1);
    s += toward_a ? rule::integrate(f, a + lo, a + hi) : rule::integrate(f, b - hi, b - lo);
  }
  const double last = len * std::ldexp(1.0, -levels);
  s += toward_a ? rule::integrate(f, a, a + last) : rule::integrate(f, b - last, b);
  return static_cast<double>(s);
}

// int_start^inf f on doubling panels, closed by a power-law tail f(W) W / (decay - 1).
template <class F>
double graded_to_infinity(const F& f, double start, double first, int panels, double decay) {
  using rule = bq::gauss<double, 8>;
  long double s = graded(f, start, start + first, 30, true, false);
  double lo = start + first;
  double width = first;
  for (int k = 0; k < panels; ++k) {
    s += rule::integrate(f, lo, lo + width);
    lo += width;
    width *= 2.0;
  }
  if (decay > 1.0) s += f(lo) * lo / (decay - 1.0);
  return static_cast<double>(s);
}

constexpr int kInnerLevels = 30;
constexpr int kOuterLevels = 40;

}  // namespace

KilledDensity::KilledDensity(const StableModel& model, double x, double sup_prob, DensityGrid p, DensityGrid ptilde,
                             double tol)
    : model_(model), x_(x), p_(std::move(p)), ptilde_(std::move(ptilde)), tol_(tol) {
  if (!(x > 0.0)) throw PreconditionViolated("KilledDensity: x must be positive");
  if (std::isnan(sup_prob)) throw NormalizationUnavailable("KilledDensity: no total-mass oracle for x");
  auto f = [this](double w) { return raw(w); };
  // q_x(w) decays like the density of -Y_1: w^-(alpha+1) for alpha < 2, faster for alpha = 2.
  const double decay = model_.gaussian() ? 0.0 : model_.alpha + 1.0;
  const double near = graded(f, 0.0, x_, kInnerLevels, true, true);
  const double far = graded_to_infinity(f, x_, x_, model_.gaussian() ? 6 : 24, decay);
  total_raw_ = near + far;
  if (!(total_raw_ > 0.0) || !std::isfinite(total_raw_))
    throw QuadratureFailure("KilledDensity: total mass integral failed");
  scale_ = sup_prob / total_raw_;
}

double KilledDensity::raw(double w) const {
  if (w <= 0.0) return 0.0;
  const double eta = model_.eta;
  const double rho = model_.rho;
  const double m = std::min(x_, w);
  // u(t, z) = t^(rho - eta - 1) p(z t^-eta); u-(s, z) = s^(-rho - eta) p~(z s^-eta), s = 1 - t.
  auto inner = [&](double t) {
    const double s = 1.0 - t;
    if (t <= 0.0 || s <= 0.0) return 0.0;
    const double st = std::pow(t, -eta);
    const double ss = std::pow(s, -eta);
    const double pre = std::pow(t, rho - 1.0) * st * std::pow(s, -rho) * ss;
    if (!std::isfinite(pre)) return 0.0;
    auto g = [&](double z) {
      const double a = p_((x_ - z) * st);
      if (a == 0.0) return 0.0;
      return a * ptilde_((w - z) * ss);
    };
    // Both kernels sharpen at the upper end z = m.
    return pre * graded(g, 0.0, m, kInnerLevels, false, true);
  };
  return graded(inner, 0.0, 1.0, kOuterLevels, true, true);
}

double riv_integral(const StableModel& model, const KilledDensity& q) {
  if (model.alpha * model.rho >= 1.0) throw PreconditionViolated("riv_integral: requires alpha * rho < 1");
  const double x = q.x();
  // Local exponent of q near 0 decides integrability of q(w) w^-alpha.
  const double w1 = 1e-3 * x;
  const double w2 = 1e-4 * x;
  const double q1 = q(w1);
  const double q2 = q(w2);
  if (q1 > 0.0 && q2 > 0.0) {
    const double expo = std::log(q1 / q2) / std::log(w1 / w2);
    if (expo - model.alpha <= -1.0 + 0.05)
      throw SingularIntegrand("riv_integral: q_x(w) w^-alpha behaves like w^" + std::to_string(expo - model.alpha));
  }
  const double a = model.alpha;
  auto f = [&](double w) { return q(w) * std::pow(w, -a); };
  const double near = graded(f, 0.0, x, kInnerLevels, true, true);
  const double far = graded_to_infinity(f, x, x, 24, 2.0 * a + 1.0);
  const double v = near + far;
  if (!std::isfinite(v)) throw SingularIntegrand("riv_integral: integral is not finite");
  return v;
}

RivCheck h_via_riv(const StableModel& model, const std::vector<double>& xs, const std::vector<double>& riv,
                   const std::vector<double>& empirical, std::size_t calib_index) {
  if (model.alpha * model.rho >= 1.0) throw PreconditionViolated("h_via_riv: requires alpha * rho < 1");
  if (xs.size() != riv.size() || xs.size() != empirical.size() || calib_index >= xs.size())
    throw PreconditionViolated("h_via_riv: mismatched inputs");
  RivCheck out;
  out.calibration_x = xs[calib_index];
  out.k7 = empirical[calib_index] / riv[calib_index];
  for (std::size_t i = 0; i < xs.size(); ++i) {
    RivCheckRow r;
    r.x = xs[i];
    r.riv = riv[i];
    r.predicted = out.k7 * riv[i];
    r.empirical = empirical[i];
    r.rel_error = std::abs(r.predicted / r.empirical - 1.0);
    out.rows.push_back(r);
  }
  return out;
}

ProportionalityReport spectrally_negative_check(const StableModel& model, const DensityGrid& p,
                                                const std::vector<double>& xs, const std::vector<double>& h) {
  if (std::abs(model.alpha * model.rho - 1.0) > 1e-12)
    throw PreconditionViolated("spectrally_negative_check: requires alpha * rho = 1");
  if (xs.size() != h.size() || xs.empty()) throw PreconditionViolated("spectrally_negative_check: mismatched inputs");
  ProportionalityReport r;
  r.x = xs;
  long double s = 0.0L;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    r.ratio.push_back(p(xs[i]) / h[i]);
    s += r.ratio.back();
  }
  r.mean = static_cast<double>(s / xs.size());
  long double v = 0.0L;
  for (double q : r.ratio) v += (q - r.mean) * (q - r.mean);
  r.cv = std::sqrt(static_cast<double>(v / xs.size())) / r.mean;
  return r;
}

void write_density_csv(const std::string& path, const DensityGrid& grid) {
  CsvWriter csv(path, {"z", "value", "error", "provenance"});
  for (std::size_t i = 0; i < grid.z.size(); ++i)
    csv.row(grid.z[i], grid.value[i], grid.error[i], provenance_name(grid.provenance));
}

}  // namespace fpt
