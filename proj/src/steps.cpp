#include "fpt/steps.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "fpt/errors.hpp"

namespace fpt {

namespace {

constexpr long kCacheHorizon = 1024;

// Euler-Maclaurin estimate of sum_{k >= n} k^-s, three Bernoulli corrections.
double euler_maclaurin_tail(double s, double n) {
  const double ns = std::pow(n, -s);
  double r = n * ns / (s - 1.0) + 0.5 * ns;
  r += s * ns / n / 12.0;
  r -= s * (s + 1.0) * (s + 2.0) * ns / (n * n * n) / 720.0;
  r += s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * ns / std::pow(n, 5) / 30240.0;
  return r;
}

// Neumaier compensated accumulator.
struct CompensatedSum {
  double sum = 0.0;
  double c = 0.0;
  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      c += (sum - t) + v;
    } else {
      c += (v - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + c; }
};

std::string format_double(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

double hurwitz_tail(double s, long n) {
  if (s <= 1.0) throw InvalidLaw("hurwitz_tail requires s > 1");
  if (n < 1) n = 1;
  if (n >= kCacheHorizon) return euler_maclaurin_tail(s, static_cast<double>(n));
  CompensatedSum acc;
  acc.add(euler_maclaurin_tail(s, static_cast<double>(kCacheHorizon)));
  for (long k = kCacheHorizon - 1; k >= n; --k) acc.add(std::pow(static_cast<double>(k), -s));
  return acc.value();
}

double stable_positivity(double alpha, double right_weight, double left_weight) {
  if (right_weight + left_weight <= 0.0) throw InvalidLaw("stable_positivity: zero tail weights");
  if (alpha >= 2.0) return 0.5;
  const double beta = (right_weight - left_weight) / (right_weight + left_weight);
  if (alpha == 1.0) {
    if (beta != 0.0) throw InvalidLaw("alpha = 1 requires symmetric tails");
    return 0.5;
  }
  return 0.5 + std::atan(beta * std::tan(std::numbers::pi * alpha / 2.0)) / (std::numbers::pi * alpha);
}

double StepLaw::PowerSide::sum_from(long k) const {
  if (k < 1) k = 1;
  if (k < static_cast<long>(cached.size())) return cached[static_cast<std::size_t>(k)];
  return euler_maclaurin_tail(s, static_cast<double>(k));
}

StepLaw StepLaw::bounded_lazy(double p) {
  if (!(p > 0.0 && p <= 0.5)) throw InvalidLaw("bounded_lazy: p must lie in (0, 1/2]");
  StepLaw law;
  law.family_ = Family::BoundedLazy;
  law.name_ = p == 0.5 ? "simple" : "lazy:p=" + format_double(p);
  law.fin_lo_ = -1;
  law.fin_ = {p, 1.0 - 2.0 * p, p};
  law.finalize();
  return law;
}

StepLaw StepLaw::simple() { return bounded_lazy(0.5); }

StepLaw StepLaw::pareto_lattice(double alpha, double atom0, double right_weight) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw InvalidLaw("pareto_lattice: alpha must lie in (0, 2)");
  if (!(atom0 >= 0.0 && atom0 < 1.0)) throw InvalidLaw("pareto_lattice: atom must lie in [0, 1)");
  if (!(right_weight > 0.0 && right_weight < 1.0)) throw InvalidLaw("pareto_lattice: wplus must lie in (0, 1)");
  if (alpha >= 1.0 && right_weight != 0.5)
    throw InvalidLaw("pareto_lattice: alpha >= 1 requires equal tail weights (centering)");
  StepLaw law;
  law.family_ = Family::ParetoLattice;
  law.name_ = "pareto:alpha=" + format_double(alpha) + ",atom=" + format_double(atom0) +
              ",wplus=" + format_double(right_weight);
  law.alpha_ = alpha;
  const double s = alpha + 1.0;
  const double zeta = hurwitz_tail(s, 1);
  law.fin_lo_ = 0;
  law.fin_ = {atom0};
  law.right_ = PowerSide{(1.0 - atom0) * right_weight / zeta, s, {}};
  law.left_ = PowerSide{(1.0 - atom0) * (1.0 - right_weight) / zeta, s, {}};
  law.weights_ = {1.0, (1.0 - right_weight) / right_weight};
  law.rho_ = stable_positivity(alpha, law.weights_.right, law.weights_.left);
  law.mean_ = alpha > 1.0 ? 0.0 : std::numeric_limits<double>::quiet_NaN();
  law.variance_ = std::numeric_limits<double>::infinity();
  law.finalize();
  return law;
}

StepLaw StepLaw::spectrally_negative(double alpha, double atom0) {
  if (!(alpha > 1.0 && alpha < 2.0)) throw InvalidLaw("spectrally_negative: alpha must lie in (1, 2)");
  if (!(atom0 >= 0.0 && atom0 < 1.0)) throw InvalidLaw("spectrally_negative: atom must lie in [0, 1)");
  StepLaw law;
  law.family_ = Family::SpectrallyNegative;
  law.name_ = "specneg:alpha=" + format_double(alpha) + ",atom=" + format_double(atom0);
  law.alpha_ = alpha;
  const double s = alpha + 1.0;
  const double zeta_mean = hurwitz_tail(alpha, 1);
  const double zeta_mass = hurwitz_tail(s, 1);
  const double coef = (1.0 - atom0) / (zeta_mean + zeta_mass);
  law.fin_lo_ = 0;
  law.fin_ = {atom0, coef * zeta_mean};
  law.left_ = PowerSide{coef, s, {}};
  law.weights_ = {0.0, 1.0};
  law.rho_ = 1.0 / alpha;
  law.mean_ = 0.0;
  law.variance_ = std::numeric_limits<double>::infinity();
  law.finalize();
  return law;
}

StepLaw StepLaw::finite_table(const std::map<long, double>& masses) {
  if (masses.size() < 2) throw InvalidLaw("finite_table: need at least two support points");
  StepLaw law;
  law.family_ = Family::FiniteTable;
  const long lo = masses.begin()->first;
  const long hi = masses.rbegin()->first;
  law.fin_lo_ = lo;
  law.fin_.assign(static_cast<std::size_t>(hi - lo + 1), 0.0);
  double total = 0.0;
  std::ostringstream name;
  name << "table:";
  bool first = true;
  for (const auto& [k, m] : masses) {
    if (!(m >= 0.0)) throw InvalidLaw("finite_table: negative mass");
    law.fin_[static_cast<std::size_t>(k - lo)] = m;
    total += m;
    name << (first ? "" : ",") << k << "=" << m;
    first = false;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InvalidLaw("finite_table: masses must sum to 1");
  law.name_ = name.str();
  law.finalize();
  return law;
}

void StepLaw::finalize() {
  for (auto* side : {&right_, &left_}) {
    if (!side->has_value()) continue;
    auto& ps = **side;
    ps.cached.assign(static_cast<std::size_t>(kCacheHorizon + 1), 0.0);
    ps.cached[kCacheHorizon] = euler_maclaurin_tail(ps.s, static_cast<double>(kCacheHorizon));
    CompensatedSum acc;
    acc.add(ps.cached[kCacheHorizon]);
    for (long k = kCacheHorizon - 1; k >= 1; --k) {
      acc.add(std::pow(static_cast<double>(k), -ps.s));
      ps.cached[static_cast<std::size_t>(k)] = acc.value();
    }
    ps.cached[0] = ps.cached[1];
  }

  // Lattice span: gcd of support differences.
  long g = 0;
  std::optional<long> first;
  for (std::size_t i = 0; i < fin_.size(); ++i) {
    if (fin_[i] <= 0.0) continue;
    const long k = fin_lo_ + static_cast<long>(i);
    if (!first) first = k;
    g = std::gcd(g, k - *first);
  }
  if (right_ || left_) g = 1;  // consecutive integers in the support
  span_ = g == 0 ? 1 : g;

  if (finite_support()) {
    CompensatedSum m1;
    CompensatedSum m2;
    for (std::size_t i = 0; i < fin_.size(); ++i) {
      const double k = static_cast<double>(fin_lo_ + static_cast<long>(i));
      m1.add(k * fin_[i]);
      m2.add(k * k * fin_[i]);
    }
    mean_ = m1.value();
    variance_ = m2.value() - mean_ * mean_;
    if (std::abs(mean_) > 1e-12) throw InvalidLaw("finite-variance laws must be centered");
    alpha_ = 2.0;
    rho_ = 0.5;
    bool sym = true;
    for (long k = fin_lo_; k < fin_lo_ + static_cast<long>(fin_.size()); ++k)
      if (std::abs(pmf(k) - pmf(-k)) > 0.0) sym = false;
    symmetric_ = sym;
  } else {
    symmetric_ = right_ && left_ && right_->coef == left_->coef && fin_lo_ == 0 && fin_.size() == 1;
  }
}

long StepLaw::min_step() const {
  if (left_) return std::numeric_limits<long>::min();
  for (std::size_t i = 0; i < fin_.size(); ++i)
    if (fin_[i] > 0.0) return fin_lo_ + static_cast<long>(i);
  return 0;
}

long StepLaw::max_step() const {
  if (right_) return std::numeric_limits<long>::max();
  for (std::size_t i = fin_.size(); i-- > 0;)
    if (fin_[i] > 0.0) return fin_lo_ + static_cast<long>(i);
  return 0;
}

NormingMode StepLaw::norming_mode() const {
  switch (family_) {
    case Family::ParetoLattice:
      return NormingMode::RightTailInversion;
    case Family::SpectrallyNegative:
      return NormingMode::LeftTailInversion;
    default:
      return NormingMode::Variance;
  }
}

TailWeights StepLaw::limit_tail_weights() const { return weights_; }

double StepLaw::pmf(long k) const {
  double m = 0.0;
  const long idx = k - fin_lo_;
  if (idx >= 0 && idx < static_cast<long>(fin_.size())) m += fin_[static_cast<std::size_t>(idx)];
  if (k >= 1 && right_) m += right_->coef * std::pow(static_cast<double>(k), -right_->s);
  if (k <= -1 && left_) m += left_->coef * std::pow(static_cast<double>(-k), -left_->s);
  return m;
}

double StepLaw::finite_sum_above(long x) const {
  double s = 0.0;
  for (std::size_t i = fin_.size(); i-- > 0;) {
    const long k = fin_lo_ + static_cast<long>(i);
    if (k <= x) break;
    s += fin_[i];
  }
  return s;
}

double StepLaw::finite_sum_below(long x) const {
  double s = 0.0;
  for (std::size_t i = 0; i < fin_.size(); ++i) {
    const long k = fin_lo_ + static_cast<long>(i);
    if (k >= x) break;
    s += fin_[i];
  }
  return s;
}

double StepLaw::tail(long x) const {
  if (x < 0) return 1.0 - left_tail(-x - 1);
  double t = finite_sum_above(x);
  if (right_) t += right_->coef * right_->sum_from(x + 1);
  return t;
}

double StepLaw::left_tail(long x) const {
  if (x < 0) return 1.0 - tail(-x - 1);
  double t = finite_sum_below(-x);
  if (left_) t += left_->coef * left_->sum_from(x + 1);
  return t;
}

double StepLaw::local_mass(long x, long delta) const {
  if (delta < 1) throw InvalidLaw("local_mass: delta must be >= 1");
  if (delta <= 64) {
    double s = 0.0;
    for (long k = x; k < x + delta; ++k) s += pmf(k);
    return s;
  }
  return tail(x - 1) - tail(x + delta - 1);
}

std::vector<double> StepLaw::pmf_table(long lo, long hi) const {
  std::vector<double> out;
  if (hi < lo) return out;
  out.reserve(static_cast<std::size_t>(hi - lo + 1));
  for (long k = lo; k <= hi; ++k) out.push_back(pmf(k));
  return out;
}

std::vector<double> StepLaw::tail_table(long count) const {
  std::vector<double> out(static_cast<std::size_t>(std::max(count, 0L)), 0.0);
  if (count <= 0) return out;
  if (!right_) {
    for (long d = 0; d < count; ++d) out[static_cast<std::size_t>(d)] = tail(d);
    return out;
  }
  // Backward accumulation from an analytic anchor keeps relative accuracy.
  CompensatedSum acc;
  acc.add(tail(count - 1));
  out[static_cast<std::size_t>(count - 1)] = acc.value();
  for (long d = count - 2; d >= 0; --d) {
    acc.add(pmf(d + 1));
    out[static_cast<std::size_t>(d)] = acc.value();
  }
  return out;
}

std::vector<double> StepLaw::left_tail_table(long count) const {
  std::vector<double> out(static_cast<std::size_t>(std::max(count, 0L)), 0.0);
  if (count <= 0) return out;
  if (!left_) {
    for (long d = 0; d < count; ++d) out[static_cast<std::size_t>(d)] = left_tail(d);
    return out;
  }
  CompensatedSum acc;
  acc.add(left_tail(count - 1));
  out[static_cast<std::size_t>(count - 1)] = acc.value();
  for (long d = count - 2; d >= 0; --d) {
    acc.add(pmf(-(d + 1)));
    out[static_cast<std::size_t>(d)] = acc.value();
  }
  return out;
}

// Continuous, strictly decreasing interpolant of the inverted tail: log-log
// linear between integers, pure power extension below 1.
double StepLaw::tail_interp(double t) const {
  const bool right = norming_mode() == NormingMode::RightTailInversion;
  auto side = [&](long k) { return right ? tail(k) : left_tail(k); };
  if (t < 1.0) return side(1) * std::pow(t, -alpha_);
  const double kf = std::floor(t);
  const long k = static_cast<long>(kf);
  const double f0 = side(k);
  if (t == kf) return f0;
  const double f1 = side(k + 1);
  const double w = (std::log(t) - std::log(kf)) / (std::log(kf + 1.0) - std::log(kf));
  return std::exp((1.0 - w) * std::log(f0) + w * std::log(f1));
}

double StepLaw::norming(double n) const {
  if (!(n >= 1.0)) throw InvalidLaw("norming requires n >= 1");
  if (norming_mode() == NormingMode::Variance) return std::sqrt(variance_ * n);
  auto excess = [&](double c) { return n * tail_interp(c) - 1.0; };
  double lo = 1.0;
  while (excess(lo) <= 0.0) {
    lo *= 0.5;
    if (lo < 1e-300) throw NonConvergence("norming: cannot bracket from below");
  }
  double hi = 1.0;
  while (excess(hi) >= 0.0) {
    hi *= 2.0;
    if (hi > 1e18) throw NonConvergence("norming: cannot bracket from above");
  }
  for (int it = 0; it < 200 && hi / lo > 1.0 + 1e-15; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (excess(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::sqrt(lo * hi);
}

namespace {

std::map<std::string, std::string> parse_params(const std::string& body, const std::string& spec) {
  std::map<std::string, std::string> out;
  std::size_t pos = 0;
  while (pos < body.size()) {
    std::size_t comma = body.find(',', pos);
    if (comma == std::string::npos) comma = body.size();
    const std::string item = body.substr(pos, comma - pos);
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("law: malformed parameter in '" + spec + "'");
    out[item.substr(0, eq)] = item.substr(eq + 1);
    pos = comma + 1;
  }
  return out;
}

double to_double(const std::string& s, const std::string& spec) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("law: bad number '" + s + "' in '" + spec + "'");
  }
}

}  // namespace

StepLaw parse_law(const std::string& spec) {
  const std::size_t colon = spec.find(':');
  const std::string family = spec.substr(0, colon);
  const std::string body = colon == std::string::npos ? "" : spec.substr(colon + 1);
  const auto params = parse_params(body, spec);
  auto get = [&](const std::string& key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : to_double(it->second, spec);
  };
  auto only = [&](std::initializer_list<const char*> keys) {
    for (const auto& [k, v] : params) {
      bool known = false;
      for (const char* allowed : keys) known = known || k == allowed;
      if (!known) throw ConfigError("law: unknown parameter '" + k + "' in '" + spec + "'");
    }
  };
  try {
    if (family == "simple") {
      only({});
      return StepLaw::simple();
    }
    if (family == "lazy") {
      only({"p"});
      return StepLaw::bounded_lazy(get("p", 0.45));
    }
    if (family == "pareto") {
      only({"alpha", "atom", "wplus"});
      return StepLaw::pareto_lattice(get("alpha", 0.8), get("atom", 0.2), get("wplus", 0.5));
    }
    if (family == "specneg") {
      only({"alpha", "atom"});
      return StepLaw::spectrally_negative(get("alpha", 1.5), get("atom", 0.2));
    }
    if (family == "table") {
      std::map<long, double> masses;
      for (const auto& [k, v] : params) masses[static_cast<long>(to_double(k, spec))] = to_double(v, spec);
      return StepLaw::finite_table(masses);
    }
  } catch (const InvalidLaw& e) {
    throw ConfigError(std::string("law: ") + e.what());
  }
  throw ConfigError("law: unknown family '" + family + "'");
}

}  // namespace fpt
