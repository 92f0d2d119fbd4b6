#include "fpt/exact.hpp"

#include <algorithm>
#include <cmath>

#include "fpt/csv.hpp"
#include "fpt/errors.hpp"

namespace fpt {

namespace {

long checked_width(long lo, long hi, long cap) {
  if (hi < lo) throw WindowOverflow("empty window");
  const long w = hi - lo + 1;
  if (w > cap)
    throw WindowOverflow("window of " + std::to_string(w) + " sites exceeds memory cap of " + std::to_string(cap));
  return w;
}

}  // namespace

StripWalk::StripWalk(const StepLaw& law, Strip strip, long start_site, OvershootCapture capture, ConvolveOptions opts)
    : law_(&law), strip_(strip), capture_(capture) {
  const long w = checked_width(strip.lo, strip.hi, 1L << 30);
  mass_.assign(static_cast<std::size_t>(w), 0.0);
  scratch_.assign(static_cast<std::size_t>(w + capture.above + capture.below), 0.0);
  over_above_.assign(static_cast<std::size_t>(capture.above), 0.0);
  over_below_.assign(static_cast<std::size_t>(capture.below), 0.0);
  up_tail_ = law.tail_table(w);
  down_tail_ = law.left_tail_table(w);
  conv_.emplace(law, w, w + capture.above + capture.below, -capture.below, opts);
  if (start_site >= strip.lo && start_site <= strip.hi) {
    const long idx = start_site - strip.lo;
    mass_[static_cast<std::size_t>(idx)] = 1.0;
    active_lo_ = idx;
    active_hi_ = idx + 1;
  } else {
    pending_start_ = start_site;
    active_lo_ = active_hi_ = 0;
  }
}

double StripWalk::mass_at(long site) const {
  if (site < strip_.lo || site > strip_.hi) return 0.0;
  return mass_[static_cast<std::size_t>(site - strip_.lo)];
}

double StripWalk::total() const {
  long double s = 0.0L;
  for (long j = active_lo_; j < active_hi_; ++j) s += mass_[static_cast<std::size_t>(j)];
  return static_cast<double>(s);
}

double StripWalk::defect() const {
  double d = 0.0;
  if (strip_.lower == Edge::Truncation) d += absorbed_down_;
  if (strip_.upper == Edge::Truncation) d += absorbed_up_;
  return d;
}

double StripWalk::conservation_residual() const { return std::abs(1.0 - total() - absorbed_up_ - absorbed_down_); }

void StripWalk::first_step_from_outside() {
  const long s = *pending_start_;
  pending_start_.reset();
  const long w = width();
  for (long j = 0; j < w; ++j) mass_[static_cast<std::size_t>(j)] = law_->pmf(strip_.lo + j - s);
  for (long k = 1; k <= capture_.above; ++k)
    over_above_[static_cast<std::size_t>(k - 1)] = law_->pmf(strip_.hi + k - s);
  for (long k = 1; k <= capture_.below; ++k)
    over_below_[static_cast<std::size_t>(k - 1)] = law_->pmf(strip_.lo - k - s);
  flux_.up = law_->tail(strip_.hi - s);
  flux_.down = law_->left_tail(s - strip_.lo);
  if (law_->finite_support()) {
    active_lo_ = std::clamp(s + law_->min_step() - strip_.lo, 0L, w);
    active_hi_ = std::clamp(s + law_->max_step() - strip_.lo + 1, 0L, w);
  } else {
    active_lo_ = 0;
    active_hi_ = w;
  }
}

const StepFlux& StripWalk::step() {
  ++time_;
  if (pending_start_) {
    first_step_from_outside();
  } else {
    const long w = width();
    long double up = 0.0L;
    long double down = 0.0L;
    for (long j = active_lo_; j < active_hi_; ++j) {
      const double m = mass_[static_cast<std::size_t>(j)];
      if (m == 0.0) continue;
      up += static_cast<long double>(m) * up_tail_[static_cast<std::size_t>(w - 1 - j)];
      down += static_cast<long double>(m) * down_tail_[static_cast<std::size_t>(j)];
    }
    flux_.up = static_cast<double>(up);
    flux_.down = static_cast<double>(down);

    conv_->apply(mass_, scratch_, active_lo_, active_hi_);
    const long cb = capture_.below;
    std::copy(scratch_.begin() + cb, scratch_.begin() + cb + w, mass_.begin());
    for (long k = 1; k <= capture_.above; ++k)
      over_above_[static_cast<std::size_t>(k - 1)] = scratch_[static_cast<std::size_t>(cb + w - 1 + k)];
    for (long k = 1; k <= cb; ++k)
      over_below_[static_cast<std::size_t>(k - 1)] = scratch_[static_cast<std::size_t>(cb - k)];

    if (law_->finite_support()) {
      active_lo_ = std::max(0L, active_lo_ + law_->min_step());
      active_hi_ = std::min(w, active_hi_ + law_->max_step());
    } else {
      active_lo_ = 0;
      active_hi_ = w;
    }
  }
  absorbed_up_ += flux_.up;
  absorbed_down_ += flux_.down;
  return flux_;
}

double KilledLawVector::at(long site) const {
  if (site < lo || site > barrier) return 0.0;
  return masses[static_cast<std::size_t>(site - lo)];
}

double KilledLawVector::total() const {
  long double s = 0.0L;
  for (double m : masses) s += m;
  return static_cast<double>(s);
}

double UnkilledLaw::at(long site) const {
  const long idx = site - lo;
  if (idx < 0 || idx >= static_cast<long>(masses.size())) return 0.0;
  return masses[static_cast<std::size_t>(idx)];
}

double UnkilledLaw::upper_tail(long x) const {
  long double s = defect_above;
  const long hi = lo + static_cast<long>(masses.size()) - 1;
  for (long site = std::max(x + 1, lo); site <= hi; ++site) s += masses[static_cast<std::size_t>(site - lo)];
  return static_cast<double>(s);
}

Strip killed_strip(const StepLaw& law, long barrier, long horizon, const WindowPolicy& policy) {
  if (barrier < 0) throw WindowOverflow("barrier must be >= 0");
  Strip strip;
  strip.hi = barrier;
  strip.upper = Edge::Barrier;
  strip.lower = Edge::Truncation;
  if (law.min_step() != std::numeric_limits<long>::min()) {
    strip.lo = std::min(0L, horizon * law.min_step());
  } else {
    strip.lo = barrier - policy.heavy_depth;
    if (strip.lo >= 0)
      throw WindowOverflow("heavy_depth " + std::to_string(policy.heavy_depth) +
                           " does not reach below the start for barrier " + std::to_string(barrier));
  }
  checked_width(strip.lo, strip.hi, policy.mem_cap_sites);
  return strip;
}

KilledLawVector snapshot_of(const StripWalk& walk) {
  KilledLawVector v;
  v.n = walk.time();
  v.barrier = walk.strip().hi;
  v.lo = walk.strip().lo;
  v.masses.assign(walk.masses().begin(), walk.masses().end());
  v.defect = walk.defect();
  v.absorbed = walk.absorbed_up();
  return v;
}

FirstPassageTable first_passage_table(const StepLaw& law, long barrier, long horizon, const WindowPolicy& policy) {
  if (horizon < 1) throw WindowOverflow("first_passage_table: horizon must be >= 1");
  StripWalk walk(law, killed_strip(law, barrier, horizon, policy), 0, {}, policy.convolve);
  FirstPassageTable t;
  t.barrier = barrier;
  t.horizon = horizon;
  t.fp.assign(static_cast<std::size_t>(horizon + 1), 0.0);
  t.surv.assign(static_cast<std::size_t>(horizon + 1), 1.0);
  t.defect.assign(static_cast<std::size_t>(horizon + 1), 0.0);
  for (long n = 1; n <= horizon; ++n) {
    const auto& f = walk.step();
    const auto i = static_cast<std::size_t>(n);
    t.fp[i] = f.up;
    t.surv[i] = t.surv[i - 1] - f.up;
    t.defect[i] = walk.defect();
    t.max_conservation_residual = std::max(t.max_conservation_residual, walk.conservation_residual());
  }
  return t;
}

KilledLawVector killed_snapshot(const StepLaw& law, long barrier, long n, const WindowPolicy& policy) {
  StripWalk walk(law, killed_strip(law, barrier, std::max(n, 1L), policy), 0, {}, policy.convolve);
  for (long k = 0; k < n; ++k) walk.step();
  return snapshot_of(walk);
}

UnkilledLaw unkilled_law(const StepLaw& law, long n, const WindowPolicy& policy) {
  if (n < 1) throw WindowOverflow("unkilled_law: n must be >= 1");
  Strip strip;
  strip.lower = Edge::Truncation;
  strip.upper = Edge::Truncation;
  strip.lo = law.min_step() == std::numeric_limits<long>::min() ? -policy.heavy_depth : n * law.min_step();
  strip.hi = law.max_step() == std::numeric_limits<long>::max() ? policy.heavy_depth : n * law.max_step();
  checked_width(strip.lo, strip.hi, policy.mem_cap_sites);
  StripWalk walk(law, strip, 0, {}, policy.convolve);
  for (long k = 0; k < n; ++k) walk.step();
  UnkilledLaw out;
  out.n = n;
  out.lo = strip.lo;
  out.masses.assign(walk.masses().begin(), walk.masses().end());
  out.defect = walk.defect();
  out.defect_above = walk.absorbed_up();
  out.rho_n = out.upper_tail(0);
  return out;
}

void write_first_passage_csv(const std::string& path, const FirstPassageTable& table) {
  CsvWriter csv(path, {"n", "fp", "surv", "defect"});
  for (long n = 1; n <= table.horizon; ++n) {
    const auto i = static_cast<std::size_t>(n);
    csv.row(n, table.fp[i], table.surv[i], table.defect[i]);
  }
}

void write_snapshot_csv(const std::string& path, const KilledLawVector& snap) {
  CsvWriter csv(path, {"n", "j", "mass", "defect"});
  for (std::size_t i = 0; i < snap.masses.size(); ++i) {
    if (snap.masses[i] == 0.0) continue;
    csv.row(snap.n, snap.lo + static_cast<long>(i), snap.masses[i], snap.defect);
  }
}

}  // namespace fpt
