#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fpt/convolve.hpp"
#include "fpt/steps.hpp"

namespace fpt {

/// What happens to mass that leaves the window through an edge.
/// Barrier: absorbed exactly (a first-passage event). Truncation: dropped into the defect.
enum class Edge { Barrier, Truncation };

/// Inclusive lattice window [lo, hi] with the behaviour of each edge.
struct Strip {
  long lo = 0;
  long hi = 0;
  Edge lower = Edge::Truncation;
  Edge upper = Edge::Barrier;
};

/// Sites just outside the window whose landing mass is recorded per step
/// (used for ladder-height overshoot laws).
struct OvershootCapture {
  long above = 0;
  long below = 0;
};

/// How deep windows reach below/above the killing barrier.
struct WindowPolicy {
  /// Depth used for unbounded steps. Mass jumping further is dropped and tracked as defect.
  long heavy_depth = 1L << 17;
  /// Upper bound on window sites; exceeding it raises WindowOverflow.
  long mem_cap_sites = 1L << 24;
  ConvolveOptions convolve{};
};

/// Exit mass of one step.
struct StepFlux {
  double up = 0.0;    // P(land above hi)
  double down = 0.0;  // P(land below lo)
};

/// The walk S restricted to a window, evolved one step at a time.
/// Masses inside the window are exact sub-probabilities of staying inside up to now.
/// Exit fluxes use the analytic tails, so unbounded overshoot is never truncated.
class StripWalk {
 public:
  StripWalk(const StepLaw& law, Strip strip, long start_site = 0, OvershootCapture capture = {},
            ConvolveOptions opts = {});

  const StepFlux& step();

  long time() const { return time_; }
  const Strip& strip() const { return strip_; }
  long width() const { return strip_.hi - strip_.lo + 1; }
  /// masses()[j] is the mass at site lo + j.
  std::span<const double> masses() const { return mass_; }
  double mass_at(long site) const;
  /// Total mass inside the window (long double accumulation).
  double total() const;

  double absorbed_up() const { return absorbed_up_; }
  double absorbed_down() const { return absorbed_down_; }
  /// Mass removed through Truncation edges.
  double defect() const;
  /// |1 - total - absorbed_up - absorbed_down|: pure roundoff of the engine.
  double conservation_residual() const;

  /// Mass of the last step landing at hi + k, k = 1..capture.above (index k-1).
  const std::vector<double>& overshoot_above() const { return over_above_; }
  /// Mass of the last step landing at lo - k, k = 1..capture.below (index k-1).
  const std::vector<double>& overshoot_below() const { return over_below_; }
  const StepFlux& last_flux() const { return flux_; }

 private:
  void first_step_from_outside();

  const StepLaw* law_;
  Strip strip_;
  OvershootCapture capture_;
  std::optional<long> pending_start_;
  long time_ = 0;
  std::vector<double> mass_;
  std::vector<double> scratch_;
  std::vector<double> up_tail_;    // up_tail_[d] = P(X > d)
  std::vector<double> down_tail_;  // down_tail_[d] = P(X < -d)
  std::optional<StepConvolver> conv_;
  long active_lo_ = 0;
  long active_hi_ = 0;
  double absorbed_up_ = 0.0;
  double absorbed_down_ = 0.0;
  StepFlux flux_{};
  std::vector<double> over_above_;
  std::vector<double> over_below_;
};

/// Sub-probability vector P(S_n = j, T_x > n) on [lo, x].
struct KilledLawVector {
  long n = 0;
  long barrier = 0;
  long lo = 0;
  std::vector<double> masses;
  /// Mass truncated below lo up to time n.
  double defect = 0.0;
  /// P(T_x <= n).
  double absorbed = 0.0;

  double at(long site) const;
  double total() const;
};

/// P(T_x = n) and P(T_x > n), n = 0..N (index 0 unused for fp).
struct FirstPassageTable {
  long barrier = 0;
  long horizon = 0;
  std::vector<double> fp;
  std::vector<double> surv;
  /// Cumulative truncation defect at each n (error bar for fp and surv).
  std::vector<double> defect;
  /// Largest per-step conservation residual seen.
  double max_conservation_residual = 0.0;
};

/// Law of the unkilled S_n on a window, with rho_n = P(S_n > 0).
struct UnkilledLaw {
  long n = 0;
  long lo = 0;
  std::vector<double> masses;
  double defect = 0.0;
  double rho_n = 0.0;

  double at(long site) const;
  /// P(S_n > x) counting mass dropped above the window as exceeding x.
  double upper_tail(long x) const;
  double defect_above = 0.0;
};

/// Window for a walk started at 0 and killed above `barrier` over `horizon` steps.
Strip killed_strip(const StepLaw& law, long barrier, long horizon, const WindowPolicy& policy);

FirstPassageTable first_passage_table(const StepLaw& law, long barrier, long horizon, const WindowPolicy& policy = {});
KilledLawVector killed_snapshot(const StepLaw& law, long barrier, long n, const WindowPolicy& policy = {});
UnkilledLaw unkilled_law(const StepLaw& law, long n, const WindowPolicy& policy = {});

/// Snapshot of a running StripWalk as a KilledLawVector.
KilledLawVector snapshot_of(const StripWalk& walk);

void write_first_passage_csv(const std::string& path, const FirstPassageTable& table);
void write_snapshot_csv(const std::string& path, const KilledLawVector& snap);

}  // namespace fpt
