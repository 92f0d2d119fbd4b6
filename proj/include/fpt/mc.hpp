#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "fpt/steps.hpp"

namespace fpt {

struct McEstimate {
  double estimate = 0.0;
  /// Standard deviation of the batch means over sqrt(batches).
  double stderr_ = 0.0;
  long paths = 0;
  std::uint64_t seed = 0;
  long batches = 0;
};

struct McOptions {
  long paths = 100000;
  std::uint64_t seed = 1;
  /// Identifies the (law, quantity) cell; distinct cells get disjoint streams.
  std::uint64_t cell = 0;
  long batches = 32;
  /// Worker threads; results do not depend on this.
  int threads = 1;
};

/// Stream seed for (master, cell, batch): three rounds of splitmix64 over the mixed words.
std::uint64_t stream_seed(std::uint64_t master, std::uint64_t cell, std::uint64_t batch);

/// Inverse-transform sampler: alias table on the core [-K, K] plus exact tail inversion.
class StepSampler {
 public:
  explicit StepSampler(const StepLaw& law, long core = 4096);
  long operator()(std::mt19937_64& rng) const;
  long core_lo() const { return lo_; }
  long core_hi() const { return hi_; }

 private:
  long invert_right(double v) const;
  long invert_left(double v) const;

  const StepLaw* law_;
  long lo_;
  long hi_;
  std::vector<double> prob_;  // alias acceptance, last two slots = right / left tail
  std::vector<long> alias_;
  double right_mass_;
  double left_mass_;
};

/// Uniform on [0, 1) from the top 53 bits.
double uniform01(std::mt19937_64& rng);

struct McHistogram {
  long barrier = 0;
  long horizon = 0;
  /// bins[n] estimates P(T_x = n), n = 1..horizon (bins[0] unused).
  std::vector<McEstimate> bins;
};

/// Histogram of T_x = min{n : S_n > x} over n <= N.
McHistogram sample_first_passage(const StepLaw& law, long x, long N, const McOptions& opts);

/// P(max_{r <= n} S_r <= x) for each lattice level in xs, from one set of paths.
std::vector<McEstimate> sample_sup_event(const StepLaw& law, const std::vector<long>& xs, long n,
                                         const McOptions& opts);

struct McAgreement {
  long bins = 0;
  long within = 0;
  double fraction = 0.0;
  double worst_z = 0.0;
};

/// Fraction of bins whose estimate lies within k standard errors of exact[n]. Bins with fewer than
/// `min_expected` expected hits are skipped: their batch standard error is not informative.
McAgreement compare_histogram(const McHistogram& h, const std::vector<double>& exact, double k,
                              double min_expected = 10.0);

void write_histogram_csv(const std::string& path, const McHistogram& h);

}  // namespace fpt
