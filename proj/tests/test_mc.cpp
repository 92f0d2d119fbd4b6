#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "fpt/errors.hpp"
#include "fpt/exact.hpp"
#include "fpt/mc.hpp"
#include "oracle.hpp"

using fpt::StepLaw;

namespace {

fpt::McOptions options(long paths, int threads = 1) {
  fpt::McOptions o;
  o.paths = paths;
  o.seed = 7;
  o.cell = 3;
  o.threads = threads;
  return o;
}

}  // namespace

TEST(Mc, SimpleWalkFirstStep) {
  const auto h = fpt::sample_first_passage(StepLaw::simple(), 0, 5, options(64000));
  EXPECT_NEAR(h.bins[1].estimate, 0.5, 3.0 * h.bins[1].stderr_);
  EXPECT_NEAR(h.bins[3].estimate, 0.125, 3.0 * h.bins[3].stderr_);
  EXPECT_EQ(h.bins[2].estimate, 0.0);
  EXPECT_EQ(h.bins[1].batches, 32);
}

TEST(Mc, ResultsIndependentOfThreadCount) {
  const StepLaw law = StepLaw::pareto_lattice(0.8);
  const auto a = fpt::sample_first_passage(law, 4, 40, options(32000, 1));
  const auto b = fpt::sample_first_passage(law, 4, 40, options(32000, 4));
  for (std::size_t n = 1; n < a.bins.size(); ++n) {
    EXPECT_EQ(a.bins[n].estimate, b.bins[n].estimate);
    EXPECT_EQ(a.bins[n].stderr_, b.bins[n].stderr_);
  }
}

TEST(Mc, HistogramAgreesWithExactLaw) {
  const StepLaw law = StepLaw::bounded_lazy(0.45);
  const auto h = fpt::sample_first_passage(law, 3, 60, options(100000));
  const auto exact = fpt::first_passage_table(law, 3, 60);
  const auto agree = fpt::compare_histogram(h, exact.fp, 4.0);
  EXPECT_GT(agree.bins, 20);
  EXPECT_GE(agree.fraction, 0.95);
}

TEST(Mc, SupEventMatchesSurvival) {
  const StepLaw law = StepLaw::finite_table({{-2, 0.25}, {0, 0.25}, {1, 0.5}});
  const std::vector<long> xs{0, 2, 5};
  const auto est = fpt::sample_sup_event(law, xs, 8, options(64000));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto ref = oracle::enumerate({{-2, 0.25L}, {0, 0.25L}, {1, 0.5L}}, xs[i], 8);
    EXPECT_NEAR(est[i].estimate, static_cast<double>(ref.survival(8)), 4.0 * est[i].stderr_ + 1e-12) << xs[i];
  }
}

TEST(Mc, RejectsTooFewBatches) {
  auto o = options(1000);
  o.batches = 10;
  EXPECT_THROW(fpt::sample_first_passage(StepLaw::simple(), 0, 5, o), fpt::PreconditionViolated);
  o.batches = 32;
  o.paths = 16;
  EXPECT_THROW(fpt::sample_sup_event(StepLaw::simple(), {0}, 5, o), fpt::PreconditionViolated);
}

TEST(Mc, StreamSeedsAreDistinct) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t m = 0; m < 4; ++m)
    for (std::uint64_t c = 0; c < 16; ++c)
      for (std::uint64_t b = 0; b < 64; ++b) seen.insert(fpt::stream_seed(m, c, b));
  EXPECT_EQ(seen.size(), 4u * 16u * 64u);
  EXPECT_EQ(fpt::stream_seed(1, 2, 3), fpt::stream_seed(1, 2, 3));
}

TEST(Mc, SamplerReproducesHeavyTail) {
  const StepLaw law = StepLaw::pareto_lattice(0.8);
  const fpt::StepSampler sampler(law, 64);
  std::mt19937_64 rng(11);
  const long draws = 400000;
  long above = 0, zero = 0;
  for (long i = 0; i < draws; ++i) {
    const long k = sampler(rng);
    above += k > 1000;
    zero += k == 0;
  }
  const double p = law.tail(1000);
  const double se = std::sqrt(p * (1.0 - p) / draws);
  EXPECT_NEAR(static_cast<double>(above) / draws, p, 4.0 * se);
  const double p0 = law.pmf(0);
  EXPECT_NEAR(static_cast<double>(zero) / draws, p0, 4.0 * std::sqrt(p0 * (1.0 - p0) / draws));
}

TEST(Mc, UniformIsInUnitInterval) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 10000; ++i) {
    const double u = fpt::uniform01(rng);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}
