#include <gtest/gtest.h>

#include <cmath>

#include "fpt/errors.hpp"
#include "fpt/exact.hpp"
#include "oracle.hpp"

using fpt::StepLaw;

namespace {

std::map<long, long double> masses(const StepLaw& law) {
  std::map<long, long double> m;
  for (long k = law.min_step(); k <= law.max_step(); ++k)
    if (law.pmf(k) > 0.0) m[k] = law.pmf(k);
  return m;
}

std::vector<StepLaw> small_laws() {
  return {StepLaw::simple(), StepLaw::bounded_lazy(0.45),
          StepLaw::finite_table({{-2, 0.2}, {-1, 0.2}, {0, 0.1}, {1, 0.4}, {2, 0.1}}),
          StepLaw::finite_table({{-2, 0.25}, {0, 0.25}, {1, 0.5}})};
}

}  // namespace

TEST(Exact, SimpleWalkCatalan) {
  const auto t = fpt::first_passage_table(StepLaw::simple(), 0, 41);
  for (long n = 1; n <= 41; ++n)
    EXPECT_NEAR(t.fp[static_cast<std::size_t>(n)], static_cast<double>(oracle::simple_first_passage(n)), 1e-15) << n;
  EXPECT_DOUBLE_EQ(t.fp[3], 0.125);
}

TEST(Exact, SimpleWalkSnapshot) {
  const auto snap = fpt::killed_snapshot(StepLaw::simple(), 2, 2);
  EXPECT_DOUBLE_EQ(snap.at(2), 0.25);
  EXPECT_DOUBLE_EQ(snap.at(0), 0.5);
  EXPECT_DOUBLE_EQ(snap.at(-2), 0.25);
}

TEST(Exact, MatchesPathEnumeration) {
  for (const auto& law : small_laws()) {
    const auto m = masses(law);
    for (long x = 0; x <= 3; ++x) {
      const auto ref = oracle::enumerate(m, x, 12);
      const auto t = fpt::first_passage_table(law, x, 12);
      for (long n = 1; n <= 12; ++n) {
        const auto ni = static_cast<std::size_t>(n);
        EXPECT_NEAR(t.fp[ni], static_cast<double>(ref.fp[ni]), 1e-12);
        EXPECT_NEAR(t.surv[ni], static_cast<double>(ref.survival(n)), 1e-12);
        const auto snap = fpt::killed_snapshot(law, x, n);
        for (long s = ref.lo; s <= x; ++s)
          ASSERT_NEAR(snap.at(s), static_cast<double>(ref.killed_at(n, s)), 1e-12)
              << law.name() << " x=" << x << " n=" << n << " s=" << s;
      }
    }
  }
}

TEST(Exact, ConservationForBoundedLaws) {
  for (const auto& law : small_laws()) {
    const auto t = fpt::first_passage_table(law, 4, 500);
    long double cum = 0.0L;
    for (long n = 1; n <= 500; ++n) {
      const auto ni = static_cast<std::size_t>(n);
      cum += t.fp[ni];
      ASSERT_GE(t.fp[ni], 0.0);
      ASSERT_LE(t.surv[ni], t.surv[ni - 1]);
      ASSERT_NEAR(static_cast<double>(cum) + t.surv[ni], 1.0, 1e-13);
      ASSERT_EQ(t.defect[ni], 0.0);
    }
    EXPECT_LE(t.max_conservation_residual, 1e-13);
  }
}

TEST(Exact, SurvivalIncreasesWithBarrier) {
  const StepLaw law = StepLaw::bounded_lazy(0.45);
  const auto a = fpt::first_passage_table(law, 3, 200);
  const auto b = fpt::first_passage_table(law, 4, 200);
  for (std::size_t n = 1; n <= 200; ++n) EXPECT_LE(a.surv[n], b.surv[n] + 1e-16);
}

TEST(Exact, HeavyLawCarriesDefect) {
  const StepLaw p = StepLaw::pareto_lattice(0.8);
  fpt::WindowPolicy pol;
  pol.heavy_depth = 1L << 14;
  const auto t = fpt::first_passage_table(p, 5, 50, pol);
  const auto snap = fpt::killed_snapshot(p, 5, 50, pol);
  EXPECT_GT(t.defect[50], 0.0);
  EXPECT_NEAR(snap.total() + snap.defect, t.surv[50], 1e-12);
  for (std::size_t n = 2; n <= 50; ++n) EXPECT_GE(t.defect[n], t.defect[n - 1]);
}

TEST(Exact, UnkilledLawMatchesConvolutionPower) {
  const StepLaw law = StepLaw::finite_table({{-2, 0.25}, {0, 0.25}, {1, 0.5}});
  long lo = 0;
  const auto ref = oracle::convolution_power(masses(law), 30, lo);
  const auto u = fpt::unkilled_law(law, 30);
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const long s = lo + static_cast<long>(i);
    ASSERT_NEAR(u.at(s), static_cast<double>(ref[i]), 1e-15) << s;
  }
  long double pos = 0.0L;
  for (std::size_t i = 0; i < ref.size(); ++i)
    if (lo + static_cast<long>(i) > 0) pos += ref[i];
  EXPECT_NEAR(u.rho_n, static_cast<double>(pos), 1e-14);
}

TEST(Exact, WindowErrors) {
  fpt::WindowPolicy tiny;
  tiny.mem_cap_sites = 100;
  EXPECT_THROW(fpt::first_passage_table(StepLaw::bounded_lazy(0.45), 10, 500, tiny), fpt::WindowOverflow);
  fpt::WindowPolicy shallow;
  shallow.heavy_depth = 64;
  EXPECT_THROW(fpt::first_passage_table(StepLaw::pareto_lattice(0.8), 100, 10, shallow), fpt::WindowOverflow);
}

TEST(Exact, StripWalkOvershoot) {
  // Simple walk killed above 0: all exits land exactly on site 1.
  const StepLaw law = StepLaw::simple();
  fpt::Strip s{-20, 0, fpt::Edge::Truncation, fpt::Edge::Barrier};
  fpt::StripWalk w(law, s, 0, {4, 0});
  for (int i = 0; i < 15; ++i) {
    const double up = w.step().up;
    EXPECT_DOUBLE_EQ(w.overshoot_above()[0], up);
    EXPECT_EQ(w.overshoot_above()[1], 0.0);
  }
  EXPECT_LE(w.conservation_residual(), 1e-15);
}
