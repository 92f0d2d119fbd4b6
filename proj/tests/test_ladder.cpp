#include <gtest/gtest.h>

#include <cmath>

#include "fpt/errors.hpp"
#include "fpt/ladder.hpp"
#include "oracle.hpp"

using fpt::StepLaw;

namespace {

fpt::LadderTables tables(const StepLaw& law, long horizon, long width, std::vector<long> full = {}) {
  fpt::LadderOptions o;
  o.horizon = horizon;
  o.store_width = width;
  o.full_rows = std::move(full);
  o.height_cap = 64;
  return fpt::build_ladder_tables(law, o);
}

}  // namespace

TEST(Ladder, SimpleWalkByEnumeration) {
  const auto t = tables(StepLaw::simple(), 12, 8);
  // g(3, 1): only the path up, up, down stays positive and ends at 1.
  EXPECT_DOUBLE_EQ(t.g(3, 1), 0.125);
  EXPECT_DOUBLE_EQ(t.g(1, 1), 0.5);
  EXPECT_DOUBLE_EQ(t.g(2, 2), 0.25);
  EXPECT_DOUBLE_EQ(t.heights.q_H[1], 1.0);
  EXPECT_DOUBLE_EQ(t.heights.q_Hminus[0], 0.5);
  EXPECT_DOUBLE_EQ(t.heights.q_Hminus[1], 0.5);
  for (long n = 1; n <= 12; ++n) {
    long double surv = 1.0L;
    for (long m = 1; m <= n; ++m) surv -= oracle::simple_first_passage(m);
    EXPECT_NEAR(t.tau_tail[static_cast<std::size_t>(n)], static_cast<double>(surv), 1e-15);
  }
}

TEST(Ladder, RenewalFunctionsOfSkipFreeWalks) {
  // Each level is a ladder height once (U) and V counts geometric revisits of each level.
  const auto simple = fpt::renewal_functions(tables(StepLaw::simple(), 64, 4).heights, 20);
  const auto lazy = fpt::renewal_functions(tables(StepLaw::bounded_lazy(0.45), 64, 4).heights, 20);
  for (long x = 0; x <= 20; ++x) {
    const auto xi = static_cast<std::size_t>(x);
    EXPECT_NEAR(simple.U[xi], x + 1.0, 1e-12);
    EXPECT_NEAR(simple.V[xi], 2.0 * (x + 1.0), 1e-12);
    EXPECT_NEAR(lazy.U[xi], x + 1.0, 1e-12);
    EXPECT_NEAR(lazy.V[xi], (x + 1.0) / 0.45, 1e-11);
  }
}

TEST(Ladder, RenewalRejectsFullAtom) {
  fpt::LadderHeights h;
  h.q_H = {0.0, 1.0};
  h.q_Hminus = {1.0, 0.0};
  EXPECT_THROW(fpt::renewal_functions(h, 1), fpt::AtomTooLarge);
}

TEST(Ladder, DecompositionSimpleWalkSmall) {
  const StepLaw law = StepLaw::simple();
  const auto t = tables(law, 12, 8);
  const auto sw = fpt::decomposition_sweep(law, t, 12, 4, 4);
  EXPECT_GT(sw.cells, 0);
  EXPECT_LE(sw.max_residual, 1e-12);
}

TEST(Ladder, DecompositionLazyAndTable) {
  for (const auto& law : {StepLaw::bounded_lazy(0.45), StepLaw::finite_table({{-2, 0.25}, {0, 0.25}, {1, 0.5}})}) {
    const auto t = tables(law, 120, 22);
    const auto sw = fpt::decomposition_sweep(law, t, 120, 20, 20);
    EXPECT_LE(sw.max_residual, 1e-10) << law.name() << " n=" << sw.worst_n << " x=" << sw.worst_x;
  }
}

TEST(Ladder, RowSumDuality) {
  for (const auto& law :
       {StepLaw::bounded_lazy(0.45), StepLaw::finite_table({{-2, 0.2}, {-1, 0.2}, {0, 0.1}, {1, 0.4}, {2, 0.1}})}) {
    const auto t = tables(law, 1000, 4);
    const auto f0 = fpt::first_passage_table(law, 0, 1000);
    long double cum = 0.0L;
    for (std::size_t n = 1; n <= 1000; ++n) {
      cum += f0.fp[n];
      ASSERT_NEAR(t.gminus_rowsum[n], static_cast<double>(1.0L - cum), 1e-12) << law.name() << " n=" << n;
      ASSERT_NEAR(t.tau_tail[n], t.gminus_rowsum[n] + t.gminus_defect[n], 1e-14);
    }
  }
}

TEST(Ladder, SurvivalViaFirstMaximum) {
  const StepLaw law = StepLaw::bounded_lazy(0.45);
  const auto t = tables(law, 200, 16);
  for (long x : {0L, 1L, 5L, 12L}) {
    const auto f = fpt::first_passage_table(law, x, 200);
    for (long n : {1L, 7L, 50L, 200L})
      EXPECT_NEAR(t.survival_via_max(x, n), f.surv[static_cast<std::size_t>(n)], 1e-13) << x << " " << n;
  }
}

TEST(Ladder, GammaCountsLadderEpochs) {
  // Every time of the simple walk's running-maximum increase is a ladder epoch: Gamma[n] = 1 + E[max_{r<=n} S_r].
  const auto t = tables(StepLaw::simple(), 10, 12);
  for (long n = 1; n <= 10; ++n) {
    // E[M_n] = sum_{x >= 0} P(M_n > x) = sum_x P(T_x <= n).
    long double em = 0.0L;
    for (long x = 0; x < n; ++x) {
      const auto rx = oracle::enumerate({{-1, 0.5L}, {1, 0.5L}}, x, n);
      em += 1.0L - rx.survival(n);
    }
    EXPECT_NEAR(t.Gamma[static_cast<std::size_t>(n)], static_cast<double>(1.0L + em), 1e-13) << n;
  }
}

TEST(Ladder, StoredCellsOnly) {
  const auto t = tables(StepLaw::bounded_lazy(0.45), 16, 4);
  EXPECT_THROW(t.g(10, 9), fpt::PreconditionViolated);
  EXPECT_THROW(t.g(17, 1), fpt::PreconditionViolated);
}

TEST(Ladder, ConstantsSettle) {
  const StepLaw law = StepLaw::simple();
  const std::vector<long> grid{128, 256, 512, 1024, 2048};
  fpt::LadderOptions o;
  o.horizon = 2048;
  o.store_width = 2;
  o.full_rows = grid;
  o.height_cap = 128;
  const auto t = fpt::build_ladder_tables(law, o);
  const auto r = fpt::renewal_functions(t.heights, 100);
  const auto d = fpt::constant_diagnostics(law, t, r, grid);
  EXPECT_LE(d.drift_k5, 0.05);
  EXPECT_LE(d.drift_k4, 0.05);
  EXPECT_LE(d.drift_k6, 0.05);
  const auto l3 = fpt::renewal_ratio_bound(law, t, r, grid);
  EXPECT_GT(l3.c2, 0.0);
  EXPECT_LE(l3.drift, 0.2);
}

TEST(Ladder, HeavyHeightsRedistributeTail) {
  fpt::LadderOptions o;
  o.horizon = 64;
  o.height_cap = 64;
  o.depth = 1L << 13;
  o.height_defect_tol = 1e-2;
  const auto h = fpt::ladder_height_pmfs(StepLaw::pareto_lattice(0.8), o);
  long double sum = h.tail_H;
  for (double v : h.q_H) sum += v;
  EXPECT_NEAR(static_cast<double>(sum), 1.0, 1e-2);
  EXPECT_GT(h.redistributed_H, 0.0);
  o.height_defect_tol = 1e-15;
  EXPECT_THROW(fpt::ladder_height_pmfs(StepLaw::pareto_lattice(0.8), o), fpt::DefectTooLarge);
}
