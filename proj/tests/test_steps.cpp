#include <gtest/gtest.h>

#include <cmath>

#include "fpt/errors.hpp"
#include "fpt/steps.hpp"
#include "oracle.hpp"

using fpt::StepLaw;

namespace {

double total_mass(const StepLaw& law, long core) {
  long double s = 0.0L;
  for (long k = -core; k <= core; ++k) s += law.pmf(k);
  return static_cast<double>(s + law.tail(core) + law.left_tail(core));
}

}  // namespace

TEST(Steps, MassesSumToOne) {
  for (const auto& law :
       {StepLaw::bounded_lazy(0.45), StepLaw::simple(), StepLaw::pareto_lattice(0.8), StepLaw::pareto_lattice(1.5),
        StepLaw::spectrally_negative(1.5, 0.2), StepLaw::finite_table({{-2, 0.25}, {0, 0.25}, {1, 0.5}})})
    EXPECT_NEAR(total_mass(law, 300), 1.0, 1e-12) << law.name();
}

TEST(Steps, TailDifferencesArePmf) {
  const StepLaw p = StepLaw::pareto_lattice(0.8);
  for (long x : {-50L, -3L, 0L, 1L, 7L, 1000L, 100000L}) {
    EXPECT_NEAR(p.tail(x) - p.tail(x + 1), p.pmf(x + 1), 1e-15 + 1e-12 * p.pmf(x + 1));
    EXPECT_NEAR(p.left_tail(x) - p.left_tail(x + 1), p.pmf(-x - 1), 1e-15 + 1e-12 * p.pmf(-x - 1));
  }
}

TEST(Steps, HurwitzTailMatchesDirectSummation) {
  for (double s : {1.5, 1.8, 2.5})
    for (long n : {1L, 10L, 5000L}) EXPECT_NEAR(fpt::hurwitz_tail(s, n) / oracle::zeta_tail(s, n), 1.0, 1e-9);
}

TEST(Steps, ParetoTailIsRegularlyVarying) {
  const StepLaw p = StepLaw::pareto_lattice(0.8);
  const double a = p.tail(1000) * std::pow(1000.0, 0.8);
  const double b = p.tail(10000) * std::pow(10000.0, 0.8);
  EXPECT_GT(a, 0.0);
  EXPECT_LE(std::abs(a / b - 1.0), 0.01);
}

TEST(Steps, NormingMatchesTail) {
  const StepLaw p = StepLaw::pareto_lattice(0.8);
  const double n = 1000.0;
  const double v = n * p.tail(std::lround(p.norming(n)));
  EXPECT_GE(v, 0.95);
  EXPECT_LE(v, 1.05);

  const StepLaw lazy = StepLaw::bounded_lazy(0.45);
  EXPECT_DOUBLE_EQ(lazy.variance(), 0.9);
  EXPECT_NEAR(lazy.norming(1000.0), std::sqrt(900.0), 1e-12);
}

TEST(Steps, ShapeParameters) {
  const StepLaw p = StepLaw::pareto_lattice(0.8);
  EXPECT_TRUE(p.symmetric());
  EXPECT_DOUBLE_EQ(p.rho(), 0.5);
  for (long k : {1L, 2L, 17L, 4096L}) EXPECT_DOUBLE_EQ(p.pmf(k), p.pmf(-k));

  const StepLaw sn = StepLaw::spectrally_negative(1.5, 0.2);
  EXPECT_EQ(sn.max_step(), 1);
  EXPECT_NEAR(sn.alpha() * sn.rho(), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(sn.tail(1), 0.0);
  EXPECT_NEAR(sn.mean(), 0.0, 1e-10);

  EXPECT_FALSE(StepLaw::simple().aperiodic());
  EXPECT_EQ(StepLaw::simple().span(), 2);
  EXPECT_TRUE(StepLaw::bounded_lazy(0.45).aperiodic());
  EXPECT_NEAR(fpt::stable_positivity(0.8, 1.0, 1.0), 0.5, 1e-15);
}

TEST(Steps, LocalMassAddsAtoms) {
  const StepLaw law = StepLaw::finite_table({{-2, 0.2}, {-1, 0.2}, {0, 0.1}, {1, 0.4}, {2, 0.1}});
  EXPECT_NEAR(law.local_mass(-1, 3), 0.7, 1e-15);
  EXPECT_NEAR(law.tail(0), 0.5, 1e-15);
  EXPECT_NEAR(law.left_tail(0), 0.4, 1e-15);
}

TEST(Steps, ParseLaw) {
  EXPECT_EQ(fpt::parse_law("lazy:p=0.45").family(), fpt::Family::BoundedLazy);
  EXPECT_EQ(fpt::parse_law("pareto:alpha=0.8").family(), fpt::Family::ParetoLattice);
  EXPECT_EQ(fpt::parse_law("specneg:alpha=1.5").family(), fpt::Family::SpectrallyNegative);
  EXPECT_NEAR(fpt::parse_law("table:-1=0.25,0=0.5,1=0.25").pmf(0), 0.5, 1e-15);
  for (const char* bad : {"nonsense", "lazy:q=0.4", "lazy:p=abc", "pareto:alpha=3", "table:1=0.7"}) {
    try {
      fpt::parse_law(bad);
      ADD_FAILURE() << bad;
    } catch (const fpt::ConfigError& e) {
      EXPECT_EQ(std::string(e.what()).rfind("law", 0), 0u) << e.what();
    }
  }
}

TEST(Steps, InvalidParametersThrow) {
  EXPECT_THROW(StepLaw::bounded_lazy(0.7), fpt::InvalidLaw);
  EXPECT_THROW(StepLaw::pareto_lattice(2.5), fpt::InvalidLaw);
  EXPECT_THROW(StepLaw::spectrally_negative(0.9), fpt::InvalidLaw);
  EXPECT_THROW(StepLaw::finite_table({{1, 0.5}, {2, 0.5}}), fpt::InvalidLaw);
}
