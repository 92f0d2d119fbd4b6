#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fpt/errors.hpp"
#include "fpt/suites.hpp"

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fpt_suite_" + name);
  fs::remove_all(p);
  return p;
}

void expect_config_error(fpt::RunConfig cfg, const std::string& key) {
  try {
    fpt::validate(cfg);
    ADD_FAILURE() << "accepted config for " << key;
  } catch (const fpt::ConfigError& e) {
    EXPECT_EQ(std::string(e.what()).rfind(key, 0), 0u) << e.what();
  }
}

}  // namespace

TEST(Suites, ParseNgrid) {
  EXPECT_EQ(fpt::parse_ngrid("2^3..2^6"), (std::vector<long>{8, 16, 32, 64}));
  EXPECT_EQ(fpt::parse_ngrid("100..800"), (std::vector<long>{100, 200, 400, 800}));
  EXPECT_EQ(fpt::parse_ngrid("40,5,9,5"), (std::vector<long>{5, 9, 40}));
  for (const char* bad : {"", "2^6..2^3", "abc", "0,4", "2^x"})
    EXPECT_THROW(fpt::parse_ngrid(bad), fpt::ConfigError) << bad;
  EXPECT_EQ(fpt::parse_list("kgrid", "10, 50,100"), (std::vector<double>{10, 50, 100}));
  EXPECT_THROW(fpt::parse_list("kgrid", "10,x"), fpt::ConfigError);
}

TEST(Suites, ValidationNamesTheKey) {
  fpt::RunConfig c;
  c.law = "lazy:p=2";
  expect_config_error(c, "law");
  c = {};
  c.suite = "nope";
  expect_config_error(c, "suite");
  c = {};
  c.ngrid = "2^9..2^2";
  expect_config_error(c, "ngrid");
  c = {};
  c.mc_paths = 5;
  expect_config_error(c, "mc-paths");
  c = {};
  c.tol.regime_a = -1.0;
  expect_config_error(c, "tol");
  EXPECT_NO_THROW(fpt::validate(fpt::RunConfig{}));
}

TEST(Suites, ExactOracleSuitePasses) {
  fpt::RunConfig c;
  c.suite = "exact-oracle";
  c.out = scratch("oracle").string();
  const auto r = fpt::run(c);
  EXPECT_TRUE(r.ok());
  EXPECT_FALSE(r.contracts.empty());
  EXPECT_TRUE(fs::exists(fs::path(c.out) / "summary.csv"));
  EXPECT_TRUE(fs::exists(fs::path(c.out) / "contracts.csv"));
  fs::remove_all(c.out);
}

TEST(Suites, OutputsAreByteIdentical) {
  fpt::RunConfig c;
  c.suite = "regimeA";
  c.ngrid = "2^7..2^10";
  c.out = scratch("det_a").string();
  fpt::run(c);
  fpt::RunConfig d = c;
  d.out = scratch("det_b").string();
  fpt::run(d);
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(c.out)) {
    const fs::path other = fs::path(d.out) / e.path().filename();
    ASSERT_TRUE(fs::exists(other)) << other;
    EXPECT_EQ(slurp(e.path()), slurp(other)) << e.path().filename();
    ++files;
  }
  EXPECT_GE(files, 3u);
  fs::remove_all(c.out);
  fs::remove_all(d.out);
}

TEST(Suites, EngineErrorsSurfaceWithTheirCell) {
  fpt::RunConfig c;
  c.suite = "regimeA";
  c.ngrid = "2^11..2^12";
  c.mem_cap = 1024;
  c.out = scratch("overflow").string();
  const auto r = fpt::run(c);
  EXPECT_FALSE(r.ok());
  bool found = false;
  for (const auto& k : r.contracts)
    if (k.status == fpt::Status::Fail && k.detail.find("WindowOverflow at x=5") != std::string::npos) found = true;
  EXPECT_TRUE(found);
  fs::remove_all(c.out);
}

TEST(Suites, SuiteNamesIncludeAll) {
  const auto& n = fpt::suite_names();
  EXPECT_EQ(n.back(), "all");
  EXPECT_GE(n.size(), 10u);
}
