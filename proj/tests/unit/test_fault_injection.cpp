#include <doctest.h>

#include "cdc/orderstats.hpp"
#include "cdc/selftest.hpp"

using namespace cdc;

TEST_CASE("selftest detects a corrupted binomial table") {
  orderstats::testing::corrupt_binomial_table(true);
  auto corrupted = selftest::run_all();
  orderstats::testing::corrupt_binomial_table(false);
  auto clean = selftest::run_all();

  REQUIRE(corrupted.size() == clean.size());
  CHECK(corrupted[0].name == "orderstats_cdf_matches_pdf");
  CHECK_FALSE(corrupted[0].passed);
  for (const auto& r : clean) CHECK(r.passed);
}
