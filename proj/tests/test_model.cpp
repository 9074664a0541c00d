#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "msde/model.hpp"

using namespace msde;

TEST_CASE("Ginzburg-Landau factory") {
  const Model m = make_gle(0.5, 1.0, 2.0, 1.0);
  CHECK(m.growth_q == 3.0);
  CHECK(m.alpha == 0.25);
  CHECK(m.initial_value[0] == 2.0);
  CHECK(m.eta == 1.25);
  CHECK(m.drift1(0.0, 0.0) == 0.0);
  CHECK(m.drift1(0.0, 2.0) == Catch::Approx(-6.0));
  CHECK(m.diffusion1(0.3, 2.0) == 2.0);
  CHECK_THROWS_AS(make_gle(0.5, -1.0, 2.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_gle(0.5, 1.0, 2.0, 0.0), std::invalid_argument);
}

TEST_CASE("stochastic volatility factory") {
  const Model m = make_svm32(3.5, 3.0, 1.0, 5.0, 1.0);
  CHECK(m.alpha == 0.5);
  CHECK(m.growth_q == 2.0);
  CHECK(m.one_sided_L == Catch::Approx(10.5));
  CHECK(m.moment_p == Catch::Approx(8.0));
  CHECK(m.drift1(0.0, 3.0) == 0.0);
  CHECK(m.diffusion1(0.0, 4.0) == Catch::Approx(8.0));
  CHECK_THROWS_AS(make_svm32(-1.0, 3.0, 1.0, 5.0, 1.0), std::invalid_argument);
}

TEST_CASE("geometric Brownian motion factory") {
  const Model m = make_gbm(1.0, 0.0, 1.0, 1.0);
  CHECK(m.drift1(0.0, 2.0) == 2.0);
  CHECK(m.diffusion1(0.0, 2.0) == 0.0);
  CHECK(m.alpha == 1.0);
}

TEST_CASE("evaluators are pure") {
  const Model m = make_gle(0.5, 1.0, 2.0, 1.0);
  const double a = m.drift1(0.25, 1.7);
  const double b = m.drift1(0.25, 1.7);
  REQUIRE(a == b);
}

TEST_CASE("assumption samplers report zero violations on shipped models") {
  const SampleBox box{10.0, 1.0};
  for (const Model& m : {make_gle(0.5, 1.0, 2.0, 1.0),
                         make_svm32(3.5, 3.0, 1.0, 5.0, 1.0)}) {
    for (Inequality iq : {Inequality::monotonicity, Inequality::poly_growth,
                          Inequality::coercivity}) {
      const auto rep = sample_assumption(m, iq, box, 100000, 11);
      INFO(m.name << "/" << to_string(iq) << " worst " << rep.worst_margin);
      CHECK(rep.violations == 0);
    }
  }
}

TEST_CASE("halving L breaks the monotonicity bound") {
  Model m = make_gle(0.5, 1.0, 2.0, 1.0);
  m.one_sided_L *= 0.5;
  const auto rep = sample_assumption(m, Inequality::monotonicity,
                                     SampleBox{10.0, 1.0}, 100000, 11);
  CHECK(rep.violations > 0);
  CHECK(rep.worst_margin < 0.0);
}

TEST_CASE("sampler input validation") {
  const Model m = make_gle(0.5, 1.0, 2.0, 1.0);
  CHECK_THROWS_AS(
      sample_assumption(m, Inequality::monotonicity, SampleBox{10.0, 1.0}, 0, 1),
      std::invalid_argument);
  CHECK_THROWS_AS(
      sample_assumption(m, Inequality::monotonicity, SampleBox{-1.0, 1.0}, 10, 1),
      std::invalid_argument);
}
