#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "msde/path.hpp"
#include "msde/schemes.hpp"
#include "msde/verify.hpp"

using namespace msde;

namespace {

const double h6 = std::ldexp(1.0, -6);

Model toy_2d() {
  Model m;
  m.name = "toy2d";
  m.dim_state = 2;
  m.dim_noise = 2;
  m.drift = [](double, StateView x, StateOut out) {
    out[0] = -x[0];
    out[1] = -x[1];
  };
  m.diffusion = [](double, StateView, int r, StateOut out) {
    out[0] = r == 0 ? 0.5 : 0.0;
    out[1] = r == 1 ? 0.5 : 0.0;
  };
  m.one_sided_L = 1.0;
  m.growth_q = 2.0;
  m.alpha = 0.5;
  m.horizon = 1.0;
  m.initial_value = {3.0, 4.0};
  return m;
}

}  // namespace

TEST_CASE("ball projection") {
  CHECK(project(2.0, h6, 0.25) == 2.0);
  CHECK(project(4.0, h6, 0.25) == Catch::Approx(std::pow(2.0, 1.5)));
  CHECK(project(-4.0, h6, 0.25) == Catch::Approx(-std::pow(2.0, 1.5)));
  CHECK(project(0.0, 0.01, 0.5) == 0.0);
  // Idempotence and the radius bound.
  for (double x : {-7.3, -2.0, 0.4, 3.9, 12.0}) {
    const double p = project(x, h6, 0.25);
    CHECK(std::fabs(p) <= std::pow(h6, -0.25) * (1.0 + 1e-15));
    CHECK(project(p, h6, 0.25) == p);
  }
}

TEST_CASE("vector projection rescales the euclidean norm") {
  const Model m = toy_2d();
  std::vector<double> x{3.0, 4.0}, out(2);
  project(x, 1.0, m.alpha, out);  // radius 1, |x| = 5
  CHECK(out[0] == Catch::Approx(0.6));
  CHECK(out[1] == Catch::Approx(0.8));
  std::vector<double> y{0.3, 0.4};
  project(y, 1.0, m.alpha, out);
  CHECK(out[0] == 0.3);
  CHECK(out[1] == 0.4);
}

TEST_CASE("explicit Euler step values") {
  const Model gle = make_gle(0.5, 1.0, 2.0, 1.0);
  CHECK(step_em(gle, 2.0, 0.0, 1.0 / 64.0, 0.0) == Catch::Approx(1.90625));
  const Model gbm = make_gbm(1.0, 0.0, 1.0, 1.0);
  CHECK(step_em(gbm, 1.0, 0.0, 0.1, 0.0) == Catch::Approx(1.1));
}

TEST_CASE("split-step backward Euler step values") {
  const Model gle = make_gle(0.5, 1.0, 2.0, 1.0);
  CHECK(step_ssbe(gle, 0.0, 0.0, 0.125, 0.0) == Catch::Approx(0.0).margin(1e-12));
  CHECK(step_ssbe(gle, 1.734375, 0.0, 0.125, 0.0) == Catch::Approx(1.5).margin(1e-10));
  const Model svm = make_svm32(3.5, 3.0, 1.0, 5.0, 1.0);
  CHECK(step_ssbe(svm, 3.0, 0.0, 1.0 / 32.0, 0.1) ==
        Catch::Approx(3.0 + std::pow(3.0, 1.5) * 0.1).margin(1e-10));
}

TEST_CASE("backward Euler step values") {
  const Model gle = make_gle(0.5, 1.0, 2.0, 1.0);
  CHECK(step_bem(gle, 0.0, 0.0, 0.125, 0.37) == Catch::Approx(0.0).margin(1e-12));
  // With no noise BEM reduces to the implicit stage alone.
  CHECK(step_bem(gle, 1.9, 0.0, 0.125, 0.0) ==
        Catch::Approx(solve_resolvent(gle, 0.125, 0.125, 1.9).x).margin(1e-12));
  CHECK(step_bem(gle, 1.9, 0.0, 0.125, 0.0) ==
        Catch::Approx(step_ssbe(gle, 1.9, 0.0, 0.125, 0.0)).margin(1e-12));
}

TEST_CASE("projected Euler step") {
  const Model gle = make_gle(0.5, 1.0, 2.0, 1.0);
  SECTION("below the threshold it reproduces plain Euler bit for bit") {
    const PemStep s = step_pem(gle, 1.7, 0.25, h6, 0.013);
    CHECK_FALSE(s.projected);
    CHECK(s.x == step_em(gle, 1.7, 0.25, h6, 0.013));
  }
  SECTION("forced projection") {
    const PemStep s = step_pem(gle, 4.0, 0.0, h6, 0.0);
    CHECK(s.projected);
    const double r = std::pow(2.0, 1.5);
    CHECK(s.x == Catch::Approx(r + h6 * (-r * r * r + r)));
    CHECK(s.x == Catch::Approx(2.51906).margin(1e-4));
  }
  SECTION("zero state") {
    const PemStep s = step_pem(gle, 0.0, 0.0, h6, 0.4);
    CHECK_FALSE(s.projected);
    CHECK(s.x == gle.diffusion1(0.0, 0.0) * 0.4 + h6 * gle.drift1(0.0, 0.0));
  }
}

TEST_CASE("integrate on a one-step grid applies the map once") {
  const Model gle = make_gle(0.5, 1.0, 2.0, 1.0);
  const TimeGrid g = TimeGrid::from_steps({0.125});
  const std::vector<double> dw{0.21};
  const GridFunction run = integrate(SchemeId::SSBE, gle, g, dw);
  REQUIRE(run.values.size() == 2);
  CHECK(run.values[1] == step_ssbe(gle, 2.0, 0.0, 0.125, 0.21));
}

TEST_CASE("BEM equals its split-step reformulation pathwise") {
  const Model gle = make_gle(0.5, 1.0, 2.0, 1.0);
  const TimeGrid g = TimeGrid::uniform_dyadic(6, 1.0);
  for (std::uint64_t i = 0; i < 100; ++i) {
    const BrownianPath p = generate_path(31, i, 1, 6, 1.0);
    const GridFunction run = integrate(SchemeId::BEM, gle, g, p.increments);
    double x = 2.0;
    for (std::size_t n = 0; n < g.num_steps(); ++n) {
      const double xbar = x + gle.diffusion1(g.points[n], x) * p.increments[n];
      x = solve_resolvent(gle, g.points[n + 1], g.steps[n], xbar).x;
      REQUIRE(std::fabs(run.values[n + 1] - x) < 1e-10);
      x = run.values[n + 1];
    }
  }
}

TEST_CASE("PEM without projection events is bitwise Euler") {
  const Model gle = make_gle(0.5, 1.0, 2.0, 1.0);
  const TimeGrid g = TimeGrid::uniform_dyadic(10, 1.0);
  for (std::uint64_t i = 0; i < 100; ++i) {
    const std::vector<double> inc =
        coarsen(generate_path(77, i, 1, 10, 1.0), g);
    const GridFunction pem = integrate(SchemeId::PEM, gle, g, inc);
    const GridFunction em = integrate(SchemeId::EM, gle, g, inc);
    REQUIRE_FALSE(pem.any_projection());
    REQUIRE(pem.values == em.values);
  }
}

TEST_CASE("projection events occur at the coarse step") {
  const Model gle = make_gle(0.5, 1.0, 2.0, 1.0);
  const TimeGrid g = TimeGrid::uniform_dyadic(6, 1.0);
  std::size_t projected_paths = 0;
  for (std::uint64_t i = 0; i < 300; ++i) {
    const std::vector<double> inc = coarsen(generate_path(42, i, 1, 6, 1.0), g);
    if (integrate(SchemeId::PEM, gle, g, inc).any_projection())
      ++projected_paths;
  }
  CHECK(projected_paths > 0);
}

TEST_CASE("scheme and grid validation") {
  const Model svm = make_svm32(3.5, 3.0, 1.0, 5.0, 1.0);  // L = 10.5
  const TimeGrid coarse = TimeGrid::uniform_dyadic(3, 1.0);
  std::vector<double> inc(coarse.num_steps(), 0.0);
  CHECK_THROWS_AS(integrate(SchemeId::BEM, svm, coarse, inc), StepSizeError);
  CHECK_NOTHROW(integrate(SchemeId::PEM, svm, coarse, inc));
  const TimeGrid g6 = TimeGrid::uniform_dyadic(6, 1.0);
  std::vector<double> bad(3, 0.0);
  CHECK_THROWS_AS(integrate(SchemeId::EM, svm, g6, bad), std::invalid_argument);
}

TEST_CASE("explicit Euler overflow is reported with the step index") {
  const Model gle = make_gle(0.5, 1.0, 1e8, 1.0);
  const TimeGrid g = TimeGrid::uniform_dyadic(3, 1.0);
  const std::vector<double> inc(8, 0.0);
  CHECK_THROWS_AS(integrate(SchemeId::EM, gle, g, inc), OverflowError);
}

TEST_CASE("vector integration for explicit schemes") {
  const Model m = toy_2d();
  const TimeGrid g = TimeGrid::from_steps({0.5, 0.5});
  // Channel-major increments: two steps per channel.
  const std::vector<double> inc{0.1, -0.2, 0.3, 0.0};
  const GridFunction em = integrate(SchemeId::EM, m, g, inc);
  // First step by hand: x + h(-x) + (0.5 dW1, 0.5 dW2).
  CHECK(em.at(1)[0] == Catch::Approx(3.0 - 0.5 * 3.0 + 0.5 * 0.1));
  CHECK(em.at(1)[1] == Catch::Approx(4.0 - 0.5 * 4.0 + 0.5 * 0.3));

  // PEM projects |x0| = 5 onto radius 0.5^-0.5 and flags the event.
  const GridFunction pem = integrate(SchemeId::PEM, m, g, inc);
  REQUIRE(pem.projection_events[0] == 1);
  const double scale = std::pow(0.5, -0.5) / 5.0;
  CHECK(pem.at(1)[0] ==
        Catch::Approx(3.0 * scale - 0.5 * 3.0 * scale + 0.5 * 0.1));
  CHECK_THROWS_AS(integrate(SchemeId::SSBE, m, g, inc), std::invalid_argument);
}

TEST_CASE("projection invariants at scale") {
  for (const Model& m : {make_gle(0.5, 1.0, 2.0, 1.0),
                         make_svm32(3.5, 3.0, 1.0, 5.0, 1.0)}) {
    const SuiteCheck lip = check_projection_nonexpansive(m, 100000, 3);
    INFO(lip.name << " worst " << lip.worst_margin);
    CHECK(lip.violations == 0);
    const SuiteCheck stab = check_pem_stability(m, 100000, 3);
    INFO(stab.name << " worst " << stab.worst_margin << " at " << stab.witness);
    CHECK(stab.violations == 0);
  }
}
