#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "msde/experiment.hpp"
#include "msde/report_io.hpp"

using namespace msde;

TEST_CASE("experimental order of convergence from published error pairs") {
  const std::vector<std::pair<double, double>> t1{
      {std::ldexp(1.0, -6), 0.04637}, {std::ldexp(1.0, -7), 0.03013}};
  CHECK(eoc(t1)[0] == Catch::Approx(0.62).margin(0.005));
  const std::vector<std::pair<double, double>> t2{
      {std::ldexp(1.0, -6), 0.28267}, {std::ldexp(1.0, -7), 0.18973}};
  CHECK(eoc(t2)[0] == Catch::Approx(0.58).margin(0.005));
}

TEST_CASE("eoc edge cases") {
  const std::vector<std::pair<double, double>> halving{
      {0.5, 0.4}, {0.25, 0.2}, {0.125, 0.1}};
  for (double v : eoc(halving)) CHECK(v == Catch::Approx(1.0).epsilon(1e-12));
  const std::vector<std::pair<double, double>> bad{{0.5, 0.4}, {0.25, 0.0}};
  CHECK(std::isnan(eoc(bad)[0]));
  const std::vector<std::pair<double, double>> single{{0.5, 0.4}};
  CHECK_THROWS_AS(eoc(single), std::invalid_argument);
}

TEST_CASE("least-squares order fit recovers an exact power law") {
  std::vector<std::pair<double, double>> pts;
  for (int k = 4; k <= 10; ++k) {
    const double h = std::ldexp(1.0, -k);
    pts.emplace_back(h, 3.0 * std::sqrt(h));
  }
  CHECK(fit_order(pts) == Catch::Approx(0.5).epsilon(1e-12));
  std::vector<std::pair<double, double>> degenerate{{0.5, 0.1}, {0.5, 0.2}};
  CHECK_THROWS_AS(fit_order(degenerate), std::invalid_argument);
}

TEST_CASE("experiment run is deterministic and worker-invariant") {
  ExperimentConfig cfg;
  cfg.model.name = "gle";
  cfg.schemes = {SchemeId::BEM, SchemeId::PEM};
  cfg.levels = {6, 7};
  cfg.samples = 300;
  cfg.master_seed = 9;
  const ErrorReport a = run_experiment(cfg);
  const ErrorReport b = run_experiment(cfg);
  cfg.workers = 3;
  const ErrorReport c = run_experiment(cfg);
  REQUIRE(to_csv(a) == to_csv(b));
  REQUIRE(to_csv(a) == to_csv(c));
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    CHECK(a.cells[i].error == c.cells[i].error);
    CHECK(a.cells[i].proj_total == c.cells[i].proj_total);
  }
}

TEST_CASE("single-cell wrapper matches the full run") {
  ModelSpec spec;
  spec.name = "gbm";
  const auto [err, se] = strong_error(SchemeId::EM, spec, 8, 200, 17);
  ExperimentConfig cfg;
  cfg.model = spec;
  cfg.schemes = {SchemeId::EM};
  cfg.levels = {8};
  cfg.samples = 200;
  cfg.master_seed = 17;
  const ErrorReport rep = run_experiment(cfg);
  CHECK(err == rep.cells.front().error);
  CHECK(se == rep.cells.front().mc_std_error);
  CHECK(rep.cells.front().h == std::ldexp(1.0, -8));
}

TEST_CASE("zero-noise geometric model reduces to deterministic Euler error") {
  ExperimentConfig cfg;
  cfg.model.name = "gbm";
  cfg.model.params = {{"mu", 1.0}, {"sigma", 0.0}, {"x0", 1.0}, {"T", 1.0}};
  cfg.schemes = {SchemeId::EM};
  cfg.levels = {10};
  cfg.samples = 4;
  const ErrorReport rep = run_experiment(cfg);
  const double err = rep.cells.front().error;
  // Euler on x' = x: (1 + h)^(1/h) vs e.
  const double h = std::ldexp(1.0, -10);
  const double det = std::exp(1.0) - std::pow(1.0 + h, 1024.0);
  CHECK(err == Catch::Approx(det).epsilon(1e-10));
  CHECK(err < 0.01 * std::exp(1.0));
}

TEST_CASE("report layout and serialization") {
  ExperimentConfig cfg;
  cfg.model.name = "gbm";
  cfg.schemes = {SchemeId::EM, SchemeId::PEM};
  cfg.levels = {7, 6};  // normalized ascending in the report
  cfg.samples = 100;
  const ErrorReport rep = run_experiment(cfg);
  REQUIRE(rep.cells.size() == 4);
  CHECK(rep.cells[0].level == 6);
  CHECK(rep.cells[1].level == 7);
  CHECK_FALSE(rep.cells[0].eoc.has_value());
  CHECK(rep.cells[1].eoc.has_value());
  CHECK(rep.fitted_slopes.count(SchemeId::EM) == 1);
  CHECK_THROWS_AS(rep.cell(SchemeId::BEM, 6), std::out_of_range);

  const std::string csv = to_csv(rep);
  CHECK(csv.rfind("scheme,h_level,h,error,mc_std_error,eoc,proj_fraction,"
                  "proj_total,overflow_count\n", 0) == 0);
  REQUIRE(std::count(csv.begin(), csv.end(), '\n') == 5);

  const nlohmann::json j = to_json(rep);
  CHECK(j["config"]["model"] == "gbm");
  CHECK(j["config"]["seed"] == 42);
  CHECK(j["cells"].size() == 4);
  CHECK(j["fitted_slopes"].contains("em"));
}

TEST_CASE("invalid configurations are rejected") {
  ExperimentConfig cfg;
  cfg.model.name = "gle";
  cfg.samples = 0;
  CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
  cfg.samples = 10;
  cfg.levels.clear();
  CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
  cfg.levels = {3};  // h L >= 1 for the implicit schemes on svm32
  cfg.model.name = "svm32";
  CHECK_THROWS_AS(run_experiment(cfg), StepSizeError);
}

TEST_CASE("alpha override changes the projection behaviour") {
  ExperimentConfig cfg;
  cfg.model.name = "gle";
  cfg.schemes = {SchemeId::PEM};
  cfg.levels = {6};
  cfg.samples = 500;
  cfg.master_seed = 42;
  const std::size_t base = run_experiment(cfg).cells.front().proj_total;
  cfg.alpha_override = 0.1;  // smaller ball radius, more projections
  const std::size_t tight = run_experiment(cfg).cells.front().proj_total;
  CHECK(tight > base);
}
