#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "msde/model.hpp"
#include "msde/resolvent.hpp"
#include "msde/schemes.hpp"

namespace msde {

// Sampled verification of the pointwise inequalities the schemes rely on.
// Each check reports the worst observed slack; a violation is a slack below
// the stated tolerance.

struct SuiteCheck {
  std::string name;
  std::size_t samples = 0;
  std::size_t violations = 0;
  double worst_margin = 0.0;
  double tolerance = 0.0;
  std::string witness;

  bool passed() const { return violations == 0; }
};

namespace detail {

inline std::string witness_str(double t, double delta, double x1, double x2) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "t=%.6g delta=%.6g x1=%.17g x2=%.17g", t,
                delta, x1, x2);
  return buf;
}

}  // namespace detail

inline SuiteCheck check_assumption(const Model& model, Inequality iq,
                                   std::size_t n, std::uint64_t seed,
                                   double x_abs_max = 10.0) {
  SampleBox box{x_abs_max, model.horizon};
  const AssumptionSampleReport rep = sample_assumption(model, iq, box, n, seed);
  SuiteCheck check;
  check.name = model.name + std::string("/") + to_string(iq);
  check.samples = rep.samples_tested;
  check.violations = rep.violations;
  check.worst_margin = rep.worst_margin;
  check.tolerance = -1e-9;
  if (!rep.witness_x1.empty())
    check.witness = detail::witness_str(rep.witness_t, 0.0, rep.witness_x1[0],
                                        rep.witness_x2.empty() ? 0.0 : rep.witness_x2[0]);
  return check;
}

// Agreement between the analytic resolvent path and the bisection oracle on
// random queries; the oracle defines ground truth.
inline SuiteCheck check_resolvent_oracle(const Model& model, std::size_t n,
                                         std::uint64_t seed,
                                         double y_abs_max = 10.0) {
  SuiteCheck check;
  check.name = model.name + "/resolvent_oracle";
  check.samples = n;
  check.tolerance = 1e-10;
  check.worst_margin = 0.0;
  rng::Stream stream(seed, 0x11);
  const double hb = default_step_bound(model);
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = stream.uniform(0.0, model.horizon);
    const double delta = stream.uniform(1e-6, hb);
    const double y = stream.uniform(-y_abs_max, y_abs_max);
    const SolveResult fast = solve_resolvent(model, t, delta, y);
    const SolveResult oracle = solve_resolvent_oracle(model, t, delta, y);
    const double diff = std::fabs(fast.x - oracle.x);
    if (diff > worst) {
      worst = diff;
      check.witness = detail::witness_str(t, delta, y, fast.x);
    }
    if (diff > 1e-10 || fast.residual > tol_solve) ++check.violations;
  }
  check.worst_margin = worst;
  return check;
}

inline SuiteCheck check_inverse_lipschitz(const Model& model, double delta,
                                          std::size_t n, std::uint64_t seed,
                                          double y_abs_max = 10.0) {
  SuiteCheck check;
  check.name = model.name + "/inverse_lipschitz";
  check.samples = n;
  check.tolerance = -1e-9;
  check.worst_margin = std::numeric_limits<double>::infinity();
  rng::Stream stream(seed, 0x12);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = stream.uniform(0.0, model.horizon);
    const double y1 = stream.uniform(-y_abs_max, y_abs_max);
    const double y2 = stream.uniform(-y_abs_max, y_abs_max);
    const double margin = inverse_lipschitz_margin(model, t, delta, y1, y2);
    if (margin < check.worst_margin) {
      check.worst_margin = margin;
      check.witness = detail::witness_str(t, delta, y1, y2);
    }
    if (margin < check.tolerance) ++check.violations;
  }
  return check;
}

inline SuiteCheck check_resolvent_stability(const Model& model, double delta,
                                            std::size_t n, std::uint64_t seed,
                                            double y_abs_max = 10.0) {
  SuiteCheck check;
  check.name = model.name + "/resolvent_stability";
  check.samples = n;
  check.tolerance = -1e-9;
  check.worst_margin = std::numeric_limits<double>::infinity();
  rng::Stream stream(seed, 0x13);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = stream.uniform(0.0, model.horizon);
    const double y1 = stream.uniform(-y_abs_max, y_abs_max);
    const double y2 = stream.uniform(-y_abs_max, y_abs_max);
    const double margin = resolvent_stability_margin(model, t, delta, y1, y2);
    if (margin < check.worst_margin) {
      check.worst_margin = margin;
      check.witness = detail::witness_str(t, delta, y1, y2);
    }
    if (margin < check.tolerance) ++check.violations;
  }
  return check;
}

inline SuiteCheck check_local_expansion(const Model& model, std::size_t n,
                                        std::uint64_t seed,
                                        double x_abs_max = 5.0) {
  SuiteCheck check;
  check.name = model.name + "/local_expansion";
  check.samples = n;
  check.tolerance = -1e-9;
  check.worst_margin = std::numeric_limits<double>::infinity();
  rng::Stream stream(seed, 0x14);
  const double hb = default_step_bound(model);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = stream.uniform(0.0, model.horizon);
    const double delta = stream.uniform(1e-6, hb);
    const double x = stream.uniform(-x_abs_max, x_abs_max);
    const auto [m1, m2] = local_expansion_margins(model, t, delta, x);
    const double margin = std::min(m1, m2);
    if (margin < check.worst_margin) {
      check.worst_margin = margin;
      check.witness = detail::witness_str(t, delta, x, 0.0);
    }
    if (margin < check.tolerance) ++check.violations;
  }
  return check;
}

// |x1° - x2°| <= |x1 - x2| for the ball projection.
inline SuiteCheck check_projection_nonexpansive(const Model& model,
                                                std::size_t n,
                                                std::uint64_t seed,
                                                double x_abs_max = 10.0) {
  SuiteCheck check;
  check.name = model.name + "/projection_nonexpansive";
  check.samples = n;
  check.tolerance = -1e-12;
  check.worst_margin = std::numeric_limits<double>::infinity();
  rng::Stream stream(seed, 0x15);
  for (std::size_t i = 0; i < n; ++i) {
    const double delta = stream.uniform(1e-6, 1.0);
    const double x1 = stream.uniform(-x_abs_max, x_abs_max);
    const double x2 = stream.uniform(-x_abs_max, x_abs_max);
    const double p1 = project(x1, delta, model.alpha);
    const double p2 = project(x2, delta, model.alpha);
    const double margin = std::fabs(x1 - x2) - std::fabs(p1 - p2);
    if (margin < check.worst_margin) {
      check.worst_margin = margin;
      check.witness = detail::witness_str(0.0, delta, x1, x2);
    }
    if (margin < check.tolerance) ++check.violations;
  }
  return check;
}

// Pointwise PEM stability:
//   |x1° - x2° + delta (f(x1°) - f(x2°))|^2
//     + 2 eta delta sum_r |g^r(x1°) - g^r(x2°)|^2 <= (1 + C delta)|x1 - x2|^2
// with C = 2L + 9L^2.
inline SuiteCheck check_pem_stability(const Model& model, std::size_t n,
                                      std::uint64_t seed,
                                      double x_abs_max = 10.0) {
  SuiteCheck check;
  check.name = model.name + "/pem_stability";
  check.samples = n;
  check.tolerance = -1e-9;
  check.worst_margin = std::numeric_limits<double>::infinity();
  rng::Stream stream(seed, 0x16);
  const double L = model.one_sided_L;
  const double c = 2.0 * L + 9.0 * L * L;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = stream.uniform(0.0, model.horizon);
    const double delta = stream.uniform(1e-6, 1.0);
    const double x1 = stream.uniform(-x_abs_max, x_abs_max);
    const double x2 = stream.uniform(-x_abs_max, x_abs_max);
    const double p1 = project(x1, delta, model.alpha);
    const double p2 = project(x2, delta, model.alpha);
    const double df = model.drift1(t, p1) - model.drift1(t, p2);
    double lhs = (p1 - p2 + delta * df) * (p1 - p2 + delta * df);
    for (int r = 0; r < model.dim_noise; ++r) {
      double g1 = 0.0, g2 = 0.0;
      model.diffusion(t, StateView{&p1, 1}, r, StateOut{&g1, 1});
      model.diffusion(t, StateView{&p2, 1}, r, StateOut{&g2, 1});
      lhs += 2.0 * model.eta * delta * (g1 - g2) * (g1 - g2);
    }
    const double margin = (1.0 + c * delta) * (x1 - x2) * (x1 - x2) - lhs;
    if (margin < check.worst_margin) {
      check.worst_margin = margin;
      check.witness = detail::witness_str(t, delta, x1, x2);
    }
    if (margin < check.tolerance) ++check.violations;
  }
  return check;
}

// --- fixture suites over the shipped experiment models ---

inline std::vector<Model> verification_models() {
  return {make_gle(0.5, 1.0, 2.0, 1.0), make_svm32(3.5, 3.0, 1.0, 5.0, 1.0)};
}

inline std::vector<SuiteCheck> verify_assumptions(std::size_t n,
                                                  std::uint64_t seed) {
  std::vector<SuiteCheck> out;
  for (const Model& m : verification_models())
    for (Inequality iq :
         {Inequality::monotonicity, Inequality::poly_growth,
          Inequality::time_hoelder, Inequality::local_lipschitz,
          Inequality::coercivity})
      out.push_back(check_assumption(m, iq, n, seed));
  return out;
}

inline std::vector<SuiteCheck> verify_resolvent(std::size_t n,
                                                std::uint64_t seed) {
  std::vector<SuiteCheck> out;
  const Model gle = make_gle(0.5, 1.0, 2.0, 1.0);
  const Model svm = make_svm32(3.5, 3.0, 1.0, 5.0, 1.0);
  const std::size_t n_oracle = std::min<std::size_t>(n, 10000);
  for (const Model* m : {&gle, &svm}) {
    out.push_back(check_resolvent_oracle(*m, n_oracle, seed));
    const double delta = m->name == "gle" ? 1.0 / 8.0 : 1.0 / 64.0;
    out.push_back(check_inverse_lipschitz(*m, delta, n, seed));
    out.push_back(check_resolvent_stability(*m, delta, n, seed));
    out.push_back(check_local_expansion(*m, n, seed));
  }
  return out;
}

inline std::vector<SuiteCheck> verify_projection(std::size_t n,
                                                 std::uint64_t seed) {
  std::vector<SuiteCheck> out;
  for (const Model& m : verification_models()) {
    out.push_back(check_projection_nonexpansive(m, n, seed));
    out.push_back(check_pem_stability(m, n, seed));
  }
  return out;
}

}  // namespace msde
