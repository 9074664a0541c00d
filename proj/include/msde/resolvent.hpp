#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>

#include "msde/model.hpp"

namespace msde {

// Inversion of the resolvent map F_delta(t,x) = x - delta f(t,x), the
// implicit stage shared by SSBE and BEM. Unique solvability holds whenever
// delta * L < 1.

inline constexpr double tol_solve = 1e-12;

// Step-size ceiling used by the implicit schemes; the theory needs
// h_bar < 1/L and the factor 2 keeps (1 - L delta)^-1 away from blow-up.
inline double default_step_bound(const Model& model) {
  return std::min(1.0, 0.5 / model.one_sided_L);
}

enum class SolveMethod { cardano, piecewise_quadratic, linear, newton_bisection, oracle };

struct SolveResult {
  double x = 0.0;
  double residual = 0.0;
  int iterations = 0;
  SolveMethod method = SolveMethod::newton_bisection;
};

struct StepSizeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline double resolvent_forward(const Model& model, double t, double delta,
                                double x) {
  return x - delta * model.drift1(t, x);
}

// Initial bracket from the growth bound |F^-1(t,y)| <= (1-L d)^-1 (L d + |y|).
inline std::pair<double, double> growth_bracket(const Model& model,
                                                double delta, double y) {
  const double radius =
      (model.one_sided_L * delta + std::fabs(y)) /
          (1.0 - model.one_sided_L * delta) +
      1.0;
  return {-radius, radius};
}

inline void check_step(const Model& model, double delta) {
  if (!(delta > 0.0) || delta * model.one_sided_L >= 1.0)
    throw StepSizeError("resolvent: step size violates delta * L < 1");
}

}  // namespace detail

// Safeguarded Newton on the strictly increasing scalar map x -> F(t,x) - y,
// falling back to bisection whenever an iterate leaves the bracket.
inline SolveResult solve_resolvent_iterative(const Model& model, double t,
                                             double delta, double y) {
  detail::check_step(model, delta);
  if (model.dim_state != 1)
    throw std::invalid_argument("resolvent: iterative solver handles d = 1 only");
  auto [lo, hi] = detail::growth_bracket(model, delta, y);
  double flo = detail::resolvent_forward(model, t, delta, lo) - y;
  double fhi = detail::resolvent_forward(model, t, delta, hi) - y;
  if (flo > 0.0 || fhi < 0.0)
    throw std::runtime_error(
        "resolvent: growth bracket failed; model violates the monotonicity assumption");
  double x = 0.5 * (lo + hi);
  SolveResult res;
  res.method = SolveMethod::newton_bisection;
  for (int it = 0; it < 100; ++it) {
    const double fx = detail::resolvent_forward(model, t, delta, x) - y;
    ++res.iterations;
    if (std::fabs(fx) <= tol_solve) {
      res.x = x;
      res.residual = std::fabs(fx);
      return res;
    }
    if (fx > 0.0) hi = x; else lo = x;
    // Numerical derivative of the forward map.
    const double eps = 1e-7 * (1.0 + std::fabs(x));
    const double deriv = (detail::resolvent_forward(model, t, delta, x + eps) -
                          detail::resolvent_forward(model, t, delta, x - eps)) /
                         (2.0 * eps);
    double next = deriv > 0.0 ? x - fx / deriv : x;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    x = next;
  }
  // Newton budget exhausted; finish with plain bisection.
  while (hi - lo > 1e-13) {
    const double mid = 0.5 * (lo + hi);
    const double fm = detail::resolvent_forward(model, t, delta, mid) - y;
    ++res.iterations;
    if (fm > 0.0) hi = mid; else lo = mid;
  }
  res.x = 0.5 * (lo + hi);
  res.residual = std::fabs(detail::resolvent_forward(model, t, delta, res.x) - y);
  return res;
}

// Solve x - delta f(t,x) = y. Dispatches to the model's closed form when
// available and polishes with Newton if rounding pushed the residual above
// tolerance; otherwise runs the safeguarded iteration.
inline SolveResult solve_resolvent(const Model& model, double t, double delta,
                                   double y) {
  detail::check_step(model, delta);
  if (!std::isfinite(y))
    throw std::invalid_argument("resolvent: non-finite right-hand side");
  if (!model.scalar_resolvent)
    return solve_resolvent_iterative(model, t, delta, y);

  SolveResult res;
  switch (model.resolvent_form) {
    case ResolventForm::cubic_cardano: res.method = SolveMethod::cardano; break;
    case ResolventForm::piecewise_quadratic:
      res.method = SolveMethod::piecewise_quadratic;
      break;
    case ResolventForm::linear: res.method = SolveMethod::linear; break;
    default: res.method = SolveMethod::newton_bisection; break;
  }
  double x = model.scalar_resolvent(t, delta, y);
  if (!std::isfinite(x)) return solve_resolvent_iterative(model, t, delta, y);
  double fx = detail::resolvent_forward(model, t, delta, x) - y;
  for (int it = 0; it < 4 && std::fabs(fx) > tol_solve; ++it) {
    const double eps = 1e-7 * (1.0 + std::fabs(x));
    const double deriv = (detail::resolvent_forward(model, t, delta, x + eps) -
                          detail::resolvent_forward(model, t, delta, x - eps)) /
                         (2.0 * eps);
    if (!(deriv > 0.0)) break;
    x -= fx / deriv;
    fx = detail::resolvent_forward(model, t, delta, x) - y;
    ++res.iterations;
  }
  if (std::fabs(fx) > tol_solve) return solve_resolvent_iterative(model, t, delta, y);
  res.x = x;
  res.residual = std::fabs(fx);
  return res;
}

// Plain bisection to bracket width 1e-13; ground truth for the analytic paths.
inline SolveResult solve_resolvent_oracle(const Model& model, double t,
                                          double delta, double y) {
  detail::check_step(model, delta);
  if (model.dim_state != 1)
    throw std::invalid_argument("resolvent oracle: d = 1 only");
  auto [lo, hi] = detail::growth_bracket(model, delta, y);
  if (detail::resolvent_forward(model, t, delta, lo) > y ||
      detail::resolvent_forward(model, t, delta, hi) < y)
    throw std::runtime_error("resolvent oracle: bracket invalid");
  SolveResult res;
  res.method = SolveMethod::oracle;
  while (hi - lo > 1e-13) {
    const double mid = 0.5 * (lo + hi);
    ++res.iterations;
    if (detail::resolvent_forward(model, t, delta, mid) - y > 0.0) hi = mid; else lo = mid;
  }
  res.x = 0.5 * (lo + hi);
  res.residual = std::fabs(detail::resolvent_forward(model, t, delta, res.x) - y);
  return res;
}

// Slack of |F^-1(t,x1) - F^-1(t,x2)| <= (1 - L delta)^-1 |x1 - x2|.
inline double inverse_lipschitz_margin(const Model& model, double t,
                                       double delta, double x1, double x2) {
  const double u1 = solve_resolvent(model, t, delta, x1).x;
  const double u2 = solve_resolvent(model, t, delta, x2).x;
  return std::fabs(x1 - x2) / (1.0 - model.one_sided_L * delta) -
         std::fabs(u1 - u2);
}

// Slack of the pointwise stability bound
//   |F^-1 x1 - F^-1 x2|^2 + eta delta sum_r |g^r(F^-1 x1) - g^r(F^-1 x2)|^2
//     <= (1 + C1 delta) |x1 - x2|^2,  C1 = L (2 - L h_bar)(1 - L h_bar)^-2.
inline double resolvent_stability_margin(const Model& model, double t,
                                         double delta, double x1, double x2) {
  const double L = model.one_sided_L;
  const double hb = default_step_bound(model);
  const double c1 = L * (2.0 - L * hb) / ((1.0 - L * hb) * (1.0 - L * hb));
  const double u1 = solve_resolvent(model, t, delta, x1).x;
  const double u2 = solve_resolvent(model, t, delta, x2).x;
  double lhs = (u1 - u2) * (u1 - u2);
  for (int r = 0; r < model.dim_noise; ++r) {
    double g1 = 0.0, g2 = 0.0;
    model.diffusion(t, StateView{&u1, 1}, r, StateOut{&g1, 1});
    model.diffusion(t, StateView{&u2, 1}, r, StateOut{&g2, 1});
    lhs += model.eta * delta * (g1 - g2) * (g1 - g2);
  }
  return (1.0 + c1 * delta) * (x1 - x2) * (x1 - x2) - lhs;
}

// Slacks of the local expansion bounds
//   |F^-1(t,x) - x|               <= delta   C2 (1 + |x|^q)
//   |F^-1(t,x) - x - delta f(t,x)| <= delta^2 C3 (1 + |x|^(2q-1))
// with C2 = L (1 - L h_bar)^-1 and the explicit majorant
// C3 = C2 L (2 + (1 - L h_bar)^-(q-1) (L h_bar + 1)^(q-1)) 2^q, which
// dominates the chain of estimates behind the second-order bound.
inline std::pair<double, double> local_expansion_margins(const Model& model,
                                                         double t, double delta,
                                                         double x) {
  const double L = model.one_sided_L;
  const double q = model.growth_q;
  const double hb = default_step_bound(model);
  const double c2 = L / (1.0 - L * hb);
  const double c3 = c2 * L *
                    (2.0 + std::pow(1.0 - L * hb, -(q - 1.0)) *
                               std::pow(L * hb + 1.0, q - 1.0)) *
                    std::pow(2.0, q);
  const double u = solve_resolvent(model, t, delta, x).x;
  const double f = model.drift1(t, x);
  const double ax = std::fabs(x);
  const double m1 = delta * c2 * (1.0 + std::pow(ax, q)) - std::fabs(u - x);
  const double m2 = delta * delta * c3 * (1.0 + std::pow(ax, 2.0 * q - 1.0)) -
                    std::fabs(u - x - delta * f);
  return {m1, m2};
}

}  // namespace msde
