#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "msde/rng.hpp"

namespace msde {

using StateView = std::span<const double>;
using StateOut = std::span<double>;

enum class ResolventForm { iterative, cubic_cardano, piecewise_quadratic, linear };

// SDE dX = f(t,X) dt + sum_r g^r(t,X) dW^r together with the structural
// constants of the global monotonicity framework. Immutable after
// construction; evaluators must be pure.
struct Model {
  std::string name;
  int dim_state = 1;
  int dim_noise = 1;

  std::function<void(double, StateView, StateOut)> drift;
  std::function<void(double, StateView, int, StateOut)> diffusion;

  double one_sided_L = 1.0;   // L in the monotonicity / growth bounds
  double growth_q = 2.0;      // q > 1
  double eta = 1.0;           // weight of the diffusion term, eta > 1/2
  double alpha = 0.5;         // projection exponent, 1/(2(q-1)) capped at 1
  double coercivity_C = 1.0;  // C in the coercivity bound for exponent p
  double moment_p = 2.0;      // largest p with a claimed finite moment
  double horizon = 1.0;
  std::vector<double> initial_value;

  // Closed-form inverse of x - delta f(t,x) for the shipped scalar models.
  ResolventForm resolvent_form = ResolventForm::iterative;
  std::function<double(double, double, double)> scalar_resolvent;

  bool scalar() const { return dim_state == 1 && dim_noise == 1; }

  double drift1(double t, double x) const {
    double out = 0.0;
    drift(t, StateView{&x, 1}, StateOut{&out, 1});
    return out;
  }

  double diffusion1(double t, double x) const {
    double out = 0.0;
    diffusion(t, StateView{&x, 1}, 0, StateOut{&out, 1});
    return out;
  }
};

namespace detail {
inline void require_finite(std::initializer_list<double> vals, const char* what) {
  for (double v : vals)
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + ": non-finite parameter");
}
}  // namespace detail

// Stochastic Ginzburg-Landau equation:
//   dX = (-X^3 + (mu + sigma^2/2) X) dt + sigma X dW.
// The monotonicity constant is mu + sigma^2/2 + eta sigma^2: expanding
// <f(x1)-f(x2), x1-x2> + eta |g(x1)-g(x2)|^2 gives the coefficient
// a - (x1^2 + x1 x2 + x2^2) + eta sigma^2 with a = mu + sigma^2/2, and the
// quadratic form vanishes at the origin, so nothing smaller works.
inline Model make_gle(double mu, double sigma, double x0, double horizon) {
  detail::require_finite({mu, sigma, x0, horizon}, "make_gle");
  if (sigma < 0.0) throw std::invalid_argument("make_gle: sigma < 0");
  if (!(horizon > 0.0)) throw std::invalid_argument("make_gle: T <= 0");
  const double a = mu + 0.5 * sigma * sigma;
  const double eta = 1.25;
  Model m;
  m.name = "gle";
  m.drift = [a](double, StateView x, StateOut out) {
    out[0] = -x[0] * x[0] * x[0] + a * x[0];
  };
  m.diffusion = [sigma](double, StateView x, int, StateOut out) {
    out[0] = sigma * x[0];
  };
  m.one_sided_L = std::max(a + eta * sigma * sigma, 1e-6);
  m.growth_q = 3.0;
  m.eta = eta;
  m.alpha = 0.25;  // 1/(2(q-1))
  m.moment_p = 8.0;
  m.coercivity_C = std::max(a, 0.0) + 0.5 * (m.moment_p - 1.0) * sigma * sigma + 1e-6;
  m.horizon = horizon;
  m.initial_value = {x0};
  m.resolvent_form = ResolventForm::cubic_cardano;
  m.scalar_resolvent = [a](double, double delta, double y) {
    // delta x^3 + (1 - delta a) x = y, unique real root since 1 - delta a > 0.
    const double p = (1.0 - delta * a) / delta;
    double q0 = y / delta;
    const double sign = q0 < 0.0 ? -1.0 : 1.0;
    q0 = std::fabs(q0);
    const double disc = std::sqrt(0.25 * q0 * q0 + p * p * p / 27.0);
    const double u = std::cbrt(0.5 * q0 + disc);
    return sign * (u - p / (3.0 * u));
  };
  return m;
}

// 3/2-volatility model: dX = lambda X (mu - |X|) dt + sigma |X|^(3/2) dW.
inline Model make_svm32(double lambda, double mu, double sigma, double x0,
                        double horizon) {
  detail::require_finite({lambda, mu, sigma, x0, horizon}, "make_svm32");
  if (lambda < 0.0 || mu < 0.0 || sigma < 0.0 || x0 < 0.0)
    throw std::invalid_argument("make_svm32: negative parameter");
  if (!(horizon > 0.0)) throw std::invalid_argument("make_svm32: T <= 0");
  Model m;
  m.name = "svm32";
  m.drift = [lambda, mu](double, StateView x, StateOut out) {
    out[0] = lambda * x[0] * (mu - std::fabs(x[0]));
  };
  m.diffusion = [sigma](double, StateView x, int, StateOut out) {
    const double ax = std::fabs(x[0]);
    out[0] = sigma * ax * std::sqrt(ax);
  };
  m.one_sided_L = std::max(lambda * mu, 1e-6);
  m.growth_q = 2.0;
  m.eta = 2.0;
  m.alpha = 0.5;
  m.moment_p = sigma > 0.0 ? (2.0 * lambda + sigma * sigma) / (sigma * sigma) : 8.0;
  m.coercivity_C = std::max(lambda * mu, 1e-6);
  m.horizon = horizon;
  m.initial_value = {x0};
  m.resolvent_form = ResolventForm::piecewise_quadratic;
  m.scalar_resolvent = [lambda, mu](double, double delta, double y) {
    // On each sign region x - delta lambda x (mu -+ x) = y is quadratic in x;
    // sign(x) = sign(y) because the resolvent map fixes the origin and is
    // strictly increasing. The rationalized root avoids cancellation.
    const double b = 1.0 - delta * lambda * mu;
    const double dl = delta * lambda;
    if (dl == 0.0) return y / b;
    return 2.0 * y / (b + std::sqrt(b * b + 4.0 * dl * std::fabs(y)));
  };
  return m;
}

// Geometric Brownian motion, a globally Lipschitz sanity fixture with the
// closed form X0 exp((mu - sigma^2/2) t + sigma W(t)). Formally outside the
// q > 1 framework; alpha is capped at 1 so the PEM projection threshold
// 1/h >= 1 stays inert for desk-scale states.
inline Model make_gbm(double mu, double sigma, double x0, double horizon) {
  detail::require_finite({mu, sigma, x0, horizon}, "make_gbm");
  if (!(horizon > 0.0)) throw std::invalid_argument("make_gbm: T <= 0");
  const double eta = 1.25;
  Model m;
  m.name = "gbm";
  m.drift = [mu](double, StateView x, StateOut out) { out[0] = mu * x[0]; };
  m.diffusion = [sigma](double, StateView x, int, StateOut out) {
    out[0] = sigma * x[0];
  };
  m.one_sided_L = std::max(mu + eta * sigma * sigma, 1e-6);
  m.growth_q = 1.5;
  m.eta = eta;
  m.alpha = 1.0;
  m.moment_p = 8.0;
  m.coercivity_C = std::max(mu, 0.0) + 0.5 * (m.moment_p - 1.0) * sigma * sigma + 1.0;
  m.horizon = horizon;
  m.initial_value = {x0};
  m.resolvent_form = ResolventForm::linear;
  m.scalar_resolvent = [mu](double, double delta, double y) {
    return y / (1.0 - delta * mu);
  };
  return m;
}

enum class Inequality {
  monotonicity,
  poly_growth,
  time_hoelder,
  local_lipschitz,
  coercivity,
};

inline const char* to_string(Inequality iq) {
  switch (iq) {
    case Inequality::monotonicity: return "monotonicity";
    case Inequality::poly_growth: return "poly_growth";
    case Inequality::time_hoelder: return "time_hoelder";
    case Inequality::local_lipschitz: return "local_lipschitz";
    case Inequality::coercivity: return "coercivity";
  }
  return "?";
}

struct SampleBox {
  double x_abs_max = 10.0;
  double t_max = 1.0;
};

struct AssumptionSampleReport {
  Inequality inequality{};
  std::size_t samples_tested = 0;
  std::size_t violations = 0;
  double worst_margin = 0.0;
  std::vector<double> witness_x1, witness_x2;
  double witness_t = 0.0;
};

namespace detail {

inline double norm2(StateView v) {
  double s = 0.0;
  for (double c : v) s += c * c;
  return s;
}

inline double dot(StateView a, StateView b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace detail

// Evaluates the selected structural inequality at n pseudo-random sample
// points inside the box; reports the most negative slack and how often it
// dips below the floating-point tolerance.
inline AssumptionSampleReport sample_assumption(const Model& model,
                                                Inequality iq,
                                                const SampleBox& box,
                                                std::size_t n,
                                                std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_assumption: n < 1");
  if (!(box.x_abs_max > 0.0) || !std::isfinite(box.x_abs_max))
    throw std::invalid_argument("sample_assumption: unbounded box");
  const int d = model.dim_state;
  const int mm = model.dim_noise;
  const double L = model.one_sided_L;
  const double q = model.growth_q;

  rng::Stream stream(seed, 0x5a);
  std::vector<double> x1(d), x2(d), f1(d), f2(d), g1(d), g2(d), diff(d);
  AssumptionSampleReport rep;
  rep.inequality = iq;
  rep.samples_tested = n;
  rep.worst_margin = std::numeric_limits<double>::infinity();

  for (std::size_t i = 0; i < n; ++i) {
    const double t = stream.uniform(0.0, box.t_max);
    const double t2 = stream.uniform(0.0, box.t_max);
    for (int k = 0; k < d; ++k) {
      x1[k] = stream.uniform(-box.x_abs_max, box.x_abs_max);
      x2[k] = stream.uniform(-box.x_abs_max, box.x_abs_max);
    }
    double lhs = 0.0, rhs = 0.0;
    switch (iq) {
      case Inequality::monotonicity: {
        model.drift(t, x1, f1);
        model.drift(t, x2, f2);
        for (int k = 0; k < d; ++k) {
          f1[k] -= f2[k];
          diff[k] = x1[k] - x2[k];
        }
        lhs = detail::dot(f1, diff);
        for (int r = 0; r < mm; ++r) {
          model.diffusion(t, x1, r, g1);
          model.diffusion(t, x2, r, g2);
          for (int k = 0; k < d; ++k) g1[k] -= g2[k];
          lhs += model.eta * detail::norm2(g1);
        }
        rhs = L * detail::norm2(diff);
        break;
      }
      case Inequality::poly_growth: {
        model.drift(t, x1, f1);
        double worst = std::sqrt(detail::norm2(f1));
        for (int r = 0; r < mm; ++r) {
          model.diffusion(t, x1, r, g1);
          worst = std::max(worst, std::sqrt(detail::norm2(g1)));
        }
        lhs = worst;
        rhs = L * (1.0 + std::pow(std::sqrt(detail::norm2(x1)), q));
        break;
      }
      case Inequality::time_hoelder: {
        model.drift(t, x1, f1);
        model.drift(t2, x1, f2);
        for (int k = 0; k < d; ++k) f1[k] -= f2[k];
        double worst = std::sqrt(detail::norm2(f1));
        for (int r = 0; r < mm; ++r) {
          model.diffusion(t, x1, r, g1);
          model.diffusion(t2, x1, r, g2);
          for (int k = 0; k < d; ++k) g1[k] -= g2[k];
          worst = std::max(worst, std::sqrt(detail::norm2(g1)));
        }
        lhs = worst;
        rhs = L * (1.0 + std::pow(std::sqrt(detail::norm2(x1)), q)) *
              std::sqrt(std::fabs(t - t2));
        break;
      }
      case Inequality::local_lipschitz: {
        model.drift(t, x1, f1);
        model.drift(t, x2, f2);
        for (int k = 0; k < d; ++k) f1[k] -= f2[k];
        double worst = std::sqrt(detail::norm2(f1));
        for (int r = 0; r < mm; ++r) {
          model.diffusion(t, x1, r, g1);
          model.diffusion(t, x2, r, g2);
          for (int k = 0; k < d; ++k) g1[k] -= g2[k];
          worst = std::max(worst, std::sqrt(detail::norm2(g1)));
        }
        for (int k = 0; k < d; ++k) diff[k] = x1[k] - x2[k];
        lhs = worst;
        rhs = L *
              (1.0 + std::pow(std::sqrt(detail::norm2(x1)), q - 1.0) +
               std::pow(std::sqrt(detail::norm2(x2)), q - 1.0)) *
              std::sqrt(detail::norm2(diff));
        break;
      }
      case Inequality::coercivity: {
        model.drift(t, x1, f1);
        lhs = detail::dot(f1, x1);
        for (int r = 0; r < mm; ++r) {
          model.diffusion(t, x1, r, g1);
          lhs += 0.5 * (model.moment_p - 1.0) * detail::norm2(g1);
        }
        rhs = model.coercivity_C * (1.0 + detail::norm2(x1));
        break;
      }
    }
    const double margin = rhs - lhs;
    if (margin < rep.worst_margin) {
      rep.worst_margin = margin;
      rep.witness_x1 = x1;
      rep.witness_x2 = x2;
      rep.witness_t = t;
    }
    if (margin < -1e-9 * std::max(1.0, std::fabs(rhs))) ++rep.violations;
  }
  return rep;
}

}  // namespace msde
