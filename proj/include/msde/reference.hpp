#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "msde/model.hpp"
#include "msde/path.hpp"
#include "msde/schemes.hpp"

namespace msde {

struct ReferenceSpec {
  enum class Kind { gle_exact, gbm_exact, numeric_fine };
  Kind kind = Kind::numeric_fine;
  int quad_level = 12;              // Riemann-sum step for gle_exact
  SchemeId fine_scheme = SchemeId::BEM;
  int fine_level = 14;              // numeric_fine grid level
};

// Closed-form Ginzburg-Landau terminal value
//   X(T) = X0 exp(mu T + sigma W(T)) (1 + 2 X0^2 I)^(-1/2),
//   I = int_0^T exp(2 mu s + 2 sigma W(s)) ds,
// with I approximated by a left-endpoint Riemann sum on the quadrature grid.
inline double gle_exact_at_T(const BrownianPath& path, double mu, double sigma,
                             double x0, int quad_level = 12) {
  if (quad_level > path.level)
    throw std::invalid_argument("gle_exact_at_T: quadrature finer than path");
  if (path.channels != 1)
    throw std::invalid_argument("gle_exact_at_T: scalar noise expected");
  const std::vector<double> inc = coarsen_to_level(path, quad_level);
  const double h = std::ldexp(1.0, -quad_level);
  double w = 0.0, t = 0.0, integral = 0.0;
  for (double dw : inc) {
    integral += std::exp(2.0 * mu * t + 2.0 * sigma * w) * h;
    w += dw;
    t += h;
  }
  const double T = path.horizon;
  return x0 * std::exp(mu * T + sigma * w) /
         std::sqrt(1.0 + 2.0 * x0 * x0 * integral);
}

// Running closed-form GLE values on a coarse grid (trajectory dumps).
inline std::vector<double> gle_exact_on_grid(const BrownianPath& path,
                                             double mu, double sigma, double x0,
                                             const TimeGrid& grid,
                                             int quad_level = 12) {
  if (quad_level > path.level)
    throw std::invalid_argument("gle_exact_on_grid: quadrature finer than path");
  const std::vector<double> inc = coarsen_to_level(path, quad_level);
  const double h = std::ldexp(1.0, -quad_level);
  std::vector<double> out;
  out.reserve(grid.points.size());
  double w = 0.0, t = 0.0, integral = 0.0;
  std::size_t j = 0;
  for (double tn : grid.points) {
    while (t < tn && j < inc.size()) {
      integral += std::exp(2.0 * mu * t + 2.0 * sigma * w) * h;
      w += inc[j++];
      t += h;
    }
    out.push_back(x0 * std::exp(mu * tn + sigma * w) /
                  std::sqrt(1.0 + 2.0 * x0 * x0 * integral));
  }
  return out;
}

inline double gbm_exact_at_T(const BrownianPath& path, double mu, double sigma,
                             double x0) {
  const double T = path.horizon;
  return x0 * std::exp((mu - 0.5 * sigma * sigma) * T +
                       sigma * path.terminal_value(0));
}

// High-accuracy numerical reference: the chosen scheme on the fine dyadic
// grid, driven by the same noise realization.
inline double numeric_reference_at_T(const BrownianPath& path,
                                     const Model& model, int fine_level,
                                     SchemeId fine_scheme = SchemeId::BEM) {
  if (fine_level > path.level)
    throw std::invalid_argument("numeric_reference_at_T: grid finer than path");
  const TimeGrid grid = TimeGrid::uniform_dyadic(fine_level, path.horizon);
  const std::vector<double> inc = coarsen(path, grid);
  return integrate(fine_scheme, model, grid, inc).terminal();
}

inline std::vector<double> gbm_exact_on_grid(const BrownianPath& path,
                                             double mu, double sigma, double x0,
                                             const TimeGrid& grid) {
  auto fine = path.channel(0);
  const double h = path.fine_step();
  std::vector<double> out;
  out.reserve(grid.points.size());
  double w = 0.0, t = 0.0;
  std::size_t j = 0;
  for (double tn : grid.points) {
    while (t < tn && j < fine.size()) {
      w += fine[j++];
      t += h;
    }
    out.push_back(x0 * std::exp((mu - 0.5 * sigma * sigma) * tn + sigma * w));
  }
  return out;
}

inline std::vector<double> numeric_reference_on_grid(const BrownianPath& path,
                                                     const Model& model,
                                                     int fine_level,
                                                     SchemeId fine_scheme,
                                                     const TimeGrid& grid) {
  const TimeGrid fine = TimeGrid::uniform_dyadic(fine_level, path.horizon);
  const std::vector<double> inc = coarsen(path, fine);
  const GridFunction run = integrate(fine_scheme, model, fine, inc);
  std::vector<double> out;
  out.reserve(grid.points.size());
  const double hf = std::ldexp(1.0, -fine_level);
  for (double tn : grid.points) {
    const auto idx = static_cast<std::size_t>(std::llround(tn / hf));
    out.push_back(run.at(idx)[0]);
  }
  return out;
}

inline double reference_at_T(const BrownianPath& path, const Model& model,
                             const ReferenceSpec& spec, double mu, double sigma,
                             double x0) {
  switch (spec.kind) {
    case ReferenceSpec::Kind::gle_exact:
      return gle_exact_at_T(path, mu, sigma, x0, spec.quad_level);
    case ReferenceSpec::Kind::gbm_exact:
      return gbm_exact_at_T(path, mu, sigma, x0);
    case ReferenceSpec::Kind::numeric_fine:
      return numeric_reference_at_T(path, model, spec.fine_level,
                                    spec.fine_scheme);
  }
  throw std::logic_error("reference_at_T: unknown kind");
}

}  // namespace msde
