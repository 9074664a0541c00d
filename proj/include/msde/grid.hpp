#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace msde {

// Temporal grid 0 = t_0 < t_1 < ... < t_N = T induced by a vector of
// positive step sizes.
struct TimeGrid {
  double horizon = 0.0;
  std::vector<double> steps;   // h_1, ..., h_N
  std::vector<double> points;  // t_0, ..., t_N

  std::size_t num_steps() const { return steps.size(); }

  double max_step() const {
    double m = 0.0;
    for (double h : steps) m = std::max(m, h);
    return m;
  }

  static TimeGrid from_steps(std::vector<double> h) {
    if (h.empty()) throw std::invalid_argument("TimeGrid: empty step vector");
    TimeGrid g;
    g.points.reserve(h.size() + 1);
    g.points.push_back(0.0);
    double t = 0.0;
    for (double hi : h) {
      if (!(hi > 0.0)) throw std::invalid_argument("TimeGrid: nonpositive step");
      t += hi;
      g.points.push_back(t);
    }
    g.steps = std::move(h);
    g.horizon = t;
    return g;
  }

  // Equidistant grid with step 2^-level. Requires T * 2^level integral so
  // that every point is exactly representable on the dyadic lattice.
  static TimeGrid uniform_dyadic(int level, double horizon) {
    if (level < 0 || level > 40)
      throw std::invalid_argument("TimeGrid: dyadic level out of range");
    if (!(horizon > 0.0) || !std::isfinite(horizon))
      throw std::invalid_argument("TimeGrid: nonpositive horizon");
    const double h = std::ldexp(1.0, -level);
    const double n_real = horizon / h;
    const auto n = static_cast<long long>(std::llround(n_real));
    if (n <= 0 || static_cast<double>(n) * h != horizon)
      throw std::invalid_argument(
          "TimeGrid: horizon not representable on the dyadic grid");
    TimeGrid g;
    g.horizon = horizon;
    g.steps.assign(static_cast<std::size_t>(n), h);
    g.points.resize(static_cast<std::size_t>(n) + 1);
    for (long long i = 0; i <= n; ++i)
      g.points[static_cast<std::size_t>(i)] = std::ldexp(static_cast<double>(i), -level);
    return g;
  }
};

}  // namespace msde
