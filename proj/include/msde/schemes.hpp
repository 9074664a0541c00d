#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "msde/grid.hpp"
#include "msde/model.hpp"
#include "msde/resolvent.hpp"

namespace msde {

enum class SchemeId { EM, SSBE, BEM, PEM };

inline const char* to_string(SchemeId s) {
  switch (s) {
    case SchemeId::EM: return "em";
    case SchemeId::SSBE: return "ssbe";
    case SchemeId::BEM: return "bem";
    case SchemeId::PEM: return "pem";
  }
  return "?";
}

inline SchemeId scheme_from_string(const std::string& s) {
  if (s == "em") return SchemeId::EM;
  if (s == "ssbe") return SchemeId::SSBE;
  if (s == "bem") return SchemeId::BEM;
  if (s == "pem") return SchemeId::PEM;
  throw std::invalid_argument("unknown scheme: " + s);
}

inline bool is_implicit(SchemeId s) {
  return s == SchemeId::SSBE || s == SchemeId::BEM;
}

struct OverflowError : std::runtime_error {
  std::size_t step;
  explicit OverflowError(std::size_t step_index)
      : std::runtime_error("integration overflow at step " +
                           std::to_string(step_index)),
        step(step_index) {}
};

// Projection x -> min(1, delta^-alpha / |x|) x onto the ball of radius
// delta^-alpha. The zero vector maps to itself (the min is 1 in the limit).
inline double project(double x, double delta, double alpha) {
  const double radius = std::pow(delta, -alpha);
  const double ax = std::fabs(x);
  if (ax <= radius) return x;
  return x * (radius / ax);
}

inline void project(StateView x, double delta, double alpha, StateOut out) {
  const double radius = std::pow(delta, -alpha);
  double norm = 0.0;
  for (double c : x) norm += c * c;
  norm = std::sqrt(norm);
  const double scale = norm <= radius ? 1.0 : radius / norm;
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = x[k] * scale;
}

// --- scalar one-step maps (d = m = 1) ---

inline double step_em(const Model& model, double x, double t, double delta,
                      double dw) {
  return x + delta * model.drift1(t, x) + model.diffusion1(t, x) * dw;
}

// Implicit drift stage at t + delta, then diffusion at the new time and the
// staged state.
inline double step_ssbe(const Model& model, double x, double t, double delta,
                        double dw) {
  const double stage = solve_resolvent(model, t + delta, delta, x).x;
  return stage + model.diffusion1(t + delta, stage) * dw;
}

// Diffusion at the old time and state, then the implicit drift stage.
inline double step_bem(const Model& model, double x, double t, double delta,
                       double dw) {
  const double y = x + model.diffusion1(t, x) * dw;
  return solve_resolvent(model, t + delta, delta, y).x;
}

struct PemStep {
  double x;
  bool projected;
};

// Coefficients are evaluated at the old time t and the projected state; the
// non-projected branch reproduces step_em bit for bit.
inline PemStep step_pem(const Model& model, double x, double t, double delta,
                        double dw) {
  const double radius = std::pow(delta, -model.alpha);
  const bool projected = std::fabs(x) > radius;
  const double xc = projected ? x * (radius / std::fabs(x)) : x;
  return {xc + delta * model.drift1(t, xc) + model.diffusion1(t, xc) * dw,
          projected};
}

// --- vector one-step maps (explicit schemes only) ---

inline void step_em(const Model& model, StateView x, double t, double delta,
                    std::span<const double> dw, StateOut out,
                    std::vector<double>& work) {
  const int d = model.dim_state;
  work.resize(static_cast<std::size_t>(d));
  model.drift(t, x, work);
  for (int k = 0; k < d; ++k) out[k] = x[k] + delta * work[k];
  for (int r = 0; r < model.dim_noise; ++r) {
    model.diffusion(t, x, r, work);
    for (int k = 0; k < d; ++k) out[k] += work[k] * dw[static_cast<std::size_t>(r)];
  }
}

inline bool step_pem(const Model& model, StateView x, double t, double delta,
                     std::span<const double> dw, StateOut out,
                     std::vector<double>& proj, std::vector<double>& work) {
  const int d = model.dim_state;
  proj.resize(static_cast<std::size_t>(d));
  double norm = 0.0;
  for (double c : x) norm += c * c;
  norm = std::sqrt(norm);
  const double radius = std::pow(delta, -model.alpha);
  const bool projected = norm > radius;
  const double scale = projected ? radius / norm : 1.0;
  for (int k = 0; k < d; ++k) proj[static_cast<std::size_t>(k)] = x[k] * scale;
  step_em(model, proj, t, delta, dw, out, work);
  return projected;
}

// Grid function produced by one integration run. Values are stored flat
// with stride dim; projection_events is populated for PEM only and marks
// steps whose incoming state exceeded the threshold.
struct GridFunction {
  SchemeId scheme = SchemeId::EM;
  int dim = 1;
  std::vector<double> values;            // (N+1) * dim
  std::vector<std::uint8_t> projection_events;

  StateView at(std::size_t n) const {
    return {values.data() + n * static_cast<std::size_t>(dim),
            static_cast<std::size_t>(dim)};
  }

  double terminal() const { return values[values.size() - static_cast<std::size_t>(dim)]; }

  bool any_projection() const {
    for (auto e : projection_events)
      if (e) return true;
    return false;
  }
};

inline void check_scheme_grid(SchemeId scheme, const Model& model,
                              const TimeGrid& grid) {
  const double hmax = grid.max_step();
  if (is_implicit(scheme)) {
    if (hmax * model.one_sided_L >= 1.0)
      throw StepSizeError("implicit scheme requires |h| * L < 1");
  } else if (hmax > 1.0) {
    throw StepSizeError("explicit scheme requires |h| <= 1");
  }
}

// Iterates the chosen one-step map from the model's initial value over the
// grid, driven by increments aligned with the grid (m x N, row per channel).
inline GridFunction integrate(SchemeId scheme, const Model& model,
                              const TimeGrid& grid,
                              std::span<const double> increments) {
  const std::size_t n = grid.num_steps();
  const int d = model.dim_state;
  const int m = model.dim_noise;
  if (increments.size() != static_cast<std::size_t>(m) * n)
    throw std::invalid_argument("integrate: increments misaligned with grid");
  check_scheme_grid(scheme, model, grid);
  if (is_implicit(scheme) && !model.scalar())
    throw std::invalid_argument("integrate: implicit schemes support d = 1 only");

  GridFunction out;
  out.scheme = scheme;
  out.dim = d;
  out.values.resize((n + 1) * static_cast<std::size_t>(d));
  if (scheme == SchemeId::PEM) out.projection_events.assign(n, 0);

  if (model.scalar()) {
    double x = model.initial_value[0];
    out.values[0] = x;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = grid.points[i];
      const double h = grid.steps[i];
      const double dw = increments[i];
      switch (scheme) {
        case SchemeId::EM: x = step_em(model, x, t, h, dw); break;
        case SchemeId::SSBE: x = step_ssbe(model, x, t, h, dw); break;
        case SchemeId::BEM: x = step_bem(model, x, t, h, dw); break;
        case SchemeId::PEM: {
          const PemStep s = step_pem(model, x, t, h, dw);
          x = s.x;
          out.projection_events[i] = s.projected ? 1 : 0;
          break;
        }
      }
      if (!std::isfinite(x)) throw OverflowError(i + 1);
      out.values[i + 1] = x;
    }
    return out;
  }

  std::vector<double> x(model.initial_value), next(static_cast<std::size_t>(d));
  std::vector<double> dw(static_cast<std::size_t>(m)), proj, work;
  for (int k = 0; k < d; ++k) out.values[static_cast<std::size_t>(k)] = x[static_cast<std::size_t>(k)];
  for (std::size_t i = 0; i < n; ++i) {
    const double t = grid.points[i];
    const double h = grid.steps[i];
    for (int r = 0; r < m; ++r)
      dw[static_cast<std::size_t>(r)] = increments[static_cast<std::size_t>(r) * n + i];
    if (scheme == SchemeId::EM) {
      step_em(model, x, t, h, dw, next, work);
    } else {
      out.projection_events[i] =
          step_pem(model, x, t, h, dw, next, proj, work) ? 1 : 0;
    }
    for (int k = 0; k < d; ++k) {
      if (!std::isfinite(next[static_cast<std::size_t>(k)])) throw OverflowError(i + 1);
      out.values[(i + 1) * static_cast<std::size_t>(d) + static_cast<std::size_t>(k)] =
          next[static_cast<std::size_t>(k)];
    }
    std::swap(x, next);
  }
  return out;
}

}  // namespace msde
