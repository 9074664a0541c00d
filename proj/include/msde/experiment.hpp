#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "msde/model.hpp"
#include "msde/path.hpp"
#include "msde/reference.hpp"
#include "msde/schemes.hpp"

namespace msde {

// Model selection by name plus a flat parameter map, as consumed by the CLI.
struct ModelSpec {
  std::string name = "gle";
  std::map<std::string, double> params;

  double param(const std::string& key, double fallback) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  }

  Model build() const {
    if (name == "gle")
      return make_gle(param("mu", 0.5), param("sigma", 1.0), param("x0", 2.0),
                      param("T", 1.0));
    if (name == "svm32")
      return make_svm32(param("lambda", 3.5), param("mu", 3.0),
                        param("sigma", 1.0), param("x0", 5.0), param("T", 1.0));
    if (name == "gbm")
      return make_gbm(param("mu", 0.05), param("sigma", 0.2), param("x0", 1.0),
                      param("T", 1.0));
    throw std::invalid_argument("unknown model: " + name);
  }

  ReferenceSpec default_reference() const {
    ReferenceSpec ref;
    if (name == "gle") {
      ref.kind = ReferenceSpec::Kind::gle_exact;
      ref.quad_level = 12;
    } else if (name == "gbm") {
      ref.kind = ReferenceSpec::Kind::gbm_exact;
    } else {
      ref.kind = ReferenceSpec::Kind::numeric_fine;
      ref.fine_scheme = SchemeId::BEM;
      ref.fine_level = 14;
    }
    return ref;
  }
};

struct ExperimentConfig {
  ModelSpec model;
  std::vector<SchemeId> schemes{SchemeId::SSBE, SchemeId::BEM, SchemeId::PEM};
  std::vector<int> levels{6, 7, 8, 9, 10, 11};  // h = 2^-level
  std::size_t samples = 10000;
  std::uint64_t master_seed = 42;
  std::optional<ReferenceSpec> reference;  // model default when absent
  std::optional<double> alpha_override;
  int workers = 1;
};

struct CellResult {
  SchemeId scheme{};
  int level = 0;
  double h = 0.0;
  double error = 0.0;
  double mc_std_error = 0.0;
  std::optional<double> eoc;
  double proj_fraction = 0.0;
  std::size_t proj_total = 0;       // samples with at least one projection
  std::size_t proj_events = 0;      // individual projected steps
  std::size_t overflow_count = 0;
};

struct ErrorReport {
  ExperimentConfig config;
  std::vector<CellResult> cells;  // scheme-major, levels ascending
  std::map<SchemeId, double> fitted_slopes;

  const CellResult& cell(SchemeId s, int level) const {
    for (const auto& c : cells)
      if (c.scheme == s && c.level == level) return c;
    throw std::out_of_range("no such cell");
  }
};

// Pairwise experimental orders of convergence from (h, error) pairs; the
// first level has no predecessor, nonpositive errors yield NaN entries.
inline std::vector<double> eoc(std::span<const std::pair<double, double>> pts) {
  if (pts.size() < 2) throw std::invalid_argument("eoc: need >= 2 levels");
  std::vector<double> out;
  out.reserve(pts.size() - 1);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const auto& [h0, e0] = pts[i - 1];
    const auto& [h1, e1] = pts[i];
    if (e0 > 0.0 && e1 > 0.0)
      out.push_back((std::log(e1) - std::log(e0)) / (std::log(h1) - std::log(h0)));
    else
      out.push_back(std::numeric_limits<double>::quiet_NaN());
  }
  return out;
}

// Ordinary least-squares slope of log(error) against log(h).
inline double fit_order(std::span<const std::pair<double, double>> pts) {
  std::size_t n = 0;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& [h, e] : pts) {
    if (!(e > 0.0) || !std::isfinite(e)) continue;
    const double x = std::log(h), y = std::log(e);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
    ++n;
  }
  if (n < 2) throw std::invalid_argument("fit_order: need >= 2 positive points");
  const double denom = static_cast<double>(n) * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("fit_order: degenerate abscissae");
  return (static_cast<double>(n) * sxy - sx * sy) / denom;
}

struct ProjectionStats {
  double fraction = 0.0;
  std::size_t total = 0;
};

inline ProjectionStats projection_stats(std::span<const GridFunction> runs) {
  ProjectionStats stats;
  for (const auto& gf : runs)
    if (gf.any_projection()) ++stats.total;
  if (!runs.empty())
    stats.fraction = static_cast<double>(stats.total) / static_cast<double>(runs.size());
  return stats;
}

namespace detail {

struct CellAccum {
  double sum2 = 0.0;   // squared terminal gaps
  double sum4 = 0.0;   // fourth powers, for the delta-method standard error
  std::size_t proj_samples = 0;
  std::size_t proj_events = 0;
  std::size_t overflow = 0;

  void merge(const CellAccum& o) {
    sum2 += o.sum2;
    sum4 += o.sum4;
    proj_samples += o.proj_samples;
    proj_events += o.proj_events;
    overflow += o.overflow;
  }
};

inline int master_level(const ExperimentConfig& cfg, const ReferenceSpec& ref) {
  int k = 1;
  for (int lvl : cfg.levels) k = std::max(k, lvl);
  if (ref.kind == ReferenceSpec::Kind::gle_exact) k = std::max(k, ref.quad_level);
  if (ref.kind == ReferenceSpec::Kind::numeric_fine) k = std::max(k, ref.fine_level);
  return k;
}

}  // namespace detail

// Monte Carlo strong-error table. Every scheme and every level consumes
// coarsenings of the same per-sample fine path, and the reference shares
// that path, so each squared gap is a genuine pathwise coupling.
//
// Samples are processed in fixed blocks of 64; partial sums are merged in
// block order, so the report is byte-identical for any worker count.
inline ErrorReport run_experiment(const ExperimentConfig& cfg) {
  if (cfg.samples < 1) throw std::invalid_argument("run_experiment: no samples");
  if (cfg.schemes.empty()) throw std::invalid_argument("run_experiment: no schemes");
  if (cfg.levels.empty()) throw std::invalid_argument("run_experiment: no levels");

  Model model = cfg.model.build();
  if (cfg.alpha_override) model.alpha = *cfg.alpha_override;
  const ReferenceSpec ref = cfg.reference.value_or(cfg.model.default_reference());
  const int k_master = detail::master_level(cfg, ref);
  const double mu = cfg.model.param("mu", model.name == "gle" ? 0.5 : 0.05);
  const double sigma = cfg.model.param("sigma", model.name == "gle" ? 1.0 : 0.2);
  const double x0 = model.initial_value[0];

  std::vector<int> levels = cfg.levels;
  std::sort(levels.begin(), levels.end());
  std::vector<TimeGrid> grids;
  grids.reserve(levels.size());
  for (int lvl : levels) {
    TimeGrid g = TimeGrid::uniform_dyadic(lvl, model.horizon);
    for (SchemeId s : cfg.schemes) check_scheme_grid(s, model, g);
    grids.push_back(std::move(g));
  }

  const std::size_t n_cells = cfg.schemes.size() * levels.size();
  constexpr std::size_t block_size = 64;
  const std::size_t n_blocks = (cfg.samples + block_size - 1) / block_size;
  std::vector<std::vector<detail::CellAccum>> blocks(
      n_blocks, std::vector<detail::CellAccum>(n_cells));

  auto run_block = [&](std::size_t b) {
    auto& acc = blocks[b];
    const std::size_t lo = b * block_size;
    const std::size_t hi = std::min(lo + block_size, cfg.samples);
    for (std::size_t i = lo; i < hi; ++i) {
      const BrownianPath path =
          generate_path(cfg.master_seed, i, model.dim_noise, k_master, model.horizon);
      const double ref_value = reference_at_T(path, model, ref, mu, sigma, x0);
      // One halving cascade serves every requested level.
      std::vector<std::vector<double>> per_level(levels.size());
      {
        std::vector<double> current(path.increments);
        int cur_level = path.level;
        for (std::size_t li = levels.size(); li-- > 0;) {
          while (cur_level > levels[li]) {
            current = halve_increments(current, model.dim_noise);
            --cur_level;
          }
          per_level[li] = current;
        }
      }
      for (std::size_t si = 0; si < cfg.schemes.size(); ++si) {
        for (std::size_t li = 0; li < levels.size(); ++li) {
          auto& cell = acc[si * levels.size() + li];
          try {
            const GridFunction gf =
                integrate(cfg.schemes[si], model, grids[li], per_level[li]);
            const double gap = gf.terminal() - ref_value;
            const double g2 = gap * gap;
            cell.sum2 += g2;
            cell.sum4 += g2 * g2;
            if (cfg.schemes[si] == SchemeId::PEM) {
              if (gf.any_projection()) ++cell.proj_samples;
              for (auto e : gf.projection_events) cell.proj_events += e;
            }
          } catch (const OverflowError&) {
            ++cell.overflow;
          }
        }
      }
    }
  };

  const int workers = std::max(1, cfg.workers);
  if (workers == 1) {
    for (std::size_t b = 0; b < n_blocks; ++b) run_block(b);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t b = next.fetch_add(1); b < n_blocks; b = next.fetch_add(1))
          run_block(b);
      });
    for (auto& th : pool) th.join();
  }

  std::vector<detail::CellAccum> total(n_cells);
  for (const auto& blk : blocks)
    for (std::size_t c = 0; c < n_cells; ++c) total[c].merge(blk[c]);

  ErrorReport report;
  report.config = cfg;
  report.config.levels = levels;
  const auto m = static_cast<double>(cfg.samples);
  for (std::size_t si = 0; si < cfg.schemes.size(); ++si) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t li = 0; li < levels.size(); ++li) {
      const auto& acc = total[si * levels.size() + li];
      CellResult cell;
      cell.scheme = cfg.schemes[si];
      cell.level = levels[li];
      cell.h = std::ldexp(1.0, -levels[li]);
      if (acc.overflow > 0) {
        cell.error = std::numeric_limits<double>::quiet_NaN();
        cell.mc_std_error = std::numeric_limits<double>::quiet_NaN();
      } else {
        const double mean2 = acc.sum2 / m;
        cell.error = std::sqrt(mean2);
        if (cfg.samples > 1 && mean2 > 0.0) {
          const double var2 =
              std::max(0.0, (acc.sum4 - acc.sum2 * acc.sum2 / m) / (m - 1.0));
          cell.mc_std_error = std::sqrt(var2 / m) / (2.0 * cell.error);
        }
      }
      cell.proj_total = acc.proj_samples;
      cell.proj_events = acc.proj_events;
      cell.proj_fraction = static_cast<double>(acc.proj_samples) / m;
      cell.overflow_count = acc.overflow;
      pts.emplace_back(cell.h, cell.error);
      report.cells.push_back(cell);
    }
    if (pts.size() >= 2) {
      const std::vector<double> orders = eoc(pts);
      for (std::size_t li = 1; li < levels.size(); ++li) {
        auto& cell = report.cells[report.cells.size() - levels.size() + li];
        if (std::isfinite(orders[li - 1])) cell.eoc = orders[li - 1];
      }
      bool fittable = true;
      for (const auto& [h, e] : pts)
        if (!(e > 0.0) || !std::isfinite(e)) fittable = false;
      if (fittable)
        report.fitted_slopes[cfg.schemes[si]] = fit_order(pts);
    }
  }
  return report;
}

// Single-cell strong error; convenience wrapper over the full run.
inline std::pair<double, double> strong_error(SchemeId scheme,
                                              const ModelSpec& model, int level,
                                              std::size_t samples,
                                              std::uint64_t master_seed,
                                              std::optional<ReferenceSpec> ref = {}) {
  ExperimentConfig cfg;
  cfg.model = model;
  cfg.schemes = {scheme};
  cfg.levels = {level};
  cfg.samples = samples;
  cfg.master_seed = master_seed;
  cfg.reference = ref;
  const ErrorReport rep = run_experiment(cfg);
  return {rep.cells.front().error, rep.cells.front().mc_std_error};
}

}  // namespace msde
