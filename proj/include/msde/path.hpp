#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "msde/grid.hpp"
#include "msde/rng.hpp"

namespace msde {

// Brownian increments of m independent channels on a fine uniform dyadic
// grid with step 2^-level. Channel r, slot j holds W^r(t_{j+1}) - W^r(t_j).
struct BrownianPath {
  int level = 0;
  double horizon = 0.0;
  int channels = 0;
  std::size_t n_fine = 0;
  std::vector<double> increments;  // channels * n_fine, row per channel

  std::span<const double> channel(int r) const {
    return {increments.data() + static_cast<std::size_t>(r) * n_fine, n_fine};
  }

  double fine_step() const { return std::ldexp(1.0, -level); }

  double terminal_value(int r) const {
    double w = 0.0;
    for (double dw : channel(r)) w += dw;
    return w;
  }
};

// Deterministic function of (master_seed, sample_index, channel, slot); any
// two distinct sample indices draw from disjoint counter streams.
inline BrownianPath generate_path(std::uint64_t master_seed,
                                  std::uint64_t sample_index, int channels,
                                  int level, double horizon) {
  if (channels < 1) throw std::invalid_argument("generate_path: channels < 1");
  const TimeGrid fine = TimeGrid::uniform_dyadic(level, horizon);
  BrownianPath path;
  path.level = level;
  path.horizon = horizon;
  path.channels = channels;
  path.n_fine = fine.num_steps();
  path.increments.resize(static_cast<std::size_t>(channels) * path.n_fine);
  const double scale = std::sqrt(path.fine_step());
  for (int r = 0; r < channels; ++r) {
    double* row = path.increments.data() + static_cast<std::size_t>(r) * path.n_fine;
    for (std::size_t j = 0; j < path.n_fine; ++j)
      row[j] = scale * rng::normal(master_seed, sample_index,
                                   static_cast<std::uint64_t>(r), 1, j);
  }
  return path;
}

// One dyadic refinement step: adjacent pairs are summed, so level-(k-1)
// increments are exact pairwise sums of level-k increments.
inline std::vector<double> halve_increments(std::span<const double> fine,
                                            int channels) {
  const std::size_t n = fine.size() / static_cast<std::size_t>(channels);
  if (n % 2 != 0)
    throw std::invalid_argument("halve_increments: odd slot count");
  std::vector<double> out(fine.size() / 2);
  for (int r = 0; r < channels; ++r) {
    const double* src = fine.data() + static_cast<std::size_t>(r) * n;
    double* dst = out.data() + static_cast<std::size_t>(r) * (n / 2);
    for (std::size_t j = 0; j < n / 2; ++j) dst[j] = src[2 * j] + src[2 * j + 1];
  }
  return out;
}

// Coarsen to the uniform dyadic grid with step 2^-level by successive
// halving. The cascade makes increments bit-exactly consistent across
// levels: pairwise sums at level k reproduce level k-1 exactly.
inline std::vector<double> coarsen_to_level(const BrownianPath& path,
                                            int level) {
  if (level > path.level)
    throw std::invalid_argument("coarsen_to_level: target finer than path");
  std::vector<double> current(path.increments);
  for (int k = path.level; k > level; --k)
    current = halve_increments(current, path.channels);
  return current;
}

// Coarsen onto an arbitrary grid whose points all lie on the fine lattice.
// Each coarse increment is the fixed-order (left to right) sum of the fine
// increments it spans; uniform dyadic targets go through the cascade.
inline std::vector<double> coarsen(const BrownianPath& path,
                                   const TimeGrid& coarse) {
  if (coarse.horizon != path.horizon)
    throw std::invalid_argument("coarsen: horizon mismatch");
  const double fine_h = path.fine_step();
  // Uniform dyadic fast path.
  {
    const double h0 = coarse.steps.front();
    bool uniform = true;
    for (double h : coarse.steps)
      if (h != h0) { uniform = false; break; }
    if (uniform) {
      const int lvl = static_cast<int>(std::lround(-std::log2(h0)));
      if (lvl >= 1 && lvl <= path.level && std::ldexp(1.0, -lvl) == h0 &&
          static_cast<double>(coarse.num_steps()) * h0 == coarse.horizon)
        return coarsen_to_level(path, lvl);
    }
  }
  const std::size_t n_coarse = coarse.num_steps();
  std::vector<std::size_t> idx(n_coarse + 1);
  for (std::size_t i = 0; i <= n_coarse; ++i) {
    const double pos = coarse.points[i] / fine_h;
    const auto j = static_cast<long long>(std::llround(pos));
    if (j < 0 || static_cast<double>(j) != pos)
      throw std::invalid_argument("coarsen: grid point off the fine lattice");
    idx[i] = static_cast<std::size_t>(j);
  }
  std::vector<double> out(static_cast<std::size_t>(path.channels) * n_coarse);
  for (int r = 0; r < path.channels; ++r) {
    auto fine = path.channel(r);
    double* dst = out.data() + static_cast<std::size_t>(r) * n_coarse;
    for (std::size_t i = 0; i < n_coarse; ++i) {
      double s = 0.0;
      for (std::size_t j = idx[i]; j < idx[i + 1]; ++j) s += fine[j];
      dst[i] = s;
    }
  }
  return out;
}

}  // namespace msde
