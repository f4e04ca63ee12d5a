#pragma once

// Dynamic-programming alignment of square-root densities:
//   min_gamma ||sqrt(f1) - (sqrt(f2) o gamma) sqrt(gamma')||^2
//             + penalty * ||1 - sqrt(gamma')||^2
// over piecewise-linear monotone paths on a lattice.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "phasewarp/density_est.hpp"
#include "phasewarp/error.hpp"
#include "phasewarp/grid_fn.hpp"

namespace phasewarp {

struct DpOptions {
  double penalty = 0.01;
  /// Lattice nodes per axis; capped at the density grid size.
  std::size_t lattice = 201;
  /// Largest step in either direction; slopes are confined to
  /// [1/max_step, max_step].
  std::size_t max_step = 10;
};

namespace detail {

struct DpStep {
  int di;
  int dj;
};

inline std::vector<DpStep> dp_steps(std::size_t max_step) {
  std::vector<DpStep> steps;
  const int s = static_cast<int>(max_step);
  for (int di = 1; di <= s; ++di) {
    for (int dj = 1; dj <= s; ++dj) {
      if (std::gcd(di, dj) == 1) steps.push_back({di, dj});
    }
  }
  return steps;
}

}  // namespace detail

/// Warp gamma with f1 ~ (f2; gamma) minimizing the penalized L2 mismatch.
inline WarpingFunction dp_align(const DensityEstimate& f1, const DensityEstimate& f2,
                                const DpOptions& opt = {}) {
  if (!(opt.penalty >= 0.0)) throw InvalidArgument("dp_align: penalty must be >= 0");
  if (opt.lattice < 3 || opt.max_step < 1) throw InvalidArgument("dp_align: bad lattice");
  const std::size_t n = std::max(f1.size(), f2.size());
  const GridFunction q1 = map(resample(f1.pdf(), n), [](double x) { return std::sqrt(x); });
  const GridFunction q2 = map(resample(f2.pdf(), n), [](double x) { return std::sqrt(x); });
  const std::size_t m = std::min(opt.lattice, n);
  const double delta = 1.0 / static_cast<double>(m - 1);
  const double fine_per_lattice = static_cast<double>(n - 1) / static_cast<double>(m - 1);

  std::vector<double> q1_lat(m);
  for (std::size_t i = 0; i < m; ++i) q1_lat[i] = evaluate(q1, static_cast<double>(i) * delta);
  const auto q2v = q2.values();
  // q2 at lattice coordinate x (x in [0, m-1])
  auto q2_at = [&](double x) {
    const double pos = std::clamp(x * fine_per_lattice, 0.0, static_cast<double>(n - 1));
    const std::size_t k = std::min(static_cast<std::size_t>(pos), n - 2);
    const double w = pos - static_cast<double>(k);
    return q2v[k] + w * (q2v[k + 1] - q2v[k]);
  };

  const auto steps = detail::dp_steps(opt.max_step);
  // sqrt(slope) * q2 at lattice coordinate pj + slope * p, tabulated per
  // (step, p) for every start column pj.
  std::vector<std::size_t> offset(steps.size() + 1, 0);
  for (std::size_t s = 0; s < steps.size(); ++s) {
    offset[s + 1] = offset[s] + static_cast<std::size_t>(steps[s].di + 1) * m;
  }
  std::vector<double> q2_tab(offset.back());
  for (std::size_t s = 0; s < steps.size(); ++s) {
    const auto [di, dj] = steps[s];
    const double slope = static_cast<double>(dj) / static_cast<double>(di);
    const double root = std::sqrt(slope);
    for (int p = 0; p <= di; ++p) {
      double* row = q2_tab.data() + offset[s] + static_cast<std::size_t>(p) * m;
      for (std::size_t pj = 0; pj < m; ++pj) row[pj] = q2_at(static_cast<double>(pj) + slope * p) * root;
    }
  }
  std::vector<double> step_pen(steps.size());
  for (std::size_t s = 0; s < steps.size(); ++s) {
    const double root = std::sqrt(static_cast<double>(steps[s].dj) / static_cast<double>(steps[s].di));
    step_pen[s] = opt.penalty * (1.0 - root) * (1.0 - root) * static_cast<double>(steps[s].di);
  }

  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> energy(m * m, inf);
  std::vector<int> from(m * m, -1);
  auto at = [m](std::size_t i, std::size_t j) { return i * m + j; };
  energy[at(0, 0)] = 0.0;

  for (std::size_t i = 1; i < m; ++i) {
    for (std::size_t j = 1; j < m; ++j) {
      double best = inf;
      int best_step = -1;
      for (std::size_t s = 0; s < steps.size(); ++s) {
        const auto [di, dj] = steps[s];
        if (static_cast<std::size_t>(di) > i || static_cast<std::size_t>(dj) > j) continue;
        const std::size_t pi = i - static_cast<std::size_t>(di);
        const std::size_t pj = j - static_cast<std::size_t>(dj);
        const double prev = energy[at(pi, pj)];
        if (prev == inf) continue;
        const double* tab = q2_tab.data() + offset[s] + pj;
        double seg = 0.0;
        for (int p = 0; p <= di; ++p) {
          const double r = q1_lat[pi + static_cast<std::size_t>(p)] - tab[static_cast<std::size_t>(p) * m];
          const double w = (p == 0 || p == di) ? 0.5 : 1.0;
          seg += w * r * r;
        }
        const double total = prev + delta * (seg + step_pen[s]);
        if (total < best) {
          best = total;
          best_step = static_cast<int>(s);
        }
      }
      energy[at(i, j)] = best;
      from[at(i, j)] = best_step;
    }
  }
  if (from[at(m - 1, m - 1)] < 0) throw NumericalError("dp_align: no admissible path");

  // Walk back and fill the lattice warp along each straight segment.
  std::vector<double> lat(m, 0.0);
  std::size_t i = m - 1;
  std::size_t j = m - 1;
  lat[i] = 1.0;
  while (i > 0) {
    const auto [di, dj] = steps[static_cast<std::size_t>(from[at(i, j)])];
    const std::size_t pi = i - static_cast<std::size_t>(di);
    const std::size_t pj = j - static_cast<std::size_t>(dj);
    for (int p = 0; p < di; ++p) {
      const double y = static_cast<double>(pj) + static_cast<double>(dj) * p / di;
      lat[pi + static_cast<std::size_t>(p)] = y * delta;
    }
    i = pi;
    j = pj;
  }
  lat.front() = 0.0;
  lat.back() = 1.0;
  return WarpingFunction::project(resample(GridFunction(std::move(lat)), n));
}

}  // namespace phasewarp
