#pragma once

// Karcher means of densities under the extrinsic phase distance, the
// extension to densities with flat (zero) regions, and the baseline means
// used for comparison.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "phasewarp/density_est.hpp"
#include "phasewarp/dp_align.hpp"
#include "phasewarp/error.hpp"
#include "phasewarp/grid_fn.hpp"
#include "phasewarp/parallel.hpp"
#include "phasewarp/phase_metrics.hpp"
#include "phasewarp/warping.hpp"

namespace phasewarp {

enum class AlignmentMethod { closed_form, dynamic_programming };

inline std::string to_string(AlignmentMethod a) {
  return a == AlignmentMethod::dynamic_programming ? "dynamic_programming" : "closed_form";
}

struct KarcherOptions {
  /// Which input serves as the template f_0.
  std::size_t template_index = 0;
  AlignmentMethod alignment = AlignmentMethod::closed_form;
  DpOptions dp{};
  std::size_t jobs = 1;
};

struct KarcherResult {
  DensityEstimate mean;
  /// gamma*_i with F_i = F_0 o gamma*_i.
  std::vector<WarpingFunction> warps;
  /// Karcher mean of the inverse warps {gamma*_i^{-1}}.
  WarpingFunction mean_warp;
};

namespace detail {

inline std::size_t common_size(std::span<const DensityEstimate> fs) {
  std::size_t n = 0;
  for (const auto& f : fs) n = std::max(n, f.size());
  return n;
}

inline std::vector<DensityEstimate> resample_all(std::span<const DensityEstimate> fs,
                                                 std::size_t n) {
  std::vector<DensityEstimate> out;
  out.reserve(fs.size());
  for (const auto& f : fs) out.push_back(f.resampled(n));
  return out;
}

/// Final step shared by both paths: f = (f_0 o gbar^{-1}) (gbar^{-1})'.
inline KarcherResult pull_template(const DensityEstimate& f0, std::vector<WarpingFunction> warps,
                                   std::vector<WarpingFunction> inverses) {
  WarpingFunction mean_warp = karcher_mean_warps(inverses);
  const GridFunction pdf = act_area(f0.pdf(), invert_monotone(mean_warp));
  return KarcherResult{DensityEstimate::from_pdf(pdf), std::move(warps), std::move(mean_warp)};
}

}  // namespace detail

namespace detail {

/// Piecewise-linear interpolation of node values at x in [0, 1].
inline double interpolate_nodes(std::span<const double> v, double x) {
  const std::size_t n = v.size();
  const double p = std::clamp(x, 0.0, 1.0) * static_cast<double>(n - 1);
  const std::size_t k = std::min(n - 2, static_cast<std::size_t>(p));
  return v[k] + (p - static_cast<double>(k)) * (v[k + 1] - v[k]);
}

/// Density whose CDF takes the node values `cdf`; node pdf is the average of
/// the adjacent cell slopes.
inline DensityEstimate density_from_cdf(std::span<const double> cdf) {
  const std::size_t n = cdf.size();
  const double inv_dt = static_cast<double>(n - 1);
  std::vector<double> p(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double left = k > 0 ? (cdf[k] - cdf[k - 1]) * inv_dt : 0.0;
    const double right = k + 1 < n ? (cdf[k + 1] - cdf[k]) * inv_dt : 0.0;
    p[k] = k == 0 ? right : (k + 1 == n ? left : 0.5 * (left + right));
  }
  return DensityEstimate::from_pdf(GridFunction(std::move(p)));
}

struct ClosedFormMean {
  WarpingFunction mean_warp;
  DensityEstimate mean;
};

/// Steps 2-4 with the closed-form warps. The inverse warps
/// F_i^{-1} o F_0 are exactly piecewise linear between the template nodes and
/// the template pre-images F_0^{-1}(F_i(t_k)) of every input's nodes; the
/// SRVF mean, its inverse and the pull-back are evaluated on that union, and
/// only the results are sampled on the grid.
inline ClosedFormMean closed_form_mean(std::span<const DensityEstimate> f, std::size_t j) {
  const std::size_t n = f[j].size();
  const auto c0 = f[j].cdf().values();
  std::vector<double> t;
  t.reserve(n * f.size());
  for (std::size_t k = 0; k < n; ++k) t.push_back(GridFunction::node(k, n));
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (i == j) continue;
    const auto ci = f[i].cdf().values();
    for (std::size_t k = 1; k + 1 < n; ++k) t.push_back(invert_at(c0, ci[k], 0, n - 1));
  }
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  const std::size_t m = t.size();

  // sum_i sqrt(d(gamma_i^{-1}) / dt) per segment
  std::vector<double> q(m - 1, 0.0);
  std::vector<double> levels(m);
  for (std::size_t s = 0; s < m; ++s) levels[s] = interpolate_nodes(c0, t[s]);
  for (const auto& fi : f) {
    const auto ci = fi.cdf().values();
    double prev = 0.0;
    for (std::size_t s = 1; s < m; ++s) {
      const double cur = s + 1 == m ? 1.0 : invert_at(ci, levels[s], 0, n - 1);
      const double dt = t[s] - t[s - 1];
      if (dt > 0.0) q[s - 1] += std::sqrt(std::max(0.0, cur - prev) / dt);
      prev = cur;
    }
  }
  // gbar from the normalized SRVF mean; the normalization cancels here
  std::vector<double> g(m, 0.0);
  for (std::size_t s = 1; s < m; ++s) g[s] = g[s - 1] + q[s - 1] * q[s - 1] * (t[s] - t[s - 1]);
  const double total = g.back();
  for (double& x : g) x /= total;

  std::vector<double> mean_warp(n);
  std::vector<double> cdf(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double x = GridFunction::node(k, n);
    // gbar(x), segment by segment
    auto it = std::upper_bound(t.begin(), t.end(), x);
    std::size_t s = std::clamp<std::size_t>(static_cast<std::size_t>(it - t.begin()), 1, m - 1);
    double w = t[s] > t[s - 1] ? (x - t[s - 1]) / (t[s] - t[s - 1]) : 1.0;
    mean_warp[k] = g[s - 1] + std::clamp(w, 0.0, 1.0) * (g[s] - g[s - 1]);
    // F_0(gbar^{-1}(x))
    it = std::lower_bound(g.begin(), g.end(), x);
    s = std::clamp<std::size_t>(static_cast<std::size_t>(it - g.begin()), 1, m - 1);
    const double rise = g[s] - g[s - 1];
    w = rise > 0.0 ? (x - g[s - 1]) / rise : 1.0;
    cdf[k] = interpolate_nodes(c0, t[s - 1] + std::clamp(w, 0.0, 1.0) * (t[s] - t[s - 1]));
  }
  mean_warp.front() = 0.0;
  mean_warp.back() = 1.0;
  cdf.front() = 0.0;
  cdf.back() = 1.0;
  return ClosedFormMean{WarpingFunction::project(GridFunction(std::move(mean_warp))),
                        density_from_cdf(cdf)};
}

}  // namespace detail

/// Karcher mean of strictly positive densities:
///  1. f_0 = f_j
///  2. gamma*_i = F_0^{-1} o F_i (or a DP alignment)
///  3. gbar = closed-form mean of {gamma*_i^{-1}}
///  4. f = (f_0; gbar^{-1})
inline KarcherResult karcher_align(std::span<const DensityEstimate> fs,
                                   const KarcherOptions& opt = {}) {
  if (fs.empty()) throw InvalidArgument("karcher_mean_densities: empty list");
  if (opt.template_index >= fs.size()) throw InvalidArgument("template index out of range");
  for (std::size_t i = 0; i < fs.size(); ++i) {
    if (!fs[i].strictly_positive()) {
      throw InvalidArgument("karcher_mean_densities: member " + std::to_string(i) +
                            " is not strictly positive");
    }
  }
  const std::vector<DensityEstimate> f = detail::resample_all(fs, detail::common_size(fs));
  const DensityEstimate& f0 = f[opt.template_index];
  if (f.size() == 1) {
    return KarcherResult{f0, {WarpingFunction::identity(f0.size())},
                         WarpingFunction::identity(f0.size())};
  }

  std::vector<std::optional<WarpingFunction>> warps(f.size());
  std::vector<std::optional<WarpingFunction>> inverses(f.size());
  const bool dp = opt.alignment == AlignmentMethod::dynamic_programming;
  parallel_for(f.size(), opt.jobs, [&](std::size_t i) {
    if (!dp) {
      warps[i] = optimal_warp(f[i], f0);
    } else {
      warps[i] = dp_align(f[i], f0, opt.dp);
      inverses[i] = invert_monotone(*warps[i]);
    }
  });
  std::vector<WarpingFunction> w;
  for (auto& g : warps) w.push_back(std::move(*g));
  if (!dp) {
    auto cf = detail::closed_form_mean(f, opt.template_index);
    return KarcherResult{std::move(cf.mean), std::move(w), std::move(cf.mean_warp)};
  }
  std::vector<WarpingFunction> inv;
  for (auto& g : inverses) inv.push_back(std::move(*g));
  return detail::pull_template(f0, std::move(w), std::move(inv));
}

inline DensityEstimate karcher_mean_densities(std::span<const DensityEstimate> fs,
                                              const KarcherOptions& opt = {}) {
  return karcher_align(fs, opt).mean;
}

/// sum_i d_ext(mu, f_i)^2
inline double karcher_objective(const DensityEstimate& mu, std::span<const DensityEstimate> fs) {
  double total = 0.0;
  for (const auto& f : fs) {
    const double d = d_ext(mu, f);
    total += d * d;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Nonnegative densities

inline constexpr double kFlatThreshold = 1e-4;
inline constexpr double kPlateauLevelTolerance = 1e-3;

/// Closed node range [first, last] over which a CDF is constant.
struct FlatInterval {
  std::size_t first = 0;
  std::size_t last = 0;
  double begin = 0.0;
  double end = 0.0;
  /// CDF value on the plateau.
  double level = 0.0;

  std::size_t length() const noexcept { return last - first; }
};

struct FlatStructure {
  std::vector<FlatInterval> intervals;

  std::size_t count() const noexcept { return intervals.size(); }
};

/// Maximal runs of nodes with pdf < eps_flat * max(pdf); runs at most two
/// cells apart are merged and single-node runs dropped.
inline FlatStructure detect_flats(const DensityEstimate& d, double eps_flat = kFlatThreshold) {
  const GridFunction& p = d.pdf();
  const std::size_t n = p.size();
  const double threshold = eps_flat * p.max();
  std::vector<std::pair<std::size_t, std::size_t>> runs;
  for (std::size_t k = 0; k < n; ++k) {
    if (!(p[k] < threshold)) continue;
    if (!runs.empty() && k - runs.back().second <= 2) {
      runs.back().second = k;
    } else {
      runs.emplace_back(k, k);
    }
  }
  FlatStructure out;
  for (const auto& [a, b] : runs) {
    if (b <= a) continue;
    out.intervals.push_back(FlatInterval{a, b, p.node(a), p.node(b), d.cdf()[a]});
  }
  return out;
}

/// Keeps the `k` longest intervals in their original order. Used to drop
/// short spurious flats that kernel noise introduces.
inline FlatStructure snap_flats(const FlatStructure& s, std::size_t k) {
  if (s.count() <= k) return s;
  std::vector<std::size_t> order(s.count());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return s.intervals[a].length() > s.intervals[b].length();
  });
  order.resize(k);
  std::sort(order.begin(), order.end());
  FlatStructure out;
  for (std::size_t i : order) out.intervals.push_back(s.intervals[i]);
  return out;
}

struct NonnegAlignment {
  WarpingFunction gamma_star;
  double distance_D;
};

/// gamma* in Gamma_{h,g} (H = G o gamma) minimizing ||1 - sqrt(gamma')||:
/// G_k^{-1} o H on the increasing segments, linear across flats.
inline NonnegAlignment optimal_warp_nonneg(const DensityEstimate& h, const DensityEstimate& g,
                                           const FlatStructure& flats_h,
                                           const FlatStructure& flats_g,
                                           double eps_level = kPlateauLevelTolerance) {
  if (h.size() != g.size()) {
    const std::size_t n = std::max(h.size(), g.size());
    const DensityEstimate hn = h.resampled(n);
    const DensityEstimate gn = g.resampled(n);
    return optimal_warp_nonneg(hn, gn, detect_flats(hn), detect_flats(gn), eps_level);
  }
  const std::size_t n = h.size();
  const std::size_t flats = flats_h.count();
  if (flats != flats_g.count()) {
    throw PlateauMismatch("flat counts differ: " + std::to_string(flats) + " vs " +
                              std::to_string(flats_g.count()) +
                              "; the densities are not warps of each other",
                          std::min(flats, flats_g.count()));
  }
  for (std::size_t k = 0; k < flats; ++k) {
    const double lh = flats_h.intervals[k].level;
    const double lg = flats_g.intervals[k].level;
    if (std::abs(lh - lg) > eps_level) {
      throw PlateauMismatch("plateau " + std::to_string(k) + " levels differ (" +
                                std::to_string(lh) + " vs " + std::to_string(lg) +
                                "); the densities are not warps of each other",
                            k);
    }
  }

  const auto hc = h.cdf().values();
  const auto gc = g.cdf().values();
  const double eps = 2.0 * monotone_floor(n);
  std::vector<double> v(n, 0.0);
  v.back() = 1.0;

  // Segment s runs from the end of flat s-1 (or node 0) to the start of flat
  // s (or node n-1), on both the source and the target.
  for (std::size_t s = 0; s <= flats; ++s) {
    const std::size_t src_lo = s == 0 ? 0 : flats_h.intervals[s - 1].last;
    const std::size_t src_hi = s == flats ? n - 1 : flats_h.intervals[s].first;
    const std::size_t tgt_lo = s == 0 ? 0 : flats_g.intervals[s - 1].last;
    const std::size_t tgt_hi = s == flats ? n - 1 : flats_g.intervals[s].first;
    const double y_lo = GridFunction::node(tgt_lo, n);
    const double y_hi = GridFunction::node(tgt_hi, n);
    if (src_hi <= src_lo) continue;
    v[src_lo] = y_lo;
    v[src_hi] = y_hi;
    for (std::size_t k = src_lo + 1; k < src_hi; ++k) {
      v[k] = std::clamp(detail::invert_at(gc, hc[k], tgt_lo, tgt_hi), y_lo, y_hi);
    }
    // strict monotonicity inside the segment, anchors untouched
    for (std::size_t k = src_lo + 1; k < src_hi; ++k) v[k] = std::max(v[k], v[k - 1] + eps);
    for (std::size_t k = src_hi - 1; k > src_lo; --k) v[k] = std::min(v[k], v[k + 1] - eps);
  }
  for (std::size_t k = 0; k < flats; ++k) {
    const auto& a = flats_h.intervals[k];
    const auto& c = flats_g.intervals[k];
    const double slope = (c.end - c.begin) / (a.end - a.begin);
    for (std::size_t i = a.first; i <= a.last; ++i) {
      v[i] = c.begin + slope * (GridFunction::node(i, n) - a.begin);
    }
    v[a.last] = c.end;
  }
  v.front() = 0.0;
  v.back() = 1.0;

  GridFunction base(std::move(v));
  WarpingFunction gamma = [&] {
    try {
      return WarpingFunction(base);
    } catch (const NumericalError&) {
      return WarpingFunction::project(base);
    }
  }();
  const double dist =
      flats == 0
          ? std::sqrt(std::max(0.0, 2.0 - 2.0 * detail::cdf_sqrt_velocity_integral(hc, gc)))
          : warp_distance_ext(gamma);
  return NonnegAlignment{std::move(gamma), dist};
}

inline NonnegAlignment optimal_warp_nonneg(const DensityEstimate& h, const DensityEstimate& g) {
  const std::size_t n = std::max(h.size(), g.size());
  const DensityEstimate hn = h.resampled(n);
  const DensityEstimate gn = g.resampled(n);
  return optimal_warp_nonneg(hn, gn, detect_flats(hn), detect_flats(gn));
}

/// Max deviation of gamma from the straight line across each source flat.
inline double flat_linearity_residual(const WarpingFunction& gamma, const FlatStructure& src,
                                      const FlatStructure& tgt) {
  double worst = 0.0;
  const std::size_t n = gamma.size();
  for (std::size_t k = 0; k < std::min(src.count(), tgt.count()); ++k) {
    const auto& a = src.intervals[k];
    const auto& c = tgt.intervals[k];
    const double slope = (c.end - c.begin) / (a.end - a.begin);
    for (std::size_t i = a.first; i <= a.last; ++i) {
      const double line = c.begin + slope * (GridFunction::node(i, n) - a.begin);
      worst = std::max(worst, std::abs(gamma[i] - line));
    }
  }
  return worst;
}

/// Algorithm 1 with the pairwise warps replaced by the flat-aware optimum.
/// Members whose flat count exceeds the modal count are snapped to it by
/// dropping their shortest flats; fewer flats than the mode is a mismatch.
inline KarcherResult karcher_align_nonneg(std::span<const DensityEstimate> fs,
                                          const KarcherOptions& opt = {}) {
  if (fs.empty()) throw InvalidArgument("karcher_mean_nonneg: empty list");
  if (opt.template_index >= fs.size()) throw InvalidArgument("template index out of range");
  const std::vector<DensityEstimate> f = detail::resample_all(fs, detail::common_size(fs));

  std::vector<FlatStructure> flats;
  std::map<std::size_t, std::size_t> histogram;
  for (const auto& d : f) {
    flats.push_back(detect_flats(d));
    ++histogram[flats.back().count()];
  }
  std::size_t modal = 0;
  std::size_t best = 0;
  for (const auto& [k, c] : histogram) {
    if (c > best) {
      best = c;
      modal = k;
    }
  }
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (flats[i].count() < modal) {
      throw PlateauMismatch("member " + std::to_string(i) + " has " +
                                std::to_string(flats[i].count()) + " flat intervals, expected " +
                                std::to_string(modal),
                            flats[i].count());
    }
    flats[i] = snap_flats(flats[i], modal);
  }

  const std::size_t j = opt.template_index;
  std::vector<std::optional<WarpingFunction>> warps(f.size());
  std::vector<std::optional<WarpingFunction>> inverses(f.size());
  parallel_for(f.size(), opt.jobs, [&](std::size_t i) {
    warps[i] = optimal_warp_nonneg(f[i], f[j], flats[i], flats[j]).gamma_star;
    inverses[i] = optimal_warp_nonneg(f[j], f[i], flats[j], flats[i]).gamma_star;
  });
  std::vector<WarpingFunction> w;
  std::vector<WarpingFunction> inv;
  for (std::size_t i = 0; i < f.size(); ++i) {
    w.push_back(std::move(*warps[i]));
    inv.push_back(std::move(*inverses[i]));
  }
  return detail::pull_template(f[j], std::move(w), std::move(inv));
}

inline DensityEstimate karcher_mean_nonneg(std::span<const DensityEstimate> fs,
                                           const KarcherOptions& opt = {}) {
  return karcher_align_nonneg(fs, opt).mean;
}

// ---------------------------------------------------------------------------
// Baselines

/// Pointwise average of the densities, renormalized.
inline DensityEstimate cross_sectional_mean(std::span<const DensityEstimate> fs) {
  if (fs.empty()) throw InvalidArgument("cross_sectional_mean: empty list");
  const std::size_t n = detail::common_size(fs);
  std::vector<double> sum(n, 0.0);
  for (const auto& f : fs) {
    const GridFunction p = resample(f.pdf(), n);
    for (std::size_t k = 0; k < n; ++k) sum[k] += p[k];
  }
  return DensityEstimate::from_pdf(GridFunction(std::move(sum)));
}

struct FisherRaoOptions {
  DpOptions dp{};
  std::size_t iterations = 5;
  double tolerance = 1e-6;
  std::size_t jobs = 1;
};

/// Square-root-density template mean: align every sqrt(f_i) to the current
/// template by DP, average the aligned square roots, square, renormalize.
/// Starts from the cross-sectional mean.
inline DensityEstimate mean_fisher_rao(std::span<const DensityEstimate> fs,
                                       const FisherRaoOptions& opt = {}) {
  if (fs.empty()) throw InvalidArgument("mean_fisher_rao: empty list");
  const std::size_t n = detail::common_size(fs);
  const std::vector<DensityEstimate> f = detail::resample_all(fs, n);
  if (f.size() == 1) return f.front();

  DensityEstimate mu = cross_sectional_mean(f);
  std::vector<GridFunction> roots;
  for (const auto& d : f) roots.push_back(map(d.pdf(), [](double x) { return std::sqrt(x); }));

  for (std::size_t it = 0; it < opt.iterations; ++it) {
    std::vector<std::optional<GridFunction>> aligned(f.size());
    parallel_for(f.size(), opt.jobs, [&](std::size_t i) {
      aligned[i] = act_energy(roots[i], dp_align(mu, f[i], opt.dp));
    });
    std::vector<double> avg(n, 0.0);
    for (const auto& a : aligned) {
      for (std::size_t k = 0; k < n; ++k) avg[k] += (*a)[k];
    }
    for (double& x : avg) x = x * x;
    DensityEstimate next = DensityEstimate::from_pdf(GridFunction(std::move(avg)));
    const double moved = distance_l2(next.pdf(), mu.pdf());
    mu = std::move(next);
    if (moved < opt.tolerance) break;
  }
  return mu;
}

/// Wasserstein barycenter: average the quantile functions, invert,
/// differentiate, renormalize.
inline DensityEstimate mean_wasserstein(std::span<const DensityEstimate> fs) {
  if (fs.empty()) throw InvalidArgument("mean_wasserstein: empty list");
  const std::size_t n = detail::common_size(fs);
  std::vector<double> q(n, 0.0);
  for (const auto& f : fs) {
    const GridFunction qi = quantile_function(resample(f.cdf(), n));
    for (std::size_t k = 0; k < n; ++k) q[k] += qi[k];
  }
  for (double& x : q) x /= static_cast<double>(fs.size());
  const WarpingFunction cdf = invert_monotone(WarpingFunction::project(GridFunction(std::move(q))));
  const GridFunction pdf = map(derivative(cdf.base()), [](double x) { return std::max(x, 0.0); });
  return DensityEstimate::from_pdf(pdf);
}

}  // namespace phasewarp
