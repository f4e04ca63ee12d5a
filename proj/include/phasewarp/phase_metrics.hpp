#pragma once

// Distances between densities on [0,1]. The phase distances depend only on
// the optimal warp gamma* = F2^{-1} o F1 carrying f2 onto f1.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "phasewarp/density_est.hpp"
#include "phasewarp/error.hpp"
#include "phasewarp/grid_fn.hpp"
#include "phasewarp/warping.hpp"

namespace phasewarp {

struct PhaseAlignment {
  WarpingFunction gamma_star;
  double distance_ext;
  double distance_int;
};

/// <1, sqrt(gamma')> for the piecewise-linear warp through the nodes:
/// sum_k sqrt(dgamma_k * dt).
inline double warp_sqrt_velocity_integral(const WarpingFunction& g) {
  const auto v = g.base().values();
  const double dt = 1.0 / static_cast<double>(v.size() - 1);
  double c = 0.0;
  for (std::size_t k = 1; k < v.size(); ++k) c += std::sqrt(std::max(0.0, v[k] - v[k - 1]) * dt);
  return c;
}

/// ||1 - sqrt(gamma')|| = sqrt(2 - 2 <1, sqrt(gamma')>).
inline double warp_distance_ext(const WarpingFunction& g) {
  return std::sqrt(std::max(0.0, 2.0 - 2.0 * warp_sqrt_velocity_integral(g)));
}

/// arccos <1, sqrt(gamma')>, argument clamped to [-1, 1].
inline double warp_distance_int(const WarpingFunction& g) {
  return std::acos(std::clamp(warp_sqrt_velocity_integral(g), -1.0, 1.0));
}

namespace detail {

inline void require_positive(const DensityEstimate& f, const char* op) {
  if (!f.strictly_positive()) {
    throw InvalidArgument(std::string(op) +
                          ": density is not strictly positive; use the nonnegative path");
  }
}

/// gamma(t_k) = G^{-1}(H(t_k)) with G inverted piecewise-linearly over the
/// node range [lo, hi] of the target. Shared by the positive and the
/// nonnegative alignments.
inline double pull_back(std::span<const double> target_cdf, double level, std::size_t lo,
                        std::size_t hi) {
  return invert_at(target_cdf, level, lo, hi);
}

}  // namespace detail

/// gamma* with F1 = F2 o gamma*, i.e. f1 = (f2; gamma*).
inline WarpingFunction optimal_warp(const DensityEstimate& f1, const DensityEstimate& f2) {
  detail::require_positive(f1, "optimal_warp");
  detail::require_positive(f2, "optimal_warp");
  const std::size_t n = std::max(f1.size(), f2.size());
  const GridFunction c1 = resample(f1.cdf(), n);
  const GridFunction c2 = resample(f2.cdf(), n);
  std::vector<double> v(n);
  for (std::size_t k = 0; k < n; ++k) v[k] = detail::pull_back(c2.values(), c1[k], 0, n - 1);
  v.front() = 0.0;
  v.back() = 1.0;
  return WarpingFunction::project(GridFunction(std::move(v)));
}

namespace detail {

/// <1, sqrt(gamma*')> for gamma* = F2^{-1} o F1 with both CDFs piecewise
/// linear: the curve u -> (F1^{-1}(u), F2^{-1}(u)) is straight between the
/// merged breakpoints of the two CDFs, so the sum of sqrt(dt * ds) over them is
/// exact and symmetric in (F1, F2).
inline double cdf_sqrt_velocity_integral(std::span<const double> c1, std::span<const double> c2) {
  const std::size_t n = c1.size();
  const double h = 1.0 / static_cast<double>(n - 1);
  auto locate = [h](std::span<const double> c, std::size_t j, double u) {
    const double rise = c[j] - c[j - 1];
    const double w = rise > 0.0 ? std::clamp((u - c[j - 1]) / rise, 0.0, 1.0) : 1.0;
    return (static_cast<double>(j - 1) + w) * h;
  };
  double sum = 0.0;
  double t_prev = 0.0;
  double s_prev = 0.0;
  std::size_t i = 1;
  std::size_t j = 1;
  while (i < n && j < n) {
    double t = 0.0;
    double s = 0.0;
    if (c1[i] == c2[j]) {
      t = GridFunction::node(i++, n);
      s = GridFunction::node(j++, n);
    } else if (c1[i] < c2[j]) {
      t = GridFunction::node(i, n);
      s = locate(c2, j, c1[i]);
      ++i;
    } else {
      s = GridFunction::node(j, n);
      t = locate(c1, i, c2[j]);
      ++j;
    }
    sum += std::sqrt(std::max(0.0, t - t_prev) * std::max(0.0, s - s_prev));
    t_prev = t;
    s_prev = s;
  }
  sum += std::sqrt(std::max(0.0, 1.0 - t_prev) * std::max(0.0, 1.0 - s_prev));
  return sum;
}

inline double phase_inner_product(const DensityEstimate& f1, const DensityEstimate& f2) {
  detail::require_positive(f1, "phase distance");
  detail::require_positive(f2, "phase distance");
  const std::size_t n = std::max(f1.size(), f2.size());
  const GridFunction c1 = resample(f1.cdf(), n);
  const GridFunction c2 = resample(f2.cdf(), n);
  return cdf_sqrt_velocity_integral(c1.values(), c2.values());
}

}  // namespace detail

/// The distances are evaluated on the exact piecewise-linear CDF warp, of
/// which gamma_star is the node sampling.
inline PhaseAlignment phase_align(const DensityEstimate& f1, const DensityEstimate& f2) {
  WarpingFunction g = optimal_warp(f1, f2);
  const double c = detail::phase_inner_product(f1, f2);
  return PhaseAlignment{std::move(g), std::sqrt(std::max(0.0, 2.0 - 2.0 * c)),
                        std::acos(std::clamp(c, -1.0, 1.0))};
}

inline double d_ext(const DensityEstimate& f1, const DensityEstimate& f2) {
  return std::sqrt(std::max(0.0, 2.0 - 2.0 * detail::phase_inner_product(f1, f2)));
}

inline double d_int(const DensityEstimate& f1, const DensityEstimate& f2) {
  return std::acos(std::clamp(detail::phase_inner_product(f1, f2), -1.0, 1.0));
}

/// Generalized inverse of a nondecreasing CDF: Q(s) = inf{t : F(t) >= s}.
inline GridFunction quantile_function(const GridFunction& cdf) {
  const std::size_t n = cdf.size();
  std::vector<double> q(n);
  for (std::size_t k = 0; k < n; ++k) {
    q[k] = detail::invert_at(cdf.values(), GridFunction::node(k, n), 0, n - 1);
  }
  return GridFunction(std::move(q));
}

/// ||F1^{-1} - F2^{-1}||
inline double d_wasserstein(const DensityEstimate& f1, const DensityEstimate& f2) {
  return distance_l2(quantile_function(f1.cdf()), quantile_function(f2.cdf()));
}

/// int sqrt(f1 f2), clamped to (0, 1].
inline double bhattacharyya_coefficient(const DensityEstimate& f1, const DensityEstimate& f2) {
  const double bc = integrate(zip_with(f1.pdf(), f2.pdf(), [](double a, double b) {
    return std::sqrt(a * b);
  }));
  return std::clamp(bc, std::numeric_limits<double>::min(), 1.0);
}

inline double d_bhattacharyya(const DensityEstimate& f1, const DensityEstimate& f2) {
  return -std::log(bhattacharyya_coefficient(f1, f2));
}

inline double d_hellinger(const DensityEstimate& f1, const DensityEstimate& f2) {
  const GridFunction diff = zip_with(f1.pdf(), f2.pdf(), [](double a, double b) {
    return std::sqrt(a) - std::sqrt(b);
  });
  return norm_l2(diff) / std::numbers::sqrt2;
}

inline double d_fisher_rao(const DensityEstimate& f1, const DensityEstimate& f2) {
  return std::acos(bhattacharyya_coefficient(f1, f2));
}

enum class Metric { ext, intrinsic, wasserstein, hellinger, bhattacharyya, fisher_rao };

inline Metric parse_metric(const std::string& s) {
  if (s == "ext") return Metric::ext;
  if (s == "int") return Metric::intrinsic;
  if (s == "wasserstein") return Metric::wasserstein;
  if (s == "hellinger") return Metric::hellinger;
  if (s == "bhattacharyya") return Metric::bhattacharyya;
  if (s == "fisher_rao") return Metric::fisher_rao;
  throw InvalidArgument("unknown metric '" + s + "'");
}

inline std::string to_string(Metric m) {
  switch (m) {
    case Metric::ext: return "ext";
    case Metric::intrinsic: return "int";
    case Metric::wasserstein: return "wasserstein";
    case Metric::hellinger: return "hellinger";
    case Metric::bhattacharyya: return "bhattacharyya";
    case Metric::fisher_rao: return "fisher_rao";
  }
  return "ext";
}

inline double distance(Metric m, const DensityEstimate& f1, const DensityEstimate& f2) {
  switch (m) {
    case Metric::ext: return d_ext(f1, f2);
    case Metric::intrinsic: return d_int(f1, f2);
    case Metric::wasserstein: return d_wasserstein(f1, f2);
    case Metric::hellinger: return d_hellinger(f1, f2);
    case Metric::bhattacharyya: return d_bhattacharyya(f1, f2);
    case Metric::fisher_rao: return d_fisher_rao(f1, f2);
  }
  return 0.0;
}

}  // namespace phasewarp
