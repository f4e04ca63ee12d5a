#pragma once

// Functions on [0,1] sampled on a uniform grid t_k = k/(N-1).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "phasewarp/error.hpp"

namespace phasewarp {

inline constexpr std::size_t kDefaultGridSize = 1001;

class GridFunction {
 public:
  explicit GridFunction(std::vector<double> values) : values_(std::move(values)) {
    if (values_.size() < 2) {
      throw InvalidArgument("GridFunction needs at least 2 samples, got " +
                            std::to_string(values_.size()));
    }
    for (std::size_t k = 0; k < values_.size(); ++k) {
      if (!std::isfinite(values_[k])) {
        throw InvalidArgument("GridFunction sample " + std::to_string(k) + " is not finite");
      }
    }
  }

  template <typename Fn>
  static GridFunction sample(std::size_t n, Fn&& fn) {
    if (n < 2) throw InvalidArgument("grid size must be >= 2");
    std::vector<double> v(n);
    for (std::size_t k = 0; k < n; ++k) v[k] = fn(node(k, n));
    return GridFunction(std::move(v));
  }

  static GridFunction constant(std::size_t n, double c) {
    if (n < 2) throw InvalidArgument("grid size must be >= 2");
    return GridFunction(std::vector<double>(n, c));
  }

  static GridFunction identity(std::size_t n) {
    return sample(n, [](double t) { return t; });
  }

  /// Node k of an n-point grid. Endpoints are exactly 0 and 1.
  static double node(std::size_t k, std::size_t n) {
    return static_cast<double>(k) / static_cast<double>(n - 1);
  }

  std::size_t size() const noexcept { return values_.size(); }
  double spacing() const noexcept { return 1.0 / static_cast<double>(values_.size() - 1); }
  double node(std::size_t k) const noexcept { return node(k, values_.size()); }

  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t k) const { return values_[k]; }
  double front() const { return values_.front(); }
  double back() const { return values_.back(); }

  double min() const { return *std::min_element(values_.begin(), values_.end()); }
  double max() const { return *std::max_element(values_.begin(), values_.end()); }
  std::size_t argmax() const {
    return static_cast<std::size_t>(
        std::distance(values_.begin(), std::max_element(values_.begin(), values_.end())));
  }

  bool operator==(const GridFunction&) const = default;

 private:
  std::vector<double> values_;
};

/// Piecewise-linear interpolant at t; t outside [0,1] is a domain error.
inline double evaluate(const GridFunction& f, double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw InvalidArgument("evaluate: t = " + std::to_string(t) + " outside [0,1]");
  }
  const std::size_t n = f.size();
  const double x = t * static_cast<double>(n - 1);
  const double nearest = std::round(x);
  if (std::abs(x - nearest) <= 4.0 * std::numeric_limits<double>::epsilon() * nearest) {
    return f[static_cast<std::size_t>(nearest)];
  }
  const std::size_t k = std::min(static_cast<std::size_t>(x), n - 2);
  const double w = x - static_cast<double>(k);
  return f[k] + w * (f[k + 1] - f[k]);
}

/// Linear resampling onto an n-point grid. Identity when sizes match.
inline GridFunction resample(const GridFunction& f, std::size_t n) {
  if (f.size() == n) return f;
  return GridFunction::sample(n, [&](double t) { return evaluate(f, t); });
}

template <typename Fn>
GridFunction map(const GridFunction& f, Fn&& fn) {
  std::vector<double> v(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) v[k] = fn(f[k]);
  return GridFunction(std::move(v));
}

/// Pointwise fn(f, g) on the finer of the two grids.
template <typename Fn>
GridFunction zip_with(const GridFunction& f, const GridFunction& g, Fn&& fn) {
  const std::size_t n = std::max(f.size(), g.size());
  const GridFunction a = resample(f, n);
  const GridFunction b = resample(g, n);
  std::vector<double> v(n);
  for (std::size_t k = 0; k < n; ++k) v[k] = fn(a[k], b[k]);
  return GridFunction(std::move(v));
}

inline GridFunction operator+(const GridFunction& f, const GridFunction& g) {
  return zip_with(f, g, std::plus<>{});
}
inline GridFunction operator-(const GridFunction& f, const GridFunction& g) {
  return zip_with(f, g, std::minus<>{});
}
inline GridFunction operator*(const GridFunction& f, const GridFunction& g) {
  return zip_with(f, g, std::multiplies<>{});
}
inline GridFunction operator*(double a, const GridFunction& f) {
  return map(f, [a](double x) { return a * x; });
}

/// Trapezoidal integral over [0,1].
inline double integrate(const GridFunction& f) {
  const auto v = f.values();
  const double interior = std::accumulate(v.begin(), v.end(), 0.0);
  return f.spacing() * (interior - 0.5 * (v.front() + v.back()));
}

/// Running trapezoidal integral; result[0] = 0.
inline GridFunction cumulative_integral(const GridFunction& f) {
  const double h = f.spacing();
  std::vector<double> c(f.size());
  c[0] = 0.0;
  for (std::size_t k = 1; k < f.size(); ++k) c[k] = c[k - 1] + 0.5 * h * (f[k - 1] + f[k]);
  return GridFunction(std::move(c));
}

/// Central differences inside, second-order one-sided differences at the
/// two endpoints (first-order when N = 2).
inline GridFunction derivative(const GridFunction& f) {
  const std::size_t n = f.size();
  const double inv_h = static_cast<double>(n - 1);
  std::vector<double> d(n);
  if (n == 2) {
    d[0] = d[1] = (f[1] - f[0]) * inv_h;
    return GridFunction(std::move(d));
  }
  d[0] = 0.5 * (-3.0 * f[0] + 4.0 * f[1] - f[2]) * inv_h;
  d[n - 1] = 0.5 * (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) * inv_h;
  for (std::size_t k = 1; k + 1 < n; ++k) d[k] = 0.5 * (f[k + 1] - f[k - 1]) * inv_h;
  return GridFunction(std::move(d));
}

inline double inner(const GridFunction& f, const GridFunction& g) { return integrate(f * g); }

inline double norm_l2(const GridFunction& f) {
  return std::sqrt(integrate(map(f, [](double x) { return x * x; })));
}
inline double norm_l1(const GridFunction& f) {
  return integrate(map(f, [](double x) { return std::abs(x); }));
}
inline double norm_sup(const GridFunction& f) {
  double m = 0.0;
  for (double x : f.values()) m = std::max(m, std::abs(x));
  return m;
}

inline double distance_l2(const GridFunction& f, const GridFunction& g) { return norm_l2(f - g); }
inline double distance_sup(const GridFunction& f, const GridFunction& g) { return norm_sup(f - g); }

/// Smallest increment a warp on an n-point grid may have.
inline double monotone_floor(std::size_t n) { return 1e-8 / static_cast<double>(n - 1); }

/// Inversion/composition tolerance on an n-point grid.
inline double inversion_tolerance(std::size_t n) { return 5.0 / static_cast<double>(n - 1); }

/// Element of the warping group: gamma(0) = 0, gamma(1) = 1, strictly increasing.
class WarpingFunction {
 public:
  /// Validates without modification; throws NumericalError on violation.
  explicit WarpingFunction(GridFunction base) : base_(std::move(base)) {
    const auto v = base_.values();
    if (v.front() != 0.0 || v.back() != 1.0) {
      throw NumericalError("warping function must satisfy gamma(0)=0 and gamma(1)=1");
    }
    const double eps = monotone_floor(v.size());
    for (std::size_t k = 0; k + 1 < v.size(); ++k) {
      if (!(v[k + 1] - v[k] >= eps)) {
        throw NumericalError("warping function not strictly increasing at node " +
                             std::to_string(k));
      }
    }
  }

  static WarpingFunction identity(std::size_t n) {
    return WarpingFunction(GridFunction::identity(n));
  }

  /// Nearest valid warp: running maximum, then (only if some increment is
  /// below the floor) a ramp of slope 2*eps, then endpoints renormalized.
  static WarpingFunction project(const GridFunction& g) {
    const std::size_t n = g.size();
    const double eps = monotone_floor(n);
    std::vector<double> v(g.values().begin(), g.values().end());
    for (std::size_t k = 1; k < n; ++k) v[k] = std::max(v[k], v[k - 1]);
    bool needs_ramp = false;
    for (std::size_t k = 0; k + 1 < n; ++k) {
      if (v[k + 1] - v[k] < eps) {
        needs_ramp = true;
        break;
      }
    }
    if (needs_ramp) {
      for (std::size_t k = 0; k < n; ++k) v[k] += 2.0 * eps * static_cast<double>(k);
    }
    if (v.front() != 0.0 || v.back() != 1.0) {
      const double lo = v.front();
      const double span = v.back() - lo;
      for (double& x : v) x = (x - lo) / span;
      v.front() = 0.0;
      v.back() = 1.0;
    }
    return WarpingFunction(GridFunction(std::move(v)));
  }

  template <typename Fn>
  static WarpingFunction sample(std::size_t n, Fn&& fn) {
    return project(GridFunction::sample(n, std::forward<Fn>(fn)));
  }

  const GridFunction& base() const noexcept { return base_; }
  std::size_t size() const noexcept { return base_.size(); }
  double operator[](std::size_t k) const { return base_[k]; }

  bool operator==(const WarpingFunction&) const = default;

 private:
  GridFunction base_;
};

inline double evaluate(const WarpingFunction& g, double t) { return evaluate(g.base(), t); }

inline WarpingFunction resample(const WarpingFunction& g, std::size_t n) {
  if (g.size() == n) return g;
  return WarpingFunction::project(resample(g.base(), n));
}

namespace detail {

/// Solves F(s) = y for s by piecewise-linear inversion of a nondecreasing
/// sampled F, restricted to the node range [lo, hi]. Returns the leftmost
/// solution; y outside [F(lo), F(hi)] clamps to the range ends.
inline double invert_at(std::span<const double> f, double y, std::size_t lo, std::size_t hi) {
  const double h = 1.0 / static_cast<double>(f.size() - 1);
  if (y <= f[lo]) return static_cast<double>(lo) * h;
  if (y >= f[hi]) return static_cast<double>(hi) * h;
  // first node in (lo, hi] with f >= y
  const auto it = std::lower_bound(f.begin() + static_cast<std::ptrdiff_t>(lo) + 1,
                                   f.begin() + static_cast<std::ptrdiff_t>(hi) + 1, y);
  const std::size_t j = static_cast<std::size_t>(std::distance(f.begin(), it));
  const double rise = f[j] - f[j - 1];
  const double w = rise > 0.0 ? (y - f[j - 1]) / rise : 0.0;
  return (static_cast<double>(j - 1) + w) * h;
}

}  // namespace detail

/// g^{-1} on the same grid by monotone piecewise-linear inversion.
inline WarpingFunction invert_monotone(const WarpingFunction& g) {
  const std::size_t n = g.size();
  const auto v = g.base().values();
  std::vector<double> inv(n);
  for (std::size_t k = 0; k < n; ++k) {
    inv[k] = detail::invert_at(v, GridFunction::node(k, n), 0, n - 1);
  }
  inv.front() = 0.0;
  inv.back() = 1.0;
  return WarpingFunction::project(GridFunction(std::move(inv)));
}

/// (g1 o g2)(t_k) = g1(g2(t_k)) on the finer grid.
inline WarpingFunction compose(const WarpingFunction& g1, const WarpingFunction& g2) {
  const std::size_t n = std::max(g1.size(), g2.size());
  const WarpingFunction inner_warp = resample(g2, n);
  std::vector<double> v(n);
  for (std::size_t k = 0; k < n; ++k) v[k] = evaluate(g1, inner_warp[k]);
  return WarpingFunction::project(GridFunction(std::move(v)));
}

}  // namespace phasewarp
