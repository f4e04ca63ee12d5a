#pragma once

// Boundary-corrected kernel density estimation on [0,1]: a standard kernel
// estimate, folded back at both boundaries by reflection, then mixed with
// the uniform density at weight 1/(m+1) so the result is strictly positive.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "phasewarp/error.hpp"
#include "phasewarp/grid_fn.hpp"
#include "phasewarp/point_process.hpp"

namespace phasewarp {

enum class KernelKind { truncated_gaussian, beta };

inline std::string to_string(KernelKind k) {
  return k == KernelKind::beta ? "beta" : "truncated_gaussian";
}

inline KernelKind parse_kernel_kind(const std::string& s) {
  if (s == "truncated_gaussian" || s == "gaussian") return KernelKind::truncated_gaussian;
  if (s == "beta") return KernelKind::beta;
  throw InvalidArgument("unknown kernel '" + s + "'");
}

struct KernelSpec {
  KernelKind kind = KernelKind::truncated_gaussian;
  double bandwidth = 0.05;
};

/// Unit-mass kernel supported on [-1, 1].
///  truncated_gaussian: N(0,1) restricted to [-3,3], mapped to [-1,1].
///  beta:               Beta(3,3) mapped to [-1,1].
inline double kernel_value(KernelKind kind, double u) {
  if (u < -1.0 || u > 1.0) return 0.0;
  if (kind == KernelKind::beta) {
    const double x = 0.5 * (u + 1.0);
    return 15.0 * x * x * (1.0 - x) * (1.0 - x);
  }
  // 3 * phi(3u) / (Phi(3) - Phi(-3))
  static const double mass = std::erf(3.0 / std::numbers::sqrt2);
  const double z = 3.0 * u;
  return 3.0 * std::exp(-0.5 * z * z) / (std::sqrt(2.0 * std::numbers::pi) * mass);
}

/// A density on [0,1] with its CDF. Unit mass by construction.
class DensityEstimate {
 public:
  /// Normalizes `pdf` to unit mass. `floor` records a known lower bound
  /// mixed in by the estimator (0 for exact densities).
  static DensityEstimate from_pdf(const GridFunction& pdf, double floor = 0.0) {
    if (pdf.min() < -1e-12) throw InvalidArgument("density has negative values");
    GridFunction clean = map(pdf, [](double x) { return std::max(x, 0.0); });
    const double mass = integrate(clean);
    if (!(mass > 0.0)) throw InvalidArgument("density has zero mass");
    clean = map(clean, [mass](double x) { return x / mass; });
    return DensityEstimate(std::move(clean), floor);
  }

  const GridFunction& pdf() const noexcept { return pdf_; }
  /// Running trapezoidal integral of the pdf; cdf(0) = 0, cdf(1) = 1.
  const GridFunction& cdf() const noexcept { return cdf_; }
  bool strictly_positive() const noexcept { return strictly_positive_; }
  double floor() const noexcept { return floor_; }
  std::size_t size() const noexcept { return pdf_.size(); }

  /// The CDF as an element of the warping group. Meaningful for strictly
  /// positive densities.
  WarpingFunction cdf_warp() const { return WarpingFunction::project(cdf_); }

  DensityEstimate resampled(std::size_t n) const {
    if (n == size()) return *this;
    return from_pdf(resample(pdf_, n), floor_);
  }

 private:
  DensityEstimate(GridFunction pdf, double floor)
      : pdf_(std::move(pdf)), cdf_(make_cdf(pdf_)), strictly_positive_(pdf_.min() > 0.0),
        floor_(floor) {}

  static GridFunction make_cdf(const GridFunction& pdf) {
    const GridFunction c = cumulative_integral(pdf);
    const double total = c.back();
    std::vector<double> v(c.size());
    for (std::size_t k = 0; k < c.size(); ++k) v[k] = std::min(c[k] / total, 1.0);
    v.back() = 1.0;
    return GridFunction(std::move(v));
  }

  GridFunction pdf_;
  GridFunction cdf_;
  bool strictly_positive_;
  double floor_;
};

/// Steps 1 and 2: the kernel estimate on the real line folded back into [0,1]
/// by adding its reflections about 0 and 1. No mass renormalization.
inline GridFunction reflected_kde(const EventSequence& x, const KernelSpec& k,
                                  std::size_t grid_size) {
  if (x.empty()) throw InvalidArgument("kernel density estimate of an empty sample");
  if (!(k.bandwidth > 0.0)) throw InvalidArgument("bandwidth must be positive");
  if (k.bandwidth > 1.0) throw InvalidArgument("bandwidth must be <= 1 for two-sided reflection");
  if (grid_size < 2) throw InvalidArgument("grid size must be >= 2");

  const double h = k.bandwidth;
  const double scale = 1.0 / (static_cast<double>(x.count()) * h);
  const double last = static_cast<double>(grid_size - 1);
  std::vector<double> v(grid_size, 0.0);
  auto add_bump = [&](double center) {
    const double lo = std::max(0.0, std::ceil((center - h) * last));
    const double hi = std::min(last, std::floor((center + h) * last));
    for (double kk = lo; kk <= hi; kk += 1.0) {
      const double t = kk / last;
      v[static_cast<std::size_t>(kk)] += scale * kernel_value(k.kind, (t - center) / h);
    }
  };
  for (double e : x.events()) {
    add_bump(e);
    add_bump(-e);
    add_bump(2.0 - e);
  }
  return GridFunction(std::move(v));
}

/// Full modified estimate: reflection, discrete mass correction, then the
/// uniform mixture f = f_refl * m/(m+1) + 1/(m+1).
inline DensityEstimate kde_modified(const EventSequence& x, const KernelSpec& k,
                                    std::size_t grid_size = kDefaultGridSize) {
  const GridFunction folded = reflected_kde(x, k, grid_size);
  const double mass = integrate(folded);
  if (!(mass > 0.0)) throw NumericalError("reflected kernel estimate has no mass on the grid");
  const double m = static_cast<double>(x.count());
  const double w = m / (m + 1.0);
  const double floor = 1.0 / (m + 1.0);
  return DensityEstimate::from_pdf(
      map(folded, [=](double f) { return f / mass * w + floor; }), floor);
}

namespace detail {

/// Linear-interpolation quantile of sorted data (type 7).
inline double sorted_quantile(std::span<const double> sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace detail

/// Bandwidth used when the plug-in rule has nothing to work with.
inline double fallback_bandwidth(std::size_t m) {
  return std::pow(static_cast<double>(std::max<std::size_t>(m, 1)), -0.2) / 10.0;
}

/// Silverman's rule h = 1.06 * min(sd, IQR/1.349) * m^{-1/5}, capped at 1.
inline double plug_in_bandwidth(const EventSequence& x) {
  const std::size_t m = x.count();
  if (m < 2) throw InvalidArgument("plug-in bandwidth needs at least 2 events");
  const auto e = x.events();
  if (e.front() == e.back()) return fallback_bandwidth(m);
  double mean = 0.0;
  for (double v : e) mean += v;
  mean /= static_cast<double>(m);
  double ss = 0.0;
  for (double v : e) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(m - 1));
  const double iqr = detail::sorted_quantile(e, 0.75) - detail::sorted_quantile(e, 0.25);
  const double sigma = iqr > 0.0 ? std::min(sd, iqr / 1.349) : sd;
  if (!(sigma > 0.0)) return fallback_bandwidth(m);
  return std::min(1.0, 1.06 * sigma * std::pow(static_cast<double>(m), -0.2));
}

inline GridFunction density_to_intensity(const DensityEstimate& d, double total) {
  if (!(total >= 0.0)) throw InvalidArgument("total intensity must be nonnegative");
  return total * d.pdf();
}

/// Removes the uniform component of a floored estimate:
/// (pdf - floor) / (1 - floor). Exact zeros return where the kernel sum had none.
inline DensityEstimate strip_positivity_floor(const DensityEstimate& d) {
  if (d.floor() <= 0.0) return d;
  const double f0 = d.floor();
  return DensityEstimate::from_pdf(
      map(d.pdf(), [f0](double x) { return std::max(0.0, (x - f0) / (1.0 - f0)); }));
}

}  // namespace phasewarp
