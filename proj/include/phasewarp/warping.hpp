#pragma once

// Group actions of warps on functions, the square-root velocity
// representation of a warp, and the closed-form mean of a set of warps.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "phasewarp/error.hpp"
#include "phasewarp/grid_fn.hpp"

namespace phasewarp {

/// Square-root velocity function sqrt(gamma') of a warp.
class Srvf {
 public:
  explicit Srvf(GridFunction base) : base_(std::move(base)), norm_(norm_l2(base_)) {
    if (base_.min() <= 0.0) throw NumericalError("SRVF must be strictly positive");
  }

  const GridFunction& base() const noexcept { return base_; }
  double norm() const noexcept { return norm_; }
  std::size_t size() const noexcept { return base_.size(); }

 private:
  GridFunction base_;
  double norm_;
};

/// gamma' with the derivative clamped below at eps_mono * (N - 1).
inline GridFunction warp_velocity(const WarpingFunction& g) {
  const double floor = monotone_floor(g.size()) * static_cast<double>(g.size() - 1);
  return map(derivative(g.base()), [floor](double d) { return std::max(d, floor); });
}

inline Srvf to_srvf(const WarpingFunction& g) {
  return Srvf(map(warp_velocity(g), [](double d) { return std::sqrt(d); }));
}

/// Warp whose SRVF is q: gamma(t) = int_0^t q^2, rescaled so gamma(1) = 1.
inline WarpingFunction from_srvf(const Srvf& q) {
  const GridFunction c = cumulative_integral(map(q.base(), [](double x) { return x * x; }));
  const double total = c.back();
  return WarpingFunction::project(map(c, [total](double x) { return x / total; }));
}

/// f o gamma. Preserves the sup norm.
inline GridFunction act_amplitude(const GridFunction& f, const WarpingFunction& g) {
  const std::size_t n = std::max(f.size(), g.size());
  const WarpingFunction gn = resample(g, n);
  std::vector<double> v(n);
  for (std::size_t k = 0; k < n; ++k) v[k] = evaluate(f, gn[k]);
  return GridFunction(std::move(v));
}

/// (f; gamma) = (f o gamma) gamma'. Preserves the L1 norm; how densities move.
inline GridFunction act_area(const GridFunction& f, const WarpingFunction& g) {
  const std::size_t n = std::max(f.size(), g.size());
  const WarpingFunction gn = resample(g, n);
  return act_amplitude(f, gn) * warp_velocity(gn);
}

/// (f, gamma) = (f o gamma) sqrt(gamma'). Preserves the L2 norm.
inline GridFunction act_energy(const GridFunction& f, const WarpingFunction& g) {
  const std::size_t n = std::max(f.size(), g.size());
  const WarpingFunction gn = resample(g, n);
  return act_amplitude(f, gn) * to_srvf(gn).base();
}

/// Normalized sum of SRVFs: the minimizer of sum_i ||q - q_i||^2 on the unit
/// sphere. Inputs of different sizes are resampled to the largest.
inline Srvf mean_srvf(std::span<const Srvf> qs) {
  if (qs.empty()) throw InvalidArgument("mean of an empty set of warps");
  std::size_t n = 0;
  for (const auto& q : qs) n = std::max(n, q.size());
  std::vector<double> sum(n, 0.0);
  for (const auto& q : qs) {
    const GridFunction r = resample(q.base(), n);
    for (std::size_t k = 0; k < n; ++k) sum[k] += r[k];
  }
  GridFunction s(std::move(sum));
  const double norm = norm_l2(s);
  return Srvf((1.0 / norm) * s);
}

/// Closed-form extrinsic Karcher mean of warps.
inline WarpingFunction karcher_mean_warps(std::span<const WarpingFunction> gs) {
  if (gs.empty()) throw InvalidArgument("karcher_mean_warps: empty list");
  std::vector<Srvf> qs;
  qs.reserve(gs.size());
  for (const auto& g : gs) qs.push_back(to_srvf(g));
  return from_srvf(mean_srvf(qs));
}

/// sum_i ||q - q_i||^2, the objective the warp mean minimizes.
inline double warp_mean_objective(const Srvf& q, std::span<const Srvf> qs) {
  double total = 0.0;
  for (const auto& qi : qs) {
    const double d = distance_l2(q.base(), qi.base());
    total += d * d;
  }
  return total;
}

}  // namespace phasewarp
