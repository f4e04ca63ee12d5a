#pragma once

// Intensity estimation from warped Poisson realizations:
//  1. total intensity by its MLE (mean event count)
//  2. per-trial modified kernel density estimates
//  3. per-trial intensities  Lambda * f_i
//  4. a mean of the per-trial densities (Karcher mean by default)
//  5. lambda = Lambda * f

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "phasewarp/density_est.hpp"
#include "phasewarp/error.hpp"
#include "phasewarp/grid_fn.hpp"
#include "phasewarp/karcher.hpp"
#include "phasewarp/parallel.hpp"
#include "phasewarp/point_process.hpp"

namespace phasewarp {

enum class MeanMethod { proposed, fisher_rao, wasserstein, cross_sectional };

inline std::string to_string(MeanMethod m) {
  switch (m) {
    case MeanMethod::proposed: return "proposed";
    case MeanMethod::fisher_rao: return "fisher_rao";
    case MeanMethod::wasserstein: return "wasserstein";
    case MeanMethod::cross_sectional: return "cross_sectional";
  }
  return "proposed";
}

inline MeanMethod parse_mean_method(const std::string& s) {
  if (s == "proposed") return MeanMethod::proposed;
  if (s == "fisher_rao") return MeanMethod::fisher_rao;
  if (s == "wasserstein") return MeanMethod::wasserstein;
  if (s == "cross_sectional") return MeanMethod::cross_sectional;
  throw InvalidArgument("unknown mean method '" + s + "'");
}

enum class BandwidthMode { plug_in, fixed };

struct EstimatorConfig {
  KernelKind kernel = KernelKind::truncated_gaussian;
  BandwidthMode bandwidth_mode = BandwidthMode::plug_in;
  /// Shared bandwidth when bandwidth_mode == fixed.
  double bandwidth = 0.05;
  std::size_t grid_size = kDefaultGridSize;
  MeanMethod mean_method = MeanMethod::proposed;
  /// Use the flat-aware alignment; densities are stripped of their
  /// positivity floor first.
  bool nonneg_mode = false;
  double dp_penalty = 0.01;
  /// Pairwise alignment inside the proposed Karcher mean.
  AlignmentMethod alignment = AlignmentMethod::closed_form;
  std::size_t template_index = 0;
  std::size_t dp_lattice = 201;
  std::size_t jobs = 1;

  void validate() const {
    if (grid_size < 64) throw InvalidArgument("grid_size must be >= 64");
    if (!(dp_penalty >= 0.0)) throw InvalidArgument("dp_penalty must be >= 0");
    if (bandwidth_mode == BandwidthMode::fixed && !(bandwidth > 0.0 && bandwidth <= 1.0)) {
      throw InvalidArgument("bandwidth must be in (0, 1]");
    }
    if (dp_lattice < 3) throw InvalidArgument("dp_lattice must be >= 3");
  }

  DpOptions dp_options() const { return DpOptions{dp_penalty, dp_lattice, 10}; }
};

struct TrialEstimate {
  DensityEstimate density;
  GridFunction intensity;
  double bandwidth;
};

struct IntensityEstimate {
  double total;
  DensityEstimate density;
  /// One entry per trial; empty trials have no density.
  std::vector<std::optional<TrialEstimate>> per_trial;

  GridFunction intensity() const { return density_to_intensity(density, total); }
};

/// Bandwidth for one trial under `cfg`. Single-event trials cannot use the
/// plug-in rule and get the documented fallback.
inline double trial_bandwidth(const EventSequence& x, const EstimatorConfig& cfg) {
  if (cfg.bandwidth_mode == BandwidthMode::fixed) return cfg.bandwidth;
  if (x.count() < 2) return fallback_bandwidth(x.count());
  return plug_in_bandwidth(x);
}

/// Steps 1-3.
inline std::vector<std::optional<TrialEstimate>> estimate_trial_densities(
    const TrialSet& ts, double total, const EstimatorConfig& cfg) {
  std::vector<std::optional<TrialEstimate>> out(ts.size());
  parallel_for(ts.size(), cfg.jobs, [&](std::size_t i) {
    const EventSequence& x = ts.trials[i];
    if (x.empty()) return;
    const double h = trial_bandwidth(x, cfg);
    DensityEstimate d = kde_modified(x, KernelSpec{cfg.kernel, h}, cfg.grid_size);
    if (cfg.nonneg_mode) d = strip_positivity_floor(d);
    GridFunction lam = density_to_intensity(d, total);
    out[i] = TrialEstimate{std::move(d), std::move(lam), h};
  });
  return out;
}

/// Step 4 for an already-estimated set of densities.
inline DensityEstimate combine_densities(std::span<const DensityEstimate> fs,
                                         const EstimatorConfig& cfg) {
  switch (cfg.mean_method) {
    case MeanMethod::proposed: {
      KarcherOptions opt;
      opt.template_index = std::min(cfg.template_index, fs.size() - 1);
      opt.alignment = cfg.alignment;
      opt.dp = cfg.dp_options();
      opt.jobs = cfg.jobs;
      return cfg.nonneg_mode ? karcher_mean_nonneg(fs, opt) : karcher_mean_densities(fs, opt);
    }
    case MeanMethod::fisher_rao: {
      FisherRaoOptions opt;
      opt.dp = cfg.dp_options();
      opt.jobs = cfg.jobs;
      return mean_fisher_rao(fs, opt);
    }
    case MeanMethod::wasserstein: return mean_wasserstein(fs);
    case MeanMethod::cross_sectional: return cross_sectional_mean(fs);
  }
  throw InvalidArgument("unknown mean method");
}

inline std::vector<DensityEstimate> nonempty_densities(
    const std::vector<std::optional<TrialEstimate>>& per_trial) {
  std::vector<DensityEstimate> fs;
  for (const auto& t : per_trial) {
    if (t) fs.push_back(t->density);
  }
  return fs;
}

inline IntensityEstimate estimate_intensity(const TrialSet& ts, const EstimatorConfig& cfg) {
  cfg.validate();
  ts.validate();
  if (ts.trials.empty()) throw InvalidArgument("estimate_intensity: no trials");
  const double total = mle_total_intensity(ts);
  auto per_trial = estimate_trial_densities(ts, total, cfg);
  const std::vector<DensityEstimate> fs = nonempty_densities(per_trial);
  if (fs.empty()) throw DataError("estimate_intensity: every trial is empty");
  DensityEstimate mean = combine_densities(fs, cfg);
  return IntensityEstimate{total, std::move(mean), std::move(per_trial)};
}

struct IntensityErrors {
  double l1;
  double l2;
  double linf;
};

/// L1 = int|e|, L2 = (int e^2)^{1/2}, Linf = max|e| on the grid.
inline IntensityErrors intensity_errors(const GridFunction& est, const GridFunction& truth) {
  const GridFunction e = est - truth;
  return IntensityErrors{norm_l1(e), norm_l2(e), norm_sup(e)};
}

}  // namespace phasewarp
