#pragma once

// Simulation and classification scenarios: sine intensity under exponential
// warps, triangular intensity with flat regions under piecewise-linear
// power warps, the Karcher mean of ten Beta densities, and nearest-mean
// classification of labeled spike trains.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "phasewarp/density_est.hpp"
#include "phasewarp/error.hpp"
#include "phasewarp/estimation.hpp"
#include "phasewarp/grid_fn.hpp"
#include "phasewarp/io.hpp"
#include "phasewarp/karcher.hpp"
#include "phasewarp/parallel.hpp"
#include "phasewarp/phase_metrics.hpp"
#include "phasewarp/point_process.hpp"
#include "phasewarp/random.hpp"
#include "phasewarp/warping.hpp"

namespace phasewarp {

// ---------------------------------------------------------------------------
// Built-in intensities and warp families

/// 100 (3 + 2 sin((8t - 1/2) pi)); integrates to 300.
inline double sine_intensity_at(double t) {
  return 100.0 * (3.0 + 2.0 * std::sin((8.0 * t - 0.5) * std::numbers::pi));
}

inline GridFunction sine_intensity(std::size_t n = kDefaultGridSize) {
  return GridFunction::sample(n, sine_intensity_at);
}

/// 4000 - 16000 |t - 0.5| on [0.25, 0.75], zero elsewhere; integrates to 1000.
inline double triangle_intensity_at(double t) {
  return (t >= 0.25 && t <= 0.75) ? 4000.0 - 16000.0 * std::abs(t - 0.5) : 0.0;
}

inline GridFunction triangle_intensity(std::size_t n = kDefaultGridSize) {
  return GridFunction::sample(n, triangle_intensity_at);
}

/// (e^{at} - 1) / (e^a - 1); the identity at a = 0.
inline double exp_warp_at(double a, double t) {
  if (a == 0.0) return t;
  return std::expm1(a * t) / std::expm1(a);
}

inline WarpingFunction exp_warp(double a, std::size_t n = kDefaultGridSize) {
  return WarpingFunction::sample(n, [a](double t) { return exp_warp_at(a, t); });
}

/// (sign(2t-1) |2t-1|^e + 1) / 2
inline double power_warp_at(double e, double t) {
  const double u = 2.0 * t - 1.0;
  const double s = u < 0.0 ? -1.0 : (u > 0.0 ? 1.0 : 0.0);
  return 0.5 * (s * std::pow(std::abs(u), e) + 1.0);
}

/// The power warp linearized through its values at t = 0, 1/4, 1/2, 3/4, 1.
inline WarpingFunction power_lin_warp(double e, std::size_t n = kDefaultGridSize) {
  constexpr double knots[] = {0.0, 0.25, 0.5, 0.75, 1.0};
  double vals[5];
  for (int i = 0; i < 5; ++i) vals[i] = power_warp_at(e, knots[i]);
  return WarpingFunction::sample(n, [&](double t) {
    const int seg = std::min(3, static_cast<int>(t * 4.0));
    const double w = (t - knots[seg]) / 0.25;
    return vals[seg] + w * (vals[seg + 1] - vals[seg]);
  });
}

/// Exponents e_1..e_11 of the second simulation (1-based index).
inline double sim2_exponent(int i) {
  if (i < 1 || i > 11) throw InvalidArgument("sim2 exponent index must be in 1..11");
  if (i <= 6) return 1.0 / (2.0 - 0.2 * (i - 1));
  return 0.2 * (i - 6) + 1.0;
}

/// n values equally spaced over [-range, range], endpoints included.
inline std::vector<double> equally_spaced(double range, std::size_t n) {
  std::vector<double> a(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = n == 1 ? 0.0 : -range + 2.0 * range * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return a;
}

/// Observed trials S_i = gamma_i^{-1}(R_i) with R_i ~ PP(lambda); trial i
/// draws from stream derive_seed(seed, i).
inline TrialSet simulate_warped_trials(const GridFunction& lambda,
                                       std::span<const WarpingFunction> warps, std::uint64_t seed,
                                       TrialSet* original = nullptr, std::size_t jobs = 1) {
  std::vector<EventSequence> raw(warps.size());
  std::vector<EventSequence> obs(warps.size());
  parallel_for(warps.size(), jobs, [&](std::size_t i) {
    raw[i] = simulate_pp(lambda, derive_seed(seed, i));
    obs[i] = warp_events(raw[i], warps[i]);
  });
  if (original) *original = TrialSet(std::move(raw));
  return TrialSet(std::move(obs));
}

// ---------------------------------------------------------------------------
// Simulation 1

struct Sim1Options {
  bool severe = false;
  std::uint64_t seed = 0;
  std::size_t n_trials = 20;
  EstimatorConfig estimator{};
  std::vector<MeanMethod> methods{MeanMethod::proposed, MeanMethod::fisher_rao,
                                  MeanMethod::wasserstein, MeanMethod::cross_sectional};
};

struct MethodOutcome {
  MeanMethod method;
  IntensityErrors errors;
  DensityEstimate density;
  GridFunction intensity;
};

struct Sim1Result {
  GridFunction truth;
  double true_total;
  std::vector<double> warp_parameters;
  std::vector<WarpingFunction> warps;
  TrialSet original;
  TrialSet observed;
  double total_hat;
  std::vector<std::optional<TrialEstimate>> per_trial;
  std::vector<MethodOutcome> outcomes;

  const MethodOutcome& outcome(MeanMethod m) const {
    for (const auto& o : outcomes) {
      if (o.method == m) return o;
    }
    throw InvalidArgument("method " + to_string(m) + " was not run");
  }
};

/// Warp parameters a_i: 20 values equally spaced in [-2, 2], or [-4, 4]
/// when severe. They do not depend on the seed.
inline std::vector<double> sim1_warp_parameters(bool severe, std::size_t n_trials = 20) {
  return equally_spaced(severe ? 4.0 : 2.0, n_trials);
}

inline Sim1Result run_sim1(const Sim1Options& opt) {
  const EstimatorConfig& cfg = opt.estimator;
  cfg.validate();
  const std::size_t n = cfg.grid_size;
  GridFunction truth = sine_intensity(n);
  std::vector<double> params = sim1_warp_parameters(opt.severe, opt.n_trials);
  std::vector<WarpingFunction> warps;
  for (double a : params) warps.push_back(exp_warp(a, n));

  TrialSet original;
  TrialSet observed = simulate_warped_trials(truth, warps, opt.seed, &original, cfg.jobs);
  const double total_hat = mle_total_intensity(observed);
  auto per_trial = estimate_trial_densities(observed, total_hat, cfg);
  const std::vector<DensityEstimate> fs = nonempty_densities(per_trial);
  if (fs.empty()) throw NumericalError("run_sim1: every simulated trial is empty");

  std::vector<MethodOutcome> outcomes;
  for (MeanMethod m : opt.methods) {
    EstimatorConfig c = cfg;
    c.mean_method = m;
    DensityEstimate d = combine_densities(fs, c);
    GridFunction lam = density_to_intensity(d, total_hat);
    outcomes.push_back(MethodOutcome{m, intensity_errors(lam, truth), std::move(d), std::move(lam)});
  }
  const double true_total = integrate(truth);
  return Sim1Result{std::move(truth),      true_total,           std::move(params),
                    std::move(warps),      std::move(original),  std::move(observed),
                    total_hat,             std::move(per_trial), std::move(outcomes)};
}

// ---------------------------------------------------------------------------
// Simulation 2

struct Sim2Options {
  std::uint64_t seed = 0;
  std::size_t grid_size = kDefaultGridSize;
  double bandwidth = 0.01;
  std::size_t jobs = 1;
};

struct Sim2Report {
  GridFunction truth;
  std::vector<WarpingFunction> warps;
  TrialSet observed;
  IntensityEstimate estimate;
  /// gamma*_i from the Karcher step, one per nonempty trial.
  std::vector<WarpingFunction> estimated_warps;
  double peak_location;
  /// Fraction of the estimated intensity's mass outside [0.23, 0.77].
  double mass_outside;
  FlatStructure flats;
  IntensityErrors errors;
  /// Largest deviation from linearity of the pairwise optimal warps across
  /// their flats.
  double flat_linearity_residual;
};

inline std::vector<WarpingFunction> sim2_warps(std::size_t n = kDefaultGridSize) {
  std::vector<WarpingFunction> warps;
  for (int i = 1; i <= 11; ++i) warps.push_back(power_lin_warp(sim2_exponent(i), n));
  return warps;
}

inline Sim2Report run_sim2(const Sim2Options& opt) {
  const std::size_t n = opt.grid_size;
  GridFunction truth = triangle_intensity(n);
  std::vector<WarpingFunction> warps = sim2_warps(n);
  TrialSet observed = simulate_warped_trials(truth, warps, opt.seed, nullptr, opt.jobs);

  EstimatorConfig cfg;
  cfg.grid_size = n;
  cfg.bandwidth_mode = BandwidthMode::fixed;
  cfg.bandwidth = opt.bandwidth;
  cfg.kernel = KernelKind::truncated_gaussian;
  cfg.nonneg_mode = true;
  cfg.jobs = opt.jobs;

  const double total = mle_total_intensity(observed);
  auto per_trial = estimate_trial_densities(observed, total, cfg);
  const std::vector<DensityEstimate> fs = nonempty_densities(per_trial);
  if (fs.empty()) throw NumericalError("run_sim2: every simulated trial is empty");
  KarcherOptions kopt;
  kopt.jobs = opt.jobs;
  KarcherResult km = karcher_align_nonneg(fs, kopt);

  // Linearity of the pairwise warps on flats, as used by the Karcher step.
  double residual = 0.0;
  const FlatStructure template_flats = detect_flats(fs.front());
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const FlatStructure fi = snap_flats(detect_flats(fs[i]), template_flats.count());
    if (fi.count() != template_flats.count()) continue;
    residual = std::max(residual, flat_linearity_residual(km.warps[i], fi, template_flats));
  }

  IntensityEstimate est{total, km.mean, std::move(per_trial)};
  const GridFunction lam = est.intensity();
  double outside = 0.0;
  {
    const GridFunction masked = GridFunction::sample(n, [&](double t) {
      return (t < 0.23 || t > 0.77) ? evaluate(lam, t) : 0.0;
    });
    outside = integrate(masked) / integrate(lam);
  }
  const double peak = lam.node(lam.argmax());
  FlatStructure flats = detect_flats(est.density);
  const IntensityErrors err = intensity_errors(lam, truth);
  return Sim2Report{std::move(truth), std::move(warps), std::move(observed), std::move(est),
                    std::move(km.warps), peak, outside, std::move(flats), err, residual};
}

// ---------------------------------------------------------------------------
// Karcher mean of Beta densities

struct BetaMeansResult {
  std::vector<DensityEstimate> inputs;
  DensityEstimate mean;
  double mean_objective;
  std::vector<double> input_objectives;
};

inline const std::vector<std::pair<double, double>>& beta_parameters() {
  static const std::vector<std::pair<double, double>> params{
      {1, 4}, {1, 3}, {1.5, 3}, {2, 2.5}, {2, 2}, {2.5, 2}, {3, 1.5}, {3, 1}, {4, 1}, {5, 2}};
  return params;
}

inline double beta_pdf(double alpha, double beta, double x) {
  const double log_b = std::lgamma(alpha) + std::lgamma(beta) - std::lgamma(alpha + beta);
  return std::pow(x, alpha - 1.0) * std::pow(1.0 - x, beta - 1.0) * std::exp(-log_b);
}

/// Default weight of the uniform component mixed into analytic densities
/// that vanish at an endpoint.
inline constexpr double kBetaFloorWeight = 1e-3;

inline DensityEstimate floored_beta(double alpha, double beta, std::size_t n,
                                    double weight = kBetaFloorWeight) {
  return DensityEstimate::from_pdf(
      GridFunction::sample(n, [=](double x) {
        return (1.0 - weight) * beta_pdf(alpha, beta, x) + weight;
      }),
      weight);
}

inline BetaMeansResult run_beta_means(std::size_t n = kDefaultGridSize,
                                      double floor_weight = kBetaFloorWeight) {
  std::vector<DensityEstimate> inputs;
  for (const auto& [a, b] : beta_parameters()) inputs.push_back(floored_beta(a, b, n, floor_weight));
  DensityEstimate mean = karcher_mean_densities(inputs);
  const double obj = karcher_objective(mean, inputs);
  std::vector<double> input_obj;
  for (const auto& f : inputs) input_obj.push_back(karcher_objective(f, inputs));
  return BetaMeansResult{std::move(inputs), std::move(mean), obj, std::move(input_obj)};
}

// ---------------------------------------------------------------------------
// Classification

struct ClassificationReport {
  std::vector<std::string> classes;
  /// confusion[true][predicted]
  std::vector<std::vector<std::size_t>> confusion;
  double accuracy = 0.0;
  std::vector<double> per_class_accuracy;
  std::vector<std::size_t> predictions;
};

struct ClassifierOptions {
  EstimatorConfig estimator = [] {
    EstimatorConfig c;
    c.alignment = AlignmentMethod::dynamic_programming;
    c.dp_penalty = 0.01;
    return c;
  }();
  Metric metric = Metric::ext;
};

/// Density of one trial under `cfg`; an empty trial gives the uniform
/// density (the modified estimate with m = 0).
inline DensityEstimate trial_density(const EventSequence& x, const EstimatorConfig& cfg) {
  if (x.empty()) return DensityEstimate::from_pdf(GridFunction::constant(cfg.grid_size, 1.0), 1.0);
  const double h = trial_bandwidth(x, cfg);
  return kde_modified(x, KernelSpec{cfg.kernel, h}, cfg.grid_size);
}

/// Nearest class mean. Classes are the sorted distinct labels of train and
/// test; ties go to the lowest class index.
inline ClassificationReport run_classification(const TrialSet& train, const TrialSet& test,
                                               const ClassifierOptions& opt = {}) {
  if (!train.labels || !test.labels) throw DataError("classification needs labeled trials");
  train.validate();
  test.validate();
  const EstimatorConfig& cfg = opt.estimator;
  cfg.validate();

  std::set<std::string> label_set(train.labels->begin(), train.labels->end());
  label_set.insert(test.labels->begin(), test.labels->end());
  std::vector<std::string> classes(label_set.begin(), label_set.end());
  if (classes.empty()) throw DataError("classification needs at least one class");
  std::map<std::string, std::size_t> index;
  for (std::size_t c = 0; c < classes.size(); ++c) index[classes[c]] = c;

  std::vector<DensityEstimate> means;
  for (const auto& label : classes) {
    TrialSet subset;
    for (std::size_t i = 0; i < train.size(); ++i) {
      if ((*train.labels)[i] != label) continue;
      subset.trials.push_back(train.trials[i]);
      subset.ids.push_back(train.ids[i]);
    }
    if (subset.trials.empty()) {
      throw DataError("class '" + label + "' has no training trials");
    }
    means.push_back(estimate_intensity(subset, cfg).density);
  }

  std::vector<std::size_t> predictions(test.size());
  parallel_for(test.size(), cfg.jobs, [&](std::size_t i) {
    const DensityEstimate d = trial_density(test.trials[i], cfg);
    std::size_t best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < means.size(); ++c) {
      const double dist = distance(opt.metric, d, means[c]);
      if (dist < best_dist) {
        best_dist = dist;
        best = c;
      }
    }
    predictions[i] = best;
  });

  ClassificationReport rep;
  rep.classes = classes;
  rep.confusion.assign(classes.size(), std::vector<std::size_t>(classes.size(), 0));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const std::size_t truth = index.at((*test.labels)[i]);
    ++rep.confusion[truth][predictions[i]];
    if (truth == predictions[i]) ++correct;
  }
  rep.accuracy = test.size() == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(test.size());
  for (std::size_t c = 0; c < classes.size(); ++c) {
    std::size_t row = 0;
    for (std::size_t v : rep.confusion[c]) row += v;
    rep.per_class_accuracy.push_back(row == 0 ? 0.0
                                              : static_cast<double>(rep.confusion[c][c]) /
                                                    static_cast<double>(row));
  }
  rep.predictions = std::move(predictions);
  return rep;
}

struct SurrogateOptions {
  std::uint64_t seed = 0;
  std::size_t train_per_class = 30;
  std::size_t test_per_class = 30;
  double total = 150.0;
  double warp_range = 1.0;
  std::size_t grid_size = kDefaultGridSize;
  std::size_t jobs = 1;
};

/// Four bimodal class densities: a uniform component of weight 0.4 plus two
/// Gaussian bumps (sd 0.06) that differ in location and weight between
/// classes. Density ratios stay below about 10.
inline std::vector<GridFunction> surrogate_class_densities(std::size_t n = kDefaultGridSize) {
  struct Bumps {
    double m1, w1, m2, w2;
  };
  static constexpr Bumps classes[] = {
      {0.25, 0.5, 0.75, 0.5},
      {0.20, 0.8, 0.60, 0.2},
      {0.40, 0.2, 0.80, 0.8},
      {0.45, 0.5, 0.60, 0.5},
  };
  constexpr double sd = 0.06;
  constexpr double base = 0.4;
  std::vector<GridFunction> out;
  for (const auto& b : classes) {
    auto bump = [](double t, double m) {
      const double z = (t - m) / sd;
      return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
    };
    GridFunction f = GridFunction::sample(n, [&](double t) {
      return base + (1.0 - base) * (b.w1 * bump(t, b.m1) + b.w2 * bump(t, b.m2));
    });
    out.push_back((1.0 / integrate(f)) * f);
  }
  return out;
}

/// Labeled train/test sets drawn from the four surrogate classes, each trial
/// under its own exponential warp with a ~ U[-warp_range, warp_range].
inline std::pair<TrialSet, TrialSet> make_classification_surrogate(const SurrogateOptions& opt) {
  const std::vector<GridFunction> densities = surrogate_class_densities(opt.grid_size);
  const std::size_t per_class = opt.train_per_class + opt.test_per_class;
  const std::size_t total_trials = densities.size() * per_class;
  std::vector<EventSequence> events(total_trials);
  parallel_for(total_trials, opt.jobs, [&](std::size_t idx) {
    const std::size_t c = idx / per_class;
    CounterRng warp_rng(derive_seed(opt.seed, 1'000'000 + idx));
    const double a = opt.warp_range * (2.0 * warp_rng.uniform() - 1.0);
    const GridFunction lambda = opt.total * densities[c];
    events[idx] =
        warp_events(simulate_pp(lambda, derive_seed(opt.seed, idx)), exp_warp(a, opt.grid_size));
  });

  TrialSet train;
  TrialSet test;
  train.labels.emplace();
  test.labels.emplace();
  for (std::size_t idx = 0; idx < total_trials; ++idx) {
    const std::size_t c = idx / per_class;
    const std::size_t r = idx % per_class;
    const std::string label = "class_" + std::to_string(c);
    const bool is_train = r < opt.train_per_class;
    TrialSet& dst = is_train ? train : test;
    dst.trials.push_back(std::move(events[idx]));
    dst.ids.push_back(label + (is_train ? "_train_" : "_test_") +
                      std::to_string(is_train ? r : r - opt.train_per_class));
    dst.labels->push_back(label);
  }
  return {std::move(train), std::move(test)};
}

// ---------------------------------------------------------------------------
// Recorded spike trains

struct IngestResult {
  TrialSet trials;
  /// Events beyond normalize_to (or below 0) that were clamped into [0,1].
  std::size_t clamped = 0;
};

/// Reads trials with times in seconds and rescales them to [0,1] by
/// dividing by `normalize_to`.
inline IngestResult ingest_spike_trains(const std::filesystem::path& path,
                                        double normalize_to = 5.0) {
  if (!(normalize_to > 0.0)) throw InvalidArgument("normalize_to must be positive");
  const std::string source = path.string();
  RawTrials raw = parse_raw_trials(read_text(path), source);
  std::size_t clamped = 0;
  for (auto& ev : raw.events) {
    for (double& e : ev) {
      const double u = e / normalize_to;
      if (u < 0.0 || u > 1.0) ++clamped;
      e = std::clamp(u, 0.0, 1.0);
    }
  }
  return IngestResult{trial_set_from_raw(std::move(raw), source), clamped};
}

}  // namespace phasewarp
