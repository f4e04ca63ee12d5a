#pragma once

// The `phasewarp` command line: simulate, estimate, distance, classify and
// reproduce. Kept in a header so tests can drive it in-process.

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "phasewarp/phasewarp.hpp"

namespace phasewarp::cli {

using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

/// A flag value that parses but is not meaningful (bad warp spec, ...).
class UsageError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Spec parsing

inline double spec_number(const std::string& text, const std::string& spec) {
  const auto v = parse_double(text);
  if (!v) throw UsageError("bad number in spec '" + spec + "'");
  return *v;
}

/// `id`, `exp:a=<real>`, `power-lin:e=<real>` or `file:<csv>`.
inline WarpingFunction parse_warp_spec(const std::string& spec, std::size_t n) {
  if (spec == "id") return WarpingFunction::identity(n);
  if (spec.rfind("exp:a=", 0) == 0) return exp_warp(spec_number(spec.substr(6), spec), n);
  if (spec.rfind("power-lin:e=", 0) == 0) {
    const double e = spec_number(spec.substr(12), spec);
    if (!(e > 0.0)) throw UsageError("power-lin exponent must be positive");
    return power_lin_warp(e, n);
  }
  if (spec.rfind("file:", 0) == 0) {
    const GridFunction g = read_grid_csv(spec.substr(5));
    try {
      return WarpingFunction(resample(g, n));
    } catch (const NumericalError& e) {
      throw DataError("warp file '" + spec.substr(5) + "': " + e.what());
    }
  }
  throw UsageError("unknown warp spec '" + spec + "' (expected id, exp:a=, power-lin:e= or file:)");
}

/// `builtin:sine`, `builtin:triangle` or a `t,value` CSV path.
inline GridFunction parse_intensity_spec(const std::string& spec, std::size_t n) {
  if (spec == "builtin:sine") return sine_intensity(n);
  if (spec == "builtin:triangle") return triangle_intensity(n);
  if (spec.rfind("builtin:", 0) == 0) throw UsageError("unknown builtin intensity '" + spec + "'");
  return resample(read_grid_csv(spec), n);
}

inline std::size_t resolve_jobs(std::size_t jobs) { return jobs == 0 ? default_jobs() : jobs; }

// ---------------------------------------------------------------------------
// Shared estimator flags

struct EstimatorFlags {
  std::string kernel = "truncated_gaussian";
  std::optional<double> bandwidth;
  bool plug_in = false;
  std::size_t grid = kDefaultGridSize;
  double penalty = 0.01;
  std::string alignment = "closed_form";
  std::size_t lattice = 201;
  std::size_t template_index = 0;

  void add_to(CLI::App* sub, const std::string& default_alignment = "closed_form") {
    alignment = default_alignment;
    sub->add_option("--kernel", kernel, "Kernel: truncated_gaussian or beta")
        ->check(CLI::IsMember({"truncated_gaussian", "beta"}));
    auto* bw = sub->add_option("--bandwidth", bandwidth, "Fixed bandwidth shared by all trials")
                   ->check(CLI::Range(1e-6, 1.0));
    auto* pi = sub->add_flag("--plug-in", plug_in, "Per-trial plug-in bandwidth (the default)");
    bw->excludes(pi);
    sub->add_option("--grid", grid, "Grid size N")->check(CLI::Range(64, 1000001));
    sub->add_option("--penalty", penalty, "Dynamic-programming warp penalty")
        ->check(CLI::Range(0.0, 1e6));
    sub->add_option("--alignment", alignment, "Pairwise alignment: closed_form or dp")
        ->check(CLI::IsMember({"closed_form", "dp"}));
    sub->add_option("--lattice", lattice, "Dynamic-programming lattice size")
        ->check(CLI::Range(3, 100001));
    sub->add_option("--template", template_index, "Template trial index of the Karcher mean");
  }

  EstimatorConfig config(std::size_t jobs) const {
    EstimatorConfig c;
    c.kernel = parse_kernel_kind(kernel);
    c.bandwidth_mode = bandwidth ? BandwidthMode::fixed : BandwidthMode::plug_in;
    if (bandwidth) c.bandwidth = *bandwidth;
    c.grid_size = grid;
    c.dp_penalty = penalty;
    c.alignment = alignment == "dp" ? AlignmentMethod::dynamic_programming : AlignmentMethod::closed_form;
    c.dp_lattice = lattice;
    c.template_index = template_index;
    c.jobs = jobs;
    return c;
  }

  void echo(ordered_json& j) const {
    j["kernel"] = kernel;
    j["bandwidth"] = bandwidth ? ordered_json(*bandwidth) : ordered_json("plug-in");
    j["grid"] = grid;
    j["penalty"] = penalty;
    j["alignment"] = alignment;
    j["lattice"] = lattice;
    j["template"] = template_index;
  }
};

inline ordered_json estimator_json(const EstimatorConfig& c) {
  return ordered_json{
      {"kernel", to_string(c.kernel)},
      {"bandwidth", c.bandwidth_mode == BandwidthMode::fixed ? ordered_json(c.bandwidth)
                                                             : ordered_json("plug-in")},
      {"grid", c.grid_size},
      {"mean_method", to_string(c.mean_method)},
      {"nonneg", c.nonneg_mode},
      {"penalty", c.dp_penalty},
      {"alignment", c.alignment == AlignmentMethod::dynamic_programming ? "dp" : "closed_form"},
      {"lattice", c.dp_lattice},
      {"template", c.template_index}};
}

inline ordered_json errors_json(const IntensityErrors& e) {
  return ordered_json{{"l1", e.l1}, {"l2", e.l2}, {"linf", e.linf}};
}

inline TrialSet load_trials(const std::string& path, double normalize_to, std::size_t* clamped) {
  if (normalize_to > 0.0) {
    IngestResult r = ingest_spike_trains(path, normalize_to);
    if (clamped) *clamped = r.clamped;
    return std::move(r.trials);
  }
  if (clamped) *clamped = 0;
  return read_trial_set(path);
}

/// Per-trial CSV names, made unique.
inline std::vector<std::string> trial_file_names(const std::vector<std::string>& ids) {
  std::vector<std::string> names;
  std::set<std::string> used;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    std::string stem = safe_file_stem(ids[i]);
    if (used.count(stem)) stem += "_" + std::to_string(i);
    used.insert(stem);
    names.push_back(stem + ".csv");
  }
  return names;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  std::string intensity;
  std::size_t n = 20;
  std::vector<std::string> warps{"id"};
  std::uint64_t seed = 0;
  std::size_t grid = kDefaultGridSize;
  std::string out;
};

inline void run_simulate(const SimulateArgs& a, bool force, std::size_t jobs) {
  const GridFunction lambda = parse_intensity_spec(a.intensity, a.grid);
  if (a.warps.size() != 1 && a.warps.size() != a.n) {
    throw UsageError("give one --warp for all trials or exactly --n of them");
  }
  std::vector<WarpingFunction> warps;
  for (std::size_t i = 0; i < a.n; ++i) {
    warps.push_back(parse_warp_spec(a.warps[a.warps.size() == 1 ? 0 : i], a.grid));
  }
  prepare_output_dir(a.out, force);
  TrialSet original;
  const TrialSet observed = simulate_warped_trials(lambda, warps, a.seed, &original, jobs);

  const fs::path dir = a.out;
  write_trial_set(dir / "trials.jsonl", observed);
  write_trial_set(dir / "original.jsonl", original);
  write_grid_csv(dir / "intensity.csv", lambda);
  ordered_json cfg{{"subcommand", "simulate"}, {"intensity", a.intensity}, {"n", a.n},
                   {"warp", a.warps},          {"seed", a.seed},           {"grid", a.grid}};
  write_json(dir / "config.json", cfg);
  std::vector<std::size_t> counts;
  for (const auto& t : observed.trials) counts.push_back(t.count());
  ordered_json summary{{"total_intensity", integrate(lambda)},
                       {"n_trials", observed.size()},
                       {"mean_count", mle_total_intensity(observed)},
                       {"counts", counts}};
  write_json(dir / "summary.json", summary);
}

// ---------------------------------------------------------------------------
// estimate

struct EstimateArgs {
  std::string in;
  std::string method = "proposed";
  bool nonneg = false;
  EstimatorFlags est;
  std::string truth;
  double normalize_to = 0.0;
  std::string out;
};

inline void run_estimate(const EstimateArgs& a, bool force, std::size_t jobs) {
  EstimatorConfig cfg = a.est.config(jobs);
  cfg.mean_method = parse_mean_method(a.method);
  cfg.nonneg_mode = a.nonneg;
  cfg.validate();
  std::size_t clamped = 0;
  const TrialSet ts = load_trials(a.in, a.normalize_to, &clamped);
  std::optional<GridFunction> truth;
  if (!a.truth.empty()) truth = resample(read_grid_csv(a.truth), cfg.grid_size);
  const IntensityEstimate est = estimate_intensity(ts, cfg);

  prepare_output_dir(a.out, force);
  const fs::path dir = a.out;
  const GridFunction lam = est.intensity();
  write_grid_csv(dir / "intensity.csv", lam);
  write_grid_csv(dir / "density.csv", est.density.pdf());
  write_grid_csv(dir / "cdf.csv", est.density.cdf());
  const auto names = trial_file_names(ts.ids);
  ordered_json bandwidths = ordered_json::object();
  std::size_t empty = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const auto& t = est.per_trial[i];
    if (!t) {
      ++empty;
      continue;
    }
    bandwidths[ts.ids[i]] = t->bandwidth;
    write_text(dir / "per_trial" / names[i],
               columns_to_csv({"density", "intensity"}, {&t->density.pdf(), &t->intensity}));
  }

  ordered_json cfg_json{{"subcommand", "estimate"}, {"in", a.in}, {"method", a.method},
                        {"nonneg", a.nonneg}};
  a.est.echo(cfg_json);
  cfg_json["truth"] = a.truth.empty() ? ordered_json(nullptr) : ordered_json(a.truth);
  cfg_json["normalize_to"] = a.normalize_to;
  write_json(dir / "config.json", cfg_json);

  ordered_json summary{{"total_intensity", est.total},
                       {"n_trials", ts.size()},
                       {"n_empty_trials", empty},
                       {"clamped_events", clamped},
                       {"bandwidths", bandwidths}};
  if (truth) summary["errors"] = errors_json(intensity_errors(lam, *truth));
  write_json(dir / "summary.json", summary);
}

// ---------------------------------------------------------------------------
// distance

struct DistanceArgs {
  std::string in;
  std::string metric = "ext";
  EstimatorFlags est;
  double normalize_to = 0.0;
  std::string out;
};

inline void run_distance(const DistanceArgs& a, bool force, std::size_t jobs) {
  EstimatorConfig cfg = a.est.config(jobs);
  cfg.validate();
  const Metric metric = parse_metric(a.metric);
  const TrialSet ts = load_trials(a.in, a.normalize_to, nullptr);
  const fs::path out = a.out;
  fs::path cfg_path = out;
  cfg_path.replace_extension(".config.json");
  if (!force && (fs::exists(out) || fs::exists(cfg_path))) {
    throw OutputExists("'" + out.string() + "' exists; pass --force to overwrite");
  }

  std::vector<DensityEstimate> ds(ts.size(), DensityEstimate::from_pdf(GridFunction::constant(cfg.grid_size, 1.0)));
  parallel_for(ts.size(), jobs, [&](std::size_t i) { ds[i] = trial_density(ts.trials[i], cfg); });
  const std::size_t n = ts.size();
  std::vector<double> d(n * n, 0.0);
  parallel_for(n, jobs, [&](std::size_t i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) d[i * n + j] = distance(metric, ds[i], ds[j]);
    }
  });

  std::string csv = "trial_id";
  for (const auto& id : ts.ids) csv += "," + id;
  csv += "\n";
  for (std::size_t i = 0; i < n; ++i) {
    csv += ts.ids[i];
    for (std::size_t j = 0; j < n; ++j) csv += "," + format_double(d[i * n + j]);
    csv += "\n";
  }
  write_text(out, csv);
  ordered_json cfg_json{{"subcommand", "distance"}, {"in", a.in}, {"metric", a.metric}};
  a.est.echo(cfg_json);
  cfg_json["normalize_to"] = a.normalize_to;
  write_json(cfg_path, cfg_json);
}

// ---------------------------------------------------------------------------
// classify

struct ClassifyArgs {
  std::string train;
  std::string test;
  std::string metric = "ext";
  std::string method = "proposed";
  EstimatorFlags est;
  double normalize_to = 0.0;
  std::string out;
};

inline ordered_json report_json(const ClassificationReport& r) {
  return ordered_json{{"classes", r.classes},
                      {"confusion", r.confusion},
                      {"accuracy", r.accuracy},
                      {"per_class_accuracy", r.per_class_accuracy}};
}

inline std::string predictions_csv(const TrialSet& test, const ClassificationReport& r) {
  std::string csv = "trial_id,label,predicted\n";
  for (std::size_t i = 0; i < test.size(); ++i) {
    csv += test.ids[i] + "," + (*test.labels)[i] + "," + r.classes[r.predictions[i]] + "\n";
  }
  return csv;
}

inline void run_classify(const ClassifyArgs& a, bool force, std::size_t jobs) {
  ClassifierOptions opt;
  opt.estimator = a.est.config(jobs);
  opt.estimator.mean_method = parse_mean_method(a.method);
  opt.metric = parse_metric(a.metric);
  opt.estimator.validate();
  std::size_t clamped_train = 0;
  std::size_t clamped_test = 0;
  const TrialSet train = load_trials(a.train, a.normalize_to, &clamped_train);
  const TrialSet test = load_trials(a.test, a.normalize_to, &clamped_test);
  if (!train.labels) throw DataError("'" + a.train + "' has no labels");
  if (!test.labels) throw DataError("'" + a.test + "' has no labels");
  const ClassificationReport rep = run_classification(train, test, opt);

  prepare_output_dir(a.out, force);
  const fs::path dir = a.out;
  write_json(dir / "report.json", report_json(rep));
  write_text(dir / "predictions.csv", predictions_csv(test, rep));
  ordered_json cfg_json{{"subcommand", "classify"}, {"train", a.train}, {"test", a.test},
                        {"metric", a.metric},       {"method", a.method}};
  a.est.echo(cfg_json);
  cfg_json["normalize_to"] = a.normalize_to;
  write_json(dir / "config.json", cfg_json);
  std::size_t correct = 0;
  for (std::size_t c = 0; c < rep.classes.size(); ++c) correct += rep.confusion[c][c];
  write_json(dir / "summary.json", ordered_json{{"accuracy", rep.accuracy},
                                                {"correct", correct},
                                                {"n_train", train.size()},
                                                {"n_test", test.size()},
                                                {"clamped_events", clamped_train + clamped_test}});
}

// ---------------------------------------------------------------------------
// reproduce

struct ReproduceArgs {
  std::string scenario;
  std::uint64_t seed = 0;
  std::size_t grid = kDefaultGridSize;
  bool baselines = false;
  std::string out;
};

inline void write_sim1(const fs::path& dir, const Sim1Result& r, const ordered_json& estimator) {
  std::string table = "method,l1,l2,linf\n";
  for (const auto& o : r.outcomes) {
    table += to_string(o.method) + "," + format_double(o.errors.l1) + "," +
             format_double(o.errors.l2) + "," + format_double(o.errors.linf) + "\n";
  }
  write_text(dir / "table2.csv", table);
  write_grid_csv(dir / "truth.csv", r.truth);
  for (const auto& o : r.outcomes) write_grid_csv(dir / ("intensity_" + to_string(o.method) + ".csv"), o.intensity);
  write_trial_set(dir / "observed.jsonl", r.observed);
  write_trial_set(dir / "original.jsonl", r.original);
  std::vector<std::string> names;
  std::vector<const GridFunction*> cols;
  for (std::size_t i = 0; i < r.warps.size(); ++i) {
    names.push_back("gamma_" + std::to_string(i));
    cols.push_back(&r.warps[i].base());
  }
  write_text(dir / "warps.csv", columns_to_csv(names, cols));
  ordered_json errors = ordered_json::object();
  for (const auto& o : r.outcomes) errors[to_string(o.method)] = errors_json(o.errors);
  write_json(dir / "summary.json", ordered_json{{"true_total", r.true_total},
                                                {"total_hat", r.total_hat},
                                                {"warp_parameters", r.warp_parameters},
                                                {"estimator", estimator},
                                                {"errors", errors}});
}

inline void write_sim2(const fs::path& dir, const Sim2Report& r) {
  write_grid_csv(dir / "truth.csv", r.truth);
  write_grid_csv(dir / "intensity.csv", r.estimate.intensity());
  write_grid_csv(dir / "density.csv", r.estimate.density.pdf());
  write_trial_set(dir / "observed.jsonl", r.observed);
  ordered_json flats = ordered_json::array();
  for (const auto& f : r.flats.intervals) flats.push_back(ordered_json{{"begin", f.begin}, {"end", f.end}});
  write_json(dir / "summary.json", ordered_json{{"total_hat", r.estimate.total},
                                                {"peak_location", r.peak_location},
                                                {"mass_outside", r.mass_outside},
                                                {"flats", flats},
                                                {"flat_linearity_residual", r.flat_linearity_residual},
                                                {"errors", errors_json(r.errors)}});
}

inline void write_beta_means(const fs::path& dir, const BetaMeansResult& r) {
  std::vector<std::string> names;
  std::vector<const GridFunction*> cols;
  for (std::size_t i = 0; i < r.inputs.size(); ++i) {
    const auto [a, b] = beta_parameters()[i];
    names.push_back("beta_" + format_double(a) + "_" + format_double(b));
    cols.push_back(&r.inputs[i].pdf());
  }
  write_text(dir / "inputs.csv", columns_to_csv(names, cols));
  write_grid_csv(dir / "mean_density.csv", r.mean.pdf());
  write_grid_csv(dir / "mean_cdf.csv", r.mean.cdf());
  write_json(dir / "summary.json", ordered_json{{"objective_mean", r.mean_objective},
                                                {"objective_inputs", r.input_objectives},
                                                {"floor_weight", kBetaFloorWeight}});
}

inline void run_reproduce(const ReproduceArgs& a, bool force, std::size_t jobs) {
  const fs::path dir = a.out;
  ordered_json cfg_json{{"subcommand", "reproduce"}, {"scenario", a.scenario}, {"seed", a.seed},
                        {"grid", a.grid}};
  if (a.scenario == "sim1" || a.scenario == "sim1_severe") {
    Sim1Options o;
    o.severe = a.scenario == "sim1_severe";
    o.seed = a.seed;
    o.estimator.grid_size = a.grid;
    o.estimator.jobs = jobs;
    const Sim1Result r = run_sim1(o);
    prepare_output_dir(dir, force);
    write_sim1(dir, r, estimator_json(o.estimator));
    cfg_json["n_trials"] = o.n_trials;
    cfg_json["estimator"] = estimator_json(o.estimator);
  } else if (a.scenario == "sim2") {
    Sim2Options o;
    o.seed = a.seed;
    o.grid_size = a.grid;
    o.jobs = jobs;
    const Sim2Report r = run_sim2(o);
    prepare_output_dir(dir, force);
    write_sim2(dir, r);
    cfg_json["kernel"] = "truncated_gaussian";
    cfg_json["bandwidth"] = o.bandwidth;
    cfg_json["nonneg"] = true;
  } else if (a.scenario == "beta_means") {
    const BetaMeansResult r = run_beta_means(a.grid);
    prepare_output_dir(dir, force);
    write_beta_means(dir, r);
    cfg_json["floor_weight"] = kBetaFloorWeight;
  } else if (a.scenario == "classify_synthetic") {
    SurrogateOptions so;
    so.seed = a.seed;
    so.grid_size = a.grid;
    so.jobs = jobs;
    const auto [train, test] = make_classification_surrogate(so);
    std::vector<MeanMethod> methods{MeanMethod::proposed};
    if (a.baselines) {
      methods.push_back(MeanMethod::cross_sectional);
      methods.push_back(MeanMethod::fisher_rao);
    }
    ordered_json accuracy = ordered_json::object();
    std::vector<ClassificationReport> reports;
    for (MeanMethod m : methods) {
      ClassifierOptions opt;
      opt.estimator.grid_size = a.grid;
      opt.estimator.mean_method = m;
      opt.estimator.jobs = jobs;
      reports.push_back(run_classification(train, test, opt));
      accuracy[to_string(m)] = reports.back().accuracy;
    }
    prepare_output_dir(dir, force);
    write_trial_set(dir / "train.jsonl", train);
    write_trial_set(dir / "test.jsonl", test);
    write_json(dir / "report.json", report_json(reports.front()));
    write_text(dir / "predictions.csv", predictions_csv(test, reports.front()));
    write_json(dir / "summary.json", ordered_json{{"accuracy", accuracy}});
    cfg_json["baselines"] = a.baselines;
    cfg_json["surrogate"] = ordered_json{{"train_per_class", so.train_per_class},
                                         {"test_per_class", so.test_per_class},
                                         {"total", so.total},
                                         {"warp_range", so.warp_range}};
    ClassifierOptions shown;
    shown.estimator.grid_size = a.grid;
    cfg_json["estimator"] = estimator_json(shown.estimator);
    cfg_json["metric"] = to_string(shown.metric);
  } else {
    throw UsageError("unknown scenario '" + a.scenario + "'");
  }
  write_json(dir / "config.json", cfg_json);
}

// ---------------------------------------------------------------------------
// Entry point

struct Invocation {
  bool force = false;
  std::size_t jobs = 0;
  SimulateArgs simulate;
  EstimateArgs estimate;
  DistanceArgs distance;
  ClassifyArgs classify;
  ReproduceArgs reproduce;
};

inline void build_app(CLI::App& app, Invocation& inv) {
  app.description("Intensity estimation for time-warped Poisson processes");
  app.option_defaults()->always_capture_default();
  app.set_help_all_flag("--help-all", "Print help for all subcommands");
  app.require_subcommand(1, 1);

  auto common = [&](CLI::App* sub) {
    sub->add_flag("--force", inv.force, "Overwrite an existing output");
    sub->add_option("--jobs", inv.jobs, "Worker threads (0 = all cores)");
  };

  {
    auto* sub = app.add_subcommand("simulate", "Simulate warped Poisson process trials");
    auto& a = inv.simulate;
    sub->add_option("--intensity", a.intensity, "builtin:sine, builtin:triangle or a t,value CSV")
        ->required();
    sub->add_option("--n", a.n, "Number of trials")->check(CLI::Range(1, 1000000));
    sub->add_option("--warp", a.warps,
                    "Warp spec (id, exp:a=<a>, power-lin:e=<e>, file:<csv>); one for all trials or one per trial");
    sub->add_option("--seed", a.seed, "Random seed");
    sub->add_option("--grid", a.grid, "Grid size N")->check(CLI::Range(64, 1000001));
    sub->add_option("--out", a.out, "Output directory")->required();
    common(sub);
  }
  {
    auto* sub = app.add_subcommand("estimate", "Estimate the intensity from warped trials");
    auto& a = inv.estimate;
    sub->add_option("--in", a.in, "Trial file (JSON lines or plain text)")->required();
    sub->add_option("--method", a.method, "Mean: proposed, fisher_rao, wasserstein, cross_sectional")
        ->check(CLI::IsMember({"proposed", "fisher_rao", "wasserstein", "cross_sectional"}));
    sub->add_flag("--nonneg", a.nonneg, "Allow zero-intensity regions");
    a.est.add_to(sub);
    sub->add_option("--truth", a.truth, "True intensity CSV for error norms");
    sub->add_option("--normalize-to", a.normalize_to, "Divide event times by this many seconds (0 = off)")
        ->check(CLI::Range(0.0, 1e12));
    sub->add_option("--out", a.out, "Output directory")->required();
    common(sub);
  }
  {
    auto* sub = app.add_subcommand("distance", "Pairwise distances between trial densities");
    auto& a = inv.distance;
    sub->add_option("--in", a.in, "Trial file (JSON lines or plain text)")->required();
    sub->add_option("--metric", a.metric, "ext, int, wasserstein, hellinger, bhattacharyya, fisher_rao")
        ->check(CLI::IsMember({"ext", "int", "wasserstein", "hellinger", "bhattacharyya", "fisher_rao"}));
    a.est.add_to(sub);
    sub->add_option("--normalize-to", a.normalize_to, "Divide event times by this many seconds (0 = off)")
        ->check(CLI::Range(0.0, 1e12));
    sub->add_option("--out", a.out, "Output CSV")->required();
    common(sub);
  }
  {
    auto* sub = app.add_subcommand("classify", "Nearest-mean classification of labeled trials");
    auto& a = inv.classify;
    sub->add_option("--train", a.train, "Labeled training trials")->required();
    sub->add_option("--test", a.test, "Labeled test trials")->required();
    sub->add_option("--metric", a.metric, "Distance to class means")
        ->check(CLI::IsMember({"ext", "int", "wasserstein", "hellinger", "bhattacharyya", "fisher_rao"}));
    sub->add_option("--method", a.method, "Class mean: proposed, fisher_rao, wasserstein, cross_sectional")
        ->check(CLI::IsMember({"proposed", "fisher_rao", "wasserstein", "cross_sectional"}));
    a.est.add_to(sub, "dp");
    sub->add_option("--normalize-to", a.normalize_to, "Divide event times by this many seconds (0 = off)")
        ->check(CLI::Range(0.0, 1e12));
    sub->add_option("--out", a.out, "Output directory")->required();
    common(sub);
  }
  {
    auto* sub = app.add_subcommand("reproduce", "Run a built-in experiment");
    auto& a = inv.reproduce;
    sub->add_option("--scenario", a.scenario, "sim1, sim1_severe, sim2, beta_means, classify_synthetic")
        ->required()
        ->check(CLI::IsMember({"sim1", "sim1_severe", "sim2", "beta_means", "classify_synthetic"}));
    sub->add_option("--seed", a.seed, "Random seed");
    sub->add_option("--grid", a.grid, "Grid size N")->check(CLI::Range(64, 1000001));
    sub->add_flag("--baselines", a.baselines, "classify_synthetic: also run the baseline means");
    sub->add_option("--out", a.out, "Output directory")->required();
    common(sub);
  }
}

/// Runs the command line; returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"", "phasewarp"};
  Invocation inv;
  build_app(app, inv);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }
  const std::size_t jobs = resolve_jobs(inv.jobs);
  try {
    if (app.got_subcommand("simulate")) run_simulate(inv.simulate, inv.force, jobs);
    if (app.got_subcommand("estimate")) run_estimate(inv.estimate, inv.force, jobs);
    if (app.got_subcommand("distance")) run_distance(inv.distance, inv.force, jobs);
    if (app.got_subcommand("classify")) run_classify(inv.classify, inv.force, jobs);
    if (app.got_subcommand("reproduce")) run_reproduce(inv.reproduce, inv.force, jobs);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const OutputExists& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kData;
  } catch (const InvalidArgument& e) {
    err << "data error: " << e.what() << "\n";
    return kData;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const fs::filesystem_error& e) {
    err << "data error: " << e.what() << "\n";
    return kData;
  }
  return kOk;
}

}  // namespace phasewarp::cli
