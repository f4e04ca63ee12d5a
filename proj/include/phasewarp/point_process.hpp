#pragma once

// Realizations of nonhomogeneous Poisson processes on [0,1] and their
// warped versions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "phasewarp/error.hpp"
#include "phasewarp/grid_fn.hpp"
#include "phasewarp/random.hpp"

namespace phasewarp {

/// Sorted event times in [0,1]. Duplicates allowed.
class EventSequence {
 public:
  EventSequence() = default;

  explicit EventSequence(std::vector<double> events) : events_(std::move(events)) {
    for (double e : events_) {
      if (!(e >= 0.0 && e <= 1.0)) {
        throw InvalidArgument("event time " + std::to_string(e) + " outside [0,1]");
      }
    }
    std::sort(events_.begin(), events_.end());
  }

  std::size_t count() const noexcept { return events_.size(); }
  bool empty() const noexcept { return events_.empty(); }
  std::span<const double> events() const noexcept { return events_; }
  double operator[](std::size_t i) const { return events_[i]; }

  bool operator==(const EventSequence&) const = default;

 private:
  std::vector<double> events_;
};

/// A set of trials with optional ids and class labels.
struct TrialSet {
  std::vector<EventSequence> trials;
  std::vector<std::string> ids;
  std::optional<std::vector<std::string>> labels;

  TrialSet() = default;

  explicit TrialSet(std::vector<EventSequence> t,
                    std::optional<std::vector<std::string>> l = std::nullopt)
      : trials(std::move(t)), labels(std::move(l)) {
    ids.reserve(trials.size());
    for (std::size_t i = 0; i < trials.size(); ++i) ids.push_back(std::to_string(i));
    validate();
  }

  std::size_t size() const noexcept { return trials.size(); }

  void validate() const {
    if (ids.size() != trials.size()) throw InvalidArgument("TrialSet: ids/trials length mismatch");
    if (labels && labels->size() != trials.size()) {
      throw InvalidArgument("TrialSet: labels/trials length mismatch");
    }
  }
};

/// One realization of PP(lambda): K ~ Poisson(Lambda), then K i.i.d. times
/// from lambda / Lambda by exact inversion of its piecewise-quadratic CDF.
inline EventSequence simulate_pp(const GridFunction& lambda, std::uint64_t seed) {
  if (lambda.min() < 0.0) throw InvalidArgument("simulate_pp: intensity must be nonnegative");
  const double total = integrate(lambda);
  if (!(total > 0.0)) throw InvalidArgument("simulate_pp: total intensity must be positive");

  const std::size_t n = lambda.size();
  const double h = lambda.spacing();
  std::vector<double> cell_mass(n); // cell_mass[k] = mass of [t_0, t_k]
  cell_mass[0] = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    cell_mass[k] = cell_mass[k - 1] + 0.5 * h * (lambda[k - 1] + lambda[k]);
  }

  CounterRng rng(seed);
  std::poisson_distribution<long long> count_dist(total);
  const long long count = count_dist(rng);

  std::vector<double> events;
  events.reserve(static_cast<std::size_t>(count));
  for (long long i = 0; i < count; ++i) {
    const double target = rng.uniform() * cell_mass.back();
    auto it = std::upper_bound(cell_mass.begin() + 1, cell_mass.end(), target);
    if (it == cell_mass.end()) --it;
    const std::size_t k = static_cast<std::size_t>(std::distance(cell_mass.begin(), it)) - 1;
    const double r = target - cell_mass[k];
    const double a = lambda[k];
    const double b = lambda[k + 1];
    // a x + (b - a) x^2 / (2h) = r, written to stay stable when a == 0 or a == b.
    const double disc = std::max(0.0, a * a + 2.0 * (b - a) * r / h);
    const double denom = a + std::sqrt(disc);
    const double x = denom > 0.0 ? 2.0 * r / denom : 0.0;
    events.push_back(std::clamp(lambda.node(k) + std::clamp(x, 0.0, h), 0.0, 1.0));
  }
  return EventSequence(std::move(events));
}

/// s_j = gamma^{-1}(r_j) for every event.
inline EventSequence warp_events(const EventSequence& r, const WarpingFunction& g) {
  const WarpingFunction inv = invert_monotone(g);
  std::vector<double> out;
  out.reserve(r.count());
  for (double e : r.events()) out.push_back(std::clamp(evaluate(inv, e), 0.0, 1.0));
  return EventSequence(std::move(out));
}

/// Mean event count over trials, the MLE of the total intensity.
inline double mle_total_intensity(const TrialSet& ts) {
  if (ts.trials.empty()) throw InvalidArgument("mle_total_intensity: empty trial set");
  double sum = 0.0;
  for (const auto& t : ts.trials) sum += static_cast<double>(t.count());
  return sum / static_cast<double>(ts.trials.size());
}

}  // namespace phasewarp
