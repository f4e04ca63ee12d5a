#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <random>

#include "test_support.hpp"

using namespace phasewarp;

namespace {

/// Pearson chi-square p-value of binned event counts against cell masses.
double chi_square_p(const std::vector<double>& events, const std::vector<double>& cell_mass) {
  const std::size_t bins = cell_mass.size();
  std::vector<double> observed(bins, 0.0);
  for (double e : events) observed[std::min(bins - 1, static_cast<std::size_t>(e * bins))] += 1.0;
  double total_mass = 0.0;
  for (double m : cell_mass) total_mass += m;
  double stat = 0.0;
  for (std::size_t b = 0; b < bins; ++b) {
    const double expected = static_cast<double>(events.size()) * cell_mass[b] / total_mass;
    stat += (observed[b] - expected) * (observed[b] - expected) / expected;
  }
  boost::math::chi_squared dist(static_cast<double>(bins - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

}  // namespace

TEST(SimulatePp, RejectsZeroOrNegativeIntensity) {
  EXPECT_THROW(simulate_pp(GridFunction::constant(101, 0.0), 1), InvalidArgument);
  EXPECT_THROW(simulate_pp(GridFunction::sample(101, [](double t) { return t - 0.5; }), 1),
               InvalidArgument);
}

TEST(SimulatePp, ConstantIntensityMeanCount) {
  const auto lambda = GridFunction::constant(101, 5.0);
  double sum = 0.0;
  for (std::uint64_t s = 0; s < 10000; ++s) sum += static_cast<double>(simulate_pp(lambda, s).count());
  EXPECT_NEAR(sum / 10000.0, 5.0, 0.1);
}

TEST(SimulatePp, SineIntensityHistogram) {
  const auto lambda = sine_intensity();
  std::vector<double> events;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const auto ev = simulate_pp(lambda, derive_seed(77, s));
    events.insert(events.end(), ev.events().begin(), ev.events().end());
  }
  const std::size_t bins = 50;
  std::vector<double> mass(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    mass[b] = pwtest::sine_cumulative((b + 1.0) / bins) - pwtest::sine_cumulative(static_cast<double>(b) / bins);
  }
  EXPECT_GT(chi_square_p(events, mass), 0.01);
}

TEST(SimulatePp, DeterministicGivenSeed) {
  const auto lambda = sine_intensity();
  EXPECT_EQ(simulate_pp(lambda, 42), simulate_pp(lambda, 42));
  EXPECT_NE(simulate_pp(lambda, 42), simulate_pp(lambda, 43));
}

TEST(SimulatePp, EventsSortedInUnitInterval) {
  const auto ev = simulate_pp(triangle_intensity(), 5);
  for (std::size_t i = 0; i < ev.count(); ++i) {
    EXPECT_GE(ev[i], 0.25 - 1e-12);
    EXPECT_LE(ev[i], 0.75 + 1e-12);
    if (i) EXPECT_LE(ev[i - 1], ev[i]);
  }
}

TEST(SimulatePp, DisjointIntervalCountsUncorrelated) {
  const auto lambda = sine_intensity(201);
  const int reps = 10000;
  std::vector<double> a(reps), b(reps);
  for (int s = 0; s < reps; ++s) {
    const auto ev = simulate_pp(lambda, derive_seed(5, s));
    for (double e : ev.events()) {
      if (e > 0.0 && e < 0.3) a[s] += 1.0;
      if (e > 0.6 && e < 1.0) b[s] += 1.0;
    }
  }
  double ma = 0, mb = 0;
  for (int i = 0; i < reps; ++i) {
    ma += a[i] / reps;
    mb += b[i] / reps;
  }
  double sab = 0, saa = 0, sbb = 0;
  for (int i = 0; i < reps; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  EXPECT_LT(std::abs(sab / std::sqrt(saa * sbb)), 0.03);
}

TEST(EventSequence, RejectsOutOfRangeAndSorts) {
  EXPECT_THROW(EventSequence({0.5, 1.5}), InvalidArgument);
  EXPECT_THROW(EventSequence({-0.1}), InvalidArgument);
  const EventSequence e({0.7, 0.1, 0.1, 1.0, 0.0});
  EXPECT_EQ(e.count(), 5u);
  EXPECT_EQ(e[0], 0.0);
  EXPECT_EQ(e[4], 1.0);
}

TEST(WarpEvents, IdentityAndRoundTrip) {
  const auto r = simulate_pp(sine_intensity(), 9);
  const auto same = warp_events(r, WarpingFunction::identity(kDefaultGridSize));
  ASSERT_EQ(same.count(), r.count());
  for (std::size_t i = 0; i < r.count(); ++i) EXPECT_NEAR(same[i], r[i], 4e-16);
  std::mt19937_64 rng(1);
  const auto g = pwtest::random_warp(rng, kDefaultGridSize, 1.0);
  const auto s = warp_events(r, g);
  ASSERT_EQ(s.count(), r.count());
  const auto back = warp_events(s, invert_monotone(g));
  for (std::size_t i = 0; i < r.count(); ++i) {
    EXPECT_NEAR(back[i], r[i], inversion_tolerance(kDefaultGridSize));
  }
}

TEST(WarpEvents, WarpedProcessHasTransformedIntensity) {
  // S = gamma^{-1}(R) with R ~ PP(lambda) is PP((lambda o gamma) gamma').
  const double a = 1.5;
  const auto lambda = sine_intensity();
  const auto g = exp_warp(a);
  std::vector<double> events;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const auto ev = warp_events(simulate_pp(lambda, derive_seed(78, s)), g);
    events.insert(events.end(), ev.events().begin(), ev.events().end());
  }
  const std::size_t bins = 50;
  std::vector<double> mass(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    const double lo = pwtest::exp_warp_exact(a, static_cast<double>(b) / bins);
    const double hi = pwtest::exp_warp_exact(a, (b + 1.0) / bins);
    mass[b] = pwtest::sine_cumulative(hi) - pwtest::sine_cumulative(lo);
  }
  EXPECT_GT(chi_square_p(events, mass), 0.01);
}

TEST(MleTotalIntensity, Examples) {
  EXPECT_DOUBLE_EQ(mle_total_intensity(TrialSet({EventSequence({0.1, 0.2, 0.3})})), 3.0);
  EXPECT_DOUBLE_EQ(mle_total_intensity(TrialSet({EventSequence(), EventSequence(), EventSequence()})), 0.0);
  EXPECT_THROW(mle_total_intensity(TrialSet()), InvalidArgument);
}

TEST(MleTotalIntensity, SineWithinThreeStandardErrors) {
  const auto lambda = sine_intensity();
  std::vector<EventSequence> trials;
  for (std::uint64_t i = 0; i < 20; ++i) trials.push_back(simulate_pp(lambda, derive_seed(3, i)));
  const double se = std::sqrt(300.0 / 20.0);
  EXPECT_NEAR(mle_total_intensity(TrialSet(std::move(trials))), 300.0, 3.0 * se);
}

TEST(TrialSet, LabelLengthMustMatch) {
  EXPECT_THROW(TrialSet({EventSequence()}, std::vector<std::string>{"a", "b"}), InvalidArgument);
}

TEST(CounterRng, StreamsAreReproducibleAndDistinct) {
  CounterRng a(derive_seed(1, 2));
  CounterRng b(derive_seed(1, 2));
  CounterRng c(derive_seed(1, 3));
  for (int i = 0; i < 10; ++i) {
    const auto x = a();
    EXPECT_EQ(x, b());
    EXPECT_NE(x, c());
  }
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    EXPECT_GT(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}
