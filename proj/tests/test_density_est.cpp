#include <gtest/gtest.h>

#include <boost/math/distributions/beta.hpp>
#include <cmath>
#include <random>

#include "test_support.hpp"

using namespace phasewarp;

namespace {

EventSequence uniform_sample(std::size_t m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> x(m);
  for (double& v : x) v = u(rng);
  return EventSequence(std::move(x));
}

EventSequence beta22_sample(std::size_t m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  boost::math::beta_distribution<double> b(2.0, 2.0);
  std::vector<double> x(m);
  for (double& v : x) v = boost::math::quantile(b, u(rng));
  return EventSequence(std::move(x));
}

/// int |f_hat - Beta(2,2)| with the analytic density on the estimate's grid,
/// refined 10x by linear interpolation of f_hat.
double l1_to_beta22(const DensityEstimate& d) {
  return pwtest::simpson([&](double t) { return std::abs(evaluate(d.pdf(), t) - 6.0 * t * (1.0 - t)); },
                         0.0, 1.0, 20000);
}

}  // namespace

TEST(Kernel, UnitMassCompactSupport) {
  for (KernelKind k : {KernelKind::truncated_gaussian, KernelKind::beta}) {
    EXPECT_NEAR(pwtest::simpson([k](double u) { return kernel_value(k, u); }, -1.0, 1.0, 200000), 1.0, 1e-9);
    EXPECT_EQ(kernel_value(k, 1.0001), 0.0);
    EXPECT_EQ(kernel_value(k, -1.0001), 0.0);
    EXPECT_DOUBLE_EQ(kernel_value(k, 0.3), kernel_value(k, -0.3));
  }
}

TEST(KdeModified, SingleEventFloor) {
  const auto d = kde_modified(EventSequence({0.5}), KernelSpec{KernelKind::truncated_gaussian, 0.05}, 1001);
  EXPECT_EQ(d.pdf().argmax(), 500u);
  EXPECT_GE(d.pdf().min(), 0.5 * (1.0 - 1e-9));
  EXPECT_NEAR(integrate(d.pdf()), 1.0, 1e-6);
  EXPECT_TRUE(d.strictly_positive());
  // unimodal
  const auto v = d.pdf().values();
  for (std::size_t k = 1; k <= 500; ++k) EXPECT_GE(v[k], v[k - 1] - 1e-15);
  for (std::size_t k = 501; k < v.size(); ++k) EXPECT_LE(v[k], v[k - 1] + 1e-15);
}

TEST(KdeModified, Beta22SampleL1) {
  const auto x = beta22_sample(10000, 2);
  const auto d = kde_modified(x, KernelSpec{KernelKind::truncated_gaussian, plug_in_bandwidth(x)});
  EXPECT_LE(l1_to_beta22(d), 0.05);
}

TEST(KdeModified, MassAndFloorForManySamples) {
  for (KernelKind kind : {KernelKind::truncated_gaussian, KernelKind::beta}) {
    for (std::size_t m : {1u, 2u, 10u, 100u, 1000u}) {
      for (double h : {0.01, 0.1, 0.5, 1.0}) {
        const auto x = beta22_sample(m, m + 7);
        const auto d = kde_modified(x, KernelSpec{kind, h});
        EXPECT_NEAR(integrate(d.pdf()), 1.0, 1e-6);
        EXPECT_GE(d.pdf().min(), 1.0 / (m + 1.0) - 1e-9);
        EXPECT_NEAR(d.cdf()[0], 0.0, 0.0);
        EXPECT_DOUBLE_EQ(d.cdf().back(), 1.0);
      }
    }
  }
}

TEST(KdeModified, Errors) {
  const KernelSpec k{KernelKind::beta, 0.1};
  EXPECT_THROW(kde_modified(EventSequence(), k), InvalidArgument);
  EXPECT_THROW(kde_modified(EventSequence({0.5}), KernelSpec{KernelKind::beta, 0.0}), InvalidArgument);
  EXPECT_THROW(kde_modified(EventSequence({0.5}), KernelSpec{KernelKind::beta, -1.0}), InvalidArgument);
  EXPECT_THROW(kde_modified(EventSequence({0.5}), KernelSpec{KernelKind::beta, 1.5}), InvalidArgument);
}

TEST(ReflectedKde, MassConservedBeforeMixing) {
  // Smooth kernel: the grid integral is accurate at N = 1001.
  for (double h : {0.02, 0.2, 0.7, 1.0}) {
    const auto x = beta22_sample(300, 11);
    EXPECT_NEAR(integrate(reflected_kde(x, KernelSpec{KernelKind::beta, h}, 1001)), 1.0, 1e-6) << h;
  }
  // The truncated Gaussian has a small jump at the edge of its support, so
  // its mass is measured on a fine grid.
  for (double h : {0.05, 0.5, 1.0}) {
    const auto x = beta22_sample(50, 12);
    EXPECT_NEAR(integrate(reflected_kde(x, KernelSpec{KernelKind::truncated_gaussian, h}, 200001)), 1.0,
                1e-6)
        << h;
  }
}

TEST(ReflectedKde, EventsAtTheBoundaryKeepTheirMass) {
  const EventSequence x({0.0, 1.0, 0.0});
  EXPECT_NEAR(integrate(reflected_kde(x, KernelSpec{KernelKind::beta, 0.3}, 1001)), 1.0, 1e-6);
}

TEST(DensityEstimate, CdfIsRunningIntegral) {
  const auto d = kde_modified(beta22_sample(100, 3), KernelSpec{KernelKind::beta, 0.1});
  const auto c = cumulative_integral(d.pdf());
  EXPECT_LT(distance_sup(c, d.cdf()), 1e-9);
  for (std::size_t k = 1; k < c.size(); ++k) EXPECT_GE(d.cdf()[k], d.cdf()[k - 1]);
}

TEST(PlugInBandwidth, UniformRange) {
  const double h = plug_in_bandwidth(uniform_sample(100, 4));
  EXPECT_GT(h, 0.05);
  EXPECT_LT(h, 0.25);
}

TEST(PlugInBandwidth, ShrinksForNestedSamples) {
  const auto big = uniform_sample(10000, 5);
  const EventSequence small(std::vector<double>(big.events().begin(), big.events().begin() + 100));
  // events() is sorted, so take a strided subsample instead of the first 100.
  std::vector<double> strided;
  for (std::size_t i = 0; i < 10000; i += 100) strided.push_back(big[i]);
  EXPECT_LT(plug_in_bandwidth(big), plug_in_bandwidth(EventSequence(strided)));
  EXPECT_GT(plug_in_bandwidth(small), 0.0);
}

TEST(PlugInBandwidth, DegenerateAndTooSmall) {
  const EventSequence same(std::vector<double>(25, 0.4));
  EXPECT_DOUBLE_EQ(plug_in_bandwidth(same), std::pow(25.0, -0.2) / 10.0);
  EXPECT_THROW(plug_in_bandwidth(EventSequence({0.3})), InvalidArgument);
  EXPECT_THROW(plug_in_bandwidth(EventSequence()), InvalidArgument);
}

TEST(DensityToIntensity, Examples) {
  const auto d = kde_modified(beta22_sample(50, 6), KernelSpec{KernelKind::beta, 0.2});
  EXPECT_EQ(norm_sup(density_to_intensity(d, 0.0)), 0.0);
  EXPECT_EQ(density_to_intensity(d, 1.0), d.pdf());
  const auto u = DensityEstimate::from_pdf(GridFunction::constant(1001, 1.0));
  const auto lam = density_to_intensity(u, 2050.0);
  for (double v : lam.values()) EXPECT_DOUBLE_EQ(v, 2050.0);
  EXPECT_NEAR(integrate(density_to_intensity(d, 300.0)), 300.0, 300.0 * 1e-6);
  EXPECT_THROW(density_to_intensity(d, -1.0), InvalidArgument);
}

TEST(StripPositivityFloor, RecoversExactZeros) {
  const auto d = kde_modified(EventSequence({0.5, 0.52}), KernelSpec{KernelKind::beta, 0.05});
  const auto s = strip_positivity_floor(d);
  EXPECT_EQ(s.pdf()[0], 0.0);
  EXPECT_EQ(s.pdf()[1000], 0.0);
  EXPECT_NEAR(integrate(s.pdf()), 1.0, 1e-9);
  EXPECT_FALSE(s.strictly_positive());
}
