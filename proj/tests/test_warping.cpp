#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "test_support.hpp"

using namespace phasewarp;
using pwtest::sup_diff;

namespace {

constexpr std::size_t kN = 1001;
const double kTwoPi = 2.0 * std::numbers::pi;

WarpingFunction square_warp(std::size_t n = kN) {
  return WarpingFunction::project(GridFunction::sample(n, [](double t) { return t * t; }));
}

GridFunction random_function(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double a = u(rng), b = u(rng), c = u(rng);
  return GridFunction::sample(kN, [=](double t) {
    return a * std::sin(kTwoPi * t) + b * std::cos(3.0 * t) + c * t * t;
  });
}

/// sum_i ||q - q_i||^2 computed with plain loops and the trapezoid rule.
double warp_objective(const GridFunction& q, const std::vector<GridFunction>& qs) {
  double total = 0.0;
  for (const auto& qi : qs) {
    const std::size_t n = q.size();
    const double h = 1.0 / static_cast<double>(n - 1);
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double d = q[k] - qi[k];
      s += (k == 0 || k == n - 1 ? 0.5 : 1.0) * d * d;
    }
    total += s * h;
  }
  return total;
}

}  // namespace

TEST(Srvf, IdentityIsOne) {
  const Srvf q = to_srvf(WarpingFunction::identity(kN));
  for (double v : q.base().values()) EXPECT_NEAR(v, 1.0, 1e-12);
}

TEST(Srvf, SquareWarp) {
  const Srvf q = to_srvf(square_warp());
  EXPECT_LT(sup_diff(q.base(), [](double t) { return std::sqrt(2.0 * t); }, 1), 1e-3);
}

TEST(Srvf, UnitNormForRandomWarps) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    const Srvf q = to_srvf(pwtest::random_warp(rng, kN, 1.0));
    EXPECT_NEAR(q.norm(), 1.0, 1e-3);
    for (double v : q.base().values()) EXPECT_GT(v, 0.0);
  }
}

TEST(Srvf, RoundTripThroughReconstruction) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 20; ++i) {
    const auto g = pwtest::random_warp(rng);
    EXPECT_LT(distance_sup(from_srvf(to_srvf(g)).base(), g.base()), inversion_tolerance(kN));
  }
}

TEST(ActAmplitude, IdentityAndSupNorm) {
  std::mt19937_64 rng(3);
  const auto id = WarpingFunction::identity(kN);
  for (int i = 0; i < 100; ++i) {
    const auto f = random_function(rng);
    EXPECT_LT(distance_sup(act_amplitude(f, id), f), 1e-14);
    const auto g = pwtest::random_warp(rng, kN, 1.0);
    EXPECT_NEAR(act_amplitude(f, g).max(), f.max(), 1e-4);
    // Table 1 row 1: the sup distance between two functions is preserved.
    const auto f2 = random_function(rng);
    EXPECT_NEAR(distance_sup(act_amplitude(f, g), act_amplitude(f2, g)), distance_sup(f, f2), 1e-3);
  }
}

TEST(ActAmplitude, SineUnderSquare) {
  const auto f = GridFunction::sample(kN, [](double t) { return std::sin(kTwoPi * t); });
  const auto r = act_amplitude(f, square_warp());
  EXPECT_LT(sup_diff(r, [](double t) { return std::sin(kTwoPi * t * t); }), 1e-3);
}

TEST(ActArea, IdentityAndMass) {
  std::mt19937_64 rng(4);
  const auto id = WarpingFunction::identity(kN);
  for (int i = 0; i < 100; ++i) {
    const auto f = pwtest::random_density(rng).pdf();
    EXPECT_LT(distance_sup(act_area(f, id), f), 1e-12);
    const auto g = pwtest::random_warp(rng, kN);
    EXPECT_NEAR(integrate(act_area(f, g)), integrate(f), 1e-4);
    const auto f2 = pwtest::random_density(rng).pdf();
    EXPECT_NEAR(norm_l1(act_area(f, g) - act_area(f2, g)), norm_l1(f - f2), 1e-3);
  }
}

TEST(ActArea, UniformUnderSquare) {
  const auto r = act_area(GridFunction::constant(kN, 1.0), square_warp());
  EXPECT_LT(sup_diff(r, [](double t) { return 2.0 * t; }), 1e-3);
}

TEST(ActEnergy, IdentityAndIsometry) {
  std::mt19937_64 rng(5);
  const auto id = WarpingFunction::identity(kN);
  for (int i = 0; i < 100; ++i) {
    const auto f1 = random_function(rng);
    const auto f2 = random_function(rng);
    const auto g = pwtest::random_warp(rng, kN, 1.0);
    EXPECT_LT(distance_sup(act_energy(f1, id), f1), 1e-12);
    EXPECT_NEAR(norm_l2(act_energy(f1, g)), norm_l2(f1), 1e-3);
    EXPECT_NEAR(distance_l2(act_energy(f1, g), act_energy(f2, g)), distance_l2(f1, f2), 1e-3);
  }
}

TEST(Actions, Associative) {
  // (f . g1) . g2 = f . (g1 o g2) for each action.
  std::mt19937_64 rng(6);
  for (int i = 0; i < 20; ++i) {
    const auto f = pwtest::random_density(rng).pdf();
    const auto g1 = pwtest::random_warp(rng);
    const auto g2 = pwtest::random_warp(rng);
    const auto g12 = compose(g1, g2);
    EXPECT_LT(distance_sup(act_amplitude(act_amplitude(f, g1), g2), act_amplitude(f, g12)), 1e-3);
    EXPECT_LT(distance_l2(act_area(act_area(f, g1), g2), act_area(f, g12)), 1e-3);
    EXPECT_LT(distance_l2(act_energy(act_energy(f, g1), g2), act_energy(f, g12)), 1e-3);
  }
}

TEST(KarcherMeanWarps, IdentityAndSingleton) {
  const std::vector<WarpingFunction> ids(4, WarpingFunction::identity(kN));
  EXPECT_LT(distance_sup(karcher_mean_warps(ids).base(), ids[0].base()), 1e-12);
  std::mt19937_64 rng(7);
  const std::vector<WarpingFunction> one{pwtest::random_warp(rng)};
  EXPECT_LT(distance_sup(karcher_mean_warps(one).base(), one[0].base()), inversion_tolerance(kN));
  EXPECT_THROW(karcher_mean_warps(std::vector<WarpingFunction>{}), InvalidArgument);
}

TEST(KarcherMeanWarps, UnitNormSrvf) {
  std::mt19937_64 rng(8);
  std::vector<Srvf> qs;
  for (int i = 0; i < 5; ++i) qs.push_back(to_srvf(pwtest::random_warp(rng)));
  EXPECT_NEAR(mean_srvf(qs).norm(), 1.0, 1e-12);
}

TEST(KarcherMeanWarps, BeatsTheExponentialFamily) {
  // Mean of {gamma, gamma^{-1}} against every (e^{at}-1)/(e^a-1), a in [-2, 2].
  const auto g = WarpingFunction::sample(kN, [](double t) { return pwtest::exp_warp_exact(2.0, t); });
  const std::vector<WarpingFunction> pair{g, invert_monotone(g)};
  std::vector<GridFunction> qs;
  for (const auto& w : pair) qs.push_back(to_srvf(w).base());
  const double best = warp_objective(to_srvf(karcher_mean_warps(pair)).base(), qs);
  for (int i = -200; i <= 200; ++i) {
    const double a = 0.01 * i;
    const auto cand = WarpingFunction::sample(kN, [a](double t) { return pwtest::exp_warp_exact(a, t); });
    EXPECT_LE(best, warp_objective(to_srvf(cand).base(), qs) + 1e-6) << "a = " << a;
  }
}

TEST(KarcherMeanWarps, TangentPerturbationsDoNotImprove) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> z(0.0, 1.0);
  for (int set = 0; set < 5; ++set) {
    std::vector<WarpingFunction> gs;
    std::vector<GridFunction> qs;
    for (int i = 0; i < 5; ++i) {
      gs.push_back(pwtest::random_warp(rng, kN, 1.0));
      qs.push_back(to_srvf(gs.back()).base());
    }
    const GridFunction qbar = mean_srvf(std::vector<Srvf>(qs.begin(), qs.end())).base();
    const double base = warp_objective(qbar, qs);
    for (int d = 0; d < 50; ++d) {
      const double c1 = z(rng), c2 = z(rng), c3 = z(rng);
      GridFunction v = GridFunction::sample(kN, [&](double t) {
        return c1 * std::sin(kTwoPi * t) + c2 * std::cos(std::numbers::pi * t) + c3 * (t - 0.5);
      });
      v = v - (inner(v, qbar) / inner(qbar, qbar)) * qbar;  // tangent at qbar
      GridFunction p = qbar + (1e-3 / norm_l2(v)) * v;
      p = (1.0 / norm_l2(p)) * p;
      EXPECT_GE(warp_objective(p, qs), base - 1e-9);
    }
  }
}

TEST(KarcherMeanWarps, MixedGridSizesUseTheFinest) {
  std::mt19937_64 rng(10);
  const std::vector<WarpingFunction> gs{pwtest::random_warp(rng, 201), pwtest::random_warp(rng, 1001)};
  EXPECT_EQ(karcher_mean_warps(gs).size(), 1001u);
}
