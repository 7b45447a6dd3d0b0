#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "schauder/fields.hpp"
#include "schauder/mollify.hpp"

using namespace schauder;

TEST(Kernel, CoefficientsAndMoments) {
  const Kernel1D k = build_kernel();
  EXPECT_NEAR(k.alpha, 4.26454593116459, 1e-9);
  EXPECT_NEAR(k.beta, -12.7266841600160, 1e-9);
  EXPECT_NEAR(k.m0, 1.0, 1e-12);
  EXPECT_NEAR(k.m1, 0.0, 1e-14);
  EXPECT_NEAR(k.m2, 0.0, 1e-12);
  EXPECT_EQ(k(1.0), 0.0);
  EXPECT_EQ(k(-1.5), 0.0);
  EXPECT_DOUBLE_EQ(k(0.3), k(-0.3));
}

TEST(Kernel, LatticeWeightsKeepMoments) {
  for (double ratio : {2.0, 3.0, 5.5, 16.0}) {
    const double h = 0.01;
    const auto w = lattice_weights(h, ratio * h);
    const long J = static_cast<long>(w.size() / 2);
    double s0 = 0, s1 = 0, s2 = 0;
    for (long j = -J; j <= J; ++j) {
      s0 += w[j + J];
      s1 += j * w[j + J];
      s2 += double(j) * j * w[j + J];
    }
    EXPECT_NEAR(s0, 1.0, 1e-14);
    EXPECT_NEAR(s1, 0.0, 1e-13);
    EXPECT_NEAR(s2, 0.0, 1e-11);
  }
  EXPECT_THROW(lattice_weights(0.1, 0.15), LabError);
}

TEST(MollifyXprime, PreservesQuadraticsAwayFromTheBoundary) {
  const Grid g = make_box(2, 1, -1.0, 1.0, 65);
  const auto u = GridFunction::sample(g, [](const Point& p) {
    return 1.0 + 2 * p.x[0] - 3 * p.x[0] * p.x[0] + (p.x[1] > 0 ? 5.0 : 0.0) * p.x[0];
  });
  const double eps = 0.125;
  const auto m = mollify_xprime(u, eps);
  double err = 0.0;
  for (std::size_t p = 0; p < g.size(); ++p)
    if (std::abs(g.point(p).x[0]) <= 1.0 - eps - 1e-12) err = std::max(err, std::abs(m[p] - u[p]));
  EXPECT_LE(err, 1e-12);
}

TEST(MollifyXprime, LeavesXppDependenceUntouched) {
  const Grid g = make_box(3, 1, -1.0, 1.0, 17);
  const auto u = GridFunction::sample(g, [](const Point& p) { return p.x[1] * p.x[2] > 0 ? 1.0 : -2.0; });
  const auto m = mollify_xprime(u, 0.25);
  for (std::size_t p = 0; p < g.size(); ++p) EXPECT_NEAR(m[p], u[p], 1e-14);
  // The full mollifier does smear it. At eps = 2h the moment conditions
  // leave only the centre weight, so a wider kernel is used.
  EXPECT_GT((mollify_full(u, 0.5) - u).max_abs(), 0.1);
  EXPECT_NEAR((mollify_full(u, 0.25) - u).max_abs(), 0.0, 1e-14);
}

TEST(MollifyXprime, ConstantExtensionAndPeriodicWrap) {
  const Grid g = make_box(2, 1, 0.0, 1.0, 33);
  const auto c = GridFunction(g, 4.0);
  EXPECT_NEAR((mollify_xprime(c, 0.2) - c).max_abs(), 0.0, 1e-14);
  const Grid t = make_grid(2, 1, {{0.0, 1.0}, {0.0, 1.0}}, {64, 5}, Boundary::periodic);
  const auto s = GridFunction::sample(t, [](const Point& p) { return std::sin(2 * M_PI * p.x[0]); });
  const auto ms = mollify_xprime(s, 0.1);
  // A periodic mode is scaled by the same factor everywhere.
  double lo = 1e9, hi = -1e9;
  for (std::size_t p = 0; p < t.size(); ++p)
    if (std::abs(s[p]) > 0.5) {
      lo = std::min(lo, ms[p] / s[p]);
      hi = std::max(hi, ms[p] / s[p]);
    }
  EXPECT_NEAR(lo, hi, 1e-12);
}

TEST(MollifyZprime, TimeWidthIsEpsSquared) {
  const Grid g = make_box(2, 1, 0.0, 1.0, 33, TimeAxis{0.0, 1.0, 257});
  const auto u = GridFunction::sample(g, [](const Point& p) { return p.t * p.t + p.x[0]; });
  const auto m = mollify_zprime(u, 0.25);
  double err = 0.0;
  for (std::size_t p = 0; p < g.size(); ++p) {
    const Point pt = g.point(p);
    if (pt.t >= 0.0625 && pt.t <= 1 - 0.0625 && pt.x[0] >= 0.25 && pt.x[0] <= 0.75) err = std::max(err, std::abs(m[p] - u[p]));
  }
  EXPECT_LE(err, 1e-12);
  EXPECT_THROW(mollify_zprime(u, 0.05), LabError);
  EXPECT_THROW(mollify_zprime(GridFunction(make_box(2, 1, 0, 1, 9)), 0.5), LabError);
}

TEST(PartialMollifierBounds, HoelderCuspScaling) {
  // |x'|^delta times a cutoff, constant in x''. Widths stay at least 8h:
  // near eps = 2h the discrete kernel collapses to the identity.
  const Grid g = make_grid(2, 1, {{-1, 1}, {-1, 1}}, {1025, 9});
  const double delta = 0.5;
  const auto v = GridFunction::sample(g, [&](const Point& p) {
    return std::pow(std::abs(p.x[0]), delta) * smooth_cutoff(std::abs(p.x[0]), 0.25, 0.75);
  });
  const auto r = check_partial_mollifier(v, delta, 0, {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64}, 0.25);
  EXPECT_GT(r.seminorm_delta, 0.0);
  EXPECT_NEAR(r.error_slope, delta, 0.1);
  EXPECT_LT(r.max_derivative_ratio, 10.0);
  EXPECT_LT(r.max_error_ratio, 2.0);
  EXPECT_LT(r.first_ratio_variation, 2.0);
}

TEST(PartialMollifierBounds, SecondOrderCusp) {
  const Grid g = make_grid(2, 1, {{-1, 1}, {-1, 1}}, {1025, 9});
  const double delta = 0.5;
  const auto v = GridFunction::sample(g, [&](const Point& p) {
    return std::pow(std::abs(p.x[0]), 2 + delta) * smooth_cutoff(std::abs(p.x[0]), 0.25, 0.75);
  });
  const auto r = check_partial_mollifier(v, delta, 2, {1.0 / 32, 1.0 / 64, 1.0 / 128}, 0.25);
  EXPECT_NEAR(r.error_slope, 2 + delta, 0.1);
  EXPECT_LT(r.max_error_ratio, 2.0);
}

TEST(ParabolicMollifierBounds, CuspInTimeAndSpace) {
  const Grid g = make_grid(2, 1, {{-1, 1}, {-1, 1}}, {257, 9}, Boundary::dirichlet_box, TimeAxis{0.0, 0.25, 1025});
  const double delta = 0.5;
  const auto v = GridFunction::sample(g, [&](const Point& p) {
    const double rt = std::abs(p.x[0]) + std::sqrt(std::abs(p.t - 0.125));
    return std::pow(rt, delta) * smooth_cutoff(std::abs(p.x[0]), 0.25, 0.75);
  });
  const auto r = check_parabolic_mollifier(v, delta, {1.0 / 8, 1.0 / 16, 1.0 / 32}, 0.25);
  EXPECT_GT(r.seminorm_delta, 0.0);
  EXPECT_LT(r.max_derivative_ratio, 20.0);
  EXPECT_LT(r.max_error_ratio, 2.0);
  EXPECT_NEAR(r.error_slope, delta, 0.15);
}
