#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "schauder/oracle.hpp"

using namespace schauder;

namespace {

Grid torus(std::size_t n) {
  return make_grid(2, 1, {{0.0, 2 * M_PI}, {0.0, 2 * M_PI}}, {n, n}, Boundary::periodic);
}

GridFunction random_function(const Grid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  GridFunction u(g);
  for (std::size_t p = 0; p < g.size(); ++p) u[p] = U(rng);
  return u;
}

}  // namespace

TEST(Spectral, LaplacianOfSine) {
  const Grid g = torus(32);
  const auto f = GridFunction::sample(g, [](const Point& p) { return std::sin(p.x[0]); });
  const auto u = spectral_solve_constant(Eigen::MatrixXd::Identity(2, 2), f);
  for (std::size_t p = 0; p < g.size(); ++p) EXPECT_NEAR(u[p], -std::sin(g.point(p).x[0]), 1e-12);
}

TEST(Spectral, AnisotropicDiagonal) {
  const Grid g = torus(32);
  Eigen::MatrixXd a(2, 2);
  a << 2.0, 0.0, 0.0, 1.0;
  const auto f = GridFunction::sample(g, [](const Point& p) { return std::sin(p.x[0] + p.x[1]); });
  const auto u = spectral_solve_constant(a, f);
  for (std::size_t p = 0; p < g.size(); ++p) {
    const Point pt = g.point(p);
    EXPECT_NEAR(u[p], -std::sin(pt.x[0] + pt.x[1]) / 3.0, 1e-12);
  }
}

TEST(Spectral, StencilSymbolInvertsTheCrossStencil) {
  const Grid g = torus(24);
  Eigen::MatrixXd a(2, 2);
  a << 1.3, 0.4, 0.4, 0.8;
  auto f = random_function(g, 5);
  double mean = 0.0;
  for (double v : f.values()) mean += v;
  mean /= f.size();
  for (std::size_t p = 0; p < g.size(); ++p) f[p] -= mean;
  const auto u = spectral_solve_constant(a, f, Symbol::stencil);
  const std::size_t n = 24;
  const double h = g.spacing(0);
  auto at = [&](long i, long j) { return u[g.flat(std::vector<std::size_t>{std::size_t((i + n) % n), std::size_t((j + n) % n)})]; };
  double err = 0.0;
  for (long i = 0; i < long(n); ++i)
    for (long j = 0; j < long(n); ++j) {
      const double uxx = (at(i + 1, j) - 2 * at(i, j) + at(i - 1, j)) / (h * h);
      const double uyy = (at(i, j + 1) - 2 * at(i, j) + at(i, j - 1)) / (h * h);
      const double uxy = (at(i + 1, j + 1) - at(i + 1, j - 1) - at(i - 1, j + 1) + at(i - 1, j - 1)) / (4 * h * h);
      const double lhs = a(0, 0) * uxx + 2 * a(0, 1) * uxy + a(1, 1) * uyy;
      err = std::max(err, std::abs(lhs - f[g.flat(std::vector<std::size_t>{std::size_t(i), std::size_t(j)})]));
    }
  EXPECT_LE(err, 1e-10);
}

TEST(Spectral, Errors) {
  const Grid g = torus(16);
  const auto one = GridFunction(g, 1.0);
  EXPECT_THROW(spectral_solve_constant(Eigen::MatrixXd::Identity(2, 2), one), LabError);
  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 0.0, 0.0, -1.0;
  EXPECT_THROW(spectral_solve_constant(bad, GridFunction(g, 0.0)), LabError);
  EXPECT_THROW(spectral_solve_constant(Eigen::MatrixXd::Identity(2, 2), GridFunction(make_box(2, 1, 0, 1, 9))),
               LabError);
}

TEST(Counterexample, ClosedFormsAgreeWithDifferences) {
  auto u = [](double x, double y) {
    const double r = x * x + y * y;
    return x * y * std::sqrt(-std::log(r));
  };
  const double h = 1e-4;
  for (auto [x, y] : std::vector<std::pair<double, double>>{{0.1, 0.2}, {-0.3, 0.05}, {0.01, -0.02}, {0.2, 0.2}}) {
    const auto s = counterexample_mixed(x, y);
    const double uxy = (u(x + h, y + h) - u(x + h, y - h) - u(x - h, y + h) + u(x - h, y - h)) / (4 * h * h);
    const double uxx = (u(x + h, y) - 2 * u(x, y) + u(x - h, y)) / (h * h);
    const double uyy = (u(x, y + h) - 2 * u(x, y) + u(x, y - h)) / (h * h);
    EXPECT_NEAR(s.u, u(x, y), 1e-15);
    EXPECT_NEAR(s.u_xy, uxy, 1e-4 * std::max(1.0, std::abs(uxy)));
    EXPECT_NEAR(s.u_xx, uxx, 1e-4 * std::max(1.0, std::abs(uxx)));
    EXPECT_NEAR(s.u_yy, uyy, 1e-4 * std::max(1.0, std::abs(uyy)));
  }
}

TEST(Counterexample, MixedDerivativeBlowsUpWhilePureOnesStayBounded) {
  double prev = 0.0, pure = 0.0;
  for (double r : {1e-2, 1e-4, 1e-8, 1e-16}) {
    const auto s = counterexample_mixed(r, r);
    EXPECT_GT(s.u_xy, prev);
    prev = s.u_xy;
    pure = std::max({pure, std::abs(s.u_xx), std::abs(s.u_yy)});
  }
  EXPECT_GT(prev, 5.0);
  EXPECT_LT(pure, 1.0);
  EXPECT_TRUE(counterexample_mixed(0.0, 0.0).u_xy_unbounded);
  EXPECT_THROW(counterexample_mixed(0.5, 0.5), LabError);
}

TEST(HalfPlane, DataShape) {
  const Grid g = make_grid(2, 1, {{0.0, 2.0}, {-2.0, 2.0}}, {17, 33});
  const auto d = halfplane_counterexample_data(g);
  for (std::size_t p = 0; p < g.size(); ++p) {
    const Point pt = g.point(p);
    if (pt.x[1] < 0) {
      EXPECT_EQ(d.f[p], 0.0);
    }
    if (pt.x[1] >= 0 && pt.x[0] <= 1.0 && pt.x[1] <= 1.0) {
      EXPECT_EQ(d.f[p], 1.0);
    }
    EXPECT_EQ(d.boundary[p], 0.0);
  }
  EXPECT_THROW(halfplane_counterexample_data(make_box(2, 1, 0.0, 2.0, 9)), LabError);
}

TEST(BruteForce, BitEqualToEngineOnRandomFields) {
  const Grid gs = make_box(3, 1, -1.0, 1.0, 9);
  const Grid gt = make_box(2, 1, -1.0, 1.0, 9, TimeAxis{0.0, 1.0, 9});
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto u = random_function(gs, s);
    for (Family fam : {Family::xprime, Family::xpp, Family::full}) {
      SeminormSpec spec;
      spec.family = fam;
      spec.delta = 0.3 + 0.05 * s;
      spec.budget = PairBudget::exact();
      EXPECT_EQ(seminorm(u, spec), brute_force_seminorm(u, spec).value);
    }
    const auto v = random_function(gt, s + 50);
    for (Family fam : {Family::zprime_parabolic, Family::time_half_order}) {
      SeminormSpec spec;
      spec.family = fam;
      spec.delta = 0.5;
      spec.budget = PairBudget::exact();
      EXPECT_EQ(seminorm(v, spec), brute_force_seminorm(v, spec).value);
    }
  }
}

TEST(BruteForce, SteepRampPeaksAtNeighbours) {
  // Even point count: the ramp sits between two nodes.
  const Grid g = make_grid(2, 1, {{-1, 1}, {0, 1}}, {32, 3});
  const auto u = GridFunction::sample(g, [](const Point& p) { return std::clamp(p.x[0] * 1e3, -1.0, 1.0); });
  const auto r = brute_force_fiber(u, xprime_axes(g), 0.5);
  const auto diff = static_cast<long>(g.index_along(r.a, 0)) - static_cast<long>(g.index_along(r.b, 0));
  EXPECT_EQ(std::abs(diff), 1);
}

TEST(Chebyshev, Examples) {
  std::vector<double> t, ay, lin, cub;
  for (int k = 0; k <= 200; ++k) {
    const double x = -1.0 + k * 0.01;
    t.push_back(x);
    ay.push_back(std::abs(x));
    lin.push_back(x);
    cub.push_back(x * x * x - x);
  }
  EXPECT_NEAR(chebyshev_fit_1d(t, ay, 1), 0.5, 1e-12);
  EXPECT_NEAR(chebyshev_fit_1d(t, lin, 0), 1.0, 1e-12);
  EXPECT_NEAR(chebyshev_fit_1d(t, cub, 3), 0.0, 1e-12);
  // x^2 by a line on [-1, 1]: 1/2.
  std::vector<double> sq;
  for (double x : t) sq.push_back(x * x);
  EXPECT_NEAR(chebyshev_fit_1d(t, sq, 1), 0.5, 1e-12);
  EXPECT_THROW(chebyshev_fit_1d({0.0, 1.0}, {0.0, 1.0}, 1), LabError);
}
