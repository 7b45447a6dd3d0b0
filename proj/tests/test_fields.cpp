#include <gtest/gtest.h>

#include <cmath>

#include "schauder/fields.hpp"
#include "schauder/seminorm.hpp"

using namespace schauder;

namespace {

Grid box2(std::size_t n = 33) { return make_box(2, 1, -1.0, 1.0, n); }

bool same_entries(const CoefficientField& a, const CoefficientField& b) {
  return std::equal(a.raw_entries().begin(), a.raw_entries().end(), b.raw_entries().begin(), b.raw_entries().end());
}

}  // namespace

TEST(RoughCoefficients, ConstantPatternIsOneSpdMatrix) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto a = random_rough_coefficients(box2(), 0.2, Pattern::constant, seed);
    EXPECT_EQ(a.support_size(), 1u);
    const auto c = a.check_ellipticity();
    EXPECT_TRUE(c.ok);
    EXPECT_GE(c.min_eigenvalue, 0.2 - 1e-12);
    EXPECT_LE(c.max_eigenvalue, 5.0 + 1e-12);
  }
}

TEST(RoughCoefficients, XppOnlyIsConstantAlongXprime) {
  const Grid g = box2();
  const auto a = random_rough_coefficients(g, 0.2, Pattern::xpp_only, 11);
  const std::size_t n = g.axis(0).points;
  bool varies = false;
  for (std::size_t j = 0; j < g.axis(1).points; ++j) {
    for (std::size_t i = 1; i < n; ++i) {
      const std::size_t p = g.flat(std::vector<std::size_t>{i, j}), p0 = g.flat(std::vector<std::size_t>{0, j});
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) EXPECT_EQ(a.entry(p, r, c), a.entry(p0, r, c));
    }
    if (j > 0) {
      const std::size_t p = g.flat(std::vector<std::size_t>{0, j}), q = g.flat(std::vector<std::size_t>{0, j - 1});
      if (a.entry(p, 0, 0) != a.entry(q, 0, 0)) varies = true;
    }
  }
  EXPECT_TRUE(varies);
}

TEST(RoughCoefficients, Determinism) {
  const Grid g = box2();
  const auto a = random_rough_coefficients(g, 0.2, Pattern::xpp_only, 1);
  const auto b = random_rough_coefficients(g, 0.2, Pattern::xpp_only, 1);
  const auto c = random_rough_coefficients(g, 0.2, Pattern::xpp_only, 2);
  EXPECT_TRUE(same_entries(a, b));
  EXPECT_FALSE(same_entries(a, c));
}

TEST(RoughCoefficients, EveryPatternPassesItsCheck) {
  const Grid g = make_box(3, 1, -1.0, 1.0, 9, TimeAxis{0.0, 0.25, 5});
  for (auto p : {Pattern::constant, Pattern::t_only, Pattern::xpp_only, Pattern::t_and_xpp}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto a = random_rough_coefficients(g, 0.3, p, seed);
      EXPECT_TRUE(a.check_ellipticity(OperatorForm::nondivergence, 1e-12).ok);
      EXPECT_TRUE(a.symmetric());
      const auto b = random_rough_coefficients(g, 0.3, p, seed, OperatorForm::divergence);
      EXPECT_TRUE(b.check_ellipticity(OperatorForm::divergence, 1e-12).ok);
      EXPECT_TRUE(b.frobenius_bound());
    }
  }
}

TEST(RoughCoefficients, RejectsBadNu) {
  EXPECT_THROW(random_rough_coefficients(box2(), 0.0, Pattern::constant, 1), LabError);
  EXPECT_THROW(random_rough_coefficients(box2(), 1.5, Pattern::constant, 1), LabError);
  EXPECT_THROW(random_rough_coefficients(box2(), 0.5, Pattern::t_only, 1), LabError);
}

TEST(RoughCoefficients, CellStructureIsResolutionIndependent) {
  // Same seed on two resolutions samples the same piecewise-constant field.
  const auto coarse = random_rough_coefficients(box2(17), 0.2, Pattern::xpp_only, 5);
  const auto fine = random_rough_coefficients(box2(33), 0.2, Pattern::xpp_only, 5);
  for (std::size_t j = 0; j < 17; ++j) {
    const std::size_t pc = coarse.grid().flat(std::vector<std::size_t>{0, j});
    const std::size_t pf = fine.grid().flat(std::vector<std::size_t>{0, 2 * j});
    EXPECT_EQ(coarse.entry(pc, 1, 1), fine.entry(pf, 1, 1));
  }
}

TEST(DegenerateCoefficients, Admissibility) {
  const Grid g = box2();
  // diag(1, 0) with nu = 1.
  Eigen::MatrixXd m(2, 2);
  m << 1.0, 0.0, 0.0, 0.0;
  auto a = CoefficientField::constant_matrix(g, m, 1.0);
  a.degenerate = true;
  EXPECT_TRUE(a.check_ellipticity().ok);

  const auto d = degenerate_coefficients(g, 0.2, 7);
  EXPECT_TRUE(d.check_ellipticity().ok);
  // The full lower bound fails along xi = (0, 1) somewhere.
  auto full = d;
  full.degenerate = false;
  EXPECT_FALSE(full.check_ellipticity().ok);
  for (std::size_t s = 0; s < d.support_size(); ++s) EXPECT_GE(d.support_matrix(s)(0, 0), 0.2 - 1e-12);
}

TEST(HoelderCoefficients, ZeroKReducesToXppOnly) {
  const Grid g = box2();
  const auto a = hoelder_coefficients(g, 0.2, 0.0, 0.5, 3);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) EXPECT_EQ(seminorm_xprime(a.entry_field(r, c), 0.5), 0.0);
}

TEST(HoelderCoefficients, MeasuredSeminormWithinK) {
  const Grid g = box2(65);
  const auto a = hoelder_coefficients(g, 0.2, 0.1, 0.5, 3);
  EXPECT_TRUE(a.check_ellipticity().ok);
  double worst = 0.0;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) {
      const double s = seminorm_xprime(a.entry_field(r, c), 0.5);
      EXPECT_LE(s, 0.1 + 1e-9);
      worst = std::max(worst, s);
    }
  EXPECT_GT(worst, 0.0);
}

TEST(HoelderCoefficients, InfeasibleKIsRejected) {
  EXPECT_THROW(hoelder_coefficients(box2(), 0.2, 5.0, 0.5, 1), LabError);
}

TEST(SyntheticRhs, SingleCuspMatchesOneDimensionalBruteForce) {
  const Grid g = make_grid(2, 1, {{-1, 1}, {-1, 1}}, {257, 3});
  CuspTerm t;
  t.psi_constant = true;
  t.center[0] = 0.0;
  const CuspProfile prof = default_profile(g, 0.5);
  const GridFunction f = evaluate_cusp_terms(g, {t}, prof);
  // Independent 1-d pair scan over the profile.
  std::vector<double> xs, vs;
  for (std::size_t i = 0; i < 257; ++i) {
    const double x = -1.0 + i * (2.0 / 256);
    xs.push_back(x);
    vs.push_back(std::pow(std::abs(x), 0.5) * smooth_cutoff(std::abs(x), prof.r1, prof.r2));
  }
  double best = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = i + 1; j < xs.size(); ++j)
      best = std::max(best, std::abs(vs[j] - vs[i]) / std::pow(xs[j] - xs[i], 0.5));
  const double measured = seminorm_xprime(f, 0.5);
  EXPECT_NEAR(measured, best, 1e-9 * best);
  EXPECT_LE(measured, cusp_seminorm_bound(prof));
}

TEST(SyntheticRhs, XprimeIndependentDataHasZeroSeminorm) {
  const Grid g = box2();
  const GridFunction f = evaluate_cusp_terms(g, {}, default_profile(g, 0.5));
  EXPECT_EQ(seminorm_xprime(f, 0.5), 0.0);
}

TEST(SyntheticRhs, HomogeneityAndBound) {
  const Grid g = box2(65);
  auto data = synthetic_rhs(g, 0.5, 4, RhsKind::rough_xpp);
  const double s = seminorm_xprime(data.f, 0.5);
  EXPECT_GT(s, 0.0);
  EXPECT_LE(s, data.seminorm_bound);
  auto terms = data.terms;
  for (auto& t : terms) t.coeff *= 2.0;
  const GridFunction f2 = evaluate_cusp_terms(g, terms, data.profile);
  EXPECT_NEAR(seminorm_xprime(f2, 0.5), 2.0 * s, 1e-12 * s);
}

TEST(SyntheticRhs, KindsAndErrors) {
  const Grid g = make_box(2, 1, -1.0, 1.0, 17, TimeAxis{0.0, 1.0 / 16, 5});
  const auto td = synthetic_rhs(g, 0.5, 1, RhsKind::time_dependent);
  EXPECT_GT(seminorm_xprime(td.f, 0.5), 0.0);
  EXPECT_LE(seminorm_xprime(td.f, 0.5), td.seminorm_bound);
  const auto sm = synthetic_rhs(box2(), 0.5, 1, RhsKind::smooth);
  EXPECT_GT(sm.f.max_abs(), 0.0);
  EXPECT_THROW(synthetic_rhs(box2(), 1.0, 1, RhsKind::smooth), LabError);
  EXPECT_THROW(synthetic_rhs(box2(), 0.5, 1, RhsKind::time_dependent), LabError);
  const auto again = synthetic_rhs(g, 0.5, 1, RhsKind::time_dependent);
  EXPECT_TRUE(std::equal(td.f.values().begin(), td.f.values().end(), again.f.values().begin()));
}

TEST(SyntheticRhs, CuspCentersAreNodesOfRefinedGrids) {
  for (std::size_t n : {17u, 33u, 65u}) {
    const Grid g = box2(n);
    for (const auto& t : draw_cusp_terms(g, 9, RhsKind::rough_xpp)) EXPECT_NO_THROW(g.lattice_index(0, t.center[0]));
  }
}

TEST(VectorField, SharedGrid) {
  EXPECT_THROW(VectorField({GridFunction(box2(9)), GridFunction(box2(17))}), LabError);
  const auto v = synthetic_vector_rhs(box2(), 0.5, 3, RhsKind::rough_xpp);
  EXPECT_EQ(v.size(), 2u);
}
