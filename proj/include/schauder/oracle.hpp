#pragma once

// Independent reference computations: a spectral constant-coefficient solver,
// closed forms for the mixed-derivative counterexample, the half-plane data,
// a naive all-pairs seminorm, and an exact discrete Chebyshev fit.

#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include <Eigen/Dense>
#include <fftw3.h>

#include "schauder/error.hpp"
#include "schauder/fields.hpp"
#include "schauder/lattice.hpp"
#include "schauder/seminorm.hpp"

namespace schauder {

enum class Symbol {
  continuous,  // a^{ij} k_i k_j
  stencil      // modified wavenumbers of the central stencils
};

// Solves a^{ij} D_ij u = f on a fully periodic grid by FFT; u has zero mean.
inline GridFunction spectral_solve_constant(const Eigen::MatrixXd& a, const GridFunction& f,
                                            Symbol symbol = Symbol::continuous) {
  const Grid& g = f.grid();
  const int d = g.dim();
  require(!g.has_time(), "spectral oracle works on spatial grids");
  require(a.rows() == d && a.cols() == d, "coefficient matrix must be d x d");
  for (int i = 0; i < d; ++i) require(g.axis(i).boundary == Boundary::periodic, "spectral oracle needs a periodic grid");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (a + a.transpose()), Eigen::EigenvaluesOnly);
  require(es.eigenvalues().minCoeff() > 0.0, "coefficient matrix must be SPD");
  double mean = 0.0;
  for (double v : f.values()) mean += v;
  mean /= static_cast<double>(f.size());
  require(std::abs(mean) <= 1e-12 * std::max(1.0, f.max_abs()), "right-hand side must have zero mean on the torus");

  std::vector<int> n(d);
  for (int i = 0; i < d; ++i) n[i] = static_cast<int>(g.axis(i).points);
  std::size_t complex_size = 1;
  for (int i = 0; i < d - 1; ++i) complex_size *= n[i];
  complex_size *= n[d - 1] / 2 + 1;

  std::vector<double> in(f.values().begin(), f.values().end());
  auto* spec = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * complex_size));
  fftw_plan fwd = fftw_plan_dft_r2c(d, n.data(), in.data(), spec, FFTW_ESTIMATE);
  fftw_execute(fwd);
  fftw_destroy_plan(fwd);

  std::vector<int> idx(d, 0);
  std::vector<int> cshape(n);
  cshape[d - 1] = n[d - 1] / 2 + 1;
  for (std::size_t c = 0; c < complex_size; ++c) {
    std::size_t rem = c;
    for (int i = d - 1; i >= 0; --i) {
      idx[i] = static_cast<int>(rem % cshape[i]);
      rem /= cshape[i];
    }
    std::vector<double> k(d), theta(d);
    bool zero = true;
    for (int i = 0; i < d; ++i) {
      const int m = idx[i] <= n[i] / 2 ? idx[i] : idx[i] - n[i];
      if (m != 0) zero = false;
      const double len = g.axis(i).hi - g.axis(i).lo;
      k[i] = 2.0 * M_PI * m / len;
      theta[i] = k[i] * g.spacing(i);
    }
    if (zero) {
      spec[c][0] = spec[c][1] = 0.0;
      continue;
    }
    double s = 0.0;
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        if (symbol == Symbol::continuous) {
          s += a(i, j) * k[i] * k[j];
        } else if (i == j) {
          const double h = g.spacing(i);
          s += a(i, i) * (2.0 - 2.0 * std::cos(theta[i])) / (h * h);
        } else {
          s += a(i, j) * std::sin(theta[i]) * std::sin(theta[j]) / (g.spacing(i) * g.spacing(j));
        }
      }
    }
    require(s > 0.0, "symbol vanishes at a nonzero mode");
    spec[c][0] /= -s;
    spec[c][1] /= -s;
  }

  std::vector<double> out(f.size());
  fftw_plan bwd = fftw_plan_dft_c2r(d, n.data(), spec, out.data(), FFTW_ESTIMATE);
  fftw_execute(bwd);
  fftw_destroy_plan(bwd);
  fftw_free(spec);
  const double scale = 1.0 / static_cast<double>(f.size());
  for (double& v : out) v *= scale;
  return GridFunction(g, std::move(out));
}

// u = xy (-ln(x^2+y^2))^{1/2} on the plateau of its cutoff, and its second derivatives.
struct MixedSample {
  double u = 0.0, u_xx = 0.0, u_yy = 0.0, u_xy = 0.0;
  bool u_xy_unbounded = false;
};

// Plateau radius of the cutoff; the closed forms hold for x^2 + y^2 <= r^2.
inline constexpr double kMixedPlateau = 0.5;

// With rho = x^2 + y^2 and L = sqrt(-ln rho), L_x = -x/(rho L):
//   u_xy = L - 1/L + x^2 y^2 (2L^2 - 1)/(rho^2 L^3)
//   u_xx = -3xy/(rho L) + x^3 y (2L^2 - 1)/(rho^2 L^3), u_yy symmetric.
inline MixedSample counterexample_mixed(double x, double y) {
  const double rho = x * x + y * y;
  require(rho <= kMixedPlateau * kMixedPlateau, "point lies outside the cutoff plateau");
  MixedSample s;
  if (rho == 0.0) {
    s.u_xy = std::numeric_limits<double>::infinity();
    s.u_xy_unbounded = true;
    return s;
  }
  const double L = std::sqrt(-std::log(rho));
  const double tail = (2.0 * L * L - 1.0) / (rho * rho * L * L * L);
  s.u = x * y * L;
  s.u_xy = L - 1.0 / L + x * x * y * y * tail;
  s.u_xx = -3.0 * x * y / (rho * L) + x * x * x * y * tail;
  s.u_yy = -3.0 * x * y / (rho * L) + x * y * y * y * tail;
  return s;
}

// Plateau bump: 1 on |t| <= 1, 0 on |t| >= 2, smooth in between.
inline double plateau_bump(double t) { return smooth_cutoff(std::abs(t), 1.0, 2.0); }

struct HalfPlaneData {
  GridFunction f;         // eta(x^1) eta(x^2) 1{x^2 >= 0}
  GridFunction boundary;  // Dirichlet values (zero on every side)
};

// Data of the boundary counterexample on [0, L] x [-L, L] (L = 2 nominally).
inline HalfPlaneData halfplane_counterexample_data(const Grid& g) {
  require(g.dim() == 2 && !g.has_time(), "half-plane data needs a 2-d spatial grid");
  const auto& a = g.axis(0);
  const auto& b = g.axis(1);
  require(a.lo == 0.0 && b.lo == -b.hi && a.hi == b.hi && a.hi >= 2.0, "domain must be [0, L] x [-L, L] with L >= 2");
  require(a.boundary == Boundary::dirichlet_box && b.boundary == Boundary::dirichlet_box, "Dirichlet grid required");
  GridFunction f = GridFunction::sample(g, [](const Point& p) {
    return p.x[1] >= 0.0 ? plateau_bump(p.x[0]) * plateau_bump(p.x[1]) : 0.0;
  });
  return {std::move(f), GridFunction(g, 0.0)};
}

// All-pairs reference for the fiber quotient; same denominator routine as the
// engine, so exact-mode results match bit for bit.
inline PairMax brute_force_fiber(const GridFunction& u, const std::vector<int>& free_axes, double exponent,
                                 std::size_t budget = 100000000) {
  const Grid& g = u.grid();
  const FiberSet fs(g, free_axes);
  const std::size_t n = fs.local_size();
  require(n >= 2, "fewer than 2 points along the free directions");
  require(fs.count() * (n * (n - 1) / 2) <= budget, "brute-force pair budget exceeded");
  const auto& shape = fs.local_shape();
  const int m = static_cast<int>(shape.size());
  std::vector<long> off(m);
  PairMax best;
  for (std::size_t f = 0; f < fs.count(); ++f) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        std::size_t ri = i, rj = j;
        for (int k = m - 1; k >= 0; --k) {
          off[k] = static_cast<long>(rj % shape[k]) - static_cast<long>(ri % shape[k]);
          ri /= shape[k];
          rj /= shape[k];
        }
        const std::size_t a = fs.flat(f, i), b = fs.flat(f, j);
        const double q = std::abs(u[b] - u[a]) / detail::pair_denominator(g, free_axes, off, exponent);
        ++best.pairs_scanned;
        if (q > best.value) {
          best.value = q;
          best.a = a;
          best.b = b;
        }
      }
    }
  }
  return best;
}

// Brute force for an order-0 spec (derivatives, if any, are the caller's job).
inline PairMax brute_force_seminorm(const GridFunction& u, const SeminormSpec& spec) {
  check_delta(spec.delta);
  require(spec.order == 0, "brute force handles order-0 quotients; differentiate first");
  const auto [axes, e] = family_metric(u.grid(), spec.family, spec.delta);
  return brute_force_fiber(u, axes, e);
}

// Exact best uniform approximation error on a finite set (Remez single exchange).
inline double chebyshev_fit_1d(const std::vector<double>& t, const std::vector<double>& y, int degree) {
  require(degree >= 0, "degree must be nonnegative");
  require(t.size() == y.size(), "sample size mismatch");
  const int m = degree + 2;
  require(static_cast<int>(t.size()) >= m, "need at least degree + 2 samples");
  std::vector<std::size_t> order(t.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return t[a] < t[b]; });
  std::vector<double> ts, ys;
  for (auto k : order) {
    require(ts.empty() || t[k] > ts.back(), "sample abscissae must be distinct");
    ts.push_back(t[k]);
    ys.push_back(y[k]);
  }
  const std::size_t n = ts.size();
  // Map to [-1, 1] and use a Chebyshev basis for conditioning.
  const double lo = ts.front(), hi = ts.back();
  auto basis = [&](double x, int j) {
    const double s = hi > lo ? (2.0 * x - lo - hi) / (hi - lo) : 0.0;
    return std::cos(j * std::acos(std::clamp(s, -1.0, 1.0)));
  };
  std::vector<std::size_t> ref(m);
  for (int k = 0; k < m; ++k) ref[k] = static_cast<std::size_t>(std::llround(k * (n - 1.0) / (m - 1.0)));

  Eigen::VectorXd coef(degree + 1);
  double level = 0.0;
  for (int iter = 0; iter < 1000; ++iter) {
    Eigen::MatrixXd A(m, m);
    Eigen::VectorXd b(m);
    for (int k = 0; k < m; ++k) {
      for (int j = 0; j <= degree; ++j) A(k, j) = basis(ts[ref[k]], j);
      A(k, m - 1) = (k % 2 == 0) ? 1.0 : -1.0;
      b(k) = ys[ref[k]];
    }
    Eigen::VectorXd sol = A.fullPivLu().solve(b);
    coef = sol.head(degree + 1);
    level = std::abs(sol(m - 1));
    auto resid = [&](std::size_t i) {
      double p = 0.0;
      for (int j = 0; j <= degree; ++j) p += coef(j) * basis(ts[i], j);
      return ys[i] - p;
    };
    std::size_t star = 0;
    double rmax = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = std::abs(resid(i));
      if (r > rmax) {
        rmax = r;
        star = i;
      }
    }
    if (rmax <= level * (1.0 + 1e-12) + 1e-15) return rmax;
    if (std::find(ref.begin(), ref.end(), star) != ref.end()) return rmax;
    const double sstar = resid(star) >= 0 ? 1.0 : -1.0;
    auto sgn = [&](std::size_t i) { return resid(i) >= 0 ? 1.0 : -1.0; };
    if (star < ref.front()) {
      if (sgn(ref.front()) == sstar) {
        ref.front() = star;
      } else {
        ref.insert(ref.begin(), star);
        ref.pop_back();
      }
    } else if (star > ref.back()) {
      if (sgn(ref.back()) == sstar) {
        ref.back() = star;
      } else {
        ref.push_back(star);
        ref.erase(ref.begin());
      }
    } else {
      for (int k = 0; k + 1 < m; ++k) {
        if (ref[k] < star && star < ref[k + 1]) {
          if (sgn(ref[k]) == sstar)
            ref[k] = star;
          else
            ref[k + 1] = star;
          break;
        }
      }
    }
  }
  throw LabError("exchange iteration did not converge");
}

}  // namespace schauder
