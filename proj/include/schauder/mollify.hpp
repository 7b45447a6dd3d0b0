#pragma once

// Kernel with two vanishing moments and the partial / parabolic / full
// mollifications built from it, plus the mollifier bound checks.

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "schauder/error.hpp"
#include "schauder/lattice.hpp"
#include "schauder/seminorm.hpp"

namespace schauder {

// exp(1/(t^2 - 1)) on (-1, 1), zero outside.
inline double bump(double t) {
  const double s = t * t;
  return s < 1.0 ? std::exp(1.0 / (s - 1.0)) : 0.0;
}

// eta(t) = (alpha + beta t^2) bump(t) with int eta = 1, int t^2 eta = 0.
struct Kernel1D {
  double alpha = 0.0;
  double beta = 0.0;
  double m0 = 0.0, m1 = 0.0, m2 = 0.0;

  double operator()(double t) const { return (alpha + beta * t * t) * bump(t); }
};

namespace detail {

template <typename F>
double integrate_unit(F&& f) {
  using boost::math::quadrature::gauss_kronrod;
  double err = 0.0;
  // Split at 0 so each half sees a single flat end.
  const double a = gauss_kronrod<double, 61>::integrate(f, -1.0, 0.0, 20, 1e-14, &err);
  const double b = gauss_kronrod<double, 61>::integrate(f, 0.0, 1.0, 20, 1e-14, &err);
  return a + b;
}

}  // namespace detail

inline Kernel1D build_kernel() {
  const double b0 = detail::integrate_unit([](double t) { return bump(t); });
  const double b2 = detail::integrate_unit([](double t) { return t * t * bump(t); });
  const double b4 = detail::integrate_unit([](double t) { return t * t * t * t * bump(t); });
  Eigen::Matrix2d A;
  A << b0, b2, b2, b4;
  const Eigen::Vector2d sol = A.fullPivLu().solve(Eigen::Vector2d(1.0, 0.0));
  Kernel1D k{sol(0), sol(1)};
  k.m0 = detail::integrate_unit([&](double t) { return k(t); });
  k.m1 = detail::integrate_unit([&](double t) { return t * k(t); });
  k.m2 = detail::integrate_unit([&](double t) { return t * t * k(t); });
  require(std::abs(k.m0 - 1.0) <= 1e-10 && std::abs(k.m1) <= 1e-10 && std::abs(k.m2) <= 1e-10,
          "kernel moment conditions not met by the quadrature");
  return k;
}

// Trapezoid weights of the scaled kernel on a lattice with step h and width
// eps: w_j = (h/eps)(a + b s_j^2) bump(s_j), s_j = j h / eps. The pair (a, b)
// is re-solved on the lattice so the discrete sums of w and s^2 w are exactly
// 1 and 0; for eps >> h it agrees with (alpha, beta) to quadrature accuracy.
inline std::vector<double> lattice_weights(double h, double eps) {
  require(eps > 0.0 && h > 0.0, "mollification width and spacing must be positive");
  require(eps >= 2.0 * h * (1.0 - 1e-12), "mollification width must be at least two lattice steps");
  const long J = static_cast<long>(std::ceil(eps / h));
  double s0 = 0.0, s2 = 0.0, s4 = 0.0;
  std::vector<double> b(2 * J + 1), s(2 * J + 1);
  for (long j = -J; j <= J; ++j) {
    const double sj = static_cast<double>(j) * h / eps;
    const double bj = bump(sj) * h / eps;
    b[j + J] = bj;
    s[j + J] = sj;
  }
  // Sum symmetric pairs outward so the odd moment cancels exactly.
  s0 = b[J];
  for (long j = 1; j <= J; ++j) {
    const double sj2 = s[J + j] * s[J + j];
    s0 += 2.0 * b[J + j];
    s2 += 2.0 * sj2 * b[J + j];
    s4 += 2.0 * sj2 * sj2 * b[J + j];
  }
  Eigen::Matrix2d A;
  A << s0, s2, s2, s4;
  const Eigen::Vector2d ab = A.fullPivLu().solve(Eigen::Vector2d(1.0, 0.0));
  std::vector<double> w(2 * J + 1);
  for (long j = -J; j <= J; ++j) w[j + J] = (ab(0) + ab(1) * s[j + J] * s[j + J]) * b[j + J];
  return w;
}

// 1-d convolution along one array axis; constant extension past Dirichlet
// ends (and past the time range), wrap-around on periodic axes.
inline GridFunction convolve_axis(const GridFunction& u, int array_axis, const std::vector<double>& w) {
  const Grid& g = u.grid();
  const std::size_t n = g.shape()[array_axis];
  const std::size_t s = g.strides()[array_axis];
  const bool periodic = g.array_periodic(array_axis);
  const long J = static_cast<long>(w.size() / 2);
  GridFunction out(g);
  const auto src = u.values();
  auto dst = out.values();
  for (std::size_t p = 0; p < g.size(); ++p) {
    const auto i = static_cast<long>((p / s) % n);
    const std::size_t base = p - static_cast<std::size_t>(i) * s;
    double acc = 0.0;
    for (long j = -J; j <= J; ++j) {
      long k = i - j;
      if (periodic)
        k = ((k % static_cast<long>(n)) + static_cast<long>(n)) % static_cast<long>(n);
      else
        k = std::clamp(k, 0L, static_cast<long>(n) - 1);
      acc += w[j + J] * src[base + static_cast<std::size_t>(k) * s];
    }
    dst[p] = acc;
  }
  return out;
}

// Partial mollification in x' with width eps.
inline GridFunction mollify_xprime(const GridFunction& u, double eps) {
  const Grid& g = u.grid();
  GridFunction v = u;
  for (int i = 0; i < g.split(); ++i) {
    require(eps >= 2.0 * g.spacing(i) * (1.0 - 1e-12), "eps must be at least 2h on every x' axis");
    v = convolve_axis(v, g.array_axis(i), lattice_weights(g.spacing(i), eps));
  }
  return v;
}

// Parabolic mollification in (t, x'): width eps^2 in t, eps in x'.
inline GridFunction mollify_zprime(const GridFunction& u, double eps) {
  const Grid& g = u.grid();
  require(g.has_time(), "parabolic mollification needs a time axis");
  const double tau = g.time().step();
  require(eps * eps >= 2.0 * tau * (1.0 - 1e-12), "eps^2 must be at least 2 tau");
  GridFunction v = mollify_xprime(u, eps);
  return convolve_axis(v, 0, lattice_weights(tau, eps * eps));
}

// Mollification over all spatial axes; time untouched.
inline GridFunction mollify_full(const GridFunction& u, double eps) {
  const Grid& g = u.grid();
  GridFunction v = u;
  for (int i = 0; i < g.dim(); ++i) {
    require(eps >= 2.0 * g.spacing(i) * (1.0 - 1e-12), "eps must be at least 2h on every axis");
    v = convolve_axis(v, g.array_axis(i), lattice_weights(g.spacing(i), eps));
  }
  return v;
}

struct LemmaRow {
  double eps = 0.0;
  double sup_d1 = 0.0;         // sup |D_{x'} v^eps|
  double sup_d2 = 0.0;         // sup |D^2_{x'} v^eps|
  double sup_dt = 0.0;         // sup |D_t v^eps| (parabolic only)
  double sup_error = 0.0;      // sup |v - v^eps|
  double derivative_ratio = 0.0;  // weighted derivative sum / [v]_delta
  double first_ratio = 0.0;       // eps^{1-delta} sup|D_{x'} v^eps| / [v]_delta
  double error_ratio = 0.0;       // sup|v - v^eps| / (eps^{k+delta} [v]_{k+delta})
};

struct LemmaReport {
  bool parabolic = false;
  double delta = 0.0;
  int k = 0;
  double seminorm_delta = 0.0;    // [v]_{x',delta} or [v]_{z',delta/2,delta}
  double seminorm_k_delta = 0.0;  // [v]_{x',k+delta}
  std::vector<LemmaRow> rows;
  double error_slope = 0.0;           // least-squares slope of log sup|v - v^eps| vs log eps
  double max_derivative_ratio = 0.0;
  double max_first_ratio = 0.0;
  double max_error_ratio = 0.0;
  double first_ratio_variation = 0.0;  // max factor between consecutive eps
  double derivative_ratio_variation = 0.0;
};

inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, "slope needs at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(x[i] > 0 && y[i] > 0, "log-log slope needs positive data");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

namespace detail {

inline double sup_abs_over(const std::vector<GridFunction>& fs) {
  double m = 0.0;
  for (const auto& f : fs) m = std::max(m, f.max_abs());
  return m;
}

// Crops time levels closer than `pad` to either end of the time axis.
inline GridFunction trim_time_both(const GridFunction& u, double pad) {
  const Grid& g = u.grid();
  if (!g.has_time() || pad <= 0.0) return u;
  const auto skip = static_cast<std::size_t>(std::ceil(pad / g.time().step() - 1e-9));
  std::vector<std::size_t> first(g.rank(), 0), last(g.rank());
  for (int k = 0; k < g.rank(); ++k) last[k] = g.shape()[k] - 1;
  require(g.shape()[0] > 2 * skip + 1, "time axis too short for the requested padding");
  first[0] = skip;
  last[0] = g.shape()[0] - 1 - skip;
  return crop(u, first, last);
}

inline void finish(LemmaReport& r) {
  std::vector<double> e, err;
  for (const auto& row : r.rows) {
    e.push_back(row.eps);
    err.push_back(row.sup_error);
    r.max_derivative_ratio = std::max(r.max_derivative_ratio, row.derivative_ratio);
    r.max_first_ratio = std::max(r.max_first_ratio, row.first_ratio);
    r.max_error_ratio = std::max(r.max_error_ratio, row.error_ratio);
  }
  bool positive = true;
  for (double v : err) positive = positive && v > 0.0;
  r.error_slope = (r.rows.size() >= 2 && positive) ? loglog_slope(e, err) : 0.0;
  auto variation = [&](auto get) {
    double v = 1.0;
    for (std::size_t i = 0; i + 1 < r.rows.size(); ++i) {
      const double a = get(r.rows[i]), b = get(r.rows[i + 1]);
      if (a > 0 && b > 0) v = std::max(v, std::max(a / b, b / a));
    }
    return v;
  };
  r.first_ratio_variation = variation([](const LemmaRow& x) { return x.first_ratio; });
  r.derivative_ratio_variation = variation([](const LemmaRow& x) { return x.derivative_ratio; });
}

}  // namespace detail

// Partial mollifier bounds: both sides of the derivative bound and the
// approximation bound for each eps, measured on the interior sub-box.
inline LemmaReport check_partial_mollifier(const GridFunction& v, double delta, int k, const std::vector<double>& eps_list,
                                 double margin = 0.25, const PairBudget& budget = {}) {
  check_delta(delta);
  require(k >= 0 && k <= 2, "k must be 0, 1 or 2");
  LemmaReport r;
  r.delta = delta;
  r.k = k;
  r.seminorm_delta = seminorm_xprime(restrict_interior(v, margin), delta, budget);
  r.seminorm_k_delta = k == 0 ? r.seminorm_delta : seminorm_xprime_k(v, k, delta, budget, margin);
  const GridFunction vin = restrict_interior(v, margin);
  for (double eps : eps_list) {
    const GridFunction m = mollify_xprime(v, eps);
    LemmaRow row;
    row.eps = eps;
    row.sup_d1 = detail::sup_abs_over(xprime_derivatives(m, 1, margin));
    row.sup_d2 = detail::sup_abs_over(xprime_derivatives(m, 2, margin));
    row.sup_error = (vin - restrict_interior(m, margin)).max_abs();
    const double lhs = std::pow(eps, 1.0 - delta) * row.sup_d1 + std::pow(eps, 2.0 - delta) * row.sup_d2;
    row.derivative_ratio = r.seminorm_delta > 0 ? lhs / r.seminorm_delta : 0.0;
    row.first_ratio = r.seminorm_delta > 0 ? std::pow(eps, 1.0 - delta) * row.sup_d1 / r.seminorm_delta : 0.0;
    row.error_ratio =
        r.seminorm_k_delta > 0 ? row.sup_error / (std::pow(eps, k + delta) * r.seminorm_k_delta) : 0.0;
    r.rows.push_back(row);
  }
  detail::finish(r);
  return r;
}

// Parabolic counterpart: mollify in (t, x'), time derivative included, the
// seminorm is [v]_{z',delta/2,delta}. Time levels within max eps^2 of either
// end are excluded from the sups.
inline LemmaReport check_parabolic_mollifier(const GridFunction& v, double delta, const std::vector<double>& eps_list,
                                 double margin = 0.25, const PairBudget& budget = {}) {
  check_delta(delta);
  require(v.grid().has_time(), "parabolic check needs a time axis");
  double emax = 0.0;
  for (double e : eps_list) emax = std::max(emax, e);
  const double pad = emax * emax;
  auto window = [&](const GridFunction& g) { return detail::trim_time_both(restrict_interior(g, margin), pad); };
  LemmaReport r;
  r.parabolic = true;
  r.delta = delta;
  const GridFunction vin = window(v);
  r.seminorm_delta = seminorm_zprime(vin, delta, budget);
  r.seminorm_k_delta = r.seminorm_delta;
  for (double eps : eps_list) {
    const GridFunction m = mollify_zprime(v, eps);
    LemmaRow row;
    row.eps = eps;
    double d1 = 0.0, d2 = 0.0;
    for (const auto& a : multi_indices(v.grid().split(), 1)) d1 = std::max(d1, window(fd_multi(m, a)).max_abs());
    for (const auto& a : multi_indices(v.grid().split(), 2)) d2 = std::max(d2, window(fd_multi(m, a)).max_abs());
    row.sup_d1 = d1;
    row.sup_d2 = d2;
    row.sup_dt = window(fd_time_derivative(m)).max_abs();
    row.sup_error = (vin - window(m)).max_abs();
    const double lhs = std::pow(eps, 2.0 - delta) * (row.sup_dt + row.sup_d2) + std::pow(eps, 1.0 - delta) * d1;
    row.derivative_ratio = r.seminorm_delta > 0 ? lhs / r.seminorm_delta : 0.0;
    row.first_ratio = r.seminorm_delta > 0 ? std::pow(eps, 1.0 - delta) * d1 / r.seminorm_delta : 0.0;
    row.error_ratio = r.seminorm_delta > 0 ? row.sup_error / (std::pow(eps, delta) * r.seminorm_delta) : 0.0;
    r.rows.push_back(row);
  }
  detail::finish(r);
  return r;
}

}  // namespace schauder
