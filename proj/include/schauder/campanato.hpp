#pragma once

// Polynomial classes whose coefficients are functions of the frozen
// variables, partial Taylor polynomials, local best-fit errors and the
// Campanato-type quotient.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "schauder/error.hpp"
#include "schauder/lattice.hpp"

namespace schauder {

enum class ClassKind { ptilde, phat1, phat2, pbar1 };

struct ClassTag {
  ClassKind kind = ClassKind::ptilde;
  int k = 2;  // order for ptilde

  static ClassTag ptilde(int k) { return {ClassKind::ptilde, k}; }
  static ClassTag phat1() { return {ClassKind::phat1, 1}; }
  static ClassTag phat2() { return {ClassKind::phat2, 2}; }
  static ClassTag pbar1() { return {ClassKind::pbar1, 1}; }

  std::string name() const {
    switch (kind) {
      case ClassKind::ptilde: return "Ptilde(" + std::to_string(k) + ")";
      case ClassKind::phat1: return "Phat1";
      case ClassKind::phat2: return "Phat2";
      case ClassKind::pbar1: return "Pbar1";
    }
    return "?";
  }
};

// A monomial in the regular variables: exponent per array axis of the grid.
struct Monomial {
  std::vector<int> power;  // indexed by array axis

  int degree() const {
    int s = 0;
    for (int p : power) s += p;
    return s;
  }
};

// Regular (polynomial) array axes of a class.
inline std::vector<int> class_axes(const Grid& g, const ClassTag& tag) {
  std::vector<int> axes;
  switch (tag.kind) {
    case ClassKind::ptilde:
      for (int i = 0; i < g.split(); ++i) axes.push_back(g.array_axis(i));
      break;
    case ClassKind::phat1:
    case ClassKind::phat2:
      require(g.has_time(), "parabolic polynomial classes need a time axis");
      axes.push_back(0);
      for (int i = 0; i < g.split(); ++i) axes.push_back(g.array_axis(i));
      break;
    case ClassKind::pbar1:
      for (int i = 0; i < g.dim(); ++i) axes.push_back(g.array_axis(i));
      break;
  }
  return axes;
}

// Monomial basis of a class, constant term first.
inline std::vector<Monomial> class_monomials(const Grid& g, const ClassTag& tag) {
  std::vector<Monomial> out;
  auto unit = [&] { return Monomial{std::vector<int>(g.rank(), 0)}; };
  out.push_back(unit());
  switch (tag.kind) {
    case ClassKind::ptilde: {
      require(tag.k >= 0 && tag.k <= 2, "Ptilde order must be 0, 1 or 2");
      for (int ord = 1; ord <= tag.k; ++ord) {
        for (const auto& a : multi_indices(g.split(), ord)) {
          Monomial m = unit();
          for (int i = 0; i < g.split(); ++i) m.power[g.array_axis(i)] = a.alpha[i];
          out.push_back(m);
        }
      }
      break;
    }
    case ClassKind::phat1:
    case ClassKind::pbar1: {
      const int last = tag.kind == ClassKind::phat1 ? g.split() : g.dim();
      for (int i = 0; i < last; ++i) {
        Monomial m = unit();
        m.power[g.array_axis(i)] = 1;
        out.push_back(m);
      }
      break;
    }
    case ClassKind::phat2: {
      Monomial mt = unit();
      mt.power[0] = 1;
      out.push_back(mt);
      for (int ord = 1; ord <= 2; ++ord) {
        for (const auto& a : multi_indices(g.split(), ord)) {
          Monomial m = unit();
          for (int i = 0; i < g.split(); ++i) m.power[g.array_axis(i)] = a.alpha[i];
          out.push_back(m);
        }
      }
      break;
    }
  }
  return out;
}

// Monomial value at a lattice offset from the expansion point. Offsets are
// index differences scaled by the spacing, so translates give identical rows.
inline double monomial_at(const Grid& g, const Monomial& m, std::span<const long> offset) {
  double v = 1.0;
  for (int k = 0; k < g.rank(); ++k)
    for (int p = 0; p < m.power[k]; ++p) v *= static_cast<double>(offset[k]) * g.array_spacing(k);
  return v;
}

// Polynomial in the regular variables with coefficients that are grid
// functions of the frozen variables (stored broadcast over the full grid).
struct PolynomialSlice {
  ClassTag tag;
  std::vector<std::size_t> center;  // array index of the expansion point (regular axes used)
  std::vector<Monomial> monomials;
  std::vector<GridFunction> coefficients;

  GridFunction evaluate() const {
    require(!coefficients.empty(), "empty polynomial");
    const Grid& g = coefficients.front().grid();
    GridFunction out(g);
    std::vector<long> off(g.rank(), 0);
    for (std::size_t p = 0; p < g.size(); ++p) {
      for (int k = 0; k < g.rank(); ++k)
        off[k] = static_cast<long>(g.index_along(p, k)) - static_cast<long>(center[k]);
      double s = 0.0;
      for (std::size_t m = 0; m < monomials.size(); ++m) s += coefficients[m][p] * monomial_at(g, monomials[m], off);
      out[p] = s;
    }
    return out;
  }
};

namespace detail {

// Broadcast the value of f at the center along the regular axes.
inline GridFunction freeze(const GridFunction& f, const std::vector<int>& regular, const std::vector<std::size_t>& center) {
  const Grid& g = f.grid();
  GridFunction out(g);
  std::vector<std::size_t> idx;
  for (std::size_t p = 0; p < g.size(); ++p) {
    idx = g.unflat(p);
    for (int a : regular) idx[a] = center[a];
    out[p] = f[g.flat(idx)];
  }
  return out;
}

inline std::vector<std::size_t> center_index(const Grid& g, const std::vector<int>& regular, const Point& c) {
  std::vector<std::size_t> idx(g.rank(), 0);
  for (int a : regular) idx[a] = g.is_time_axis(a) ? g.time_index(c.t) : g.lattice_index(g.spatial_axis(a), c.x[g.spatial_axis(a)]);
  return idx;
}

}  // namespace detail

// Partial Taylor polynomial of order k in x' at x0' (coordinates in x0.x[0..q)).
inline PolynomialSlice taylor_xprime(const GridFunction& u, const Point& x0, int k) {
  require(k >= 0 && k <= 2, "Taylor order must be 0, 1 or 2");
  const Grid& g = u.grid();
  PolynomialSlice p;
  p.tag = ClassTag::ptilde(k);
  const auto regular = class_axes(g, p.tag);
  p.center = detail::center_index(g, regular, x0);
  p.monomials = class_monomials(g, p.tag);
  for (const auto& m : p.monomials) {
    MultiIndex a;
    for (int i = 0; i < g.split(); ++i) a.alpha.push_back(m.power[g.array_axis(i)]);
    GridFunction c = detail::freeze(fd_multi(u, a), regular, p.center);
    c *= 1.0 / a.factorial();
    p.coefficients.push_back(std::move(c));
  }
  return p;
}

// Parabolic partial Taylor polynomial at z0' = (t0, x0'): order 1 (Phat1) or 2 (Phat2).
inline PolynomialSlice taylor_zprime(const GridFunction& u, const Point& z0, int order) {
  require(order == 1 || order == 2, "parabolic Taylor order must be 1 or 2");
  const Grid& g = u.grid();
  PolynomialSlice p;
  p.tag = order == 1 ? ClassTag::phat1() : ClassTag::phat2();
  const auto regular = class_axes(g, p.tag);
  p.center = detail::center_index(g, regular, z0);
  p.monomials = class_monomials(g, p.tag);
  for (const auto& m : p.monomials) {
    GridFunction d = u;
    if (m.power[0] == 1) {
      d = fd_time_derivative(u);
    } else {
      MultiIndex a;
      for (int i = 0; i < g.split(); ++i) a.alpha.push_back(m.power[g.array_axis(i)]);
      d = fd_multi(u, a);
      d *= 1.0 / a.factorial();
    }
    p.coefficients.push_back(detail::freeze(d, regular, p.center));
  }
  return p;
}

// First-order Taylor polynomial in all of x at x0; coefficients depend on t.
inline PolynomialSlice taylor_x_firstorder(const GridFunction& u, const Point& x0) {
  const Grid& g = u.grid();
  PolynomialSlice p;
  p.tag = ClassTag::pbar1();
  const auto regular = class_axes(g, p.tag);
  p.center = detail::center_index(g, regular, x0);
  p.monomials = class_monomials(g, p.tag);
  for (const auto& m : p.monomials) {
    GridFunction d = u;
    for (int i = 0; i < g.dim(); ++i)
      if (m.power[g.array_axis(i)] == 1) d = fd_derivative(u, i, 1);
    p.coefficients.push_back(detail::freeze(d, regular, p.center));
  }
  return p;
}

// Lattice region of a fit: regular axes form the fitting set, the remaining
// axes enumerate slices. Spatial axes use balls (x' ball for the fit, x''
// ball for the slices); time uses the backward window (t0 - r^2, t0].
struct FitRegion {
  std::vector<std::vector<long>> offsets;  // regular-axis offsets in the fit set
  std::vector<std::size_t> slice_bases;    // flat index of each slice at offset 0
};

inline FitRegion fit_region(const Grid& g, const std::vector<std::size_t>& center, double r, const ClassTag& tag) {
  require(r > 0.0, "radius must be positive");
  const auto regular = class_axes(g, tag);
  std::vector<bool> is_reg(g.rank(), false);
  for (int a : regular) is_reg[a] = true;

  // Per-axis index ranges inside the bounding box of the region.
  std::vector<long> lo(g.rank()), hi(g.rank());
  for (int k = 0; k < g.rank(); ++k) {
    const long n = static_cast<long>(g.shape()[k]);
    const long c = static_cast<long>(center[k]);
    if (g.is_time_axis(k)) {
      const long back = static_cast<long>(std::ceil(r * r / g.time().step() - 1e-9)) - 1;
      lo[k] = std::max(0L, c - std::max(0L, back));
      hi[k] = c;
    } else {
      const long w = static_cast<long>(std::floor(r / g.array_spacing(k) + 1e-9));
      lo[k] = std::max(0L, c - w);
      hi[k] = std::min(n - 1, c + w);
    }
  }
  auto inside_ball = [&](const std::vector<long>& off, bool regular_part) {
    double s2 = 0.0;
    for (int k = 0; k < g.rank(); ++k) {
      if (is_reg[k] != regular_part || g.is_time_axis(k)) continue;
      const double d = static_cast<double>(off[k]) * g.array_spacing(k);
      s2 += d * d;
    }
    return s2 <= r * r * (1.0 + 1e-12);
  };

  FitRegion reg;
  std::vector<long> off(g.rank(), 0);
  // Enumerate the bounding box once, splitting into regular offsets and slice positions.
  std::vector<long> cur(lo);
  while (true) {
    for (int k = 0; k < g.rank(); ++k) off[k] = cur[k] - static_cast<long>(center[k]);
    bool reg_zero = true, slice_zero = true;
    for (int k = 0; k < g.rank(); ++k) {
      if (is_reg[k] && off[k] != 0) reg_zero = false;
      if (!is_reg[k] && off[k] != 0) slice_zero = false;
    }
    if (slice_zero && inside_ball(off, true)) {
      std::vector<long> ro;
      for (int a : regular) ro.push_back(off[a]);
      reg.offsets.push_back(ro);
    }
    if (reg_zero && inside_ball(off, false)) {
      std::size_t f = 0;
      for (int k = 0; k < g.rank(); ++k) f += static_cast<std::size_t>(cur[k]) * g.strides()[k];
      reg.slice_bases.push_back(f);
    }
    int k = g.rank() - 1;
    for (; k >= 0; --k) {
      if (++cur[k] <= hi[k]) break;
      cur[k] = lo[k];
    }
    if (k < 0) break;
  }
  return reg;
}

// Least-squares fit per slice, then sup of the residual; max over slices.
inline double best_fit_error(const GridFunction& u, const std::vector<std::size_t>& center, double r,
                             const ClassTag& tag) {
  const Grid& g = u.grid();
  require(center.size() == static_cast<std::size_t>(g.rank()), "center must index every array axis");
  for (int k = 0; k < g.rank(); ++k) require(center[k] < g.shape()[k], "center outside the grid");
  const auto regular = class_axes(g, tag);
  const auto monos = class_monomials(g, tag);
  const FitRegion reg = fit_region(g, center, r, tag);
  const auto npts = static_cast<Eigen::Index>(reg.offsets.size());
  const auto nm = static_cast<Eigen::Index>(monos.size());
  require(npts >= nm, "underdetermined fit: too few lattice points in the region");

  Eigen::MatrixXd V(npts, nm);
  std::vector<long> full(g.rank(), 0);
  std::vector<long> shift(npts);
  for (Eigen::Index i = 0; i < npts; ++i) {
    std::fill(full.begin(), full.end(), 0);
    long s = 0;
    for (std::size_t a = 0; a < regular.size(); ++a) {
      full[regular[a]] = reg.offsets[i][a];
      s += reg.offsets[i][a] * static_cast<long>(g.strides()[regular[a]]);
    }
    shift[i] = s;
    for (Eigen::Index m = 0; m < nm; ++m) V(i, m) = monomial_at(g, monos[m], full);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(V);
  require(qr.rank() == nm, "underdetermined fit: design matrix is rank deficient");

  const auto ns = static_cast<Eigen::Index>(reg.slice_bases.size());
  Eigen::MatrixXd Y(npts, ns);
  for (Eigen::Index s = 0; s < ns; ++s)
    for (Eigen::Index i = 0; i < npts; ++i)
      Y(i, s) = u[static_cast<std::size_t>(static_cast<long>(reg.slice_bases[s]) + shift[i])];
  const Eigen::MatrixXd C = qr.solve(Y);
  const Eigen::MatrixXd R = Y - V * C;
  return R.cwiseAbs().maxCoeff();
}

// Dyadic radii 2^-1, 2^-2, ... down to min_radius.
inline std::vector<double> dyadic_radii(double r_max, double min_radius) {
  std::vector<double> out;
  for (double r = r_max; r >= min_radius * (1.0 - 1e-12); r *= 0.5) out.push_back(r);
  return out;
}

// Centers on a coarse sub-lattice of the interior box: every spatial axis is
// sampled with physical step `step` inside [lo + margin*L, hi - margin*L];
// the time axis (if any) is pinned to its last level.
inline std::vector<std::vector<std::size_t>> coarse_centers(const Grid& g, double margin, double step) {
  std::vector<std::vector<std::size_t>> per_axis(g.rank());
  for (int k = 0; k < g.rank(); ++k) {
    if (g.is_time_axis(k)) {
      per_axis[k] = {g.shape()[k] - 1};
      continue;
    }
    const auto& a = g.axis(g.spatial_axis(k));
    const double len = a.hi - a.lo;
    const double lo = a.lo + margin * len, hi = a.hi - margin * len;
    for (double x = lo; x <= hi + 1e-12; x += step) {
      const double s = (x - a.lo) / a.spacing();
      const double ks = std::round(s);
      if (std::abs(s - ks) < 1e-9) per_axis[k].push_back(static_cast<std::size_t>(ks));
    }
    require(!per_axis[k].empty(), "center step does not hit any lattice point");
  }
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> pick(g.rank(), 0);
  while (true) {
    std::vector<std::size_t> c(g.rank());
    for (int k = 0; k < g.rank(); ++k) c[k] = per_axis[k][pick[k]];
    out.push_back(c);
    int k = g.rank() - 1;
    for (; k >= 0; --k) {
      if (++pick[k] < per_axis[k].size()) break;
      pick[k] = 0;
    }
    if (k < 0) break;
  }
  return out;
}

// max over centers x radii of r^{-(k+delta)} best_fit_error.
inline double campanato_quotient(const GridFunction& u, int k, double delta, const ClassTag& tag,
                                 const std::vector<std::vector<std::size_t>>& centers,
                                 const std::vector<double>& radii) {
  require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
  double q = 0.0;
  for (const auto& c : centers)
    for (double r : radii) q = std::max(q, best_fit_error(u, c, r, tag) / std::pow(r, k + delta));
  return q;
}

}  // namespace schauder
