#pragma once

// Coefficient fields a^{ij} with prescribed dependence patterns, and synthetic
// data built from delta-cusps whose partial seminorms are known.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "schauder/error.hpp"
#include "schauder/lattice.hpp"

namespace schauder {

enum class Pattern { constant, t_only, xpp_only, t_and_xpp, xprime_hoelder };

inline const char* to_string(Pattern p) {
  switch (p) {
    case Pattern::constant: return "constant";
    case Pattern::t_only: return "t-only";
    case Pattern::xpp_only: return "xpp-only";
    case Pattern::t_and_xpp: return "t-and-xpp";
    case Pattern::xprime_hoelder: return "xprime-hoelder";
  }
  return "?";
}

inline Pattern pattern_from_string(const std::string& s) {
  for (auto p : {Pattern::constant, Pattern::t_only, Pattern::xpp_only, Pattern::t_and_xpp,
                 Pattern::xprime_hoelder})
    if (s == to_string(p)) return p;
  throw LabError("unknown coefficient pattern '" + s + "'");
}

// Which structural bound the generator targets: two-sided eigenvalue bounds
// (nondivergence) or the lower bound plus sum |a^{ij}|^2 <= nu^-2 (divergence).
enum class OperatorForm { nondivergence, divergence };

struct EllipticityCheck {
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  double max_frobenius_sq = 0.0;
  bool ok = false;
};

// Symmetric matrix field stored on the sub-lattice of axes it depends on.
class CoefficientField {
 public:
  CoefficientField(Grid grid, double nu, Pattern pattern, std::vector<bool> depends,
                   std::vector<double> entries)
      : grid_(std::move(grid)), nu_(nu), pattern_(pattern), depends_(std::move(depends)),
        entries_(std::move(entries)) {
    require(nu_ > 0.0 && nu_ <= 1.0, "ellipticity constant must lie in (0, 1]");
    require(static_cast<int>(depends_.size()) == grid_.rank(), "dependence mask must cover every array axis");
    support_shape_.resize(grid_.rank());
    for (int k = 0; k < grid_.rank(); ++k) support_shape_[k] = depends_[k] ? grid_.shape()[k] : 1;
    support_strides_.assign(grid_.rank(), 1);
    for (int k = grid_.rank() - 2; k >= 0; --k)
      support_strides_[k] = support_strides_[k + 1] * support_shape_[k + 1];
    support_size_ = support_strides_[0] * support_shape_[0];
    const auto dd = static_cast<std::size_t>(grid_.dim() * grid_.dim());
    require(entries_.size() == support_size_ * dd, "coefficient entry count mismatch");
  }

  const Grid& grid() const { return grid_; }
  int dim() const { return grid_.dim(); }
  double nu() const { return nu_; }
  Pattern pattern() const { return pattern_; }
  const std::vector<bool>& depends() const { return depends_; }
  std::size_t support_size() const { return support_size_; }

  bool degenerate = false;      // lower bound only required on xi'
  double hoelder_K = 0.0;       // declared [a]_{x',delta} bound (xprime-hoelder)
  double hoelder_delta = 0.0;
  std::uint64_t seed = 0;

  std::size_t support_index(std::size_t flat) const {
    std::size_t s = 0;
    for (int k = 0; k < grid_.rank(); ++k)
      if (depends_[k]) s += grid_.index_along(flat, k) * support_strides_[k];
    return s;
  }

  double entry(std::size_t flat, int i, int j) const {
    return entries_[support_index(flat) * dim() * dim() + i * dim() + j];
  }
  const double* support_data(std::size_t s) const { return entries_.data() + s * dim() * dim(); }
  Eigen::MatrixXd support_matrix(std::size_t s) const {
    return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        support_data(s), dim(), dim());
  }
  Eigen::MatrixXd matrix(std::size_t flat) const { return support_matrix(support_index(flat)); }
  std::span<const double> raw_entries() const { return entries_; }

  GridFunction entry_field(int i, int j) const {
    GridFunction out(grid_);
    for (std::size_t p = 0; p < grid_.size(); ++p) out[p] = entry(p, i, j);
    return out;
  }

  bool symmetric(double tol = 0.0) const {
    for (std::size_t s = 0; s < support_size_; ++s) {
      const double* a = support_data(s);
      for (int i = 0; i < dim(); ++i)
        for (int j = 0; j < i; ++j)
          if (std::abs(a[i * dim() + j] - a[j * dim() + i]) > tol) return false;
    }
    return true;
  }

  // Eigenvalue test at every support point. For degenerate fields the lower
  // bound is tested on a - nu * P' (P' projects onto the x' directions).
  EllipticityCheck check_ellipticity(OperatorForm form = OperatorForm::nondivergence,
                                     double tol = 1e-12) const {
    EllipticityCheck c;
    c.min_eigenvalue = std::numeric_limits<double>::infinity();
    c.max_eigenvalue = -std::numeric_limits<double>::infinity();
    bool ok = symmetric(0.0) || form == OperatorForm::divergence;
    for (std::size_t s = 0; s < support_size_; ++s) {
      Eigen::MatrixXd a = support_matrix(s);
      Eigen::MatrixXd sym = 0.5 * (a + a.transpose());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
      c.min_eigenvalue = std::min(c.min_eigenvalue, es.eigenvalues().minCoeff());
      c.max_eigenvalue = std::max(c.max_eigenvalue, es.eigenvalues().maxCoeff());
      c.max_frobenius_sq = std::max(c.max_frobenius_sq, a.squaredNorm());
      if (degenerate) {
        Eigen::MatrixXd shifted = sym;
        for (int i = 0; i < grid_.split(); ++i) shifted(i, i) -= nu_;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ed(shifted, Eigen::EigenvaluesOnly);
        if (ed.eigenvalues().minCoeff() < -tol) ok = false;
      } else if (es.eigenvalues().minCoeff() < nu_ - tol) {
        ok = false;
      }
    }
    if (form == OperatorForm::nondivergence) {
      if (c.max_eigenvalue > 1.0 / nu_ + tol) ok = false;
    } else if (c.max_frobenius_sq > 1.0 / (nu_ * nu_) + tol) {
      ok = false;
    }
    c.ok = ok;
    return c;
  }

  bool frobenius_bound(double tol = 1e-12) const {
    for (std::size_t s = 0; s < support_size_; ++s)
      if (support_matrix(s).squaredNorm() > 1.0 / (nu_ * nu_) + tol) return false;
    return true;
  }

  // The field frozen at time level n, on the spatial grid.
  CoefficientField at_time(std::size_t n) const {
    if (!grid_.has_time()) return *this;
    Grid spatial(grid_.dim(), grid_.split(), grid_.axes());
    std::vector<bool> dep(depends_.begin() + 1, depends_.end());
    const std::size_t per = support_size_ / support_shape_[0];
    const std::size_t level = depends_[0] ? n : 0;
    const auto dd = static_cast<std::size_t>(dim() * dim());
    std::vector<double> e(entries_.begin() + level * per * dd, entries_.begin() + (level + 1) * per * dd);
    CoefficientField out(spatial, nu_, pattern_, std::move(dep), std::move(e));
    out.degenerate = degenerate;
    out.hoelder_K = hoelder_K;
    out.hoelder_delta = hoelder_delta;
    out.seed = seed;
    return out;
  }

  // True when the frozen fields at time levels n and m are bit-identical.
  bool same_time_slice(std::size_t n, std::size_t m) const {
    if (!grid_.has_time() || !depends_[0]) return true;
    const std::size_t per = support_size_ / support_shape_[0] * dim() * dim();
    return std::equal(entries_.begin() + n * per, entries_.begin() + (n + 1) * per, entries_.begin() + m * per);
  }

  // Constant field (a single matrix) on any grid.
  static CoefficientField constant_matrix(const Grid& grid, const Eigen::MatrixXd& a, double nu) {
    require(a.rows() == grid.dim() && a.cols() == grid.dim(), "matrix size must equal d");
    std::vector<double> e(grid.dim() * grid.dim());
    for (int i = 0; i < grid.dim(); ++i)
      for (int j = 0; j < grid.dim(); ++j) e[i * grid.dim() + j] = a(i, j);
    return CoefficientField(grid, nu, Pattern::constant, std::vector<bool>(grid.rank(), false), std::move(e));
  }

 private:
  Grid grid_;
  double nu_;
  Pattern pattern_;
  std::vector<bool> depends_;
  std::vector<double> entries_;
  std::vector<std::size_t> support_shape_;
  std::vector<std::size_t> support_strides_;
  std::size_t support_size_ = 1;
};

struct VectorField {
  std::vector<GridFunction> components;

  explicit VectorField(std::vector<GridFunction> c) : components(std::move(c)) {
    require(!components.empty(), "vector field needs components");
    for (const auto& f : components) require(f.grid() == components.front().grid(), "components must share one grid");
  }
  const Grid& grid() const { return components.front().grid(); }
  std::size_t size() const { return components.size(); }
  const GridFunction& operator[](std::size_t i) const { return components[i]; }
};

namespace detail {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Eigen::MatrixXd random_orthogonal(int n, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = gauss(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j)
    if (r(j, j) < 0) q.col(j) *= -1.0;
  return q;
}

inline Eigen::MatrixXd random_spd(int n, double lo, double hi, Rng& rng) {
  Eigen::MatrixXd q = random_orthogonal(n, rng);
  Eigen::VectorXd lam(n);
  for (int i = 0; i < n; ++i) lam(i) = uniform(rng, lo, hi);
  Eigen::MatrixXd a = q * lam.asDiagonal() * q.transpose();
  return 0.5 * (a + a.transpose());
}

// Random partition of [lo, hi] into 4..16 cells, returned as sorted interior cuts.
inline std::vector<double> random_cuts(double lo, double hi, Rng& rng, int min_cells = 4, int max_cells = 16) {
  const int cells = std::uniform_int_distribution<int>(min_cells, max_cells)(rng);
  std::vector<double> cuts(cells - 1);
  for (double& c : cuts) c = uniform(rng, lo, hi);
  std::sort(cuts.begin(), cuts.end());
  return cuts;
}

inline std::size_t cell_of(const std::vector<double>& cuts, double x) {
  return static_cast<std::size_t>(std::upper_bound(cuts.begin(), cuts.end(), x) - cuts.begin());
}

// Piecewise-constant partition of the product of the supported array axes.
struct CellPartition {
  std::vector<int> axes;                 // supported array axes
  std::vector<std::vector<double>> cuts;  // per supported axis
  std::size_t cell_count = 1;

  static CellPartition draw(const Grid& g, const std::vector<bool>& depends, Rng& rng) {
    CellPartition p;
    for (int k = 0; k < g.rank(); ++k) {
      if (!depends[k]) continue;
      double lo, hi;
      if (g.is_time_axis(k)) {
        lo = g.time().t0;
        hi = g.time().t1;
      } else {
        lo = g.axis(g.spatial_axis(k)).lo;
        hi = g.axis(g.spatial_axis(k)).hi;
      }
      p.axes.push_back(k);
      p.cuts.push_back(random_cuts(lo, hi, rng));
      p.cell_count *= p.cuts.back().size() + 1;
    }
    return p;
  }

  std::size_t cell(const Grid& g, std::size_t flat) const {
    std::size_t c = 0;
    const Point pt = g.point(flat);
    for (std::size_t a = 0; a < axes.size(); ++a) {
      const int k = axes[a];
      const double coord = g.is_time_axis(k) ? pt.t : pt.x[g.spatial_axis(k)];
      c = c * (cuts[a].size() + 1) + cell_of(cuts[a], coord);
    }
    return c;
  }
};

inline std::vector<bool> dependence_mask(const Grid& g, bool time, bool xprime, bool xpp) {
  std::vector<bool> m(g.rank(), false);
  for (int k = 0; k < g.rank(); ++k) {
    if (g.is_time_axis(k))
      m[k] = time;
    else
      m[k] = g.spatial_axis(k) < g.split() ? xprime : xpp;
  }
  return m;
}

// Fills the support of a field from per-cell matrices.
inline std::vector<double> fill_support(const Grid& g, const std::vector<bool>& depends, const CellPartition& part,
                                        const std::vector<Eigen::MatrixXd>& cells) {
  // Walk the support sub-lattice via a representative flat grid index.
  std::vector<std::size_t> sshape(g.rank());
  for (int k = 0; k < g.rank(); ++k) sshape[k] = depends[k] ? g.shape()[k] : 1;
  std::size_t ssize = 1;
  for (auto n : sshape) ssize *= n;
  const int d = g.dim();
  std::vector<double> e(ssize * d * d);
  std::vector<std::size_t> idx(g.rank());
  for (std::size_t s = 0; s < ssize; ++s) {
    std::size_t rem = s;
    for (int k = g.rank() - 1; k >= 0; --k) {
      idx[k] = rem % sshape[k];
      rem /= sshape[k];
    }
    const std::size_t flat = g.flat(idx);
    const Eigen::MatrixXd& a = cells[part.cell(g, flat)];
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) e[s * d * d + i * d + j] = a(i, j);
  }
  return e;
}

}  // namespace detail

// Piecewise-constant SPD field on a random partition of the dependence
// support. Each cell is Q diag(lambda) Q^T with lambda uniform in [nu, 1/nu]
// (nondivergence) or [nu, min(1/nu, 1/(nu sqrt d))] (divergence form, which
// keeps sum |a^{ij}|^2 <= nu^-2).
inline CoefficientField random_rough_coefficients(const Grid& grid, double nu, Pattern pattern, std::uint64_t seed,
                                                  OperatorForm form = OperatorForm::nondivergence) {
  require(nu > 0.0 && nu <= 1.0, "ellipticity constant must lie in (0, 1]");
  bool t = false, xpp = false;
  switch (pattern) {
    case Pattern::constant: break;
    case Pattern::t_only: t = true; break;
    case Pattern::xpp_only: xpp = true; break;
    case Pattern::t_and_xpp: t = xpp = true; break;
    case Pattern::xprime_hoelder:
      throw LabError("use hoelder_coefficients for the xprime-hoelder pattern");
  }
  require(!t || grid.has_time(), "time-dependent pattern needs a time axis");
  const int d = grid.dim();
  double hi = 1.0 / nu;
  if (form == OperatorForm::divergence) hi = std::min(hi, 1.0 / (nu * std::sqrt(static_cast<double>(d))));
  require(hi >= nu, "nu too large for the divergence-form Frobenius bound");
  detail::Rng rng(seed);
  const auto mask = detail::dependence_mask(grid, t, false, xpp);
  const auto part = detail::CellPartition::draw(grid, mask, rng);
  std::vector<Eigen::MatrixXd> cells;
  for (std::size_t c = 0; c < part.cell_count; ++c) cells.push_back(detail::random_spd(d, nu, hi, rng));
  CoefficientField a(grid, nu, pattern, mask, detail::fill_support(grid, mask, part, cells));
  a.seed = seed;
  return a;
}

// Block field: x'-block with eigenvalues in [nu, 1/nu], x''-block with
// eigenvalues in [xpp_floor, 1/nu] (the lower bound is dropped), varying in x''.
// The first cell always attains xpp_floor.
inline CoefficientField degenerate_coefficients(const Grid& grid, double nu, std::uint64_t seed,
                                                double xpp_floor = 0.0) {
  require(nu > 0.0 && nu <= 1.0, "ellipticity constant must lie in (0, 1]");
  require(xpp_floor >= 0.0 && xpp_floor <= 1.0 / nu, "degenerate floor must lie in [0, 1/nu]");
  const int d = grid.dim(), q = grid.split();
  detail::Rng rng(seed);
  const auto mask = detail::dependence_mask(grid, false, false, true);
  const auto part = detail::CellPartition::draw(grid, mask, rng);
  std::vector<Eigen::MatrixXd> cells;
  for (std::size_t c = 0; c < part.cell_count; ++c) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d, d);
    a.topLeftCorner(q, q) = detail::random_spd(q, nu, 1.0 / nu, rng);
    Eigen::MatrixXd qpp = detail::random_orthogonal(d - q, rng);
    Eigen::VectorXd lam(d - q);
    for (int i = 0; i < d - q; ++i) lam(i) = detail::uniform(rng, xpp_floor, 1.0 / nu);
    if (c == 0) lam(0) = xpp_floor;
    Eigen::MatrixXd b = qpp * lam.asDiagonal() * qpp.transpose();
    a.bottomRightCorner(d - q, d - q) = 0.5 * (b + b.transpose());
    cells.push_back(a);
  }
  CoefficientField a(grid, nu, Pattern::xpp_only, mask, detail::fill_support(grid, mask, part, cells));
  a.degenerate = true;
  a.seed = seed;
  return a;
}

// Normalized delta-cusp in x': rho(x') = |x' - c'|^delta, c' the centre of the x' box.
inline double xprime_cusp(const Grid& grid, const Point& p, double delta) {
  double r2 = 0.0;
  for (int i = 0; i < grid.split(); ++i) {
    const double c = 0.5 * (grid.axis(i).lo + grid.axis(i).hi);
    r2 += (p.x[i] - c) * (p.x[i] - c);
  }
  return std::pow(std::sqrt(r2), delta);
}

// a(x', x'') = a0(x'') + K rho(x') B(x''), [rho]_{x',delta} = 1, B symmetric with
// spectral norm 1 (so |B_ij| <= 1). a0 is drawn with eigenvalues in
// [nu + K sup rho, 1/nu - K sup rho], which keeps a within [nu, 1/nu] by Weyl.
inline CoefficientField hoelder_coefficients(const Grid& grid, double nu, double K, double delta,
                                             std::uint64_t seed) {
  require(nu > 0.0 && nu <= 1.0, "ellipticity constant must lie in (0, 1]");
  require(K >= 0.0, "Hoelder bound K must be nonnegative");
  require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
  const int d = grid.dim(), q = grid.split();
  double half_diag2 = 0.0;
  for (int i = 0; i < q; ++i) half_diag2 += 0.25 * std::pow(grid.axis(i).hi - grid.axis(i).lo, 2);
  const double rho_max = std::pow(std::sqrt(half_diag2), delta);
  const double lo = nu + K * rho_max, hi = 1.0 / nu - K * rho_max;
  require(lo <= hi, "Hoelder coefficient construction infeasible: K too large relative to nu");

  detail::Rng rng(seed);
  const auto xpp_mask = detail::dependence_mask(grid, false, false, true);
  const auto part = detail::CellPartition::draw(grid, xpp_mask, rng);
  std::vector<Eigen::MatrixXd> base, pert;
  for (std::size_t c = 0; c < part.cell_count; ++c) {
    base.push_back(detail::random_spd(d, lo, hi, rng));
    Eigen::MatrixXd qb = detail::random_orthogonal(d, rng);
    Eigen::VectorXd lam(d);
    for (int i = 0; i < d; ++i) lam(i) = detail::uniform(rng, -1.0, 1.0);
    lam /= lam.cwiseAbs().maxCoeff();
    Eigen::MatrixXd b = qb * lam.asDiagonal() * qb.transpose();
    pert.push_back(0.5 * (b + b.transpose()));
  }
  const auto mask = detail::dependence_mask(grid, false, true, true);
  std::vector<double> e;
  std::vector<std::size_t> sshape(grid.rank());
  for (int k = 0; k < grid.rank(); ++k) sshape[k] = mask[k] ? grid.shape()[k] : 1;
  std::size_t ssize = 1;
  for (auto n : sshape) ssize *= n;
  e.resize(ssize * d * d);
  std::vector<std::size_t> idx(grid.rank());
  for (std::size_t s = 0; s < ssize; ++s) {
    std::size_t rem = s;
    for (int k = grid.rank() - 1; k >= 0; --k) {
      idx[k] = rem % sshape[k];
      rem /= sshape[k];
    }
    const std::size_t flat = grid.flat(idx);
    const std::size_t c = part.cell(grid, flat);
    const double rho = xprime_cusp(grid, grid.point(flat), delta);
    Eigen::MatrixXd a = base[c] + K * rho * pert[c];
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) e[s * d * d + i * d + j] = a(i, j);
  }
  CoefficientField a(grid, nu, Pattern::xprime_hoelder, mask, std::move(e));
  a.hoelder_K = K;
  a.hoelder_delta = delta;
  a.seed = seed;
  return a;
}

// ---------------------------------------------------------------------------
// Synthetic data

enum class RhsKind { rough_xpp, smooth, time_dependent };

inline const char* to_string(RhsKind k) {
  switch (k) {
    case RhsKind::rough_xpp: return "rough-xpp";
    case RhsKind::smooth: return "smooth";
    case RhsKind::time_dependent: return "time-dependent";
  }
  return "?";
}

// C-infinity transition: 1 on r <= r1, 0 on r >= r2. Its maximal slope is 2/(r2 - r1).
inline double smooth_cutoff(double r, double r1, double r2) {
  if (r <= r1) return 1.0;
  if (r >= r2) return 0.0;
  const double s = (r2 - r) / (r2 - r1);
  const double a = std::exp(-1.0 / s), b = std::exp(-1.0 / (1.0 - s));
  return a / (a + b);
}

// One term c * |x' - p'|^e * cutoff * psi(x'') * theta(t).
struct CuspTerm {
  double coeff = 1.0;
  std::array<double, kMaxDim> center{};  // x' components used
  // psi: piecewise constant over x'' (tensor cells) or a cosine wave.
  bool psi_constant = false;
  bool psi_smooth = false;
  std::vector<std::vector<double>> psi_cuts;  // per x'' axis
  std::vector<double> psi_values;             // per cell, row-major over x'' axes
  std::array<double, kMaxDim> omega{};
  double phase = 0.0;
  // theta(t) = 1 + |(t - s)/T|^{delta/2} when time_dependent
  bool time_dependent = false;
  double time_center = 0.0;
  double time_scale = 1.0;
};

struct CuspProfile {
  double exponent = 0.5;   // e in |s|^e
  double r1 = 0.25;        // plateau radius of the cutoff
  double r2 = 0.75;        // support radius of the cutoff
  double time_exponent = 0.25;
};

struct SyntheticData {
  GridFunction f;
  double seminorm_bound = 0.0;  // analytic upper bound for [f]_{x',delta} (exponent == delta only)
  std::vector<CuspTerm> terms;
  CuspProfile profile;
};

inline double psi_value(const CuspTerm& term, const Grid& g, const Point& p) {
  if (term.psi_constant) return 1.0;
  if (term.psi_smooth) {
    double arg = term.phase;
    for (int i = g.split(); i < g.dim(); ++i) arg += term.omega[i] * p.x[i];
    return std::cos(arg);
  }
  std::size_t c = 0;
  for (int i = g.split(); i < g.dim(); ++i) {
    const auto& cuts = term.psi_cuts[i - g.split()];
    c = c * (cuts.size() + 1) + detail::cell_of(cuts, p.x[i]);
  }
  return term.psi_values[c];
}

inline double cusp_term_value(const CuspTerm& term, const CuspProfile& prof, const Grid& g, const Point& p) {
  double r2 = 0.0;
  for (int i = 0; i < g.split(); ++i) r2 += (p.x[i] - term.center[i]) * (p.x[i] - term.center[i]);
  const double r = std::sqrt(r2);
  double v = term.coeff * std::pow(r, prof.exponent) * smooth_cutoff(r, prof.r1, prof.r2);
  if (v == 0.0) return 0.0;
  v *= psi_value(term, g, p);
  if (term.time_dependent)
    v *= 1.0 + std::pow(std::abs(p.t - term.time_center) / term.time_scale, prof.time_exponent);
  return v;
}

inline GridFunction evaluate_cusp_terms(const Grid& g, const std::vector<CuspTerm>& terms, const CuspProfile& prof) {
  return GridFunction::sample(g, [&](const Point& p) {
    double s = 0.0;
    for (const auto& t : terms) s += cusp_term_value(t, prof, g, p);
    return s;
  });
}

// Upper bound for [|x'-p'|^delta * cutoff]_{x',delta}: 1 + r2^delta (2/(r2-r1))^delta.
inline double cusp_seminorm_bound(const CuspProfile& prof) {
  return 1.0 + std::pow(prof.r2, prof.exponent) * std::pow(2.0 / (prof.r2 - prof.r1), prof.exponent);
}

// Draws 2 cusp terms with centres on the 1/16-lattice of the central half of
// the x' box (lattice points of every grid with (n-1) divisible by 16), and
// x'' profiles per `kind`. Draws depend only on (seed, kind, extents), never
// on the resolution, so refinements sample one continuum function.
inline std::vector<CuspTerm> draw_cusp_terms(const Grid& grid, std::uint64_t seed, RhsKind kind, int count = 2) {
  require(kind != RhsKind::time_dependent || grid.has_time(), "time-dependent data needs a time axis");
  detail::Rng rng(seed);
  std::vector<CuspTerm> terms;
  for (int k = 0; k < count; ++k) {
    CuspTerm t;
    t.coeff = detail::uniform(rng, 0.5, 1.5) * (std::uniform_int_distribution<int>(0, 1)(rng) ? 1.0 : -1.0);
    for (int i = 0; i < grid.split(); ++i) {
      const auto& a = grid.axis(i);
      const int j = std::uniform_int_distribution<int>(5, 11)(rng);
      t.center[i] = a.lo + j * (a.hi - a.lo) / 16.0;
    }
    if (kind == RhsKind::smooth) {
      t.psi_smooth = true;
      for (int i = grid.split(); i < grid.dim(); ++i) t.omega[i] = detail::uniform(rng, 0.5, 2.0);
      t.phase = detail::uniform(rng, 0.0, 2.0 * M_PI);
    } else {
      std::size_t cells = 1;
      for (int i = grid.split(); i < grid.dim(); ++i) {
        t.psi_cuts.push_back(detail::random_cuts(grid.axis(i).lo, grid.axis(i).hi, rng));
        cells *= t.psi_cuts.back().size() + 1;
      }
      for (std::size_t c = 0; c < cells; ++c) t.psi_values.push_back(detail::uniform(rng, -1.0, 1.0));
    }
    if (kind == RhsKind::time_dependent) {
      t.time_dependent = true;
      const auto& ta = grid.time();
      const double span = ta.t1 - ta.t0;
      t.time_center = ta.t0 + span * (std::uniform_int_distribution<int>(0, 1)(rng) ? 0.75 : 0.5);
      t.time_scale = span;
    }
    terms.push_back(t);
  }
  return terms;
}

inline CuspProfile default_profile(const Grid& grid, double exponent, double time_exponent = 0.0) {
  CuspProfile prof;
  double half = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid.split(); ++i) half = std::min(half, 0.5 * (grid.axis(i).hi - grid.axis(i).lo));
  prof.exponent = exponent;
  prof.r1 = 0.25 * half;
  prof.r2 = 0.75 * half;
  prof.time_exponent = time_exponent;
  return prof;
}

// f = sum_k c_k phi_delta(x' - p_k') psi_k(x'') [theta_k(t)].
inline SyntheticData synthetic_rhs(const Grid& grid, double delta, std::uint64_t seed, RhsKind kind) {
  require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
  SyntheticData out{GridFunction(grid), 0.0, draw_cusp_terms(grid, seed, kind), default_profile(grid, delta, delta / 2)};
  out.f = evaluate_cusp_terms(grid, out.terms, out.profile);
  const double per = cusp_seminorm_bound(out.profile);
  for (const auto& t : out.terms) {
    double theta_max = 1.0;
    if (t.time_dependent) {
      const auto& ta = grid.time();
      const double far = std::max(std::abs(ta.t0 - t.time_center), std::abs(ta.t1 - t.time_center));
      theta_max = 1.0 + std::pow(far / t.time_scale, out.profile.time_exponent);
    }
    out.seminorm_bound += std::abs(t.coeff) * theta_max * per;
  }
  return out;
}

// Same family with a general exponent (k + delta); used by the Campanato checks.
inline SyntheticData synthetic_cusp_family(const Grid& grid, double exponent, std::uint64_t seed, RhsKind kind) {
  require(exponent > 0.0, "exponent must be positive");
  SyntheticData out{GridFunction(grid), 0.0, draw_cusp_terms(grid, seed, kind), default_profile(grid, exponent)};
  out.f = evaluate_cusp_terms(grid, out.terms, out.profile);
  out.seminorm_bound = std::numeric_limits<double>::quiet_NaN();
  return out;
}

inline VectorField synthetic_vector_rhs(const Grid& grid, double delta, std::uint64_t seed, RhsKind kind) {
  std::vector<GridFunction> comps;
  for (int i = 0; i < grid.dim(); ++i) comps.push_back(synthetic_rhs(grid, delta, seed * 131 + 17 * (i + 1), kind).f);
  return VectorField(std::move(comps));
}

}  // namespace schauder
