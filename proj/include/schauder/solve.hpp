#pragma once

// Finite-difference solvers for the four operator classes on a box with zero
// Dirichlet data (or on a torus), backward Euler in time.

#include <chrono>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "schauder/error.hpp"
#include "schauder/fields.hpp"
#include "schauder/lattice.hpp"

namespace schauder {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, long>;

enum class Backend {
  automatic,  // sparse LU up to 200k unknowns, otherwise BiCGSTAB + ILUT
  sparse_lu,
  bicgstab
};

struct SolveOptions {
  double tol = 1e-10;
  int max_iterations = 5000;
  Backend backend = Backend::automatic;
};

struct SolveReport {
  double residual = 0.0;  // relative residual of the final iterate (max over steps)
  long iterations = 0;    // refinement sweeps (LU) or Krylov iterations, summed over steps
  double wall_time = 0.0;
  long factorizations = 0;
  long steps = 0;
  std::string backend;
};

struct Solution {
  GridFunction u;
  SolveReport report;
};

// Sparse system over the unknown lattice nodes.
struct LinearSystem {
  SparseMatrix matrix;
  Eigen::VectorXd rhs;
  double tol = 1e-10;
  int max_iterations = 5000;
};

namespace detail {

// Unknown numbering: interior nodes of a Dirichlet box, or every node of a
// fully periodic grid.
struct Numbering {
  const Grid* grid;
  bool periodic = false;
  std::vector<long> index;  // node -> unknown or -1
  std::vector<std::size_t> node;  // unknown -> node
  std::size_t count() const { return node.size(); }

  explicit Numbering(const Grid& g) : grid(&g) {
    require(!g.has_time(), "spatial numbering expects a spatial grid");
    int periodic_axes = 0;
    for (int i = 0; i < g.dim(); ++i) periodic_axes += g.axis(i).boundary == Boundary::periodic;
    require(periodic_axes == 0 || periodic_axes == g.dim(), "mixed periodic and Dirichlet axes are not supported");
    periodic = periodic_axes == g.dim();
    index.assign(g.size(), -1);
    for (std::size_t p = 0; p < g.size(); ++p) {
      bool inner = true;
      if (!periodic)
        for (int k = 0; k < g.rank(); ++k) {
          const std::size_t i = g.index_along(p, k);
          if (i == 0 || i + 1 == g.shape()[k]) inner = false;
        }
      if (inner) {
        index[p] = static_cast<long>(node.size());
        node.push_back(p);
      }
    }
  }

  // Node reached from p by a lattice offset, wrapping on the torus; -1 outside.
  long neighbor(std::size_t p, const int* off) const {
    const Grid& g = *grid;
    long q = 0;
    for (int k = 0; k < g.rank(); ++k) {
      long i = static_cast<long>(g.index_along(p, k)) + off[k];
      const long n = static_cast<long>(g.shape()[k]);
      if (periodic)
        i = ((i % n) + n) % n;
      else if (i < 0 || i >= n)
        return -1;
      q += i * static_cast<long>(g.strides()[k]);
    }
    return q;
  }
};

// Collects A entries; boundary neighbors carry zero data and are dropped.
struct Assembler {
  const Numbering& num;
  std::vector<Eigen::Triplet<double, long>> trip;
  explicit Assembler(const Numbering& n) : num(n) {}

  void add(long row, std::size_t p, const int* off, double w) {
    const long q = num.neighbor(p, off);
    if (q < 0) return;
    const long col = num.index[static_cast<std::size_t>(q)];
    if (col >= 0) trip.emplace_back(row, col, w);
  }
};

inline std::array<int, kMaxDim> unit(int i, int s = 1) {
  std::array<int, kMaxDim> e{};
  e[i] = s;
  return e;
}

inline std::array<int, kMaxDim> combo(int i, int si, int j, int sj) {
  std::array<int, kMaxDim> e{};
  e[i] += si;
  e[j] += sj;
  return e;
}

// Rows of a^{ij} D_ij (central differences, 4-point cross stencil).
inline void assemble_nondiv(Assembler& as, const CoefficientField& a) {
  const Grid& g = *as.num.grid;
  const int d = g.dim();
  for (std::size_t r = 0; r < as.num.count(); ++r) {
    const std::size_t p = as.num.node[r];
    const auto row = static_cast<long>(r);
    for (int i = 0; i < d; ++i) {
      const double h = g.spacing(i);
      const double c = a.entry(p, i, i) / (h * h);
      as.add(row, p, unit(i, 1).data(), c);
      as.add(row, p, unit(i, -1).data(), c);
      as.add(row, p, unit(0, 0).data(), -2.0 * c);
      for (int j = 0; j < d; ++j) {
        if (j == i) continue;
        const double cij = a.entry(p, i, j) / (4.0 * h * g.spacing(j));
        as.add(row, p, combo(i, 1, j, 1).data(), cij);
        as.add(row, p, combo(i, 1, j, -1).data(), -cij);
        as.add(row, p, combo(i, -1, j, 1).data(), -cij);
        as.add(row, p, combo(i, -1, j, -1).data(), cij);
      }
    }
  }
}

// Rows of D_i(a^{ij} D_j u) in flux form. Face coefficients are arithmetic
// means of the two adjacent nodes. The normal gradient on a face is the
// one-step difference; a tangential gradient is the mean of the central
// differences at the two adjacent nodes.
inline void assemble_div(Assembler& as, const CoefficientField& a) {
  const Grid& g = *as.num.grid;
  const int d = g.dim();
  for (std::size_t r = 0; r < as.num.count(); ++r) {
    const std::size_t p = as.num.node[r];
    const auto row = static_cast<long>(r);
    for (int i = 0; i < d; ++i) {
      const double hi = g.spacing(i);
      for (int side : {1, -1}) {
        // Face between p and p + side e_i; flux F_i enters with sign `side`.
        const long q = as.num.neighbor(p, unit(i, side).data());
        require(q >= 0, "flux stencil left the grid");
        const auto qn = static_cast<std::size_t>(q);
        for (int j = 0; j < d; ++j) {
          const double aface = 0.5 * (a.entry(p, i, j) + a.entry(qn, i, j));
          const double w = side * aface / hi;
          if (j == i) {
            // F = aface (u_q - u_p)/h * side orientation
            as.add(row, p, unit(i, side).data(), aface / (hi * hi));
            as.add(row, p, unit(0, 0).data(), -aface / (hi * hi));
          } else {
            const double hj = g.spacing(j);
            const double c = w / (4.0 * hj);
            as.add(row, p, unit(j, 1).data(), c);
            as.add(row, p, unit(j, -1).data(), -c);
            as.add(row, p, combo(i, side, j, 1).data(), c);
            as.add(row, p, combo(i, side, j, -1).data(), -c);
          }
        }
      }
    }
  }
}

// Discrete divergence of face-interpolated f at the unknown nodes.
inline Eigen::VectorXd divergence_rhs(const Numbering& num, const VectorField& f) {
  const Grid& g = *num.grid;
  require(static_cast<int>(f.size()) == g.dim(), "vector field needs d components");
  Eigen::VectorXd b(static_cast<Eigen::Index>(num.count()));
  for (std::size_t r = 0; r < num.count(); ++r) {
    const std::size_t p = num.node[r];
    double s = 0.0;
    for (int i = 0; i < g.dim(); ++i) {
      const long qp = num.neighbor(p, unit(i, 1).data());
      const long qm = num.neighbor(p, unit(i, -1).data());
      require(qp >= 0 && qm >= 0, "divergence stencil left the grid");
      const double fp = 0.5 * (f[i][p] + f[i][static_cast<std::size_t>(qp)]);
      const double fm = 0.5 * (f[i][p] + f[i][static_cast<std::size_t>(qm)]);
      s += (fp - fm) / g.spacing(i);
    }
    b(static_cast<Eigen::Index>(r)) = s;
  }
  return b;
}

inline Eigen::VectorXd gather(const Numbering& num, const GridFunction& f) {
  Eigen::VectorXd b(static_cast<Eigen::Index>(num.count()));
  for (std::size_t r = 0; r < num.count(); ++r) b(static_cast<Eigen::Index>(r)) = f[num.node[r]];
  return b;
}

inline GridFunction scatter(const Numbering& num, const Eigen::VectorXd& x) {
  GridFunction u(*num.grid);
  for (std::size_t r = 0; r < num.count(); ++r) u[num.node[r]] = x(static_cast<Eigen::Index>(r));
  return u;
}

// Factorized (or preconditioned) operator with residual-controlled solves.
class Factorization {
 public:
  Factorization(const SparseMatrix& A, const SolveOptions& opt, int dim = 2) : A_(A), opt_(opt) {
    backend_ = opt.backend;
    // LU fill-in grows quickly with the stencil width in 3-d.
    const long lu_limit = dim >= 3 ? 5000 : 200000;
    if (backend_ == Backend::automatic) backend_ = A.rows() <= lu_limit ? Backend::sparse_lu : Backend::bicgstab;
    if (backend_ == Backend::sparse_lu) {
      lu_ = std::make_unique<Eigen::SparseLU<SparseMatrix>>();
      lu_->analyzePattern(A_);
      lu_->factorize(A_);
      require(lu_->info() == Eigen::Success, "sparse LU factorization failed: " + lu_->lastErrorMessage());
    } else {
      build_iterative(1e-3, 2);
    }
  }

  std::string name() const { return backend_ == Backend::sparse_lu ? "sparse-lu" : "bicgstab-ilut"; }

  // Solves A x = b; returns relative residual, accumulates iterations.
  Eigen::VectorXd solve(const Eigen::VectorXd& b, double& residual, long& iterations) const {
    const double bn = b.norm();
    if (bn == 0.0) {
      residual = 0.0;
      return Eigen::VectorXd::Zero(b.size());
    }
    Eigen::VectorXd x;
    if (backend_ == Backend::sparse_lu) {
      x = lu_->solve(b);
      Eigen::VectorXd r = b - A_ * x;
      residual = r.norm() / bn;
      // Iterative refinement until the residual contract holds.
      int sweeps = 0;
      while (residual > opt_.tol && sweeps < 10) {
        x += lu_->solve(r);
        r = b - A_ * x;
        residual = r.norm() / bn;
        ++sweeps;
      }
      iterations += 1 + sweeps;
    } else {
      x = it_->solve(b);
      iterations += it_->iterations();
      residual = (b - A_ * x).norm() / bn;
      if (!(residual <= opt_.tol) && !strong_) {
        // A cheap preconditioner stalled: rebuild a much fuller one and retry.
        build_iterative(1e-8, 10);
        x = it_->solveWithGuess(b, x);
        iterations += it_->iterations();
        residual = (b - A_ * x).norm() / bn;
      }
    }
    if (!(residual <= opt_.tol)) throw LabError("linear solve did not reach the residual tolerance");
    return x;
  }

 private:
  void build_iterative(double droptol, int fill) const {
    it_ = std::make_unique<Eigen::BiCGSTAB<SparseMatrix, Eigen::IncompleteLUT<double, long>>>();
    it_->preconditioner().setDroptol(droptol);
    it_->preconditioner().setFillfactor(fill);
    it_->setTolerance(opt_.tol);
    it_->setMaxIterations(opt_.max_iterations);
    it_->compute(A_);
    require(it_->info() == Eigen::Success, "preconditioner setup failed");
    strong_ = droptol < 1e-6;
  }

  SparseMatrix A_;
  SolveOptions opt_;
  Backend backend_;
  std::unique_ptr<Eigen::SparseLU<SparseMatrix>> lu_;
  mutable std::unique_ptr<Eigen::BiCGSTAB<SparseMatrix, Eigen::IncompleteLUT<double, long>>> it_;
  mutable bool strong_ = false;
};

// On the torus the operator annihilates constants: border the system with the
// mean constraint [A 1; 1^T 0], which stays invariant under translations.
inline SparseMatrix bordered(const SparseMatrix& A) {
  const long n = A.rows();
  std::vector<Eigen::Triplet<double, long>> t;
  t.reserve(A.nonZeros() + 2 * n);
  for (long k = 0; k < A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(A, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  for (long i = 0; i < n; ++i) {
    t.emplace_back(i, n, 1.0);
    t.emplace_back(n, i, 1.0);
  }
  SparseMatrix B(n + 1, n + 1);
  B.setFromTriplets(t.begin(), t.end());
  return B;
}

enum class Form { nondivergence, divergence };

inline SparseMatrix spatial_operator(const Numbering& num, const CoefficientField& a, Form form) {
  require(a.grid() == *num.grid, "coefficient grid must match the solution grid");
  Assembler as(num);
  if (form == Form::nondivergence)
    assemble_nondiv(as, a);
  else
    assemble_div(as, a);
  const auto n = static_cast<long>(num.count());
  SparseMatrix A(n, n);
  A.setFromTriplets(as.trip.begin(), as.trip.end());
  return A;
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline Solution solve_elliptic(const CoefficientField& a, const Eigen::VectorXd& b_in, const Numbering& num, Form form,
                               const SolveOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  SparseMatrix A = spatial_operator(num, a, form);
  Eigen::VectorXd b = b_in;
  if (num.periodic) {
    A = bordered(A);
    b.conservativeResize(b.size() + 1);
    b(b.size() - 1) = 0.0;
  }
  SolveReport rep;
  if (b.norm() == 0.0) {
    rep.backend = "none";
    rep.wall_time = seconds_since(t0);
    return {GridFunction(*num.grid, 0.0), rep};
  }
  Factorization fac(A, opt, a.dim());
  rep.backend = fac.name();
  rep.factorizations = 1;
  rep.steps = 1;
  Eigen::VectorXd x = fac.solve(b, rep.residual, rep.iterations);
  if (num.periodic) x.conservativeResize(x.size() - 1);
  rep.wall_time = seconds_since(t0);
  return {scatter(num, x), rep};
}

inline void check_elliptic(const CoefficientField& a, Form form) {
  const auto c = a.check_ellipticity(form == Form::nondivergence ? OperatorForm::nondivergence : OperatorForm::divergence,
                                     1e-9);
  require(c.ok, "coefficient field violates its ellipticity bounds");
  if (form == Form::nondivergence) require(a.symmetric(1e-14), "nondivergence coefficients must be symmetric");
}

}  // namespace detail

// a^{ij} D_ij u = f with u = 0 on the box boundary (or on a torus).
inline Solution solve_elliptic_nondiv(const CoefficientField& a, const GridFunction& f, const SolveOptions& opt = {}) {
  require(a.grid() == f.grid(), "coefficient and data grids differ");
  detail::check_elliptic(a, detail::Form::nondivergence);
  const detail::Numbering num(f.grid());
  return detail::solve_elliptic(a, detail::gather(num, f), num, detail::Form::nondivergence, opt);
}

// D_i(a^{ij} D_j u) = div f with u = 0 on the box boundary (or on a torus).
inline Solution solve_elliptic_div(const CoefficientField& a, const VectorField& f, const SolveOptions& opt = {}) {
  require(a.grid() == f.grid(), "coefficient and data grids differ");
  detail::check_elliptic(a, detail::Form::divergence);
  const detail::Numbering num(f.grid());
  return detail::solve_elliptic(a, detail::divergence_rhs(num, f), num, detail::Form::divergence, opt);
}

namespace detail {

// Backward Euler: (I/tau - A_n) u^n = rhs^n + u^{n-1}/tau with A_n frozen at t_n.
template <typename Rhs>
Solution solve_parabolic(const CoefficientField& a, const Grid& grid, const GridFunction& u0, Form form, Rhs&& rhs_at,
                         const SolveOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  require(grid.has_time(), "parabolic solve needs a time axis");
  require(a.grid() == grid, "coefficient grid must match the space-time grid");
  const Grid spatial(grid.dim(), grid.split(), grid.axes());
  require(u0.grid() == spatial, "initial data must live on the spatial grid");
  const Numbering num(spatial);
  require(!num.periodic, "parabolic solves use the Dirichlet box");
  const double tau = grid.time().step();
  const std::size_t nt = grid.time().points;
  const std::size_t ns = spatial.size();

  std::vector<double> values(grid.size(), 0.0);
  std::copy(u0.values().begin(), u0.values().end(), values.begin());

  SolveReport rep;
  std::unique_ptr<Factorization> fac;
  std::size_t factored_level = 0;
  Eigen::VectorXd prev = gather(num, u0);
  const auto n = static_cast<long>(num.count());
  SparseMatrix I(n, n);
  I.setIdentity();
  for (std::size_t level = 1; level < nt; ++level) {
    if (!fac || !a.same_time_slice(level, factored_level)) {
      const CoefficientField an = a.at_time(level);
      const auto chk = an.check_ellipticity(
          form == Form::nondivergence ? OperatorForm::nondivergence : OperatorForm::divergence, 1e-9);
      require(chk.ok, "coefficient field violates its ellipticity bounds");
      SparseMatrix M = (1.0 / tau) * I - spatial_operator(num, an, form);
      M.makeCompressed();
      fac = std::make_unique<Factorization>(M, opt, grid.dim());
      factored_level = level;
      ++rep.factorizations;
      rep.backend = fac->name();
    }
    Eigen::VectorXd b = rhs_at(num, level) + prev / tau;
    double res = 0.0;
    prev = fac->solve(b, res, rep.iterations);
    rep.residual = std::max(rep.residual, res);
    ++rep.steps;
    for (std::size_t r = 0; r < num.count(); ++r) values[level * ns + num.node[r]] = prev(static_cast<Eigen::Index>(r));
  }
  rep.wall_time = seconds_since(t0);
  return {GridFunction(grid, std::move(values)), rep};
}

inline GridFunction time_slice(const GridFunction& f, std::size_t level) {
  const Grid& g = f.grid();
  const Grid spatial(g.dim(), g.split(), g.axes());
  const std::size_t ns = spatial.size();
  std::vector<double> v(f.values().begin() + level * ns, f.values().begin() + (level + 1) * ns);
  return GridFunction(spatial, std::move(v));
}

}  // namespace detail

// Spatial grid underlying a space-time grid.
inline Grid spatial_grid(const Grid& g) { return Grid(g.dim(), g.split(), g.axes()); }

inline GridFunction time_slice(const GridFunction& f, std::size_t level) { return detail::time_slice(f, level); }

// u_t - a^{ij}(t, x) D_ij u = f, zero lateral data, u(t0) = u0.
inline Solution solve_parabolic_nondiv(const CoefficientField& a, const GridFunction& f, const GridFunction& u0,
                                       const SolveOptions& opt = {}) {
  require(a.grid() == f.grid(), "coefficient and data grids differ");
  require(a.symmetric(1e-14), "nondivergence coefficients must be symmetric");
  return detail::solve_parabolic(
      a, f.grid(), u0, detail::Form::nondivergence,
      [&](const detail::Numbering& num, std::size_t level) { return detail::gather(num, detail::time_slice(f, level)); },
      opt);
}

// u_t - D_i(a^{ij} D_j u) = div f, zero lateral data, u(t0) = u0.
inline Solution solve_parabolic_div(const CoefficientField& a, const VectorField& f, const GridFunction& u0,
                                    const SolveOptions& opt = {}) {
  require(a.grid() == f.grid(), "coefficient and data grids differ");
  return detail::solve_parabolic(
      a, f.grid(), u0, detail::Form::divergence,
      [&](const detail::Numbering& num, std::size_t level) {
        std::vector<GridFunction> comps;
        for (const auto& c : f.components) comps.push_back(detail::time_slice(c, level));
        return detail::divergence_rhs(num, VectorField(std::move(comps)));
      },
      opt);
}

// Residual-based view of a system, for callers that assemble themselves.
inline LinearSystem assemble_nondiv_system(const CoefficientField& a, const GridFunction& f, double tol = 1e-10) {
  const detail::Numbering num(f.grid());
  return {detail::spatial_operator(num, a, detail::Form::nondivergence), detail::gather(num, f), tol};
}

// Applies the discrete nondivergence operator to u (zero outside unknowns).
inline GridFunction apply_nondiv(const CoefficientField& a, const GridFunction& u) {
  const detail::Numbering num(u.grid());
  const SparseMatrix A = detail::spatial_operator(num, a, detail::Form::nondivergence);
  return detail::scatter(num, A * detail::gather(num, u));
}

inline GridFunction apply_div(const CoefficientField& a, const GridFunction& u) {
  const detail::Numbering num(u.grid());
  const SparseMatrix A = detail::spatial_operator(num, a, detail::Form::divergence);
  return detail::scatter(num, A * detail::gather(num, u));
}

}  // namespace schauder
