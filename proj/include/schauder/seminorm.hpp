#pragma once

// Hoelder-type seminorms restricted to fibers of the lattice.
//
// Every estimator here is an instance of one engine: fix the non-free array
// axes (a fiber), maximize |u(p) - u(p')| / dist(p, p')^e over pairs inside the
// fiber, then take the max over fibers. dist adds the Euclidean length of the
// spatial offset and sqrt|dt| for a free time axis (the parabolic metric).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "schauder/error.hpp"
#include "schauder/lattice.hpp"

namespace schauder {

struct PairBudget {
  enum class Mode { automatic, exact, sampled };
  Mode mode = Mode::automatic;
  std::size_t n_pairs = 20000;   // random pairs per fiber in sampled mode
  std::uint64_t seed = 0x5eed;
  std::size_t exact_limit = 1000000;  // automatic: exact up to this many pairs per fiber
  int local_radius = 2;               // sampled mode always scans offsets with max |o_k| <= this

  static PairBudget exact() { return {Mode::exact}; }
  static PairBudget sampled(std::size_t n, std::uint64_t seed) { return {Mode::sampled, n, seed}; }
};

// Argmax bookkeeping: flat indices of the maximizing pair.
struct PairMax {
  double value = 0.0;
  std::size_t a = 0;
  std::size_t b = 0;
  std::size_t pairs_scanned = 0;
  bool exact = true;
};

namespace detail {

// Denominator dist^e for a lattice offset. Shared with the brute-force oracle
// so both produce identical floating-point quotients.
inline double pair_denominator(const Grid& g, std::span<const int> free_axes, std::span<const long> offset,
                               double exponent) {
  double s2 = 0.0, tpart = 0.0;
  for (std::size_t k = 0; k < free_axes.size(); ++k) {
    const double step = static_cast<double>(offset[k]) * g.array_spacing(free_axes[k]);
    if (g.is_time_axis(free_axes[k]))
      tpart = std::sqrt(std::abs(step));
    else
      s2 += step * step;
  }
  return std::pow(std::sqrt(s2) + tpart, exponent);
}

inline void consider(PairMax& best, double diff, double denom, std::size_t a, std::size_t b) {
  const double q = std::abs(diff) / denom;
  if (q > best.value) {
    best.value = q;
    best.a = a;
    best.b = b;
  }
}

inline std::size_t fiber_pairs(const FiberSet& fs) {
  const std::size_t n = fs.local_size();
  return n * (n - 1) / 2;
}

// All pairs (p, p + o) of one fiber for a fixed offset o, start points in
// row-major order. The innermost axis runs as a plain strided loop.
inline void scan_offset(std::span<const double> vals, std::size_t base, const std::vector<std::size_t>& shape,
                        const std::vector<std::size_t>& gstride, const std::vector<long>& o, double denom,
                        PairMax& best) {
  const int m = static_cast<int>(shape.size());
  std::array<std::size_t, kMaxDim + 1> first{}, count{}, idx{};
  long shift = 0;
  for (int k = 0; k < m; ++k) {
    const long c = static_cast<long>(shape[k]) - std::abs(o[k]);
    if (c <= 0) return;
    first[k] = o[k] < 0 ? static_cast<std::size_t>(-o[k]) : 0;
    count[k] = static_cast<std::size_t>(c);
    shift += o[k] * static_cast<long>(gstride[k]);
  }
  const std::size_t inner = count[m - 1], step = gstride[m - 1];
  while (true) {
    std::size_t p = base;
    for (int k = 0; k < m; ++k) p += (first[k] + idx[k]) * gstride[k];
    for (std::size_t i = 0; i < inner; ++i, p += step) {
      const std::size_t pp = static_cast<std::size_t>(static_cast<long>(p) + shift);
      consider(best, vals[pp] - vals[p], denom, p, pp);
    }
    best.pairs_scanned += inner;
    int k = m - 2;
    for (; k >= 0; --k) {
      if (++idx[k] < count[k]) break;
      idx[k] = 0;
    }
    if (k < 0) break;
  }
}

// Offsets o != 0 with |o_k| <= reach_k and the first nonzero component
// positive, in lexicographic order, with their denominators. Every fiber of
// a FiberSet shares the table.
struct OffsetTable {
  std::vector<std::vector<long>> offsets;
  std::vector<double> denoms;
};

inline OffsetTable half_offsets(const Grid& g, const std::vector<int>& free, const std::vector<long>& reach,
                                double exponent) {
  const int m = static_cast<int>(free.size());
  OffsetTable t;
  std::vector<long> o(m);
  for (int k = 0; k < m; ++k) o[k] = -reach[k];
  while (true) {
    int lead = 0;
    while (lead < m && o[lead] == 0) ++lead;
    if (lead < m && o[lead] > 0) {
      t.offsets.push_back(o);
      t.denoms.push_back(pair_denominator(g, free, o, exponent));
    }
    int k = m - 1;
    for (; k >= 0; --k) {
      if (++o[k] <= reach[k]) break;
      o[k] = -reach[k];
    }
    if (k < 0) break;
  }
  return t;
}

inline std::vector<std::size_t> fiber_strides(const Grid& g, const FiberSet& fs) {
  std::vector<std::size_t> s;
  for (int a : fs.free_axes()) s.push_back(g.strides()[a]);
  return s;
}

// Exact scan over all pairs of one fiber, offsets in the outer loop.
inline void scan_exact(const GridFunction& u, const FiberSet& fs, std::size_t fiber, const OffsetTable& table,
                       PairMax& best) {
  const auto gstride = fiber_strides(u.grid(), fs);
  for (std::size_t i = 0; i < table.offsets.size(); ++i)
    scan_offset(u.values(), fs.base(fiber), fs.local_shape(), gstride, table.offsets[i], table.denoms[i], best);
}

// Local offsets (max-norm radius r) plus seeded random pairs.
inline void scan_sampled(const GridFunction& u, const FiberSet& fs, std::size_t fiber, double exponent,
                         const PairBudget& budget, const OffsetTable& local, PairMax& best) {
  scan_exact(u, fs, fiber, local, best);
  const Grid& g = u.grid();
  const auto& shape = fs.local_shape();
  const auto& free = fs.free_axes();
  const int m = static_cast<int>(shape.size());
  const auto vals = u.values();
  const std::size_t n = fs.local_size();

  std::mt19937_64 rng(budget.seed ^ (0x9E3779B97F4A7C15ULL * (fiber + 1)));
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<long> off(m);
  for (std::size_t s = 0; s < budget.n_pairs; ++s) {
    std::size_t a = pick(rng), b = pick(rng);
    if (a == b) continue;
    std::size_t ra = a, rb = b;
    for (int k = m - 1; k >= 0; --k) {
      off[k] = static_cast<long>(rb % shape[k]) - static_cast<long>(ra % shape[k]);
      ra /= shape[k];
      rb /= shape[k];
    }
    const std::size_t p = fs.flat(fiber, a), pp = fs.flat(fiber, b);
    consider(best, vals[pp] - vals[p], pair_denominator(g, free, off, exponent), p, pp);
    ++best.pairs_scanned;
  }
}

}  // namespace detail

// The general engine: max over fibers of the pair quotient with the given
// free array axes and exponent.
inline PairMax fiber_seminorm(const GridFunction& u, const std::vector<int>& free_axes, double exponent,
                              const PairBudget& budget = {}) {
  require(exponent > 0.0, "seminorm exponent must be positive");
  const FiberSet fs(u.grid(), free_axes);
  require(fs.local_size() >= 2, "fewer than 2 points along the free directions");
  const std::size_t pairs = detail::fiber_pairs(fs);
  bool exact = budget.mode == PairBudget::Mode::exact;
  if (budget.mode == PairBudget::Mode::automatic) exact = pairs <= budget.exact_limit;
  if (budget.mode == PairBudget::Mode::sampled && budget.n_pairs >= pairs) exact = true;
  PairMax best;
  best.exact = exact;
  std::vector<long> reach;
  for (auto n : fs.local_shape())
    reach.push_back(exact ? static_cast<long>(n) - 1 : std::min<long>(budget.local_radius, static_cast<long>(n) - 1));
  const auto table = detail::half_offsets(u.grid(), fs.free_axes(), reach, exponent);
  for (std::size_t f = 0; f < fs.count(); ++f) {
    if (exact)
      detail::scan_exact(u, fs, f, table, best);
    else
      detail::scan_sampled(u, fs, f, exponent, budget, table, best);
  }
  return best;
}

inline std::vector<int> xprime_axes(const Grid& g) {
  std::vector<int> a;
  for (int i = 0; i < g.split(); ++i) a.push_back(g.array_axis(i));
  return a;
}

inline std::vector<int> xpp_axes(const Grid& g) {
  std::vector<int> a;
  for (int i = g.split(); i < g.dim(); ++i) a.push_back(g.array_axis(i));
  return a;
}

inline std::vector<int> zprime_axes(const Grid& g) {
  require(g.has_time(), "z' seminorms need a time axis");
  std::vector<int> a{0};
  for (int i = 0; i < g.split(); ++i) a.push_back(g.array_axis(i));
  return a;
}

inline std::vector<int> all_axes(const Grid& g) {
  std::vector<int> a(g.rank());
  for (int k = 0; k < g.rank(); ++k) a[k] = k;
  return a;
}

inline void check_delta(double delta) { require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)"); }

// [u]_{x',delta}: quotients in x', sup over x'' and t.
inline double seminorm_xprime(const GridFunction& u, double delta, const PairBudget& budget = {}) {
  check_delta(delta);
  return fiber_seminorm(u, xprime_axes(u.grid()), delta, budget).value;
}

// [u]_{x'',delta}: the complementary partial seminorm (control quantity).
inline double seminorm_xpp(const GridFunction& u, double delta, const PairBudget& budget = {}) {
  check_delta(delta);
  return fiber_seminorm(u, xpp_axes(u.grid()), delta, budget).value;
}

// [u]_{z',delta/2,delta}: parabolic distance |dx'| + |dt|^{1/2}, sup over x''.
inline double seminorm_zprime(const GridFunction& u, double delta, const PairBudget& budget = {}) {
  check_delta(delta);
  return fiber_seminorm(u, zprime_axes(u.grid()), delta, budget).value;
}

// <u>_{1+delta}: |u(t,x) - u(s,x)| / |t-s|^{(1+delta)/2}.
inline double seminorm_time_half(const GridFunction& u, double delta, const PairBudget& budget = {}) {
  check_delta(delta);
  require(u.grid().has_time(), "time seminorm needs a time axis");
  return fiber_seminorm(u, {0}, 1.0 + delta, budget).value;
}

// Derivative fields used by the order-k seminorms. Computed on the grid of u,
// then optionally cropped to the interior so boundary closures stay outside.
inline std::vector<GridFunction> xprime_derivatives(const GridFunction& u, int k, double margin = 0.0) {
  require(k >= 0 && k <= 2, "order must be 0, 1 or 2");
  std::vector<GridFunction> out;
  for (const auto& a : multi_indices(u.grid().split(), k)) {
    GridFunction d = fd_multi(u, a);
    out.push_back(margin > 0.0 ? restrict_interior(d, margin) : std::move(d));
  }
  return out;
}

// All spatial derivatives of order k (k <= 2), i <= j for k = 2.
inline std::vector<GridFunction> full_derivatives(const GridFunction& u, int k, double margin = 0.0) {
  require(k >= 0 && k <= 2, "order must be 0, 1 or 2");
  std::vector<GridFunction> out;
  const int d = u.grid().dim();
  auto keep = [&](GridFunction g) { out.push_back(margin > 0.0 ? restrict_interior(g, margin) : std::move(g)); };
  if (k == 0) keep(u);
  if (k == 1)
    for (int i = 0; i < d; ++i) keep(fd_derivative(u, i, 1));
  if (k == 2)
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) keep(i == j ? fd_derivative(u, i, 2) : fd_mixed(u, i, j));
  return out;
}

template <typename F>
double max_over(const std::vector<GridFunction>& fields, F&& f) {
  double m = 0.0;
  for (const auto& g : fields) m = std::max(m, f(g));
  return m;
}

// [u]_{x',k+delta} = max_{|alpha| = k} [D^alpha u]_{x',delta}.
inline double seminorm_xprime_k(const GridFunction& u, int k, double delta, const PairBudget& budget = {},
                                double margin = 0.0) {
  return max_over(xprime_derivatives(u, k, margin),
                  [&](const GridFunction& g) { return seminorm_xprime(g, delta, budget); });
}

// [u]_{x'',delta} applied to all spatial derivatives of order k.
inline double seminorm_xpp_k(const GridFunction& u, int k, double delta, const PairBudget& budget = {},
                             double margin = 0.0) {
  return max_over(full_derivatives(u, k, margin),
                  [&](const GridFunction& g) { return seminorm_xpp(g, delta, budget); });
}

// Parabolic z' seminorms of order k:
//   k = 0: [u]_{z',delta/2,delta}
//   k = 1: [D_{x'} u]_{z',delta/2,delta} + <u>_{1+delta}
//   k = 2: [u_t]_{z',delta/2,delta} + [D^2_{x'} u]_{z',delta/2,delta}
// The time window starts at time index first_level (after derivatives are taken).
inline double seminorm_zprime_k(const GridFunction& u, int k, double delta, const PairBudget& budget = {},
                                double margin = 0.0, std::size_t first_level = 0) {
  require(u.grid().has_time(), "z' seminorms need a time axis");
  auto window = [&](GridFunction g) {
    if (margin > 0.0) g = restrict_interior(g, margin);
    return first_level > 0 ? trim_time(g, first_level) : g;
  };
  auto zsn = [&](const GridFunction& g) { return seminorm_zprime(g, delta, budget); };
  if (k == 0) return zsn(window(u));
  if (k == 1) {
    double s = 0.0;
    for (const auto& a : multi_indices(u.grid().split(), 1)) s = std::max(s, zsn(window(fd_multi(u, a))));
    return s + seminorm_time_half(window(u), delta, budget);
  }
  require(k == 2, "order must be 0, 1 or 2");
  double s = 0.0;
  for (const auto& a : multi_indices(u.grid().split(), 2)) s = std::max(s, zsn(window(fd_multi(u, a))));
  return zsn(window(fd_time_derivative(u))) + s;
}

// Full seminorm in every variable (parabolic metric when the grid has time),
// of u (k = 0) or max over its spatial derivatives of order k.
inline double seminorm_full(const GridFunction& u, int k, double delta, const PairBudget& budget = {},
                            double margin = 0.0) {
  check_delta(delta);
  const auto axes = all_axes(u.grid());
  // Axis-aligned pairs are cheap to scan exactly and keep a sampled
  // all-direction estimate from falling below a one-direction quotient.
  return max_over(full_derivatives(u, k, margin), [&](const GridFunction& g) {
    double v = fiber_seminorm(g, axes, delta, budget).value;
    for (int a : axes) v = std::max(v, fiber_seminorm(g, {a}, delta, PairBudget::exact()).value);
    return v;
  });
}

enum class Family { xprime, zprime_parabolic, time_half_order, full, xpp };

struct SeminormSpec {
  Family family = Family::xprime;
  int order = 0;
  double delta = 0.5;
  PairBudget budget{};
};

// Dispatch by spec (derivatives over the whole grid, no cropping).
inline double seminorm(const GridFunction& u, const SeminormSpec& s) {
  check_delta(s.delta);
  require(s.order >= 0 && s.order <= 2, "order must be 0, 1 or 2");
  switch (s.family) {
    case Family::xprime: return seminorm_xprime_k(u, s.order, s.delta, s.budget);
    case Family::zprime_parabolic: return seminorm_zprime_k(u, s.order, s.delta, s.budget);
    case Family::time_half_order: return seminorm_time_half(u, s.delta, s.budget);
    case Family::full: return seminorm_full(u, s.order, s.delta, s.budget);
    case Family::xpp: return seminorm_xpp_k(u, s.order, s.delta, s.budget);
  }
  return 0.0;
}

// Free axes and exponent realizing the order-0 quotient of a family.
inline std::pair<std::vector<int>, double> family_metric(const Grid& g, Family f, double delta) {
  switch (f) {
    case Family::xprime: return {xprime_axes(g), delta};
    case Family::zprime_parabolic: return {zprime_axes(g), delta};
    case Family::time_half_order: return {{0}, 1.0 + delta};
    case Family::full: return {all_axes(g), delta};
    case Family::xpp: return {xpp_axes(g), delta};
  }
  return {{}, delta};
}

}  // namespace schauder
