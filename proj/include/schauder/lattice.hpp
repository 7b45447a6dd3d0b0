#pragma once

// Anisotropic tensor-product lattices, grid functions, finite-difference
// derivatives and fiber (slice) iteration.
//
// Layout: values are stored row-major over the "array axes"
// (t, x^1, ..., x^d), time slowest when present. Spatial axis i maps to
// array axis i + (has_time ? 1 : 0).

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "schauder/error.hpp"

namespace schauder {

inline constexpr int kMaxDim = 4;

enum class Boundary { dirichlet_box, periodic };

inline const char* to_string(Boundary b) {
  return b == Boundary::periodic ? "periodic" : "dirichlet-box";
}

inline Boundary boundary_from_string(const std::string& s) {
  if (s == "periodic") return Boundary::periodic;
  if (s == "dirichlet-box" || s == "dirichlet_box") return Boundary::dirichlet_box;
  throw LabError("unknown boundary tag '" + s + "'");
}

// One spatial axis. Dirichlet axes carry both endpoints as lattice points,
// h = (hi - lo) / (points - 1). Periodic axes identify hi with lo and carry
// points lattice points with h = (hi - lo) / points.
struct AxisSpec {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t points = 3;
  Boundary boundary = Boundary::dirichlet_box;

  double spacing() const {
    return boundary == Boundary::periodic ? (hi - lo) / static_cast<double>(points)
                                          : (hi - lo) / static_cast<double>(points - 1);
  }
  double coordinate(std::size_t k) const { return lo + static_cast<double>(k) * spacing(); }
  bool operator==(const AxisSpec&) const = default;
};

struct TimeAxis {
  double t0 = 0.0;
  double t1 = 1.0;
  std::size_t points = 2;

  double step() const { return (t1 - t0) / static_cast<double>(points - 1); }
  double coordinate(std::size_t k) const { return t0 + static_cast<double>(k) * step(); }
  bool operator==(const TimeAxis&) const = default;
};

// A point of the lattice in physical coordinates.
struct Point {
  double t = 0.0;
  std::array<double, kMaxDim> x{};
};

class Grid {
 public:
  Grid(int dim, int split, std::vector<AxisSpec> axes, std::optional<TimeAxis> time = std::nullopt)
      : dim_(dim), split_(split), axes_(std::move(axes)), time_(time) {
    require(dim_ >= 2 && dim_ <= kMaxDim, "grid dimension must be in [2, 4]");
    require(split_ >= 1 && split_ < dim_, "split q must satisfy 1 <= q < d");
    require(static_cast<int>(axes_.size()) == dim_, "one axis spec per spatial dimension required");
    for (const auto& a : axes_) {
      require(a.points >= 3, "every spatial axis needs at least 3 points");
      require(std::isfinite(a.lo) && std::isfinite(a.hi) && a.hi > a.lo, "empty or invalid extent");
    }
    if (time_) {
      require(time_->points >= 2, "time axis needs at least 2 points");
      require(time_->t1 > time_->t0, "empty time extent");
    }
    if (time_) shape_.push_back(time_->points);
    for (const auto& a : axes_) shape_.push_back(a.points);
    strides_.assign(shape_.size(), 1);
    for (int k = static_cast<int>(shape_.size()) - 2; k >= 0; --k)
      strides_[k] = strides_[k + 1] * shape_[k + 1];
    size_ = strides_[0] * shape_[0];
  }

  int dim() const { return dim_; }
  int split() const { return split_; }
  bool has_time() const { return time_.has_value(); }
  const AxisSpec& axis(int i) const { return axes_.at(i); }
  const std::vector<AxisSpec>& axes() const { return axes_; }
  const TimeAxis& time() const {
    require(time_.has_value(), "grid has no time axis");
    return *time_;
  }
  const std::optional<TimeAxis>& time_axis() const { return time_; }

  double spacing(int i) const { return axes_.at(i).spacing(); }
  double coordinate(int i, std::size_t k) const { return axes_.at(i).coordinate(k); }

  // Number of array axes (spatial + optional time).
  int rank() const { return static_cast<int>(shape_.size()); }
  int array_axis(int spatial_axis) const { return spatial_axis + (has_time() ? 1 : 0); }
  // Spatial axis for an array axis, or -1 for the time axis.
  int spatial_axis(int array_axis) const { return array_axis - (has_time() ? 1 : 0); }
  bool is_time_axis(int array_axis) const { return has_time() && array_axis == 0; }
  double array_spacing(int array_axis) const {
    return is_time_axis(array_axis) ? time_->step() : spacing(spatial_axis(array_axis));
  }
  bool array_periodic(int array_axis) const {
    return !is_time_axis(array_axis) &&
           axes_[spatial_axis(array_axis)].boundary == Boundary::periodic;
  }

  const std::vector<std::size_t>& shape() const { return shape_; }
  const std::vector<std::size_t>& strides() const { return strides_; }
  std::size_t size() const { return size_; }
  std::size_t spatial_size() const { return has_time() ? size_ / shape_[0] : size_; }

  std::size_t flat(std::span<const std::size_t> idx) const {
    require(idx.size() == shape_.size(), "index rank mismatch");
    std::size_t f = 0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      require(idx[k] < shape_[k], "lattice index out of range");
      f += idx[k] * strides_[k];
    }
    return f;
  }
  std::vector<std::size_t> unflat(std::size_t f) const {
    std::vector<std::size_t> idx(shape_.size());
    for (std::size_t k = 0; k < shape_.size(); ++k) {
      idx[k] = f / strides_[k];
      f %= strides_[k];
    }
    return idx;
  }
  std::size_t index_along(std::size_t flat_index, int array_axis) const {
    return (flat_index / strides_[array_axis]) % shape_[array_axis];
  }

  Point point(std::size_t flat_index) const {
    Point p;
    for (int k = 0; k < rank(); ++k) {
      const std::size_t i = index_along(flat_index, k);
      if (is_time_axis(k))
        p.t = time_->coordinate(i);
      else
        p.x[spatial_axis(k)] = coordinate(spatial_axis(k), i);
    }
    return p;
  }

  // Lattice index of coordinate x on spatial axis i; throws when x is not a node.
  std::size_t lattice_index(int i, double x) const {
    const auto& a = axes_.at(i);
    const double s = (x - a.lo) / a.spacing();
    const double k = std::round(s);
    require(std::abs(s - k) <= 1e-9 && k >= 0 && k < static_cast<double>(a.points),
            "coordinate is not a lattice point");
    return static_cast<std::size_t>(k);
  }
  std::size_t time_index(double t) const {
    const double s = (t - time().t0) / time().step();
    const double k = std::round(s);
    require(std::abs(s - k) <= 1e-9 && k >= 0 && k < static_cast<double>(time().points),
            "time is not a lattice point");
    return static_cast<std::size_t>(k);
  }

  bool operator==(const Grid& o) const {
    return dim_ == o.dim_ && split_ == o.split_ && axes_ == o.axes_ && time_ == o.time_;
  }

 private:
  int dim_;
  int split_;
  std::vector<AxisSpec> axes_;
  std::optional<TimeAxis> time_;
  std::vector<std::size_t> shape_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 0;
};

inline Grid make_grid(int d, int q, const std::vector<std::pair<double, double>>& extents,
                      const std::vector<std::size_t>& counts,
                      Boundary boundary = Boundary::dirichlet_box,
                      std::optional<TimeAxis> time = std::nullopt) {
  require(static_cast<int>(extents.size()) == d && static_cast<int>(counts.size()) == d,
          "extents and counts must have d entries");
  std::vector<AxisSpec> axes;
  for (int i = 0; i < d; ++i)
    axes.push_back({extents[i].first, extents[i].second, counts[i], boundary});
  return Grid(d, q, std::move(axes), time);
}

// Uniform box [lo, hi]^d with n points per axis.
inline Grid make_box(int d, int q, double lo, double hi, std::size_t n,
                     std::optional<TimeAxis> time = std::nullopt,
                     Boundary boundary = Boundary::dirichlet_box) {
  return make_grid(d, q, std::vector<std::pair<double, double>>(d, {lo, hi}),
                   std::vector<std::size_t>(d, n), boundary, time);
}

class GridFunction {
 public:
  explicit GridFunction(Grid grid, double fill = 0.0)
      : grid_(std::move(grid)), values_(grid_.size(), fill) {}
  GridFunction(Grid grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
    require(values_.size() == grid_.size(), "value count does not match the grid");
    for (double v : values_) require(std::isfinite(v), "grid function values must be finite");
  }

  template <typename F>
  static GridFunction sample(const Grid& grid, F&& f) {
    GridFunction u(grid);
    for (std::size_t k = 0; k < grid.size(); ++k) u.values_[k] = f(grid.point(k));
    return u;
  }

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double operator[](std::size_t k) const { return values_[k]; }
  double& operator[](std::size_t k) { return values_[k]; }

  double max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  GridFunction& operator+=(const GridFunction& o) {
    require(grid_ == o.grid_, "grid mismatch");
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
    return *this;
  }
  GridFunction& operator-=(const GridFunction& o) {
    require(grid_ == o.grid_, "grid mismatch");
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= o.values_[k];
    return *this;
  }
  GridFunction& operator*=(double c) {
    for (double& v : values_) v *= c;
    return *this;
  }
  friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
  friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
  friend GridFunction operator*(double c, GridFunction a) { return a *= c; }

 private:
  Grid grid_;
  std::vector<double> values_;
};

// Multi-index over the q regular directions.
struct MultiIndex {
  std::vector<int> alpha;

  int order() const { return std::accumulate(alpha.begin(), alpha.end(), 0); }
  double factorial() const {
    double f = 1.0;
    for (int a : alpha)
      for (int k = 2; k <= a; ++k) f *= k;
    return f;
  }
  bool operator==(const MultiIndex&) const = default;
};

// All multi-indices of length q with |alpha| == order, in lexicographic descending order.
inline std::vector<MultiIndex> multi_indices(int q, int order) {
  require(q >= 1 && order >= 0, "invalid multi-index request");
  std::vector<MultiIndex> out;
  std::vector<int> cur(q, 0);
  std::function<void(int, int)> rec = [&](int pos, int left) {
    if (pos == q - 1) {
      cur[pos] = left;
      out.push_back({cur});
      return;
    }
    for (int a = left; a >= 0; --a) {
      cur[pos] = a;
      rec(pos + 1, left - a);
    }
  };
  rec(0, order);
  return out;
}

// Multi-indices with |alpha| <= order.
inline std::vector<MultiIndex> multi_indices_upto(int q, int order) {
  std::vector<MultiIndex> out;
  for (int k = 0; k <= order; ++k) {
    auto m = multi_indices(q, k);
    out.insert(out.end(), m.begin(), m.end());
  }
  return out;
}

namespace detail {

inline GridFunction derivative_along(const GridFunction& u, int array_axis, int order) {
  const Grid& g = u.grid();
  require(array_axis >= 0 && array_axis < g.rank(), "axis out of range");
  require(order == 1 || order == 2, "derivative order must be 1 or 2");
  const std::size_t n = g.shape()[array_axis];
  const std::size_t s = g.strides()[array_axis];
  const bool periodic = g.array_periodic(array_axis);
  if (!periodic) require(n >= (order == 1 ? 3u : 4u), "too few points for one-sided closures");
  const double h = g.array_spacing(array_axis);
  const double inv = order == 1 ? 1.0 / (2.0 * h) : 1.0 / (h * h);
  GridFunction out(g);
  auto src = u.values();
  auto dst = out.values();
  for (std::size_t p = 0; p < g.size(); ++p) {
    const std::size_t i = (p / s) % n;
    const std::size_t base = p - i * s;
    auto at = [&](std::ptrdiff_t k) {
      if (periodic) k = ((k % static_cast<std::ptrdiff_t>(n)) + n) % n;
      return src[base + static_cast<std::size_t>(k) * s];
    };
    const auto ii = static_cast<std::ptrdiff_t>(i);
    double d;
    if (order == 1) {
      if (periodic || (i > 0 && i + 1 < n))
        d = at(ii + 1) - at(ii - 1);
      else if (i == 0)
        d = -3.0 * at(0) + 4.0 * at(1) - at(2);
      else
        d = 3.0 * at(ii) - 4.0 * at(ii - 1) + at(ii - 2);
    } else {
      if (periodic || (i > 0 && i + 1 < n))
        d = at(ii + 1) - 2.0 * at(ii) + at(ii - 1);
      else if (i == 0)
        d = 2.0 * at(0) - 5.0 * at(1) + 4.0 * at(2) - at(3);
      else
        d = 2.0 * at(ii) - 5.0 * at(ii - 1) + 4.0 * at(ii - 2) - at(ii - 3);
    }
    dst[p] = d * inv;
  }
  return out;
}

}  // namespace detail

// D_i u (order 1) or D_ii u (order 2) along spatial axis i. Central stencils
// in the interior, second-order one-sided closures on Dirichlet boundaries.
inline GridFunction fd_derivative(const GridFunction& u, int axis, int order) {
  require(axis >= 0 && axis < u.grid().dim(), "spatial axis out of range");
  return detail::derivative_along(u, u.grid().array_axis(axis), order);
}

inline GridFunction fd_time_derivative(const GridFunction& u, int order = 1) {
  require(u.grid().has_time(), "time derivative needs a time axis");
  require(u.grid().time().points >= (order == 1 ? 3u : 4u), "too few time levels for the stencil");
  return detail::derivative_along(u, 0, order);
}

// D_ij u for i != j; in the interior this is the 4-point cross stencil.
inline GridFunction fd_mixed(const GridFunction& u, int axis_i, int axis_j) {
  require(axis_i != axis_j, "fd_mixed needs two distinct axes");
  return fd_derivative(fd_derivative(u, axis_j, 1), axis_i, 1);
}

// D^alpha u for a multi-index over the first q axes (|alpha| <= 2).
inline GridFunction fd_multi(const GridFunction& u, const MultiIndex& a) {
  require(static_cast<int>(a.alpha.size()) == u.grid().split(), "multi-index length must equal q");
  require(a.order() <= 2, "only |alpha| <= 2 is supported");
  std::vector<int> axes;
  for (int i = 0; i < static_cast<int>(a.alpha.size()); ++i)
    for (int k = 0; k < a.alpha[i]; ++k) axes.push_back(i);
  if (axes.empty()) return u;
  if (axes.size() == 1) return fd_derivative(u, axes[0], 1);
  if (axes[0] == axes[1]) return fd_derivative(u, axes[0], 2);
  return fd_mixed(u, axes[0], axes[1]);
}

// Partition of the lattice into fibers: each fiber varies the free array
// axes and freezes all others.
class FiberSet {
 public:
  FiberSet(const Grid& grid, std::vector<int> free_axes) : free_(std::move(free_axes)) {
    std::vector<bool> is_free(grid.rank(), false);
    for (int a : free_) {
      require(a >= 0 && a < grid.rank(), "free axis out of range");
      require(!is_free[a], "duplicate free axis");
      is_free[a] = true;
    }
    for (int a : free_) {
      local_shape_.push_back(grid.shape()[a]);
      local_strides_.push_back(grid.strides()[a]);
    }
    local_size_ = 1;
    for (auto n : local_shape_) local_size_ *= n;
    // Enumerate fiber bases over the frozen axes in row-major order.
    std::vector<int> frozen;
    for (int a = 0; a < grid.rank(); ++a)
      if (!is_free[a]) frozen.push_back(a);
    std::size_t count = 1;
    for (int a : frozen) count *= grid.shape()[a];
    bases_.reserve(count);
    std::vector<std::size_t> idx(frozen.size(), 0);
    for (std::size_t c = 0; c < count; ++c) {
      std::size_t base = 0;
      for (std::size_t k = 0; k < frozen.size(); ++k) base += idx[k] * grid.strides()[frozen[k]];
      bases_.push_back(base);
      for (int k = static_cast<int>(frozen.size()) - 1; k >= 0; --k) {
        if (++idx[k] < grid.shape()[frozen[k]]) break;
        idx[k] = 0;
      }
    }
  }

  std::size_t count() const { return bases_.size(); }
  std::size_t base(std::size_t fiber) const { return bases_[fiber]; }
  const std::vector<int>& free_axes() const { return free_; }
  const std::vector<std::size_t>& local_shape() const { return local_shape_; }
  std::size_t local_size() const { return local_size_; }

  // Flat grid index of the local point (row-major over the free axes).
  std::size_t flat(std::size_t fiber, std::size_t local) const {
    std::size_t f = bases_[fiber];
    for (int k = static_cast<int>(local_shape_.size()) - 1; k >= 0; --k) {
      f += (local % local_shape_[k]) * local_strides_[k];
      local /= local_shape_[k];
    }
    return f;
  }

 private:
  std::vector<int> free_;
  std::vector<std::size_t> local_shape_;
  std::vector<std::size_t> local_strides_;
  std::size_t local_size_ = 1;
  std::vector<std::size_t> bases_;
};

// Slices at fixed x'': each slice varies (t, x') when the grid has time, else x'.
inline FiberSet slices_xpp(const Grid& grid) {
  std::vector<int> free;
  if (grid.has_time()) free.push_back(0);
  for (int i = 0; i < grid.split(); ++i) free.push_back(grid.array_axis(i));
  return FiberSet(grid, std::move(free));
}

// Copy of u on the index box [first[k], last[k]] for every array axis.
inline GridFunction crop(const GridFunction& u, const std::vector<std::size_t>& first,
                         const std::vector<std::size_t>& last) {
  const Grid& g = u.grid();
  require(static_cast<int>(first.size()) == g.rank() && static_cast<int>(last.size()) == g.rank(),
          "crop ranges must cover every array axis");
  std::vector<AxisSpec> axes;
  std::optional<TimeAxis> time;
  for (int k = 0; k < g.rank(); ++k) {
    require(first[k] <= last[k] && last[k] < g.shape()[k], "crop range out of bounds");
    if (g.is_time_axis(k)) {
      time = TimeAxis{g.time().coordinate(first[k]), g.time().coordinate(last[k]), last[k] - first[k] + 1};
    } else {
      const int i = g.spatial_axis(k);
      const auto& a = g.axis(i);
      const bool whole = first[k] == 0 && last[k] + 1 == a.points;
      if (whole) {
        axes.push_back(a);
      } else {
        axes.push_back({a.coordinate(first[k]), a.coordinate(last[k]), last[k] - first[k] + 1,
                        Boundary::dirichlet_box});
      }
    }
  }
  Grid sub(g.dim(), g.split(), std::move(axes), time);
  GridFunction out(sub);
  std::vector<std::size_t> idx(g.rank());
  for (std::size_t p = 0; p < sub.size(); ++p) {
    for (int k = 0; k < g.rank(); ++k) idx[k] = sub.index_along(p, k) + first[k];
    out[p] = u[g.flat(idx)];
  }
  return out;
}

// Shrinks every spatial extent symmetrically by margin_fraction per side.
inline GridFunction restrict_interior(const GridFunction& u, double margin_fraction) {
  require(margin_fraction >= 0.0 && margin_fraction < 0.5, "margin fraction must lie in [0, 0.5)");
  const Grid& g = u.grid();
  std::vector<std::size_t> first(g.rank(), 0), last(g.rank());
  for (int k = 0; k < g.rank(); ++k) {
    last[k] = g.shape()[k] - 1;
    if (g.is_time_axis(k)) continue;
    const std::size_t n = g.shape()[k];
    const auto cut = static_cast<std::size_t>(std::ceil(margin_fraction * static_cast<double>(n - 1) - 1e-9));
    require(n > 2 * cut && n - 2 * cut >= 3, "margin leaves fewer than 3 points on an axis");
    first[k] = cut;
    last[k] = n - 1 - cut;
  }
  return crop(u, first, last);
}

// Drops the time levels before first_index.
inline GridFunction trim_time(const GridFunction& u, std::size_t first_index) {
  const Grid& g = u.grid();
  require(g.has_time(), "trim_time needs a time axis");
  std::vector<std::size_t> first(g.rank(), 0), last(g.rank());
  for (int k = 0; k < g.rank(); ++k) last[k] = g.shape()[k] - 1;
  require(first_index + 2 <= g.shape()[0], "trim leaves fewer than 2 time levels");
  first[0] = first_index;
  return crop(u, first, last);
}

}  // namespace schauder
