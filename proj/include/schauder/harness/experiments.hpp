#pragma once

// Estimate-verification experiments. Each run returns a Report whose verdicts
// are computed from the numbers stored in it.
//
// Geometry: [-1, 1]^d with n points per axis. Parabolic runs use [0, 1/16] in
// time with tau = h^2 and measure on the window t >= 1/32, away from the
// zero initial layer. Data seminorms are taken on the whole grid, solution
// seminorms on the interior box left after the configured margin.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "schauder/campanato.hpp"
#include "schauder/fields.hpp"
#include "schauder/harness/config.hpp"
#include "schauder/harness/report.hpp"
#include "schauder/lattice.hpp"
#include "schauder/mollify.hpp"
#include "schauder/oracle.hpp"
#include "schauder/seminorm.hpp"
#include "schauder/solve.hpp"

namespace schauder::harness {

inline const char* experiment_description(const std::string& id) {
  if (id == "E1") return "elliptic, nondivergence, a = a(x''):  [u]_{x',2+d} <= N [f]_{x',d}";
  if (id == "E2") return "elliptic, divergence, a = a(x''):  [u]_{x',1+d} <= N [f]_{x',d}";
  if (id == "E3") return "parabolic, nondivergence, a = a(t,x''):  [u]_{x',2+d} <= N [f]_{x',d}";
  if (id == "E4") return "parabolic, divergence, a = a(t,x''):  [u]_{x',1+d} <= N [f]_{x',d}";
  if (id == "E5") return "parabolic, a = a(x'') only:  z'-seminorm bounds, both operator forms";
  if (id == "E6") return "coefficients Hoelder in x' with constant K:  extra N K [D^2 u]_0 on the right";
  if (id == "E7") return "degenerate in the x'' directions:  same bound as E1";
  if (id == "E8") return "constant or a(t) coefficients:  full [D_{x'} u]_{1+d} <= N [f]_{x',d}";
  if (id == "C1") return "mixed-derivative counterexample:  sup |u_xy| grows like sqrt(ln(1/h))";
  if (id == "C2") return "half-plane boundary counterexample:  v(e,-e) >= c > 0 while v(0,-e) = 0";
  if (id == "L1") return "partial and parabolic mollifier bounds:  rates eps^d";
  if (id == "Q1") return "Campanato quotient vs partial seminorm:  two-sided equivalence";
  return "";
}

// Desk-scale defaults per experiment (what `lab run <id>` uses without --config).
inline ExperimentConfig default_config(const std::string& id) {
  require(known_experiment(id), "unknown experiment id '" + id + "'");
  ExperimentConfig c;
  c.experiment = id;
  c.out = "out/" + id;
  if (id == "E8") {
    // The rough-coefficient contrast needs two x'' directions.
    c.d = 3;
    c.resolutions = {17, 33, 65};
    c.ensemble = 5;
  } else if (id == "C1") {
    c.resolutions = {16, 32, 64, 128, 256};
    c.ensemble = 1;
  } else if (id == "C2") {
    c.resolutions = {128, 256};
    c.ensemble = 1;
  } else if (id == "L1") {
    c.resolutions = {257, 2049};
    c.ensemble = 1;
  } else if (id == "Q1") {
    c.resolutions = {129, 257};
    c.ensemble = 5;
  }
  return c;
}

// ---------------------------------------------------------------------------
// Ensemble plumbing

// Runs body(i) for i < count on a small pool. Results must be written to
// per-index slots, which keeps the outcome independent of scheduling.
template <typename F>
void parallel_for(std::size_t count, F&& body) {
  const std::size_t workers = std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex mu;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            body(i);
          } catch (...) {
            std::lock_guard<std::mutex> lock(mu);
            if (!error) error = std::current_exception();
          }
        }
      });
  }
  if (error) std::rethrow_exception(error);
}

using MemberFn = std::function<std::vector<MemberRecord>(std::size_t resolution, std::uint64_t seed)>;

// Members are seed + i for i < ensemble at every resolution. fn returns one
// record per series, in the order of `series`.
inline void run_ensemble(const ExperimentConfig& c, std::vector<Series>& series, const MemberFn& fn) {
  const std::size_t m = static_cast<std::size_t>(c.ensemble);
  const std::size_t tasks = c.resolutions.size() * m;
  std::vector<std::vector<MemberRecord>> out(tasks);
  parallel_for(tasks, [&](std::size_t t) {
    out[t] = fn(c.resolutions[t / m], c.seed + t % m);
    require(out[t].size() == series.size(), "member function returned the wrong number of records");
  });
  for (const auto& recs : out)
    for (std::size_t k = 0; k < series.size(); ++k) series[k].members.push_back(recs[k]);
  for (auto& s : series) aggregate(s, c.resolutions);
}

inline Series make_series(std::string name, std::string num, std::string den, std::string ctl = "") {
  Series s;
  s.name = std::move(name);
  s.numerator = std::move(num);
  s.denominator = std::move(den);
  s.control = std::move(ctl);
  return s;
}

inline MemberRecord record(std::size_t n, std::uint64_t seed) {
  MemberRecord m;
  m.seed = seed;
  m.resolution = n;
  return m;
}

inline void note_solve(MemberRecord& m, const SolveReport& r) {
  m.iterations += r.iterations;
  m.factorizations += r.factorizations;
}

// Solver failures are recorded on the member instead of aborting the ensemble.
template <typename F>
std::optional<Solution> guarded_solve(MemberRecord& m, F&& solve) {
  try {
    Solution s = solve();
    note_solve(m, s.report);
    return s;
  } catch (const LabError& e) {
    m.status = MemberStatus::solver_failure;
    m.note = e.what();
    return std::nullopt;
  }
}

// Data draws use a seed disjoint from the coefficient draws.
inline std::uint64_t data_seed(std::uint64_t s) { return s + 1000003; }

inline constexpr double kFinalTime = 1.0 / 16.0;

inline Grid elliptic_box(const ExperimentConfig& c, std::size_t n) { return make_box(c.d, c.q, -1.0, 1.0, n); }

inline Grid parabolic_box(int d, int q, std::size_t n) {
  const double h = 2.0 / static_cast<double>(n - 1);
  const auto steps = static_cast<std::size_t>(std::lround(kFinalTime / (h * h)));
  return make_box(d, q, -1.0, 1.0, n, TimeAxis{0.0, kFinalTime, std::max<std::size_t>(steps, 2) + 1});
}

// First time level of the measurement window [T/2, T].
inline std::size_t window_start(const Grid& g) { return (g.time().points - 1) / 2; }

inline GridFunction window(const GridFunction& u) { return trim_time(u, window_start(u.grid())); }

inline double max_xprime(const VectorField& f, double delta) {
  double s = 0.0;
  for (const auto& c : f.components) s = std::max(s, seminorm_xprime(c, delta));
  return s;
}

inline double max_zprime(const VectorField& f, double delta) {
  double s = 0.0;
  for (const auto& c : f.components) s = std::max(s, seminorm_zprime(c, delta));
  return s;
}

inline double max_abs(const VectorField& f) {
  double s = 0.0;
  for (const auto& c : f.components) s = std::max(s, c.max_abs());
  return s;
}

inline SolveOptions solve_options(const ExperimentConfig& c) {
  SolveOptions o;
  o.tol = c.tol;
  return o;
}

inline Report new_report(const ExperimentConfig& c) {
  validate(c);
  Report r;
  r.experiment = c.experiment;
  r.config = c;
  return r;
}

// ---------------------------------------------------------------------------
// E1 / E7: elliptic nondivergence with coefficients depending on x'' only

inline MemberRecord elliptic_nondiv_member(const ExperimentConfig& c, const CoefficientField& a, std::size_t n,
                                           std::uint64_t seed) {
  const Grid& g = a.grid();
  auto m = record(n, seed);
  const auto f = synthetic_rhs(g, c.delta, data_seed(seed), RhsKind::rough_xpp).f;
  m.denominator = seminorm_xprime(f, c.delta);
  if (auto s = guarded_solve(m, [&] { return solve_elliptic_nondiv(a, f, solve_options(c)); })) {
    m.numerator = seminorm_xprime_k(s->u, 2, c.delta, {}, c.margin);
    m.control = seminorm_xpp_k(s->u, 2, c.delta, {}, c.margin);
  }
  finish_member(m, f.max_abs());
  return m;
}

inline Report run_E1(const ExperimentConfig& c) {
  auto r = new_report(c);
  std::vector<Series> s = {make_series("rough-a", "[u]_{x',2+d}", "[f]_{x',d}", "[D^2 u]_{x'',d}")};
  run_ensemble(c, s, [&](std::size_t n, std::uint64_t seed) {
    const auto a = random_rough_coefficients(elliptic_box(c, n), c.nu, Pattern::xpp_only, seed);
    return std::vector<MemberRecord>{elliptic_nondiv_member(c, a, n, seed)};
  });
  r.series = std::move(s);
  stability_verdicts(r, r.series[0], true);
  return r;
}

inline constexpr double kDegenerateFloor = 0.01;

inline Report run_E7(const ExperimentConfig& c) {
  auto r = new_report(c);
  std::vector<Series> s = {make_series("degenerate-a", "[u]_{x',2+d}", "[f]_{x',d}", "[D^2 u]_{x'',d}")};
  run_ensemble(c, s, [&](std::size_t n, std::uint64_t seed) {
    const auto a = degenerate_coefficients(elliptic_box(c, n), c.nu, seed, kDegenerateFloor);
    return std::vector<MemberRecord>{elliptic_nondiv_member(c, a, n, seed)};
  });
  r.series = std::move(s);
  stability_verdicts(r, r.series[0], false);
  // Iteration counts of the Krylov backend as the x'' floor drops; recorded only.
  const Grid g = elliptic_box(c, c.resolutions.back());
  const auto f = synthetic_rhs(g, c.delta, data_seed(c.seed), RhsKind::rough_xpp).f;
  auto iters = nlohmann::ordered_json::array();
  for (double floor : {0.5, 0.1, 0.01, 0.001}) {
    SolveOptions o = solve_options(c);
    o.backend = Backend::bicgstab;
    nlohmann::ordered_json row = {{"floor", floor}};
    try {
      const auto sol = solve_elliptic_nondiv(degenerate_coefficients(g, c.nu, c.seed, floor), f, o);
      row["iterations"] = sol.report.iterations;
    } catch (const LabError& e) {
      row["iterations"] = nullptr;
      row["error"] = e.what();
    }
    iters.push_back(row);
  }
  r.metrics["krylov_iterations_by_floor"] = iters;
  return r;
}

// ---------------------------------------------------------------------------
// E2: elliptic divergence form

inline Report run_E2(const ExperimentConfig& c) {
  auto r = new_report(c);
  std::vector<Series> s = {make_series("rough-a", "[u]_{x',1+d}", "max_i [f_i]_{x',d}", "[D u]_{x'',d}")};
  run_ensemble(c, s, [&](std::size_t n, std::uint64_t seed) {
    const Grid g = elliptic_box(c, n);
    const auto a = random_rough_coefficients(g, c.nu, Pattern::xpp_only, seed, OperatorForm::divergence);
    const auto f = synthetic_vector_rhs(g, c.delta, data_seed(seed), RhsKind::rough_xpp);
    auto m = record(n, seed);
    m.denominator = max_xprime(f, c.delta);
    if (auto sol = guarded_solve(m, [&] { return solve_elliptic_div(a, f, solve_options(c)); })) {
      m.numerator = seminorm_xprime_k(sol->u, 1, c.delta, {}, c.margin);
      m.control = seminorm_xpp_k(sol->u, 1, c.delta, {}, c.margin);
    }
    finish_member(m, max_abs(f));
    return std::vector<MemberRecord>{m};
  });
  r.series = std::move(s);
  stability_verdicts(r, r.series[0], true);
  return r;
}

// ---------------------------------------------------------------------------
// E3 / E4: parabolic with a(t, x'')

inline Report run_E3(const ExperimentConfig& c) {
  auto r = new_report(c);
  std::vector<Series> s = {make_series("rough-a", "[u]_{x',2+d} on t >= T/2", "[f]_{x',d}", "[D^2 u]_{x'',d}")};
  run_ensemble(c, s, [&](std::size_t n, std::uint64_t seed) {
    const Grid g = parabolic_box(c.d, c.q, n);
    const auto a = random_rough_coefficients(g, c.nu, Pattern::t_and_xpp, seed);
    const auto f = synthetic_rhs(g, c.delta, data_seed(seed), RhsKind::rough_xpp).f;
    auto m = record(n, seed);
    m.denominator = seminorm_xprime(f, c.delta);
    if (auto sol = guarded_solve(m, [&] {
          return solve_parabolic_nondiv(a, f, GridFunction(spatial_grid(g), 0.0), solve_options(c));
        })) {
      const auto w = window(sol->u);
      m.numerator = seminorm_xprime_k(w, 2, c.delta, {}, c.margin);
      m.control = seminorm_xpp_k(w, 2, c.delta, {}, c.margin);
    }
    finish_member(m, f.max_abs());
    return std::vector<MemberRecord>{m};
  });
  r.series = std::move(s);
  stability_verdicts(r, r.series[0], true);
  return r;
}

inline Report run_E4(const ExperimentConfig& c) {
  auto r = new_report(c);
  std::vector<Series> s = {make_series("rough-a", "[u]_{x',1+d} on t >= T/2", "max_i [f_i]_{x',d}", "[D u]_{x'',d}")};
  run_ensemble(c, s, [&](std::size_t n, std::uint64_t seed) {
    const Grid g = parabolic_box(c.d, c.q, n);
    const auto a = random_rough_coefficients(g, c.nu, Pattern::t_and_xpp, seed, OperatorForm::divergence);
    const auto f = synthetic_vector_rhs(g, c.delta, data_seed(seed), RhsKind::rough_xpp);
    auto m = record(n, seed);
    m.denominator = max_xprime(f, c.delta);
    if (auto sol = guarded_solve(m, [&] {
          return solve_parabolic_div(a, f, GridFunction(spatial_grid(g), 0.0), solve_options(c));
        })) {
      const auto w = window(sol->u);
      m.numerator = seminorm_xprime_k(w, 1, c.delta, {}, c.margin);
      m.control = seminorm_xpp_k(w, 1, c.delta, {}, c.margin);
    }
    finish_member(m, max_abs(f));
    return std::vector<MemberRecord>{m};
  });
  r.series = std::move(s);
  stability_verdicts(r, r.series[0], true);
  return r;
}

// ---------------------------------------------------------------------------
// E5: time-independent a(x''), z' seminorms, both forms

inline Report run_E5(const ExperimentConfig& c) {
  auto r = new_report(c);
  std::vector<Series> s = {
      make_series("nondivergence", "[u_t]_{z'} + [D^2_{x'} u]_{z'} on t >= T/2", "[f]_{z',d/2,d}", "[D^2 u]_{x'',d}"),
      make_series("divergence", "[D_{x'} u]_{z'} + <u>_{1+d} on t >= T/2", "max_i [f_i]_{z',d/2,d}",
                  "[D u]_{x'',d}")};
  run_ensemble(c, s, [&](std::size_t n, std::uint64_t seed) {
    const Grid g = parabolic_box(c.d, c.q, n);
    const GridFunction u0(spatial_grid(g), 0.0);
    const std::size_t first = window_start(g);
    auto nd = record(n, seed);
    {
      const auto a = random_rough_coefficients(g, c.nu, Pattern::xpp_only, seed);
      const auto f = synthetic_rhs(g, c.delta, data_seed(seed), RhsKind::time_dependent).f;
      nd.denominator = seminorm_zprime(f, c.delta);
      if (auto sol = guarded_solve(nd, [&] { return solve_parabolic_nondiv(a, f, u0, solve_options(c)); })) {
        nd.numerator = seminorm_zprime_k(sol->u, 2, c.delta, {}, c.margin, first);
        nd.control = seminorm_xpp_k(window(sol->u), 2, c.delta, {}, c.margin);
      }
      finish_member(nd, f.max_abs());
    }
    auto dv = record(n, seed);
    {
      const auto a = random_rough_coefficients(g, c.nu, Pattern::xpp_only, seed, OperatorForm::divergence);
      const auto f = synthetic_vector_rhs(g, c.delta, data_seed(seed), RhsKind::time_dependent);
      dv.denominator = max_zprime(f, c.delta);
      if (auto sol = guarded_solve(dv, [&] { return solve_parabolic_div(a, f, u0, solve_options(c)); })) {
        dv.numerator = seminorm_zprime_k(sol->u, 1, c.delta, {}, c.margin, first);
        dv.control = seminorm_xpp_k(window(sol->u), 1, c.delta, {}, c.margin);
      }
      finish_member(dv, max_abs(f));
    }
    return std::vector<MemberRecord>{nd, dv};
  });
  r.series = std::move(s);
  for (const auto& x : r.series) stability_verdicts(r, x, true);
  return r;
}

// ---------------------------------------------------------------------------
// E6: coefficients Hoelder in x' with constant K

inline const std::vector<double>& hoelder_constants() {
  static const std::vector<double> ks = {0.0, 0.25, 0.5};
  return ks;
}

inline Report run_E6(const ExperimentConfig& c) {
  auto r = new_report(c);
  std::vector<Series> s;
  for (double K : hoelder_constants())
    s.push_back(make_series("K=" + fmt(K), "[u]_{x',2+d}", "[f]_{x',d} + K [D^2 u]_0", "[u]_{x',2+d} / [f]_{x',d}"));
  run_ensemble(c, s, [&](std::size_t n, std::uint64_t seed) {
    const Grid g = elliptic_box(c, n);
    const auto f = synthetic_rhs(g, c.delta, data_seed(seed), RhsKind::rough_xpp).f;
    const double fs = seminorm_xprime(f, c.delta);
    std::vector<MemberRecord> out;
    for (double K : hoelder_constants()) {
      auto m = record(n, seed);
      const auto a = hoelder_coefficients(g, c.nu, K, c.delta, seed);
      m.denominator = fs;
      if (auto sol = guarded_solve(m, [&] { return solve_elliptic_nondiv(a, f, solve_options(c)); })) {
        m.numerator = seminorm_xprime_k(sol->u, 2, c.delta, {}, c.margin);
        double d2 = 0.0;
        for (const auto& v : full_derivatives(sol->u, 2, c.margin)) d2 = std::max(d2, v.max_abs());
        m.denominator = fs + K * d2;
        m.control = fs > 0.0 ? m.numerator / fs : 0.0;
      }
      finish_member(m, f.max_abs());
      out.push_back(m);
    }
    return out;
  });
  r.series = std::move(s);
  auto plain = nlohmann::ordered_json::array();
  bool increasing = true;
  double prev = -1.0;
  for (const auto& x : r.series) {
    stability_verdicts(r, x, false);
    const double v = x.aggregates.back().max_control;
    plain.push_back(v);
    increasing = increasing && v > prev;
    prev = v;
  }
  r.metrics["K"] = hoelder_constants();
  r.metrics["plain_max_ratio_finest"] = plain;
  r.check("K-less ratio increases with K", increasing, "finest max [u]/[f] by K: " + plain.dump());
  return r;
}

// ---------------------------------------------------------------------------
// E8: full regularity of D_{x'} u for constant and a(t) coefficients

inline std::vector<GridFunction> xprime_gradient(const GridFunction& u) {
  std::vector<GridFunction> out;
  for (const auto& a : multi_indices(u.grid().split(), 1)) out.push_back(fd_multi(u, a));
  return out;
}

inline Report run_E8(const ExperimentConfig& c) {
  auto r = new_report(c);
  std::vector<Series> s = {
      make_series("constant-a", "[D_{x'} u]_{1+d} (full)", "[f]_{x',d}"),
      make_series("rough-a", "[D_{x'} u]_{1+d} (full)", "[f]_{x',d}", "x''-part: [D D_{x'} u]_{x'',d}"),
      make_series("a(t)", "[D D_{x'} u]_{(d/2,d)} + <D_{x'} u>_{1+d} on t >= T/2", "[f]_{x',d}")};
  run_ensemble(c, s, [&](std::size_t n, std::uint64_t seed) {
    const Grid g = elliptic_box(c, n);
    const auto f = synthetic_rhs(g, c.delta, data_seed(seed), RhsKind::rough_xpp).f;
    const double fs = seminorm_xprime(f, c.delta);
    std::vector<MemberRecord> out;
    for (Pattern p : {Pattern::constant, Pattern::xpp_only}) {
      auto m = record(n, seed);
      m.denominator = fs;
      const auto a = random_rough_coefficients(g, c.nu, p, seed);
      if (auto sol = guarded_solve(m, [&] { return solve_elliptic_nondiv(a, f, solve_options(c)); })) {
        for (const auto& du : xprime_gradient(sol->u)) {
          m.numerator = std::max(m.numerator, seminorm_full(du, 1, c.delta, {}, c.margin));
          if (p == Pattern::xpp_only) m.control = std::max(m.control, seminorm_xpp_k(du, 1, c.delta, {}, c.margin));
        }
      }
      finish_member(m, f.max_abs());
      out.push_back(m);
    }
    // The a(t) branch runs on the plane: the contrast it checks does not need x'' depth.
    auto m = record(n, seed);
    const Grid gt = parabolic_box(2, 1, n);
    const auto ft = synthetic_rhs(gt, c.delta, data_seed(seed), RhsKind::rough_xpp).f;
    m.denominator = seminorm_xprime(ft, c.delta);
    const auto a = random_rough_coefficients(gt, c.nu, Pattern::t_only, seed);
    if (auto sol = guarded_solve(m, [&] {
          return solve_parabolic_nondiv(a, ft, GridFunction(spatial_grid(gt), 0.0), solve_options(c));
        })) {
      for (const auto& du : xprime_gradient(sol->u)) {
        const auto w = window(du);
        const double v = seminorm_full(w, 1, c.delta, {}, c.margin) +
                         seminorm_time_half(restrict_interior(w, c.margin), c.delta);
        m.numerator = std::max(m.numerator, v);
      }
    }
    finish_member(m, ft.max_abs());
    out.push_back(m);
    return out;
  });
  r.series = std::move(s);
  stability_verdicts(r, r.series[0], false);
  const auto& rough = r.series[1];
  r.check(rough.name + ": x''-part grows >= 2x", rough.control_growth >= 2.0, "growth " + fmt(rough.control_growth));
  stability_verdicts(r, r.series[2], false);
  return r;
}

// ---------------------------------------------------------------------------
// C1: mixed-derivative counterexample evaluated from closed forms

inline Report run_C1(const ExperimentConfig& c) {
  auto r = new_report(c);
  for (auto n : c.resolutions) require(n >= 4, "C1 resolutions are 1/h and must be at least 4");
  Series s = make_series("sup|u_xy|", "sup |u_xy| on the lattice ball", "sqrt(ln(1/h))", "sup(|u_xx|, |u_yy|)");
  std::vector<double> sxy, sxx, syy, g;
  for (auto inv_h : c.resolutions) {
    const double h = 1.0 / static_cast<double>(inv_h);
    const long R = static_cast<long>(std::floor(kMixedPlateau / h + 1e-9));
    double mxy = 0.0, mxx = 0.0, myy = 0.0;
    for (long i = -R; i <= R; ++i)
      for (long j = -R; j <= R; ++j) {
        if ((i == 0 && j == 0) || i * i + j * j > R * R) continue;
        const auto v = counterexample_mixed(i * h, j * h);
        mxy = std::max(mxy, std::abs(v.u_xy));
        mxx = std::max(mxx, std::abs(v.u_xx));
        myy = std::max(myy, std::abs(v.u_yy));
      }
    sxy.push_back(mxy);
    sxx.push_back(mxx);
    syy.push_back(myy);
    g.push_back(std::sqrt(std::log(static_cast<double>(inv_h))));
    auto m = record(inv_h, 0);
    m.numerator = mxy;
    m.denominator = g.back();
    m.ratio = mxy / g.back();
    m.control = std::max(mxx, myy);
    s.members.push_back(m);
  }
  aggregate(s, c.resolutions);
  r.series.push_back(s);
  // Least-squares fit sxy ~ k sqrt(ln(1/h)).
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    num += sxy[i] * g[i];
    den += g[i] * g[i];
  }
  const double k = num / den;
  double fit_dev = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) fit_dev = std::max(fit_dev, std::abs(sxy[i] / (k * g[i]) - 1.0));
  auto spread = [](const std::vector<double>& v) {
    return *std::max_element(v.begin(), v.end()) / *std::min_element(v.begin(), v.end()) - 1.0;
  };
  bool monotone = true;
  for (std::size_t i = 1; i < sxy.size(); ++i) monotone = monotone && sxy[i] > sxy[i - 1];
  const auto finest = c.resolutions.back();
  const auto coarse = std::find(c.resolutions.begin(), c.resolutions.end(), finest / 16);
  const bool has_coarse = finest % 16 == 0 && coarse != c.resolutions.end();
  const double growth = has_coarse ? sxy.back() / sxy[coarse - c.resolutions.begin()] : 0.0;
  r.metrics["sup_uxy"] = sxy;
  r.metrics["sup_uxx"] = sxx;
  r.metrics["sup_uyy"] = syy;
  r.metrics["sqrt_ln_inv_h"] = g;
  r.metrics["fit_coefficient"] = k;
  r.metrics["fit_max_relative_deviation"] = fit_dev;
  r.metrics["growth_vs_16x_coarser"] = growth;
  r.metrics["uxx_spread"] = spread(sxx);
  r.metrics["uyy_spread"] = spread(syy);
  r.check("sup|u_xy| increases monotonically", monotone, "values " + nlohmann::ordered_json(sxy).dump());
  r.check("finest >= 1.5x the 16x-coarser value", has_coarse && growth >= 1.5,
          has_coarse ? "growth " + fmt(growth) : "ladder lacks the 16x-coarser mesh");
  r.check("sup|u_xx|, sup|u_yy| vary <= 10%", spread(sxx) <= 0.1 && spread(syy) <= 0.1,
          "spreads " + fmt(spread(sxx)) + ", " + fmt(spread(syy)));
  r.check("sqrt(ln(1/h)) fit within 20%", fit_dev <= 0.2, "max deviation " + fmt(fit_dev));
  return r;
}

// ---------------------------------------------------------------------------
// C2: half-plane boundary counterexample, Laplace operator on [0, L] x [-L, L]

struct HalfPlaneRun {
  double L = 2.0;
  std::size_t inv_h = 128;
  std::vector<double> v_diag;  // v(eps, -eps)
  std::vector<double> v_edge;  // v(0, -eps)
  double delta_hat = 0.0;
  SolveReport report;
};

inline const std::vector<double>& halfplane_eps() {
  static const std::vector<double> e = {1.0 / 8, 1.0 / 16, 1.0 / 32};
  return e;
}

inline HalfPlaneRun halfplane_run(double L, std::size_t inv_h, const SolveOptions& opt) {
  const auto nx = static_cast<std::size_t>(std::lround(L * inv_h)) + 1;
  const Grid g = make_grid(2, 1, {{0.0, L}, {-L, L}}, {nx, 2 * nx - 1});
  const auto data = halfplane_counterexample_data(g);
  const auto a = CoefficientField::constant_matrix(g, Eigen::MatrixXd::Identity(2, 2), 1.0);
  const auto sol = solve_elliptic_nondiv(a, data.f, opt);
  const auto& u = sol.u;
  const double h = g.spacing(0);
  HalfPlaneRun run;
  run.L = L;
  run.inv_h = inv_h;
  run.report = sol.report;
  auto at = [&](long i, long j) { return u[g.flat(std::vector<std::size_t>{std::size_t(i), std::size_t(j)})]; };
  const long j0 = std::lround(L * inv_h);  // row of x^2 = 0
  for (double eps : halfplane_eps()) {
    const long k = std::lround(eps * inv_h);
    const long j = j0 - k;
    run.v_diag.push_back((at(k + 1, j) - 2 * at(k, j) + at(k - 1, j)) / (h * h));
    // On x^1 = 0 the tangential second difference sees the zero boundary data,
    // so v = f - D_22 u there.
    const double f0 = data.f[g.flat(std::vector<std::size_t>{0, std::size_t(j)})];
    run.v_edge.push_back(f0 - (at(0, j + 1) - 2 * at(0, j) + at(0, j - 1)) / (h * h));
  }
  run.delta_hat = *std::min_element(run.v_diag.begin(), run.v_diag.end());
  return run;
}

inline Report run_C2(const ExperimentConfig& c) {
  auto r = new_report(c);
  const auto base = c.resolutions.front(), fine = c.resolutions.back();
  for (auto n : {base, fine})
    require(n % 32 == 0 && n >= 128, "C2 needs 1/h divisible by 32 and at least 128 to resolve eps = 1/32 with 4 cells");
  const auto opt = solve_options(c);
  const std::vector<HalfPlaneRun> runs = {halfplane_run(2.0, base, opt), halfplane_run(2.0, fine, opt),
                                          halfplane_run(4.0, base, opt)};
  const std::vector<std::string> names = {"base", "refined", "doubled-box"};
  Series s = make_series("v(eps,-eps)", "v(eps,-eps)", "1", "v(0,-eps)");
  auto js = nlohmann::ordered_json::array();
  bool edge_zero = true, positive = true;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const auto& run = runs[k];
    for (std::size_t e = 0; e < halfplane_eps().size(); ++e) {
      auto m = record(run.inv_h, 0);
      m.numerator = run.v_diag[e];
      m.denominator = 1.0;
      m.ratio = run.v_diag[e];
      m.control = run.v_edge[e];
      m.iterations = run.report.iterations;
      m.factorizations = run.report.factorizations;
      m.note = names[k] + " L=" + fmt(run.L) + " eps=" + fmt(halfplane_eps()[e]);
      s.members.push_back(m);
      edge_zero = edge_zero && run.v_edge[e] == 0.0;
    }
    positive = positive && run.delta_hat > 0.0;
    js.push_back({{"variant", names[k]},
                  {"L", run.L},
                  {"inv_h", run.inv_h},
                  {"v_diag", run.v_diag},
                  {"v_edge", run.v_edge},
                  {"delta_hat", run.delta_hat},
                  {"backend", run.report.backend}});
  }
  r.series.push_back(s);
  r.metrics["eps"] = halfplane_eps();
  r.metrics["runs"] = js;
  const double d0 = runs[0].delta_hat;
  const double ref = d0 != 0.0 ? std::abs(runs[1].delta_hat / d0 - 1.0) : 1.0;
  const double box = d0 != 0.0 ? std::abs(runs[2].delta_hat / d0 - 1.0) : 1.0;
  r.metrics["refinement_change"] = ref;
  r.metrics["box_doubling_change"] = box;
  r.check("v(0,-eps) = 0 for every eps", edge_zero, "edge values " + js[0]["v_edge"].dump());
  r.check("delta_hat > 0", positive, "base delta_hat " + fmt(d0));
  r.check("delta_hat stable under refinement (<= 25%)", ref <= 0.25, "change " + fmt(ref));
  r.check("delta_hat stable under box doubling (<= 25%)", box <= 0.25, "change " + fmt(box));
  return r;
}

// ---------------------------------------------------------------------------
// L1: mollifier bounds on the synthetic cusp family

inline const std::vector<double>& lemma_deltas() {
  static const std::vector<double> d = {0.3, 0.5, 0.7};
  return d;
}

inline std::vector<double> eps_ladder(double h, double min_multiple) {
  std::vector<double> e;
  for (double eps = 0.125; eps >= min_multiple * h * (1 - 1e-12); eps *= 0.5) e.push_back(eps);
  return e;
}

inline void lemma_series(Series& s, const LemmaReport& lr, std::size_t n) {
  for (const auto& row : lr.rows) {
    auto m = record(n, 0);
    m.numerator = row.sup_error;
    m.denominator = std::pow(row.eps, lr.delta) * lr.seminorm_delta;
    m.ratio = row.error_ratio;
    m.control = row.first_ratio;
    m.note = "eps=" + fmt(row.eps);
    s.members.push_back(m);
  }
}

inline nlohmann::ordered_json lemma_json(const LemmaReport& lr) {
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : lr.rows)
    rows.push_back({{"eps", row.eps},
                    {"sup_error", row.sup_error},
                    {"first_ratio", row.first_ratio},
                    {"derivative_ratio", row.derivative_ratio},
                    {"error_ratio", row.error_ratio}});
  return {{"delta", lr.delta},
          {"parabolic", lr.parabolic},
          {"seminorm", lr.seminorm_delta},
          {"error_slope", lr.error_slope},
          {"first_ratio_variation", lr.first_ratio_variation},
          {"max_derivative_ratio", lr.max_derivative_ratio},
          {"rows", rows}};
}

// Partial check on resolutions.back() x' points; parabolic check on
// resolutions.front() x' points with tau = h^2 / 4 over [0, 1/16]. The time
// cusps only show their rate once eps^2 spans about 64 time steps.
inline Report run_L1(const ExperimentConfig& c) {
  auto r = new_report(c);
  const std::size_t np = c.resolutions.back(), nt_x = c.resolutions.front();
  require((np - 1) % 16 == 0 && (nt_x - 1) % 16 == 0, "L1 resolutions must satisfy (n - 1) % 16 == 0");
  auto all = nlohmann::ordered_json::array();
  for (double delta : lemma_deltas()) {
    const Grid g = make_grid(2, 1, {{-1.0, 1.0}, {-1.0, 1.0}}, {np, 9});
    const auto v = synthetic_cusp_family(g, delta, c.seed, RhsKind::rough_xpp).f;
    const auto lr = check_partial_mollifier(v, delta, 0, eps_ladder(g.spacing(0), 8.0), c.margin);
    Series s = make_series("partial d=" + fmt(delta), "sup|v - v^eps|", "eps^d [v]_{x',d}", "eps^{1-d} sup|D_{x'} v^eps| / [v]");
    lemma_series(s, lr, np);
    r.series.push_back(s);
    all.push_back(lemma_json(lr));
    r.check("partial d=" + fmt(delta) + ": slope within 0.05", std::abs(lr.error_slope - delta) <= 0.05,
            "slope " + fmt(lr.error_slope));
    r.check("partial d=" + fmt(delta) + ": derivative ratio varies <= 2x", lr.first_ratio_variation <= 2.0,
            "variation " + fmt(lr.first_ratio_variation));
  }
  for (double delta : lemma_deltas()) {
    const double h = 2.0 / static_cast<double>(nt_x - 1);
    const auto levels = static_cast<std::size_t>(std::lround(0.0625 / (h * h / 4))) + 1;
    const Grid g = make_grid(2, 1, {{-1.0, 1.0}, {-1.0, 1.0}}, {nt_x, 5}, Boundary::dirichlet_box,
                             TimeAxis{0.0, 0.0625, levels});
    const auto v = synthetic_rhs(g, delta, c.seed, RhsKind::time_dependent).f;
    const auto lr = check_parabolic_mollifier(v, delta, eps_ladder(h, 4.0), c.margin);
    Series s = make_series("parabolic d=" + fmt(delta), "sup|v - v^eps|", "eps^d [v]_{z',d/2,d}",
                           "eps^{1-d} sup|D_{x'} v^eps| / [v]");
    lemma_series(s, lr, nt_x);
    r.series.push_back(s);
    all.push_back(lemma_json(lr));
    r.check("parabolic d=" + fmt(delta) + ": slope within 0.05", std::abs(lr.error_slope - delta) <= 0.05,
            "slope " + fmt(lr.error_slope));
    r.check("parabolic d=" + fmt(delta) + ": derivative ratio varies <= 2x", lr.first_ratio_variation <= 2.0,
            "variation " + fmt(lr.first_ratio_variation));
  }
  r.metrics["checks"] = all;
  return r;
}

// ---------------------------------------------------------------------------
// Q1: Campanato quotient against the partial seminorm

inline Report run_Q1(const ExperimentConfig& c) {
  auto r = new_report(c);
  for (auto n : c.resolutions)
    require((n - 1) % 32 == 0, "Q1 resolutions must satisfy (n - 1) % 32 == 0 so centers sit on the lattice");
  std::vector<Series> s;
  for (int k : {1, 2})
    s.push_back(make_series("k=" + std::to_string(k), "Campanato quotient", "[u]_{x',k+d}"));
  run_ensemble(c, s, [&](std::size_t n, std::uint64_t seed) {
    const Grid g = elliptic_box(c, n);
    const auto centers = coarse_centers(g, c.margin, 1.0 / 16);
    const auto radii = dyadic_radii(0.5, 4 * g.spacing(0));
    std::vector<MemberRecord> out;
    for (int k : {1, 2}) {
      auto m = record(n, seed);
      const auto u = synthetic_cusp_family(g, k + c.delta, seed, RhsKind::rough_xpp).f;
      m.numerator = campanato_quotient(u, k, c.delta, ClassTag::ptilde(k), centers, radii);
      m.denominator = seminorm_xprime_k(u, k, c.delta, {}, c.margin);
      finish_member(m, u.max_abs());
      out.push_back(m);
    }
    return out;
  });
  r.series = std::move(s);
  auto js = nlohmann::ordered_json::array();
  for (const auto& x : r.series) {
    std::vector<double> c1, c2;
    for (auto n : c.resolutions) {
      double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
      for (const auto& m : x.members)
        if (m.resolution == n && m.status == MemberStatus::ok) {
          lo = std::min(lo, m.ratio);
          hi = std::max(hi, m.ratio);
        }
      c1.push_back(std::isfinite(lo) ? lo : 0.0);
      c2.push_back(hi);
    }
    js.push_back({{"series", x.name}, {"c1", c1}, {"c2", c2}});
    auto within2 = [](double a, double b) { return a > 0.0 && b > 0.0 && std::max(a / b, b / a) <= 2.0; };
    const std::size_t L = c1.size();
    r.check(x.name + ": c1 > 0 and stable within 2x", within2(c1[L - 1], c1[L - 2]),
            "c1 " + fmt(c1[L - 2]) + " -> " + fmt(c1[L - 1]));
    r.check(x.name + ": c2 stable within 2x", within2(c2[L - 1], c2[L - 2]),
            "c2 " + fmt(c2[L - 2]) + " -> " + fmt(c2[L - 1]));
  }
  r.metrics["constants"] = js;
  return r;
}

// ---------------------------------------------------------------------------

inline Report run_experiment(const ExperimentConfig& c) {
  validate(c);
  const auto& id = c.experiment;
  if (id == "E1") return run_E1(c);
  if (id == "E2") return run_E2(c);
  if (id == "E3") return run_E3(c);
  if (id == "E4") return run_E4(c);
  if (id == "E5") return run_E5(c);
  if (id == "E6") return run_E6(c);
  if (id == "E7") return run_E7(c);
  if (id == "E8") return run_E8(c);
  if (id == "C1") return run_C1(c);
  if (id == "C2") return run_C2(c);
  if (id == "L1") return run_L1(c);
  if (id == "Q1") return run_Q1(c);
  throw LabError("unknown experiment id '" + id + "'");
}

}  // namespace schauder::harness
