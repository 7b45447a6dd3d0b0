#pragma once

// Estimate reports: per-member measurements, per-resolution aggregates and
// verdicts that are computed only from numbers stored in the report itself.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"

#include "schauder/harness/config.hpp"

namespace schauder::harness {

enum class MemberStatus { ok, degenerate_data, solver_failure };

inline const char* to_string(MemberStatus s) {
  switch (s) {
    case MemberStatus::ok: return "ok";
    case MemberStatus::degenerate_data: return "degenerate-data";
    case MemberStatus::solver_failure: return "solver-failure";
  }
  return "?";
}

struct MemberRecord {
  std::uint64_t seed = 0;
  std::size_t resolution = 0;
  double numerator = 0.0;    // seminorm of the solution
  double denominator = 0.0;  // seminorm of the data (or the combined bound)
  double ratio = 0.0;        // numerator / denominator, 0 unless status == ok
  double control = 0.0;      // paired quantity expected to blow up (0 if none)
  MemberStatus status = MemberStatus::ok;
  long iterations = 0;
  long factorizations = 0;
  std::string note;
};

// Denominators below this fraction of the numerator scale never form a ratio.
inline constexpr double kDegenerateFraction = 1e-12;

inline void finish_member(MemberRecord& m, double data_scale) {
  if (m.status == MemberStatus::solver_failure) {
    m.ratio = 0.0;
    return;
  }
  const double scale = std::max({m.numerator, data_scale, std::numeric_limits<double>::min()});
  if (!(m.denominator > kDegenerateFraction * scale)) {
    m.status = MemberStatus::degenerate_data;
    m.ratio = 0.0;
    return;
  }
  m.ratio = m.numerator / m.denominator;
}

struct Aggregate {
  std::size_t resolution = 0;
  std::size_t used = 0;  // members with status ok
  double max_ratio = 0.0;
  double median_ratio = 0.0;
  double max_control = 0.0;
  double median_control = 0.0;
};

struct Series {
  std::string name;
  std::string numerator;
  std::string denominator;
  std::string control;  // empty when the series has no control quantity
  std::vector<MemberRecord> members;
  std::vector<Aggregate> aggregates;
  double drift = 0.0;           // max ratio at finest / at next finest
  double control_growth = 0.0;  // max control at finest / at coarsest
};

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Order-independent: members are grouped by resolution and reduced with max / median.
inline void aggregate(Series& s, const std::vector<std::size_t>& resolutions) {
  s.aggregates.clear();
  for (std::size_t n : resolutions) {
    Aggregate a;
    a.resolution = n;
    std::vector<double> r, c;
    for (const auto& m : s.members)
      if (m.resolution == n && m.status == MemberStatus::ok) {
        r.push_back(m.ratio);
        c.push_back(m.control);
      }
    a.used = r.size();
    if (!r.empty()) {
      a.max_ratio = *std::max_element(r.begin(), r.end());
      a.max_control = *std::max_element(c.begin(), c.end());
    }
    a.median_ratio = median(r);
    a.median_control = median(c);
    s.aggregates.push_back(a);
  }
  s.drift = 0.0;
  s.control_growth = 0.0;
  if (s.aggregates.size() >= 2) {
    const auto& fin = s.aggregates.back();
    const auto& prev = s.aggregates[s.aggregates.size() - 2];
    if (prev.max_ratio > 0.0) s.drift = fin.max_ratio / prev.max_ratio;
    if (s.aggregates.front().max_control > 0.0) s.control_growth = fin.max_control / s.aggregates.front().max_control;
  }
}

inline const Series* find_series(const std::vector<Series>& all, const std::string& name) {
  for (const auto& s : all)
    if (s.name == name) return &s;
  return nullptr;
}

struct Verdict {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct Report {
  std::string experiment;
  ExperimentConfig config;
  std::vector<Series> series;
  nlohmann::ordered_json metrics = nlohmann::ordered_json::object();
  std::vector<Verdict> verdicts;

  bool passed() const {
    return !verdicts.empty() && std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
  }
  void check(std::string name, bool pass, std::string detail) {
    verdicts.push_back({std::move(name), pass, std::move(detail)});
  }
};

// |drift - 1| <= tol, i.e. the finest max ratio stays within tol of the next.
inline bool drift_within(double drift, double tol) { return drift > 0.0 && std::abs(drift - 1.0) <= tol; }

inline std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

// Standard verdicts for one series: finite ratios, every resolution usable,
// drift within 25%, and (optionally) control growth of at least 2x.
inline void stability_verdicts(Report& r, const Series& s, bool with_control) {
  bool finite = true, usable = true;
  for (const auto& a : s.aggregates) {
    finite = finite && std::isfinite(a.max_ratio) && std::isfinite(a.median_ratio);
    usable = usable && a.used > 0;
  }
  r.check(s.name + ": ratios finite", finite && usable,
          usable ? "every resolution has usable members" : "a resolution has no usable member");
  r.check(s.name + ": drift <= 25%", drift_within(s.drift, 0.25), "drift " + fmt(s.drift));
  if (with_control)
    r.check(s.name + ": control grows >= 2x", s.control_growth >= 2.0, "growth " + fmt(s.control_growth));
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::ordered_json to_json(const MemberRecord& m) {
  nlohmann::ordered_json j;
  j["seed"] = m.seed;
  j["resolution"] = m.resolution;
  j["numerator"] = m.numerator;
  j["denominator"] = m.denominator;
  j["ratio"] = m.ratio;
  j["control"] = m.control;
  j["status"] = to_string(m.status);
  j["iterations"] = m.iterations;
  j["factorizations"] = m.factorizations;
  j["note"] = m.note;
  return j;
}

inline nlohmann::ordered_json to_json(const Series& s) {
  nlohmann::ordered_json j;
  j["name"] = s.name;
  j["numerator"] = s.numerator;
  j["denominator"] = s.denominator;
  j["control"] = s.control;
  auto ag = nlohmann::ordered_json::array();
  for (const auto& a : s.aggregates)
    ag.push_back({{"resolution", a.resolution},
                  {"used", a.used},
                  {"max_ratio", a.max_ratio},
                  {"median_ratio", a.median_ratio},
                  {"max_control", a.max_control},
                  {"median_control", a.median_control}});
  j["aggregates"] = ag;
  j["drift"] = s.drift;
  j["control_growth"] = s.control_growth;
  auto ms = nlohmann::ordered_json::array();
  for (const auto& m : s.members) ms.push_back(to_json(m));
  j["members"] = ms;
  return j;
}

inline nlohmann::ordered_json to_json(const Report& r) {
  nlohmann::ordered_json j;
  j["experiment"] = r.experiment;
  // The output directory is left out so reports compare equal wherever they land.
  auto cfg = to_json(r.config);
  cfg.erase("out");
  j["config"] = cfg;
  auto ss = nlohmann::ordered_json::array();
  for (const auto& s : r.series) ss.push_back(to_json(s));
  j["series"] = ss;
  j["metrics"] = r.metrics;
  auto vs = nlohmann::ordered_json::array();
  for (const auto& v : r.verdicts) vs.push_back({{"name", v.name}, {"pass", v.pass}, {"detail", v.detail}});
  j["verdicts"] = vs;
  j["passed"] = r.passed();
  return j;
}

inline MemberStatus member_status_from_string(const std::string& s) {
  if (s == "ok") return MemberStatus::ok;
  if (s == "degenerate-data") return MemberStatus::degenerate_data;
  if (s == "solver-failure") return MemberStatus::solver_failure;
  throw LabError("unknown member status '" + s + "'");
}

inline Report report_from_json(const nlohmann::ordered_json& j) {
  Report r;
  r.experiment = j.at("experiment").get<std::string>();
  auto cfg = nlohmann::json::parse(j.at("config").dump());
  if (!cfg.contains("out")) cfg["out"] = ExperimentConfig{}.out;
  r.config = config_from_json(cfg);
  for (const auto& sj : j.at("series")) {
    Series s;
    s.name = sj.at("name").get<std::string>();
    s.numerator = sj.at("numerator").get<std::string>();
    s.denominator = sj.at("denominator").get<std::string>();
    s.control = sj.at("control").get<std::string>();
    for (const auto& a : sj.at("aggregates"))
      s.aggregates.push_back({a.at("resolution").get<std::size_t>(), a.at("used").get<std::size_t>(),
                              a.at("max_ratio").get<double>(), a.at("median_ratio").get<double>(),
                              a.at("max_control").get<double>(), a.at("median_control").get<double>()});
    s.drift = sj.at("drift").get<double>();
    s.control_growth = sj.at("control_growth").get<double>();
    for (const auto& mj : sj.at("members")) {
      MemberRecord m;
      m.seed = mj.at("seed").get<std::uint64_t>();
      m.resolution = mj.at("resolution").get<std::size_t>();
      m.numerator = mj.at("numerator").get<double>();
      m.denominator = mj.at("denominator").get<double>();
      m.ratio = mj.at("ratio").get<double>();
      m.control = mj.at("control").get<double>();
      m.status = member_status_from_string(mj.at("status").get<std::string>());
      m.iterations = mj.at("iterations").get<long>();
      m.factorizations = mj.at("factorizations").get<long>();
      m.note = mj.at("note").get<std::string>();
      s.members.push_back(m);
    }
    r.series.push_back(std::move(s));
  }
  r.metrics = j.at("metrics");
  for (const auto& v : j.at("verdicts"))
    r.verdicts.push_back({v.at("name").get<std::string>(), v.at("pass").get<bool>(), v.at("detail").get<std::string>()});
  return r;
}

}  // namespace schauder::harness
