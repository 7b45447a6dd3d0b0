#pragma once

// Output files: report.json (full structure), members.csv (one row per member
// per resolution) and small hand-written SVG plots.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "schauder/harness/report.hpp"

namespace schauder::harness {

inline std::string report_json_text(const Report& r) { return to_json(r).dump(2) + "\n"; }

namespace detail {

inline std::string num17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// RFC 4180 quoting when needed.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

}  // namespace detail

inline std::string members_csv_text(const Report& r) {
  std::ostringstream os;
  os << "experiment,series,seed,resolution,numerator,denominator,ratio,control,status,iterations,factorizations,note\n";
  for (const auto& s : r.series)
    for (const auto& m : s.members)
      os << r.experiment << ',' << detail::csv_field(s.name) << ',' << m.seed << ',' << m.resolution << ','
         << detail::num17(m.numerator) << ',' << detail::num17(m.denominator) << ',' << detail::num17(m.ratio) << ','
         << detail::num17(m.control) << ',' << to_string(m.status) << ',' << m.iterations << ','
         << m.factorizations << ',' << detail::csv_field(m.note) << '\n';
  return os.str();
}

struct Curve {
  std::string label;
  std::vector<double> x, y;
};

// Line plot with optional log axes; non-positive values are skipped on log axes.
inline std::string svg_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                            const std::vector<Curve>& curves, bool logx, bool logy) {
  const double W = 640, H = 420, L = 70, R = 170, T = 40, B = 50;
  auto tx = [&](double v) { return logx ? std::log10(v) : v; };
  auto ty = [&](double v) { return logy ? std::log10(v) : v; };
  auto usable = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!logx || x > 0) && (!logy || y > 0);
  };
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& c : curves)
    for (std::size_t i = 0; i < c.x.size(); ++i)
      if (usable(c.x[i], c.y[i])) {
        x0 = std::min(x0, tx(c.x[i]));
        x1 = std::max(x1, tx(c.x[i]));
        y0 = std::min(y0, ty(c.y[i]));
        y1 = std::max(y1, ty(c.y[i]));
      }
  if (!(x0 <= x1)) x0 = 0, x1 = 1;
  if (!(y0 <= y1)) y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;
  auto px = [&](double v) { return L + (tx(v) - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double v) { return H - B - (ty(v) - y0) / (y1 - y0) * (H - T - B); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  std::ostringstream os;
  char buf[160];
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
     << ' ' << H << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << detail::xml_escape(title)
     << "</text>\n";
  std::snprintf(buf, sizeof buf, "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" stroke=\"black\"/>\n",
                L, T, W - L - R, H - T - B);
  os << buf;
  auto tick_label = [&](double v, bool lg) {
    std::snprintf(buf, sizeof buf, "%.3g", lg ? std::pow(10.0, v) : v);
    return std::string(buf);
  };
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4, yv = y0 + (y1 - y0) * k / 4;
    const double xp = L + (W - L - R) * k / 4, yp = H - B - (H - T - B) * k / 4;
    os << "<text x=\"" << xp << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\" font-size=\"11\">"
       << tick_label(xv, logx) << "</text>\n";
    os << "<text x=\"" << L - 6 << "\" y=\"" << yp + 4 << "\" text-anchor=\"end\" font-size=\"11\">"
       << tick_label(yv, logy) << "</text>\n";
  }
  os << "<text x=\"" << L + (W - L - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"12\">"
     << detail::xml_escape(xlabel + (logx ? " (log)" : "")) << "</text>\n";
  os << "<text x=\"16\" y=\"" << T + (H - T - B) / 2 << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
     << T + (H - T - B) / 2 << ")\">" << detail::xml_escape(ylabel + (logy ? " (log)" : "")) << "</text>\n";
  for (std::size_t c = 0; c < curves.size(); ++c) {
    const char* col = colors[c % 6];
    std::string pts;
    for (std::size_t i = 0; i < curves[c].x.size(); ++i)
      if (usable(curves[c].x[i], curves[c].y[i])) {
        std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(curves[c].x[i]), py(curves[c].y[i]));
        pts += buf;
        std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"%s\"/>\n", px(curves[c].x[i]),
                      py(curves[c].y[i]), col);
        os << buf;
      }
    if (!pts.empty()) pts.pop_back();
    os << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"" << pts << "\"/>\n";
    const double ly = T + 14 + 18.0 * static_cast<double>(c);
    os << "<line x1=\"" << W - R + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << W - R + 30 << "\" y2=\"" << ly - 4
       << "\" stroke=\"" << col << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << W - R + 35 << "\" y=\"" << ly << "\" font-size=\"11\">"
       << detail::xml_escape(curves[c].label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

// Plots for a report: max ratio vs h for ensemble experiments, the mixed
// derivative against sqrt(ln(1/h)) for C1, error vs eps for L1.
inline std::vector<std::pair<std::string, std::string>> report_plots(const Report& r) {
  std::vector<std::pair<std::string, std::string>> out;
  const auto& id = r.experiment;
  if (id == "C1") {
    Curve data{"sup|u_xy|", {}, {}}, fit{"fit k sqrt(ln(1/h))", {}, {}};
    const double k = r.metrics.value("fit_coefficient", 0.0);
    for (const auto& m : r.series.at(0).members) {
      data.x.push_back(m.denominator);
      data.y.push_back(m.numerator);
      fit.x.push_back(m.denominator);
      fit.y.push_back(k * m.denominator);
    }
    out.emplace_back("uxy_vs_sqrtlog.svg", svg_plot("C1: mixed derivative growth", "sqrt(ln(1/h))", "sup |u_xy|",
                                                   {data, fit}, false, false));
    return out;
  }
  if (id == "C2") {
    std::vector<Curve> cs;
    for (const auto& m : r.series.at(0).members) {
      const std::string variant = m.note.substr(0, m.note.find(" eps="));
      if (cs.empty() || cs.back().label != variant) cs.push_back({variant, {}, {}});
      cs.back().x.push_back(std::stod(m.note.substr(m.note.find("eps=") + 4)));
      cs.back().y.push_back(m.numerator);
    }
    out.emplace_back("v_diag.svg", svg_plot("C2: v(eps,-eps)", "eps", "v(eps,-eps)", cs, true, false));
    return out;
  }
  if (id == "L1") {
    std::vector<Curve> cs;
    for (const auto& s : r.series) {
      Curve c{s.name, {}, {}};
      for (const auto& m : s.members) {
        c.x.push_back(std::stod(m.note.substr(4)));
        c.y.push_back(m.numerator);
      }
      cs.push_back(c);
    }
    out.emplace_back("mollifier_error.svg", svg_plot("L1: sup|v - v^eps|", "eps", "error", cs, true, true));
    return out;
  }
  std::vector<Curve> ratio, control;
  for (const auto& s : r.series) {
    Curve c{s.name, {}, {}}, k{s.name, {}, {}};
    for (const auto& a : s.aggregates) {
      const double h = 2.0 / static_cast<double>(a.resolution - 1);
      c.x.push_back(h);
      c.y.push_back(a.max_ratio);
      k.x.push_back(h);
      k.y.push_back(a.max_control);
    }
    ratio.push_back(c);
    if (!s.control.empty()) control.push_back(k);
  }
  out.emplace_back("ratio_vs_h.svg", svg_plot(id + ": max ratio", "h", "max ratio", ratio, true, true));
  if (!control.empty())
    out.emplace_back("control_vs_h.svg", svg_plot(id + ": max control", "h", "max control", control, true, true));
  return out;
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  require(static_cast<bool>(out), "cannot write " + p.string());
  out << text;
  require(static_cast<bool>(out), "write failed for " + p.string());
}

// Writes <dir>/report.json, <dir>/members.csv and the plots; returns the paths.
inline std::vector<std::filesystem::path> emit(const Report& r, const std::filesystem::path& dir, bool svg = true) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> files = {dir / "report.json", dir / "members.csv"};
  write_text(files[0], report_json_text(r));
  write_text(files[1], members_csv_text(r));
  if (svg)
    for (const auto& [name, text] : report_plots(r)) {
      files.push_back(dir / name);
      write_text(files.back(), text);
    }
  return files;
}

}  // namespace schauder::harness
