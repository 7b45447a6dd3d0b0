#pragma once

// On-disk format for grid functions and coefficient fields: a JSON sidecar
// with the lattice description next to a raw little-endian binary64 file in
// the in-memory row-major order (time slowest).

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"

#include "schauder/error.hpp"
#include "schauder/fields.hpp"
#include "schauder/lattice.hpp"

namespace schauder {

inline nlohmann::ordered_json grid_to_json(const Grid& g) {
  nlohmann::ordered_json j;
  j["d"] = g.dim();
  j["q"] = g.split();
  auto extents = nlohmann::ordered_json::array(), counts = nlohmann::ordered_json::array(),
       bounds = nlohmann::ordered_json::array();
  for (const auto& a : g.axes()) {
    extents.push_back({a.lo, a.hi});
    counts.push_back(a.points);
    bounds.push_back(to_string(a.boundary));
  }
  j["extents"] = extents;
  j["counts"] = counts;
  j["boundary"] = bounds;
  if (g.has_time())
    j["time_axis"] = {{"t0", g.time().t0}, {"t1", g.time().t1}, {"points", g.time().points}};
  else
    j["time_axis"] = nullptr;
  return j;
}

inline Grid grid_from_json(const nlohmann::json& j) {
  const int d = j.at("d").get<int>(), q = j.at("q").get<int>();
  const auto& ext = j.at("extents");
  const auto& cnt = j.at("counts");
  const auto& bnd = j.at("boundary");
  require(ext.size() == static_cast<std::size_t>(d) && cnt.size() == ext.size() && bnd.size() == ext.size(),
          "sidecar axis lists must have d entries");
  std::vector<AxisSpec> axes;
  for (int i = 0; i < d; ++i)
    axes.push_back({ext[i].at(0).get<double>(), ext[i].at(1).get<double>(), cnt[i].get<std::size_t>(),
                    boundary_from_string(bnd[i].get<std::string>())});
  std::optional<TimeAxis> time;
  if (!j.at("time_axis").is_null()) {
    const auto& t = j.at("time_axis");
    time = TimeAxis{t.at("t0").get<double>(), t.at("t1").get<double>(), t.at("points").get<std::size_t>()};
  }
  return Grid(d, q, std::move(axes), time);
}

namespace detail {

inline void write_le_doubles(const std::filesystem::path& path, std::span<const double> v) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), "cannot open " + path.string() + " for writing");
  for (double x : v) {
    auto bits = std::bit_cast<std::uint64_t>(x);
    unsigned char b[8];
    for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>((bits >> (8 * k)) & 0xFF);
    out.write(reinterpret_cast<const char*>(b), 8);
  }
  require(static_cast<bool>(out), "write failed for " + path.string());
}

inline std::vector<double> read_le_doubles(const std::filesystem::path& path, std::size_t count) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "cannot open " + path.string());
  std::vector<double> v(count);
  for (auto& x : v) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    require(in.gcount() == 8, "raw data file is shorter than the sidecar declares");
    std::uint64_t bits = 0;
    for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(b[k]) << (8 * k);
    x = std::bit_cast<double>(bits);
  }
  require(in.peek() == std::char_traits<char>::eof(), "raw data file is longer than the sidecar declares");
  return v;
}

}  // namespace detail

// Writes <stem>.json and <stem>.bin.
inline void save_grid_function(const GridFunction& u, const std::filesystem::path& stem) {
  auto meta = grid_to_json(u.grid());
  const std::filesystem::path bin = stem.string() + ".bin";
  meta["data"] = bin.filename().string();
  meta["encoding"] = "binary64-le";
  std::ofstream(stem.string() + ".json") << meta.dump(2) << '\n';
  detail::write_le_doubles(bin, u.values());
}

inline GridFunction load_grid_function(const std::filesystem::path& stem) {
  std::ifstream in(stem.string() + ".json");
  require(static_cast<bool>(in), "missing sidecar " + stem.string() + ".json");
  const auto meta = nlohmann::json::parse(in);
  require(meta.value("encoding", "") == "binary64-le", "unsupported encoding");
  const Grid g = grid_from_json(meta);
  const auto dir = stem.parent_path();
  return GridFunction(g, detail::read_le_doubles(dir / meta.at("data").get<std::string>(), g.size()));
}

// One grid-function file pair per (i, j) entry plus <stem>.coeff.json.
inline void save_coefficients(const CoefficientField& a, const std::filesystem::path& stem) {
  nlohmann::ordered_json j;
  j["pattern"] = to_string(a.pattern());
  j["nu"] = a.nu();
  j["K"] = a.hoelder_K;
  j["seed"] = a.seed;
  j["degenerate"] = a.degenerate;
  j["dim"] = a.dim();
  auto files = nlohmann::ordered_json::array();
  for (int r = 0; r < a.dim(); ++r)
    for (int c = 0; c < a.dim(); ++c) {
      const std::string name = stem.filename().string() + "_a" + std::to_string(r) + std::to_string(c);
      save_grid_function(a.entry_field(r, c), stem.parent_path() / name);
      files.push_back(name);
    }
  j["entries"] = files;
  std::ofstream(stem.string() + ".coeff.json") << j.dump(2) << '\n';
}

}  // namespace schauder
