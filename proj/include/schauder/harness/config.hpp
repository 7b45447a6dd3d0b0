#pragma once

// Experiment configuration: a JSON object with exactly the fields below.

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "schauder/error.hpp"

namespace schauder::harness {

inline constexpr std::array<const char*, 12> kExperimentIds = {"E1", "E2", "E3", "E4", "E5", "E6",
                                                               "E7", "E8", "C1", "C2", "L1", "Q1"};

inline constexpr std::array<const char*, 11> kConfigFields = {"experiment", "d",        "q",    "delta",
                                                              "nu",         "resolutions", "ensemble", "seed",
                                                              "margin",     "tol",      "out"};

struct ExperimentConfig {
  std::string experiment = "E1";
  int d = 2;
  int q = 1;
  double delta = 0.5;
  double nu = 0.2;
  // Points per axis for E*, L1 and Q1; inverse mesh widths 1/h for C1 and C2.
  std::vector<std::size_t> resolutions = {17, 33, 65, 129};
  int ensemble = 20;
  std::uint64_t seed = 7;
  double margin = 0.25;
  double tol = 1e-10;
  std::string out = "out";
};

inline bool known_experiment(const std::string& id) {
  return std::find(kExperimentIds.begin(), kExperimentIds.end(), id) != kExperimentIds.end();
}

inline void validate(const ExperimentConfig& c) {
  require(known_experiment(c.experiment), "unknown experiment id '" + c.experiment + "'");
  require(c.d >= 2 && c.d <= 3, "d must be 2 or 3");
  require(c.q >= 1 && c.q < c.d, "q must satisfy 1 <= q < d");
  require(c.delta > 0.0 && c.delta < 1.0, "delta must lie in (0, 1)");
  require(c.nu > 0.0 && c.nu <= 1.0, "nu must lie in (0, 1]");
  require(c.resolutions.size() >= 2, "at least two resolutions are needed to measure drift");
  for (std::size_t i = 1; i < c.resolutions.size(); ++i)
    require(c.resolutions[i] > c.resolutions[i - 1], "resolutions must be strictly increasing");
  require(c.resolutions.front() >= 5, "resolutions must be at least 5");
  require(c.ensemble >= 1, "ensemble must be at least 1");
  require(c.margin >= 0.0 && c.margin < 0.5, "margin must lie in [0, 0.5)");
  require(c.tol > 0.0 && c.tol < 1.0, "tol must lie in (0, 1)");
  require(!c.out.empty(), "out must be a non-empty path");
}

inline nlohmann::ordered_json to_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["experiment"] = c.experiment;
  j["d"] = c.d;
  j["q"] = c.q;
  j["delta"] = c.delta;
  j["nu"] = c.nu;
  j["resolutions"] = c.resolutions;
  j["ensemble"] = c.ensemble;
  j["seed"] = c.seed;
  j["margin"] = c.margin;
  j["tol"] = c.tol;
  j["out"] = c.out;
  return j;
}

namespace detail {

template <typename T>
T field(const nlohmann::json& j, const char* name) {
  try {
    return j.at(name).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw LabError(std::string("config field '") + name + "': " + e.what());
  }
}

}  // namespace detail

// Every field is required and nothing else is allowed.
inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  require(j.is_object(), "config must be a JSON object");
  for (const auto& [key, _] : j.items())
    require(std::find_if(kConfigFields.begin(), kConfigFields.end(), [&](const char* f) { return key == f; }) !=
                kConfigFields.end(),
            "unknown config field '" + key + "'");
  for (const char* f : kConfigFields) require(j.contains(f), std::string("missing config field '") + f + "'");
  ExperimentConfig c;
  c.experiment = detail::field<std::string>(j, "experiment");
  c.d = detail::field<int>(j, "d");
  c.q = detail::field<int>(j, "q");
  c.delta = detail::field<double>(j, "delta");
  c.nu = detail::field<double>(j, "nu");
  require(j.at("resolutions").is_array(), "config field 'resolutions' must be an array");
  c.resolutions.clear();
  for (const auto& r : j.at("resolutions")) {
    require(r.is_number_integer() && r.get<long long>() > 0, "resolutions must be positive integers");
    c.resolutions.push_back(r.get<std::size_t>());
  }
  require(j.at("ensemble").is_number_integer(), "config field 'ensemble' must be an integer");
  c.ensemble = detail::field<int>(j, "ensemble");
  require(j.at("seed").is_number_unsigned(), "config field 'seed' must be a nonnegative integer");
  c.seed = detail::field<std::uint64_t>(j, "seed");
  c.margin = detail::field<double>(j, "margin");
  c.tol = detail::field<double>(j, "tol");
  c.out = detail::field<std::string>(j, "out");
  validate(c);
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "cannot open config " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw LabError("config " + path + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

// Comma-separated list such as "33,65,129".
inline std::vector<std::size_t> parse_resolutions(const std::string& s) {
  std::vector<std::size_t> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const auto comma = s.find(',', pos);
    const auto tok = s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    require(!tok.empty() && tok.find_first_not_of("0123456789") == std::string::npos,
            "resolutions must be a comma-separated list of positive integers");
    out.push_back(std::stoul(tok));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace schauder::harness
