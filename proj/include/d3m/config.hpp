#pragma once

// Plain-text key=value run configuration. Lengths are in wavelengths and
// angles in degrees; '#' starts a comment.

#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>

#include "d3m/dense_ldlt.hpp"
#include "d3m/mesh_fem.hpp"

namespace d3m {

struct SolverOptions {
  std::string ordering = "builtin";  // builtin | file:<path>
  double pivot_tol = kDefaultPivotTol;
};

struct RunConfig {
  std::string case_id;
  ProblemConfig problem;
  SolverOptions solver;
  std::string out_csv;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double to_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size()) throw ConfigError("config key '" + key + "': not a number: '" + value + "'");
  return out;
}

inline Index to_index(const std::string& key, const std::string& value) {
  const double v = to_double(key, value);
  if (v != std::floor(v)) throw ConfigError("config key '" + key + "': not an integer: '" + value + "'");
  return static_cast<Index>(v);
}

}  // namespace detail

// Reads key=value lines into a map; rejects malformed lines.
inline std::map<std::string, std::string> read_key_values(std::istream& is) {
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    }
    kv[detail::trim(line.substr(0, eq))] = detail::trim(line.substr(eq + 1));
  }
  return kv;
}

inline RunConfig parse_config(std::istream& is) {
  const auto kv = read_key_values(is);
  RunConfig rc;
  ProblemConfig& p = rc.problem;
  bool have_k = false, have_alpha = false;
  double k = 0.0, alpha_imag = 0.0;
  for (const auto& [key, value] : kv) {
    if (key == "wavelength") p.wavelength = detail::to_double(key, value);
    else if (key == "side_lambda") p.side_lambda = detail::to_double(key, value);
    else if (key == "ppw") p.ppw = detail::to_index(key, value);
    else if (key == "px") p.px = detail::to_index(key, value);
    else if (key == "py") p.py = detail::to_index(key, value);
    else if (key == "theta_inc_deg") p.theta_inc = detail::to_double(key, value) * kPi / 180.0;
    else if (key == "alpha_imag") { alpha_imag = detail::to_double(key, value); have_alpha = true; }
    else if (key == "k") { k = detail::to_double(key, value); have_k = true; }
    else if (key == "mu_r") p.mu_r = detail::to_double(key, value);
    else if (key == "eps_r") p.eps_r = detail::to_double(key, value);
    else if (key == "pivot_tol") rc.solver.pivot_tol = detail::to_double(key, value);
    else if (key == "ordering") rc.solver.ordering = value;
    else if (key == "out_csv") rc.out_csv = value;
    else if (key == "case_id") rc.case_id = value;
    else throw ConfigError("unknown config key '" + key + "'");
  }
  if (!(p.wavelength > 0.0)) throw ConfigError("wavelength must be positive");
  p.set_wavenumber(have_k ? k : 2.0 * kPi / p.wavelength);
  if (have_alpha) p.alpha = cplx(0.0, alpha_imag);
  if (rc.case_id.empty()) {
    std::ostringstream id;
    id << "side" << p.side_lambda << "_ppw" << p.ppw << "_" << p.px << "x" << p.py;
    rc.case_id = id.str();
  }
  return rc;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path);
  return parse_config(is);
}

}  // namespace d3m
