/// @file config.hpp
/// @brief Simulation configuration in a line-oriented key=value format.
///
///   # comment
///   nx=65
///   nz=65
///   Lx=1
///   Lz=1
///   t_end=1
///   cfl=0.5
///   initial_condition=eady(1)
///
/// Recognised keys: nx nz Lx Lz dt cfl dt_max t_end s_order snapshot_every
/// diagnostics_every initial_condition f s g theta0. Either dt or cfl may be
/// given, not both; with neither, cfl=0.5.
///
/// initial_condition is one of
///   eady(C[, g0, g1, ...])                  G(z) = g0 + g1 z + g2 z^2 + ...
///   random_smooth(seed=N, amplitude=A[, modes=M])   (positional also accepted)
///   file(path)

#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ism {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EadyIC {
  double C = 1.0;
  std::vector<double> g_poly;  ///< coefficients of G(z), lowest order first
};

struct RandomSmoothIC {
  std::uint64_t seed = 0;
  double amplitude = 0.1;
  int modes = 3;
};

struct FileIC {
  std::string path;
};

using InitialCondition = std::variant<EadyIC, RandomSmoothIC, FileIC>;

struct SimConfig {
  int nx = 0;
  int nz = 0;
  double Lx = 0.0;
  double Lz = 0.0;
  std::optional<double> dt;
  double cfl = 0.5;
  double dt_max = 1e-2;
  double t_end = 0.0;
  int s_order = 3;
  int snapshot_every = 0;     ///< 0: initial and final snapshot only
  int diagnostics_every = 1;
  InitialCondition initial_condition;
  double f = 1.0;
  double s = 1.0;
  double g = 1.0;
  double theta0 = 1.0;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::string at_line(int line, const std::string& msg) {
  return line > 0 ? "line " + std::to_string(line) + ": " + msg : msg;
}

inline double parse_real(std::string_view text, int line, const std::string& key) {
  const std::string s(trim(text));
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (s.empty() || used != s.size() || !std::isfinite(v)) {
    throw ConfigError(at_line(line, "'" + key + "' expects a finite real, got '" + s + "'"));
  }
  return v;
}

inline long long parse_integer(std::string_view text, int line, const std::string& key) {
  const std::string_view s = trim(text);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError(at_line(line, "'" + key + "' expects an integer, got '" + std::string(s) + "'"));
  }
  return v;
}

inline InitialCondition parse_initial_condition(std::string_view text, int line) {
  const std::string_view s = trim(text);
  const auto open = s.find('(');
  if (open == std::string_view::npos || s.back() != ')') {
    throw ConfigError(at_line(line, "initial_condition must look like name(args), got '" + std::string(s) + "'"));
  }
  const std::string name(trim(s.substr(0, open)));
  const std::string_view inner = s.substr(open + 1, s.size() - open - 2);

  if (name == "file") {
    const std::string path(trim(inner));
    if (path.empty()) throw ConfigError(at_line(line, "file() needs a path"));
    return FileIC{path};
  }

  std::vector<std::pair<std::string, std::string>> args;  // (keyword or "", value)
  if (!trim(inner).empty()) {
    std::size_t pos = 0;
    while (pos <= inner.size()) {
      const auto comma = inner.find(',', pos);
      const std::string_view item = trim(inner.substr(pos, comma == std::string_view::npos ? inner.npos : comma - pos));
      const auto eq = item.find('=');
      if (eq == std::string_view::npos) {
        args.emplace_back("", std::string(item));
      } else {
        args.emplace_back(std::string(trim(item.substr(0, eq))), std::string(trim(item.substr(eq + 1))));
      }
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
  }

  if (name == "eady") {
    EadyIC ic;
    std::size_t positional = 0;
    for (const auto& [k, v] : args) {
      if (k == "C" || (k.empty() && positional == 0)) {
        ic.C = parse_real(v, line, "eady C");
        if (k.empty()) ++positional;
      } else if (k.empty()) {
        ic.g_poly.push_back(parse_real(v, line, "eady G coefficient"));
        ++positional;
      } else {
        throw ConfigError(at_line(line, "eady() has no argument '" + k + "'"));
      }
    }
    if (args.empty()) throw ConfigError(at_line(line, "eady() needs the shear amplitude C"));
    return ic;
  }

  if (name == "random_smooth") {
    RandomSmoothIC ic;
    const char* order[] = {"seed", "amplitude", "modes"};
    std::size_t positional = 0;
    bool have_seed = false;
    bool have_amp = false;
    for (const auto& [k0, v] : args) {
      std::string k = k0;
      if (k.empty()) {
        if (positional >= 3) throw ConfigError(at_line(line, "random_smooth() takes at most three arguments"));
        k = order[positional++];
      }
      if (k == "seed") {
        const long long sd = parse_integer(v, line, "random_smooth seed");
        if (sd < 0) throw ConfigError(at_line(line, "random_smooth seed must be non-negative"));
        ic.seed = static_cast<std::uint64_t>(sd);
        have_seed = true;
      } else if (k == "amplitude") {
        ic.amplitude = parse_real(v, line, "random_smooth amplitude");
        if (!(ic.amplitude >= 0.0)) throw ConfigError(at_line(line, "random_smooth amplitude must be >= 0"));
        have_amp = true;
      } else if (k == "modes") {
        const long long m = parse_integer(v, line, "random_smooth modes");
        if (m < 1 || m > 64) throw ConfigError(at_line(line, "random_smooth modes must lie in [1, 64]"));
        ic.modes = static_cast<int>(m);
      } else {
        throw ConfigError(at_line(line, "random_smooth() has no argument '" + k + "'"));
      }
    }
    if (!have_seed || !have_amp) throw ConfigError(at_line(line, "random_smooth() needs seed and amplitude"));
    return ic;
  }

  throw ConfigError(at_line(line, "unknown initial condition '" + name + "'"));
}

}  // namespace detail

inline SimConfig parse_config(std::string_view text) {
  static const char* known[] = {"nx",     "nz",      "Lx",      "Lz",          "dt",
                                "cfl",    "dt_max",  "t_end",   "s_order",     "snapshot_every",
                                "diagnostics_every", "initial_condition", "f", "s", "g", "theta0"};
  std::map<std::string, std::pair<std::string, int>> entries;  // key -> (value, line)

  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view sv(raw);
    if (const auto hash = sv.find('#'); hash != std::string_view::npos) sv = sv.substr(0, hash);
    sv = detail::trim(sv);
    if (sv.empty()) continue;
    const auto eq = sv.find('=');
    if (eq == std::string_view::npos) throw ConfigError(detail::at_line(line, "expected key=value"));
    const std::string key(detail::trim(sv.substr(0, eq)));
    const std::string value(detail::trim(sv.substr(eq + 1)));
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ConfigError(detail::at_line(line, "unknown key '" + key + "'"));
    if (entries.count(key)) {
      throw ConfigError(detail::at_line(line, "duplicate key '" + key + "' (first set on line " +
                                                  std::to_string(entries[key].second) + ")"));
    }
    entries[key] = {value, line};
  }

  for (const char* req : {"nx", "nz", "Lx", "Lz", "t_end", "initial_condition"}) {
    if (!entries.count(req)) throw ConfigError(std::string("missing required key '") + req + "'");
  }
  if (entries.count("dt") && entries.count("cfl")) {
    throw ConfigError(detail::at_line(entries["cfl"].second, "both 'dt' (line " + std::to_string(entries["dt"].second) +
                                                                  ") and 'cfl' are set; give only one"));
  }

  SimConfig c;
  auto integer = [&](const char* key, int& dst) {
    if (auto it = entries.find(key); it != entries.end()) {
      const long long v = detail::parse_integer(it->second.first, it->second.second, key);
      if (v < INT32_MIN || v > INT32_MAX) throw ConfigError(detail::at_line(it->second.second, std::string(key) + " out of range"));
      dst = static_cast<int>(v);
    }
  };
  auto real = [&](const char* key, double& dst) {
    if (auto it = entries.find(key); it != entries.end()) dst = detail::parse_real(it->second.first, it->second.second, key);
  };
  auto line_of = [&](const char* key) { return entries.count(key) ? entries[key].second : 0; };
  auto require = [&](bool cond, const char* key, const std::string& msg) {
    if (!cond) throw ConfigError(detail::at_line(line_of(key), msg));
  };

  integer("nx", c.nx);
  integer("nz", c.nz);
  real("Lx", c.Lx);
  real("Lz", c.Lz);
  real("t_end", c.t_end);
  if (entries.count("dt")) {
    double dt = 0.0;
    real("dt", dt);
    c.dt = dt;
  }
  real("cfl", c.cfl);
  real("dt_max", c.dt_max);
  integer("s_order", c.s_order);
  integer("snapshot_every", c.snapshot_every);
  integer("diagnostics_every", c.diagnostics_every);
  real("f", c.f);
  real("s", c.s);
  real("g", c.g);
  real("theta0", c.theta0);
  c.initial_condition = detail::parse_initial_condition(entries["initial_condition"].first, line_of("initial_condition"));

  require(c.nx >= 9, "nx", "nx must be at least 9");
  require(c.nz >= 9, "nz", "nz must be at least 9");
  require(c.Lx > 0.0, "Lx", "Lx must be positive");
  require(c.Lz > 0.0, "Lz", "Lz must be positive");
  require(c.t_end > 0.0, "t_end", "t_end must be positive");
  if (c.dt) require(*c.dt > 0.0, "dt", "dt must be positive");
  require(c.cfl > 0.0 && c.cfl <= 1.0, "cfl", "cfl must lie in (0, 1]");
  require(c.dt_max > 0.0, "dt_max", "dt_max must be positive");
  require(c.s_order >= 0, "s_order", "s_order must be non-negative");
  require(c.nx >= 2 * c.s_order + 5 && c.nz >= 2 * c.s_order + 5, "s_order",
          "grid too small for s_order (need nx, nz >= 2*s_order + 5)");
  require(c.snapshot_every >= 0, "snapshot_every", "snapshot_every must be non-negative");
  require(c.diagnostics_every >= 1, "diagnostics_every", "diagnostics_every must be at least 1");
  require(c.theta0 != 0.0, "theta0", "theta0 must be non-zero");
  return c;
}

}  // namespace ism
