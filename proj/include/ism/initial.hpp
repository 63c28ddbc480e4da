/// @file initial.hpp
/// @brief Seeded smooth initial data and initial-state construction from a
/// configuration.

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "ism/config.hpp"
#include "ism/equilibria.hpp"
#include "ism/grid.hpp"
#include "ism/operators.hpp"
#include "ism/snapshot.hpp"

namespace ism {

/// SplitMix64 (Steele, Lea, Flood). The stream is part of the
/// reproducibility contract for random_smooth initial data.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform on [-1, 1) from the top 53 bits.
  double uniform_pm1() { return 2.0 * static_cast<double>(next() >> 11) * 0x1.0p-53 - 1.0; }

 private:
  std::uint64_t state_;
};

/// Low-mode superposition, each field rescaled to sup-norm `amplitude`:
///   psi     = sum_{k,m=1..M} a_km sin(k pi x/Lx) sin(m pi z/Lz),  u_S = P(perp grad psi)
///   u_T     = sum_{k,m=0..M-1} b_km cos(k pi x/Lx) cos(m pi z/Lz)
///   theta_S = sum_{k,m=0..M-1} c_km cos(k pi x/Lx) cos(m pi z/Lz)
/// Coefficients are drawn in the order a, b, c, each k-major.
inline State random_smooth_state(const Grid& grid, std::uint64_t seed, double amplitude, int modes,
                                 const Constants& constants = {}) {
  SplitMix64 rng(seed);
  auto draw = [&] {
    std::vector<double> c(static_cast<std::size_t>(modes) * modes);
    for (double& v : c) v = rng.uniform_pm1();
    return c;
  };
  const std::vector<double> a = draw();
  const std::vector<double> b = draw();
  const std::vector<double> c = draw();
  const double kx = std::numbers::pi / grid.lx();
  const double kz = std::numbers::pi / grid.lz();

  VectorField w(grid);
  for (int j = 0; j < grid.nz(); ++j) {
    for (int i = 0; i < grid.nx(); ++i) {
      const double x = grid.x(i);
      const double z = grid.z(j);
      double ux = 0.0;
      double uz = 0.0;
      for (int k = 1; k <= modes; ++k) {
        for (int m = 1; m <= modes; ++m) {
          const double amp = a[(k - 1) * modes + (m - 1)];
          // psi = amp sin(k kx x) sin(m kz z); u = (-psi_z, psi_x)
          ux -= amp * m * kz * std::sin(k * kx * x) * std::cos(m * kz * z);
          uz += amp * k * kx * std::cos(k * kx * x) * std::sin(m * kz * z);
        }
      }
      w.x(i, j) = ux;
      w.z(i, j) = uz;
    }
  }
  auto cosine_series = [&](const std::vector<double>& coef) {
    return sample(grid, [&](double x, double z) {
      double v = 0.0;
      for (int k = 0; k < modes; ++k)
        for (int m = 0; m < modes; ++m) v += coef[k * modes + m] * std::cos(k * kx * x) * std::cos(m * kz * z);
      return v;
    });
  };
  auto normalise = [amplitude](auto& field) {
    const double m = field.max_abs();
    if (m > 0.0) field *= amplitude / m;
  };

  State st(grid, constants);
  st.u_s = leray_project(w).u;
  normalise(st.u_s);
  st.u_t = cosine_series(b);
  normalise(st.u_t);
  st.theta_s = cosine_series(c);
  normalise(st.theta_s);
  return st;
}

inline Constants constants_of(const SimConfig& cfg) { return Constants{cfg.f, cfg.s, cfg.g, cfg.theta0}; }

inline State initial_state(const SimConfig& cfg) {
  const Grid grid(cfg.nx, cfg.nz, cfg.Lx, cfg.Lz);
  const Constants constants = constants_of(cfg);
  if (const auto* e = std::get_if<EadyIC>(&cfg.initial_condition)) {
    EadyParams p;
    p.C = e->C;
    if (!e->g_poly.empty()) {
      p.G = [poly = e->g_poly](double z) {
        double v = 0.0;
        for (auto it = poly.rbegin(); it != poly.rend(); ++it) v = v * z + *it;
        return v;
      };
    }
    if (!(constants == Constants{})) throw ConfigError("eady initial condition requires f = s = g = theta0 = 1");
    return eady_state(grid, p, constants);
  }
  if (const auto* r = std::get_if<RandomSmoothIC>(&cfg.initial_condition)) {
    return random_smooth_state(grid, r->seed, r->amplitude, r->modes, constants);
  }
  const auto& f = std::get<FileIC>(cfg.initial_condition);
  return read_snapshot(f.path, grid);
}

}  // namespace ism
