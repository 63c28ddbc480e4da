/// @file equilibria.hpp
/// @brief Exact steady states, energy-Casimir critical-point conditions, the
/// Casimir/Bernoulli-function transform and Arnold stability reports.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "ism/diagnostics.hpp"
#include "ism/dynamics.hpp"
#include "ism/grid.hpp"
#include "ism/operators.hpp"

namespace ism {

// ---------------------------------------------------------------------------
// Exact steady states
// ---------------------------------------------------------------------------

/// u_S = (-z, 0), u_T = C z, theta_S = C x + G(z); steady for unit constants
/// with pressure p = C z x + int G.
struct EadyParams {
  double C = 1.0;
  std::function<double(double)> G;  ///< empty means G = 0
};

inline State eady_state(const Grid& grid, const EadyParams& params, const Constants& constants = {}) {
  if (!(constants == Constants{})) throw std::invalid_argument("Eady family requires f = s = g = theta0 = 1");
  State st(grid, constants);
  const double C = params.C;
  st.u_s.x = sample(grid, [](double, double z) { return -z; });
  st.u_t = sample(grid, [C](double, double z) { return C * z; });
  st.theta_s = sample(grid, [&](double x, double z) { return C * x + (params.G ? params.G(z) : 0.0); });
  return st;
}

/// A steady state together with the Casimir derivative Phi' for which it is
/// a critical point, and Phi'' as a function of q.
struct CriticalPoint {
  State state;
  std::function<double(double)> phi_prime;
  std::function<double(double)> phi_second;
};

/// Uniform-updraft equilibrium with linear potential vorticity, built from
/// the critical-point conditions with Phi'(q) = -alpha^2 q / 2 - alpha c0:
///   u_S = (0, -s alpha), u_T = z^2/(2 alpha) + x + c0,
///   theta_S = z^3/(6 alpha^2) + z (x + c0)/alpha,   q = -2 (x + c0)/alpha.
/// Steady for unit constants; like the Eady family it carries a uniform
/// normal flow through the z-walls.
inline CriticalPoint linear_pv_equilibrium(const Grid& grid, double alpha, double c0) {
  if (alpha == 0.0) throw std::invalid_argument("alpha must be non-zero");
  CriticalPoint eq;
  eq.state = State(grid);
  eq.state.u_s.z = ScalarField(grid, -alpha);
  eq.state.u_t = sample(grid, [=](double x, double z) { return z * z / (2.0 * alpha) + x + c0; });
  eq.state.theta_s =
      sample(grid, [=](double x, double z) { return z * z * z / (6.0 * alpha * alpha) + z * (x + c0) / alpha; });
  eq.phi_prime = [=](double q) { return -0.5 * alpha * alpha * q - alpha * c0; };
  eq.phi_second = [=](double) { return -0.5 * alpha * alpha; };
  return eq;
}

/// Eady state with G(z) = -m z^2 / 2, whose potential vorticity
/// q = 1 + C^2 + m z varies with height. It is a critical point for
///   Phi'(q) = -(q - 1 - C^2)^2 / (2 m^2),
/// since curl(Phi'(q) yhat) = (z, 0) = -u_S. Every field is at most
/// quadratic, so the discrete conditions hold to round-off.
inline CriticalPoint eady_critical_point(const Grid& grid, double C, double m) {
  if (m == 0.0) throw std::invalid_argument("m must be non-zero");
  CriticalPoint eq;
  eq.state = eady_state(grid, EadyParams{C, [m](double z) { return -0.5 * m * z * z; }});
  const double q0 = 1.0 + C * C;
  eq.phi_prime = [=](double q) { return -(q - q0) * (q - q0) / (2.0 * m * m); };
  eq.phi_second = [=](double q) { return -(q - q0) / (m * m); };
  return eq;
}

/// Sup norms of the three primitive tendencies.
inline std::array<double, 3> steady_residual(const State& st) {
  const Tendency k = rhs_primitive(st);
  return {k.du_s.max_abs(), k.du_t.max_abs(), k.dtheta_s.max_abs()};
}

// ---------------------------------------------------------------------------
// Critical-point conditions
// ---------------------------------------------------------------------------

struct EcResidual {
  double u_s = 0.0;       ///< |u_Se + s w|_inf
  double u_t = 0.0;       ///< |u_Te - w.grad(theta_Se)|_inf
  double gamma = 0.0;     ///< |gamma_S - w.(grad u_Te + f xhat)|_inf
  double a0_spread = 0.0; ///< max - min of Phi'(q_e) over wall nodes
};

/// w = curl(Phi'(q_e) yhat) = (-d/dz, d/dx) Phi'(q_e), then the residuals of
///   u_Se = -s w,  u_Te = w.grad(theta_Se),  gamma_S = w.(grad u_Te + f xhat).
/// On the simply connected rectangle the boundary constants collapse to one,
/// reported as the spread of Phi'(q_e) along the walls.
inline EcResidual ec_conditions_residual(const State& st, const std::function<double(double)>& phi_prime) {
  const Grid& g = st.grid();
  const Constants& c = st.constants;
  const ScalarField q = potential_vorticity(st);
  ScalarField a(g);
  for (std::size_t k = 0; k < q.size(); ++k) a[k] = phi_prime(q[k]);
  const VectorField w = perp_grad(a);
  const VectorField gth = grad(st.theta_s);
  const VectorField gut = grad(st.u_t);

  EcResidual r;
  double amin = std::numeric_limits<double>::infinity();
  double amax = -amin;
  for (int j = 0; j < g.nz(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      const std::size_t k = g.index(i, j);
      r.u_s = std::max(r.u_s, std::abs(st.u_s.x[k] + c.s * w.x[k]));
      r.u_s = std::max(r.u_s, std::abs(st.u_s.z[k] + c.s * w.z[k]));
      r.u_t = std::max(r.u_t, std::abs(st.u_t[k] - (w.x[k] * gth.x[k] + w.z[k] * gth.z[k])));
      const double gamma = c.buoyancy() * g.z(j);
      r.gamma = std::max(r.gamma, std::abs(gamma - (w.x[k] * (gut.x[k] + c.f) + w.z[k] * gut.z[k])));
      if (g.on_wall(i, j)) {
        amin = std::min(amin, a[k]);
        amax = std::max(amax, a[k]);
      }
    }
  }
  r.a0_spread = amax - amin;
  return r;
}

// ---------------------------------------------------------------------------
// Casimir from Bernoulli function
// ---------------------------------------------------------------------------

namespace detail {

/// Fornberg's finite-difference weights for derivatives 0..m at x0.
inline std::vector<std::vector<double>> fornberg_weights(double x0, const std::vector<double>& xs, int m) {
  const int n = static_cast<int>(xs.size());
  std::vector<std::vector<double>> c(m + 1, std::vector<double>(n, 0.0));
  double c1 = 1.0;
  double c4 = xs[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = xs[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = xs[i] - xs[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
        c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
      }
      for (int k = mn; k >= 1; --k) c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
      c[0][j] = c4 * c[0][j] / c3;
    }
    c1 = c2;
  }
  return c;
}

}  // namespace detail

struct PhiTable {
  std::vector<double> lambda;
  std::vector<double> phi;
  std::vector<double> dphi;
  std::vector<double> d2phi;
};

/// Phi(l) = l * ( int_{l_ref}^{l} K(t)/t^2 dt + C ), l_ref = lambda_grid[0].
/// The inner integral is accumulated with Simpson's rule on each grid
/// interval; Phi' and Phi'' are five-point finite differences of the table
/// (one-sided near the ends).
inline PhiTable phi_from_K(const std::function<double(double)>& K, double C_int, const std::vector<double>& lambda_grid) {
  const std::size_t n = lambda_grid.size();
  if (n < 5) throw std::invalid_argument("lambda grid needs at least five points");
  const bool positive = lambda_grid.front() > 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double l = lambda_grid[k];
    if (!std::isfinite(l) || l == 0.0 || (l > 0.0) != positive) {
      throw std::invalid_argument("lambda grid must not cross or touch zero");
    }
    if (k > 0 && !(l > lambda_grid[k - 1])) throw std::invalid_argument("lambda grid must be strictly increasing");
  }
  auto kernel = [&](double t) {
    const double v = K(t) / (t * t);
    if (!std::isfinite(v)) throw NumericalError("Bernoulli function is not finite at " + std::to_string(t));
    return v;
  };

  PhiTable tab;
  tab.lambda = lambda_grid;
  tab.phi.resize(n);
  double integral = 0.0;
  double f_prev = kernel(lambda_grid[0]);
  tab.phi[0] = lambda_grid[0] * C_int;
  for (std::size_t k = 1; k < n; ++k) {
    const double a = lambda_grid[k - 1];
    const double b = lambda_grid[k];
    const double fb = kernel(b);
    integral += (b - a) / 6.0 * (f_prev + 4.0 * kernel(0.5 * (a + b)) + fb);
    f_prev = fb;
    tab.phi[k] = b * (integral + C_int);
  }

  tab.dphi.resize(n);
  tab.d2phi.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t lo = std::min(k >= 2 ? k - 2 : 0, n - 5);
    std::vector<double> xs(lambda_grid.begin() + lo, lambda_grid.begin() + lo + 5);
    const auto w = detail::fornberg_weights(lambda_grid[k], xs, 2);
    double d1 = 0.0;
    double d2 = 0.0;
    for (std::size_t s = 0; s < 5; ++s) {
      d1 += w[1][s] * tab.phi[lo + s];
      d2 += w[2][s] * tab.phi[lo + s];
    }
    tab.dphi[k] = d1;
    tab.d2phi[k] = d2;
  }
  return tab;
}

// ---------------------------------------------------------------------------
// Stability
// ---------------------------------------------------------------------------

enum class Verdict { Stable, NotEstablished, Degenerate };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Stable: return "stable";
    case Verdict::NotEstablished: return "not-established";
    case Verdict::Degenerate: return "degenerate";
  }
  return "?";
}

/// Formal stability needs Phi'' > 0 on every non-degenerate node.
inline Verdict formal_verdict(double lambda1, double /*lambda2*/, double masked_fraction) {
  if (masked_fraction >= 1.0) return Verdict::Degenerate;
  return lambda1 > 0.0 ? Verdict::Stable : Verdict::NotEstablished;
}

/// Nonlinear stability needs 0 < lambda1 <= Phi'' <= lambda2 < inf.
inline Verdict nonlinear_verdict(double lambda1, double lambda2, double masked_fraction) {
  if (masked_fraction >= 1.0) return Verdict::Degenerate;
  return (lambda1 > 0.0 && std::isfinite(lambda2)) ? Verdict::Stable : Verdict::NotEstablished;
}

struct StabilityReport {
  ScalarField phi_pp;                 ///< Phi''(q_e); zero on masked nodes
  std::vector<bool> degenerate_mask;  ///< |grad q_e|^2 below threshold
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double masked_fraction = 0.0;
  double threshold = 0.0;
  Verdict formal = Verdict::Degenerate;
  Verdict nonlinear = Verdict::Degenerate;
};

/// Phi''(q_e) = (yhat x grad q_e) . u_Se / |grad q_e|^2, where
/// yhat x (a_x, a_z) = (a_z, -a_x) in slice components.
inline StabilityReport stability_report(const ScalarField& q_e, const VectorField& u_se) {
  const VectorField gq = grad(q_e);
  const std::size_t n = q_e.size();
  std::vector<double> mag2(n);
  double max_mag2 = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    mag2[k] = gq.x[k] * gq.x[k] + gq.z[k] * gq.z[k];
    max_mag2 = std::max(max_mag2, mag2[k]);
  }
  StabilityReport rep;
  rep.threshold = std::max(1e-8 * max_mag2, 1e-14);
  rep.phi_pp = ScalarField(q_e.grid());
  rep.degenerate_mask.assign(n, false);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  std::size_t masked = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (mag2[k] < rep.threshold) {
      rep.degenerate_mask[k] = true;
      ++masked;
      continue;
    }
    const double num = gq.z[k] * u_se.x[k] - gq.x[k] * u_se.z[k];
    rep.phi_pp[k] = num / mag2[k];
    lo = std::min(lo, rep.phi_pp[k]);
    hi = std::max(hi, rep.phi_pp[k]);
  }
  rep.masked_fraction = static_cast<double>(masked) / static_cast<double>(n);
  if (masked == n) {
    rep.lambda1 = rep.lambda2 = 0.0;
  } else {
    rep.lambda1 = lo;
    rep.lambda2 = hi;
  }
  rep.formal = formal_verdict(rep.lambda1, rep.lambda2, rep.masked_fraction);
  rep.nonlinear = nonlinear_verdict(rep.lambda1, rep.lambda2, rep.masked_fraction);
  return rep;
}

inline StabilityReport formal_stability_field(const State& st) {
  return stability_report(potential_vorticity(st), st.u_s);
}

// ---------------------------------------------------------------------------
// Perturbation norm
// ---------------------------------------------------------------------------

struct Perturbation {
  VectorField du_s;
  ScalarField du_t;
  ScalarField dtheta_s;
};

inline Perturbation difference(const State& a, const State& b) {
  return Perturbation{a.u_s - b.u_s, a.u_t - b.u_t, a.theta_s - b.theta_s};
}

/// int( |du_S|^2/2 + du_T^2/2 ) dV + lambda1 int dq^2 dV, with dq the full
/// potential vorticity of the perturbation fields.
inline double q_norm(const Perturbation& d, double lambda1, const Constants& c = {}) {
  if (!(lambda1 > 0.0)) throw std::invalid_argument("lambda1 must be positive");
  const Grid& g = d.du_t.grid();
  ScalarField e(g);
  for (std::size_t k = 0; k < e.size(); ++k) {
    e[k] = 0.5 * (d.du_s.x[k] * d.du_s.x[k] + d.du_s.z[k] * d.du_s.z[k]) + 0.5 * d.du_t[k] * d.du_t[k];
  }
  const ScalarField dq = curl2d(circulation_velocity(d.du_s, d.du_t, d.dtheta_s, c));
  return volume_integral(e) + lambda1 * volume_integral(multiply(dq, dq));
}

struct ExperimentConfig {
  double dt = 1e-3;
  int record_every = 1;
  double lambda1 = 1.0;
};

struct NormSample {
  double t;
  double norm;
};

/// Integrates from state_e + delta0 to T and records the perturbation norm
/// relative to state_e.
inline std::vector<NormSample> perturbation_experiment(const State& state_e, const Perturbation& delta0, double T,
                                                       const ExperimentConfig& cfg) {
  State st = state_e;
  st.u_s += delta0.du_s;
  st.u_t += delta0.du_t;
  st.theta_s += delta0.dtheta_s;
  std::vector<NormSample> out;
  out.push_back({st.t, q_norm(difference(st, state_e), cfg.lambda1, state_e.constants)});
  const double t_end = state_e.t + T;
  int step = 0;
  while (st.t < t_end - 1e-12 * T) {
    const double dt = std::min(cfg.dt, t_end - st.t);
    st = step_rk4(st, dt);
    ++step;
    if (step % cfg.record_every == 0 || st.t >= t_end - 1e-12 * T) {
      out.push_back({st.t, q_norm(difference(st, state_e), cfg.lambda1, state_e.constants)});
    }
  }
  return out;
}

}  // namespace ism
