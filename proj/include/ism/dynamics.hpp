/// @file dynamics.hpp
/// @brief Right-hand sides of the incompressible slice model in primitive and
/// vorticity form, the diagnostic pressure and classical RK4 stepping.
///
/// Primitive form (b = g/theta0):
///   du_S/dt     = P(-u_S.grad u_S + f u_T xhat + b theta_S zhat)
///   du_T/dt     = -u_S.grad u_T - f u_S.xhat - b s z
///   dtheta_S/dt = -u_S.grad theta_S - s u_T
/// The momentum tendency is projected at every stage, so the wall-normal
/// velocity on each wall is a constant of the motion.

#pragma once

#include <algorithm>
#include <cmath>

#include "ism/grid.hpp"
#include "ism/operators.hpp"

namespace ism {

struct Tendency {
  VectorField du_s;
  ScalarField du_t;
  ScalarField dtheta_s;
};

/// Vorticity-form state; the velocity is recovered from a Dirichlet
/// streamfunction so it is wall-tangent by construction.
struct VortState {
  ScalarField omega;
  ScalarField u_t;
  ScalarField theta_s;
  double t = 0.0;
  Constants constants;

  const Grid& grid() const { return omega.grid(); }
  bool all_finite() const { return omega.all_finite() && u_t.all_finite() && theta_s.all_finite() && std::isfinite(t); }
};

struct VortTendency {
  ScalarField domega;
  ScalarField du_t;
  ScalarField dtheta_s;
};

/// Body force B = f u_T xhat + b theta_S zhat.
inline VectorField body_force(const State& st) {
  const Constants& c = st.constants;
  VectorField B(st.grid());
  for (std::size_t k = 0; k < B.x.size(); ++k) {
    B.x[k] = c.f * st.u_t[k];
    B.z[k] = c.buoyancy() * st.theta_s[k];
  }
  return B;
}

/// Unprojected momentum forcing -u.grad(u) + B.
inline VectorField momentum_forcing(const State& st) {
  VectorField F = body_force(st);
  F.x -= advect(st.u_s, st.u_s.x);
  F.z -= advect(st.u_s, st.u_s.z);
  return F;
}

namespace detail {

/// Shared transverse-velocity and temperature tendencies.
inline void scalar_tendencies(const VectorField& u, const ScalarField& u_t, const ScalarField& theta,
                              const Constants& c, ScalarField& du_t, ScalarField& dtheta) {
  const Grid& g = u_t.grid();
  const ScalarField adv_t = advect(u, u_t);
  const ScalarField adv_th = advect(u, theta);
  du_t = ScalarField(g);
  dtheta = ScalarField(g);
  const double src = c.buoyancy() * c.s;
  for (int j = 0; j < g.nz(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      const std::size_t k = g.index(i, j);
      du_t[k] = -adv_t[k] - c.f * u.x[k] - src * g.z(j);
      dtheta[k] = -adv_th[k] - c.s * u_t[k];
    }
  }
}

}  // namespace detail

inline Tendency rhs_primitive(const State& st) {
  if (!st.all_finite()) throw NumericalError("non-finite state passed to rhs_primitive");
  Tendency out;
  out.du_s = leray_project(momentum_forcing(st)).u;
  detail::scalar_tendencies(st.u_s, st.u_t, st.theta_s, st.constants, out.du_t, out.dtheta_s);
  return out;
}

inline VectorField velocity_from_vorticity(const ScalarField& omega) { return perp_grad(poisson_dirichlet(omega)); }

/// Interior values of omega with wall values taken from the streamfunction.
/// psi vanishes along each wall, so there omega reduces to the wall-normal
/// second derivative, evaluated with the one-sided (2, -5, 4, -1) stencil;
/// at the corners both second derivatives vanish.
inline ScalarField with_wall_vorticity(const ScalarField& omega, const ScalarField& psi) {
  const Grid& g = omega.grid();
  const int nx = g.nx();
  const int nz = g.nz();
  const double ax = 1.0 / (g.dx() * g.dx());
  const double az = 1.0 / (g.dz() * g.dz());
  auto d2 = [](double f0, double f1, double f2, double f3) { return 2.0 * f0 - 5.0 * f1 + 4.0 * f2 - f3; };
  ScalarField out = omega;
  for (int j = 1; j < nz - 1; ++j) {
    out(0, j) = ax * d2(psi(0, j), psi(1, j), psi(2, j), psi(3, j));
    out(nx - 1, j) = ax * d2(psi(nx - 1, j), psi(nx - 2, j), psi(nx - 3, j), psi(nx - 4, j));
  }
  for (int i = 1; i < nx - 1; ++i) {
    out(i, 0) = az * d2(psi(i, 0), psi(i, 1), psi(i, 2), psi(i, 3));
    out(i, nz - 1) = az * d2(psi(i, nz - 1), psi(i, nz - 2), psi(i, nz - 3), psi(i, nz - 4));
  }
  for (int i : {0, nx - 1})
    for (int j : {0, nz - 1}) out(i, j) = 0.0;
  return out;
}

/// domega/dt = -u.grad(omega) + b d(theta)/dx - f d(u_T)/dz at interior
/// nodes; the wall tendency is zero because wall values are re-derived.
inline VortTendency rhs_vorticity(const VortState& vs) {
  if (!vs.all_finite()) throw NumericalError("non-finite state passed to rhs_vorticity");
  const Constants& c = vs.constants;
  const Grid& g = vs.grid();
  const ScalarField psi = poisson_dirichlet(vs.omega);
  const VectorField u = perp_grad(psi);
  VortTendency out;
  out.domega = advect(u, with_wall_vorticity(vs.omega, psi));
  out.domega *= -1.0;
  out.domega.axpy(c.buoyancy(), ddx(vs.theta_s));
  out.domega.axpy(-c.f, ddz(vs.u_t));
  for (int j = 0; j < g.nz(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      if (g.on_wall(i, j)) out.domega(i, j) = 0.0;
    }
  }
  detail::scalar_tendencies(u, vs.u_t, vs.theta_s, c, out.du_t, out.dtheta_s);
  return out;
}

/// Diagnostic pressure from the Neumann problem
///   lap(p) = div(B) - sum_ij D_j u_i D_i u_j,  dp/dn = B.n,
/// with B the body force. On flat walls the curvature term in
/// the boundary datum vanishes. Returned with zero mean.
inline NeumannSolution pressure_solve_detail(const State& st) {
  const VectorField B = body_force(st);
  ScalarField rhs = div(B);
  const ScalarField uxx = ddx(st.u_s.x);
  const ScalarField uxz = ddz(st.u_s.x);
  const ScalarField uzx = ddx(st.u_s.z);
  const ScalarField uzz = ddz(st.u_s.z);
  for (std::size_t k = 0; k < rhs.size(); ++k) {
    rhs[k] -= uxx[k] * uxx[k] + 2.0 * uxz[k] * uzx[k] + uzz[k] * uzz[k];
  }
  return poisson_neumann(rhs, WallData::normal_flux(B));
}

inline ScalarField pressure_solve(const State& st) { return pressure_solve_detail(st).p; }

namespace detail {

inline State add_scaled(const State& base, double a, const Tendency& k) {
  State s = base;
  s.u_s.axpy(a, k.du_s);
  s.u_t.axpy(a, k.du_t);
  s.theta_s.axpy(a, k.dtheta_s);
  return s;
}

inline VortState add_scaled(const VortState& base, double a, const VortTendency& k) {
  VortState s = base;
  s.omega.axpy(a, k.domega);
  s.u_t.axpy(a, k.du_t);
  s.theta_s.axpy(a, k.dtheta_s);
  return s;
}

}  // namespace detail

/// One classical RK4 step of the projected primitive system. The velocity
/// increment is re-projected after the final combination.
inline State step_rk4(const State& st, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("time step must be positive and finite");
  const Tendency k1 = rhs_primitive(st);
  const Tendency k2 = rhs_primitive(detail::add_scaled(st, 0.5 * dt, k1));
  const Tendency k3 = rhs_primitive(detail::add_scaled(st, 0.5 * dt, k2));
  const Tendency k4 = rhs_primitive(detail::add_scaled(st, dt, k3));

  State next = st;
  VectorField du = k1.du_s;
  du.axpy(2.0, k2.du_s);
  du.axpy(2.0, k3.du_s);
  du += k4.du_s;
  du *= dt / 6.0;
  if (!du.all_finite()) throw NumericalError("velocity update became non-finite");
  next.u_s += leray_project(du).u;

  const double w = dt / 6.0;
  for (std::size_t k = 0; k < next.u_t.size(); ++k) {
    next.u_t[k] += w * (k1.du_t[k] + 2.0 * k2.du_t[k] + 2.0 * k3.du_t[k] + k4.du_t[k]);
    next.theta_s[k] += w * (k1.dtheta_s[k] + 2.0 * k2.dtheta_s[k] + 2.0 * k3.dtheta_s[k] + k4.dtheta_s[k]);
  }
  next.t = st.t + dt;
  if (!next.all_finite()) throw NumericalError("state became non-finite at t = " + std::to_string(next.t));
  return next;
}

inline VortState step_rk4(const VortState& st, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("time step must be positive and finite");
  const VortTendency k1 = rhs_vorticity(st);
  const VortTendency k2 = rhs_vorticity(detail::add_scaled(st, 0.5 * dt, k1));
  const VortTendency k3 = rhs_vorticity(detail::add_scaled(st, 0.5 * dt, k2));
  const VortTendency k4 = rhs_vorticity(detail::add_scaled(st, dt, k3));
  VortState next = st;
  const double w = dt / 6.0;
  for (std::size_t k = 0; k < next.omega.size(); ++k) {
    next.omega[k] += w * (k1.domega[k] + 2.0 * k2.domega[k] + 2.0 * k3.domega[k] + k4.domega[k]);
    next.u_t[k] += w * (k1.du_t[k] + 2.0 * k2.du_t[k] + 2.0 * k3.du_t[k] + k4.du_t[k]);
    next.theta_s[k] += w * (k1.dtheta_s[k] + 2.0 * k2.dtheta_s[k] + 2.0 * k3.dtheta_s[k] + k4.dtheta_s[k]);
  }
  next.omega = with_wall_vorticity(next.omega, poisson_dirichlet(next.omega));
  next.t = st.t + dt;
  if (!next.all_finite()) throw NumericalError("vorticity state became non-finite at t = " + std::to_string(next.t));
  return next;
}

/// cfl * min(dx, dz) / (max(|u_S|, |u_T|) + 1e-12), capped at dt_max.
inline double cfl_dt(const State& st, double cfl, double dt_max) {
  if (!(cfl > 0.0 && cfl <= 1.0)) throw std::invalid_argument("cfl must lie in (0, 1]");
  const Grid& g = st.grid();
  const double speed = std::max(st.u_s.max_abs(), st.u_t.max_abs());
  const double dt = cfl * std::min(g.dx(), g.dz()) / (speed + 1e-12);
  return std::min(dt, dt_max);
}

}  // namespace ism
