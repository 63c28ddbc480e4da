/// @file diagnostics.hpp
/// @brief Conserved quantities, discrete Sobolev norms and blow-up monitors.

#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ism/dynamics.hpp"
#include "ism/grid.hpp"
#include "ism/operators.hpp"

namespace ism {

/// h = int( |u_S|^2/2 + u_T^2/2 - (g/theta0) z theta_S ) dV
inline double energy(const State& st) {
  const Grid& g = st.grid();
  const double b = st.constants.buoyancy();
  ScalarField e(g);
  for (int j = 0; j < g.nz(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      const std::size_t k = g.index(i, j);
      const double ux = st.u_s.x[k];
      const double uz = st.u_s.z[k];
      e[k] = 0.5 * (ux * ux + uz * uz) + 0.5 * st.u_t[k] * st.u_t[k] - b * g.z(j) * st.theta_s[k];
    }
  }
  return volume_integral(e);
}

/// Circulation velocity v_S = s u_S - (u_T + f x) grad(theta_S).
inline VectorField circulation_velocity(const VectorField& u_s, const ScalarField& u_t, const ScalarField& theta,
                                        const Constants& c) {
  const Grid& g = u_t.grid();
  const VectorField gt = grad(theta);
  VectorField v(g);
  for (int j = 0; j < g.nz(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      const std::size_t k = g.index(i, j);
      const double a = u_t[k] + c.f * g.x(i);
      v.x[k] = c.s * u_s.x[k] - a * gt.x[k];
      v.z[k] = c.s * u_s.z[k] - a * gt.z[k];
    }
  }
  return v;
}

/// q = curl2d(v_S), same orientation as the slice vorticity.
inline ScalarField potential_vorticity(const State& st) {
  return curl2d(circulation_velocity(st.u_s, st.u_t, st.theta_s, st.constants));
}

inline double casimir(const State& st, const std::function<double(double)>& phi) {
  const ScalarField q = potential_vorticity(st);
  ScalarField v(q.grid());
  for (std::size_t k = 0; k < q.size(); ++k) {
    v[k] = phi(q[k]);
    if (!std::isfinite(v[k])) throw NumericalError("Casimir integrand is not finite");
  }
  return volume_integral(v);
}

/// Integral of q^order.
inline double casimir_moment(const State& st, int order) {
  return casimir(st, [order](double q) { return std::pow(q, order); });
}

/// sum over |alpha| <= order of int (D^alpha f)^2 dV, using the nested
/// operator stencils.
inline double sobolev_norm_sq(const ScalarField& f, int order) {
  if (order < 0) throw std::invalid_argument("Sobolev order must be non-negative");
  const Grid& g = f.grid();
  if (g.nx() < 2 * order + 5 || g.nz() < 2 * order + 5) {
    throw std::invalid_argument("grid too small for Sobolev order " + std::to_string(order));
  }
  double total = 0.0;
  ScalarField dxa = f;
  for (int a = 0; a <= order; ++a) {
    ScalarField d = dxa;
    for (int b = 0; b <= order - a; ++b) {
      total += volume_integral(multiply(d, d));
      if (b < order - a) d = ddz(d);
    }
    if (a < order) dxa = ddx(dxa);
  }
  return total;
}

inline double sobolev_norm_sq(const VectorField& u, int order) {
  return sobolev_norm_sq(u.x, order) + sobolev_norm_sq(u.z, order);
}

/// E(t) = |u_S|^2_{H^s} + |u_T|^2_{H^s} + |theta_S|^2_{H^s}
inline double E_of_t(const State& st, int order) {
  return sobolev_norm_sq(st.u_s, order) + sobolev_norm_sq(st.u_t, order) + sobolev_norm_sq(st.theta_s, order);
}

/// Max over nodes of |grad f|.
inline double sup_grad(const ScalarField& f) {
  const VectorField d = grad(f);
  double m = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) m = std::max(m, std::hypot(d.x[k], d.z[k]));
  return m;
}

inline double sup_grad(const VectorField& u) { return std::max(sup_grad(u.x), sup_grad(u.z)); }

/// Trapezoid increment of the time integral of |grad u_S|_inf.
inline double bkm_accumulate(double prev_integral, double prev_val, double new_val, double dt) {
  return prev_integral + 0.5 * dt * (prev_val + new_val);
}

struct DiagnosticsRecord {
  double t = 0.0;
  double energy_h = 0.0;
  std::vector<std::pair<int, double>> casimir;  ///< (moment order, value)
  double E_hs = 0.0;
  double sup_grad_uS = 0.0;
  double sup_grad_uT = 0.0;
  double sup_grad_theta = 0.0;
  double bkm_integral = 0.0;

  double casimir_moment(int order) const {
    for (const auto& [o, v] : casimir)
      if (o == order) return v;
    throw std::out_of_range("Casimir moment not recorded");
  }
};

/// Instantaneous diagnostics for one snapshot. The BKM integral is carried
/// over from prev (if any) with a trapezoid increment.
inline DiagnosticsRecord make_record(const State& st, int s_order, const DiagnosticsRecord* prev = nullptr) {
  DiagnosticsRecord r;
  r.t = st.t;
  r.energy_h = energy(st);
  const ScalarField q = potential_vorticity(st);
  ScalarField q2 = multiply(q, q);
  r.casimir = {{1, volume_integral(q)}, {2, volume_integral(q2)}};
  r.E_hs = E_of_t(st, s_order);
  r.sup_grad_uS = sup_grad(st.u_s);
  r.sup_grad_uT = sup_grad(st.u_t);
  r.sup_grad_theta = sup_grad(st.theta_s);
  r.bkm_integral = prev ? bkm_accumulate(prev->bkm_integral, prev->sup_grad_uS, r.sup_grad_uS, st.t - prev->t) : 0.0;
  return r;
}

struct GronwallReport {
  double M = 0.0;               ///< max of the ratio series
  std::size_t argmax = 0;       ///< index where M is attained
  std::vector<double> ratios;   ///< r(t) per record
  bool degenerate = false;      ///< initial gradient was zero and replaced by a floor
  double init_grad = 0.0;       ///< value actually used
};

/// Ratio of |grad u_T| + |grad theta| to the envelope
/// init_grad * exp(int_0^t (|grad u_S| + 1)).
inline GronwallReport gronwall_check(const std::vector<DiagnosticsRecord>& series, double init_grad) {
  if (series.empty()) throw std::invalid_argument("gronwall_check needs at least one record");
  for (std::size_t k = 1; k < series.size(); ++k) {
    if (!(series[k].t >= series[k - 1].t)) throw std::invalid_argument("records are not ordered in time");
  }
  GronwallReport rep;
  rep.init_grad = init_grad;
  if (!(init_grad > 0.0)) {
    rep.degenerate = true;
    rep.init_grad = std::numeric_limits<double>::epsilon();
  }
  const double t0 = series.front().t;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& r = series[k];
    const double envelope = rep.init_grad * std::exp(r.bkm_integral + (r.t - t0));
    const double ratio = (r.sup_grad_uT + r.sup_grad_theta) / envelope;
    rep.ratios.push_back(ratio);
    if (k == 0 || ratio > rep.M) {
      rep.M = ratio;
      rep.argmax = k;
    }
  }
  return rep;
}

struct PressureEstimate {
  double lhs = 0.0;  ///< |grad p|_{H^s}
  double rhs = 0.0;  ///< |u_S|_{H^s} |u_S|_{W^{1,inf}} + |u_T|_{H^s} + |theta_S|_{H^s}
  double ratio = 0.0;
  bool exact_zero = false;
};

/// Both sides of the pressure estimate for one state.
inline PressureEstimate pressure_estimate_check(const State& st, int order) {
  if (order < 3) throw std::invalid_argument("pressure estimate needs Sobolev order >= 3");
  const VectorField gp = grad(pressure_solve(st));
  PressureEstimate pe;
  pe.lhs = std::sqrt(sobolev_norm_sq(gp, order));
  const double w1inf = std::max(st.u_s.max_abs(), sup_grad(st.u_s));
  pe.rhs = std::sqrt(sobolev_norm_sq(st.u_s, order)) * w1inf + std::sqrt(sobolev_norm_sq(st.u_t, order)) +
           std::sqrt(sobolev_norm_sq(st.theta_s, order));
  if (pe.rhs == 0.0) {
    pe.exact_zero = true;
    pe.ratio = 0.0;
  } else {
    pe.ratio = pe.lhs / pe.rhs;
  }
  return pe;
}

}  // namespace ism
