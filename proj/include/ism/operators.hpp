/// @file operators.hpp
/// @brief Finite-difference slice operators, transform-based Poisson solvers
/// and the discrete Leray projector.
///
/// Derivatives are second-order centred in the interior and second-order
/// one-sided in the wall-normal direction on the walls. Tangential
/// derivatives along a wall stay centred.

#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <numbers>
#include <tuple>
#include <vector>

#include "ism/grid.hpp"
#include "ism/transforms.hpp"

namespace ism {

// ---------------------------------------------------------------------------
// Stencils
// ---------------------------------------------------------------------------

inline ScalarField ddx(const ScalarField& f) {
  const Grid& g = f.grid();
  const int nx = g.nx();
  const double c = 1.0 / (2.0 * g.dx());
  ScalarField out(g);
  for (int j = 0; j < g.nz(); ++j) {
    out(0, j) = c * (-3.0 * f(0, j) + 4.0 * f(1, j) - f(2, j));
    for (int i = 1; i < nx - 1; ++i) out(i, j) = c * (f(i + 1, j) - f(i - 1, j));
    out(nx - 1, j) = c * (3.0 * f(nx - 1, j) - 4.0 * f(nx - 2, j) + f(nx - 3, j));
  }
  return out;
}

inline ScalarField ddz(const ScalarField& f) {
  const Grid& g = f.grid();
  const int nx = g.nx();
  const int nz = g.nz();
  const double c = 1.0 / (2.0 * g.dz());
  ScalarField out(g);
  for (int i = 0; i < nx; ++i) {
    out(i, 0) = c * (-3.0 * f(i, 0) + 4.0 * f(i, 1) - f(i, 2));
    out(i, nz - 1) = c * (3.0 * f(i, nz - 1) - 4.0 * f(i, nz - 2) + f(i, nz - 3));
  }
  for (int j = 1; j < nz - 1; ++j) {
    for (int i = 0; i < nx; ++i) out(i, j) = c * (f(i, j + 1) - f(i, j - 1));
  }
  return out;
}

inline VectorField grad(const ScalarField& f) { return VectorField(ddx(f), ddz(f)); }

inline ScalarField div(const VectorField& u) { return ddx(u.x) + ddz(u.z); }

/// Slice vorticity, d(u_z)/dx - d(u_x)/dz.
inline ScalarField curl2d(const VectorField& u) { return ddx(u.z) - ddz(u.x); }

/// (-d/dz, d/dx) applied to a streamfunction.
inline VectorField perp_grad(const ScalarField& psi) {
  ScalarField ux = ddz(psi);
  ux *= -1.0;
  return VectorField(std::move(ux), ddx(psi));
}

/// Convective derivative u . grad(f).
inline ScalarField advect(const VectorField& u, const ScalarField& f) {
  const ScalarField fx = ddx(f);
  const ScalarField fz = ddz(f);
  ScalarField out(f.grid());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = u.x[k] * fx[k] + u.z[k] * fz[k];
  return out;
}

/// Compact 5-point Laplacian at interior nodes; wall nodes are left at zero.
inline ScalarField laplacian_5pt(const ScalarField& f) {
  const Grid& g = f.grid();
  const double ax = 1.0 / (g.dx() * g.dx());
  const double az = 1.0 / (g.dz() * g.dz());
  ScalarField out(g);
  for (int j = 1; j < g.nz() - 1; ++j) {
    for (int i = 1; i < g.nx() - 1; ++i) {
      out(i, j) = ax * (f(i + 1, j) - 2.0 * f(i, j) + f(i - 1, j)) + az * (f(i, j + 1) - 2.0 * f(i, j) + f(i, j - 1));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Poisson solvers
// ---------------------------------------------------------------------------

/// Solves the 5-point problem lap(psi) = rhs at interior nodes with psi = 0 on
/// the walls, diagonalised by a 2D DST-I.
class PoissonDirichletSolver {
 public:
  explicit PoissonDirichletSolver(const Grid& grid)
      : grid_(grid), mx_(grid.nx() - 2), mz_(grid.nz() - 2), plan_(mz_, mx_, FFTW_RODFT00) {
    eig_x_.resize(mx_);
    eig_z_.resize(mz_);
    for (int k = 0; k < mx_; ++k) {
      eig_x_[k] = -(2.0 - 2.0 * std::cos(std::numbers::pi * (k + 1) / (grid.nx() - 1))) / (grid.dx() * grid.dx());
    }
    for (int m = 0; m < mz_; ++m) {
      eig_z_[m] = -(2.0 - 2.0 * std::cos(std::numbers::pi * (m + 1) / (grid.nz() - 1))) / (grid.dz() * grid.dz());
    }
    norm_ = 1.0 / (4.0 * (grid.nx() - 1) * (grid.nz() - 1));
  }

  const Grid& grid() const { return grid_; }

  /// Wall values of rhs are ignored.
  ScalarField solve(const ScalarField& rhs) const {
    if (!rhs.all_finite()) throw NumericalError("Dirichlet Poisson solve given non-finite data");
    std::vector<double> buf(static_cast<std::size_t>(mx_) * mz_);
    for (int j = 0; j < mz_; ++j)
      for (int i = 0; i < mx_; ++i) buf[j * mx_ + i] = rhs(i + 1, j + 1);
    plan_.execute(buf.data());
    for (int m = 0; m < mz_; ++m)
      for (int k = 0; k < mx_; ++k) buf[m * mx_ + k] *= norm_ / (eig_x_[k] + eig_z_[m]);
    plan_.execute(buf.data());
    ScalarField psi(grid_);
    for (int j = 0; j < mz_; ++j)
      for (int i = 0; i < mx_; ++i) psi(i + 1, j + 1) = buf[j * mx_ + i];
    return psi;
  }

 private:
  Grid grid_;
  int mx_;
  int mz_;
  detail::R2RPlan plan_;
  std::vector<double> eig_x_;
  std::vector<double> eig_z_;
  double norm_;
};

/// Outward normal derivative prescribed on the four walls. left/right have
/// nz entries (indexed by j), bottom/top have nx entries (indexed by i).
struct WallData {
  std::vector<double> left;
  std::vector<double> right;
  std::vector<double> bottom;
  std::vector<double> top;

  static WallData zeros(const Grid& g) {
    return WallData{std::vector<double>(g.nz(), 0.0), std::vector<double>(g.nz(), 0.0),
                    std::vector<double>(g.nx(), 0.0), std::vector<double>(g.nx(), 0.0)};
  }

  /// Normal flux w.n of a vector field on each wall.
  static WallData normal_flux(const VectorField& w) {
    const Grid& g = w.grid();
    WallData d = zeros(g);
    for (int j = 0; j < g.nz(); ++j) {
      d.left[j] = -w.x(0, j);
      d.right[j] = w.x(g.nx() - 1, j);
    }
    for (int i = 0; i < g.nx(); ++i) {
      d.bottom[i] = -w.z(i, 0);
      d.top[i] = w.z(i, g.nz() - 1);
    }
    return d;
  }

  /// Trapezoid line integral of the data around the boundary.
  double boundary_integral(const Grid& g) const {
    double sx = 0.0;
    for (int j = 0; j < g.nz(); ++j) sx += (g.on_z_wall(j) ? 0.5 : 1.0) * (left[j] + right[j]);
    double sz = 0.0;
    for (int i = 0; i < g.nx(); ++i) sz += (g.on_x_wall(i) ? 0.5 : 1.0) * (bottom[i] + top[i]);
    return sx * g.dz() + sz * g.dx();
  }

  bool all_finite() const {
    for (const auto* v : {&left, &right, &bottom, &top})
      for (double x : *v)
        if (!std::isfinite(x)) return false;
    return true;
  }
};

struct NeumannSolution {
  ScalarField p;
  /// Trapezoid integral of rhs minus the boundary integral of the data,
  /// removed uniformly from rhs before the solve.
  double compatibility_defect = 0.0;
};

/// Solves the 5-point problem lap(p) = rhs on all nodes with ghost-node
/// Neumann closure dp/dn = g, diagonalised by a 2D DCT-I. The gauge is fixed
/// by zero trapezoid mean.
class PoissonNeumannSolver {
 public:
  explicit PoissonNeumannSolver(const Grid& grid)
      : grid_(grid), plan_(grid.nz(), grid.nx(), FFTW_REDFT00) {
    eig_x_.resize(grid.nx());
    eig_z_.resize(grid.nz());
    for (int k = 0; k < grid.nx(); ++k) {
      eig_x_[k] = -(2.0 - 2.0 * std::cos(std::numbers::pi * k / (grid.nx() - 1))) / (grid.dx() * grid.dx());
    }
    for (int m = 0; m < grid.nz(); ++m) {
      eig_z_[m] = -(2.0 - 2.0 * std::cos(std::numbers::pi * m / (grid.nz() - 1))) / (grid.dz() * grid.dz());
    }
    norm_ = 1.0 / (4.0 * (grid.nx() - 1) * (grid.nz() - 1));
  }

  const Grid& grid() const { return grid_; }

  NeumannSolution solve(const ScalarField& rhs, const WallData& g) const {
    if (!rhs.all_finite() || !g.all_finite()) throw NumericalError("Neumann Poisson solve given non-finite data");
    const int nx = grid_.nx();
    const int nz = grid_.nz();
    ScalarField b = rhs;
    // Ghost values eliminated: p(-1) = p(1) + 2 h g, etc.
    for (int j = 0; j < nz; ++j) {
      b(0, j) -= 2.0 * g.left[j] / grid_.dx();
      b(nx - 1, j) -= 2.0 * g.right[j] / grid_.dx();
    }
    for (int i = 0; i < nx; ++i) {
      b(i, 0) -= 2.0 * g.bottom[i] / grid_.dz();
      b(i, nz - 1) -= 2.0 * g.top[i] / grid_.dz();
    }
    NeumannSolution out;
    out.compatibility_defect = volume_integral(b);
    const double shift = out.compatibility_defect / grid_.area();
    for (std::size_t k = 0; k < b.size(); ++k) b[k] -= shift;

    plan_.execute(b.data());
    for (int m = 0; m < nz; ++m) {
      for (int k = 0; k < nx; ++k) {
        const double lam = eig_x_[k] + eig_z_[m];
        b[grid_.index(k, m)] = (k == 0 && m == 0) ? 0.0 : b[grid_.index(k, m)] * norm_ / lam;
      }
    }
    plan_.execute(b.data());
    out.p = std::move(b);
    return out;
  }

 private:
  Grid grid_;
  detail::R2RPlan plan_;
  std::vector<double> eig_x_;
  std::vector<double> eig_z_;
  double norm_;
};

// ---------------------------------------------------------------------------
// Leray projector
// ---------------------------------------------------------------------------

struct Projection {
  VectorField u;       ///< solenoidal, wall-tangent part
  VectorField grad_p;  ///< gradient part, w - u
};

/// Discrete Helmholtz-Hodge decomposition w = u + grad(p).
///
/// u is the trapezoid-orthogonal projection of w onto the fields that vanish
/// in the wall-normal component and have zero centred divergence at every
/// node, with mirror-image closure on the walls. The scalar potential solves
/// the matching wide-stencil Neumann problem, which a DCT-I diagonalises; its
/// four null modes (constant and checkerboards) are gauge and dropped.
///
/// Consequences that hold to round-off: P is idempotent, u and grad_p are
/// orthogonal, |u| <= |w|, u.n = 0 on the walls and div(u) = 0 at interior
/// nodes. Centred gradients of any nodal scalar are annihilated.
class LerayProjector {
 public:
  explicit LerayProjector(const Grid& grid) : grid_(grid), plan_(grid.nz(), grid.nx(), FFTW_REDFT00) {
    eig_x_.resize(grid.nx());
    eig_z_.resize(grid.nz());
    for (int k = 0; k < grid.nx(); ++k) {
      const double s = std::sin(std::numbers::pi * k / (grid.nx() - 1)) / grid.dx();
      eig_x_[k] = -s * s;
    }
    for (int m = 0; m < grid.nz(); ++m) {
      const double s = std::sin(std::numbers::pi * m / (grid.nz() - 1)) / grid.dz();
      eig_z_[m] = -s * s;
    }
    norm_ = 1.0 / (4.0 * (grid.nx() - 1) * (grid.nz() - 1));
  }

  const Grid& grid() const { return grid_; }

  Projection project(const VectorField& w) const {
    if (!w.all_finite()) throw NumericalError("projection given a non-finite field");
    const int nx = grid_.nx();
    const int nz = grid_.nz();
    VectorField u = w;
    for (int j = 0; j < nz; ++j) {
      u.x(0, j) = 0.0;
      u.x(nx - 1, j) = 0.0;
    }
    for (int i = 0; i < nx; ++i) {
      u.z(i, 0) = 0.0;
      u.z(i, nz - 1) = 0.0;
    }

    ScalarField p = mirror_divergence(u);
    plan_.execute(p.data());
    for (int m = 0; m < nz; ++m) {
      const bool m_null = (m == 0 || m == nz - 1);
      for (int k = 0; k < nx; ++k) {
        const bool k_null = (k == 0 || k == nx - 1);
        double& c = p[grid_.index(k, m)];
        c = (k_null && m_null) ? 0.0 : c * norm_ / (eig_x_[k] + eig_z_[m]);
      }
    }
    plan_.execute(p.data());

    const double cx = 1.0 / (2.0 * grid_.dx());
    const double cz = 1.0 / (2.0 * grid_.dz());
    for (int j = 0; j < nz; ++j) {
      for (int i = 1; i < nx - 1; ++i) u.x(i, j) -= cx * (p(i + 1, j) - p(i - 1, j));
    }
    for (int j = 1; j < nz - 1; ++j) {
      for (int i = 0; i < nx; ++i) u.z(i, j) -= cz * (p(i, j + 1) - p(i, j - 1));
    }
    VectorField gp = w;
    gp -= u;
    return Projection{std::move(u), std::move(gp)};
  }

  /// Centred divergence with odd reflection of the normal component through
  /// each wall. Expects the wall-normal components to be zero already.
  ScalarField mirror_divergence(const VectorField& u) const {
    const int nx = grid_.nx();
    const int nz = grid_.nz();
    const double cx = 1.0 / (2.0 * grid_.dx());
    const double cz = 1.0 / (2.0 * grid_.dz());
    ScalarField r(grid_);
    for (int j = 0; j < nz; ++j) {
      r(0, j) = 2.0 * cx * u.x(1, j);
      for (int i = 1; i < nx - 1; ++i) r(i, j) = cx * (u.x(i + 1, j) - u.x(i - 1, j));
      r(nx - 1, j) = -2.0 * cx * u.x(nx - 2, j);
    }
    for (int i = 0; i < nx; ++i) {
      r(i, 0) += 2.0 * cz * u.z(i, 1);
      r(i, nz - 1) -= 2.0 * cz * u.z(i, nz - 2);
    }
    for (int j = 1; j < nz - 1; ++j) {
      for (int i = 0; i < nx; ++i) r(i, j) += cz * (u.z(i, j + 1) - u.z(i, j - 1));
    }
    return r;
  }

 private:
  Grid grid_;
  detail::R2RPlan plan_;
  std::vector<double> eig_x_;
  std::vector<double> eig_z_;
  double norm_;
};

namespace detail {

/// Per-thread solver cache keyed by grid geometry.
template <class Solver>
const Solver& cached_solver(const Grid& grid) {
  using Key = std::tuple<int, int, double, double>;
  thread_local std::map<Key, std::unique_ptr<Solver>> cache;
  const Key key{grid.nx(), grid.nz(), grid.lx(), grid.lz()};
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, std::make_unique<Solver>(grid)).first;
  return *it->second;
}

}  // namespace detail

inline ScalarField poisson_dirichlet(const ScalarField& rhs) {
  return detail::cached_solver<PoissonDirichletSolver>(rhs.grid()).solve(rhs);
}

inline NeumannSolution poisson_neumann(const ScalarField& rhs, const WallData& g) {
  return detail::cached_solver<PoissonNeumannSolver>(rhs.grid()).solve(rhs, g);
}

inline Projection leray_project(const VectorField& w) {
  return detail::cached_solver<LerayProjector>(w.grid()).project(w);
}

}  // namespace ism
