/// @file grid.hpp
/// @brief Node-centred rectangular slice grid, nodal fields, model constants
/// and simulation state.
///
/// The slice occupies [0, Lx] x [0, Lz]. Nodes sit on both walls, so node
/// (i, j) is at (i*dx, j*dz) with i = 0..nx-1 and j = 0..nz-1. Field storage
/// is x-fastest: index = j*nx + i.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ism {

/// Thrown when a computation produces (or is handed) NaN/Inf values.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Grid {
 public:
  static constexpr int kMinNodes = 9;

  Grid() = default;

  Grid(int nx, int nz, double lx, double lz) : nx_(nx), nz_(nz), lx_(lx), lz_(lz) {
    if (nx < kMinNodes || nz < kMinNodes) {
      throw std::invalid_argument("grid needs at least 9 nodes per direction, got " +
                                  std::to_string(nx) + "x" + std::to_string(nz));
    }
    if (!(lx > 0.0) || !(lz > 0.0) || !std::isfinite(lx) || !std::isfinite(lz)) {
      throw std::invalid_argument("grid extents must be positive and finite");
    }
    dx_ = lx / static_cast<double>(nx - 1);
    dz_ = lz / static_cast<double>(nz - 1);
  }

  int nx() const { return nx_; }
  int nz() const { return nz_; }
  double lx() const { return lx_; }
  double lz() const { return lz_; }
  double dx() const { return dx_; }
  double dz() const { return dz_; }
  std::size_t size() const { return static_cast<std::size_t>(nx_) * static_cast<std::size_t>(nz_); }
  double area() const { return lx_ * lz_; }

  double x(int i) const { return i * dx_; }
  double z(int j) const { return j * dz_; }

  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(i);
  }

  bool on_x_wall(int i) const { return i == 0 || i == nx_ - 1; }
  bool on_z_wall(int j) const { return j == 0 || j == nz_ - 1; }
  bool on_wall(int i, int j) const { return on_x_wall(i) || on_z_wall(j); }

  /// Trapezoid weight of node (i, j): dx*dz, halved on each wall it touches.
  double weight(int i, int j) const {
    double w = dx_ * dz_;
    if (on_x_wall(i)) w *= 0.5;
    if (on_z_wall(j)) w *= 0.5;
    return w;
  }

  bool operator==(const Grid& o) const {
    return nx_ == o.nx_ && nz_ == o.nz_ && lx_ == o.lx_ && lz_ == o.lz_;
  }

 private:
  int nx_ = 0;
  int nz_ = 0;
  double lx_ = 0.0;
  double lz_ = 0.0;
  double dx_ = 0.0;
  double dz_ = 0.0;
};

inline Grid make_grid(int nx, int nz, double lx, double lz) { return Grid(nx, nz, lx, lz); }

/// Real samples on the nodes of a grid.
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(const Grid& grid, double fill = 0.0) : grid_(grid), values_(grid.size(), fill) {}
  ScalarField(const Grid& grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) throw std::invalid_argument("field payload does not match grid size");
  }

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }

  double& operator()(int i, int j) { return values_[grid_.index(i, j)]; }
  double operator()(int i, int j) const { return values_[grid_.index(i, j)]; }
  double& operator[](std::size_t k) { return values_[k]; }
  double operator[](std::size_t k) const { return values_[k]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }

  bool all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  ScalarField& operator+=(const ScalarField& o) {
    check_same(o);
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
    return *this;
  }
  ScalarField& operator-=(const ScalarField& o) {
    check_same(o);
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= o.values_[k];
    return *this;
  }
  ScalarField& operator*=(double a) {
    for (double& v : values_) v *= a;
    return *this;
  }

  /// this += a * o
  ScalarField& axpy(double a, const ScalarField& o) {
    check_same(o);
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += a * o.values_[k];
    return *this;
  }

  friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
  friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
  friend ScalarField operator*(double s, ScalarField a) { return a *= s; }

 private:
  void check_same(const ScalarField& o) const {
    if (!(o.grid_ == grid_)) throw std::invalid_argument("fields live on different grids");
  }

  Grid grid_;
  std::vector<double> values_;
};

/// (x, z) pair of nodal components sharing one grid.
struct VectorField {
  ScalarField x;
  ScalarField z;

  VectorField() = default;
  explicit VectorField(const Grid& grid) : x(grid), z(grid) {}
  VectorField(ScalarField xc, ScalarField zc) : x(std::move(xc)), z(std::move(zc)) {
    if (!(x.grid() == z.grid())) throw std::invalid_argument("vector components live on different grids");
  }

  const Grid& grid() const { return x.grid(); }
  bool all_finite() const { return x.all_finite() && z.all_finite(); }
  double max_abs() const { return std::max(x.max_abs(), z.max_abs()); }

  VectorField& operator+=(const VectorField& o) {
    x += o.x;
    z += o.z;
    return *this;
  }
  VectorField& operator-=(const VectorField& o) {
    x -= o.x;
    z -= o.z;
    return *this;
  }
  VectorField& operator*=(double a) {
    x *= a;
    z *= a;
    return *this;
  }
  VectorField& axpy(double a, const VectorField& o) {
    x.axpy(a, o.x);
    z.axpy(a, o.z);
    return *this;
  }
  friend VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
  friend VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
  friend VectorField operator*(double s, VectorField a) { return a *= s; }
};

/// Physical constants of the slice model. The mass density is fixed at one
/// and never stored.
struct Constants {
  double f = 1.0;       ///< Coriolis parameter
  double s = 1.0;       ///< transverse potential-temperature gradient
  double g = 1.0;       ///< gravity
  double theta0 = 1.0;  ///< reference potential temperature

  double buoyancy() const { return g / theta0; }
  bool operator==(const Constants&) const = default;
};

struct State {
  VectorField u_s;       ///< in-slice velocity
  ScalarField u_t;       ///< transverse velocity
  ScalarField theta_s;   ///< in-slice potential temperature
  double t = 0.0;
  Constants constants;

  State() = default;
  explicit State(const Grid& grid, Constants c = {}) : u_s(grid), u_t(grid), theta_s(grid), constants(c) {}

  const Grid& grid() const { return u_t.grid(); }
  bool all_finite() const { return u_s.all_finite() && u_t.all_finite() && theta_s.all_finite() && std::isfinite(t); }
};

/// Sample fn at every node. Non-finite samples are rejected.
inline ScalarField sample(const Grid& grid, const std::function<double(double, double)>& fn) {
  ScalarField out(grid);
  for (int j = 0; j < grid.nz(); ++j) {
    for (int i = 0; i < grid.nx(); ++i) {
      const double v = fn(grid.x(i), grid.z(j));
      if (!std::isfinite(v)) {
        throw NumericalError("sampled function is not finite at node (" + std::to_string(i) + ", " +
                             std::to_string(j) + ")");
      }
      out(i, j) = v;
    }
  }
  return out;
}

/// Trapezoid rule over the closed rectangle.
inline double volume_integral(const ScalarField& f) {
  const Grid& g = f.grid();
  double sum = 0.0;
  for (int j = 0; j < g.nz(); ++j) {
    double row = 0.0;
    for (int i = 0; i < g.nx(); ++i) row += (g.on_x_wall(i) ? 0.5 : 1.0) * f(i, j);
    sum += (g.on_z_wall(j) ? 0.5 : 1.0) * row;
  }
  return sum * g.dx() * g.dz();
}

/// Trapezoid-weighted inner product of two vector fields.
inline double inner(const VectorField& a, const VectorField& b) {
  const Grid& g = a.grid();
  double sum = 0.0;
  for (int j = 0; j < g.nz(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      sum += g.weight(i, j) * (a.x(i, j) * b.x(i, j) + a.z(i, j) * b.z(i, j));
    }
  }
  return sum;
}

inline double l2_norm(const VectorField& a) { return std::sqrt(inner(a, a)); }

/// Pointwise product.
inline ScalarField multiply(const ScalarField& a, const ScalarField& b) {
  ScalarField out(a.grid());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k] * b[k];
  return out;
}

}  // namespace ism
