#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rtlab/grid.hpp"
#include "rtlab/opacity.hpp"
#include "rtlab/velocity.hpp"

namespace rtlab {

/// rho(x) on the spatial grid.
struct DensityField {
  std::vector<double> values;

  DensityField() = default;
  explicit DensityField(std::size_t points, double fill = 0.0) : values(points, fill) {}
  explicit DensityField(std::vector<double> v) : values(std::move(v)) {}

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  bool finite() const;
};

/// f(x, v) stored velocity-major: all grid points of node 0, then node 1, ...
class KineticField {
 public:
  KineticField() = default;
  KineticField(std::size_t points, std::size_t velocities, double fill = 0.0)
      : points_(points), velocities_(velocities), values_(points * velocities, fill) {}

  /// rho(x) F(v).
  static KineticField equilibrium(const DensityField& rho, const VelocityQuadrature& vel);

  std::size_t points() const { return points_; }
  std::size_t velocities() const { return velocities_; }

  double& operator()(std::size_t i, std::size_t k) { return values_[k * points_ + i]; }
  double operator()(std::size_t i, std::size_t k) const { return values_[k * points_ + i]; }

  std::span<double> slice(std::size_t k) { return {values_.data() + k * points_, points_}; }
  std::span<const double> slice(std::size_t k) const {
    return {values_.data() + k * points_, points_};
  }
  std::vector<double>& data() { return values_; }
  const std::vector<double>& data() const { return values_; }

  bool finite() const;

 private:
  std::size_t points_ = 0;
  std::size_t velocities_ = 0;
  std::vector<double> values_;
};

/// <f>(x) = sum_k w_k f(x, v_k).
DensityField density(const KineticField& f, const VelocityQuadrature& vel);

/// (f, g) in L^2_{F^-1}(T^N x V).
double weighted_inner(const KineticField& f, const KineticField& g, const VelocityQuadrature& vel,
                      const TorusGrid& grid);
double weighted_norm(const KineticField& f, const VelocityQuadrature& vel, const TorusGrid& grid);

/// Quadrature on the torus; exact for trigonometric polynomials below Nyquist.
double integral(const DensityField& rho, const TorusGrid& grid);
double inner(const DensityField& a, const DensityField& b, const TorusGrid& grid);
double l2_norm(const DensityField& rho, const TorusGrid& grid);

/// L f = <f> F - f.
KineticField apply_L(const KineticField& f, const VelocityQuadrature& vel);

/// Exact flow of sigma(<f>) L over time tau:
/// rho F + (f - rho F) exp(-tau sigma(rho)), pointwise in x.
KineticField relax_exact(const KineticField& f, double tau, const Opacity& sigma,
                         const VelocityQuadrature& vel);
void relax_exact_inplace(KineticField& f, double tau, const Opacity& sigma,
                         const VelocityQuadrature& vel);

}  // namespace rtlab
