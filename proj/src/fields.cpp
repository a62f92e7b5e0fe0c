#include "rtlab/fields.hpp"

#include <algorithm>
#include <cmath>

namespace rtlab {

bool DensityField::finite() const {
  return std::all_of(values.begin(), values.end(), [](double x) { return std::isfinite(x); });
}

bool KineticField::finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
}

KineticField KineticField::equilibrium(const DensityField& rho, const VelocityQuadrature& vel) {
  KineticField f(rho.size(), vel.size());
  for (std::size_t k = 0; k < vel.size(); ++k) {
    auto s = f.slice(k);
    for (std::size_t i = 0; i < rho.size(); ++i) s[i] = rho[i] * vel.equilibrium(k);
  }
  return f;
}

DensityField density(const KineticField& f, const VelocityQuadrature& vel) {
  DensityField rho(f.points());
  for (std::size_t k = 0; k < f.velocities(); ++k) {
    const auto s = f.slice(k);
    const double w = vel.weight(k);
    for (std::size_t i = 0; i < f.points(); ++i) rho[i] += w * s[i];
  }
  return rho;
}

double weighted_inner(const KineticField& f, const KineticField& g, const VelocityQuadrature& vel,
                      const TorusGrid& grid) {
  double total = 0.0;
  for (std::size_t k = 0; k < f.velocities(); ++k) {
    const auto a = f.slice(k);
    const auto b = g.slice(k);
    double partial = 0.0;
    for (std::size_t i = 0; i < f.points(); ++i) partial += a[i] * b[i];
    total += vel.weight(k) / vel.equilibrium(k) * partial;
  }
  return total * grid.cell_volume();
}

double weighted_norm(const KineticField& f, const VelocityQuadrature& vel, const TorusGrid& grid) {
  return std::sqrt(weighted_inner(f, f, vel, grid));
}

double integral(const DensityField& rho, const TorusGrid& grid) {
  double total = 0.0;
  for (double x : rho.values) total += x;
  return total * grid.cell_volume();
}

double inner(const DensityField& a, const DensityField& b, const TorusGrid& grid) {
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) total += a[i] * b[i];
  return total * grid.cell_volume();
}

double l2_norm(const DensityField& rho, const TorusGrid& grid) {
  return std::sqrt(inner(rho, rho, grid));
}

KineticField apply_L(const KineticField& f, const VelocityQuadrature& vel) {
  const auto rho = density(f, vel);
  KineticField out(f.points(), f.velocities());
  for (std::size_t k = 0; k < f.velocities(); ++k) {
    const auto src = f.slice(k);
    auto dst = out.slice(k);
    const double fk = vel.equilibrium(k);
    for (std::size_t i = 0; i < f.points(); ++i) dst[i] = rho[i] * fk - src[i];
  }
  return out;
}

void relax_exact_inplace(KineticField& f, double tau, const Opacity& sigma,
                         const VelocityQuadrature& vel) {
  const auto rho = density(f, vel);
  std::vector<double> decay(f.points());
  for (std::size_t i = 0; i < f.points(); ++i) decay[i] = std::exp(-tau * sigma(rho[i]));
  for (std::size_t k = 0; k < f.velocities(); ++k) {
    auto s = f.slice(k);
    const double fk = vel.equilibrium(k);
    for (std::size_t i = 0; i < f.points(); ++i) {
      const double eq = rho[i] * fk;
      s[i] = eq + (s[i] - eq) * decay[i];
    }
  }
}

KineticField relax_exact(const KineticField& f, double tau, const Opacity& sigma,
                         const VelocityQuadrature& vel) {
  KineticField out = f;
  relax_exact_inplace(out, tau, sigma, vel);
  return out;
}

}  // namespace rtlab
