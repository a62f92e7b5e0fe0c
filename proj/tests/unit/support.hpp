#pragma once

#include <random>

#include "rtlab/fields.hpp"
#include "rtlab/grid.hpp"
#include "rtlab/velocity.hpp"

namespace testing {

inline rtlab::KineticField random_kinetic(std::size_t points, std::size_t velocities,
                                          std::mt19937_64& rng, double lo = 0.2, double hi = 2.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  rtlab::KineticField f(points, velocities);
  for (auto& x : f.data()) x = u(rng);
  return f;
}

inline rtlab::DensityField random_density(std::size_t points, std::mt19937_64& rng,
                                          double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  rtlab::DensityField rho(points);
  for (auto& x : rho.values) x = u(rng);
  return rho;
}

inline double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace testing
