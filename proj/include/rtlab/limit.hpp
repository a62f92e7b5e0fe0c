#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "rtlab/fields.hpp"
#include "rtlab/problem.hpp"
#include "rtlab/rng.hpp"

namespace rtlab {

/// Which Ito drift multiplies rho. Effective is h_eff = k(x, x) / 2; Paper is
/// H_paper = -h_eff, the field as written in the statement of the theorem.
enum class DriftChoice { Effective, Paper };

DriftChoice parse_drift(const std::string& name);
std::string to_string(DriftChoice d);

/// Time integrator. Rk4 is for deterministic reference runs only.
enum class LimitScheme { EulerMaruyama, Rk4 };

struct SpdeConfig {
  double dt = 1e-4;
  double horizon = 0.1;
  std::size_t snapshots = 1;
  std::uint64_t seed = 0;
  DriftChoice drift = DriftChoice::Effective;
  bool diffusion = true;  ///< false drops the Rosseland term (test mode)
  bool noise = true;      ///< ignored when the problem has no noise
  LimitScheme scheme = LimitScheme::EulerMaruyama;

  /// Largest dt allowed by 0.2 dx^2 sigma_star / ||K||.
  static double stable_dt(const Problem& problem);
  /// Number of steps; throws on stability or multiple-of-dt violations.
  std::size_t validate(const Problem& problem) const;
};

struct SpdeStep {
  double t;
  double mass;
  double l2;
};

struct SpdeTrajectory {
  std::vector<double> times;
  std::vector<DensityField> snapshots;
  std::vector<SpdeStep> steps;  ///< initial state and after every step
};

/// G(rho) = int_0^rho dy / sigma(y), pointwise.
DensityField opacity_primitive(const DensityField& rho, const Opacity& sigma);

/// K : grad grad G(rho) = div(sigma(rho)^-1 K grad rho), spectrally.
DensityField rosseland_rhs(const DensityField& rho, const Problem& problem);

/// One Euler-Maruyama step of
///   d rho = [div(sigma^-1 K grad rho) + h rho] dt + rho Q^{1/2} dW.
void spde_step(DensityField& rho, const Problem& problem, const SpdeConfig& config, Rng& rng);

SpdeTrajectory run_limit(const Problem& problem, const SpdeConfig& config,
                         const DensityField& rho0);

}  // namespace rtlab
