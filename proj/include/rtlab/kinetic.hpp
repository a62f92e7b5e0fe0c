#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "rtlab/fields.hpp"
#include "rtlab/noise.hpp"
#include "rtlab/problem.hpp"

namespace rtlab {

struct KineticConfig {
  double epsilon = 0.1;
  double dt = 1e-3;
  double horizon = 0.1;
  /// Number of snapshot intervals; densities are stored at k * horizon / snapshots.
  std::size_t snapshots = 1;
  std::uint64_t seed = 0;

  /// Number of steps; throws unless dt <= eps^2 / 2, horizon is a multiple of
  /// dt and every snapshot time falls on a step.
  std::size_t validate() const;
  std::size_t steps_per_snapshot() const;
};

struct StepDiagnostics {
  double t;
  double mass;    ///< integral of rho
  double energy;  ///< ||f||^2 in L^2_{F^-1}
  double defect;  ///< ||L f|| / eps in L^2_{F^-1}
};

struct KineticTrajectory {
  std::vector<double> times;
  std::vector<DensityField> snapshots;
  std::vector<StepDiagnostics> diagnostics;  ///< initial state and after every step
  KineticField final_state;

  double sup_energy() const;
  /// Trapezoid rule for int_0^T ||eps^-1 L f||^2 dt over the step diagnostics.
  double defect_integral() const;
};

/// Spectral translation of each velocity slice by tau * a_k.
void transport_step(KineticField& f, double tau, const Problem& problem);

/// exp(eps^-1 int_t^{t+dt} m^eps(s, x) ds) from the exact occupation times.
DensityField noise_factor(const NoisePath& path, const NoiseModel& model, double t, double dt,
                          double epsilon);

/// One T(dt/2eps) N(dt/2) R(dt/eps^2) N(dt/2) T(dt/2eps) step. `path` may be
/// null when the problem has no noise.
void strang_step(KineticField& f, double t, const Problem& problem, const KineticConfig& config,
                 const NoisePath* path);

/// Called with the step index (0 for the initial datum), time, state and the
/// noise state index at that time (0 without noise).
using KineticObserver =
    std::function<void(std::size_t step, double t, const KineticField& f, std::size_t state)>;

/// Integrates from f(0) = rho0 F. The noise path is drawn from config.seed.
KineticTrajectory run_kinetic(const Problem& problem, const KineticConfig& config,
                              const DensityField& rho0, const KineticObserver& observer = {});

}  // namespace rtlab
