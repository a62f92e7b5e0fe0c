#include "rtlab/limit.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "rtlab/error.hpp"

namespace rtlab {

DriftChoice parse_drift(const std::string& name) {
  if (name == "effective") return DriftChoice::Effective;
  if (name == "paper") return DriftChoice::Paper;
  throw Error(fmt::format("unknown drift '{}' (expected effective or paper)", name));
}

std::string to_string(DriftChoice d) { return d == DriftChoice::Effective ? "effective" : "paper"; }

double SpdeConfig::stable_dt(const Problem& problem) {
  const double h = problem.grid.spacing();
  return 0.2 * h * h * problem.opacity.sigma_star() / problem.velocity.diffusion_norm();
}

std::size_t SpdeConfig::validate(const Problem& problem) const {
  if (!(dt > 0.0)) throw Error("limit dt must be positive");
  if (!(horizon > 0.0)) throw Error("horizon T must be positive");
  if (diffusion && dt > stable_dt(problem) * (1.0 + 1e-12)) {
    throw Error(fmt::format("limit dt = {:g} violates dt <= 0.2 dx^2 sigma_star / ||K|| = {:g}", dt,
                            stable_dt(problem)));
  }
  if (scheme == LimitScheme::Rk4 && noise && problem.noise) {
    throw Error("the RK4 limit scheme is deterministic; switch the noise off");
  }
  if (snapshots == 0) throw Error("snapshots must be at least 1");
  const double ratio = horizon / dt;
  const auto steps = static_cast<std::size_t>(std::llround(ratio));
  if (steps == 0 || std::abs(ratio - static_cast<double>(steps)) > 1e-9 * std::max(1.0, ratio)) {
    throw Error(fmt::format("horizon T ({:g}) is not a multiple of limit dt ({:g})", horizon, dt));
  }
  if (steps % snapshots != 0) {
    throw Error(fmt::format("snapshot interval T/{} is not a multiple of limit dt", snapshots));
  }
  return steps;
}

DensityField opacity_primitive(const DensityField& rho, const Opacity& sigma) {
  DensityField g(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i) g[i] = sigma.primitive(rho[i]);
  return g;
}

DensityField rosseland_rhs(const DensityField& rho, const Problem& problem) {
  const auto g = opacity_primitive(rho, problem.opacity);
  return DensityField(
      problem.spectral->second_derivative(g.values, problem.velocity.diffusion_matrix()));
}

namespace {

bool noise_active(const Problem& problem, const SpdeConfig& config) {
  return config.noise && problem.statistics.has_value();
}

// Deterministic part of the right-hand side.
DensityField drift(const DensityField& rho, const Problem& problem, const SpdeConfig& config) {
  DensityField out = config.diffusion ? rosseland_rhs(rho, problem) : DensityField(rho.size());
  if (noise_active(problem, config)) {
    const auto& h = problem.statistics->drift_effective();
    const double sign = config.drift == DriftChoice::Effective ? 1.0 : -1.0;
    for (std::size_t i = 0; i < rho.size(); ++i) out[i] += sign * h[i] * rho[i];
  }
  return out;
}

void rk4_step(DensityField& rho, const Problem& problem, const SpdeConfig& config) {
  const double h = config.dt;
  auto shifted = [&](const DensityField& k, double c) {
    DensityField y = rho;
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += c * k[i];
    return y;
  };
  const auto k1 = drift(rho, problem, config);
  const auto k2 = drift(shifted(k1, 0.5 * h), problem, config);
  const auto k3 = drift(shifted(k2, 0.5 * h), problem, config);
  const auto k4 = drift(shifted(k3, h), problem, config);
  for (std::size_t i = 0; i < rho.size(); ++i) {
    rho[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
}

}  // namespace

void spde_step(DensityField& rho, const Problem& problem, const SpdeConfig& config, Rng& rng) {
  if (config.scheme == LimitScheme::Rk4) {
    rk4_step(rho, problem, config);
    return;
  }
  const auto a = drift(rho, problem, config);
  DensityField dw(rho.size());
  if (noise_active(problem, config)) {
    // Local distribution: the step's draws depend only on the engine state.
    std::normal_distribution<double> normal;
    const double sqrt_dt = std::sqrt(config.dt);
    for (const auto& mode : problem.statistics->modes()) {
      const double c = sqrt_dt * std::sqrt(mode.eigenvalue) * normal(rng);
      for (std::size_t i = 0; i < dw.size(); ++i) dw[i] += c * mode.eigenfunction[i];
    }
  }
  for (std::size_t i = 0; i < rho.size(); ++i) {
    rho[i] += config.dt * a[i] + rho[i] * dw[i];
  }
}

SpdeTrajectory run_limit(const Problem& problem, const SpdeConfig& config,
                         const DensityField& rho0) {
  const std::size_t steps = config.validate(problem);
  const std::size_t per_snapshot = steps / config.snapshots;
  if (rho0.size() != problem.grid.points()) throw Error("initial density does not match the grid");
  if (!rho0.finite()) throw Error("initial density has non-finite values");
  const bool deterministic = !noise_active(problem, config);

  Rng rng(config.seed);
  DensityField rho = rho0;
  SpdeTrajectory traj;
  traj.steps.reserve(steps + 1);
  auto record = [&](std::size_t step) {
    const double t = static_cast<double>(step) * config.dt;
    traj.steps.push_back({t, integral(rho, problem.grid), l2_norm(rho, problem.grid)});
    if (step % per_snapshot == 0) {
      traj.times.push_back(t);
      traj.snapshots.push_back(rho);
    }
  };
  record(0);
  for (std::size_t n = 0; n < steps; ++n) {
    spde_step(rho, problem, config, rng);
    if (!rho.finite()) throw Error(fmt::format("non-finite limit state at step {}", n + 1));
    if (deterministic) {
      const auto it = std::min_element(rho.values.begin(), rho.values.end());
      if (*it <= 0.0) {
        throw Error(fmt::format("positivity lost at step {} (min rho = {:.3e} at point {})", n + 1,
                                *it, std::distance(rho.values.begin(), it)));
      }
    }
    record(n + 1);
  }
  return traj;
}

}  // namespace rtlab
