#include "rtlab/kinetic.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "rtlab/error.hpp"

namespace rtlab {

namespace {

constexpr double kMaxExponent = 50.0;

std::size_t whole_multiple(double total, double step, const char* what) {
  const double ratio = total / step;
  const auto n = static_cast<std::size_t>(std::llround(ratio));
  if (n == 0 || std::abs(ratio - static_cast<double>(n)) > 1e-9 * std::max(1.0, ratio)) {
    throw Error(fmt::format("{} ({:g}) is not a multiple of dt ({:g})", what, total, step));
  }
  return n;
}

}  // namespace

std::size_t KineticConfig::validate() const {
  if (!(epsilon > 0.0)) throw Error("epsilon must be positive");
  if (!(dt > 0.0)) throw Error("dt must be positive");
  if (!(horizon > 0.0)) throw Error("horizon T must be positive");
  if (dt > 0.5 * epsilon * epsilon * (1.0 + 1e-12)) {
    throw Error(fmt::format("dt = {:g} violates dt <= eps^2/2 = {:g}", dt, 0.5 * epsilon * epsilon));
  }
  if (snapshots == 0) throw Error("snapshots must be at least 1");
  const std::size_t steps = whole_multiple(horizon, dt, "horizon T");
  if (steps % snapshots != 0) {
    throw Error(fmt::format("snapshot interval T/{} is not a multiple of dt", snapshots));
  }
  return steps;
}

std::size_t KineticConfig::steps_per_snapshot() const { return validate() / snapshots; }

double KineticTrajectory::sup_energy() const {
  double sup = 0.0;
  for (const auto& d : diagnostics) sup = std::max(sup, d.energy);
  return sup;
}

double KineticTrajectory::defect_integral() const {
  double total = 0.0;
  for (std::size_t n = 1; n < diagnostics.size(); ++n) {
    const auto& a = diagnostics[n - 1];
    const auto& b = diagnostics[n];
    total += 0.5 * (b.t - a.t) * (a.defect * a.defect + b.defect * b.defect);
  }
  return total;
}

void transport_step(KineticField& f, double tau, const Problem& problem) {
  if (tau == 0.0) return;
  const auto& vel = problem.velocity;
  for (std::size_t k = 0; k < vel.size(); ++k) {
    const auto& a = vel.speed(k);
    const double shift[2] = {tau * a[0], tau * a[1]};
    problem.spectral->translate(f.slice(k), shift);
  }
}

DensityField noise_factor(const NoisePath& path, const NoiseModel& model, double t, double dt,
                          double epsilon) {
  const auto occupation = path.occupation(t, t + dt, model.size());
  DensityField exponent(model.state(0).size());
  for (std::size_t s = 0; s < occupation.size(); ++s) {
    if (occupation[s] == 0.0) continue;
    const double c = occupation[s] / epsilon;
    const auto& n = model.state(s);
    for (std::size_t i = 0; i < exponent.size(); ++i) exponent[i] += c * n[i];
  }
  for (auto& x : exponent.values) {
    if (std::abs(x) > kMaxExponent) throw Error("noise amplitude/eps too large for dt");
    x = std::exp(x);
  }
  return exponent;
}

namespace {

void multiply(KineticField& f, const DensityField& factor) {
  for (std::size_t k = 0; k < f.velocities(); ++k) {
    auto s = f.slice(k);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] *= factor[i];
  }
}

}  // namespace

void strang_step(KineticField& f, double t, const Problem& problem, const KineticConfig& config,
                 const NoisePath* path) {
  const double eps = config.epsilon;
  const double h = config.dt;
  const bool noisy = problem.noise.has_value() && path != nullptr;
  transport_step(f, 0.5 * h / eps, problem);
  if (noisy) multiply(f, noise_factor(*path, *problem.noise, t, 0.5 * h, eps));
  relax_exact_inplace(f, h / (eps * eps), problem.opacity, problem.velocity);
  if (noisy) multiply(f, noise_factor(*path, *problem.noise, t + 0.5 * h, 0.5 * h, eps));
  transport_step(f, 0.5 * h / eps, problem);
}

KineticTrajectory run_kinetic(const Problem& problem, const KineticConfig& config,
                              const DensityField& rho0, const KineticObserver& observer) {
  const std::size_t steps = config.validate();
  const std::size_t per_snapshot = steps / config.snapshots;
  if (rho0.size() != problem.grid.points()) throw Error("initial density does not match the grid");
  if (!rho0.finite()) throw Error("initial density has non-finite values");

  std::optional<NoisePath> path;
  if (problem.noise) path = sample_path(*problem.noise, config.epsilon, config.horizon, config.seed);

  const auto& vel = problem.velocity;
  const auto& grid = problem.grid;
  KineticTrajectory traj;
  KineticField f = KineticField::equilibrium(rho0, vel);
  traj.diagnostics.reserve(steps + 1);

  auto record = [&](std::size_t step) {
    const double t = static_cast<double>(step) * config.dt;
    const auto rho = density(f, vel);
    const auto lf = apply_L(f, vel);
    traj.diagnostics.push_back({t, integral(rho, grid), weighted_inner(f, f, vel, grid),
                                weighted_norm(lf, vel, grid) / config.epsilon});
    if (step % per_snapshot == 0) {
      traj.times.push_back(t);
      traj.snapshots.push_back(rho);
    }
    if (observer) observer(step, t, f, path ? path->state_at(t) : 0);
  };

  record(0);
  for (std::size_t n = 0; n < steps; ++n) {
    strang_step(f, static_cast<double>(n) * config.dt, problem, config, path ? &*path : nullptr);
    if (!f.finite()) throw Error(fmt::format("non-finite kinetic state at step {}", n + 1));
    record(n + 1);
  }
  traj.final_state = std::move(f);
  return traj;
}

}  // namespace rtlab
