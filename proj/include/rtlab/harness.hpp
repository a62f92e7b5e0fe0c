#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rtlab/kinetic.hpp"
#include "rtlab/limit.hpp"
#include "rtlab/problem.hpp"
#include "rtlab/profile.hpp"

namespace rtlab {

struct FunctionalStats {
  std::string name;
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  ///< unbiased sample variance
  double sem = 0.0;       ///< sqrt(variance / count)
  double variance_sem = 0.0;  ///< standard error of the variance estimate (fourth moment)
};

struct EnsembleStats {
  std::size_t count = 0;
  std::vector<FunctionalStats> functionals;
  const FunctionalStats& at(const std::string& name) const;
};

/// Per-sample functionals. Kinetic runs report, in order: proj(j) = <rho_T, p_j>
/// for each mode, l2sq = ||rho_T||^2, sup_energy, defect_integral and, when
/// hs_s is set, hs. Limit runs report the same list without the two kinetic
/// diagnostics.
struct FunctionalSpec {
  std::vector<ModeIndex> modes{ModeIndex{{1, 0}}};
  std::optional<double> hs_s;
};

std::string projection_name(const ModeIndex& mode);

std::vector<std::string> kinetic_functional_names(const FunctionalSpec& spec);
std::vector<std::string> limit_functional_names(const FunctionalSpec& spec);

/// Aggregates per-sample values (sample-major) in index order.
EnsembleStats summarize(const std::vector<std::string>& names,
                        const std::vector<std::vector<double>>& values);

/// Runs `sample(i)` for i < n_samples in parallel and summarizes. Solver
/// errors are rethrown with the sample index attached.
EnsembleStats ensemble_stats(std::size_t n_samples, std::size_t threads,
                             const std::vector<std::string>& names,
                             const std::function<std::vector<double>(std::size_t)>& sample);

struct EnsembleOptions {
  std::size_t samples = 2;
  std::uint64_t base_seed = 0;
  std::size_t threads = 0;
  FunctionalSpec functionals;
};

EnsembleStats kinetic_ensemble(const Problem& problem, const KineticConfig& config,
                               const DensityField& rho0, const EnsembleOptions& options);
EnsembleStats limit_ensemble(const Problem& problem, const SpdeConfig& config,
                             const DensityField& rho0, const EnsembleOptions& options);

/// int_0^T ||rho_t||^2_{H^s} dt by the trapezoid rule over the snapshots.
/// Requires 0 < s < theta / 2 for the velocity model's exponent theta.
double hs_norm(const std::vector<double>& times, const std::vector<DensityField>& snapshots,
               const Problem& problem, double s);
/// Same integral without the range check (reference trajectories).
double hs_integral(const std::vector<double>& times, const std::vector<DensityField>& snapshots,
                   const Spectral& spectral, double s);

/// sqrt(int_0^T ||a_t - b_t||^2 dt) by the trapezoid rule on shared snapshot times.
double l2_time_error(const std::vector<double>& times, const std::vector<DensityField>& a,
                     const std::vector<DensityField>& b, const TorusGrid& grid);

/// Largest dt' <= dt such that horizon / dt' is a multiple of `snapshots`.
double aligned_dt(double dt, double horizon, std::size_t snapshots);

struct SweepOptions {
  std::vector<double> epsilons;  ///< strictly decreasing
  double dt_factor = 0.1;        ///< kinetic dt = dt_factor eps^2 (aligned)
  double horizon = 0.25;
  std::size_t snapshots = 10;
  std::size_t kinetic_samples = 100;
  std::size_t limit_samples = 100;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  FunctionalSpec functionals;
  SpdeConfig limit;  ///< dt, drift, scheme; horizon/snapshots/seed are overwritten
};

struct GapRow {
  double epsilon;
  std::string functional;  ///< e.g. mean:proj(1), var:proj(1), mean:l2sq
  double kinetic;
  double kinetic_sem;
  double limit;
  double limit_sem;
  double gap;
  double gap_sem;
};

struct SweepReport {
  std::vector<double> epsilons;
  std::vector<EnsembleStats> kinetic;  ///< per epsilon
  EnsembleStats limit;
  std::vector<GapRow> rows;
  /// Filled when the problem has no noise: L^2(0,T;L^2) error of each kinetic
  /// run against the limit run.
  std::vector<double> deterministic_error;

  std::vector<std::string> gap_functionals() const;
  std::vector<const GapRow*> column(const std::string& functional) const;
  /// gap(eps_{k+1}) <= gap(eps_k) + slack * gap_sem(eps_{k+1}) for every k.
  bool non_increasing(const std::string& functional, double slack) const;
};

SweepReport epsilon_sweep(const Problem& problem, const DensityField& rho0,
                          const SweepOptions& options);

struct RateOptions {
  std::vector<double> epsilons;
  double dt_factor = 0.02;
  double horizon = 0.5;
  std::size_t snapshots = 50;
  /// Reference dt is reference_fraction times the explicit stability limit.
  double reference_fraction = 0.5;
};

struct RateReport {
  std::vector<double> epsilons;
  std::vector<double> errors;
  double slope = 0.0;  ///< least squares slope of log error against log eps
  double intercept = 0.0;
  double reference_dt = 0.0;
  double reference_change = 0.0;  ///< max L^2 change of the reference under dt halving
  bool strictly_decreasing() const;
};

/// Noise-off kinetic runs against an RK4 Rosseland reference.
RateReport deterministic_convergence(const Problem& problem, const DensityField& rho0,
                                     const RateOptions& options);

/// Least squares fit y = a + b x; returns {b, a}.
std::pair<double, double> fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace rtlab
