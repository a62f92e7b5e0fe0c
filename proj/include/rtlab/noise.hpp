#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "rtlab/fields.hpp"
#include "rtlab/grid.hpp"
#include "rtlab/rng.hpp"

namespace rtlab {

/// Stationary law nu of a conservative rate matrix: nu M = 0, sum nu = 1.
/// Throws "non-ergodic noise model" unless the chain has a single recurrent
/// class covering every state.
Eigen::VectorXd stationary_law(const Eigen::MatrixXd& generator);

/// Centered Poisson solves for a finite ergodic chain: psi with
/// M psi = g - (nu . g) and nu . psi = 0. Uses the invertible matrix
/// M - 1 nu^T, whose solution of that system is exactly the centered one.
class PoissonSolver {
 public:
  PoissonSolver(const Eigen::MatrixXd& generator, const Eigen::VectorXd& nu);

  Eigen::VectorXd solve(const Eigen::VectorXd& values) const;
  /// Column-wise solve; each column is one grid point's per-state values.
  Eigen::MatrixXd solve(const Eigen::MatrixXd& values) const;

 private:
  Eigen::VectorXd nu_;
  Eigen::FullPivLU<Eigen::MatrixXd> lu_;
};

Eigen::VectorXd solve_poisson(const Eigen::MatrixXd& generator, const Eigen::VectorXd& nu,
                              const Eigen::VectorXd& values);

/// Finite-state stationary Markov driver m taking spatial profiles n_i as values.
class NoiseModel {
 public:
  static NoiseModel create(const TorusGrid& grid, std::vector<DensityField> states,
                           Eigen::MatrixXd generator);
  /// States {n1, -n1}, switching rate `rate` in both directions.
  static NoiseModel telegraph(const TorusGrid& grid, DensityField n1, double rate);

  std::size_t size() const { return states_.size(); }
  const std::vector<DensityField>& states() const { return states_; }
  const DensityField& state(std::size_t i) const { return states_[i]; }
  const Eigen::MatrixXd& generator() const { return generator_; }
  const Eigen::VectorXd& law() const { return nu_; }
  const PoissonSolver& poisson() const { return poisson_; }
  /// Discrete W^{1,inf} bound of the state profiles: max of |n_i| and of the
  /// forward difference quotients.
  double c_star() const { return c_star_; }
  /// S x P matrix of state values.
  Eigen::MatrixXd state_matrix() const;

 private:
  NoiseModel(std::vector<DensityField> states, Eigen::MatrixXd generator, Eigen::VectorXd nu,
             double c_star);
  std::vector<DensityField> states_;
  Eigen::MatrixXd generator_;
  Eigen::VectorXd nu_;
  PoissonSolver poisson_;
  double c_star_;
};

/// Subtract sum_i nu_i n_i from every profile so the driver is centered.
std::vector<DensityField> center_profiles(const std::vector<DensityField>& states,
                                          const Eigen::VectorXd& nu);

/// W^{1,inf} grid bound (sup of values and forward difference quotients).
double w1inf_norm(const DensityField& u, const TorusGrid& grid);

struct QMode {
  double eigenvalue;
  DensityField eigenfunction;  ///< L^2(T^N)-normalized
};

/// Limit-equation objects derived from a NoiseModel.
///
/// psi_i = M^-1 I(n_i); H_paper = sum_i nu_i n_i psi_i;
/// k(x, y) = -sum_i nu_i [n_i(y) psi_i(x) + n_i(x) psi_i(y)];
/// h_eff = k(x, x) / 2 (equal to -H_paper); Q is the integral operator of k.
class NoiseStatistics {
 public:
  static NoiseStatistics compute(const NoiseModel& model, const TorusGrid& grid);

  const std::vector<DensityField>& psi() const { return psi_; }
  /// chi_i = M^-1 (n psi - nu . n psi)_i, the profiles behind the second corrector.
  const std::vector<DensityField>& chi() const { return chi_; }
  const DensityField& drift_paper() const { return drift_paper_; }
  const DensityField& drift_effective() const { return drift_effective_; }
  double kernel(std::size_t x, std::size_t y) const;
  Eigen::MatrixXd kernel_matrix() const;
  /// Every eigenvalue of Q after clipping, descending.
  const std::vector<double>& eigenvalues() const { return eigenvalues_; }
  /// Modes with lambda_j > 1e-10 lambda_max.
  const std::vector<QMode>& modes() const { return modes_; }
  /// W^{1,inf} bound over n_i, psi_i and chi_i.
  double c_star() const { return c_star_; }

 private:
  std::vector<DensityField> psi_;
  std::vector<DensityField> chi_;
  DensityField drift_paper_;
  DensityField drift_effective_;
  Eigen::MatrixXd factors_;   // P x 2S: [n_1..n_S, psi_1..psi_S]
  Eigen::MatrixXd coupling_;  // 2S x 2S
  std::vector<double> eigenvalues_;
  std::vector<QMode> modes_;
  double c_star_ = 0.0;
};

/// Piecewise-constant path of m^eps(t) = m(t / eps^2) on [0, horizon].
struct NoisePath {
  std::vector<double> jump_times;     ///< jump_times[0] == 0
  std::vector<std::size_t> states;    ///< state on [jump_times[s], jump_times[s+1])
  double epsilon = 1.0;
  double horizon = 0.0;

  std::size_t state_at(double t) const;
  /// Time spent in each state over [t0, t1].
  std::vector<double> occupation(double t0, double t1, std::size_t n_states) const;
  std::size_t jumps() const { return jump_times.size() - 1; }
};

NoisePath sample_path(const NoiseModel& model, double epsilon, double horizon, Rng& rng);
NoisePath sample_path(const NoiseModel& model, double epsilon, double horizon, std::uint64_t seed);

}  // namespace rtlab
