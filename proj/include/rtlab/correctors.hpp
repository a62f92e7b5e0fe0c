#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "rtlab/fields.hpp"
#include "rtlab/kinetic.hpp"
#include "rtlab/problem.hpp"
#include "rtlab/profile.hpp"

namespace rtlab {

/// phi_j(f) = (f, p_j F) = int rho p_j.
double test_function(const KineticField& f, const ModeIndex& mode, const Problem& problem);

/// phi_1(f, n_i) = -int rho psi_i p_j.
double corrector1(const KineticField& f, std::size_t state, const ModeIndex& mode,
                  const Problem& problem);
/// phi_2(f, n_i) = int rho chi_i p_j, the centered chain Poisson solve of
/// q_l = -int rho n_l psi_l p_j with the sign of the second corrector.
double corrector2(const KineticField& f, std::size_t state, const ModeIndex& mode,
                  const Problem& problem);

struct CorrectorSet {
  double phi = 0.0;
  std::vector<double> phi1;       ///< per state
  std::vector<double> phi2;       ///< per state
  std::vector<double> perturbed;  ///< phi + eps phi1 + eps^2 phi2, per state
};

CorrectorSet correctors(const KineticField& f, const ModeIndex& mode, double epsilon,
                        const Problem& problem);

/// Term-by-term evaluation of L^eps phi^eps(f, n_i). Names follow the source
/// operator (chain, transport, relaxation, noise) and the corrector order.
struct GeneratorTerms {
  double transport0 = 0.0;   ///< -(1/eps) (Af, p F)
  double noise0 = 0.0;       ///< (1/eps) (f n_i, p F)
  double relax0 = 0.0;       ///< (1/eps^2) (sigma L f, p F)
  double chain1 = 0.0;       ///< (1/eps) (M phi_1)(n_i)
  double transport1 = 0.0;   ///< -(Af, D phi_1)
  double noise1 = 0.0;       ///< (f n_i, D phi_1)
  double relax1 = 0.0;       ///< (1/eps) (sigma L f, D phi_1)
  double chain2 = 0.0;       ///< (M phi_2)(n_i)
  double transport2 = 0.0;   ///< -eps (Af, D phi_2)
  double noise2 = 0.0;       ///< eps (f n_i, D phi_2)
  double relax2 = 0.0;       ///< (sigma L f, D phi_2)

  /// Terms that cancel once the correctors solve their Poisson equations.
  double singular() const { return noise0 + chain1; }
  double relaxation() const { return relax0 + relax1 + relax2; }
  /// O(1) non-transport part; equals int rho h_eff p_j.
  double limit_part() const { return noise1 + chain2; }
  double transport() const { return transport0 + transport1 + transport2; }
  double order_eps() const { return noise2; }
  double total() const;
};

GeneratorTerms generator_eps(const KineticField& f, std::size_t state, const ModeIndex& mode,
                             double epsilon, const Problem& problem);

struct LimitGeneratorTerms {
  double diffusion = 0.0;  ///< (div(sigma^-1 K grad rho), p_j)
  double noise = 0.0;      ///< -sum_i nu_i (rho n_i psi_i, p_j)
  double total() const { return diffusion + noise; }
};

LimitGeneratorTerms limit_generator(const DensityField& rho, const ModeIndex& mode,
                                    const Problem& problem);

/// Carre du champ of the chain acting on the state vector g:
/// sum_l M_il (g_l - g_i)^2.
double chain_carre_du_champ(const Eigen::MatrixXd& generator, const std::vector<double>& g,
                            std::size_t state);

struct MartingaleOptions {
  ModeIndex mode{{1, 0}};
  double s = 0.25;
  double t = 0.5;
  std::size_t samples = 1000;
  std::uint64_t base_seed = 0;
  /// Psi(rho_s) = tanh(gain <rho_s, p_j>).
  double psi_gain = 1.0;
  std::size_t threads = 0;  ///< 0 = hardware concurrency
};

struct MartingaleReport {
  std::size_t samples = 0;
  double mean = 0.0;  ///< E[(phi^eps increment - int L^eps phi^eps) Psi]
  double stderr_mean = 0.0;
  double increment_variance = 0.0;  ///< Var of the unweighted residual
  double increment_variance_stderr = 0.0;
  double quadratic_variation = 0.0;  ///< E int_s^t Gamma(phi_1 + eps phi_2) du
  double quadratic_variation_stderr = 0.0;
};

/// Monte Carlo martingale test along run_kinetic trajectories with horizon
/// config.horizon >= options.t. Time integrals use the trapezoid rule on the
/// step grid, so s and t must be step times.
MartingaleReport martingale_residual(const Problem& problem, const KineticConfig& config,
                                     const DensityField& rho0, const MartingaleOptions& options);

}  // namespace rtlab
