#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "rtlab/grid.hpp"

namespace rtlab {

enum class VelocityModel {
  GT2,   ///< two velocities +-1 with equal weight (Goldstein-Taylor), N = 1
  CONT,  ///< V = [-1, 1], F = 1/2, a(v) = v, Gauss-Legendre nodes, N = 1
  GT4,   ///< four velocities +-e_1, +-e_2 with equal weight, N = 2
};

struct VelocitySpec {
  VelocityModel model = VelocityModel::GT2;
  std::size_t nodes = 2;
};

VelocityModel parse_velocity_model(const std::string& name);
std::string to_string(VelocityModel m);

/// Discrete velocity space (V, mu, a, F).
///
/// Construction enforces <F> = 1 (by renormalizing the weights), the null flux
/// condition and positive definiteness of K = sum_k w_k a_k (x) a_k F_k.
class VelocityQuadrature {
 public:
  using Speed = std::array<double, 2>;

  static VelocityQuadrature create(int dim, std::vector<double> nodes, std::vector<double> weights,
                                   std::vector<Speed> speeds, std::vector<double> equilibrium,
                                   std::optional<double> nondegeneracy_exponent);

  int dim() const { return dim_; }
  std::size_t size() const { return nodes_.size(); }
  double node(std::size_t k) const { return nodes_[k]; }
  double weight(std::size_t k) const { return weights_[k]; }
  const Speed& speed(std::size_t k) const { return speeds_[k]; }
  double equilibrium(std::size_t k) const { return equilibrium_[k]; }
  const Tensor2& diffusion_matrix() const { return k_; }
  double max_speed() const { return max_speed_; }
  /// Continuum exponent theta of the averaging-lemma condition, when the
  /// modelled velocity space has one. Metadata only.
  std::optional<double> nondegeneracy_exponent() const { return theta_; }

  /// sum_k w_k F_k
  double mean_equilibrium() const;
  /// sum_k w_k a_k F_k
  Speed flux() const;
  /// Entrywise l1 norm of K, the bound used by explicit diffusion step limits.
  double diffusion_norm() const;

 private:
  VelocityQuadrature() = default;
  int dim_ = 1;
  std::vector<double> nodes_;
  std::vector<double> weights_;
  std::vector<Speed> speeds_;
  std::vector<double> equilibrium_;
  Tensor2 k_{};
  double max_speed_ = 0.0;
  std::optional<double> theta_;
};

VelocityQuadrature build_velocity_space(const VelocitySpec& spec);

}  // namespace rtlab
