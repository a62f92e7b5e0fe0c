#include "rtlab/velocity.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numeric>

#include "rtlab/error.hpp"

namespace rtlab {

namespace {

// Golub-Welsch: nodes are the eigenvalues of the Legendre Jacobi matrix,
// weights 2 * (first eigenvector component)^2.
void gauss_legendre(std::size_t n, std::vector<double>& x, std::vector<double>& w) {
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  Eigen::VectorXd sub(static_cast<Eigen::Index>(n - 1));
  for (std::size_t k = 1; k < n; ++k) {
    const double kk = static_cast<double>(k);
    sub(static_cast<Eigen::Index>(k - 1)) = kk / std::sqrt(4.0 * kk * kk - 1.0);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  x.resize(n);
  w.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    x[k] = solver.eigenvalues()(kk);
    const double v0 = solver.eigenvectors()(0, kk);
    w[k] = 2.0 * v0 * v0;
  }
  // Mirror pairs so the layout is exactly odd-symmetric.
  for (std::size_t k = 0; k < n / 2; ++k) {
    const std::size_t m = n - 1 - k;
    const double node = 0.5 * (x[m] - x[k]);
    const double weight = 0.5 * (w[m] + w[k]);
    x[k] = -node;
    x[m] = node;
    w[k] = weight;
    w[m] = weight;
  }
  if (n % 2 == 1) x[n / 2] = 0.0;
}

}  // namespace

VelocityModel parse_velocity_model(const std::string& name) {
  if (name == "GT2") return VelocityModel::GT2;
  if (name == "CONT") return VelocityModel::CONT;
  if (name == "GT4") return VelocityModel::GT4;
  throw Error("unknown velocity model '" + name + "' (expected GT2, CONT or GT4)");
}

std::string to_string(VelocityModel m) {
  switch (m) {
    case VelocityModel::GT2: return "GT2";
    case VelocityModel::CONT: return "CONT";
    case VelocityModel::GT4: return "GT4";
  }
  return "?";
}

VelocityQuadrature VelocityQuadrature::create(int dim, std::vector<double> nodes,
                                              std::vector<double> weights,
                                              std::vector<Speed> speeds,
                                              std::vector<double> equilibrium,
                                              std::optional<double> theta) {
  const std::size_t n = nodes.size();
  if (n < 2) throw Error("velocity quadrature needs at least 2 nodes");
  if (weights.size() != n || speeds.size() != n || equilibrium.size() != n) {
    throw Error("velocity quadrature arrays have inconsistent sizes");
  }
  if (dim != 1 && dim != 2) throw Error("velocity dimension must be 1 or 2");
  for (std::size_t k = 0; k < n; ++k) {
    if (!(weights[k] > 0.0) || !std::isfinite(weights[k])) {
      throw Error("velocity weights must be positive and finite");
    }
    if (!(equilibrium[k] > 0.0) || !std::isfinite(equilibrium[k])) {
      throw Error("equilibrium F must be positive and bounded");
    }
    for (int d = 0; d < dim; ++d) {
      if (!std::isfinite(speeds[k][static_cast<std::size_t>(d)])) {
        throw Error("velocity speeds must be finite");
      }
    }
  }
  if (theta && !(*theta > 0.0 && *theta <= 1.0)) {
    throw Error("nondegeneracy exponent must lie in (0, 1]");
  }

  VelocityQuadrature q;
  q.dim_ = dim;
  q.nodes_ = std::move(nodes);
  q.weights_ = std::move(weights);
  q.speeds_ = std::move(speeds);
  q.equilibrium_ = std::move(equilibrium);
  q.theta_ = theta;
  for (auto& s : q.speeds_) {
    if (dim == 1) s[1] = 0.0;
  }

  const double mass = q.mean_equilibrium();
  for (auto& w : q.weights_) w /= mass;

  for (const auto& s : q.speeds_) {
    q.max_speed_ = std::max(q.max_speed_, std::hypot(s[0], s[1]));
  }
  const auto flux = q.flux();
  for (int d = 0; d < dim; ++d) {
    if (std::abs(flux[static_cast<std::size_t>(d)]) > 1e-12 * std::max(1.0, q.max_speed_)) {
      throw Error("velocity model violates the null flux condition");
    }
  }

  for (std::size_t k = 0; k < n; ++k) {
    for (int a = 0; a < dim; ++a) {
      for (int b = 0; b < dim; ++b) {
        const auto ua = static_cast<std::size_t>(a);
        const auto ub = static_cast<std::size_t>(b);
        q.k_[ua][ub] += q.weights_[k] * q.speeds_[k][ua] * q.speeds_[k][ub] * q.equilibrium_[k];
      }
    }
  }
  Eigen::MatrixXd kmat(dim, dim);
  for (int a = 0; a < dim; ++a) {
    for (int b = 0; b < dim; ++b) {
      kmat(a, b) = q.k_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
    }
  }
  const double min_eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(kmat).eigenvalues()(0);
  if (!(min_eig > 1e-12 * std::max(1.0, kmat.trace()))) {
    throw Error("diffusion matrix K is singular; velocity model rejected");
  }
  return q;
}

double VelocityQuadrature::mean_equilibrium() const {
  double total = 0.0;
  for (std::size_t k = 0; k < size(); ++k) total += weights_[k] * equilibrium_[k];
  return total;
}

VelocityQuadrature::Speed VelocityQuadrature::flux() const {
  Speed total{0.0, 0.0};
  for (std::size_t k = 0; k < size(); ++k) {
    total[0] += weights_[k] * speeds_[k][0] * equilibrium_[k];
    total[1] += weights_[k] * speeds_[k][1] * equilibrium_[k];
  }
  return total;
}

double VelocityQuadrature::diffusion_norm() const {
  double total = 0.0;
  for (int a = 0; a < dim_; ++a) {
    for (int b = 0; b < dim_; ++b) {
      total += std::abs(k_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]);
    }
  }
  return total;
}

VelocityQuadrature build_velocity_space(const VelocitySpec& spec) {
  if (spec.nodes < 2) throw Error("velocity node count must be at least 2");
  switch (spec.model) {
    case VelocityModel::GT2:
      if (spec.nodes != 2) throw Error("GT2 has exactly 2 velocity nodes");
      return VelocityQuadrature::create(1, {-1.0, 1.0}, {0.5, 0.5}, {{-1.0, 0.0}, {1.0, 0.0}},
                                        {1.0, 1.0}, std::nullopt);
    case VelocityModel::GT4:
      if (spec.nodes != 4) throw Error("GT4 has exactly 4 velocity nodes");
      return VelocityQuadrature::create(2, {0.0, 1.0, 2.0, 3.0}, {0.25, 0.25, 0.25, 0.25},
                                        {{-1.0, 0.0}, {1.0, 0.0}, {0.0, -1.0}, {0.0, 1.0}},
                                        {1.0, 1.0, 1.0, 1.0}, std::nullopt);
    case VelocityModel::CONT: {
      std::vector<double> x, w;
      gauss_legendre(spec.nodes, x, w);
      std::vector<VelocityQuadrature::Speed> speeds;
      speeds.reserve(x.size());
      for (double v : x) speeds.push_back({v, 0.0});
      return VelocityQuadrature::create(1, x, w, std::move(speeds),
                                        std::vector<double>(x.size(), 0.5), 1.0);
    }
  }
  throw Error("unsupported velocity model");
}

}  // namespace rtlab
