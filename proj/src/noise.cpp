#include "rtlab/noise.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <random>

#include "rtlab/error.hpp"

namespace rtlab {

namespace {

void validate_generator(const Eigen::MatrixXd& m) {
  if (m.rows() == 0 || m.rows() != m.cols()) throw Error("rate matrix must be square and non-empty");
  if (!m.allFinite()) throw Error("rate matrix has non-finite entries");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (i != j && m(i, j) < 0.0) {
        throw Error(fmt::format("rate matrix entry ({}, {}) is negative", i, j));
      }
    }
    if (std::abs(m.row(i).sum()) > 1e-12 * scale) {
      throw Error(fmt::format("rate matrix row {} does not sum to zero", i));
    }
  }
}

Eigen::MatrixXd as_matrix(const std::vector<DensityField>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows.empty() ? 0 : rows.front().size()));
  for (std::size_t s = 0; s < rows.size(); ++s) {
    for (std::size_t i = 0; i < rows[s].size(); ++i) {
      out(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(i)) = rows[s][i];
    }
  }
  return out;
}

std::vector<DensityField> as_fields(const Eigen::MatrixXd& m) {
  std::vector<DensityField> out;
  out.reserve(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index s = 0; s < m.rows(); ++s) {
    DensityField f(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.cols(); ++i) f[static_cast<std::size_t>(i)] = m(s, i);
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace

Eigen::VectorXd stationary_law(const Eigen::MatrixXd& generator) {
  validate_generator(generator);
  const Eigen::Index n = generator.rows();
  Eigen::FullPivLU<Eigen::MatrixXd> lu(generator.transpose());
  lu.setThreshold(1e-10);
  if (n - lu.rank() != 1) throw Error("non-ergodic noise model");
  Eigen::VectorXd nu = lu.kernel().col(0);
  nu /= nu.sum();
  if ((nu.array() <= 1e-14).any()) throw Error("non-ergodic noise model");
  // One refinement pass against the normalized system [M^T; 1^T] nu = [0; 1].
  Eigen::MatrixXd aug(n + 1, n);
  aug.topRows(n) = generator.transpose();
  aug.row(n).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
  rhs(n) = 1.0;
  Eigen::VectorXd correction = aug.colPivHouseholderQr().solve(rhs - aug * nu);
  nu += correction;
  return nu;
}

PoissonSolver::PoissonSolver(const Eigen::MatrixXd& generator, const Eigen::VectorXd& nu)
    : nu_(nu) {
  const Eigen::Index n = generator.rows();
  Eigen::MatrixXd a = generator - Eigen::VectorXd::Ones(n) * nu.transpose();
  lu_.compute(a);
  if (!lu_.isInvertible()) throw Error("Poisson solve is singular beyond centering");
}

Eigen::VectorXd PoissonSolver::solve(const Eigen::VectorXd& values) const {
  const Eigen::VectorXd centered = values.array() - nu_.dot(values);
  return lu_.solve(centered);
}

Eigen::MatrixXd PoissonSolver::solve(const Eigen::MatrixXd& values) const {
  const Eigen::RowVectorXd means = nu_.transpose() * values;
  const Eigen::MatrixXd centered = values.rowwise() - means;
  return lu_.solve(centered);
}

Eigen::VectorXd solve_poisson(const Eigen::MatrixXd& generator, const Eigen::VectorXd& nu,
                              const Eigen::VectorXd& values) {
  return PoissonSolver(generator, nu).solve(values);
}

double w1inf_norm(const DensityField& u, const TorusGrid& grid) {
  double bound = 0.0;
  const double inv_h = 1.0 / grid.spacing();
  for (std::size_t i = 0; i < u.size(); ++i) {
    bound = std::max(bound, std::abs(u[i]));
    for (int d = 0; d < grid.dim(); ++d) {
      bound = std::max(bound, std::abs(u[grid.forward_neighbour(i, d)] - u[i]) * inv_h);
    }
  }
  return bound;
}

std::vector<DensityField> center_profiles(const std::vector<DensityField>& states,
                                          const Eigen::VectorXd& nu) {
  if (states.empty()) return {};
  DensityField mean(states.front().size());
  for (std::size_t s = 0; s < states.size(); ++s) {
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += nu(static_cast<Eigen::Index>(s)) * states[s][i];
  }
  auto out = states;
  for (auto& f : out) {
    for (std::size_t i = 0; i < f.size(); ++i) f[i] -= mean[i];
  }
  return out;
}

NoiseModel::NoiseModel(std::vector<DensityField> states, Eigen::MatrixXd generator,
                       Eigen::VectorXd nu, double c_star)
    : states_(std::move(states)),
      generator_(std::move(generator)),
      nu_(std::move(nu)),
      poisson_(generator_, nu_),
      c_star_(c_star) {}

NoiseModel NoiseModel::create(const TorusGrid& grid, std::vector<DensityField> states,
                              Eigen::MatrixXd generator) {
  if (states.size() != static_cast<std::size_t>(generator.rows())) {
    throw Error("number of noise states does not match the rate matrix");
  }
  auto nu = stationary_law(generator);
  double scale = 0.0;
  double c_star = 0.0;
  for (const auto& s : states) {
    if (s.size() != grid.points()) throw Error("noise profile does not match the grid");
    if (!s.finite()) throw Error("noise profile has non-finite values");
    for (double v : s.values) scale = std::max(scale, std::abs(v));
    c_star = std::max(c_star, w1inf_norm(s, grid));
  }
  for (std::size_t i = 0; i < grid.points(); ++i) {
    double mean = 0.0;
    for (std::size_t s = 0; s < states.size(); ++s) mean += nu(static_cast<Eigen::Index>(s)) * states[s][i];
    if (std::abs(mean) > 1e-12 * std::max(1.0, scale)) {
      throw Error("noise model is not centered (sum_i nu_i n_i != 0)");
    }
  }
  return NoiseModel(std::move(states), std::move(generator), std::move(nu), c_star);
}

NoiseModel NoiseModel::telegraph(const TorusGrid& grid, DensityField n1, double rate) {
  if (!(rate > 0.0)) throw Error("telegraph rate must be positive");
  DensityField n2 = n1;
  for (auto& v : n2.values) v = -v;
  Eigen::MatrixXd m(2, 2);
  m << -rate, rate, rate, -rate;
  return create(grid, {std::move(n1), std::move(n2)}, std::move(m));
}

Eigen::MatrixXd NoiseModel::state_matrix() const { return as_matrix(states_); }

NoiseStatistics NoiseStatistics::compute(const NoiseModel& model, const TorusGrid& grid) {
  NoiseStatistics st;
  const Eigen::MatrixXd n = model.state_matrix();
  const Eigen::MatrixXd psi = model.poisson().solve(n);
  const Eigen::VectorXd& nu = model.law();
  const auto s = n.rows();
  const auto p = n.cols();

  st.psi_ = as_fields(psi);
  const Eigen::MatrixXd n_psi = n.cwiseProduct(psi);
  st.chi_ = as_fields(model.poisson().solve(n_psi));
  st.drift_paper_ = DensityField(static_cast<std::size_t>(p));
  for (Eigen::Index i = 0; i < p; ++i) {
    st.drift_paper_[static_cast<std::size_t>(i)] = nu.dot(n_psi.col(i));
  }

  st.factors_.resize(p, 2 * s);
  st.factors_.leftCols(s) = n.transpose();
  st.factors_.rightCols(s) = psi.transpose();
  st.coupling_ = Eigen::MatrixXd::Zero(2 * s, 2 * s);
  st.coupling_.topRightCorner(s, s) = -nu.asDiagonal().toDenseMatrix();
  st.coupling_.bottomLeftCorner(s, s) = -nu.asDiagonal().toDenseMatrix();

  st.drift_effective_ = DensityField(static_cast<std::size_t>(p));
  for (std::size_t i = 0; i < static_cast<std::size_t>(p); ++i) {
    st.drift_effective_[i] = 0.5 * st.kernel(i, i);
  }

  // Eigenpairs of the grid operator dx^N k via a thin QR of the low-rank factors.
  const double dv = grid.cell_volume();
  const Eigen::Index r = std::min(p, 2 * s);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(st.factors_);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(p, r);
  const Eigen::MatrixXd rmat =
      qr.matrixQR().topRows(r).triangularView<Eigen::Upper>().toDenseMatrix();
  Eigen::MatrixXd small = dv * rmat * st.coupling_ * rmat.transpose();
  small = 0.5 * (small + small.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(small);
  const Eigen::VectorXd lambda = eig.eigenvalues();
  const double lambda_max = std::max(0.0, lambda.maxCoeff());
  for (Eigen::Index j = 0; j < r; ++j) {
    if (lambda(j) < -1e-8 * lambda_max && lambda(j) < -1e-10) {
      throw Error(fmt::format("kernel not PSD (eigenvalue {:.3e})", lambda(j)));
    }
  }
  const Eigen::MatrixXd vectors = q * eig.eigenvectors();
  const double inv_sqrt_dv = 1.0 / std::sqrt(dv);
  for (Eigen::Index j = r - 1; j >= 0; --j) {
    const double l = lambda(j) < 1e-10 ? 0.0 : lambda(j);
    st.eigenvalues_.push_back(l);
    if (l > 1e-10 * lambda_max && l > 0.0) {
      DensityField e(static_cast<std::size_t>(p));
      for (Eigen::Index i = 0; i < p; ++i) {
        e[static_cast<std::size_t>(i)] = vectors(i, j) * inv_sqrt_dv;
      }
      st.modes_.push_back({l, std::move(e)});
    }
  }

  st.c_star_ = model.c_star();
  for (const auto& f : st.psi_) st.c_star_ = std::max(st.c_star_, w1inf_norm(f, grid));
  for (const auto& f : st.chi_) st.c_star_ = std::max(st.c_star_, w1inf_norm(f, grid));
  return st;
}

double NoiseStatistics::kernel(std::size_t x, std::size_t y) const {
  const auto xi = static_cast<Eigen::Index>(x);
  const auto yi = static_cast<Eigen::Index>(y);
  return factors_.row(xi) * coupling_ * factors_.row(yi).transpose();
}

Eigen::MatrixXd NoiseStatistics::kernel_matrix() const {
  return factors_ * coupling_ * factors_.transpose();
}

std::size_t NoisePath::state_at(double t) const {
  const auto it = std::upper_bound(jump_times.begin(), jump_times.end(), t);
  const auto seg = static_cast<std::size_t>(std::distance(jump_times.begin(), it));
  return states[seg == 0 ? 0 : seg - 1];
}

std::vector<double> NoisePath::occupation(double t0, double t1, std::size_t n_states) const {
  std::vector<double> out(n_states, 0.0);
  auto it = std::upper_bound(jump_times.begin(), jump_times.end(), t0);
  std::size_t seg = static_cast<std::size_t>(std::distance(jump_times.begin(), it));
  seg = seg == 0 ? 0 : seg - 1;
  double cursor = t0;
  while (cursor < t1) {
    const double end = seg + 1 < jump_times.size() ? std::min(jump_times[seg + 1], t1) : t1;
    out[states[seg]] += end - cursor;
    cursor = end;
    ++seg;
  }
  return out;
}

NoisePath sample_path(const NoiseModel& model, double epsilon, double horizon, Rng& rng) {
  if (!(epsilon > 0.0) || !(horizon > 0.0)) throw Error("sample_path needs eps > 0 and T > 0");
  const auto& m = model.generator();
  const std::size_t n = model.size();
  std::vector<double> law(n);
  for (std::size_t i = 0; i < n; ++i) law[i] = model.law()(static_cast<Eigen::Index>(i));
  std::discrete_distribution<std::size_t> initial(law.begin(), law.end());

  NoisePath path;
  path.epsilon = epsilon;
  path.horizon = horizon;
  std::size_t state = initial(rng);
  path.jump_times.push_back(0.0);
  path.states.push_back(state);

  const double inv_eps2 = 1.0 / (epsilon * epsilon);
  double t = 0.0;
  while (true) {
    const auto si = static_cast<Eigen::Index>(state);
    const double rate = -m(si, si) * inv_eps2;
    if (!(rate > 0.0)) break;
    t += std::exponential_distribution<double>(rate)(rng);
    if (t >= horizon) break;
    std::vector<double> weights(n);
    for (std::size_t j = 0; j < n; ++j) {
      weights[j] = j == state ? 0.0 : m(si, static_cast<Eigen::Index>(j));
    }
    state = std::discrete_distribution<std::size_t>(weights.begin(), weights.end())(rng);
    path.jump_times.push_back(t);
    path.states.push_back(state);
  }
  return path;
}

NoisePath sample_path(const NoiseModel& model, double epsilon, double horizon, std::uint64_t seed) {
  Rng rng(seed);
  return sample_path(model, epsilon, horizon, rng);
}

}  // namespace rtlab
