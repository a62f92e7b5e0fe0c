#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "rtlab/error.hpp"
#include "rtlab/noise.hpp"
#include "rtlab/profile.hpp"
#include "support.hpp"

using namespace rtlab;

namespace {

// Random irreducible chain with every off-diagonal rate positive.
Eigen::MatrixXd random_generator(int s, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.2, 2.0);
  Eigen::MatrixXd m(s, s);
  for (int i = 0; i < s; ++i) {
    double row = 0.0;
    for (int j = 0; j < s; ++j) {
      if (i == j) continue;
      m(i, j) = u(rng);
      row += m(i, j);
    }
    m(i, i) = -row;
  }
  return m;
}

// Stationary law via the dense eigenvector of M^T for eigenvalue 0.
Eigen::VectorXd oracle_law(const Eigen::MatrixXd& m) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(m.transpose());
  Eigen::Index best = 0;
  es.eigenvalues().cwiseAbs().minCoeff(&best);
  Eigen::VectorXd nu = es.eigenvectors().col(best).real();
  return nu / nu.sum();
}

std::vector<DensityField> random_profiles(int s, const TorusGrid& g, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  std::vector<DensityField> out;
  for (int l = 0; l < s; ++l) {
    ProfileSpec spec;
    for (int k = 1; k <= 3; ++k) {
      spec.push_back({n(rng), FourierTerm::Shape::Cos, {k, 0}});
      spec.push_back({n(rng), FourierTerm::Shape::Sin, {k, 0}});
    }
    out.push_back(evaluate_profile(spec, g));
  }
  return out;
}

}  // namespace

TEST_SUITE("noise") {

TEST_CASE("stationary laws") {
  Eigen::MatrixXd t(2, 2);
  t << -3, 3, 3, -3;
  const auto nu = stationary_law(t);
  CHECK(nu(0) == doctest::Approx(0.5));
  CHECK(nu(1) == doctest::Approx(0.5));

  Eigen::MatrixXd c(3, 3);
  c << -1, 1, 0, 0, -1, 1, 1, 0, -1;
  const auto nc = stationary_law(c);
  for (int i = 0; i < 3; ++i) CHECK(nc(i) == doctest::Approx(1.0 / 3.0));

  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(4, 4);
  b << -1, 1, 0, 0, 1, -1, 0, 0, 0, 0, -2, 2, 0, 0, 2, -2;
  CHECK_THROWS_WITH_AS(stationary_law(b), "non-ergodic noise model", Error);
  Eigen::MatrixXd transient(3, 3);
  transient << -1, 1, 0, 0, -1, 1, 0, 1, -1;
  CHECK_THROWS_WITH_AS(stationary_law(transient), "non-ergodic noise model", Error);

  std::mt19937_64 rng(2);
  for (int s = 3; s <= 5; ++s) {
    const auto m = random_generator(s, rng);
    const auto nu_lib = stationary_law(m);
    const auto nu_ref = oracle_law(m);
    CHECK((nu_lib - nu_ref).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((nu_lib.transpose() * m).cwiseAbs().maxCoeff() <= 1e-14);
  }
}

TEST_CASE("Poisson solves") {
  const double lambda = 1.7, c = 0.6;
  Eigen::MatrixXd t(2, 2);
  t << -lambda, lambda, lambda, -lambda;
  const Eigen::VectorXd nu = stationary_law(t);
  Eigen::VectorXd v(2);
  v << c, -c;
  const auto psi = solve_poisson(t, nu, v);
  CHECK(psi(0) == doctest::Approx(-c / (2 * lambda)).epsilon(1e-15));
  CHECK(psi(1) == doctest::Approx(c / (2 * lambda)).epsilon(1e-15));
  const auto zero = solve_poisson(t, nu, Eigen::VectorXd::Constant(2, 4.2));
  CHECK(zero.cwiseAbs().maxCoeff() <= 1e-15);

  std::mt19937_64 rng(4);
  for (int s = 3; s <= 5; ++s) {
    const auto m = random_generator(s, rng);
    const auto law = stationary_law(m);
    const Eigen::VectorXd g = Eigen::VectorXd::Random(s);
    const auto x = solve_poisson(m, law, g);
    const Eigen::VectorXd centered = g.array() - law.dot(g);
    CHECK((m * x - centered).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(std::abs(law.dot(x)) <= 1e-12);
    // Independent route: least-squares solve of the bordered system.
    Eigen::MatrixXd a(s + 1, s);
    a.topRows(s) = m;
    a.row(s) = law.transpose();
    Eigen::VectorXd rhs(s + 1);
    rhs << centered, 0.0;
    const Eigen::VectorXd y = a.colPivHouseholderQr().solve(rhs);
    CHECK((x - y).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("noise model validation") {
  TorusGrid g(16, 1);
  const auto n1 = evaluate_profile(parse_profile("1 cos 1"), g);
  Eigen::MatrixXd t(2, 2);
  t << -1, 1, 1, -1;
  CHECK_THROWS_AS(NoiseModel::create(g, {n1, n1}, t), Error);  // not centered
  Eigen::MatrixXd bad(2, 2);
  bad << -1, 2, 1, -1;
  CHECK_THROWS_AS(NoiseModel::create(g, {n1, n1}, bad), Error);  // rows do not sum to 0
  const auto tel = NoiseModel::telegraph(g, n1, 2.0);
  // W^{1,inf}: sup |cos| = 1 and difference quotients of cos(2 pi x) reach about 2 pi.
  CHECK(tel.c_star() > 6.0);
  CHECK(tel.c_star() <= 2 * std::numbers::pi);
}

TEST_CASE("telegraph statistics in closed form") {
  TorusGrid g(32, 1);
  const double lambda = 1.3, amp = 0.8;
  const auto n1 = evaluate_profile(parse_profile("0.8 cos 1; 0.3 sin 2"), g);
  const auto model = NoiseModel::telegraph(g, n1, lambda);
  const auto st = NoiseStatistics::compute(model, g);
  double norm_sq = 0.0;
  for (std::size_t i = 0; i < g.points(); ++i) {
    CHECK(std::abs(st.psi()[0][i] + n1[i] / (2 * lambda)) <= 1e-12);
    CHECK(std::abs(st.psi()[1][i] - n1[i] / (2 * lambda)) <= 1e-12);
    CHECK(std::abs(st.drift_paper()[i] + n1[i] * n1[i] / (2 * lambda)) <= 1e-12);
    CHECK(std::abs(st.drift_effective()[i] - n1[i] * n1[i] / (2 * lambda)) <= 1e-12);
    CHECK(std::abs(st.drift_effective()[i] - 0.5 * st.kernel(i, i)) <= 1e-12);
    for (std::size_t j = 0; j < g.points(); ++j) {
      CHECK(std::abs(st.kernel(i, j) - n1[i] * n1[j] / lambda) <= 1e-12);
    }
    norm_sq += n1[i] * n1[i] * g.cell_volume();
  }
  REQUIRE(st.modes().size() == 1);
  CHECK(std::abs(st.modes()[0].eigenvalue - norm_sq / lambda) <= 1e-12);
  CHECK(norm_sq == doctest::Approx((amp * amp + 0.09) / 2));
  // Eigenvector n1 / ||n1||, up to sign.
  const auto& e = st.modes()[0].eigenfunction;
  const double sign = e[0] * n1[0] > 0 ? 1.0 : -1.0;
  for (std::size_t i = 0; i < g.points(); ++i) {
    CHECK(std::abs(sign * e[i] - n1[i] / std::sqrt(norm_sq)) <= 1e-12);
  }
  for (std::size_t i = 1; i < st.eigenvalues().size(); ++i) CHECK(st.eigenvalues()[i] == 0.0);
  for (const auto& chi : st.chi()) {
    for (double x : chi.values) CHECK(std::abs(x) <= 1e-14);
  }
}

TEST_CASE("single cosine telegraph eigenvalue") {
  TorusGrid g(64, 1);
  const auto model = NoiseModel::telegraph(g, evaluate_profile(parse_profile("2 cos 1"), g), 4.0);
  const auto st = NoiseStatistics::compute(model, g);
  CHECK(st.modes()[0].eigenvalue == doctest::Approx(4.0 / (2 * 4.0)).epsilon(1e-13));
}

TEST_CASE("random chains: sign ledger and spectral factorization") {
  TorusGrid g(32, 1);
  std::mt19937_64 rng(6);
  for (int s = 3; s <= 5; ++s) {
    const auto m = random_generator(s, rng);
    const auto nu = stationary_law(m);
    const auto states = center_profiles(random_profiles(s, g, rng), nu);
    const auto model = NoiseModel::create(g, states, m);
    const auto st = NoiseStatistics::compute(model, g);
    const auto p = static_cast<Eigen::Index>(g.points());

    // Kernel from its definition with an independent dense inverse of M - 1 nu^T.
    const Eigen::MatrixXd minv = (m - Eigen::VectorXd::Ones(s) * nu.transpose()).inverse();
    Eigen::MatrixXd n(s, p), psi(s, p);
    for (int l = 0; l < s; ++l) {
      for (Eigen::Index i = 0; i < p; ++i) n(l, i) = states[static_cast<std::size_t>(l)][static_cast<std::size_t>(i)];
    }
    psi = minv * n;
    Eigen::MatrixXd k(p, p);
    for (Eigen::Index x = 0; x < p; ++x) {
      for (Eigen::Index y = 0; y < p; ++y) {
        double v = 0.0;
        for (int l = 0; l < s; ++l) v -= nu(l) * (n(l, y) * psi(l, x) + n(l, x) * psi(l, y));
        k(x, y) = v;
      }
    }
    const Eigen::MatrixXd klib = st.kernel_matrix();
    CHECK((klib - k).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((klib - klib.transpose()).cwiseAbs().maxCoeff() <= 1e-14);
    for (Eigen::Index x = 0; x < p; ++x) {
      const auto xi = static_cast<std::size_t>(x);
      double h_paper = 0.0;
      for (int l = 0; l < s; ++l) h_paper += nu(l) * n(l, x) * psi(l, x);
      CHECK(std::abs(st.drift_paper()[xi] - h_paper) <= 1e-12);
      CHECK(std::abs(st.drift_effective()[xi] + h_paper) <= 1e-12);
      CHECK(std::abs(st.drift_effective()[xi] - 0.5 * k(x, x)) <= 1e-12);
      CHECK(st.drift_effective()[xi] >= -1e-14);
    }

    // Dense eigendecomposition of dx k as the oracle for Q.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.cell_volume() * k);
    const Eigen::VectorXd ev = es.eigenvalues().reverse();
    for (std::size_t j = 0; j < st.modes().size(); ++j) {
      CHECK(std::abs(st.modes()[j].eigenvalue - ev(static_cast<Eigen::Index>(j))) <= 1e-10);
    }
    CHECK(ev.minCoeff() >= -1e-10);
    Eigen::MatrixXd rec = Eigen::MatrixXd::Zero(p, p);
    for (const auto& mode : st.modes()) {
      Eigen::Map<const Eigen::VectorXd> e(mode.eigenfunction.values.data(), p);
      rec += mode.eigenvalue * e * e.transpose();
      CHECK(e.squaredNorm() * g.cell_volume() == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK((rec - k).cwiseAbs().maxCoeff() <= 1e-8);
    // Poisson residual per grid point.
    for (Eigen::Index i = 0; i < p; ++i) {
      Eigen::VectorXd col(s);
      for (int l = 0; l < s; ++l) col(l) = st.psi()[static_cast<std::size_t>(l)][static_cast<std::size_t>(i)];
      CHECK((m * col - n.col(i)).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, n.cwiseAbs().maxCoeff()));
      CHECK(std::abs(nu.dot(col)) <= 1e-12);
    }
  }
}

TEST_CASE("path sampling: holding times scale with eps^2") {
  TorusGrid g(8, 1);
  const auto model = NoiseModel::telegraph(g, evaluate_profile(parse_profile("1 cos 1"), g), 1.0);
  for (double eps : {1.0, 0.5}) {
    // First jump time is Exp(1 / eps^2) from either state; the horizon makes
    // truncation negligible.
    double total = 0.0, total_sq = 0.0;
    const int samples = 20000;
    for (int seed = 0; seed < samples; ++seed) {
      const auto path = sample_path(model, eps, 60.0 * eps * eps, static_cast<std::uint64_t>(seed));
      REQUIRE(path.jumps() >= 1);
      const double h = path.jump_times[1];
      total += h;
      total_sq += h * h;
    }
    const double mean = total / samples;
    const double sd = std::sqrt(total_sq / samples - mean * mean);
    CHECK(std::abs(mean - eps * eps) <= 3 * sd / std::sqrt(static_cast<double>(samples)));
  }
}

TEST_CASE("path sampling: occupation and reproducibility") {
  TorusGrid g(8, 1);
  Eigen::MatrixXd m(3, 3);
  m << -2, 1.5, 0.5, 0.5, -1, 0.5, 1, 2, -3;
  std::mt19937_64 prng(1);
  const auto states = center_profiles(random_profiles(3, g, prng), stationary_law(m));
  const auto model = NoiseModel::create(g, states, m);
  const auto nu = model.law();
  const auto a = sample_path(model, 1.0, 4000.0, std::uint64_t{42});
  const auto b = sample_path(model, 1.0, 4000.0, std::uint64_t{42});
  CHECK(a.jump_times == b.jump_times);
  CHECK(a.states == b.states);
  const auto occ = a.occupation(0.0, 4000.0, 3);
  double sum = 0.0;
  for (double o : occ) sum += o;
  CHECK(sum == doctest::Approx(4000.0).epsilon(1e-12));
  for (int i = 0; i < 3; ++i) CHECK(occ[static_cast<std::size_t>(i)] / 4000.0 == doctest::Approx(nu(i)).epsilon(0.05));
  // Sub-interval occupation is additive.
  const auto o1 = a.occupation(10.0, 17.3, 3);
  const auto o2 = a.occupation(17.3, 25.0, 3);
  const auto o12 = a.occupation(10.0, 25.0, 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(o1[i] + o2[i] == doctest::Approx(o12[i]).epsilon(1e-12));
  for (std::size_t s = 1; s < a.jump_times.size(); ++s) CHECK(a.jump_times[s] > a.jump_times[s - 1]);
}

TEST_CASE("time integral of the autocorrelation matches the kernel") {
  // E int_0^S m_0(y) m_t(x) dt = -sum nu_i n_i(y) psi_i(x) for large S.
  TorusGrid g(8, 1);
  Eigen::MatrixXd m(3, 3);
  m << -2, 1.5, 0.5, 0.5, -1, 0.5, 1, 2, -3;
  std::mt19937_64 prng(8);
  const auto states = center_profiles(random_profiles(3, g, prng), stationary_law(m));
  const auto model = NoiseModel::create(g, states, m);
  const auto st = NoiseStatistics::compute(model, g);
  const std::size_t x = 2, y = 5;
  double expected = 0.0;
  for (std::size_t l = 0; l < 3; ++l) expected -= model.law()(static_cast<Eigen::Index>(l)) * states[l][y] * st.psi()[l][x];

  const double horizon = 12.0;
  const int samples = 20000;
  double sum = 0.0, sum_sq = 0.0;
  for (int k = 0; k < samples; ++k) {
    const auto path = sample_path(model, 1.0, horizon, static_cast<std::uint64_t>(k) + 1000);
    const auto occ = path.occupation(0.0, horizon, 3);
    double v = 0.0;
    for (std::size_t l = 0; l < 3; ++l) v += occ[l] * states[l][x];
    v *= states[path.states.front()][y];
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / samples;
  const double se = std::sqrt((sum_sq / samples - mean * mean) / samples);
  CHECK(std::abs(mean - expected) <= 3 * se);
}

}  // TEST_SUITE
