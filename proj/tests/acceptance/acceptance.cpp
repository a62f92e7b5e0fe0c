// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "rtlab/cli.hpp"
#include "rtlab/config.hpp"
#include "rtlab/correctors.hpp"
#include "rtlab/harness.hpp"
#include "rtlab/profile.hpp"

using namespace rtlab;
namespace fs = std::filesystem;
constexpr double pi = std::numbers::pi;

namespace {

const fs::path kConfigs = RTLAB_CONFIG_DIR;
const fs::path kWork = RTLAB_WORK_DIR;

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, std::string note) {
    if (!ok) pass = false;
    notes.push_back((ok ? "" : "!") + std::move(note));
  }
};

int failures = 0;

void criterion(int id, double budget_seconds, const std::function<void(Outcome&)>& body) {
  Outcome out;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(out);
  } catch (const std::exception& e) {
    out.require(false, fmt::format("error: {}", e.what()));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.require(secs <= budget_seconds, fmt::format("runtime {:.2f}s (budget {:g}s)", secs, budget_seconds));
  std::string detail;
  for (const auto& n : out.notes) detail += (detail.empty() ? "" : "; ") + n;
  std::cout << fmt::format("criterion {}: {} {}\n", id, out.pass ? "PASS" : "FAIL", detail)
            << std::flush;
  if (!out.pass) ++failures;
}

std::string sci(double x) { return fmt::format("{:.3e}", x); }

KineticField random_kinetic(std::size_t points, std::size_t velocities, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.2, 2.0);
  KineticField f(points, velocities);
  for (auto& x : f.data()) x = u(rng);
  return f;
}

Eigen::MatrixXd random_generator(int s, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.2, 2.0);
  Eigen::MatrixXd m(s, s);
  for (int i = 0; i < s; ++i) {
    double row = 0.0;
    for (int j = 0; j < s; ++j) {
      if (i != j) row += (m(i, j) = u(rng));
    }
    m(i, i) = -row;
  }
  return m;
}

double quad(const TorusGrid& g, const std::function<double(std::size_t)>& fn) {
  double total = 0.0;
  for (std::size_t i = 0; i < g.points(); ++i) total += fn(i);
  return total * g.cell_volume();
}

std::map<std::string, double> read_checks(const fs::path& summary) {
  std::ifstream in(summary);
  std::string line;
  std::getline(in, line);
  std::map<std::string, double> out;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string name, value;
    std::getline(ss, name, ',');
    std::getline(ss, value, ',');
    out[name] = std::stod(value);
  }
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// 1. Velocity-space structure, dissipation identity, relaxation semigroup.
void structural(Outcome& out) {
  double worst_f = 0.0, worst_flux = 0.0, min_eig = 1e300;
  for (const auto& spec : {VelocitySpec{VelocityModel::GT2, 2}, VelocitySpec{VelocityModel::CONT, 8},
                           VelocitySpec{VelocityModel::GT4, 4}}) {
    const auto v = build_velocity_space(spec);
    double mean = 0.0;
    std::array<double, 2> flux{0.0, 0.0};
    Eigen::Matrix2d k = Eigen::Matrix2d::Zero();
    for (std::size_t j = 0; j < v.size(); ++j) {
      const double wf = v.weight(j) * v.equilibrium(j);
      mean += wf;
      for (int a = 0; a < 2; ++a) {
        flux[static_cast<std::size_t>(a)] += wf * v.speed(j)[static_cast<std::size_t>(a)];
        for (int b = 0; b < 2; ++b) {
          k(a, b) += wf * v.speed(j)[static_cast<std::size_t>(a)] * v.speed(j)[static_cast<std::size_t>(b)];
        }
      }
    }
    worst_f = std::max(worst_f, std::abs(mean - 1.0));
    worst_flux = std::max({worst_flux, std::abs(flux[0]), std::abs(flux[1])});
    const int d = v.dim();
    min_eig = std::min(min_eig, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(k.topLeftCorner(d, d))
                                    .eigenvalues()
                                    .minCoeff());
  }
  out.require(worst_f <= 1e-12, "|<F>-1| " + sci(worst_f));
  out.require(worst_flux <= 1e-12, "flux " + sci(worst_flux));
  out.require(min_eig > 0.0, "min eig K " + sci(min_eig));

  TorusGrid g(32, 1);
  const auto vel = build_velocity_space({VelocityModel::CONT, 8});
  const auto sigma = Opacity::rational(1.0, 2.0);
  std::mt19937_64 rng(2024);
  double dissip = 0.0, semigroup = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto f = random_kinetic(g.points(), vel.size(), rng);
    // Both sides by direct quadrature over x and v with weight 1/F.
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < g.points(); ++i) {
      double rho = 0.0;
      for (std::size_t k = 0; k < vel.size(); ++k) rho += vel.weight(k) * f(i, k);
      const double s = sigma(rho);
      for (std::size_t k = 0; k < vel.size(); ++k) {
        const double lf = rho * vel.equilibrium(k) - f(i, k);
        const double w = vel.weight(k) / vel.equilibrium(k) * g.cell_volume();
        lhs += w * s * lf * f(i, k);
        rhs -= w * s * lf * lf;
      }
    }
    dissip = std::max(dissip, std::abs(lhs - rhs) / std::abs(rhs));
    const auto a = relax_exact(relax_exact(f, 0.25, sigma, vel), 0.6, sigma, vel);
    const auto b = relax_exact(f, 0.85, sigma, vel);
    for (std::size_t j = 0; j < a.data().size(); ++j) {
      semigroup = std::max(semigroup, std::abs(a.data()[j] - b.data()[j]));
    }
  }
  out.require(dissip <= 1e-12, "dissipation rel " + sci(dissip));
  out.require(semigroup <= 1e-12, "semigroup " + sci(semigroup));
}

// 2. Telegraph closed forms and Poisson residuals on random chains.
void noise_algebra(Outcome& out) {
  TorusGrid g(32, 1);
  const double lambda = 1.3;
  const auto n1 = evaluate_profile(parse_profile("0.8 cos 1; 0.3 sin 2"), g);
  const auto model = NoiseModel::telegraph(g, n1, lambda);
  const auto st = NoiseStatistics::compute(model, g);
  double psi = 0.0, kern = 0.0, ledger = 0.0;
  for (std::size_t x = 0; x < g.points(); ++x) {
    psi = std::max({psi, std::abs(st.psi()[0][x] + n1[x] / (2 * lambda)),
                    std::abs(st.psi()[1][x] - n1[x] / (2 * lambda))});
    for (std::size_t y = 0; y < g.points(); ++y) {
      kern = std::max(kern, std::abs(st.kernel(x, y) - n1[x] * n1[y] / lambda));
    }
    ledger = std::max({ledger, std::abs(st.drift_effective()[x] - 0.5 * st.kernel(x, x)),
                       std::abs(st.drift_effective()[x] + st.drift_paper()[x])});
  }
  const double norm_sq = quad(g, [&](std::size_t i) { return n1[i] * n1[i]; });
  const double lam1 = std::abs(st.modes().at(0).eigenvalue - norm_sq / lambda);
  out.require(psi <= 1e-12, "psi " + sci(psi));
  out.require(kern <= 1e-12, "k " + sci(kern));
  out.require(lam1 <= 1e-12, "lambda_1 " + sci(lam1));
  out.require(ledger <= 1e-12, "h_eff " + sci(ledger));

  std::mt19937_64 rng(99);
  double residual = 0.0;
  for (int s = 3; s <= 5; ++s) {
    for (int rep = 0; rep < 4; ++rep) {
      const auto m = random_generator(s, rng);
      const auto nu = stationary_law(m);
      const PoissonSolver solver(m, nu);
      const Eigen::VectorXd v = Eigen::VectorXd::NullaryExpr(s, [&] {
        return std::normal_distribution<double>()(rng);
      });
      const auto x = solver.solve(v);
      const Eigen::VectorXd centered = v.array() - nu.dot(v);
      residual = std::max({residual, (m * x - centered).cwiseAbs().maxCoeff(),
                           std::abs(nu.dot(x)), (nu.transpose() * m).cwiseAbs().maxCoeff()});
    }
  }
  out.require(residual <= 1e-12, "chain Poisson " + sci(residual));
}

// 3. Transport vs exact advection, heat fixture, Strang self-convergence.
void solver_oracles(Outcome& out) {
  {
    TorusGrid g(64, 2);
    Spectral sp(g);
    auto fn = [](double x, double y) {
      return std::cos(2 * pi * (3 * x + y)) + 0.4 * std::sin(2 * pi * (x - 5 * y));
    };
    std::vector<double> u(g.points());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = fn(g.coordinate(i, 0), g.coordinate(i, 1));
    const double shift[2] = {0.2718, -0.1414};
    sp.translate(u, shift);
    double err = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      err = std::max(err, std::abs(u[i] - fn(g.coordinate(i, 0) - shift[0], g.coordinate(i, 1) - shift[1])));
    }
    out.require(err <= 1e-12, "advection " + sci(err));
  }
  {
    const auto cfg = parse_config(kConfigs / "heat.cfg");
    const auto p = build_problem(cfg);
    const auto traj = run_limit(p, limit_config(cfg, p), initial_density(cfg, p.grid));
    const double t = traj.times.back();
    const double decay = std::exp(-4 * pi * pi * t);
    const double err = std::sqrt(quad(p.grid, [&](std::size_t i) {
      const double exact = 1 + 0.5 * decay * std::cos(2 * pi * p.grid.coordinate(i, 0));
      const double d = traj.snapshots.back()[i] - exact;
      return d * d;
    }));
    out.require(err <= 1e-4, "heat L2 " + sci(err));
  }
  {
    // dt halving with the full solver; differences of successive solutions.
    const auto cfg = parse_config(kConfigs / "minimal.cfg");
    const auto p = build_problem(cfg).without_noise();
    const auto rho0 = initial_density(cfg, p.grid);
    std::vector<KineticField> sols;
    for (std::size_t steps : {8, 16, 32, 64}) {
      KineticConfig c{0.5, 0.25 / static_cast<double>(steps), 0.25, 1, 0};
      sols.push_back(run_kinetic(p, c, rho0).final_state);
    }
    auto dist = [&](const KineticField& a, const KineticField& b) {
      KineticField d = a;
      for (std::size_t j = 0; j < d.data().size(); ++j) d.data()[j] -= b.data()[j];
      return weighted_norm(d, p.velocity, p.grid);
    };
    std::string ratios;
    bool ok = true;
    for (std::size_t k = 0; k + 2 < sols.size(); ++k) {
      const double r = dist(sols[k], sols[k + 1]) / dist(sols[k + 1], sols[k + 2]);
      ratios += (ratios.empty() ? "" : "/") + fmt::format("{:.3f}", r);
      ok = ok && r >= 4.0 / 1.5 && r <= 4.0 * 1.5;
    }
    out.require(ok, "Strang halving ratios " + ratios);
  }
}

// 4. Deterministic Rosseland limit.
void rosseland(Outcome& out) {
  const auto cfg = parse_config(kConfigs / "rosseland.cfg");
  const auto p = build_problem(cfg);
  const auto rep = deterministic_convergence(p, initial_density(cfg, p.grid), rate_options(cfg));
  std::string errs;
  for (double e : rep.errors) errs += (errs.empty() ? "" : ",") + sci(e);
  out.require(rep.strictly_decreasing(), "errors " + errs);
  out.require(rep.slope >= cfg.harness.slope_min, fmt::format("slope {:.3f}", rep.slope));
  out.require(rep.reference_change <= cfg.harness.reference_change_max,
              "reference halving " + sci(rep.reference_change));
}

// 5. Corrector algebra against dense-inverse oracles.
void corrector_algebra(Outcome& out) {
  double poisson = 0.0, singular = 0.0, second = 0.0, telegraph_phi2 = 0.0;
  for (const char* name : {"minimal.cfg", "chain3.cfg"}) {
    const auto cfg = parse_config(kConfigs / name);
    const auto p = build_problem(cfg);
    const auto& model = *p.noise;
    const auto s = static_cast<Eigen::Index>(model.size());
    const auto& m = model.generator();
    const auto& nu = model.law();
    const Eigen::MatrixXd inv = (m - Eigen::VectorXd::Ones(s) * nu.transpose()).inverse();
    const Eigen::MatrixXd psi = inv * model.state_matrix();
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 5; ++trial) {
      const auto f = random_kinetic(p.grid.points(), p.velocity.size(), rng);
      const auto rho = density(f, p.velocity);
      for (const auto& mode : cfg.harness.modes) {
        const auto pm = mode_profile(mode, p.grid);
        Eigen::VectorXd q(s), phi1(s), phi2(s);
        for (Eigen::Index i = 0; i < s; ++i) {
          const auto& n = model.state(static_cast<std::size_t>(i));
          q(i) = quad(p.grid, [&](std::size_t x) { return rho[x] * n[x] * pm[x]; });
          phi1(i) = corrector1(f, static_cast<std::size_t>(i), mode, p);
          phi2(i) = corrector2(f, static_cast<std::size_t>(i), mode, p);
        }
        // M phi_1 = -q (q is centered because the driver is).
        poisson = std::max(poisson, (m * phi1 + q).cwiseAbs().maxCoeff());
        const double target = -quad(p.grid, [&](std::size_t x) {
          double h = 0.0;
          for (Eigen::Index l = 0; l < s; ++l) {
            h += nu(l) * model.state(static_cast<std::size_t>(l))[x] * psi(l, static_cast<Eigen::Index>(x));
          }
          return rho[x] * h * pm[x];
        });
        for (Eigen::Index i = 0; i < s; ++i) {
          const auto g = generator_eps(f, static_cast<std::size_t>(i), mode, cfg.simulation.epsilon, p);
          singular = std::max(singular, std::abs(g.singular()) * cfg.simulation.epsilon);
          second = std::max(second, std::abs(g.limit_part() - target));
        }
        if (model.size() == 2) telegraph_phi2 = std::max(telegraph_phi2, phi2.cwiseAbs().maxCoeff());
      }
    }
  }
  out.require(poisson <= 1e-12, "phi1 Poisson " + sci(poisson));
  out.require(singular <= 1e-12, "O(1/eps) cancellation " + sci(singular));
  out.require(second <= 1e-12, "O(1) identity " + sci(second));
  out.require(telegraph_phi2 <= 1e-12, "telegraph phi2 " + sci(telegraph_phi2));
}

// 6. Martingale problem.
void martingale(Outcome& out) {
  const auto cfg = parse_config(kConfigs / "martingale.cfg");
  const auto p = build_problem(cfg);
  const auto rep = martingale_residual(p, kinetic_config(cfg, cfg.simulation.epsilon),
                                       initial_density(cfg, p.grid), martingale_options(cfg));
  const double z = std::abs(rep.mean) / rep.stderr_mean;
  const double qz = std::abs(rep.increment_variance - rep.quadratic_variation) /
                    std::hypot(rep.increment_variance_stderr, rep.quadratic_variation_stderr);
  out.require(rep.samples >= 10000, fmt::format("{} samples", rep.samples));
  out.require(z <= cfg.harness.martingale_sigmas,
              fmt::format("mean {} ({:.2f} se)", sci(rep.mean), z));
  out.require(qz <= cfg.harness.qv_sigmas,
              fmt::format("var {} vs QV {} ({:.2f} se)", sci(rep.increment_variance),
                          sci(rep.quadratic_variation), qz));
}

// 7 and 8 share one sweep through the command-line entry point.
std::map<std::string, double> sweep_checks;
bool sweep_done = false;

void run_sweep() {
  if (sweep_done) return;
  sweep_done = true;
  const auto cfg = parse_config(kConfigs / "stochastic.cfg");
  std::ostringstream log;
  dispatch("sweep", cfg, kWork / "sweep", log);
  sweep_checks = read_checks(kWork / "sweep" / "summary.csv");
}

void stochastic_limit(Outcome& out) {
  run_sweep();
  const auto cfg = parse_config(kConfigs / "stochastic.cfg");
  out.require(cfg.harness.samples >= 500 && cfg.harness.limit_samples >= 2000,
              fmt::format("{}/{} samples", cfg.harness.samples, cfg.harness.limit_samples));
  for (const auto& [name, value] : sweep_checks) {
    if (name.rfind("gap_nonincreasing:", 0) == 0) {
      out.require(value <= 0.0, fmt::format("{} excess {}", name.substr(18), sci(value)));
    }
  }
  const double ratio = sweep_checks.at("paper_drift_gap_ratio");
  const double sigmas = sweep_checks.at("paper_drift_gap_sigmas");
  out.require(ratio >= cfg.harness.paper_gap_factor, fmt::format("paper/effective gap x{:.1f}", ratio));
  out.require(sigmas >= cfg.harness.paper_gap_sigmas, fmt::format("separation {:.1f} se", sigmas));
}

void uniform_bounds(Outcome& out) {
  run_sweep();
  const auto cfg = parse_config(kConfigs / "stochastic.cfg");
  for (const char* name : {"band:sup_energy", "band:defect_integral", "band:hs"}) {
    const double band = sweep_checks.at(name);
    out.require(band <= cfg.harness.band_factor, fmt::format("{} max/min {:.3f}", name + 5, band));
  }
}

// 9. Identical manifests give byte-identical CSVs.
void reproducibility(Outcome& out) {
  auto cfg = parse_config(kConfigs / "minimal.cfg");
  std::size_t files = 0, mismatches = 0;
  for (const std::string command : {"noise-info", "run-kinetic", "run-spde", "sweep", "verify"}) {
    std::vector<fs::path> dirs;
    for (std::size_t threads : {1, 3}) {
      cfg.harness.threads = threads;
      const auto dir = kWork / "repro" / fmt::format("{}-{}", command, threads);
      fs::remove_all(dir);
      std::ostringstream log;
      dispatch(command, cfg, dir, log);
      dirs.push_back(dir);
    }
    for (const auto& entry : fs::directory_iterator(dirs[0])) {
      ++files;
      const auto other = dirs[1] / entry.path().filename();
      if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) ++mismatches;
    }
    if (std::distance(fs::directory_iterator(dirs[1]), fs::directory_iterator()) !=
        std::distance(fs::directory_iterator(dirs[0]), fs::directory_iterator())) {
      ++mismatches;
    }
  }
  out.require(mismatches == 0, fmt::format("{} files compared, {} differ", files, mismatches));
}

}  // namespace

int main() {
  fs::create_directories(kWork);
  criterion(1, 1.0, structural);
  criterion(2, 1.0, noise_algebra);
  criterion(3, 30.0, solver_oracles);
  criterion(4, 300.0, rosseland);
  criterion(5, 10.0, corrector_algebra);
  criterion(6, 600.0, martingale);
  criterion(7, 3600.0, stochastic_limit);
  criterion(8, 3600.0, uniform_bounds);
  criterion(9, 600.0, reproducibility);
  std::cout << fmt::format("{} of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
