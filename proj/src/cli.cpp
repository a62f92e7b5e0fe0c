#include "rtlab/cli.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <random>

#include "rtlab/correctors.hpp"
#include "rtlab/csv.hpp"
#include "rtlab/harness.hpp"

namespace rtlab {

namespace {

void write_manifest(const std::filesystem::path& out, const std::string& command,
                    const RunConfig& config) {
  CsvWriter w(out / "manifest.csv", {"key", "value"});
  w.row("command", command);
  w.row("config_hash", fmt::format("{:016x}", config.hash()));
  w.row("seed", config.harness.seed);
  w.row("samples", config.harness.samples);
  w.row("drift", to_string(config.simulation.drift));
  w.row("rtlab_version", kVersion);
  w.row("eigen_version",
        fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION));
  w.row("fftw_version", std::string(fftw_version));
  w.row("fmt_version", FMT_VERSION);
  for (const auto& [k, v] : config.entries) w.row("config." + k, "\"" + v + "\"");
}

void coordinate_header(std::vector<std::string>& header, const TorusGrid& grid) {
  header.emplace_back("x");
  if (grid.dim() == 2) header.emplace_back("y");
}

void write_snapshots(const std::filesystem::path& path, const TorusGrid& grid,
                     const std::vector<double>& times, const std::vector<DensityField>& snaps) {
  std::vector<std::string> header{"t"};
  coordinate_header(header, grid);
  header.emplace_back("rho");
  CsvWriter w(path, header);
  for (std::size_t k = 0; k < times.size(); ++k) {
    for (std::size_t i = 0; i < grid.points(); ++i) {
      std::vector<std::string> cells{CsvWriter::format_cell(times[k])};
      for (int d = 0; d < grid.dim(); ++d) cells.push_back(CsvWriter::format_cell(grid.coordinate(i, d)));
      cells.push_back(CsvWriter::format_cell(snaps[k][i]));
      w.line(cells);
    }
  }
}

int finish(const std::filesystem::path& out, const std::vector<Check>& checks, std::ostream& log,
           const std::string& file = "summary.csv") {
  CsvWriter w(out / file, {"check", "value", "relation", "threshold", "pass"});
  bool ok = true;
  for (const auto& c : checks) {
    w.row(c.name, c.value, c.relation, c.threshold, c.pass());
    if (!c.pass()) {
      ok = false;
      log << fmt::format("FAIL,{},{:.17g},{},{:.17g}\n", c.name, c.value, c.relation, c.threshold);
    }
  }
  return ok ? 0 : 2;
}

KineticField random_field(const Problem& problem, Rng& rng) {
  std::uniform_real_distribution<double> u(0.5, 1.5);
  KineticField f(problem.grid.points(), problem.velocity.size());
  for (auto& x : f.data()) x = u(rng);
  return f;
}

}  // namespace

const std::vector<std::string>& commands() {
  static const std::vector<std::string> list{"noise-info", "run-kinetic", "run-spde",
                                             "sweep",      "rates",       "verify"};
  return list;
}

std::vector<Check> verify_identities(const RunConfig& config, std::ostream& log) {
  const auto problem = build_problem(config);
  const auto& vel = problem.velocity;
  const auto& grid = problem.grid;
  const double tol = 1e-12;
  std::vector<Check> checks;
  auto add = [&](std::string name, double value, double threshold) {
    checks.push_back({std::move(name), value, "<=", threshold});
  };

  // Velocity space.
  add("mean_equilibrium", std::abs(vel.mean_equilibrium() - 1.0), tol);
  const auto flux = vel.flux();
  add("null_flux", std::max(std::abs(flux[0]), std::abs(flux[1])), tol);
  {
    const auto& k = vel.diffusion_matrix();
    Eigen::Matrix2d m;
    m << k[0][0], k[0][1], k[1][0], k[1][1];
    const int d = vel.dim();
    const double lmin =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m.topLeftCorner(d, d)).eigenvalues().minCoeff();
    checks.push_back({"K_min_eigenvalue", lmin, ">=", 1e-12});
  }

  // Relaxation and transport on seeded random fields.
  Rng rng(derive_seed(config.harness.seed, 0, SeedStream::Martingale));
  double dissip = 0.0, semigroup = 0.0, relax_mass = 0.0, unitary = 0.0, transport_mass = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto f = random_field(problem, rng);
    const auto rho = density(f, vel);
    auto lf = apply_L(f, vel);
    KineticField slf = lf;
    KineticField sqrt_lf = lf;
    for (std::size_t k = 0; k < vel.size(); ++k) {
      for (std::size_t i = 0; i < grid.points(); ++i) {
        const double s = problem.opacity(rho[i]);
        slf(i, k) *= s;
        sqrt_lf(i, k) *= std::sqrt(s);
      }
    }
    const double lhs = weighted_inner(slf, f, vel, grid);
    const double rhs = -weighted_inner(sqrt_lf, sqrt_lf, vel, grid);
    dissip = std::max(dissip, std::abs(lhs - rhs) / std::max(std::abs(rhs), 1e-300));

    const auto a = relax_exact(relax_exact(f, 0.3, problem.opacity, vel), 0.7, problem.opacity, vel);
    const auto b = relax_exact(f, 1.0, problem.opacity, vel);
    for (std::size_t j = 0; j < a.data().size(); ++j) {
      semigroup = std::max(semigroup, std::abs(a.data()[j] - b.data()[j]));
    }
    const auto rb = density(b, vel);
    for (std::size_t i = 0; i < rho.size(); ++i) relax_mass = std::max(relax_mass, std::abs(rb[i] - rho[i]));

    KineticField g = f;
    transport_step(g, 0.37, problem);
    const double n0 = weighted_norm(f, vel, grid);
    unitary = std::max(unitary, std::abs(weighted_norm(g, vel, grid) - n0) / n0);
    transport_mass = std::max(
        transport_mass, std::abs(integral(density(g, vel), grid) - integral(rho, grid)));
  }
  add("dissipation_identity", dissip, tol);
  add("relaxation_semigroup", semigroup, tol);
  add("relaxation_density_invariance", relax_mass, tol);
  add("transport_unitary", unitary, tol);
  add("transport_mass", transport_mass, tol);

  if (!problem.noise) {
    log << "noise is off: skipping noise and corrector identities\n";
    return checks;
  }

  const auto& model = *problem.noise;
  const auto& st = *problem.statistics;
  const auto s = model.size();
  const auto& m = model.generator();
  const auto& nu = model.law();
  add("stationary_law", (nu.transpose() * m).cwiseAbs().maxCoeff() + std::abs(nu.sum() - 1.0), tol);

  double poisson = 0.0, centering = 0.0, ledger = 0.0, half_diag = 0.0, scale = 0.0;
  const Eigen::MatrixXd kmat = st.kernel_matrix();
  for (std::size_t i = 0; i < grid.points(); ++i) {
    Eigen::VectorXd n(static_cast<Eigen::Index>(s)), psi(static_cast<Eigen::Index>(s));
    for (std::size_t l = 0; l < s; ++l) {
      n(static_cast<Eigen::Index>(l)) = model.state(l)[i];
      psi(static_cast<Eigen::Index>(l)) = st.psi()[l][i];
    }
    scale = std::max(scale, n.cwiseAbs().maxCoeff());
    const Eigen::VectorXd centered = n.array() - nu.dot(n);
    poisson = std::max(poisson, (m * psi - centered).cwiseAbs().maxCoeff());
    centering = std::max(centering, std::abs(nu.dot(psi)));
    ledger = std::max(ledger, std::abs(st.drift_effective()[i] + st.drift_paper()[i]));
    const auto ii = static_cast<Eigen::Index>(i);
    half_diag = std::max(half_diag, std::abs(st.drift_effective()[i] - 0.5 * kmat(ii, ii)));
  }
  scale = std::max(scale, 1.0);
  add("poisson_residual", poisson / scale, tol);
  add("poisson_centering", centering / scale, tol);
  add("sign_ledger_h_eff_plus_H_paper", ledger / (scale * scale), tol);
  add("sign_ledger_h_eff_half_diag_k", half_diag / (scale * scale), tol);
  add("kernel_symmetry", (kmat - kmat.transpose()).cwiseAbs().maxCoeff(), tol);
  {
    Eigen::MatrixXd rec = Eigen::MatrixXd::Zero(kmat.rows(), kmat.cols());
    for (const auto& mode : st.modes()) {
      Eigen::Map<const Eigen::VectorXd> e(mode.eigenfunction.values.data(),
                                          static_cast<Eigen::Index>(mode.eigenfunction.size()));
      rec += mode.eigenvalue * e * e.transpose();
    }
    add("kernel_spectral_reconstruction", (rec - kmat).cwiseAbs().maxCoeff(), 1e-8);
  }

  // Corrector algebra on random fields, every state, every configured mode.
  double phi1_poisson = 0.0, phi2_poisson = 0.0, singular = 0.0, relax_terms = 0.0,
         limit_part = 0.0, equilibrium = 0.0, bound = 0.0, phi2_max = 0.0;
  const double eps = config.simulation.epsilon;
  for (int trial = 0; trial < 5; ++trial) {
    const auto f = random_field(problem, rng);
    const auto rho = density(f, vel);
    const double fnorm = weighted_norm(f, vel, grid);
    for (const auto& mode : config.harness.modes) {
      const auto p = mode_profile(mode, grid);
      const auto set = correctors(f, mode, eps, problem);
      Eigen::VectorXd phi1(static_cast<Eigen::Index>(s)), phi2(static_cast<Eigen::Index>(s));
      Eigen::VectorXd rhs1(static_cast<Eigen::Index>(s)), rhs2(static_cast<Eigen::Index>(s));
      for (std::size_t l = 0; l < s; ++l) {
        const auto li = static_cast<Eigen::Index>(l);
        phi1(li) = set.phi1[l];
        phi2(li) = set.phi2[l];
        double a = 0.0, b = 0.0;
        for (std::size_t i = 0; i < grid.points(); ++i) {
          a += rho[i] * model.state(l)[i] * p[i];
          b += rho[i] * model.state(l)[i] * st.psi()[l][i] * p[i];
        }
        rhs1(li) = -a * grid.cell_volume();
        rhs2(li) = b * grid.cell_volume();
      }
      const double mag = std::max({1.0, rhs1.cwiseAbs().maxCoeff(), rhs2.cwiseAbs().maxCoeff()});
      phi1_poisson = std::max(phi1_poisson,
                              (m * phi1 - (rhs1.array() - nu.dot(rhs1)).matrix()).cwiseAbs().maxCoeff() / mag);
      phi2_poisson = std::max(phi2_poisson,
                              (m * phi2 - (rhs2.array() - nu.dot(rhs2)).matrix()).cwiseAbs().maxCoeff() / mag);
      phi2_max = std::max(phi2_max, phi2.cwiseAbs().maxCoeff());

      double h_term = 0.0;
      for (std::size_t i = 0; i < grid.points(); ++i) h_term += rho[i] * st.drift_effective()[i] * p[i];
      h_term *= grid.cell_volume();
      for (std::size_t l = 0; l < s; ++l) {
        const auto g = generator_eps(f, l, mode, eps, problem);
        const double big = std::max({1.0, std::abs(g.noise0), std::abs(g.chain1)});
        singular = std::max(singular, std::abs(g.singular()) / big);
        relax_terms = std::max(relax_terms, std::abs(g.relaxation()) * eps * eps / mag);
        limit_part = std::max(limit_part, std::abs(g.limit_part() - h_term) / mag);
      }
      const double phi0 = set.phi;
      for (double t : {0.3, 3.0}) {
        const auto ft = relax_exact(f, t, problem.opacity, vel);
        equilibrium = std::max(equilibrium, std::abs(test_function(ft, mode, problem) - phi0) /
                                                std::max(1.0, std::abs(phi0)));
      }
      const double c = st.c_star() * l2_norm(p, grid) * (1.0 + fnorm) * (1.0 + fnorm);
      for (std::size_t l = 0; l < s; ++l) {
        bound = std::max({bound, std::abs(set.phi1[l]) / c, std::abs(set.phi2[l]) / c});
      }
    }
  }
  add("corrector1_poisson_identity", phi1_poisson, tol);
  add("corrector2_poisson_identity", phi2_poisson, tol);
  add("singular_term_cancellation", singular, tol);
  add("relaxation_terms_vanish", relax_terms, tol);
  add("limit_part_equals_h_eff_term", limit_part, tol);
  add("equilibrium_dependence", equilibrium, tol);
  add("corrector_bound_ratio", bound, 1.0);
  if (config.noise.model == "telegraph") add("telegraph_corrector2_zero", phi2_max, tol);

  if (config.harness.mart_samples > 0) {
    const auto kc = kinetic_config(config, eps);
    const auto rep = martingale_residual(problem, kc, initial_density(config, grid),
                                         martingale_options(config));
    log << fmt::format("martingale: mean {:.6e} (sem {:.3e}), increment variance {:.6e} (sem {:.3e}), "
                       "quadratic variation {:.6e} (sem {:.3e})\n",
                       rep.mean, rep.stderr_mean, rep.increment_variance,
                       rep.increment_variance_stderr, rep.quadratic_variation,
                       rep.quadratic_variation_stderr);
    add("martingale_mean_sigmas", std::abs(rep.mean) / rep.stderr_mean,
        config.harness.martingale_sigmas);
    add("quadratic_variation_sigmas",
        std::abs(rep.increment_variance - rep.quadratic_variation) /
            std::hypot(rep.increment_variance_stderr, rep.quadratic_variation_stderr),
        config.harness.qv_sigmas);
  }
  return checks;
}

int dispatch(const std::string& command, const RunConfig& config, const std::filesystem::path& out,
             std::ostream& log) {
  if (std::find(commands().begin(), commands().end(), command) == commands().end()) {
    throw Error(fmt::format("unknown command '{}'", command));
  }
  std::filesystem::create_directories(out);
  write_manifest(out, command, config);
  const auto problem = build_problem(config);
  const auto& grid = problem.grid;
  const auto rho0 = initial_density(config, grid);
  const auto& h = config.harness;

  if (command == "noise-info") {
    if (!problem.noise) throw Error("noise-info needs a noise model (noise.model is off)");
    const auto& model = *problem.noise;
    const auto& st = *problem.statistics;
    std::vector<std::string> header;
    coordinate_header(header, grid);
    for (std::size_t l = 0; l < model.size(); ++l) header.push_back(fmt::format("n_{}", l));
    for (std::size_t l = 0; l < model.size(); ++l) header.push_back(fmt::format("psi_{}", l));
    for (const char* c : {"H_paper", "h_eff", "k_diag"}) header.emplace_back(c);
    CsvWriter w(out / "noise_fields.csv", header);
    for (std::size_t i = 0; i < grid.points(); ++i) {
      std::vector<std::string> cells;
      for (int d = 0; d < grid.dim(); ++d) cells.push_back(CsvWriter::format_cell(grid.coordinate(i, d)));
      for (std::size_t l = 0; l < model.size(); ++l) cells.push_back(CsvWriter::format_cell(model.state(l)[i]));
      for (std::size_t l = 0; l < model.size(); ++l) cells.push_back(CsvWriter::format_cell(st.psi()[l][i]));
      cells.push_back(CsvWriter::format_cell(st.drift_paper()[i]));
      cells.push_back(CsvWriter::format_cell(st.drift_effective()[i]));
      cells.push_back(CsvWriter::format_cell(st.kernel(i, i)));
      w.line(cells);
    }
    CsvWriter e(out / "noise_modes.csv", {"j", "lambda", "retained"});
    for (std::size_t j = 0; j < st.eigenvalues().size(); ++j) {
      e.row(j, st.eigenvalues()[j], j < st.modes().size());
    }
    CsvWriter c(out / "noise_chain.csv", {"state", "nu", "exit_rate"});
    for (std::size_t l = 0; l < model.size(); ++l) {
      const auto li = static_cast<Eigen::Index>(l);
      c.row(l, model.law()(li), -model.generator()(li, li));
    }
    log << fmt::format("noise: {} states, {} retained modes, lambda_1 = {:.17g}, C_* = {:.6g}\n",
                       model.size(), st.modes().size(),
                       st.eigenvalues().empty() ? 0.0 : st.eigenvalues().front(), st.c_star());
    return 0;
  }

  if (command == "run-kinetic") {
    const auto kc = kinetic_config(config, config.simulation.epsilon);
    const auto traj = run_kinetic(problem, kc, rho0);
    write_snapshots(out / "snapshots.csv", grid, traj.times, traj.snapshots);
    CsvWriter d(out / "diagnostics.csv", {"t", "mass", "energy", "defect"});
    for (const auto& s : traj.diagnostics) d.row(s.t, s.mass, s.energy, s.defect);
    log << fmt::format("run-kinetic: eps = {:g}, dt = {:.6g}, {} steps, sup energy {:.6g}\n",
                       kc.epsilon, kc.dt, traj.diagnostics.size() - 1, traj.sup_energy());
    return 0;
  }

  if (command == "run-spde") {
    const auto lc = limit_config(config, problem);
    const auto traj = run_limit(problem, lc, rho0);
    write_snapshots(out / "snapshots.csv", grid, traj.times, traj.snapshots);
    CsvWriter d(out / "diagnostics.csv", {"t", "mass", "l2"});
    for (const auto& s : traj.steps) d.row(s.t, s.mass, s.l2);
    log << fmt::format("run-spde: dt = {:.6g}, drift {}, {} steps\n", lc.dt, to_string(lc.drift),
                       traj.steps.size() - 1);
    return 0;
  }

  if (command == "sweep") {
    const auto opts = sweep_options(config, problem);
    const auto rep = epsilon_sweep(problem, rho0, opts);
    std::vector<Check> checks;
    {
      CsvWriter w(out / "sweep.csv", {"epsilon", "functional", "kinetic_mean", "kinetic_sem",
                                      "limit_mean", "limit_sem", "gap", "gap_sem"});
      for (const auto& r : rep.rows) {
        w.row(r.epsilon, r.functional, r.kinetic, r.kinetic_sem, r.limit, r.limit_sem, r.gap, r.gap_sem);
      }
    }
    // Without noise the terminal-time functionals oscillate in eps (GT2 is an
    // underdamped telegraph equation for eps > 1/(4 pi)); the L^2(0,T;L^2)
    // error below is the gap that must decrease.
    for (const auto& f : problem.noise ? rep.gap_functionals() : std::vector<std::string>{}) {
      const auto col = rep.column(f);
      // Largest increase beyond the slack allowance; negative means margin to spare.
      double worst = col.size() > 1 ? -1e300 : 0.0;
      for (std::size_t k = 1; k < col.size(); ++k) {
        worst = std::max(worst, col[k]->gap - col[k - 1]->gap - h.gap_slack * col[k]->gap_sem);
      }
      checks.push_back({"gap_nonincreasing:" + f, worst, "<=", 0.0});
    }
    if (!rep.deterministic_error.empty()) {
      CsvWriter w(out / "deterministic.csv", {"epsilon", "l2_time_error"});
      double worst = -1e300;
      for (std::size_t k = 0; k < rep.epsilons.size(); ++k) {
        w.row(rep.epsilons[k], rep.deterministic_error[k]);
        if (k > 0) worst = std::max(worst, rep.deterministic_error[k] - rep.deterministic_error[k - 1]);
      }
      if (rep.epsilons.size() > 1) checks.push_back({"deterministic_error_decreasing", worst, "<=", 0.0});
    }
    {
      std::vector<std::string> names{"sup_energy", "defect_integral"};
      if (h.hs_s) names.emplace_back("hs");
      std::vector<std::string> header{"epsilon"};
      for (const auto& n : names) {
        header.push_back(n + "_mean");
        header.push_back(n + "_sem");
      }
      CsvWriter w(out / "bounds.csv", header);
      for (std::size_t k = 0; k < rep.epsilons.size(); ++k) {
        std::vector<std::string> cells{CsvWriter::format_cell(rep.epsilons[k])};
        for (const auto& n : names) {
          cells.push_back(CsvWriter::format_cell(rep.kinetic[k].at(n).mean));
          cells.push_back(CsvWriter::format_cell(rep.kinetic[k].at(n).sem));
        }
        w.line(cells);
      }
      for (const auto& n : names) {
        double lo = 1e300, hi = 0.0;
        for (const auto& ks : rep.kinetic) {
          lo = std::min(lo, ks.at(n).mean);
          hi = std::max(hi, ks.at(n).mean);
        }
        const double band = lo > 0.0 ? hi / lo : (hi > 0.0 ? 1e300 : 1.0);
        checks.push_back({"band:" + n, band, "<=", h.band_factor});
      }
      if (h.hs_s) {
        CsvWriter hs(out / "hs.csv", {"epsilon", "s", "hs_mean", "hs_sem"});
        for (std::size_t k = 0; k < rep.epsilons.size(); ++k) {
          hs.row(rep.epsilons[k], *h.hs_s, rep.kinetic[k].at("hs").mean, rep.kinetic[k].at("hs").sem);
        }
      }
    }
    if (problem.noise) {
      // Same kinetic data against the limit law under the other drift sign.
      SweepOptions other = opts;
      other.limit.drift = opts.limit.drift == DriftChoice::Effective ? DriftChoice::Paper
                                                                     : DriftChoice::Effective;
      EnsembleOptions lo{other.limit_samples, other.seed, other.threads, other.functionals};
      SpdeConfig lc = other.limit;
      lc.horizon = other.horizon;
      lc.snapshots = other.snapshots;
      const auto alt = limit_ensemble(problem, lc, rho0, lo);
      const auto& ks = rep.kinetic.back();
      CsvWriter w(out / "drift_compare.csv",
                  {"epsilon", "functional", "gap_" + to_string(opts.limit.drift), "gap_sem",
                   "gap_" + to_string(other.limit.drift), "alt_gap_sem"});
      double primary_gap = 0.0, primary_sem = 0.0, alt_gap = 0.0, alt_sem = 0.0;
      for (const auto* r : rep.column("mean:l2sq")) {
        if (r->epsilon == rep.epsilons.back()) {
          primary_gap = r->gap;
          primary_sem = r->gap_sem;
        }
      }
      for (const auto& name : limit_functional_names(other.functionals)) {
        if (name == "hs") continue;
        const auto& a = ks.at(name);
        const auto& b = alt.at(name);
        const double gap = std::abs(a.mean - b.mean);
        const double sem = std::hypot(a.sem, b.sem);
        const auto* r = rep.column("mean:" + name).back();
        w.row(rep.epsilons.back(), "mean:" + name, r->gap, r->gap_sem, gap, sem);
        if (name == "l2sq") {
          alt_gap = gap;
          alt_sem = sem;
        }
      }
      if (opts.limit.drift == DriftChoice::Effective) {
        checks.push_back({"paper_drift_gap_ratio", alt_gap / std::max(primary_gap, 1e-300), ">=",
                          h.paper_gap_factor});
        checks.push_back({"paper_drift_gap_sigmas",
                          (alt_gap - primary_gap) / std::hypot(primary_sem, alt_sem), ">=",
                          h.paper_gap_sigmas});
      }
    }
    return finish(out, checks, log);
  }

  if (command == "rates") {
    const auto rep = deterministic_convergence(problem, rho0, rate_options(config));
    CsvWriter w(out / "rates.csv", {"epsilon", "l2_time_error"});
    for (std::size_t k = 0; k < rep.epsilons.size(); ++k) w.row(rep.epsilons[k], rep.errors[k]);
    double worst = -1e300;
    for (std::size_t k = 1; k < rep.errors.size(); ++k) {
      worst = std::max(worst, rep.errors[k] - rep.errors[k - 1]);
    }
    std::vector<Check> checks{{"error_strictly_decreasing", worst, "<=", 0.0},
                              {"fitted_slope", rep.slope, ">=", h.slope_min},
                              {"reference_dt_halving_change", rep.reference_change, "<=",
                               h.reference_change_max}};
    log << fmt::format("rates: slope {:.4f}, reference dt {:.3e}, reference change {:.3e}\n",
                       rep.slope, rep.reference_dt, rep.reference_change);
    return finish(out, checks, log);
  }

  // verify
  const auto checks = verify_identities(config, log);
  return finish(out, checks, log, "verify.csv");
}

}  // namespace rtlab
