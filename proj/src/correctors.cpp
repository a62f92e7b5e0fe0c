#include "rtlab/correctors.hpp"

#include <cmath>
#include <fmt/format.h>

#include "rtlab/error.hpp"
#include "rtlab/limit.hpp"
#include "rtlab/parallel.hpp"
#include "rtlab/rng.hpp"

namespace rtlab {

namespace {

// int rho a b over the torus.
double triple(const DensityField& rho, const DensityField& a, const DensityField& b,
              const TorusGrid& grid) {
  double total = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) total += rho[i] * a[i] * b[i];
  return total * grid.cell_volume();
}

// div <a f>, so that (Af, g F) = int div<a f> g for any g(x).
DensityField transport_density(const KineticField& f, const Problem& problem) {
  const auto& vel = problem.velocity;
  const int dim = problem.grid.dim();
  DensityField out(f.points());
  for (int d = 0; d < dim; ++d) {
    std::vector<double> flux(f.points(), 0.0);
    for (std::size_t k = 0; k < vel.size(); ++k) {
      const double c = vel.weight(k) * vel.speed(k)[static_cast<std::size_t>(d)];
      if (c == 0.0) continue;
      const auto s = f.slice(k);
      for (std::size_t i = 0; i < flux.size(); ++i) flux[i] += c * s[i];
    }
    const auto div = problem.spectral->derivative(flux, d);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += div[i];
  }
  return out;
}

// (sigma(rho) L f, g F) = int <sigma(rho) L f> g, evaluated without using <Lf> = 0.
DensityField relaxation_density(const KineticField& f, const Problem& problem) {
  const auto lf = apply_L(f, problem.velocity);
  const auto rho = density(f, problem.velocity);
  auto out = density(lf, problem.velocity);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= problem.opacity(rho[i]);
  return out;
}

const NoiseStatistics* stats_of(const Problem& problem) {
  return problem.statistics ? &*problem.statistics : nullptr;
}

}  // namespace

double test_function(const KineticField& f, const ModeIndex& mode, const Problem& problem) {
  return inner(density(f, problem.velocity), mode_profile(mode, problem.grid), problem.grid);
}

double corrector1(const KineticField& f, std::size_t state, const ModeIndex& mode,
                  const Problem& problem) {
  const auto* st = stats_of(problem);
  if (st == nullptr) return 0.0;
  const auto rho = density(f, problem.velocity);
  return -triple(rho, st->psi().at(state), mode_profile(mode, problem.grid), problem.grid);
}

double corrector2(const KineticField& f, std::size_t state, const ModeIndex& mode,
                  const Problem& problem) {
  const auto* st = stats_of(problem);
  if (st == nullptr) return 0.0;
  const auto rho = density(f, problem.velocity);
  return triple(rho, st->chi().at(state), mode_profile(mode, problem.grid), problem.grid);
}

CorrectorSet correctors(const KineticField& f, const ModeIndex& mode, double epsilon,
                        const Problem& problem) {
  CorrectorSet set;
  const auto rho = density(f, problem.velocity);
  const auto p = mode_profile(mode, problem.grid);
  set.phi = inner(rho, p, problem.grid);
  const std::size_t states = problem.noise ? problem.noise->size() : 1;
  for (std::size_t i = 0; i < states; ++i) {
    double a = 0.0;
    double b = 0.0;
    if (const auto* st = stats_of(problem)) {
      a = -triple(rho, st->psi()[i], p, problem.grid);
      b = triple(rho, st->chi()[i], p, problem.grid);
    }
    set.phi1.push_back(a);
    set.phi2.push_back(b);
    set.perturbed.push_back(set.phi + epsilon * a + epsilon * epsilon * b);
  }
  return set;
}

double GeneratorTerms::total() const {
  return transport0 + noise0 + relax0 + chain1 + transport1 + noise1 + relax1 + chain2 +
         transport2 + noise2 + relax2;
}

GeneratorTerms generator_eps(const KineticField& f, std::size_t state, const ModeIndex& mode,
                             double epsilon, const Problem& problem) {
  const auto& grid = problem.grid;
  const auto rho = density(f, problem.velocity);
  const auto p = mode_profile(mode, grid);
  const auto af = transport_density(f, problem);
  const auto lf = relaxation_density(f, problem);
  const double inv_eps = 1.0 / epsilon;

  GeneratorTerms g;
  g.transport0 = -inv_eps * inner(af, p, grid);
  g.relax0 = inv_eps * inv_eps * inner(lf, p, grid);

  const auto* st = stats_of(problem);
  if (st == nullptr) return g;
  const auto& model = *problem.noise;
  const auto& n = model.state(state);
  const auto& psi = st->psi()[state];
  const auto& chi = st->chi()[state];
  const auto& m = model.generator();
  const auto row = static_cast<Eigen::Index>(state);

  g.noise0 = inv_eps * triple(rho, n, p, grid);

  // D phi_1 = -psi_i p F, D phi_2 = chi_i p F.
  double m_phi1 = 0.0;
  double m_phi2 = 0.0;
  for (std::size_t l = 0; l < model.size(); ++l) {
    const double rate = m(row, static_cast<Eigen::Index>(l));
    if (rate == 0.0) continue;
    m_phi1 += rate * -triple(rho, st->psi()[l], p, grid);
    m_phi2 += rate * triple(rho, st->chi()[l], p, grid);
  }
  g.chain1 = inv_eps * m_phi1;
  g.transport1 = triple(af, psi, p, grid);
  double noise1 = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) noise1 += rho[i] * n[i] * psi[i] * p[i];
  g.noise1 = -noise1 * grid.cell_volume();
  g.relax1 = -inv_eps * triple(lf, psi, p, grid);

  g.chain2 = m_phi2;
  g.transport2 = -epsilon * triple(af, chi, p, grid);
  double noise2 = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) noise2 += rho[i] * n[i] * chi[i] * p[i];
  g.noise2 = epsilon * noise2 * grid.cell_volume();
  g.relax2 = triple(lf, chi, p, grid);
  return g;
}

LimitGeneratorTerms limit_generator(const DensityField& rho, const ModeIndex& mode,
                                    const Problem& problem) {
  const auto& grid = problem.grid;
  const auto p = mode_profile(mode, grid);
  const auto g = rosseland_rhs(rho, problem);
  LimitGeneratorTerms out;
  out.diffusion = inner(g, p, grid);
  if (const auto* st = stats_of(problem)) {
    out.noise = -triple(rho, st->drift_paper(), p, grid);
  }
  return out;
}

double chain_carre_du_champ(const Eigen::MatrixXd& generator, const std::vector<double>& g,
                            std::size_t state) {
  double total = 0.0;
  const auto i = static_cast<Eigen::Index>(state);
  for (std::size_t l = 0; l < g.size(); ++l) {
    const double d = g[l] - g[state];
    total += generator(i, static_cast<Eigen::Index>(l)) * d * d;
  }
  return total;
}

MartingaleReport martingale_residual(const Problem& problem, const KineticConfig& config,
                                     const DensityField& rho0, const MartingaleOptions& options) {
  const std::size_t steps = config.validate();
  if (options.samples < 2) throw Error("martingale test needs at least 2 samples");
  auto step_of = [&](double t, const char* name) {
    const double r = t / config.dt;
    const auto n = static_cast<std::size_t>(std::llround(r));
    if (std::abs(r - static_cast<double>(n)) > 1e-9 * std::max(1.0, r) || n > steps) {
      throw Error(fmt::format("martingale time {} = {:g} is not a step time within [0, T]", name, t));
    }
    return n;
  };
  const std::size_t s_step = step_of(options.s, "s");
  const std::size_t t_step = step_of(options.t, "t");
  if (s_step >= t_step) throw Error("martingale test needs s < t");

  KineticConfig run = config;
  run.horizon = static_cast<double>(t_step) * config.dt;
  run.snapshots = 1;
  const double eps = config.epsilon;
  const Eigen::MatrixXd generator =
      problem.noise ? problem.noise->generator() : Eigen::MatrixXd::Zero(1, 1);

  struct Sample {
    double residual = 0.0;
    double psi = 0.0;
    double qv = 0.0;
  };
  std::vector<Sample> out(options.samples);

  parallel_for(options.samples, options.threads, [&](std::size_t idx) {
    KineticConfig c = run;
    c.seed = derive_seed(options.base_seed, idx, SeedStream::Martingale);
    Sample sample;
    double phi_s = 0.0;
    double phi_t = 0.0;
    double integral = 0.0;
    double prev_gen = 0.0;
    double prev_qv = 0.0;
    auto observer = [&](std::size_t step, double, const KineticField& f, std::size_t state) {
      if (step < s_step) return;
      const auto set = correctors(f, options.mode, eps, problem);
      const double gen = generator_eps(f, state, options.mode, eps, problem).total();
      std::vector<double> g(set.phi1.size());
      for (std::size_t i = 0; i < g.size(); ++i) g[i] = set.phi1[i] + eps * set.phi2[i];
      const double qv = problem.noise ? chain_carre_du_champ(generator, g, state) : 0.0;
      if (step == s_step) {
        phi_s = set.perturbed[state];
        sample.psi = std::tanh(options.psi_gain * set.phi);
      } else {
        integral += 0.5 * config.dt * (prev_gen + gen);
        sample.qv += 0.5 * config.dt * (prev_qv + qv);
      }
      if (step == t_step) phi_t = set.perturbed[state];
      prev_gen = gen;
      prev_qv = qv;
    };
    run_kinetic(problem, c, rho0, observer);
    sample.residual = phi_t - phi_s - integral;
    out[idx] = sample;
  });

  const double n = static_cast<double>(options.samples);
  MartingaleReport rep;
  rep.samples = options.samples;
  double mean_r = 0.0;
  double mean_qv = 0.0;
  for (const auto& s : out) {
    rep.mean += s.residual * s.psi;
    mean_r += s.residual;
    mean_qv += s.qv;
  }
  rep.mean /= n;
  mean_r /= n;
  mean_qv /= n;
  double var_w = 0.0;
  double m2 = 0.0;
  double m4 = 0.0;
  double var_qv = 0.0;
  for (const auto& s : out) {
    const double w = s.residual * s.psi - rep.mean;
    var_w += w * w;
    const double d = s.residual - mean_r;
    m2 += d * d;
    m4 += d * d * d * d;
    var_qv += (s.qv - mean_qv) * (s.qv - mean_qv);
  }
  rep.stderr_mean = std::sqrt(var_w / (n - 1.0) / n);
  rep.increment_variance = m2 / (n - 1.0);
  const double pop_var = m2 / n;
  rep.increment_variance_stderr = std::sqrt(std::max(0.0, m4 / n - pop_var * pop_var) / n);
  rep.quadratic_variation = mean_qv;
  rep.quadratic_variation_stderr = std::sqrt(var_qv / (n - 1.0) / n);
  return rep;
}

}  // namespace rtlab
