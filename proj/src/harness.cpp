#include "rtlab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "rtlab/error.hpp"
#include "rtlab/parallel.hpp"
#include "rtlab/rng.hpp"

namespace rtlab {

const FunctionalStats& EnsembleStats::at(const std::string& name) const {
  for (const auto& f : functionals) {
    if (f.name == name) return f;
  }
  throw Error(fmt::format("no functional named '{}'", name));
}

std::string projection_name(const ModeIndex& mode) { return fmt::format("proj({})", to_string(mode)); }

std::vector<std::string> limit_functional_names(const FunctionalSpec& spec) {
  std::vector<std::string> names;
  for (const auto& m : spec.modes) names.push_back(projection_name(m));
  names.emplace_back("l2sq");
  if (spec.hs_s) names.emplace_back("hs");
  return names;
}

std::vector<std::string> kinetic_functional_names(const FunctionalSpec& spec) {
  std::vector<std::string> names;
  for (const auto& m : spec.modes) names.push_back(projection_name(m));
  names.emplace_back("l2sq");
  names.emplace_back("sup_energy");
  names.emplace_back("defect_integral");
  if (spec.hs_s) names.emplace_back("hs");
  return names;
}

EnsembleStats summarize(const std::vector<std::string>& names,
                        const std::vector<std::vector<double>>& values) {
  EnsembleStats out;
  out.count = values.size();
  if (out.count < 2) throw Error("ensemble statistics need at least 2 samples");
  const double n = static_cast<double>(out.count);
  for (std::size_t j = 0; j < names.size(); ++j) {
    FunctionalStats f;
    f.name = names[j];
    f.count = out.count;
    for (const auto& v : values) f.mean += v.at(j);
    f.mean /= n;
    double m2 = 0.0;
    double m4 = 0.0;
    for (const auto& v : values) {
      const double d = v[j] - f.mean;
      m2 += d * d;
      m4 += d * d * d * d;
    }
    f.variance = m2 / (n - 1.0);
    f.sem = std::sqrt(f.variance / n);
    const double pop = m2 / n;
    f.variance_sem = std::sqrt(std::max(0.0, m4 / n - pop * pop) / n);
    out.functionals.push_back(std::move(f));
  }
  return out;
}

EnsembleStats ensemble_stats(std::size_t n_samples, std::size_t threads,
                             const std::vector<std::string>& names,
                             const std::function<std::vector<double>(std::size_t)>& sample) {
  if (n_samples < 2) throw Error("ensemble needs n_samples >= 2");
  std::vector<std::vector<double>> values(n_samples);
  parallel_for(n_samples, threads, [&](std::size_t i) {
    try {
      values[i] = sample(i);
    } catch (const std::exception& e) {
      throw Error(fmt::format("sample {}: {}", i, e.what()));
    }
  });
  return summarize(names, values);
}

namespace {

std::vector<double> density_functionals(const DensityField& rho, const FunctionalSpec& spec,
                                        const Problem& problem) {
  std::vector<double> v;
  for (const auto& m : spec.modes) v.push_back(inner(rho, mode_profile(m, problem.grid), problem.grid));
  v.push_back(inner(rho, rho, problem.grid));
  return v;
}

}  // namespace

EnsembleStats kinetic_ensemble(const Problem& problem, const KineticConfig& config,
                               const DensityField& rho0, const EnsembleOptions& options) {
  config.validate();
  if (options.functionals.hs_s) hs_norm({0.0}, {rho0}, problem, *options.functionals.hs_s);
  return ensemble_stats(
      options.samples, options.threads, kinetic_functional_names(options.functionals),
      [&](std::size_t i) {
        KineticConfig c = config;
        c.seed = derive_seed(options.base_seed, i, SeedStream::Kinetic);
        const auto traj = run_kinetic(problem, c, rho0);
        auto v = density_functionals(traj.snapshots.back(), options.functionals, problem);
        v.push_back(traj.sup_energy());
        v.push_back(traj.defect_integral());
        if (options.functionals.hs_s) {
          v.push_back(hs_norm(traj.times, traj.snapshots, problem, *options.functionals.hs_s));
        }
        return v;
      });
}

EnsembleStats limit_ensemble(const Problem& problem, const SpdeConfig& config,
                             const DensityField& rho0, const EnsembleOptions& options) {
  config.validate(problem);
  return ensemble_stats(
      options.samples, options.threads, limit_functional_names(options.functionals),
      [&](std::size_t i) {
        SpdeConfig c = config;
        c.seed = derive_seed(options.base_seed, i, SeedStream::Limit);
        const auto traj = run_limit(problem, c, rho0);
        auto v = density_functionals(traj.snapshots.back(), options.functionals, problem);
        if (options.functionals.hs_s) {
          v.push_back(hs_integral(traj.times, traj.snapshots, *problem.spectral,
                                  *options.functionals.hs_s));
        }
        return v;
      });
}

double hs_integral(const std::vector<double>& times, const std::vector<DensityField>& snapshots,
                   const Spectral& spectral, double s) {
  if (times.size() != snapshots.size() || times.empty()) {
    throw Error("H^s integral needs one snapshot per time");
  }
  double total = 0.0;
  double prev = spectral.sobolev_norm_sq(snapshots[0].values, s);
  for (std::size_t k = 1; k < times.size(); ++k) {
    const double cur = spectral.sobolev_norm_sq(snapshots[k].values, s);
    total += 0.5 * (times[k] - times[k - 1]) * (prev + cur);
    prev = cur;
  }
  return total;
}

double hs_norm(const std::vector<double>& times, const std::vector<DensityField>& snapshots,
               const Problem& problem, double s) {
  const auto theta = problem.velocity.nondegeneracy_exponent();
  if (!theta) {
    throw Error("H^s diagnostic needs a velocity model with a nondegeneracy exponent (CONT)");
  }
  if (!(s > 0.0 && s < 0.5 * *theta)) {
    throw Error(fmt::format("H^s exponent s = {:g} outside (0, theta/2) = (0, {:g})", s, 0.5 * *theta));
  }
  return hs_integral(times, snapshots, *problem.spectral, s);
}

double l2_time_error(const std::vector<double>& times, const std::vector<DensityField>& a,
                     const std::vector<DensityField>& b, const TorusGrid& grid) {
  if (a.size() != times.size() || b.size() != times.size()) {
    throw Error("time error needs matching snapshot lists");
  }
  auto sq = [&](std::size_t k) {
    double total = 0.0;
    for (std::size_t i = 0; i < a[k].size(); ++i) {
      const double d = a[k][i] - b[k][i];
      total += d * d;
    }
    return total * grid.cell_volume();
  };
  double total = 0.0;
  for (std::size_t k = 1; k < times.size(); ++k) {
    total += 0.5 * (times[k] - times[k - 1]) * (sq(k - 1) + sq(k));
  }
  return std::sqrt(total);
}

double aligned_dt(double dt, double horizon, std::size_t snapshots) {
  if (!(dt > 0.0) || !(horizon > 0.0) || snapshots == 0) throw Error("invalid time grid request");
  const double per_snapshot = horizon / static_cast<double>(snapshots);
  const auto n = static_cast<std::size_t>(std::ceil(per_snapshot / dt * (1.0 - 1e-12)));
  return horizon / static_cast<double>(std::max<std::size_t>(1, n) * snapshots);
}

std::vector<std::string> SweepReport::gap_functionals() const {
  std::vector<std::string> out;
  for (const auto& r : rows) {
    if (std::find(out.begin(), out.end(), r.functional) == out.end()) out.push_back(r.functional);
  }
  return out;
}

std::vector<const GapRow*> SweepReport::column(const std::string& functional) const {
  std::vector<const GapRow*> out;
  for (const auto& r : rows) {
    if (r.functional == functional) out.push_back(&r);
  }
  return out;
}

bool SweepReport::non_increasing(const std::string& functional, double slack) const {
  const auto col = column(functional);
  for (std::size_t k = 1; k < col.size(); ++k) {
    if (col[k]->gap > col[k - 1]->gap + slack * col[k]->gap_sem) return false;
  }
  return true;
}

SweepReport epsilon_sweep(const Problem& problem, const DensityField& rho0,
                          const SweepOptions& options) {
  if (options.epsilons.empty()) throw Error("epsilon sweep needs at least one epsilon");
  for (std::size_t k = 1; k < options.epsilons.size(); ++k) {
    if (!(options.epsilons[k] < options.epsilons[k - 1])) {
      throw Error("epsilon list must be strictly decreasing");
    }
  }
  SweepReport report;
  report.epsilons = options.epsilons;

  SpdeConfig lc = options.limit;
  lc.horizon = options.horizon;
  lc.snapshots = options.snapshots;
  EnsembleOptions lo{options.limit_samples, options.seed, options.threads, options.functionals};
  report.limit = limit_ensemble(problem, lc, rho0, lo);

  const bool deterministic = !problem.noise.has_value();
  SpdeTrajectory reference;
  if (deterministic) {
    lc.seed = derive_seed(options.seed, 0, SeedStream::Limit);
    reference = run_limit(problem, lc, rho0);
  }

  for (double eps : options.epsilons) {
    KineticConfig kc;
    kc.epsilon = eps;
    kc.horizon = options.horizon;
    kc.snapshots = options.snapshots;
    kc.dt = aligned_dt(options.dt_factor * eps * eps, options.horizon, options.snapshots);
    EnsembleOptions ko{options.kinetic_samples, options.seed, options.threads, options.functionals};
    report.kinetic.push_back(kinetic_ensemble(problem, kc, rho0, ko));
    const auto& ks = report.kinetic.back();

    auto add = [&](const std::string& label, double k, double ksem, double l, double lsem) {
      report.rows.push_back({eps, label, k, ksem, l, lsem, std::abs(k - l),
                             std::sqrt(ksem * ksem + lsem * lsem)});
    };
    for (const auto& m : options.functionals.modes) {
      const auto name = projection_name(m);
      const auto& a = ks.at(name);
      const auto& b = report.limit.at(name);
      add("mean:" + name, a.mean, a.sem, b.mean, b.sem);
      add("var:" + name, a.variance, a.variance_sem, b.variance, b.variance_sem);
    }
    const auto& a = ks.at("l2sq");
    const auto& b = report.limit.at("l2sq");
    add("mean:l2sq", a.mean, a.sem, b.mean, b.sem);

    if (deterministic) {
      kc.seed = derive_seed(options.seed, 0, SeedStream::Kinetic);
      const auto traj = run_kinetic(problem, kc, rho0);
      report.deterministic_error.push_back(
          l2_time_error(traj.times, traj.snapshots, reference.snapshots, problem.grid));
    }
  }
  return report;
}

bool RateReport::strictly_decreasing() const {
  for (std::size_t k = 1; k < errors.size(); ++k) {
    if (!(errors[k] < errors[k - 1])) return false;
  }
  return true;
}

std::pair<double, double> fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error("line fit needs at least two points");
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw Error("line fit needs distinct abscissae");
  const double b = (n * sxy - sx * sy) / denom;
  return {b, (sy - b * sx) / n};
}

RateReport deterministic_convergence(const Problem& base, const DensityField& rho0,
                                     const RateOptions& options) {
  if (options.epsilons.size() < 2) throw Error("rate estimate needs at least two epsilons");
  const Problem problem = base.without_noise();

  SpdeConfig ref;
  ref.horizon = options.horizon;
  ref.snapshots = options.snapshots;
  ref.scheme = LimitScheme::Rk4;
  ref.noise = false;
  ref.dt = aligned_dt(options.reference_fraction * SpdeConfig::stable_dt(problem), options.horizon,
                      options.snapshots);
  const auto reference = run_limit(problem, ref, rho0);
  SpdeConfig half = ref;
  half.dt = 0.5 * ref.dt;
  const auto refined = run_limit(problem, half, rho0);

  RateReport out;
  out.reference_dt = ref.dt;
  for (std::size_t k = 0; k < reference.snapshots.size(); ++k) {
    double d = 0.0;
    for (std::size_t i = 0; i < reference.snapshots[k].size(); ++i) {
      const double e = reference.snapshots[k][i] - refined.snapshots[k][i];
      d += e * e;
    }
    out.reference_change =
        std::max(out.reference_change, std::sqrt(d * problem.grid.cell_volume()));
  }

  std::vector<double> lx, ly;
  for (double eps : options.epsilons) {
    KineticConfig kc;
    kc.epsilon = eps;
    kc.horizon = options.horizon;
    kc.snapshots = options.snapshots;
    kc.dt = aligned_dt(options.dt_factor * eps * eps, options.horizon, options.snapshots);
    const auto traj = run_kinetic(problem, kc, rho0);
    const double err = l2_time_error(traj.times, traj.snapshots, refined.snapshots, problem.grid);
    out.epsilons.push_back(eps);
    out.errors.push_back(err);
    lx.push_back(std::log(eps));
    ly.push_back(std::log(err));
  }
  std::tie(out.slope, out.intercept) = fit_line(lx, ly);
  return out;
}

}  // namespace rtlab
