#include "rtlab/config.hpp"

#include <algorithm>
#include <charconv>
#include <fmt/format.h>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace rtlab {

namespace {

const std::map<std::string, std::vector<std::string>>& known_keys() {
  static const std::map<std::string, std::vector<std::string>> keys{
      {"model",
       {"dim", "n_x", "velocity", "velocity_nodes", "opacity", "sigma_star", "sigma_upper",
        "sigma_scale"}},
      {"noise", {"model", "rate", "profile", "rates", "center"}},
      {"simulation",
       {"epsilon", "epsilons", "dt", "dt_factor", "T", "snapshots", "limit_dt", "drift",
        "diffusion", "rho0"}},
      {"harness",
       {"samples", "limit_samples", "seed", "threads", "modes", "hs_s", "gap_slack",
        "paper_gap_factor", "paper_gap_sigmas", "band_factor", "rate_dt_factor", "slope_min",
        "reference_fraction", "reference_change_max", "mart_mode", "mart_s", "mart_t",
        "mart_samples", "psi_gain", "martingale_sigmas", "qv_sigmas"}},
      {"output", {"dir"}},
  };
  return keys;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool is_state_profile_key(const std::string& key) {
  if (key.rfind("profile.", 0) != 0 || key.size() == 8) return false;
  return std::all_of(key.begin() + 8, key.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::vector<std::string> split(const std::string& s, const std::string& delims) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (delims.find(c) != std::string::npos) {
      if (!trim(cur).empty()) out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!trim(cur).empty()) out.push_back(trim(cur));
  return out;
}

std::optional<double> to_double(const std::string& s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

std::optional<std::uint64_t> to_uint(const std::string& s) {
  std::uint64_t v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

std::optional<bool> to_bool(const std::string& s) {
  if (s == "true" || s == "on" || s == "yes" || s == "1") return true;
  if (s == "false" || s == "off" || s == "no" || s == "0") return false;
  return std::nullopt;
}

class Reader {
 public:
  Reader(const std::map<std::string, std::string>& entries, std::vector<std::string>& errors)
      : entries_(entries), errors_(errors) {}

  const std::string* raw(const std::string& key) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
  }

  void real(const std::string& key, double& out) const {
    if (const auto* v = raw(key)) {
      if (auto d = to_double(*v)) {
        out = *d;
      } else {
        errors_.push_back(fmt::format("{}: '{}' is not a number", key, *v));
      }
    }
  }
  void real(const std::string& key, std::optional<double>& out) const {
    if (raw(key)) {
      double v = 0.0;
      real(key, v);
      out = v;
    }
  }
  template <typename T>
  void count(const std::string& key, T& out) const {
    if (const auto* v = raw(key)) {
      if (auto d = to_uint(*v)) {
        out = static_cast<T>(*d);
      } else {
        errors_.push_back(fmt::format("{}: '{}' is not a non-negative integer", key, *v));
      }
    }
  }
  void flag(const std::string& key, bool& out) const {
    if (const auto* v = raw(key)) {
      if (auto b = to_bool(*v)) {
        out = *b;
      } else {
        errors_.push_back(fmt::format("{}: '{}' is not a boolean (true/false)", key, *v));
      }
    }
  }
  void text(const std::string& key, std::string& out) const {
    if (const auto* v = raw(key)) out = *v;
  }

  void error(std::string msg) const { errors_.push_back(std::move(msg)); }

 private:
  const std::map<std::string, std::string>& entries_;
  std::vector<std::string>& errors_;
};

void check(std::vector<std::string>& errors, bool ok, std::string msg) {
  if (!ok) errors.push_back(std::move(msg));
}

std::string join(const std::vector<std::string>& lines) {
  std::string out = "invalid configuration:";
  for (const auto& l : lines) out += "\n  " + l;
  return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : Error(join(violations)), violations_(std::move(violations)) {}

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::uint64_t RunConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& [k, v] : entries) {
    for (char c : k + "=" + v + "\n") {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError({fmt::format("cannot open config file '{}'", path.string())});
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

RunConfig parse_config_text(const std::string& text) {
  std::vector<std::string> errors;
  // Unknown and duplicate keys leave every parsed value intact, so they do not
  // block the derived checks below.
  std::size_t key_errors = 0;
  std::map<std::string, std::string> entries;
  std::string section;
  std::istringstream lines(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        errors.push_back(fmt::format("line {}: malformed section header", lineno));
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      if (!known_keys().count(section)) {
        errors.push_back(fmt::format("line {}: unknown section [{}]", lineno, section));
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back(fmt::format("line {}: expected 'key = value'", lineno));
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) {
      errors.push_back(fmt::format("line {}: key '{}' outside any section", lineno, key));
      continue;
    }
    const auto sec = known_keys().find(section);
    if (sec == known_keys().end()) continue;
    const auto& keys = sec->second;
    const bool known = std::find(keys.begin(), keys.end(), key) != keys.end() ||
                       (section == "noise" && is_state_profile_key(key));
    if (!known) {
      std::string best;
      std::size_t best_d = std::numeric_limits<std::size_t>::max();
      for (const auto& k : keys) {
        const auto d = edit_distance(key, k);
        if (d < best_d) {
          best_d = d;
          best = k;
        }
      }
      if (best_d <= std::max<std::size_t>(2, key.size() / 2)) {
        errors.push_back(fmt::format("[{}] {}: unknown key (did you mean '{}'?)", section, key, best));
      } else {
        errors.push_back(fmt::format("[{}] {}: unknown key", section, key));
      }
      ++key_errors;
      continue;
    }
    const std::string full = section + "." + key;
    if (entries.count(full)) {
      errors.push_back(fmt::format("line {}: duplicate key {}", lineno, full));
      ++key_errors;
      continue;
    }
    entries[full] = value;
  }

  RunConfig cfg;
  Reader r(entries, errors);

  // [model]
  r.count("model.dim", cfg.model.dim);
  r.count("model.n_x", cfg.model.n_x);
  if (const auto* v = r.raw("model.velocity")) {
    try {
      cfg.model.velocity.model = parse_velocity_model(*v);
    } catch (const Error& e) {
      r.error(fmt::format("model.velocity: {}", e.what()));
    }
  }
  switch (cfg.model.velocity.model) {
    case VelocityModel::GT2: cfg.model.velocity.nodes = 2; break;
    case VelocityModel::GT4: cfg.model.velocity.nodes = 4; break;
    case VelocityModel::CONT: cfg.model.velocity.nodes = 8; break;
  }
  r.count("model.velocity_nodes", cfg.model.velocity.nodes);
  r.text("model.opacity", cfg.model.opacity);
  r.real("model.sigma_star", cfg.model.sigma_star);
  r.real("model.sigma_upper", cfg.model.sigma_upper);
  r.real("model.sigma_scale", cfg.model.sigma_scale);
  check(errors, cfg.model.opacity == "constant" || cfg.model.opacity == "rational",
        fmt::format("model.opacity: '{}' is not one of constant, rational", cfg.model.opacity));

  // [noise]
  r.text("noise.model", cfg.noise.model);
  r.real("noise.rate", cfg.noise.rate);
  r.text("noise.profile", cfg.noise.profile);
  r.flag("noise.center", cfg.noise.center);
  for (std::size_t i = 0;; ++i) {
    const auto* v = r.raw(fmt::format("noise.profile.{}", i));
    if (!v) break;
    cfg.noise.profiles.push_back(*v);
  }
  for (const auto& [k, v] : entries) {
    if (k.rfind("noise.profile.", 0) == 0) {
      const auto idx = std::stoul(k.substr(14));
      if (idx >= cfg.noise.profiles.size()) {
        r.error(fmt::format("{}: chain profiles must be numbered 0, 1, 2, ... without gaps", k));
      }
    }
  }
  if (const auto* v = r.raw("noise.rates")) {
    const auto rows = split(*v, ";");
    std::vector<std::vector<double>> values;
    bool ok = true;
    for (const auto& row : rows) {
      std::vector<double> vals;
      for (const auto& tok : split(row, " \t,")) {
        if (auto d = to_double(tok)) {
          vals.push_back(*d);
        } else {
          ok = false;
        }
      }
      values.push_back(std::move(vals));
    }
    for (const auto& row : values) ok = ok && row.size() == values.size();
    if (!ok || values.empty()) {
      r.error("noise.rates: expected a square matrix written as rows separated by ';'");
    } else {
      cfg.noise.rates.resize(static_cast<Eigen::Index>(values.size()),
                             static_cast<Eigen::Index>(values.size()));
      for (std::size_t i = 0; i < values.size(); ++i) {
        for (std::size_t j = 0; j < values.size(); ++j) {
          cfg.noise.rates(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i][j];
        }
      }
    }
  }
  if (cfg.noise.model == "telegraph") {
    check(errors, !cfg.noise.profile.empty(), "noise.profile: required for the telegraph model");
    check(errors, cfg.noise.rate > 0.0, "noise.rate: must be positive");
  } else if (cfg.noise.model == "chain") {
    check(errors, !cfg.noise.profiles.empty(), "noise.profile.0, ...: required for the chain model");
    check(errors, cfg.noise.rates.size() > 0, "noise.rates: required for the chain model");
    check(errors,
          cfg.noise.rates.size() == 0 ||
              static_cast<std::size_t>(cfg.noise.rates.rows()) == cfg.noise.profiles.size(),
          "noise.rates: size does not match the number of profile.<i> entries");
  } else if (cfg.noise.model != "off") {
    r.error(fmt::format("noise.model: '{}' is not one of off, telegraph, chain", cfg.noise.model));
  }

  // [simulation]
  r.real("simulation.epsilon", cfg.simulation.epsilon);
  if (const auto* v = r.raw("simulation.epsilons")) {
    for (const auto& tok : split(*v, " \t,;")) {
      if (auto d = to_double(tok)) {
        cfg.simulation.epsilons.push_back(*d);
      } else {
        r.error(fmt::format("simulation.epsilons: '{}' is not a number", tok));
      }
    }
  }
  r.real("simulation.dt", cfg.simulation.dt);
  r.real("simulation.dt_factor", cfg.simulation.dt_factor);
  r.real("simulation.T", cfg.simulation.horizon);
  r.count("simulation.snapshots", cfg.simulation.snapshots);
  r.real("simulation.limit_dt", cfg.simulation.limit_dt);
  if (const auto* v = r.raw("simulation.drift")) {
    try {
      cfg.simulation.drift = parse_drift(*v);
    } catch (const Error& e) {
      r.error(fmt::format("simulation.drift: {}", e.what()));
    }
  }
  r.flag("simulation.diffusion", cfg.simulation.diffusion);
  r.text("simulation.rho0", cfg.simulation.rho0);

  // [harness]
  auto& h = cfg.harness;
  r.count("harness.samples", h.samples);
  r.count("harness.limit_samples", h.limit_samples);
  r.count("harness.seed", h.seed);
  r.count("harness.threads", h.threads);
  if (const auto* v = r.raw("harness.modes")) {
    h.modes.clear();
    for (const auto& tok : split(*v, ";")) {
      try {
        h.modes.push_back(parse_mode(tok));
      } catch (const Error& e) {
        r.error(fmt::format("harness.modes: {}", e.what()));
      }
    }
  }
  r.real("harness.hs_s", h.hs_s);
  r.real("harness.gap_slack", h.gap_slack);
  r.real("harness.paper_gap_factor", h.paper_gap_factor);
  r.real("harness.paper_gap_sigmas", h.paper_gap_sigmas);
  r.real("harness.band_factor", h.band_factor);
  r.real("harness.rate_dt_factor", h.rate_dt_factor);
  r.real("harness.slope_min", h.slope_min);
  r.real("harness.reference_fraction", h.reference_fraction);
  r.real("harness.reference_change_max", h.reference_change_max);
  if (const auto* v = r.raw("harness.mart_mode")) {
    try {
      h.mart_mode = parse_mode(*v);
    } catch (const Error& e) {
      r.error(fmt::format("harness.mart_mode: {}", e.what()));
    }
  }
  r.real("harness.mart_s", h.mart_s);
  r.real("harness.mart_t", h.mart_t);
  r.count("harness.mart_samples", h.mart_samples);
  r.real("harness.psi_gain", h.psi_gain);
  r.real("harness.martingale_sigmas", h.martingale_sigmas);
  r.real("harness.qv_sigmas", h.qv_sigmas);

  r.text("output.dir", cfg.output_dir);

  // Derived constraints, checked only once the individual values parsed.
  if (errors.size() == key_errors) {
    const auto& s = cfg.simulation;
    check(errors, s.epsilon > 0.0, "simulation.epsilon: must be positive");
    for (std::size_t k = 0; k < s.epsilons.size(); ++k) {
      check(errors, s.epsilons[k] > 0.0, "simulation.epsilons: entries must be positive");
      if (k > 0) {
        check(errors, s.epsilons[k] < s.epsilons[k - 1],
              "simulation.epsilons: must be strictly decreasing");
      }
    }
    check(errors, s.horizon > 0.0, "simulation.T: must be positive");
    check(errors, s.snapshots >= 1, "simulation.snapshots: must be at least 1");
    check(errors, s.dt_factor > 0.0 && s.dt_factor <= 0.5,
          fmt::format("simulation.dt_factor = {:g} violates the rule dt <= eps^2/2 "
                      "(dt_factor must lie in (0, 1/2])",
                      s.dt_factor));
    check(errors, h.samples >= 2, "harness.samples: must be at least 2");
    check(errors, h.limit_samples >= 2, "harness.limit_samples: must be at least 2");
    check(errors, h.rate_dt_factor > 0.0 && h.rate_dt_factor <= 0.5,
          "harness.rate_dt_factor: must lie in (0, 1/2] (rule dt <= eps^2/2)");
    check(errors, h.reference_fraction > 0.0 && h.reference_fraction <= 1.0,
          "harness.reference_fraction: must lie in (0, 1]");
    check(errors, h.mart_s >= 0.0 && h.mart_s < h.mart_t, "harness.mart_s/mart_t: need 0 <= s < t");
    check(errors, h.mart_samples == 0 || h.mart_samples >= 2,
          "harness.mart_samples: must be 0 (skip) or at least 2");
    check(errors, h.band_factor >= 1.0, "harness.band_factor: must be at least 1");
    if (h.hs_s) check(errors, *h.hs_s > 0.0, "harness.hs_s: must be positive");

    if (errors.size() == key_errors) {
      try {
        const auto problem = build_problem(cfg);
        initial_density(cfg, problem.grid);
        std::vector<double> eps = s.epsilons;
        eps.push_back(s.epsilon);
        for (double e : eps) {
          try {
            kinetic_config(cfg, e).validate();
          } catch (const Error& ex) {
            errors.push_back(fmt::format("simulation (eps = {:g}): {}", e, ex.what()));
          }
        }
        try {
          limit_config(cfg, problem).validate(problem);
        } catch (const Error& ex) {
          errors.push_back(fmt::format("simulation.limit_dt: {}", ex.what()));
        }
        if (h.mart_samples > 0) {
          const auto kc = kinetic_config(cfg, s.epsilon);
          check(errors, h.mart_t <= s.horizon * (1.0 + 1e-12),
                "harness.mart_t: must not exceed simulation.T");
          for (double t : {h.mart_s, h.mart_t}) {
            const double ratio = t / kc.dt;
            check(errors, std::abs(ratio - std::round(ratio)) <= 1e-9 * std::max(1.0, ratio),
                  fmt::format("harness.mart_s/mart_t: {:g} is not a multiple of the kinetic dt", t));
          }
        }
      } catch (const Error& ex) {
        errors.push_back(ex.what());
      }
    }
  }

  if (!errors.empty()) throw ConfigError(std::move(errors));
  entries.erase("output.dir");
  entries.erase("harness.threads");
  cfg.entries = std::move(entries);
  return cfg;
}

void apply_overrides(RunConfig& config, const Overrides& o) {
  if (o.seed) {
    config.harness.seed = *o.seed;
    config.entries["harness.seed"] = std::to_string(*o.seed);
  }
  if (o.samples) {
    if (*o.samples < 2) throw ConfigError({"--samples: must be at least 2"});
    config.harness.samples = *o.samples;
    config.entries["harness.samples"] = std::to_string(*o.samples);
  }
  if (o.drift) {
    config.simulation.drift = *o.drift;
    config.entries["simulation.drift"] = to_string(*o.drift);
  }
}

Problem build_problem(const RunConfig& config) {
  const TorusGrid grid(config.model.n_x, config.model.dim);
  auto velocity = build_velocity_space(config.model.velocity);
  const auto& m = config.model;
  Opacity opacity = m.opacity == "rational" ? Opacity::rational(m.sigma_star, m.sigma_upper, m.sigma_scale)
                                            : Opacity::constant(m.sigma_star);
  std::optional<NoiseModel> noise;
  const auto& n = config.noise;
  if (n.model == "telegraph") {
    noise = NoiseModel::telegraph(grid, evaluate_profile(parse_profile(n.profile), grid), n.rate);
  } else if (n.model == "chain") {
    std::vector<DensityField> states;
    for (const auto& p : n.profiles) states.push_back(evaluate_profile(parse_profile(p), grid));
    if (n.center) states = center_profiles(states, stationary_law(n.rates));
    noise = NoiseModel::create(grid, std::move(states), n.rates);
  }
  return Problem::create(grid, std::move(velocity), opacity, std::move(noise));
}

DensityField initial_density(const RunConfig& config, const TorusGrid& grid) {
  return evaluate_profile(parse_profile(config.simulation.rho0), grid);
}

KineticConfig kinetic_config(const RunConfig& config, double epsilon) {
  const auto& s = config.simulation;
  KineticConfig c;
  c.epsilon = epsilon;
  c.horizon = s.horizon;
  c.snapshots = s.snapshots;
  c.seed = derive_seed(config.harness.seed, 0, SeedStream::Kinetic);
  c.dt = s.dt ? *s.dt : aligned_dt(s.dt_factor * epsilon * epsilon, s.horizon, s.snapshots);
  return c;
}

SpdeConfig limit_config(const RunConfig& config, const Problem& problem) {
  const auto& s = config.simulation;
  SpdeConfig c;
  c.horizon = s.horizon;
  c.snapshots = s.snapshots;
  c.seed = derive_seed(config.harness.seed, 0, SeedStream::Limit);
  c.drift = s.drift;
  c.diffusion = s.diffusion;
  c.dt = s.limit_dt ? *s.limit_dt
                    : aligned_dt(0.5 * SpdeConfig::stable_dt(problem), s.horizon, s.snapshots);
  return c;
}

FunctionalSpec functional_spec(const RunConfig& config) {
  return FunctionalSpec{config.harness.modes, config.harness.hs_s};
}

SweepOptions sweep_options(const RunConfig& config, const Problem& problem) {
  SweepOptions o;
  o.epsilons = config.simulation.epsilons;
  if (o.epsilons.empty()) o.epsilons = {config.simulation.epsilon};
  o.dt_factor = config.simulation.dt_factor;
  o.horizon = config.simulation.horizon;
  o.snapshots = config.simulation.snapshots;
  o.kinetic_samples = config.harness.samples;
  o.limit_samples = config.harness.limit_samples;
  o.seed = config.harness.seed;
  o.threads = config.harness.threads;
  o.functionals = functional_spec(config);
  o.limit = limit_config(config, problem);
  return o;
}

RateOptions rate_options(const RunConfig& config) {
  RateOptions o;
  o.epsilons = config.simulation.epsilons;
  o.dt_factor = config.harness.rate_dt_factor;
  o.horizon = config.simulation.horizon;
  o.snapshots = config.simulation.snapshots;
  o.reference_fraction = config.harness.reference_fraction;
  return o;
}

MartingaleOptions martingale_options(const RunConfig& config) {
  MartingaleOptions o;
  o.mode = config.harness.mart_mode;
  o.s = config.harness.mart_s;
  o.t = config.harness.mart_t;
  o.samples = config.harness.mart_samples;
  o.base_seed = config.harness.seed;
  o.psi_gain = config.harness.psi_gain;
  o.threads = config.harness.threads;
  return o;
}

}  // namespace rtlab
