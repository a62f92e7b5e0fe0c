#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rtlab/correctors.hpp"
#include "rtlab/error.hpp"
#include "rtlab/harness.hpp"
#include "rtlab/kinetic.hpp"
#include "rtlab/limit.hpp"
#include "rtlab/problem.hpp"
#include "rtlab/profile.hpp"
#include "rtlab/velocity.hpp"

namespace rtlab {

/// Raised by parse_config with every violation found, one per line.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

struct ModelSection {
  int dim = 1;
  std::size_t n_x = 64;
  VelocitySpec velocity;
  std::string opacity = "constant";
  double sigma_star = 1.0;
  double sigma_upper = 2.0;
  double sigma_scale = 1.0;
};

struct NoiseSection {
  std::string model = "off";  ///< off | telegraph | chain
  double rate = 1.0;
  std::string profile;                ///< telegraph n_1
  Eigen::MatrixXd rates;              ///< chain generator
  std::vector<std::string> profiles;  ///< chain states
  bool center = false;                ///< chain: subtract the nu-mean of the profiles
};

struct SimulationSection {
  double epsilon = 0.25;
  std::vector<double> epsilons;
  std::optional<double> dt;
  double dt_factor = 0.1;
  double horizon = 0.25;
  std::size_t snapshots = 10;
  std::optional<double> limit_dt;
  DriftChoice drift = DriftChoice::Effective;
  bool diffusion = true;
  std::string rho0 = "1 const";
};

struct HarnessSection {
  std::size_t samples = 100;
  std::size_t limit_samples = 100;
  std::uint64_t seed = 1;
  std::size_t threads = 0;
  std::vector<ModeIndex> modes{ModeIndex{{1, 0}}};
  std::optional<double> hs_s;
  double gap_slack = 1.0;
  double paper_gap_factor = 2.0;
  double paper_gap_sigmas = 3.0;
  double band_factor = 4.0;
  double rate_dt_factor = 0.02;
  double slope_min = 0.8;
  double reference_fraction = 0.5;
  double reference_change_max = 1e-6;
  ModeIndex mart_mode{{1, 0}};
  double mart_s = 0.25;
  double mart_t = 0.5;
  std::size_t mart_samples = 0;
  double psi_gain = 1.0;
  double martingale_sigmas = 3.0;
  double qv_sigmas = 5.0;
};

struct RunConfig {
  ModelSection model;
  NoiseSection noise;
  SimulationSection simulation;
  HarnessSection harness;
  std::string output_dir = "out";

  /// section.key -> value as written (after overrides); output.dir and
  /// harness.threads are excluded because they do not affect results.
  std::map<std::string, std::string> entries;

  /// FNV-1a over the canonical "section.key=value" lines.
  std::uint64_t hash() const;
};

RunConfig parse_config(const std::filesystem::path& path);
RunConfig parse_config_text(const std::string& text);

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  std::optional<DriftChoice> drift;
};
void apply_overrides(RunConfig& config, const Overrides& overrides);

/// Builders for the library objects a config describes.
Problem build_problem(const RunConfig& config);
DensityField initial_density(const RunConfig& config, const TorusGrid& grid);
KineticConfig kinetic_config(const RunConfig& config, double epsilon);
SpdeConfig limit_config(const RunConfig& config, const Problem& problem);
SweepOptions sweep_options(const RunConfig& config, const Problem& problem);
RateOptions rate_options(const RunConfig& config);
MartingaleOptions martingale_options(const RunConfig& config);
FunctionalSpec functional_spec(const RunConfig& config);

/// Levenshtein distance, used for key suggestions.
std::size_t edit_distance(const std::string& a, const std::string& b);

}  // namespace rtlab
