#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "rtlab/config.hpp"

namespace rtlab {

inline constexpr const char* kVersion = "1.0.0";

/// One row of an acceptance table: pass means `value relation threshold`.
struct Check {
  std::string name;
  double value;
  std::string relation;  ///< "<=" or ">="
  double threshold;
  bool pass() const { return relation == "<=" ? value <= threshold : value >= threshold; }
};

/// Identity checks behind the `verify` command (model, noise and corrector
/// algebra on seeded random fields; martingale test when mart_samples > 0).
std::vector<Check> verify_identities(const RunConfig& config, std::ostream& log);

const std::vector<std::string>& commands();

/// Runs one subcommand, writing CSVs and manifest.csv into `out`. Returns 0 on
/// success and 2 when any acceptance check fails; the failing checks are
/// printed to `log` as CSV rows prefixed with FAIL. Errors propagate.
int dispatch(const std::string& command, const RunConfig& config, const std::filesystem::path& out,
             std::ostream& log);

}  // namespace rtlab
