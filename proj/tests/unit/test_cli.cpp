#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <sstream>

#include "rtlab/cli.hpp"
#include "rtlab/config.hpp"
#include "rtlab/error.hpp"

using namespace rtlab;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = RTLAB_CONFIG_DIR;

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "rtlab_cli_tests" / name;
  fs::remove_all(dir);
  return dir;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name) {
  return static_cast<std::size_t>(std::find(header.begin(), header.end(), name) - header.begin());
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("noise-info tables") {
  const auto cfg = parse_config(kConfigs / "minimal.cfg");
  const auto out = scratch("noise-info");
  std::ostringstream log;
  REQUIRE(dispatch("noise-info", cfg, out, log) == 0);
  const auto fields = read_csv(out / "noise_fields.csv");
  const auto& header = fields.front();
  const auto n = column(header, "n_0"), h = column(header, "H_paper"), e = column(header, "h_eff");
  REQUIRE(h < header.size());
  const double rate = cfg.noise.rate;
  double norm_sq = 0.0;
  for (std::size_t r = 1; r < fields.size(); ++r) {
    const double n1 = std::stod(fields[r][n]);
    CHECK(std::stod(fields[r][h]) == doctest::Approx(-n1 * n1 / (2 * rate)).epsilon(1e-12));
    CHECK(std::stod(fields[r][e]) == doctest::Approx(n1 * n1 / (2 * rate)).epsilon(1e-12));
    norm_sq += n1 * n1 / static_cast<double>(fields.size() - 1);
  }
  const auto modes = read_csv(out / "noise_modes.csv");
  CHECK(std::stod(modes[1][1]) == doctest::Approx(norm_sq / rate).epsilon(1e-12));
  CHECK(modes[1][2] == "true");
  CHECK(modes[2][2] == "false");
}

TEST_CASE("verify passes on every fixture") {
  for (const char* name : {"minimal.cfg", "heat.cfg", "chain3.cfg", "martingale.cfg", "stochastic.cfg"}) {
    CAPTURE(name);
    std::ostringstream log;
    CHECK(dispatch("verify", parse_config(kConfigs / name), scratch(std::string("verify-") + name), log) == 0);
    CAPTURE(log.str());
  }
}

TEST_CASE("noise-free sweep writes a decreasing error column") {
  const auto out = scratch("heat-sweep");
  std::ostringstream log;
  CHECK(dispatch("sweep", parse_config(kConfigs / "heat.cfg"), out, log) == 0);
  const auto rows = read_csv(out / "deterministic.csv");
  REQUIRE(rows.size() == 5);
  for (std::size_t r = 2; r < rows.size(); ++r) CHECK(std::stod(rows[r][1]) < std::stod(rows[r - 1][1]));
}

TEST_CASE("breaches and errors") {
  auto cfg = parse_config(kConfigs / "minimal.cfg");
  cfg.harness.paper_gap_factor = 1e12;
  std::ostringstream log;
  CHECK(dispatch("sweep", cfg, scratch("breach"), log) == 2);
  CHECK(log.str().find("FAIL,paper_drift_gap_ratio") != std::string::npos);
  CHECK_THROWS_AS(dispatch("bogus", cfg, scratch("bogus"), log), Error);
  CHECK_THROWS_AS(dispatch("noise-info", parse_config(kConfigs / "heat.cfg"), scratch("nonoise"), log), Error);
}

TEST_CASE("run outputs and manifest") {
  const auto cfg = parse_config(kConfigs / "minimal.cfg");
  const auto out = scratch("run");
  std::ostringstream log;
  REQUIRE(dispatch("run-kinetic", cfg, out, log) == 0);
  const auto snaps = read_csv(out / "snapshots.csv");
  CHECK(snaps.front() == std::vector<std::string>{"t", "x", "rho"});
  CHECK(snaps.size() == 1 + 6 * 32);
  const auto manifest = read_csv(out / "manifest.csv");
  CHECK(manifest[1][0] == "command");
  CHECK(manifest[1][1] == "run-kinetic");
  CHECK(manifest[2][1] == fmt::format("{:016x}", cfg.hash()));
  std::ifstream raw(out / "diagnostics.csv", std::ios::binary);
  const std::string text((std::istreambuf_iterator<char>(raw)), std::istreambuf_iterator<char>());
  CHECK(text.find('\r') == std::string::npos);
  CHECK(text.find("t,mass,energy,defect\n0,") == 0);
}

}  // TEST_SUITE
