#include <doctest.h>

#include <algorithm>

#include "rtlab/config.hpp"

using namespace rtlab;

namespace {

const char* kBase = R"(
[model]
dim = 1
n_x = 32
velocity = GT2
opacity = rational
sigma_star = 1
sigma_upper = 2

[noise]
model = telegraph
rate = 1
profile = 1 cos 1

[simulation]
epsilon = 0.25
T = 0.25
snapshots = 5
rho0 = 1 const; 0.5 cos 1

[harness]
samples = 20
seed = 1
)";

std::vector<std::string> violations_of(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.violations();
  }
  return {};
}

bool any_contains(const std::vector<std::string>& v, const std::string& needle) {
  return std::any_of(v.begin(), v.end(),
                     [&](const std::string& s) { return s.find(needle) != std::string::npos; });
}

std::string with(const std::string& section_line, const std::string& extra) {
  std::string text = kBase;
  const auto pos = text.find(section_line);
  text.insert(pos + section_line.size() + 1, extra + "\n");
  return text;
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("shipped configs parse") {
  for (const char* name : {"minimal.cfg", "heat.cfg", "rosseland.cfg", "martingale.cfg",
                           "chain3.cfg", "stochastic.cfg"}) {
    CAPTURE(name);
    const auto cfg = parse_config(std::string(RTLAB_CONFIG_DIR) + "/" + name);
    const auto p = build_problem(cfg);
    CHECK(initial_density(cfg, p.grid).size() == p.grid.points());
  }
}

TEST_CASE("minimal setup") {
  const auto cfg = parse_config_text(kBase);
  CHECK(cfg.model.n_x == 32);
  CHECK(cfg.noise.model == "telegraph");
  CHECK(cfg.simulation.epsilon == 0.25);
  const auto kc = kinetic_config(cfg, 0.25);
  CHECK(kc.dt <= 0.5 * 0.25 * 0.25);
  CHECK(kc.validate() % 5 == 0);
  const auto p = build_problem(cfg);
  CHECK(p.noise.has_value());
  CHECK(limit_config(cfg, p).dt <= SpdeConfig::stable_dt(p));
}

TEST_CASE("step size violation names the rule") {
  const auto v = violations_of(with("[simulation]", "dt = 0.05"));
  REQUIRE(v.size() == 1);
  CHECK(v[0].find("dt <= eps^2/2") != std::string::npos);
  CHECK(any_contains(violations_of(with("[simulation]", "dt_factor = 0.7")), "dt <= eps^2/2"));
}

TEST_CASE("unknown keys get suggestions") {
  const auto v = violations_of(with("[model]", "sigma_min = 0.5"));
  REQUIRE(v.size() == 1);
  CHECK(v[0].find("did you mean 'sigma_star'") != std::string::npos);
  CHECK(any_contains(violations_of(with("[model]", "zzzzzzzzzz = 1")), "unknown key"));
  CHECK(edit_distance("kitten", "sitting") == 3);
  CHECK(edit_distance("", "abc") == 3);
}

TEST_CASE("every violation is reported") {
  const auto v = violations_of(with("[harness]", "samples = 1\nlimit_samples = x\nbogus = 2"));
  CHECK(v.size() >= 3);
  CHECK(any_contains(v, "limit_samples"));
  CHECK(any_contains(v, "bogus"));
  // An unknown key does not hide a constraint violation elsewhere.
  const auto mixed = violations_of(with("[simulation]", "dt = 1\nsigma_min = 0.5"));
  CHECK(any_contains(mixed, "sigma_min"));
  CHECK(any_contains(mixed, "dt <= eps^2/2"));
  const auto dup = violations_of(with("[noise]", "rate = 2"));
  CHECK(any_contains(dup, "duplicate"));
  CHECK_THROWS_AS(parse_config("/nonexistent/file.cfg"), ConfigError);
}

TEST_CASE("overrides and hashing") {
  auto a = parse_config_text(kBase);
  auto b = parse_config_text(with("[harness]", "threads = 3"));
  CHECK(a.hash() == b.hash());
  auto c = a;
  apply_overrides(c, {std::uint64_t{99}, std::nullopt, std::nullopt});
  CHECK(c.harness.seed == 99);
  CHECK(c.hash() != a.hash());
  auto d = a;
  apply_overrides(d, {std::nullopt, std::size_t{7}, DriftChoice::Paper});
  CHECK(d.harness.samples == 7);
  CHECK(d.simulation.drift == DriftChoice::Paper);
  CHECK(d.hash() != a.hash());
  CHECK_THROWS_AS(apply_overrides(d, {std::nullopt, std::size_t{1}, std::nullopt}), ConfigError);
  CHECK(kinetic_config(c, 0.25).seed != kinetic_config(a, 0.25).seed);
}

}  // TEST_SUITE
