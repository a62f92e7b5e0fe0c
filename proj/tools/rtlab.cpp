#include <CLI11.hpp>

#include <iostream>

#include "rtlab/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Stochastic radiative transfer and Rosseland limit laboratory"};
  app.set_version_flag("--version", std::string(rtlab::kVersion));
  std::string command;
  std::string config_path;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  std::string drift;
  app.add_option("command", command, "Subcommand")
      ->required()
      ->check(CLI::IsMember(rtlab::commands()));
  app.add_option("--config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  app.add_option("--out", out, "Output directory (default: [output] dir)");
  app.add_option("--seed", seed, "Base seed override");
  app.add_option("--samples", samples, "Kinetic sample count override");
  app.add_option("--drift", drift, "Limit drift: effective or paper")
      ->check(CLI::IsMember({"effective", "paper"}));
  CLI11_PARSE(app, argc, argv);

  try {
    auto config = rtlab::parse_config(config_path);
    rtlab::Overrides o;
    o.seed = seed;
    o.samples = samples;
    if (!drift.empty()) o.drift = rtlab::parse_drift(drift);
    rtlab::apply_overrides(config, o);
    return rtlab::dispatch(command, config, out.empty() ? config.output_dir : out, std::cerr);
  } catch (const rtlab::ConfigError& e) {
    for (const auto& v : e.violations()) std::cerr << "CONFIG," << v << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "ERROR," << e.what() << '\n';
    return 1;
  }
}
