// Command-line front end: one subcommand per scenario.
//
// Exit codes: 0 all verdicts pass or are inconclusive, 1 some verdict fails,
// 2 configuration error, 3 internal error.

#include <chrono>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "rplab/scenario.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitInternal = 3;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> chains;
  std::optional<std::string> format;
};

int run(rplab::ScenarioKind kind, const Flags& flags) {
  rplab::ScenarioConfig cfg;
  try {
    cfg = rplab::load_config(flags.config, kind, flags.seed);
    if (flags.chains) {
      cfg.mc.chains = *flags.chains;
      cfg.mc.validate();
    }
    if (flags.out) cfg.output.dir = *flags.out;
    if (flags.format) cfg.output.format = *flags.format;
  } catch (const rplab::Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  const auto start = std::chrono::steady_clock::now();
  rplab::RunReport report;
  int code = 0;
  try {
    report = rplab::run_scenario(cfg);
    code = report.exit_code();
  } catch (const rplab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    // keep what is known about the run next to the failure
    report.report["scenario"] = rplab::to_string(cfg.scenario);
    report.report["config"] = rplab::to_json(cfg);
    report.report["error"] = e.what();
    std::cerr << "error: " << e.what() << "\n";
    code = kExitInternal;
  }
  report.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  try {
    rplab::write_outputs(report, cfg.output.dir, cfg.output.format);
  } catch (const std::exception& e) {
    std::cerr << "error writing results: " << e.what() << "\n";
    return kExitInternal;
  }
  if (code != kExitInternal) {
    int counts[3] = {0, 0, 0};
    for (const auto& v : report.verdicts) ++counts[static_cast<int>(v.status)];
    std::cout << rplab::to_string(cfg.scenario) << ": " << counts[0] << " pass, " << counts[1] << " fail, "
              << counts[2] << " inconclusive -> " << cfg.output.dir << "\n";
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reflection-positivity laboratory"};
  app.require_subcommand(1);
  Flags flags;
  std::optional<rplab::ScenarioKind> chosen;

  for (auto kind : {rplab::ScenarioKind::rp_exact, rplab::ScenarioKind::rp_mc, rplab::ScenarioKind::casimir_scan,
                    rplab::ScenarioKind::torque_scan, rplab::ScenarioKind::dipole}) {
    CLI::App* sub = app.add_subcommand(rplab::to_string(kind));
    sub->add_option("--config", flags.config, "YAML scenario file")->required();
    sub->add_option("--seed", flags.seed, "master seed (overrides the config)");
    sub->add_option("--out", flags.out, "output directory");
    sub->add_option("--chains", flags.chains, "independent Monte Carlo chains")->check(CLI::PositiveNumber);
    sub->add_option("--format", flags.format, "table format")->check(CLI::IsMember({"csv", "json"}));
    sub->callback([&chosen, kind] { chosen = kind; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }
  try {
    return run(*chosen, flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInternal;
  }
}
