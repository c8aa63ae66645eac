// mclosure - command-line driver
//
//   mclosure <task> --config run.ini [--out DIR] [--workers N] [--seed S]
//   mclosure run --config run.ini      (task taken from the config)
//
// Exit status: 0 success, 2 invalid invocation or config, 1 task failure.
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "config.hpp"
#include "tasks.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Chain-mapped open-system dynamics and optical spectra"};
  app.require_subcommand(1);
  mclosure::cli::Invocation inv;
  std::string config, out;
  long long seed = -1;
  auto add = [&](const std::string& name, const std::string& help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config,-c", config, "run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out,-o", out, "output directory (default: the config's output)");
    sub->add_option("--workers,-j", inv.workers, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "random seed (default: the config's seed, else 1)")->check(CLI::NonNegativeNumber);
    sub->callback([&inv, name] { inv.task = name; });
  };
  add("chainmap", "chain coefficients, asymptotics and fingerprint");
  add("fit-closure", "fit a Markovian closure to the semicircle correlation function");
  add("absorption", "linear response and absorption spectrum");
  add("twodes", "rephasing stimulated-emission response and 2D spectrum");
  add("ttcf", "bath, chain and hybrid correlation functions");
  add("bench", "time and memory scaling of plain chains against chain + closure");
  add("run", "run the task declared in the config");
  CLI11_PARSE(app, argc, argv);

  inv.config = config;
  inv.out = out;
  if (seed >= 0) inv.seed = static_cast<std::uint64_t>(seed);
  try {
    mclosure::cli::execute(inv, std::cerr);
  } catch (const mclosure::cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
