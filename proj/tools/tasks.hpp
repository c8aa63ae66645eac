// tasks.hpp - config-driven workflows behind the command-line driver
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mclosure/spectra.hpp"

#include "config.hpp"

namespace mclosure::cli {

const std::vector<std::string>& task_names();

struct Invocation {
  std::string task;  // "run" takes the task from the config
  std::filesystem::path config;
  std::filesystem::path out;  // empty: the config's `output`
  int workers = 1;
  std::optional<std::uint64_t> seed;  // overrides the config's `seed`
};

// the validated model, built before any output is created
struct Plan {
  std::string task;
  std::filesystem::path out;
  std::uint64_t seed = 1;
  int workers = 1;
  spectra::ElectronicSystem system;
  bool is_dimer = false;
  bool com_factor = false;
  specdens::SpectralDensity J;      // physical density
  specdens::SpectralDensity J_env;  // density mapped onto the chain (J/2 for a dimer)
};

Plan make_plan(const Config& cfg, const Invocation& inv);

// parses, validates, runs, writes outputs and the manifest; throws
// ConfigError before touching the file system when the config is invalid
void execute(const Invocation& inv, std::ostream& log);

}  // namespace mclosure::cli
