// config.hpp - sectioned key = value run configuration with declared units
//
//   task = absorption
//   [model]
//   E = 15198 cm-1
//   [evolution]
//   T = 2 ps
//
// Dimensioned values must carry a unit; lists share one trailing unit
// ("t_max = 0.25, 0.5, 1 ps"). Unknown sections and keys are errors.
#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mclosure::cli {

// error carrying the offending field path ("model.E")
struct ConfigError : std::runtime_error {
  ConfigError(const std::string& field, const std::string& what)
      : std::runtime_error(field + ": " + what), field(field) {}
  std::string field;
};

enum class Unit { None, Energy, Time, Bytes, Text, Flag };

struct Entry {
  std::string value;  // raw text after '='
  int line = 0;
};

class Config {
 public:
  static Config parse(const std::string& text, const std::filesystem::path& origin = {});
  static Config load(const std::filesystem::path& file);

  bool has(const std::string& section, const std::string& key) const;
  bool has_section(const std::string& section) const { return sections_.count(section) != 0; }
  std::vector<std::string> sections_with_prefix(const std::string& prefix) const;
  std::vector<std::string> keys(const std::string& section) const;

  // energies in cm^-1, times in fs, sizes in bytes
  double number(const std::string& section, const std::string& key, Unit u) const;
  double number(const std::string& section, const std::string& key, Unit u, double fallback) const;
  std::vector<double> numbers(const std::string& section, const std::string& key, Unit u) const;
  int integer(const std::string& section, const std::string& key) const;
  int integer(const std::string& section, const std::string& key, int fallback) const;
  // rows separated by ';', entries by ','; one trailing unit for the whole matrix
  std::vector<std::vector<double>> matrix(const std::string& section, const std::string& key, Unit u) const;
  std::string text(const std::string& section, const std::string& key) const;
  std::string text(const std::string& section, const std::string& key, const std::string& fallback) const;
  bool flag(const std::string& section, const std::string& key, bool fallback) const;

  // paths are resolved against the directory of the config file
  std::filesystem::path path(const std::string& section, const std::string& key) const;

  const std::string& source() const { return source_; }

 private:
  const Entry& entry(const std::string& section, const std::string& key) const;
  std::map<std::string, std::map<std::string, Entry>> sections_;
  std::filesystem::path dir_;
  std::string source_;
};

// section.key as used in messages; top-level keys have an empty section
std::string field_name(const std::string& section, const std::string& key);

}  // namespace mclosure::cli
