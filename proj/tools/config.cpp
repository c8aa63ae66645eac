#include "config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace mclosure::cli {
namespace {

enum class Kind { Number, Energy, Time, Bytes, Int, Text, Flag, EnergyList, TimeList, NumberList };

using Schema = std::map<std::string, Kind>;

const Schema& schema_for(const std::string& section) {
  static const std::map<std::string, Schema> fixed = {
      {"", {{"task", Kind::Text}, {"output", Kind::Text}, {"seed", Kind::Int}}},
      {"model",
       {{"kind", Kind::Text}, {"E", Kind::Energy}, {"V", Kind::Energy}, {"dipole", Kind::NumberList},
        {"H", Kind::Text}, {"mu_plus", Kind::Text}, {"A", Kind::Text}, {"reference", Kind::Energy},
        {"com_factor", Kind::Flag}}},
      {"environment",
       {{"spectral_density", Kind::Text}, {"scale", Kind::Number}, {"support_max", Kind::Energy},
        {"support_eps", Kind::Number}, {"eps", Kind::Number}, {"M", Kind::Int}, {"chain_length", Kind::Int},
        {"nodes", Kind::Int}}},
      {"closure",
       {{"kind", Kind::Text}, {"N", Kind::Int}, {"file", Kind::Text}, {"prony_dt", Kind::Number},
        {"prony_window", Kind::Number}, {"random_starts", Kind::Int}, {"polish_window", Kind::Number}}},
      {"evolution",
       {{"dt", Kind::Time}, {"T", Kind::Time}, {"sample", Kind::Time}, {"chi", Kind::Int},
        {"chain_dim", Kind::Int}, {"first_dim", Kind::Int}, {"closure_dim", Kind::Int},
        {"krylov_dim", Kind::Int}, {"krylov_tol", Kind::Number}, {"checkpoint_budget", Kind::Bytes},
        {"renormalize", Kind::Flag}}},
      {"chainmap", {{"D", Kind::Int}, {"eta", Kind::Energy}, {"points", Kind::Int}}},
      {"absorption",
       {{"omega_min", Kind::Energy}, {"omega_max", Kind::Energy}, {"points", Kind::Int},
        {"taper", Kind::Number}, {"normalize", Kind::Flag}}},
      {"twodes",
       {{"T2", Kind::Time}, {"omega_min", Kind::Energy}, {"omega_max", Kind::Energy}, {"points", Kind::Int},
        {"taper", Kind::Number}, {"write_response", Kind::Flag}}},
      {"ttcf", {{"T", Kind::Time}, {"step", Kind::Time}, {"D", Kind::Int}}},
      {"bench",
       {{"t_max", Kind::TimeList}, {"closure_M", Kind::Int}, {"closure_N", Kind::Int},
        {"initial_sites", Kind::Int}, {"watch_sites", Kind::Int}, {"occupation_limit", Kind::Number},
        {"growth", Kind::Number}, {"check_every", Kind::Int}, {"agreement_tol", Kind::Number}}},
  };
  static const Schema sd = {{"kind", Kind::Text},          {"c", Kind::NumberList},
                            {"omega_c", Kind::EnergyList}, {"S", Kind::NumberList},
                            {"Omega", Kind::EnergyList},   {"Gamma", Kind::EnergyList},
                            {"omega_min", Kind::Energy},   {"omega_max", Kind::Energy},
                            {"prefactor", Kind::Number},   {"file", Kind::Text}};
  if (section.rfind("sd:", 0) == 0) return sd;
  auto it = fixed.find(section);
  if (it == fixed.end()) throw ConfigError("[" + section + "]", "unknown section");
  return it->second;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool to_double(const std::string& s, double& v) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && p == s.data() + s.size();
}

Unit unit_of(Kind k) {
  switch (k) {
    case Kind::Energy:
    case Kind::EnergyList: return Unit::Energy;
    case Kind::Time:
    case Kind::TimeList: return Unit::Time;
    case Kind::Bytes: return Unit::Bytes;
    case Kind::Text: return Unit::Text;
    case Kind::Flag: return Unit::Flag;
    default: return Unit::None;
  }
}

bool is_list(Kind k) { return k == Kind::EnergyList || k == Kind::TimeList || k == Kind::NumberList; }

double unit_factor(const std::string& field, const std::string& unit, Unit expected) {
  static const std::map<std::string, std::pair<Unit, double>> table = {
      {"cm-1", {Unit::Energy, 1.0}},    {"cm^-1", {Unit::Energy, 1.0}},      {"1/cm", {Unit::Energy, 1.0}},
      {"eV", {Unit::Energy, 8065.543937}}, {"meV", {Unit::Energy, 8.065543937}},
      {"fs", {Unit::Time, 1.0}},        {"ps", {Unit::Time, 1000.0}},
      {"B", {Unit::Bytes, 1.0}},        {"KiB", {Unit::Bytes, 1024.0}},      {"MiB", {Unit::Bytes, 1048576.0}},
      {"GiB", {Unit::Bytes, 1073741824.0}},
  };
  const char* want = expected == Unit::Energy ? "an energy unit (cm-1, eV, meV)"
                     : expected == Unit::Time ? "a time unit (fs, ps)"
                                              : "a size unit (B, KiB, MiB, GiB)";
  if (unit.empty()) throw ConfigError(field, std::string("missing unit, expected ") + want);
  auto it = table.find(unit);
  if (it == table.end() || it->second.first != expected)
    throw ConfigError(field, "unit '" + unit + "' is not " + want);
  return it->second.second;
}

// comma-separated numbers with an optional single trailing unit
std::vector<double> parse_numbers(const std::string& field, const std::string& raw, Unit u) {
  std::string body = trim(raw), unit;
  auto sp = body.find_last_of(" \t");
  if (sp != std::string::npos) {
    std::string last = trim(body.substr(sp + 1));
    double dummy;
    if (!to_double(last, dummy)) {
      unit = last;
      body = trim(body.substr(0, sp));
    }
  } else {
    double dummy;
    if (!to_double(body, dummy)) {
      // "1000cm-1" and friends
      std::size_t k = 0;
      while (k < body.size() && (std::isdigit(static_cast<unsigned char>(body[k])) || body[k] == '.' ||
                                 body[k] == '-' || body[k] == '+' || body[k] == 'e' || body[k] == 'E'))
        ++k;
      if (k > 0 && k < body.size()) throw ConfigError(field, "separate the unit from the number by a space");
    }
  }
  double f = 1.0;
  if (u == Unit::None) {
    if (!unit.empty()) throw ConfigError(field, "dimensionless value takes no unit ('" + unit + "')");
  } else {
    f = unit_factor(field, unit, u);
  }
  std::vector<double> out;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    double v;
    if (!to_double(item, v)) throw ConfigError(field, "not a number: '" + item + "'");
    out.push_back(v * f);
  }
  if (out.empty()) throw ConfigError(field, "empty value");
  return out;
}

void check_value(const std::string& field, Kind k, const std::string& raw) {
  switch (k) {
    case Kind::Text:
      if (raw.empty()) throw ConfigError(field, "empty value");
      return;
    case Kind::Flag:
      if (raw != "true" && raw != "false") throw ConfigError(field, "expected true or false");
      return;
    case Kind::Int: {
      int v;
      auto [p, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
      if (ec != std::errc() || p != raw.data() + raw.size()) throw ConfigError(field, "expected an integer");
      return;
    }
    default: {
      auto v = parse_numbers(field, raw, unit_of(k));
      if (!is_list(k) && v.size() != 1) throw ConfigError(field, "expected a single value");
    }
  }
}

}  // namespace

std::string field_name(const std::string& section, const std::string& key) {
  return section.empty() ? key : section + "." + key;
}

Config Config::parse(const std::string& text, const std::filesystem::path& origin) {
  Config c;
  c.source_ = text;
  c.dir_ = origin.empty() ? std::filesystem::current_path() : origin.parent_path();
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  c.sections_[""];
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty() || line[0] == ';') continue;
    const std::string where = "line " + std::to_string(lineno);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty() || section == "sd:") throw ConfigError(where, "empty section name");
      schema_for(section);
      if (c.sections_.count(section)) throw ConfigError("[" + section + "]", "section declared twice");
      c.sections_[section];
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where, "expected key = value");
    std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    const std::string field = field_name(section, key);
    const auto& sch = schema_for(section);
    auto k = sch.find(key);
    if (k == sch.end()) throw ConfigError(field, "unknown key");
    if (c.sections_[section].count(key)) throw ConfigError(field, "duplicate key");
    check_value(field, k->second, value);
    c.sections_[section][key] = Entry{value, lineno};
  }
  return c;
}

Config Config::load(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError(file.string(), "cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), std::filesystem::absolute(file));
}

bool Config::has(const std::string& section, const std::string& key) const {
  auto s = sections_.find(section);
  return s != sections_.end() && s->second.count(key);
}

std::vector<std::string> Config::sections_with_prefix(const std::string& prefix) const {
  std::vector<std::string> out;
  for (const auto& [name, _] : sections_)
    if (name.rfind(prefix, 0) == 0) out.push_back(name);
  return out;
}

std::vector<std::string> Config::keys(const std::string& section) const {
  std::vector<std::string> out;
  auto s = sections_.find(section);
  if (s != sections_.end())
    for (const auto& [k, _] : s->second) out.push_back(k);
  return out;
}

const Entry& Config::entry(const std::string& section, const std::string& key) const {
  auto s = sections_.find(section);
  if (s == sections_.end() || !s->second.count(key)) throw ConfigError(field_name(section, key), "required key is missing");
  return s->second.at(key);
}

double Config::number(const std::string& section, const std::string& key, Unit u) const {
  auto v = numbers(section, key, u);
  if (v.size() != 1) throw ConfigError(field_name(section, key), "expected a single value");
  return v[0];
}

double Config::number(const std::string& section, const std::string& key, Unit u, double fallback) const {
  return has(section, key) ? number(section, key, u) : fallback;
}

std::vector<double> Config::numbers(const std::string& section, const std::string& key, Unit u) const {
  return parse_numbers(field_name(section, key), entry(section, key).value, u);
}

int Config::integer(const std::string& section, const std::string& key) const {
  const auto& raw = entry(section, key).value;
  int v = 0;
  auto [p, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
  if (ec != std::errc() || p != raw.data() + raw.size()) throw ConfigError(field_name(section, key), "expected an integer");
  return v;
}

int Config::integer(const std::string& section, const std::string& key, int fallback) const {
  return has(section, key) ? integer(section, key) : fallback;
}

std::vector<std::vector<double>> Config::matrix(const std::string& section, const std::string& key, Unit u) const {
  const std::string field = field_name(section, key);
  std::string raw = trim(entry(section, key).value), unit;
  auto sp = raw.find_last_of(" \t");
  double dummy;
  if (sp != std::string::npos && !to_double(trim(raw.substr(sp + 1)), dummy)) {
    unit = trim(raw.substr(sp + 1));
    raw = trim(raw.substr(0, sp));
  }
  std::vector<std::vector<double>> rows;
  std::stringstream ss(raw);
  std::string row;
  while (std::getline(ss, row, ';')) rows.push_back(parse_numbers(field, unit.empty() ? row : row + " " + unit, u));
  for (const auto& r : rows)
    if (r.size() != rows.size()) throw ConfigError(field, "matrix must be square");
  return rows;
}

std::string Config::text(const std::string& section, const std::string& key) const { return entry(section, key).value; }

std::string Config::text(const std::string& section, const std::string& key, const std::string& fallback) const {
  return has(section, key) ? text(section, key) : fallback;
}

bool Config::flag(const std::string& section, const std::string& key, bool fallback) const {
  if (!has(section, key)) return fallback;
  return text(section, key) == "true";
}

std::filesystem::path Config::path(const std::string& section, const std::string& key) const {
  std::filesystem::path p = text(section, key);
  return p.is_absolute() ? p : dir_ / p;
}

}  // namespace mclosure::cli
