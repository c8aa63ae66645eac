#include "mclosure/io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

namespace mclosure::io {
namespace {

using nlohmann::json;

std::ofstream open_out(const std::filesystem::path& file) {
  std::ofstream o(file, std::ios::binary);
  if (!o) throw std::runtime_error("cannot write " + file.string());
  return o;
}

std::ifstream open_in(const std::filesystem::path& file) {
  std::ifstream i(file, std::ios::binary);
  if (!i) throw std::runtime_error("cannot read " + file.string());
  return i;
}

double parse_double(const std::string& s, const std::string& where) {
  double v = 0;
  auto b = s.data(), e = s.data() + s.size();
  while (b < e && *b == ' ') ++b;
  while (e > b && (e[-1] == ' ' || e[-1] == '\r')) --e;
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e) throw std::runtime_error(where + ": not a number '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  return out;
}

std::vector<double> numbers(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array()) throw std::runtime_error(std::string("closure json: missing array '") + key + "'");
  return j[key].get<std::vector<double>>();
}

}  // namespace

std::string format_double(double x) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, p);
}

void write_chain_csv(const chainmap::ChainCoefficients& c, const std::filesystem::path& file) {
  if (c.omega.size() != c.kappa.size()) throw std::invalid_argument("write_chain_csv: omega/kappa length mismatch");
  auto o = open_out(file);
  o << "# kappa0=" << format_double(c.kappa0) << ",support_min=" << format_double(c.support_min)
    << ",support_max=" << format_double(c.support_max) << "\n";
  o << "n,omega,kappa\n";
  for (int n = 0; n < c.size(); ++n)
    o << n + 1 << "," << format_double(c.omega[n]) << "," << format_double(c.kappa[n]) << "\n";
}

chainmap::ChainCoefficients read_chain_csv(const std::filesystem::path& file) {
  auto in = open_in(file);
  chainmap::ChainCoefficients c;
  std::string line;
  const std::string where = "read_chain_csv(" + file.string() + ")";
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) throw std::runtime_error(where + ": missing header row");
  std::map<std::string, double> head;
  for (const auto& kv : split(line.substr(2), ',')) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::runtime_error(where + ": malformed header entry '" + kv + "'");
    head[kv.substr(0, eq)] = parse_double(kv.substr(eq + 1), where);
  }
  for (const char* k : {"kappa0", "support_min", "support_max"})
    if (!head.count(k)) throw std::runtime_error(where + ": header lacks " + k);
  c.kappa0 = head["kappa0"];
  c.support_min = head["support_min"];
  c.support_max = head["support_max"];
  if (!std::getline(in, line) || line.rfind("n,omega,kappa", 0) != 0)
    throw std::runtime_error(where + ": missing column row");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = split(line, ',');
    if (f.size() != 3) throw std::runtime_error(where + ": expected 3 columns in '" + line + "'");
    if (int(parse_double(f[0], where)) != c.size() + 1) throw std::runtime_error(where + ": rows out of order");
    c.omega.push_back(parse_double(f[1], where));
    c.kappa.push_back(parse_double(f[2], where));
  }
  return c;
}

std::string closure_json(const closure::ClosureParams& p) {
  json j;
  j["N"] = p.N;
  j["Gamma"] = p.Gamma;
  j["Omega"] = p.Omega;
  j["g"] = p.g;
  std::vector<double> re, im;
  for (auto z : p.c) {
    re.push_back(z.real());
    im.push_back(z.imag());
  }
  j["c_re"] = re;
  j["c_im"] = im;
  j["rescaled"] = p.rescaled;
  j["band"] = {{"Omega", p.band.Omega}, {"K", p.band.K}};
  return j.dump(2);
}

closure::ClosureParams parse_closure_json(const std::string& text) {
  json j = json::parse(text);
  closure::ClosureParams p;
  if (!j.contains("N")) throw std::runtime_error("closure json: missing 'N'");
  p.N = j["N"].get<int>();
  p.Gamma = numbers(j, "Gamma");
  p.Omega = numbers(j, "Omega");
  p.g = numbers(j, "g");
  auto re = numbers(j, "c_re"), im = numbers(j, "c_im");
  if (re.size() != im.size()) throw std::runtime_error("closure json: c_re/c_im length mismatch");
  for (std::size_t n = 0; n < re.size(); ++n) p.c.emplace_back(re[n], im[n]);
  p.rescaled = j.value("rescaled", false);
  if (j.contains("band")) {
    p.band.Omega = j["band"].value("Omega", 0.0);
    p.band.K = j["band"].value("K", 0.0);
  }
  p.validate();
  return p;
}

void write_closure_json(const closure::ClosureParams& p, const std::filesystem::path& file) {
  auto o = open_out(file);
  o << closure_json(p) << "\n";
}

closure::ClosureParams read_closure_json(const std::filesystem::path& file) {
  auto in = open_in(file);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_closure_json(ss.str());
}

void write_response_csv(const spectra::Response& r, const std::filesystem::path& file) {
  if (r.t.size() != r.R.size()) throw std::invalid_argument("write_response_csv: t/R length mismatch");
  auto o = open_out(file);
  o << "t,re,im\n";
  for (std::size_t k = 0; k < r.t.size(); ++k)
    o << format_double(r.t[k]) << "," << format_double(r.R[k].real()) << "," << format_double(r.R[k].imag()) << "\n";
}

spectra::Response read_response_csv(const std::filesystem::path& file) {
  auto in = open_in(file);
  const std::string where = "read_response_csv(" + file.string() + ")";
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,re,im", 0) != 0) throw std::runtime_error(where + ": missing column row");
  spectra::Response r;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = split(line, ',');
    if (f.size() != 3) throw std::runtime_error(where + ": expected 3 columns in '" + line + "'");
    r.t.push_back(parse_double(f[0], where));
    r.R.emplace_back(parse_double(f[1], where), parse_double(f[2], where));
  }
  return r;
}

void write_spectrum_csv(const spectra::Spectrum& s, const std::filesystem::path& file) {
  if (s.omega.size() != s.A.size()) throw std::invalid_argument("write_spectrum_csv: length mismatch");
  auto o = open_out(file);
  o << "omega,A\n";
  for (std::size_t k = 0; k < s.omega.size(); ++k) o << format_double(s.omega[k]) << "," << format_double(s.A[k]) << "\n";
}

void write_response2d_csv(const spectra::Response2D& r, const std::filesystem::path& file) {
  auto o = open_out(file);
  o << "t1,t3,re,im\n";
  for (int i = 0; i < int(r.t1.size()); ++i)
    for (int j = 0; j < int(r.t3.size()); ++j)
      o << format_double(r.t1[i]) << "," << format_double(r.t3[j]) << "," << format_double(r.R(i, j).real()) << ","
        << format_double(r.R(i, j).imag()) << "\n";
}

void write_spectrum2d(const spectra::Spectrum2D& s, const std::filesystem::path& csv,
                      const std::filesystem::path& axes_json) {
  auto o = open_out(csv);
  for (int i = 0; i < s.S.rows(); ++i) {
    for (int j = 0; j < s.S.cols(); ++j) o << (j ? "," : "") << format_double(s.S(i, j).real());
    o << "\n";
  }
  json j;
  j["rows"] = "omega1";
  j["cols"] = "omega3";
  j["value"] = "Re S(omega1, omega3)";
  j["omega1"] = s.omega1;
  j["omega3"] = s.omega3;
  auto a = open_out(axes_json);
  a << j.dump(2) << "\n";
}

}  // namespace mclosure::io
