#include "tasks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <ostream>
#include <set>
#include <sstream>

#include <Eigen/Core>
#include <boost/version.hpp>
#include <nlohmann/json.hpp>

#include "mclosure/bench.hpp"
#include "mclosure/chainmap.hpp"
#include "mclosure/closure.hpp"
#include "mclosure/io.hpp"
#include "mclosure/specdens.hpp"
#include "mclosure/spectra.hpp"

#include "output.hpp"

namespace mclosure::cli {

namespace sd = mclosure::specdens;
using nlohmann::json;

const std::vector<std::string>& task_names() {
  static const std::vector<std::string> names{"chainmap", "fit-closure", "absorption", "twodes", "ttcf", "bench"};
  return names;
}

namespace {

using Job = std::function<json(Staging&, std::ostream&)>;

std::vector<std::string> split_terms(const std::string& expr) {
  std::vector<std::string> out;
  std::stringstream ss(expr);
  std::string item;
  while (std::getline(ss, item, '+')) {
    auto b = item.find_first_not_of(" \t"), e = item.find_last_not_of(" \t");
    out.push_back(b == std::string::npos ? "" : item.substr(b, e - b + 1));
  }
  return out;
}

void only_keys(const Config& cfg, const std::string& section, const std::set<std::string>& allowed,
               const std::string& kind) {
  for (const auto& k : cfg.keys(section))
    if (!allowed.count(k)) throw ConfigError(field_name(section, k), "not used by kind '" + kind + "'");
}

sd::SpectralDensity density_section(const Config& cfg, const std::string& name) {
  const std::string sec = "sd:" + name;
  if (!cfg.has_section(sec)) throw ConfigError("environment.spectral_density", "no section [" + sec + "]");
  const std::string kind = cfg.text(sec, "kind");
  if (kind == "adolphs_renger") {
    only_keys(cfg, sec, {"kind", "c", "omega_c"}, kind);
    sd::AdolphsRenger t{cfg.numbers(sec, "c", Unit::None), cfg.numbers(sec, "omega_c", Unit::Energy)};
    if (t.c.size() != t.omega_c.size()) throw ConfigError(sec + ".omega_c", "length differs from c");
    return t;
  }
  if (kind == "lorentzian") {
    only_keys(cfg, sec, {"kind", "S", "Omega", "Gamma"}, kind);
    auto S = cfg.numbers(sec, "S", Unit::None), W = cfg.numbers(sec, "Omega", Unit::Energy),
         G = cfg.numbers(sec, "Gamma", Unit::Energy);
    if (W.size() != S.size()) throw ConfigError(sec + ".Omega", "length differs from S");
    if (G.size() != S.size()) throw ConfigError(sec + ".Gamma", "length differs from S");
    sd::SpectralDensity J;
    for (std::size_t k = 0; k < S.size(); ++k) J += sd::Lorentzian{S[k], W[k], G[k]};
    return J;
  }
  if (kind == "semicircle") {
    only_keys(cfg, sec, {"kind", "omega_min", "omega_max", "prefactor"}, kind);
    sd::Semicircle t{cfg.number(sec, "omega_min", Unit::Energy), cfg.number(sec, "omega_max", Unit::Energy),
                     cfg.number(sec, "prefactor", Unit::None, 1.0)};
    if (!(t.omega_max > t.omega_min)) throw ConfigError(sec + ".omega_max", "must exceed omega_min");
    return t;
  }
  if (kind == "tabulated") {
    only_keys(cfg, sec, {"kind", "file"}, kind);
    return sd::load_tabulated(cfg.path(sec, "file").string());
  }
  throw ConfigError(sec + ".kind", "unknown spectral density kind '" + kind +
                                       "' (adolphs_renger, lorentzian, semicircle, tabulated)");
}

sd::SpectralDensity build_density(const Config& cfg) {
  const std::string expr = cfg.text("environment", "spectral_density");
  sd::SpectralDensity J;
  std::set<std::string> used;
  for (const auto& term : split_terms(expr)) {
    if (term.empty()) throw ConfigError("environment.spectral_density", "empty term in '" + expr + "'");
    if (term == "wscp") J += sd::wscp();
    else if (term == "wscp_adolphs_renger") J += sd::wscp_adolphs_renger();
    else if (term == "wscp_lorentzians") J += sd::wscp_lorentzians();
    else {
      J += density_section(cfg, term);
      used.insert("sd:" + term);
    }
  }
  for (const auto& s : cfg.sections_with_prefix("sd:"))
    if (!used.count(s)) throw ConfigError("[" + s + "]", "declared but not referenced by environment.spectral_density");
  if (cfg.has("environment", "support_max") && cfg.has("environment", "support_eps"))
    throw ConfigError("environment.support_eps", "give either support_max or support_eps");
  if (cfg.has("environment", "support_max")) J = J.truncated(cfg.number("environment", "support_max", Unit::Energy));
  if (cfg.has("environment", "support_eps"))
    J = J.truncated(sd::support_truncation(J, cfg.number("environment", "support_eps", Unit::None)));
  double s = cfg.number("environment", "scale", Unit::None, 1.0);
  if (!(s > 0)) throw ConfigError("environment.scale", "must be positive");
  if (s != 1.0) J = J.scaled(s);
  if (!std::isfinite(J.omega_max()))
    throw ConfigError("environment.support_max", "the density has unbounded support; set support_max or support_eps");
  return J;
}

Eigen::MatrixXcd to_matrix(const std::vector<std::vector<double>>& rows) {
  int n = int(rows.size());
  Eigen::MatrixXcd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = rows[i][j];
  return m;
}

void build_system(const Config& cfg, Plan& p) {
  const std::string kind = cfg.text("model", "kind");
  if (kind == "dimer") {
    only_keys(cfg, "model", {"kind", "E", "V", "dipole", "com_factor"}, kind);
    p.system = spectra::dimer(cfg.number("model", "E", Unit::Energy), cfg.number("model", "V", Unit::Energy));
    if (cfg.has("model", "dipole")) {
      auto d = cfg.numbers("model", "dipole", Unit::None);
      if (d.size() != 2) throw ConfigError("model.dipole", "expected two weights");
      p.system.mu_plus(1, 0) = d[0];
      p.system.mu_plus(2, 0) = d[1];
    }
    p.is_dimer = true;
    p.com_factor = cfg.flag("model", "com_factor", true);
  } else if (kind == "monomer") {
    only_keys(cfg, "model", {"kind", "E"}, kind);
    p.system = spectra::monomer(cfg.number("model", "E", Unit::Energy));
  } else if (kind == "matrix") {
    only_keys(cfg, "model", {"kind", "H", "mu_plus", "A", "reference"}, kind);
    p.system.H = to_matrix(cfg.matrix("model", "H", Unit::Energy));
    p.system.mu_plus = to_matrix(cfg.matrix("model", "mu_plus", Unit::None));
    p.system.A = to_matrix(cfg.matrix("model", "A", Unit::None));
    p.system.reference = cfg.number("model", "reference", Unit::Energy, 0.0);
    try {
      p.system.validate();
    } catch (const std::exception& e) {
      throw ConfigError("model", e.what());
    }
  } else {
    throw ConfigError("model.kind", "unknown model '" + kind + "' (dimer, monomer, matrix)");
  }
}

// ---- environment / closure / evolution ----

struct EnvSpec {
  int chain_length = 400;
  int M = 0;  // 0: fingerprint
  double eps = 1e-3;
  int nodes = 0;
};

EnvSpec env_spec(const Config& cfg) {
  EnvSpec e;
  e.chain_length = cfg.integer("environment", "chain_length", 400);
  e.M = cfg.integer("environment", "M", 0);
  e.eps = cfg.number("environment", "eps", Unit::None, 1e-3);
  e.nodes = cfg.integer("environment", "nodes", 0);
  if (e.chain_length < 1) throw ConfigError("environment.chain_length", "must be positive");
  if (e.M < 0) throw ConfigError("environment.M", "must be positive");
  if (e.M > e.chain_length) throw ConfigError("environment.M", "exceeds chain_length");
  if (!(e.eps > 0 && e.eps < 1)) throw ConfigError("environment.eps", "must lie in (0, 1)");
  return e;
}

struct ClosureSpec {
  std::string kind = "none";  // none | preset | file | fit
  int N = 6;
  std::filesystem::path file;
  double prony_dt = 0.25, prony_window = 200.0, polish_window = 100.0;
  int random_starts = 6;
};

ClosureSpec closure_spec(const Config& cfg) {
  ClosureSpec c;
  c.kind = cfg.text("closure", "kind", "none");
  if (c.kind == "none") {
    only_keys(cfg, "closure", {"kind"}, c.kind);
  } else if (c.kind == "preset") {
    only_keys(cfg, "closure", {"kind", "N"}, c.kind);
    c.N = cfg.integer("closure", "N", 6);
    auto sizes = closure::preset_sizes();
    if (std::find(sizes.begin(), sizes.end(), c.N) == sizes.end())
      throw ConfigError("closure.N", "presets exist for N = 6, 8, 10");
  } else if (c.kind == "file") {
    only_keys(cfg, "closure", {"kind", "file"}, c.kind);
    c.file = cfg.path("closure", "file");
    if (!std::filesystem::exists(c.file)) throw ConfigError("closure.file", "no such file " + c.file.string());
  } else if (c.kind == "fit") {
    only_keys(cfg, "closure", {"kind", "N", "prony_dt", "prony_window", "random_starts", "polish_window"}, c.kind);
    c.N = cfg.integer("closure", "N", 6);
    c.prony_dt = cfg.number("closure", "prony_dt", Unit::None, 0.25);
    c.prony_window = cfg.number("closure", "prony_window", Unit::None, 200.0);
    c.polish_window = cfg.number("closure", "polish_window", Unit::None, 100.0);
    c.random_starts = cfg.integer("closure", "random_starts", 6);
    if (c.N < 1) throw ConfigError("closure.N", "must be positive");
    if (!(c.prony_dt > 0) || !(c.prony_window > c.prony_dt)) throw ConfigError("closure.prony_window", "needs 0 < prony_dt < prony_window");
    if (c.random_starts < 0) throw ConfigError("closure.random_starts", "must be non-negative");
  } else {
    throw ConfigError("closure.kind", "unknown closure '" + c.kind + "' (none, preset, file, fit)");
  }
  return c;
}

struct FitOutcome {
  closure::FitResult fit;
  closure::PronyResult prony;
};

FitOutcome fit_closure(const ClosureSpec& c, std::uint64_t seed, int workers) {
  std::vector<closure::cplx> samples;
  int n = int(std::lround(c.prony_window / c.prony_dt));
  for (int k = 0; k <= n; ++k) samples.emplace_back(closure::semicircle_cf(k * c.prony_dt));
  FitOutcome out;
  out.prony = closure::prony_fit(samples, c.prony_dt, c.N);
  closure::FitOptions fo;
  fo.seed = seed;
  fo.workers = workers;
  fo.random_starts = c.random_starts;
  fo.polish_window = c.polish_window;
  fo.polish_reference = [](double t) { return closure::cplx(closure::semicircle_cf(t)); };
  out.fit = closure::tso_fit(out.prony.fit, c.N, fo);
  return out;
}

std::optional<closure::ClosureParams> make_closure(const ClosureSpec& c, const chainmap::ChainCoefficients& chain,
                                                   std::uint64_t seed, int workers, std::ostream& log) {
  closure::ClosureParams p;
  if (c.kind == "none") return std::nullopt;
  if (c.kind == "preset") p = closure::preset(c.N);
  if (c.kind == "file") p = io::read_closure_json(c.file);
  if (c.kind == "fit") {
    log << "fitting a closure with N = " << c.N << " (seed " << seed << ")\n";
    p = fit_closure(c, seed, workers).fit.params;
  }
  if (p.rescaled) return p;
  return closure::rescale(p, chainmap::asymptotic_coefficients(chain));
}

struct EvolutionSpec {
  spectra::Propagation prop;
  double T = 0.0, sample = 0.0;
  int chain_dim = 6, first_dim = 0, closure_dim = 0;
  std::size_t budget = std::size_t(1) << 30;
};

EvolutionSpec evolution_spec(const Config& cfg, std::uint64_t seed, int chain_dim, int first_dim) {
  EvolutionSpec e;
  e.prop.dt = cfg.number("evolution", "dt", Unit::Time);
  e.T = cfg.number("evolution", "T", Unit::Time);
  e.sample = cfg.number("evolution", "sample", Unit::Time, e.prop.dt);
  e.prop.chi = cfg.integer("evolution", "chi", 8);
  e.prop.krylov.dim = cfg.integer("evolution", "krylov_dim", e.prop.krylov.dim);
  e.prop.krylov.tol = cfg.number("evolution", "krylov_tol", Unit::None, e.prop.krylov.tol);
  e.prop.renormalize = cfg.flag("evolution", "renormalize", false);
  e.prop.seed = seed;
  e.chain_dim = cfg.integer("evolution", "chain_dim", chain_dim);
  e.first_dim = cfg.integer("evolution", "first_dim", first_dim);
  e.closure_dim = cfg.integer("evolution", "closure_dim", 0);
  if (cfg.has("evolution", "checkpoint_budget"))
    e.budget = std::size_t(cfg.number("evolution", "checkpoint_budget", Unit::Bytes));
  if (!(e.prop.dt > 0)) throw ConfigError("evolution.dt", "must be positive");
  if (!(e.T > 0)) throw ConfigError("evolution.T", "must be positive");
  double r = e.sample / e.prop.dt;
  if (!(r >= 1) || std::abs(r - std::round(r)) > 1e-9 * r)
    throw ConfigError("evolution.sample", "must be a positive multiple of dt");
  double k = e.T / e.sample;
  if (std::abs(k - std::round(k)) > 1e-9 * k) throw ConfigError("evolution.T", "must be a multiple of sample");
  if (e.prop.chi < 1) throw ConfigError("evolution.chi", "must be positive");
  if (e.chain_dim < 2) throw ConfigError("evolution.chain_dim", "must be at least 2");
  if (e.first_dim != 0 && e.first_dim < 2) throw ConfigError("evolution.first_dim", "must be at least 2");
  if (e.closure_dim != 0 && e.closure_dim < 2) throw ConfigError("evolution.closure_dim", "must be at least 2");
  if (e.prop.krylov.dim < 2) throw ConfigError("evolution.krylov_dim", "must be at least 2");
  return e;
}

chainmap::ChainCoefficients map_chain(const sd::SpectralDensity& J, const EnvSpec& e, std::ostream& log) {
  chainmap::DiscretizationOptions d;
  d.nodes = e.nodes;
  log << "mapping " << e.chain_length << " chain coefficients\n";
  return chainmap::chain_coefficients(J, e.chain_length, d);
}

int primary_length(const chainmap::ChainCoefficients& c, const EnvSpec& e, std::ostream& log) {
  if (e.M > 0) return e.M;
  int M = chainmap::fingerprint(c, e.eps);
  log << "fingerprint M(" << e.eps << ") = " << M << "\n";
  return M;
}

spectra::Environment environment(const Plan& p, const EnvSpec& es, const ClosureSpec& cs, const EvolutionSpec& ev,
                                 std::ostream& log, json& results) {
  auto chain = map_chain(p.J_env, es, log);
  spectra::Environment env;
  env.M = primary_length(chain, es, log);
  env.chain = chain.truncated(env.M);
  env.closure = make_closure(cs, chain, p.seed, p.workers, log);
  env.chain_dim = ev.chain_dim;
  env.first_dim = ev.first_dim;
  env.closure_dim = ev.closure_dim;
  results["M"] = env.M;
  results["closure_N"] = env.closure ? env.closure->N : 0;
  results["sites"] = 1 + env.M + (env.closure ? env.closure->N : 0);
  return env;
}

std::vector<double> grid(const Config& cfg, const std::string& sec, double lo, double hi, int points) {
  double a = cfg.number(sec, "omega_min", Unit::Energy, lo), b = cfg.number(sec, "omega_max", Unit::Energy, hi);
  int n = cfg.integer(sec, "points", points);
  if (!(b > a)) throw ConfigError(sec + ".omega_max", "must exceed omega_min");
  if (n < 2) throw ConfigError(sec + ".points", "must be at least 2");
  return spectra::linspace(a, b, n);
}

double excited_center(const spectra::ElectronicSystem& s) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(s.H.bottomRightCorner(s.dim() - 1, s.dim() - 1));
  return 0.5 * (es.eigenvalues().minCoeff() + es.eigenvalues().maxCoeff());
}

// ---- tasks ----

Job chainmap_job(const Config& cfg, const Plan& p) {
  EnvSpec es = env_spec(cfg);
  int D = cfg.integer("chainmap", "D", 0);
  if (D < 0 || D > es.chain_length) throw ConfigError("chainmap.D", "must lie in [1, chain_length]");
  double eta = cfg.number("chainmap", "eta", Unit::Energy, 0.0);
  int points = cfg.integer("chainmap", "points", 1001);
  if (points < 2) throw ConfigError("chainmap.points", "must be at least 2");
  return [=](Staging& st, std::ostream& log) {
    auto c = map_chain(p.J_env, es, log);
    io::write_chain_csv(c, st.file("chain.csv"));
    auto a = chainmap::asymptotic_coefficients(c);
    json r{{"kappa0", c.kappa0}, {"support", {c.support_min, c.support_max}}, {"Omega", a.Omega}, {"K", a.K},
           {"reorganization_energy", sd::reorganization_energy(p.J_env)}};
    try {
      r["fingerprint"] = chainmap::fingerprint(c, es.eps);
      r["fingerprint_eps"] = es.eps;
    } catch (const std::exception& e) {
      r["fingerprint"] = nullptr;
      r["fingerprint_error"] = e.what();
    }
    if (D > 0) {
      auto eff = chainmap::effective_spectral_density(c, D);
      double h = eta > 0 ? eta : (c.support_max - c.support_min) / D;
      std::ofstream o(st.file("effective_density.csv"), std::ios::binary);
      o << "omega,J,J_D\n";
      for (double w : spectra::linspace(c.support_min, c.support_max, points))
        o << io::format_double(w) << "," << io::format_double(p.J_env(w)) << ","
          << io::format_double(chainmap::broadened_density(eff, w, h)) << "\n";
      r["D"] = D;
      r["eta"] = h;
    }
    return r;
  };
}

Job fit_job(const Config& cfg, const Plan& p) {
  ClosureSpec cs = closure_spec(cfg);
  if (cs.kind != "fit") throw ConfigError("closure.kind", "fit-closure needs kind = fit");
  return [=](Staging& st, std::ostream& log) {
    log << "fitting a closure with N = " << cs.N << " (seed " << p.seed << ", " << p.workers << " workers)\n";
    auto f = fit_closure(cs, p.seed, p.workers);
    io::write_closure_json(f.fit.params, st.file("closure.json"));
    std::ofstream o(st.file("fit.csv"), std::ios::binary);
    o << "t,C_sc,aux_re,aux_im\n";
    for (int k = 0; k <= 2000; ++k) {
      double t = 0.1 * k;
      auto z = closure::closure_cf(f.fit.params, t);
      o << io::format_double(t) << "," << io::format_double(closure::semicircle_cf(t)) << ","
        << io::format_double(z.real()) << "," << io::format_double(z.imag()) << "\n";
    }
    return json{{"N", cs.N}, {"cost", f.fit.cost}, {"max_residual", f.fit.max_residual},
                {"prony_residual", f.prony.max_residual}, {"seed", p.seed}};
  };
}

Job absorption_job(const Config& cfg, const Plan& p) {
  EnvSpec es = env_spec(cfg);
  ClosureSpec cs = closure_spec(cfg);
  EvolutionSpec ev = evolution_spec(cfg, p.seed, 6, 0);
  double c0 = excited_center(p.system);
  auto w = grid(cfg, "absorption", c0 - 500, c0 + 1000, 1501);
  spectra::TransformOptions to;
  to.taper = cfg.number("absorption", "taper", Unit::None, 0.1);
  bool normalize = cfg.flag("absorption", "normalize", true);
  if (!(to.taper >= 0 && to.taper <= 1)) throw ConfigError("absorption.taper", "must lie in [0, 1]");
  return [=](Staging& st, std::ostream& log) {
    json r;
    auto env = environment(p, es, cs, ev, log, r);
    int n = int(std::lround(ev.T / ev.sample));
    log << "linear response: " << n << " samples\n";
    auto R = spectra::linear_response(p.system, env, ev.prop, ev.sample, n);
    if (p.com_factor) {
      spectra::Lineshape half(p.J.scaled(0.5), ev.T);
      for (std::size_t k = 0; k < R.t.size(); ++k) R.R[k] *= spectra::com_factor(half, R.t[k]);
    }
    io::write_response_csv(R, st.file("response.csv"));
    auto A = spectra::absorption_spectrum(R, w, to);
    if (normalize) spectra::normalize_max(A);
    io::write_spectrum_csv(A, st.file("absorption.csv"));
    r["peak"] = w[std::max_element(A.A.begin(), A.A.end()) - A.A.begin()];
    return r;
  };
}

Job twodes_job(const Config& cfg, const Plan& p) {
  EnvSpec es = env_spec(cfg);
  ClosureSpec cs = closure_spec(cfg);
  EvolutionSpec ev = evolution_spec(cfg, p.seed, 4, 6);
  double T2 = cfg.number("twodes", "T2", Unit::Time, 0.0);
  if (T2 < 0) throw ConfigError("twodes.T2", "must be non-negative");
  double c0 = excited_center(p.system);
  auto w = grid(cfg, "twodes", c0 - 500, c0 + 1000, 301);
  double taper = cfg.number("twodes", "taper", Unit::None, 0.1);
  bool raw = cfg.flag("twodes", "write_response", true);
  double r2 = T2 / ev.prop.dt;
  if (std::abs(r2 - std::round(r2)) > 1e-9 * std::max(1.0, r2)) throw ConfigError("twodes.T2", "must be a multiple of dt");
  return [=](Staging& st, std::ostream& log) {
    json r;
    auto env = environment(p, es, cs, ev, log, r);
    int n = int(std::lround(ev.T / ev.sample));
    spectra::ThirdOrderOptions o;
    o.workers = p.workers;
    o.checkpoint_budget = ev.budget;
    if (const char* s = std::getenv("MCLOSURE_SCRATCH")) o.scratch = s;
    log << "third-order response: " << n + 1 << " x " << n + 1 << " grid, " << p.workers << " workers\n";
    auto R = spectra::third_order_se(p.system, env, ev.prop, ev.sample, n, T2, o);
    if (p.com_factor) {
      spectra::Lineshape half(p.J.scaled(0.5), 2 * ev.T + T2);
      for (int i = 0; i < R.R.rows(); ++i)
        for (int j = 0; j < R.R.cols(); ++j) R.R(i, j) *= spectra::com_factor_se(half, R.t1[i], T2, R.t3[j]);
    }
    if (raw) io::write_response2d_csv(R, st.file("response2d.csv"));
    auto S = spectra::rephasing_2d(R, w, w, taper);
    io::write_spectrum2d(S, st.file("spectrum2d.csv"), st.file("spectrum2d_axes.json"));
    Eigen::Index i = 0, j = 0;
    S.S.real().maxCoeff(&i, &j);
    r["peak"] = {w[i], w[j]};
    r["T2"] = T2;
    return r;
  };
}

Job ttcf_job(const Config& cfg, const Plan& p) {
  EnvSpec es = env_spec(cfg);
  ClosureSpec cs = closure_spec(cfg);
  double T = cfg.number("ttcf", "T", Unit::Time, 200.0), step = cfg.number("ttcf", "step", Unit::Time, 1.0);
  int D = cfg.integer("ttcf", "D", es.chain_length);
  if (!(T > 0) || !(step > 0)) throw ConfigError("ttcf.step", "T and step must be positive");
  if (D < 1 || D > es.chain_length) throw ConfigError("ttcf.D", "must lie in [1, chain_length]");
  return [=](Staging& st, std::ostream& log) {
    auto c = map_chain(p.J_env, es, log);
    int M = primary_length(c, es, log);
    auto exact = chainmap::effective_spectral_density(c, D);
    auto hyb = chainmap::effective_spectral_density(chainmap::hybrid_coefficients(c, M, D), D);
    auto band = chainmap::asymptotic_coefficients(c);
    auto clo = make_closure(cs, c, p.seed, p.workers, log);
    std::ofstream o(st.file("ttcf.csv"), std::ios::binary);
    o << "t,bath_re,bath_im,chain_re,chain_im,hybrid_re,hybrid_im";
    if (clo) o << ",residual_re,residual_im,closure_re,closure_im";
    o << "\n";
    int n = int(std::lround(T / step));
    auto put = [&](closure::cplx z) { o << "," << io::format_double(z.real()) << "," << io::format_double(z.imag()); };
    for (int k = 0; k <= n; ++k) {
      double t = k * step;
      o << io::format_double(t);
      put(chainmap::bath_ttcf(p.J_env, t));
      put(chainmap::chain_ttcf(exact, t));
      put(chainmap::chain_ttcf(hyb, t));
      if (clo) {
        put(closure::asymptotic_cf(band.Omega, band.K, t));
        put(closure::closure_cf(*clo, t));
      }
      o << "\n";
    }
    return json{{"M", M}, {"D", D}, {"Omega", band.Omega}, {"K", band.K}};
  };
}

Job bench_job(const Config& cfg, const Plan& p) {
  bench::ScalingOptions o;
  o.system = p.system;
  o.J = p.J_env;
  if (cfg.has("bench", "t_max")) o.t_max_fs = cfg.numbers("bench", "t_max", Unit::Time);
  o.prop.dt = cfg.number("evolution", "dt", Unit::Time, o.prop.dt);
  o.prop.chi = cfg.integer("evolution", "chi", o.prop.chi);
  o.prop.seed = p.seed;
  o.chain_dim = cfg.integer("evolution", "chain_dim", o.chain_dim);
  o.closure_M = cfg.integer("bench", "closure_M", o.closure_M);
  o.closure_N = cfg.integer("bench", "closure_N", cfg.integer("closure", "N", o.closure_N));
  o.initial_sites = cfg.integer("bench", "initial_sites", o.initial_sites);
  o.watch_sites = cfg.integer("bench", "watch_sites", o.watch_sites);
  o.occupation_limit = cfg.number("bench", "occupation_limit", Unit::None, o.occupation_limit);
  o.growth = cfg.number("bench", "growth", Unit::None, o.growth);
  o.check_every = cfg.integer("bench", "check_every", o.check_every);
  o.agreement_tol = cfg.number("bench", "agreement_tol", Unit::None, o.agreement_tol);
  if (o.t_max_fs.size() < 2) throw ConfigError("bench.t_max", "at least two simulation times are needed for a slope");
  if (!(o.growth > 1)) throw ConfigError("bench.growth", "must exceed 1");
  auto sizes = closure::preset_sizes();
  if (std::find(sizes.begin(), sizes.end(), o.closure_N) == sizes.end())
    throw ConfigError("bench.closure_N", "presets exist for N = 6, 8, 10");
  return [=](Staging& st, std::ostream& log) {
    log << "scaling benchmark over " << o.t_max_fs.size() << " simulation times\n";
    auto rep = bench::run_scaling(o);
    std::ofstream c(st.file("bench.csv"), std::ios::binary);
    c << "t_max,plain_sites,plain_attempts,plain_seconds,plain_bytes,closure_sites,closure_seconds,closure_bytes,"
         "max_deviation\n";
    for (const auto& r : rep.rows) {
      c << io::format_double(r.t_max_fs) << "," << r.plain.sites << "," << r.plain.attempts << ","
        << io::format_double(r.plain.seconds) << "," << r.plain.engine_bytes << "," << r.closure.sites << ","
        << io::format_double(r.closure.seconds) << "," << r.closure.engine_bytes << ","
        << io::format_double(r.max_deviation) << "\n";
    }
    return json{{"plain_time_slope", rep.plain_time_slope},
                {"closure_time_slope", rep.closure_time_slope},
                {"plain_memory_slope", rep.plain_memory_slope},
                {"closure_memory_variation", rep.closure_memory_variation}};
  };
}

}  // namespace

Plan make_plan(const Config& cfg, const Invocation& inv) {
  Plan p;
  const auto& names = task_names();
  std::string declared = cfg.text("", "task", "");
  if (!declared.empty() && std::find(names.begin(), names.end(), declared) == names.end())
    throw ConfigError("task", "unknown task '" + declared + "'");
  if (inv.task == "run") {
    if (declared.empty()) throw ConfigError("task", "required key is missing");
    p.task = declared;
  } else {
    if (!declared.empty() && declared != inv.task)
      throw ConfigError("task", "config declares '" + declared + "' but '" + inv.task + "' was invoked");
    p.task = inv.task;
  }
  p.out = !inv.out.empty() ? inv.out : cfg.has("", "output") ? cfg.path("", "output") : std::filesystem::path();
  if (p.out.empty()) throw ConfigError("output", "no output directory (use --out or output = ...)");
  if (cfg.has("", "seed") && cfg.integer("", "seed") < 0) throw ConfigError("seed", "must be non-negative");
  p.seed = inv.seed ? *inv.seed : std::uint64_t(cfg.integer("", "seed", 1));
  if (inv.workers < 1) throw ConfigError("--workers", "must be positive");
  p.workers = inv.workers;
  if (p.task != "fit-closure") {
    build_system(cfg, p);
    p.J = build_density(cfg);
    p.J_env = p.is_dimer ? p.J.scaled(0.5) : p.J;
  } else {
    for (const char* s : {"model", "environment", "evolution"})
      if (cfg.has_section(s)) throw ConfigError(std::string("[") + s + "]", "not used by fit-closure");
  }
  return p;
}

void execute(const Invocation& inv, std::ostream& log) {
  const auto t0 = std::chrono::steady_clock::now();
  Config cfg = Config::load(inv.config);
  Plan p = make_plan(cfg, inv);
  Job job;
  if (p.task == "chainmap") job = chainmap_job(cfg, p);
  else if (p.task == "fit-closure") job = fit_job(cfg, p);
  else if (p.task == "absorption") job = absorption_job(cfg, p);
  else if (p.task == "twodes") job = twodes_job(cfg, p);
  else if (p.task == "ttcf") job = ttcf_job(cfg, p);
  else job = bench_job(cfg, p);

  Staging st(p.out);
  {
    std::ofstream o(st.file("config.ini"), std::ios::binary);
    o << cfg.source();
  }
  json results = job(st, log);
  double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json m;
  m["task"] = p.task;
  m["versions"] = {{"mclosure", MCLOSURE_VERSION},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)},
                   {"boost", BOOST_LIB_VERSION},
                   {"compiler", __VERSION__}};
  m["config"] = {{"file", std::filesystem::absolute(inv.config).string()}, {"crc32", hex32(crc32_of(cfg.source()))}};
  m["seed"] = p.seed;
  m["workers"] = p.workers;
  m["wall_seconds"] = wall;
  m["peak_rss_kb"] = bench::peak_rss_kb();
  m["results"] = results;
  st.commit(m);
  log << p.task << ": wrote " << st.files().size() << " files and manifest.json to " << p.out.string() << "\n";
}

}  // namespace mclosure::cli
