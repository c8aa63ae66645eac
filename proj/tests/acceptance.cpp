// acceptance.cpp - one PASS/FAIL line per acceptance criterion
//
// Tolerances are fixed here. Usage: acceptance [--only 1,5,9] [--slow-only]
#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mclosure/bench.hpp"
#include "mclosure/chainmap.hpp"
#include "mclosure/closure.hpp"
#include "mclosure/specdens.hpp"
#include "mclosure/spectra.hpp"
#include "mclosure/tn/tdvp.hpp"
#include "mclosure/units.hpp"

using namespace mclosure;
using cplx = std::complex<double>;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

// ---------------------------------------------------------------- 1
Outcome reorganization() {
  auto t0 = Clock::now();
  double ar = specdens::reorganization_energy(specdens::wscp_adolphs_renger());
  double al = specdens::reorganization_energy(specdens::wscp_lorentzians());
  double s = since(t0);
  double e1 = std::abs(ar / 62.63 - 1), e2 = std::abs(al / 12.94 - 1);
  return {e1 < 1e-3 && e2 < 1e-3 && s < 1.0,
          fmt("lambda_AR = %.4f (rel %.1e), lambda_AL = %.4f (rel %.1e), tol 1e-3, %.3f s (< 1 s)", ar, e1, al, e2, s)};
}

// ---------------------------------------------------------------- 2
Outcome asymptotics() {
  auto t0 = Clock::now();
  auto J = specdens::wscp().truncated(1000.0);
  chainmap::ChainCoefficients c = chainmap::chain_coefficients(J, 400);
  double s = since(t0);
  chainmap::Asymptotics a = chainmap::asymptotic_coefficients(c);
  int M = chainmap::fingerprint(c, 1e-3);
  bool ok = a.Omega == 500.0 && a.K == 250.0 && M >= 60 && M <= 120 && s < 60.0;
  return {ok, fmt("(Omega, K) = (%.17g, %.17g), M(1e-3) = %d in [60, 120], 400 coefficients in %.2f s (< 60 s)",
                  a.Omega, a.K, M, s)};
}

// ---------------------------------------------------------------- 3
Outcome semicircle_chain() {
  chainmap::ChainCoefficients c = chainmap::chain_coefficients(specdens::Semicircle{-1.0, 1.0, 2.0}, 101);
  double ew = 0, ek = 0;
  for (int n = 0; n <= 100; ++n) {
    ew = std::max(ew, std::abs(c.omega[n]));
    ek = std::max(ek, std::abs(c.kappa[n] - 0.5));
  }
  return {ew < 1e-8 && ek < 1e-8, fmt("max |omega_n| = %.2e, max |kappa_n - 1/2| = %.2e for n <= 100 (tol 1e-8)", ew, ek)};
}

// ---------------------------------------------------------------- 4
Outcome bessel_identity() {
  double m = 0;
  for (int k = 0; k <= 10000; ++k) {
    double t = 0.01 * k;
    double rhs = std::cyl_bessel_j(0.0, t) + std::cyl_bessel_j(2.0, t);
    m = std::max(m, std::abs(closure::semicircle_cf(t) - rhs));
  }
  return {m < 1e-12, fmt("max |2 J1(t)/t - (J0 + J2)| on [0, 100] step 0.01 = %.2e (tol 1e-12)", m)};
}

// ---------------------------------------------------------------- 5
// frozen from the table data (see the closure unit tests)
const std::map<int, double> kPresetResidual{{6, 7e-3}, {8, 5e-3}, {10, 7e-3}};

Outcome presets() {
  std::ostringstream os;
  bool ok = true;
  double prev = 1e300;
  bool monotone = true;
  for (int N : closure::preset_sizes()) {
    closure::ClosureParams p = closure::preset(N);
    double w = 0;
    for (cplx c : p.c) w += std::norm(c);
    double m = 0;
    for (int k = 0; k <= 20000; ++k) {
      double t = 0.005 * k;
      m = std::max(m, std::abs(closure::closure_cf(p, t) - closure::semicircle_cf(t)));
    }
    bool here = std::abs(w - 1) < 2e-2 && std::isfinite(m) && m < kPresetResidual.at(N);
    ok = ok && here;
    if (m > prev) monotone = false;
    prev = m;
    os << fmt("N=%d: sum|c|^2 = %.5f, max residual = %.3e (frozen < %.0e); ", N, w, m, kPresetResidual.at(N));
  }
  os << (monotone ? "residual non-increasing in N" : "residual NOT non-increasing in N (N=10 above N=8)");
  return {ok && monotone, os.str()};
}

// ---------------------------------------------------------------- 6
Outcome lindblad_equivalence() {
  auto t0 = Clock::now();
  closure::ClosureParams p = closure::preset(6);
  double m = 0;
  for (int k = 0; k <= 200; ++k) {
    double t = 0.1 * k;
    cplx a = closure::closure_cf(p, t), b = closure::lindblad_cf(p, t);
    m = std::max(m, std::abs(a - b) / std::abs(a));
  }
  double s = since(t0);
  return {m < 1e-8 && s < 10.0, fmt("max relative |C_expm - C_lindblad| on [0, 20] = %.2e (tol 1e-8), %.2f s (< 10 s)", m, s)};
}

// ---------------------------------------------------------------- 7
// Dense oracle: full Lindblad equation for the coherence block rho_eg on the
// Fock space of the 8 oscillators truncated at total occupation 3 (each mode
// <= 2, as in the MPS). The Lindbladian maps this block onto itself because
// H and the jump operators commute with the qubit populations; the jump terms
// d rho d^dag are kept.
Outcome no_jump() {
  auto t0 = Clock::now();
  const double eps = 100.0, k0 = 60.0, T = 120.0;
  const int chi = 27;
  closure::ClosureParams cl = closure::rescale(closure::preset(6), {500.0, 250.0});

  tn::ChainModel m;
  m.H_S = Eigen::MatrixXcd::Zero(2, 2);
  m.H_S(1, 1) = eps;
  m.A_S = Eigen::MatrixXcd::Zero(2, 2);
  m.A_S(1, 1) = 1.0;
  m.chain.kappa0 = k0;
  m.chain.omega = {500.0, 500.0};
  m.chain.kappa = {250.0, 250.0};
  m.chain.support_min = 0;
  m.chain.support_max = 1000;
  m.M = 2;
  m.chain_dims = {3};
  m.closure = cl;
  m.closure_dims = {3};
  tn::Mpo W = tn::build_mpo(m);
  std::vector<Eigen::VectorXcd> loc{Eigen::Vector2cd(std::sqrt(0.5), std::sqrt(0.5))};
  for (int i = 0; i < 8; ++i) loc.push_back(Eigen::VectorXcd::Unit(3, 0));
  tn::MPS psi = tn::MPS::product(loc, chi);
  tn::Tdvp td(W, {1.0});
  Eigen::MatrixXcd sm = Eigen::MatrixXcd::Zero(2, 2);
  sm(0, 1) = 1.0;  // |g><e|
  std::vector<cplx> coh{0.5};
  std::vector<double> lost{0.0};  // 1 - |psi|^2 = integrated closure occupation (jump probability)
  td.evolve(psi, int(T), [&](const tn::MPS& s, int) {
    double n = tn::norm(s);
    coh.push_back(tn::expectation(s, sm, 0) * n * n);
    lost.push_back(1.0 - n * n);
  });

  using Sp = Eigen::SparseMatrix<cplx>;
  using Mat = Eigen::MatrixXcd;
  const int modes = 8, nmax = 3;
  std::vector<std::array<int, 8>> basis;
  std::map<std::array<int, 8>, int> index;
  std::array<int, 8> occ{};
  std::function<void(int, int)> fill = [&](int i, int left) {
    if (i == modes) {
      index[occ] = int(basis.size());
      basis.push_back(occ);
      return;
    }
    for (int k = 0; k <= std::min(2, left); ++k) {
      occ[i] = k;
      fill(i + 1, left - k);
    }
    occ[i] = 0;
  };
  fill(0, nmax);
  const int D = int(basis.size());
  std::vector<Sp> a(modes, Sp(D, D)), ad(modes);
  for (int i = 0; i < modes; ++i) {
    std::vector<Eigen::Triplet<cplx>> tr;
    for (int j = 0; j < D; ++j) {
      auto b = basis[j];
      if (b[i] == 0) continue;
      double s = std::sqrt(double(b[i]));
      --b[i];
      tr.emplace_back(index.at(b), j, s);
    }
    a[i].setFromTriplets(tr.begin(), tr.end());
    ad[i] = a[i].adjoint();
  }
  Sp I(D, D);
  I.setIdentity();
  Sp HB = 500.0 * (ad[0] * a[0]) + 500.0 * (ad[1] * a[1]) + 250.0 * (ad[0] * a[1] + ad[1] * a[0]);
  Sp drain(D, D);
  for (int k = 0; k < 6; ++k) {
    int d = 2 + k;
    HB += std::conj(cl.c[k]) * Sp(a[1] * ad[d]) + cl.c[k] * Sp(ad[1] * a[d]) + cl.Omega[k] * Sp(ad[d] * a[d]);
    if (k < 5) HB += cl.g[k] * Sp(a[d] * ad[d + 1] + a[d + 1] * ad[d]);
    drain += std::abs(cl.Gamma[k]) * Sp(ad[d] * a[d]);
  }
  Sp He = HB + eps * I + k0 * (a[0] + ad[0]);
  Sp Ge = He - cplx(0, 0.5) * drain;
  Sp GgT = Sp(HB - cplx(0, 0.5) * drain).adjoint();
  const double w = units::to_rad_per_fs(1.0);
  auto L = [&](const Mat& r) {
    Mat o = cplx(0, -w) * (Ge * r) + cplx(0, w) * (r * GgT);
    for (int k = 0; k < 6; ++k) o += (w * std::abs(cl.Gamma[k])) * Mat((a[2 + k] * r) * ad[2 + k]);
    return o;
  };
  Mat r = Mat::Zero(D, D);
  r(0, 0) = 0.5;  // |e, vac><g, vac| / 2
  std::vector<cplx> ref{r.trace()};
  for (int s = 1; s <= int(T); ++s) {  // Taylor series of exp(L) per 1 fs
    Mat term = r, acc = r;
    for (int k = 1; k < 80; ++k) {
      term = L(term) / double(k);
      acc += term;
      if (term.norm() < 1e-18 * acc.norm()) break;
    }
    r = acc;
    ref.push_back(r.trace());
  }
  double in_win = 0, beyond = 0, t_window = T;
  bool window_closed = false;
  for (std::size_t k = 0; k < ref.size(); ++k) {
    double e = std::abs(ref[k] - coh[k]);
    if (!window_closed && lost[k] > 1e-3) {
      window_closed = true;
      t_window = double(k) - 1;
    }
    (window_closed ? beyond : in_win) = std::max(window_closed ? beyond : in_win, e);
  }
  double s = since(t0);
  return {in_win < 1e-6 && s < 300.0,
          fmt("max |rho_eg(MPS) - rho_eg(Lindblad)| = %.2e on [0, %.0f] fs (tol 1e-6; window ends when integrated "
              "closure occupation > 1e-3%s), %.2e afterwards; chi %d, dense dim %d, %.1f s (< 300 s)",
              in_win, t_window, window_closed ? "" : ", never reached", beyond, chi, D, s)};
}

// ---------------------------------------------------------------- 8
Outcome truncation_vs_closure() {
  auto t0 = Clock::now();
  const double T = 800.0;
  specdens::SpectralDensity J = specdens::Semicircle{0.0, 1000.0, 0.16};
  spectra::Propagation p{1.0, 8};
  auto run = [&](int M, bool with_closure) {
    spectra::Environment env;
    env.chain = chainmap::chain_coefficients(J, M);
    env.M = M;
    env.chain_dim = 4;
    if (with_closure)
      env.closure = closure::rescale(closure::preset(6), chainmap::asymptotic_coefficients(env.chain));
    return spectra::linear_response(spectra::monomer(1000.0), env, p, 1.0, int(T));
  };
  spectra::Response ref = run(60, false), plain = run(14, false), clos = run(8, true);
  // reflection window: from the first time the short chain departs from the reference by > 1e-3
  std::size_t k0 = ref.R.size();
  for (std::size_t k = 0; k < ref.R.size(); ++k)
    if (std::abs(plain.R[k].real() - ref.R[k].real()) > 1e-3) {
      k0 = k;
      break;
    }
  double ep = 0, ec = 0;
  for (std::size_t k = k0; k < ref.R.size(); ++k) {
    ep = std::max(ep, std::abs(plain.R[k].real() - ref.R[k].real()));
    ec = std::max(ec, std::abs(clos.R[k].real() - ref.R[k].real()));
  }
  double s = since(t0);
  bool ok = k0 < ref.R.size() && ec < ep;
  return {ok, fmt("reflection window [%.0f, %.0f] fs: max |Re R - Re R_ref| closure (M=8+N=6) = %.2e < plain "
                  "(14 sites) = %.2e; reference 60 sites; %.0f s",
                  k0 < ref.t.size() ? ref.t[k0] : T, T, ec, ep, s)};
}

// ---------------------------------------------------------------- 9
Outcome bath_free() {
  const double E = 15198.0, V = 69.0, Eb = E + V;
  spectra::ElectronicSystem sys = spectra::dimer(E, V);
  spectra::Environment env;
  env.chain.kappa0 = 0.0;
  env.chain.omega.assign(2, 300.0);
  env.chain.kappa.assign(2, 100.0);
  env.chain.support_max = 1000;
  env.M = 2;
  env.chain_dim = 3;
  spectra::Propagation p{1.0, 2};
  spectra::Response r = spectra::linear_response(sys, env, p, 1.0, 2000);
  double e1 = 0;
  for (std::size_t k = 0; k < r.t.size(); ++k)
    e1 = std::max(e1, std::abs(r.R[k] - 2.0 * units::propagator_phase(Eb, r.t[k])));
  spectra::Response2D r2 = spectra::third_order_se(sys, env, p, 2.0, 200, 50.0);
  double e2 = 0;
  for (int a = 0; a <= 200; ++a)
    for (int b = 0; b <= 200; ++b)
      e2 = std::max(e2, std::abs(r2.R(a, b) - 4.0 * std::polar(1.0, units::phase(Eb, r2.t1[a] - r2.t3[b]))));

  std::vector<double> w = spectra::linspace(15100.0, 15400.0, 301);  // 1 cm^-1 grid
  spectra::Spectrum A = spectra::absorption_spectrum(r, w);
  double wpk = w[std::max_element(A.A.begin(), A.A.end()) - A.A.begin()];
  std::vector<double> w2 = spectra::linspace(15167.0, 15367.0, 101);  // 2 cm^-1 grid
  spectra::Spectrum2D S = spectra::rephasing_2d(r2, w2, w2);
  Eigen::Index i, j;
  S.S.cwiseAbs().maxCoeff(&i, &j);
  bool ok = e1 < 1e-8 && e2 < 1e-8 && std::abs(wpk - Eb) <= 0.5 && std::abs(w2[i] - Eb) <= 1.0 &&
            std::abs(w2[j] - Eb) <= 1.0;
  return {ok, fmt("max |R_abs - 2 e^{-i(E+V)t}| = %.2e, max |R_SE - 4 e^{iE_b(t1-t3)}| = %.2e (tol 1e-8); "
                  "absorption peak %.1f, 2D peak (%.1f, %.1f), E_b = %.1f",
                  e1, e2, wpk, w2[i], w2[j], Eb)};
}

// ---------------------------------------------------------------- 10
Outcome ce_rate() {
  spectra::DimerCumulant c = spectra::dimer_cumulant(15198.0, 69.0, specdens::wscp());
  double rel = std::abs(c.gamma_bright / 91.0 - 1);
  return {rel < 0.02, fmt("gamma_rxn,b = %.2f cm^-1 vs 91 (rel %.3f, tol 0.02)", c.gamma_bright, rel)};
}

// ---------------------------------------------------------------- 11
Outcome scaling() {
  auto t0 = Clock::now();
  bench::ScalingOptions o;
  o.J = specdens::Semicircle{250.0, 750.0, 0.16};
  o.prop.dt = 2.0;
  bench::Report rep = bench::run_scaling(o);
  double s = since(t0);
  std::ostringstream os;
  for (const auto& r : rep.rows)
    os << fmt("t=%.0f: plain %d sites %.1f s %zu B, closure %.1f s %zu B; ", r.t_max_fs, r.plain.sites,
              r.plain.seconds, r.plain.engine_bytes, r.closure.seconds, r.closure.engine_bytes);
  bool ok = rep.closure_memory_variation < 0.10 && rep.closure_time_slope <= 1.2 && rep.plain_time_slope >= 1.7 &&
            s < 3600;
  os << fmt("closure memory variation %.3f (< 0.10), time slopes closure %.2f (<= 1.2) plain %.2f (>= 1.7), "
            "total %.0f s",
            rep.closure_memory_variation, rep.closure_time_slope, rep.plain_time_slope, s);
  return {ok, os.str()};
}

// ---------------------------------------------------------------- 12 (slow)
Outcome wscp_sidebands() {
  auto t0 = Clock::now();
  const double E = 15198.0, V = 69.0, Ed = E - V;
  specdens::SpectralDensity J = specdens::wscp().truncated(1000.0);
  spectra::Environment env;
  env.M = 80;
  env.chain = chainmap::chain_coefficients(J.scaled(0.5), env.M);
  env.closure = closure::rescale(closure::preset(6), chainmap::asymptotic_coefficients(env.chain));
  env.chain_dim = 4;
  env.first_dim = 6;
  spectra::Propagation p{0.5, 6};
  const double T = 2000.0;
  spectra::Response rel = spectra::linear_response(spectra::dimer(E, V), env, p, 1.0, int(T));
  spectra::Lineshape half(J.scaled(0.5), T);
  for (std::size_t k = 0; k < rel.t.size(); ++k) rel.R[k] *= spectra::com_factor(half, rel.t[k]);
  std::vector<double> w = spectra::linspace(15000.0, 15500.0, 1001);
  spectra::Spectrum A = spectra::absorption_spectrum(rel, w);
  spectra::normalize_max(A);
  double main = w[std::max_element(A.A.begin(), A.A.end()) - A.A.begin()];
  std::vector<double> peaks;
  for (std::size_t i = 1; i + 1 < w.size(); ++i)
    if (A.A[i] > A.A[i - 1] && A.A[i] >= A.A[i + 1] && A.A[i] > 1e-3 && w[i] > main + 20) peaks.push_back(w[i]);
  std::ostringstream os;
  os << fmt("main peak %.1f; ", main);
  bool ok = true;
  for (double Om : {181.0, 221.0, 240.0}) {
    double target = Ed + Om, best = 1e300;
    for (double x : peaks)
      if (std::abs(x - target) < std::abs(best - target)) best = x;
    double off = best - target;
    ok = ok && std::abs(off) <= 10.0;
    os << fmt("E_d+%.0f = %.0f: nearest peak %.1f (off %+.1f, tol 10); ", Om, target, best, off);
  }
  os << fmt("chi %d, T %.0f fs, %.0f s", p.chi, T, since(t0));
  return {ok, os.str()};
}

struct Criterion {
  int id;
  const char* name;
  Outcome (*run)();
  bool slow;
};

const std::vector<Criterion> kCriteria{
    {1, "reorganization energies", reorganization, false},
    {2, "asymptotics and fingerprint", asymptotics, false},
    {3, "semicircle chain oracle", semicircle_chain, false},
    {4, "Bessel identity", bessel_identity, false},
    {5, "closure presets", presets, false},
    {6, "Lindblad oracle equivalence", lindblad_equivalence, false},
    {7, "no-jump equivalence", no_jump, false},
    {8, "truncation vs closure", truncation_vs_closure, false},
    {9, "bath-free closed forms", bath_free, false},
    {10, "cumulant relaxation rate", ce_rate, false},
    {11, "scaling", scaling, false},
    {12, "WSCP sidebands (slow)", wscp_sidebands, true},
};

}  // namespace

int main(int argc, char** argv) {
  bool slow_only = false;
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a == "--slow-only") {
      slow_only = true;
    } else if (a == "--only" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      for (std::string t; std::getline(ss, t, ',');) only.insert(std::stoi(t));
    } else {
      std::fprintf(stderr, "usage: acceptance [--only 1,2,...] [--slow-only]\n");
      return 2;
    }
  }
  int failed = 0;
  for (const Criterion& c : kCriteria) {
    if (!only.empty() ? !only.count(c.id) : c.slow != slow_only) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    std::printf("%s [%d] %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed ? 1 : 0;
}
