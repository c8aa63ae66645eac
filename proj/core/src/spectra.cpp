#include "mclosure/spectra.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>

#include <unistd.h>

#include "mclosure/tn/checkpoint.hpp"
#include "mclosure/tn/tdvp.hpp"
#include "mclosure/units.hpp"

namespace mclosure::spectra {

void ElectronicSystem::validate() const {
  const int d = dim();
  if (d < 2 || H.cols() != d || mu_plus.rows() != d || mu_plus.cols() != d || A.rows() != d || A.cols() != d)
    throw std::invalid_argument("ElectronicSystem: inconsistent operator dimensions");
  for (int j = 1; j < d; ++j)
    if (std::abs(H(0, j)) + std::abs(H(j, 0)) + std::abs(A(0, j)) + std::abs(A(j, 0)) > 0)
      throw std::invalid_argument("ElectronicSystem: H and A must not couple ground and excited states");
  if (std::abs(H(0, 0)) > 0 || std::abs(A(0, 0)) > 0)
    throw std::invalid_argument("ElectronicSystem: the ground state must be uncoupled with zero energy");
}

ElectronicSystem dimer(double E, double V) {
  ElectronicSystem s;
  s.H = Eigen::MatrixXcd::Zero(3, 3);
  s.H(1, 1) = s.H(2, 2) = E;
  s.H(1, 2) = s.H(2, 1) = V;
  s.mu_plus = Eigen::MatrixXcd::Zero(3, 3);
  s.mu_plus(1, 0) = s.mu_plus(2, 0) = 1.0;
  s.A = Eigen::MatrixXcd::Zero(3, 3);
  s.A(1, 1) = 1.0;
  s.A(2, 2) = -1.0;
  s.reference = E;
  return s;
}

ElectronicSystem monomer(double E) {
  ElectronicSystem s;
  s.H = Eigen::MatrixXcd::Zero(2, 2);
  s.H(1, 1) = E;
  s.mu_plus = Eigen::MatrixXcd::Zero(2, 2);
  s.mu_plus(1, 0) = 1.0;
  s.A = Eigen::MatrixXcd::Zero(2, 2);
  s.A(1, 1) = 1.0;
  s.reference = E;
  return s;
}

tn::ChainModel chain_model(const ElectronicSystem& s, const Environment& env) {
  s.validate();
  tn::ChainModel m;
  m.H_S = s.H;
  for (int j = 1; j < s.dim(); ++j) m.H_S(j, j) -= s.reference;
  m.A_S = s.A;
  m.chain = env.chain;
  m.M = env.M;
  m.chain_dims.assign(env.M, env.chain_dim);
  if (env.first_dim > 0) m.chain_dims[0] = env.first_dim;
  if (env.closure) {
    if (!env.closure->rescaled) throw std::invalid_argument("Environment: closure must be rescaled");
    m.closure = env.closure;
    m.closure_dims.assign(env.closure->N, env.closure_dim > 0 ? env.closure_dim : env.chain_dim);
  }
  return m;
}

namespace {

tn::MPS vacuum_with(const ElectronicSystem& s, const std::vector<int>& dims, int chi, std::uint64_t seed,
                    const Eigen::VectorXcd& sys) {
  std::vector<Eigen::VectorXcd> loc;
  loc.push_back(sys);
  for (std::size_t i = 1; i < dims.size(); ++i) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dims[i]);
    v[0] = 1.0;
    loc.push_back(v);
  }
  (void)s;
  return tn::MPS::product(loc, chi, seed);
}

int steps_per(double dT, double dt) {
  double r = dT / dt;
  int k = int(std::lround(r));
  if (k < 1 || std::abs(r - k) > 1e-9 * std::max(1.0, r))
    throw std::invalid_argument("output spacing must be a positive multiple of the time step");
  return k;
}

std::vector<double> weights(int n, double dT, double taper) {
  std::vector<double> w(n + 1, dT);
  if (n == 0) return {0.0};
  w.front() *= 0.5;
  w.back() *= 0.5;
  double T = n * dT, t0 = (1.0 - taper) * T;
  for (int k = 0; k <= n; ++k) {
    double t = k * dT;
    if (taper > 0 && t > t0) w[k] *= 0.5 * (1.0 + std::cos(std::numbers::pi * (t - t0) / (taper * T)));
  }
  return w;
}

}  // namespace

Response linear_response(const ElectronicSystem& s, const Environment& env, const Propagation& p,
                         double dT, int n) {
  if (n < 0) throw std::invalid_argument("linear_response: negative grid size");
  const int every = steps_per(dT, p.dt);
  tn::ChainModel model = chain_model(s, env);
  tn::Mpo W = tn::build_mpo(model);
  Eigen::VectorXcd g = Eigen::VectorXcd::Zero(s.dim());
  g[0] = 1.0;
  Eigen::VectorXcd e = s.mu_plus * g;
  tn::MPS psi0 = vacuum_with(s, model.local_dims(), 1, p.seed, e);
  tn::MPS psi = vacuum_with(s, model.local_dims(), p.chi, p.seed, e);
  Response r;
  r.t.push_back(0.0);
  r.R.push_back(tn::overlap(psi0, psi));
  tn::Tdvp td(W, {p.dt, p.krylov, p.renormalize});
  // overlap with a bond-dimension-1 bra: pad the bra to match is unnecessary,
  // contraction handles unequal bonds
  td.evolve(psi, n * every, [&](const tn::MPS& st, int k) {
    if (k % every) return;
    double t = k * p.dt;
    r.t.push_back(t);
    r.R.push_back(tn::overlap(psi0, st) * units::propagator_phase(s.reference, t));
  });
  return r;
}

Spectrum absorption_spectrum(const Response& r, const std::vector<double>& omega, TransformOptions opt) {
  const int n = int(r.t.size()) - 1;
  if (n < 1) throw std::invalid_argument("absorption_spectrum: need at least two samples");
  double dT = r.t[1] - r.t[0];
  for (int k = 1; k <= n; ++k)
    if (std::abs(r.t[k] - k * dT) > 1e-9 * (1 + r.t[k]))
      throw std::invalid_argument("absorption_spectrum: samples must be uniform from t = 0");
  std::vector<double> w = weights(n, dT, opt.taper);
  Spectrum s;
  s.omega = omega;
  for (double x : omega) {
    cplx acc = 0.0;
    for (int k = 0; k <= n; ++k) acc += w[k] * std::polar(1.0, units::phase(x, r.t[k])) * r.R[k];
    s.A.push_back((opt.omega_prefactor ? x : 1.0) * acc.real());
  }
  return s;
}

void normalize_max(Spectrum& s) {
  if (s.A.empty()) return;
  double m = *std::max_element(s.A.begin(), s.A.end());
  if (!(m > 0)) throw std::runtime_error("normalize_max: spectrum has no positive maximum");
  for (double& a : s.A) a /= m;
}

std::vector<double> linspace(double a, double b, int n) {
  if (n < 2) return {a};
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
  return v;
}

Response2D third_order_se(const ElectronicSystem& s, const Environment& env, const Propagation& p,
                          double dT, int n, double T2, ThirdOrderOptions opt) {
  if (n < 0 || T2 < 0) throw std::invalid_argument("third_order_se: bad time grid");
  const int every = steps_per(dT, p.dt);
  const int wait = T2 > 0 ? steps_per(T2, p.dt) : 0;
  tn::ChainModel model = chain_model(s, env);
  tn::Mpo W = tn::build_mpo(model);
  Eigen::VectorXcd g = Eigen::VectorXcd::Zero(s.dim());
  g[0] = 1.0;
  const Eigen::MatrixXcd mum = s.mu_minus();
  const tn::TdvpOptions topt{p.dt, p.krylov, p.renormalize};

  // pass 1: psi_e(t) and the de-excited checkpoints mu_- psi_e(t_k + T2)
  static std::atomic<int> runs{0};
  tn::CheckpointStore store(opt.checkpoint_budget, opt.scratch / ("run-" + std::to_string(::getpid()) + "-" +
                                                                   std::to_string(runs++)));
  tn::MPS psi = vacuum_with(s, model.local_dims(), p.chi, p.seed, s.mu_plus * g);
  // one-site TDVP keeps the bond dimensions, so the checkpoint cost is known now
  const std::size_t need = std::size_t(n + 1) * psi.bytes();
  if (!opt.allow_spill && need > opt.checkpoint_budget)
    throw std::runtime_error("third_order_se: " + std::to_string(n + 1) + " checkpoints need " +
                             std::to_string(need) + " bytes, budget is " +
                             std::to_string(opt.checkpoint_budget));
  auto keep = [&](const tn::MPS& st, int k) {
    tn::MPS phi = st;
    tn::apply_local(phi, mum, 0);
    store.put(k, (wait + k * every) * p.dt, phi);
  };
  {
    tn::Tdvp td(W, topt);
    if (wait == 0) keep(psi, 0);
    td.evolve(psi, wait + n * every, [&](const tn::MPS& st, int step) {
      int rel = step - wait;
      if (rel >= 0 && rel % every == 0) keep(st, rel / every);
    });
  }

  // pass 2: each checkpoint evolved again, overlapped with all others
  Response2D out;
  out.T2 = T2;
  for (int k = 0; k <= n; ++k) {
    out.t1.push_back(k * dT);
    out.t3.push_back(k * dT);
  }
  out.R = Eigen::MatrixXcd::Zero(n + 1, n + 1);
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex fail_mu;
  auto worker = [&]() {
    try {
      tn::Tdvp td(W, topt);
      for (int k = next++; k <= n; k = next++) {
        tn::MPS chi = store.get(k);
        if (chi.zero) continue;
        auto row = [&](const tn::MPS& st, int j) {
          tn::MPS ket = store.get(j);
          double t1 = k * dT, t3 = j * dT;
          out.R(k, j) = tn::overlap(st, ket) * std::polar(1.0, units::phase(s.reference, t1 - t3));
        };
        row(chi, 0);
        td.evolve(chi, n * every, [&](const tn::MPS& st, int step) {
          if (step % every == 0) row(st, step / every);
        });
      }
    } catch (...) {
      std::lock_guard lk(fail_mu);
      if (!failure) failure = std::current_exception();
      next = n + 1;
    }
  };
  int nw = std::max(1, std::min(opt.workers, n + 1));
  std::vector<std::thread> pool;
  for (int i = 1; i < nw; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

Spectrum2D rephasing_2d(const Response2D& r, const std::vector<double>& omega1,
                        const std::vector<double>& omega3, double taper) {
  const int n1 = int(r.t1.size()) - 1, n3 = int(r.t3.size()) - 1;
  if (n1 < 1 || n3 < 1) throw std::invalid_argument("rephasing_2d: need at least two samples per axis");
  std::vector<double> w1 = weights(n1, r.t1[1] - r.t1[0], taper);
  std::vector<double> w3 = weights(n3, r.t3[1] - r.t3[0], taper);
  Eigen::MatrixXcd E1(omega1.size(), n1 + 1), E3(n3 + 1, omega3.size());
  for (std::size_t a = 0; a < omega1.size(); ++a)
    for (int k = 0; k <= n1; ++k) E1(a, k) = w1[k] * std::polar(1.0, -units::phase(omega1[a], r.t1[k]));
  for (int j = 0; j <= n3; ++j)
    for (std::size_t b = 0; b < omega3.size(); ++b) E3(j, b) = w3[j] * std::polar(1.0, units::phase(omega3[b], r.t3[j]));
  Spectrum2D s;
  s.omega1 = omega1;
  s.omega3 = omega3;
  s.S = E1 * r.R * E3;
  return s;
}

}  // namespace mclosure::spectra
