#include "mclosure/chainmap.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "mclosure/quadrature.hpp"
#include "mclosure/units.hpp"

namespace mclosure::chainmap {
namespace {

struct Measure {
  std::vector<double> x, w;
};

Measure discretize(const specdens::SpectralDensity& J, int N, const DiscretizationOptions& opt) {
  if (N < 1) throw std::invalid_argument("chain_coefficients: N must be positive");
  double a = J.omega_min(), b = J.omega_max();
  if (!std::isfinite(a) || !std::isfinite(b))
    throw std::invalid_argument("chain_coefficients: support must be finite; truncate the density first");
  int L = opt.nodes > 0 ? opt.nodes : std::max(20 * N, 4000);
  if (L < 2 * N)
    throw std::invalid_argument("chain_coefficients: " + std::to_string(L) +
                                " quadrature nodes cannot resolve " + std::to_string(N) +
                                " coefficients (need at least 2N)");
  int p = std::max(2, opt.panel_order);
  int panels = std::max(1, (L + p - 1) / p);
  quad::Rule r = quad::cosine_mapped_gauss_legendre(a, b, panels, p);
  Measure m;
  m.x = std::move(r.x);
  m.w.resize(m.x.size());
  for (std::size_t i = 0; i < m.x.size(); ++i) m.w[i] = r.w[i] * J(m.x[i]) / std::numbers::pi;
  return m;
}

ChainCoefficients to_chain(const Recurrence& r, double a, double b) {
  ChainCoefficients c;
  c.kappa0 = std::sqrt(r.beta[0]);
  int N = int(r.alpha.size());
  c.omega.assign(r.alpha.begin(), r.alpha.end());
  c.kappa.resize(N);
  for (int n = 1; n <= N; ++n) c.kappa[n - 1] = std::sqrt(r.beta[n]);
  c.support_min = a;
  c.support_max = b;
  return c;
}

Recurrence run(const std::vector<double>& x, const std::vector<double>& w, int N, bool reorth) {
  const std::size_t L = x.size();
  if (w.size() != L) throw std::invalid_argument("recurrence: node/weight size mismatch");
  if (N < 1 || L < 2 * std::size_t(N))
    throw std::invalid_argument("recurrence: " + std::to_string(L) + " nodes cannot resolve " +
                                std::to_string(N) + " coefficients (need at least 2N)");
  Eigen::Map<const Eigen::VectorXd> X(x.data(), L);
  Eigen::VectorXd sw(L);
  double mass = 0.0;
  for (std::size_t i = 0; i < L; ++i) {
    if (w[i] < 0) throw std::invalid_argument("recurrence: negative weight");
    sw[i] = std::sqrt(w[i]);
    mass += w[i];
  }
  if (!(mass > 0)) throw std::invalid_argument("recurrence: measure has zero mass");
  Recurrence r;
  r.beta.push_back(mass);
  Eigen::MatrixXd Q;
  if (reorth) Q.resize(L, N + 1);
  Eigen::VectorXd qprev = Eigen::VectorXd::Zero(L), q = sw / std::sqrt(mass), v;
  if (reorth) Q.col(0) = q;
  for (int k = 0; k < N; ++k) {
    v = X.cwiseProduct(q);
    double a = q.dot(v);
    r.alpha.push_back(a);
    v -= a * q;
    if (k > 0) v -= std::sqrt(r.beta[k]) * qprev;
    if (reorth)
      for (int pass = 0; pass < 2; ++pass) v -= Q.leftCols(k + 1) * (Q.leftCols(k + 1).transpose() * v);
    double b = v.squaredNorm();
    if (!(b > 1e-28 * mass * (1.0 + std::abs(a)) * (1.0 + std::abs(a))))
      throw std::runtime_error("recurrence breakdown at index " + std::to_string(k + 1) +
                               ": beta vanished (measure has too few support points)");
    r.beta.push_back(b);
    qprev = q;
    q = v / std::sqrt(b);
    if (reorth) Q.col(k + 1) = q;
  }
  return r;
}

}  // namespace

ChainCoefficients ChainCoefficients::truncated(int n) const {
  if (n < 0 || n > size()) throw std::out_of_range("ChainCoefficients::truncated");
  ChainCoefficients c = *this;
  c.omega.resize(n);
  c.kappa.resize(n);
  return c;
}

Recurrence stieltjes(const std::vector<double>& x, const std::vector<double>& w, int N) {
  return run(x, w, N, false);
}
Recurrence lanczos(const std::vector<double>& x, const std::vector<double>& w, int N) {
  return run(x, w, N, true);
}

ChainCoefficients chain_coefficients(const specdens::SpectralDensity& J, int N,
                                     DiscretizationOptions opt) {
  Measure m = discretize(J, N, opt);
  return to_chain(stieltjes(m.x, m.w, N), J.omega_min(), J.omega_max());
}

ChainCoefficients lanczos_coefficients(const specdens::SpectralDensity& J, int N,
                                       DiscretizationOptions opt) {
  Measure m = discretize(J, N, opt);
  return to_chain(lanczos(m.x, m.w, N), J.omega_min(), J.omega_max());
}

Asymptotics asymptotic_coefficients(double omega_min, double omega_max) {
  if (!std::isfinite(omega_min) || !std::isfinite(omega_max) || !(omega_max > omega_min))
    throw std::invalid_argument("asymptotic_coefficients: support must be a finite interval");
  return {0.5 * (omega_min + omega_max), 0.25 * (omega_max - omega_min)};
}

int fingerprint(const ChainCoefficients& c, double eps, int tail_window) {
  if (!(eps > 0)) throw std::invalid_argument("fingerprint: eps must be positive");
  Asymptotics as = asymptotic_coefficients(c);
  double wref = as.Omega != 0.0 ? std::abs(as.Omega) : as.K;
  int N = c.size();
  auto ok = [&](int m) {
    return std::abs(c.omega[m - 1] - as.Omega) / wref < eps &&
           std::abs(c.kappa[m - 1] - as.K) / as.K < eps;
  };
  int M = N + 1;
  while (M > 1 && ok(M - 1)) --M;
  if (M > N - std::max(0, tail_window - 1))
    throw std::runtime_error("fingerprint: coefficients have not settled to eps = " +
                             std::to_string(eps) + " within " + std::to_string(N) +
                             " sites; increase N_max");
  return M;
}

ChainCoefficients hybrid_coefficients(const ChainCoefficients& c, int M, int D) {
  if (M < 0 || D < 1) throw std::invalid_argument("hybrid_coefficients: bad M or D");
  Asymptotics as = asymptotic_coefficients(c);
  ChainCoefficients h = c;
  h.omega.resize(D);
  h.kappa.resize(D);
  for (int n = 1; n <= D; ++n) {
    if (n > M || n > c.size()) {
      h.omega[n - 1] = as.Omega;
      h.kappa[n - 1] = as.K;
    }
  }
  return h;
}

EffectiveSpectrum effective_spectral_density(const ChainCoefficients& c, int D) {
  if (D < 1 || D > c.size())
    throw std::invalid_argument("effective_spectral_density: D must lie in [1, N]");
  Eigen::VectorXd d(D), e(std::max(0, D - 1));
  for (int i = 0; i < D; ++i) d[i] = c.omega[i];
  for (int i = 0; i + 1 < D; ++i) e[i] = c.kappa[i];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
  EffectiveSpectrum s;
  s.kappa0 = c.kappa0;
  for (int j = 0; j < D; ++j) {
    s.e.push_back(es.eigenvalues()[j]);
    double u = es.eigenvectors()(0, j);
    s.w.push_back(u * u);
  }
  return s;
}

std::complex<double> chain_ttcf(const EffectiveSpectrum& s, double t_fs) {
  std::complex<double> sum = 0.0;
  for (std::size_t j = 0; j < s.e.size(); ++j) sum += s.w[j] * units::propagator_phase(s.e[j], t_fs);
  return s.kappa0 * s.kappa0 * sum;
}

double broadened_density(const EffectiveSpectrum& s, double w, double eta) {
  if (!(eta > 0)) throw std::invalid_argument("broadened_density: eta must be positive");
  double sum = 0.0;
  for (std::size_t j = 0; j < s.e.size(); ++j) {
    double d = w - s.e[j];
    sum += s.w[j] * eta / (d * d + eta * eta);
  }
  return s.kappa0 * s.kappa0 * sum;  // pi * k0^2 * sum w (eta/pi)/(d^2+eta^2)
}

std::complex<double> bath_ttcf(const specdens::SpectralDensity& J, double t_fs) {
  double a = J.omega_min(), b = J.omega_max();
  if (!std::isfinite(b)) throw std::invalid_argument("bath_ttcf: truncate the density first");
  std::vector<double> br = J.breakpoints();
  double wt = units::to_rad_per_fs(1.0) * std::abs(t_fs);
  if (wt > 0) {  // one break per oscillation keeps the panels resolved
    double period = 2 * std::numbers::pi / wt;
    for (double x = a + period; x < b && br.size() < 20000; x += period) br.push_back(x);
  }
  double re = quad::integrate([&](double w) { return J(w) * std::cos(units::phase(w, t_fs)); }, a, b, br);
  double im = quad::integrate([&](double w) { return -J(w) * std::sin(units::phase(w, t_fs)); }, a, b, br);
  return std::complex<double>(re, im) / std::numbers::pi;
}

}  // namespace mclosure::chainmap
