#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "mclosure/quadrature.hpp"
#include "mclosure/spectra.hpp"
#include "mclosure/units.hpp"

namespace mclosure::spectra {

Lineshape::Lineshape(const specdens::SpectralDensity& J, double t_max_fs) {
  if (J.omega_min() < 0) throw std::invalid_argument("Lineshape: support must be non-negative");
  double a = J.omega_min(), b = J.omega_max();
  if (!std::isfinite(b)) b = specdens::support_truncation(J, 1e-10, {50.0, 1e7});
  double osc = units::to_rad_per_fs(b) * std::max(t_max_fs, 1.0) / (2 * std::numbers::pi);
  int panels = std::max(200, int(std::ceil(osc)));
  // split at the density's breakpoints; each piece gets its share of panels
  std::vector<double> cut{a, b};
  for (double x : J.breakpoints())
    if (x > a && x < b) cut.push_back(x);
  std::sort(cut.begin(), cut.end());
  cut.erase(std::unique(cut.begin(), cut.end()), cut.end());
  quad::Rule r;
  for (std::size_t k = 0; k + 1 < cut.size(); ++k) {
    int np = std::max(4, int(std::ceil(panels * (cut[k + 1] - cut[k]) / (b - a))));
    quad::Rule piece = quad::cosine_mapped_gauss_legendre(cut[k], cut[k + 1], np, 20);
    r.x.insert(r.x.end(), piece.x.begin(), piece.x.end());
    r.w.insert(r.w.end(), piece.w.begin(), piece.w.end());
  }
  for (std::size_t i = 0; i < r.size(); ++i) {
    double x = r.x[i];
    if (!(x > 0)) continue;
    double j = J(x);
    if (j == 0.0) continue;
    x_.push_back(x);
    w_.push_back(r.w[i] * j / (std::numbers::pi * x * x));
    lambda_ += w_.back() * x;
  }
}

cplx Lineshape::dG(double t) const {
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < x_.size(); ++i) {
    double ph = units::phase(x_[i], t);
    double s = std::sin(0.5 * ph);
    re -= w_[i] * 2.0 * s * s;  // cos(ph) - 1
    im -= w_[i] * std::sin(ph);
  }
  return {re, im};
}

cplx Lineshape::g(double t) const { return -dG(t) - cplx(0.0, units::phase(lambda_, t)); }

Response monomer_response(double E, const specdens::SpectralDensity& J, double dT, int n) {
  Lineshape ls(J, n * dT);
  Response r;
  for (int k = 0; k <= n; ++k) {
    double t = k * dT;
    r.t.push_back(t);
    r.R.push_back(std::exp(cplx(0.0, -units::phase(E - ls.lambda(), t)) + ls.dG(t)));
  }
  return r;
}

cplx com_factor(const Lineshape& half, double t) {
  return std::exp(half.dG(t) + cplx(0.0, units::phase(half.lambda(), t)));
}

cplx com_factor_se(const Lineshape& h, double t1, double T2, double t3) {
  using std::conj;
  // bra branch on [0, t1 + T2], ket branch on [t1, t1 + T2 + t3]
  return std::exp(-conj(h.g(t1)) + h.g(T2) - conj(h.g(t3)) - conj(h.g(t1 + T2)) - h.g(T2 + t3) +
                  conj(h.g(t1 + T2 + t3)));
}

double principal_value(const specdens::SpectralDensity& J, double x) {
  double a = J.omega_min(), b = J.omega_max();
  auto f = [&](double w) { return J(w) / (x - w); };
  std::vector<double> br = J.breakpoints();
  if (x <= a || x >= b) return quad::integrate(f, a, b, br);
  double jx = J(x);
  auto inner = [&](double w) { return w == x ? 0.0 : (J(w) - jx) / (x - w); };
  double span = std::min(x - a, std::isfinite(b) ? b - x : x - a);
  double prev = 0.0, cur = 0.0;
  for (int k = 0; k < 4; ++k) {
    double r = span * std::pow(0.5, k + 1);
    std::vector<double> bl, bh;
    for (double p : br) (p < x ? bl : bh).push_back(p);
    cur = quad::integrate(f, a, x - r, bl) + quad::integrate(f, x + r, b, bh) +
          quad::integrate(inner, x - r, x, {}) + quad::integrate(inner, x, x + r, {});
    if (k > 0 && std::abs(cur - prev) <= 1e-8 * (1.0 + std::abs(cur))) return cur;
    prev = cur;
  }
  throw std::runtime_error("principal_value: excision scan did not settle");
}

DimerCumulant dimer_cumulant(double E, double V, const specdens::SpectralDensity& J) {
  DimerCumulant c;
  c.E_bright = E + V;
  c.E_dark = E - V;
  c.weight = 0.5;           // sum_i |<e_i|E_j>|^4 for either exciton
  const double mix = 0.5;   // sum_i |<E_b|e_i><e_i|E_d>|^2
  const double lam = specdens::reorganization_energy(J);
  auto rate = [&](double dE) { return dE > 0 ? 2.0 * mix * J(dE) : 0.0; };
  c.gamma_bright = rate(c.E_bright - c.E_dark);
  c.gamma_dark = rate(c.E_dark - c.E_bright);
  c.lamb_bright = -c.weight * lam + mix / std::numbers::pi * principal_value(J, c.E_bright - c.E_dark);
  c.lamb_dark = -c.weight * lam + mix / std::numbers::pi * principal_value(J, c.E_dark - c.E_bright);
  return c;
}

Spectrum ce_absorption(double E, double V, const specdens::SpectralDensity& J,
                       const std::vector<double>& omega, CumulantOptions opt) {
  DimerCumulant c = dimer_cumulant(E, V, J);
  double pref = opt.sideband_prefactor < 0 ? c.weight : opt.sideband_prefactor;
  int n = int(std::lround(opt.t_max / opt.dt));
  Lineshape ls(J, opt.t_max);
  const double mu2 = 2.0;  // |<E_b|mu_+|g>|^2; the dark exciton is dipole-forbidden
  Response r;
  for (int k = 0; k <= n; ++k) {
    double t = k * opt.dt;
    double decay = units::to_rad_per_fs(0.5 * c.gamma_bright + opt.pure_dephasing) * t;
    r.t.push_back(t);
    r.R.push_back(mu2 * std::exp(cplx(-decay, -units::phase(c.E_bright + c.lamb_bright, t)) + pref * ls.dG(t)));
  }
  return absorption_spectrum(r, omega);
}

}  // namespace mclosure::spectra
