// chainmap.hpp - chain mapping of a spectral density, asymptotics, TTCFs
#pragma once

#include <complex>
#include <vector>

#include "mclosure/specdens.hpp"

namespace mclosure::chainmap {

// Semi-infinite chain: site n has frequency omega[n-1], the bond (n, n+1)
// carries kappa[n-1]; kappa0 couples the system to site 1.
struct ChainCoefficients {
  double kappa0 = 0.0;
  std::vector<double> omega;  // omega_1 .. omega_N
  std::vector<double> kappa;  // kappa_1 .. kappa_N
  double support_min = 0.0, support_max = 0.0;

  int size() const { return int(omega.size()); }
  ChainCoefficients truncated(int n) const;
};

struct DiscretizationOptions {
  int nodes = 0;         // 0 means max(20 N, 4000)
  int panel_order = 20;  // Gauss-Legendre points per panel
};

// orthonormal-polynomial recurrence of J(w)/pi dw via discretized Stieltjes
ChainCoefficients chain_coefficients(const specdens::SpectralDensity& J, int N,
                                     DiscretizationOptions opt = {});
// same discretization, Lanczos with full reorthogonalization (cross-check)
ChainCoefficients lanczos_coefficients(const specdens::SpectralDensity& J, int N,
                                       DiscretizationOptions opt = {});

// discrete-measure versions: returns alpha_0..alpha_{N-1}, beta_0..beta_N
struct Recurrence {
  std::vector<double> alpha, beta;
};
Recurrence stieltjes(const std::vector<double>& x, const std::vector<double>& w, int N);
Recurrence lanczos(const std::vector<double>& x, const std::vector<double>& w, int N);

struct Asymptotics {
  double Omega = 0.0;  // (w_min + w_max)/2
  double K = 0.0;      // (w_max - w_min)/4
};
Asymptotics asymptotic_coefficients(double omega_min, double omega_max);
inline Asymptotics asymptotic_coefficients(const ChainCoefficients& c) {
  return asymptotic_coefficients(c.support_min, c.support_max);
}

// smallest M with |w_m - Omega|/Omega < eps and |k_m - K|/K < eps for every
// computed m >= M. When Omega == 0 the frequency deviation is measured
// relative to K instead. Throws when the tail never settles.
int fingerprint(const ChainCoefficients& c, double eps, int tail_window = 5);

// replaces frequencies and couplings beyond site M by (Omega, K)
ChainCoefficients hybrid_coefficients(const ChainCoefficients& c, int M, int D);

// eigen-decomposition of the D-site chain matrix; w_j = |U_{1j}|^2
struct EffectiveSpectrum {
  double kappa0 = 0.0;
  std::vector<double> e, w;
};
EffectiveSpectrum effective_spectral_density(const ChainCoefficients& c, int D);

// C_D(t) = kappa0^2 sum_j w_j exp(-i e_j t), t in fs
std::complex<double> chain_ttcf(const EffectiveSpectrum& s, double t_fs);
// pi * kappa0^2 * sum_j w_j L_eta(w - e_j); integrates to the same weight as J
double broadened_density(const EffectiveSpectrum& s, double w, double eta);

// zero-temperature bath correlation (1/pi) int J(w) exp(-i w t) dw
std::complex<double> bath_ttcf(const specdens::SpectralDensity& J, double t_fs);

}  // namespace mclosure::chainmap
