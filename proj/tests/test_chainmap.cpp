#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "mclosure/chainmap.hpp"
#include "mclosure/quadrature.hpp"
#include "mclosure/units.hpp"

using namespace mclosure;
using namespace mclosure::chainmap;

namespace {

// Householder tridiagonalization of the arrowhead matrix [0 sqrt(w)^T; sqrt(w) diag(x)].
// Independent of Stieltjes and Lanczos; returns alpha_0.., beta_1.. (no beta_0).
Recurrence householder_oracle(const std::vector<double>& x, const std::vector<double>& w, int N) {
  int L = int(x.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(L + 1, L + 1);
  for (int i = 0; i < L; ++i) {
    A(0, i + 1) = A(i + 1, 0) = std::sqrt(w[i]);
    A(i + 1, i + 1) = x[i];
  }
  // plain Householder reflections, row/column 0 stay the starting vector
  for (int k = 0; k < L - 1; ++k) {
    Eigen::VectorXd v = A.col(k).tail(L - k);
    double alpha = -std::copysign(v.norm(), v(0));
    if (v.norm() == 0) continue;
    v(0) -= alpha;
    double vn = v.norm();
    if (vn == 0) continue;
    v /= vn;
    Eigen::MatrixXd H = Eigen::MatrixXd::Identity(L - k, L - k) - 2.0 * v * v.transpose();
    A.bottomRows(L - k) = H * A.bottomRows(L - k);
    A.rightCols(L - k) = A.rightCols(L - k) * H;
  }
  Recurrence r;
  double b0 = A(1, 0) * A(1, 0);
  r.beta.push_back(b0);
  for (int n = 0; n < N; ++n) {
    r.alpha.push_back(A(n + 1, n + 1));
    r.beta.push_back(A(n + 2, n + 1) * A(n + 2, n + 1));
  }
  return r;
}

}  // namespace

TEST(Recurrence, LegendreCoefficients) {
  // monic Legendre: alpha = 0, beta_k = k^2 / (4k^2 - 1), beta_0 = 2
  auto q = quad::gauss_legendre(200);
  Recurrence s = stieltjes(q.x, q.w, 30);
  Recurrence l = lanczos(q.x, q.w, 30);
  EXPECT_NEAR(s.beta[0], 2.0, 1e-13);
  for (int k = 1; k <= 30; ++k) {
    double ex = double(k) * k / (4.0 * k * k - 1.0);
    EXPECT_NEAR(s.beta[k], ex, 1e-12) << k;
    EXPECT_NEAR(l.beta[k], ex, 1e-12) << k;
  }
  for (int k = 0; k < 30; ++k) EXPECT_NEAR(s.alpha[k], 0.0, 1e-13);
}

TEST(Recurrence, MatchesHouseholderOracle) {
  std::vector<double> x, w;
  for (int i = 0; i < 60; ++i) {
    x.push_back(std::sin(0.37 * i) * 3.0 + 0.1 * i);
    w.push_back(0.5 + std::cos(1.3 * i) * 0.4);
  }
  Recurrence s = stieltjes(x, w, 12), h = householder_oracle(x, w, 12);
  EXPECT_NEAR(s.beta[0], h.beta[0], 1e-12 * h.beta[0]);
  for (int n = 0; n < 12; ++n) {
    EXPECT_NEAR(s.alpha[n], h.alpha[n], 1e-9) << n;
    EXPECT_NEAR(s.beta[n + 1], h.beta[n + 1], 1e-9) << n;
  }
}

TEST(Recurrence, RejectsTooFewNodes) {
  std::vector<double> x{0.0, 1.0, 2.0}, w{1.0, 1.0, 1.0};
  EXPECT_THROW(stieltjes(x, w, 2), std::invalid_argument);
}

TEST(ChainMap, SemicircleHasConstantChain) {
  // J = sqrt(1 - x^2) on [-1, 1] gives omega_n = 0, kappa_n = 1/2, kappa_0 = sqrt(1/2)
  specdens::SpectralDensity J = specdens::Semicircle{-1.0, 1.0, 2.0};
  ChainCoefficients c = chain_coefficients(J, 40);
  EXPECT_NEAR(c.kappa0, std::sqrt(0.5), 1e-10);
  for (int n = 0; n < 40; ++n) {
    EXPECT_NEAR(c.omega[n], 0.0, 1e-9) << n;
    EXPECT_NEAR(c.kappa[n], 0.5, 1e-9) << n;
  }
  EXPECT_EQ(fingerprint(c, 1e-6), 1);
}

TEST(ChainMap, StieltjesAgreesWithReorthogonalizedLanczos) {
  auto J = specdens::wscp().truncated(1000.0);
  ChainCoefficients s = chain_coefficients(J, 60), l = lanczos_coefficients(J, 60);
  EXPECT_NEAR(s.kappa0, l.kappa0, 1e-10 * l.kappa0);
  for (int n = 0; n < 60; ++n) {
    EXPECT_NEAR(s.omega[n], l.omega[n], 1e-8 * 1000) << n;
    EXPECT_NEAR(s.kappa[n], l.kappa[n], 1e-8 * 1000) << n;
  }
}

TEST(ChainMap, Kappa0IsTotalWeight) {
  auto J = specdens::wscp().truncated(1000.0);
  ChainCoefficients c = chain_coefficients(J, 10);
  double w = specdens::integrated_weight(J, 0.0, 1000.0) / std::numbers::pi;
  EXPECT_NEAR(c.kappa0 * c.kappa0, w, 1e-9 * w);
}

TEST(ChainMap, ConvergesToAsymptotics) {
  auto J = specdens::wscp().truncated(1000.0);
  ChainCoefficients c = chain_coefficients(J, 800);
  Asymptotics a = asymptotic_coefficients(c);
  EXPECT_DOUBLE_EQ(a.Omega, 500.0);
  EXPECT_DOUBLE_EQ(a.K, 250.0);
  EXPECT_NEAR(c.omega.back(), 500.0, 5.0);
  EXPECT_NEAR(c.kappa.back(), 250.0, 2.5);
  int M = fingerprint(c, 1e-2);
  EXPECT_GT(M, 1);
  for (int m = M - 1; m < c.size(); ++m) {
    EXPECT_LT(std::abs(c.omega[m] - 500.0) / 500.0, 1e-2);
    EXPECT_LT(std::abs(c.kappa[m] - 250.0) / 250.0, 1e-2);
  }
}

TEST(ChainMap, FingerprintNeedsSettledTail) {
  auto J = specdens::wscp().truncated(1000.0);
  ChainCoefficients c = chain_coefficients(J, 20);
  EXPECT_THROW(fingerprint(c, 1e-6), std::runtime_error);
}

TEST(ChainMap, HybridKeepsHeadAndReplacesTail) {
  auto J = specdens::wscp().truncated(1000.0);
  ChainCoefficients c = chain_coefficients(J, 30);
  ChainCoefficients h = hybrid_coefficients(c, 10, 50);
  ASSERT_EQ(h.size(), 50);
  for (int n = 0; n < 10; ++n) {
    EXPECT_EQ(h.omega[n], c.omega[n]);
    EXPECT_EQ(h.kappa[n], c.kappa[n]);
  }
  for (int n = 10; n < 50; ++n) {
    EXPECT_EQ(h.omega[n], 500.0);
    EXPECT_EQ(h.kappa[n], 250.0);
  }
}

TEST(EffectiveSpectrum, TwoSiteChainCosine) {
  // omega = 0, kappa_1 = k: eigenvalues +-k with equal weight, C(t) = cos(k t)
  ChainCoefficients c;
  c.kappa0 = 1.0;
  c.omega = {0.0, 0.0};
  c.kappa = {3.0, 0.0};
  EffectiveSpectrum s = effective_spectral_density(c, 2);
  for (double t : {0.0, 1.0, 10.0, 100.0}) {
    auto C = chain_ttcf(s, t);
    EXPECT_NEAR(C.real(), std::cos(units::phase(3.0, t)), 1e-12);
    EXPECT_NEAR(C.imag(), 0.0, 1e-12);
  }
  double sum = 0;
  for (double w : s.w) sum += w;
  EXPECT_NEAR(sum, 1.0, 1e-14);
}

TEST(EffectiveSpectrum, BroadenedDensityRecoversJ) {
  auto J = specdens::wscp().truncated(1000.0);
  ChainCoefficients c = chain_coefficients(J, 400);
  EffectiveSpectrum s = effective_spectral_density(c, 400);
  for (double w : {120.0, 300.0, 600.0}) {
    double b = broadened_density(s, w, 8.0);
    EXPECT_NEAR(b, J(w), 0.05 * J(w) + 0.5) << w;
  }
}

TEST(Ttcf, ChainMatchesBathCorrelation) {
  auto J = specdens::wscp().truncated(1000.0);
  ChainCoefficients c = chain_coefficients(J, 200);
  EffectiveSpectrum s = effective_spectral_density(c, 200);
  for (double t : {0.0, 5.0, 40.0, 120.0}) {
    auto a = chain_ttcf(s, t), b = bath_ttcf(J, t);
    EXPECT_NEAR(std::abs(a - b), 0.0, 1e-6 * std::abs(bath_ttcf(J, 0.0))) << t;
  }
}

TEST(Ttcf, SemicircleBessel) {
  // (1/pi) int_{-1}^{1} sqrt(1-x^2) e^{-ixt'} dx = J_1(t')/t', t' = 2 pi c t
  specdens::SpectralDensity J = specdens::Semicircle{-1.0, 1.0, 2.0};
  for (double t : {1000.0, 5000.0, 20000.0}) {
    double tp = units::phase(1.0, t);
    auto C = bath_ttcf(J, t);
    EXPECT_NEAR(C.real(), std::cyl_bessel_j(1.0, tp) / tp, 1e-9);
    EXPECT_NEAR(C.imag(), 0.0, 1e-9);
  }
}
