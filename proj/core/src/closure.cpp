#include "mclosure/closure.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "mclosure/units.hpp"

namespace mclosure::closure {

double semicircle_cf(double t) {
  double x = std::abs(t);
  if (x < 1e-4) {
    double x2 = x * x;
    return 1.0 - x2 / 8.0 + x2 * x2 / 192.0;
  }
  return 2.0 * std::cyl_bessel_j(1.0, x) / x;
}

cplx asymptotic_cf(double Omega, double K, double t_fs) {
  double tau = units::to_rad_per_fs(1.0) * t_fs;
  return K * K * std::polar(1.0, -Omega * tau) * semicircle_cf(2.0 * K * tau);
}

cplx ExpSum::operator()(double t) const {
  cplx s = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) s += w[k] * std::exp(lambda[k] * t);
  return s;
}

void ClosureParams::validate() const {
  if (N < 1) throw std::invalid_argument("ClosureParams: N must be positive");
  if (int(Gamma.size()) != N || int(Omega.size()) != N || int(c.size()) != N ||
      int(g.size()) != N - 1)
    throw std::invalid_argument("ClosureParams: array lengths inconsistent with N = " +
                                std::to_string(N));
  for (double x : Gamma)
    if (!std::isfinite(x)) throw std::invalid_argument("ClosureParams: non-finite damping");
}

Eigen::MatrixXcd generator(const ClosureParams& p) {
  p.validate();
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(p.N, p.N);
  const cplx I(0.0, 1.0);
  for (int n = 0; n < p.N; ++n) M(n, n) = -0.5 * std::abs(p.Gamma[n]) - I * p.Omega[n];
  for (int n = 0; n + 1 < p.N; ++n) M(n, n + 1) = M(n + 1, n) = -I * p.g[n];
  return M;
}

namespace {
double time_scale(const ClosureParams& p) { return p.rescaled ? units::to_rad_per_fs(1.0) : 1.0; }

Eigen::VectorXcd coupling(const ClosureParams& p) {
  Eigen::VectorXcd c(p.N);
  for (int n = 0; n < p.N; ++n) c[n] = p.c[n];
  return c;
}
}  // namespace

cplx closure_cf(const ClosureParams& p, double t) {
  Eigen::MatrixXcd E = (generator(p) * (time_scale(p) * t)).exp();
  Eigen::VectorXcd c = coupling(p);
  return c.transpose() * E * c.conjugate();
}

Modes closure_modes(const ClosureParams& p) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(generator(p));
  if (es.info() != Eigen::Success) throw std::runtime_error("closure_modes: eigensolver failed");
  Eigen::VectorXcd c = coupling(p);
  Modes m;
  for (int k = 0; k < p.N; ++k) {
    Eigen::VectorXcd u = es.eigenvectors().col(k);
    cplx nrm = u.transpose() * u;
    if (std::abs(nrm) < 1e-12)
      throw std::runtime_error("closure_modes: self-orthogonal eigenvector (defective generator)");
    u /= std::sqrt(nrm);
    cplx a = c.transpose() * u, b = c.adjoint() * u;
    m.lambda.push_back(es.eigenvalues()[k]);
    m.w.push_back(a * b);
  }
  return m;
}

ClosureParams rescale(const ClosureParams& p, const chainmap::Asymptotics& band) {
  p.validate();
  if (p.rescaled) throw std::logic_error("rescale: parameters are already rescaled");
  if (!(band.K > 0)) throw std::invalid_argument("rescale: K must be positive");
  ClosureParams r = p;
  double s = 2.0 * band.K;
  for (int n = 0; n < p.N; ++n) {
    r.Omega[n] = s * p.Omega[n] + band.Omega;
    r.Gamma[n] = s * p.Gamma[n];
    r.c[n] = band.K * p.c[n];
  }
  for (auto& x : r.g) x *= s;
  r.rescaled = true;
  r.band = band;
  return r;
}

double aux_spectral_density(const ClosureParams& p, double w) {
  Eigen::MatrixXcd M = generator(p);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(M, false);
  for (int k = 0; k < p.N; ++k)
    if (!(es.eigenvalues()[k].real() < 0))
      throw std::runtime_error("aux_spectral_density: closure has an undamped mode, no decay");
  Eigen::VectorXcd c = coupling(p);
  M.diagonal().array() += cplx(0.0, w);
  cplx half = -(c.transpose() * M.partialPivLu().solve(c.conjugate()))(0);  // int_0^inf C e^{iwt}
  return p.rescaled ? half.real() : 0.5 * half.real();
}

cplx lindblad_cf(const ClosureParams& p, double t) {
  p.validate();
  const int D = p.N + 1;  // |0>, |1_1> .. |1_N>
  using Mat = Eigen::MatrixXcd;
  const cplx I(0.0, 1.0);
  auto lower = [&](int n) {  // d_n = |0><1_n|
    Mat d = Mat::Zero(D, D);
    d(0, n + 1) = 1.0;
    return d;
  };
  Mat H = Mat::Zero(D, D);
  for (int n = 0; n < p.N; ++n) {
    Mat d = lower(n);
    H += p.Omega[n] * d.adjoint() * d;
    if (n + 1 < p.N) {
      // d_n d_{n+1}^dag restricted to one excitation is |1_{n+1}><1_n|
      Mat hop = lower(n + 1).adjoint() * lower(n);
      H += p.g[n] * (hop + hop.adjoint());
    }
  }
  Mat Id = Mat::Identity(D, D);
  auto kron = [](const Mat& A, const Mat& B) {
    Mat K(A.rows() * B.rows(), A.cols() * B.cols());
    for (int i = 0; i < A.rows(); ++i)
      for (int j = 0; j < A.cols(); ++j) K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return K;
  };
  // column-stacking: vec(A X B) = (B^T kron A) vec(X)
  Mat L = -I * (kron(Id, H) - kron(H.transpose(), Id));
  for (int n = 0; n < p.N; ++n) {
    Mat d = lower(n), nn = d.adjoint() * d;
    double G = std::abs(p.Gamma[n]);
    L += G * (kron(d.conjugate(), d) - 0.5 * kron(Id, nn) - 0.5 * kron(nn.transpose(), Id));
  }
  Mat B = Mat::Zero(D, D);
  for (int n = 0; n < p.N; ++n) B += p.c[n] * lower(n);
  Mat rho0 = Mat::Zero(D, D);
  rho0(0, 0) = 1.0;
  Mat X0 = B.adjoint() * rho0;
  Eigen::VectorXcd x = Eigen::Map<Eigen::VectorXcd>(X0.data(), D * D);
  Eigen::VectorXcd xt = (L * (time_scale(p) * t)).exp() * x;
  Mat Xt = Eigen::Map<Mat>(xt.data(), D, D);
  return (B * Xt).trace();
}

}  // namespace mclosure::closure
