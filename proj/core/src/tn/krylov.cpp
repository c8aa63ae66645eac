#include "mclosure/tn/krylov.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

namespace mclosure::tn {
namespace {

// one Arnoldi pass; returns false if the error estimate is too large
bool arnoldi_step(const LinearMap& A, const Eigen::VectorXcd& v, cplx tau, const KrylovOptions& opt,
                  KrylovStats* st, Eigen::VectorXcd& out) {
  const double beta = v.norm();
  if (beta == 0.0) {
    out = v;
    return true;
  }
  const int n = int(v.size());
  const int m = std::min(opt.dim, n);
  Eigen::MatrixXcd V(n, m + 1);
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(m + 1, m);
  V.col(0) = v / beta;
  Eigen::VectorXcd w(n);
  int j = 0;
  bool breakdown = false;
  for (; j < m; ++j) {
    A(V.col(j), w);
    if (st) ++st->matvecs;
    for (int pass = 0; pass < 2; ++pass) {
      Eigen::VectorXcd h = V.leftCols(j + 1).adjoint() * w;
      w -= V.leftCols(j + 1) * h;
      H.col(j).head(j + 1) += h;
    }
    double hn = w.norm();
    H(j + 1, j) = hn;
    if (hn < 1e-13 * (1.0 + H.col(j).head(j + 1).norm())) {
      breakdown = true;
      ++j;
      break;
    }
    V.col(j + 1) = w / hn;
    // stop as soon as the a-posteriori estimate is met (checked every other vector)
    const int k = j + 1;
    if (k >= 4 && k < m && k % 2 == 0) {
      Eigen::MatrixXcd E = (tau * H.topLeftCorner(k, k)).exp();
      if (hn * std::abs(E(k - 1, 0)) * std::abs(tau) <= opt.tol) {
        out = beta * (V.leftCols(k) * E.col(0));
        return true;
      }
    }
  }
  const int k = j;
  Eigen::MatrixXcd E = (tau * H.topLeftCorner(k, k)).exp();
  if (!breakdown && k == m) {
    double err = beta * std::abs(H(k, k - 1)) * std::abs(E(k - 1, 0)) * std::abs(tau);
    if (err > opt.tol * beta) return false;
  }
  out = beta * (V.leftCols(k) * E.col(0));
  return true;
}

}  // namespace

Eigen::VectorXcd expmv(const LinearMap& A, const Eigen::VectorXcd& v, cplx tau,
                       const KrylovOptions& opt, KrylovStats* stats) {
  Eigen::VectorXcd x = v, y;
  double done = 0.0, h = 1.0;  // fractions of tau
  int failures = 0;
  while (done < 1.0 - 1e-15) {
    h = std::min(h, 1.0 - done);
    if (arnoldi_step(A, x, tau * h, opt, stats, y)) {
      x.swap(y);
      done += h;
      if (stats) ++stats->substeps;
    } else {
      h *= 0.5;
      if (++failures > opt.max_splits)
        throw std::runtime_error("Krylov exponential did not converge with subspace dimension " +
                                 std::to_string(opt.dim));
    }
  }
  return x;
}

}  // namespace mclosure::tn
