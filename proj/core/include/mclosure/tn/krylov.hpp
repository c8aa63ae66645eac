// krylov.hpp - Arnoldi approximation of exp(tau A) v
#pragma once

#include <complex>
#include <functional>

#include <Eigen/Dense>

namespace mclosure::tn {

using cplx = std::complex<double>;
using LinearMap = std::function<void(const Eigen::VectorXcd& in, Eigen::VectorXcd& out)>;

struct KrylovOptions {
  int dim = 12;
  double tol = 1e-10;
  int max_splits = 30;  // total substeps allowed before giving up
};

struct KrylovStats {
  long matvecs = 0;
  long substeps = 0;
};

// Applies exp(tau * A) to v. Splits tau into substeps while the a-posteriori
// error estimate exceeds tol * |v|; throws std::runtime_error otherwise.
Eigen::VectorXcd expmv(const LinearMap& A, const Eigen::VectorXcd& v, cplx tau,
                       const KrylovOptions& opt = {}, KrylovStats* stats = nullptr);

}  // namespace mclosure::tn
