#include "mclosure/tn/mps.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace mclosure::tn {

std::vector<int> MPS::local_dims() const {
  std::vector<int> d;
  for (const auto& s : sites) d.push_back(s.d);
  return d;
}

std::vector<int> MPS::bond_dims() const {
  std::vector<int> b;
  for (int i = 0; i + 1 < size(); ++i) b.push_back(sites[i].Dr);
  return b;
}

std::size_t MPS::bytes() const {
  std::size_t n = 0;
  for (const auto& s : sites) n += std::size_t(s.data.size()) * sizeof(cplx);
  return n;
}

void MPS::move_center(int target) {
  if (target < 0 || target >= size()) throw std::out_of_range("MPS::move_center");
  while (center < target) {
    SiteTensor& A = sites[center];
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(A.left());
    Eigen::MatrixXcd Q = qr.householderQ() * Eigen::MatrixXcd::Identity(A.Dl * A.d, A.Dr);
    Eigen::MatrixXcd R = qr.matrixQR().topRows(A.Dr).triangularView<Eigen::Upper>();
    A.left() = Q;
    SiteTensor& B = sites[center + 1];
    Eigen::MatrixXcd nb = R * B.right();
    B.right() = nb;
    ++center;
  }
  while (center > target) {
    SiteTensor& A = sites[center];
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(A.right().transpose());
    Eigen::MatrixXcd Q = qr.householderQ() * Eigen::MatrixXcd::Identity(A.d * A.Dr, A.Dl);
    Eigen::MatrixXcd R = qr.matrixQR().topRows(A.Dl).triangularView<Eigen::Upper>();
    A.right() = Q.transpose();
    SiteTensor& B = sites[center - 1];
    Eigen::MatrixXcd nb = B.left() * R.transpose();
    B.left() = nb;
    --center;
  }
}

void MPS::absorb_norm() {
  double n = sites[center].data.norm();
  if (n == 0.0 || !std::isfinite(n)) {
    zero = zero || n == 0.0;
    if (!std::isfinite(n)) throw std::runtime_error("MPS: non-finite norm");
    return;
  }
  sites[center].data /= n;
  log_coeff += std::log(n);
}

MPS MPS::product(const std::vector<Eigen::VectorXcd>& local, int chi, std::uint64_t seed) {
  if (local.empty()) throw std::invalid_argument("MPS::product: no sites");
  if (chi < 1) throw std::invalid_argument("MPS::product: chi must be positive");
  const int N = int(local.size());
  std::vector<int> D(N + 1, 1);
  auto capped = [&](int from, int to) {  // prod_{from <= j < to} d_j, capped at chi
    long p = 1;
    for (int j = from; j < to && p < chi; ++j) p *= local[j].size();
    return int(std::min<long>(p, chi));
  };
  for (int i = 1; i < N; ++i) D[i] = std::min(capped(0, i), capped(i, N));
  MPS psi;
  psi.sites.resize(N);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  for (int i = 0; i < N; ++i) {
    const int d = int(local[i].size());
    if (d < 1) throw std::invalid_argument("MPS::product: empty local vector");
    double n = local[i].norm();
    if (n == 0.0) throw std::invalid_argument("MPS::product: zero local vector");
    psi.log_coeff += std::log(n);
    SiteTensor A(D[i], d, D[i + 1]);
    for (int s = 0; s < d; ++s) A(0, s, 0) = local[i][s] / n;
    if (i > 0) {
      auto M = A.right();
      for (int row = 1; row < A.Dl; ++row) {
        Eigen::RowVectorXcd x(M.cols());
        for (int k = 0; k < x.size(); ++k) x[k] = cplx(nd(rng), nd(rng));
        for (int pass = 0; pass < 2; ++pass)
          for (int q = 0; q < row; ++q) {
            cplx coef = M.row(q).conjugate().cwiseProduct(x).sum();
            x -= coef * M.row(q);
          }
        x /= x.norm();
        M.row(row) = x;
      }
    }
    psi.sites[i] = std::move(A);
  }
  psi.center = 0;
  return psi;
}

namespace {

Eigen::MatrixXcd transfer(const Eigen::MatrixXcd& E, const SiteTensor& bra, const SiteTensor& ket,
                          const Eigen::MatrixXcd* op) {
  if (bra.d != ket.d) throw std::invalid_argument("overlap: local dimensions differ");
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(bra.Dr, ket.Dr);
  for (int s = 0; s < ket.d; ++s) {
    Eigen::MatrixXcd EK = E * ket.slice(s);
    if (!op) {
      out.noalias() += bra.slice(s).adjoint() * EK;
      continue;
    }
    for (int sp = 0; sp < bra.d; ++sp) {
      cplx o = (*op)(sp, s);
      if (o != 0.0) out.noalias() += o * (bra.slice(sp).adjoint() * EK);
    }
  }
  return out;
}

cplx contract(const MPS& bra, const MPS& ket, const Eigen::MatrixXcd* op, int site) {
  if (bra.size() != ket.size()) throw std::invalid_argument("overlap: different lengths");
  for (int i = 0; i < ket.size(); ++i)
    if (bra.sites[i].d != ket.sites[i].d)
      throw std::invalid_argument("overlap: local dimensions differ at site " + std::to_string(i));
  Eigen::MatrixXcd E = Eigen::MatrixXcd::Ones(1, 1);
  for (int i = 0; i < ket.size(); ++i) E = transfer(E, bra.sites[i], ket.sites[i], i == site ? op : nullptr);
  return E(0, 0);
}

}  // namespace

cplx overlap(const MPS& bra, const MPS& ket) {
  if (bra.zero || ket.zero) return 0.0;
  return contract(bra, ket, nullptr, -1) * std::exp(std::conj(bra.log_coeff) + ket.log_coeff);
}

double norm(const MPS& psi) { return std::sqrt(std::abs(overlap(psi, psi))); }

void apply_local(MPS& psi, const Eigen::MatrixXcd& op, int site) {
  if (site < 0 || site >= psi.size()) throw std::out_of_range("apply_local: bad site");
  SiteTensor& A = psi.sites[site];
  if (op.rows() != A.d || op.cols() != A.d) throw std::invalid_argument("apply_local: operator dimension mismatch");
  psi.move_center(site);
  SiteTensor B(A.Dl, A.d, A.Dr);
  for (int s = 0; s < A.d; ++s)
    for (int t = 0; t < A.d; ++t)
      if (op(s, t) != 0.0) B.slice(s) += op(s, t) * A.slice(t);
  A = std::move(B);
  if (A.data.norm() == 0.0) psi.zero = true;
}

cplx expectation(const MPS& psi, const Eigen::MatrixXcd& op, int site) {
  cplx n = contract(psi, psi, nullptr, -1);
  if (std::abs(n) == 0.0) throw std::runtime_error("expectation: zero state");
  return contract(psi, psi, &op, site) / n;
}

double site_occupation(const MPS& psi, int n) {
  if (n <= 0 || n >= psi.size()) throw std::invalid_argument("site_occupation: site " + std::to_string(n) + " is not an oscillator");
  return expectation(psi, number(psi.sites[n].d), n).real();
}

Eigen::VectorXcd to_dense(const MPS& psi) {
  // T has one row per left basis string, Dr columns
  Eigen::MatrixXcd T = Eigen::MatrixXcd::Ones(1, 1);
  for (const auto& A : psi.sites) {
    Eigen::MatrixXcd U(T.rows() * A.d, A.Dr);
    for (int r = 0; r < T.rows(); ++r)
      for (int s = 0; s < A.d; ++s) U.row(r * A.d + s) = T.row(r) * A.slice(s);
    T = std::move(U);
  }
  Eigen::VectorXcd v = T.col(0);
  return psi.zero ? Eigen::VectorXcd(Eigen::VectorXcd::Zero(v.size())) : Eigen::VectorXcd(v * std::exp(psi.log_coeff));
}

Eigen::MatrixXcd annihilation(int d) {
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(d, d);
  for (int n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(double(n));
  return a;
}

Eigen::MatrixXcd number(int d) {
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(d, d);
  for (int n = 0; n < d; ++n) a(n, n) = n;
  return a;
}

}  // namespace mclosure::tn
