#include "mclosure/tn/tdvp.hpp"

#include <stdexcept>

#include "mclosure/units.hpp"

namespace mclosure::tn {
namespace {
const cplx I(0.0, 1.0);
// local problems up to this size are exponentiated with an assembled matrix
constexpr int kExplicit = 128;
}

Tdvp::Tdvp(const Mpo& H, TdvpOptions opt) : H_(H), opt_(opt) {
  if (!(opt_.dt > 0)) throw std::invalid_argument("Tdvp: dt must be positive");
}

std::size_t Tdvp::workspace_bytes() const {
  std::size_t n = 0;
  for (const auto* envs : {&L_, &R_})
    for (const auto& e : *envs)
      for (const auto& m : e) n += std::size_t(m.size()) * sizeof(cplx);
  return n;
}

Tdvp::Env Tdvp::grow_left(const Env& L, const SiteTensor& A, const MpoSite& W) const {
  std::vector<std::vector<Eigen::MatrixXcd>> P(W.wl);
  std::vector<std::vector<Eigen::MatrixXcd>> Q(W.wr);
  for (const auto& e : W.entries) {
    auto& p = P[e.a];
    if (p.empty())
      for (int s = 0; s < A.d; ++s) p.push_back(L[e.a] * A.slice(s));
    auto& q = Q[e.b];
    if (q.empty()) q.assign(A.d, Eigen::MatrixXcd::Zero(A.Dl, A.Dr));
    for (int sp = 0; sp < A.d; ++sp)
      for (int s = 0; s < A.d; ++s)
        if (e.op(sp, s) != 0.0) q[sp] += e.op(sp, s) * p[s];
  }
  Env out(W.wr);
  for (int b = 0; b < W.wr; ++b) {
    out[b] = Eigen::MatrixXcd::Zero(A.Dr, A.Dr);
    if (Q[b].empty()) continue;
    for (int sp = 0; sp < A.d; ++sp) out[b].noalias() += A.slice(sp).adjoint() * Q[b][sp];
  }
  return out;
}

Tdvp::Env Tdvp::grow_right(const Env& R, const SiteTensor& A, const MpoSite& W) const {
  std::vector<std::vector<Eigen::MatrixXcd>> P(W.wr);
  std::vector<std::vector<Eigen::MatrixXcd>> Q(W.wl);
  for (const auto& e : W.entries) {
    auto& p = P[e.b];
    if (p.empty())
      for (int s = 0; s < A.d; ++s) p.push_back(R[e.b] * A.slice(s).transpose());
    auto& q = Q[e.a];
    if (q.empty()) q.assign(A.d, Eigen::MatrixXcd::Zero(A.Dr, A.Dl));
    for (int sp = 0; sp < A.d; ++sp)
      for (int s = 0; s < A.d; ++s)
        if (e.op(sp, s) != 0.0) q[sp] += e.op(sp, s) * p[s];
  }
  Env out(W.wl);
  for (int a = 0; a < W.wl; ++a) {
    out[a] = Eigen::MatrixXcd::Zero(A.Dl, A.Dl);
    if (Q[a].empty()) continue;
    for (int sp = 0; sp < A.d; ++sp) out[a].noalias() += A.slice(sp).conjugate() * Q[a][sp];
  }
  return out;
}

void Tdvp::apply_site(const Env& L, const MpoSite& W, const Env& R, const SiteTensor& A, SiteTensor& out,
                      SiteWork& work) const {
  auto& T = work.T;
  auto& Z = work.Z;
  T.resize(W.wl);
  Z.resize(W.wr);
  work.hasT.assign(W.wl, 0);
  work.hasZ.assign(W.wr, 0);
  for (const auto& e : W.entries) {
    auto& t = T[e.a];
    if (!work.hasT[e.a]) {
      t.resize(A.d);
      for (int s = 0; s < A.d; ++s) t[s].noalias() = L[e.a] * A.slice(s);
      work.hasT[e.a] = 1;
    }
    auto& z = Z[e.b];
    if (!work.hasZ[e.b]) {
      z.resize(A.d);
      for (auto& m : z) m.setZero(A.Dl, A.Dr);
      work.hasZ[e.b] = 1;
    }
    for (int sp = 0; sp < A.d; ++sp)
      for (int s = 0; s < A.d; ++s)
        if (e.op(sp, s) != 0.0) z[sp] += e.op(sp, s) * t[s];
  }
  out.data.setZero();
  for (int b = 0; b < W.wr; ++b) {
    if (!work.hasZ[b]) continue;
    for (int sp = 0; sp < A.d; ++sp) out.slice(sp).noalias() += Z[b][sp] * R[b].transpose();
  }
}

void Tdvp::evolve_site(MPS& psi, int i, double tau) {
  SiteTensor& A = psi.sites[i];
  const Env& L = L_[i];
  const Env& R = R_[i];
  const MpoSite& W = H_.sites[i];
  const int Dl = A.Dl, d = A.d, Dr = A.Dr, n = Dl * d * Dr;
  if (n <= kExplicit) {
    // small local problem: assemble sum_e R_b (x) op (x) L_a once
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(n, n);
    for (const auto& e : W.entries) {
      const Eigen::MatrixXcd& La = L[e.a];
      const Eigen::MatrixXcd& Rb = R[e.b];
      for (int r = 0; r < Dr; ++r)
        for (int rp = 0; rp < Dr; ++rp) {
          cplx rv = Rb(rp, r);
          if (rv == 0.0) continue;
          for (int s = 0; s < d; ++s)
            for (int sp = 0; sp < d; ++sp) {
              cplx v = rv * e.op(sp, s);
              if (v == 0.0) continue;
              H.block(Dl * (sp + d * rp), Dl * (s + d * r), Dl, Dl) += v * La;
            }
        }
    }
    LinearMap op = [&](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) { y.noalias() = H * x; };
    A.data = expmv(op, A.data, -I * units::to_rad_per_fs(tau), opt_.krylov, &stats_);
    return;
  }
  SiteTensor in(Dl, d, Dr), out(Dl, d, Dr);
  SiteWork work;
  LinearMap op = [&](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) {
    in.data = x;
    apply_site(L, W, R, in, out, work);
    y = out.data;
  };
  A.data = expmv(op, A.data, -I * units::to_rad_per_fs(tau), opt_.krylov, &stats_);
}

void Tdvp::evolve_bond(Eigen::MatrixXcd& C, const Env& L, const Env& R, double tau) {
  const long r = C.rows(), c = C.cols();
  if (r * c <= kExplicit) {
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(r * c, r * c);
    for (std::size_t a = 0; a < L.size(); ++a)
      for (long j = 0; j < c; ++j)
        for (long jp = 0; jp < c; ++jp)
          if (R[a](jp, j) != 0.0) H.block(r * jp, r * j, r, r) += R[a](jp, j) * L[a];
    LinearMap op = [&](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) { y.noalias() = H * x; };
    Eigen::VectorXcd v = Eigen::Map<Eigen::VectorXcd>(C.data(), r * c);
    v = expmv(op, v, I * units::to_rad_per_fs(tau), opt_.krylov, &stats_);
    C = Eigen::Map<Eigen::MatrixXcd>(v.data(), r, c);
    return;
  }
  Eigen::MatrixXcd LX(r, c);
  LinearMap op = [&](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) {
    Eigen::Map<const Eigen::MatrixXcd> X(x.data(), r, c);
    y.setZero(r * c);
    Eigen::Map<Eigen::MatrixXcd> Y(y.data(), r, c);
    for (std::size_t a = 0; a < L.size(); ++a) {
      LX.noalias() = L[a] * X;
      Y.noalias() += LX * R[a].transpose();
    }
  };
  Eigen::VectorXcd v = Eigen::Map<Eigen::VectorXcd>(C.data(), r * c);
  v = expmv(op, v, I * units::to_rad_per_fs(tau), opt_.krylov, &stats_);
  C = Eigen::Map<Eigen::MatrixXcd>(v.data(), r, c);
}

void Tdvp::prepare(MPS& psi) {
  const int N = psi.size();
  if (N != H_.size()) throw std::invalid_argument("Tdvp: MPS and MPO lengths differ");
  for (int i = 0; i < N; ++i)
    if (psi.sites[i].d != H_.sites[i].d)
      throw std::invalid_argument("Tdvp: local dimension mismatch at site " + std::to_string(i));
  if (psi.zero) throw std::invalid_argument("Tdvp: cannot propagate the zero state");
  psi.move_center(0);
  L_.assign(N, {});
  R_.assign(N, {});
  L_[0] = Env(1, Eigen::MatrixXcd::Ones(1, 1));
  R_[N - 1] = Env(1, Eigen::MatrixXcd::Ones(1, 1));
  for (int i = N - 1; i > 0; --i) R_[i - 1] = grow_right(R_[i], psi.sites[i], H_.sites[i]);
  bound_ = &psi;
}

void Tdvp::step(MPS& psi) {
  if (bound_ != &psi || psi.center != 0) prepare(psi);
  const int N = psi.size();
  const double tau = 0.5 * opt_.dt;
  if (N == 1) {
    evolve_site(psi, 0, opt_.dt);
  } else {
    for (int i = 0; i < N - 1; ++i) {
      evolve_site(psi, i, tau);
      SiteTensor& A = psi.sites[i];
      Eigen::HouseholderQR<Eigen::MatrixXcd> qr(A.left());
      Eigen::MatrixXcd Q = qr.householderQ() * Eigen::MatrixXcd::Identity(A.Dl * A.d, A.Dr);
      Eigen::MatrixXcd C = qr.matrixQR().topRows(A.Dr).triangularView<Eigen::Upper>();
      A.left() = Q;
      L_[i + 1] = grow_left(L_[i], A, H_.sites[i]);
      evolve_bond(C, L_[i + 1], R_[i], tau);
      SiteTensor& B = psi.sites[i + 1];
      Eigen::MatrixXcd nb = C * B.right();
      B.right() = nb;
    }
    evolve_site(psi, N - 1, opt_.dt);
    for (int i = N - 1; i > 0; --i) {
      if (i < N - 1) evolve_site(psi, i, tau);
      SiteTensor& A = psi.sites[i];
      Eigen::HouseholderQR<Eigen::MatrixXcd> qr(A.right().transpose());
      Eigen::MatrixXcd Q = qr.householderQ() * Eigen::MatrixXcd::Identity(A.d * A.Dr, A.Dl);
      Eigen::MatrixXcd C = Eigen::MatrixXcd(qr.matrixQR().topRows(A.Dl).triangularView<Eigen::Upper>()).transpose();
      A.right() = Q.transpose();
      R_[i - 1] = grow_right(R_[i], A, H_.sites[i]);
      evolve_bond(C, L_[i], R_[i - 1], tau);
      SiteTensor& B = psi.sites[i - 1];
      Eigen::MatrixXcd nb = B.left() * C;
      B.left() = nb;
    }
    evolve_site(psi, 0, tau);
  }
  psi.center = 0;
  double n = psi.sites[0].data.norm();
  if (!std::isfinite(n)) throw std::runtime_error("Tdvp: state norm became non-finite");
  if (n == 0.0) {
    psi.zero = true;
    return;
  }
  psi.sites[0].data /= n;
  if (!opt_.renormalize) psi.log_coeff += std::log(n);
}

void Tdvp::evolve(MPS& psi, int steps, const std::function<void(const MPS&, int)>& observer) {
  prepare(psi);
  for (int k = 1; k <= steps; ++k) {
    step(psi);
    if (observer) observer(psi, k);
  }
}

}  // namespace mclosure::tn
