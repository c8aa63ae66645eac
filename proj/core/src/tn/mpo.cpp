#include "mclosure/tn/mpo.hpp"

#include <map>
#include <stdexcept>
#include <string>

#include "mclosure/tn/mps.hpp"

namespace mclosure::tn {
namespace {

// bond states of the finite-state machine
enum State : int { Start = 0, Done = 1, Hop1 = 2, Hop2 = 3, ToCreate = 4, ToAnnihilate = 5 };

int dim_at(const std::vector<int>& dims, int i, const char* what) {
  if (dims.empty()) throw std::invalid_argument(std::string("ChainModel: missing ") + what);
  if (dims.size() == 1) return dims[0];
  if (i >= int(dims.size())) throw std::invalid_argument(std::string("ChainModel: too few ") + what);
  return dims[i];
}

struct Builder {
  std::vector<std::map<std::pair<int, int>, Eigen::MatrixXcd>> terms;
  std::vector<int> d;
  void add(int site, int a, int b, const Eigen::MatrixXcd& op) {
    auto& slot = terms[site][{a, b}];
    if (slot.size() == 0) slot = op;
    else slot += op;
  }
};

}  // namespace

int Mpo::max_bond() const {
  int w = 1;
  for (const auto& s : sites) w = std::max({w, s.wl, s.wr});
  return w;
}

std::size_t Mpo::bytes() const {
  std::size_t n = 0;
  for (const auto& s : sites)
    for (const auto& e : s.entries) n += std::size_t(e.op.size()) * sizeof(std::complex<double>);
  return n;
}

std::vector<int> ChainModel::local_dims() const {
  std::vector<int> d{int(H_S.rows())};
  for (int n = 0; n < M; ++n) d.push_back(dim_at(chain_dims, n, "chain_dims"));
  if (closure)
    for (int n = 0; n < closure->N; ++n) d.push_back(dim_at(closure_dims, n, "closure_dims"));
  return d;
}

Mpo build_mpo(const ChainModel& m) {
  if (m.H_S.rows() != m.H_S.cols() || m.H_S.rows() < 1)
    throw std::invalid_argument("build_mpo: H_S must be square");
  if (m.A_S.rows() != m.H_S.rows() || m.A_S.cols() != m.H_S.cols())
    throw std::invalid_argument("build_mpo: A_S must match H_S");
  if (m.M < 1) throw std::invalid_argument("build_mpo: need at least one chain site");
  if (m.chain.size() < m.M)
    throw std::invalid_argument("build_mpo: chain has " + std::to_string(m.chain.size()) +
                                " coefficients, M = " + std::to_string(m.M));
  if (m.closure) {
    m.closure->validate();
    if (!m.closure->rescaled) throw std::invalid_argument("build_mpo: closure parameters must be rescaled");
  }
  const std::vector<int> d = m.local_dims();
  const int L = int(d.size());
  Builder B;
  B.terms.resize(L);
  B.d = d;
  auto id = [&](int i) { return Eigen::MatrixXcd::Identity(d[i], d[i]); };
  for (int i = 0; i < L; ++i) {
    B.add(i, Start, Start, id(i));
    B.add(i, Done, Done, id(i));
  }
  // system
  B.add(0, Start, Done, m.H_S);
  B.add(0, Start, Hop1, m.chain.kappa0 * m.A_S.adjoint());
  B.add(0, Start, Hop2, m.chain.kappa0 * m.A_S);
  // primary chain, sites 1..M
  for (int n = 1; n <= m.M; ++n) {
    Eigen::MatrixXcd b = annihilation(d[n]), bd = b.adjoint();
    B.add(n, Hop1, Done, b);
    B.add(n, Hop2, Done, bd);
    B.add(n, Start, Done, m.chain.omega[n - 1] * bd * b);
    if (n < m.M) {
      B.add(n, Start, Hop1, m.chain.kappa[n - 1] * bd);
      B.add(n, Start, Hop2, m.chain.kappa[n - 1] * b);
    }
  }
  if (m.closure) {
    const auto& p = *m.closure;
    const int s0 = m.M + 1;
    Eigen::MatrixXcd bM = annihilation(d[m.M]);
    B.add(m.M, Start, ToCreate, bM);                // c_n^* b_M d_n^dag
    B.add(m.M, Start, ToAnnihilate, bM.adjoint());  // c_n b_M^dag d_n
    for (int n = 0; n < p.N; ++n) {
      int i = s0 + n;
      Eigen::MatrixXcd a = annihilation(d[i]), ad = a.adjoint();
      B.add(i, ToCreate, ToCreate, id(i));
      B.add(i, ToAnnihilate, ToAnnihilate, id(i));
      B.add(i, ToCreate, Done, std::conj(p.c[n]) * ad);
      B.add(i, ToAnnihilate, Done, p.c[n] * a);
      B.add(i, Start, Done, std::complex<double>(p.Omega[n], -0.5 * std::abs(p.Gamma[n])) * ad * a);
      if (n > 0) {
        B.add(i, Hop1, Done, ad);
        B.add(i, Hop2, Done, a);
      }
      if (n + 1 < p.N) {
        B.add(i, Start, Hop1, p.g[n] * a);
        B.add(i, Start, Hop2, p.g[n] * ad);
      }
    }
  }
  // compress: states used on each bond get consecutive indices
  std::vector<std::map<int, int>> bond(L + 1);
  bond[0][Start] = 0;
  bond[L][Done] = 0;
  for (int i = 0; i + 1 < L; ++i) {
    std::map<int, int>& ids = bond[i + 1];
    for (int s : {int(Start), int(Done)}) ids.emplace(s, int(ids.size()));
    for (const auto& [ab, op] : B.terms[i])
      if (ab.second != Start && ab.second != Done) ids.emplace(ab.second, 0);
    int k = 0;
    for (auto& [s, idx] : ids) idx = k++;
  }
  // drop transitions whose endpoints do not exist on a bond (boundaries, unused carries)
  Mpo W;
  W.sites.resize(L);
  for (int i = 0; i < L; ++i) {
    MpoSite& S = W.sites[i];
    S.d = d[i];
    S.wl = int(bond[i].size());
    S.wr = int(bond[i + 1].size());
    for (const auto& [ab, op] : B.terms[i]) {
      auto ia = bond[i].find(ab.first), ib = bond[i + 1].find(ab.second);
      if (ia == bond[i].end() || ib == bond[i + 1].end()) continue;
      if (op.cwiseAbs().maxCoeff() == 0.0) continue;
      S.entries.push_back({ia->second, ib->second, op});
    }
  }
  // a carried state must be consumed on the next site
  for (int i = 0; i + 1 < L; ++i)
    for (const auto& e : W.sites[i].entries) {
      bool used = false;
      for (const auto& f : W.sites[i + 1].entries) used = used || f.a == e.b;
      if (!used) throw std::logic_error("build_mpo: dangling bond state at site " + std::to_string(i));
    }
  return W;
}

Eigen::MatrixXcd to_dense(const Mpo& W) {
  std::vector<Eigen::MatrixXcd> T(1, Eigen::MatrixXcd::Ones(1, 1));
  for (const auto& S : W.sites) {
    std::vector<Eigen::MatrixXcd> U(S.wr);
    long n = T[0].rows() * S.d;
    for (auto& u : U) u = Eigen::MatrixXcd::Zero(n, n);
    for (const auto& e : S.entries) {
      const Eigen::MatrixXcd& A = T[e.a];
      for (int i = 0; i < A.rows(); ++i)
        for (int j = 0; j < A.cols(); ++j)
          if (A(i, j) != 0.0) U[e.b].block(i * S.d, j * S.d, S.d, S.d) += A(i, j) * e.op;
    }
    T = std::move(U);
  }
  return T[0];
}

}  // namespace mclosure::tn
