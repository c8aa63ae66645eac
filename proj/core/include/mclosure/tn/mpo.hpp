// mpo.hpp - MPO for system + chain (+ closure) built from a finite-state machine
//
// Site 0 holds the system, sites 1..M the primary chain, sites M+1..M+N the
// closure oscillators. The generator is
//   H_S + k0 (A^dag b_1 + A b_1^dag) + sum w_n b^dag b + sum k_n (b_n^dag b_{n+1} + h.c.)
//   + sum (c_n^* b_M d_n^dag + c_n b_M^dag d_n) + sum (Omega_n - i|Gamma_n|/2) d^dag d
//   + sum g_n (d_n d_{n+1}^dag + h.c.)
// which is non-Hermitian as soon as a closure is attached.
#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "mclosure/chainmap.hpp"
#include "mclosure/closure.hpp"

namespace mclosure::tn {

struct MpoEntry {
  int a = 0, b = 0;  // left / right bond state
  Eigen::MatrixXcd op;
};

struct MpoSite {
  int wl = 1, wr = 1, d = 1;
  std::vector<MpoEntry> entries;
};

struct Mpo {
  std::vector<MpoSite> sites;
  int size() const { return int(sites.size()); }
  int max_bond() const;
  // bond dimension between site i and i+1
  int bond(int i) const { return sites[i].wr; }
  std::size_t bytes() const;
};

struct ChainModel {
  Eigen::MatrixXcd H_S;  // cm^-1
  Eigen::MatrixXcd A_S;  // system coupling operator
  chainmap::ChainCoefficients chain;
  int M = 0;                    // primary chain sites
  std::vector<int> chain_dims;  // one entry per site, or a single entry for all
  std::optional<closure::ClosureParams> closure;  // must be rescaled
  std::vector<int> closure_dims;

  std::vector<int> local_dims() const;
  int sites() const { return 1 + M + (closure ? closure->N : 0); }
};

Mpo build_mpo(const ChainModel& m);

// dense operator of the whole MPO (site 0 most significant); small systems only
Eigen::MatrixXcd to_dense(const Mpo& W);

}  // namespace mclosure::tn
