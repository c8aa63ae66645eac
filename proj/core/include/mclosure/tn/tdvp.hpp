// tdvp.hpp - one-site TDVP (projector splitting, symmetric second order)
//
// Propagates d/dt |psi> = -i G |psi> with G given as an MPO in cm^-1 and
// t in fs. G may be non-Hermitian; the decaying norm is booked in the MPS
// log-prefactor unless renormalization is requested explicitly.
#pragma once

#include <functional>
#include <vector>

#include "mclosure/tn/krylov.hpp"
#include "mclosure/tn/mpo.hpp"
#include "mclosure/tn/mps.hpp"

namespace mclosure::tn {

struct TdvpOptions {
  double dt = 0.5;  // fs
  KrylovOptions krylov{};
  bool renormalize = false;
};

class Tdvp {
 public:
  Tdvp(const Mpo& H, TdvpOptions opt = {});

  // one symmetric step of length opt.dt
  void step(MPS& psi);
  // `steps` steps; observer(psi, step_index) after each one (index from 1)
  void evolve(MPS& psi, int steps, const std::function<void(const MPS&, int)>& observer = {});

  const KrylovStats& stats() const { return stats_; }
  // bytes held in environments (for memory reporting)
  std::size_t workspace_bytes() const;
  const TdvpOptions& options() const { return opt_; }

 private:
  using Env = std::vector<Eigen::MatrixXcd>;
  void prepare(MPS& psi);
  Env grow_left(const Env& L, const SiteTensor& A, const MpoSite& W) const;
  Env grow_right(const Env& R, const SiteTensor& A, const MpoSite& W) const;
  // scratch reused across the matvecs of one local exponential
  struct SiteWork {
    std::vector<std::vector<Eigen::MatrixXcd>> T, Z;
    std::vector<char> hasT, hasZ;
  };
  void apply_site(const Env& L, const MpoSite& W, const Env& R, const SiteTensor& A, SiteTensor& out,
                  SiteWork& work) const;
  void evolve_site(MPS& psi, int i, double tau);
  void evolve_bond(Eigen::MatrixXcd& C, const Env& L, const Env& R, double tau);

  const Mpo& H_;
  TdvpOptions opt_;
  std::vector<Env> L_, R_;
  const MPS* bound_ = nullptr;
  KrylovStats stats_;
};

}  // namespace mclosure::tn
