// mps.hpp - matrix product states with an explicit log-prefactor
#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace mclosure::tn {

using cplx = std::complex<double>;

// rank-3 site tensor A(l, s, r), column-major: l + Dl*(s + d*r)
struct SiteTensor {
  int Dl = 1, d = 1, Dr = 1;
  Eigen::VectorXcd data;

  SiteTensor() = default;
  SiteTensor(int Dl_, int d_, int Dr_) : Dl(Dl_), d(d_), Dr(Dr_), data(Eigen::VectorXcd::Zero(std::size_t(Dl_) * d_ * Dr_)) {}

  cplx& operator()(int l, int s, int r) { return data[l + Dl * (s + d * r)]; }
  cplx operator()(int l, int s, int r) const { return data[l + Dl * (s + d * r)]; }

  // (Dl*d) x Dr and Dl x (d*Dr) views share the same storage
  Eigen::Map<Eigen::MatrixXcd> left() { return {data.data(), Dl * d, Dr}; }
  Eigen::Map<const Eigen::MatrixXcd> left() const { return {data.data(), Dl * d, Dr}; }
  Eigen::Map<Eigen::MatrixXcd> right() { return {data.data(), Dl, d * Dr}; }
  Eigen::Map<const Eigen::MatrixXcd> right() const { return {data.data(), Dl, d * Dr}; }
  // Dl x Dr slice at physical index s
  using Slice = Eigen::Map<Eigen::MatrixXcd, 0, Eigen::OuterStride<>>;
  using ConstSlice = Eigen::Map<const Eigen::MatrixXcd, 0, Eigen::OuterStride<>>;
  Slice slice(int s) { return {data.data() + Dl * s, Dl, Dr, Eigen::OuterStride<>(Dl * d)}; }
  ConstSlice slice(int s) const { return {data.data() + Dl * s, Dl, Dr, Eigen::OuterStride<>(Dl * d)}; }
};

// |psi> = exp(log_coeff) * contraction(sites). All sites left of `center`
// are left-isometries, all sites right of it right-isometries.
class MPS {
 public:
  std::vector<SiteTensor> sites;
  int center = 0;
  cplx log_coeff = 0.0;
  bool zero = false;  // set when an operator annihilated the state

  int size() const { return int(sites.size()); }
  std::vector<int> local_dims() const;
  std::vector<int> bond_dims() const;  // internal bonds, size()-1 entries
  std::size_t bytes() const;

  void move_center(int target);
  // divides the centre tensor by its norm and books it in log_coeff
  void absorb_norm();

  // product state embedded at bond dimension <= chi. The extra bond
  // directions are filled with seeded random orthonormal completions.
  static MPS product(const std::vector<Eigen::VectorXcd>& local, int chi, std::uint64_t seed = 7);
};

cplx overlap(const MPS& bra, const MPS& ket);  // <bra|ket>
double norm(const MPS& psi);

// op acts on the physical index of `site`; the result is not renormalized
void apply_local(MPS& psi, const Eigen::MatrixXcd& op, int site);
// <psi|op_site|psi> / <psi|psi>
cplx expectation(const MPS& psi, const Eigen::MatrixXcd& op, int site);
// Re <b_n^dag b_n> / <psi|psi> on oscillator site n >= 1
double site_occupation(const MPS& psi, int n);

// dense amplitude vector (site 0 is the most significant index); small systems only
Eigen::VectorXcd to_dense(const MPS& psi);

// truncated oscillator operators in the Fock basis |0>..|d-1>
Eigen::MatrixXcd annihilation(int d);
Eigen::MatrixXcd number(int d);

}  // namespace mclosure::tn
