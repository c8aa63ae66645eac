// spectra.hpp - linear and third-order responses, spectra, cumulant lineshapes
#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "mclosure/chainmap.hpp"
#include "mclosure/closure.hpp"
#include "mclosure/specdens.hpp"
#include "mclosure/tn/krylov.hpp"
#include "mclosure/tn/mpo.hpp"

namespace mclosure::spectra {

using cplx = std::complex<double>;

// Electronic states; index 0 is the ground state. H and A must not couple the
// ground state to the excited manifold. `reference` is subtracted from the
// excited block of H during propagation and restored as an exact phase.
struct ElectronicSystem {
  Eigen::MatrixXcd H;        // cm^-1
  Eigen::MatrixXcd mu_plus;  // excitation operator
  Eigen::MatrixXcd A;        // bath coupling
  double reference = 0.0;

  int dim() const { return int(H.rows()); }
  Eigen::MatrixXcd mu_minus() const { return mu_plus.adjoint(); }
  void validate() const;
};

// homodimer in the relative coordinate: |g>, |e1>, |e2>; A = |e1><e1| - |e2><e2|
// (to be used with the J/2 environment)
ElectronicSystem dimer(double E, double V);
// two-level system with A = |e><e|
ElectronicSystem monomer(double E);

struct Environment {
  chainmap::ChainCoefficients chain;
  int M = 1;                                      // primary chain length
  std::optional<closure::ClosureParams> closure;  // rescaled, or none for a plain chain
  int chain_dim = 6;
  int first_dim = 0;  // local dimension of site 1 (0: same as chain_dim)
  int closure_dim = 0;  // 0: same as chain_dim
};

struct Propagation {
  double dt = 0.5;  // fs
  int chi = 8;
  tn::KrylovOptions krylov{};
  bool renormalize = false;
  std::uint64_t seed = 7;  // padding of the initial product state
};

tn::ChainModel chain_model(const ElectronicSystem& s, const Environment& env);

struct Response {
  std::vector<double> t;  // fs
  std::vector<cplx> R;
};

// R(t_k) = <psi_e(0)|psi_e(t_k)>, psi_e = mu_plus |g, vac>, t_k = k dT, k = 0..n
Response linear_response(const ElectronicSystem& s, const Environment& env, const Propagation& p,
                         double dT, int n);

struct Spectrum {
  std::vector<double> omega, A;
};

struct TransformOptions {
  double taper = 0.1;           // cosine taper over this trailing fraction
  bool omega_prefactor = true;  // multiply by omega (absorption)
};

// A(w) = Re[w * int_0^T e^{i w t} R(t) dt] with trapezoid weights and taper
Spectrum absorption_spectrum(const Response& r, const std::vector<double>& omega,
                             TransformOptions opt = {});
void normalize_max(Spectrum& s);
std::vector<double> linspace(double a, double b, int n);

struct Response2D {
  std::vector<double> t1, t3;  // fs
  double T2 = 0.0;
  Eigen::MatrixXcd R;         // rows: t1, cols: t3
};

struct ThirdOrderOptions {
  int workers = 1;
  std::size_t checkpoint_budget = std::size_t(1) << 30;  // bytes kept in memory
  bool allow_spill = true;  // false: exceeding the budget is an error up front
  std::filesystem::path scratch = std::filesystem::temp_directory_path() / "mclosure-ckpt";
};

// rephasing stimulated emission R(t1, T2, t3), two-pass checkpoint scheme
Response2D third_order_se(const ElectronicSystem& s, const Environment& env, const Propagation& p,
                          double dT, int n, double T2, ThirdOrderOptions opt = {});

struct Spectrum2D {
  std::vector<double> omega1, omega3;
  Eigen::MatrixXcd S;  // rows: omega1, cols: omega3
};
// S = sum w1 w3 e^{-i w1 t1} e^{+i w3 t3} R(t1, t3)
Spectrum2D rephasing_2d(const Response2D& r, const std::vector<double>& omega1,
                        const std::vector<double>& omega3, double taper = 0.1);

// ---- cumulant expressions ----

// Delta G(t) = (1/pi) int J(w)/w^2 (e^{-iwt} - 1) dw, precomputed quadrature
class Lineshape {
 public:
  Lineshape(const specdens::SpectralDensity& J, double t_max_fs);
  cplx dG(double t_fs) const;  // G(t) - G(0)
  double lambda() const { return lambda_; }
  // g(t) = -dG(t) - i lambda t, so that a two-level response is exp(-iEt - g)
  cplx g(double t_fs) const;

 private:
  std::vector<double> x_, w_;
  double lambda_ = 0.0;
};

Response monomer_response(double E, const specdens::SpectralDensity& J, double dT, int n);
// exp(dG_half(t) + i lambda_half t) applied to dimer linear responses
cplx com_factor(const Lineshape& half, double t_fs);
// matching factor for the rephasing stimulated-emission pathway
cplx com_factor_se(const Lineshape& half, double t1, double T2, double t3);

// P int J(w)/(x - w) dw; the excision radius is scanned until the value settles
double principal_value(const specdens::SpectralDensity& J, double x);

struct DimerCumulant {
  double E_bright = 0.0, E_dark = 0.0;
  double gamma_bright = 0.0, gamma_dark = 0.0;  // population relaxation rates (cm^-1)
  double lamb_bright = 0.0, lamb_dark = 0.0;
  double weight = 0.5;  // sum_i |<e_i|E_j>|^4
};

DimerCumulant dimer_cumulant(double E, double V, const specdens::SpectralDensity& J);

struct CumulantOptions {
  double pure_dephasing = 0.0;     // cm^-1
  double sideband_prefactor = -1;  // < 0: use the exciton weight
  double t_max = 2000.0;           // fs
  double dt = 0.5;
};

Spectrum ce_absorption(double E, double V, const specdens::SpectralDensity& J,
                       const std::vector<double>& omega, CumulantOptions opt = {});

}  // namespace mclosure::spectra
