// closure.hpp - Markovian closure of a semi-infinite asymptotic chain
//
// The residual chain beyond the fingerprint is replaced by N damped
// oscillators (a tridiagonal "surrogate") whose correlation function mimics
// the semicircle TTCF. Unscaled parameters live in the dimensionless units of
// C_sc(t) = 2 J_1(t)/t; rescale() maps them onto a physical band (Omega, K).
#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "mclosure/chainmap.hpp"

namespace mclosure::closure {

using cplx = std::complex<double>;

// 2 J_1(t)/t (dimensionless time)
double semicircle_cf(double t);
// K^2 exp(-i Omega t) C_sc(2 K t), t in fs
cplx asymptotic_cf(double Omega, double K, double t_fs);

// sum_k w_k exp(lambda_k t)
struct ExpSum {
  std::vector<cplx> w, lambda;
  int size() const { return int(w.size()); }
  cplx operator()(double t) const;
};

struct PronyOptions {
  double dt = 0.25;
  double t_max = 200.0;
};

struct PronyResult {
  ExpSum fit;
  double max_residual = 0.0;  // over the sampling window
  int clamped_roots = 0;      // roots pushed back onto the unit circle
};

// approximate Prony on uniform samples f(k dt), k = 0..2L
PronyResult prony_fit(const std::vector<cplx>& samples, double dt, int N);
PronyResult prony_fit(double (*f)(double), int N, PronyOptions opt = {});
// smallest N <= N_max reaching the target residual (or the best found)
PronyResult prony_fit_tolerance(const std::vector<cplx>& samples, double dt, double target,
                                int N_max);

struct ClosureParams {
  int N = 0;
  std::vector<double> Gamma;  // damping rates (sign is irrelevant, |Gamma| is used)
  std::vector<double> Omega;  // on-site frequencies
  std::vector<double> g;      // nearest-neighbour couplings, N-1 entries
  std::vector<cplx> c;        // couplings to the primary chain
  bool rescaled = false;
  chainmap::Asymptotics band;  // meaningful only when rescaled

  void validate() const;
};

// tridiagonal generator: diag -|Gamma|/2 - i Omega, off-diagonal -i g
Eigen::MatrixXcd generator(const ClosureParams& p);

// sum_mn c_m c_n^* (e^{M t})_mn; t dimensionless, or fs when rescaled
cplx closure_cf(const ClosureParams& p, double t);

// complex-orthogonal modes: e^{Mt} = U e^{Lambda t} U^T
struct Modes {
  std::vector<cplx> lambda, w;
};
Modes closure_modes(const ClosureParams& p);

struct FitOptions {
  std::uint64_t seed = 1;
  int random_starts = 6;
  int nelder_mead_iterations = 4000;
  int bfgs_iterations = 200;
  bool seed_with_presets = true;
  int workers = 1;  // start points refined concurrently; the result does not depend on it
  // least-squares refinement of |C_aux - target| on [0, polish_window] after
  // the eigenvalue/weight stage; the Prony sum itself is usually not exactly
  // realizable by a damped chain (Re sum w lambda > 0)
  bool polish = true;
  double polish_window = 100.0;
  double polish_dt = 0.25;
  // function the polish stage matches (e.g. C_sc itself); empty -> the target sum
  std::function<cplx(double)> polish_reference;
};

struct FitResult {
  ClosureParams params;
  double cost = 0.0;          // eigenvalue/weight cost of the returned parameters
  double max_residual = 0.0;  // |C_target - C_aux| over [0, 100]
};

// sum_n |lambda_n - lambda'_n| + |w_n - w'_n| after optimal pairing
double tso_cost(const ClosureParams& p, const ExpSum& target);
FitResult tso_fit(const ExpSum& target, int N, FitOptions opt = {});

// tabulated fits for N in {6, 8, 10}
ClosureParams preset(int N);
std::vector<int> preset_sizes();

ClosureParams rescale(const ClosureParams& p, const chainmap::Asymptotics& band);

// (1/4) int C(t) e^{i w t} dt with C(-t) = C(t)^*, evaluated through the
// resolvent of the generator (exact for any horizon)
double aux_spectral_density(const ClosureParams& p, double w);

// <B(t) B^dag(0)> from the vectorized Lindblad equation of the closure in the
// zero/one-excitation space, with B = sum_n c_n d_n. Independent of generator().
cplx lindblad_cf(const ClosureParams& p, double t);

}  // namespace mclosure::closure
