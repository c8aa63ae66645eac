// specdens.hpp - spectral density models, reorganization energy, support cut
#pragma once

#include <limits>
#include <memory>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

namespace mclosure::specdens {

inline constexpr double inf = std::numeric_limits<double>::infinity();

// sum_k pi*c_k/(2*9!) * w^5/wc_k^4 * exp(-sqrt(w/wc_k)); lambda_k = c_k*wc_k
struct AdolphsRenger {
  std::vector<double> c;        // dimensionless
  std::vector<double> omega_c;  // cm^-1
};

// underdamped mode with Huang-Rhys factor S, centre Omega, width Gamma
struct Lorentzian {
  double S = 0.0;
  double Omega = 0.0;  // cm^-1
  double Gamma = 0.0;  // cm^-1
};

// prefactor * sqrt((w - w_min)(w_max - w)) / 2 on [w_min, w_max]
struct Semicircle {
  double omega_min = 0.0, omega_max = 0.0;
  double prefactor = 1.0;
};

// monotone cubic (PCHIP) through samples; refuses to extrapolate
struct Tabulated {
  std::vector<double> omega, J;
};

using Term = std::variant<AdolphsRenger, Lorentzian, Semicircle, Tabulated>;

class SpectralDensity {
 public:
  SpectralDensity() = default;
  SpectralDensity(Term t);  // NOLINT: implicit on purpose
  template <class T>
    requires std::is_constructible_v<Term, T> && (!std::is_same_v<std::decay_t<T>, Term>)
  SpectralDensity(T t) : SpectralDensity(Term(std::move(t))) {}  // NOLINT

  SpectralDensity& operator+=(const SpectralDensity& other);
  friend SpectralDensity operator+(SpectralDensity a, const SpectralDensity& b) { return a += b; }

  // J(w) * s; used for the relative-coordinate density J/2
  SpectralDensity scaled(double s) const;
  // the same density restricted to [omega_min, w_max]
  SpectralDensity truncated(double w_max) const;

  double operator()(double w) const;

  double omega_min() const { return lo_; }
  double omega_max() const { return hi_; }
  double scale() const { return scale_; }
  bool empty() const { return terms_.empty(); }
  // peak positions and kinks, handy as quadrature breakpoints
  std::vector<double> breakpoints() const;
  const std::vector<Term>& terms() const { return terms_; }

 private:
  struct Interp;
  std::vector<Term> terms_;
  std::vector<std::shared_ptr<const Interp>> interp_;  // one slot per term
  double scale_ = 1.0;
  double lo_ = inf, hi_ = -inf;
  double cut_ = inf;
};

// the structured environment used throughout the examples
SpectralDensity wscp();
SpectralDensity wscp_adolphs_renger();
SpectralDensity wscp_lorentzians();

// two-column CSV (omega, J); '#' lines and a non-numeric header are skipped
SpectralDensity load_tabulated(const std::string& path);

// lambda = int J(w)/(pi w) dw over the support
double reorganization_energy(const SpectralDensity& J);
// int_{lo}^{hi} J(w) dw
double integrated_weight(const SpectralDensity& J, double lo, double hi);

enum class Criterion { ReorganizationEnergy, DiscardedWeight };

struct TruncationOptions {
  double grid_step = 100.0;  // candidate cut-offs are multiples of this
  double grid_max = 1e6;
  Criterion criterion = Criterion::ReorganizationEnergy;
};

// smallest grid cut-off w_max with relative discarded share below eps
double support_truncation(const SpectralDensity& J, double eps, TruncationOptions opt = {});

}  // namespace mclosure::specdens
