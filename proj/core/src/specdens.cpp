#include "mclosure/specdens.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>

// boost 1.74 pchip calls isnan unqualified
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>

#include "mclosure/quadrature.hpp"

namespace mclosure::specdens {
namespace {

constexpr double factorial9 = 362880.0;

template <class... F> struct overloaded : F... { using F::operator()...; };
template <class... F> overloaded(F...) -> overloaded<F...>;

std::pair<double, double> term_support(const Term& t) {
  return std::visit(overloaded{
      [](const AdolphsRenger&) { return std::pair{0.0, inf}; },
      [](const Lorentzian&) { return std::pair{0.0, inf}; },
      [](const Semicircle& s) { return std::pair{s.omega_min, s.omega_max}; },
      [](const Tabulated& t) { return std::pair{t.omega.front(), t.omega.back()}; }}, t);
}

void validate(const Term& t) {
  std::visit(overloaded{
      [](const AdolphsRenger& a) {
        if (a.c.size() != a.omega_c.size() || a.c.empty())
          throw std::invalid_argument("AdolphsRenger: c and omega_c must have equal, nonzero length");
        for (double wc : a.omega_c)
          if (!(wc > 0)) throw std::invalid_argument("AdolphsRenger: omega_c must be positive");
        for (double c : a.c)
          if (c < 0) throw std::invalid_argument("AdolphsRenger: negative amplitude");
      },
      [](const Lorentzian& l) {
        if (!(l.Gamma > 0)) throw std::invalid_argument("Lorentzian: width must be positive");
        if (l.S < 0) throw std::invalid_argument("Lorentzian: negative Huang-Rhys factor");
        if (!(l.Omega > 0)) throw std::invalid_argument("Lorentzian: centre must be positive");
      },
      [](const Semicircle& s) {
        if (!(s.omega_max > s.omega_min)) throw std::invalid_argument("Semicircle: empty support");
        if (s.prefactor < 0) throw std::invalid_argument("Semicircle: negative prefactor");
      },
      [](const Tabulated& t) {
        if (t.omega.size() != t.J.size() || t.omega.size() < 2)
          throw std::invalid_argument("Tabulated: need at least two (omega, J) pairs");
        for (std::size_t i = 1; i < t.omega.size(); ++i)
          if (!(t.omega[i] > t.omega[i - 1]))
            throw std::invalid_argument("Tabulated: omega must be strictly increasing");
        for (double j : t.J)
          if (j < 0 || !std::isfinite(j)) throw std::invalid_argument("Tabulated: negative or non-finite J");
        if (t.omega.front() < 0) throw std::invalid_argument("Tabulated: negative frequencies");
      }}, t);
}

}  // namespace

// PCHIP needs four samples; shorter tables fall back to linear interpolation,
// which is monotone-preserving as well
struct SpectralDensity::Interp {
  std::optional<boost::math::interpolators::pchip<std::vector<double>>> pchip;
  Tabulated lin;
  explicit Interp(Tabulated t) {
    if (t.omega.size() >= 4)
      pchip.emplace(std::move(t.omega), std::move(t.J));
    else
      lin = std::move(t);
  }
  double f(double w) const {
    if (pchip) return (*pchip)(w);
    auto it = std::upper_bound(lin.omega.begin(), lin.omega.end(), w);
    if (it == lin.omega.begin()) return lin.J.front();
    if (it == lin.omega.end()) return lin.J.back();
    std::size_t i = std::size_t(it - lin.omega.begin());
    double s = (w - lin.omega[i - 1]) / (lin.omega[i] - lin.omega[i - 1]);
    return (1 - s) * lin.J[i - 1] + s * lin.J[i];
  }
};

SpectralDensity::SpectralDensity(Term t) {
  validate(t);
  auto [a, b] = term_support(t);
  lo_ = a;
  hi_ = b;
  if (auto* tab = std::get_if<Tabulated>(&t))
    interp_.push_back(std::make_shared<const Interp>(*tab));
  else
    interp_.push_back(nullptr);
  terms_.push_back(std::move(t));
}

SpectralDensity& SpectralDensity::operator+=(const SpectralDensity& o) {
  if (o.empty()) return *this;
  if (empty()) return *this = o;
  if (scale_ != o.scale_ || cut_ != o.cut_)
    throw std::invalid_argument("SpectralDensity: cannot add scaled/truncated densities; scale after summing");
  terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
  interp_.insert(interp_.end(), o.interp_.begin(), o.interp_.end());
  lo_ = std::min(lo_, o.lo_);
  hi_ = std::max(hi_, o.hi_);
  return *this;
}

SpectralDensity SpectralDensity::scaled(double s) const {
  if (s < 0) throw std::invalid_argument("SpectralDensity::scaled: negative factor");
  SpectralDensity r = *this;
  r.scale_ *= s;
  return r;
}

SpectralDensity SpectralDensity::truncated(double w_max) const {
  if (!(w_max > lo_)) throw std::invalid_argument("SpectralDensity::truncated: cut-off below support");
  for (const auto& t : terms_)
    if (auto* tab = std::get_if<Tabulated>(&t); tab && w_max > tab->omega.back())
      throw std::invalid_argument("Tabulated: cut-off beyond table, extrapolation refused");
  SpectralDensity r = *this;
  r.cut_ = std::min(cut_, w_max);
  r.hi_ = std::min(hi_, w_max);
  return r;
}

double SpectralDensity::operator()(double w) const {
  if (!(w >= lo_ && w <= hi_)) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    auto [a, b] = term_support(terms_[i]);
    if (w < a || w > b) continue;
    sum += std::visit(overloaded{
        [&](const AdolphsRenger& ar) {
          double s = 0.0;
          for (std::size_t k = 0; k < ar.c.size(); ++k) {
            double wc = ar.omega_c[k];
            s += std::numbers::pi * ar.c[k] / (2.0 * factorial9) * std::pow(w, 5) /
                 std::pow(wc, 4) * std::exp(-std::sqrt(w / wc));
          }
          return s;
        },
        [&](const Lorentzian& l) {
          double G = l.Gamma, W = l.Omega;
          double num = 8.0 * l.S * G * W * (4.0 * W * W + G * G) * w;
          double den = (4.0 * (w - W) * (w - W) + G * G) * (4.0 * (w + W) * (w + W) + G * G);
          return num / den;
        },
        [&](const Semicircle& s) {
          double r = (w - s.omega_min) * (s.omega_max - w);
          return r > 0 ? s.prefactor * std::sqrt(r) / 2.0 : 0.0;
        },
        [&](const Tabulated&) { return std::max(0.0, interp_[i]->f(w)); }},
        terms_[i]);
  }
  return scale_ * sum;
}

std::vector<double> SpectralDensity::breakpoints() const {
  std::vector<double> out;
  for (const auto& t : terms_)
    std::visit(overloaded{
        [&](const AdolphsRenger& ar) {
          for (double wc : ar.omega_c) {  // maximum of w^5 exp(-sqrt(w/wc)) at 100 wc
            out.push_back(25.0 * wc);
            out.push_back(100.0 * wc);
            out.push_back(400.0 * wc);
          }
        },
        [&](const Lorentzian& l) {
          // geometric ladder so narrow peaks and their tails are both resolved
          out.push_back(l.Omega);
          for (double h = 2 * l.Gamma; h < 4 * l.Omega; h *= 4) {
            if (l.Omega - h > 0) out.push_back(l.Omega - h);
            out.push_back(l.Omega + h);
          }
        },
        [&](const Semicircle& s) {
          out.push_back(s.omega_min);
          out.push_back(0.5 * (s.omega_min + s.omega_max));
          out.push_back(s.omega_max);
        },
        [&](const Tabulated& tab) { out.insert(out.end(), tab.omega.begin(), tab.omega.end()); }},
        t);
  if (std::isfinite(hi_)) out.push_back(hi_);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  std::erase_if(out, [&](double x) { return x <= lo_ || x >= hi_; });
  return out;
}

SpectralDensity wscp_adolphs_renger() { return AdolphsRenger{{35.45, 22.15}, {0.557, 1.936}}; }

SpectralDensity wscp_lorentzians() {
  SpectralDensity J = Lorentzian{0.0173, 181.0, 20.0};
  J += Lorentzian{0.0246, 221.0, 20.0};
  J += Lorentzian{0.0182, 240.0, 20.0};
  return J;
}

SpectralDensity wscp() { return wscp_adolphs_renger() + wscp_lorentzians(); }

SpectralDensity load_tabulated(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_tabulated: cannot open " + path);
  Tabulated t;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double w, j;
    if (!(ss >> w >> j)) {
      if (t.omega.empty()) continue;  // header row
      throw std::runtime_error("load_tabulated: malformed row '" + line + "'");
    }
    t.omega.push_back(w);
    t.J.push_back(j);
  }
  return SpectralDensity(std::move(t));
}

namespace {

double integrate_over_support(const SpectralDensity& J, double a, double b,
                              const std::function<double(double)>& f) {
  a = std::max(a, J.omega_min());
  b = std::min(b, J.omega_max());
  if (!(b > a)) return 0.0;
  return quad::integrate(f, a, b, J.breakpoints());
}

}  // namespace

double reorganization_energy(const SpectralDensity& J) {
  if (J.empty()) return 0.0;
  if (J.omega_min() < 0)
    throw std::invalid_argument("reorganization_energy: support extends to negative frequencies");
  // J/w must stay integrable at the origin
  if (J.omega_min() == 0.0) {
    double h = 1e-6 * std::min(1.0, J.omega_max());
    double r1 = J(h) / h, r2 = J(h / 100) / (h / 100);
    if (r1 > 0 && r2 > 20.0 * r1)
      throw std::invalid_argument("reorganization_energy: J(w)/w is not integrable at w = 0");
  }
  return integrate_over_support(J, 0.0, inf, [&](double w) { return J(w) / (std::numbers::pi * w); });
}

double integrated_weight(const SpectralDensity& J, double lo, double hi) {
  return integrate_over_support(J, lo, hi, [&](double w) { return J(w); });
}

double support_truncation(const SpectralDensity& J, double eps, TruncationOptions opt) {
  if (!(eps > 0 && eps < 1)) throw std::invalid_argument("support_truncation: eps must lie in (0, 1)");
  if (!(opt.grid_step > 0)) throw std::invalid_argument("support_truncation: grid step must be positive");
  bool by_lambda = opt.criterion == Criterion::ReorganizationEnergy;
  auto f = [&](double w) { return by_lambda ? J(w) / (std::numbers::pi * w) : J(w); };
  double total = integrate_over_support(J, 0.0, inf, f);
  if (!(total > 0)) throw std::invalid_argument("support_truncation: density carries no weight");
  double start = std::ceil(std::max(J.omega_min(), 0.0) / opt.grid_step) * opt.grid_step;
  if (start <= J.omega_min()) start += opt.grid_step;
  // the tail share is non-increasing in the cut-off: gallop, then bisect on grid indices
  auto grid = [&](long k) { return start + double(k) * opt.grid_step; };
  auto ok = [&](long k) {
    double wc = grid(k);
    return wc >= J.omega_max() || integrate_over_support(J, wc, inf, f) / total < eps;
  };
  const long last = long(std::floor((opt.grid_max - start) / opt.grid_step));
  if (last < 0) throw std::runtime_error("support_truncation: empty search grid");
  long lo = -1, hi = 0;
  while (!ok(hi)) {
    lo = hi;
    if (hi == last) throw std::runtime_error("support_truncation: tail never drops below eps within the search grid");
    hi = std::min(last, 2 * hi + 1);
  }
  while (hi - lo > 1) {
    long mid = lo + (hi - lo) / 2;
    (ok(mid) ? hi : lo) = mid;
  }
  return std::min(grid(hi), J.omega_max());
}

}  // namespace mclosure::specdens
