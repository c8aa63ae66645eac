#include "mclosure/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace mclosure::quad {

Rule gauss_legendre(int p) {
  if (p < 1) throw std::invalid_argument("gauss_legendre: need p >= 1");
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(p, p);
  for (int k = 1; k < p; ++k) {
    double b = k / std::sqrt(4.0 * k * k - 1.0);
    J(k, k - 1) = J(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  Rule r;
  r.x.resize(p);
  r.w.resize(p);
  for (int i = 0; i < p; ++i) {
    r.x[i] = es.eigenvalues()(i);
    double v = es.eigenvectors()(0, i);
    r.w[i] = 2.0 * v * v;
  }
  return r;
}

Rule composite_gauss_legendre(double a, double b, int panels, int p) {
  if (!(b > a) || panels < 1) throw std::invalid_argument("composite_gauss_legendre: bad interval");
  Rule g = gauss_legendre(p), r;
  r.x.reserve(std::size_t(panels) * p);
  r.w.reserve(std::size_t(panels) * p);
  double h = (b - a) / panels;
  for (int k = 0; k < panels; ++k) {
    double lo = a + k * h;
    for (int i = 0; i < p; ++i) {
      r.x.push_back(lo + 0.5 * h * (g.x[i] + 1.0));
      r.w.push_back(0.5 * h * g.w[i]);
    }
  }
  return r;
}

Rule cosine_mapped_gauss_legendre(double a, double b, int panels, int p) {
  Rule th = composite_gauss_legendre(0.0, std::numbers::pi, panels, p), r;
  r.x.resize(th.size());
  r.w.resize(th.size());
  for (std::size_t i = 0; i < th.size(); ++i) {
    r.x[i] = a + 0.5 * (b - a) * (1.0 - std::cos(th.x[i]));
    r.w[i] = th.w[i] * 0.5 * (b - a) * std::sin(th.x[i]);
  }
  return r;
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 std::vector<double> breaks, AdaptiveOptions opt) {
  using boost::math::quadrature::gauss_kronrod;
  if (b <= a) return 0.0;
  std::vector<double> pts{a};
  std::sort(breaks.begin(), breaks.end());
  for (double x : breaks)
    if (x > pts.back() && x < b) pts.push_back(x);
  pts.push_back(b);
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    double err = 0.0;
    sum += gauss_kronrod<double, 61>::integrate(f, pts[k], pts[k + 1], opt.max_depth,
                                                opt.rel_tol, &err);
  }
  return sum;
}

}  // namespace mclosure::quad
