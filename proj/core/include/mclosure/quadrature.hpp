// quadrature.hpp - Gauss-Legendre panels and adaptive Gauss-Kronrod wrappers
#pragma once

#include <functional>
#include <vector>

namespace mclosure::quad {

struct Rule {
  std::vector<double> x, w;
  std::size_t size() const { return x.size(); }
};

// p-point Gauss-Legendre rule on [-1, 1] (Golub-Welsch)
Rule gauss_legendre(int p);

// composite rule: `panels` equal panels on [a, b], p nodes each
Rule composite_gauss_legendre(double a, double b, int panels, int p);

// composite rule on [a, b] after the substitution x = a + (b-a)(1-cos th)/2.
// Nodes cluster quadratically at both ends, which tames square-root edges
// and endpoint kinks.
Rule cosine_mapped_gauss_legendre(double a, double b, int panels, int p);

struct AdaptiveOptions {
  double rel_tol = 1e-12;
  unsigned max_depth = 18;
};

// adaptive G-K 61 on [a, b]; b may be +infinity. `breaks` are interior points
// where the integrand has structure (peaks, kinks); they split the domain.
double integrate(const std::function<double(double)>& f, double a, double b,
                 std::vector<double> breaks = {}, AdaptiveOptions opt = {});

}  // namespace mclosure::quad
