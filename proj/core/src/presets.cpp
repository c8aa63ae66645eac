// Tabulated closures for N = 6, 8, 10 (unscaled units). The damping row of the
// source tables holds Re(alpha_n) = -Gamma_n/2 (negative entries); only that
// reading reproduces C_sc, so the dissipator rates are -2 * entry.
#include <stdexcept>
#include <string>

#include "mclosure/closure.hpp"

namespace mclosure::closure {
namespace {

ClosureParams make(std::vector<double> G, std::vector<double> re, std::vector<double> im,
                   std::vector<double> g) {
  ClosureParams p;
  p.N = int(G.size());
  for (double a : G) p.Gamma.push_back(-2.0 * a);
  p.Omega.assign(p.N, 0.0);
  p.g = std::move(g);
  for (int n = 0; n < p.N; ++n) p.c.emplace_back(re[n], im[n]);
  p.validate();
  return p;
}

}  // namespace

std::vector<int> preset_sizes() { return {6, 8, 10}; }

ClosureParams preset(int N) {
  switch (N) {
    case 6:
      return make({-1.60e-2, -1.48e-10, -2.18e0, -1.44e-11, -4.79e-3, -1.57e-9},
                  {2.74e-5, -4.79e-1, 6.34e-6, 4.82e-1, -1.40e-6, 3.83e-1},
                  {-1.11e-5, 3.99e-1, -3.53e-6, -3.84e-1, 2.45e-6, -2.93e-1},
                  {0.79, -0.813, -1.08, -0.68, 0.81});
    case 8:
      return make({-1.06e-9, -1.64e-10, -2.70e-11, -2.98e0, -1.02e-9, -3.61e-9, -3.53e-11, -3.73e-11},
                  {-6.58e-2, -1.31e-1, -1.79e-1, 1.92e-2, 9.77e-2, -1.36e-1, -1.06e-1, -2.91e-1},
                  {-2.48e-1, 3.47e-2, -6.75e-1, -5.08e-3, 3.68e-1, 3.60e-2, -4.01e-1, 7.73e-2},
                  {-0.89, 0.41, -1.00, -1.49, -1.04, -0.45, 0.85});
    case 10:
      return make({-3.43e-1, -8.67e-5, -2.73e0, -7.09e-1, -3.24e-6, -4.50e-7, -2.79e-6, -9.48e-5,
                   -1.37e-3, -5.95e-6},
                  {-1.32e-3, 3.32e-3, -2.40e-3, 1.94e-2, -3.32e-2, 1.04e-1, 1.21e-1, 1.65e-1,
                   -1.21e-1, 4.72e-2},
                  {4.62e-4, 5.49e-4, -1.48e-3, -3.55e-2, -1.20e-2, -3.53e-1, 2.08e-2, -8.17e-1,
                   -4.45e-3, -3.67e-1},
                  {1.13, 1.05, -1.08, 0.83, -0.60, -0.51, 0.68, 0.16, -0.95});
    default:
      throw std::invalid_argument("preset: no tabulated closure for N = " + std::to_string(N) +
                                  " (available: 6, 8, 10)");
  }
}

}  // namespace mclosure::closure
