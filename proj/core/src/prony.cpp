// Approximate Prony: Hankel singular vector -> polynomial roots -> least squares.
#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "mclosure/closure.hpp"

namespace mclosure::closure {
namespace {

struct Hankel {
  Eigen::MatrixXcd V;  // right singular vectors, columns by decreasing sigma
  Eigen::VectorXd sigma;
  bool real = false;
};

// (S - P) x (P + 1) Hankel matrix of the samples; P is the pencil dimension
Hankel hankel_svd(const std::vector<cplx>& f, int P) {
  const int S = int(f.size()), m = S - P;
  Hankel h;
  h.real = std::all_of(f.begin(), f.end(), [](cplx z) { return z.imag() == 0.0; });
  if (h.real) {
    Eigen::MatrixXd H(m, P + 1);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j <= P; ++j) H(i, j) = f[i + j].real();
    Eigen::BDCSVD<Eigen::MatrixXd> svd(H, Eigen::ComputeThinV);
    h.V = svd.matrixV().cast<cplx>();
    h.sigma = svd.singularValues();
  } else {
    Eigen::MatrixXcd H(m, P + 1);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j <= P; ++j) H(i, j) = f[i + j];
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(H, Eigen::ComputeThinV);
    h.V = svd.matrixV();
    h.sigma = svd.singularValues();
  }
  return h;
}

// roots of sum_i u_i z^i from the companion matrix
std::vector<cplx> poly_roots(const Eigen::VectorXcd& u, bool real) {
  int deg = int(u.size()) - 1;
  while (deg > 0 && std::abs(u[deg]) < 1e-300) --deg;
  if (deg < 1) return {};
  if (real) {
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(deg, deg);
    for (int i = 1; i < deg; ++i) C(i, i - 1) = 1.0;
    for (int i = 0; i < deg; ++i) C(i, deg - 1) = -u[i].real() / u[deg].real();
    Eigen::EigenSolver<Eigen::MatrixXd> es(C, false);
    return {es.eigenvalues().data(), es.eigenvalues().data() + deg};
  }
  Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(deg, deg);
  for (int i = 1; i < deg; ++i) C(i, i - 1) = 1.0;
  for (int i = 0; i < deg; ++i) C(i, deg - 1) = -u[i] / u[deg];
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(C, false);
  return {es.eigenvalues().data(), es.eigenvalues().data() + deg};
}

Eigen::VectorXcd weights(const std::vector<cplx>& f, const std::vector<cplx>& z) {
  Eigen::MatrixXcd A(f.size(), z.size());
  for (std::size_t j = 0; j < z.size(); ++j) {
    cplx p = 1.0;
    for (std::size_t k = 0; k < f.size(); ++k) {
      A(k, j) = p;
      p *= z[j];
    }
  }
  Eigen::VectorXcd b = Eigen::Map<const Eigen::VectorXcd>(f.data(), f.size());
  return A.colPivHouseholderQr().solve(b);
}

double max_residual(const std::vector<cplx>& f, const std::vector<cplx>& z, const Eigen::VectorXcd& w) {
  double r = 0.0;
  std::vector<cplx> p(z.size(), 1.0);
  for (std::size_t k = 0; k < f.size(); ++k) {
    cplx s = 0.0;
    for (std::size_t j = 0; j < z.size(); ++j) {
      s += w[j] * p[j];
      p[j] *= z[j];
    }
    r = std::max(r, std::abs(s - f[k]));
  }
  return r;
}

PronyResult fit_from(const std::vector<cplx>& f, double dt, int N, const Hankel& h, bool quiet) {
  int P = int(h.V.cols()) - 1;
  if (N < 1 || N > P) throw std::invalid_argument("prony_fit: N must lie in [1, pencil size]");
  std::vector<cplx> roots = poly_roots(h.V.col(N), h.real);
  // nodes inside the unit disk carry the signal; spurious ones sit near |z| = 1
  std::sort(roots.begin(), roots.end(), [](cplx a, cplx b) { return std::abs(a) < std::abs(b); });
  std::vector<cplx> cand;
  for (cplx z : roots)
    if (std::abs(z) < 1.0) cand.push_back(z);
  PronyResult res;
  if (int(cand.size()) > N) {
    // keep the N nodes with the largest contribution over the window
    Eigen::VectorXcd w = weights(f, cand);
    std::vector<std::size_t> idx(cand.size());
    std::iota(idx.begin(), idx.end(), 0);
    auto weight = [&](std::size_t j) {
      double a = std::abs(cand[j]);
      double n = double(f.size());
      double geo = a < 1.0 ? (1.0 - std::pow(a, 2 * n)) / (1.0 - a * a) : n;
      return std::abs(w[j]) * std::abs(w[j]) * geo;
    };
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return weight(a) > weight(b); });
    std::vector<cplx> keep;
    for (int j = 0; j < N; ++j) keep.push_back(cand[idx[j]]);
    cand = keep;
  }
  for (std::size_t j = 0; int(cand.size()) < N && j < roots.size(); ++j) {
    cplx z = roots[j];
    if (std::abs(z) < 1.0) continue;
    cand.push_back(z / std::abs(z));
    ++res.clamped_roots;
  }
  if (res.clamped_roots > 0 && !quiet)
    std::cerr << "prony_fit: warning: " << res.clamped_roots
              << " root(s) outside the unit disk clamped to the boundary\n";
  Eigen::VectorXcd w = weights(f, cand);
  res.max_residual = max_residual(f, cand, w);
  for (int j = 0; j < N; ++j) {
    res.fit.w.push_back(w[j]);
    res.fit.lambda.push_back(std::log(cand[j]) / dt);
  }
  return res;
}

// pencil sizes tried for each fit; the square Hankel matrix is one of them.
// For slowly decaying oscillatory data a moderate pencil often fits better.
std::vector<int> pencils(int S, int N) {
  std::vector<int> out;
  int square = (S - 1) / 2;
  for (int P : {square, 200, 100, 60, 40, 30, 2 * N + 1})
    if (P >= N + 1 && P <= square && std::find(out.begin(), out.end(), P) == out.end()) out.push_back(P);
  return out;
}

PronyResult best_fit(const std::vector<cplx>& f, double dt, int N) {
  if (f.size() < std::size_t(2 * N + 1))
    throw std::invalid_argument("prony_fit: need at least 2N+1 samples");
  PronyResult best;
  bool have = false;
  for (int P : pencils(int(f.size()), N)) {
    PronyResult r = fit_from(f, dt, N, hankel_svd(f, P), true);
    // prefer fits without clamped roots
    bool better = !have || (r.clamped_roots < best.clamped_roots) ||
                  (r.clamped_roots == best.clamped_roots && r.max_residual < best.max_residual);
    if (better) {
      best = r;
      have = true;
    }
  }
  if (best.clamped_roots > 0)
    std::cerr << "prony_fit: warning: " << best.clamped_roots
              << " root(s) outside the unit disk clamped to the boundary\n";
  return best;
}

}  // namespace

PronyResult prony_fit(const std::vector<cplx>& samples, double dt, int N) {
  if (!(dt > 0)) throw std::invalid_argument("prony_fit: dt must be positive");
  if (N < 1) throw std::invalid_argument("prony_fit: N must be positive");
  return best_fit(samples, dt, N);
}

PronyResult prony_fit(double (*fn)(double), int N, PronyOptions opt) {
  if (!(opt.dt > 0) || !(opt.t_max > opt.dt)) throw std::invalid_argument("prony_fit: bad sampling window");
  std::vector<cplx> f;
  int K = int(std::lround(opt.t_max / opt.dt));
  for (int k = 0; k <= K; ++k) f.emplace_back(fn(k * opt.dt), 0.0);
  return prony_fit(f, opt.dt, N);
}

PronyResult prony_fit_tolerance(const std::vector<cplx>& samples, double dt, double target, int N_max) {
  if (!(dt > 0)) throw std::invalid_argument("prony_fit: dt must be positive");
  PronyResult best;
  bool have = false;
  int top = std::min<int>(N_max, int(samples.size() - 1) / 2);
  for (int N = 1; N <= top; ++N) {
    PronyResult r = best_fit(samples, dt, N);
    if (!have || r.max_residual < best.max_residual) {
      best = r;
      have = true;
    }
    if (r.max_residual < target) return r;
  }
  std::cerr << "prony_fit: warning: target residual " << target << " not reached with N <= " << top
            << "; returning N = " << best.fit.size() << "\n";
  return best;
}

}  // namespace mclosure::closure
