// Fitting the tridiagonal surrogate to a target exponential sum.
#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <thread>

#include "mclosure/closure.hpp"

namespace mclosure::closure {
namespace {

constexpr double big = 1e30;

// min-cost perfect matching, rows -> columns (potentials / shortest augmenting path)
std::vector<int> hungarian(const Eigen::MatrixXd& a) {
  const int n = int(a.rows());
  std::vector<double> u(n + 1), v(n + 1);
  std::vector<int> p(n + 1), way(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, std::numeric_limits<double>::infinity());
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      int i0 = p[j0], j1 = 0;
      double delta = std::numeric_limits<double>::infinity();
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> match(n);
  for (int j = 1; j <= n; ++j) match[p[j] - 1] = j - 1;
  return match;
}

int unknowns(int N) { return 4 * N - 1; }

ClosureParams unpack(const Eigen::VectorXd& x, int N) {
  ClosureParams p;
  p.N = N;
  p.Gamma.assign(x.data(), x.data() + N);
  p.Omega.assign(N, 0.0);
  p.g.assign(x.data() + N, x.data() + 2 * N - 1);
  for (int n = 0; n < N; ++n) p.c.emplace_back(x[2 * N - 1 + n], x[3 * N - 1 + n]);
  return p;
}

Eigen::VectorXd pack(const ClosureParams& p) {
  Eigen::VectorXd x(unknowns(p.N));
  for (int n = 0; n < p.N; ++n) {
    x[n] = std::abs(p.Gamma[n]);
    x[2 * p.N - 1 + n] = p.c[n].real();
    x[3 * p.N - 1 + n] = p.c[n].imag();
  }
  for (int n = 0; n + 1 < p.N; ++n) x[p.N + n] = p.g[n];
  return x;
}

double cost_once(const ClosureParams& p, const ExpSum& target) {
  Modes m = closure_modes(p);
  const int N = p.N;
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j)
      if (std::abs(m.lambda[i] - m.lambda[j]) < 1e-10)
        throw std::runtime_error("tso_cost: degenerate closure eigenvalues");
  Eigen::MatrixXd D(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) D(i, j) = std::abs(target.lambda[i] - m.lambda[j]);
  std::vector<int> match = hungarian(D);
  double s = 0.0;
  for (int i = 0; i < N; ++i) s += D(i, match[i]) + std::abs(target.w[i] - m.w[match[i]]);
  return s;
}

// stacked real residuals after pairing: Re/Im of (lambda - lambda'), (w - w')
bool residuals(const Eigen::VectorXd& x, int N, const ExpSum& target, Eigen::VectorXd& r) {
  try {
    Modes m = closure_modes(unpack(x, N));
    Eigen::MatrixXd D(N, N);
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) D(i, j) = std::abs(target.lambda[i] - m.lambda[j]);
    std::vector<int> match = hungarian(D);
    r.resize(4 * N);
    for (int i = 0; i < N; ++i) {
      cplx dl = target.lambda[i] - m.lambda[match[i]], dw = target.w[i] - m.w[match[i]];
      r.segment(4 * i, 4) << dl.real(), dl.imag(), dw.real(), dw.imag();
    }
    return r.allFinite();
  } catch (const std::exception&) {
    return false;
  }
}

// Levenberg-Marquardt on the squared residuals; smooth where the cost is not
template <class R>
Eigen::VectorXd levenberg_marquardt(Eigen::VectorXd x, R&& residuals, int iters) {
  Eigen::VectorXd r, rn, rp;
  if (!residuals(x, r)) return x;
  double mu = 1e-3, f = r.squaredNorm();
  const int n = int(x.size());
  Eigen::MatrixXd Jm(r.size(), n);
  for (int it = 0; it < iters && f > 1e-30; ++it) {
    bool okJ = true;
    for (int j = 0; j < n && okJ; ++j) {
      double h = 1e-7 * std::max(1.0, std::abs(x[j]));
      Eigen::VectorXd y = x;
      y[j] += h;
      okJ = residuals(y, rp);
      if (okJ) Jm.col(j) = (rp - r) / h;
    }
    if (!okJ) break;
    Eigen::MatrixXd A = Jm.transpose() * Jm;
    Eigen::VectorXd g = Jm.transpose() * r;
    bool improved = false;
    for (int k = 0; k < 12; ++k) {
      Eigen::MatrixXd Ad = A;
      Ad.diagonal() += mu * (A.diagonal().array() + 1e-12).matrix();
      Eigen::VectorXd xn = x - Ad.ldlt().solve(g);
      if (residuals(xn, rn) && rn.squaredNorm() < f) {
        x = xn;
        r = rn;
        double fn = rn.squaredNorm();
        improved = f - fn > 1e-14 * f;
        f = fn;
        mu = std::max(mu / 3.0, 1e-12);
        break;
      }
      mu *= 4.0;
    }
    if (!improved) break;
  }
  return x;
}

// time-domain residuals Re/Im (C_aux(t_k) - target(t_k))
bool time_residuals(const Eigen::VectorXd& x, int N, const std::vector<double>& t,
                    const std::vector<cplx>& y, Eigen::VectorXd& r) {
  try {
    Modes m = closure_modes(unpack(x, N));
    r.resize(2 * std::ptrdiff_t(t.size()));
    for (std::size_t k = 0; k < t.size(); ++k) {
      cplx c = 0.0;
      for (int j = 0; j < N; ++j) c += m.w[j] * std::exp(m.lambda[j] * t[k]);
      c -= y[k];
      r[2 * k] = c.real();
      r[2 * k + 1] = c.imag();
    }
    return r.allFinite();
  } catch (const std::exception&) {
    return false;
  }
}

double safe_cost(const Eigen::VectorXd& x, int N, const ExpSum& t) {
  try {
    double c = tso_cost(unpack(x, N), t);
    return std::isfinite(c) ? c : big;
  } catch (const std::exception&) {
    return big;
  }
}

struct NMResult {
  Eigen::VectorXd x;
  double f;
};

template <class F>
NMResult nelder_mead(F&& f, Eigen::VectorXd x0, double step, int iters) {
  const int n = int(x0.size());
  std::vector<Eigen::VectorXd> s(n + 1, x0);
  std::vector<double> fs(n + 1);
  for (int i = 0; i < n; ++i) s[i + 1][i] += (std::abs(x0[i]) > 1e-3 ? 0.1 * x0[i] : step);
  for (int i = 0; i <= n; ++i) fs[i] = f(s[i]);
  std::vector<int> idx(n + 1);
  for (int it = 0; it < iters; ++it) {
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fs[a] < fs[b]; });
    int best = idx[0], worst = idx[n], second = idx[n - 1];
    if (std::abs(fs[worst] - fs[best]) <= 1e-13 * (std::abs(fs[best]) + 1e-13)) break;
    Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
    for (int i = 0; i <= n; ++i)
      if (i != worst) c += s[i];
    c /= n;
    Eigen::VectorXd xr = c + (c - s[worst]);
    double fr = f(xr);
    if (fr < fs[best]) {
      Eigen::VectorXd xe = c + 2.0 * (c - s[worst]);
      double fe = f(xe);
      if (fe < fr) { s[worst] = xe; fs[worst] = fe; }
      else { s[worst] = xr; fs[worst] = fr; }
    } else if (fr < fs[second]) {
      s[worst] = xr;
      fs[worst] = fr;
    } else {
      bool outside = fr < fs[worst];
      Eigen::VectorXd xc = outside ? Eigen::VectorXd(c + 0.5 * (xr - c)) : Eigen::VectorXd(c + 0.5 * (s[worst] - c));
      double fc = f(xc);
      if (fc < std::min(fr, fs[worst])) {
        s[worst] = xc;
        fs[worst] = fc;
      } else {
        for (int i = 0; i <= n; ++i) {
          if (i == best) continue;
          s[i] = s[best] + 0.5 * (s[i] - s[best]);
          fs[i] = f(s[i]);
        }
      }
    }
  }
  int b = int(std::min_element(fs.begin(), fs.end()) - fs.begin());
  return {s[b], fs[b]};
}

template <class F>
NMResult bfgs(F&& f, Eigen::VectorXd x, double fx, int iters) {
  const int n = int(x.size());
  auto grad = [&](const Eigen::VectorXd& y) {
    Eigen::VectorXd g(n);
    for (int i = 0; i < n; ++i) {
      double h = 1e-7 * std::max(1.0, std::abs(y[i]));
      Eigen::VectorXd a = y, b = y;
      a[i] += h;
      b[i] -= h;
      g[i] = (f(a) - f(b)) / (2 * h);
    }
    return g;
  };
  Eigen::MatrixXd Hinv = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd g = grad(x);
  for (int it = 0; it < iters; ++it) {
    Eigen::VectorXd d = -Hinv * g;
    if (g.dot(d) >= 0) {
      Hinv.setIdentity();
      d = -g;
    }
    double a = 1.0, fn = fx;
    Eigen::VectorXd xn = x;
    bool ok = false;
    for (int ls = 0; ls < 30; ++ls, a *= 0.5) {
      xn = x + a * d;
      fn = f(xn);
      if (fn < fx + 1e-4 * a * g.dot(d)) {
        ok = true;
        break;
      }
    }
    if (!ok) break;
    Eigen::VectorXd gn = grad(xn), sv = xn - x, yv = gn - g;
    double sy = sv.dot(yv);
    if (sy > 1e-14) {
      Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
      Hinv = (I - sv * yv.transpose() / sy) * Hinv * (I - yv * sv.transpose() / sy) +
             sv * sv.transpose() / sy;
    }
    x = xn;
    g = gn;
    if (fx - fn < 1e-14 * (1 + fx)) {
      fx = fn;
      break;
    }
    fx = fn;
  }
  return {x, fx};
}

// runs body(0..n-1) on up to `workers` threads; the first exception is rethrown
void parallel_for(int n, int workers, const std::function<void(int)>& body) {
  int nw = std::max(1, std::min(workers, n));
  if (nw == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (int w = 0; w < nw; ++w)
    pool.emplace_back([&] {
      for (int i; (i = next++) < n;) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!err) err = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace

double tso_cost(const ClosureParams& p, const ExpSum& target) {
  p.validate();
  if (target.size() != p.N)
    throw std::invalid_argument("tso_cost: target has " + std::to_string(target.size()) +
                                " terms, closure has " + std::to_string(p.N));
  ClosureParams q = p;
  for (int attempt = 0;; ++attempt) {
    try {
      return cost_once(q, target);
    } catch (const std::runtime_error&) {
      if (attempt >= 3) throw;
      // break an accidental degeneracy
      for (int n = 0; n < q.N; ++n) q.Gamma[n] = std::abs(q.Gamma[n]) * (1.0 + 1e-8 * (n + 1)) + 1e-12;
      for (int n = 0; n + 1 < q.N; ++n) q.g[n] *= 1.0 + 1e-8 * (n + 2);
    }
  }
}

FitResult tso_fit(const ExpSum& target, int N, FitOptions opt) {
  if (N < 1) throw std::invalid_argument("tso_fit: N must be positive");
  if (target.size() != N) throw std::invalid_argument("tso_fit: target size must equal N");
  auto f = [&](const Eigen::VectorXd& x) { return safe_cost(x, N, target); };

  std::vector<Eigen::VectorXd> starts;
  std::optional<Eigen::VectorXd> preset_start;
  if (opt.seed_with_presets) {
    auto sizes = preset_sizes();
    if (std::find(sizes.begin(), sizes.end(), N) != sizes.end()) {
      starts.push_back(pack(preset(N)));
      preset_start = starts.back();
    }
  }
  if (N == 1 && !target.lambda.empty()) {  // closed form: Gamma = -2 Re(lambda), c = sqrt(w)
    ClosureParams p;
    p.N = 1;
    p.Gamma = {-2.0 * target.lambda[0].real()};
    p.Omega = {0.0};
    p.c = {std::sqrt(target.w[0])};
    starts.push_back(pack(p));
  }
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> logG(-3.0, 0.5), gu(-1.5, 1.5);
  std::normal_distribution<double> cn(0.0, 0.4);
  for (int s = 0; s < opt.random_starts; ++s) {
    Eigen::VectorXd x(unknowns(N));
    for (int n = 0; n < N; ++n) x[n] = std::pow(10.0, logG(rng));
    for (int n = 0; n + 1 < N; ++n) x[N + n] = gu(rng);
    for (int n = 0; n < 2 * N; ++n) x[2 * N - 1 + n] = cn(rng);
    starts.push_back(x);
  }
  if (starts.empty()) throw std::invalid_argument("tso_fit: no starting points");

  auto refine = [&](const Eigen::VectorXd& x0) {
    NMResult r = nelder_mead(f, x0, 0.1, opt.nelder_mead_iterations);
    // restart once from the optimum with a fresh simplex
    r = nelder_mead(f, r.x, 0.02, opt.nelder_mead_iterations);
    if (opt.bfgs_iterations > 0) {
      NMResult q = bfgs(f, r.x, r.f, opt.bfgs_iterations);
      if (q.f < r.f) r = q;
      Eigen::VectorXd y = levenberg_marquardt(
          r.x, [&](const Eigen::VectorXd& z, Eigen::VectorXd& res) { return residuals(z, N, target, res); },
          opt.bfgs_iterations);
      double fy = f(y);
      if (fy < r.f) r = {y, fy};
    }
    return r;
  };
  // starts are independent; results are reduced in start order, so the
  // outcome does not depend on the worker count
  std::vector<NMResult> finished(starts.size(), NMResult{starts.front(), big});
  parallel_for(int(starts.size()), opt.workers, [&](int i) { finished[i] = refine(starts[i]); });
  NMResult best{starts.front(), big};
  for (const auto& r : finished)
    if (r.f < best.f) best = r;
  if (opt.polish) {
    std::vector<double> ts;
    std::vector<cplx> ys;
    for (double t = 0.0; t <= opt.polish_window + 1e-9; t += opt.polish_dt) {
      ts.push_back(t);
      ys.push_back(opt.polish_reference ? opt.polish_reference(t) : target(t));
    }
    auto res = [&](const Eigen::VectorXd& z, Eigen::VectorXd& r) { return time_residuals(z, N, ts, ys, r); };
    // polish the best few candidates; the lowest eigenvalue cost need not give
    // the lowest time-domain residual
    std::sort(finished.begin(), finished.end(), [](const NMResult& a, const NMResult& b) { return a.f < b.f; });
    double best_err = big;
    std::vector<Eigen::VectorXd> cand;
    for (std::size_t i = 0; i < std::min<std::size_t>(finished.size(), 3); ++i) cand.push_back(finished[i].x);
    if (preset_start) cand.push_back(*preset_start);
    std::vector<Eigen::VectorXd> ys_fit(cand.size());
    std::vector<double> errs(cand.size(), big);
    parallel_for(int(cand.size()), opt.workers, [&](int i) {
      ys_fit[i] = levenberg_marquardt(cand[i], res, 4 * opt.bfgs_iterations);
      Eigen::VectorXd r;
      errs[i] = res(ys_fit[i], r) ? r.squaredNorm() : big;
    });
    for (std::size_t i = 0; i < cand.size(); ++i)
      if (errs[i] < best_err) {
        best_err = errs[i];
        best = {ys_fit[i], f(ys_fit[i])};
      }
  }
  FitResult out;
  out.params = unpack(best.x, N);
  for (auto& G : out.params.Gamma) G = std::abs(G);
  out.cost = best.f;
  for (double t = 0.0; t <= 100.0 + 1e-9; t += 0.1)
    out.max_residual = std::max(out.max_residual, std::abs(target(t) - closure_cf(out.params, t)));
  return out;
}

}  // namespace mclosure::closure
