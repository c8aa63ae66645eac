#include "mclosure/bench.hpp"

#include <sys/resource.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mclosure/tn/tdvp.hpp"
#include "mclosure/units.hpp"

namespace mclosure::bench {

namespace {

tn::MPS initial(const spectra::ElectronicSystem& s, const std::vector<int>& dims, int chi, std::uint64_t seed) {
  std::vector<Eigen::VectorXcd> loc;
  Eigen::VectorXcd g = Eigen::VectorXcd::Zero(s.dim());
  g[0] = 1.0;
  loc.push_back(s.mu_plus * g);
  for (std::size_t i = 1; i < dims.size(); ++i) loc.push_back(Eigen::VectorXcd::Unit(dims[i], 0));
  return tn::MPS::product(loc, chi, seed);
}

Run evolve(const ScalingOptions& o, const spectra::Environment& env, double t_max, bool detect) {
  auto t0 = std::chrono::steady_clock::now();
  tn::ChainModel model = spectra::chain_model(o.system, env);
  tn::Mpo W = tn::build_mpo(model);
  std::vector<int> dims = model.local_dims();
  tn::MPS bra = initial(o.system, dims, 1, o.prop.seed);
  tn::MPS psi = initial(o.system, dims, o.prop.chi, o.prop.seed);
  tn::Tdvp td(W, {o.prop.dt, o.prop.krylov, o.prop.renormalize});
  const int steps = int(std::llround(t_max / o.prop.dt));
  const int last = env.M;
  Run run;
  run.sites = model.sites();
  run.t.push_back(0.0);
  run.R.push_back(tn::overlap(bra, psi));
  std::size_t peak = 0;
  td.evolve(psi, steps, [&](const tn::MPS& st, int k) {
    double t = k * o.prop.dt;
    run.t.push_back(t);
    run.R.push_back(tn::overlap(bra, st) * units::propagator_phase(o.system.reference, t));
    if (k == 1) peak = st.bytes() + W.bytes() + td.workspace_bytes();
    if (detect && (k % o.check_every == 0 || k == steps))
      for (int n = std::max(1, last - o.watch_sites + 1); n <= last; ++n)
        if (tn::site_occupation(st, n) > o.occupation_limit) throw BoundaryReached("bench: occupation reached the chain end at site " + std::to_string(n));
  });
  run.engine_bytes = std::max(peak, psi.bytes() + W.bytes() + td.workspace_bytes());
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return run;
}

}  // namespace

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("loglog_slope: size mismatch");
  if (x.size() < 2) throw std::invalid_argument("loglog_slope: need at least two samples for a slope");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0 && y[i] > 0)) throw std::invalid_argument("loglog_slope: non-positive sample");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= x.size();
  my /= x.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0) throw std::invalid_argument("loglog_slope: all x equal");
  return sxy / sxx;
}

Run plain_run(const ScalingOptions& o, double t_max, int sites) {
  spectra::Environment env;
  env.chain = chainmap::chain_coefficients(o.J, sites);
  env.M = sites;
  env.chain_dim = o.chain_dim;
  return evolve(o, env, t_max, true);
}

Run closure_run(const ScalingOptions& o, double t_max) {
  spectra::Environment env;
  env.chain = chainmap::chain_coefficients(o.J, o.closure_M);
  env.M = o.closure_M;
  env.chain_dim = o.chain_dim;
  env.closure = closure::rescale(closure::preset(o.closure_N), chainmap::asymptotic_coefficients(env.chain));
  return evolve(o, env, t_max, false);
}

Report run_scaling(const ScalingOptions& o) {
  if (o.t_max_fs.size() < 2) throw std::invalid_argument("bench: need at least two t_max values for a slope fit");
  if (!(o.growth > 1)) throw std::invalid_argument("bench: growth factor must exceed 1");
  std::vector<double> ts = o.t_max_fs;
  std::sort(ts.begin(), ts.end());
  Report rep;
  int sites = o.initial_sites;
  double prev_t = ts.front();
  for (double t : ts) {
    // chain length proportional to t_max; the detector fixes the constant
    sites = std::max(sites, int(std::ceil(sites * t / prev_t)));
    prev_t = t;
    Row row;
    row.t_max_fs = t;
    int attempts = 0;
    for (;;) {
      ++attempts;
      try {
        row.plain = plain_run(o, t, sites);
        break;
      } catch (const BoundaryReached&) {
        sites = std::max(sites + 1, int(std::ceil(sites * o.growth)));
      }
    }
    row.plain.attempts = attempts;
    row.closure = closure_run(o, t);
    row.closure.attempts = 1;
    for (std::size_t k = 0; k < row.plain.R.size(); ++k)
      row.max_deviation = std::max(row.max_deviation, std::abs(row.plain.R[k] - row.closure.R[k]));
    if (rep.rows.empty() && row.max_deviation > o.agreement_tol)
      throw std::runtime_error("bench: plain chain and closure disagree by " + std::to_string(row.max_deviation) +
                               " at t_max = " + std::to_string(t) + " fs");
    rep.rows.push_back(std::move(row));
  }
  std::vector<double> x, tp, tc, mp;
  double mmin = 1e300, mmax = 0;
  for (const Row& r : rep.rows) {
    x.push_back(r.t_max_fs);
    tp.push_back(r.plain.seconds);
    tc.push_back(r.closure.seconds);
    mp.push_back(double(r.plain.engine_bytes));
    mmin = std::min(mmin, double(r.closure.engine_bytes));
    mmax = std::max(mmax, double(r.closure.engine_bytes));
  }
  rep.plain_time_slope = loglog_slope(x, tp);
  rep.closure_time_slope = loglog_slope(x, tc);
  rep.plain_memory_slope = loglog_slope(x, mp);
  rep.closure_memory_variation = (mmax - mmin) / mmin;
  rep.peak_rss_kb = peak_rss_kb();
  return rep;
}

long peak_rss_kb() {
  rusage u{};
  getrusage(RUSAGE_SELF, &u);
  return u.ru_maxrss;
}

}  // namespace mclosure::bench
