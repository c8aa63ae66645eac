// Microbenchmarks of the hot paths: chain mapping, closure correlation
// functions, Krylov exponentials and TDVP steps.
#include <benchmark/benchmark.h>

#include <complex>

#include "mclosure/chainmap.hpp"
#include "mclosure/closure.hpp"
#include "mclosure/spectra.hpp"
#include "mclosure/tn/krylov.hpp"
#include "mclosure/tn/mpo.hpp"
#include "mclosure/tn/tdvp.hpp"

using namespace mclosure;

namespace {

void BM_ChainCoefficientsWscp(benchmark::State& state) {
  auto J = specdens::wscp().truncated(1000.0);
  const int N = int(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(chainmap::chain_coefficients(J, N));
}
BENCHMARK(BM_ChainCoefficientsWscp)->Arg(100)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_ReorganizationEnergyWscp(benchmark::State& state) {
  auto J = specdens::wscp();
  for (auto _ : state) benchmark::DoNotOptimize(specdens::reorganization_energy(J));
}
BENCHMARK(BM_ReorganizationEnergyWscp)->Unit(benchmark::kMicrosecond);

void BM_ClosureCorrelation(benchmark::State& state) {
  auto p = closure::preset(int(state.range(0)));
  double t = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(closure::closure_cf(p, t));
    t += 0.25;
    if (t > 100) t = 0;
  }
}
BENCHMARK(BM_ClosureCorrelation)->Arg(6)->Arg(8)->Arg(10);

void BM_PronyFitSemicircle(benchmark::State& state) {
  const int N = int(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(closure::prony_fit(closure::semicircle_cf, N));
}
BENCHMARK(BM_PronyFitSemicircle)->Arg(6)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_KrylovExpmv(benchmark::State& state) {
  const int n = int(state.range(0));
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Random(n, n);
  A = (A + A.adjoint()).eval();
  Eigen::VectorXcd v = Eigen::VectorXcd::Random(n).normalized();
  tn::LinearMap f = [&](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) { y.noalias() = A * x; };
  for (auto _ : state) benchmark::DoNotOptimize(tn::expmv(f, v, std::complex<double>(0.0, -0.05)));
}
BENCHMARK(BM_KrylovExpmv)->Arg(64)->Arg(256);

// one TDVP step on a monomer + semicircle chain; argument: chain sites
void BM_TdvpStep(benchmark::State& state) {
  const int L = int(state.range(0)), chi = int(state.range(1));
  auto s = spectra::monomer(1000.0);
  spectra::Environment env;
  env.chain = chainmap::chain_coefficients(specdens::Semicircle{0.0, 1000.0, 0.16}, L);
  env.M = L;
  env.chain_dim = 3;
  auto model = spectra::chain_model(s, env);
  auto W = tn::build_mpo(model);
  std::vector<Eigen::VectorXcd> loc;
  for (int d : model.local_dims()) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(d);
    v[0] = 1.0;
    loc.push_back(v);
  }
  loc[0] = Eigen::VectorXcd::Zero(2);
  loc[0][1] = 1.0;
  auto psi = tn::MPS::product(loc, chi, 7);
  tn::Tdvp tdvp(W, {1.0});
  for (int k = 0; k < 20; ++k) tdvp.step(psi);  // let the excitation spread
  for (auto _ : state) tdvp.step(psi);
  state.counters["sites"] = double(L + 1);
}
BENCHMARK(BM_TdvpStep)->Args({20, 4})->Args({40, 4})->Args({40, 8})->Unit(benchmark::kMillisecond);

void BM_LineshapeWscp(benchmark::State& state) {
  auto J = specdens::wscp().truncated(1000.0).scaled(0.5);
  for (auto _ : state) {
    spectra::Lineshape g(J, 2000.0);
    benchmark::DoNotOptimize(g.dG(1000.0));
  }
}
BENCHMARK(BM_LineshapeWscp)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
