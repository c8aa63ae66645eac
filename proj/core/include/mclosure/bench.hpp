// bench.hpp - wall-time / memory scaling of plain chains vs chain + closure
#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "mclosure/spectra.hpp"

namespace mclosure::bench {

struct ScalingOptions {
  std::vector<double> t_max_fs{250, 500, 1000, 2000, 4000};
  spectra::ElectronicSystem system = spectra::monomer(1000.0);
  specdens::SpectralDensity J = specdens::Semicircle{0.0, 1000.0, 0.16};
  spectra::Propagation prop{1.0, 4};
  int chain_dim = 3;
  int closure_M = 4;  // primary sites in front of the closure
  int closure_N = 6;  // preset size
  // boundary-reflection detector on the plain chain
  int initial_sites = 10;
  int watch_sites = 3;
  double occupation_limit = 1e-6;
  double growth = 1.25;
  int check_every = 5;  // steps between detector checks
  // sanity gate: both methods must agree at the shortest t_max
  double agreement_tol = 1e-2;
};

struct Run {
  int sites = 0;
  int attempts = 0;
  double seconds = 0.0;
  std::size_t engine_bytes = 0;  // MPS + MPO + TDVP environments
  std::vector<double> t;
  std::vector<spectra::cplx> R;
};

struct Row {
  double t_max_fs = 0.0;
  Run plain, closure;
  double max_deviation = 0.0;  // max |R_plain - R_closure|
};

struct Report {
  std::vector<Row> rows;
  double plain_time_slope = 0.0, closure_time_slope = 0.0;
  double plain_memory_slope = 0.0;
  double closure_memory_variation = 0.0;  // (max - min) / min
  long peak_rss_kb = 0;
};

struct BoundaryReached : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// least-squares slope of log y against log x
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// one plain-chain run of `sites` sites; throws BoundaryReached when the
// detector fires
Run plain_run(const ScalingOptions& o, double t_max, int sites);
Run closure_run(const ScalingOptions& o, double t_max);

Report run_scaling(const ScalingOptions& o);

long peak_rss_kb();

}  // namespace mclosure::bench
