// io.hpp - CSV / JSON exchange formats for coefficients, closures and spectra
//
// Numbers are written in shortest round-trip form, so write -> read is exact
// and repeated runs produce byte-identical files.
#pragma once

#include <filesystem>
#include <string>

#include <Eigen/Dense>

#include "mclosure/chainmap.hpp"
#include "mclosure/closure.hpp"
#include "mclosure/spectra.hpp"

namespace mclosure::io {

std::string format_double(double x);

// "# kappa0=..,support_min=..,support_max=.." then "n,omega,kappa" rows
void write_chain_csv(const chainmap::ChainCoefficients& c, const std::filesystem::path& file);
chainmap::ChainCoefficients read_chain_csv(const std::filesystem::path& file);

// {N, Gamma[], Omega[], g[], c_re[], c_im[], rescaled, band: {Omega, K}}
std::string closure_json(const closure::ClosureParams& p);
closure::ClosureParams parse_closure_json(const std::string& text);
void write_closure_json(const closure::ClosureParams& p, const std::filesystem::path& file);
closure::ClosureParams read_closure_json(const std::filesystem::path& file);

// t,re,im
void write_response_csv(const spectra::Response& r, const std::filesystem::path& file);
spectra::Response read_response_csv(const std::filesystem::path& file);
// omega,A
void write_spectrum_csv(const spectra::Spectrum& s, const std::filesystem::path& file);
// t1,t3,re,im (long format)
void write_response2d_csv(const spectra::Response2D& r, const std::filesystem::path& file);
// Re S row-major (rows omega1, columns omega3) plus axis metadata
void write_spectrum2d(const spectra::Spectrum2D& s, const std::filesystem::path& csv,
                      const std::filesystem::path& axes_json);

}  // namespace mclosure::io
