#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "mclosure/io.hpp"

using namespace mclosure;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto d = std::filesystem::temp_directory_path() / "mclosure-io-test";
  std::filesystem::create_directories(d);
  return d / name;
}

}  // namespace

TEST(Io, ShortestRoundTripFormatting) {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 15198.0, 6.02214076e23}) {
    EXPECT_EQ(std::stod(io::format_double(x)), x);
  }
  EXPECT_EQ(io::format_double(0.5), "0.5");
}

TEST(Io, ChainCsvRoundTrip) {
  auto c = chainmap::chain_coefficients(specdens::wscp().truncated(1000.0), 40);
  auto f = scratch("chain.csv");
  io::write_chain_csv(c, f);
  auto d = io::read_chain_csv(f);
  EXPECT_EQ(d.kappa0, c.kappa0);
  EXPECT_EQ(d.support_min, c.support_min);
  EXPECT_EQ(d.support_max, c.support_max);
  EXPECT_EQ(d.omega, c.omega);
  EXPECT_EQ(d.kappa, c.kappa);
}

TEST(Io, ChainCsvRejectsMissingHeader) {
  auto f = scratch("bad_chain.csv");
  std::ofstream(f) << "n,omega,kappa\n1,2,3\n";
  EXPECT_THROW(io::read_chain_csv(f), std::runtime_error);
}

TEST(Io, ClosureJsonRoundTrip) {
  for (bool scaled : {false, true}) {
    closure::ClosureParams p = closure::preset(8);
    if (scaled) p = closure::rescale(p, {500.0, 250.0});
    auto q = io::parse_closure_json(io::closure_json(p));
    EXPECT_EQ(q.N, p.N);
    EXPECT_EQ(q.Gamma, p.Gamma);
    EXPECT_EQ(q.Omega, p.Omega);
    EXPECT_EQ(q.g, p.g);
    EXPECT_EQ(q.c, p.c);
    EXPECT_EQ(q.rescaled, p.rescaled);
    EXPECT_EQ(q.band.Omega, p.band.Omega);
    EXPECT_EQ(q.band.K, p.band.K);
  }
}

TEST(Io, ClosureJsonValidates) {
  EXPECT_THROW(io::parse_closure_json(R"({"N": 2, "Gamma": [1], "Omega": [0, 0], "g": [1], "c_re": [1, 0], "c_im": [0, 0]})"),
               std::exception);
  EXPECT_THROW(io::parse_closure_json(R"({"Gamma": [1]})"), std::runtime_error);
}

TEST(Io, ResponseCsvRoundTrip) {
  spectra::Response r;
  for (int k = 0; k < 5; ++k) {
    r.t.push_back(0.5 * k);
    r.R.push_back(std::polar(1.0, 0.3 * k));
  }
  auto f = scratch("response.csv");
  io::write_response_csv(r, f);
  auto s = io::read_response_csv(f);
  EXPECT_EQ(s.t, r.t);
  EXPECT_EQ(s.R, r.R);
}

TEST(Io, Spectrum2dLayout) {
  spectra::Spectrum2D s;
  s.omega1 = {1, 2};
  s.omega3 = {3, 4, 5};
  s.S = Eigen::MatrixXcd::Zero(2, 3);
  s.S(1, 2) = {7.0, 1.0};
  auto csv = scratch("s2d.csv"), axes = scratch("s2d.json");
  io::write_spectrum2d(s, csv, axes);
  std::ifstream in(csv);
  std::string a, b;
  std::getline(in, a);
  std::getline(in, b);
  EXPECT_EQ(a, "0,0,0");
  EXPECT_EQ(b, "0,0,7");
}
