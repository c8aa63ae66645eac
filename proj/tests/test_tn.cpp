#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <unsupported/Eigen/MatrixFunctions>

#include "mclosure/tn/checkpoint.hpp"
#include "mclosure/tn/krylov.hpp"
#include "mclosure/tn/mpo.hpp"
#include "mclosure/tn/mps.hpp"
#include "mclosure/tn/tdvp.hpp"
#include "mclosure/units.hpp"

using namespace mclosure;
using namespace mclosure::tn;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

namespace {

Mat kron(const Mat& A, const Mat& B) {
  Mat K(A.rows() * B.rows(), A.cols() * B.cols());
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j) K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return K;
}

// op on site k of a register with local dims d (site 0 most significant)
Mat embed(const std::vector<int>& d, int k, const Mat& op) {
  Mat out = Mat::Identity(1, 1);
  for (int i = 0; i < int(d.size()); ++i) out = kron(out, i == k ? op : Mat(Mat::Identity(d[i], d[i])));
  return out;
}

Mat lower(int d) {
  Mat a = Mat::Zero(d, d);
  for (int n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(double(n));
  return a;
}

// the generator written out term by term with Kronecker products
Mat dense_model(const ChainModel& m) {
  std::vector<int> d = m.local_dims();
  const int M = m.M;
  Mat H = embed(d, 0, m.H_S);
  Mat b1 = embed(d, 1, lower(d[1]));
  Mat A = embed(d, 0, m.A_S);
  H += m.chain.kappa0 * (A.adjoint() * b1 + A * b1.adjoint());
  for (int n = 0; n < M; ++n) {
    Mat b = embed(d, n + 1, lower(d[n + 1]));
    H += m.chain.omega[n] * b.adjoint() * b;
    if (n + 1 < M) {
      Mat c = embed(d, n + 2, lower(d[n + 2]));
      H += m.chain.kappa[n] * (b.adjoint() * c + c.adjoint() * b);
    }
  }
  if (m.closure) {
    const auto& p = *m.closure;
    Mat bM = embed(d, M, lower(d[M]));
    const cplx I(0, 1);
    for (int n = 0; n < p.N; ++n) {
      Mat dn = embed(d, M + 1 + n, lower(d[M + 1 + n]));
      H += std::conj(p.c[n]) * bM * dn.adjoint() + p.c[n] * bM.adjoint() * dn;
      H += (p.Omega[n] - 0.5 * I * std::abs(p.Gamma[n])) * dn.adjoint() * dn;
      if (n + 1 < p.N) {
        Mat dm = embed(d, M + 2 + n, lower(d[M + 2 + n]));
        H += p.g[n] * (dn * dm.adjoint() + dm * dn.adjoint());
      }
    }
  }
  return H;
}

ChainModel toy_model(bool with_closure, int M = 2, int d = 3) {
  ChainModel m;
  m.H_S = Mat::Zero(2, 2);
  m.H_S(1, 1) = 40.0;
  m.H_S(0, 1) = m.H_S(1, 0) = 5.0;
  m.A_S = Mat::Zero(2, 2);
  m.A_S(1, 1) = 1.0;
  m.chain.kappa0 = 60.0;
  for (int n = 0; n < M; ++n) {
    m.chain.omega.push_back(300.0 + 20 * n);
    m.chain.kappa.push_back(150.0 - 10 * n);
  }
  m.chain.support_min = 0;
  m.chain.support_max = 1000;
  m.M = M;
  m.chain_dims = {d};
  if (with_closure) {
    m.closure = closure::rescale(closure::preset(6), {500.0, 250.0});
    m.closure->N = 2;  // keep the dense oracle small
    m.closure->Gamma.resize(2);
    m.closure->Omega.resize(2);
    m.closure->c = {cplx(0.3, 0.1) * 250.0, cplx(-0.2, 0.4) * 250.0};
    m.closure->g.resize(1);
    m.closure->Gamma = {300.0, 80.0};
    m.closure_dims = {2};
  }
  return m;
}

Vec random_vec(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = cplx(g(rng), g(rng));
  return v;
}

MPS random_mps(const std::vector<int>& d, int chi, std::uint64_t seed) {
  std::vector<Vec> loc;
  std::mt19937_64 rng(seed);
  for (int k : d) loc.push_back(random_vec(k, rng));
  MPS psi = MPS::product(loc, chi, seed);
  // mix the padded directions into the state so it is entangled
  for (int i = 0; i < psi.size(); ++i) psi.sites[i].data += 0.3 * random_vec(int(psi.sites[i].data.size()), rng);
  psi.center = 0;
  // restore canonical form by sweeping
  psi.move_center(psi.size() - 1);
  psi.move_center(0);
  return psi;
}

}  // namespace

TEST(Krylov, MatchesDenseExponential) {
  std::mt19937_64 rng(3);
  Mat A = Mat::Zero(40, 40);
  for (int i = 0; i < 40; ++i)
    for (int j = 0; j < 40; ++j) A(i, j) = random_vec(1, rng)[0];
  Mat H = 0.5 * (A + A.adjoint());
  Vec v = random_vec(40, rng);
  LinearMap f = [&](const Vec& x, Vec& y) { y = H * x; };
  for (cplx tau : {cplx(0, -0.3), cplx(0, 1.1), cplx(-0.2, -0.4)}) {
    Vec ex = (H * tau).exp() * v;
    Vec got = expmv(f, v, tau);
    EXPECT_LT((got - ex).norm(), 1e-9 * ex.norm()) << tau;
  }
  // non-normal generator
  Mat G = H - cplx(0, 0.5) * Mat(A.cwiseAbs().cast<cplx>());
  LinearMap g = [&](const Vec& x, Vec& y) { y = G * x; };
  Vec ex = (G * cplx(0, -0.5)).exp() * v;
  EXPECT_LT((expmv(g, v, cplx(0, -0.5)) - ex).norm(), 1e-9 * ex.norm());
}

TEST(Krylov, HappyBreakdownIsExact) {
  Mat H = Mat::Zero(6, 6);
  H(0, 0) = 2.0;
  Vec v = Vec::Zero(6);
  v[0] = 1.0;
  LinearMap f = [&](const Vec& x, Vec& y) { y = H * x; };
  Vec got = expmv(f, v, cplx(0, -1.0));
  EXPECT_NEAR(std::abs(got[0] - std::exp(cplx(0, -2.0))), 0.0, 1e-14);
}

TEST(Mps, ProductStateAndBondDims) {
  std::vector<Vec> loc;
  std::vector<int> d{2, 3, 3, 3, 2};
  std::mt19937_64 rng(1);
  for (int k : d) loc.push_back(random_vec(k, rng));
  MPS psi = MPS::product(loc, 4);
  std::vector<int> expect{2, 4, 4, 2};
  EXPECT_EQ(psi.bond_dims(), expect);
  Vec ex = loc[0];
  for (int i = 1; i < 5; ++i) ex = kron(ex, loc[i]);
  Vec got = to_dense(psi);
  EXPECT_LT((got - ex).norm(), 1e-12 * ex.norm());
  EXPECT_NEAR(norm(psi), ex.norm(), 1e-12 * ex.norm());
}

TEST(Mps, CanonicalFormAfterMovingCentre) {
  MPS psi = random_mps({2, 3, 3, 3, 2}, 6, 11);
  Vec before = to_dense(psi);
  psi.move_center(3);
  EXPECT_LT((to_dense(psi) - before).norm(), 1e-12 * before.norm());
  for (int i = 0; i < 3; ++i) {
    auto L = psi.sites[i].left();
    EXPECT_LT((L.adjoint() * L - Mat::Identity(L.cols(), L.cols())).norm(), 1e-12);
  }
  auto R = psi.sites[4].right();
  EXPECT_LT((R * R.adjoint() - Mat::Identity(R.rows(), R.rows())).norm(), 1e-12);
}

TEST(Mps, OverlapAndExpectationAgainstDense) {
  std::vector<int> d{2, 3, 3};
  MPS a = random_mps(d, 5, 2), b = random_mps(d, 5, 9);
  a.log_coeff = cplx(0.3, 0.2);
  Vec va = to_dense(a), vb = to_dense(b);
  EXPECT_NEAR(std::abs(overlap(a, b) - va.dot(vb)), 0.0, 1e-12 * va.norm() * vb.norm());
  Mat n = number(3);
  Mat full = embed(d, 1, n);
  cplx ex = va.dot(full * va) / va.squaredNorm();
  EXPECT_NEAR(std::abs(expectation(a, n, 1) - ex), 0.0, 1e-12);
}

TEST(Mps, AnnihilatingTheVacuumSetsZeroFlag) {
  std::vector<Vec> loc(3, Vec::Unit(3, 0));
  MPS psi = MPS::product(loc, 3);
  apply_local(psi, annihilation(3), 1);
  EXPECT_TRUE(psi.zero);
  EXPECT_EQ(norm(psi), 0.0);
  EXPECT_THROW(expectation(psi, number(3), 0), std::runtime_error);
}

TEST(Mps, LocalOperatorAgainstDense) {
  std::vector<int> d{2, 3, 3};
  MPS a = random_mps(d, 4, 5);
  Vec va = to_dense(a);
  Mat op = annihilation(3).adjoint();
  apply_local(a, op, 2);
  EXPECT_LT((to_dense(a) - embed(d, 2, op) * va).norm(), 1e-12 * va.norm());
}

TEST(Mpo, MatchesKroneckerModel) {
  for (bool cl : {false, true}) {
    ChainModel m = toy_model(cl);
    Mpo W = build_mpo(m);
    Mat ref = dense_model(m);
    Mat got = to_dense(W);
    ASSERT_EQ(got.rows(), ref.rows());
    EXPECT_LT((got - ref).norm(), 1e-10 * ref.norm()) << cl;
  }
}

TEST(Mpo, BondDimensions) {
  ChainModel m = toy_model(false, 5);
  EXPECT_EQ(build_mpo(m).max_bond(), 4);
  ChainModel c = toy_model(true, 5);
  EXPECT_EQ(build_mpo(c).max_bond(), 6);
}

TEST(Mpo, ClosureMustBeRescaled) {
  ChainModel m = toy_model(true);
  m.closure->rescaled = false;
  EXPECT_THROW(build_mpo(m), std::invalid_argument);
}

TEST(Tdvp, FullBondDimensionIsExact) {
  // qubit + 2 chain sites (d = 3) + 2 closure sites (d = 2): dimension 72
  for (bool cl : {false, true}) {
    ChainModel m = toy_model(cl);
    std::vector<int> d = m.local_dims();
    Mpo W = build_mpo(m);
    Mat G = dense_model(m);
    std::vector<Vec> loc;
    for (int k : d) loc.push_back(Vec::Unit(k, 0));
    loc[0] = Vec::Unit(2, 1);
    MPS psi = MPS::product(loc, 72);
    Vec v0 = to_dense(psi);
    TdvpOptions o;
    o.dt = 1.0;
    Tdvp t(W, o);
    t.evolve(psi, 40);
    double T = 40.0;
    Vec ex = (G * cplx(0, -units::to_rad_per_fs(1.0) * T)).exp() * v0;
    Vec got = to_dense(psi);
    EXPECT_LT((got - ex).norm(), 1e-7 * ex.norm()) << cl;
    if (cl) EXPECT_LT(ex.norm(), 1.0 - 1e-4);  // the closure drains norm
    EXPECT_NEAR(norm(psi), ex.norm(), 1e-7);
  }
}

TEST(Tdvp, RenormalizeKeepsUnitNorm) {
  ChainModel m = toy_model(true);
  std::vector<int> d = m.local_dims();
  Mpo W = build_mpo(m);
  std::vector<Vec> loc;
  for (int k : d) loc.push_back(Vec::Unit(k, 0));
  loc[0] = Vec::Unit(2, 1);
  MPS psi = MPS::product(loc, 8);
  TdvpOptions o;
  o.renormalize = true;
  Tdvp t(W, o);
  t.evolve(psi, 30);
  EXPECT_NEAR(norm(psi), 1.0, 1e-12);
}

TEST(Tdvp, HermitianEvolutionConservesNorm) {
  ChainModel m = toy_model(false, 6);
  std::vector<int> d = m.local_dims();
  Mpo W = build_mpo(m);
  std::vector<Vec> loc;
  for (int k : d) loc.push_back(Vec::Unit(k, 0));
  loc[0] = Vec(Vec::Ones(2)) / std::sqrt(2.0);
  MPS psi = MPS::product(loc, 6);
  Tdvp t(W);
  int calls = 0;
  t.evolve(psi, 20, [&](const MPS&, int k) { calls = k; });
  EXPECT_EQ(calls, 20);
  EXPECT_NEAR(norm(psi), 1.0, 1e-9);
  EXPECT_GT(t.stats().matvecs, 0);
}

TEST(Checkpoint, RoundTrip) {
  MPS psi = random_mps({2, 3, 3, 2}, 5, 4);
  psi.log_coeff = cplx(-0.75, 1.25);
  psi.move_center(2);
  auto f = std::filesystem::temp_directory_path() / "mclosure_ckpt_test.bin";
  save_mps(psi, f);
  MPS back = load_mps(f);
  EXPECT_EQ(back.center, 2);
  EXPECT_EQ(back.log_coeff, psi.log_coeff);
  EXPECT_EQ(back.bond_dims(), psi.bond_dims());
  for (int i = 0; i < psi.size(); ++i) EXPECT_EQ(back.sites[i].data, psi.sites[i].data);
  std::filesystem::remove(f);
}

TEST(Checkpoint, RejectsCorruptBlob) {
  auto f = std::filesystem::temp_directory_path() / "mclosure_ckpt_bad.bin";
  {
    std::ofstream o(f, std::ios::binary);
    o << "XXXXnonsense";
  }
  EXPECT_THROW(load_mps(f), std::runtime_error);
  std::filesystem::remove(f);
}

TEST(Checkpoint, StoreSpillsBeyondBudget) {
  auto dir = std::filesystem::temp_directory_path() / "mclosure_ckpt_store";
  std::filesystem::remove_all(dir);
  MPS psi = random_mps({2, 3, 3, 2}, 5, 8);
  {
    CheckpointStore store(psi.bytes() * 2 + 1, dir);
    for (int k = 0; k < 5; ++k) {
      MPS q = psi;
      q.log_coeff = cplx(0.1 * k, 0);
      store.put(k, 2.0 * k, q);
    }
    EXPECT_EQ(store.size(), 5u);
    EXPECT_EQ(store.spilled(), 3u);
    EXPECT_LE(store.resident_bytes(), psi.bytes() * 2 + 1);
    for (int k = 0; k < 5; ++k) {
      MPS q = store.get(k);
      EXPECT_EQ(q.log_coeff, cplx(0.1 * k, 0));
      EXPECT_EQ(q.sites[1].data, psi.sites[1].data);
    }
    EXPECT_THROW(store.get(9), std::out_of_range);
    store.write_manifest(dir / "manifest.json");
    EXPECT_TRUE(std::filesystem::exists(dir / "manifest.json"));
  }
  // spilled blobs are removed with the store
  int blobs = 0;
  if (std::filesystem::exists(dir))
    for (auto& e : std::filesystem::directory_iterator(dir))
      if (e.path().filename().string().rfind("ckpt_", 0) == 0) ++blobs;
  EXPECT_EQ(blobs, 0);
  std::filesystem::remove_all(dir);
}

TEST(Mps, SiteOccupation) {
  std::vector<Vec> loc{Vec::Unit(2, 0), Vec::Unit(3, 0), Vec::Unit(3, 1), Vec::Unit(3, 0)};
  MPS psi = MPS::product(loc, 4);
  EXPECT_NEAR(site_occupation(psi, 1), 0.0, 1e-14);
  EXPECT_NEAR(site_occupation(psi, 2), 1.0, 1e-14);
  EXPECT_THROW(site_occupation(psi, 0), std::invalid_argument);
  EXPECT_THROW(site_occupation(psi, 4), std::invalid_argument);
}

TEST(Mps, OverlapRejectsMismatchedStructure) {
  MPS a = MPS::product({Vec::Unit(2, 0), Vec::Unit(3, 0)}, 2);
  MPS b = MPS::product({Vec::Unit(2, 0), Vec::Unit(4, 0)}, 2);
  MPS c = MPS::product({Vec::Unit(2, 0)}, 1);
  EXPECT_THROW(overlap(a, b), std::invalid_argument);
  EXPECT_THROW(overlap(a, c), std::invalid_argument);
}

TEST(Tdvp, QuenchOccupationMatchesDense) {
  // qubit + 2 chain sites at D = 4, excited start
  ChainModel m = toy_model(false, 2, 4);
  std::vector<int> d = m.local_dims();
  Mpo W = build_mpo(m);
  Mat G = dense_model(m);
  std::vector<Vec> loc{Vec::Unit(2, 1), Vec::Unit(4, 0), Vec::Unit(4, 0)};
  MPS psi = MPS::product(loc, 16);
  Vec v0 = to_dense(psi);
  Tdvp t(W, {});
  t.evolve(psi, 60);
  Vec ex = (G * cplx(0, -units::to_rad_per_fs(1.0) * 30.0)).exp() * v0;
  for (int n = 1; n <= 2; ++n) {
    Mat N = embed(d, n, number(4));
    double occ = (ex.adjoint() * N * ex)(0, 0).real() / ex.squaredNorm();
    EXPECT_NEAR(site_occupation(psi, n), occ, 1e-9) << n;
  }
  EXPECT_GT(site_occupation(psi, 1), 1e-3);
}
