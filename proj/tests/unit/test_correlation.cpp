#include "hamrec.hpp"
#include "oracle/dense_oracle.hpp"

#include <gtest/gtest.h>

using namespace hamrec;

namespace {

std::shared_ptr<const LocalBasis> ring(int n) { return make_basis({n, 2, 2, Boundary::periodic}); }

Eigen::VectorXd sym_eigenvalues(const Eigen::MatrixXd& m) { return eig_symmetric(m, 1e-10).values; }

double psd_defect(const Eigen::MatrixXd& m) {
  const auto e = sym_eigenvalues(m);
  return -e(0) / std::max(e(e.size() - 1), 1e-300);
}

Eigen::VectorXcd all_up(const LatticeSpec& s) { return product_state(s, std::vector<int>(static_cast<std::size_t>(s.n), 0)); }

}  // namespace

TEST(Expectation, SigmaZOnUpAndPlus) {
  const auto b = make_basis({2, 2, 2, Boundary::open});
  Eigen::VectorXd w = Eigen::VectorXd::Zero(15);
  w(static_cast<Eigen::Index>(*b->find({{0, 3}}))) = 1.0;
  const Eigen::VectorXcd up = all_up(b->spec());
  EXPECT_NEAR(expectation(w, *b, up), 1.0, 1e-15);
  Eigen::VectorXcd plus = Eigen::VectorXcd::Constant(4, 0.5);  // |+>|+>
  EXPECT_NEAR(expectation(w, *b, plus), 0.0, 1e-15);
}

TEST(Expectation, RandomOperatorMatchesDense) {
  const auto b = ring(4);
  const auto ops = oracle::qubit_basis(4, true);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto w = oracle::random_vector(48, seed);
    const auto v = oracle::random_state(16, 50 + seed);
    EXPECT_NEAR(expectation(w, *b, v), v.dot(oracle::hamiltonian(ops, w) * v).real(), 1e-13);
  }
  EXPECT_THROW(expectation(Eigen::VectorXd::Zero(3), *b, oracle::random_state(16, 1)), std::invalid_argument);
}

TEST(BuildPure, MatchesDenseOracleAtThreeSites) {
  const auto b = ring(3);
  const auto ops = oracle::qubit_basis(3, true);
  const auto v = oracle::random_state(8, 3);
  const auto m = build_pure(v, b);
  EXPECT_LT((m.entries - oracle::pure_correlation(v, ops)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT(symmetry_defect(m.entries), 1e-12);
  for (Eigen::Index i = 0; i < m.entries.rows(); ++i) EXPECT_GE(m.entries(i, i), -1e-14);
}

TEST(BuildPure, OpenChainMatchesDenseOracle) {
  const auto b = make_basis({4, 2, 2, Boundary::open});
  const auto v = oracle::random_state(16, 4);
  EXPECT_LT((build_pure(v, b).entries - oracle::pure_correlation(v, oracle::qubit_basis(4, false))).cwiseAbs().maxCoeff(),
            1e-12);
}

TEST(BuildPure, CachedAndStreamingPathsAgree) {
  const auto b = ring(6);
  const auto v = ith_eigenstate(random_disordered(b, 2), 20).state;
  const auto cached = build_pure(v, b);
  const auto streamed = build_pure(v, b, 0);
  EXPECT_LT((cached.entries - streamed.entries).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(BuildPure, ProductStateKernelIsEightPerSite) {
  for (int n : {4, 6, 8}) {
    const auto b = ring(n);
    const auto s = correlation_spectrum(build_pure(all_up(b->spec()), b));
    EXPECT_EQ(s.kernel_dim, 8 * n) << n;
  }
}

TEST(BuildPure, RejectsUnnormalizedState) {
  const auto b = ring(3);
  EXPECT_THROW(build_pure(Eigen::VectorXcd(2.0 * oracle::random_state(8, 1)), b), std::invalid_argument);
  EXPECT_THROW(build_pure(oracle::random_state(16, 1), b), std::invalid_argument);
}

TEST(Fluctuation, ZeroForTheParentHamiltonian) {
  const auto b = ring(6);
  const auto h = random_disordered(b, 8);
  const auto r = ith_eigenstate(h, 3);
  const auto m = build_pure(r, b);
  const double f = fluctuation(h.coeffs, m);
  // w^T M w carries the rounding of M itself, about S * eps * lambda_max * |w|^2.
  const double lambda_max = correlation_spectrum(m).lambda_max();
  EXPECT_LE(std::abs(f), 1e-14 * lambda_max * h.coeffs.squaredNorm());
}

TEST(Fluctuation, SigmaZOnPlusIsOne) {
  const auto b = make_basis({2, 2, 2, Boundary::open});
  Eigen::VectorXd w = Eigen::VectorXd::Zero(15);
  w(static_cast<Eigen::Index>(*b->find({{0, 3}}))) = 1.0;
  const auto m = build_pure(Eigen::VectorXcd(Eigen::VectorXcd::Constant(4, 0.5)), b);
  EXPECT_NEAR(fluctuation(w, m), 1.0, 1e-15);
}

TEST(Fluctuation, EqualsDenseVarianceAndOrthogonalComponent) {
  const auto b = ring(3);
  const auto ops = oracle::qubit_basis(3, true);
  const auto v = oracle::random_state(8, 7);
  const auto m = build_pure(v, b);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto w = oracle::random_vector(36, seed);
    const Eigen::MatrixXcd o = oracle::hamiltonian(ops, w);
    const double mean = v.dot(o * v).real();
    const double var = v.dot(o * o * v).real() - mean * mean;
    EXPECT_NEAR(fluctuation(w, m), var, 1e-12);
    const Eigen::VectorXcd ov = o * v;
    const Eigen::VectorXcd perp = ov - v.dot(ov) * v;
    EXPECT_NEAR(fluctuation(w, m), perp.squaredNorm(), 1e-12);
  }
}

TEST(BuildMixed, PureStateConsistency) {
  const auto b = ring(4);
  const auto v = oracle::random_state(16, 9);
  const DensityMatrix rho{full_region(b->spec()), 2, v * v.adjoint(), {}};
  EXPECT_LT((build_mixed_expectation(rho, b).entries - build_pure(v, b).entries).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(BuildMixed, MaximallyMixedGivesIdentity) {
  const auto b = ring(4);
  const DensityMatrix rho{full_region(b->spec()), 2, Eigen::MatrixXcd::Identity(16, 16) / 16.0, {}};
  const auto m = build_mixed_expectation(rho, b);
  EXPECT_LT((m.entries - Eigen::MatrixXd::Identity(48, 48)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(BuildMixed, ReducedStateMatchesSubBlockOfPureMatrix) {
  const auto b = ring(6);
  const auto r = ith_eigenstate(random_disordered(b, 31), 17);
  const auto region = make_region(b->spec(), 1, 3);
  const auto sub = std::make_shared<const LocalBasis>(restrict_to_region(*b, region));
  const auto rho = reduce_state(r, region);
  const auto mixed = build_mixed_expectation(rho, sub);
  const auto pure = build_pure(r, b);
  const auto& parent = sub->parent_index();
  for (std::size_t i = 0; i < sub->size(); ++i) {
    for (std::size_t j = 0; j < sub->size(); ++j) {
      EXPECT_NEAR(mixed.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)),
                  pure.entries(static_cast<Eigen::Index>(parent[i]), static_cast<Eigen::Index>(parent[j])), 1e-12);
    }
  }
  // Without the purification factor the eigen-decomposition path must agree.
  DensityMatrix plain = rho;
  plain.factor.resize(0, 0);
  EXPECT_LT((build_mixed_expectation(plain, sub).entries - mixed.entries).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(BuildMixed, MatchesDenseOracleForGibbsState) {
  const auto b = ring(4);
  const auto h = random_disordered(b, 3);
  const auto rho = gibbs_state(h, 0.7);
  const auto ops = oracle::qubit_basis(4, true);
  const auto m = build_mixed_expectation(rho, b);
  EXPECT_LT((m.entries - oracle::mixed_correlation(rho.matrix, ops)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT(psd_defect(m.entries), 1e-10);
}

TEST(BuildMixed, RejectsOperatorsOutsideTheRegion) {
  const auto b = ring(6);
  const auto rho = reduce_state(b->spec(), oracle::random_state(64, 2), {0, 1, 2});
  EXPECT_THROW(build_mixed_expectation(rho, b), std::invalid_argument);
}

TEST(RhoCommutator, MaximallyMixedIsZero) {
  const auto b = ring(4);
  const DensityMatrix rho{full_region(b->spec()), 2, Eigen::MatrixXcd::Identity(16, 16) / 16.0, {}};
  EXPECT_LT(build_rho_commutator(rho, b).entries.cwiseAbs().maxCoeff(), 1e-15);
}

TEST(RhoCommutator, MatchesDenseOracleAndEqualsPureMatrixForProjectors) {
  const auto b = ring(4);
  const auto ops = oracle::qubit_basis(4, true);
  const auto v = oracle::random_state(16, 5);
  const DensityMatrix pure{full_region(b->spec()), 2, v * v.adjoint(), {}};
  const auto mbar = build_rho_commutator(pure, b);
  EXPECT_LT((mbar.entries - oracle::commutator_gram(pure.matrix, ops, 1.0)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((mbar.entries - build_pure(v, b).entries).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(RhoCommutator, EigenstateProjectorHasHamiltonianInKernel) {
  const auto b = ring(4);
  const auto h = random_disordered(b, 12);
  const auto r = ith_eigenstate(h, 5);
  const DensityMatrix rho{full_region(b->spec()), 2, r.state * r.state.adjoint(), {}};
  const auto m = build_rho_commutator(rho, b);
  EXPECT_LE(h.coeffs.dot(m.entries * h.coeffs) / h.coeffs.squaredNorm(), 1e-20);
}

TEST(RhoCommutator, GibbsStateKernelIsTheHamiltonian) {
  const auto b = ring(4);
  const auto h = random_disordered(b, 14);
  const auto rho = gibbs_state(h, 1.0);
  const auto m = build_rho_commutator(rho, b);
  EXPECT_LT(psd_defect(m.entries), 1e-10);
  const auto res = recover(m.entries, kDefaultZeroTolerance, h.coeffs);
  EXPECT_LE(*res.angle_to_truth, 1e-6);
}

TEST(HCommutator, ZeroHamiltonianGivesZeroMatrix) {
  const auto b = ring(3);
  const LocalHamiltonian zero(b, Eigen::VectorXd::Zero(36));
  EXPECT_EQ(build_h_commutator(zero, b).entries.cwiseAbs().maxCoeff(), 0.0);
}

TEST(HCommutator, MatchesDenseOracle) {
  const auto b = ring(3);
  const auto h = random_disordered(b, 4);
  const auto ops = oracle::qubit_basis(3, true);
  const Eigen::MatrixXcd dense = oracle::hamiltonian(ops, h.coeffs);
  const auto m = build_h_commutator(h, b);
  EXPECT_LT((m.entries - oracle::commutator_gram(dense, ops, 8.0)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT(psd_defect(m.entries), 1e-10);
}

TEST(HCommutator, XxzConservesTotalSz) {
  const auto b = ring(6);
  const auto h = named_model("xxz", {{"Delta", 0.6}}, b);
  const auto m = build_h_commutator(h, b);
  const auto sz = total_sz(*b);
  EXPECT_LE(sz.dot(m.entries * sz), 1e-20);
  EXPECT_LE(h.coeffs.dot(m.entries * h.coeffs), 1e-20);
  EXPECT_GE(correlation_spectrum(m).kernel_dim, 2);
}

TEST(CorrelationSpectrum, DisorderedEigenstateHasSingleZero) {
  const auto b = ring(8);
  const auto h = random_disordered(b, 123);
  for (std::size_t i : {std::size_t{0}, std::size_t{128}}) {
    const auto s = correlation_spectrum(build_pure(ith_eigenstate(h, i), b));
    EXPECT_EQ(s.kernel_dim, 1) << i;
    EXPECT_LT((s.eigen_operators.transpose() * s.eigen_operators - Eigen::MatrixXd::Identity(96, 96)).cwiseAbs().maxCoeff(),
              1e-10);
    for (Eigen::Index k = 1; k < s.eigenvalues.size(); ++k) EXPECT_LE(s.eigenvalues(k - 1), s.eigenvalues(k));
  }
}

TEST(CorrelationSpectrum, XxzEigenstateHasAtLeastTwoZeros) {
  const auto b = ring(6);
  const auto h = named_model("xxz", {{"Delta", 0.6}, {"hz", 0.3}}, b);
  const auto spec = diagonalize(h);
  int checked = 0;
  for (std::size_t i = 0; i < spec.size() && checked < 3; ++i) {
    const auto r = spec.record(i);
    if (r.degenerate) continue;
    const auto m = build_pure(r, b);
    const auto sz = total_sz(*b);
    EXPECT_LE(fluctuation(sz, m), 1e-12);
    EXPECT_LE(fluctuation(h.coeffs, m), 1e-12);
    EXPECT_GE(correlation_spectrum(m).kernel_dim, 2);
    ++checked;
  }
  EXPECT_EQ(checked, 3);
}

TEST(CorrelationSpectrum, DecoupledProductEigenstateIsDegenerate) {
  const auto b = ring(4);
  const auto h = named_model("decoupled", {{"disorder", 1.0}, {"seed", 2}}, b);
  const auto r = ith_eigenstate(h, 0);
  const auto s = correlation_spectrum(build_pure(r, b));
  EXPECT_GT(s.kernel_dim, 1);
  // Brute-force kernel dimension from the dense oracle.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(oracle::pure_correlation(r.state, oracle::qubit_basis(4, true)));
  const double top = es.eigenvalues().maxCoeff();
  EXPECT_EQ((es.eigenvalues().array() < 1e-8 * top).count(), s.kernel_dim);
}

TEST(CorrelationSpectrum, ZeroMatrixIsAllKernel) {
  const auto s = correlation_spectrum(Eigen::MatrixXd::Zero(5, 5));
  EXPECT_EQ(s.kernel_dim, 5);
}

TEST(Invariance, PsdBasisChangeAndLocalUnitary) {
  const auto b = ring(6);
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto v = seed % 2 ? oracle::random_state(64, seed) : ith_eigenstate(random_disordered(b, seed), 9).state;
    const auto m = build_pure(v, b);
    EXPECT_LT(psd_defect(m.entries), 1e-10);

    const Eigen::MatrixXd q = oracle::random_orthogonal(72, 100 + seed);
    const Eigen::MatrixXd rotated = q.transpose() * m.entries * q;
    EXPECT_LT(oracle::spectrum_distance(sym_eigenvalues(m.entries), sym_eigenvalues(0.5 * (rotated + rotated.transpose()))),
              1e-10);

    Eigen::VectorXcd u = v;
    for (int site = 0; site < 6; ++site) u = oracle::apply_site_unitary(u, site, oracle::random_unitary2(200 + seed * 7 + site));
    EXPECT_LT(oracle::spectrum_distance(sym_eigenvalues(m.entries), sym_eigenvalues(build_pure(u, b).entries)), 1e-10);
  }
}

TEST(RegionDecomposition, EigenstateHasZeroTotalButPositiveParts) {
  const auto b = ring(8);
  const auto h = random_disordered(b, 77);
  const auto r = ith_eigenstate(h, 100);
  const auto d = region_fluctuation_decomposition(r.state, *b, h.coeffs, {{0, 1, 2, 3}, {4, 5, 6, 7}});
  EXPECT_LE(std::abs(d.total), 1e-18 * h.coeffs.squaredNorm());
  EXPECT_GT(d.region_sum, 0.1);
  EXPECT_GT(d.ratio, 1e6);
}

TEST(RegionDecomposition, ProductStateIsAdditive) {
  const auto b = ring(6);
  const LatticeSpec& s = b->spec();
  Eigen::VectorXcd v = product_state(s, {0, 1, 0, 0, 1, 1});
  // Rotate every site so sigma_z has nonzero variance.
  for (int site = 0; site < 6; ++site) v = oracle::apply_site_unitary(v, site, oracle::random_unitary2(site + 1));
  const auto d = region_fluctuation_decomposition(v, *b, total_sz(*b), {{0, 1}, {2, 3, 4}, {5}});
  EXPECT_NEAR(d.total, d.region_sum, 1e-12);
  EXPECT_GT(d.total, 0.1);
}

TEST(RegionDecomposition, ExtensiveForMidSpectrumStates) {
  const auto b = ring(10);
  const auto h = random_disordered(b, 5);
  const auto r = ith_eigenstate(h, 512);
  const auto d = region_fluctuation_decomposition(r.state, *b, h.coeffs, {{0, 1, 2, 3, 4}, {5, 6, 7, 8, 9}});
  ASSERT_EQ(d.per_region.size(), 2U);
  const double hi = std::max(d.per_region[0], d.per_region[1]);
  const double lo = std::min(d.per_region[0], d.per_region[1]);
  EXPECT_LE(hi, 2.0 * lo);
}

TEST(RegionDecomposition, RejectsBadPartitions) {
  const auto b = ring(6);
  const auto v = oracle::random_state(64, 1);
  const auto w = total_sz(*b);
  EXPECT_THROW(region_fluctuation_decomposition(v, *b, w, {{0, 1, 2}, {2, 3, 4, 5}}), std::invalid_argument);
  EXPECT_THROW(region_fluctuation_decomposition(v, *b, w, {{0, 1, 2}, {3, 4}}), std::invalid_argument);
  EXPECT_THROW(region_fluctuation_decomposition(v, *b, w, {{0, 2}, {1, 3, 4, 5}}), std::invalid_argument);
}
