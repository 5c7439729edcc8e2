#include "hamrec.hpp"
#include "oracle/dense_oracle.hpp"

#include <gtest/gtest.h>

using namespace hamrec;

namespace {

LatticeSpec ring(int n) { return {n, 2, 2, Boundary::periodic}; }
LatticeSpec chain(int n) { return {n, 2, 2, Boundary::open}; }

double gram_defect(const LocalBasis& b) {
  double worst = 0.0;
  std::vector<Eigen::MatrixXcd> dense;
  for (std::size_t i = 0; i < b.size(); ++i) dense.push_back(b.dense(i));
  for (std::size_t i = 0; i < b.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      const double g = oracle::hs(dense[i], dense[j]);
      worst = std::max(worst, std::abs(g - (i == j ? 1.0 : 0.0)));
    }
  }
  return worst;
}

}  // namespace

TEST(LatticeSpec, RejectsInvalidGeometry) {
  EXPECT_THROW((LatticeSpec{1, 2, 2, Boundary::open}.validate()), std::invalid_argument);
  EXPECT_THROW((LatticeSpec{2, 2, 2, Boundary::periodic}.validate()), std::invalid_argument);
  EXPECT_THROW((LatticeSpec{3, 2, 4, Boundary::open}.validate()), std::invalid_argument);
  EXPECT_THROW((LatticeSpec{4, 1, 2, Boundary::open}.validate()), std::invalid_argument);
  EXPECT_THROW(build_local_basis({4, 2, 3, Boundary::periodic}), std::invalid_argument);
  EXPECT_NO_THROW((LatticeSpec{3, 2, 2, Boundary::periodic}.validate()));
  EXPECT_EQ(ring(5).dim(), 32U);
}

TEST(LocalBasis, SizesFollowTheCountingRule) {
  EXPECT_EQ(build_local_basis(ring(4)).size(), 48U);
  EXPECT_EQ(build_local_basis(ring(10)).size(), 120U);
  EXPECT_EQ(build_local_basis(chain(2)).size(), 15U);
  for (int n = 2; n <= 8; ++n) EXPECT_EQ(build_local_basis(chain(n)).size(), 12U * n - 9) << n;
  for (int n = 3; n <= 8; ++n) EXPECT_EQ(build_local_basis(ring(n)).full_size(), 12U * n);
}

TEST(LocalBasis, OrderingIsAnchorMajorAndLexicographicInLabels) {
  const LocalBasis b = build_local_basis(ring(4));
  ASSERT_EQ(b.labels_per_site(), 12);
  std::size_t i = 0;
  for (int x = 0; x < 4; ++x) {
    int alpha = 0;
    for (int a = 0; a < 4; ++a) {
      for (int c = 1; c < 4; ++c, ++i, ++alpha) {
        EXPECT_EQ(b.anchor(i), x);
        EXPECT_EQ(b.alpha(i), alpha);
        EXPECT_EQ(b.op(i).labels, (std::vector<int>{a, c}));
        EXPECT_EQ(b.index(x, alpha), i);
      }
    }
  }
  EXPECT_EQ(b.name(b.index(3, 11)), "Z0 Z3");
  EXPECT_EQ(b.name(b.index(1, 2)), "Z2");
}

TEST(LocalBasis, EveryOpMatchesTheKroneckerOracle) {
  for (bool periodic : {true, false}) {
    for (int n : {3, 4}) {
      const LocalBasis b = build_local_basis(periodic ? ring(n) : chain(n));
      const auto ref = oracle::qubit_basis(n, periodic);
      ASSERT_EQ(ref.size(), b.size());
      for (std::size_t i = 0; i < b.size(); ++i) {
        EXPECT_LT((b.dense(i) - ref[i]).cwiseAbs().maxCoeff(), 1e-15) << b.name(i);
        EXPECT_LT((b.pauli(i).dense(n) - ref[i]).cwiseAbs().maxCoeff(), 1e-15) << b.name(i);
      }
    }
  }
}

TEST(LocalBasis, GramMatrixIsIdentityUpTo256Dimensions) {
  for (int n = 3; n <= 8; ++n) {
    EXPECT_LT(gram_defect(build_local_basis(ring(n))), 1e-12) << "ring " << n;
    EXPECT_LT(gram_defect(build_local_basis(chain(n))), 1e-12) << "chain " << n;
  }
  EXPECT_LT(gram_defect(build_local_basis(chain(2))), 1e-12);
}

TEST(LocalBasis, OpsAreTracelessAndHermitian) {
  const LocalBasis b = build_local_basis(ring(4));
  for (std::size_t i = 0; i < b.size(); ++i) {
    const Eigen::MatrixXcd m = b.dense(i);
    EXPECT_LT(std::abs(m.trace()), 1e-14);
    EXPECT_LT((m - m.adjoint()).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(LocalBasis, OpenTwoSiteBasisSpansAllTracelessOperators) {
  const LocalBasis b = build_local_basis(chain(2));
  Eigen::MatrixXcd stack(16, static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < b.size(); ++i) {
    const Eigen::MatrixXcd m = b.dense(i);
    stack.col(static_cast<Eigen::Index>(i)) = Eigen::Map<const Eigen::VectorXcd>(m.data(), 16);
  }
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(stack);
  EXPECT_EQ(lu.rank(), 15);
}

TEST(LocalBasis, QuditBasisIsOrthonormal) {
  for (int d : {3, 4}) {
    const LatticeSpec spec{3, d, 2, Boundary::periodic};
    const LocalBasis b = build_local_basis(spec);
    EXPECT_EQ(b.size(), static_cast<std::size_t>(3 * d * d * (d * d - 1)));
    if (spec.dim() <= 64) {
      EXPECT_LT(gram_defect(b), 1e-12) << d;
    }
  }
}

TEST(LocalBasis, RangeThreeBasis) {
  const LocalBasis b = build_local_basis({5, 2, 3, Boundary::periodic});
  EXPECT_EQ(b.size(), 5U * 16 * 3);
  EXPECT_LT(gram_defect(b), 1e-12);
}

TEST(LocalBasis, RestrictionKeepsOpsInsideTheRegion) {
  const auto full = build_local_basis(ring(8));
  const auto region = make_region(full.spec(), 6, 4);  // 6 7 0 1
  EXPECT_EQ(region, (std::vector<int>{6, 7, 0, 1}));
  const LocalBasis sub = restrict_to_region(full, region);
  EXPECT_EQ(sub.size(), 12U * 4 - 9);
  for (std::size_t i = 0; i < sub.size(); ++i) EXPECT_TRUE(sub.supported_in(i, region));
  const LocalBasis windows = restrict_to_windows(full, region);
  EXPECT_EQ(windows.size(), 36U);
  EXPECT_THROW(validate_region(full.spec(), {1, 3}), std::invalid_argument);
  EXPECT_THROW(validate_region(chain(4), {3, 0}), std::invalid_argument);
}

TEST(ApplyOperator, SigmaZOnUpAndXXOnZeroZero) {
  Eigen::VectorXcd up = Eigen::VectorXcd::Zero(2);
  up(0) = 1.0;
  EXPECT_LT((apply_operator(PauliString::parse("Z"), up) - up).norm(), 1e-15);

  Eigen::VectorXcd zz = Eigen::VectorXcd::Zero(4);
  zz(0) = 1.0;
  const Eigen::VectorXcd out = apply_operator(PauliString::parse("XX"), zz);
  EXPECT_NEAR(std::abs(out(3) - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(out.norm(), 1.0, 1e-15);
}

TEST(ApplyOperator, RandomStringsMatchDenseProducts) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> letter(0, 3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> labels(3);
    std::map<int, Pauli> letters;
    for (int x = 0; x < 3; ++x) {
      labels[static_cast<std::size_t>(x)] = letter(rng);
      if (labels[static_cast<std::size_t>(x)]) letters[x] = static_cast<Pauli>(labels[static_cast<std::size_t>(x)]);
    }
    const auto v = oracle::random_state(8, 100 + static_cast<std::uint64_t>(trial));
    const Eigen::VectorXcd expected = oracle::pauli_string(labels) * v;
    EXPECT_LT((apply_operator(PauliString(letters), v) - expected).norm(), 1e-14);
  }
}

TEST(ApplyOperator, BasisOpsMatchDenseUpToFourSites) {
  for (int n : {3, 4}) {
    const LocalBasis b = build_local_basis(ring(n));
    const auto ref = oracle::qubit_basis(n, true);
    const auto v = oracle::random_state(b.spec().dim(), 5);
    for (std::size_t i = 0; i < b.size(); ++i) {
      EXPECT_LT((apply_operator(b.product_operator(i), v) - ref[i] * v).cwiseAbs().maxCoeff(), 1e-14);
    }
  }
}

TEST(ApplyOperator, RejectsDimensionMismatch) {
  const LocalBasis b = build_local_basis(ring(3));
  EXPECT_THROW(apply_operator(b.product_operator(0), Eigen::VectorXcd::Zero(4)), std::invalid_argument);
  EXPECT_THROW(apply_operator(PauliString::parse("XYZ"), Eigen::VectorXcd::Zero(4)), std::invalid_argument);
}

TEST(PauliString, ClosureOverAllTwoSitePairs) {
  for (int a = 0; a < 16; ++a) {
    for (int b = 0; b < 16; ++b) {
      if (a == 0 || b == 0) continue;
      const std::vector<int> la{a % 4, a / 4}, lb{b % 4, b / 4};
      std::map<int, Pauli> ma, mb;
      for (int x = 0; x < 2; ++x) {
        if (la[static_cast<std::size_t>(x)]) ma[x] = static_cast<Pauli>(la[static_cast<std::size_t>(x)]);
        if (lb[static_cast<std::size_t>(x)]) mb[x] = static_cast<Pauli>(lb[static_cast<std::size_t>(x)]);
      }
      const PauliString p = PauliString(ma) * PauliString(mb);
      const Eigen::MatrixXcd expected = oracle::pauli_string(la) * oracle::pauli_string(lb);
      EXPECT_LT((p.dense(2) - expected).cwiseAbs().maxCoeff(), 1e-15) << a << " " << b;
      EXPECT_EQ(p.is_hermitian(), (expected - expected.adjoint()).cwiseAbs().maxCoeff() < 1e-15);
    }
  }
}

TEST(PauliString, ParseAndNorm) {
  const PauliString p = PauliString::parse("-iXYZ");
  EXPECT_EQ(p.weight(), 3);
  EXPECT_FALSE(p.is_hermitian());
  EXPECT_EQ(p.str(3), "-iXYZ");
  const PauliString h = PauliString::parse("XIZ");
  EXPECT_NEAR(hs_inner(h.dense(3), h.dense(3)), 1.0, 1e-15);
}

TEST(HsInner, Examples) {
  const Eigen::MatrixXcd z1 = oracle::pauli_string({3, 0});
  const Eigen::MatrixXcd z2 = oracle::pauli_string({0, 3});
  EXPECT_NEAR(hs_inner(z1, z1), 1.0, 1e-15);
  EXPECT_NEAR(hs_inner(z1, z2), 0.0, 1e-15);
  EXPECT_THROW(hs_inner(z1, Eigen::MatrixXcd::Zero(2, 2)), std::invalid_argument);

  const LocalBasis b = build_local_basis(ring(4));
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> pick(0, b.size() - 1);
  for (int t = 0; t < 40; ++t) {
    const std::size_t i = pick(rng), j = pick(rng);
    if (i == j) continue;
    EXPECT_NEAR(hs_inner(b.dense(i), b.dense(j)), 0.0, 1e-14);
    EXPECT_NEAR(hs_inner(b.dense(i), b.dense(j)), hs_inner(b.dense(j), b.dense(i)), 1e-15);
  }
}

TEST(LocalBasis, FindByLabels) {
  const LocalBasis b = build_local_basis(ring(5));
  const auto i = b.find({{4, 1}, {0, 3}});
  ASSERT_TRUE(i.has_value());
  EXPECT_EQ(b.anchor(*i), 4);
  EXPECT_EQ(b.op(*i).labels, (std::vector<int>{1, 3}));
  EXPECT_FALSE(b.find({{0, 1}, {2, 1}}).has_value());
}
