#include <gtest/gtest.h>

#include <Eigen/LU>

#include "support.hpp"

using namespace d3m;
using d3m::testing::Rng;

namespace {

double reconstruction_error(const DenseMatrix& M, const DenseFactor& F) {
  const DenseMatrix PMPt = d3m::testing::permute_symmetric(M, F.permutation());
  return (PMPt - F.reconstruct()).norm() / M.norm();
}

}  // namespace

TEST(DenseLdlt, IdentityIsTrivial) {
  const DenseMatrix I = DenseMatrix::Identity(4, 4);
  const DenseFactor F = dense_ldlt_bk(I);
  EXPECT_EQ(F.permutation(), (std::vector<Index>{0, 1, 2, 3}));
  EXPECT_EQ(F.num_2x2_pivots(), 0);
  EXPECT_TRUE(F.unit_lower().isApprox(I));
  EXPECT_TRUE(F.block_diagonal().isApprox(I));
  EXPECT_EQ(F.entries(), 10);
}

TEST(DenseLdlt, AntiDiagonalNeedsOne2x2) {
  DenseMatrix M(2, 2);
  M << 0.0, 1.0, 1.0, 0.0;
  const DenseFactor F = dense_ldlt_bk(M);
  EXPECT_EQ(F.num_2x2_pivots(), 1);
  EXPECT_TRUE(F.unit_lower().isApprox(DenseMatrix::Identity(2, 2)));
  EXPECT_TRUE(F.block_diagonal().isApprox(M));
  DenseVector b(2);
  b << cplx(1.0, 2.0), cplx(-3.0, 0.5);
  const DenseVector x = F.solve(b);
  EXPECT_LT((M * x - b).norm(), 1e-15);
}

TEST(DenseLdlt, SolveSym2x2AgainstInverse) {
  Rng rng(11);
  for (int t = 0; t < 50; ++t) {
    Eigen::Matrix2cd B;
    B(0, 0) = d3m::testing::random_cplx(rng);
    B(1, 0) = B(0, 1) = d3m::testing::random_cplx(rng);
    B(1, 1) = d3m::testing::random_cplx(rng);
    const Eigen::Vector2cd r(d3m::testing::random_cplx(rng), d3m::testing::random_cplx(rng));
    const Eigen::Vector2cd ref = B.inverse() * r;
    const auto [x0, x1] = solve_sym_2x2(B(0, 0), B(1, 0), B(1, 1), r(0), r(1));
    EXPECT_LT(std::abs(x0 - ref(0)) + std::abs(x1 - ref(1)), 1e-12 * (1.0 + ref.norm()));
  }
}

TEST(DenseLdlt, RandomReconstruction) {
  Rng rng(7);
  const DenseMatrix M = d3m::testing::random_symmetric(12, rng);
  const DenseFactor F = dense_ldlt_bk(M);
  EXPECT_LE(reconstruction_error(M, F), 1e-13);
  EXPECT_LE(F.growth_factor(), 2.57);
}

TEST(DenseLdlt, ForcedTwoByTwoPivots) {
  Rng rng(3);
  Index total_2x2 = 0;
  for (Index n : {2, 3, 7, 16, 33, 64}) {
    const DenseMatrix M = d3m::testing::hidden_2x2_symmetric(n, rng);
    const DenseFactor F = dense_ldlt_bk(M);
    total_2x2 += F.num_2x2_pivots();
    EXPECT_LE(reconstruction_error(M, F), 1e-13) << "n=" << n;
    EXPECT_LE(F.growth_factor(), 2.57) << "n=" << n;
    // Pivot kinds pair up.
    const auto& kinds = F.pivot_kinds();
    for (Index c = 0; c < n; ++c) {
      if (kinds[c] == PivotKind::kFirstOf2x2) {
        ASSERT_LT(c + 1, n);
        EXPECT_EQ(kinds[c + 1], PivotKind::kSecondOf2x2);
      }
    }
  }
  EXPECT_GT(total_2x2, 0);
}

TEST(DenseLdlt, SolveMatchesPartialPivotLu) {
  Rng rng(5);
  for (Index n : {1, 5, 40, 150}) {
    const DenseMatrix M = d3m::testing::random_symmetric(n, rng);
    const DenseMatrix B = d3m::testing::random_matrix(n, 3, rng);
    const DenseMatrix ref = M.partialPivLu().solve(B);
    const DenseMatrix X = dense_ldlt_bk(M).solve(B);
    EXPECT_LE((X - ref).norm() / ref.norm(), 1e-10) << "n=" << n;
  }
}

TEST(DenseLdlt, BlockedAndUnblockedPathsAgree) {
  Rng rng(9);
  for (Index n : {97, 130, 211}) {
    for (int kind = 0; kind < 2; ++kind) {
      const DenseMatrix M = kind == 0 ? d3m::testing::random_symmetric(n, rng)
                                      : d3m::testing::singular_minor_symmetric(n, rng);
      const DenseFactor blocked = dense_ldlt_bk(M, kDefaultPivotTol, 16);
      const DenseFactor unblocked = dense_ldlt_bk(M, kDefaultPivotTol, 0);
      EXPECT_LE(reconstruction_error(M, blocked), 1e-13) << "n=" << n;
      EXPECT_LE(reconstruction_error(M, unblocked), 1e-13) << "n=" << n;
      EXPECT_LE(blocked.growth_factor(), 2.57);
      EXPECT_LE(unblocked.growth_factor(), 2.57);
      // Same pivot decisions up to roundoff: identical permutations are the
      // norm for these well-separated random matrices.
      EXPECT_EQ(blocked.permutation(), unblocked.permutation()) << "n=" << n;
      EXPECT_EQ(blocked.num_2x2_pivots(), unblocked.num_2x2_pivots());
    }
  }
}

TEST(DenseLdlt, SingularMatrixThrows) {
  DenseMatrix M = DenseMatrix::Zero(3, 3);
  M(0, 0) = 1.0;
  M(1, 0) = M(0, 1) = 1.0;
  M(1, 1) = 1.0;
  try {
    dense_ldlt_bk(M);
    FAIL() << "expected SingularBlock";
  } catch (const SingularBlock& e) {
    EXPECT_EQ(e.step(), 1);
  }
  EXPECT_THROW(dense_ldlt_bk(DenseMatrix::Zero(4, 4)), SingularBlock);
}

TEST(DenseLdlt, RejectsNonSquare) {
  EXPECT_THROW(dense_ldlt_bk(DenseMatrix::Zero(3, 2)), DimensionError);
}

TEST(DenseLdlt, EmptyMatrix) {
  const DenseFactor F = dense_ldlt_bk(DenseMatrix(0, 0));
  EXPECT_EQ(F.size(), 0);
  EXPECT_EQ(F.entries(), 0);
}

TEST(DenseLdlt, DiagonalSolveRows) {
  Rng rng(21);
  const DenseMatrix M = d3m::testing::hidden_2x2_symmetric(10, rng);
  const DenseFactor F = dense_ldlt_bk(M);
  DenseMatrix X = d3m::testing::random_matrix(4, 10, rng);
  const DenseMatrix ref = X * F.block_diagonal().inverse();
  F.diagonal_solve_rows(X);
  EXPECT_LE((X - ref).norm() / ref.norm(), 1e-12);
}
