// Copyright 2026 The kerramp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <random>

#include "kerramp/fock.hpp"
#include "kerramp/squeeze.hpp"
#include "oracles.hpp"

using namespace kerramp;

TEST(FockSpace, RejectsBadDims) {
  EXPECT_THROW(FockSpace({}), std::invalid_argument);
  EXPECT_THROW(FockSpace({2, 1}), std::invalid_argument);
  EXPECT_THROW(FockSpace({3}, -1), std::invalid_argument);
}

TEST(FockSpace, IndexUsesModeZeroAsMostSignificant) {
  const FockSpace s({2, 3, 4});
  EXPECT_EQ(s.dim(), 24);
  EXPECT_EQ(s.stride(0), 12);
  EXPECT_EQ(s.stride(2), 1);
  EXPECT_EQ(s.index({1, 2, 3}), 12 + 2 * 4 + 3);
  EXPECT_EQ(s.occupation(23), (std::vector<int>{1, 2, 3}));
  EXPECT_THROW(s.index({2, 0, 0}), std::out_of_range);
}

TEST(Operator, RejectsWrongShape) {
  EXPECT_THROW(Operator(FockSpace({2, 2}), Matrix::Zero(3, 3)), std::invalid_argument);
}

TEST(Annihilation, LadderEntries) {
  EXPECT_THROW(annihilation(1), std::invalid_argument);
  Matrix expected2(2, 2);
  expected2 << 0, 1, 0, 0;
  EXPECT_EQ(annihilation(2).mat, expected2);
  EXPECT_DOUBLE_EQ(annihilation(3).mat(1, 2).real(), std::sqrt(2.0));
  const Matrix a = annihilation(4).mat;
  const Matrix n = a.adjoint() * a;
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(n(k, k).real(), k, 1e-15);
  EXPECT_NEAR((n - Matrix(n.diagonal().asDiagonal())).norm(), 0.0, 1e-15);
}

TEST(Annihilation, CanonicalCommutatorBelowEdge) {
  for (int d : {3, 6, 11}) {
    const Matrix a = annihilation_matrix(d);
    const Matrix c = a * a.adjoint() - a.adjoint() * a;
    const Matrix block = c.topLeftCorner(d - 1, d - 1);
    // sqrt(n) * sqrt(n) rounds at the last bit.
    EXPECT_LE((block - Matrix::Identity(d - 1, d - 1)).cwiseAbs().maxCoeff(), 4 * 2.3e-16 * d) << d;
  }
}

TEST(Embed, KroneckerOrder) {
  const FockSpace s22({2, 2});
  const Matrix a = annihilation_matrix(2);
  const Matrix i2 = Matrix::Identity(2, 2);
  EXPECT_EQ(embed_matrix(a, 0, s22), oracle::kron(a, i2));
  EXPECT_EQ(embed_matrix(a, 1, s22), oracle::kron(i2, a));
  const FockSpace s23({2, 3});
  EXPECT_EQ(embed_matrix(number_matrix(3), 1, s23), oracle::kron(i2, number_matrix(3)));
  EXPECT_THROW(embed_matrix(a, 1, s23), std::invalid_argument);
  EXPECT_THROW(embed_matrix(a, 2, s23), std::out_of_range);
}

TEST(ApplyOnMode, MatchesEmbeddedProduct) {
  std::mt19937 rng(7);
  const FockSpace s({3, 4, 2});
  const Matrix op = oracle::random_matrix(4, rng);
  const Vector v = oracle::random_matrix(24, rng).col(0);
  EXPECT_LT((apply_on_mode(op, 1, s, v) - embed_matrix(op, 1, s) * v).norm(), 1e-12);
}

TEST(HsNorm, Examples) {
  EXPECT_DOUBLE_EQ(hs_norm(Matrix::Identity(4, 4)), 2.0);
  EXPECT_DOUBLE_EQ(hs_norm(Matrix::Zero(4, 4)), 0.0);
  Matrix m = Matrix::Identity(4, 4);
  m(3, 3) = std::polar(1.0, -pi);
  EXPECT_NEAR(hs_norm(Matrix(m - Matrix::Identity(4, 4))), 2.0, 1e-15);
}

TEST(DensityMatrix, Validation) {
  const FockSpace s({2});
  Matrix m = Matrix::Identity(2, 2);
  EXPECT_THROW(DensityMatrix(Operator(s, m)), std::invalid_argument);  // trace 2
  m << 0.5, 0.7, 0.7, 0.5;
  EXPECT_THROW(DensityMatrix(Operator(s, m)), std::invalid_argument);  // negative eigenvalue
  m << 0.5, cplx(0, 0.1), cplx(0, 0.1), 0.5;
  EXPECT_THROW(DensityMatrix(Operator(s, m)), std::invalid_argument);  // not Hermitian
  m << 0.5, 0.0, 0.0, 0.5;
  EXPECT_NO_THROW(DensityMatrix(Operator(s, m)));
}

TEST(PartialTrace, ProductAndBellStates) {
  std::mt19937 rng(11);
  const Matrix ra = oracle::random_density(2, rng);
  const Matrix rb = oracle::random_density(3, rng);
  const FockSpace s({2, 3});
  const DensityMatrix rho(Operator(s, oracle::kron(ra, rb)));
  EXPECT_LT((partial_trace(rho, {0}).mat() - ra).norm(), 1e-12);
  EXPECT_LT((partial_trace(rho, {1}).mat() - rb).norm(), 1e-12);
  EXPECT_THROW(partial_trace(rho, {}), std::invalid_argument);

  const FockSpace q({2, 2});
  Vector bell = Vector::Zero(4);
  bell(q.index({0, 0})) = 1.0;
  bell(q.index({1, 1})) = 1.0;
  const DensityMatrix b = DensityMatrix::pure(q, bell);
  EXPECT_LT((partial_trace(b, {0}).mat() - 0.5 * Matrix::Identity(2, 2)).norm(), 1e-15);
}

TEST(PartialTrace, TraceAndLinearityOnRandomInputs) {
  std::mt19937 rng(5);
  const FockSpace s({2, 3, 2});
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix x = oracle::random_density(12, rng);
    const Matrix y = oracle::random_density(12, rng);
    for (const auto& keep : std::vector<std::vector<int>>{{0}, {1}, {2}, {0, 2}, {1, 2}}) {
      const Matrix px = partial_trace_matrix(x, s, keep);
      const Matrix py = partial_trace_matrix(y, s, keep);
      EXPECT_NEAR(std::abs(px.trace() - x.trace()), 0.0, 1e-12);
      const Matrix pxy = partial_trace_matrix(Matrix(0.3 * x + 0.7 * y), s, keep);
      EXPECT_LT((pxy - (0.3 * px + 0.7 * py)).norm(), 1e-12);
    }
  }
}

TEST(Vectorization, RowStacking) {
  Matrix m(2, 2);
  m << 1, 2, 3, 4;
  Vector expected(4);
  expected << 1, 2, 3, 4;
  EXPECT_EQ(vec_row(m), expected);
  EXPECT_THROW(devec_row(Vector::Zero(3)), std::invalid_argument);
}

TEST(Vectorization, RoundTripIsExact) {
  std::mt19937 rng(3);
  for (int n : {1, 2, 5, 9}) {
    const Matrix m = oracle::random_matrix(n, rng);
    EXPECT_EQ(devec_row(vec_row(m)), m);
  }
}

TEST(Vectorization, SandwichMatchesDirectProduct) {
  std::mt19937 rng(19);
  const FockSpace s({3});
  const Operator a(s, oracle::random_matrix(3, rng));
  const Operator b(s, oracle::random_matrix(3, rng));
  const Matrix rho = oracle::random_matrix(3, rng);
  const SuperOperator sw = sandwich_superop(a, b);
  EXPECT_LT((sw.mat * vec_row(rho) - vec_row(a.mat * rho * b.mat)).norm(), 1e-12);
  EXPECT_EQ(sandwich_superop(Operator::identity(s), Operator::identity(s)).mat, Matrix::Identity(9, 9));
  EXPECT_THROW(sandwich_matrix(Matrix::Zero(2, 2), Matrix::Zero(3, 3)), std::invalid_argument);
}

// Truncating the squeezer generator disturbs matrix elements far below the
// edge, so guard-band agreement is asserted only on the low block that the
// guard actually protects.
TEST(GuardBand, ProjectedSqueezerMatchesLargeCutoffOnLowBlock) {
  struct Case {
    double r;
    int d;
    int low;
  };
  for (const Case c : {Case{0.2, 40, 20}, Case{0.6, 60, 20}, Case{1.0, 60, 10}}) {
    const Matrix guarded = squeeze_matrix(c.r, 0.0, c.d, 10);
    const Matrix reference = squeeze_matrix(c.r, 0.0, c.d + 100, 0).topLeftCorner(c.d, c.d);
    EXPECT_LT((guarded - reference).topLeftCorner(c.low, c.low).cwiseAbs().maxCoeff(), tol::trunc) << c.r;
  }
}

TEST(GuardBand, GuardedAndUnguardedAgreeOnLowBlock) {
  const Matrix guarded = squeeze_matrix(0.2, pi, 40, 10);
  const Matrix bare = squeeze_matrix(0.2, pi, 40, 0);
  EXPECT_LT((guarded - bare).topLeftCorner(20, 20).cwiseAbs().maxCoeff(), tol::trunc);
  // Closer to the edge the truncation shows up.
  EXPECT_GT((guarded - bare).topLeftCorner(30, 30).cwiseAbs().maxCoeff(), 1e-4);
}
