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

#include <cmath>
#include <limits>

#include "kerramp/gate.hpp"
#include "oracles.hpp"

using namespace kerramp;

namespace {

Matrix restrict_cols(const Matrix& cols, const CompSubspace& sub) {
  Matrix out(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) out(i, j) = cols(sub.basis()[i], j);
  return out;
}

}  // namespace

TEST(CZ, DiagonalEntries) {
  EXPECT_EQ(cz_matrix(CZSpec(0.0)).mat, Matrix::Identity(4, 4));
  const Matrix m = cz_matrix(CZSpec(pi)).mat;
  EXPECT_NEAR(std::abs(m(3, 3) + 1.0), 0.0, 1e-15);
  EXPECT_EQ(m.topLeftCorner(3, 3), Matrix::Identity(3, 3));
  EXPECT_NEAR(std::abs(cz_matrix(CZSpec(pi / 2)).mat(3, 3) - cplx(0, -1)), 0.0, 1e-15);
  // phases wrap through the exponential
  EXPECT_LT((cz_matrix(CZSpec(pi + 2 * pi)).mat - m).norm(), 1e-14);
  EXPECT_THROW(CZSpec(std::numeric_limits<double>::infinity()), std::invalid_argument);
}

TEST(CompSubspace, OrderingAndValidation) {
  const FockSpace s({3, 4});
  const CompSubspace sub(s);
  EXPECT_EQ(sub.basis()[0], s.index({0, 0}));
  EXPECT_EQ(sub.basis()[1], s.index({0, 1}));
  EXPECT_EQ(sub.basis()[2], s.index({1, 0}));
  EXPECT_EQ(sub.basis()[3], s.index({1, 1}));
  const Matrix k = sub.kets();
  EXPECT_EQ(k.adjoint() * k, Matrix::Identity(4, 4));
  EXPECT_THROW(CompSubspace(s, 0, 0), std::invalid_argument);
  EXPECT_THROW(CompSubspace(s, 0, 2), std::out_of_range);
  // extra modes stay in vacuum
  const FockSpace s3({2, 2, 3});
  EXPECT_EQ(CompSubspace(s3).basis()[3], s3.index({1, 1, 0}));
}

TEST(Restrict, Examples) {
  const FockSpace s({5, 5});
  const CompSubspace sub(s);
  EXPECT_EQ(restrict(Operator::identity(s), sub), Matrix::Identity(4, 4));
  const KerrSpec kerr = KerrSpec::two_mode(1.0);
  const double t = 0.37;
  const Operator u = unitary_evolution(cross_kerr_h(kerr, s), t);
  EXPECT_LT((restrict(u, sub) - cz_matrix(CZSpec(t)).mat).norm(), 1e-15);
  const double r = 0.45;
  const SequenceSpec seq(Variant::single_mode, 1, t, r, kerr);
  EXPECT_LT((restrict(amplified_target(seq, s), sub) - cz_matrix(CZSpec(std::cosh(2 * r) * t)).mat).norm(), 1e-14);
  EXPECT_THROW(restrict(Matrix::Identity(4, 4), sub), std::invalid_argument);
}

TEST(GateError, Examples) {
  const FockSpace s({4, 4});
  const CompSubspace sub(s);
  EXPECT_NEAR(gate_error(Operator::identity(s), pi, sub), 2.0, 1e-15);
  // ordering does not change the value: swap the middle pair
  Matrix u = restrict(Operator::identity(s), sub);
  std::swap(u(1, 1), u(2, 2));
  EXPECT_NEAR(gate_error_restricted(u, pi), 2.0, 1e-15);
}

TEST(GateError, EigenstateExactnessOfAmplifiedTarget) {
  const KerrSpec kerr = KerrSpec::two_mode(1.0);
  const FockSpace s({6, 6});
  const CompSubspace sub(s);
  for (double r : {0.0, 0.3, 1.1, 2.0}) {
    for (double t : {1e-3, 0.2, 1.7}) {
      for (Variant v : {Variant::single_mode, Variant::two_mode}) {
        const SequenceSpec seq(v, 1, t, r, kerr);
        const double phi = seq.amplification() * kerr.chi * t;
        EXPECT_LE(gate_error(amplified_target(seq, s), phi, sub), 1e-9) << r << " " << t;
      }
    }
  }
}

TEST(PhaseFrame, BetweenDiagonalHamiltonians) {
  const FockSpace s({3, 3});
  const CompSubspace sub(s);
  const Operator h = cross_kerr_h(KerrSpec::two_mode(1.0), s);
  const Operator shifted = h + Operator(s, Matrix(0.25 * Matrix::Identity(9, 9)));
  const PhaseFrame f = PhaseFrame::between(shifted, h, 2.0, sub);
  for (int q = 0; q < 4; ++q) EXPECT_NEAR(std::abs(f.phases[q] - std::polar(1.0, -0.5)), 0.0, 1e-15);
  EXPECT_EQ(PhaseFrame::identity().matrix(), Matrix::Identity(4, 4));
  // the exact limit is the corrected target to rounding
  const SequenceSpec seq(Variant::two_mode, 1, 0.4, 0.6, KerrSpec::two_mode(1.0));
  const double phi = seq.amplification() * 0.4;
  EXPECT_LT(gate_error(trotter_limit(seq, s), phi, sub, sequence_frame(seq, sub)), 1e-13);
  EXPECT_GT(gate_error(trotter_limit(seq, s), phi, sub), 0.1);
}

TEST(F, EndpointValues) {
  EXPECT_DOUBLE_EQ(f_of_r(0.0), 2.0);
  const double f_inf = std::sqrt(15.0 + 0.25 * std::pow(std::sqrt(151.0) + std::sqrt(55.0), 2));
  EXPECT_NEAR(f_inf, 10.586, 1e-3);
  EXPECT_NEAR(f_of_r(20.0), f_inf, 1e-12);
  EXPECT_THROW(f_of_r(-0.1), std::invalid_argument);
}

TEST(F, MatchesNormVectorOracle) {
  for (double r : {0.05, 0.2, 0.5, 1.0, 2.5}) EXPECT_NEAR(f_of_r(r), oracle::f_from_norm_vectors(r), 1e-12) << r;
  EXPECT_NEAR(f_of_r(0.5), oracle::f_from_norm_vectors(0.5, 2.3), 1e-12);
}

TEST(F, ContinuousAndBoundedOnGrid) {
  const double f_inf = f_of_r(50.0);
  double prev = f_of_r(0.0);
  for (int k = 1; k <= 5000; ++k) {
    const double f = f_of_r(5.0 * k / 5000);
    EXPECT_LE(f, f_inf + 1e-12);
    EXPECT_LT(std::abs(f - prev), 0.05);
    prev = f;
  }
}

TEST(TrotterBound, Examples) {
  EXPECT_DOUBLE_EQ(trotter_bound(1.0, 1.0, 0.0, 1), 0.25);
  EXPECT_THROW(trotter_bound(1.0, 1.0, 0.0, 0), std::invalid_argument);
  EXPECT_THROW(trotter_bound_phase(1.0, 0.0, 0), std::invalid_argument);
  double prev = trotter_bound(1.0, 0.5, 0.4, 1);
  for (int n = 2; n <= 1024; n *= 2) {
    const double b = trotter_bound(1.0, 0.5, 0.4, n);
    EXPECT_NEAR(b, prev / 2, 1e-15);
    prev = b;
  }
  // large squeezing: phi^2 f(inf) / 8N with phi = chi t cosh 2r
  const double r = 6.0;
  const double t = 1e-5;
  const double phi = t * std::cosh(2 * r);
  const double f_inf = std::sqrt(15.0 + 0.25 * std::pow(std::sqrt(151.0) + std::sqrt(55.0), 2));
  EXPECT_NEAR(trotter_bound(1.0, t, r, 3) / (phi * phi * f_inf / 24), 1.0, 1e-9);
  EXPECT_NEAR(trotter_bound_phase(phi, r, 3), trotter_bound(1.0, t, r, 3), 1e-12);
}

TEST(Units, Conversions) {
  EXPECT_NEAR(db_to_r(8.0), 0.92103, 1e-5);
  EXPECT_NEAR(std::pow(std::cosh(2 * db_to_r(8.0)), 2), 10.45, 0.01);
  EXPECT_EQ(db_to_r(0.0), 0.0);
  EXPECT_NEAR(loss_db_to_rate(5.76e-4), 1.326e-4, 1e-7);
  for (double x : {0.0, 0.1, 3.0, 8.0, 24.0, 100.0}) EXPECT_NEAR(r_to_db(db_to_r(x)), x, 1e-12);
  EXPECT_THROW(db_to_r(-1.0), std::invalid_argument);
  EXPECT_THROW(r_to_db(-1.0), std::invalid_argument);
  EXPECT_THROW(loss_db_to_rate(-1e-9), std::invalid_argument);
}

// Dominance of the bound on the single-mode sequence with phi = pi. The
// literal target misses the local phases of the sinh^2 r shift and plateaus
// near the frame distance; in the corrected frame the bound holds.
TEST(TrotterBound, DominatesSingleModeSequence) {
  struct Case {
    double lambda;
    int d;
  };
  const KerrSpec kerr = KerrSpec::two_mode(1.0);
  for (const Case c : {Case{2.0, 60}, Case{7.0, 160}}) {
    const double r = std::acosh(c.lambda) / 2;
    const double t = pi / c.lambda;
    const FockSpace s({c.d, 2}, default_guard(r));
    const FockSpace bigger({c.d + 40, 2}, default_guard(r));
    const CompSubspace sub(s);
    const CompSubspace sub_big(bigger);
    for (int n : {1, 2, 4, 8, 16, 32, 64}) {
      const SequenceSpec seq(Variant::single_mode, n, t, r, kerr);
      const PhaseFrame frame = sequence_frame(seq, sub);
      const double err = gate_error_restricted(restrict_cols(sequence_on_kets(seq, s, sub.kets()), sub), pi, frame);
      const double err_big =
          gate_error_restricted(restrict_cols(sequence_on_kets(seq, bigger, sub_big.kets()), sub_big), pi, frame);
      ASSERT_LT(std::abs(err - err_big), 1e-3 * std::max(err_big, 1e-6)) << c.lambda << " " << n;
      EXPECT_LE(err, trotter_bound(kerr.chi, t, r, n)) << c.lambda << " " << n;
      if (n == 64) {
        const double frame_distance = (cz_matrix(CZSpec(pi)).mat - target_gate(pi, frame)).norm();
        const double literal =
            gate_error_restricted(restrict_cols(sequence_on_kets(seq, s, sub.kets()), sub), pi);
        EXPECT_NEAR(literal, frame_distance, 5e-3) << c.lambda;
      }
    }
  }
}
