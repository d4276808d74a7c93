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

#ifndef KERRAMP_GATE_HPP
#define KERRAMP_GATE_HPP

#include <array>
#include <cmath>
#include <stdexcept>

#include "kerramp/fock.hpp"
#include "kerramp/squeeze.hpp"

namespace kerramp {

struct CZSpec {
  double phi = 0.0;
  explicit CZSpec(double phi_) : phi(phi_) {
    if (!std::isfinite(phi)) throw std::invalid_argument("CZSpec: phi must be finite");
  }
};

// Dual-rail computational basis |00>, |01>, |10>, |11> over two modes of a
// Fock space. Any further modes sit in vacuum.
class CompSubspace {
 public:
  explicit CompSubspace(const FockSpace& space, int mode_a = 0, int mode_b = 1) : space_(space) {
    space.check_mode(mode_a);
    space.check_mode(mode_b);
    if (mode_a == mode_b) throw std::invalid_argument("CompSubspace: modes must differ");
    if (space.dim(mode_a) < 2 || space.dim(mode_b) < 2) {
      throw std::invalid_argument("CompSubspace: cutoff below 2 on a qubit mode");
    }
    std::size_t q = 0;
    for (int na = 0; na < 2; ++na) {
      for (int nb = 0; nb < 2; ++nb) {
        std::vector<int> occ(space.modes(), 0);
        occ[mode_a] = na;
        occ[mode_b] = nb;
        basis_[q++] = space.index(occ);
      }
    }
  }

  const std::array<Index, 4>& basis() const { return basis_; }
  const FockSpace& space() const { return space_; }

  // Columns are the four computational kets.
  Matrix kets() const {
    Matrix k = Matrix::Zero(space_.dim(), 4);
    for (int q = 0; q < 4; ++q) k(basis_[q], q) = 1.0;
    return k;
  }

 private:
  FockSpace space_;
  std::array<Index, 4> basis_{};
};

inline Operator cz_matrix(const CZSpec& spec) {
  Matrix m = Matrix::Identity(4, 4);
  m(3, 3) = std::polar(1.0, -spec.phi);
  return Operator(FockSpace({2, 2}), std::move(m));
}

inline Matrix restrict(const Matrix& u, const CompSubspace& sub) {
  if (u.rows() != sub.space().dim() || u.cols() != sub.space().dim()) {
    throw std::invalid_argument("restrict: operator does not match the subspace's Fock space");
  }
  Matrix out(4, 4);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) out(i, j) = u(sub.basis()[i], sub.basis()[j]);
  }
  return out;
}
inline Matrix restrict(const Operator& u, const CompSubspace& sub) { return restrict(u.mat, sub); }

// Diagonal phases applied after CZ on the computational basis. The identity
// frame reproduces the bare gate-error definition.
struct PhaseFrame {
  std::array<cplx, 4> phases{1.0, 1.0, 1.0, 1.0};

  static PhaseFrame identity() { return {}; }

  // Phases of exp(-i t (h_actual - h_nominal)) on the computational kets;
  // both Hamiltonians must be diagonal there.
  static PhaseFrame between(const Operator& h_actual, const Operator& h_nominal, double t,
                            const CompSubspace& sub) {
    PhaseFrame f;
    for (int q = 0; q < 4; ++q) {
      const Index i = sub.basis()[q];
      const double delta = (h_actual.mat(i, i) - h_nominal.mat(i, i)).real();
      f.phases[q] = std::polar(1.0, -t * delta);
    }
    return f;
  }

  Matrix matrix() const {
    Matrix m = Matrix::Zero(4, 4);
    for (int q = 0; q < 4; ++q) m(q, q) = phases[q];
    return m;
  }
};

// Local phases separating the exact Trotter limit of a sequence from the
// nominal exp(-i lambda H t) target.
inline PhaseFrame sequence_frame(const SequenceSpec& seq, const CompSubspace& sub) {
  const Operator exact = trotter_limit_hamiltonian(seq, sub.space());
  const Operator nominal = seq.amplification() * cross_kerr_h(seq.kerr, sub.space());
  return PhaseFrame::between(exact, nominal, seq.t, sub);
}

inline Matrix target_gate(double phi, const PhaseFrame& frame) {
  return cz_matrix(CZSpec(phi)).mat * frame.matrix();
}

inline double gate_error_restricted(const Matrix& restricted, double phi,
                                    const PhaseFrame& frame = PhaseFrame::identity()) {
  return (target_gate(phi, frame) - restricted).norm();
}

inline double gate_error(const Operator& u, double phi, const CompSubspace& sub,
                         const PhaseFrame& frame = PhaseFrame::identity()) {
  return gate_error_restricted(restrict(u, sub), phi, frame);
}

// ||(U - V) P||_HS over the full columns of the computational kets.
inline double projected_error(const Matrix& u_cols, const Matrix& v_cols) {
  if (u_cols.rows() != v_cols.rows() || u_cols.cols() != v_cols.cols()) {
    throw std::invalid_argument("projected_error: shape mismatch");
  }
  return (u_cols - v_cols).norm();
}

inline double projected_error(const Operator& u, const Operator& v, const CompSubspace& sub) {
  const Matrix p = sub.kets();
  return projected_error(u.mat * p, v.mat * p);
}

//============================================================================
// Trotter error bound
//============================================================================

inline double f_of_r(double r) {
  if (!(r >= 0.0)) throw std::invalid_argument("f_of_r: r must be >= 0");
  const double t2 = std::pow(std::tanh(2.0 * r), 2);
  const double t4 = t2 * t2;
  const double root = std::sqrt(4.0 + 108.0 * t2 + 39.0 * t4) + std::sqrt(4.0 + 12.0 * t2 + 39.0 * t4);
  return std::sqrt(7.0 * t4 + 8.0 * t2 + 0.25 * root * root);
}

inline double trotter_bound(double chi, double t, double r, int steps) {
  if (steps < 1) throw std::invalid_argument("trotter_bound: N must be >= 1");
  const double c = std::cosh(2.0 * r);
  return chi * chi * t * t * c * c * f_of_r(r) / (8.0 * steps);
}

// The same bound written through the accumulated phase phi = lambda chi t,
// for an arbitrary amplification factor lambda.
inline double trotter_bound_phase(double phi, double r, int steps) {
  if (steps < 1) throw std::invalid_argument("trotter_bound_phase: N must be >= 1");
  return phi * phi * f_of_r(r) / (8.0 * steps);
}

//============================================================================
// Unit conversions
//============================================================================

inline double db_to_r(double db) {
  if (!(db >= 0.0)) throw std::invalid_argument("db_to_r: squeezing in dB must be >= 0");
  return db * std::log(10.0) / 20.0;
}

inline double r_to_db(double r) {
  if (!(r >= 0.0)) throw std::invalid_argument("r_to_db: r must be >= 0");
  return r * 20.0 / std::log(10.0);
}

// Power attenuation in dB to the dimensionless loss exponent eta * t.
inline double loss_db_to_rate(double db) {
  if (!(db >= 0.0)) throw std::invalid_argument("loss_db_to_rate: loss in dB must be >= 0");
  return db * std::log(10.0) / 10.0;
}

}  // namespace kerramp

#endif  // KERRAMP_GATE_HPP
