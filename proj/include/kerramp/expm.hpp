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

#ifndef KERRAMP_EXPM_HPP
#define KERRAMP_EXPM_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "kerramp/fock.hpp"

namespace kerramp {

namespace detail {

inline double one_norm(const Matrix& m) { return m.cwiseAbs().colwise().sum().maxCoeff(); }

// Pade approximant r_m(A) = q_m(A)^{-1} p_m(A) for m in {3, 5, 7, 9}.
template <std::size_t K>
Matrix pade_low(const Matrix& a, const std::array<double, K>& b) {
  const Index n = a.rows();
  const Matrix ident = Matrix::Identity(n, n);
  const Matrix a2 = a * a;
  Matrix pw = ident;
  Matrix u = b[1] * ident;
  Matrix v = b[0] * ident;
  for (std::size_t k = 2; k + 1 < K; k += 2) {
    pw = pw * a2;
    u += b[k + 1] * pw;
    v += b[k] * pw;
  }
  u = a * u;
  return (v - u).partialPivLu().solve(v + u);
}

inline Matrix pade13(const Matrix& a) {
  static constexpr std::array<double, 14> b = {
      64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
      129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
      1323241920.0,        40840800.0,          960960.0,           16380.0,
      182.0,               1.0};
  const Index n = a.rows();
  const Matrix ident = Matrix::Identity(n, n);
  const Matrix a2 = a * a;
  const Matrix a4 = a2 * a2;
  const Matrix a6 = a4 * a2;
  Matrix u = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2);
  u += b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident;
  u = a * u;
  Matrix v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2);
  v += b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident;
  return (v - u).partialPivLu().solve(v + u);
}

}  // namespace detail

// Scaling and squaring with degree-selected Pade approximants (Higham 2005).
inline Matrix expm_pade(const Matrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("expm: matrix must be square");
  if (!a.allFinite()) throw std::invalid_argument("expm: non-finite entries");
  if (a.rows() == 0) return a;

  static constexpr std::array<double, 4> b3 = {120.0, 60.0, 12.0, 1.0};
  static constexpr std::array<double, 6> b5 = {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
  static constexpr std::array<double, 8> b7 = {17297280.0, 8648640.0, 1995840.0, 277200.0,
                                               25200.0,    1512.0,    56.0,      1.0};
  static constexpr std::array<double, 10> b9 = {
      17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
      2162160.0,     110880.0,     3960.0,       90.0,        1.0};

  const double norm = detail::one_norm(a);
  if (norm <= 1.495585217958292e-2) return detail::pade_low(a, b3);
  if (norm <= 2.539398330063230e-1) return detail::pade_low(a, b5);
  if (norm <= 9.504178996162932e-1) return detail::pade_low(a, b7);
  if (norm <= 2.097847961257068e0) return detail::pade_low(a, b9);

  constexpr double theta13 = 5.371920351148152e0;
  int s = 0;
  if (norm > theta13) s = static_cast<int>(std::ceil(std::log2(norm / theta13)));
  Matrix r = detail::pade13(a / std::ldexp(1.0, s));
  for (int k = 0; k < s; ++k) r = r * r;
  return r;
}

// exp(scale * h) for Hermitian h through its eigendecomposition.
inline Matrix expm_hermitian(const Matrix& h, cplx scale) {
  if (!h.allFinite()) throw std::invalid_argument("expm: non-finite entries");
  if (!is_hermitian(h, tol::herm)) throw std::invalid_argument("expm_hermitian: input not Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (h + h.adjoint()));
  if (es.info() != Eigen::Success) throw std::runtime_error("expm_hermitian: eigensolver failed");
  const Vector phases = (scale * es.eigenvalues().cast<cplx>()).array().exp().matrix();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

// exp(scale * h) for Hermitian h that is block diagonal under the basis
// partition `label` (entries between different labels must vanish). Only the
// requested columns are returned.
inline Matrix expm_hermitian_blocks(const Matrix& h, cplx scale, const std::vector<int>& label,
                                    const std::vector<Index>& columns) {
  if (static_cast<Index>(label.size()) != h.rows()) {
    throw std::invalid_argument("expm_hermitian_blocks: label size mismatch");
  }
  std::map<int, std::vector<Index>> groups;
  for (Index i = 0; i < h.rows(); ++i) groups[label[i]].push_back(i);
  Matrix out = Matrix::Zero(h.rows(), static_cast<Index>(columns.size()));
  for (const auto& [lab, idx] : groups) {
    std::vector<Index> local_cols;
    std::vector<Index> out_cols;
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (label[columns[c]] == lab) {
        const auto pos = std::lower_bound(idx.begin(), idx.end(), columns[c]) - idx.begin();
        local_cols.push_back(pos);
        out_cols.push_back(static_cast<Index>(c));
      }
    }
    if (local_cols.empty()) continue;
    const auto n = static_cast<Index>(idx.size());
    Matrix block(n, n);
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) block(i, j) = h(idx[i], idx[j]);
    }
    const Matrix e = expm_hermitian(block, scale);
    for (std::size_t c = 0; c < local_cols.size(); ++c) {
      for (Index i = 0; i < n; ++i) out(idx[i], out_cols[c]) = e(i, local_cols[c]);
    }
  }
  return out;
}

// Dispatches skew-Hermitian and Hermitian inputs to the spectral path and
// everything else (superoperator generators) to Pade.
inline Matrix expm(const Matrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("expm: matrix must be square");
  if (!a.allFinite()) throw std::invalid_argument("expm: non-finite entries");
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  const double skew = (a + a.adjoint()).cwiseAbs().maxCoeff();
  if (a.rows() > 1 && skew <= tol::herm * scale) {
    // a = -i h with h = i a Hermitian.
    return expm_hermitian(I_unit * a, -I_unit);
  }
  if (a.rows() > 1 && (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol::herm * scale) {
    return expm_hermitian(a, 1.0);
  }
  return expm_pade(a);
}

inline Operator expm(const Operator& gen) { return Operator(gen.space, expm(gen.mat)); }
inline SuperOperator expm(const SuperOperator& gen) {
  return SuperOperator(gen.space, expm(gen.mat));
}

// U = exp(-i h t) for Hermitian h.
inline Operator unitary_evolution(const Operator& h, double t) {
  if (h.mat.isDiagonal(0.0)) {
    if (!h.mat.allFinite()) throw std::invalid_argument("expm: non-finite entries");
    const Vector phases = (-I_unit * t * h.mat.diagonal().real().cast<cplx>()).array().exp();
    return Operator(h.space, phases.asDiagonal());
  }
  return Operator(h.space, expm_hermitian(h.mat, -I_unit * t));
}

}  // namespace kerramp

#endif  // KERRAMP_EXPM_HPP
