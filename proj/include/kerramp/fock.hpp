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

#ifndef KERRAMP_FOCK_HPP
#define KERRAMP_FOCK_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kerramp/tolerances.hpp"

namespace kerramp {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Index = Eigen::Index;

inline constexpr cplx I_unit{0.0, 1.0};

//============================================================================
// FockSpace
//============================================================================

// A tensor product of truncated oscillator modes. Mode k keeps Fock levels
// 0..dims[k]-1. Mode 0 is the leftmost Kronecker factor, so the basis label
// |n0 n1 ...> sits at row sum_k n_k * stride(k).
//
// guard is extra headroom used when exponentiating single-mode generators:
// they are built at dims[k] + guard and projected back to dims[k].
class FockSpace {
 public:
  explicit FockSpace(std::vector<int> dims, int guard = 0)
      : dims_(std::move(dims)), guard_(guard) {
    if (dims_.empty()) {
      throw std::invalid_argument("FockSpace: at least one mode required");
    }
    for (int d : dims_) {
      if (d < 2) {
        throw std::invalid_argument("FockSpace: every cutoff must be >= 2, got " +
                                    std::to_string(d));
      }
    }
    if (guard_ < 0) {
      throw std::invalid_argument("FockSpace: guard must be >= 0");
    }
    strides_.assign(dims_.size(), 1);
    for (int k = static_cast<int>(dims_.size()) - 2; k >= 0; --k) {
      strides_[k] = strides_[k + 1] * dims_[k + 1];
    }
    total_ = strides_[0] * dims_[0];
  }

  const std::vector<int>& dims() const { return dims_; }
  int guard() const { return guard_; }
  int modes() const { return static_cast<int>(dims_.size()); }
  Index dim() const { return total_; }
  int dim(int mode) const { return dims_.at(check_mode(mode)); }
  Index stride(int mode) const { return strides_.at(check_mode(mode)); }

  Index index(std::span<const int> occupation) const {
    if (static_cast<int>(occupation.size()) != modes()) {
      throw std::invalid_argument("FockSpace::index: wrong number of occupations");
    }
    Index idx = 0;
    for (int k = 0; k < modes(); ++k) {
      if (occupation[k] < 0 || occupation[k] >= dims_[k]) {
        throw std::out_of_range("FockSpace::index: occupation outside cutoff");
      }
      idx += occupation[k] * strides_[k];
    }
    return idx;
  }
  Index index(std::initializer_list<int> occupation) const {
    return index(std::span<const int>(occupation.begin(), occupation.size()));
  }

  std::vector<int> occupation(Index idx) const {
    std::vector<int> occ(dims_.size());
    for (int k = 0; k < modes(); ++k) {
      occ[k] = static_cast<int>((idx / strides_[k]) % dims_[k]);
    }
    return occ;
  }

  FockSpace with_guard(int guard) const { return FockSpace(dims_, guard); }
  FockSpace with_dims(std::vector<int> dims) const {
    return FockSpace(std::move(dims), guard_);
  }

  int check_mode(int mode) const {
    if (mode < 0 || mode >= modes()) {
      throw std::out_of_range("FockSpace: mode index " + std::to_string(mode) +
                              " out of range");
    }
    return mode;
  }

  // Equality ignores the guard: it changes how operators are built, not
  // which Hilbert space they act on.
  bool same_hilbert_space(const FockSpace& other) const { return dims_ == other.dims_; }
  bool operator==(const FockSpace& other) const {
    return dims_ == other.dims_ && guard_ == other.guard_;
  }

 private:
  std::vector<int> dims_;
  int guard_;
  std::vector<Index> strides_;
  Index total_ = 0;
};

//============================================================================
// Operator, DensityMatrix, SuperOperator
//============================================================================

struct Operator {
  FockSpace space;
  Matrix mat;

  Operator(FockSpace s, Matrix m) : space(std::move(s)), mat(std::move(m)) {
    if (mat.rows() != space.dim() || mat.cols() != space.dim()) {
      throw std::invalid_argument("Operator: matrix is " + std::to_string(mat.rows()) + "x" +
                                  std::to_string(mat.cols()) + " but space dimension is " +
                                  std::to_string(space.dim()));
    }
  }

  static Operator identity(const FockSpace& s) {
    return Operator(s, Matrix::Identity(s.dim(), s.dim()));
  }
  static Operator zero(const FockSpace& s) { return Operator(s, Matrix::Zero(s.dim(), s.dim())); }

  Index dim() const { return mat.rows(); }
  Operator adjoint() const { return Operator(space, mat.adjoint()); }
};

inline void require_same_space(const FockSpace& a, const FockSpace& b, const char* where) {
  if (!a.same_hilbert_space(b)) {
    throw std::invalid_argument(std::string(where) + ": operands live on different spaces");
  }
}

inline Operator operator*(const Operator& a, const Operator& b) {
  require_same_space(a.space, b.space, "Operator*");
  return Operator(a.space, a.mat * b.mat);
}
inline Operator operator+(const Operator& a, const Operator& b) {
  require_same_space(a.space, b.space, "Operator+");
  return Operator(a.space, a.mat + b.mat);
}
inline Operator operator-(const Operator& a, const Operator& b) {
  require_same_space(a.space, b.space, "Operator-");
  return Operator(a.space, a.mat - b.mat);
}
inline Operator operator*(cplx s, const Operator& a) { return Operator(a.space, s * a.mat); }
inline Operator operator*(double s, const Operator& a) { return Operator(a.space, s * a.mat); }

inline bool is_hermitian(const Matrix& m, double tol = tol::herm) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

// Hermitian, unit trace, positive semidefinite.
class DensityMatrix {
 public:
  explicit DensityMatrix(Operator op) : op_(std::move(op)) {
    const Matrix& m = op_.mat;
    if (!is_hermitian(m, tol::herm)) {
      throw std::invalid_argument("DensityMatrix: input is not Hermitian");
    }
    if (std::abs(m.trace() - cplx(1.0, 0.0)) > tol::trace) {
      throw std::invalid_argument("DensityMatrix: trace differs from 1");
    }
    const Matrix herm = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -tol::pos) {
      throw std::invalid_argument("DensityMatrix: negative eigenvalue");
    }
  }

  static DensityMatrix pure(const FockSpace& space, const Vector& ket) {
    if (ket.size() != space.dim()) {
      throw std::invalid_argument("DensityMatrix::pure: ket dimension mismatch");
    }
    const Vector k = ket / ket.norm();
    return DensityMatrix(Operator(space, k * k.adjoint()));
  }

  const Operator& op() const { return op_; }
  const Matrix& mat() const { return op_.mat; }
  const FockSpace& space() const { return op_.space; }

 private:
  Operator op_;
};

// Acts on row-vectorized operators: vec_row(E(rho)) = mat * vec_row(rho).
struct SuperOperator {
  FockSpace space;
  Matrix mat;

  SuperOperator(FockSpace s, Matrix m) : space(std::move(s)), mat(std::move(m)) {
    const Index d2 = space.dim() * space.dim();
    if (mat.rows() != d2 || mat.cols() != d2) {
      throw std::invalid_argument("SuperOperator: side must equal the squared operator dimension");
    }
  }

  static SuperOperator identity(const FockSpace& s) {
    const Index d2 = s.dim() * s.dim();
    return SuperOperator(s, Matrix::Identity(d2, d2));
  }
  static SuperOperator zero(const FockSpace& s) {
    const Index d2 = s.dim() * s.dim();
    return SuperOperator(s, Matrix::Zero(d2, d2));
  }
};

inline SuperOperator operator*(const SuperOperator& a, const SuperOperator& b) {
  require_same_space(a.space, b.space, "SuperOperator*");
  return SuperOperator(a.space, a.mat * b.mat);
}
inline SuperOperator operator+(const SuperOperator& a, const SuperOperator& b) {
  require_same_space(a.space, b.space, "SuperOperator+");
  return SuperOperator(a.space, a.mat + b.mat);
}
inline SuperOperator operator-(const SuperOperator& a, const SuperOperator& b) {
  require_same_space(a.space, b.space, "SuperOperator-");
  return SuperOperator(a.space, a.mat - b.mat);
}
inline SuperOperator operator*(cplx s, const SuperOperator& a) {
  return SuperOperator(a.space, s * a.mat);
}
inline SuperOperator operator*(double s, const SuperOperator& a) {
  return SuperOperator(a.space, s * a.mat);
}

//============================================================================
// Mode operators and tensor products
//============================================================================

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

// <n-1|a|n> = sqrt(n).
inline Matrix annihilation_matrix(int d) {
  if (d < 2) {
    throw std::invalid_argument("annihilation: cutoff must be >= 2, got " + std::to_string(d));
  }
  Matrix a = Matrix::Zero(d, d);
  for (int n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

inline Matrix number_matrix(int d) {
  Matrix n = Matrix::Zero(d, d);
  for (int k = 0; k < d; ++k) n(k, k) = static_cast<double>(k);
  return n;
}

inline Operator annihilation(int d) { return Operator(FockSpace({d}), annihilation_matrix(d)); }

inline Matrix embed_matrix(const Matrix& op, int mode, const FockSpace& space) {
  space.check_mode(mode);
  if (op.rows() != space.dim(mode) || op.cols() != space.dim(mode)) {
    throw std::invalid_argument("embed: operator dimension " + std::to_string(op.rows()) +
                                " does not match mode cutoff " +
                                std::to_string(space.dim(mode)));
  }
  const Index left = space.dim() / (space.stride(mode) * space.dim(mode));
  const Index right = space.stride(mode);
  return kron(kron(Matrix::Identity(left, left), op), Matrix::Identity(right, right));
}

inline Operator embed(const Operator& op, int mode, const FockSpace& space) {
  return Operator(space, embed_matrix(op.mat, mode, space));
}

// Kronecker product of one matrix per mode (mode 0 leftmost).
inline Matrix tensor(const std::vector<Matrix>& per_mode) {
  Matrix out = Matrix::Identity(1, 1);
  for (const Matrix& m : per_mode) out = kron(out, m);
  return out;
}

// Applies a single-mode matrix to one mode of a ket without forming the
// embedded operator.
inline Vector apply_on_mode(const Matrix& op, int mode, const FockSpace& space, const Vector& ket) {
  using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Index d = space.dim(mode);
  if (op.rows() != d || op.cols() != d || ket.size() != space.dim()) {
    throw std::invalid_argument("apply_on_mode: dimension mismatch");
  }
  const Index right = space.stride(mode);
  const Index left = space.dim() / (right * d);
  Vector out(ket.size());
  for (Index l = 0; l < left; ++l) {
    Eigen::Map<const RowMat> in_block(ket.data() + l * d * right, d, right);
    Eigen::Map<RowMat> out_block(out.data() + l * d * right, d, right);
    out_block.noalias() = op * in_block;
  }
  return out;
}

inline Vector basis_ket(const FockSpace& space, std::initializer_list<int> occupation) {
  Vector v = Vector::Zero(space.dim());
  v(space.index(occupation)) = 1.0;
  return v;
}

// Top-left d x d corner of a square matrix.
inline Matrix project_corner(const Matrix& m, Index d) {
  if (d > m.rows()) throw std::invalid_argument("project_corner: target larger than source");
  return m.topLeftCorner(d, d);
}

//============================================================================
// Norms, partial trace, row vectorization
//============================================================================

inline double hs_norm(const Matrix& m) { return m.norm(); }
inline double hs_norm(const Operator& m) { return m.mat.norm(); }
inline double hs_norm(const SuperOperator& m) { return m.mat.norm(); }

inline Matrix partial_trace_matrix(const Matrix& m, const FockSpace& space,
                                   const std::vector<int>& keep) {
  if (keep.empty()) throw std::invalid_argument("partial_trace: keep set is empty");
  std::vector<int> kept = keep;
  std::sort(kept.begin(), kept.end());
  if (std::adjacent_find(kept.begin(), kept.end()) != kept.end()) {
    throw std::invalid_argument("partial_trace: duplicate mode in keep set");
  }
  for (int k : kept) space.check_mode(k);
  std::vector<int> traced;
  for (int k = 0; k < space.modes(); ++k) {
    if (!std::binary_search(kept.begin(), kept.end(), k)) traced.push_back(k);
  }
  std::vector<int> kdims;
  for (int k : kept) kdims.push_back(space.dim(k));
  std::vector<int> tdims;
  for (int k : traced) tdims.push_back(space.dim(k));
  const FockSpace ks(kdims);
  const Index dt = std::accumulate(tdims.begin(), tdims.end(), Index{1},
                                   [](Index a, int b) { return a * b; });

  // Full index from kept-subspace index and traced-subspace index.
  auto full_index = [&](Index ik, Index it) {
    Index idx = 0;
    for (std::size_t q = 0; q < kept.size(); ++q) {
      idx += ((ik / ks.stride(static_cast<int>(q))) % kdims[q]) * space.stride(kept[q]);
    }
    Index rem = it;
    for (int q = static_cast<int>(traced.size()) - 1; q >= 0; --q) {
      idx += (rem % tdims[q]) * space.stride(traced[q]);
      rem /= tdims[q];
    }
    return idx;
  };

  Matrix out = Matrix::Zero(ks.dim(), ks.dim());
  for (Index i = 0; i < ks.dim(); ++i) {
    for (Index j = 0; j < ks.dim(); ++j) {
      cplx acc = 0.0;
      for (Index t = 0; t < dt; ++t) acc += m(full_index(i, t), full_index(j, t));
      out(i, j) = acc;
    }
  }
  return out;
}

inline FockSpace kept_space(const FockSpace& space, std::vector<int> keep) {
  std::sort(keep.begin(), keep.end());
  std::vector<int> dims;
  for (int k : keep) dims.push_back(space.dim(k));
  return FockSpace(dims);
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep) {
  Matrix reduced = partial_trace_matrix(rho.mat(), rho.space(), keep);
  return DensityMatrix(Operator(kept_space(rho.space(), keep), std::move(reduced)));
}

// Stacks rows: v[i*D + j] = m(i, j).
inline Vector vec_row(const Matrix& m) {
  Vector v(m.rows() * m.cols());
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) v(i * m.cols() + j) = m(i, j);
  }
  return v;
}

inline Matrix devec_row(const Vector& v) {
  const auto d = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(v.size()))));
  if (d * d != v.size()) throw std::invalid_argument("devec_row: length is not a perfect square");
  Matrix m(d, d);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) m(i, j) = v(i * d + j);
  }
  return m;
}

// rho -> A rho B  is  A (x) B^T  under row vectorization.
inline Matrix sandwich_matrix(const Matrix& a, const Matrix& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows()) {
    throw std::invalid_argument("sandwich_superop: A and B must be square and equal size");
  }
  return kron(a, b.transpose());
}

inline SuperOperator sandwich_superop(const Operator& a, const Operator& b) {
  require_same_space(a.space, b.space, "sandwich_superop");
  return SuperOperator(a.space, sandwich_matrix(a.mat, b.mat));
}

inline Matrix apply_superop(const SuperOperator& s, const Matrix& rho) {
  if (rho.rows() != s.space.dim() || rho.cols() != s.space.dim()) {
    throw std::invalid_argument("apply_superop: operator dimension mismatch");
  }
  return devec_row(s.mat * vec_row(rho));
}

}  // namespace kerramp

#endif  // KERRAMP_FOCK_HPP
