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

#ifndef KERRAMP_CHANNELS_HPP
#define KERRAMP_CHANNELS_HPP

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kerramp/expm.hpp"
#include "kerramp/fock.hpp"
#include "kerramp/gate.hpp"
#include "kerramp/squeeze.hpp"

namespace kerramp {

enum class NoiseModel { limit_channel, dilated_steps };

struct NoiseSpec {
  double eta = 0.0;
  NoiseModel model = NoiseModel::limit_channel;
  int anc_cutoff = 3;

  NoiseSpec(double eta_, NoiseModel m, int anc = 3) : eta(eta_), model(m), anc_cutoff(anc) {
    if (!(eta >= 0.0) || !std::isfinite(eta)) throw std::invalid_argument("NoiseSpec: eta must be >= 0");
    if (anc_cutoff < 2) throw std::invalid_argument("NoiseSpec: ancilla cutoff must be >= 2");
  }
};

//============================================================================
// QuantumChannel
//============================================================================

// A CPTP map held as Kraus operators, a row-vectorized superoperator, or
// both. Conversions are computed on demand and never mutate the value.
class QuantumChannel {
 public:
  static QuantumChannel from_kraus(FockSpace space, std::vector<Matrix> kraus) {
    if (kraus.empty()) throw std::invalid_argument("QuantumChannel: empty Kraus list");
    for (const Matrix& k : kraus) {
      if (k.rows() != space.dim() || k.cols() != space.dim()) {
        throw std::invalid_argument("QuantumChannel: Kraus operator dimension mismatch");
      }
    }
    QuantumChannel ch(std::move(space));
    ch.kraus_ = std::move(kraus);
    return ch;
  }

  static QuantumChannel from_superop(SuperOperator s) {
    QuantumChannel ch(s.space);
    ch.superop_ = std::move(s);
    return ch;
  }

  static QuantumChannel unitary(const Operator& u) { return from_kraus(u.space, {u.mat}); }
  static QuantumChannel identity(const FockSpace& space) {
    return from_kraus(space, {Matrix::Identity(space.dim(), space.dim())});
  }

  const FockSpace& space() const { return space_; }
  bool has_kraus() const { return kraus_.has_value(); }
  bool has_superop() const { return superop_.has_value(); }

  SuperOperator to_superop() const {
    if (superop_) return *superop_;
    const Index d = space_.dim();
    Matrix s = Matrix::Zero(d * d, d * d);
    for (const Matrix& k : *kraus_) s += kron(k, k.conjugate());
    return SuperOperator(space_, std::move(s));
  }

  // Kraus operators from the Choi eigendecomposition when not stored.
  std::vector<Matrix> kraus() const {
    if (kraus_) return *kraus_;
    const Index d = space_.dim();
    const Matrix choi = choi_of(*superop_);
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (choi + choi.adjoint()));
    std::vector<Matrix> out;
    for (Index e = 0; e < es.eigenvalues().size(); ++e) {
      const double lam = es.eigenvalues()(e);
      if (lam <= tol::kraus_drop) continue;
      Matrix k(d, d);
      for (Index i = 0; i < d; ++i) {
        for (Index kk = 0; kk < d; ++kk) k(kk, i) = std::sqrt(lam) * es.eigenvectors()(i * d + kk, e);
      }
      out.push_back(std::move(k));
    }
    return out;
  }

  Matrix apply(const Matrix& rho) const {
    if (rho.rows() != space_.dim() || rho.cols() != space_.dim()) {
      throw std::invalid_argument("QuantumChannel::apply: dimension mismatch");
    }
    if (kraus_) {
      Matrix out = Matrix::Zero(rho.rows(), rho.cols());
      for (const Matrix& k : *kraus_) out.noalias() += k * rho * k.adjoint();
      return out;
    }
    return apply_superop(*superop_, rho);
  }

  DensityMatrix apply(const DensityMatrix& rho) const {
    require_same_space(space_, rho.space(), "QuantumChannel::apply");
    Matrix out = apply(rho.mat());
    out = 0.5 * (out + out.adjoint());
    return DensityMatrix(Operator(space_, std::move(out)));
  }

  // ||sum K^dag K - I||_HS, or nullopt without a Kraus form.
  std::optional<double> completeness_error() const {
    if (!kraus_) return std::nullopt;
    Matrix s = Matrix::Zero(space_.dim(), space_.dim());
    for (const Matrix& k : *kraus_) s.noalias() += k.adjoint() * k;
    return (s - Matrix::Identity(space_.dim(), space_.dim())).norm();
  }

  // ||vec(I)^T S - vec(I)^T||.
  double trace_preservation_error() const {
    if (kraus_) return *completeness_error();
    const Index d = space_.dim();
    const Vector id = vec_row(Matrix::Identity(d, d));
    return (id.transpose() * superop_->mat - id.transpose()).norm();
  }

  static Matrix choi_of(const SuperOperator& s) {
    const Index d = s.space.dim();
    Matrix c(d * d, d * d);
    for (Index i = 0; i < d; ++i) {
      for (Index j = 0; j < d; ++j) {
        for (Index k = 0; k < d; ++k) {
          for (Index l = 0; l < d; ++l) c(i * d + k, j * d + l) = s.mat(k * d + l, i * d + j);
        }
      }
    }
    return c;
  }

 private:
  explicit QuantumChannel(FockSpace space) : space_(std::move(space)) {}

  FockSpace space_;
  std::optional<std::vector<Matrix>> kraus_;
  std::optional<SuperOperator> superop_;
};

// Choi matrix sum_ij |i><j| (x) E(|i><j|).
inline Matrix choi_matrix(const QuantumChannel& ch) { return QuantumChannel::choi_of(ch.to_superop()); }

inline QuantumChannel compose(const std::vector<QuantumChannel>& channels) {
  if (channels.empty()) throw std::invalid_argument("compose: no channels");
  SuperOperator acc = channels.front().to_superop();
  for (std::size_t k = 1; k < channels.size(); ++k) {
    require_same_space(acc.space, channels[k].space(), "compose");
    acc = acc * channels[k].to_superop();
  }
  return QuantumChannel::from_superop(std::move(acc));
}

inline QuantumChannel repeat(const QuantumChannel& ch, int n) {
  if (n < 0) throw std::invalid_argument("repeat: negative count");
  const SuperOperator s = ch.to_superop();
  return QuantumChannel::from_superop(SuperOperator(s.space, matrix_power(s.mat, n)));
}

//============================================================================
// Generators
//============================================================================

// L (.) L^dag - 1/2 {L^dag L, .}
inline SuperOperator dissipator(const Operator& l) {
  const Index d = l.dim();
  const Matrix id = Matrix::Identity(d, d);
  const Matrix ll = l.mat.adjoint() * l.mat;
  return SuperOperator(l.space, kron(l.mat, l.mat.conjugate()) - 0.5 * (kron(ll, id) + kron(id, ll.transpose())));
}

// -i [H, .]
inline SuperOperator hamiltonian_superop(const Operator& h) {
  const Index d = h.dim();
  const Matrix id = Matrix::Identity(d, d);
  return SuperOperator(h.space, -I_unit * (kron(h.mat, id) - kron(id, h.mat.transpose())));
}

// eta ( L.L + L^dag.L^dag - 1/2 {L^2, .} - 1/2 {L^dag^2, .} ): the cross term
// left in D_{cL + sL^dag} after removing the pure D_L and D_{L^dag} parts.
// Trace annihilating.
inline SuperOperator kl_superop(const Operator& l, double eta) {
  const Index d = l.dim();
  const Matrix id = Matrix::Identity(d, d);
  const Matrix& a = l.mat;
  const Matrix ad = a.adjoint();
  const Matrix a2 = a * a;
  const Matrix ad2 = ad * ad;
  const Matrix m = sandwich_matrix(a, a) + sandwich_matrix(ad, ad) -
                   0.5 * (kron(a2, id) + kron(id, a2.transpose())) -
                   0.5 * (kron(ad2, id) + kron(id, ad2.transpose()));
  return SuperOperator(l.space, eta * m);
}

inline void require_two_mode(const KerrSpec& kerr, const FockSpace& space, const char* where) {
  if (space.modes() != 2 || kerr.n() != 2 || kerr.modes[0] != 0 || kerr.modes[1] != 1) {
    throw std::invalid_argument(std::string(where) + ": needs a two-mode Kerr term on modes 0 and 1");
  }
}

// Squeeze angles (mode a, mode b) of step j = 1..4.
inline std::array<double, 2> step_angles(int j) {
  if (j < 1 || j > 4) throw std::invalid_argument("step index must be in 1..4");
  return {pattern_angle(j - 1, 0), pattern_angle(j - 1, 1)};
}

enum class DilationRoute { bogoliubov, numeric };

// Squeezed-frame mode operators of one mode: a' = S^dag a S and n' = a'^dag a'.
struct SqueezedMode {
  Matrix lowering;
  Matrix number;
};

inline SqueezedMode squeezed_mode(double r, double theta, int d, int guard, DilationRoute route) {
  if (route == DilationRoute::bogoliubov) {
    return {bogoliubov_annihilation(r, theta, d), squeezed_number(r, theta, d, ShiftTerm::keep)};
  }
  const int big = d + std::max(guard, 1);
  const Matrix s = squeeze_matrix(r, theta, big, 0);
  const Matrix a = annihilation_matrix(big);
  return {project_corner(s.adjoint() * a * s, d),
          project_corner(s.adjoint() * number_matrix(big) * s, d)};
}

// H_j = S_j^dag H S_j for the two-mode cross-Kerr term.
inline Operator step_hamiltonian(int j, const KerrSpec& kerr, double r, const FockSpace& space,
                                 DilationRoute route = DilationRoute::bogoliubov) {
  require_two_mode(kerr, space, "step_hamiltonian");
  const auto ang = step_angles(j);
  const SqueezedMode ma = squeezed_mode(r, ang[0], space.dim(0), space.guard(), route);
  const SqueezedMode mb = squeezed_mode(r, ang[1], space.dim(1), space.guard(), route);
  return Operator(space, kerr.chi * kron(ma.number, mb.number));
}

enum class KerrTerm {
  amplified,  // cosh^2(2r) H
  averaged,   // (1/4) sum_j H_j = chi (cosh(2r) n_a + sinh^2 r)(cosh(2r) n_b + sinh^2 r)
};

inline Operator limit_hamiltonian(const KerrSpec& kerr, double r, const FockSpace& space, KerrTerm term) {
  require_two_mode(kerr, space, "limit_hamiltonian");
  const SequenceSpec seq(Variant::two_mode, 1, 1.0, r, kerr);
  if (term == KerrTerm::amplified) return seq.amplification() * cross_kerr_h(kerr, space);
  return trotter_limit_hamiltonian(seq, space);
}

inline SuperOperator limit_generator(const KerrSpec& kerr, double r, double eta, const FockSpace& space,
                                     KerrTerm term = KerrTerm::amplified) {
  const Operator h = limit_hamiltonian(kerr, r, space, term);
  const Operator a = embed(annihilation(space.dim(0)), 0, space);
  const Operator b = embed(annihilation(space.dim(1)), 1, space);
  const double c2 = std::pow(std::cosh(r), 2);
  const double s2 = std::pow(std::sinh(r), 2);
  const SuperOperator loss = dissipator(a) + dissipator(b);
  const SuperOperator gain = dissipator(a.adjoint()) + dissipator(b.adjoint());
  return hamiltonian_superop(h) + (eta * c2) * loss + (eta * s2) * gain;
}

inline QuantumChannel limit_channel(const KerrSpec& kerr, double r, double eta, double t, const FockSpace& space,
                                    KerrTerm term = KerrTerm::amplified) {
  const SuperOperator g = limit_generator(kerr, r, eta, space, term);
  return QuantumChannel::from_superop(expm(t * g));
}

//============================================================================
// Computational block of a channel
//============================================================================

// 16x16 matrix <y|E(|x><x'|)|y'> with rows (y,y') and columns (x,x') both
// ordered 4*q + q' over the computational basis.
inline Matrix channel_block(const QuantumChannel& ch, const CompSubspace& sub) {
  require_same_space(ch.space(), sub.space(), "channel_block");
  const auto& bs = sub.basis();
  const Index d = ch.space().dim();
  Matrix out(16, 16);
  if (ch.has_superop()) {
    const SuperOperator s = ch.to_superop();
    for (int p = 0; p < 16; ++p) {
      for (int q = 0; q < 16; ++q) out(p, q) = s.mat(bs[p / 4] * d + bs[p % 4], bs[q / 4] * d + bs[q % 4]);
    }
    return out;
  }
  for (int q = 0; q < 16; ++q) {
    Matrix rho = Matrix::Zero(d, d);
    rho(bs[q / 4], bs[q % 4]) = 1.0;
    const Matrix e = ch.apply(rho);
    for (int p = 0; p < 16; ++p) out(p, q) = e(bs[p / 4], bs[p % 4]);
  }
  return out;
}

inline Matrix cz_superop(double phi, const PhaseFrame& frame = PhaseFrame::identity()) {
  const Matrix g = target_gate(phi, frame);
  return kron(g, g.conjugate());
}

inline double channel_gate_error_block(const Matrix& block, double phi,
                                       const PhaseFrame& frame = PhaseFrame::identity()) {
  return (cz_superop(phi, frame) - block).norm();
}

inline double channel_gate_error(const QuantumChannel& ch, double phi, const CompSubspace& sub,
                                 const PhaseFrame& frame = PhaseFrame::identity()) {
  return channel_gate_error_block(channel_block(ch, sub), phi, frame);
}

// Phases separating the averaged-Kerr limit from the nominal amplified one.
inline PhaseFrame limit_frame(const KerrSpec& kerr, double r, double t, const CompSubspace& sub) {
  const Operator exact = limit_hamiltonian(kerr, r, sub.space(), KerrTerm::averaged);
  const Operator nominal = limit_hamiltonian(kerr, r, sub.space(), KerrTerm::amplified);
  return PhaseFrame::between(exact, nominal, t, sub);
}

// Computational block of the limit channel without the full superoperator.
// The generator preserves the coherence offset (n_a - m_a, n_b - m_b) of
// |n><m|, so each of the nine offsets met by computational operators is
// exponentiated on its own.
inline Matrix limit_channel_block(const KerrSpec& kerr, double r, double eta, double t, const FockSpace& space,
                                  KerrTerm term = KerrTerm::amplified) {
  require_two_mode(kerr, space, "limit_channel_block");
  const Operator h = limit_hamiltonian(kerr, r, space, term);
  const int da = space.dim(0);
  const int db = space.dim(1);
  const double gl = eta * std::pow(std::cosh(r), 2);
  const double gg = eta * std::pow(std::sinh(r), 2);
  const CompSubspace sub(space);
  const auto& bs = sub.basis();

  // (a a^dag) diagonal on the truncated mode.
  auto aad = [](int n, int d) { return n + 1 < d ? static_cast<double>(n + 1) : 0.0; };

  Matrix out = Matrix::Zero(16, 16);
  for (int off_a = -1; off_a <= 1; ++off_a) {
    for (int off_b = -1; off_b <= 1; ++off_b) {
      // Sector states |na nb><ma mb| with na - ma = off_a, nb - mb = off_b.
      std::vector<std::array<int, 4>> states;
      for (int ma = std::max(0, -off_a); ma < da && ma + off_a < da; ++ma) {
        for (int mb = std::max(0, -off_b); mb < db && mb + off_b < db; ++mb) {
          states.push_back({ma + off_a, mb + off_b, ma, mb});
        }
      }
      const auto n = static_cast<Index>(states.size());
      auto locate = [&](int na, int nb, int ma, int mb) -> Index {
        if (na < 0 || nb < 0 || ma < 0 || mb < 0 || na >= da || nb >= db || ma >= da || mb >= db) return -1;
        const int lo_a = std::max(0, -off_a);
        const int lo_b = std::max(0, -off_b);
        const int width_b = db - std::abs(off_b);
        return static_cast<Index>((ma - lo_a) * width_b + (mb - lo_b));
      };
      Matrix g = Matrix::Zero(n, n);
      for (Index s = 0; s < n; ++s) {
        const auto [na, nb, ma, mb] = states[s];
        const Index ket = space.index({na, nb});
        const Index bra = space.index({ma, mb});
        cplx diag = -I_unit * (h.mat(ket, ket) - h.mat(bra, bra));
        diag -= 0.5 * gl * (na + ma + nb + mb);
        diag -= 0.5 * gg * (aad(na, da) + aad(ma, da) + aad(nb, db) + aad(mb, db));
        g(s, s) += diag;
        // loss: a |n><m| a^dag feeds |n-1><m-1| from |n><m|
        if (Index dst = locate(na - 1, nb, ma - 1, mb); dst >= 0) g(dst, s) += gl * std::sqrt(double(na) * ma);
        if (Index dst = locate(na, nb - 1, ma, mb - 1); dst >= 0) g(dst, s) += gl * std::sqrt(double(nb) * mb);
        if (Index dst = locate(na + 1, nb, ma + 1, mb); dst >= 0) g(dst, s) += gg * std::sqrt((na + 1.0) * (ma + 1.0));
        if (Index dst = locate(na, nb + 1, ma, mb + 1); dst >= 0) g(dst, s) += gg * std::sqrt((nb + 1.0) * (mb + 1.0));
      }
      const Matrix e = expm(Matrix(t * g));
      for (int q = 0; q < 16; ++q) {
        const auto xo = space.occupation(bs[q / 4]);
        const auto yo = space.occupation(bs[q % 4]);
        if (xo[0] - yo[0] != off_a || xo[1] - yo[1] != off_b) continue;
        const Index src = locate(xo[0], xo[1], yo[0], yo[1]);
        for (int p = 0; p < 16; ++p) {
          const auto uo = space.occupation(bs[p / 4]);
          const auto vo = space.occupation(bs[p % 4]);
          if (uo[0] - vo[0] != off_a || uo[1] - vo[1] != off_b) continue;
          out(p, q) = e(locate(uo[0], uo[1], vo[0], vo[1]), src);
        }
      }
    }
  }
  return out;
}

//============================================================================
// Beam-splitter dilation of one squeezed step
//============================================================================

// Kraus operators K_mn = <mn|_anc exp(-i H_tot dt) |00>_anc on the two system
// modes, where H_tot = H_j + g (a' c^dag + a'^dag c) + g (b' d^dag + b'^dag d),
// g = sqrt(eta / dt) and c, d are ancilla modes with cutoff anc_cutoff.
inline QuantumChannel dilated_step_channel(int j, const KerrSpec& kerr, double r, double eta, double dt,
                                           const FockSpace& space, int anc_cutoff,
                                           DilationRoute route = DilationRoute::bogoliubov) {
  require_two_mode(kerr, space, "dilated_step_channel");
  if (!(dt > 0.0)) throw std::invalid_argument("dilated_step_channel: dt must be > 0");
  if (eta < 0.0) throw std::invalid_argument("dilated_step_channel: eta must be >= 0");
  if (anc_cutoff < 2) throw std::invalid_argument("dilated_step_channel: ancilla cutoff must be >= 2");
  const auto ang = step_angles(j);
  const int da = space.dim(0);
  const int db = space.dim(1);
  const SqueezedMode ma = squeezed_mode(r, ang[0], da, space.guard(), route);
  const SqueezedMode mb = squeezed_mode(r, ang[1], db, space.guard(), route);

  const FockSpace full({da, db, anc_cutoff, anc_cutoff});
  const Matrix c = embed_matrix(annihilation_matrix(anc_cutoff), 2, full);
  const Matrix d = embed_matrix(annihilation_matrix(anc_cutoff), 3, full);
  const Matrix ap = embed_matrix(ma.lowering, 0, full);
  const Matrix bp = embed_matrix(mb.lowering, 1, full);
  const double g = std::sqrt(eta / dt);
  Matrix h = kerr.chi * kron(kron(ma.number, mb.number), Matrix::Identity(anc_cutoff * anc_cutoff, anc_cutoff * anc_cutoff));
  if (g > 0.0) {
    const Matrix xa = ap * c.adjoint();
    const Matrix xb = bp * d.adjoint();
    h += g * (xa + xa.adjoint() + xb + xb.adjoint());
  }
  h = 0.5 * (h + h.adjoint());

  // a' and n' change n_a by odd and even amounts, so the parities of
  // n_a + n_c and n_b + n_d are conserved.
  const Index anc2 = static_cast<Index>(anc_cutoff) * anc_cutoff;
  const Index dsys = space.dim();
  std::vector<Index> cols;
  for (Index s = 0; s < dsys; ++s) cols.push_back(s * anc2);
  std::vector<int> label(full.dim(), 0);
  for (Index i = 0; i < full.dim(); ++i) {
    const auto o = full.occupation(i);
    label[i] = ((o[0] + o[2]) & 1) * 2 + ((o[1] + o[3]) & 1);
  }
  const Matrix ucols = expm_hermitian_blocks(h, -I_unit * dt, label, cols);

  std::vector<Matrix> kraus;
  for (Index m = 0; m < anc2; ++m) {
    Matrix k(dsys, dsys);
    for (Index so = 0; so < dsys; ++so) {
      for (Index si = 0; si < dsys; ++si) k(so, si) = ucols(so * anc2 + m, si);
    }
    if (k.norm() >= tol::kraus_drop) kraus.push_back(std::move(k));
  }
  return QuantumChannel::from_kraus(space, std::move(kraus));
}

// exp((H_j-commutator + eta (D_a' + D_b')) dt): loss applied during the Kerr
// evolution in the squeezed frame. Cross-check of the dilation.
inline QuantumChannel lindblad_step_channel(int j, const KerrSpec& kerr, double r, double eta, double dt,
                                            const FockSpace& space) {
  require_two_mode(kerr, space, "lindblad_step_channel");
  const auto ang = step_angles(j);
  const SqueezedMode ma = squeezed_mode(r, ang[0], space.dim(0), space.guard(), DilationRoute::bogoliubov);
  const SqueezedMode mb = squeezed_mode(r, ang[1], space.dim(1), space.guard(), DilationRoute::bogoliubov);
  const Operator h(space, kerr.chi * kron(ma.number, mb.number));
  const Operator ap(space, embed_matrix(ma.lowering, 0, space));
  const Operator bp(space, embed_matrix(mb.lowering, 1, space));
  const SuperOperator gen = hamiltonian_superop(h) + eta * (dissipator(ap) + dissipator(bp));
  return QuantumChannel::from_superop(expm(dt * gen));
}

// The four step channels of one Trotter step in composition order: the
// returned vector is {E1, E2, E3, E4} and E4 acts first.
inline std::vector<QuantumChannel> dilated_trotter_step(const KerrSpec& kerr, double r, double eta, double t,
                                                        int steps, const FockSpace& space, int anc_cutoff,
                                                        DilationRoute route = DilationRoute::bogoliubov) {
  if (steps < 1) throw std::invalid_argument("dilated_trotter_step: N must be >= 1");
  const double dt = t / (4.0 * steps);
  std::vector<QuantumChannel> out;
  for (int j = 1; j <= 4; ++j) out.push_back(dilated_step_channel(j, kerr, r, eta, dt, space, anc_cutoff, route));
  return out;
}

// (E1 E2 E3 E4)^N as a superoperator.
inline QuantumChannel composed_dilated_channel(const KerrSpec& kerr, double r, double eta, double t, int steps,
                                               const FockSpace& space, int anc_cutoff,
                                               DilationRoute route = DilationRoute::bogoliubov) {
  return repeat(compose(dilated_trotter_step(kerr, r, eta, t, steps, space, anc_cutoff, route)), steps);
}

// Computational block of (E1 ... Ek)^N by pushing each |x><x'| through the
// Kraus operators; never forms a superoperator. Uses E(X^dag) = E(X)^dag.
inline Matrix propagate_block(const std::vector<QuantumChannel>& step, int repeats, const CompSubspace& sub) {
  if (step.empty()) throw std::invalid_argument("propagate_block: empty step");
  if (repeats < 0) throw std::invalid_argument("propagate_block: negative repeat count");
  for (const auto& ch : step) require_same_space(ch.space(), sub.space(), "propagate_block");
  std::vector<std::vector<Matrix>> kraus;
  for (const auto& ch : step) kraus.push_back(ch.kraus());
  const auto& bs = sub.basis();
  const Index d = sub.space().dim();
  Matrix out(16, 16);
  for (int qx = 0; qx < 4; ++qx) {
    for (int qy = qx; qy < 4; ++qy) {
      Matrix rho = Matrix::Zero(d, d);
      rho(bs[qx], bs[qy]) = 1.0;
      Matrix tmp(d, d);
      for (int rep = 0; rep < repeats; ++rep) {
        for (auto it = kraus.rbegin(); it != kraus.rend(); ++it) {
          Matrix next = Matrix::Zero(d, d);
          for (const Matrix& k : *it) {
            tmp.noalias() = k * rho;
            next.noalias() += tmp * k.adjoint();
          }
          rho = std::move(next);
        }
      }
      for (int p = 0; p < 16; ++p) {
        const cplx v = rho(bs[p / 4], bs[p % 4]);
        out(p, 4 * qx + qy) = v;
        // E(|y><x|)_{uv} = conj(E(|x><y|)_{vu})
        out(4 * (p % 4) + p / 4, 4 * qy + qx) = std::conj(v);
      }
    }
  }
  return out;
}

// Row-vectorized indices k * D + l of |k><l| grouped by the parities of
// (n_a(k) - n_a(l), n_b(k) - n_b(l)). Both the limit channel and the dilated
// steps are block diagonal in these four sectors.
inline std::array<std::vector<Index>, 4> coherence_parity_sectors(const FockSpace& space) {
  if (space.modes() != 2) throw std::invalid_argument("coherence_parity_sectors: needs two modes");
  const Index d = space.dim();
  std::array<std::vector<Index>, 4> out;
  for (Index k = 0; k < d; ++k) {
    const auto ok = space.occupation(k);
    for (Index l = 0; l < d; ++l) {
      const auto ol = space.occupation(l);
      const int label = (std::abs(ok[0] - ol[0]) & 1) * 2 + (std::abs(ok[1] - ol[1]) & 1);
      out[label].push_back(k * d + l);
    }
  }
  return out;
}

inline Matrix sector_block(const Matrix& m, const std::vector<Index>& idx) {
  const auto n = static_cast<Index>(idx.size());
  Matrix out(n, n);
  for (Index q = 0; q < n; ++q) {
    for (Index p = 0; p < n; ++p) out(p, q) = m(idx[p], idx[q]);
  }
  return out;
}

// ||E_t - (E1 E2 E3 E4)^N||_HS over the full superoperators for each N in
// `steps`, evaluated sector by sector. The limit channel is exponentiated once.
inline std::vector<double> channel_convergence_errors(const KerrSpec& kerr, double r, double eta, double t,
                                                      const std::vector<int>& steps, const FockSpace& space,
                                                      int anc_cutoff = 3, KerrTerm term = KerrTerm::amplified,
                                                      DilationRoute route = DilationRoute::bogoliubov) {
  for (int n : steps) {
    if (n < 1) throw std::invalid_argument("channel_convergence_error: N must be >= 1");
  }
  const auto sectors = coherence_parity_sectors(space);
  const Matrix gen = limit_generator(kerr, r, eta, space, term).mat;
  std::vector<Matrix> limits;
  for (const auto& idx : sectors) limits.push_back(expm(Matrix(t * sector_block(gen, idx))));
  std::vector<double> out;
  for (int n : steps) {
    const auto step = dilated_trotter_step(kerr, r, eta, t, n, space, anc_cutoff, route);
    std::vector<Matrix> superops;
    for (const auto& ch : step) superops.push_back(ch.to_superop().mat);
    double acc = 0.0;
    for (std::size_t b = 0; b < sectors.size(); ++b) {
      const auto& idx = sectors[b];
      Matrix prod = sector_block(superops.front(), idx);
      for (std::size_t k = 1; k < superops.size(); ++k) prod = prod * sector_block(superops[k], idx);
      acc += (limits[b] - matrix_power(prod, n)).squaredNorm();
    }
    out.push_back(std::sqrt(acc));
  }
  return out;
}

inline double channel_convergence_error(const KerrSpec& kerr, double r, double eta, double t, int steps,
                                        const FockSpace& space, int anc_cutoff = 3,
                                        KerrTerm term = KerrTerm::amplified,
                                        DilationRoute route = DilationRoute::bogoliubov) {
  return channel_convergence_errors(kerr, r, eta, t, {steps}, space, anc_cutoff, term, route).front();
}

}  // namespace kerramp

#endif  // KERRAMP_CHANNELS_HPP
