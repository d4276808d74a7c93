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

#ifndef KERRAMP_SQUEEZE_HPP
#define KERRAMP_SQUEEZE_HPP

#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kerramp/expm.hpp"
#include "kerramp/fock.hpp"

namespace kerramp {

inline constexpr double pi = std::numbers::pi;

//============================================================================
// Specs
//============================================================================

struct SqueezeSpec {
  double r = 0.0;
  double theta = 0.0;
  int mode = 0;

  SqueezeSpec(double r_, double theta_, int mode_) : r(r_), theta(theta_), mode(mode_) {
    if (!std::isfinite(r) || r < 0.0) {
      throw std::invalid_argument("SqueezeSpec: r must be finite and >= 0");
    }
    if (!std::isfinite(theta)) throw std::invalid_argument("SqueezeSpec: theta must be finite");
    if (mode < 0) throw std::invalid_argument("SqueezeSpec: negative mode index");
  }
};

struct KerrSpec {
  double chi = 1.0;
  std::vector<int> modes;

  KerrSpec(double chi_, std::vector<int> modes_) : chi(chi_), modes(std::move(modes_)) {
    if (!std::isfinite(chi)) throw std::invalid_argument("KerrSpec: chi must be finite");
    if (modes.size() < 2) throw std::invalid_argument("KerrSpec: at least two modes required");
    std::vector<int> sorted = modes;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw std::invalid_argument("KerrSpec: modes must be distinct");
    }
    if (sorted.front() < 0) throw std::invalid_argument("KerrSpec: negative mode index");
  }

  static KerrSpec two_mode(double chi) { return KerrSpec(chi, {0, 1}); }
  int n() const { return static_cast<int>(modes.size()); }
};

enum class Variant { single_mode, two_mode, n_mode };

inline std::string to_string(Variant v) {
  switch (v) {
    case Variant::single_mode: return "single_mode";
    case Variant::two_mode: return "two_mode";
    case Variant::n_mode: return "n_mode";
  }
  return "unknown";
}

inline Variant variant_from_string(const std::string& s) {
  if (s == "single_mode") return Variant::single_mode;
  if (s == "two_mode") return Variant::two_mode;
  if (s == "n_mode") return Variant::n_mode;
  throw std::invalid_argument("unknown sequence variant '" + s + "'");
}

struct SequenceSpec {
  Variant variant = Variant::single_mode;
  int steps = 1;
  double t = 0.0;
  double r = 0.0;
  KerrSpec kerr = KerrSpec::two_mode(1.0);

  SequenceSpec(Variant v, int steps_, double t_, double r_, KerrSpec k)
      : variant(v), steps(steps_), t(t_), r(r_), kerr(std::move(k)) {
    if (steps < 1) throw std::invalid_argument("SequenceSpec: need at least one Trotter step");
    if (!std::isfinite(t)) throw std::invalid_argument("SequenceSpec: t must be finite");
    if (!std::isfinite(r) || r < 0.0) throw std::invalid_argument("SequenceSpec: r must be >= 0");
    if (variant == Variant::two_mode && kerr.n() != 2) {
      throw std::invalid_argument("SequenceSpec: two_mode variant needs a two-mode Kerr term");
    }
    if (variant == Variant::n_mode && kerr.n() > 12) {
      throw std::invalid_argument("SequenceSpec: n_mode supports at most 12 squeezed modes");
    }
  }

  // Modes that receive squeezing conjugations.
  std::vector<int> squeezed_modes() const {
    switch (variant) {
      case Variant::single_mode: return {kerr.modes.front()};
      case Variant::two_mode: return {kerr.modes[0], kerr.modes[1]};
      case Variant::n_mode: return kerr.modes;
    }
    return {};
  }

  int patterns() const { return 1 << squeezed_modes().size(); }
  double dt() const { return t / (static_cast<double>(patterns()) * steps); }
  double amplification() const {
    return std::pow(std::cosh(2.0 * r), static_cast<double>(squeezed_modes().size()));
  }
};

// Squeezing angle of `mode_slot` in angle pattern p. Bit k of p selects
// theta = pi on the k-th squeezed mode. For two modes the patterns run
// (0,0), (pi,0), (0,pi), (pi,pi) which is the protocol's printed order.
inline double pattern_angle(int p, int mode_slot) { return ((p >> mode_slot) & 1) ? pi : 0.0; }

inline int default_guard(double r) { return r <= 1.2 ? 10 : 20; }

//============================================================================
// Hamiltonians and squeezers
//============================================================================

inline Operator cross_kerr_h(const KerrSpec& kerr, const FockSpace& space) {
  for (int m : kerr.modes) space.check_mode(m);
  Matrix h = Matrix::Zero(space.dim(), space.dim());
  for (Index i = 0; i < space.dim(); ++i) {
    const std::vector<int> occ = space.occupation(i);
    double prod = kerr.chi;
    for (int m : kerr.modes) prod *= occ[m];
    h(i, i) = prod;
  }
  return Operator(space, std::move(h));
}

inline Matrix squeeze_generator(double r, double theta, int d) {
  const Matrix a = annihilation_matrix(d);
  const Matrix a2 = a * a;
  const cplx e = std::polar(1.0, theta);
  return (0.5 * r) * (e * a2 - std::conj(e) * a2.adjoint());
}

// Single-mode squeezer built at d + guard and projected onto levels 0..d-1.
// r may be negative here (S(-r) is the inverse squeezer).
inline Matrix squeeze_matrix(double r, double theta, int d, int guard) {
  if (guard < 0) throw std::invalid_argument("squeeze_matrix: guard must be >= 0");
  if (!std::isfinite(r)) throw std::invalid_argument("squeeze_matrix: r must be finite");
  const int big = d + guard;
  if (r == 0.0) return Matrix::Identity(d, d);
  const Matrix g = squeeze_generator(r, theta, big);
  // g is skew-Hermitian: exp(g) = exp(-i (i g)).
  return project_corner(expm_hermitian(I_unit * g, -I_unit), d);
}

inline Operator squeeze_op(const SqueezeSpec& spec, const FockSpace& space) {
  space.check_mode(spec.mode);
  const Matrix s = squeeze_matrix(spec.r, spec.theta, space.dim(spec.mode), space.guard());
  return Operator(space, embed_matrix(s, spec.mode, space));
}

inline Operator conjugated_h(const Operator& h, const SqueezeSpec& spec) {
  if (!is_hermitian(h.mat)) throw std::invalid_argument("conjugated_h: input is not Hermitian");
  const Operator s = squeeze_op(spec, h.space);
  return Operator(h.space, s.mat.adjoint() * h.mat * s.mat);
}

// a' = S^dag a S = cosh(r) a - e^{-i theta} sinh(r) a^dag on levels 0..d-1.
inline Matrix bogoliubov_annihilation(double r, double theta, int d) {
  const Matrix a = annihilation_matrix(d);
  return std::cosh(r) * a - std::polar(std::sinh(r), -theta) * a.adjoint();
}

enum class ShiftTerm { keep, drop };

// S^dag (a^dag a) S in closed form:
//   cosh(2r) n + sinh^2(r) - sinh(2r)/2 (e^{-i theta} a^dag^2 + e^{i theta} a^2).
// ShiftTerm::drop omits the sinh^2(r) identity term.
inline Matrix squeezed_number(double r, double theta, int d, ShiftTerm shift = ShiftTerm::keep) {
  const Matrix a = annihilation_matrix(d);
  const Matrix a2 = a * a;
  const cplx e = std::polar(1.0, theta);
  Matrix m = std::cosh(2.0 * r) * number_matrix(d) -
             (0.5 * std::sinh(2.0 * r)) * (std::conj(e) * a2.adjoint() + e * a2);
  if (shift == ShiftTerm::keep) {
    const double s = std::sinh(r);
    m += s * s * Matrix::Identity(d, d);
  }
  return m;
}

// Numerically squeezed number operator: (S^dag n S) at d + guard, projected.
inline Matrix squeezed_number_numeric(double r, double theta, int d, int guard) {
  const int big = d + guard;
  const Matrix s = squeeze_matrix(r, theta, big, 0);
  const Matrix n = number_matrix(big);
  return project_corner(s.adjoint() * n * s, d);
}

inline Operator amplification_map(const Operator& h, int mode, double r) {
  const Operator h0 = conjugated_h(h, SqueezeSpec(r, 0.0, mode));
  const Operator h1 = conjugated_h(h, SqueezeSpec(r, pi, mode));
  return Operator(h.space, 0.5 * (h0.mat + h1.mat));
}

// Composition of amplification maps over every Kerr mode. The input must be
// the cross-Kerr Hamiltonian of `kerr`; the map then factorizes into
// per-mode averaged number operators, each evaluated at d + guard.
inline Operator multimode_amplification(const Operator& h, const KerrSpec& kerr, double r) {
  const Operator expected = cross_kerr_h(kerr, h.space);
  if ((expected.mat - h.mat).cwiseAbs().maxCoeff() > tol::herm * std::max(1.0, std::abs(kerr.chi))) {
    throw std::invalid_argument("multimode_amplification: input is not the cross-Kerr Hamiltonian");
  }
  const FockSpace& space = h.space;
  std::vector<Matrix> factors;
  for (int k = 0; k < space.modes(); ++k) {
    const int d = space.dim(k);
    const bool in_kerr = std::find(kerr.modes.begin(), kerr.modes.end(), k) != kerr.modes.end();
    if (!in_kerr) {
      factors.push_back(Matrix::Identity(d, d));
    } else if (r == 0.0) {
      factors.push_back(number_matrix(d));
    } else {
      factors.push_back(0.5 * (squeezed_number_numeric(r, 0.0, d, space.guard()) +
                               squeezed_number_numeric(r, pi, d, space.guard())));
    }
  }
  return Operator(space, kerr.chi * tensor(factors));
}

//============================================================================
// Trotter sequences
//============================================================================

// exp(-i lambda H t) with the nominal amplification factor.
inline Operator amplified_target(const SequenceSpec& seq, const FockSpace& space) {
  const Operator h = cross_kerr_h(seq.kerr, space);
  return unitary_evolution(h, seq.amplification() * seq.t);
}

// Exact infinite-step generator of the sequence: each squeezed number
// operator averages to cosh(2r) n + sinh^2(r).
inline Operator trotter_limit_hamiltonian(const SequenceSpec& seq, const FockSpace& space) {
  const std::vector<int> sq = seq.squeezed_modes();
  for (int m : seq.kerr.modes) space.check_mode(m);
  const double c = std::cosh(2.0 * seq.r);
  const double s2 = std::sinh(seq.r) * std::sinh(seq.r);
  Matrix h = Matrix::Zero(space.dim(), space.dim());
  for (Index i = 0; i < space.dim(); ++i) {
    const std::vector<int> occ = space.occupation(i);
    double prod = seq.kerr.chi;
    for (int m : seq.kerr.modes) {
      const bool squeezed = std::find(sq.begin(), sq.end(), m) != sq.end();
      prod *= squeezed ? c * occ[m] + s2 : occ[m];
    }
    h(i, i) = prod;
  }
  return Operator(space, std::move(h));
}

inline Operator trotter_limit(const SequenceSpec& seq, const FockSpace& space) {
  return unitary_evolution(trotter_limit_hamiltonian(seq, space), seq.t);
}

namespace detail {

// Per-mode squeezers for theta = 0 and theta = pi, built once.
struct SqueezerCache {
  std::map<int, Matrix> zero;
  std::map<int, Matrix> flip;

  SqueezerCache(const SequenceSpec& seq, const FockSpace& space) {
    for (int m : seq.squeezed_modes()) {
      space.check_mode(m);
      zero.emplace(m, squeeze_matrix(seq.r, 0.0, space.dim(m), space.guard()));
      flip.emplace(m, squeeze_matrix(seq.r, pi, space.dim(m), space.guard()));
    }
  }
  const Matrix& get(int mode, double theta) const {
    return theta == 0.0 ? zero.at(mode) : flip.at(mode);
  }
};

inline Vector kerr_step_phases(const SequenceSpec& seq, const FockSpace& space) {
  const Operator h = cross_kerr_h(seq.kerr, space);
  return (-I_unit * seq.dt() * h.mat.diagonal().real().cast<cplx>()).array().exp();
}

}  // namespace detail

// One factor S_p^dag U_dt S_p of the sequence for angle pattern p.
inline Matrix sequence_factor(const SequenceSpec& seq, const FockSpace& space, int p) {
  const detail::SqueezerCache cache(seq, space);
  const std::vector<int> sq = seq.squeezed_modes();
  std::vector<Matrix> per_mode;
  for (int k = 0; k < space.modes(); ++k) per_mode.push_back(Matrix::Identity(space.dim(k), space.dim(k)));
  for (std::size_t slot = 0; slot < sq.size(); ++slot) {
    per_mode[sq[slot]] = cache.get(sq[slot], pattern_angle(p, static_cast<int>(slot)));
  }
  const Matrix s = tensor(per_mode);
  const Vector phases = detail::kerr_step_phases(seq, space);
  return s.adjoint() * phases.asDiagonal() * s;
}

inline Matrix matrix_power(Matrix base, int n) {
  if (n < 0) throw std::invalid_argument("matrix_power: negative exponent");
  Matrix result = Matrix::Identity(base.rows(), base.cols());
  while (n > 0) {
    if (n & 1) result = result * base;
    n >>= 1;
    if (n > 0) base = base * base;
  }
  return result;
}

// Full finite-N product. The leftmost factor in each step is pattern 0,
// the rightmost (applied first) is the last pattern.
inline Operator sequence_unitary(const SequenceSpec& seq, const FockSpace& space) {
  const int np = seq.patterns();
  Matrix step = Matrix::Identity(space.dim(), space.dim());
  for (int p = 0; p < np; ++p) step = step * sequence_factor(seq, space, p);
  return Operator(space, matrix_power(step, seq.steps));
}

// Applies the sequence to each ket column without forming the full unitary.
inline Matrix sequence_on_kets(const SequenceSpec& seq, const FockSpace& space, const Matrix& kets) {
  if (kets.rows() != space.dim()) throw std::invalid_argument("sequence_on_kets: ket dimension mismatch");
  const detail::SqueezerCache cache(seq, space);
  const std::vector<int> sq = seq.squeezed_modes();
  const Vector phases = detail::kerr_step_phases(seq, space);
  std::map<std::pair<int, double>, Matrix> adj;
  for (int m : sq) {
    adj.emplace(std::make_pair(m, 0.0), cache.get(m, 0.0).adjoint());
    adj.emplace(std::make_pair(m, pi), cache.get(m, pi).adjoint());
  }
  const int np = seq.patterns();
  Matrix out(kets.rows(), kets.cols());
  for (Index c = 0; c < kets.cols(); ++c) {
    Vector v = kets.col(c);
    for (int rep = 0; rep < seq.steps; ++rep) {
      for (int p = np - 1; p >= 0; --p) {
        for (std::size_t slot = 0; slot < sq.size(); ++slot) {
          v = apply_on_mode(cache.get(sq[slot], pattern_angle(p, static_cast<int>(slot))), sq[slot],
                            space, v);
        }
        v = phases.cwiseProduct(v);
        for (std::size_t slot = 0; slot < sq.size(); ++slot) {
          v = apply_on_mode(adj.at({sq[slot], pattern_angle(p, static_cast<int>(slot))}), sq[slot],
                            space, v);
        }
      }
    }
    out.col(c) = v;
  }
  return out;
}

}  // namespace kerramp

#endif  // KERRAMP_SQUEEZE_HPP
