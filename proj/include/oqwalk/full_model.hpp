// Copyright 2026 The oqwalk Authors
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

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "oqwalk/matrix.hpp"
#include "oqwalk/thermal_model.hpp"

namespace oqwalk {

/// Untransformed atom-cavity density matrix on the truncated composite basis
/// |qubit> (x) |k>, ordered (e,0),(e,1),...,(g,0),(g,1),...
struct FullState {
  ComplexMatrix rho;
  int n_max = 0;

  FullState(int n_max_, const ComplexMatrix& rho_) : rho(rho_), n_max(n_max_) {
    if (rho.dim() != 2 * (n_max + 1))
      throw DimensionMismatch("FullState: rho dimension must be 2(n_max+1)");
  }

  /// |qubit> (x) |k><k| (x) <qubit| for a pure qubit block.
  static FullState product_state(int n_max, int k, const ComplexMatrix& qubit) {
    if (k < 0 || k > n_max) throw std::invalid_argument("FullState: Fock index out of range");
    ComplexMatrix rho(2 * (n_max + 1));
    const int n = n_max + 1;
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) rho(r * n + k, c * n + k) = qubit(r, c);
    return FullState(n_max, rho);
  }
};

/// Lifts a qubit operator to the composite space (qubit slow, Fock fast).
inline ComplexMatrix lift_qubit(const ComplexMatrix& q, int n_max) {
  return kron(q, ComplexMatrix::identity(n_max + 1));
}

/// Lifts a Fock-space operator to the composite space.
inline ComplexMatrix lift_fock(const ComplexMatrix& f, int n_max) {
  if (f.dim() != n_max + 1) throw DimensionMismatch("lift_fock: dimension mismatch");
  return kron(ComplexMatrix::identity(2), f);
}

/// Atom-field interaction Hamiltonian in the rotating-wave approximation:
/// delta a^dag a + g (a sigma_+ + a^dag sigma_-).
inline ComplexMatrix build_h_int(const ModelParams& p, int n_max) {
  if (n_max < 2) throw ParameterError("build_h_int: n_max must be >= 2");
  const ComplexMatrix a = annihilation(n_max);
  const ComplexMatrix ad = a.adjoint();
  ComplexMatrix h = p.delta * lift_fock(multiply(ad, a), n_max);
  h += p.g * (kron(pauli(Pauli::Plus), a) + kron(pauli(Pauli::Minus), ad));
  return h;
}

/// Lifted excitation number a^dag a + sigma_z/2, the constant of motion of
/// the coupled system.
inline ComplexMatrix excitation_number(int n_max) {
  const ComplexMatrix a = annihilation(n_max);
  return lift_fock(multiply(a.adjoint(), a), n_max) + 0.5 * lift_qubit(pauli(Pauli::Z), n_max);
}

/// Precomputed operators for the master equation
///   d rho/dt = -i[H_int, rho] + gamma (n_th+1) L[s-, s+] rho
///              + gamma n_th L[s+, s-] rho
/// with sigma_+- lifted to the composite space.
class FullModel {
 public:
  FullModel(const ModelParams& p, int n_max)
      : n_max_(n_max),
        gamma_down_(p.gamma * (p.n_th + 1.0)),
        gamma_up_(p.gamma * p.n_th),
        h_(build_h_int(p, n_max)),
        s_minus_(lift_qubit(pauli(Pauli::Minus), n_max)),
        s_plus_(lift_qubit(pauli(Pauli::Plus), n_max)),
        plus_minus_(multiply(s_plus_, s_minus_)),
        minus_plus_(multiply(s_minus_, s_plus_)),
        t1_(h_.dim()),
        t2_(h_.dim()) {}

  int n_max() const { return n_max_; }
  int dim() const { return h_.dim(); }
  const ComplexMatrix& hamiltonian() const { return h_; }

  void rhs_into(const ComplexMatrix& rho, ComplexMatrix& drho) {
    if (drho.dim() != rho.dim()) drho = ComplexMatrix(rho.dim());
    // -i [H, rho]
    multiply_into(h_, rho, t1_);
    multiply_into(rho, h_, t2_);
    const std::size_t sz = drho.data().size();
    for (std::size_t i = 0; i < sz; ++i)
      drho.data()[i] = Complex(0.0, -1.0) * (t1_.data()[i] - t2_.data()[i]);
    add_dissipator(rho, drho, s_minus_, s_plus_, plus_minus_, gamma_down_);
    add_dissipator(rho, drho, s_plus_, s_minus_, minus_plus_, gamma_up_);
  }

 private:
  void add_dissipator(const ComplexMatrix& rho, ComplexMatrix& drho, const ComplexMatrix& n,
                      const ComplexMatrix& m, const ComplexMatrix& mn, double rate) {
    if (rate == 0.0) return;
    // rate * (n rho m - (mn rho + rho mn)/2)
    multiply_into(n, rho, t1_);
    multiply_into(t1_, m, t2_);
    multiply_into(mn, rho, t1_);
    const std::size_t sz = drho.data().size();
    for (std::size_t i = 0; i < sz; ++i)
      drho.data()[i] += rate * (t2_.data()[i] - 0.5 * t1_.data()[i]);
    multiply_into(rho, mn, t1_);
    for (std::size_t i = 0; i < sz; ++i) drho.data()[i] -= rate * 0.5 * t1_.data()[i];
  }

  int n_max_;
  double gamma_down_, gamma_up_;
  ComplexMatrix h_, s_minus_, s_plus_, plus_minus_, minus_plus_;
  ComplexMatrix t1_, t2_;
};

/// One evaluation of the full master equation right-hand side.
inline ComplexMatrix full_lindblad_rhs(const FullState& state, const ModelParams& p) {
  FullModel model(p, state.n_max);
  ComplexMatrix out(state.rho.dim());
  model.rhs_into(state.rho, out);
  return out;
}

/// Small unitary rotation U = exp[eps (a^dag sigma_- - a sigma_+)] that
/// cancels the coupling to first order in eps.
inline ComplexMatrix build_rotation(const ModelParams& p, int n_max) {
  p.validate(nullptr, /*require_positive_dt=*/false);
  const ComplexMatrix a = annihilation(n_max);
  const ComplexMatrix generator =
      kron(pauli(Pauli::Minus), a.adjoint()) - kron(pauli(Pauli::Plus), a);
  return matrix_exponential(p.epsilon() * generator);
}

/// Diagonalization quality of the small rotation, evaluated on the sub-block
/// with photon number <= n_max/2 (the cutoff sectors are excluded):
///   r_before        qubit-off-diagonal norm of H_int,
///   r_after         same norm for U H_int U^dag,
///   h_eff_distance  || P (U H_int U^dag - H_eff) P || with
///                   H_eff = delta a^dag a - (g^2/delta)(a^dag a sigma_z
///                           + sigma_z/2 + 1/2).
struct DiagonalityReport {
  double r_before = 0.0;
  double r_after = 0.0;
  double h_eff_distance = 0.0;
};

inline DiagonalityReport diagonality_residual(const ModelParams& p, int n_max) {
  const int n = n_max + 1;
  const int k_cut = n_max / 2;
  const ComplexMatrix h = build_h_int(p, n_max);
  const ComplexMatrix u = build_rotation(p, n_max);
  const ComplexMatrix rotated = multiply(multiply(u, h), u.adjoint());

  // Frobenius norm of the qubit-off-diagonal blocks, restricted to k <= k_cut.
  const auto restricted_offdiag = [&](const ComplexMatrix& m) {
    double s = 0.0;
    for (int k1 = 0; k1 <= k_cut; ++k1)
      for (int k2 = 0; k2 <= k_cut; ++k2)
        s += std::norm(m(k1, n + k2)) + std::norm(m(n + k1, k2));
    return std::sqrt(s);
  };
  const auto restricted_norm = [&](const ComplexMatrix& m) {
    double s = 0.0;
    for (int q1 = 0; q1 < 2; ++q1)
      for (int q2 = 0; q2 < 2; ++q2)
        for (int k1 = 0; k1 <= k_cut; ++k1)
          for (int k2 = 0; k2 <= k_cut; ++k2) s += std::norm(m(q1 * n + k1, q2 * n + k2));
    return std::sqrt(s);
  };

  const ComplexMatrix a = annihilation(n_max);
  const ComplexMatrix number = multiply(a.adjoint(), a);
  ComplexMatrix h_eff = p.delta * lift_fock(number, n_max);
  const double shift = p.g * p.g / p.delta;
  h_eff -= shift * kron(pauli(Pauli::Z), number);
  h_eff -= (0.5 * shift) * lift_qubit(pauli(Pauli::Z), n_max);
  h_eff -= (0.5 * shift) * ComplexMatrix::identity(2 * n);

  DiagonalityReport report;
  report.r_before = restricted_offdiag(h);
  report.r_after = restricted_offdiag(rotated);
  report.h_eff_distance = restricted_norm(rotated - h_eff);
  return report;
}

/// Photon-number marginal P(k) = <e,k|rho|e,k> + <g,k|rho|g,k>.
inline std::vector<double> reduced_photon_distribution(const FullState& state) {
  const int n = state.n_max + 1;
  std::vector<double> p(n);
  for (int k = 0; k < n; ++k)
    p[k] = state.rho(k, k).real() + state.rho(n + k, n + k).real();
  return p;
}

/// Population of the excited qubit level, traced over the cavity.
inline double reduced_excited_population(const FullState& state) {
  const int n = state.n_max + 1;
  double pe = 0.0;
  for (int k = 0; k < n; ++k) pe += state.rho(k, k).real();
  return pe;
}

/// Estimate of the most-negative eigenvalue of a Hermitian matrix by power
/// iteration on c I - H (c = a cheap upper bound on the spectrum). Accurate to
/// the iteration's convergence, which is all the positivity diagnostics need.
inline double min_eigenvalue_bound(const ComplexMatrix& h, int iterations = 200) {
  const int n = h.dim();
  double c = 0.0;
  for (int r = 0; r < n; ++r) {
    double row = 0.0;
    for (int col = 0; col < n; ++col) row += std::abs(h(r, col));
    c = std::max(c, row);
  }
  if (c == 0.0) return 0.0;
  // Deterministic start vector with nonzero overlap against generic extremes.
  std::vector<Complex> v(n), w(n);
  for (int i = 0; i < n; ++i) v[i] = Complex(1.0 + 0.3 * ((i * 2654435761u) % 97) / 97.0,
                                             0.1 * ((i * 40503u) % 89) / 89.0);
  double rayleigh = 0.0;
  for (int it = 0; it < iterations; ++it) {
    // w = (c I - H) v
    for (int r = 0; r < n; ++r) {
      Complex acc = c * v[r];
      for (int col = 0; col < n; ++col) acc -= h(r, col) * v[col];
      w[r] = acc;
    }
    double norm = 0.0;
    Complex dot = 0.0;
    for (int i = 0; i < n; ++i) {
      norm += std::norm(w[i]);
      dot += std::conj(v[i]) * w[i];
    }
    norm = std::sqrt(norm);
    if (norm == 0.0) return 0.0;
    const double prev = rayleigh;
    rayleigh = dot.real();  // v normalized from the previous pass
    for (int i = 0; i < n; ++i) v[i] = w[i] / norm;
    if (it > 8 && std::abs(rayleigh - prev) < 1e-12 * std::max(1.0, std::abs(rayleigh))) break;
  }
  return c - rayleigh;
}

}  // namespace oqwalk
