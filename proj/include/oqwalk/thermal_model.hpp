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
#include <utility>
#include <vector>

#include "oqwalk/matrix.hpp"
#include "oqwalk/walk.hpp"

namespace oqwalk {

struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct CompletionFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Mean thermal photon number 1/(exp(beta*hbar*omega) - 1).
inline double thermal_occupation(double beta_omega) {
  if (!(beta_omega > 0.0))
    throw ParameterError("thermal_occupation: beta*omega must be positive");
  return 1.0 / std::expm1(beta_omega);
}

/// Physical parameters of the thermal cavity walk. delta sets the frequency
/// unit; g and gamma share it, dt is its inverse. epsilon = g/delta must stay
/// deep in the dispersive regime for the jump operators to make sense.
struct ModelParams {
  double g = 0.02;
  double delta = 1.0;
  double gamma = 0.2;
  double n_th = 0.0;
  double dt = 0.02;
  int k_max = 200;

  double epsilon() const { return g / delta; }

  /// Checks every invariant for k in [0, k_max]. Throws ParameterError naming
  /// the violated invariant; appends non-fatal notices (epsilon above the soft
  /// dispersive guard) to `warnings` when given. `require_positive_dt` is
  /// relaxed by operator builders, which accept the degenerate dt = 0 set.
  void validate(std::vector<std::string>* warnings = nullptr,
                bool require_positive_dt = true) const {
    if (!(delta > 0.0)) throw ParameterError("delta must be > 0");
    if (!(g > 0.0)) throw ParameterError("g must be > 0");
    if (!(gamma >= 0.0)) throw ParameterError("gamma must be >= 0");
    if (!(n_th >= 0.0)) throw ParameterError("n_th must be >= 0");
    if (require_positive_dt) {
      if (!(dt > 0.0)) throw ParameterError("dt must be > 0");
    } else if (!(dt >= 0.0)) {
      throw ParameterError("dt must be >= 0");
    }
    if (k_max < 0) throw ParameterError("k_max must be >= 0");
    const double eps = epsilon();
    if (eps >= 0.3)
      throw ParameterError("epsilon = g/delta = " + std::to_string(eps) +
                           " is at or beyond the 0.3 hard limit");
    if (eps > 0.1 && warnings)
      warnings->push_back("epsilon = " + std::to_string(eps) +
                          " exceeds the 0.1 dispersive-regime guard");
    const double e2 = eps * eps;
    // Square-root arguments of the jump amplitudes must stay non-negative and
    // the per-step jump probabilities sub-unit across the whole lattice. Both
    // families are monotone in k, so the ends suffice; k_max is checked for
    // the root arguments and k = 0 for the probabilities.
    if (1.0 - 2.0 * e2 * (k_max + 1) < 0.0)
      throw ParameterError("1 - 2 eps^2 (k+1) negative at k_max = " + std::to_string(k_max) +
                           " (dispersive ceiling exceeded)");
    if (1.0 - e2 * (2.0 * k_max + 3.0) < 0.0)
      throw ParameterError("1 - eps^2 (2k+3) negative at k_max = " + std::to_string(k_max) +
                           " (dispersive ceiling exceeded)");
    if (gamma * (n_th + 1.0) * dt * (1.0 - 2.0 * e2) > 1.0)
      throw ParameterError("emission jump probability gamma (n_th+1) dt exceeds 1");
    if (gamma * n_th * dt * (1.0 - 3.0 * e2) > 1.0)
      throw ParameterError("absorption jump probability gamma n_th dt exceeds 1");
  }

  /// Largest admissible k_max for this g/delta: (delta^2/g^2 - 3)/2.
  int dispersive_ceiling() const {
    const double e2 = epsilon() * epsilon();
    return static_cast<int>(std::floor((1.0 / e2 - 3.0) / 2.0));
  }
};

enum class OperatorMode { Paper, Completed };

inline OperatorMode parse_operator_mode(const std::string& s) {
  if (s == "paper") return OperatorMode::Paper;
  if (s == "completed") return OperatorMode::Completed;
  throw ParameterError("unknown operator mode '" + s + "' (expected paper|completed)");
}

inline std::string to_string(OperatorMode m) {
  return m == OperatorMode::Paper ? "paper" : "completed";
}

/// Number-resolved qubit Hamiltonian block at photon number k:
/// (g^2/delta) (k sigma_z + sigma_z/2 + 1/2).
inline ComplexMatrix local_hamiltonian(const ModelParams& p, int k) {
  if (k < 0) throw ParameterError("local_hamiltonian: k must be >= 0");
  const double shift = p.g * p.g / p.delta;
  ComplexMatrix h(2);
  h(0, 0) = shift * (k + 1.0);  // (k + 1/2 + 1/2) on |e>
  h(1, 1) = shift * (-static_cast<double>(k));  // (-k - 1/2 + 1/2) on |g>
  return h;
}

namespace detail {

struct SiteCoefficients {
  double stay_minus;  // gamma (n_th+1) dt (1 - 2 eps^2 (k+1)),  with sigma_-
  double stay_plus;   // gamma n_th dt (1 - eps^2 (2k+3)),       with sigma_+
  double jump_left;   // gamma (n_th+1) eps^2 dt k,              with sigma_z
  double jump_right;  // gamma n_th eps^2 dt (k+1),              with sigma_z
};

inline SiteCoefficients site_coefficients(const ModelParams& p, int k) {
  const double e2 = p.epsilon() * p.epsilon();
  return {p.gamma * (p.n_th + 1.0) * p.dt * (1.0 - 2.0 * e2 * (k + 1)),
          p.gamma * p.n_th * p.dt * (1.0 - e2 * (2.0 * k + 3.0)),
          p.gamma * (p.n_th + 1.0) * e2 * p.dt * k,
          p.gamma * p.n_th * e2 * p.dt * (k + 1.0)};
}

}  // namespace detail

/// The five jump operators leaving site k, exactly as the discretization of
/// the block master equation prescribes them:
///   stay:  B    = sqrt(gamma (n_th+1) dt (1 - 2 eps^2 (k+1))) sigma_-
///          B'   = sqrt(gamma n_th dt (1 - eps^2 (2k+3))) sigma_+
///          B''  = I + i dt h_k - (first-order damping, see below)
///   k-1:   sqrt(gamma (n_th+1) eps^2 dt k) sigma_z
///   k+1:   sqrt(gamma n_th eps^2 dt (k+1)) sigma_z
/// The set conserves probability to first order in dt; the residual is
/// exactly quadratic in dt.
inline std::vector<std::pair<int, ComplexMatrix>> build_site_operators(const ModelParams& p,
                                                                       int k) {
  p.validate(nullptr, /*require_positive_dt=*/false);
  if (k < 0 || k > p.k_max)
    throw ParameterError("build_site_operators: k out of [0, k_max]");
  const auto c = detail::site_coefficients(p, k);
  if (c.stay_minus < 0.0 || c.stay_plus < 0.0)
    throw ParameterError("build_site_operators: negative square-root argument at k = " +
                         std::to_string(k));

  ComplexMatrix bpp = ComplexMatrix::identity(2);
  bpp += Complex(0.0, p.dt) * local_hamiltonian(p, k);
  bpp -= 0.5 * c.stay_minus * multiply(pauli(Pauli::Plus), pauli(Pauli::Minus));
  bpp -= 0.5 * c.stay_plus * multiply(pauli(Pauli::Minus), pauli(Pauli::Plus));
  bpp -= 0.5 * (c.jump_left + c.jump_right) * ComplexMatrix::identity(2);

  return {{k, std::sqrt(c.stay_minus) * pauli(Pauli::Minus)},
          {k, std::sqrt(c.stay_plus) * pauli(Pauli::Plus)},
          {k, bpp},
          {k - 1, std::sqrt(c.jump_left) * pauli(Pauli::Z)},
          {k + 1, std::sqrt(c.jump_right) * pauli(Pauli::Z)}};
}

namespace detail {

/// Principal square root of a 2x2 Hermitian PSD matrix via its closed-form
/// spectral decomposition.
inline ComplexMatrix sqrt_psd_2x2(const ComplexMatrix& s) {
  const double mean = 0.5 * (s(0, 0).real() + s(1, 1).real());
  const double half_gap = 0.5 * (s(0, 0).real() - s(1, 1).real());
  const Complex off = 0.5 * (s(0, 1) + std::conj(s(1, 0)));
  const double radius = std::hypot(half_gap, std::abs(off));
  const double lo = mean - radius, hi = mean + radius;
  if (lo < -1e-12) throw CompletionFailed("sqrt_psd_2x2: matrix not PSD");
  const double rlo = std::sqrt(std::max(lo, 0.0)), rhi = std::sqrt(std::max(hi, 0.0));
  ComplexMatrix out(2);
  if (radius < 1e-300) {
    out(0, 0) = out(1, 1) = rlo;
    return out;
  }
  // sqrt(S) = ((rhi+rlo)/2) I + ((rhi-rlo)/2) (S - mean I)/radius
  const double a = 0.5 * (rhi + rlo), b = 0.5 * (rhi - rlo) / radius;
  out(0, 0) = a + b * half_gap;
  out(1, 1) = a - b * half_gap;
  out(0, 1) = b * off;
  out(1, 0) = b * std::conj(off);
  return out;
}

}  // namespace detail

/// Same five operators with the stay operator B'' replaced by
/// U_k sqrt(I - S_k), where S_k sums B^dag B over the other four. The result
/// is an exactly trace-preserving Kraus set that agrees with the first-order
/// set to O(dt^2).
inline std::vector<std::pair<int, ComplexMatrix>> build_completed_site_operators(
    const ModelParams& p, int k) {
  auto ops = build_site_operators(p, k);
  ComplexMatrix s(2);
  for (std::size_t i = 0; i < ops.size(); ++i) {
    if (i == 2) continue;
    const ComplexMatrix& b = ops[i].second;
    s += multiply(b.adjoint(), b);
  }
  const ComplexMatrix remainder = ComplexMatrix::identity(2) - s;
  const auto spectrum = hermitian_eigenvalues_2x2(remainder);
  if (spectrum.eigenvalues.front() < -1e-12)
    throw CompletionFailed("build_completed_site_operators: I - S_k not PSD at k = " +
                           std::to_string(k) + " (parameters too aggressive)");
  const ComplexMatrix unitary =
      matrix_exponential(Complex(0.0, p.dt) * local_hamiltonian(p, k));
  ops[2].second = multiply(unitary, detail::sqrt_psd_2x2(remainder));
  return ops;
}

/// Assembles the lattice-wide transition set for the requested mode and
/// records the measured first-order residual coefficient C.
inline TransitionSet build_transition_set(const ModelParams& p, OperatorMode mode) {
  p.validate(nullptr, /*require_positive_dt=*/false);
  const bool exact = (mode == OperatorMode::Completed) || p.dt == 0.0;
  TransitionSet ts(p.k_max, exact ? NormalizationClass::Exact : NormalizationClass::FirstOrder,
                   p.dt);
  for (int k = 0; k <= p.k_max; ++k) {
    const auto ops = mode == OperatorMode::Paper ? build_site_operators(p, k)
                                                 : build_completed_site_operators(p, k);
    for (const auto& [target, op] : ops) {
      if (target < 0 && op.frobenius_norm() == 0.0) continue;  // zero amplitude at k = 0
      ts.add(k, target, op);
    }
  }
  if (!exact && p.dt > 0.0) {
    double worst = 0.0;
    for (double r : verify_normalization(ts)) worst = std::max(worst, r);
    ts.set_residual_coefficient(worst / (p.dt * p.dt));
  }
  return ts;
}

/// Right-hand side of the block master equation:
///   d rho_k/dt = +i (g^2/delta)[k sigma_z + sigma_z/2 + 1/2, rho_k]
///     + gamma (n_th+1) eps^2 [(k+1) sigma_z rho_{k+1} sigma_z - k rho_k]
///     + gamma (n_th+1) (1 - 2 eps^2 (k+1)) L[sigma_-, sigma_+] rho_k
///     + gamma n_th { (1 - eps^2 (2k+3)) L[sigma_+, sigma_-] rho_k
///                    + eps^2 (k sigma_z rho_{k-1} sigma_z - (k+1) rho_k) }
/// with out-of-range neighbor blocks treated as zero. The commutator carries
/// the printed +i sign, which is opposite to the usual Lindblad convention.
inline WalkerState ode_rhs(const WalkerState& state, const ModelParams& p) {
  p.validate(nullptr, /*require_positive_dt=*/false);
  if (state.k_max() != p.k_max)
    throw DimensionMismatch("ode_rhs: state lattice does not match params");
  const double e2 = p.epsilon() * p.epsilon();
  const double shift = p.g * p.g / p.delta;
  const double em = p.gamma * (p.n_th + 1.0);
  const double ab = p.gamma * p.n_th;
  WalkerState deriv(p.k_max);
  deriv.pre_renorm_trace_ = 0.0;

  for (int k = 0; k <= p.k_max; ++k) {
    const Complex* r = state.block_ptr(k);
    Complex* d = deriv.block_ptr(k);
    // +i [h, rho] with h = shift * diag(k+1, -k): only the coherences move.
    const double gap = shift * (2.0 * k + 1.0);
    d[1] += Complex(0.0, gap) * r[1];
    d[2] += Complex(0.0, -gap) * r[2];
    // Emission dissipator: L[sigma_-, sigma_+] rho = s- r s+ - {P_e, r}/2.
    const double cm = em * (1.0 - 2.0 * e2 * (k + 1));
    d[0] += cm * (-r[0]);
    d[1] += cm * (-0.5 * r[1]);
    d[2] += cm * (-0.5 * r[2]);
    d[3] += cm * r[0];
    // Absorption dissipator: L[sigma_+, sigma_-] rho = s+ r s- - {P_g, r}/2.
    const double cp = ab * (1.0 - e2 * (2.0 * k + 3.0));
    d[0] += cp * r[3];
    d[1] += cp * (-0.5 * r[1]);
    d[2] += cp * (-0.5 * r[2]);
    d[3] += cp * (-r[3]);
    // Number-jump outflow.
    const double out = em * e2 * k + ab * e2 * (k + 1.0);
    for (int i = 0; i < 4; ++i) d[i] -= out * r[i];
    // Number-jump inflow, sigma_z rho sigma_z flips the sign of off-diagonals.
    if (k + 1 <= p.k_max) {
      const Complex* rn = state.block_ptr(k + 1);
      const double w = em * e2 * (k + 1.0);
      d[0] += w * rn[0];
      d[1] -= w * rn[1];
      d[2] -= w * rn[2];
      d[3] += w * rn[3];
    }
    if (k - 1 >= 0) {
      const Complex* rn = state.block_ptr(k - 1);
      const double w = ab * e2 * k;
      d[0] += w * rn[0];
      d[1] -= w * rn[1];
      d[2] -= w * rn[2];
      d[3] += w * rn[3];
    }
  }
  return deriv;
}

}  // namespace oqwalk
