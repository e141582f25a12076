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

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "oqwalk/matrix.hpp"

namespace oqwalk {

struct LeakExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PositivityBreach : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TraceDrift : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LatticeTooLarge : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

namespace detail {

// 2x2 block as row-major {m00, m01, m10, m11}.
using Block = std::array<Complex, 4>;

inline Block to_block(const ComplexMatrix& m) {
  if (m.dim() != 2) throw DimensionMismatch("walker blocks must be 2x2");
  return {m(0, 0), m(0, 1), m(1, 0), m(1, 1)};
}

inline ComplexMatrix from_block(const Complex* b) {
  ComplexMatrix m(2);
  m(0, 0) = b[0];
  m(0, 1) = b[1];
  m(1, 0) = b[2];
  m(1, 1) = b[3];
  return m;
}

// acc += B x B^dag.
inline void accumulate_sandwich(const Block& b, const Complex* x, Complex* acc) {
  const Complex t0 = b[0] * x[0] + b[1] * x[2];
  const Complex t1 = b[0] * x[1] + b[1] * x[3];
  const Complex t2 = b[2] * x[0] + b[3] * x[2];
  const Complex t3 = b[2] * x[1] + b[3] * x[3];
  acc[0] += t0 * std::conj(b[0]) + t1 * std::conj(b[1]);
  acc[1] += t0 * std::conj(b[2]) + t1 * std::conj(b[3]);
  acc[2] += t2 * std::conj(b[0]) + t3 * std::conj(b[1]);
  acc[3] += t2 * std::conj(b[2]) + t3 * std::conj(b[3]);
}

// tr(B rho B^dag) = tr(rho B^dag B) for a 2x2 block.
inline double sandwich_trace(const Block& b, const Complex* x) {
  const Complex bdb00 = std::conj(b[0]) * b[0] + std::conj(b[2]) * b[2];
  const Complex bdb01 = std::conj(b[0]) * b[1] + std::conj(b[2]) * b[3];
  const Complex bdb10 = std::conj(b[1]) * b[0] + std::conj(b[3]) * b[2];
  const Complex bdb11 = std::conj(b[1]) * b[1] + std::conj(b[3]) * b[3];
  return (bdb00 * x[0] + bdb01 * x[2] + bdb10 * x[1] + bdb11 * x[3]).real();
}

// Smaller eigenvalue of the Hermitian part of a 2x2 block.
inline double block_min_eigenvalue(const Complex* b) {
  const double mean = 0.5 * (b[0].real() + b[3].real());
  const double half_gap = 0.5 * (b[0].real() - b[3].real());
  const double off = 0.5 * std::abs(b[1] + std::conj(b[2]));
  return mean - std::hypot(half_gap, off);
}

inline double block_hermiticity_defect(const Complex* b) {
  const double d_diag = std::hypot(b[0].imag(), b[3].imag());
  const double d_off = std::abs(b[1] - std::conj(b[2]));
  return std::sqrt(d_diag * d_diag + 2.0 * d_off * d_off);
}

}  // namespace detail

/// Block-diagonal walker state on the line: one 2x2 density block per lattice
/// site k in [0, k_max]. Blocks are stored flat for the stepping kernel; the
/// diagnostics accumulated across steps (cumulative leak, last
/// pre-renormalization trace) travel with the state.
class WalkerState {
 public:
  explicit WalkerState(int k_max)
      : k_max_(k_max), blocks_(4 * static_cast<std::size_t>(k_max + 1)) {
    if (k_max < 0) throw std::invalid_argument("WalkerState: k_max must be >= 0");
  }

  /// State concentrated at one site with the given qubit block (trace 1).
  static WalkerState point_mass(int k_max, int site, const ComplexMatrix& qubit) {
    WalkerState s(k_max);
    if (site < 0 || site > k_max) throw std::invalid_argument("point_mass: site out of range");
    s.set_block(site, qubit);
    return s;
  }

  int k_max() const { return k_max_; }
  int num_sites() const { return k_max_ + 1; }

  ComplexMatrix block(int k) const { return detail::from_block(block_ptr(k)); }

  void set_block(int k, const ComplexMatrix& m) {
    const detail::Block b = detail::to_block(m);
    std::copy(b.begin(), b.end(), block_ptr(k));
  }

  const Complex* block_ptr(int k) const { return blocks_.data() + 4 * static_cast<std::size_t>(k); }
  Complex* block_ptr(int k) { return blocks_.data() + 4 * static_cast<std::size_t>(k); }

  double total_trace() const {
    double t = 0.0;
    for (int k = 0; k <= k_max_; ++k) {
      const Complex* b = block_ptr(k);
      t += b[0].real() + b[3].real();
    }
    return t;
  }

  double min_block_eigenvalue() const {
    double m = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= k_max_; ++k)
      m = std::min(m, detail::block_min_eigenvalue(block_ptr(k)));
    return m;
  }

  double max_hermiticity_defect() const {
    double m = 0.0;
    for (int k = 0; k <= k_max_; ++k)
      m = std::max(m, detail::block_hermiticity_defect(block_ptr(k)));
    return m;
  }

  double cumulative_leak() const { return cumulative_leak_; }
  double pre_renorm_trace() const { return pre_renorm_trace_; }

  const std::vector<Complex>& raw() const { return blocks_; }
  std::vector<Complex>& raw() { return blocks_; }

  double cumulative_leak_ = 0.0;
  double pre_renorm_trace_ = 1.0;

 private:
  int k_max_ = 0;
  std::vector<Complex> blocks_;
};

enum class NormalizationClass { Exact, FirstOrder };

/// Per-source-node Kraus operators of a nearest-neighbor walk. Targets are
/// source-1, source, or source+1; a target one site beyond either lattice end
/// is kept as a leak channel, whose contribution the stepper drops and meters.
class TransitionSet {
 public:
  TransitionSet(int k_max, NormalizationClass cls, double dt = 0.0)
      : k_max_(k_max), class_(cls), dt_(dt), ops_(k_max + 1) {
    if (k_max < 0) throw std::invalid_argument("TransitionSet: k_max must be >= 0");
  }

  void add(int source, int target, const ComplexMatrix& op) {
    if (source < 0 || source > k_max_)
      throw std::invalid_argument("TransitionSet::add: source out of range");
    if (target < source - 1 || target > source + 1)
      throw std::invalid_argument("TransitionSet::add: target not a nearest neighbor");
    ops_[source].emplace_back(target, detail::to_block(op));
  }

  int k_max() const { return k_max_; }
  NormalizationClass normalization_class() const { return class_; }
  double dt() const { return dt_; }

  /// Residual coefficient C of the first-order class bound
  /// ||sum B^dag B - I||_F <= C dt^2, recorded when the set is built (zero for
  /// exact sets).
  double residual_coefficient() const { return residual_coeff_; }
  void set_residual_coefficient(double c) { residual_coeff_ = c; }

  std::vector<std::pair<int, ComplexMatrix>> ops_at(int source) const {
    std::vector<std::pair<int, ComplexMatrix>> out;
    out.reserve(ops_[source].size());
    for (const auto& [target, block] : ops_[source])
      out.emplace_back(target, detail::from_block(block.data()));
    return out;
  }

  const std::vector<std::pair<int, detail::Block>>& raw_ops(int source) const {
    return ops_[source];
  }

 private:
  int k_max_ = 0;
  NormalizationClass class_ = NormalizationClass::Exact;
  double dt_ = 0.0;
  double residual_coeff_ = 0.0;
  std::vector<std::vector<std::pair<int, detail::Block>>> ops_;
};

/// Per-node residual ||sum_j B_j^dag B_j - I||_F, the probability-conservation
/// measure of the Kraus set leaving each node. Leak channels count: they are
/// physical outflow.
inline std::vector<double> verify_normalization(const TransitionSet& ts) {
  std::vector<double> residuals(ts.k_max() + 1);
  for (int k = 0; k <= ts.k_max(); ++k) {
    detail::Block sum{};
    for (const auto& [target, b] : ts.raw_ops(k)) {
      sum[0] += std::conj(b[0]) * b[0] + std::conj(b[2]) * b[2];
      sum[1] += std::conj(b[0]) * b[1] + std::conj(b[2]) * b[3];
      sum[2] += std::conj(b[1]) * b[0] + std::conj(b[3]) * b[2];
      sum[3] += std::conj(b[1]) * b[1] + std::conj(b[3]) * b[3];
    }
    sum[0] -= 1.0;
    sum[3] -= 1.0;
    residuals[k] = std::sqrt(std::norm(sum[0]) + std::norm(sum[1]) + std::norm(sum[2]) +
                             std::norm(sum[3]));
  }
  return residuals;
}

struct StepPolicy {
  bool renormalize = true;
  double leak_tolerance = 1e-9;
};

/// One application of the CPTP map: rho_k' = sum of B rho_source B^dag over
/// every operator targeting site k. Contributions leaving [0, k_max] are
/// dropped and their trace metered as leak. The per-site summation order is
/// fixed (stay terms, then in from k-1, then in from k+1), so the result is
/// independent of any execution schedule; sites could be computed in parallel
/// since each reads only the previous buffer and owns its output block.
inline WalkerState step(const WalkerState& state, const TransitionSet& ts,
                        const StepPolicy& policy) {
  if (ts.k_max() != state.k_max())
    throw DimensionMismatch("step: transition set does not cover the state's lattice");
  if (policy.leak_tolerance <= 0.0)
    throw std::invalid_argument("step: leak_tolerance must be positive");
  const int k_max = state.k_max();
  WalkerState next(k_max);

  double leak = 0.0;
  for (int k = 0; k <= k_max; ++k) {
    Complex* out = next.block_ptr(k);
    // Stay terms.
    for (const auto& [target, b] : ts.raw_ops(k))
      if (target == k) detail::accumulate_sandwich(b, state.block_ptr(k), out);
    // In from the left neighbor.
    if (k > 0)
      for (const auto& [target, b] : ts.raw_ops(k - 1))
        if (target == k) detail::accumulate_sandwich(b, state.block_ptr(k - 1), out);
    // In from the right neighbor.
    if (k < k_max)
      for (const auto& [target, b] : ts.raw_ops(k + 1))
        if (target == k) detail::accumulate_sandwich(b, state.block_ptr(k + 1), out);
  }
  // Off-lattice channels exist only at the lattice ends.
  const auto meter_leak = [&](int k) {
    for (const auto& [target, b] : ts.raw_ops(k))
      if (target < 0 || target > k_max) leak += detail::sandwich_trace(b, state.block_ptr(k));
  };
  meter_leak(0);
  if (k_max > 0) meter_leak(k_max);

  next.cumulative_leak_ = state.cumulative_leak() + leak;
  if (next.cumulative_leak_ > policy.leak_tolerance)
    throw LeakExceeded("step: cumulative leak " + std::to_string(next.cumulative_leak_) +
                       " exceeds tolerance " + std::to_string(policy.leak_tolerance));

  const double trace = next.total_trace();
  next.pre_renorm_trace_ = trace;
  if (policy.renormalize) {
    if (trace <= 0.0) throw TraceDrift("step: non-positive total trace");
    const double inv = 1.0 / trace;
    for (Complex& z : next.raw()) z *= inv;
  }

  const double min_eig = next.min_block_eigenvalue();
  if (min_eig < -1e-8)
    throw PositivityBreach("step: block eigenvalue " + std::to_string(min_eig) + " below -1e-8");
  return next;
}

/// Kraus operators of the dilated global map on the 2(k_max+1)-dimensional
/// space, ordered lattice-major so block-diagonal walker states appear as
/// literal block-diagonal matrices: M = |target><source| (x) B. Leak channels
/// (off-lattice targets) have no representation on the truncated space and are
/// omitted, matching the stepper's drop-and-meter boundary rule.
inline std::vector<ComplexMatrix> dilate_global(const TransitionSet& ts) {
  const int k_max = ts.k_max();
  if (k_max > 8) throw LatticeTooLarge("dilate_global: lattice too large (k_max > 8)");
  const int sites = k_max + 1;
  std::vector<ComplexMatrix> kraus;
  for (int source = 0; source <= k_max; ++source) {
    for (const auto& [target, op] : ts.ops_at(source)) {
      if (target < 0 || target > k_max) continue;
      ComplexMatrix hop(sites);
      hop(target, source) = 1.0;
      kraus.push_back(kron(hop, op));
    }
  }
  return kraus;
}

/// Applies a Kraus list to a density matrix. Test oracle for the blockwise
/// stepper.
inline ComplexMatrix apply_kraus(const std::vector<ComplexMatrix>& kraus,
                                 const ComplexMatrix& rho) {
  ComplexMatrix out(rho.dim());
  for (const ComplexMatrix& m : kraus) out += multiply(multiply(m, rho), m.adjoint());
  return out;
}

/// Embeds a walker state as the block-diagonal density matrix the dilated map
/// acts on.
inline ComplexMatrix embed_block_diagonal(const WalkerState& state) {
  const int sites = state.num_sites();
  ComplexMatrix rho(2 * sites);
  for (int k = 0; k < sites; ++k) {
    const Complex* b = state.block_ptr(k);
    rho(2 * k, 2 * k) = b[0];
    rho(2 * k, 2 * k + 1) = b[1];
    rho(2 * k + 1, 2 * k) = b[2];
    rho(2 * k + 1, 2 * k + 1) = b[3];
  }
  return rho;
}

using StepRecorder = std::function<void(int step, const WalkerState&)>;

/// Applies `step` n_steps times, invoking the recorder at step 0, at every
/// multiple of record_every, and at the final step (once per step index).
/// Step errors are reported with the step index attached.
inline WalkerState evolve(WalkerState state, const TransitionSet& ts, const StepPolicy& policy,
                          int n_steps, int record_every, const StepRecorder& recorder) {
  if (n_steps < 0) throw std::invalid_argument("evolve: n_steps must be >= 0");
  if (record_every < 1) throw std::invalid_argument("evolve: record_every must be >= 1");
  if (recorder) recorder(0, state);
  for (int s = 1; s <= n_steps; ++s) {
    const std::string at = "step " + std::to_string(s) + ": ";
    try {
      state = step(state, ts, policy);
    } catch (const LeakExceeded& e) {
      throw LeakExceeded(at + e.what());
    } catch (const PositivityBreach& e) {
      throw PositivityBreach(at + e.what());
    } catch (const TraceDrift& e) {
      throw TraceDrift(at + e.what());
    }
    if (recorder && (s % record_every == 0 || s == n_steps)) recorder(s, state);
  }
  return state;
}

}  // namespace oqwalk
