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
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "oqwalk/matrix.hpp"
#include "oqwalk/walk.hpp"

namespace oqwalk {

struct NonFiniteState : std::runtime_error {
  explicit NonFiniteState(double t)
      : std::runtime_error("integration produced a non-finite state at t = " +
                           std::to_string(t)),
        time(t) {}
  double time;
};

/// A linear matrix ODE flattened to a real vector: real and imaginary parts
/// interleaved per complex entry, so the one integrator serves walker states,
/// full density matrices, and scalar chains alike.
struct OdeProblem {
  std::vector<double> state;
  std::function<void(std::span<const double>, std::span<double>)> rhs;
  double t0 = 0.0;
  double t_end = 0.0;
  double dt_ode = 0.0;
  std::vector<double> sample_times;  // recorder fires at the nearest grid point
};

using OdeRecorder = std::function<void(double t, std::span<const double> y)>;

/// Classic fixed-step fourth-order Runge-Kutta. The final partial step is
/// shortened to land exactly on t_end. Throws NonFiniteState with the time of
/// blow-up if the state stops being finite.
inline std::vector<double> integrate(const OdeProblem& problem, const OdeRecorder& recorder = {}) {
  if (!(problem.dt_ode > 0.0)) throw std::invalid_argument("integrate: dt_ode must be > 0");
  if (problem.t_end < problem.t0) throw std::invalid_argument("integrate: t_end must be >= t0");
  const std::size_t n = problem.state.size();
  const double span = problem.t_end - problem.t0;
  const long n_steps =
      span == 0.0 ? 0 : std::max<long>(1, std::lround(std::ceil(span / problem.dt_ode - 1e-12)));

  const auto grid_time = [&](long i) {
    return i >= n_steps ? problem.t_end : problem.t0 + static_cast<double>(i) * problem.dt_ode;
  };
  std::multimap<long, double> samples;
  for (double s : problem.sample_times) {
    long idx = std::lround((s - problem.t0) / problem.dt_ode);
    idx = std::max(0L, std::min(idx, n_steps));
    samples.emplace(idx, s);
  }

  std::vector<double> y = problem.state;
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  const auto emit = [&](long i) {
    if (!recorder) return;
    auto [lo, hi] = samples.equal_range(i);
    for (auto it = lo; it != hi; ++it) recorder(grid_time(i), y);
  };
  const auto check_finite = [&](double t) {
    double s = 0.0;
    for (double v : y) s += v * v;
    if (!std::isfinite(s)) throw NonFiniteState(t);
  };

  emit(0);
  for (long i = 0; i < n_steps; ++i) {
    const double h = std::min(problem.dt_ode, problem.t_end - grid_time(i));
    problem.rhs(y, k1);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = y[j] + 0.5 * h * k1[j];
    problem.rhs(tmp, k2);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = y[j] + 0.5 * h * k2[j];
    problem.rhs(tmp, k3);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = y[j] + h * k3[j];
    problem.rhs(tmp, k4);
    for (std::size_t j = 0; j < n; ++j)
      y[j] += (h / 6.0) * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    check_finite(grid_time(i + 1));
    emit(i + 1);
  }
  return y;
}

/// Flattening helpers: std::complex<double> is layout-compatible with
/// double[2], so the conversions are plain copies.

inline std::vector<double> flatten(const WalkerState& state) {
  std::vector<double> out(2 * state.raw().size());
  for (std::size_t i = 0; i < state.raw().size(); ++i) {
    out[2 * i] = state.raw()[i].real();
    out[2 * i + 1] = state.raw()[i].imag();
  }
  return out;
}

inline WalkerState unflatten_walker(std::span<const double> flat, int k_max) {
  WalkerState state(k_max);
  if (flat.size() != 2 * state.raw().size())
    throw DimensionMismatch("unflatten_walker: size does not match k_max");
  for (std::size_t i = 0; i < state.raw().size(); ++i)
    state.raw()[i] = Complex(flat[2 * i], flat[2 * i + 1]);
  return state;
}

inline std::vector<double> flatten(const ComplexMatrix& m) {
  std::vector<double> out(2 * m.data().size());
  for (std::size_t i = 0; i < m.data().size(); ++i) {
    out[2 * i] = m.data()[i].real();
    out[2 * i + 1] = m.data()[i].imag();
  }
  return out;
}

inline ComplexMatrix unflatten_matrix(std::span<const double> flat, int dim) {
  ComplexMatrix m(dim);
  if (flat.size() != 2 * m.data().size())
    throw DimensionMismatch("unflatten_matrix: size does not match dim");
  for (std::size_t i = 0; i < m.data().size(); ++i)
    m.data()[i] = Complex(flat[2 * i], flat[2 * i + 1]);
  return m;
}

}  // namespace oqwalk
