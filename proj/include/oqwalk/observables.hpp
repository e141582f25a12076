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
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "oqwalk/ode.hpp"
#include "oqwalk/thermal_model.hpp"
#include "oqwalk/walk.hpp"

namespace oqwalk {

struct DistributionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Everything measured at one recorded step. The speed observables are kept
/// in both the per-step and the per-unit-time denominators; at step 0 they
/// are NaN since mu(t)/t is undefined there.
struct ObservableRecord {
  int step = 0;
  double time = 0.0;
  std::vector<double> p;
  double mu = 0.0;
  double sigma2 = 0.0;
  double v_mu_step = 0.0;
  double v_mu_time = 0.0;
  double v_sigma2_step = 0.0;
  double v_sigma2_time = 0.0;
  double trace_pre_renorm = 1.0;
  double leak = 0.0;
  double min_block_eig = 0.0;
};

/// Occupation distribution P(k) = tr rho_k.
inline std::vector<double> occupation_distribution(const WalkerState& state) {
  std::vector<double> p(state.num_sites());
  for (int k = 0; k <= state.k_max(); ++k) {
    const Complex* b = state.block_ptr(k);
    p[k] = b[0].real() + b[3].real();
  }
  return p;
}

/// mu = sum k p_k and sigma^2 = sum (k - mu)^2 p_k of a normalized
/// distribution.
inline std::pair<double, double> mean_and_variance(const std::vector<double>& p) {
  double total = 0.0;
  for (double v : p) total += v;
  if (std::abs(total - 1.0) > 1e-6)
    throw DistributionError("mean_and_variance: distribution sums to " + std::to_string(total));
  double mu = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) mu += static_cast<double>(k) * p[k];
  double sigma2 = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double d = static_cast<double>(k) - mu;
    sigma2 += d * d * p[k];
  }
  return {mu, sigma2};
}

/// Total variation distance (1/2) sum |p_k - q_k|.
inline double tv_distance(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw DistributionError("tv_distance: support length mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) s += std::abs(p[k] - q[k]);
  return 0.5 * s;
}

/// Generator of the classical birth-death chain obeyed exactly by the trace
/// marginal of the block master equation:
///   dp_k/dt = gamma (n_th+1) eps^2 [(k+1) p_{k+1} - k p_k]
///           + gamma n_th eps^2 [k p_{k-1} - (k+1) p_k].
inline void birth_death_rhs(const ModelParams& p, std::span<const double> q,
                            std::span<double> dq) {
  const double e2 = p.epsilon() * p.epsilon();
  const double down = p.gamma * (p.n_th + 1.0) * e2;
  const double up = p.gamma * p.n_th * e2;
  const std::size_t n = q.size();
  for (std::size_t k = 0; k < n; ++k) {
    double d = -(down * static_cast<double>(k) + up * (static_cast<double>(k) + 1.0)) * q[k];
    if (k + 1 < n) d += down * (static_cast<double>(k) + 1.0) * q[k + 1];
    if (k >= 1) d += up * static_cast<double>(k) * q[k - 1];
    dq[k] = d;
  }
}

/// Integrates the scalar birth-death chain to t_end. Exact oracle for the
/// walker's position marginal.
inline std::vector<double> birth_death_oracle(const std::vector<double>& p0,
                                              const ModelParams& params, double t_end,
                                              double dt_ode = 0.0) {
  double total = 0.0;
  for (double v : p0) total += v;
  if (std::abs(total - 1.0) > 1e-6)
    throw DistributionError("birth_death_oracle: initial distribution not normalized");
  OdeProblem problem;
  problem.state = p0;
  problem.t_end = t_end;
  problem.dt_ode = dt_ode > 0.0 ? dt_ode : (params.dt > 0.0 ? params.dt / 10.0 : 1e-2);
  problem.rhs = [&params](std::span<const double> q, std::span<double> dq) {
    birth_death_rhs(params, q, dq);
  };
  return integrate(problem);
}

/// Geometric stationary law p_k ~ (n_th/(n_th+1))^k of the birth-death chain,
/// normalized over 0..k_max.
inline std::vector<double> geometric_stationary_law(double n_th, int k_max) {
  std::vector<double> p(k_max + 1);
  const double q = n_th / (n_th + 1.0);
  double total = 0.0;
  double w = 1.0;
  for (int k = 0; k <= k_max; ++k, w *= q) {
    p[k] = w;
    total += w;
  }
  for (double& v : p) v /= total;
  return p;
}

/// Closed-form first moment of the birth-death chain:
/// mu(t) = n_th + (mu0 - n_th) exp(-gamma eps^2 t).
inline double first_moment_law(const ModelParams& p, double mu0, double t) {
  const double rate = p.gamma * p.epsilon() * p.epsilon();
  return p.n_th + (mu0 - p.n_th) * std::exp(-rate * t);
}

struct GaussianFit {
  double mu = 0.0;
  double sigma2 = 0.0;
  double rmse = 0.0;
};

/// Moment-matched discretized Gaussian g_k ~ exp(-(k-mu)^2 / (2 sigma^2))
/// normalized over the support, and the root-mean-square of p - g.
inline GaussianFit gaussian_fit_residual(const std::vector<double>& p) {
  const auto [mu, sigma2] = mean_and_variance(p);
  if (!(sigma2 > 0.0))
    throw DistributionError("gaussian_fit_residual: degenerate (sigma^2 = 0) distribution");
  std::vector<double> g(p.size());
  double total = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double d = static_cast<double>(k) - mu;
    g[k] = std::exp(-d * d / (2.0 * sigma2));
    total += g[k];
  }
  double sq = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double d = p[k] - g[k] / total;
    sq += d * d;
  }
  return {mu, sigma2, std::sqrt(sq / static_cast<double>(p.size()))};
}

/// Builds the record for one step of a walk or one sample of the block ODE.
/// With `centered`, the speed observables use mu - mu0 in the numerator; the
/// recorded mu stays absolute.
inline ObservableRecord make_record(int step, double dt, const WalkerState& state,
                                    bool centered = false, double mu0 = 0.0) {
  ObservableRecord rec;
  rec.step = step;
  rec.time = step * dt;
  rec.p = occupation_distribution(state);
  double total = 0.0;
  for (double v : rec.p) total += v;
  std::vector<double> normalized = rec.p;
  if (total > 0.0)
    for (double& v : normalized) v /= total;
  const auto [mu, sigma2] = mean_and_variance(normalized);
  rec.mu = mu;
  rec.sigma2 = sigma2;
  const double mu_num = centered ? mu - mu0 : mu;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  rec.v_mu_step = step > 0 ? mu_num / step : nan;
  rec.v_mu_time = rec.time > 0.0 ? mu_num / rec.time : nan;
  rec.v_sigma2_step = step > 0 ? sigma2 / step : nan;
  rec.v_sigma2_time = rec.time > 0.0 ? sigma2 / rec.time : nan;
  rec.trace_pre_renorm = state.pre_renorm_trace();
  rec.leak = state.cumulative_leak();
  rec.min_block_eig = state.min_block_eigenvalue();
  return rec;
}

}  // namespace oqwalk
