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

#include "oqwalk/observables.hpp"

#include <cmath>

#include "gtest/gtest.h"
#include "oqwalk/ode.hpp"

using namespace oqwalk;

namespace {

ModelParams paper_params(double n_th, double dt = 0.02, int k_max = 200) {
  ModelParams p;
  p.g = 0.02;
  p.delta = 1.0;
  p.gamma = 0.2;
  p.n_th = n_th;
  p.dt = dt;
  p.k_max = k_max;
  return p;
}

ComplexMatrix ground_qubit() {
  ComplexMatrix q(2);
  q(1, 1) = 1.0;
  return q;
}

}  // namespace

TEST(OccupationDistribution, PointMassAndUniform) {
  WalkerState state = WalkerState::point_mass(40, 20, ground_qubit());
  const auto p = occupation_distribution(state);
  for (int k = 0; k <= 40; ++k) EXPECT_EQ(p[k], k == 20 ? 1.0 : 0.0);

  WalkerState two(1);
  two.set_block(0, 0.5 * ground_qubit());
  two.set_block(1, 0.5 * ground_qubit());
  const auto q = occupation_distribution(two);
  EXPECT_EQ(q[0], 0.5);
  EXPECT_EQ(q[1], 0.5);
}

TEST(OccupationDistribution, NormalizedAfterEvolution) {
  const ModelParams p = paper_params(1.0, 0.02, 60);
  const TransitionSet ts = build_transition_set(p, OperatorMode::Paper);
  WalkerState state = WalkerState::point_mass(60, 20, ground_qubit());
  state = evolve(state, ts, StepPolicy{}, 500, 100, nullptr);
  const auto dist = occupation_distribution(state);
  double total = 0.0;
  for (double v : dist) total += v;
  EXPECT_NEAR(total, 1.0, 1e-9);
}

TEST(MeanAndVariance, HandComputedCases) {
  std::vector<double> point(41, 0.0);
  point[20] = 1.0;
  auto [mu, s2] = mean_and_variance(point);
  EXPECT_EQ(mu, 20.0);
  EXPECT_EQ(s2, 0.0);

  std::vector<double> two(21, 0.0);
  two[10] = 0.5;
  two[20] = 0.5;
  std::tie(mu, s2) = mean_and_variance(two);
  EXPECT_NEAR(mu, 15.0, 1e-14);
  EXPECT_NEAR(s2, 25.0, 1e-13);
}

TEST(MeanAndVariance, BoseEinsteinMoments) {
  // Geometric law with n_th = 1: mu = 1, sigma^2 = 2.
  const auto p = geometric_stationary_law(1.0, 80);
  const auto [mu, s2] = mean_and_variance(p);
  EXPECT_NEAR(mu, 1.0, 1e-12);
  EXPECT_NEAR(s2, 2.0, 1e-12);
}

TEST(MeanAndVariance, RejectsUnnormalized) {
  EXPECT_THROW(mean_and_variance({0.5, 0.4}), DistributionError);
}

TEST(TvDistance, BasicCases) {
  EXPECT_EQ(tv_distance({0.5, 0.5}, {0.5, 0.5}), 0.0);
  EXPECT_EQ(tv_distance({1.0, 0.0}, {0.0, 1.0}), 1.0);
  EXPECT_NEAR(tv_distance({0.5, 0.5}, {1.0, 0.0}), 0.5, 1e-15);
  EXPECT_THROW(tv_distance({1.0}, {0.5, 0.5}), DistributionError);
}

TEST(BirthDeathOracle, GeometricLawIsStationary) {
  const ModelParams p = paper_params(1.0);
  const auto stationary = geometric_stationary_law(1.0, 200);
  std::vector<double> deriv(stationary.size());
  birth_death_rhs(p, stationary, deriv);
  double norm = 0.0;
  for (double v : deriv) norm += v * v;
  EXPECT_LE(std::sqrt(norm), 1e-12);
}

TEST(BirthDeathOracle, FirstMomentClosedForm) {
  // mu(t) = n_th + (mu0 - n_th) exp(-gamma eps^2 t); 18.847 for n_th = 5,
  // mu0 = 20, t = 1000 at the default coupling.
  const ModelParams p = paper_params(5.0);
  std::vector<double> p0(201, 0.0);
  p0[20] = 1.0;
  const auto final_dist = birth_death_oracle(p0, p, 1000.0, 0.05);
  const auto [mu, s2] = mean_and_variance(final_dist);
  const double expected = first_moment_law(p, 20.0, 1000.0);
  EXPECT_NEAR(expected, 18.846745195799535, 1e-12);  // 5 + 15 exp(-0.08)
  EXPECT_NEAR(mu, expected, 1e-8);
  EXPECT_GT(s2, 0.0);
}

TEST(BirthDeathOracle, FrozenWithoutDissipation) {
  ModelParams p = paper_params(1.0);
  p.gamma = 0.0;
  std::vector<double> p0(51, 0.0);
  p0[10] = 0.25;
  p0[11] = 0.75;
  const auto out = birth_death_oracle(p0, p, 50.0, 0.05);
  for (std::size_t k = 0; k < p0.size(); ++k) EXPECT_NEAR(out[k], p0[k], 1e-15);
}

TEST(BirthDeathOracle, RejectsUnnormalizedInitial) {
  EXPECT_THROW(birth_death_oracle({0.4, 0.4}, paper_params(1.0), 1.0), DistributionError);
}

TEST(GaussianFit, SelfFitIsTight) {
  std::vector<double> g(201);
  double total = 0.0;
  for (int k = 0; k <= 200; ++k) {
    g[k] = std::exp(-(k - 50.0) * (k - 50.0) / (2.0 * 25.0));
    total += g[k];
  }
  for (double& v : g) v /= total;
  const auto fit = gaussian_fit_residual(g);
  EXPECT_LE(fit.rmse, 1e-4);
  EXPECT_NEAR(fit.mu, 50.0, 1e-6);
}

TEST(GaussianFit, RejectsDegenerateDistribution) {
  std::vector<double> point(41, 0.0);
  point[20] = 1.0;
  EXPECT_THROW(gaussian_fit_residual(point), DistributionError);
}

TEST(ContinuousWalk, MarginalMatchesBirthDeathExactly) {
  // The position marginal of the block equation decouples exactly; with a
  // matched integrator grid the two distributions agree to rounding.
  const int k_max = 80;
  const ModelParams p = paper_params(1.0, 0.02, k_max);
  ComplexMatrix q(2);
  q(0, 0) = 0.4;
  q(1, 1) = 0.6;
  q(0, 1) = Complex(0.2, 0.1);
  q(1, 0) = Complex(0.2, -0.1);
  const WalkerState initial = WalkerState::point_mass(k_max, 20, q);

  OdeProblem problem;
  problem.state = flatten(initial);
  problem.t_end = 50.0;
  problem.dt_ode = 0.05;
  problem.rhs = [&p, k_max](std::span<const double> y, std::span<double> dy) {
    const std::vector<double> flat = flatten(ode_rhs(unflatten_walker(y, k_max), p));
    std::copy(flat.begin(), flat.end(), dy.begin());
  };
  const WalkerState final_state = unflatten_walker(integrate(problem), k_max);

  const auto oracle = birth_death_oracle(occupation_distribution(initial), p, 50.0, 0.05);
  EXPECT_LE(tv_distance(occupation_distribution(final_state), oracle), 1e-12);
}

TEST(MakeRecord, SpeedObservablesAreConsistent) {
  WalkerState state = WalkerState::point_mass(40, 20, ground_qubit());
  const ObservableRecord rec = make_record(500, 0.02, state);
  EXPECT_EQ(rec.step, 500);
  EXPECT_NEAR(rec.time, 10.0, 1e-12);
  EXPECT_DOUBLE_EQ(rec.v_mu_step * 500, rec.mu);
  EXPECT_DOUBLE_EQ(rec.v_mu_time * 10.0, rec.mu);
  EXPECT_DOUBLE_EQ(rec.v_sigma2_step * 500, rec.sigma2);

  const ObservableRecord at_zero = make_record(0, 0.02, state);
  EXPECT_TRUE(std::isnan(at_zero.v_mu_step));
  EXPECT_TRUE(std::isnan(at_zero.v_mu_time));

  const ObservableRecord centered = make_record(500, 0.02, state, true, 20.0);
  EXPECT_DOUBLE_EQ(centered.v_mu_step, 0.0);
  EXPECT_DOUBLE_EQ(centered.mu, 20.0);
}
