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

#include <chrono>
#include <cmath>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "oqwalk/config.hpp"
#include "oqwalk/full_model.hpp"
#include "oqwalk/io.hpp"
#include "oqwalk/observables.hpp"
#include "oqwalk/ode.hpp"
#include "oqwalk/thermal_model.hpp"
#include "oqwalk/version.hpp"
#include "oqwalk/walk.hpp"

namespace oqwalk {

struct RunResult {
  ObservableRecord final_record;
  std::filesystem::path out_dir;
  std::vector<std::string> warnings;
};

namespace detail {

inline nlohmann::ordered_json manifest_base(const RunConfig& cfg, const std::string& command,
                                            const std::vector<std::string>& warnings) {
  nlohmann::ordered_json m;
  m["version"] = kVersion;
  m["command"] = command;
  m["g"] = cfg.g;
  m["delta"] = cfg.delta;
  m["gamma"] = cfg.gamma;
  m["n_th"] = cfg.n_th;
  m["dt"] = cfg.dt;
  m["k_max"] = cfg.k_max;
  m["n_steps"] = cfg.n_steps;
  m["record_every"] = cfg.effective_record_every();
  m["initial_site"] = cfg.initial_site;
  m["mode"] = to_string(cfg.mode);
  m["renormalize"] = cfg.effective_renormalize();
  m["centered"] = cfg.centered;
  std::string joined;
  for (const auto& w : warnings) {
    if (!joined.empty()) joined += "; ";
    joined += w;
  }
  m["warnings"] = joined;
  return m;
}

inline void finish_manifest(nlohmann::ordered_json& m, const ObservableRecord& final_record,
                            double wall_seconds, const std::filesystem::path& dir) {
  m["wall_seconds"] = wall_seconds;
  m["final_step"] = final_record.step;
  m["final_time"] = final_record.time;
  m["final_mu"] = final_record.mu;
  m["final_sigma2"] = final_record.sigma2;
  m["final_trace_pre_renorm"] = final_record.trace_pre_renorm;
  m["final_leak"] = final_record.leak;
  m["final_min_block_eig"] = final_record.min_block_eig;
  write_text_file(dir / "manifest.json", m.dump(2) + "\n");
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace detail

/// Discrete-time walk: evolves the CPTP map and writes distribution.csv,
/// summary.csv and manifest.json under cfg.out_dir.
inline RunResult run_walk(const RunConfig& cfg) {
  std::vector<std::string> warnings;
  cfg.validate(&warnings);
  const detail::Stopwatch watch;
  const ModelParams params = cfg.params();
  const TransitionSet ts = build_transition_set(params, cfg.mode);
  StepPolicy policy;
  policy.renormalize = cfg.effective_renormalize();
  WalkerState state = WalkerState::point_mass(cfg.k_max, cfg.initial_site,
                                              cfg.initial_qubit_matrix());

  std::string distribution{csv::kDistributionHeader};
  distribution += '\n';
  std::string summary{csv::kSummaryHeader};
  summary += '\n';
  ObservableRecord final_record;
  const double mu0 = cfg.initial_site;
  const auto recorder = [&](int step_index, const WalkerState& s) {
    const ObservableRecord rec = make_record(step_index, cfg.dt, s, cfg.centered, mu0);
    csv::append_distribution_rows(distribution, rec, s);
    csv::append_summary_row(summary, rec);
    final_record = rec;
  };
  evolve(std::move(state), ts, policy, cfg.n_steps, cfg.effective_record_every(), recorder);

  const std::filesystem::path dir = cfg.out_dir;
  write_text_file(dir / "distribution.csv", distribution);
  write_text_file(dir / "summary.csv", summary);
  auto manifest = detail::manifest_base(cfg, "walk", warnings);
  manifest["normalization_residual_coefficient"] = ts.residual_coefficient();
  // Late-time shape diagnostics: distance to the moment-matched Gaussian and
  // to the geometric stationary law of the trace marginal.
  double gaussian_rmse = std::numeric_limits<double>::quiet_NaN();
  if (final_record.sigma2 > 0.0) gaussian_rmse = gaussian_fit_residual(final_record.p).rmse;
  manifest["final_gaussian_rmse"] = gaussian_rmse;
  manifest["final_geometric_tv"] =
      tv_distance(final_record.p, geometric_stationary_law(cfg.n_th, cfg.k_max));
  detail::finish_manifest(manifest, final_record, watch.seconds(), dir);
  return {final_record, dir, warnings};
}

/// Continuous-time walk: integrates the block master equation over the same
/// horizon (t_end = n_steps dt, samples at the recorded steps) and writes the
/// same files. dt_ode defaults to dt/10.
inline RunResult run_ode(const RunConfig& cfg, double dt_ode = 0.0) {
  std::vector<std::string> warnings;
  cfg.validate(&warnings);
  const detail::Stopwatch watch;
  const ModelParams params = cfg.params();
  const WalkerState initial = WalkerState::point_mass(cfg.k_max, cfg.initial_site,
                                                      cfg.initial_qubit_matrix());

  OdeProblem problem;
  problem.state = flatten(initial);
  problem.t_end = cfg.n_steps * cfg.dt;
  problem.dt_ode = dt_ode > 0.0 ? dt_ode : cfg.dt / 10.0;
  const int record_every = cfg.effective_record_every();
  for (int s = 0; s <= cfg.n_steps; ++s)
    if (s == 0 || s % record_every == 0 || s == cfg.n_steps)
      problem.sample_times.push_back(s * cfg.dt);
  problem.rhs = [&params, &initial](std::span<const double> y, std::span<double> dy) {
    const WalkerState s = unflatten_walker(y, initial.k_max());
    const WalkerState d = ode_rhs(s, params);
    const std::vector<double> flat = flatten(d);
    std::copy(flat.begin(), flat.end(), dy.begin());
  };

  std::string distribution{csv::kDistributionHeader};
  distribution += '\n';
  std::string summary{csv::kSummaryHeader};
  summary += '\n';
  ObservableRecord final_record;
  const double mu0 = cfg.initial_site;
  const auto recorder = [&](double t, std::span<const double> y) {
    WalkerState s = unflatten_walker(y, initial.k_max());
    const double trace = s.total_trace();
    s.pre_renorm_trace_ = trace;
    s.cumulative_leak_ = std::max(0.0, 1.0 - trace);  // boundary outflow
    const int step_index = static_cast<int>(std::lround(t / cfg.dt));
    const ObservableRecord rec = make_record(step_index, cfg.dt, s, cfg.centered, mu0);
    csv::append_distribution_rows(distribution, rec, s);
    csv::append_summary_row(summary, rec);
    final_record = rec;
  };
  integrate(problem, recorder);

  const std::filesystem::path dir = cfg.out_dir;
  write_text_file(dir / "distribution.csv", distribution);
  write_text_file(dir / "summary.csv", summary);
  auto manifest = detail::manifest_base(cfg, "ode", warnings);
  manifest["dt_ode"] = problem.dt_ode;
  detail::finish_manifest(manifest, final_record, watch.seconds(), dir);
  return {final_record, dir, warnings};
}

/// Full atom-cavity reference run on the truncated composite space. The
/// distribution rows carry the block-diagonal part of the full density
/// matrix at each photon number.
inline RunResult run_reference(const RunConfig& cfg, int fock_cutoff = 40, double dt_ode = 0.0) {
  std::vector<std::string> warnings;
  cfg.validate(&warnings);
  if (fock_cutoff < 2) throw ParameterError("fock cutoff must be >= 2");
  if (cfg.initial_site > fock_cutoff)
    throw ParameterError("initial_site exceeds the Fock cutoff");
  const detail::Stopwatch watch;
  const ModelParams params = cfg.params();
  FullModel model(params, fock_cutoff);
  const FullState initial =
      FullState::product_state(fock_cutoff, cfg.initial_site, cfg.initial_qubit_matrix());

  OdeProblem problem;
  problem.state = flatten(initial.rho);
  problem.t_end = cfg.n_steps * cfg.dt;
  problem.dt_ode = dt_ode > 0.0 ? dt_ode : cfg.dt / 10.0;
  const int record_every = cfg.effective_record_every();
  for (int s = 0; s <= cfg.n_steps; ++s)
    if (s == 0 || s % record_every == 0 || s == cfg.n_steps)
      problem.sample_times.push_back(s * cfg.dt);
  const int dim = initial.rho.dim();
  ComplexMatrix rho_buf(dim), drho_buf(dim);
  problem.rhs = [&model, &rho_buf, &drho_buf, dim](std::span<const double> y,
                                                   std::span<double> dy) {
    rho_buf = unflatten_matrix(y, dim);
    model.rhs_into(rho_buf, drho_buf);
    const std::vector<double> flat = flatten(drho_buf);
    std::copy(flat.begin(), flat.end(), dy.begin());
  };

  std::string distribution{csv::kDistributionHeader};
  distribution += '\n';
  std::string summary{csv::kSummaryHeader};
  summary += '\n';
  ObservableRecord final_record;
  bool occupancy_warned = false;
  const double mu0 = cfg.initial_site;
  const auto recorder = [&](double t, std::span<const double> y) {
    const FullState fs(fock_cutoff, unflatten_matrix(y, dim));
    // Block-diagonal part as a walker state for the shared record format.
    WalkerState s(fock_cutoff);
    const int n = fock_cutoff + 1;
    for (int k = 0; k <= fock_cutoff; ++k) {
      ComplexMatrix b(2);
      b(0, 0) = fs.rho(k, k);
      b(0, 1) = fs.rho(k, n + k);
      b(1, 0) = fs.rho(n + k, k);
      b(1, 1) = fs.rho(n + k, n + k);
      s.set_block(k, b);
    }
    const double trace = s.total_trace();
    s.pre_renorm_trace_ = trace;
    s.cumulative_leak_ = std::max(0.0, 1.0 - trace);
    const int step_index = static_cast<int>(std::lround(t / cfg.dt));
    const ObservableRecord rec = make_record(step_index, cfg.dt, s, cfg.centered, mu0);
    double high = 0.0;
    for (int k = fock_cutoff / 2 + 1; k <= fock_cutoff; ++k) high += rec.p[k];
    if (high > 1e-3 && !occupancy_warned) {
      occupancy_warned = true;
    }
    csv::append_distribution_rows(distribution, rec, s);
    csv::append_summary_row(summary, rec);
    final_record = rec;
  };
  integrate(problem, recorder);
  if (occupancy_warned)
    warnings.push_back("occupancy above n_max/2 detected; cutoff artifacts likely");

  const std::filesystem::path dir = cfg.out_dir;
  write_text_file(dir / "distribution.csv", distribution);
  write_text_file(dir / "summary.csv", summary);
  auto manifest = detail::manifest_base(cfg, "reference", warnings);
  manifest["fock_cutoff"] = fock_cutoff;
  manifest["dt_ode"] = problem.dt_ode;
  detail::finish_manifest(manifest, final_record, watch.seconds(), dir);
  return {final_record, dir, warnings};
}

namespace detail {

inline std::string nth_dir_name(double n_th) {
  std::string s = "nth_" + csv::field(n_th);
  for (char& c : s)
    if (c == '.') c = 'p';
  return s;
}

}  // namespace detail

/// One walk per n_th value, each in its own subdirectory, plus sweep.csv with
/// the speed and spread observables at the configured step count.
inline std::vector<RunResult> run_sweep(const RunConfig& cfg, const std::vector<double>& nth_list) {
  if (nth_list.empty()) throw ParameterError("sweep: n_th list must not be empty");
  std::vector<RunResult> results;
  std::string sweep{csv::kSweepHeader};
  sweep += '\n';
  const std::filesystem::path dir = cfg.out_dir;
  for (double n_th : nth_list) {
    RunConfig point = cfg;
    point.n_th = n_th;
    point.out_dir = (dir / detail::nth_dir_name(n_th)).string();
    results.push_back(run_walk(point));
    csv::append_sweep_row(sweep, n_th, results.back().final_record);
  }
  write_text_file(dir / "sweep.csv", sweep);
  return results;
}

struct ValidateReport {
  bool passed = true;
  std::vector<std::string> lines;

  void check(bool ok, const std::string& what) {
    lines.push_back(std::string(ok ? "[PASS] " : "[FAIL] ") + what);
    passed = passed && ok;
  }
  void info(const std::string& what) { lines.push_back("       " + what); }
};

/// Probability-conservation and map-construction checks on the configured
/// parameters: per-node normalization residuals with their second-order
/// scaling, the exactness of the completed set, one-step diagnostics, and the
/// blockwise-vs-dilated equivalence on a small sub-lattice.
inline ValidateReport run_validate(const RunConfig& cfg) {
  std::vector<std::string> warnings;
  cfg.validate(&warnings);
  ValidateReport report;
  for (const auto& w : warnings) report.info("warning: " + w);
  const ModelParams params = cfg.params();

  // Paper-mode residuals at dt and dt/2.
  const TransitionSet paper_set = build_transition_set(params, OperatorMode::Paper);
  ModelParams half = params;
  half.dt = 0.5 * params.dt;
  const TransitionSet half_set = build_transition_set(half, OperatorMode::Paper);
  double r1 = 0.0, r2 = 0.0;
  for (double r : verify_normalization(paper_set)) r1 = std::max(r1, r);
  for (double r : verify_normalization(half_set)) r2 = std::max(r2, r);
  report.info("max per-node normalization residual (paper mode, dt): " + csv::field(r1));
  report.info("max per-node normalization residual (paper mode, dt/2): " + csv::field(r2));
  report.info("residual coefficient C = residual/dt^2: " + csv::field(r1 / (params.dt * params.dt)));
  const double ratio = r2 / r1;
  report.check(ratio > 0.2 && ratio < 0.3,
               "residual(dt/2)/residual(dt) = " + csv::field(ratio) + " within (0.2, 0.3)");

  // Completed-mode exactness.
  const TransitionSet completed_set = build_transition_set(params, OperatorMode::Completed);
  double rc = 0.0;
  for (double r : verify_normalization(completed_set)) rc = std::max(rc, r);
  report.check(rc <= 1e-12, "completed-mode residual " + csv::field(rc) + " <= 1e-12");

  // One-step diagnostics from the configured initial state.
  WalkerState state = WalkerState::point_mass(cfg.k_max, cfg.initial_site,
                                              cfg.initial_qubit_matrix());
  StepPolicy policy;
  policy.renormalize = cfg.effective_renormalize();
  const WalkerState next = step(state, cfg.mode == OperatorMode::Paper ? paper_set : completed_set,
                                policy);
  report.check(std::abs(next.pre_renorm_trace() - 1.0) <= std::max(1e-12, 2.0 * r1),
               "one-step trace defect " + csv::field(std::abs(next.pre_renorm_trace() - 1.0)) +
                   " within the mode bound");
  report.check(next.max_hermiticity_defect() <= 1e-12,
               "one-step Hermiticity defect " + csv::field(next.max_hermiticity_defect()) +
                   " <= 1e-12");
  report.check(next.min_block_eigenvalue() >= -1e-10,
               "one-step min block eigenvalue " + csv::field(next.min_block_eigenvalue()) +
                   " >= -1e-10");

  // Blockwise vs dilated equivalence on a 3-site sub-lattice.
  ModelParams small = params;
  small.k_max = 2;
  const TransitionSet small_set = build_transition_set(small, cfg.mode);
  WalkerState small_state = WalkerState::point_mass(2, 1, cfg.initial_qubit_matrix());
  StepPolicy raw_policy;
  raw_policy.renormalize = false;
  raw_policy.leak_tolerance = 1.0;
  const WalkerState small_next = step(small_state, small_set, raw_policy);
  const ComplexMatrix dilated =
      apply_kraus(dilate_global(small_set), embed_block_diagonal(small_state));
  double max_diff = 0.0;
  const ComplexMatrix blockwise = embed_block_diagonal(small_next);
  for (int r = 0; r < dilated.dim(); ++r)
    for (int c = 0; c < dilated.dim(); ++c)
      max_diff = std::max(max_diff, std::abs(dilated(r, c) - blockwise(r, c)));
  report.check(max_diff <= 1e-12,
               "blockwise vs dilated one-step difference " + csv::field(max_diff) + " <= 1e-12");
  return report;
}

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfigParse = 2,
  kExitValidation = 3,
  kExitRuntimeBreach = 4,
  kExitValidateFailed = 5,
};

}  // namespace oqwalk
