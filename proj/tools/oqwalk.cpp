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

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oqwalk/config.hpp"
#include "oqwalk/io.hpp"
#include "oqwalk/runner.hpp"
#include "oqwalk/version.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_override;
  std::string mode_override;
  bool centered = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "path to the run configuration file")
      ->required();
  cmd->add_option("--out", args.out_override, "output directory (overrides out_dir)");
  cmd->add_option("--mode", args.mode_override, "operator mode: paper|completed")
      ->check(CLI::IsMember({"paper", "completed"}));
  cmd->add_flag("--centered", args.centered,
                "subtract the initial mean in the speed observables");
}

oqwalk::RunConfig load_config(const CommonArgs& args) {
  oqwalk::RunConfig cfg = oqwalk::parse_config(oqwalk::read_text_file(args.config_path));
  if (!args.out_override.empty()) cfg.out_dir = args.out_override;
  if (!args.mode_override.empty()) cfg.mode = oqwalk::parse_operator_mode(args.mode_override);
  cfg.centered = args.centered;
  return cfg;
}

void print_result(const oqwalk::RunResult& result) {
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  const auto& rec = result.final_record;
  std::cout << "final step " << rec.step << " (t = " << rec.time << "): mu = " << rec.mu
            << ", sigma2 = " << rec.sigma2 << ", trace = " << rec.trace_pre_renorm
            << ", leak = " << rec.leak << '\n';
  std::cout << "wrote " << result.out_dir.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"open quantum walk simulation toolkit"};
  app.set_version_flag("--version", oqwalk::kVersion);
  app.require_subcommand(1);

  CommonArgs walk_args, ode_args, ref_args, sweep_args, validate_args;
  std::string nth_list_arg;
  int fock_cutoff = 40;

  CLI::App* walk = app.add_subcommand("walk", "discrete-time open quantum walk");
  add_common(walk, walk_args);
  CLI::App* ode = app.add_subcommand("ode", "continuous-time block master equation");
  add_common(ode, ode_args);
  CLI::App* reference =
      app.add_subcommand("reference", "full atom-cavity master equation oracle");
  add_common(reference, ref_args);
  reference->add_option("--fock-cutoff", fock_cutoff, "Fock cutoff of the composite space");
  CLI::App* sweep = app.add_subcommand("sweep", "walks over a list of n_th values");
  add_common(sweep, sweep_args);
  sweep->add_option("--nth", nth_list_arg, "comma-separated n_th values")->required();
  CLI::App* validate = app.add_subcommand("validate", "normalization and map checks");
  add_common(validate, validate_args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (walk->parsed()) {
      print_result(oqwalk::run_walk(load_config(walk_args)));
    } else if (ode->parsed()) {
      print_result(oqwalk::run_ode(load_config(ode_args)));
    } else if (reference->parsed()) {
      print_result(oqwalk::run_reference(load_config(ref_args), fock_cutoff));
    } else if (sweep->parsed()) {
      std::vector<double> nths;
      for (const std::string& field : oqwalk::detail::split_fields(nth_list_arg))
        nths.push_back(std::stod(field));
      const auto results = oqwalk::run_sweep(load_config(sweep_args), nths);
      for (const auto& r : results) print_result(r);
    } else if (validate->parsed()) {
      const auto report = oqwalk::run_validate(load_config(validate_args));
      for (const auto& line : report.lines) std::cout << line << '\n';
      if (!report.passed) {
        std::cerr << "validate: checks failed\n";
        return oqwalk::kExitValidateFailed;
      }
    }
  } catch (const oqwalk::ConfigParseError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return oqwalk::kExitConfigParse;
  } catch (const oqwalk::IoError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return oqwalk::kExitConfigParse;
  } catch (const oqwalk::ParameterError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return oqwalk::kExitValidation;
  } catch (const oqwalk::LeakExceeded& e) {
    std::cerr << "runtime breach: " << e.what() << '\n';
    return oqwalk::kExitRuntimeBreach;
  } catch (const oqwalk::PositivityBreach& e) {
    std::cerr << "runtime breach: " << e.what() << '\n';
    return oqwalk::kExitRuntimeBreach;
  } catch (const oqwalk::TraceDrift& e) {
    std::cerr << "runtime breach: " << e.what() << '\n';
    return oqwalk::kExitRuntimeBreach;
  } catch (const oqwalk::NonFiniteState& e) {
    std::cerr << "runtime breach: " << e.what() << '\n';
    return oqwalk::kExitRuntimeBreach;
  } catch (const oqwalk::CompletionFailed& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return oqwalk::kExitValidation;
  }
  return oqwalk::kExitOk;
}
