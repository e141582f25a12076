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
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "oqwalk/matrix.hpp"
#include "oqwalk/thermal_model.hpp"

namespace oqwalk {

struct ConfigParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class InitialQubit { Ground, Excited, Explicit };

/// One run of the toolkit: physical parameters plus orchestration knobs,
/// parsed from a flat key = value file.
struct RunConfig {
  double g = 0.0;
  double delta = 0.0;
  double gamma = 0.0;
  double n_th = 0.0;
  double dt = 0.0;
  int k_max = 200;
  int n_steps = 10000;
  int record_every = 0;  // 0 means the default max(1, n_steps/10)
  int initial_site = 0;
  InitialQubit initial_qubit = InitialQubit::Ground;
  // Explicit qubit block, used when initial_qubit == Explicit:
  // diag_e, diag_g, re_offdiag, im_offdiag.
  std::array<double, 4> qubit_entries{0.0, 1.0, 0.0, 0.0};
  OperatorMode mode = OperatorMode::Paper;
  std::optional<bool> renormalize;  // default follows the mode
  bool centered = false;            // CLI flag, not a config key
  std::string out_dir = "out";

  ModelParams params() const { return ModelParams{g, delta, gamma, n_th, dt, k_max}; }

  int effective_record_every() const {
    return record_every > 0 ? record_every : std::max(1, n_steps / 10);
  }

  /// Renormalization defaults on for the first-order paper set and off for
  /// the exactly trace-preserving completed set.
  bool effective_renormalize() const {
    return renormalize.value_or(mode == OperatorMode::Paper);
  }

  ComplexMatrix initial_qubit_matrix() const {
    ComplexMatrix q(2);
    switch (initial_qubit) {
      case InitialQubit::Ground:
        q(1, 1) = 1.0;
        break;
      case InitialQubit::Excited:
        q(0, 0) = 1.0;
        break;
      case InitialQubit::Explicit:
        q(0, 0) = qubit_entries[0];
        q(1, 1) = qubit_entries[1];
        q(0, 1) = Complex(qubit_entries[2], -qubit_entries[3]);
        q(1, 0) = Complex(qubit_entries[2], qubit_entries[3]);
        break;
    }
    return q;
  }

  /// Full validation; throws ParameterError naming the violated invariant.
  void validate(std::vector<std::string>* warnings = nullptr) const {
    params().validate(warnings);
    if (n_steps < 0) throw ParameterError("n_steps must be >= 0");
    if (record_every < 0) throw ParameterError("record_every must be >= 1 when given");
    if (initial_site < 0 || initial_site > k_max)
      throw ParameterError("initial_site " + std::to_string(initial_site) +
                           " outside [0, k_max = " + std::to_string(k_max) + "]");
    const ComplexMatrix q = initial_qubit_matrix();
    if (std::abs(q.trace().real() - 1.0) > 1e-9 || std::abs(q.trace().imag()) > 1e-9)
      throw ParameterError("initial qubit block must have trace 1");
    const auto spectrum = hermitian_eigenvalues_2x2(q, 1e-9);
    if (spectrum.eigenvalues.front() < -1e-9)
      throw ParameterError("initial qubit block must be positive semidefinite");
    if (out_dir.empty()) throw ParameterError("out_dir must not be empty");
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline double parse_double(const std::string& value, int line, const std::string& key) {
  double out = 0.0;
  const char* first = value.data();
  const char* last = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last)
    throw ConfigParseError("line " + std::to_string(line) + ": invalid number for '" + key +
                           "': " + value);
  return out;
}

inline int parse_int(const std::string& value, int line, const std::string& key) {
  int out = 0;
  const char* first = value.data();
  const char* last = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last)
    throw ConfigParseError("line " + std::to_string(line) + ": invalid integer for '" + key +
                           "': " + value);
  return out;
}

inline bool parse_bool(const std::string& value, int line, const std::string& key) {
  if (value == "true") return true;
  if (value == "false") return false;
  throw ConfigParseError("line " + std::to_string(line) + ": invalid boolean for '" + key +
                         "': " + value + " (expected true|false)");
}

inline std::vector<std::string> split_fields(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

/// Parses the flat key = value configuration format. Empty lines and lines
/// starting with '#' are skipped; unknown or repeated keys are errors.
inline RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::vector<std::string> seen;
  bool have_g = false, have_delta = false, have_gamma = false, have_nth = false,
       have_dt = false, have_site = false;

  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string stripped = detail::trim(raw);
    if (stripped.empty() || stripped[0] == '#') continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigParseError("line " + std::to_string(line) + ": expected key = value");
    const std::string key = detail::trim(stripped.substr(0, eq));
    const std::string value = detail::trim(stripped.substr(eq + 1));
    if (key.empty())
      throw ConfigParseError("line " + std::to_string(line) + ": empty key");
    if (std::find(seen.begin(), seen.end(), key) != seen.end())
      throw ConfigParseError("line " + std::to_string(line) + ": repeated key '" + key + "'");
    seen.push_back(key);

    if (key == "g") {
      cfg.g = detail::parse_double(value, line, key);
      have_g = true;
    } else if (key == "delta") {
      cfg.delta = detail::parse_double(value, line, key);
      have_delta = true;
    } else if (key == "gamma") {
      cfg.gamma = detail::parse_double(value, line, key);
      have_gamma = true;
    } else if (key == "n_th") {
      cfg.n_th = detail::parse_double(value, line, key);
      have_nth = true;
    } else if (key == "dt") {
      cfg.dt = detail::parse_double(value, line, key);
      have_dt = true;
    } else if (key == "k_max") {
      cfg.k_max = detail::parse_int(value, line, key);
    } else if (key == "n_steps") {
      cfg.n_steps = detail::parse_int(value, line, key);
    } else if (key == "record_every") {
      cfg.record_every = detail::parse_int(value, line, key);
    } else if (key == "initial_site") {
      cfg.initial_site = detail::parse_int(value, line, key);
      have_site = true;
    } else if (key == "initial_qubit") {
      if (value == "ground") {
        cfg.initial_qubit = InitialQubit::Ground;
      } else if (value == "excited") {
        cfg.initial_qubit = InitialQubit::Excited;
      } else {
        const auto fields = detail::split_fields(value);
        if (fields.size() != 4)
          throw ConfigParseError("line " + std::to_string(line) +
                                 ": initial_qubit expects ground|excited|4 reals "
                                 "(diag_e diag_g re_offdiag im_offdiag)");
        cfg.initial_qubit = InitialQubit::Explicit;
        for (int i = 0; i < 4; ++i)
          cfg.qubit_entries[i] = detail::parse_double(fields[i], line, key);
      }
    } else if (key == "mode") {
      try {
        cfg.mode = parse_operator_mode(value);
      } catch (const ParameterError& e) {
        throw ConfigParseError("line " + std::to_string(line) + ": " + e.what());
      }
    } else if (key == "renormalize") {
      cfg.renormalize = detail::parse_bool(value, line, key);
    } else if (key == "out_dir") {
      cfg.out_dir = value;
    } else {
      throw ConfigParseError("line " + std::to_string(line) + ": unknown key '" + key + "'");
    }
  }

  std::string missing;
  if (!have_g) missing = "g";
  else if (!have_delta) missing = "delta";
  else if (!have_gamma) missing = "gamma";
  else if (!have_nth) missing = "n_th";
  else if (!have_dt) missing = "dt";
  else if (!have_site) missing = "initial_site";
  if (!missing.empty()) throw ConfigParseError("missing required key '" + missing + "'");
  return cfg;
}

/// Serializes every key, including resolved defaults, in the parseable format.
inline std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream out;
  out << "g = " << detail::format_double(cfg.g) << '\n';
  out << "delta = " << detail::format_double(cfg.delta) << '\n';
  out << "gamma = " << detail::format_double(cfg.gamma) << '\n';
  out << "n_th = " << detail::format_double(cfg.n_th) << '\n';
  out << "dt = " << detail::format_double(cfg.dt) << '\n';
  out << "k_max = " << cfg.k_max << '\n';
  out << "n_steps = " << cfg.n_steps << '\n';
  out << "record_every = " << cfg.effective_record_every() << '\n';
  out << "initial_site = " << cfg.initial_site << '\n';
  switch (cfg.initial_qubit) {
    case InitialQubit::Ground:
      out << "initial_qubit = ground\n";
      break;
    case InitialQubit::Excited:
      out << "initial_qubit = excited\n";
      break;
    case InitialQubit::Explicit:
      out << "initial_qubit = " << detail::format_double(cfg.qubit_entries[0]) << ' '
          << detail::format_double(cfg.qubit_entries[1]) << ' '
          << detail::format_double(cfg.qubit_entries[2]) << ' '
          << detail::format_double(cfg.qubit_entries[3]) << '\n';
      break;
  }
  out << "mode = " << to_string(cfg.mode) << '\n';
  out << "renormalize = " << (cfg.effective_renormalize() ? "true" : "false") << '\n';
  out << "out_dir = " << cfg.out_dir << '\n';
  return out.str();
}

}  // namespace oqwalk
