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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "oqwalk/observables.hpp"
#include "oqwalk/walk.hpp"

namespace oqwalk {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace csv {

/// All floating-point CSV fields carry 17 significant digits, enough to
/// round-trip any binary64 value exactly.
inline std::string field(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string field(int v) { return std::to_string(v); }

constexpr const char* kDistributionHeader = "step,time,k,p,rho_ee,rho_gg,re_rho_eg,im_rho_eg";
constexpr const char* kSummaryHeader =
    "step,time,trace_pre_renorm,mu,sigma2,v_mu_step,v_mu_time,v_sigma2_step,v_sigma2_time,"
    "leak,min_block_eig";
constexpr const char* kSweepHeader =
    "n_th,steps,time,mu,sigma2,v_mu_step,v_mu_time,v_sigma2_step,v_sigma2_time";

/// One distribution.csv row per lattice site of a recorded step.
inline void append_distribution_rows(std::string& out, const ObservableRecord& rec,
                                     const WalkerState& state) {
  for (int k = 0; k <= state.k_max(); ++k) {
    const Complex* b = state.block_ptr(k);
    out += field(rec.step);
    out += ',';
    out += field(rec.time);
    out += ',';
    out += field(k);
    out += ',';
    out += field(rec.p[k]);
    out += ',';
    out += field(b[0].real());
    out += ',';
    out += field(b[3].real());
    out += ',';
    out += field(b[1].real());
    out += ',';
    out += field(b[1].imag());
    out += '\n';
  }
}

inline void append_summary_row(std::string& out, const ObservableRecord& rec) {
  out += field(rec.step);
  out += ',';
  out += field(rec.time);
  out += ',';
  out += field(rec.trace_pre_renorm);
  out += ',';
  out += field(rec.mu);
  out += ',';
  out += field(rec.sigma2);
  out += ',';
  out += field(rec.v_mu_step);
  out += ',';
  out += field(rec.v_mu_time);
  out += ',';
  out += field(rec.v_sigma2_step);
  out += ',';
  out += field(rec.v_sigma2_time);
  out += ',';
  out += field(rec.leak);
  out += ',';
  out += field(rec.min_block_eig);
  out += '\n';
}

inline void append_sweep_row(std::string& out, double n_th, const ObservableRecord& rec) {
  out += field(n_th);
  out += ',';
  out += field(rec.step);
  out += ',';
  out += field(rec.time);
  out += ',';
  out += field(rec.mu);
  out += ',';
  out += field(rec.sigma2);
  out += ',';
  out += field(rec.v_mu_step);
  out += ',';
  out += field(rec.v_mu_time);
  out += ',';
  out += field(rec.v_sigma2_step);
  out += ',';
  out += field(rec.v_sigma2_time);
  out += '\n';
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

inline Table read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  Table table;
  std::string line;
  if (std::getline(in, line)) table.header = split_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    table.rows.push_back(split_line(line));
  }
  return table;
}

}  // namespace csv

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (!path.parent_path().empty()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("failed while writing " + path.string());
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace oqwalk
