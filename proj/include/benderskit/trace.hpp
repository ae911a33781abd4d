// Copyright 2026 The benderskit Authors
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

#ifndef BENDERSKIT_TRACE_HPP_
#define BENDERSKIT_TRACE_HPP_

#include <string>
#include <vector>

#include "benderskit/run_result.hpp"

namespace benderskit {

// trace.csv column order (fixed):
//   iter,n_exact_cum,L_star,U_star,L_lbo,U_ubo,gamma,target,wall_time_s
// Bounds are best-so-far; inapplicable fields print as nan. Setting the
// BENDERSKIT_ZERO_TIMES environment variable zeroes the wall-time column so
// repeated runs produce bitwise-identical artifacts.
void write_trace_csv(const RunResult& result, const std::string& path);
std::vector<IterationRecord> read_trace_csv(const std::string& path);

// summary.json: engine, tolerance, status, counts, bounds, timing split,
// the incumbent vector, and the level-feasibility audit value.
void write_summary_json(const RunResult& result, double eps_percent,
                        const std::string& path);

struct VerifyReport {
  bool ok = true;
  std::vector<std::string> issues;
};

// Audits one run directory (trace.csv + summary.json): bound monotonicity,
// gap recomputation, and the stabilised level-feasibility budget.
VerifyReport verify_run_directory(const std::string& dir);

}  // namespace benderskit

#endif  // BENDERSKIT_TRACE_HPP_
