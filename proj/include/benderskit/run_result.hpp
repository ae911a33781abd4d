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

#ifndef BENDERSKIT_RUN_RESULT_HPP_
#define BENDERSKIT_RUN_RESULT_HPP_

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace benderskit {

enum class RunStatus { Converged, IterationLimit, SolverFailure };
const char* to_string(RunStatus s);

// Relative optimality gap, as a fraction (not percent).
inline double relative_gap(double lower, double upper) {
  return (upper - lower) / std::max(std::abs(upper), 1.0);
}

/// One row of the per-iteration log. Bounds are best-so-far (valid global
/// bounds); oracle fields and stabilisation fields are NaN where the engine
/// has no such concept (standard Benders has no oracle bounds, unstabilised
/// runs have no target).
struct IterationRecord {
  int iter = 0;
  long n_exact_cum = 0;  // cumulative exact subproblem solves
  double L_star = -std::numeric_limits<double>::infinity();
  double U_star = std::numeric_limits<double>::infinity();
  double L_lbo = std::numeric_limits<double>::quiet_NaN();
  double U_ubo = std::numeric_limits<double>::quiet_NaN();
  double gamma = std::numeric_limits<double>::quiet_NaN();
  double target = std::numeric_limits<double>::quiet_NaN();
  double wall_time_s = 0.0;
  // Improvement ratio r of the dynamic controller; logged but not part of
  // the 9-column trace schema.
  double ratio = std::numeric_limits<double>::quiet_NaN();
};

struct RunResult {
  std::string engine;
  RunStatus status = RunStatus::SolverFailure;
  int iterations = 0;
  long exact_evaluations = 0;
  double lower_bound = -std::numeric_limits<double>::infinity();
  double upper_bound = std::numeric_limits<double>::infinity();
  Eigen::VectorXd incumbent;
  std::vector<IterationRecord> records;
  // Total trajectory length sum_j ||x_j - x_{j-1}|| over visited points.
  double path_length = 0.0;
  double time_total_s = 0.0;
  double time_backend_s = 0.0;
  // Largest observed violation of the level constraint f+sum(pi*beta) <= T.
  double level_max_violation = 0.0;
  std::vector<std::string> warnings;
  std::string failure_detail;

  double final_gap() const { return relative_gap(lower_bound, upper_bound); }
  bool converged() const { return status == RunStatus::Converged; }
};

class EngineError : public std::runtime_error {
 public:
  explicit EngineError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace benderskit

#endif  // BENDERSKIT_RUN_RESULT_HPP_
