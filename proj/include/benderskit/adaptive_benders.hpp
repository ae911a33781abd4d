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

#ifndef BENDERSKIT_ADAPTIVE_BENDERS_HPP_
#define BENDERSKIT_ADAPTIVE_BENDERS_HPP_

#include <functional>
#include <optional>
#include <vector>

#include "benderskit/adaptive_oracles.hpp"
#include "benderskit/benders_standard.hpp"
#include "benderskit/level_set.hpp"

namespace benderskit {

/// Configuration of the adaptive engine. Without a stabilisation block the
/// run is the unstabilised baseline: the level problem is skipped and the
/// inner loop is capped at one exact solve per iteration.
struct EngineConfig {
  double eps_percent = 0.1;
  std::optional<StabilisationConfig> stabilisation;
  int iteration_limit = 5000;
  int threads = 1;
  SolverOptions solver;
  std::function<void(const IterationRecord&)> on_iteration;
};

/// Largest probability-weighted oracle gap; ties break to the smallest id.
int select_subproblem(const std::vector<OracleAnswer>& answers,
                      const std::vector<double>& probabilities);

/// Inner-loop stop rule: current-point oracle gap no worse than the previous
/// global gap, or every node solved, or the point provably dominated.
bool inner_stop(double U_ubo, double L_lbo, double U_star_prev,
                double L_star_prev, long n, int node_count);

/// Benders with adaptive oracles, optionally stabilised by the level-set
/// projection: seed the store, then per iteration solve the RMP, move to the
/// level point, sweep both oracles over all nodes, and run the adaptive
/// inner loop of exact solves with largest-gap selection.
RunResult run_adaptive(const StructuredProblem& problem,
                       const EngineConfig& cfg, const LpBackend& backend);

}  // namespace benderskit

#endif  // BENDERSKIT_ADAPTIVE_BENDERS_HPP_
