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

#ifndef BENDERSKIT_BENDERS_STANDARD_HPP_
#define BENDERSKIT_BENDERS_STANDARD_HPP_

#include <functional>
#include <memory>
#include <vector>

#include "benderskit/cuts.hpp"
#include "benderskit/lp_backend.hpp"
#include "benderskit/run_result.hpp"
#include "benderskit/structured_problem.hpp"

namespace benderskit {

namespace detail {
struct RmpLayout {
  int x_base = 0;
  int beta_base = 0;
  double beta_scale = 1.0;
};
}  // namespace detail

struct RmpSolution {
  Eigen::VectorXd x;
  Eigen::VectorXd beta;  // one epigraph value per node
  double lower_bound = 0.0;
  double solve_time_s = 0.0;
};

/// Solves the relaxed master min f'x + sum_i pi_i beta_i subject to the
/// feasible set and every cut in every pool. The optimum is a valid global
/// lower bound. Master infeasibility is a hard error.
RmpSolution solve_rmp(const StructuredProblem& problem,
                      const std::vector<CutPool>& pools,
                      const LpBackend& backend,
                      const SolverOptions& opts = {});

struct ExactEvaluation {
  double theta = 0.0;      // g(x_i, c_i)
  Eigen::VectorXd lam;     // subgradient w.r.t. x_i
  Eigen::VectorXd phi;     // C y*, so theta = c_i' phi
  double solve_time_s = 0.0;
};

/// Solves subproblem i exactly at x_i with cost vector `cost`. Infeasibility
/// means the instance violates the always-feasible contract and throws.
ExactEvaluation evaluate_exact(const SubproblemTemplate& sub,
                               const Eigen::VectorXd& cost,
                               const Eigen::VectorXd& x_i,
                               const LpBackend& backend,
                               const SolverOptions& opts = {});

/// Stateful exact-subproblem solver: all nodes share one coefficient matrix,
/// so consecutive solves warm-start from the previous optimal basis. Not
/// thread-safe; engines fall back to evaluate_exact when running parallel
/// sweeps or when the model is too large for the vertex solver.
class SubproblemEvaluator {
 public:
  SubproblemEvaluator(const SubproblemTemplate& sub, const LpBackend& backend,
                      SolverOptions opts = {});
  ~SubproblemEvaluator();
  SubproblemEvaluator(SubproblemEvaluator&&) noexcept;

  ExactEvaluation evaluate(const Eigen::VectorXd& cost,
                           const Eigen::VectorXd& x_i);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct StandardOptions {
  double eps_percent = 0.1;  // relative convergence tolerance, in percent
  int iteration_limit = 5000;
  int threads = 1;
  SolverOptions solver;
  // Called after each iteration with the freshly appended record.
  std::function<void(const IterationRecord&)> on_iteration;
};

/// Algorithm: solve RMP, solve every subproblem exactly, add one exact cut
/// per node, repeat until (U*-L*)/max(|U*|,1) <= eps.
RunResult run_standard(const StructuredProblem& problem,
                       const StandardOptions& opts, const LpBackend& backend);

}  // namespace benderskit

#endif  // BENDERSKIT_BENDERS_STANDARD_HPP_
