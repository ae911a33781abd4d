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

#ifndef BENDERSKIT_SRC_SIMPLEX_HPP_
#define BENDERSKIT_SRC_SIMPLEX_HPP_

#include <memory>

#include "benderskit/lp.hpp"

namespace benderskit {

// Dense bounded-variable revised simplex. Returns vertex primal/dual
// solutions, which keeps Benders cuts anchored at basic duals instead of
// face-centred interior ones. Intended for the small, highly degenerate
// master/oracle LPs; larger models go to the interior-point solver.
SolveOutcome solve_simplex(const LinearProgram& lp, const SolverOptions& opts);

// Rough admission test (memory for the explicit basis inverse).
bool simplex_suitable(const LinearProgram& lp);

// Re-solvable simplex for a fixed constraint matrix: successive calls with
// new rhs / costs warm-start from the previous optimal basis, which is how
// the engines keep thousands of structurally identical subproblem solves
// cheap while still getting vertex duals.
class PreparedSimplex {
 public:
  explicit PreparedSimplex(const LinearProgram& lp);
  ~PreparedSimplex();
  PreparedSimplex(PreparedSimplex&&) noexcept;
  PreparedSimplex& operator=(PreparedSimplex&&) noexcept;

  // Updates rhs/cost in user units and re-solves from the retained basis.
  SolveOutcome resolve(const Eigen::VectorXd& rhs, const Eigen::VectorXd& cost,
                       const SolverOptions& opts);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace benderskit

#endif  // BENDERSKIT_SRC_SIMPLEX_HPP_
