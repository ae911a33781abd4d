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

#ifndef BENDERSKIT_IPM_HPP_
#define BENDERSKIT_IPM_HPP_

#include "benderskit/lp.hpp"

namespace benderskit {

// Primal-dual interior-point solver (Mehrotra predictor-corrector) for LPs
// and convex QPs with variable bounds. Sparse; the Newton step solves a
// regularised symmetric quasidefinite augmented system with Eigen's LDLT.
//
// Infeasible / unbounded models are classified through auxiliary phase-1
// solves (primal elastic feasibility, then dual feasibility), so the status
// is certificate-backed rather than a divergence guess.
SolveOutcome solve_ipm(const LinearProgram& lp, const SolverOptions& opts);

}  // namespace benderskit

#endif  // BENDERSKIT_IPM_HPP_
