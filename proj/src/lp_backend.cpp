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

#include "benderskit/lp_backend.hpp"

#include <cstdlib>

#include "benderskit/ipm.hpp"
#include "../src/simplex.hpp"

namespace benderskit {
namespace {

// Built-in solver: the dense simplex carries the small, degenerate master
// and oracle LPs (and returns vertex duals for the cuts); the interior-point
// method carries quadratic models and anything too large for an explicit
// basis inverse. Each side backstops the other.
class BuiltinBackend final : public LpBackend {
 public:
  SolveOutcome solve(const LinearProgram& lp,
                     const SolverOptions& opts) const override {
    const bool can_simplex = !lp.has_quadratic() && lp.num_rows() > 0 &&
                             simplex_suitable(lp);
    bool try_simplex_first = can_simplex;
    if (opts.method == SolverOptions::Method::InteriorPoint) {
      try_simplex_first = false;
    }
    if (try_simplex_first) {
      SolveOutcome out = solve_simplex(lp, opts);
      if (out.status != SolveStatus::NumericalFailure) return out;
      SolveOutcome rescue = solve_ipm(lp, opts);
      if (rescue.status != SolveStatus::NumericalFailure) return rescue;
      return out;
    }
    SolveOutcome out = solve_ipm(lp, opts);
    if (out.status == SolveStatus::NumericalFailure) {
      if (can_simplex) {
        SolveOutcome rescue = solve_simplex(lp, opts);
        if (rescue.status != SolveStatus::NumericalFailure) return rescue;
      } else if (lp.has_quadratic() && opts.tolerance < 1e-6) {
        // QP retry rule: one relaxed-tolerance attempt before escalating.
        SolverOptions relaxed = opts;
        relaxed.tolerance = 1e-6;
        SolveOutcome retry = solve_ipm(lp, relaxed);
        if (retry.optimal()) {
          retry.message += " (relaxed-tolerance retry)";
          return retry;
        }
      }
    }
    return out;
  }

  std::string name() const override { return "builtin"; }
};

}  // namespace

std::unique_ptr<LpBackend> make_backend(const std::string& name) {
  std::string which = name;
  if (which.empty()) {
    const char* env = std::getenv("BENDERSKIT_BACKEND");
    which = env ? env : "builtin";
  }
  if (which == "builtin" || which == "ipm") {
    return std::make_unique<BuiltinBackend>();
  }
  throw SolverError("unknown LP backend: " + which);
}

}  // namespace benderskit
