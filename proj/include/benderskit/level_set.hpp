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

#ifndef BENDERSKIT_LEVEL_SET_HPP_
#define BENDERSKIT_LEVEL_SET_HPP_

#include <vector>

#include "benderskit/cuts.hpp"
#include "benderskit/lp_backend.hpp"
#include "benderskit/run_result.hpp"
#include "benderskit/structured_problem.hpp"

namespace benderskit {

/// Level-set stabilisation parameters. The update constants default to the
/// tested grid (omega 0.5, thresholds 0.1/0.9); gamma is clamped away from
/// the degenerate endpoints 0 and 1.
struct StabilisationConfig {
  double gamma0 = 0.025;
  bool dynamic = false;
  double omega = 0.5;
  double p_low = 0.1;
  double p_high = 0.9;
  double gamma_min = 1e-4;
  double gamma_max = 0.999;

  void validate_or_throw() const;
};

struct TargetState {
  double gamma = 0.025;
  double L_lbo_prev = std::numeric_limits<double>::quiet_NaN();
  double target_prev = std::numeric_limits<double>::quiet_NaN();
};

/// T = L* + gamma (U*_{j-1} - L*). Exact at the endpoints gamma = 0 and 1.
double compute_target(double L_star, double U_star_prev, double gamma);

struct LmpResult {
  Eigen::VectorXd x;
  bool used_fallback = false;   // backend refused the QP; x is the RMP point
  double level_value = 0.0;     // f(x) + sum_i pi_i beta_i at the solution
  double level_violation = 0.0; // max(0, level_value - target)
  double solve_time_s = 0.0;
};

/// Projects the reference point onto the level set {f + sum pi beta <= T}
/// intersected with the cut-feasible region: minimises ||x - x_ref||^2 over
/// the master variables. Infeasibility cannot happen for T >= L*; if the
/// backend reports it anyway the RMP point is returned with a fallback flag.
LmpResult solve_lmp(const StructuredProblem& problem,
                    const std::vector<CutPool>& pools,
                    const Eigen::VectorXd& x_ref, double target,
                    const Eigen::VectorXd& x_rmp, const LpBackend& backend,
                    const SolverOptions& opts = {});

struct GammaUpdate {
  double gamma = 0.0;
  double ratio = std::numeric_limits<double>::quiet_NaN();
};

/// Trust-region style update driven by the ratio r of actual to predicted
/// improvement of the lower-oracle value. On inexact information (either
/// improvement nonpositive) gamma is left unchanged. The result is clamped.
GammaUpdate update_gamma(const TargetState& state, double L_lbo_current,
                         const StabilisationConfig& cfg);

}  // namespace benderskit

#endif  // BENDERSKIT_LEVEL_SET_HPP_
