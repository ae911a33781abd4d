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

#include "benderskit/level_set.hpp"

#include "benderskit/benders_standard.hpp"

#include <cmath>

namespace benderskit {

namespace detail {
RmpLayout append_rmp(const StructuredProblem& problem,
                     const std::vector<CutPool>& pools, LinearProgram& lp,
                     bool beta_in_objective, double cut_relax);
}  // namespace detail

void StabilisationConfig::validate_or_throw() const {
  if (!(gamma0 > 0.0 && gamma0 < 1.0)) {
    throw EngineError("stabilisation: gamma0 must lie in (0,1)");
  }
  if (!(p_low > 0.0 && p_low < p_high && p_high < 1.0)) {
    throw EngineError("stabilisation: need 0 < p_low < p_high < 1");
  }
  if (!(omega > 0.0 && omega < 1.0)) {
    throw EngineError("stabilisation: omega must lie in (0,1)");
  }
  if (!(gamma_min < gamma_max) || gamma0 < gamma_min || gamma0 > gamma_max) {
    throw EngineError("stabilisation: gamma0 outside the clamp interval");
  }
}

double compute_target(double L_star, double U_star_prev, double gamma) {
  if (U_star_prev < L_star) {
    throw EngineError("compute_target: bounds crossed (U < L)");
  }
  if (std::isinf(U_star_prev)) return kInf;
  if (gamma == 0.0) return L_star;
  if (gamma == 1.0) return U_star_prev;
  return L_star + gamma * (U_star_prev - L_star);
}

namespace {

// Level value of a master point against the pools' lower envelopes (the
// cheapest admissible beta for that x).
double level_value_at(const StructuredProblem& problem,
                      const std::vector<CutPool>& pools,
                      const Eigen::VectorXd& x) {
  double value = problem.master_objective(x);
  for (const auto& node : problem.nodes) {
    value += node.pi * pools[node.id].evaluate(node_view(x, node));
  }
  return value;
}

bool master_feasible(const MasterBlock& master, const Eigen::VectorXd& x,
                     double tol) {
  for (int j = 0; j < master.x_dim; ++j) {
    if (x[j] < master.x_lower[j] - tol || x[j] > master.x_upper[j] + tol) {
      return false;
    }
  }
  Eigen::VectorXd row_val = Eigen::VectorXd::Zero(master.num_rows());
  for (const auto& t : master.con_triplets) {
    row_val[t.row()] += t.value() * x[t.col()];
  }
  for (int r = 0; r < master.num_rows(); ++r) {
    const double scale = tol * (1.0 + std::abs(master.con_rhs[r]));
    switch (master.con_senses[r]) {
      case RowSense::LessEqual:
        if (row_val[r] > master.con_rhs[r] + scale) return false;
        break;
      case RowSense::GreaterEqual:
        if (row_val[r] < master.con_rhs[r] - scale) return false;
        break;
      case RowSense::Equal:
        if (std::abs(row_val[r] - master.con_rhs[r]) > scale) return false;
        break;
    }
  }
  return true;
}

}  // namespace

LmpResult solve_lmp(const StructuredProblem& problem,
                    const std::vector<CutPool>& pools,
                    const Eigen::VectorXd& x_ref, double target,
                    const Eigen::VectorXd& x_rmp, const LpBackend& backend,
                    const SolverOptions& opts) {
  // Zero-distance shortcut: when the reference point already satisfies the
  // level constraint it is the exact projection, no QP needed.
  if (master_feasible(problem.master, x_ref, 1e-12)) {
    const double ref_value = level_value_at(problem, pools, x_ref);
    if (!std::isfinite(target) || ref_value <= target) {
      LmpResult res;
      res.x = x_ref;
      res.level_value = ref_value;
      return res;
    }
  }

  const int x_dim = problem.master.x_dim;
  LinearProgram lp;
  detail::RmpLayout layout;
  SolveOutcome out;
  const double relax_steps[] = {0.0, 1e-9, 1e-7, 1e-5};
  for (double relax : relax_steps) {
    lp = LinearProgram();
    layout = detail::append_rmp(problem, pools, lp, false, relax);
    // Distance objective over the master variables only.
    for (int j = 0; j < x_dim; ++j) {
      lp.set_cost(layout.x_base + j, -2.0 * x_ref[j]);
      lp.add_quadratic_diagonal(layout.x_base + j, 2.0);
    }
    lp.set_objective_constant(x_ref.squaredNorm());
    if (std::isfinite(target)) {
      std::vector<std::pair<int, double>> level;
      for (int j = 0; j < x_dim; ++j) {
        if (problem.master.f_coeffs[j] != 0.0) {
          level.push_back({layout.x_base + j, problem.master.f_coeffs[j]});
        }
      }
      for (const auto& node : problem.nodes) {
        level.push_back(
            {layout.beta_base + node.id, node.pi * layout.beta_scale});
      }
      lp.add_row(level, RowSense::LessEqual, target);
    }
    out = backend.solve(lp, opts);
    if (out.status != SolveStatus::NumericalFailure) break;
  }
  const int x_base = layout.x_base;
  const int beta_base = layout.beta_base;
  LmpResult res;
  res.solve_time_s = out.wall_time_s;
  if (!out.optimal()) {
    res.x = x_rmp;
    res.used_fallback = true;
    // The RMP optimiser satisfies the level constraint with T >= L* by
    // construction; recompute its level value for the audit trail.
    double value = problem.master_objective(x_rmp);
    for (const auto& node : problem.nodes) {
      value += node.pi * pools[node.id].evaluate(node_view(x_rmp, node));
    }
    res.level_value = value;
    res.level_violation =
        std::isfinite(target) ? std::max(0.0, value - target) : 0.0;
    return res;
  }
  res.x = out.primal.segment(x_base, x_dim);
  double value = problem.master_objective(res.x);
  for (const auto& node : problem.nodes) {
    value += node.pi * layout.beta_scale * out.primal[beta_base + node.id];
  }
  res.level_value = value;
  res.level_violation =
      std::isfinite(target) ? std::max(0.0, value - target) : 0.0;
  return res;
}

GammaUpdate update_gamma(const TargetState& state, double L_lbo_current,
                         const StabilisationConfig& cfg) {
  GammaUpdate upd;
  upd.gamma = state.gamma;
  if (std::isnan(state.L_lbo_prev) || std::isnan(state.target_prev)) {
    return upd;
  }
  const double actual = state.L_lbo_prev - L_lbo_current;
  const double predicted = state.L_lbo_prev - state.target_prev;
  if (actual > 0.0 && predicted > 0.0) {
    const double r = actual / predicted;
    upd.ratio = r;
    if (r <= cfg.p_low) {
      upd.gamma = 1.0 - cfg.omega * (1.0 - state.gamma);
    } else if (r >= cfg.p_high) {
      upd.gamma = cfg.omega * state.gamma;
    }
  }
  // Inexact information (nonpositive improvement) leaves gamma unchanged.
  upd.gamma = std::clamp(upd.gamma, cfg.gamma_min, cfg.gamma_max);
  return upd;
}

}  // namespace benderskit
