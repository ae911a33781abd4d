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

#include "benderskit/benders_standard.hpp"

#include <chrono>

#include <cstdio>
#include <cstdlib>

#include "benderskit/ipm.hpp"
#include "parallel.hpp"
#include "simplex.hpp"

namespace benderskit {

bool CutPool::add(Cut cut, double dup_tol) {
  // Duplicate test is relative: cut data spans many orders of magnitude and
  // repeated anchors otherwise pile up as numerically identical rows.
  for (const auto& c : cuts_) {
    if (c.x_anchor.size() != cut.x_anchor.size()) continue;
    const double ttol = dup_tol * (1.0 + std::abs(c.theta));
    const double atol =
        dup_tol * (1.0 + c.x_anchor.lpNorm<Eigen::Infinity>());
    const double ltol = dup_tol * (1.0 + c.lam.lpNorm<Eigen::Infinity>());
    if (std::abs(c.theta - cut.theta) <= ttol &&
        (c.x_anchor - cut.x_anchor).lpNorm<Eigen::Infinity>() <= atol &&
        (c.lam - cut.lam).lpNorm<Eigen::Infinity>() <= ltol) {
      return false;
    }
  }
  cuts_.push_back(std::move(cut));
  return true;
}

double CutPool::evaluate(const Eigen::VectorXd& x_i) const {
  double best = floor_;
  for (const auto& c : cuts_) best = std::max(best, c.value_at(x_i));
  return best;
}

const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Converged:
      return "converged";
    case RunStatus::IterationLimit:
      return "iteration_limit";
    case RunStatus::SolverFailure:
      return "solver_failure";
  }
  return "?";
}

namespace detail {

// Epigraph values run many orders of magnitude above the master variables;
// the builder knows their natural size (the largest cut value), so the beta
// columns are scaled here where that knowledge lives.
double epigraph_scale(const std::vector<CutPool>& pools) {
  double scale = 1.0;
  for (const auto& pool : pools) {
    scale = std::max(scale, std::abs(pool.floor()));
    for (const auto& cut : pool.cuts()) {
      scale = std::max(scale, std::abs(cut.theta));
    }
  }
  return scale;
}

// Appends master variables/rows, one (scaled) beta per node, and every cut
// row. Returns {x_base, beta_base}; true beta = beta_scale * column value.
// A positive cut_relax loosens every cut row by that relative amount, which
// keeps the optimum a valid lower bound while breaking degenerate ties.
RmpLayout append_rmp(const StructuredProblem& problem,
                     const std::vector<CutPool>& pools, LinearProgram& lp,
                     bool beta_in_objective, double cut_relax) {
  RmpLayout layout;
  layout.x_base = problem.master.append_to(lp);
  layout.beta_base = lp.num_vars();
  layout.beta_scale = epigraph_scale(pools);
  for (const auto& node : problem.nodes) {
    lp.add_variable(pools[node.id].floor() / layout.beta_scale, kInf,
                    beta_in_objective ? node.pi * layout.beta_scale : 0.0,
                    "beta" + std::to_string(node.id));
  }
  for (const auto& node : problem.nodes) {
    for (const auto& cut : pools[node.id].cuts()) {
      // beta_scale * beta_i - lam' S_i x >= theta - lam' x_anchor
      Eigen::VectorXd coeff = node.selector.transpose() * cut.lam;
      std::vector<std::pair<int, double>> entries;
      entries.reserve(coeff.nonZeros() + 1);
      entries.push_back({layout.beta_base + node.id, layout.beta_scale});
      for (int j = 0; j < coeff.size(); ++j) {
        if (coeff[j] != 0.0) {
          entries.push_back({layout.x_base + j, -coeff[j]});
        }
      }
      const double rhs = cut.theta - cut.lam.dot(cut.x_anchor);
      lp.add_row(entries, RowSense::GreaterEqual,
                 rhs - cut_relax * (1.0 + std::abs(rhs)));
    }
  }
  return layout;
}

}  // namespace detail

RmpSolution solve_rmp(const StructuredProblem& problem,
                      const std::vector<CutPool>& pools,
                      const LpBackend& backend, const SolverOptions& opts) {
  LinearProgram lp;
  detail::RmpLayout layout;
  SolveOutcome out;
  // Escalation ladder: exact cuts first; on numerical breakdown retry with
  // the cuts loosened by a growing (still tiny) relative slack. Relaxing
  // cuts can only lower the optimum, so the bound stays valid.
  const double relax_steps[] = {0.0, 1e-9, 1e-7, 1e-5};
  for (double relax : relax_steps) {
    lp = LinearProgram();
    layout = detail::append_rmp(problem, pools, lp, true, relax);
    out = backend.solve(lp, opts);
    if (out.status != SolveStatus::NumericalFailure) break;
    if (std::getenv("BENDERSKIT_DEBUG_SIMPLEX")) {
      std::fprintf(stderr, "rmp retry at relax %.1e failed: %s\n", relax,
                   out.message.c_str());
    }
  }
  const int x_base = layout.x_base;
  const int beta_base = layout.beta_base;
  if (out.status == SolveStatus::Infeasible) {
    throw EngineError("RMP infeasible: master feasible set is empty");
  }
  if (!out.optimal()) {
    if (std::getenv("BENDERSKIT_DUMP_FAILED_LP")) {
      write_lp_file(lp, std::getenv("BENDERSKIT_DUMP_FAILED_LP"));
    }
    throw EngineError(std::string("RMP solve failed: ") +
                      to_string(out.status) + " (" + out.message + ")");
  }
  RmpSolution sol;
  sol.x = out.primal.segment(x_base, problem.master.x_dim);
  sol.beta =
      layout.beta_scale * out.primal.segment(beta_base, problem.num_nodes());
  sol.lower_bound = out.objective;
  sol.solve_time_s = out.wall_time_s;
  return sol;
}

ExactEvaluation evaluate_exact(const SubproblemTemplate& sub,
                               const Eigen::VectorXd& cost,
                               const Eigen::VectorXd& x_i,
                               const LpBackend& backend,
                               const SolverOptions& opts) {
  if (x_i.size() != sub.x_dim()) {
    throw EngineError("evaluate_exact: x_i dimension mismatch");
  }
  if (cost.size() != sub.cost_dim()) {
    throw EngineError("evaluate_exact: cost dimension mismatch");
  }
  LinearProgram lp;
  const Eigen::VectorXd ycost = sub.C.transpose() * cost;
  for (int j = 0; j < sub.y_dim(); ++j) {
    lp.add_variable(sub.y_lower[j], sub.y_upper[j], ycost[j]);
  }
  const Eigen::VectorXd rhs = sub.B * x_i;
  std::vector<std::vector<std::pair<int, double>>> rows(sub.con_dim());
  for (int j = 0; j < sub.A.outerSize(); ++j) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(sub.A, j); it; ++it) {
      rows[it.row()].push_back({static_cast<int>(it.col()), it.value()});
    }
  }
  for (int r = 0; r < sub.con_dim(); ++r) {
    lp.add_row(rows[r], sub.sense(r), rhs[r]);
  }
  SolveOutcome out = backend.solve(lp, opts);
  if (!out.optimal()) {
    throw EngineError(
        std::string("subproblem solve failed (") + to_string(out.status) +
        "): subproblems must be feasible by construction; " + out.message);
  }
  ExactEvaluation ev;
  ev.phi = sub.C * out.primal;
  ev.theta = cost.dot(ev.phi);
  ev.lam = sub.B.transpose() * out.row_duals;
  ev.solve_time_s = out.wall_time_s;
  return ev;
}

namespace {

LinearProgram subproblem_lp(const SubproblemTemplate& sub,
                            const Eigen::VectorXd& cost,
                            const Eigen::VectorXd& x_i) {
  LinearProgram lp;
  const Eigen::VectorXd ycost = sub.C.transpose() * cost;
  for (int j = 0; j < sub.y_dim(); ++j) {
    lp.add_variable(sub.y_lower[j], sub.y_upper[j], ycost[j]);
  }
  const Eigen::VectorXd rhs = sub.B * x_i;
  std::vector<std::vector<std::pair<int, double>>> rows(sub.con_dim());
  for (int j = 0; j < sub.A.outerSize(); ++j) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(sub.A, j); it; ++it) {
      rows[it.row()].push_back({static_cast<int>(it.col()), it.value()});
    }
  }
  for (int r = 0; r < sub.con_dim(); ++r) {
    lp.add_row(rows[r], sub.sense(r), rhs[r]);
  }
  return lp;
}

}  // namespace

struct SubproblemEvaluator::Impl {
  const SubproblemTemplate& sub;
  const LpBackend& backend;
  SolverOptions opts;
  std::unique_ptr<PreparedSimplex> warm;
};

SubproblemEvaluator::SubproblemEvaluator(const SubproblemTemplate& sub,
                                         const LpBackend& backend,
                                         SolverOptions opts)
    : impl_(new Impl{sub, backend, std::move(opts), nullptr}) {
  LinearProgram lp = subproblem_lp(sub, Eigen::VectorXd::Zero(sub.cost_dim()),
                                   Eigen::VectorXd::Zero(sub.x_dim()));
  if (simplex_suitable(lp)) {
    impl_->warm = std::make_unique<PreparedSimplex>(lp);
  }
}

SubproblemEvaluator::~SubproblemEvaluator() = default;
SubproblemEvaluator::SubproblemEvaluator(SubproblemEvaluator&&) noexcept =
    default;

ExactEvaluation SubproblemEvaluator::evaluate(const Eigen::VectorXd& cost,
                                              const Eigen::VectorXd& x_i) {
  const auto& sub = impl_->sub;
  if (x_i.size() != sub.x_dim() || cost.size() != sub.cost_dim()) {
    throw EngineError("subproblem evaluation: dimension mismatch");
  }
  if (impl_->warm) {
    const Eigen::VectorXd rhs = sub.B * x_i;
    const Eigen::VectorXd ycost = sub.C.transpose() * cost;
    SolveOutcome out = impl_->warm->resolve(rhs, ycost, impl_->opts);
    if (out.optimal()) {
      ExactEvaluation ev;
      ev.phi = sub.C * out.primal;
      ev.theta = cost.dot(ev.phi);
      ev.lam = sub.B.transpose() * out.row_duals;
      ev.solve_time_s = out.wall_time_s;
      return ev;
    }
  }
  return evaluate_exact(sub, cost, x_i, impl_->backend, impl_->opts);
}

RunResult run_standard(const StructuredProblem& problem,
                       const StandardOptions& opts, const LpBackend& backend) {
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&t0] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  };

  const int n_nodes = problem.num_nodes();
  RunResult res;
  res.engine = "standard";
  ValidationReport rep = validate(problem);
  if (!rep.ok()) {
    throw EngineError("run_standard: invalid problem:\n" + rep.str());
  }
  if (!(opts.eps_percent > 0.0)) {
    throw EngineError("run_standard: eps must be positive");
  }

  std::vector<CutPool> pools(n_nodes, CutPool(0.0));
  SubproblemEvaluator evaluator(problem.sub, backend, opts.solver);
  double lower = -kInf;
  double upper = kInf;
  Eigen::VectorXd prev_x;

  try {
    for (int j = 1; j <= opts.iteration_limit; ++j) {
      RmpSolution rmp = solve_rmp(problem, pools, backend, opts.solver);
      res.time_backend_s += rmp.solve_time_s;
      lower = std::max(lower, rmp.lower_bound);

      std::vector<ExactEvaluation> evals(n_nodes);
      std::vector<Eigen::VectorXd> views(n_nodes);
      for (int i = 0; i < n_nodes; ++i) {
        views[i] = node_view(rmp.x, problem.nodes[i]);
      }
      if (opts.threads <= 1) {
        for (int i = 0; i < n_nodes; ++i) {
          evals[i] = evaluator.evaluate(problem.nodes[i].cost, views[i]);
        }
      } else {
        parallel_for(n_nodes, opts.threads, [&](int i) {
          evals[i] = evaluate_exact(problem.sub, problem.nodes[i].cost,
                                    views[i], backend, opts.solver);
        });
      }
      res.exact_evaluations += n_nodes;

      double expected = problem.master_objective(rmp.x);
      for (int i = 0; i < n_nodes; ++i) {
        expected += problem.nodes[i].pi * evals[i].theta;
        res.time_backend_s += evals[i].solve_time_s;
      }
      if (expected < upper) {
        upper = expected;
        res.incumbent = rmp.x;
      }
      for (int i = 0; i < n_nodes; ++i) {
        pools[i].add(Cut{views[i], evals[i].theta, evals[i].lam});
      }

      if (prev_x.size() > 0) res.path_length += (rmp.x - prev_x).norm();
      prev_x = rmp.x;

      IterationRecord rec;
      rec.iter = j;
      rec.n_exact_cum = res.exact_evaluations;
      rec.L_star = lower;
      rec.U_star = upper;
      rec.wall_time_s = elapsed();
      res.records.push_back(rec);
      if (opts.on_iteration) opts.on_iteration(rec);
      res.iterations = j;

      if (relative_gap(lower, upper) <= opts.eps_percent / 100.0) {
        res.status = RunStatus::Converged;
        break;
      }
      if (j == opts.iteration_limit) res.status = RunStatus::IterationLimit;
    }
  } catch (const EngineError& e) {
    res.status = RunStatus::SolverFailure;
    res.failure_detail =
        "iteration " + std::to_string(res.iterations + 1) + ": " + e.what();
  }
  res.lower_bound = lower;
  res.upper_bound = upper;
  res.time_total_s = elapsed();
  return res;
}

}  // namespace benderskit
