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

#include "benderskit/adaptive_benders.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "parallel.hpp"

namespace benderskit {

int select_subproblem(const std::vector<OracleAnswer>& answers,
                      const std::vector<double>& probabilities) {
  if (answers.empty()) throw EngineError("select_subproblem: no nodes");
  int best = 0;
  double best_gap = probabilities[0] * answers[0].gap();
  for (int i = 1; i < static_cast<int>(answers.size()); ++i) {
    const double gap = probabilities[i] * answers[i].gap();
    if (gap > best_gap) {
      best = i;
      best_gap = gap;
    }
  }
  return best;
}

bool inner_stop(double U_ubo, double L_lbo, double U_star_prev,
                double L_star_prev, long n, int node_count) {
  if (U_ubo - L_lbo <= U_star_prev - L_star_prev) return true;
  if (n > node_count) return true;
  return L_lbo >= U_star_prev;
}

namespace {

// Per-node oracle answers memoised on (store version, query point); the
// refresh after every insert only pays for nodes whose key actually changed.
class OracleSweep {
 public:
  OracleSweep(const StructuredProblem& problem, const LpBackend& backend,
              const SolverOptions& opts, int threads)
      : problem_(problem),
        backend_(backend),
        opts_(opts),
        threads_(threads),
        batch_(backend, opts),
        cache_(problem.num_nodes()) {}

  const std::vector<OracleAnswer>& refresh(
      const SolvedPointStore& store, const std::vector<Eigen::VectorXd>& views) {
    answers_.resize(problem_.num_nodes());
    auto query_one = [&](int i, bool warm) {
      auto& slot = cache_[i];
      if (slot.version == store.version() && slot.x.size() == views[i].size() &&
          slot.x == views[i]) {
        answers_[i] = slot.answer;
        return;
      }
      answers_[i] =
          warm ? batch_.query(store, views[i], problem_.nodes[i].cost)
               : query_oracles(store, views[i], problem_.nodes[i].cost,
                               backend_, opts_);
      slot.version = store.version();
      slot.x = views[i];
      slot.answer = answers_[i];
    };
    if (threads_ <= 1) {
      for (int i = 0; i < problem_.num_nodes(); ++i) query_one(i, true);
    } else {
      parallel_for(problem_.num_nodes(), threads_,
                   [&](int i) { query_one(i, false); });
    }
    return answers_;
  }

 private:
  struct Slot {
    long version = -1;
    Eigen::VectorXd x;
    OracleAnswer answer;
  };
  const StructuredProblem& problem_;
  const LpBackend& backend_;
  const SolverOptions& opts_;
  int threads_;
  OracleBatch batch_;
  std::vector<Slot> cache_;
  std::vector<OracleAnswer> answers_;
};

}  // namespace

RunResult run_adaptive(const StructuredProblem& problem,
                       const EngineConfig& cfg, const LpBackend& backend) {
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&t0] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  };

  ValidationReport rep = validate(problem);
  if (!rep.ok()) {
    throw EngineError("run_adaptive: invalid problem:\n" + rep.str());
  }
  if (!(cfg.eps_percent > 0.0)) {
    throw EngineError("run_adaptive: eps must be positive");
  }
  const bool stabilised = cfg.stabilisation.has_value();
  if (stabilised) cfg.stabilisation->validate_or_throw();

  const int n_nodes = problem.num_nodes();
  RunResult res;
  res.engine = stabilised ? "stabilised" : "adaptive";

  std::vector<double> pis(n_nodes);
  for (int i = 0; i < n_nodes; ++i) pis[i] = problem.nodes[i].pi;

  try {
    SolvedPointStore store = seed(problem, backend, cfg.solver);
    res.exact_evaluations = 1;

    std::vector<CutPool> pools(n_nodes, CutPool(0.0));
    SubproblemEvaluator evaluator(problem.sub, backend, cfg.solver);
    OracleSweep sweep(problem, backend, cfg.solver, cfg.threads);

    double& lower = res.lower_bound;
    double& upper = res.upper_bound;
    lower = -kInf;
    upper = kInf;
    double lower_prev_iter = -kInf, upper_prev_iter = kInf;
    Eigen::VectorXd x_ref, x_prev;
    TargetState ts;
    if (stabilised) ts.gamma = cfg.stabilisation->gamma0;

    for (int j = 1; j <= cfg.iteration_limit; ++j) {
      RmpSolution rmp = solve_rmp(problem, pools, backend, cfg.solver);
      res.time_backend_s += rmp.solve_time_s;
      lower = std::max(lower, rmp.lower_bound);
      res.iterations = j;

      if (relative_gap(lower, upper) <= cfg.eps_percent / 100.0) {
        // Bounds already meet; close out without another oracle sweep.
        IterationRecord rec;
        rec.iter = j;
        rec.n_exact_cum = res.exact_evaluations;
        rec.L_star = lower;
        rec.U_star = upper;
        rec.gamma = stabilised ? ts.gamma
                               : std::numeric_limits<double>::quiet_NaN();
        rec.wall_time_s = elapsed();
        res.records.push_back(rec);
        if (cfg.on_iteration) cfg.on_iteration(rec);
        res.status = RunStatus::Converged;
        break;
      }
      if (j == 1) x_ref = rmp.x;

      double target = std::numeric_limits<double>::quiet_NaN();
      const double gamma_used = ts.gamma;
      Eigen::VectorXd x_cur;
      if (stabilised) {
        target = compute_target(lower, upper, ts.gamma);
        LmpResult lmp = solve_lmp(problem, pools, x_ref, target, rmp.x,
                                  backend, cfg.solver);
        res.time_backend_s += lmp.solve_time_s;
        if (lmp.used_fallback) {
          res.warnings.push_back("iteration " + std::to_string(j) +
                                 ": LMP solve rejected by backend; "
                                 "continuing from the RMP point");
        }
        res.level_max_violation =
            std::max(res.level_max_violation, lmp.level_violation);
        x_cur = lmp.x;
        ts.target_prev = target;
      } else {
        x_cur = rmp.x;
      }

      std::vector<Eigen::VectorXd> views(n_nodes);
      for (int i = 0; i < n_nodes; ++i) {
        views[i] = node_view(x_cur, problem.nodes[i]);
      }
      std::vector<OracleAnswer> answers = sweep.refresh(store, views);

      double L_lbo = 0.0, U_ubo = 0.0;
      long n_inner = 0;
      for (;;) {
        ++n_inner;
        const int k = select_subproblem(answers, pis);
        if (std::getenv("BENDERSKIT_DEBUG_ENGINE")) {
          std::fprintf(stderr,
                       "    it %d pass %ld pick node %d gap %.4e dup %ld "
                       "xmove %.3e\n",
                       j, n_inner, k, answers[k].gap(),
                       store.duplicates_skipped(),
                       x_prev.size() ? (x_cur - x_prev).norm() : -1.0);
        }
        auto ev = evaluator.evaluate(problem.nodes[k].cost, views[k]);
        res.time_backend_s += ev.solve_time_s;
        ++res.exact_evaluations;
        const bool inserted = store.insert(SolvedPoint{
            views[k], problem.nodes[k].cost, ev.theta, ev.lam, ev.phi});
        if (!inserted && std::getenv("BENDERSKIT_DEBUG_ENGINE")) {
          auto fresh = query_oracles(store, views[k], problem.nodes[k].cost,
                                     backend, cfg.solver);
          std::fprintf(stderr,
                       "    DUP node %d exact %.6e memo [%.6e, %.6e] fresh "
                       "[%.6e, %.6e]\n",
                       k, ev.theta, answers[k].theta_lo, answers[k].theta_hi,
                       fresh.theta_lo, fresh.theta_hi);
        }
        answers = sweep.refresh(store, views);
        const double fx = problem.master_objective(x_cur);
        L_lbo = fx;
        U_ubo = fx;
        for (int i = 0; i < n_nodes; ++i) {
          pools[i].add(
              Cut{views[i], answers[i].theta_lo, answers[i].lam_lo});
          L_lbo += pis[i] * answers[i].theta_lo;
          U_ubo += pis[i] * answers[i].theta_hi;
        }
        if (!stabilised) break;  // baseline: one exact solve per iteration
        if (inner_stop(U_ubo, L_lbo, upper_prev_iter, lower_prev_iter,
                       n_inner, n_nodes)) {
          break;
        }
      }

      if (U_ubo < upper) {
        upper = U_ubo;
        res.incumbent = x_cur;
      }
      if (x_prev.size() > 0) res.path_length += (x_cur - x_prev).norm();
      x_prev = x_cur;
      x_ref = x_cur;

      GammaUpdate upd;
      if (stabilised) {
        upd = update_gamma(ts, L_lbo, *cfg.stabilisation);
        if (cfg.stabilisation->dynamic) ts.gamma = upd.gamma;
        ts.L_lbo_prev = L_lbo;
      }

      IterationRecord rec;
      rec.iter = j;
      rec.n_exact_cum = res.exact_evaluations;
      rec.L_star = lower;
      rec.U_star = upper;
      rec.L_lbo = L_lbo;
      rec.U_ubo = U_ubo;
      rec.gamma = stabilised ? gamma_used
                             : std::numeric_limits<double>::quiet_NaN();
      rec.target = target;
      rec.ratio = upd.ratio;
      rec.wall_time_s = elapsed();
      res.records.push_back(rec);
      if (cfg.on_iteration) cfg.on_iteration(rec);

      lower_prev_iter = lower;
      upper_prev_iter = upper;

      if (relative_gap(lower, upper) <= cfg.eps_percent / 100.0) {
        res.status = RunStatus::Converged;
        break;
      }
      if (j == cfg.iteration_limit) res.status = RunStatus::IterationLimit;
    }
  } catch (const std::runtime_error& e) {
    res.status = RunStatus::SolverFailure;
    res.failure_detail =
        "iteration " + std::to_string(res.iterations) + ": " + e.what();
  }
  res.time_total_s = elapsed();
  return res;
}

}  // namespace benderskit
