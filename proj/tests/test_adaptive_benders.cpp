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

#include <random>

#include "benderskit/adaptive_benders.hpp"
#include "doctest.h"
#include "testutil.hpp"

namespace bk = benderskit;
using bk::testutil::random_problem;

namespace {
bk::OracleAnswer answer(double lo, double hi) {
  bk::OracleAnswer a;
  a.theta_lo = lo;
  a.theta_hi = hi;
  return a;
}
}  // namespace

TEST_CASE("select_subproblem picks the largest weighted gap") {
  SUBCASE("plain gaps") {
    std::vector<bk::OracleAnswer> answers{answer(0.0, 5.0), answer(0.0, 3.0)};
    CHECK(bk::select_subproblem(answers, {1.0, 1.0}) == 0);
  }
  SUBCASE("all gaps zero ties to the smallest id") {
    std::vector<bk::OracleAnswer> answers{answer(1.0, 1.0), answer(2.0, 2.0)};
    CHECK(bk::select_subproblem(answers, {1.0, 1.0}) == 0);
  }
  SUBCASE("probability weighting flips the choice") {
    std::vector<bk::OracleAnswer> answers{answer(0.0, 4.0), answer(0.0, 4.0)};
    CHECK(bk::select_subproblem(answers, {0.1, 0.9}) == 1);
  }
}

TEST_CASE("inner_stop conditions") {
  // Oracle gap at the current point no worse than the previous global gap.
  CHECK(bk::inner_stop(/*U_ubo=*/14.0, /*L_lbo=*/10.0, /*U_prev=*/20.0,
                       /*L_prev=*/15.0, /*n=*/1, /*nodes=*/4));
  // All nodes solved.
  CHECK(bk::inner_stop(30.0, 10.0, 20.0, 15.0, /*n=*/5, /*nodes=*/4));
  // Point provably dominated by the incumbent.
  CHECK(bk::inner_stop(30.0, 21.0, 20.0, 15.0, /*n=*/1, /*nodes=*/4));
  // None of the three.
  CHECK_FALSE(bk::inner_stop(30.0, 10.0, 20.0, 15.0, /*n=*/2, /*nodes=*/4));
}

TEST_CASE("one-node instance: adaptive equals standard Benders") {
  std::mt19937 rng(90);
  auto p = random_problem(rng, 1);
  auto backend = bk::make_backend();

  bk::StandardOptions sopts;
  sopts.eps_percent = 0.05;
  auto std_run = bk::run_standard(p, sopts, *backend);
  REQUIRE(std_run.converged());

  bk::EngineConfig cfg;
  cfg.eps_percent = 0.05;
  auto ada_run = bk::run_adaptive(p, cfg, *backend);
  REQUIRE(ada_run.converged());

  // With a single subproblem the oracle is exact at every visited point, so
  // the two runs add identical cuts and follow the same trajectory.
  CHECK(ada_run.iterations == std_run.iterations);
  REQUIRE(ada_run.records.size() == std_run.records.size());
  for (std::size_t k = 0; k < std_run.records.size(); ++k) {
    CHECK(ada_run.records[k].L_star ==
          doctest::Approx(std_run.records[k].L_star).epsilon(1e-7));
    CHECK(ada_run.records[k].U_star ==
          doctest::Approx(std_run.records[k].U_star).epsilon(1e-7));
  }
  // The adaptive run pays one extra exact solve for the seed.
  CHECK(ada_run.exact_evaluations == std_run.exact_evaluations + 1);
}

TEST_CASE("adaptive engines converge to the monolithic optimum") {
  std::mt19937 rng(91);
  auto p = random_problem(rng, 4);
  auto backend = bk::make_backend();
  auto mono = backend->solve(bk::assemble_monolithic(p));
  REQUIRE(mono.optimal());
  const double tol = 1e-3 * (1.0 + std::abs(mono.objective));

  SUBCASE("unstabilised") {
    bk::EngineConfig cfg;
    cfg.eps_percent = 0.1;
    auto run = bk::run_adaptive(p, cfg, *backend);
    REQUIRE(run.converged());
    CHECK(run.lower_bound <= mono.objective + tol);
    CHECK(run.upper_bound >= mono.objective - tol);
    CHECK(std::abs(run.upper_bound - mono.objective) <=
          1e-3 * std::abs(mono.objective) + tol);
  }
  SUBCASE("stabilised with fixed gamma") {
    bk::EngineConfig cfg;
    cfg.eps_percent = 0.1;
    cfg.stabilisation = bk::StabilisationConfig{};
    cfg.stabilisation->gamma0 = 0.2;
    auto run = bk::run_adaptive(p, cfg, *backend);
    REQUIRE(run.converged());
    CHECK(run.lower_bound <= mono.objective + tol);
    CHECK(run.upper_bound >= mono.objective - tol);
    CHECK(run.level_max_violation <= 1e-6);
  }
  SUBCASE("stabilised with dynamic gamma") {
    bk::EngineConfig cfg;
    cfg.eps_percent = 0.1;
    cfg.stabilisation = bk::StabilisationConfig{};
    cfg.stabilisation->gamma0 = 0.5;
    cfg.stabilisation->dynamic = true;
    auto run = bk::run_adaptive(p, cfg, *backend);
    REQUIRE(run.converged());
    CHECK(run.lower_bound <= mono.objective + tol);
    CHECK(run.upper_bound >= mono.objective - tol);
    for (const auto& rec : run.records) {
      if (!std::isnan(rec.gamma)) {
        CHECK(rec.gamma >= cfg.stabilisation->gamma_min);
        CHECK(rec.gamma <= cfg.stabilisation->gamma_max);
      }
    }
  }
}

TEST_CASE("adaptive runs do strictly fewer exact solves than standard") {
  std::mt19937 rng(92);
  auto p = random_problem(rng, 5);
  auto backend = bk::make_backend();

  bk::StandardOptions sopts;
  sopts.eps_percent = 0.5;
  auto std_run = bk::run_standard(p, sopts, *backend);
  REQUIRE(std_run.converged());
  CHECK(std_run.exact_evaluations ==
        static_cast<long>(std_run.iterations) * p.num_nodes());

  bk::EngineConfig cfg;
  cfg.eps_percent = 0.5;
  auto ada = bk::run_adaptive(p, cfg, *backend);
  REQUIRE(ada.converged());
  CHECK(ada.exact_evaluations < std_run.exact_evaluations);

  cfg.stabilisation = bk::StabilisationConfig{};
  cfg.stabilisation->gamma0 = 0.2;
  auto stab = bk::run_adaptive(p, cfg, *backend);
  REQUIRE(stab.converged());
  CHECK(stab.exact_evaluations < std_run.exact_evaluations);
}

TEST_CASE("bounds stay valid and monotone through an adaptive run") {
  std::mt19937 rng(93);
  auto p = random_problem(rng, 3);
  auto backend = bk::make_backend();
  auto mono = backend->solve(bk::assemble_monolithic(p));
  REQUIRE(mono.optimal());

  bk::EngineConfig cfg;
  cfg.eps_percent = 0.05;
  cfg.stabilisation = bk::StabilisationConfig{};
  cfg.stabilisation->gamma0 = 0.3;
  auto run = bk::run_adaptive(p, cfg, *backend);
  REQUIRE(run.converged());

  const double slack = 1e-6 * (1.0 + std::abs(mono.objective));
  for (std::size_t k = 0; k < run.records.size(); ++k) {
    CHECK(run.records[k].L_star <= mono.objective + slack);
    CHECK(run.records[k].U_star >= mono.objective - slack);
    if (k > 0) {
      CHECK(run.records[k].L_star >= run.records[k - 1].L_star);
      CHECK(run.records[k].U_star <= run.records[k - 1].U_star);
    }
  }
  // Inner loop: between 1 and |I| exact solves per outer iteration.
  for (std::size_t k = 1; k < run.records.size(); ++k) {
    const long solved =
        run.records[k].n_exact_cum - run.records[k - 1].n_exact_cum;
    CHECK(solved >= 0);  // final record may close without new solves
    CHECK(solved <= p.num_nodes() + 1);
  }
}

TEST_CASE("cuts from the oracle stay globally valid during a run") {
  std::mt19937 rng(94);
  auto p = random_problem(rng, 2);
  auto backend = bk::make_backend();

  // Replay the engine's cut generation by hand so pools stay accessible.
  auto store = bk::seed(p, *backend);
  std::vector<bk::CutPool> pools(2, bk::CutPool(0.0));
  Eigen::VectorXd x = bk::testutil::feasible_master_point(p, rng);
  for (int pass = 0; pass < 5; ++pass) {
    std::vector<Eigen::VectorXd> views;
    std::vector<bk::OracleAnswer> answers;
    for (const auto& node : p.nodes) {
      views.push_back(bk::node_view(x, node));
      answers.push_back(
          bk::query_oracles(store, views.back(), node.cost, *backend));
    }
    const int k = bk::select_subproblem(answers, {p.nodes[0].pi, p.nodes[1].pi});
    auto ev = bk::evaluate_exact(p.sub, p.nodes[k].cost, views[k], *backend);
    store.insert(bk::SolvedPoint{views[k], p.nodes[k].cost, ev.theta, ev.lam,
                                 ev.phi});
    for (int i = 0; i < 2; ++i) {
      auto refreshed =
          bk::query_oracles(store, views[i], p.nodes[i].cost, *backend);
      pools[i].add(bk::Cut{views[i], refreshed.theta_lo, refreshed.lam_lo});
    }
    x = bk::testutil::feasible_master_point(p, rng);
  }
  for (int s = 0; s < 25; ++s) {
    Eigen::VectorXd xs = bk::testutil::feasible_master_point(p, rng);
    for (const auto& node : p.nodes) {
      Eigen::VectorXd xi = bk::node_view(xs, node);
      auto exact = bk::evaluate_exact(p.sub, node.cost, xi, *backend);
      for (const auto& cut : pools[node.id].cuts()) {
        CHECK(exact.theta >=
              cut.value_at(xi) - 1e-6 * (1.0 + std::abs(exact.theta)));
      }
    }
  }
}
