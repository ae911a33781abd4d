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

#include "benderskit/benders_standard.hpp"
#include "doctest.h"
#include "testutil.hpp"

namespace bk = benderskit;
using bk::testutil::feasible_master_point;
using bk::testutil::random_problem;

namespace {
std::unique_ptr<bk::LpBackend> backend() { return bk::make_backend(); }
}  // namespace

TEST_CASE("RMP with only floor cuts minimises f over the feasible set") {
  std::mt19937 rng(41);
  auto p = random_problem(rng, 2);
  std::vector<bk::CutPool> pools(2, bk::CutPool(0.0));
  auto sol = bk::solve_rmp(p, pools, *backend());
  // f >= 0 on the box and beta floors at zero, so L* = min f(x).
  bk::LinearProgram master_only;
  p.master.append_to(master_only);
  auto mono = backend()->solve(master_only);
  REQUIRE(mono.optimal());
  CHECK(sol.lower_bound == doctest::Approx(mono.objective).epsilon(1e-7));
}

TEST_CASE("single exact cut at the optimum closes a 1-node problem") {
  std::mt19937 rng(42);
  auto p = random_problem(rng, 1);
  auto be = backend();
  auto mono = be->solve(bk::assemble_monolithic(p));
  REQUIRE(mono.optimal());
  Eigen::VectorXd x_opt = mono.primal.head(p.master.x_dim);
  auto ev = bk::evaluate_exact(p.sub, p.nodes[0].cost, x_opt, *be);
  std::vector<bk::CutPool> pools(1, bk::CutPool(0.0));
  pools[0].add(bk::Cut{x_opt, ev.theta, ev.lam});
  auto sol = bk::solve_rmp(p, pools, *be);
  CHECK(sol.lower_bound <= mono.objective + 1e-6 * (1 + std::abs(mono.objective)));
  // With the optimal-point cut the RMP bound reaches the true optimum.
  CHECK(sol.lower_bound ==
        doctest::Approx(mono.objective).epsilon(1e-5));
}

TEST_CASE("evaluate_exact identities") {
  std::mt19937 rng(43);
  auto p = random_problem(rng, 1);
  auto be = backend();
  Eigen::VectorXd x = feasible_master_point(p, rng);
  auto ev = bk::evaluate_exact(p.sub, p.nodes[0].cost, x, *be);

  SUBCASE("theta equals c'phi") {
    CHECK(std::abs(ev.theta - p.nodes[0].cost.dot(ev.phi)) <=
          1e-8 * (1.0 + std::abs(ev.theta)));
  }
  SUBCASE("subgradient inequality at 20 perturbed points") {
    std::uniform_real_distribution<double> unif(-0.5, 0.5);
    for (int k = 0; k < 20; ++k) {
      Eigen::VectorXd xp = x;
      for (int j = 0; j < xp.size(); ++j) {
        xp[j] = std::max(0.0, xp[j] + unif(rng));
      }
      auto exact = bk::evaluate_exact(p.sub, p.nodes[0].cost, xp, *be);
      const double cut_value = ev.theta + ev.lam.dot(xp - x);
      CHECK(exact.theta >= cut_value - 1e-6 * (1.0 + std::abs(exact.theta)));
    }
  }
}

TEST_CASE("zero rhs subproblem has zero cost and zero phi") {
  // With x = 0 every row reads A y <= 0; the elastic structure admits y = 0,
  // and all costs are nonnegative, so the optimum is exactly zero.
  std::mt19937 rng(44);
  auto p = random_problem(rng, 1);
  auto ev = bk::evaluate_exact(p.sub, p.nodes[0].cost,
                               Eigen::VectorXd::Zero(p.master.x_dim),
                               *backend());
  CHECK(std::abs(ev.theta) <= 1e-7);
  CHECK(ev.phi.lpNorm<Eigen::Infinity>() <= 1e-6);
}

TEST_CASE("run_standard converges and matches the monolithic oracle") {
  std::mt19937 rng(45);
  auto p = random_problem(rng, 3);
  auto be = backend();
  auto mono = be->solve(bk::assemble_monolithic(p));
  REQUIRE(mono.optimal());

  bk::StandardOptions opts;
  opts.eps_percent = 0.01;
  auto run = bk::run_standard(p, opts, *be);
  REQUIRE(run.converged());
  const double tol = 1e-4 * (1.0 + std::abs(mono.objective));
  CHECK(run.lower_bound <= mono.objective + tol);
  CHECK(run.upper_bound >= mono.objective - tol);
  CHECK(bk::relative_gap(run.lower_bound, run.upper_bound) <= 1e-4);

  SUBCASE("exact evaluation count is iterations times node count") {
    CHECK(run.exact_evaluations ==
          static_cast<long>(run.iterations) * p.num_nodes());
  }
  SUBCASE("lower bounds nondecreasing, upper bounds nonincreasing") {
    for (std::size_t k = 1; k < run.records.size(); ++k) {
      CHECK(run.records[k].L_star >= run.records[k - 1].L_star);
      CHECK(run.records[k].U_star <= run.records[k - 1].U_star);
    }
  }
  SUBCASE("bounds bracket the optimum at every iteration") {
    const double slack = 1e-6 * (1.0 + std::abs(mono.objective));
    for (const auto& rec : run.records) {
      CHECK(rec.L_star <= mono.objective + slack);
      CHECK(rec.U_star >= mono.objective - slack);
    }
  }
}

TEST_CASE("loose tolerance converges in very few iterations") {
  std::mt19937 rng(46);
  auto p = random_problem(rng, 2);
  bk::StandardOptions opts;
  opts.eps_percent = 100.0;
  auto run = bk::run_standard(p, opts, *backend());
  REQUIRE(run.converged());
  CHECK(run.iterations <= 3);
}

TEST_CASE("all cuts in all pools stay globally valid") {
  std::mt19937 rng(47);
  auto p = random_problem(rng, 2);
  auto be = backend();

  // Re-run the engine manually so the pools stay accessible.
  std::vector<bk::CutPool> pools(2, bk::CutPool(0.0));
  for (int iter = 0; iter < 6; ++iter) {
    auto sol = bk::solve_rmp(p, pools, *be);
    for (const auto& node : p.nodes) {
      Eigen::VectorXd xi = bk::node_view(sol.x, node);
      auto ev = bk::evaluate_exact(p.sub, node.cost, xi, *be);
      pools[node.id].add(bk::Cut{xi, ev.theta, ev.lam});
    }
  }
  // Sample feasible master points; every cut must under-estimate g there.
  for (int s = 0; s < 50; ++s) {
    Eigen::VectorXd x = feasible_master_point(p, rng);
    for (const auto& node : p.nodes) {
      Eigen::VectorXd xi = bk::node_view(x, node);
      auto exact = bk::evaluate_exact(p.sub, node.cost, xi, *be);
      for (const auto& cut : pools[node.id].cuts()) {
        CHECK(exact.theta >=
              cut.value_at(xi) - 1e-6 * (1.0 + std::abs(exact.theta)));
      }
    }
  }
}

TEST_CASE("multithreaded run matches single-threaded run") {
  std::mt19937 rng(48);
  auto p = random_problem(rng, 4);
  bk::StandardOptions opts;
  opts.eps_percent = 0.5;
  auto be = backend();
  auto run1 = bk::run_standard(p, opts, *be);
  opts.threads = 2;
  auto run2 = bk::run_standard(p, opts, *be);
  REQUIRE(run1.converged());
  REQUIRE(run2.converged());
  CHECK(run1.iterations == run2.iterations);
  CHECK(run1.upper_bound == doctest::Approx(run2.upper_bound).epsilon(1e-12));
  CHECK(run1.lower_bound == doctest::Approx(run2.lower_bound).epsilon(1e-12));
}
