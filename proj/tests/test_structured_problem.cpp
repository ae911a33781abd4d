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
#include "benderskit/structured_problem.hpp"
#include "doctest.h"
#include "testutil.hpp"

namespace bk = benderskit;
using bk::testutil::random_problem;

TEST_CASE("validate: well-formed two-node problem gives empty report") {
  std::mt19937 rng(11);
  auto p = random_problem(rng, 2);
  CHECK(bk::validate(p).ok());
}

TEST_CASE("validate flags non-positive probability") {
  std::mt19937 rng(11);
  auto p = random_problem(rng, 2);
  p.nodes[1].pi = 0.0;
  auto rep = bk::validate(p);
  REQUIRE_FALSE(rep.ok());
  CHECK(rep.str().find("non-positive probability") != std::string::npos);
}

TEST_CASE("validate flags selector dimension mismatch") {
  std::mt19937 rng(11);
  auto p = random_problem(rng, 2);
  // Drop one output row from the selector.
  Eigen::SparseMatrix<double> bad(p.sub.x_dim() - 1, p.master.x_dim);
  bad.setIdentity();
  p.nodes[0].selector = bad;
  auto rep = bk::validate(p);
  REQUIRE_FALSE(rep.ok());
  CHECK(rep.str().find("selector output dimension") != std::string::npos);
}

TEST_CASE("node_view applies the selector") {
  Eigen::VectorXd x(3);
  x << 1.0, 2.0, 3.0;
  bk::DecisionNode node;

  SUBCASE("identity") {
    Eigen::SparseMatrix<double> s(3, 3);
    s.setIdentity();
    node.selector = s;
    CHECK(bk::node_view(x, node).isApprox(x));
  }
  SUBCASE("projection onto components {0, 2}") {
    Eigen::SparseMatrix<double> s(2, 3);
    std::vector<Eigen::Triplet<double>> t{{0, 0, 1.0}, {1, 2, 1.0}};
    s.setFromTriplets(t.begin(), t.end());
    node.selector = s;
    Eigen::VectorXd v = bk::node_view(x, node);
    REQUIRE(v.size() == 2);
    CHECK(v[0] == 1.0);
    CHECK(v[1] == 3.0);
  }
  SUBCASE("dimension mismatch is a hard error") {
    Eigen::SparseMatrix<double> s(2, 4);
    node.selector = s;
    CHECK_THROWS_AS(bk::node_view(x, node), std::invalid_argument);
  }
}

TEST_CASE("node_view is linear") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  auto p = random_problem(rng, 3);
  for (int k = 0; k < 10; ++k) {
    Eigen::VectorXd x = Eigen::VectorXd::NullaryExpr(
        p.master.x_dim, [&](Eigen::Index) { return unif(rng); });
    Eigen::VectorXd z = Eigen::VectorXd::NullaryExpr(
        p.master.x_dim, [&](Eigen::Index) { return unif(rng); });
    const double a = unif(rng), b = unif(rng);
    for (const auto& node : p.nodes) {
      Eigen::VectorXd lhs = bk::node_view(a * x + b * z, node);
      Eigen::VectorXd rhs =
          a * bk::node_view(x, node) + b * bk::node_view(z, node);
      CHECK((lhs - rhs).lpNorm<Eigen::Infinity>() < 1e-12);
    }
  }
}

TEST_CASE("assemble_monolithic dimensions for a one-node problem") {
  // y_dim=2, con_dim=3: expect x_dim+2 variables and |X|+3 rows.
  bk::StructuredProblem p;
  p.master.x_dim = 2;
  p.master.f_coeffs = Eigen::VectorXd::Ones(2);
  p.master.x_lower = Eigen::VectorXd::Zero(2);
  p.master.x_upper = Eigen::VectorXd::Constant(2, 5.0);
  p.master.add_row({{0, 1.0}, {1, 1.0}}, bk::RowSense::LessEqual, 8.0);

  std::vector<Eigen::Triplet<double>> at{{0, 0, 1.0}, {1, 1, 1.0}, {2, 0, 1.0}};
  p.sub.A.resize(3, 2);
  p.sub.A.setFromTriplets(at.begin(), at.end());
  std::vector<Eigen::Triplet<double>> bt{{0, 0, 1.0}, {1, 1, 1.0}, {2, 1, 1.0}};
  p.sub.B.resize(3, 2);
  p.sub.B.setFromTriplets(bt.begin(), bt.end());
  std::vector<Eigen::Triplet<double>> ct{{0, 0, 1.0}, {0, 1, 1.0}};
  p.sub.C.resize(1, 2);
  p.sub.C.setFromTriplets(ct.begin(), ct.end());
  p.sub.y_lower = Eigen::VectorXd::Zero(2);
  p.sub.y_upper = Eigen::VectorXd::Constant(2, bk::kInf);

  bk::DecisionNode node;
  node.id = 0;
  node.pi = 1.0;
  node.cost = Eigen::VectorXd::Ones(1);
  Eigen::SparseMatrix<double> s(2, 2);
  s.setIdentity();
  node.selector = s;
  p.nodes.push_back(node);

  auto lp = bk::assemble_monolithic(p);
  CHECK(lp.num_vars() == 2 + 2);
  CHECK(lp.num_rows() == 1 + 3);
}

TEST_CASE("assemble_monolithic variable count scales with node count") {
  // Three decision nodes, mirroring the smallest tree shape: total variables
  // must be x_dim + 3*y_dim.
  std::mt19937 rng(2);
  auto p = random_problem(rng, 3, /*x_dim=*/4, /*y0_dim=*/5, /*m_rows=*/6);
  auto lp = bk::assemble_monolithic(p);
  CHECK(lp.num_vars() == p.master.x_dim + 3 * p.sub.y_dim());
}

TEST_CASE("assemble_monolithic enforces the nonzero cap") {
  std::mt19937 rng(3);
  auto p = random_problem(rng, 2);
  CHECK_THROWS_AS(bk::assemble_monolithic(p, 10), bk::SolverError);
}

TEST_CASE("monolithic optimum matches converged Benders on a 2-node instance") {
  std::mt19937 rng(21);
  auto p = random_problem(rng, 2);
  auto backend = bk::make_backend("ipm");
  auto mono = backend->solve(bk::assemble_monolithic(p));
  REQUIRE(mono.optimal());

  bk::StandardOptions opts;
  opts.eps_percent = 1e-4;
  auto run = bk::run_standard(p, opts, *backend);
  REQUIRE(run.converged());
  CHECK(std::abs(run.upper_bound - mono.objective) <=
        1e-6 * (1.0 + std::abs(mono.objective)));
  CHECK(run.lower_bound <= mono.objective + 1e-6 * (1 + std::abs(mono.objective)));
  CHECK(run.upper_bound >= mono.objective - 1e-6 * (1 + std::abs(mono.objective)));
}

TEST_CASE("subproblem value is monotone decreasing in x") {
  std::mt19937 rng(31);
  auto p = random_problem(rng, 1);
  auto backend = bk::make_backend("ipm");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int k = 0; k < 8; ++k) {
    Eigen::VectorXd x = bk::testutil::feasible_master_point(p, rng);
    Eigen::VectorXd bump = Eigen::VectorXd::NullaryExpr(
        x.size(), [&](Eigen::Index) { return unif(rng); });
    Eigen::VectorXd x_hi = x + bump;  // componentwise larger
    auto lo = bk::evaluate_exact(p.sub, p.nodes[0].cost, x, *backend);
    auto hi = bk::evaluate_exact(p.sub, p.nodes[0].cost, x_hi, *backend);
    CHECK(lo.theta >= hi.theta - 1e-6 * (1.0 + std::abs(lo.theta)));
  }
}
