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

#include <cmath>
#include <random>
#include <sstream>

#include "benderskit/lp_backend.hpp"
#include "doctest.h"

namespace bk = benderskit;

namespace {

std::unique_ptr<bk::LpBackend> backend() { return bk::make_backend("ipm"); }

// Dual objective for an LP (no quadratic): b'y + l'z - u'w with bound duals
// recovered from the stationarity residual c - A'y.
double dual_objective(const bk::LinearProgram& lp, const bk::SolveOutcome& s) {
  Eigen::VectorXd rc =
      lp.cost_vector() - lp.constraint_matrix().transpose() * s.row_duals;
  double obj = lp.objective_constant() + lp.rhs_vector().dot(s.row_duals);
  for (int j = 0; j < lp.num_vars(); ++j) {
    if (rc[j] > 0) {
      REQUIRE(std::isfinite(lp.lower(j)));
      obj += lp.lower(j) * rc[j];
    } else if (rc[j] < 0) {
      REQUIRE(std::isfinite(lp.upper(j)));
      obj += lp.upper(j) * rc[j];
    }
  }
  return obj;
}

}  // namespace

TEST_CASE("min x subject to x >= 3") {
  bk::LinearProgram lp;
  int x = lp.add_variable(-bk::kInf, bk::kInf, 1.0, "x");
  lp.add_row({{x, 1.0}}, bk::RowSense::GreaterEqual, 3.0);
  auto out = backend()->solve(lp);
  REQUIRE(out.optimal());
  CHECK(out.objective == doctest::Approx(3.0).epsilon(1e-7));
  CHECK(out.primal[x] == doctest::Approx(3.0).epsilon(1e-7));
  // >= row in a minimisation: dual nonnegative; here d(obj)/d(rhs) = 1.
  CHECK(out.row_duals[0] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("min -x with x free is unbounded") {
  bk::LinearProgram lp;
  lp.add_variable(-bk::kInf, bk::kInf, -1.0, "x");
  auto out = backend()->solve(lp);
  CHECK(out.status == bk::SolveStatus::Unbounded);
}

TEST_CASE("unbounded with constraint rows") {
  bk::LinearProgram lp;
  int x = lp.add_variable(-bk::kInf, bk::kInf, -1.0, "x");
  int y = lp.add_variable(-bk::kInf, bk::kInf, 0.0, "y");
  lp.add_row({{x, 1.0}, {y, -1.0}}, bk::RowSense::LessEqual, 5.0);
  auto out = backend()->solve(lp);
  CHECK(out.status == bk::SolveStatus::Unbounded);
}

TEST_CASE("infeasible box and infeasible rows") {
  bk::LinearProgram lp;
  int x = lp.add_variable(0.0, 10.0, 1.0, "x");
  lp.add_row({{x, 1.0}}, bk::RowSense::GreaterEqual, 3.0);
  lp.add_row({{x, 1.0}}, bk::RowSense::LessEqual, 2.0);
  auto out = backend()->solve(lp);
  CHECK(out.status == bk::SolveStatus::Infeasible);
}

TEST_CASE("projection QP: min ||x-(1,1)||^2 subject to x1+x2 <= 1") {
  bk::LinearProgram lp;
  int x1 = lp.add_variable(-bk::kInf, bk::kInf, -2.0, "x1");
  int x2 = lp.add_variable(-bk::kInf, bk::kInf, -2.0, "x2");
  lp.add_quadratic_diagonal(x1, 2.0);
  lp.add_quadratic_diagonal(x2, 2.0);
  lp.set_objective_constant(2.0);  // ||x-(1,1)||^2 expanded
  lp.add_row({{x1, 1.0}, {x2, 1.0}}, bk::RowSense::LessEqual, 1.0);
  auto out = backend()->solve(lp);
  REQUIRE(out.optimal());
  // KKT: 2(x-1) = A'y with x1+x2=1 binding -> x = (0.5, 0.5), y = -1.
  CHECK(out.primal[x1] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(out.primal[x2] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(out.objective == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(out.row_duals[0] == doctest::Approx(-1.0).epsilon(1e-5));
}

TEST_CASE("dual sign convention on <= and equality rows") {
  // min -x s.t. x <= 5: relaxing the row improves the objective -> dual -1.
  bk::LinearProgram lp;
  int x = lp.add_variable(0.0, bk::kInf, -1.0, "x");
  lp.add_row({{x, 1.0}}, bk::RowSense::LessEqual, 5.0);
  auto out = backend()->solve(lp);
  REQUIRE(out.optimal());
  CHECK(out.objective == doctest::Approx(-5.0).epsilon(1e-7));
  CHECK(out.row_duals[0] == doctest::Approx(-1.0).epsilon(1e-6));

  bk::LinearProgram eq;
  int v = eq.add_variable(-bk::kInf, bk::kInf, 2.0, "v");
  eq.add_row({{v, 1.0}}, bk::RowSense::Equal, 7.0);
  auto oeq = backend()->solve(eq);
  REQUIRE(oeq.optimal());
  CHECK(oeq.objective == doctest::Approx(14.0).epsilon(1e-7));
  CHECK(oeq.row_duals[0] == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("fixed variables are handled") {
  bk::LinearProgram lp;
  int x = lp.add_variable(4.0, 4.0, 1.0, "x");
  int y = lp.add_variable(0.0, bk::kInf, 2.0, "y");
  lp.add_row({{x, 1.0}, {y, 1.0}}, bk::RowSense::GreaterEqual, 9.0);
  auto out = backend()->solve(lp);
  REQUIRE(out.optimal());
  CHECK(out.primal[x] == doctest::Approx(4.0));
  CHECK(out.primal[y] == doctest::Approx(5.0).epsilon(1e-7));
  CHECK(out.objective == doctest::Approx(14.0).epsilon(1e-7));
}

TEST_CASE("strong duality holds on random LPs") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 4 + static_cast<int>(rng() % 6);
    const int m = 3 + static_cast<int>(rng() % 5);
    bk::LinearProgram lp;
    Eigen::VectorXd x0(n);
    for (int j = 0; j < n; ++j) {
      lp.add_variable(0.0, 10.0, unif(rng) * 5.0);
      x0[j] = 5.0 + 2.0 * unif(rng);
    }
    for (int r = 0; r < m; ++r) {
      std::vector<std::pair<int, double>> entries;
      double ax0 = 0.0;
      for (int j = 0; j < n; ++j) {
        if ((rng() % 3) == 0) continue;
        const double v = unif(rng) * 3.0;
        entries.push_back({j, v});
        ax0 += v * x0[j];
      }
      // Feasible by construction: x0 satisfies every row with slack.
      lp.add_row(entries, bk::RowSense::LessEqual, ax0 + 0.5);
    }
    auto out = backend()->solve(lp);
    REQUIRE(out.optimal());
    const double dual = dual_objective(lp, out);
    CHECK(std::abs(out.objective - dual) <=
          1e-6 * (1.0 + std::abs(out.objective)));
  }
}

TEST_CASE("solves are deterministic") {
  bk::LinearProgram lp;
  int a = lp.add_variable(0.0, 4.0, 1.0, "a");
  int b = lp.add_variable(0.0, 4.0, -2.0, "b");
  lp.add_row({{a, 1.0}, {b, 2.0}}, bk::RowSense::LessEqual, 5.0);
  auto o1 = backend()->solve(lp);
  auto o2 = backend()->solve(lp);
  REQUIRE(o1.optimal());
  REQUIRE(o2.optimal());
  CHECK(o1.objective == o2.objective);
  CHECK((o1.primal - o2.primal).cwiseAbs().maxCoeff() == 0.0);
  CHECK((o1.row_duals - o2.row_duals).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("LP text dump round trips through a stream") {
  bk::LinearProgram lp;
  int x = lp.add_variable(0.0, 2.0, 1.5, "cap");
  lp.add_row({{x, 1.0}}, bk::RowSense::LessEqual, 1.0);
  lp.add_quadratic_diagonal(x, 2.0);
  std::ostringstream os;
  bk::write_lp_file(lp, os);
  const std::string text = os.str();
  CHECK(text.find("Minimize") != std::string::npos);
  CHECK(text.find("cap") != std::string::npos);
  CHECK(text.find("Subject To") != std::string::npos);
}

TEST_CASE("degenerate LP with empty objective") {
  bk::LinearProgram lp;
  int x = lp.add_variable(0.0, 1.0, 0.0, "x");
  lp.add_row({{x, 1.0}}, bk::RowSense::LessEqual, 2.0);
  auto out = backend()->solve(lp);
  REQUIRE(out.optimal());
  CHECK(out.objective == doctest::Approx(0.0));
}

TEST_CASE("unknown backend name throws") {
  CHECK_THROWS_AS(bk::make_backend("simplex9000"), bk::SolverError);
}
