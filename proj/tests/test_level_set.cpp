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
#include "benderskit/level_set.hpp"
#include "doctest.h"
#include "testutil.hpp"

namespace bk = benderskit;
using bk::testutil::random_problem;

TEST_CASE("compute_target endpoints and interior value") {
  CHECK(bk::compute_target(100.0, 200.0, 0.0) == 100.0);
  CHECK(bk::compute_target(100.0, 200.0, 1.0) == 200.0);
  CHECK(bk::compute_target(100.0, 200.0, 0.025) ==
        doctest::Approx(102.5).epsilon(1e-14));
  CHECK(std::isinf(bk::compute_target(100.0, bk::kInf, 0.5)));
  CHECK_THROWS_AS(bk::compute_target(10.0, 5.0, 0.5), bk::EngineError);
}

TEST_CASE("update_gamma follows the ratio rule") {
  bk::StabilisationConfig cfg;
  cfg.omega = 0.5;
  cfg.p_low = 0.1;
  cfg.p_high = 0.9;

  bk::TargetState st;
  st.gamma = 0.5;
  st.L_lbo_prev = 100.0;

  SUBCASE("small ratio tightens the level (gamma rises)") {
    st.target_prev = 0.0;  // predicted improvement 100
    auto upd = bk::update_gamma(st, 95.0, cfg);  // actual 5 -> r = 0.05
    CHECK(upd.ratio == doctest::Approx(0.05));
    CHECK(upd.gamma == doctest::Approx(0.75));  // 1 - 0.5*(1-0.5)
    CHECK(upd.gamma > st.gamma);
  }
  SUBCASE("mid ratio leaves gamma unchanged") {
    st.target_prev = 0.0;
    auto upd = bk::update_gamma(st, 50.0, cfg);  // r = 0.5
    CHECK(upd.gamma == doctest::Approx(0.5));
  }
  SUBCASE("large ratio relaxes the level (gamma falls)") {
    bk::StabilisationConfig strong = cfg;
    strong.omega = 0.9;
    st.gamma = 0.9;
    st.target_prev = 0.0;
    auto upd = bk::update_gamma(st, 5.0, strong);  // r = 0.95 >= p_high
    CHECK(upd.gamma == doctest::Approx(0.81));     // omega * gamma
    CHECK(upd.gamma < st.gamma);
  }
  SUBCASE("nonpositive predicted improvement leaves gamma unchanged") {
    st.target_prev = 150.0;  // predicted improvement -50
    auto upd = bk::update_gamma(st, 95.0, cfg);
    CHECK(upd.gamma == doctest::Approx(0.5));
    CHECK(std::isnan(upd.ratio));
  }
  SUBCASE("nonpositive actual improvement leaves gamma unchanged") {
    st.target_prev = 0.0;
    auto upd = bk::update_gamma(st, 120.0, cfg);
    CHECK(upd.gamma == doctest::Approx(0.5));
  }
  SUBCASE("first iteration (no history) leaves gamma unchanged") {
    bk::TargetState fresh;
    fresh.gamma = 0.3;
    auto upd = bk::update_gamma(fresh, 10.0, cfg);
    CHECK(upd.gamma == doctest::Approx(0.3));
  }
  SUBCASE("updates respect the clamp interval") {
    bk::StabilisationConfig clamp = cfg;
    clamp.gamma_max = 0.6;
    st.target_prev = 0.0;
    auto upd = bk::update_gamma(st, 95.0, clamp);  // raw update says 0.75
    CHECK(upd.gamma == doctest::Approx(0.6));
  }
}

TEST_CASE("LMP projection behaviour") {
  std::mt19937 rng(80);
  auto p = random_problem(rng, 2);
  auto backend = bk::make_backend();

  // Build a few exact cuts first.
  std::vector<bk::CutPool> pools(2, bk::CutPool(0.0));
  bk::RmpSolution rmp;
  for (int it = 0; it < 4; ++it) {
    rmp = bk::solve_rmp(p, pools, *backend);
    for (const auto& node : p.nodes) {
      Eigen::VectorXd xi = bk::node_view(rmp.x, node);
      auto ev = bk::evaluate_exact(p.sub, node.cost, xi, *backend);
      pools[node.id].add(bk::Cut{xi, ev.theta, ev.lam});
    }
  }
  rmp = bk::solve_rmp(p, pools, *backend);
  const double L_star = rmp.lower_bound;

  SUBCASE("target at the lower bound reproduces an RMP optimiser") {
    auto lmp = bk::solve_lmp(p, pools, rmp.x, L_star, rmp.x, *backend);
    REQUIRE_FALSE(lmp.used_fallback);
    CHECK(lmp.level_value <= L_star + 1e-6 * (1.0 + std::abs(L_star)));
    CHECK(lmp.level_violation <= 1e-6 * (1.0 + std::abs(L_star)));
  }
  SUBCASE("a reference point inside the level set is returned unchanged") {
    // Loose target: the RMP point satisfies it, so the projection is exact.
    const double target = L_star + std::abs(L_star) + 10.0;
    auto lmp = bk::solve_lmp(p, pools, rmp.x, target, rmp.x, *backend);
    REQUIRE_FALSE(lmp.used_fallback);
    CHECK((lmp.x - rmp.x).lpNorm<Eigen::Infinity>() <= 1e-5);
  }
  SUBCASE("infinite target drops the level row") {
    auto lmp = bk::solve_lmp(p, pools, rmp.x, bk::kInf, rmp.x, *backend);
    REQUIRE_FALSE(lmp.used_fallback);
    CHECK((lmp.x - rmp.x).lpNorm<Eigen::Infinity>() <= 1e-5);
  }
  SUBCASE("level constraint holds at the projected point") {
    const double target = bk::compute_target(L_star, L_star + 50.0, 0.2);
    Eigen::VectorXd ref = bk::testutil::feasible_master_point(p, rng);
    auto lmp = bk::solve_lmp(p, pools, ref, target, rmp.x, *backend);
    REQUIRE_FALSE(lmp.used_fallback);
    CHECK(lmp.level_value <= target + 1e-6 * (1.0 + std::abs(target)));
  }
}

TEST_CASE("stabilisation config validation") {
  bk::StabilisationConfig cfg;
  CHECK_NOTHROW(cfg.validate_or_throw());
  cfg.p_low = 0.95;
  CHECK_THROWS_AS(cfg.validate_or_throw(), bk::EngineError);
}
