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

#include <filesystem>
#include <random>

#include "benderskit/adaptive_benders.hpp"
#include "benderskit/instance_io.hpp"
#include "benderskit/power_system.hpp"
#include "doctest.h"

namespace bk = benderskit;
namespace pw = benderskit::power;

namespace {

std::unique_ptr<bk::LpBackend> be() { return bk::make_backend(); }

int find_column(const std::vector<std::string>& names, const std::string& n) {
  for (int j = 0; j < static_cast<int>(names.size()); ++j) {
    if (names[j] == n) return j;
  }
  REQUIRE_MESSAGE(false, ("column not found: " + n).c_str());
  return -1;
}

// Master point with the named installs set and everything else at its
// lower bound (pinned parameters keep their values).
Eigen::VectorXd master_point(const bk::StructuredProblem& problem,
                             const std::map<std::string, double>& installs) {
  Eigen::VectorXd x = problem.master.x_lower;
  for (const auto& [name, v] : installs) {
    x[find_column(problem.master.var_names, name)] = v;
  }
  return x;
}

}  // namespace

TEST_CASE("build_tree node counts follow the branching pattern") {
  SUBCASE("one uncertainty, three outcomes, two future stages -> 13 nodes") {
    pw::TreeSpec spec;
    spec.stages = 3;
    spec.outcomes["co2_budget"] = {{0.7, 1.0, 1.3}, {0.7, 1.0, 1.3}};
    auto tree = pw::build_tree(spec, 0.05);
    CHECK(tree.num_nodes() == 13);
    int per_stage[3] = {0, 0, 0};
    double prob[3] = {0, 0, 0};
    for (const auto& n : tree.nodes) {
      per_stage[n.stage]++;
      prob[n.stage] += n.prob;
    }
    CHECK(per_stage[0] == 1);
    CHECK(per_stage[1] == 3);
    CHECK(per_stage[2] == 9);
    for (int s = 0; s < 3; ++s) CHECK(prob[s] == doctest::Approx(1.0));
  }
  SUBCASE("three uncertainties, three outcomes each -> 757 nodes") {
    pw::TreeSpec spec;
    spec.stages = 3;
    const std::vector<std::vector<double>> lists{{0.7, 1.0, 1.3},
                                                 {0.7, 1.0, 1.3}};
    spec.outcomes["co2_budget"] = lists;
    spec.outcomes["demand_scale"] = lists;
    spec.outcomes["co2_tax"] = lists;
    auto tree = pw::build_tree(spec, 0.05);
    CHECK(tree.num_nodes() == 1 + 27 + 729);
  }
  SUBCASE("no uncertainty -> one node per stage") {
    pw::TreeSpec spec;
    spec.stages = 3;
    auto tree = pw::build_tree(spec, 0.05);
    CHECK(tree.num_nodes() == 3);
    CHECK(tree.deterministic());
  }
  SUBCASE("empty outcome list is a hard error") {
    pw::TreeSpec spec;
    spec.stages = 2;
    spec.outcomes["co2_budget"] = {std::vector<double>{}};
    CHECK_THROWS_AS(pw::build_tree(spec, 0.05), bk::EngineError);
  }
}

TEST_CASE("accumulation honours history, installs and lifetimes") {
  pw::SyntheticSpec sspec;
  sspec.stages = 3;
  sspec.uncertainties = 0;
  sspec.periods = 8;
  sspec.regions = 1;
  auto data = pw::make_synthetic(sspec);
  data.technologies.resize(1);  // single thermal tech
  auto& tech = data.technologies[0];
  tech.x_hist = 10.0;
  tech.x_max = 100.0;

  SUBCASE("long lifetime: installs accumulate at every descendant") {
    tech.lifetime_years = 40.0;
    auto built = pw::build(data);
    auto x = master_point(built.problem, {{"inst[0][" + tech.name + "]", 5.0}});
    for (const auto& node : built.problem.nodes) {
      CHECK(bk::node_view(x, node)[0] == doctest::Approx(15.0).epsilon(1e-12));
    }
  }
  SUBCASE("lifetime equal to the stage spacing expires at stage two") {
    tech.lifetime_years = data.tree.kappa;
    auto built = pw::build(data);
    auto x = master_point(built.problem, {{"inst[0][" + tech.name + "]", 5.0}});
    for (const auto& node : built.problem.nodes) {
      const double expect =
          built.tree.nodes[node.id].stage <= 1 ? 15.0 : 10.0;
      CHECK(bk::node_view(x, node)[0] == doctest::Approx(expect).epsilon(1e-12));
    }
  }
  SUBCASE("x_max caps the accumulated capacity") {
    tech.lifetime_years = 40.0;
    tech.x_max = 12.0;
    auto built = pw::build(data);
    bk::LinearProgram lp;
    built.problem.master.append_to(lp);
    for (int j = 0; j < lp.num_vars(); ++j) lp.set_cost(j, 0.0);
    const int inst0 =
        find_column(built.problem.master.var_names, "inst[0][" + tech.name + "]");
    // Maximising the root install runs into the accumulation cap.
    lp.set_cost(inst0, -1.0);
    auto out = be()->solve(lp);
    REQUIRE(out.optimal());
    CHECK(out.primal[inst0] == doctest::Approx(2.0).epsilon(1e-6));
  }
}

TEST_CASE("subproblem template spot checks") {
  auto data = pw::make_toy_case(pw::ToyCase::A);
  auto built = pw::build(data);
  const auto& node = built.problem.nodes[0];
  auto backend = be();

  SUBCASE("zero demand means zero operational cost") {
    Eigen::VectorXd x_i(built.problem.sub.x_dim());
    x_i << 5000.0, 5000.0, /*neg demand*/ 0.0, /*budget*/ 1e9;
    auto ev = bk::evaluate_exact(built.problem.sub, node.cost, x_i, *backend);
    CHECK(std::abs(ev.theta) <= 1e-3);  // absolute pennies against a GBP-1e9 scale
  }
  SUBCASE("demand beyond capacity sheds at the penalty price") {
    // One region, capacities 1000+500 against demand scaled to the profile;
    // the single-period arithmetic per period t:
    //   shed_t = max(0, demand_t - 1500), cost += pi H (ops + penalty*shed).
    Eigen::VectorXd x_i(built.problem.sub.x_dim());
    x_i << 1000.0, 500.0, -1.0, 1e9;
    auto ev = bk::evaluate_exact(built.problem.sub, node.cost, x_i, *backend);
    double expect = 0.0;
    const auto& prof = data.profile;
    const auto& dem = prof.demand.at("R1");
    for (int t = 0; t < prof.num_periods(); ++t) {
      const double pih = prof.weight[t] * prof.hours[t];
      const double served = std::min(dem[t], 1500.0);
      const double ocgt = std::min(served, 1000.0);
      const double diesel = served - ocgt;
      const double shed = dem[t] - served;
      expect += pih * (65.0 * ocgt + 150.0 * diesel + 5000.0 * shed);
    }
    CHECK(ev.theta == doctest::Approx(expect).epsilon(1e-7));
  }
  SUBCASE("zero CO2 budget with thermal-only fleet sheds everything") {
    Eigen::VectorXd x_i(built.problem.sub.x_dim());
    x_i << 5000.0, 5000.0, -1.0, 0.0;
    auto ev = bk::evaluate_exact(built.problem.sub, node.cost, x_i, *backend);
    double expect = 0.0;
    const auto& prof = data.profile;
    for (int t = 0; t < prof.num_periods(); ++t) {
      expect += prof.weight[t] * prof.hours[t] * 5000.0 *
                prof.demand.at("R1")[t];
    }
    CHECK(ev.theta == doctest::Approx(expect).epsilon(1e-7));
  }
}

TEST_CASE("template is shared and nodes differ only in weight and cost") {
  pw::SyntheticSpec sspec;
  sspec.stages = 3;
  sspec.uncertainties = 1;
  sspec.periods = 8;
  sspec.regions = 1;
  auto built = pw::build(pw::make_synthetic(sspec));
  REQUIRE(built.tree.num_nodes() == 13);
  // One template object serves every node; node data is (pi, c_i, selector).
  for (const auto& node : built.problem.nodes) {
    CHECK(node.cost.size() == 2);
    CHECK(node.cost[0] == 1.0);
    CHECK(node.selector.rows() == built.problem.sub.x_dim());
  }
}

TEST_CASE("operational value is monotone in the oriented inputs") {
  auto built = pw::build(pw::make_toy_case(pw::ToyCase::B));
  const auto& node = built.problem.nodes[0];
  auto backend = be();
  const int P = 4;  // two techs per region
  Eigen::VectorXd base(built.problem.sub.x_dim());
  base << 2500.0, 1500.0, 1800.0, 1200.0, -1.0, 1.2e7;
  auto g0 = bk::evaluate_exact(built.problem.sub, node.cost, base, *backend);

  SUBCASE("more capacity cannot cost more") {
    for (int p = 0; p < P; ++p) {
      Eigen::VectorXd x = base;
      x[p] += 500.0;
      auto g = bk::evaluate_exact(built.problem.sub, node.cost, x, *backend);
      CHECK(g.theta <= g0.theta + 1e-6 * (1.0 + std::abs(g0.theta)));
    }
  }
  SUBCASE("less demand (oriented component up) cannot cost more") {
    Eigen::VectorXd x = base;
    x[P] += 0.2;  // neg demand scale rises: mu_dp falls from 1.0 to 0.8
    auto g = bk::evaluate_exact(built.problem.sub, node.cost, x, *backend);
    CHECK(g.theta <= g0.theta + 1e-6 * (1.0 + std::abs(g0.theta)));
  }
  SUBCASE("a larger CO2 budget cannot cost more") {
    Eigen::VectorXd x = base;
    x[P + 1] *= 1.5;
    auto g = bk::evaluate_exact(built.problem.sub, node.cost, x, *backend);
    CHECK(g.theta <= g0.theta + 1e-6 * (1.0 + std::abs(g0.theta)));
  }
}

TEST_CASE("optimal operational solutions satisfy the physics") {
  auto data = pw::make_toy_case(pw::ToyCase::B);
  auto built = pw::build(data);
  const auto& node = built.problem.nodes[0];
  const auto& sub = built.problem.sub;
  auto backend = be();
  Eigen::VectorXd x_i(sub.x_dim());
  x_i << 2600.0, 1300.0, 1750.0, 900.0, -1.0, 1.4e7;

  // Re-solve the subproblem LP directly to inspect the primal.
  bk::LinearProgram lp;
  const Eigen::VectorXd ycost = sub.C.transpose() * node.cost;
  for (int j = 0; j < sub.y_dim(); ++j) {
    lp.add_variable(sub.y_lower[j], sub.y_upper[j], ycost[j]);
  }
  const Eigen::VectorXd rhs = sub.B * x_i;
  Eigen::SparseMatrix<double, Eigen::RowMajor> arow(sub.A);
  for (int r = 0; r < sub.con_dim(); ++r) {
    std::vector<std::pair<int, double>> entries;
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(arow, r);
         it; ++it) {
      entries.push_back({static_cast<int>(it.col()), it.value()});
    }
    lp.add_row(entries, sub.sense(r), rhs[r]);
  }
  auto out = backend->solve(lp);
  REQUIRE(out.optimal());

  SUBCASE("energy balance closes to within 1e-6 MW") {
    Eigen::VectorXd residual = rhs - sub.A * out.primal;
    for (int r = 0; r < sub.con_dim(); ++r) {
      if (sub.sense(r) == bk::RowSense::Equal) {
        CHECK(std::abs(residual[r]) <= 1e-6);
      } else {
        CHECK(residual[r] >= -1e-5);
      }
    }
  }
  SUBCASE("emissions respect the budget") {
    // Emission quantity is the second cost-map row.
    const double emitted = (sub.C * out.primal)[1];
    CHECK(emitted <= 1.4e7 + 1e-6 * 1.4e7 + 1e-3);
  }
}

TEST_CASE("case A/B/C data matches the construction") {
  auto a = pw::make_toy_case(pw::ToyCase::A);
  auto b = pw::make_toy_case(pw::ToyCase::B);
  auto c = pw::make_toy_case(pw::ToyCase::C);

  SUBCASE("case B demands are 60% and 40% of case A") {
    const auto& da = a.profile.demand.at("R1");
    const auto& d1 = b.profile.demand.at("R1");
    const auto& d2 = b.profile.demand.at("R2");
    for (std::size_t t = 0; t < da.size(); ++t) {
      CHECK(d1[t] == doctest::Approx(0.6 * da[t]));
      CHECK(d2[t] == doctest::Approx(0.4 * da[t]));
    }
  }
  SUBCASE("case C adds exactly one zero-capacity line") {
    CHECK(c.technologies.size() == b.technologies.size() + 1);
    const auto& line = c.technologies.back();
    CHECK(line.kind == pw::TechKind::Line);
    CHECK(line.x_hist == 0.0);
  }
  SUBCASE("generated instances validate") {
    CHECK(a.validate().empty());
    CHECK(b.validate().empty());
    CHECK(c.validate().empty());
  }
}

TEST_CASE("case C invests in no transmission line") {
  auto built = pw::build(pw::make_toy_case(pw::ToyCase::C));
  auto backend = be();
  auto mono = backend->solve(bk::assemble_monolithic(built.problem));
  REQUIRE(mono.optimal());
  const int line_col =
      find_column(built.problem.master.var_names, "inst[0][link_r1_r2]");
  CHECK(std::abs(mono.primal[line_col]) <= 1.0);  // MW, against multi-GW fleet
}

TEST_CASE("seed special point floors at the historical capacities") {
  auto data = pw::make_toy_case(pw::ToyCase::A);
  data.technologies[0].x_hist = 700.0;
  data.technologies[1].x_hist = 300.0;
  auto built = pw::build(data);
  auto backend = be();
  auto store = bk::seed(built.problem, *backend);
  CHECK(store.x_min()[0] == doctest::Approx(700.0).epsilon(1e-6));
  CHECK(store.x_min()[1] == doctest::Approx(300.0).epsilon(1e-6));
  // Demand component: negated scale; budget component: the root budget.
  CHECK(store.x_min()[2] == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(store.x_min()[3] == doctest::Approx(1e9).epsilon(1e-6));
}

TEST_CASE("instances round trip through JSON + CSV") {
  pw::SyntheticSpec sspec;
  sspec.stages = 2;
  sspec.uncertainties = 2;
  sspec.periods = 8;
  sspec.regions = 2;
  sspec.with_storage = true;
  sspec.with_renewable = true;
  auto data = pw::make_synthetic(sspec);
  const std::string dir = "io_roundtrip_test";
  const std::string path = pw::save_instance(data, dir);
  auto loaded = pw::load_instance(path);
  CHECK(loaded.name == data.name);
  CHECK(loaded.technologies.size() == data.technologies.size());
  CHECK(loaded.profile.num_periods() == data.profile.num_periods());
  CHECK(loaded.tree.outcomes.size() == data.tree.outcomes.size());
  CHECK(loaded.validate().empty());
  // Loading reorders technologies (storage and lines after generators) but
  // the built problems must agree: compare monolithic optima.
  auto b1 = pw::build(data);
  auto b2 = pw::build(loaded);
  auto backend = be();
  auto m1 = backend->solve(bk::assemble_monolithic(b1.problem));
  auto m2 = backend->solve(bk::assemble_monolithic(b2.problem));
  REQUIRE(m1.optimal());
  REQUIRE(m2.optimal());
  CHECK(m1.objective == doctest::Approx(m2.objective).epsilon(1e-8));
  std::filesystem::remove_all(dir);
}

TEST_CASE("profile weight-hours accounting is validated") {
  auto data = pw::make_toy_case(pw::ToyCase::A);
  data.profile.hours[0] *= 2.0;  // breaks the 8760 identity
  auto issues = data.validate();
  bool found = false;
  for (const auto& s : issues) {
    found = found || s.find("8760") != std::string::npos;
  }
  CHECK(found);
}

TEST_CASE("VSS behaviour") {
  auto backend = be();

  SUBCASE("deterministic tree has exactly zero VSS") {
    pw::SyntheticSpec sspec;
    sspec.stages = 2;
    sspec.uncertainties = 0;
    sspec.periods = 8;
    sspec.regions = 1;
    auto report = pw::compute_vss(pw::make_synthetic(sspec), *backend);
    CHECK(report.deterministic);
    CHECK(report.vss == 0.0);
  }
  SUBCASE("asymmetric two-outcome demand tree has nonnegative VSS that "
          "scales with costs") {
    pw::SyntheticSpec sspec;
    sspec.stages = 2;
    sspec.uncertainties = 0;
    sspec.periods = 8;
    sspec.regions = 1;
    auto data = pw::make_synthetic(sspec);
    data.tree.outcomes["demand_scale"] = {{0.55, 1.45}};
    auto report = pw::compute_vss(data, *backend);
    CHECK_FALSE(report.deterministic);
    CHECK(report.vss >= -1e-6 * std::abs(report.stochastic_optimum));
    CHECK(report.percent_of_optimum ==
          doctest::Approx(100.0 * report.vss / report.stochastic_optimum));

    auto scaled = data;
    for (auto& tech : scaled.technologies) {
      tech.c_inv *= 2.0;
      tech.c_fix *= 2.0;
      tech.c_op *= 2.0;
      tech.c_s *= 2.0;
    }
    scaled.economics.shed_penalty = 2.0 * data.effective_shed_penalty();
    auto scaled_report = pw::compute_vss(scaled, *backend);
    CHECK(scaled_report.stochastic_optimum ==
          doctest::Approx(2.0 * report.stochastic_optimum).epsilon(1e-6));
    CHECK(scaled_report.vss ==
          doctest::Approx(2.0 * report.vss)
              .epsilon(1e-4)
              .scale(std::abs(report.stochastic_optimum)));
  }
}
