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

#ifndef BENDERSKIT_POWER_SYSTEM_HPP_
#define BENDERSKIT_POWER_SYSTEM_HPP_

#include <map>
#include <string>
#include <vector>

#include "benderskit/lp_backend.hpp"
#include "benderskit/structured_problem.hpp"

namespace benderskit::power {

enum class TechKind { Thermal, ThermalCcs, Renewable, Storage, Line };
const char* to_string(TechKind k);
TechKind tech_kind_from_string(const std::string& s);

/// One investable device cluster. Thermal fields, renewable fields, storage
/// fields and line endpoints are meaningful only for the matching kind.
struct TechnologyData {
  std::string name;
  TechKind kind = TechKind::Thermal;
  std::string region;            // owning region (empty for lines)
  double c_inv = 0.0;            // £/MW
  std::vector<double> c_inv_stage;  // optional per-stage override of c_inv
  double c_fix = 0.0;            // £/MW/yr
  double x_hist = 0.0;           // MW
  double x_max = 0.0;            // MW
  double lifetime_years = 100.0;
  // thermal / thermal_ccs
  double c_op = 0.0;     // £/MWh
  double e_g = 0.0;      // tonne/MWh
  double alpha_g = 1.0;  // max ramp per period, fraction of capacity
  // renewable
  std::string cf_column;
  // storage
  double eta_se = 1.0;    // charge efficiency in (0,1]
  double gamma_se = 1.0;  // energy/power ratio, MWh/MW
  double c_s = 0.0;       // charge cost £/MWh
  // line
  std::string region_from, region_to;

  double invest_cost(int stage) const {
    if (stage < static_cast<int>(c_inv_stage.size())) {
      return c_inv_stage[stage];
    }
    return c_inv;
  }
};

struct GridTopology {
  std::vector<std::string> regions;
  bool has_region(const std::string& r) const;
};

/// Time series for the operational year: periods grouped into slices
/// (independent operational scenarios). Ramping and storage dynamics couple
/// periods within a slice only; storage cycles back to the slice start.
struct OperationalProfile {
  std::vector<int> slice_of;
  std::vector<double> hours;   // H_t
  std::vector<double> weight;  // pi_t
  std::map<std::string, std::vector<double>> demand;           // by region
  std::map<std::string, std::vector<double>> capacity_factor;  // by column

  int num_periods() const { return static_cast<int>(hours.size()); }
  double hours_per_year() const;
  std::vector<std::string> validate() const;
};

/// Uncertainty structure: every listed uncertainty branches each stage
/// transition into its outcome multipliers (applied relative to the parent
/// value), and independent uncertainties combine by Cartesian product with
/// equal within-stage probabilities.
struct TreeSpec {
  int stages = 1;
  double kappa = 5.0;  // years between stages
  std::map<std::string, std::vector<std::vector<double>>> outcomes;
  double root_demand_scale = 1.0;
  double root_co2_budget = 1e9;
  double root_co2_tax = 0.0;
};

struct TreeNode {
  int id = 0;
  int stage = 0;
  int parent = -1;  // -1 for the root
  double prob = 1.0;
  double mu_dp = 1.0;   // demand scale
  double mu_e = 0.0;    // CO2 budget (tonne/yr)
  double co2_tax = 0.0; // £/tonne
};

struct MultiHorizonTree {
  std::vector<TreeNode> nodes;
  int stages = 1;
  double kappa = 5.0;
  double discount_rate = 0.05;

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  double discount(int stage) const;
  // Path from the root to `id`, inclusive.
  std::vector<int> ancestors(int id) const;
  bool deterministic() const;  // single scenario (no branching)
};

MultiHorizonTree build_tree(const TreeSpec& spec, double discount_rate);

struct EconomicData {
  double discount_rate = 0.05;
  double shed_penalty = 0.0;  // 0 = derive as 10x the dearest running cost
};

struct InstanceData {
  std::string name;
  GridTopology topology;
  std::vector<TechnologyData> technologies;
  OperationalProfile profile;
  TreeSpec tree;
  EconomicData economics;

  std::vector<std::string> validate() const;
  double effective_shed_penalty() const;
};

/// Everything the engines and the harness need: the structured problem, the
/// tree it came from, and master-column metadata (names, which columns are
/// first-stage installs) for reporting and for fixing first-stage decisions.
struct BuiltModel {
  StructuredProblem problem;
  MultiHorizonTree tree;
  std::vector<int> root_install_columns;
  std::vector<std::string> x_packing;  // names of x_i components, in order
  std::vector<std::string> warnings;
};

/// Shared operational subproblem (identical for every node by construction).
SubproblemTemplate build_subproblem_template(const InstanceData& data);

/// Investment master over all tree nodes plus the per-node selectors.
BuiltModel build(const InstanceData& data);

enum class ToyCase { A, B, C };
InstanceData make_toy_case(ToyCase which);
BuiltModel generate_toy_case(ToyCase which);

struct SyntheticSpec {
  int stages = 3;
  int outcomes_per_uncertainty = 3;
  int uncertainties = 1;  // 1: co2 budget; 2: + demand; 3: + co2 tax
  int periods = 24;
  int regions = 2;
  bool with_storage = false;
  bool with_renewable = false;
  unsigned seed = 1;
};
InstanceData make_synthetic(const SyntheticSpec& spec);

struct VssOptions {
  double eps_percent = 0.01;          // engine tolerance when used
  std::size_t monolithic_cap = 5'000'000;
  int threads = 1;
  SolverOptions solver;
};

struct VssReport {
  double stochastic_optimum = 0.0;
  double eev_cost = 0.0;  // expected cost of the EV first-stage plan
  double vss = 0.0;
  double percent_of_optimum = 0.0;
  bool deterministic = false;
};

/// Value of the stochastic solution: solve the expected-value problem, fix
/// its first-stage installs inside the stochastic problem, and compare.
VssReport compute_vss(const InstanceData& data, const LpBackend& backend,
                      const VssOptions& opts = {});

}  // namespace benderskit::power

#endif  // BENDERSKIT_POWER_SYSTEM_HPP_
