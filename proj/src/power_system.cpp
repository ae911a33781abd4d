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

#include "benderskit/power_system.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>

#include "benderskit/adaptive_benders.hpp"

namespace benderskit::power {

const char* to_string(TechKind k) {
  switch (k) {
    case TechKind::Thermal:
      return "thermal";
    case TechKind::ThermalCcs:
      return "thermal_ccs";
    case TechKind::Renewable:
      return "renewable";
    case TechKind::Storage:
      return "storage";
    case TechKind::Line:
      return "line";
  }
  return "?";
}

TechKind tech_kind_from_string(const std::string& s) {
  if (s == "thermal") return TechKind::Thermal;
  if (s == "thermal_ccs") return TechKind::ThermalCcs;
  if (s == "renewable") return TechKind::Renewable;
  if (s == "storage") return TechKind::Storage;
  if (s == "line") return TechKind::Line;
  throw EngineError("unknown technology kind: " + s);
}

bool GridTopology::has_region(const std::string& r) const {
  return std::find(regions.begin(), regions.end(), r) != regions.end();
}

double OperationalProfile::hours_per_year() const {
  double total = 0.0;
  for (int t = 0; t < num_periods(); ++t) total += weight[t] * hours[t];
  return total;
}

std::vector<std::string> OperationalProfile::validate() const {
  std::vector<std::string> issues;
  const int T = num_periods();
  if (static_cast<int>(slice_of.size()) != T ||
      static_cast<int>(weight.size()) != T) {
    issues.push_back("profile: period columns have inconsistent lengths");
    return issues;
  }
  for (const auto& [region, series] : demand) {
    if (static_cast<int>(series.size()) != T) {
      issues.push_back("profile: demand series for " + region +
                       " has wrong length");
    }
  }
  for (const auto& [col, series] : capacity_factor) {
    if (static_cast<int>(series.size()) != T) {
      issues.push_back("profile: capacity factors " + col +
                       " have wrong length");
    }
    for (double v : series) {
      if (v < 0.0 || v > 1.0) {
        issues.push_back("profile: capacity factor outside [0,1] in " + col);
        break;
      }
    }
  }
  const double hpy = hours_per_year();
  if (std::abs(hpy - 8760.0) > 1e-6 * 8760.0) {
    issues.push_back("profile: sum of pi_t*H_t is " + std::to_string(hpy) +
                     ", expected 8760");
  }
  return issues;
}

double MultiHorizonTree::discount(int stage) const {
  return std::pow(1.0 + discount_rate, -kappa * stage);
}

std::vector<int> MultiHorizonTree::ancestors(int id) const {
  std::vector<int> path;
  for (int cur = id; cur >= 0; cur = nodes[cur].parent) path.push_back(cur);
  std::reverse(path.begin(), path.end());
  return path;
}

bool MultiHorizonTree::deterministic() const {
  return num_nodes() == stages;
}

MultiHorizonTree build_tree(const TreeSpec& spec, double discount_rate) {
  if (spec.stages < 1) throw EngineError("build_tree: need at least 1 stage");
  for (const auto& [name, lists] : spec.outcomes) {
    if (name != "co2_budget" && name != "demand_scale" && name != "co2_tax") {
      throw EngineError("build_tree: unknown uncertainty '" + name + "'");
    }
    if (static_cast<int>(lists.size()) != spec.stages - 1) {
      throw EngineError("build_tree: uncertainty '" + name + "' needs " +
                        std::to_string(spec.stages - 1) + " outcome lists");
    }
    for (const auto& list : lists) {
      if (list.empty()) {
        throw EngineError("build_tree: empty outcome list for '" + name + "'");
      }
    }
  }

  MultiHorizonTree tree;
  tree.stages = spec.stages;
  tree.kappa = spec.kappa;
  tree.discount_rate = discount_rate;

  TreeNode root;
  root.id = 0;
  root.stage = 0;
  root.parent = -1;
  root.prob = 1.0;
  root.mu_dp = spec.root_demand_scale;
  root.mu_e = spec.root_co2_budget;
  root.co2_tax = spec.root_co2_tax;
  tree.nodes.push_back(root);

  std::vector<int> frontier{0};
  for (int s = 1; s < spec.stages; ++s) {
    // Cartesian product over uncertainties (map order is deterministic).
    std::vector<std::array<double, 3>> combos{{1.0, 1.0, 1.0}};
    for (const auto& [name, lists] : spec.outcomes) {
      std::vector<std::array<double, 3>> next;
      for (const auto& combo : combos) {
        for (double v : lists[s - 1]) {
          std::array<double, 3> c = combo;
          if (name == "co2_budget") c[0] *= v;
          if (name == "demand_scale") c[1] *= v;
          if (name == "co2_tax") c[2] *= v;
          next.push_back(c);
        }
      }
      combos = std::move(next);
    }
    std::vector<int> next_frontier;
    for (int parent : frontier) {
      for (const auto& c : combos) {
        TreeNode node;
        node.id = tree.num_nodes();
        node.stage = s;
        node.parent = parent;
        node.prob = tree.nodes[parent].prob / combos.size();
        node.mu_e = tree.nodes[parent].mu_e * c[0];
        node.mu_dp = tree.nodes[parent].mu_dp * c[1];
        node.co2_tax = tree.nodes[parent].co2_tax * c[2];
        tree.nodes.push_back(node);
        next_frontier.push_back(node.id);
      }
    }
    frontier = std::move(next_frontier);
  }
  return tree;
}

double InstanceData::effective_shed_penalty() const {
  if (economics.shed_penalty > 0.0) return economics.shed_penalty;
  double max_running = 0.0;
  double max_tax = tree.root_co2_tax;
  // Tax can only grow along declared multiplier outcomes >= 1.
  for (const auto& [name, lists] : tree.outcomes) {
    if (name != "co2_tax") continue;
    double factor = 1.0;
    for (const auto& list : lists) {
      factor *= *std::max_element(list.begin(), list.end());
    }
    max_tax = tree.root_co2_tax * std::max(1.0, factor);
  }
  for (const auto& tech : technologies) {
    if (tech.kind == TechKind::Thermal || tech.kind == TechKind::ThermalCcs) {
      max_running = std::max(max_running, tech.c_op + max_tax * tech.e_g);
    }
    if (tech.kind == TechKind::Storage) {
      max_running = std::max(max_running, tech.c_s);
    }
  }
  return 10.0 * std::max(max_running, 1.0);
}

std::vector<std::string> InstanceData::validate() const {
  std::vector<std::string> issues = profile.validate();
  if (topology.regions.empty()) issues.push_back("no regions declared");
  for (const auto& tech : technologies) {
    const std::string tag = "technology " + tech.name + ": ";
    if (tech.kind == TechKind::Line) {
      if (!topology.has_region(tech.region_from) ||
          !topology.has_region(tech.region_to)) {
        issues.push_back(tag + "line endpoint is not a declared region");
      }
      if (tech.region_from == tech.region_to) {
        issues.push_back(tag + "line endpoints coincide");
      }
    } else if (!topology.has_region(tech.region)) {
      issues.push_back(tag + "unknown region '" + tech.region + "'");
    }
    if (tech.x_hist < 0 || tech.x_hist > tech.x_max) {
      issues.push_back(tag + "needs 0 <= x_hist <= x_max");
    }
    if (tech.lifetime_years < 1.0) {
      issues.push_back(tag + "lifetime must be at least one year");
    }
    if (tech.kind == TechKind::Storage &&
        (tech.eta_se <= 0.0 || tech.eta_se > 1.0)) {
      issues.push_back(tag + "storage efficiency must lie in (0,1]");
    }
    if ((tech.kind == TechKind::Thermal || tech.kind == TechKind::ThermalCcs) &&
        (tech.alpha_g <= 0.0 || tech.alpha_g > 1.0)) {
      issues.push_back(tag + "ramp rate must lie in (0,1]");
    }
    if (tech.e_g < 0.0) issues.push_back(tag + "emission factor negative");
    if (tech.kind == TechKind::Renewable &&
        profile.capacity_factor.find(tech.cf_column) ==
            profile.capacity_factor.end()) {
      issues.push_back(tag + "capacity-factor column '" + tech.cf_column +
                       "' missing from the profile");
    }
  }
  for (const auto& region : topology.regions) {
    if (profile.demand.find(region) == profile.demand.end()) {
      issues.push_back("no demand series for region " + region);
    }
  }
  return issues;
}

namespace {

struct TechSets {
  std::vector<int> thermal, storage, line, renewable;  // tech indices
};

TechSets split_techs(const std::vector<TechnologyData>& techs) {
  TechSets s;
  for (int p = 0; p < static_cast<int>(techs.size()); ++p) {
    switch (techs[p].kind) {
      case TechKind::Thermal:
      case TechKind::ThermalCcs:
        s.thermal.push_back(p);
        break;
      case TechKind::Storage:
        s.storage.push_back(p);
        break;
      case TechKind::Line:
        s.line.push_back(p);
        break;
      case TechKind::Renewable:
        s.renewable.push_back(p);
        break;
    }
  }
  return s;
}

}  // namespace

SubproblemTemplate build_subproblem_template(const InstanceData& data) {
  const auto& techs = data.technologies;
  const TechSets sets = split_techs(techs);
  const auto& profile = data.profile;
  const int T = profile.num_periods();
  const int P = static_cast<int>(techs.size());
  const int nG = static_cast<int>(sets.thermal.size());
  const int nS = static_cast<int>(sets.storage.size());
  const int nL = static_cast<int>(sets.line.size());
  const int nZ = static_cast<int>(data.topology.regions.size());
  const double shed_penalty = data.effective_shed_penalty();

  // y layout per period: [gen] [charge] [discharge] [level] [flow] [shed]
  // [genshed]; x layout: one capacity per declared technology, then the
  // negated demand scaler, then the CO2 budget.
  const int block = nG + 3 * nS + nL + 2 * nZ;
  const int y_dim = T * block;
  auto y_gen = [&](int t, int g) { return t * block + g; };
  auto y_chg = [&](int t, int s) { return t * block + nG + s; };
  auto y_dis = [&](int t, int s) { return t * block + nG + nS + s; };
  auto y_lvl = [&](int t, int s) { return t * block + nG + 2 * nS + s; };
  auto y_flw = [&](int t, int l) { return t * block + nG + 3 * nS + l; };
  auto y_shd = [&](int t, int z) { return t * block + nG + 3 * nS + nL + z; };
  auto y_gsh = [&](int t, int z) {
    return t * block + nG + 3 * nS + nL + nZ + z;
  };
  const int x_demand = P;
  const int x_budget = P + 1;

  std::vector<Eigen::Triplet<double>> at, bt, ct;
  std::vector<int> equality_rows;
  int row = 0;
  auto region_index = [&](const std::string& r) {
    for (int z = 0; z < nZ; ++z) {
      if (data.topology.regions[z] == r) return z;
    }
    throw EngineError("unknown region " + r);
  };

  for (int t = 0; t < T; ++t) {
    // Generator capacity.
    for (int gi = 0; gi < nG; ++gi) {
      at.emplace_back(row, y_gen(t, gi), 1.0);
      bt.emplace_back(row, sets.thermal[gi], 1.0);
      ++row;
    }
    // Line capacity, both directions.
    for (int li = 0; li < nL; ++li) {
      at.emplace_back(row, y_flw(t, li), 1.0);
      bt.emplace_back(row, sets.line[li], 1.0);
      ++row;
      at.emplace_back(row, y_flw(t, li), -1.0);
      bt.emplace_back(row, sets.line[li], 1.0);
      ++row;
    }
    // Storage power and energy capacity.
    for (int si = 0; si < nS; ++si) {
      const auto& tech = techs[sets.storage[si]];
      at.emplace_back(row, y_chg(t, si), 1.0);
      bt.emplace_back(row, sets.storage[si], 1.0);
      ++row;
      at.emplace_back(row, y_dis(t, si), 1.0);
      bt.emplace_back(row, sets.storage[si], 1.0);
      ++row;
      at.emplace_back(row, y_lvl(t, si), 1.0);
      bt.emplace_back(row, sets.storage[si], tech.gamma_se);
      ++row;
    }
    // Ramping within a slice. An alpha of one is implied by the capacity
    // rows (0 <= p <= cap), so emitting it would only add degenerate rows
    // that let dual weight leak into the cuts.
    if (t > 0 && profile.slice_of[t] == profile.slice_of[t - 1]) {
      for (int gi = 0; gi < nG; ++gi) {
        const double alpha = techs[sets.thermal[gi]].alpha_g;
        if (alpha >= 1.0) continue;
        at.emplace_back(row, y_gen(t, gi), 1.0);
        at.emplace_back(row, y_gen(t - 1, gi), -1.0);
        bt.emplace_back(row, sets.thermal[gi], alpha);
        ++row;
        at.emplace_back(row, y_gen(t, gi), -1.0);
        at.emplace_back(row, y_gen(t - 1, gi), 1.0);
        bt.emplace_back(row, sets.thermal[gi], alpha);
        ++row;
      }
    }
    // Nodal balance per region (equality):
    //   sum(gen) + inflow - outflow + discharge - charge + shed - genshed
    //     = mu_dp * demand - sum(R * cap_renewable).
    for (int z = 0; z < nZ; ++z) {
      const std::string& region = data.topology.regions[z];
      const double dem = profile.demand.at(region)[t];
      for (int gi = 0; gi < nG; ++gi) {
        if (techs[sets.thermal[gi]].region == region) {
          at.emplace_back(row, y_gen(t, gi), 1.0);
        }
      }
      for (int li = 0; li < nL; ++li) {
        const auto& line = techs[sets.line[li]];
        if (line.region_to == region) {
          at.emplace_back(row, y_flw(t, li), 1.0);
        } else if (line.region_from == region) {
          at.emplace_back(row, y_flw(t, li), -1.0);
        }
      }
      for (int si = 0; si < nS; ++si) {
        if (techs[sets.storage[si]].region == region) {
          at.emplace_back(row, y_dis(t, si), 1.0);
          at.emplace_back(row, y_chg(t, si), -1.0);
        }
      }
      at.emplace_back(row, y_shd(t, z), 1.0);
      at.emplace_back(row, y_gsh(t, z), -1.0);
      for (int ri : sets.renewable) {
        if (techs[ri].region == region) {
          const double cf = profile.capacity_factor.at(techs[ri].cf_column)[t];
          bt.emplace_back(row, ri, -cf);
        }
      }
      // mu_dp enters negated in x, so the demand coefficient flips sign.
      bt.emplace_back(row, x_demand, -dem);
      equality_rows.push_back(row);
      ++row;
    }
    // Storage dynamics (equality), cyclic within the slice.
    for (int si = 0; si < nS; ++si) {
      const auto& tech = techs[sets.storage[si]];
      int next = t + 1;
      if (next >= T || profile.slice_of[next] != profile.slice_of[t]) {
        next = t;
        while (next > 0 && profile.slice_of[next - 1] == profile.slice_of[t]) {
          --next;
        }
      }
      at.emplace_back(row, y_lvl(next, si), 1.0);
      at.emplace_back(row, y_lvl(t, si), -1.0);
      at.emplace_back(row, y_chg(t, si), -profile.hours[t] * tech.eta_se);
      at.emplace_back(row, y_dis(t, si), profile.hours[t]);
      equality_rows.push_back(row);
      ++row;
    }
  }
  // Yearly emission budget.
  for (int t = 0; t < T; ++t) {
    const double pih = profile.weight[t] * profile.hours[t];
    for (int gi = 0; gi < nG; ++gi) {
      const double eg = techs[sets.thermal[gi]].e_g;
      if (eg != 0.0) at.emplace_back(row, y_gen(t, gi), pih * eg);
    }
  }
  bt.emplace_back(row, x_budget, 1.0);
  ++row;

  // Cost map: row 0 carries running costs and the shed penalty, row 1 the
  // emission quantity (priced by the node's CO2 tax).
  for (int t = 0; t < T; ++t) {
    const double pih = profile.weight[t] * profile.hours[t];
    for (int gi = 0; gi < nG; ++gi) {
      const auto& tech = techs[sets.thermal[gi]];
      if (tech.c_op != 0.0) ct.emplace_back(0, y_gen(t, gi), pih * tech.c_op);
      if (tech.e_g != 0.0) ct.emplace_back(1, y_gen(t, gi), pih * tech.e_g);
    }
    for (int si = 0; si < nS; ++si) {
      const auto& tech = techs[sets.storage[si]];
      if (tech.c_s != 0.0) ct.emplace_back(0, y_chg(t, si), pih * tech.c_s);
    }
    for (int z = 0; z < nZ; ++z) {
      ct.emplace_back(0, y_shd(t, z), pih * shed_penalty);
    }
  }

  SubproblemTemplate sub;
  sub.senses.assign(row, RowSense::LessEqual);
  for (int r : equality_rows) sub.senses[r] = RowSense::Equal;
  sub.A.resize(row, y_dim);
  sub.A.setFromTriplets(at.begin(), at.end());
  sub.B.resize(row, P + 2);
  sub.B.setFromTriplets(bt.begin(), bt.end());
  sub.C.resize(2, y_dim);
  sub.C.setFromTriplets(ct.begin(), ct.end());
  sub.y_lower = Eigen::VectorXd::Zero(y_dim);
  sub.y_upper = Eigen::VectorXd::Constant(y_dim, kInf);
  for (int t = 0; t < T; ++t) {
    for (int li = 0; li < nL; ++li) {
      sub.y_lower[y_flw(t, li)] = -kInf;  // flows are bidirectional
    }
  }
  return sub;
}

BuiltModel build(const InstanceData& data) {
  {
    auto issues = data.validate();
    if (!issues.empty()) {
      std::string msg = "instance validation failed:";
      for (const auto& s : issues) msg += "\n  " + s;
      throw EngineError(msg);
    }
  }
  BuiltModel built;
  built.tree = build_tree(data.tree, data.economics.discount_rate);
  const MultiHorizonTree& tree = built.tree;
  const auto& techs = data.technologies;
  const int P = static_cast<int>(techs.size());
  const int N = tree.num_nodes();

  for (const auto& tech : techs) {
    if (tech.lifetime_years < tree.kappa && tree.stages > 1) {
      built.warnings.push_back("technology " + tech.name +
                               ": lifetime shorter than the stage spacing; "
                               "installs expire before the next stage");
    }
  }

  // Master columns: installs, then pinned columns (historical capacity per
  // technology and the per-node realisations). Accumulated capacity is not
  // a variable: selectors and cap rows sum the alive installs directly,
  // which keeps the master free of equality rows.
  MasterBlock master;
  master.x_dim = N * P + P + 2 * N;
  master.f_coeffs = Eigen::VectorXd::Zero(master.x_dim);
  master.x_lower = Eigen::VectorXd::Zero(master.x_dim);
  master.x_upper = Eigen::VectorXd::Zero(master.x_dim);
  master.var_names.resize(master.x_dim);
  auto col_inst = [&](int i, int p) { return i * P + p; };
  auto col_hist = [&](int p) { return N * P + p; };
  auto col_mu_dp = [&](int i) { return N * P + P + i; };
  auto col_mu_e = [&](int i) { return N * P + P + N + i; };

  // alive[i] lists the ancestors of node i whose installs are still inside
  // their lifetime, per technology.
  std::vector<std::vector<std::vector<int>>> alive(
      N, std::vector<std::vector<int>>(P));
  for (int i = 0; i < N; ++i) {
    const auto path = tree.ancestors(i);
    for (int p = 0; p < P; ++p) {
      for (int a : path) {
        const double age_years =
            tree.kappa * (tree.nodes[i].stage - tree.nodes[a].stage);
        if (age_years <= techs[p].lifetime_years) alive[i][p].push_back(a);
      }
    }
  }

  for (int i = 0; i < N; ++i) {
    const TreeNode& node = tree.nodes[i];
    const double delta = tree.discount(node.stage);
    for (int p = 0; p < P; ++p) {
      const int jc = col_inst(i, p);
      master.var_names[jc] =
          "inst[" + std::to_string(i) + "][" + techs[p].name + "]";
      master.x_lower[jc] = 0.0;
      master.x_upper[jc] = techs[p].x_max;
      master.f_coeffs[jc] =
          delta * node.prob * techs[p].invest_cost(node.stage);
    }
    master.var_names[col_mu_dp(i)] = "mu_dp[" + std::to_string(i) + "]";
    master.x_lower[col_mu_dp(i)] = node.mu_dp;
    master.x_upper[col_mu_dp(i)] = node.mu_dp;
    master.var_names[col_mu_e(i)] = "mu_e[" + std::to_string(i) + "]";
    master.x_lower[col_mu_e(i)] = node.mu_e;
    master.x_upper[col_mu_e(i)] = node.mu_e;
  }
  // Fixed O&M applies to the whole accumulated capacity: spread it over the
  // installs that are alive at each node plus the historical base.
  for (int p = 0; p < P; ++p) {
    master.var_names[col_hist(p)] = "hist[" + techs[p].name + "]";
    master.x_lower[col_hist(p)] = techs[p].x_hist;
    master.x_upper[col_hist(p)] = techs[p].x_hist;
  }
  for (int i = 0; i < N; ++i) {
    const TreeNode& node = tree.nodes[i];
    const double fixw =
        tree.kappa * tree.discount(node.stage) * node.prob;
    for (int p = 0; p < P; ++p) {
      master.f_coeffs[col_hist(p)] += fixw * techs[p].c_fix;
      for (int a : alive[i][p]) {
        master.f_coeffs[col_inst(a, p)] += fixw * techs[p].c_fix;
      }
    }
  }
  // Accumulation cap (5d): hist + alive installs <= x_max.
  for (int i = 0; i < N; ++i) {
    for (int p = 0; p < P; ++p) {
      std::vector<std::pair<int, double>> entries{{col_hist(p), 1.0}};
      for (int a : alive[i][p]) entries.push_back({col_inst(a, p), 1.0});
      master.add_row(entries, RowSense::LessEqual, techs[p].x_max);
    }
  }

  StructuredProblem problem;
  problem.master = std::move(master);
  problem.sub = build_subproblem_template(data);

  for (int i = 0; i < N; ++i) {
    const TreeNode& node = tree.nodes[i];
    DecisionNode dn;
    dn.id = i;
    dn.label = "node" + std::to_string(i);
    // Operational weight: probability, discount, and the kappa years each
    // operational node represents.
    dn.pi = tree.kappa * tree.discount(node.stage) * node.prob;
    dn.cost = Eigen::VectorXd(2);
    dn.cost << 1.0, node.co2_tax;
    std::vector<Eigen::Triplet<double>> st;
    for (int p = 0; p < P; ++p) {
      st.emplace_back(p, col_hist(p), 1.0);
      for (int a : alive[i][p]) st.emplace_back(p, col_inst(a, p), 1.0);
    }
    st.emplace_back(P, col_mu_dp(i), -1.0);  // oriented encoding
    st.emplace_back(P + 1, col_mu_e(i), 1.0);
    dn.selector.resize(P + 2, problem.master.x_dim);
    dn.selector.setFromTriplets(st.begin(), st.end());
    problem.nodes.push_back(std::move(dn));
  }

  for (int p = 0; p < P; ++p) {
    built.root_install_columns.push_back(col_inst(0, p));
  }
  for (const auto& tech : techs) built.x_packing.push_back("acc:" + tech.name);
  built.x_packing.push_back("neg_demand_scale");
  built.x_packing.push_back("co2_budget");
  built.problem = std::move(problem);
  return built;
}

// ---------------------------------------------------------------------------
// Instance generators.
// ---------------------------------------------------------------------------

namespace {

std::vector<double> case_a_demand() {
  return {6000, 5000, 4400, 4000, 3650, 3350, 3050, 2800, 2550, 2350, 2150,
          2000};
}

TechnologyData make_thermal(const std::string& name, const std::string& region,
                            double c_inv, double c_op, double e_g) {
  TechnologyData t;
  t.name = name;
  t.kind = TechKind::Thermal;
  t.region = region;
  t.c_inv = c_inv;
  t.c_fix = 0.02 * c_inv;
  t.x_hist = 0.0;
  t.x_max = 12000.0;
  t.lifetime_years = 40.0;
  t.c_op = c_op;
  t.e_g = e_g;
  t.alpha_g = 1.0;
  return t;
}

}  // namespace

InstanceData make_toy_case(ToyCase which) {
  InstanceData data;
  data.tree.stages = 1;
  data.tree.kappa = 5.0;
  data.tree.root_co2_budget = 1e9;
  data.economics.discount_rate = 0.05;
  data.economics.shed_penalty = 5000.0;

  const auto demand = case_a_demand();
  const int T = static_cast<int>(demand.size());
  data.profile.slice_of.assign(T, 0);
  data.profile.hours.assign(T, 8760.0 / T);
  data.profile.weight.assign(T, 1.0);

  if (which == ToyCase::A) {
    data.name = "case_a";
    data.topology.regions = {"R1"};
    data.profile.demand["R1"] = demand;
    data.technologies.push_back(make_thermal("ocgt", "R1", 650000.0, 65.0, 0.45));
    data.technologies.push_back(
        make_thermal("diesel", "R1", 180000.0, 150.0, 0.55));
    return data;
  }

  // Cases B and C: two unconnected regions at 60% / 40% of Case A, with a
  // shared CO2 budget tight enough to couple them.
  data.name = which == ToyCase::B ? "case_b" : "case_c";
  data.topology.regions = {"R1", "R2"};
  std::vector<double> d1(T), d2(T);
  for (int t = 0; t < T; ++t) {
    d1[t] = 0.6 * demand[t];
    d2[t] = 0.4 * demand[t];
  }
  data.profile.demand["R1"] = d1;
  data.profile.demand["R2"] = d2;
  for (const auto& [region, tag] :
       std::vector<std::pair<std::string, std::string>>{{"R1", "_r1"},
                                                        {"R2", "_r2"}}) {
    data.technologies.push_back(
        make_thermal("ocgt" + tag, region, 650000.0, 65.0, 0.45));
    data.technologies.push_back(
        make_thermal("diesel" + tag, region, 180000.0, 150.0, 0.55));
  }
  // Budget sits 6% above the all-OCGT emission floor: binding enough to
  // couple the regions without forcing load shedding.
  data.tree.root_co2_budget = 1.438e7;

  if (which == ToyCase::C) {
    TechnologyData line;
    line.name = "link_r1_r2";
    line.kind = TechKind::Line;
    line.region_from = "R1";
    line.region_to = "R2";
    line.c_inv = 150000.0;
    line.c_fix = 3000.0;
    line.x_hist = 0.0;
    line.x_max = 4000.0;
    line.lifetime_years = 40.0;
    data.technologies.push_back(line);
  }
  return data;
}

BuiltModel generate_toy_case(ToyCase which) { return build(make_toy_case(which)); }

InstanceData make_synthetic(const SyntheticSpec& spec) {
  if (spec.regions < 1 || spec.regions > 3) {
    throw EngineError("make_synthetic: regions must be 1..3");
  }
  if (spec.uncertainties < 0 || spec.uncertainties > 3) {
    throw EngineError("make_synthetic: uncertainties must be 0..3");
  }
  std::mt19937 rng(spec.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  InstanceData data;
  data.name = "synthetic_s" + std::to_string(spec.stages) + "_u" +
              std::to_string(spec.uncertainties) + "_p" +
              std::to_string(spec.periods);
  data.economics.discount_rate = 0.05;
  data.economics.shed_penalty = 5000.0;

  const int T = spec.periods;
  const int n_slices = T >= 8 ? 2 : 1;
  const int per_slice = T / n_slices;
  data.profile.slice_of.resize(T);
  data.profile.hours.resize(T);
  data.profile.weight.resize(T);
  for (int t = 0; t < T; ++t) {
    const int slice = std::min(t / per_slice, n_slices - 1);
    data.profile.slice_of[t] = slice;
  }
  std::vector<int> slice_len(n_slices, 0);
  for (int t = 0; t < T; ++t) slice_len[data.profile.slice_of[t]]++;
  for (int t = 0; t < T; ++t) {
    const int slice = data.profile.slice_of[t];
    data.profile.hours[t] = 8760.0 / slice_len[slice];
    data.profile.weight[t] = 1.0 / n_slices;
  }

  const std::vector<std::string> all_regions{"R1", "R2", "R3"};
  const std::vector<double> region_scale{0.6, 0.4, 0.3};
  double total_demand_mwh = 0.0;
  for (int z = 0; z < spec.regions; ++z) {
    data.topology.regions.push_back(all_regions[z]);
    std::vector<double> series(T);
    for (int t = 0; t < T; ++t) {
      const int slice = data.profile.slice_of[t];
      const double tt =
          static_cast<double>(t % per_slice) / std::max(1, per_slice - 1);
      const double shape = 1.0 + 0.55 * std::cos(2.0 * M_PI * tt) +
                           0.12 * std::sin(4.0 * M_PI * tt + slice) +
                           0.08 * (unif(rng) - 0.5);
      series[t] = region_scale[z] * 4000.0 * std::max(0.25, shape);
      total_demand_mwh +=
          data.profile.weight[t] * data.profile.hours[t] * series[t];
    }
    data.profile.demand[all_regions[z]] = series;

    data.technologies.push_back(make_thermal(
        "ocgt_" + all_regions[z], all_regions[z], 650000.0, 65.0, 0.45));
    data.technologies.push_back(make_thermal(
        "diesel_" + all_regions[z], all_regions[z], 180000.0, 150.0, 0.75));
    data.technologies.back().alpha_g = 0.7;

    if (spec.with_renewable) {
      std::vector<double> cf(T);
      for (int t = 0; t < T; ++t) {
        const double tt =
            static_cast<double>(t % per_slice) / std::max(1, per_slice - 1);
        cf[t] = std::clamp(
            0.45 + 0.35 * std::sin(2.0 * M_PI * tt + z) + 0.15 * (unif(rng) - 0.5),
            0.0, 0.95);
      }
      const std::string col = "cf:wind_" + all_regions[z];
      data.profile.capacity_factor[col] = cf;
      TechnologyData wind;
      wind.name = "wind_" + all_regions[z];
      wind.kind = TechKind::Renewable;
      wind.region = all_regions[z];
      wind.c_inv = 900000.0;
      wind.c_fix = 20000.0;
      wind.x_max = 8000.0;
      wind.lifetime_years = 30.0;
      wind.cf_column = col;
      data.technologies.push_back(wind);
    }
    if (spec.with_storage) {
      TechnologyData batt;
      batt.name = "battery_" + all_regions[z];
      batt.kind = TechKind::Storage;
      batt.region = all_regions[z];
      batt.c_inv = 350000.0;
      batt.c_fix = 7000.0;
      batt.x_max = 3000.0;
      batt.lifetime_years = 20.0;
      batt.eta_se = 0.9;
      batt.gamma_se = 4.0;
      batt.c_s = 2.0;
      data.technologies.push_back(batt);
    }
  }
  if (spec.regions >= 2) {
    TechnologyData line;
    line.name = "link_r1_r2";
    line.kind = TechKind::Line;
    line.region_from = "R1";
    line.region_to = "R2";
    line.c_inv = 200000.0;
    line.c_fix = 4000.0;
    line.x_max = 3000.0;
    line.lifetime_years = 40.0;
    data.technologies.push_back(line);
  }

  // A budget between the all-OCGT and all-diesel emission levels binds the
  // CO2 constraint without forcing load shedding.
  data.tree.root_co2_budget = 0.58 * total_demand_mwh;
  data.tree.root_co2_tax = spec.uncertainties >= 3 ? 20.0 : 0.0;
  data.tree.stages = spec.stages;
  data.tree.kappa = 5.0;
  auto spread = [&](double lo, double hi) {
    std::vector<double> v(spec.outcomes_per_uncertainty);
    if (spec.outcomes_per_uncertainty == 1) {
      v[0] = 0.5 * (lo + hi);
      return v;
    }
    for (int k = 0; k < spec.outcomes_per_uncertainty; ++k) {
      v[k] = lo + (hi - lo) * k / (spec.outcomes_per_uncertainty - 1);
    }
    return v;
  };
  const int transitions = std::max(0, spec.stages - 1);
  if (spec.uncertainties >= 1) {
    data.tree.outcomes["co2_budget"] =
        std::vector<std::vector<double>>(transitions, spread(0.7, 1.3));
  }
  if (spec.uncertainties >= 2) {
    data.tree.outcomes["demand_scale"] =
        std::vector<std::vector<double>>(transitions, spread(0.88, 1.12));
  }
  if (spec.uncertainties >= 3) {
    data.tree.outcomes["co2_tax"] =
        std::vector<std::vector<double>>(transitions, spread(0.6, 1.8));
  }
  return data;
}

// ---------------------------------------------------------------------------
// Value of the stochastic solution.
// ---------------------------------------------------------------------------

namespace {

double solve_to_optimum(const BuiltModel& built, const LpBackend& backend,
                        const VssOptions& opts, Eigen::VectorXd* primal_x) {
  bool fits = true;
  LinearProgram mono;
  try {
    mono = assemble_monolithic(built.problem, opts.monolithic_cap);
  } catch (const SolverError&) {
    fits = false;
  }
  if (fits) {
    SolveOutcome out = backend.solve(mono, opts.solver);
    if (out.optimal()) {
      if (primal_x) *primal_x = out.primal.head(built.problem.master.x_dim);
      return out.objective;
    }
  }
  EngineConfig cfg;
  cfg.eps_percent = opts.eps_percent;
  cfg.threads = opts.threads;
  cfg.solver = opts.solver;
  cfg.stabilisation = StabilisationConfig{};
  cfg.stabilisation->gamma0 = 0.2;
  RunResult run = run_adaptive(built.problem, cfg, backend);
  if (!run.converged()) {
    throw EngineError("compute_vss: engine failed to converge (" +
                      std::string(to_string(run.status)) + ")");
  }
  if (primal_x) *primal_x = run.incumbent;
  return run.upper_bound;
}

}  // namespace

VssReport compute_vss(const InstanceData& data, const LpBackend& backend,
                      const VssOptions& opts) {
  VssReport report;
  BuiltModel stochastic = build(data);
  if (stochastic.tree.deterministic()) {
    // The expected-value problem is the problem itself; VSS vanishes by
    // definition and no re-solve can tell us otherwise.
    report.deterministic = true;
    report.stochastic_optimum =
        solve_to_optimum(stochastic, backend, opts, nullptr);
    report.eev_cost = report.stochastic_optimum;
    report.vss = 0.0;
    report.percent_of_optimum = 0.0;
    return report;
  }

  Eigen::VectorXd x_stochastic;
  report.stochastic_optimum =
      solve_to_optimum(stochastic, backend, opts, &x_stochastic);

  // Expected-value instance: each uncertainty collapses to its stage mean.
  InstanceData ev = data;
  for (auto& [name, lists] : ev.tree.outcomes) {
    for (auto& list : lists) {
      const double mean =
          std::accumulate(list.begin(), list.end(), 0.0) / list.size();
      list = {mean};
    }
  }
  BuiltModel ev_model = build(ev);
  Eigen::VectorXd x_ev;
  solve_to_optimum(ev_model, backend, opts, &x_ev);

  // Pin the first-stage installs of the stochastic problem to the EV plan.
  BuiltModel pinned = build(data);
  for (std::size_t k = 0; k < pinned.root_install_columns.size(); ++k) {
    const int col_sto = pinned.root_install_columns[k];
    const int col_ev = ev_model.root_install_columns[k];
    const double v = std::clamp(x_ev[col_ev], pinned.problem.master.x_lower[col_sto],
                                pinned.problem.master.x_upper[col_sto]);
    pinned.problem.master.x_lower[col_sto] = v;
    pinned.problem.master.x_upper[col_sto] = v;
  }
  report.eev_cost = solve_to_optimum(pinned, backend, opts, nullptr);
  report.vss = report.eev_cost - report.stochastic_optimum;
  report.percent_of_optimum =
      100.0 * report.vss / std::max(std::abs(report.stochastic_optimum), 1e-12);
  return report;
}

}  // namespace benderskit::power
