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

#include "benderskit/adaptive_oracles.hpp"

#include <cmath>
#include <fstream>
#include <map>

#include "benderskit/benders_standard.hpp"
#include "json.hpp"
#include "simplex.hpp"

namespace benderskit {
namespace {

void check_point(const SolvedPoint& p) {
  const double resid = std::abs(p.theta - p.c.dot(p.phi));
  if (resid > 1e-8 * (1.0 + std::abs(p.theta))) {
    throw OracleError("solved point violates theta = c'phi (residual " +
                      std::to_string(resid) + ")");
  }
}

}  // namespace

SolvedPointStore::SolvedPointStore(SolvedPoint seed) {
  check_point(seed);
  points_.push_back(std::move(seed));
}

bool SolvedPointStore::insert(SolvedPoint point, double dup_tol) {
  check_point(point);
  for (const auto& p : points_) {
    if ((p.x - point.x).lpNorm<Eigen::Infinity>() <= dup_tol &&
        (p.c - point.c).lpNorm<Eigen::Infinity>() <= dup_tol) {
      ++duplicates_skipped_;
      return false;
    }
  }
  points_.push_back(std::move(point));
  ++version_;
  return true;
}

namespace {

// The box point (lower bounds everywhere) attains the componentwise minimum
// of a selector row whenever the row's negative coefficients touch only
// pinned columns; when that point is also feasible in the master rows, the
// component infimum needs no LP at all.
bool feasible_in_master_rows(const MasterBlock& master,
                             const Eigen::VectorXd& x) {
  Eigen::VectorXd row_val = Eigen::VectorXd::Zero(master.num_rows());
  for (const auto& t : master.con_triplets) {
    row_val[t.row()] += t.value() * x[t.col()];
  }
  for (int r = 0; r < master.num_rows(); ++r) {
    const double tol = 1e-9 * (1.0 + std::abs(master.con_rhs[r]));
    switch (master.con_senses[r]) {
      case RowSense::LessEqual:
        if (row_val[r] > master.con_rhs[r] + tol) return false;
        break;
      case RowSense::GreaterEqual:
        if (row_val[r] < master.con_rhs[r] - tol) return false;
        break;
      case RowSense::Equal:
        if (std::abs(row_val[r] - master.con_rhs[r]) > tol) return false;
        break;
    }
  }
  return true;
}

}  // namespace

SolvedPointStore seed(const StructuredProblem& problem,
                      const LpBackend& backend, const SolverOptions& opts) {
  const int x_dim = problem.sub.x_dim();

  // Componentwise infimum of every node's view over the master feasible set.
  // One LP per distinct selector row; identical rows are solved once, and
  // rows whose box minimiser is feasible skip the LP entirely.
  LinearProgram master_lp;
  problem.master.append_to(master_lp);
  for (int j = 0; j < master_lp.num_vars(); ++j) master_lp.set_cost(j, 0.0);
  const bool lower_point_feasible =
      feasible_in_master_rows(problem.master, problem.master.x_lower);

  Eigen::VectorXd x_min = Eigen::VectorXd::Constant(x_dim, kInf);
  std::map<std::vector<std::pair<int, double>>, double> seen;
  for (const auto& node : problem.nodes) {
    Eigen::SparseMatrix<double, Eigen::RowMajor> sel(node.selector);
    for (int k = 0; k < x_dim; ++k) {
      std::vector<std::pair<int, double>> row;
      bool box_exact = lower_point_feasible;
      double box_value = 0.0;
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(sel,
                                                                          k);
           it; ++it) {
        const int col = static_cast<int>(it.col());
        row.push_back({col, it.value()});
        const bool pinned =
            problem.master.x_lower[col] == problem.master.x_upper[col];
        if (it.value() < 0.0 && !pinned) box_exact = false;
        box_value += it.value() * problem.master.x_lower[col];
      }
      if (box_exact) {
        x_min[k] = std::min(x_min[k], box_value);
        continue;
      }
      auto found = seen.find(row);
      double value;
      if (found != seen.end()) {
        value = found->second;
      } else {
        for (int j = 0; j < master_lp.num_vars(); ++j) {
          master_lp.set_cost(j, 0.0);
        }
        for (const auto& [j, v] : row) master_lp.set_cost(j, v);
        SolveOutcome out = backend.solve(master_lp, opts);
        if (!out.optimal()) {
          throw OracleError(std::string("seed: component infimum LP ") +
                            to_string(out.status));
        }
        value = out.objective;
        seen.emplace(std::move(row), value);
      }
      x_min[k] = std::min(x_min[k], value);
    }
  }
  // Small safety margin keeps x_min <= node_view(x) despite solver tolerance.
  for (int k = 0; k < x_dim; ++k) {
    x_min[k] -= 1e-9 * (1.0 + std::abs(x_min[k]));
  }

  Eigen::VectorXd c_min = problem.nodes.front().cost;
  for (const auto& node : problem.nodes) {
    c_min = c_min.cwiseMin(node.cost);
  }

  ExactEvaluation ev =
      evaluate_exact(problem.sub, c_min, x_min, backend, opts);
  return SolvedPointStore(SolvedPoint{x_min, c_min, ev.theta, ev.lam, ev.phi});
}

std::pair<double, Eigen::VectorXd> lower_oracle(const SolvedPointStore& store,
                                                const Eigen::VectorXd& x_hat,
                                                const Eigen::VectorXd& c_hat,
                                                const LpBackend& backend,
                                                const SolverOptions& opts_in) {
  // The multiplier LPs are tiny; drive them well past the caller tolerance
  // so oracle noise stays negligible against subproblem solves.
  SolverOptions opts = opts_in;
  opts.tolerance = std::min(opts.tolerance, 1e-10);
  const auto& pts = store.points();
  const int cost_dim = static_cast<int>(c_hat.size());
  const double ctol = 1e-9 * (1.0 + c_hat.lpNorm<Eigen::Infinity>());
  for (int m = 0; m < cost_dim; ++m) {
    if (c_hat[m] < -ctol || c_hat[m] < store.c_min()[m] - ctol) {
      throw OracleError(
          "lower_oracle: query cost is not dominated by the seed cost "
          "(component " +
          std::to_string(m) + ")");
    }
  }

  LinearProgram lp;
  for (const auto& p : pts) {
    const double gain = p.theta + p.lam.dot(x_hat - p.x);
    lp.add_variable(0.0, kInf, -gain);
  }
  for (int m = 0; m < cost_dim; ++m) {
    std::vector<std::pair<int, double>> entries;
    for (int k = 0; k < static_cast<int>(pts.size()); ++k) {
      entries.push_back({k, pts[k].c[m]});
    }
    lp.add_row(entries, RowSense::LessEqual, c_hat[m]);
  }
  SolveOutcome out = backend.solve(lp, opts);
  if (out.status == SolveStatus::Infeasible) {
    throw OracleError("lower_oracle: multiplier LP infeasible (seed cost "
                      "does not dominate the query)");
  }
  if (out.status == SolveStatus::NumericalFailure) {
    // Valid fallback: the best single stored point whose cost the query
    // dominates (u restricted to unit vectors), floored at u = 0.
    double best = 0.0;
    Eigen::VectorXd lam = Eigen::VectorXd::Zero(x_hat.size());
    for (const auto& p : pts) {
      if (((p.c - c_hat).array() <= ctol).all()) {
        const double gain = p.theta + p.lam.dot(x_hat - p.x);
        if (gain > best) {
          best = gain;
          lam = p.lam;
        }
      }
    }
    return {best, std::move(lam)};
  }
  if (!out.optimal()) {
    throw OracleError(std::string("lower_oracle: LP ") +
                      to_string(out.status) + " (" + out.message + ")");
  }
  Eigen::VectorXd lam = Eigen::VectorXd::Zero(x_hat.size());
  for (int k = 0; k < static_cast<int>(pts.size()); ++k) {
    if (out.primal[k] > 0.0) lam += out.primal[k] * pts[k].lam;
  }
  // u = 0 is feasible with value 0, so the true optimum is nonnegative;
  // clip solver noise accordingly.
  return {std::max(-out.objective, 0.0), std::move(lam)};
}

std::pair<double, Eigen::VectorXd> upper_oracle(const SolvedPointStore& store,
                                                const Eigen::VectorXd& x_hat,
                                                const Eigen::VectorXd& c_hat,
                                                const LpBackend& backend,
                                                const SolverOptions& opts_in) {
  SolverOptions opts = opts_in;
  opts.tolerance = std::min(opts.tolerance, 1e-10);
  const auto& pts = store.points();
  const double xtol = 1e-7 * (1.0 + x_hat.lpNorm<Eigen::Infinity>());
  for (int d = 0; d < x_hat.size(); ++d) {
    if (store.x_min()[d] > x_hat[d] + xtol) {
      throw OracleError(
          "upper_oracle: query point is not dominated by the seed point "
          "(component " +
          std::to_string(d) + ")");
    }
  }

  LinearProgram lp;
  for (const auto& p : pts) {
    lp.add_variable(0.0, kInf, c_hat.dot(p.phi));
  }
  for (int d = 0; d < x_hat.size(); ++d) {
    std::vector<std::pair<int, double>> entries;
    for (int k = 0; k < static_cast<int>(pts.size()); ++k) {
      entries.push_back({k, pts[k].x[d]});
    }
    lp.add_row(entries, RowSense::LessEqual, x_hat[d]);
  }
  {
    std::vector<std::pair<int, double>> ones;
    for (int k = 0; k < static_cast<int>(pts.size()); ++k) {
      ones.push_back({k, 1.0});
    }
    lp.add_row(ones, RowSense::Equal, 1.0);
  }
  SolveOutcome out = backend.solve(lp, opts);
  if (out.status == SolveStatus::Infeasible) {
    throw OracleError("upper_oracle: combination LP infeasible (seed point "
                      "does not dominate the query)");
  }
  if (out.status == SolveStatus::NumericalFailure) {
    // Valid fallback: the cheapest single dominated stored point (the seed
    // qualifies whenever the query is admissible).
    int best = -1;
    double best_val = kInf;
    for (int k = 0; k < static_cast<int>(pts.size()); ++k) {
      if (((pts[k].x - x_hat).array() <= xtol).all()) {
        const double val = c_hat.dot(pts[k].phi);
        if (val < best_val) {
          best = k;
          best_val = val;
        }
      }
    }
    if (best >= 0) return {best_val, pts[best].phi};
    std::string detail = "upper_oracle: no dominated stored point (lp: " +
                         out.message + ");";
    for (int d = 0; d < x_hat.size(); ++d) {
      if (store.x_min()[d] > x_hat[d] + xtol) {
        detail += " comp " + std::to_string(d) + " seed " +
                  std::to_string(store.x_min()[d]) + " > query " +
                  std::to_string(x_hat[d]);
      }
    }
    throw OracleError(detail);
  }
  if (!out.optimal()) {
    throw OracleError(std::string("upper_oracle: LP ") +
                      to_string(out.status) + " (" + out.message + ")");
  }
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(pts.front().phi.size());
  for (int k = 0; k < static_cast<int>(pts.size()); ++k) {
    if (out.primal[k] > 0.0) phi += out.primal[k] * pts[k].phi;
  }
  return {out.objective, std::move(phi)};
}

OracleAnswer query_oracles(const SolvedPointStore& store,
                           const Eigen::VectorXd& x_hat,
                           const Eigen::VectorXd& c_hat,
                           const LpBackend& backend,
                           const SolverOptions& opts) {
  OracleAnswer ans;
  auto [lo, lam] = lower_oracle(store, x_hat, c_hat, backend, opts);
  auto [hi, phi] = upper_oracle(store, x_hat, c_hat, backend, opts);
  // The sandwich holds mathematically; solver noise must not flip it.
  ans.theta_lo = std::min(lo, hi);
  ans.lam_lo = std::move(lam);
  ans.theta_hi = hi;
  ans.phi_hi = std::move(phi);
  return ans;
}

struct OracleBatch::Impl {
  const LpBackend& backend;
  SolverOptions opts;
  long version = -1;
  std::unique_ptr<PreparedSimplex> lower, upper;
  int cost_dim = 0, x_dim = 0, points = 0;
};

OracleBatch::OracleBatch(const LpBackend& backend, SolverOptions opts)
    : impl_(new Impl{backend, std::move(opts)}) {
  impl_->opts.tolerance = std::min(impl_->opts.tolerance, 1e-10);
}

OracleBatch::~OracleBatch() = default;

OracleAnswer OracleBatch::query(const SolvedPointStore& store,
                                const Eigen::VectorXd& x_hat,
                                const Eigen::VectorXd& c_hat) {
  Impl& im = *impl_;
  const auto& pts = store.points();
  const int K = static_cast<int>(pts.size());
  if (im.version != store.version()) {
    im.version = store.version();
    im.cost_dim = static_cast<int>(pts.front().c.size());
    im.x_dim = static_cast<int>(pts.front().x.size());
    im.points = K;
    {
      LinearProgram lp;
      for (int k = 0; k < K; ++k) lp.add_variable(0.0, kInf, 0.0);
      for (int m = 0; m < im.cost_dim; ++m) {
        std::vector<std::pair<int, double>> entries;
        for (int k = 0; k < K; ++k) entries.push_back({k, pts[k].c[m]});
        lp.add_row(entries, RowSense::LessEqual, 0.0);
      }
      im.lower = std::make_unique<PreparedSimplex>(lp);
    }
    {
      LinearProgram lp;
      for (int k = 0; k < K; ++k) lp.add_variable(0.0, kInf, 0.0);
      for (int d = 0; d < im.x_dim; ++d) {
        std::vector<std::pair<int, double>> entries;
        for (int k = 0; k < K; ++k) entries.push_back({k, pts[k].x[d]});
        lp.add_row(entries, RowSense::LessEqual, 0.0);
      }
      std::vector<std::pair<int, double>> ones;
      for (int k = 0; k < K; ++k) ones.push_back({k, 1.0});
      lp.add_row(ones, RowSense::Equal, 1.0);
      im.upper = std::make_unique<PreparedSimplex>(lp);
    }
  }

  // Preconditions, as in the one-shot oracles.
  const double ctol = 1e-9 * (1.0 + c_hat.lpNorm<Eigen::Infinity>());
  for (int m = 0; m < im.cost_dim; ++m) {
    if (c_hat[m] < -ctol || c_hat[m] < store.c_min()[m] - ctol) {
      throw OracleError("lower_oracle: query cost is not dominated by the "
                        "seed cost (component " + std::to_string(m) + ")");
    }
  }
  const double xtol = 1e-7 * (1.0 + x_hat.lpNorm<Eigen::Infinity>());
  for (int d = 0; d < im.x_dim; ++d) {
    if (store.x_min()[d] > x_hat[d] + xtol) {
      throw OracleError("upper_oracle: query point is not dominated by the "
                        "seed point (component " + std::to_string(d) + ")");
    }
  }

  OracleAnswer ans;
  bool lower_done = false, upper_done = false;
  {
    Eigen::VectorXd gains(K);
    for (int k = 0; k < K; ++k) {
      gains[k] = -(pts[k].theta + pts[k].lam.dot(x_hat - pts[k].x));
    }
    SolveOutcome out = im.lower->resolve(c_hat, gains, im.opts);
    if (out.optimal()) {
      Eigen::VectorXd lam = Eigen::VectorXd::Zero(im.x_dim);
      for (int k = 0; k < K; ++k) {
        if (out.primal[k] > 0.0) lam += out.primal[k] * pts[k].lam;
      }
      ans.theta_lo = std::max(-out.objective, 0.0);
      ans.lam_lo = std::move(lam);
      lower_done = true;
    }
  }
  {
    Eigen::VectorXd rhs(im.x_dim + 1);
    rhs.head(im.x_dim) = x_hat;
    rhs[im.x_dim] = 1.0;
    Eigen::VectorXd cost(K);
    for (int k = 0; k < K; ++k) cost[k] = c_hat.dot(pts[k].phi);
    SolveOutcome out = im.upper->resolve(rhs, cost, im.opts);
    if (out.optimal()) {
      Eigen::VectorXd phi = Eigen::VectorXd::Zero(pts.front().phi.size());
      for (int k = 0; k < K; ++k) {
        if (out.primal[k] > 0.0) phi += out.primal[k] * pts[k].phi;
      }
      ans.theta_hi = out.objective;
      ans.phi_hi = std::move(phi);
      upper_done = true;
    }
  }
  if (!lower_done) {
    auto [lo, lam] = lower_oracle(store, x_hat, c_hat, im.backend, im.opts);
    ans.theta_lo = lo;
    ans.lam_lo = std::move(lam);
  }
  if (!upper_done) {
    auto [hi, phi] = upper_oracle(store, x_hat, c_hat, im.backend, im.opts);
    ans.theta_hi = hi;
    ans.phi_hi = std::move(phi);
  }
  ans.theta_lo = std::min(ans.theta_lo, ans.theta_hi);
  return ans;
}

void save_store(const SolvedPointStore& store, const std::string& path) {
  nlohmann::json doc;
  doc["format"] = "benderskit-store";
  doc["version"] = 1;
  auto vec = [](const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
  };
  for (const auto& p : store.points()) {
    doc["points"].push_back({{"x", vec(p.x)},
                             {"c", vec(p.c)},
                             {"theta", p.theta},
                             {"lam", vec(p.lam)},
                             {"phi", vec(p.phi)}});
  }
  std::ofstream os(path);
  if (!os) throw OracleError("save_store: cannot open " + path);
  os << doc.dump(2) << "\n";
}

SolvedPointStore load_store(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw OracleError("load_store: cannot open " + path);
  nlohmann::json doc = nlohmann::json::parse(is);
  if (doc.value("format", "") != "benderskit-store" ||
      doc.value("version", 0) != 1) {
    throw OracleError("load_store: unrecognised checkpoint header");
  }
  auto vec = [](const nlohmann::json& a) {
    Eigen::VectorXd v(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) v[i] = a[i].get<double>();
    return v;
  };
  std::unique_ptr<SolvedPointStore> store;
  for (const auto& jp : doc.at("points")) {
    SolvedPoint p{vec(jp.at("x")), vec(jp.at("c")), jp.at("theta").get<double>(),
                  vec(jp.at("lam")), vec(jp.at("phi"))};
    if (!store) {
      store = std::make_unique<SolvedPointStore>(std::move(p));
    } else {
      store->insert(std::move(p));
    }
  }
  if (!store) throw OracleError("load_store: checkpoint has no points");
  return *store;
}

}  // namespace benderskit
