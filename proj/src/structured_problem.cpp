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

#include "benderskit/structured_problem.hpp"

#include <cmath>
#include <sstream>
#include <unordered_set>

namespace benderskit {

void MasterBlock::add_row(const std::vector<std::pair<int, double>>& entries,
                          RowSense sense, double rhs) {
  const int r = num_rows();
  for (const auto& [j, v] : entries) {
    if (v != 0.0) con_triplets.emplace_back(r, j, v);
  }
  con_senses.push_back(sense);
  con_rhs.push_back(rhs);
}

int MasterBlock::append_to(LinearProgram& lp) const {
  const int base = lp.num_vars();
  for (int j = 0; j < x_dim; ++j) {
    lp.add_variable(x_lower[j], x_upper[j], f_coeffs[j],
                    j < static_cast<int>(var_names.size()) ? var_names[j]
                                                           : std::string{});
  }
  std::vector<std::vector<std::pair<int, double>>> rows(num_rows());
  for (const auto& t : con_triplets) {
    rows[t.row()].push_back({base + t.col(), t.value()});
  }
  for (int r = 0; r < num_rows(); ++r) {
    lp.add_row(rows[r], con_senses[r], con_rhs[r]);
  }
  return base;
}

std::string ValidationReport::str() const {
  std::ostringstream os;
  for (const auto& s : issues) os << s << "\n";
  return os.str();
}

ValidationReport validate(const StructuredProblem& problem) {
  ValidationReport rep;
  auto flag = [&rep](const std::string& msg) { rep.issues.push_back(msg); };

  const auto& sub = problem.sub;
  if (sub.A.rows() != sub.B.rows()) {
    flag("template: A and B disagree on constraint count");
  }
  if (sub.C.cols() != sub.A.cols()) {
    flag("template: C column count does not match y dimension");
  }
  if (!sub.senses.empty() &&
      static_cast<int>(sub.senses.size()) != sub.con_dim()) {
    flag("template: row sense vector does not match constraint count");
  }
  if (sub.y_lower.size() != sub.A.cols() ||
      sub.y_upper.size() != sub.A.cols()) {
    flag("template: y bound vectors do not match y dimension");
  } else {
    for (int j = 0; j < sub.y_dim(); ++j) {
      if (sub.y_lower[j] > sub.y_upper[j]) {
        flag("template: y bound " + std::to_string(j) + " has lower > upper");
      }
    }
  }

  const auto& master = problem.master;
  if (master.f_coeffs.size() != master.x_dim ||
      master.x_lower.size() != master.x_dim ||
      master.x_upper.size() != master.x_dim) {
    flag("master: vector sizes do not match x_dim");
  } else {
    for (int j = 0; j < master.x_dim; ++j) {
      if (master.x_lower[j] > master.x_upper[j]) {
        flag("master: bound " + std::to_string(j) + " has lower > upper");
      }
      if (!std::isfinite(master.x_lower[j]) ||
          !std::isfinite(master.x_upper[j])) {
        flag("master: variable " + std::to_string(j) +
             " lacks finite bounds (feasible set must be bounded)");
      }
    }
  }

  std::unordered_set<int> ids;
  for (const auto& node : problem.nodes) {
    const std::string tag = "node " + std::to_string(node.id) + ": ";
    if (!ids.insert(node.id).second) flag(tag + "duplicate id");
    if (node.id < 0 || node.id >= problem.num_nodes()) {
      flag(tag + "id outside dense range 0..N-1");
    }
    if (!(node.pi > 0.0)) flag(tag + "non-positive probability weight");
    if (node.cost.size() != sub.cost_dim()) {
      flag(tag + "cost vector length does not match template cost rows");
    }
    if (node.selector.rows() != sub.x_dim()) {
      flag(tag + "selector output dimension does not match template x_dim");
    }
    if (node.selector.cols() != master.x_dim) {
      flag(tag + "selector input dimension does not match master x_dim");
    }
  }
  return rep;
}

Eigen::VectorXd node_view(const Eigen::VectorXd& x, const DecisionNode& node) {
  if (x.size() != node.selector.cols()) {
    throw std::invalid_argument("node_view: master vector has wrong dimension");
  }
  return node.selector * x;
}

LinearProgram assemble_monolithic(const StructuredProblem& problem,
                                  std::size_t max_nonzeros) {
  const auto& sub = problem.sub;

  std::size_t nnz = problem.master.con_triplets.size();
  for (const auto& node : problem.nodes) {
    nnz += static_cast<std::size_t>(sub.A.nonZeros()) +
           static_cast<std::size_t>(sub.B.nonZeros()) +
           static_cast<std::size_t>(node.selector.nonZeros());
  }
  if (nnz > max_nonzeros) {
    throw SolverError("assemble_monolithic: instance exceeds nonzero cap (" +
                      std::to_string(nnz) + " > " +
                      std::to_string(max_nonzeros) + ")");
  }

  LinearProgram lp;
  problem.master.append_to(lp);

  for (const auto& node : problem.nodes) {
    const int ybase = lp.num_vars();
    const Eigen::VectorXd ycost = node.pi * (sub.C.transpose() * node.cost);
    for (int j = 0; j < sub.y_dim(); ++j) {
      lp.add_variable(sub.y_lower[j], sub.y_upper[j], ycost[j],
                      "y" + std::to_string(node.id) + "_" + std::to_string(j));
    }
    // A y_i - (B S_i) x <= 0
    Eigen::SparseMatrix<double> coupling = sub.B * node.selector;
    std::vector<std::vector<std::pair<int, double>>> rows(sub.con_dim());
    for (int j = 0; j < sub.A.outerSize(); ++j) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(sub.A, j); it; ++it) {
        rows[it.row()].push_back(
            {ybase + static_cast<int>(it.col()), it.value()});
      }
    }
    for (int j = 0; j < coupling.outerSize(); ++j) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(coupling, j); it;
           ++it) {
        rows[it.row()].push_back({static_cast<int>(it.col()), -it.value()});
      }
    }
    for (int r = 0; r < sub.con_dim(); ++r) {
      lp.add_row(rows[r], sub.sense(r), 0.0);
    }
  }
  return lp;
}

}  // namespace benderskit
