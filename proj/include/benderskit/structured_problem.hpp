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

#ifndef BENDERSKIT_STRUCTURED_PROBLEM_HPP_
#define BENDERSKIT_STRUCTURED_PROBLEM_HPP_

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <string>
#include <vector>

#include "benderskit/lp.hpp"

namespace benderskit {

/// The shared subproblem data for
///   g(x_i, c_i) = min { c_i' C y : A y (<=/=) B x_i, yl <= y <= yu }.
/// Every decision node uses this template verbatim; nodes differ only in
/// their probability weight, cost vector c_i and selector into the master.
/// Equality rows are stored as such rather than as +/- inequality pairs:
/// paired rows make the dual face unbounded and wreck interior-point duals.
struct SubproblemTemplate {
  Eigen::SparseMatrix<double> A;  // con_dim x y_dim
  Eigen::SparseMatrix<double> B;  // con_dim x x_dim
  Eigen::SparseMatrix<double> C;  // cost_dim x y_dim
  Eigen::VectorXd y_lower, y_upper;
  std::vector<RowSense> senses;  // empty means every row is <=

  int y_dim() const { return static_cast<int>(A.cols()); }
  int con_dim() const { return static_cast<int>(A.rows()); }
  int x_dim() const { return static_cast<int>(B.cols()); }
  int cost_dim() const { return static_cast<int>(C.rows()); }
  RowSense sense(int r) const {
    return senses.empty() ? RowSense::LessEqual : senses[r];
  }
};

struct DecisionNode {
  int id = 0;
  double pi = 1.0;                          // weight, > 0
  Eigen::VectorXd cost;                     // c_i, length cost_dim
  Eigen::SparseMatrix<double> selector;     // x_dim x master_dim, linear
  std::string label;
};

/// Master block: min f'x over the polyhedron {lx <= x <= ux, rows hold}.
/// The feasible set must be nonempty and bounded.
struct MasterBlock {
  int x_dim = 0;
  Eigen::VectorXd f_coeffs;
  std::vector<Eigen::Triplet<double>> con_triplets;
  std::vector<RowSense> con_senses;
  std::vector<double> con_rhs;
  Eigen::VectorXd x_lower, x_upper;
  std::vector<std::string> var_names;  // optional, parallel to columns

  int num_rows() const { return static_cast<int>(con_rhs.size()); }
  void add_row(const std::vector<std::pair<int, double>>& entries,
               RowSense sense, double rhs);
  // Appends the master variables + feasible-set rows to an LP being built.
  // Returns the index of the first master column in the LP.
  int append_to(LinearProgram& lp) const;
};

struct StructuredProblem {
  MasterBlock master;
  SubproblemTemplate sub;
  std::vector<DecisionNode> nodes;

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  double master_objective(const Eigen::VectorXd& x) const {
    return master.f_coeffs.dot(x);
  }
};

struct ValidationReport {
  std::vector<std::string> issues;
  bool ok() const { return issues.empty(); }
  std::string str() const;
};

// Report-style structural validation; never throws.
ValidationReport validate(const StructuredProblem& problem);

// Applies the node's selector to a master vector. Pure and linear.
Eigen::VectorXd node_view(const Eigen::VectorXd& x, const DecisionNode& node);

/// Assembles the undecomposed LP over (x, y_0, ..., y_{N-1}). This is the
/// desk-scale verification oracle; it refuses instances whose assembled
/// nonzero count exceeds the cap.
LinearProgram assemble_monolithic(const StructuredProblem& problem,
                                  std::size_t max_nonzeros = 5'000'000);

}  // namespace benderskit

#endif  // BENDERSKIT_STRUCTURED_PROBLEM_HPP_
