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

#ifndef BENDERSKIT_LP_HPP_
#define BENDERSKIT_LP_HPP_

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace benderskit {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class RowSense { LessEqual, Equal, GreaterEqual };

enum class SolveStatus { Optimal, Infeasible, Unbounded, NumericalFailure };

const char* to_string(SolveStatus s);
const char* to_string(RowSense s);

/// A linear (optionally convex-quadratic) program in the form
///
///   min  0.5 x'Qx + c'x + c0
///   s.t. a_r'x {<=,=,>=} b_r   for each row r
///        l <= x <= u
///
/// Q must be symmetric PSD; only the LMP uses it. Rows and variables are
/// appended through the builder methods and keep their insertion order.
class LinearProgram {
 public:
  int add_variable(double lower, double upper, double cost,
                   std::string name = {});
  // Entries may repeat a column; repeated entries are summed.
  int add_row(const std::vector<std::pair<int, double>>& entries,
              RowSense sense, double rhs);
  // Adds q to Q(j,j). Contributes 0.5*q*x_j^2 to the objective.
  void add_quadratic_diagonal(int j, double q);
  // Adds q to Q(i,j) and Q(j,i).
  void add_quadratic(int i, int j, double q);

  void set_cost(int j, double cost) { cost_.at(j) = cost; }
  void set_bounds(int j, double lower, double upper);
  void set_objective_constant(double c0) { objective_constant_ = c0; }

  int num_vars() const { return static_cast<int>(cost_.size()); }
  int num_rows() const { return static_cast<int>(rhs_.size()); }
  bool has_quadratic() const { return !quad_.empty(); }

  double cost(int j) const { return cost_[j]; }
  double lower(int j) const { return lower_[j]; }
  double upper(int j) const { return upper_[j]; }
  double rhs(int r) const { return rhs_[r]; }
  RowSense sense(int r) const { return senses_[r]; }
  double objective_constant() const { return objective_constant_; }
  const std::string& var_name(int j) const { return names_[j]; }

  Eigen::VectorXd cost_vector() const;
  Eigen::VectorXd lower_vector() const;
  Eigen::VectorXd upper_vector() const;
  Eigen::VectorXd rhs_vector() const;
  const std::vector<RowSense>& senses() const { return senses_; }
  // m x n row-wise constraint matrix.
  Eigen::SparseMatrix<double> constraint_matrix() const;
  // n x n symmetric Q (both triangles populated).
  Eigen::SparseMatrix<double> quadratic_matrix() const;

  // Objective value of a candidate point (no feasibility check).
  double objective_value(const Eigen::VectorXd& x) const;

 private:
  std::vector<double> cost_, lower_, upper_, rhs_;
  std::vector<RowSense> senses_;
  std::vector<Eigen::Triplet<double>> rows_;
  std::vector<Eigen::Triplet<double>> quad_;  // lower triangle, i >= j
  std::vector<std::string> names_;
  double objective_constant_ = 0.0;
};

struct SolverOptions {
  double tolerance = 1e-8;   // relative feasibility/optimality target
  int max_iterations = 300;  // interior-point iteration cap
  bool verbose = false;
  std::string dump_lp_path;  // when nonempty, write the model before solving
  // Routing hint for the built-in backend: vertex-hungry cutting-plane
  // masters favour the simplex, large sparse recourse models the
  // interior-point method. Auto picks by size.
  enum class Method { Auto, Simplex, InteriorPoint };
  Method method = Method::Auto;
};

struct SolveOutcome {
  SolveStatus status = SolveStatus::NumericalFailure;
  double objective = std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXd primal;
  // One multiplier per row, in insertion order. Convention: dual = d(obj)/d(rhs),
  // so for a minimisation <= rows have dual <= 0 and >= rows have dual >= 0.
  Eigen::VectorXd row_duals;
  double wall_time_s = 0.0;
  int iterations = 0;
  std::string message;

  bool optimal() const { return status == SolveStatus::Optimal; }
};

// Writes the model in CPLEX LP text format (debug aid).
void write_lp_file(const LinearProgram& lp, std::ostream& os);
void write_lp_file(const LinearProgram& lp, const std::string& path);

class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace benderskit

#endif  // BENDERSKIT_LP_HPP_
