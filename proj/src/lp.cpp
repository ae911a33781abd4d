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

#include "benderskit/lp.hpp"

#include <cmath>
#include <fstream>

namespace benderskit {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal:
      return "optimal";
    case SolveStatus::Infeasible:
      return "infeasible";
    case SolveStatus::Unbounded:
      return "unbounded";
    case SolveStatus::NumericalFailure:
      return "numerical_failure";
  }
  return "?";
}

const char* to_string(RowSense s) {
  switch (s) {
    case RowSense::LessEqual:
      return "<=";
    case RowSense::Equal:
      return "=";
    case RowSense::GreaterEqual:
      return ">=";
  }
  return "?";
}

int LinearProgram::add_variable(double lower, double upper, double cost,
                                std::string name) {
  if (std::isnan(lower) || std::isnan(upper)) {
    throw SolverError("NaN variable bound");
  }
  cost_.push_back(cost);
  lower_.push_back(lower);
  upper_.push_back(upper);
  names_.push_back(std::move(name));
  return num_vars() - 1;
}

int LinearProgram::add_row(const std::vector<std::pair<int, double>>& entries,
                           RowSense sense, double rhs) {
  const int r = num_rows();
  for (const auto& [j, v] : entries) {
    if (j < 0 || j >= num_vars()) throw SolverError("row entry out of range");
    if (v != 0.0) rows_.emplace_back(r, j, v);
  }
  senses_.push_back(sense);
  rhs_.push_back(rhs);
  return r;
}

void LinearProgram::add_quadratic_diagonal(int j, double q) {
  if (j < 0 || j >= num_vars()) throw SolverError("quad index out of range");
  if (q != 0.0) quad_.emplace_back(j, j, q);
}

void LinearProgram::add_quadratic(int i, int j, double q) {
  if (i < 0 || i >= num_vars() || j < 0 || j >= num_vars()) {
    throw SolverError("quad index out of range");
  }
  if (q == 0.0) return;
  if (i == j) {
    quad_.emplace_back(i, i, 2.0 * q);  // both triangles collapse
  } else {
    quad_.emplace_back(std::max(i, j), std::min(i, j), q);
  }
}

void LinearProgram::set_bounds(int j, double lower, double upper) {
  lower_.at(j) = lower;
  upper_.at(j) = upper;
}

Eigen::VectorXd LinearProgram::cost_vector() const {
  return Eigen::Map<const Eigen::VectorXd>(cost_.data(), cost_.size());
}
Eigen::VectorXd LinearProgram::lower_vector() const {
  return Eigen::Map<const Eigen::VectorXd>(lower_.data(), lower_.size());
}
Eigen::VectorXd LinearProgram::upper_vector() const {
  return Eigen::Map<const Eigen::VectorXd>(upper_.data(), upper_.size());
}
Eigen::VectorXd LinearProgram::rhs_vector() const {
  return Eigen::Map<const Eigen::VectorXd>(rhs_.data(), rhs_.size());
}

Eigen::SparseMatrix<double> LinearProgram::constraint_matrix() const {
  Eigen::SparseMatrix<double> a(num_rows(), num_vars());
  a.setFromTriplets(rows_.begin(), rows_.end());
  a.makeCompressed();
  return a;
}

Eigen::SparseMatrix<double> LinearProgram::quadratic_matrix() const {
  std::vector<Eigen::Triplet<double>> sym;
  sym.reserve(2 * quad_.size());
  for (const auto& t : quad_) {
    sym.push_back(t);
    if (t.row() != t.col()) sym.emplace_back(t.col(), t.row(), t.value());
  }
  Eigen::SparseMatrix<double> q(num_vars(), num_vars());
  q.setFromTriplets(sym.begin(), sym.end());
  q.makeCompressed();
  return q;
}

double LinearProgram::objective_value(const Eigen::VectorXd& x) const {
  double obj = objective_constant_ + cost_vector().dot(x);
  for (const auto& t : quad_) {
    const double term = t.value() * x[t.row()] * x[t.col()];
    obj += (t.row() == t.col()) ? 0.5 * term : term;
  }
  return obj;
}

namespace {
std::string lp_var_name(const LinearProgram& lp, int j) {
  const std::string& n = lp.var_name(j);
  return n.empty() ? "x" + std::to_string(j) : n;
}
}  // namespace

void write_lp_file(const LinearProgram& lp, std::ostream& os) {
  os << "\\ benderskit model dump\nMinimize\n obj:";
  for (int j = 0; j < lp.num_vars(); ++j) {
    if (lp.cost(j) == 0.0) continue;
    os << (lp.cost(j) >= 0 ? " + " : " - ") << std::abs(lp.cost(j)) << " "
       << lp_var_name(lp, j);
  }
  if (lp.has_quadratic()) {
    os << " + [";
    auto q = lp.quadratic_matrix();
    bool first = true;
    for (int j = 0; j < q.outerSize(); ++j) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(q, j); it; ++it) {
        if (it.row() < it.col()) continue;
        if (!first) os << " +";
        first = false;
        os << " " << it.value() << " " << lp_var_name(lp, it.row()) << " * "
           << lp_var_name(lp, it.col());
      }
    }
    os << " ] / 2";
  }
  os << "\nSubject To\n";
  auto a = lp.constraint_matrix();
  Eigen::SparseMatrix<double, Eigen::RowMajor> ar(a);
  for (int r = 0; r < lp.num_rows(); ++r) {
    os << " c" << r << ":";
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(ar, r);
         it; ++it) {
      os << (it.value() >= 0 ? " + " : " - ") << std::abs(it.value()) << " "
         << lp_var_name(lp, it.col());
    }
    os << " " << to_string(lp.sense(r)) << " " << lp.rhs(r) << "\n";
  }
  os << "Bounds\n";
  for (int j = 0; j < lp.num_vars(); ++j) {
    const double l = lp.lower(j), u = lp.upper(j);
    if (l == -kInf && u == kInf) {
      os << " " << lp_var_name(lp, j) << " free\n";
    } else {
      if (l == -kInf) {
        os << " -inf <= ";
      } else {
        os << " " << l << " <= ";
      }
      os << lp_var_name(lp, j);
      if (u == kInf) {
        os << " <= +inf\n";
      } else {
        os << " <= " << u << "\n";
      }
    }
  }
  os << "End\n";
}

void write_lp_file(const LinearProgram& lp, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw SolverError("cannot open LP dump path: " + path);
  write_lp_file(lp, os);
}

}  // namespace benderskit
