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

#ifndef BENDERSKIT_CUTS_HPP_
#define BENDERSKIT_CUTS_HPP_

#include <Eigen/Dense>
#include <vector>

namespace benderskit {

/// Epigraph cut beta_i >= theta + lam'(x_i - x_anchor), anchored in the
/// node's x_i space. Valid cuts under-estimate g everywhere.
struct Cut {
  Eigen::VectorXd x_anchor;
  double theta = 0.0;
  Eigen::VectorXd lam;

  double value_at(const Eigen::VectorXd& x_i) const {
    return theta + lam.dot(x_i - x_anchor);
  }
};

/// Per-node cut list plus the initial epigraph floor beta_lower. Pools only
/// grow; duplicates (same anchor/value/slope within tolerance) are skipped.
class CutPool {
 public:
  explicit CutPool(double floor = 0.0) : floor_(floor) {}

  bool add(Cut cut, double dup_tol = 1e-10);
  double floor() const { return floor_; }
  const std::vector<Cut>& cuts() const { return cuts_; }
  std::size_t size() const { return cuts_.size(); }

  // Best cut value at a point (the pool's lower envelope), floor included.
  double evaluate(const Eigen::VectorXd& x_i) const;

 private:
  double floor_;
  std::vector<Cut> cuts_;
};

}  // namespace benderskit

#endif  // BENDERSKIT_CUTS_HPP_
