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

#ifndef BENDERSKIT_ADAPTIVE_ORACLES_HPP_
#define BENDERSKIT_ADAPTIVE_ORACLES_HPP_

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "benderskit/lp_backend.hpp"
#include "benderskit/structured_problem.hpp"

namespace benderskit {

class OracleError : public std::runtime_error {
 public:
  explicit OracleError(const std::string& what) : std::runtime_error(what) {}
};

/// An exactly solved subproblem record: value theta = g(x, c), a subgradient
/// lam w.r.t. x, and the cost-map image phi = C y* (so theta = c'phi).
struct SolvedPoint {
  Eigen::VectorXd x;
  Eigen::VectorXd c;
  double theta = 0.0;
  Eigen::VectorXd lam;
  Eigen::VectorXd phi;
};

/// Ordered collection of solved points. The first entry is always the seed
/// solve at the special point (x_min, c_min), which keeps both oracles
/// feasible for every admissible query.
class SolvedPointStore {
 public:
  explicit SolvedPointStore(SolvedPoint seed);

  // Returns false (and logs nothing else) when the point duplicates an
  // existing entry within dup_tol; validates theta = c'phi before storing.
  bool insert(SolvedPoint point, double dup_tol = 1e-10);

  const std::vector<SolvedPoint>& points() const { return points_; }
  const SolvedPoint& seed_point() const { return points_.front(); }
  const Eigen::VectorXd& x_min() const { return points_.front().x; }
  const Eigen::VectorXd& c_min() const { return points_.front().c; }
  std::size_t size() const { return points_.size(); }
  long version() const { return version_; }
  long duplicates_skipped() const { return duplicates_skipped_; }

 private:
  std::vector<SolvedPoint> points_;
  long version_ = 0;
  long duplicates_skipped_ = 0;
};

struct OracleAnswer {
  double theta_lo = 0.0;
  Eigen::VectorXd lam_lo;
  double theta_hi = 0.0;
  Eigen::VectorXd phi_hi;
  double gap() const { return theta_hi - theta_lo; }
};

/// Solves the subproblem once at the special point: x_min is the
/// componentwise infimum of node_view over the feasible master set across
/// all nodes (computed by auxiliary LPs), c_min the componentwise minimum of
/// the node cost vectors.
SolvedPointStore seed(const StructuredProblem& problem,
                      const LpBackend& backend, const SolverOptions& opts = {});

/// Lower bound with subgradient: maximise sum_k u_k (theta_k + lam_k'(x-x_k))
/// over u >= 0 with sum_k u_k c_k <= c componentwise. Any feasible u yields a
/// valid cut, so the answer is exact-solver independent.
std::pair<double, Eigen::VectorXd> lower_oracle(const SolvedPointStore& store,
                                                const Eigen::VectorXd& x_hat,
                                                const Eigen::VectorXd& c_hat,
                                                const LpBackend& backend,
                                                const SolverOptions& opts = {});

/// Upper bound with certificate: minimise sum_k u_k (c'phi_k) over the
/// simplex with sum_k u_k x_k <= x_hat componentwise.
std::pair<double, Eigen::VectorXd> upper_oracle(const SolvedPointStore& store,
                                                const Eigen::VectorXd& x_hat,
                                                const Eigen::VectorXd& c_hat,
                                                const LpBackend& backend,
                                                const SolverOptions& opts = {});

/// Both oracles at once; guarantees theta_lo <= theta_hi on the answer.
OracleAnswer query_oracles(const SolvedPointStore& store,
                           const Eigen::VectorXd& x_hat,
                           const Eigen::VectorXd& c_hat,
                           const LpBackend& backend,
                           const SolverOptions& opts = {});

/// Batched oracle queries against a frozen store snapshot: both multiplier
/// LPs keep a fixed structure for a given store size, so per-node queries
/// warm-start from the previous basis. Falls back to the one-shot oracles
/// on any numerical hiccup. Not thread-safe.
class OracleBatch {
 public:
  OracleBatch(const LpBackend& backend, SolverOptions opts = {});
  ~OracleBatch();

  OracleAnswer query(const SolvedPointStore& store,
                     const Eigen::VectorXd& x_hat,
                     const Eigen::VectorXd& c_hat);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Versioned JSON checkpoint of the store (ordered point list).
void save_store(const SolvedPointStore& store, const std::string& path);
SolvedPointStore load_store(const std::string& path);

}  // namespace benderskit

#endif  // BENDERSKIT_ADAPTIVE_ORACLES_HPP_
