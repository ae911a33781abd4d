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

#include "simplex.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <vector>

namespace benderskit {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kPivTol = 1e-8;   // minimum acceptable pivot magnitude
constexpr double kFeasTol = 1e-9;  // bound feasibility (scaled rows)
constexpr double kDualTol = 1e-9;  // reduced-cost optimality

struct Work {
  // Equality form: [A | I_slack | I_artificial] x = b with bounds. Fixed
  // user columns are substituted into b (their huge coefficients would
  // otherwise dominate the row scaling); the rest is Ruiz-equilibrated.
  int m = 0;
  int n_user = 0;                    // live user columns
  int n = 0;                         // live user + slack count
  Eigen::SparseMatrix<double> cols;  // m x (n + m) including artificials
  VectorXd lower, upper, cost;       // size n + m
  VectorXd b;
  VectorXd row_scale, col_scale;     // col_scale covers live user columns
  std::vector<int> live;             // user column -> live index or -1
  std::vector<double> fixed_value;   // per user column, when fixed
  double cost_scale = 1.0;
};

Work build(const LinearProgram& lp) {
  Work w;
  w.m = lp.num_rows();
  const int un = lp.num_vars();
  w.live.assign(un, -1);
  w.fixed_value.assign(un, 0.0);
  int live = 0;
  for (int j = 0; j < un; ++j) {
    if (std::isfinite(lp.lower(j)) && lp.lower(j) == lp.upper(j)) {
      w.fixed_value[j] = lp.lower(j);
    } else {
      w.live[j] = live++;
    }
  }
  w.n_user = live;
  w.n = w.n_user + w.m;

  w.b = VectorXd(w.m);
  for (int r = 0; r < w.m; ++r) w.b[r] = lp.rhs(r);

  auto a = lp.constraint_matrix();
  std::vector<Eigen::Triplet<double>> raw;
  raw.reserve(a.nonZeros());
  for (int j = 0; j < a.outerSize(); ++j) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(a, j); it; ++it) {
      const int col = static_cast<int>(it.col());
      if (w.live[col] < 0) {
        w.b[it.row()] -= it.value() * w.fixed_value[col];
      } else {
        raw.emplace_back(it.row(), w.live[col], it.value());
      }
    }
  }
  // Ruiz equilibration over the live structural block.
  w.row_scale = VectorXd::Ones(w.m);
  w.col_scale = VectorXd::Ones(std::max(w.n_user, 1));
  for (int pass = 0; pass < 10; ++pass) {
    VectorXd rmax = VectorXd::Zero(w.m);
    VectorXd cmaxv = VectorXd::Zero(std::max(w.n_user, 1));
    for (const auto& t : raw) {
      const double v =
          std::abs(t.value()) * w.row_scale[t.row()] * w.col_scale[t.col()];
      rmax[t.row()] = std::max(rmax[t.row()], v);
      cmaxv[t.col()] = std::max(cmaxv[t.col()], v);
    }
    double worst = 0.0;
    for (int r = 0; r < w.m; ++r) {
      if (rmax[r] > 0) {
        worst = std::max(worst, std::abs(1.0 - rmax[r]));
        w.row_scale[r] /= std::sqrt(rmax[r]);
      }
    }
    for (int j = 0; j < w.n_user; ++j) {
      if (cmaxv[j] > 0) {
        worst = std::max(worst, std::abs(1.0 - cmaxv[j]));
        w.col_scale[j] /= std::sqrt(cmaxv[j]);
      }
    }
    if (worst < 1e-3) break;
  }

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(raw.size() + 2 * w.m);
  for (const auto& t : raw) {
    trips.emplace_back(t.row(), t.col(),
                       t.value() * w.row_scale[t.row()] * w.col_scale[t.col()]);
  }
  w.lower = VectorXd::Zero(w.n + w.m);
  w.upper = VectorXd::Zero(w.n + w.m);
  w.cost = VectorXd::Zero(w.n + w.m);
  double cmax = 0.0;
  for (int j = 0; j < un; ++j) {
    const int jj = w.live[j];
    if (jj < 0) continue;
    w.lower[jj] = lp.lower(j) / w.col_scale[jj];
    w.upper[jj] = lp.upper(j) / w.col_scale[jj];
    w.cost[jj] = lp.cost(j) * w.col_scale[jj];
    cmax = std::max(cmax, std::abs(w.cost[jj]));
  }
  w.cost_scale = cmax > 0 ? 1.0 / cmax : 1.0;
  for (int j = 0; j < w.n_user; ++j) w.cost[j] *= w.cost_scale;

  for (int r = 0; r < w.m; ++r) {
    w.b[r] *= w.row_scale[r];
    const int js = w.n_user + r;
    trips.emplace_back(r, js, 1.0);
    switch (lp.sense(r)) {
      case RowSense::LessEqual:
        w.lower[js] = 0.0;
        w.upper[js] = kInf;
        break;
      case RowSense::GreaterEqual:
        w.lower[js] = -kInf;
        w.upper[js] = 0.0;
        break;
      case RowSense::Equal:
        w.lower[js] = 0.0;
        w.upper[js] = 0.0;
        break;
    }
  }
  // Artificial columns (phase 1); sign chosen at start-up.
  for (int r = 0; r < w.m; ++r) {
    trips.emplace_back(r, w.n + r, 1.0);
    w.lower[w.n + r] = 0.0;
    w.upper[w.n + r] = 0.0;  // re-opened during phase 1 only
  }
  w.cols.resize(w.m, w.n + w.m);
  w.cols.setFromTriplets(trips.begin(), trips.end());
  w.cols.makeCompressed();
  return w;
}

class Simplex {
 public:
  Simplex(Work w, const SolverOptions& opts) : w_(std::move(w)), opts_(opts) {}

  SolveStatus run(VectorXd& x_out, VectorXd& y_out);
  // Re-solve after w_ data changed, reusing the previous basis when it is
  // still primal feasible; falls back to a cold run otherwise.
  SolveStatus rerun(VectorXd& x_out, VectorXd& y_out);

  Work& work() { return w_; }
  long pivot_count() const { return pivots_; }
  std::string detail;

 private:
  enum Loc { kBasic = 0, kAtLower = 1, kAtUpper = 2 };

  VectorXd column(int j) const {
    VectorXd col = VectorXd::Zero(w_.m);
    for (Eigen::SparseMatrix<double>::InnerIterator it(w_.cols, j); it; ++it) {
      col[it.row()] = it.value();
    }
    return col;
  }

  // Recomputes the basis inverse; dependent columns (they can sneak in
  // through degenerate pivots) are swapped out for the artificials of the
  // rows left unpivoted. Partial pivoting first, full pivoting only when
  // the cheap factorisation looks rank-deficient.
  bool refactorize() {
    MatrixXd basis(w_.m, w_.m);
    for (int i = 0; i < w_.m; ++i) basis.col(i) = column(basic_[i]);
    {
      Eigen::PartialPivLU<MatrixXd> plu(basis);
      MatrixXd candidate = plu.inverse();
      if (candidate.allFinite()) {
        // Cheap spot check of the inverse quality.
        VectorXd probe = VectorXd::Ones(w_.m);
        const double err =
            (basis * (candidate * probe) - probe).cwiseAbs().maxCoeff();
        if (err < 1e-8 * w_.m) {
          binv_ = std::move(candidate);
          return true;
        }
      }
    }
    Eigen::FullPivLU<MatrixXd> lu(basis);
    lu.setThreshold(1e-10);
    if (!lu.isInvertible()) {
      repaired_ = true;
      if (std::getenv("BENDERSKIT_DEBUG_SIMPLEX")) {
        std::fprintf(stderr,
                     "repair: rank %ld of %d at pivot %ld restarts %d\n",
                     (long)lu.rank(), w_.m, pivots_, restarts_);
      }
      const int rank = static_cast<int>(lu.rank());
      const auto& colp = lu.permutationQ().indices();
      const auto& rowp = lu.permutationP().indices();
      for (int k = rank; k < w_.m; ++k) {
        const int slot = colp[k];
        int row = rowp[k];
        if (loc_[w_.n + row] == kBasic) {
          // That artificial already sits in the basis; take any free one.
          row = -1;
          for (int r2 = 0; r2 < w_.m; ++r2) {
            if (loc_[w_.n + r2] != kBasic) {
              row = r2;
              break;
            }
          }
          if (row < 0) return false;
        }
        const int out_col = basic_[slot];
        loc_[out_col] = std::isfinite(w_.lower[out_col]) ? kAtLower
                        : std::isfinite(w_.upper[out_col]) ? kAtUpper
                                                           : kAtLower;
        basic_[slot] = w_.n + row;  // this row's artificial, pinned at zero
        loc_[w_.n + row] = kBasic;
      }
      for (int i = 0; i < w_.m; ++i) basis.col(i) = column(basic_[i]);
      Eigen::FullPivLU<MatrixXd> lu2(basis);
      lu2.setThreshold(1e-12);
      if (!lu2.isInvertible()) return false;
      binv_ = lu2.inverse();
      return true;
    }
    binv_ = lu.inverse();
    return true;
  }

  void compute_basic_values() {
    VectorXd rhs = w_.b;
    for (int j = 0; j < total_; ++j) {
      if (loc_[j] == kBasic) continue;
      const double v = value_at_bound(j);
      if (v != 0.0) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(w_.cols, j); it;
             ++it) {
          rhs[it.row()] -= it.value() * v;
        }
      }
    }
    xb_ = binv_ * rhs;
  }

  double value_at_bound(int j) const {
    if (loc_[j] == kAtLower) {
      return std::isfinite(w_.lower[j]) ? w_.lower[j] : 0.0;
    }
    if (loc_[j] == kAtUpper) {
      return std::isfinite(w_.upper[j]) ? w_.upper[j] : 0.0;
    }
    return 0.0;
  }

  enum class PhaseResult { Optimal, Unbounded, Cap, Repaired };
  // One simplex phase on the given cost vector.
  PhaseResult phase(const VectorXd& cost, long iter_cap);

  SolveStatus finish(VectorXd& x_out, VectorXd& y_out);
  SolveStatus restart_or_fail(VectorXd& x_out, VectorXd& y_out);
  void build_perturbation();

  Work w_;
  SolverOptions opts_;
  bool have_basis_ = false;
  int cold_attempts_ = 0;
  int restarts_ = 0;
  bool force_bland_ = false;
  bool reverse_scan_ = false;
  bool audit_soft_fail_ = false;
  bool allow_weak_ = false;
  VectorXd pert_cost_;  // anti-degeneracy perturbation of w_.cost
  int total_ = 0;
  std::vector<int> basic_;   // basis columns, one per row
  std::vector<Loc> loc_;     // location of every column
  MatrixXd binv_;
  VectorXd xb_;
  long pivots_ = 0;
  long degenerate_streak_ = 0;
  bool repaired_ = false;
  std::vector<char> barred_;
};

Simplex::PhaseResult Simplex::phase(const VectorXd& cost, long iter_cap) {
  barred_.assign(total_, 0);
  VectorXd y(w_.m), d(total_);
  for (long iter = 0; iter < iter_cap; ++iter) {
    if (pivots_ > 0 && pivots_ % 120 == 0) {
      repaired_ = false;
      if (!refactorize()) return PhaseResult::Repaired;
      if (repaired_) return PhaseResult::Repaired;
      compute_basic_values();
    }
    // Duals and reduced costs.
    VectorXd cb(w_.m);
    for (int i = 0; i < w_.m; ++i) cb[i] = cost[basic_[i]];
    y = binv_.transpose() * cb;

    const bool bland = force_bland_ || degenerate_streak_ > 2L * (w_.m + 16);
    int entering = -1;
    double best = kDualTol;
    int direction = 0;
    for (int scan = 0; scan < total_; ++scan) {
      const int j = reverse_scan_ ? total_ - 1 - scan : scan;
      if (loc_[j] == kBasic) continue;
      if (barred_[j]) continue;
      if (w_.lower[j] == w_.upper[j]) continue;  // fixed (artificials later)
      double dj = cost[j];
      for (Eigen::SparseMatrix<double>::InnerIterator it(w_.cols, j); it;
           ++it) {
        dj -= y[it.row()] * it.value();
      }
      const bool free_var =
          !std::isfinite(w_.lower[j]) && !std::isfinite(w_.upper[j]);
      int dir = 0;
      double score = 0.0;
      if (loc_[j] == kAtLower && dj < -kDualTol) {
        dir = +1;  // rise off the lower bound
        score = -dj;
      } else if (loc_[j] == kAtUpper && dj > kDualTol) {
        dir = -1;  // drop off the upper bound
        score = dj;
      } else if (free_var && std::abs(dj) > kDualTol) {
        dir = dj < 0 ? +1 : -1;  // free columns park at zero
        score = std::abs(dj);
      }
      if (dir != 0 && score > best) {
        entering = j;
        direction = dir;
        best = score;
        if (bland) break;  // smallest index wins under Bland's rule
      }
    }
    if (entering < 0) return PhaseResult::Optimal;

    VectorXd abar = binv_ * column(entering);
    // Ratio test: entering moves by t >= 0 in `direction`. Every row with a
    // non-negligible step bounds t (skipping tiny pivots would let a long
    // step drag their basics far out of bounds); among near-minimal limits
    // the largest pivot wins for stability.
    double t_max = kInf;
    int leaving = -1;       // index into basic_
    int leaving_to = 0;     // which bound the leaving variable hits
    const double span = w_.upper[entering] - w_.lower[entering];
    if (std::isfinite(span)) t_max = span;
    double best_piv = 0.0;
    for (int i = 0; i < w_.m; ++i) {
      const double step = direction * abar[i];
      const int bj = basic_[i];
      double limit = kInf;
      int to = 0;
      if (step > 1e-12) {
        if (std::isfinite(w_.lower[bj])) {
          limit = (xb_[i] - w_.lower[bj]) / step;
          to = kAtLower;
        }
      } else if (step < -1e-12) {
        if (std::isfinite(w_.upper[bj])) {
          limit = (w_.upper[bj] - xb_[i]) / (-step);
          to = kAtUpper;
        }
      } else {
        continue;
      }
      if (!std::isfinite(limit)) continue;
      limit = std::max(limit, 0.0);
      const double window = 1e-9 + 1e-7 * std::min(limit, t_max);
      if (limit < t_max - window ||
          (limit <= t_max + window && std::abs(abar[i]) > best_piv)) {
        t_max = std::min(t_max, limit);
        leaving = i;
        leaving_to = to;
        best_piv = std::abs(abar[i]);
      }
    }
    if (!std::isfinite(t_max)) return PhaseResult::Unbounded;
    bool weak_pivot = false;
    if (leaving >= 0 && best_piv < kPivTol) {
      if (!allow_weak_ || best_piv < 1e-13) {
        // Numerically unsafe pivot: bar this column for the rest of the
        // phase and re-price from a fresh factorisation.
        barred_[entering] = 1;
        repaired_ = false;
        if (!refactorize()) return PhaseResult::Repaired;
        if (repaired_) return PhaseResult::Repaired;
        compute_basic_values();
        continue;
      }
      // Last-resort weak pivot: take it, then refresh the factorisation
      // immediately so its error does not compound.
      weak_pivot = true;
    }

    degenerate_streak_ = t_max <= 1e-11 ? degenerate_streak_ + 1 : 0;

    const double enter_from = value_at_bound(entering);
    if (leaving < 0) {
      // Bound flip: entering runs to its opposite bound.
      loc_[entering] = direction > 0 ? kAtUpper : kAtLower;
      xb_ -= direction * t_max * abar;
      ++pivots_;
      continue;
    }
    // Pivot: update basis inverse with an eta transformation.
    const double piv = abar[leaving];
    VectorXd eta = -abar / piv;
    eta[leaving] = 1.0 / piv;
    const Eigen::RowVectorXd old_row = binv_.row(leaving);
    for (int i = 0; i < w_.m; ++i) {
      if (i == leaving) continue;
      binv_.row(i) += eta[i] * old_row;
    }
    binv_.row(leaving) = eta[leaving] * old_row;

    xb_ -= direction * t_max * abar;
    loc_[basic_[leaving]] = static_cast<Loc>(leaving_to);
    loc_[entering] = kBasic;
    basic_[leaving] = entering;
    xb_[leaving] = enter_from + direction * t_max;
    ++pivots_;
    if (weak_pivot) {
      repaired_ = false;
      if (!refactorize() || repaired_) return PhaseResult::Repaired;
      compute_basic_values();
    }
    if (std::getenv("BENDERSKIT_DEBUG_SIMPLEX")) {
      for (int i = 0; i < w_.m; ++i) {
        for (int i2 = i + 1; i2 < w_.m; ++i2) {
          if (basic_[i] == basic_[i2]) {
            std::fprintf(stderr, "DUPLICATE basic col %d slots %d %d\n",
                         basic_[i], i, i2);
          }
        }
      }
    }
  }
  return PhaseResult::Cap;
}

void Simplex::build_perturbation() {
  // Deterministic cost perturbation breaks the degenerate ties that stall
  // phase 2 on cutting-plane masters. The objective overstatement this can
  // cause is bounded by ~1e-9 * ||x||_1 in scaled units. Must be rebuilt
  // whenever the cost data changes (warm re-solves).
  pert_cost_ = w_.cost;
  for (int j = 0; j < total_; ++j) {
    const unsigned h = (static_cast<unsigned>(j) * 2654435761u) >> 16;
    const double factor = 0.5 + static_cast<double>(h & 0xffff) / 65536.0;
    pert_cost_[j] += 1e-9 * (1.0 + std::abs(pert_cost_[j])) * factor;
  }
}

SolveStatus Simplex::run(VectorXd& x_out, VectorXd& y_out) {
  total_ = w_.n + w_.m;
  build_perturbation();
  loc_.assign(total_, kAtLower);
  // Nonbasic start: every structural/slack column at its nearest finite
  // bound (free columns park at zero).
  for (int j = 0; j < w_.n; ++j) {
    if (std::isfinite(w_.lower[j])) {
      loc_[j] = kAtLower;
    } else if (std::isfinite(w_.upper[j])) {
      loc_[j] = kAtUpper;
    } else {
      loc_[j] = kAtLower;  // free at value zero
    }
  }

  // Artificial basis with signs matching the start-up residual.
  VectorXd resid = w_.b;
  for (int j = 0; j < w_.n; ++j) {
    const double v = value_at_bound(j);
    if (v != 0.0) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(w_.cols, j); it;
           ++it) {
        resid[it.row()] -= it.value() * v;
      }
    }
  }
  // Crash basis: rows whose start residual already fits inside the slack
  // bounds take their slack as the basic column; only the rest need an
  // artificial. This skips most of phase 1.
  Work& wmut = w_;
  basic_.resize(w_.m);
  VectorXd phase1_cost = VectorXd::Zero(total_);
  bool any_artificial = false;
  for (int r = 0; r < w_.m; ++r) {
    const int js = w_.n_user + r;
    const int ja = w_.n + r;
    const bool slack_ok = loc_[js] != kBasic &&
                          resid[r] >= wmut.lower[js] - kFeasTol &&
                          resid[r] <= wmut.upper[js] + kFeasTol;
    if (slack_ok) {
      basic_[r] = js;
      loc_[js] = kBasic;
      wmut.lower[ja] = 0.0;
      wmut.upper[ja] = 0.0;
      loc_[ja] = kAtLower;
    } else {
      basic_[r] = ja;
      loc_[ja] = kBasic;
      any_artificial = true;
      if (resid[r] >= 0) {
        wmut.lower[ja] = 0.0;
        wmut.upper[ja] = kInf;
        phase1_cost[ja] = 1.0;
      } else {
        wmut.lower[ja] = -kInf;
        wmut.upper[ja] = 0.0;
        phase1_cost[ja] = -1.0;
      }
    }
  }
  binv_ = MatrixXd::Identity(w_.m, w_.m);
  compute_basic_values();
  const long cap = 20000 + 40L * (w_.m + w_.n);
  if (any_artificial) {
    VectorXd phase1_pert = phase1_cost;
    for (int r = 0; r < w_.m; ++r) {
      const int ja = w_.n + r;
      if (phase1_pert[ja] != 0.0) {
        const unsigned h = (static_cast<unsigned>(ja) * 2654435761u) >> 16;
        phase1_pert[ja] *=
            1.0 + 1e-9 * (0.5 + static_cast<double>(h & 0xffff) / 65536.0);
      }
    }
    const PhaseResult r1 = phase(phase1_pert, cap);
    if (r1 == PhaseResult::Repaired) {
      detail = "phase-1 basis repair";
      return restart_or_fail(x_out, y_out);
    }
    if (r1 == PhaseResult::Unbounded) {
      detail = "phase-1 reported an unbounded ray";
      return SolveStatus::NumericalFailure;
    }
    if (r1 == PhaseResult::Cap) {
      detail = "phase-1 pivot cap";
      return SolveStatus::NumericalFailure;
    }
    double infeas = 0.0;
    for (int r = 0; r < w_.m; ++r) {
      const int ja = w_.n + r;
      double v = 0.0;
      if (loc_[ja] == kBasic) {
        for (int i = 0; i < w_.m; ++i) {
          if (basic_[i] == ja) v = std::abs(xb_[i]);
        }
      } else {
        v = std::abs(value_at_bound(ja));
      }
      if (v > 1e-9 && std::getenv("BENDERSKIT_DEBUG_SIMPLEX")) {
        std::fprintf(stderr, "  stuck artificial row %d value %.6e bhat %.6e loc %d\n",
                     r, v, w_.b[r], (int)loc_[ja]);
      }
      infeas += v;
    }
    if (infeas > 1e-7 * (1.0 + w_.b.cwiseAbs().maxCoeff())) {
      if (std::getenv("BENDERSKIT_DEBUG_SIMPLEX")) {
        std::fprintf(stderr, "simplex phase1 infeas=%.6e thresh=%.3e pivots=%ld\n",
                     infeas, 1e-7 * (1.0 + w_.b.cwiseAbs().maxCoeff()), pivots_);
      }
      const bool any_barred =
          std::find(barred_.begin(), barred_.end(), 1) != barred_.end();
      if (any_barred) {
        // Verdict reached with columns barred is not trustworthy.
        detail = "phase-1 blocked on unusable pivots";
        return SolveStatus::NumericalFailure;
      }
      return SolveStatus::Infeasible;
    }
  }
  // Pin the artificials; basic ones stay at (numerically) zero.
  for (int r = 0; r < w_.m; ++r) {
    const int ja = w_.n + r;
    wmut.lower[ja] = 0.0;
    wmut.upper[ja] = 0.0;
    if (loc_[ja] != kBasic) loc_[ja] = kAtLower;
  }

  // Phase 2, with re-pricing rounds: a finish audit that fails while
  // columns were barred just means the factorisation needed refreshing.
  degenerate_streak_ = 0;
  for (int round = 0; round < 3; ++round) {
    allow_weak_ = round >= 1;
    const PhaseResult r2 = phase(pert_cost_, cap);
    if (r2 == PhaseResult::Repaired) {
      detail = "phase-2 basis repair";
      return restart_or_fail(x_out, y_out);
    }
    if (r2 == PhaseResult::Unbounded) return SolveStatus::Unbounded;
    if (r2 == PhaseResult::Cap) {
      detail = "phase-2 pivot cap";
      return SolveStatus::NumericalFailure;
    }
    const SolveStatus st = finish(x_out, y_out);
    if (st != SolveStatus::NumericalFailure || !audit_soft_fail_ ||
        round == 2) {
      return st;
    }
    if (!refactorize()) return restart_or_fail(x_out, y_out);
    compute_basic_values();
  }
  return finish(x_out, y_out);
}

SolveStatus Simplex::restart_or_fail(VectorXd& x_out, VectorXd& y_out) {
  // A mid-phase basis repair invalidates primal feasibility; restart the
  // whole solve (bounded) rather than pivot on from a broken point.
  if (restarts_ >= 3) return SolveStatus::NumericalFailure;
  ++restarts_;
  force_bland_ = restarts_ >= 2;
  return run(x_out, y_out);
}

SolveStatus Simplex::finish(VectorXd& x_out, VectorXd& y_out) {
  audit_soft_fail_ = false;
  auto cold_retry = [&](const char* why) {
    if (cold_attempts_ >= 3) {
      detail = why;
      return SolveStatus::NumericalFailure;
    }
    ++cold_attempts_;
    // Vary the pivot path each retry.
    force_bland_ = cold_attempts_ == 1 || cold_attempts_ == 3;
    reverse_scan_ = cold_attempts_ >= 2;
    return run(x_out, y_out);
  };
  if (!refactorize()) return cold_retry("singular final basis");
  compute_basic_values();
  if (!xb_.allFinite() || !binv_.allFinite()) {
    return cold_retry("singular final basis");
  }
  // A repair may have left basics outside their bounds; re-running the two
  // phases from scratch repairs feasibility (the repaired point would
  // silently bias the vertex otherwise).
  // Harris-style ratio ties trade a bounded feasibility slip for stable
  // pivots; anything beyond that budget means real trouble. The user-space
  // row audit downstream has the final say on the returned vertex.
  for (int i = 0; i < w_.m; ++i) {
    const int bj = basic_[i];
    const double viol = std::max(w_.lower[bj] - xb_[i], xb_[i] - w_.upper[bj]);
    if (viol > 1e-4 * (1.0 + std::abs(xb_[i]))) {
      if (std::getenv("BENDERSKIT_DEBUG_SIMPLEX")) {
        std::fprintf(stderr,
                     "finish: basic slot %d col %d value %.6e bounds [%.3e, "
                     "%.3e] pivots %ld\n",
                     i, bj, xb_[i], w_.lower[bj], w_.upper[bj], pivots_);
      }
      audit_soft_fail_ = true;
      detail = "final vertex has an out-of-bound basic";
      return SolveStatus::NumericalFailure;
    }
  }
  // Optimality audit: barred columns or drift could have ended a phase at a
  // suboptimal vertex, which would corrupt the caller's lower bounds.
  {
    VectorXd cb(w_.m);
    for (int i = 0; i < w_.m; ++i) cb[i] = pert_cost_[basic_[i]];
    const VectorXd y = binv_.transpose() * cb;
    for (int j = 0; j < total_; ++j) {
      if (loc_[j] == kBasic || w_.lower[j] == w_.upper[j]) continue;
      double dj = pert_cost_[j];
      for (Eigen::SparseMatrix<double>::InnerIterator it(w_.cols, j); it;
           ++it) {
        dj -= y[it.row()] * it.value();
      }
      const bool free_var =
          !std::isfinite(w_.lower[j]) && !std::isfinite(w_.upper[j]);
      const double slack_tol = 1e-6;
      const bool improving =
          (loc_[j] == kAtLower && dj < -slack_tol) ||
          (loc_[j] == kAtUpper && dj > slack_tol) ||
          (free_var && std::abs(dj) > slack_tol);
      if (improving) {
        if (std::getenv("BENDERSKIT_DEBUG_SIMPLEX")) {
          std::fprintf(stderr,
                       "audit: col %d loc %d dj %.6e bounds [%.3e, %.3e] "
                       "barred %d\n",
                       j, (int)loc_[j], dj, w_.lower[j], w_.upper[j],
                       (int)barred_[j]);
        }
        audit_soft_fail_ = true;
        detail = "optimality audit failed";
        return SolveStatus::NumericalFailure;
      }
    }
  }
  have_basis_ = true;
  x_out = VectorXd::Zero(total_);
  for (int j = 0; j < total_; ++j) {
    if (loc_[j] != kBasic) x_out[j] = value_at_bound(j);
  }
  for (int i = 0; i < w_.m; ++i) x_out[basic_[i]] = xb_[i];
  VectorXd cb(w_.m);
  for (int i = 0; i < w_.m; ++i) cb[i] = w_.cost[basic_[i]];
  y_out = binv_.transpose() * cb;
  return SolveStatus::Optimal;
}

SolveStatus Simplex::rerun(VectorXd& x_out, VectorXd& y_out) {
  if (!have_basis_) return run(x_out, y_out);
  have_basis_ = false;
  if (!refactorize()) return run(x_out, y_out);
  compute_basic_values();
  bool feasible = xb_.allFinite();
  for (int i = 0; feasible && i < w_.m; ++i) {
    const int bj = basic_[i];
    if (xb_[i] < w_.lower[bj] - kFeasTol * (1.0 + std::abs(xb_[i])) ||
        xb_[i] > w_.upper[bj] + kFeasTol * (1.0 + std::abs(xb_[i]))) {
      feasible = false;
    }
  }
  if (!feasible) return run(x_out, y_out);
  degenerate_streak_ = 0;
  const long cap = 20000 + 40L * (w_.m + w_.n);
  build_perturbation();
  for (int round = 0; round < 3; ++round) {
    allow_weak_ = round >= 1;
    const PhaseResult r2 = phase(pert_cost_, cap);
    if (r2 == PhaseResult::Repaired) return run(x_out, y_out);
    if (r2 == PhaseResult::Unbounded) return SolveStatus::Unbounded;
    if (r2 == PhaseResult::Cap) {
      detail = "phase-2 pivot cap";
      return SolveStatus::NumericalFailure;
    }
    const SolveStatus st = finish(x_out, y_out);
    if (st != SolveStatus::NumericalFailure || !audit_soft_fail_ ||
        round == 2) {
      if (st == SolveStatus::NumericalFailure && audit_soft_fail_) {
        return run(x_out, y_out);
      }
      return st;
    }
    if (!refactorize()) return run(x_out, y_out);
    compute_basic_values();
  }
  return SolveStatus::NumericalFailure;
}

}  // namespace

struct PreparedSimplex::Impl {
  Impl(Work w, const SolverOptions& opts) : solver(std::move(w), opts) {}
  Simplex solver;
  VectorXd fixed_offset;  // rhs contribution of fixed user columns
};

PreparedSimplex::PreparedSimplex(const LinearProgram& lp) {
  impl_ = std::make_unique<Impl>(build(lp), SolverOptions{});
  impl_->fixed_offset = VectorXd::Zero(lp.num_rows());
  const Work& w = impl_->solver.work();
  auto a = lp.constraint_matrix();
  for (int j = 0; j < lp.num_vars(); ++j) {
    if (w.live[j] >= 0 || w.fixed_value[j] == 0.0) continue;
    for (Eigen::SparseMatrix<double>::InnerIterator it(a, j); it; ++it) {
      impl_->fixed_offset[it.row()] += it.value() * w.fixed_value[j];
    }
  }
}
PreparedSimplex::~PreparedSimplex() = default;
PreparedSimplex::PreparedSimplex(PreparedSimplex&&) noexcept = default;
PreparedSimplex& PreparedSimplex::operator=(PreparedSimplex&&) noexcept =
    default;

SolveOutcome PreparedSimplex::resolve(const Eigen::VectorXd& rhs,
                                      const Eigen::VectorXd& cost,
                                      const SolverOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  Work& w = impl_->solver.work();
  SolveOutcome out;
  if (rhs.size() != w.m) {
    out.status = SolveStatus::NumericalFailure;
    out.message = "prepared simplex: rhs size mismatch";
    return out;
  }
  for (int r = 0; r < w.m; ++r) {
    w.b[r] = (rhs[r] - impl_->fixed_offset[r]) * w.row_scale[r];
  }
  double cmax = 0.0;
  for (std::size_t j = 0; j < w.live.size(); ++j) {
    const int jj = w.live[j];
    if (jj >= 0) cmax = std::max(cmax, std::abs(cost[j] * w.col_scale[jj]));
  }
  w.cost_scale = cmax > 0 ? 1.0 / cmax : 1.0;
  for (std::size_t j = 0; j < w.live.size(); ++j) {
    const int jj = w.live[j];
    if (jj >= 0) w.cost[jj] = cost[j] * w.col_scale[jj] * w.cost_scale;
  }
  (void)opts;
  VectorXd x, y;
  if (std::getenv("BENDERSKIT_SIMPLEX_STATS")) {
    static long calls = 0;
    ++calls;
    std::fprintf(stderr, "resolve call %ld pivots_before %ld\n", calls,
                 impl_->solver.pivot_count());
  }
  out.status = impl_->solver.rerun(x, y);
  out.message = impl_->solver.detail;
  if (out.status == SolveStatus::Optimal) {
    out.primal = VectorXd(w.live.size());
    for (std::size_t j = 0; j < w.live.size(); ++j) {
      const int jj = w.live[j];
      out.primal[j] = jj < 0 ? w.fixed_value[j] : x[jj] * w.col_scale[jj];
    }
    out.row_duals = VectorXd(w.m);
    for (int r = 0; r < w.m; ++r) {
      out.row_duals[r] = y[r] * w.row_scale[r] / w.cost_scale;
    }
    double obj = 0.0;
    for (std::size_t j = 0; j < w.live.size(); ++j) {
      obj += cost[j] * out.primal[j];
    }
    out.objective = obj;
  }
  out.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return out;
}

bool simplex_suitable(const LinearProgram& lp) {
  if (lp.has_quadratic()) return false;
  // Explicit inverse memory: keep the basis below ~2500 rows.
  return lp.num_rows() <= 2500 && lp.num_vars() <= 20000;
}

SolveOutcome solve_simplex(const LinearProgram& lp, const SolverOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  SolveOutcome out;
  Work w = build(lp);
  Simplex solver(w, opts);
  VectorXd x, y;
  out.status = solver.run(x, y);
  out.message = solver.detail;
  if (out.status == SolveStatus::Optimal) {
    out.primal = VectorXd(lp.num_vars());
    for (int j = 0; j < lp.num_vars(); ++j) {
      const int jj = w.live[j];
      out.primal[j] =
          jj < 0 ? w.fixed_value[j] : x[jj] * w.col_scale[jj];
    }
    out.row_duals = VectorXd(lp.num_rows());
    for (int r = 0; r < lp.num_rows(); ++r) {
      // Scaled dual back to user units: rows were scaled, costs normalised.
      out.row_duals[r] = y[r] * w.row_scale[r] / w.cost_scale;
    }
    out.objective = lp.objective_value(out.primal);
    // Sanity: feasibility of the returned vertex in user space. The noise
    // floor of evaluating a row grows with its absolute activity, so the
    // tolerance must track it.
    auto a_user = lp.constraint_matrix();
    Eigen::VectorXd resid = lp.rhs_vector();
    Eigen::VectorXd activity = Eigen::VectorXd::Zero(lp.num_rows());
    Eigen::VectorXd row_mag = Eigen::VectorXd::Zero(lp.num_rows());
    for (int j = 0; j < a_user.outerSize(); ++j) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(a_user, j); it;
           ++it) {
        resid[it.row()] -= it.value() * out.primal[it.col()];
        activity[it.row()] += std::abs(it.value() * out.primal[it.col()]);
        row_mag[it.row()] = std::max(row_mag[it.row()], std::abs(it.value()));
      }
    }
    if (!out.primal.allFinite()) {
      out.status = SolveStatus::NumericalFailure;
      out.message = "simplex produced a non-finite vertex";
    }
    for (int r = 0; out.status == SolveStatus::Optimal && r < lp.num_rows();
         ++r) {
      const double tol = 1e-6 * (1.0 + std::abs(lp.rhs(r))) +
                         1e-9 * (activity[r] + row_mag[r]);
      const bool bad =
          (lp.sense(r) == RowSense::Equal && std::abs(resid[r]) > tol) ||
          (lp.sense(r) == RowSense::LessEqual && resid[r] < -tol) ||
          (lp.sense(r) == RowSense::GreaterEqual && resid[r] > tol);
      if (bad) {
        out.status = SolveStatus::NumericalFailure;
        out.message = "simplex vertex failed the feasibility audit";
        if (std::getenv("BENDERSKIT_DEBUG_SIMPLEX")) {
          std::fprintf(stderr,
                       "audit fail row %d resid %.6e rhs %.6e activity %.3e "
                       "sense %s\n",
                       r, resid[r], lp.rhs(r), activity[r],
                       to_string(lp.sense(r)));
        }
        break;
      }
    }
  }
  out.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return out;
}

}  // namespace benderskit
