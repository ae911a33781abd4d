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

#include "benderskit/ipm.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

namespace benderskit {
namespace {

using Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// Internal standard form:
//   min 0.5 x'Qx + c'x + c0   s.t.  Ax = b,  l <= x <= u
// Inequality rows of the user model become slack columns; fixed variables
// are substituted out before conversion.
struct StdForm {
  SpMat A;  // m x n
  SpMat Q;  // n x n symmetric, both triangles
  VectorXd c, b, l, u;
  double c0 = 0.0;
  int n = 0, m = 0;
  bool has_q = false;
};

// Maps scaled-space residuals to user-space relative measures so that
// termination reflects the accuracy of the returned solution, not of its
// scaled image.
struct TerminationWeights {
  VectorXd rp;     // per-row multiplier for the primal residual
  VectorXd rd;     // per-column multiplier for the dual residual
  double gap = 1.0;  // complementarity multiplier (before obj normalisation)
};

struct IpmTermination {
  enum class Kind { Optimal, MaxIter, Diverged, FactorFail } kind;
  VectorXd x, y;  // current iterate (scaled space)
  int iterations = 0;
  double rel_p = kInf, rel_d = kInf, rel_gap = kInf;
};

double inf_norm(const VectorXd& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

// Ruiz equilibration of [A | b]; returns row scales r, column scales d and
// the rhs pseudo-column scale db. Treating b as a column keeps rows with a
// huge rhs from being crushed, which would blow up the natural magnitude of
// the variables that have to match that rhs (epigraph variables, say).
void ruiz_scale(const SpMat& a, const VectorXd& b, VectorXd& r, VectorXd& d,
                double& db, int passes = 10) {
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  r = VectorXd::Ones(m);
  d = VectorXd::Ones(n);
  db = 1.0;
  if (m == 0 || n == 0) return;
  for (int pass = 0; pass < passes; ++pass) {
    VectorXd row_max = VectorXd::Zero(m);
    VectorXd col_max = VectorXd::Zero(n);
    double b_max = 0.0;
    for (int j = 0; j < a.outerSize(); ++j) {
      for (SpMat::InnerIterator it(a, j); it; ++it) {
        const double v = std::abs(it.value()) * r[it.row()] * d[it.col()];
        row_max[it.row()] = std::max(row_max[it.row()], v);
        col_max[it.col()] = std::max(col_max[it.col()], v);
      }
    }
    for (int i = 0; i < m; ++i) {
      const double v = std::abs(b[i]) * r[i] * db;
      row_max[i] = std::max(row_max[i], v);
      b_max = std::max(b_max, v);
    }
    double worst = 0.0;
    for (int i = 0; i < m; ++i) {
      if (row_max[i] > 0) {
        worst = std::max(worst, std::abs(1.0 - row_max[i]));
        r[i] /= std::sqrt(row_max[i]);
      }
    }
    for (int j2 = 0; j2 < n; ++j2) {
      if (col_max[j2] > 0) {
        worst = std::max(worst, std::abs(1.0 - col_max[j2]));
        d[j2] /= std::sqrt(col_max[j2]);
      }
    }
    if (b_max > 0) db /= std::sqrt(b_max);
    if (worst < 1e-3) break;
  }
}

class IpmCore {
 public:
  IpmCore(const StdForm& f, const SolverOptions& opts,
          const TerminationWeights* weights = nullptr)
      : f_(f), opts_(opts), weights_(weights) {}

  IpmTermination run();

  double primal_objective(const VectorXd& x) const {
    double obj = f_.c.dot(x);
    if (f_.has_q) obj += 0.5 * x.dot(f_.Q * x);
    return obj;
  }

 private:
  void assemble_pattern();
  bool factorize(const VectorXd& theta, double dp, double dd);
  VectorXd solve_kkt(const VectorXd& rhs) const;

  double dp_used_ = 0.0, dd_used_ = 0.0;
  mutable double solve_quality_ = 0.0;  // worst relative KKT residual seen

  const StdForm& f_;
  const SolverOptions& opts_;
  const TerminationWeights* weights_;
  SpMat kkt_;  // (n+m) x (n+m) lower triangle; only diagonals change per iter
  std::vector<int> diag_pos_;  // position of each x-diagonal entry in kkt_
  std::vector<int> reg_pos_;   // position of each y-diagonal entry in kkt_
  VectorXd qdiag_;
  Eigen::SimplicialLDLT<SpMat, Eigen::Lower> ldlt_;
  bool analyzed_ = false;
};

void IpmCore::assemble_pattern() {
  const int n = f_.n, m = f_.m;
  std::vector<Triplet> trips;
  trips.reserve(f_.A.nonZeros() + n + m + f_.Q.nonZeros());
  qdiag_ = VectorXd::Zero(n);
  // (1,1) block: -(Q + Theta + dp I). Off-diagonal Q entries are constant
  // across iterations; the diagonal is refreshed in factorize().
  if (f_.has_q) {
    for (int j = 0; j < f_.Q.outerSize(); ++j) {
      for (SpMat::InnerIterator it(f_.Q, j); it; ++it) {
        if (it.row() > it.col()) {
          trips.emplace_back(it.row(), it.col(), -it.value());
        } else if (it.row() == it.col()) {
          qdiag_[it.row()] += it.value();
        }
      }
    }
  }
  for (int j = 0; j < n; ++j) trips.emplace_back(j, j, 0.0);
  // (2,1) block: A (constant).
  for (int j = 0; j < f_.A.outerSize(); ++j) {
    for (SpMat::InnerIterator it(f_.A, j); it; ++it) {
      trips.emplace_back(n + it.row(), it.col(), it.value());
    }
  }
  // (2,2) block: dd I.
  for (int i = 0; i < m; ++i) trips.emplace_back(n + i, n + i, 0.0);
  kkt_.resize(n + m, n + m);
  kkt_.setFromTriplets(trips.begin(), trips.end());
  kkt_.makeCompressed();
  diag_pos_.assign(n, -1);
  reg_pos_.assign(m, -1);
  const int* outer = kkt_.outerIndexPtr();
  const int* inner = kkt_.innerIndexPtr();
  for (int j = 0; j < n + m; ++j) {
    for (int p = outer[j]; p < outer[j + 1]; ++p) {
      if (inner[p] == j) {
        if (j < n) {
          diag_pos_[j] = p;
        } else {
          reg_pos_[j - n] = p;
        }
        break;
      }
    }
  }
}

bool IpmCore::factorize(const VectorXd& theta, double dp, double dd) {
  const int n = f_.n, m = f_.m;
  dp_used_ = dp;
  dd_used_ = dd;
  double* vals = kkt_.valuePtr();
  for (int j = 0; j < n; ++j) {
    vals[diag_pos_[j]] = -(qdiag_[j] + theta[j] + dp);
  }
  for (int i = 0; i < m; ++i) vals[reg_pos_[i]] = dd;
  if (!analyzed_) {
    ldlt_.analyzePattern(kkt_);
    analyzed_ = true;
  }
  ldlt_.factorize(kkt_);
  if (ldlt_.info() != Eigen::Success) return false;
  // SimplicialLDLT does not pivot; reject factorizations that went through
  // a zero pivot silently.
  return ldlt_.vectorD().allFinite() &&
         (ldlt_.vectorD().cwiseAbs().minCoeff() > 0.0);
}

VectorXd IpmCore::solve_kkt(const VectorXd& rhs) const {
  const int n = f_.n, m = f_.m;
  VectorXd sol = ldlt_.solve(rhs);
  // Refine against the UNREGULARISED KKT matrix, else the proximal shifts
  // leave an O(delta * ||sol||) bias that stalls the dual residual. The
  // unregularised residual is the regularised one plus the shift terms.
  const double rhs_norm = inf_norm(rhs);
  VectorXd best = sol;
  double best_resid = kInf;
  for (int pass = 0; pass < 10; ++pass) {
    VectorXd resid = rhs - kkt_.selfadjointView<Eigen::Lower>() * sol;
    resid.head(n) += dp_used_ * sol.head(n);
    resid.tail(m) -= dd_used_ * sol.tail(m);
    const double rn = inf_norm(resid);
    if (rn < best_resid) {
      best_resid = rn;
      best = sol;
    }
    if (rn <= 1e-14 * (1.0 + rhs_norm) || rn > 2.0 * best_resid) break;
    sol += ldlt_.solve(resid);
  }
  solve_quality_ = std::max(solve_quality_, best_resid / (1.0 + rhs_norm));
  return best;
}

IpmTermination IpmCore::run() {
  const int n = f_.n, m = f_.m;
  const double tol = opts_.tolerance;

  std::vector<int> lo, hi;  // indices with finite lower / upper bounds
  for (int j = 0; j < n; ++j) {
    if (std::isfinite(f_.l[j])) lo.push_back(j);
    if (std::isfinite(f_.u[j])) hi.push_back(j);
  }
  const int nb = static_cast<int>(lo.size() + hi.size());

  const double bnorm = inf_norm(f_.b);
  const double cnorm = inf_norm(f_.c);
  double dp = 1e-11, dd = 1e-11;

  assemble_pattern();

  // Mehrotra-style starting point: a least-norm primal solution of Ax = b
  // and least-squares duals, both shifted strictly inside the bounds. This
  // matters: a naive unit start chokes the primal step on models whose
  // slacks sit many orders of magnitude from the origin.
  VectorXd x = VectorXd::Zero(n);
  VectorXd y = VectorXd::Zero(m);
  VectorXd z = VectorXd::Zero(n), w = VectorXd::Zero(n);
  {
    VectorXd x_ls = VectorXd::Zero(n);
    VectorXd dual_resid = f_.c;
    if (factorize(VectorXd::Ones(n), 1e-10, 1e-10)) {
      VectorXd rhs = VectorXd::Zero(n + m);
      rhs.tail(m) = f_.b;
      VectorXd sol = solve_kkt(rhs);
      x_ls = sol.head(n);
      rhs.setZero();
      rhs.head(n) = f_.c;
      VectorXd sol2 = solve_kkt(rhs);
      y = sol2.tail(m);
      dual_resid = f_.c - f_.A.transpose() * y;
    }
    double gmin = kInf;
    for (int j : lo) gmin = std::min(gmin, x_ls[j] - f_.l[j]);
    for (int j : hi) gmin = std::min(gmin, f_.u[j] - x_ls[j]);
    const double pad = std::max({1.0, nb > 0 ? -1.5 * gmin : 0.0,
                                 1e-3 * inf_norm(x_ls)});
    for (int j = 0; j < n; ++j) {
      const double lj = f_.l[j], uj = f_.u[j];
      const bool has_l = std::isfinite(lj), has_u = std::isfinite(uj);
      if (has_l && has_u) {
        const double inner = std::min(pad, 0.25 * (uj - lj));
        x[j] = std::clamp(x_ls[j], lj + inner, uj - inner);
      } else if (has_l) {
        x[j] = std::max(x_ls[j], lj + pad);
      } else if (has_u) {
        x[j] = std::min(x_ls[j], uj - pad);
      } else {
        x[j] = x_ls[j];
      }
    }
    const double pad_d = std::max(1.0, 1e-3 * inf_norm(dual_resid));
    for (int j : lo) z[j] = std::max(dual_resid[j], pad_d);
    for (int j : hi) w[j] = std::max(-dual_resid[j], pad_d);
  }

  IpmTermination term;
  term.kind = IpmTermination::Kind::MaxIter;
  double best_measure = kInf;
  int best_age = 0;
  VectorXd best_x = x, best_y = y;

  auto residuals = [&](VectorXd& rd, VectorXd& rp, double& mu, double& gap) {
    rd = f_.c - f_.A.transpose() * y - z + w;
    if (f_.has_q) rd += f_.Q * x;
    rp = f_.b - f_.A * x;
    double comp = 0.0;
    for (int j : lo) comp += (x[j] - f_.l[j]) * z[j];
    for (int j : hi) comp += (f_.u[j] - x[j]) * w[j];
    gap = comp;
    mu = nb > 0 ? comp / nb : 0.0;
  };
  auto weighted_inf = [](const VectorXd& v, const VectorXd& wgt) {
    double m = 0.0;
    for (int i = 0; i < v.size(); ++i) {
      m = std::max(m, std::abs(v[i]) * wgt[i]);
    }
    return m;
  };

  for (int iter = 0; iter <= opts_.max_iterations; ++iter) {
    VectorXd rd, rp;
    double mu, gap;
    residuals(rd, rp, mu, gap);

    const double obj = primal_objective(x);
    if (weights_) {
      term.rel_p = weighted_inf(rp, weights_->rp);
      term.rel_d = weighted_inf(rd, weights_->rd);
      term.rel_gap = gap * weights_->gap /
                     (1.0 + std::abs(obj) * weights_->gap);
    } else {
      term.rel_p = inf_norm(rp) / (1.0 + bnorm);
      term.rel_d = inf_norm(rd) / (1.0 + cnorm);
      term.rel_gap = gap / (1.0 + std::abs(obj));
    }
    term.iterations = iter;
    term.x = x;
    term.y = y;

    if (opts_.verbose) {
      int jmax = 0;
      for (int j = 0; j < n; ++j) {
        if (std::abs(rd[j]) > std::abs(rd[jmax])) jmax = j;
      }
      std::fprintf(stderr,
                   "ipm %3d  obj %+.8e  rp %.2e  rd %.2e  gap %.2e  "
                   "[rdmax j=%d lo=%d hi=%d z=%.2e w=%.2e x=%.2e l=%.2e u=%.2e]\n",
                   iter, obj, term.rel_p, term.rel_d, term.rel_gap, jmax,
                   (int)std::isfinite(f_.l[jmax]), (int)std::isfinite(f_.u[jmax]),
                   z[jmax], w[jmax], x[jmax], f_.l[jmax], f_.u[jmax]);
    }
    if (term.rel_p <= tol && term.rel_d <= tol && term.rel_gap <= tol) {
      term.kind = IpmTermination::Kind::Optimal;
      return term;
    }
    // Track the best iterate; accept it if progress has stalled at a level
    // only marginally above the target (rounding floor).
    const double measure = std::max({term.rel_p, term.rel_d, term.rel_gap});
    if (measure < 0.95 * best_measure) {
      best_measure = measure;
      best_x = x;
      best_y = y;
      best_age = 0;
    } else {
      ++best_age;
    }
    if (best_age >= 12 && best_measure <= 50.0 * tol) {
      term.kind = IpmTermination::Kind::Optimal;
      term.x = best_x;
      term.y = best_y;
      return term;
    }
    if (!x.allFinite() || !y.allFinite() || inf_norm(x) > 1e14 ||
        mu > 1e40) {
      term.kind = IpmTermination::Kind::Diverged;
      return term;
    }
    if (iter == opts_.max_iterations) {
      if (best_measure <= 50.0 * tol) {
        term.kind = IpmTermination::Kind::Optimal;
        term.x = best_x;
        term.y = best_y;
      }
      break;
    }

    // Scaling matrix Theta = G^{-1}Z + T^{-1}W, clamped away from zero:
    // underflowed entries (interior variable, vanished multiplier) would
    // push the KKT condition number past what refinement can repair. The
    // clamp perturbs the Newton equation by at most clamp * |dx|, well
    // below the convergence tolerance.
    constexpr double kThetaFloor = 1e-10;
    VectorXd theta = VectorXd::Zero(n);
    for (int j : lo) theta[j] += z[j] / std::max(x[j] - f_.l[j], 1e-300);
    for (int j : hi) theta[j] += w[j] / std::max(f_.u[j] - x[j], 1e-300);
    for (int j = 0; j < n; ++j) {
      if (theta[j] < kThetaFloor && (std::isfinite(f_.l[j]) ||
                                     std::isfinite(f_.u[j]))) {
        theta[j] = kThetaFloor;
      }
    }

    bool ok = false;
    double dpt = dp, ddt = dd;
    for (int attempt = 0; attempt < 4 && !ok; ++attempt) {
      ok = factorize(theta, dpt, ddt);
      if (!ok) {
        dpt *= 100.0;
        ddt *= 100.0;
      }
    }
    if (!ok) {
      term.kind = IpmTermination::Kind::FactorFail;
      return term;
    }
    solve_quality_ = 0.0;

    auto directions = [&](const VectorXd& comp_g, const VectorXd& comp_t,
                          VectorXd& dx, VectorXd& dy, VectorXd& dz,
                          VectorXd& dw) {
      // comp_g[j]: target for G dz + Z dg (j in lo); comp_t likewise.
      VectorXd rhs1 = rd + z - w;
      for (int j : lo) rhs1[j] -= comp_g[j] / std::max(x[j] - f_.l[j], 1e-300);
      for (int j : hi) rhs1[j] += comp_t[j] / std::max(f_.u[j] - x[j], 1e-300);
      VectorXd rhs(n + m);
      rhs.head(n) = rhs1;
      rhs.tail(m) = rp;
      VectorXd sol = solve_kkt(rhs);
      dx = sol.head(n);
      dy = sol.tail(m);
      dz = VectorXd::Zero(n);
      dw = VectorXd::Zero(n);
      for (int j : lo) {
        const double g = std::max(x[j] - f_.l[j], 1e-300);
        dz[j] = (comp_g[j] - z[j] * dx[j]) / g - z[j];
      }
      for (int j : hi) {
        const double t = std::max(f_.u[j] - x[j], 1e-300);
        dw[j] = (comp_t[j] + w[j] * dx[j]) / t - w[j];
      }
    };

    int blk_p = -1, blk_d = -1;
    auto step_lengths = [&](const VectorXd& dx, const VectorXd& dz,
                            const VectorXd& dw, double& ap, double& ad) {
      ap = 1.0;
      ad = 1.0;
      blk_p = blk_d = -1;
      for (int j : lo) {
        const double g = x[j] - f_.l[j];
        if (dx[j] < 0 && -g / dx[j] < ap) {
          ap = -g / dx[j];
          blk_p = j;
        }
        if (dz[j] < 0 && -z[j] / dz[j] < ad) {
          ad = -z[j] / dz[j];
          blk_d = j;
        }
      }
      for (int j : hi) {
        const double t = f_.u[j] - x[j];
        if (dx[j] > 0 && t / dx[j] < ap) {
          ap = t / dx[j];
          blk_p = j;
        }
        if (dw[j] < 0 && -w[j] / dw[j] < ad) {
          ad = -w[j] / dw[j];
          blk_d = j;
        }
      }
    };

    // Affine (predictor) direction. A direction that the refinement could
    // not make accurate poisons the whole step; re-factorise with stronger
    // regularisation until the solves are trustworthy.
    VectorXd zero_g = VectorXd::Zero(n), zero_t = VectorXd::Zero(n);
    VectorXd dxa, dya, dza, dwa;
    directions(zero_g, zero_t, dxa, dya, dza, dwa);
    for (int attempt = 0; attempt < 3 && solve_quality_ > 1e-9; ++attempt) {
      dpt *= 50.0;
      ddt *= 50.0;
      if (!factorize(theta, dpt, ddt)) break;
      solve_quality_ = 0.0;
      directions(zero_g, zero_t, dxa, dya, dza, dwa);
    }
    double apa, ada;
    step_lengths(dxa, dza, dwa, apa, ada);

    double mu_aff = 0.0;
    if (nb > 0) {
      for (int j : lo) {
        mu_aff += (x[j] - f_.l[j] + apa * dxa[j]) * (z[j] + ada * dza[j]);
      }
      for (int j : hi) {
        mu_aff += (f_.u[j] - x[j] - apa * dxa[j]) * (w[j] + ada * dwa[j]);
      }
      mu_aff /= nb;
    }
    double sigma =
        mu > 0 ? std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3.0) : 0.0;
    // Keep the complementarity from racing ahead of feasibility: once the
    // gap undercuts the residuals the Newton step degenerates into crippled
    // boundary-following, so recentre instead.
    const double resid = std::max(term.rel_p, term.rel_d);
    if (term.rel_gap < 0.1 * resid) sigma = std::max(sigma, 0.5);
    if (term.rel_gap < 0.01 * resid) sigma = std::max(sigma, 0.95);

    // Corrector.
    VectorXd comp_g = VectorXd::Zero(n), comp_t = VectorXd::Zero(n);
    for (int j : lo) comp_g[j] = sigma * mu - dxa[j] * dza[j];
    for (int j : hi) comp_t[j] = sigma * mu + dxa[j] * dwa[j];
    VectorXd dx, dy, dz, dw;
    directions(comp_g, comp_t, dx, dy, dz, dw);

    double ap, ad;
    step_lengths(dx, dz, dw, ap, ad);

    // Centrality corrections: when a step collapses, push the outlying
    // complementarity products toward mu and retry (same factorization).
    for (int extra = 0; extra < 3 && std::min(ap, ad) < 0.3; ++extra) {
      const double mu_ref = std::max(sigma * mu, 1e-2 * mu);
      VectorXd cg = comp_g, ctt = comp_t;
      const double a_try_p = std::min(1.0, 1.4 * ap + 0.05);
      const double a_try_d = std::min(1.0, 1.4 * ad + 0.05);
      for (int j : lo) {
        const double gp = x[j] - f_.l[j] + a_try_p * dx[j];
        const double zp = z[j] + a_try_d * dz[j];
        const double prod = gp * zp;
        cg[j] += std::clamp(prod, 0.1 * mu_ref, 10.0 * mu_ref) - prod;
      }
      for (int j : hi) {
        const double tp = f_.u[j] - x[j] - a_try_p * dx[j];
        const double wp = w[j] + a_try_d * dw[j];
        const double prod = tp * wp;
        ctt[j] += std::clamp(prod, 0.1 * mu_ref, 10.0 * mu_ref) - prod;
      }
      VectorXd dx2, dy2, dz2, dw2;
      directions(cg, ctt, dx2, dy2, dz2, dw2);
      double ap2, ad2;
      step_lengths(dx2, dz2, dw2, ap2, ad2);
      if (std::min(ap2, ad2) > 1.05 * std::min(ap, ad)) {
        dx = dx2;
        dy = dy2;
        dz = dz2;
        dw = dw2;
        ap = ap2;
        ad = ad2;
        comp_g = cg;
        comp_t = ctt;
      } else {
        break;
      }
    }

    const double frac = std::max(0.995, 1.0 - 0.1 * mu);
    ap = std::min(1.0, frac * ap);
    ad = std::min(1.0, frac * ad);
    if (nb == 0) ap = ad = 1.0;
    if (!dx.allFinite() || !dy.allFinite() || !dz.allFinite() ||
        !dw.allFinite()) {
      term.kind = IpmTermination::Kind::Diverged;
      return term;
    }

    if (opts_.verbose) {
      VectorXd rd_pred = rd;
      rd_pred -= ad * (f_.A.transpose() * dy + dz - dw);
      if (f_.has_q) rd_pred += ap * (f_.Q * dx);
      std::fprintf(stderr,
                   "      step ap %.3e ad %.3e q %.2e rdpred %.2e dxmax %.2e\n",
                   ap, ad, solve_quality_, inf_norm(rd_pred), inf_norm(dx));
    }
    x += ap * dx;
    y += ad * dy;
    for (int j : lo) z[j] += ad * dz[j];
    for (int j : hi) w[j] += ad * dw[j];
  }
  return term;
}

// ---------------------------------------------------------------------------
// Conversion, scaling, classification.
// ---------------------------------------------------------------------------

struct Conversion {
  StdForm form;
  std::vector<int> fixed_cols;        // user columns substituted out
  std::vector<double> fixed_vals;
  std::vector<int> live_cols;         // user column -> internal column
  int user_n = 0, user_m = 0;
  VectorXd row_scale, col_scale;      // Ruiz scales (internal space)
  double obj_scale = 1.0;
  double primal_scale = 1.0;          // uniform x magnitude normalisation
};

// Builds the scaled internal standard form from a user model.
Conversion convert(const LinearProgram& lp) {
  Conversion cv;
  cv.user_n = lp.num_vars();
  cv.user_m = lp.num_rows();
  const int un = cv.user_n, um = cv.user_m;

  std::vector<int> map(un, -1);
  for (int j = 0; j < un; ++j) {
    const double lj = lp.lower(j), uj = lp.upper(j);
    if (lj > uj) throw SolverError("variable with lower bound above upper");
    if (std::isfinite(lj) && lj == uj) {
      cv.fixed_cols.push_back(j);
      cv.fixed_vals.push_back(lj);
    }
  }
  int live = 0;
  {
    size_t k = 0;
    for (int j = 0; j < un; ++j) {
      if (k < cv.fixed_cols.size() && cv.fixed_cols[k] == j) {
        ++k;
        continue;
      }
      map[j] = live++;
    }
  }
  cv.live_cols = map;

  const int n_slack = [&] {
    int s = 0;
    for (int r = 0; r < um; ++r) {
      if (lp.sense(r) != RowSense::Equal) ++s;
    }
    return s;
  }();
  StdForm& f = cv.form;
  f.n = live + n_slack;
  f.m = um;
  f.c0 = lp.objective_constant();
  f.c = VectorXd::Zero(f.n);
  f.l = VectorXd::Constant(f.n, -kInf);
  f.u = VectorXd::Constant(f.n, kInf);
  f.b = lp.rhs_vector();

  for (int j = 0; j < un; ++j) {
    if (map[j] < 0) {
      f.c0 += lp.cost(j) * lp.lower(j);
      continue;
    }
    f.c[map[j]] = lp.cost(j);
    f.l[map[j]] = lp.lower(j);
    f.u[map[j]] = lp.upper(j);
  }

  // Constraint matrix: substitute fixed columns into b, append slacks.
  SpMat a_user = lp.constraint_matrix();
  std::vector<Triplet> trips;
  trips.reserve(a_user.nonZeros() + n_slack);
  for (int j = 0; j < a_user.outerSize(); ++j) {
    for (SpMat::InnerIterator it(a_user, j); it; ++it) {
      const int col = static_cast<int>(it.col());
      if (map[col] < 0) {
        f.b[it.row()] -= it.value() * lp.lower(col);
      } else {
        trips.emplace_back(it.row(), map[col], it.value());
      }
    }
  }
  int sj = live;
  for (int r = 0; r < um; ++r) {
    switch (lp.sense(r)) {
      case RowSense::LessEqual:
        trips.emplace_back(r, sj, 1.0);
        f.l[sj] = 0.0;
        ++sj;
        break;
      case RowSense::GreaterEqual:
        trips.emplace_back(r, sj, 1.0);
        f.u[sj] = 0.0;
        ++sj;
        break;
      case RowSense::Equal:
        break;
    }
  }
  f.A.resize(um, f.n);
  f.A.setFromTriplets(trips.begin(), trips.end());
  f.A.makeCompressed();

  // Quadratic part. Q stores both triangles, so entry (i,j) contributes
  // 0.5*q_ij*x_i*x_j; fixed columns fold into c and the constant.
  if (lp.has_quadratic()) {
    SpMat q_user = lp.quadratic_matrix();
    std::vector<Triplet> qt;
    for (int j = 0; j < q_user.outerSize(); ++j) {
      for (SpMat::InnerIterator it(q_user, j); it; ++it) {
        const int qi = static_cast<int>(it.row());
        const int qj = static_cast<int>(it.col());
        const bool fi = map[qi] < 0, fj = map[qj] < 0;
        if (fi && fj) {
          f.c0 += 0.5 * it.value() * lp.lower(qi) * lp.lower(qj);
        } else if (fi) {
          f.c[map[qj]] += 0.5 * it.value() * lp.lower(qi);
        } else if (fj) {
          f.c[map[qi]] += 0.5 * it.value() * lp.lower(qj);
        } else {
          qt.emplace_back(map[qi], map[qj], it.value());
        }
      }
    }
    if (!qt.empty()) {
      f.Q.resize(f.n, f.n);
      f.Q.setFromTriplets(qt.begin(), qt.end());
      f.Q.makeCompressed();
      f.has_q = true;
    }
  }

  // Scaling: Ruiz on [A | b] fixes a coherent magnitude for matrix entries,
  // rhs, and (through the pseudo-column) the primal variables; columns whose
  // bounds are still large are normalised afterwards, and a final row pass
  // re-unitises rows against entries and rhs alike.
  {
    double db = 1.0;
    ruiz_scale(f.A, f.b, cv.row_scale, cv.col_scale, db);
    cv.primal_scale = 1.0 / db;
    // Bound normalisation in the scaled metric.
    for (int j = 0; j < f.n; ++j) {
      double span = 0.0;
      if (std::isfinite(f.l[j])) {
        span = std::max(span, std::abs(f.l[j]) /
                                  (cv.col_scale[j] * cv.primal_scale));
      }
      if (std::isfinite(f.u[j])) {
        span = std::max(span, std::abs(f.u[j]) /
                                  (cv.col_scale[j] * cv.primal_scale));
      }
      if (span > 1.0) cv.col_scale[j] *= span;
    }
    // Row re-unitisation against both entries and the scaled rhs.
    VectorXd row_max = VectorXd::Zero(f.m);
    for (int j = 0; j < f.A.outerSize(); ++j) {
      for (SpMat::InnerIterator it(f.A, j); it; ++it) {
        const double v = std::abs(it.value()) * cv.row_scale[it.row()] *
                         cv.col_scale[it.col()];
        row_max[it.row()] = std::max(row_max[it.row()], v);
      }
    }
    for (int i = 0; i < f.m; ++i) {
      row_max[i] = std::max(row_max[i], std::abs(f.b[i]) * cv.row_scale[i] /
                                            cv.primal_scale);
      if (row_max[i] > 0) cv.row_scale[i] /= row_max[i];
    }
    // Apply.
    std::vector<Triplet> st;
    st.reserve(f.A.nonZeros());
    for (int j = 0; j < f.A.outerSize(); ++j) {
      for (SpMat::InnerIterator it(f.A, j); it; ++it) {
        st.emplace_back(it.row(), it.col(),
                        it.value() * cv.row_scale[it.row()] *
                            cv.col_scale[it.col()]);
      }
    }
    f.A.setFromTriplets(st.begin(), st.end());
    for (int i = 0; i < f.m; ++i) {
      f.b[i] *= cv.row_scale[i] / cv.primal_scale;
    }
    for (int j = 0; j < f.n; ++j) {
      f.c[j] *= cv.col_scale[j] * cv.primal_scale;
      const double full = cv.col_scale[j] * cv.primal_scale;
      if (std::isfinite(f.l[j])) f.l[j] /= full;
      if (std::isfinite(f.u[j])) f.u[j] /= full;
    }
    if (f.has_q) {
      std::vector<Triplet> qt;
      qt.reserve(f.Q.nonZeros());
      for (int j = 0; j < f.Q.outerSize(); ++j) {
        for (SpMat::InnerIterator it(f.Q, j); it; ++it) {
          qt.emplace_back(it.row(), it.col(),
                          it.value() * cv.col_scale[it.row()] *
                              cv.col_scale[it.col()] * cv.primal_scale *
                              cv.primal_scale);
        }
      }
      f.Q.setFromTriplets(qt.begin(), qt.end());
    }
    double cmax = inf_norm(f.c);
    if (f.has_q) {
      for (int j = 0; j < f.Q.outerSize(); ++j) {
        for (SpMat::InnerIterator it(f.Q, j); it; ++it) {
          cmax = std::max(cmax, std::abs(it.value()));
        }
      }
    }
    cv.obj_scale = cmax > 0 ? 1.0 / cmax : 1.0;
    f.c *= cv.obj_scale;
    if (f.has_q) f.Q *= cv.obj_scale;
  }
  if (std::getenv("BENDERSKIT_DEBUG_SCALE")) {
    double umax = 0, lmax = 0;
    for (int j = 0; j < f.n; ++j) {
      if (std::isfinite(f.u[j])) umax = std::max(umax, std::abs(f.u[j]));
      if (std::isfinite(f.l[j])) lmax = std::max(lmax, std::abs(f.l[j]));
    }
    std::fprintf(stderr,
                 "scale: m=%d n=%d |b|=%.2e sigma=%.2e objscale=%.2e "
                 "row[%.2e,%.2e] col[%.2e,%.2e] lmax=%.2e umax=%.2e\n",
                 f.m, f.n, inf_norm(f.b), cv.primal_scale, cv.obj_scale,
                 cv.row_scale.minCoeff(), cv.row_scale.maxCoeff(),
                 cv.col_scale.minCoeff(), cv.col_scale.maxCoeff(), lmax, umax);
  }
  return cv;
}

SolveOutcome extract(const Conversion& cv, const IpmTermination& term,
                     const LinearProgram& lp) {
  SolveOutcome out;
  out.status = SolveStatus::Optimal;
  out.iterations = term.iterations;
  out.primal = VectorXd::Zero(cv.user_n);
  {
    size_t k = 0;
    for (int j = 0; j < cv.user_n; ++j) {
      if (cv.live_cols[j] < 0) {
        out.primal[j] = cv.fixed_vals[k++];
      } else {
        const int jj = cv.live_cols[j];
        out.primal[j] = term.x[jj] * cv.col_scale[jj] * cv.primal_scale;
      }
    }
  }
  out.row_duals = VectorXd::Zero(cv.user_m);
  for (int i = 0; i < cv.user_m; ++i) {
    out.row_duals[i] =
        term.y[i] * cv.row_scale[i] / (cv.obj_scale * cv.primal_scale);
  }
  out.objective = lp.objective_value(out.primal);
  return out;
}

// Elastic feasibility probe on the user model: minimise the per-row
// relative violation. Zero optimum certifies feasibility.
LinearProgram make_primal_phase1_lp(const LinearProgram& lp) {
  LinearProgram ph;
  for (int j = 0; j < lp.num_vars(); ++j) {
    ph.add_variable(lp.lower(j), lp.upper(j), 0.0);
  }
  auto a = lp.constraint_matrix();
  Eigen::SparseMatrix<double, Eigen::RowMajor> ar(a);
  for (int r = 0; r < lp.num_rows(); ++r) {
    std::vector<std::pair<int, double>> entries;
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(ar, r);
         it; ++it) {
      entries.push_back({static_cast<int>(it.col()), it.value()});
    }
    const double weight = 1.0 / (1.0 + std::abs(lp.rhs(r)));
    const RowSense sense = lp.sense(r);
    if (sense == RowSense::LessEqual || sense == RowSense::Equal) {
      entries.push_back({ph.add_variable(0.0, kInf, weight), -1.0});
    }
    if (sense == RowSense::GreaterEqual || sense == RowSense::Equal) {
      entries.push_back({ph.add_variable(0.0, kInf, weight), 1.0});
    }
    ph.add_row(entries, sense, lp.rhs(r));
  }
  return ph;
}

// Elastic dual feasibility probe for LPs: stationarity rows
//   sum_r a_rj y_r + z_j - w_j + t+ - t- = c_j
// with sense-constrained y and bound-pattern z, w. A positive optimum means
// the dual is infeasible, i.e. a feasible primal is unbounded.
LinearProgram make_dual_phase1_lp(const LinearProgram& lp) {
  LinearProgram ph;
  const int m = lp.num_rows();
  for (int r = 0; r < m; ++r) {
    switch (lp.sense(r)) {
      case RowSense::LessEqual:
        ph.add_variable(-kInf, 0.0, 0.0);
        break;
      case RowSense::GreaterEqual:
        ph.add_variable(0.0, kInf, 0.0);
        break;
      case RowSense::Equal:
        ph.add_variable(-kInf, kInf, 0.0);
        break;
    }
  }
  auto a = lp.constraint_matrix();  // column-major: iterate per variable
  for (int j = 0; j < lp.num_vars(); ++j) {
    std::vector<std::pair<int, double>> entries;
    for (Eigen::SparseMatrix<double>::InnerIterator it(a, j); it; ++it) {
      entries.push_back({static_cast<int>(it.row()), it.value()});
    }
    if (std::isfinite(lp.lower(j))) {
      entries.push_back({ph.add_variable(0.0, kInf, 0.0), 1.0});
    }
    if (std::isfinite(lp.upper(j))) {
      entries.push_back({ph.add_variable(0.0, kInf, 0.0), -1.0});
    }
    const double weight = 1.0 / (1.0 + std::abs(lp.cost(j)));
    entries.push_back({ph.add_variable(0.0, kInf, weight), 1.0});
    entries.push_back({ph.add_variable(0.0, kInf, weight), -1.0});
    ph.add_row(entries, RowSense::Equal, lp.cost(j));
  }
  return ph;
}

// Bounds-only model (no rows): solvable coordinate-wise.
SolveOutcome solve_box(const LinearProgram& lp) {
  SolveOutcome out;
  const int n = lp.num_vars();
  out.primal = VectorXd::Zero(n);
  out.row_duals = VectorXd::Zero(0);
  for (int j = 0; j < n; ++j) {
    const double c = lp.cost(j), l = lp.lower(j), u = lp.upper(j);
    if (l > u) {
      out.status = SolveStatus::Infeasible;
      out.message = "conflicting bounds";
      return out;
    }
    if (c > 0) {
      if (!std::isfinite(l)) {
        out.status = SolveStatus::Unbounded;
        return out;
      }
      out.primal[j] = l;
    } else if (c < 0) {
      if (!std::isfinite(u)) {
        out.status = SolveStatus::Unbounded;
        return out;
      }
      out.primal[j] = u;
    } else {
      out.primal[j] = std::isfinite(l) ? std::max(l, std::min(0.0, u))
                                       : std::min(u, 0.0);
      if (!std::isfinite(out.primal[j])) out.primal[j] = 0.0;
    }
  }
  out.status = SolveStatus::Optimal;
  out.objective = lp.objective_value(out.primal);
  return out;
}

}  // namespace

thread_local int classifier_depth = 0;

SolveOutcome solve_ipm(const LinearProgram& lp, const SolverOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  auto finish = [&](SolveOutcome out) {
    out.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return out;
  };

  if (!opts.dump_lp_path.empty()) write_lp_file(lp, opts.dump_lp_path);

  if (lp.num_rows() == 0 && !lp.has_quadratic()) return finish(solve_box(lp));

  Conversion cv;
  try {
    cv = convert(lp);
  } catch (const SolverError& e) {
    SolveOutcome out;
    out.status = SolveStatus::Infeasible;
    out.message = e.what();
    return finish(out);
  }

  // User-space termination weights: each residual is measured against its
  // own row's rhs (column's cost), so violations in small-magnitude rows
  // cannot hide behind a large global norm.
  TerminationWeights weights;
  {
    weights.rp = VectorXd(cv.form.m);
    for (int i = 0; i < cv.form.m; ++i) {
      weights.rp[i] = cv.primal_scale /
                      (cv.row_scale[i] * (1.0 + std::abs(lp.rhs(i))));
    }
    weights.rd = VectorXd(cv.form.n);
    std::vector<double> user_cost(cv.form.n, 0.0);
    for (int j = 0; j < lp.num_vars(); ++j) {
      if (cv.live_cols[j] >= 0) {
        user_cost[cv.live_cols[j]] = std::abs(lp.cost(j));
      }
    }
    for (int j = 0; j < cv.form.n; ++j) {
      weights.rd[j] = 1.0 / (cv.col_scale[j] * cv.obj_scale *
                             cv.primal_scale * (1.0 + user_cost[j]));
    }
    // Scaled complementarity maps to user units through the objective scale
    // alone; column and primal scales cancel pairwise.
    weights.gap = 1.0 / cv.obj_scale;
  }

  IpmCore core(cv.form, opts, &weights);
  IpmTermination term = core.run();
  if (term.kind == IpmTermination::Kind::Optimal) {
    SolveOutcome out = extract(cv, term, lp);
    out.message = "optimal";
    return finish(out);
  }

  // Did not converge: classify through elastic phase-1 solves on the user
  // model (full scaling path), unless this is itself a classifier solve.
  SolveOutcome out;
  out.iterations = term.iterations;
  if (classifier_depth > 0) {
    out.status = SolveStatus::NumericalFailure;
    out.message = "no convergence within iteration limit";
    return finish(out);
  }
  SolverOptions aux = opts;
  aux.tolerance = std::max(opts.tolerance, 1e-9);
  aux.dump_lp_path.clear();
  aux.verbose = false;

  ++classifier_depth;
  struct DepthGuard {
    ~DepthGuard() { --classifier_depth; }
  } guard;

  SolveOutcome p1 = solve_ipm(make_primal_phase1_lp(lp), aux);
  if (!p1.optimal()) {
    out.status = SolveStatus::NumericalFailure;
    out.message = "no convergence; feasibility probe also failed";
    return finish(out);
  }
  if (p1.objective > 1e-7) {
    out.status = SolveStatus::Infeasible;
    out.message =
        "phase-1 relative infeasibility " + std::to_string(p1.objective);
    return finish(out);
  }
  if (lp.has_quadratic()) {
    out.status = SolveStatus::NumericalFailure;
    out.message = "feasible QP did not converge";
    return finish(out);
  }
  SolveOutcome d1 = solve_ipm(make_dual_phase1_lp(lp), aux);
  if (d1.optimal() && d1.objective > 1e-7) {
    out.status = SolveStatus::Unbounded;
    out.message = "primal feasible, dual infeasible";
    return finish(out);
  }
  out.status = SolveStatus::NumericalFailure;
  out.message = "no convergence within iteration limit";
  return finish(out);
}

}  // namespace benderskit
