#include "gep/ipm.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <stdexcept>
#include <vector>

#include "gep/kernels.hpp"

namespace gep {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_psd(const SpMat& M, const char* what) {
  if (M.nonZeros() == 0) return;
  const double scale = Eigen::Map<const Vec>(M.valuePtr(), M.nonZeros()).cwiseAbs().maxCoeff();
  if (scale == 0.0) return;
  SpMat shifted = M;
  SpMat ident(M.rows(), M.cols());
  ident.setIdentity();
  shifted += ident * (1e-10 * scale);
  Eigen::SimplicialLDLT<SpMat, Eigen::Lower> ldlt(shifted);
  if (ldlt.info() != Eigen::Success)
    throw std::invalid_argument(std::string(what) + ": matrix is not positive semidefinite");
  if (ldlt.vectorD().minCoeff() < -1e-7 * scale)
    throw std::invalid_argument(std::string(what) + ": matrix is not positive semidefinite");
}

// The working form after eliminating fixed variables (lower == upper),
// dropping structurally empty rows, and scaling.
struct Reduced {
  int n = 0, me = 0, mi = 0;
  bool has_q = false;
  SpMat Q, A, G, P;       // scaled
  Vec c, b, h, l, u, r;   // scaled (bounds are not scaled)
  double d = 0.0;

  double obj_scale = 1.0, qc_scale = 1.0;
  Vec eq_scale, in_scale;  // per-row multipliers applied to A/G

  std::vector<int> orig_var;  // reduced -> original variable index
  std::vector<int> eq_rows, in_rows;  // reduced -> original row index
  Vec full_value;             // original-length primal, fixed entries set

  std::vector<int> idx_lo, idx_up;  // reduced coords with finite bounds
};

// Pulls the submatrix of kept columns and folds fixed-column contributions
// into the right-hand side via `absorb`.
SpMat select_columns(const SpMat& M, const std::vector<int>& red_of_orig, int n_red,
                     const Vec& fixed_full, Vec& absorb) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(M.nonZeros());
  for (int col = 0; col < M.outerSize(); ++col) {
    const int rc = red_of_orig[col];
    for (SpMat::InnerIterator it(M, col); it; ++it) {
      if (rc >= 0)
        trip.emplace_back(static_cast<int>(it.row()), rc, it.value());
      else
        absorb[it.row()] += it.value() * fixed_full[col];
    }
  }
  SpMat out(M.rows(), n_red);
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

struct BuildOutcome {
  bool infeasible = false;
  std::string message;
};

BuildOutcome build_reduced(const CanonicalProblem& prob, Reduced& red) {
  const int n0 = prob.num_vars;
  std::vector<int> red_of_orig(n0, -1);
  red.full_value = Vec::Zero(n0);

  for (int j = 0; j < n0; ++j) {
    if (prob.lower[j] > prob.upper[j])
      return {true, "variable bounds cross"};
    if (prob.lower[j] == prob.upper[j]) {
      red.full_value[j] = prob.lower[j];
    } else {
      red_of_orig[j] = static_cast<int>(red.orig_var.size());
      red.orig_var.push_back(j);
    }
  }
  red.n = static_cast<int>(red.orig_var.size());

  // Objective with fixed columns folded in (constant offset is not tracked;
  // objective values are recomputed on the original problem).
  Vec c_red(red.n);
  for (int i = 0; i < red.n; ++i) c_red[i] = prob.c[red.orig_var[i]];
  if (prob.Q.nonZeros() > 0) {
    Vec qc = Vec::Zero(n0);  // Q * fixed_part
    for (int col = 0; col < prob.Q.outerSize(); ++col) {
      if (red_of_orig[col] >= 0) continue;
      const double v = red.full_value[col];
      if (v == 0.0) continue;
      for (SpMat::InnerIterator it(prob.Q, col); it; ++it) qc[it.row()] += it.value() * v;
    }
    for (int i = 0; i < red.n; ++i) c_red[i] += qc[red.orig_var[i]];
  }

  // Submatrices, absorbing fixed columns into the right-hand sides.
  Vec abs_eq = Vec::Zero(prob.num_eq()), abs_in = Vec::Zero(prob.num_in());
  SpMat A_all = select_columns(prob.a_eq, red_of_orig, red.n, red.full_value, abs_eq);
  SpMat G_all = select_columns(prob.a_in, red_of_orig, red.n, red.full_value, abs_in);
  Vec beq = prob.b_eq - abs_eq;
  Vec bin = prob.b_in - abs_in;

  // Keep only rows with entries; constant rows feasibility-checked here.
  std::vector<char> eq_nonempty(prob.num_eq(), 0), in_nonempty(prob.num_in(), 0);
  for (int col = 0; col < A_all.outerSize(); ++col)
    for (SpMat::InnerIterator it(A_all, col); it; ++it) eq_nonempty[it.row()] = 1;
  for (int col = 0; col < G_all.outerSize(); ++col)
    for (SpMat::InnerIterator it(G_all, col); it; ++it) in_nonempty[it.row()] = 1;
  const double feas_tol = 1e-9 * (1.0 + red.full_value.cwiseAbs().maxCoeff());
  for (int i = 0; i < prob.num_eq(); ++i) {
    if (eq_nonempty[i])
      red.eq_rows.push_back(i);
    else if (std::abs(beq[i]) > feas_tol)
      return {true, "equality row with no free variables is violated"};
  }
  for (int i = 0; i < prob.num_in(); ++i) {
    if (in_nonempty[i])
      red.in_rows.push_back(i);
    else if (bin[i] < -feas_tol)
      return {true, "inequality row with no free variables is violated"};
  }
  red.me = static_cast<int>(red.eq_rows.size());
  red.mi = static_cast<int>(red.in_rows.size());

  auto select_rows = [](const SpMat& M, const std::vector<int>& keep) {
    std::vector<int> newrow(M.rows(), -1);
    for (std::size_t k = 0; k < keep.size(); ++k) newrow[keep[k]] = static_cast<int>(k);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(M.nonZeros());
    for (int col = 0; col < M.outerSize(); ++col)
      for (SpMat::InnerIterator it(M, col); it; ++it)
        if (newrow[it.row()] >= 0) trip.emplace_back(newrow[it.row()], col, it.value());
    SpMat out(static_cast<int>(keep.size()), M.cols());
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
  };
  red.A = select_rows(A_all, red.eq_rows);
  red.G = select_rows(G_all, red.in_rows);
  red.b.resize(red.me);
  for (int i = 0; i < red.me; ++i) red.b[i] = beq[red.eq_rows[i]];
  red.h.resize(red.mi);
  for (int i = 0; i < red.mi; ++i) red.h[i] = bin[red.in_rows[i]];

  // Reduced Q (keep x keep block).
  {
    std::vector<Eigen::Triplet<double>> trip;
    for (int col = 0; col < prob.Q.outerSize(); ++col) {
      const int rc = red_of_orig[col];
      if (rc < 0) continue;
      for (SpMat::InnerIterator it(prob.Q, col); it; ++it) {
        const int rr = red_of_orig[it.row()];
        if (rr >= 0) trip.emplace_back(rr, rc, it.value());
      }
    }
    red.Q.resize(red.n, red.n);
    red.Q.setFromTriplets(trip.begin(), trip.end());
  }
  red.c = c_red;

  red.l.resize(red.n);
  red.u.resize(red.n);
  for (int i = 0; i < red.n; ++i) {
    red.l[i] = prob.lower[red.orig_var[i]];
    red.u[i] = prob.upper[red.orig_var[i]];
    if (std::isfinite(red.l[i])) red.idx_lo.push_back(i);
    if (std::isfinite(red.u[i])) red.idx_up.push_back(i);
  }

  // Quadratic cap, fixed columns folded in.
  red.has_q = prob.qcap.has_value();
  if (red.has_q) {
    const QuadConstraint& qc = *prob.qcap;
    Vec r_red(red.n);
    for (int i = 0; i < red.n; ++i) r_red[i] = qc.r[red.orig_var[i]];
    double d_red = qc.d;
    for (int j = 0; j < n0; ++j)
      if (red_of_orig[j] < 0) d_red += qc.r[j] * red.full_value[j];
    if (qc.P.nonZeros() > 0) {
      Vec pc = Vec::Zero(n0);
      for (int col = 0; col < qc.P.outerSize(); ++col) {
        if (red_of_orig[col] >= 0) continue;
        const double v = red.full_value[col];
        if (v == 0.0) continue;
        for (SpMat::InnerIterator it(qc.P, col); it; ++it) pc[it.row()] += it.value() * v;
      }
      for (int i = 0; i < red.n; ++i) r_red[i] += pc[red.orig_var[i]];
      double quad = 0.0;
      for (int col = 0; col < qc.P.outerSize(); ++col) {
        if (red_of_orig[col] >= 0) continue;
        for (SpMat::InnerIterator it(qc.P, col); it; ++it)
          if (red_of_orig[it.row()] < 0)
            quad += red.full_value[it.row()] * it.value() * red.full_value[col];
      }
      d_red += 0.5 * quad;
      std::vector<Eigen::Triplet<double>> trip;
      for (int col = 0; col < qc.P.outerSize(); ++col) {
        const int rc = red_of_orig[col];
        if (rc < 0) continue;
        for (SpMat::InnerIterator it(qc.P, col); it; ++it) {
          const int rr = red_of_orig[it.row()];
          if (rr >= 0) trip.emplace_back(rr, rc, it.value());
        }
      }
      red.P.resize(red.n, red.n);
      red.P.setFromTriplets(trip.begin(), trip.end());
    } else {
      red.P.resize(red.n, red.n);
    }
    red.r = r_red;
    red.d = d_red;
    // A cap with no free variables is a constant: check and drop.
    if (red.P.nonZeros() == 0 &&
        (red.n == 0 || red.r.cwiseAbs().maxCoeff() == 0.0)) {
      if (red.d > feas_tol * (1.0 + std::abs(red.d))) return {true, "quadratic cap violated"};
      red.has_q = false;
    }
  }

  // Scaling: rows of A and G to unit inf-norm, objective and cap to O(1).
  red.eq_scale = Vec::Ones(red.me);
  red.in_scale = Vec::Ones(red.mi);
  for (int k = 0; k < red.A.outerSize(); ++k)
    for (SpMat::InnerIterator it(red.A, k); it; ++it)
      red.eq_scale[it.row()] = std::max(red.eq_scale[it.row()], std::abs(it.value()));
  for (int k = 0; k < red.G.outerSize(); ++k)
    for (SpMat::InnerIterator it(red.G, k); it; ++it)
      red.in_scale[it.row()] = std::max(red.in_scale[it.row()], std::abs(it.value()));
  red.eq_scale = red.eq_scale.cwiseInverse();
  red.in_scale = red.in_scale.cwiseInverse();
  red.A = red.eq_scale.asDiagonal() * red.A;
  red.G = red.in_scale.asDiagonal() * red.G;
  red.b = red.eq_scale.cwiseProduct(red.b);
  red.h = red.in_scale.cwiseProduct(red.h);

  double os = red.n > 0 ? red.c.cwiseAbs().maxCoeff() : 0.0;
  if (red.Q.nonZeros() > 0)
    os = std::max(os, Eigen::Map<const Vec>(red.Q.valuePtr(), red.Q.nonZeros())
                          .cwiseAbs()
                          .maxCoeff());
  red.obj_scale = std::max(1.0, os);
  red.c /= red.obj_scale;
  if (red.Q.nonZeros() > 0) red.Q *= 1.0 / red.obj_scale;

  if (red.has_q) {
    double qs = std::max(std::abs(red.d), red.r.size() ? red.r.cwiseAbs().maxCoeff() : 0.0);
    if (red.P.nonZeros() > 0)
      qs = std::max(qs, Eigen::Map<const Vec>(red.P.valuePtr(), red.P.nonZeros())
                            .cwiseAbs()
                            .maxCoeff());
    red.qc_scale = std::max(1.0, qs);
    red.r /= red.qc_scale;
    red.d /= red.qc_scale;
    if (red.P.nonZeros() > 0) red.P *= 1.0 / red.qc_scale;
  }
  return {};
}

// Sparse KKT with a fixed pattern; values rescattered each iteration.
struct KktSystem {
  int n, me, mi, nq, dim;
  std::vector<int> rows, cols;   // triplet positions (lower triangle)
  std::vector<double> vals;
  std::vector<int> slot;         // position in the compressed value array
  SpMat M;
  Eigen::SimplicialLDLT<SpMat, Eigen::Lower> ldlt;
  bool analyzed = false;

  // segment offsets into the triplet arrays
  int seg_q0 = 0, seg_a0 = 0, seg_g0 = 0, seg_p0 = 0, seg_gq0 = 0, seg_diag0 = 0;
  std::vector<int> gq_cols;
  Vec regdiag;  // regularization actually added, for refinement against M0

  void init(const Reduced& red) {
    n = red.n;
    me = red.me;
    mi = red.mi;
    nq = red.has_q ? 1 : 0;
    dim = n + me + mi + nq;
    rows.clear();
    cols.clear();

    auto push = [&](int r, int c) {
      if (r >= c) {
        rows.push_back(r);
        cols.push_back(c);
      } else {
        rows.push_back(c);
        cols.push_back(r);
      }
    };

    seg_q0 = 0;
    for (int k = 0; k < red.Q.outerSize(); ++k)
      for (SpMat::InnerIterator it(red.Q, k); it; ++it)
        if (it.row() >= it.col()) push(static_cast<int>(it.row()), static_cast<int>(it.col()));
    seg_a0 = static_cast<int>(rows.size());
    for (int k = 0; k < red.A.outerSize(); ++k)
      for (SpMat::InnerIterator it(red.A, k); it; ++it)
        push(n + static_cast<int>(it.row()), static_cast<int>(it.col()));
    seg_g0 = static_cast<int>(rows.size());
    for (int k = 0; k < red.G.outerSize(); ++k)
      for (SpMat::InnerIterator it(red.G, k); it; ++it)
        push(n + me + static_cast<int>(it.row()), static_cast<int>(it.col()));
    seg_p0 = static_cast<int>(rows.size());
    if (nq) {
      for (int k = 0; k < red.P.outerSize(); ++k)
        for (SpMat::InnerIterator it(red.P, k); it; ++it)
          if (it.row() >= it.col()) push(static_cast<int>(it.row()), static_cast<int>(it.col()));
    }
    seg_gq0 = static_cast<int>(rows.size());
    gq_cols.clear();
    if (nq) {
      std::vector<char> used(n, 0);
      for (int k = 0; k < red.P.outerSize(); ++k)
        for (SpMat::InnerIterator it(red.P, k); it; ++it) used[it.col()] = used[it.row()] = 1;
      for (int j = 0; j < n; ++j)
        if (used[j] || red.r[j] != 0.0) gq_cols.push_back(j);
      for (int j : gq_cols) push(n + me + mi, j);
    }
    seg_diag0 = static_cast<int>(rows.size());
    for (int j = 0; j < dim; ++j) push(j, j);

    vals.assign(rows.size(), 0.0);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) trip.emplace_back(rows[i], cols[i], 1.0);
    M.resize(dim, dim);
    M.setFromTriplets(trip.begin(), trip.end());

    slot.resize(rows.size());
    const int* outer = M.outerIndexPtr();
    const int* inner = M.innerIndexPtr();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const int c = cols[i], r = rows[i];
      const int* beg = inner + outer[c];
      const int* end = inner + outer[c + 1];
      const int* pos = std::lower_bound(beg, end, r);
      slot[i] = static_cast<int>(pos - inner);
    }
  }

  // Rebuild numeric values for the current iterate.
  void assemble(const Reduced& red, const Vec& diag_z, const Vec& dw_over_lam, double lamq,
                const Vec& gq, double wq_over_lamq, double reg_p, double reg_d) {
    int t = 0;
    for (int k = 0; k < red.Q.outerSize(); ++k)
      for (SpMat::InnerIterator it(red.Q, k); it; ++it)
        if (it.row() >= it.col()) vals[t++] = it.value();
    for (int k = 0; k < red.A.outerSize(); ++k)
      for (SpMat::InnerIterator it(red.A, k); it; ++it) vals[t++] = it.value();
    for (int k = 0; k < red.G.outerSize(); ++k)
      for (SpMat::InnerIterator it(red.G, k); it; ++it) vals[t++] = it.value();
    if (nq) {
      for (int k = 0; k < red.P.outerSize(); ++k)
        for (SpMat::InnerIterator it(red.P, k); it; ++it)
          if (it.row() >= it.col()) vals[t++] = lamq * it.value();
      for (int j : gq_cols) vals[t++] = gq[j];
    }
    regdiag.resize(dim);
    for (int j = 0; j < n; ++j) {
      vals[t++] = diag_z[j] + reg_p;
      regdiag[j] = reg_p;
    }
    for (int i = 0; i < me; ++i) {
      vals[t++] = -reg_d;
      regdiag[n + i] = -reg_d;
    }
    for (int i = 0; i < mi; ++i) {
      vals[t++] = -dw_over_lam[i] - reg_d;
      regdiag[n + me + i] = -reg_d;
    }
    if (nq) {
      vals[t++] = -wq_over_lamq - reg_d;
      regdiag[n + me + mi] = -reg_d;
    }

    double* mv = M.valuePtr();
    std::fill(mv, mv + M.nonZeros(), 0.0);
    for (std::size_t i = 0; i < vals.size(); ++i) mv[slot[i]] += vals[i];
  }

  bool factorize() {
    if (!analyzed) {
      ldlt.analyzePattern(M);
      analyzed = true;
    }
    ldlt.factorize(M);
    return ldlt.info() == Eigen::Success;
  }

  double last_solve_residual = 0.0;
  double worst_solve_quality = 0.0;  // max over solves of res/(1+|rhs|) since reset

  // Solve against the unregularized system, refining with the factored
  // (regularized) one; the static shift is small enough for this to contract.
  Vec solve(const Vec& rhs) {
    Vec x = ldlt.solve(rhs);
    double best = kInf;
    Vec best_x = x;
    for (int pass = 0; pass < 15; ++pass) {
      Vec res = rhs - M.selfadjointView<Eigen::Lower>() * x + regdiag.cwiseProduct(x);
      const double rn = res.cwiseAbs().maxCoeff();
      if (rn < best) {
        best = rn;
        best_x = x;
      }
      if (rn <= 1e-13 * (1.0 + rhs.cwiseAbs().maxCoeff())) break;
      if (rn > 2.0 * best) break;  // refinement diverging
      x += ldlt.solve(res);
    }
    last_solve_residual = best;
    worst_solve_quality =
        std::max(worst_solve_quality, best / (1.0 + rhs.cwiseAbs().maxCoeff()));
    return best_x;
  }
};

struct Iterate {
  Vec z, y, lam, w, zl, zu;
  double lamq = 0.0, wq = 0.0;
};

struct Direction {
  Vec dz, dy, dlam, dw, dzl, dzu;
  double dlamq = 0.0, dwq = 0.0;
};

double max_step(const Vec& v, const Vec& dv, const std::vector<int>* idx = nullptr) {
  double a = 1.0;
  if (idx) {
    for (int j : *idx)
      if (dv[j] < 0.0) a = std::min(a, -v[j] / dv[j]);
  } else {
    for (int j = 0; j < v.size(); ++j)
      if (dv[j] < 0.0) a = std::min(a, -v[j] / dv[j]);
  }
  return a;
}

}  // namespace

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::IterationLimit: return "iteration_limit";
  }
  return "unknown";
}

SolveResult solve_convex(const CanonicalProblem& prob, const IpmOptions& opts) {
  if (prob.c.size() != prob.num_vars || prob.lower.size() != prob.num_vars ||
      prob.upper.size() != prob.num_vars)
    throw std::invalid_argument("solve_convex: inconsistent problem dimensions");
  if (prob.a_eq.cols() != prob.num_vars || prob.a_in.cols() != prob.num_vars)
    throw std::invalid_argument("solve_convex: constraint matrix width mismatch");
  check_psd(prob.Q, "objective");
  if (prob.qcap) check_psd(prob.qcap->P, "quadratic cap");

  SolveResult out;
  out.primal = Vec::Zero(prob.num_vars);
  out.dual_eq = Vec::Zero(prob.num_eq());
  out.dual_in = Vec::Zero(prob.num_in());
  out.dual_lower = Vec::Zero(prob.num_vars);
  out.dual_upper = Vec::Zero(prob.num_vars);

  Reduced red;
  const BuildOutcome pre = build_reduced(prob, red);
  if (pre.infeasible) {
    out.status = SolveStatus::Infeasible;
    out.message = pre.message;
    return out;
  }

  auto finalize = [&](const Iterate& it, SolveStatus status, int iters) {
    out.status = status;
    out.iterations = iters;
    for (int i = 0; i < red.n; ++i) out.primal[red.orig_var[i]] = it.z[i];
    for (int j = 0; j < prob.num_vars; ++j)
      if (prob.lower[j] == prob.upper[j]) out.primal[j] = red.full_value[j];
    const double os = red.obj_scale;
    for (int i = 0; i < red.me; ++i)
      out.dual_eq[red.eq_rows[i]] = os * red.eq_scale[i] * it.y[i];
    for (int i = 0; i < red.mi; ++i)
      out.dual_in[red.in_rows[i]] = os * red.in_scale[i] * it.lam[i];
    for (int i = 0; i < red.n; ++i) {
      out.dual_lower[red.orig_var[i]] = os * it.zl[i];
      out.dual_upper[red.orig_var[i]] = os * it.zu[i];
    }
    out.dual_qcap = red.has_q ? os * it.lamq / red.qc_scale : 0.0;

    // Reduced costs of fixed variables keep the full-problem stationarity
    // exact; they split into bound multipliers by sign.
    Vec grad = prob.c;
    if (prob.Q.nonZeros() > 0) grad += prob.Q * out.primal;
    if (prob.qcap && out.dual_qcap != 0.0)
      grad += out.dual_qcap * (prob.qcap->P * out.primal + prob.qcap->r);
    grad += prob.a_eq.transpose() * out.dual_eq;
    grad += prob.a_in.transpose() * out.dual_in;
    for (int j = 0; j < prob.num_vars; ++j) {
      if (prob.lower[j] != prob.upper[j]) continue;
      if (grad[j] > 0.0)
        out.dual_lower[j] = grad[j];
      else
        out.dual_upper[j] = -grad[j];
    }

    out.objective = prob.objective_value(out.primal);
    // Lagrangian value at the returned point: a valid dual bound at
    // convergence (complementarity terms are nonpositive for the slacks).
    double dual_obj = out.objective;
    if (prob.num_eq() > 0) dual_obj += out.dual_eq.dot(prob.a_eq * out.primal - prob.b_eq);
    if (prob.num_in() > 0) dual_obj += out.dual_in.dot(prob.a_in * out.primal - prob.b_in);
    if (prob.qcap)
      dual_obj += out.dual_qcap * (0.5 * out.primal.dot(prob.qcap->P * out.primal) +
                                   prob.qcap->r.dot(out.primal) + prob.qcap->d);
    for (int j = 0; j < prob.num_vars; ++j) {
      if (std::isfinite(prob.lower[j]))
        dual_obj -= out.dual_lower[j] * (out.primal[j] - prob.lower[j]);
      if (std::isfinite(prob.upper[j]))
        dual_obj -= out.dual_upper[j] * (prob.upper[j] - out.primal[j]);
    }
    out.dual_objective = dual_obj;
  };

  // Everything fixed: nothing to optimize.
  if (red.n == 0) {
    Iterate empty;
    empty.z.resize(0);
    empty.y = Vec::Zero(red.me);
    empty.lam = Vec::Zero(red.mi);
    empty.zl.resize(0);
    empty.zu.resize(0);
    finalize(empty, SolveStatus::Optimal, 0);
    out.kkt_residual = prob.max_residual(out.primal);
    return out;
  }

  const int n = red.n, me = red.me, mi = red.mi;
  const bool hq = red.has_q;
  const int npairs = mi + static_cast<int>(red.idx_lo.size() + red.idx_up.size()) + (hq ? 1 : 0);

  Iterate it;
  it.z.resize(n);
  for (int j = 0; j < n; ++j) {
    const double l = red.l[j], u = red.u[j];
    if (std::isfinite(l) && std::isfinite(u))
      it.z[j] = 0.5 * (l + u);
    else if (std::isfinite(l))
      it.z[j] = l + 1.0;
    else if (std::isfinite(u))
      it.z[j] = u - 1.0;
    else
      it.z[j] = 0.0;
  }
  it.y = Vec::Zero(me);
  it.w.resize(mi);
  if (mi > 0) {
    const Vec gz = red.G * it.z;
    for (int i = 0; i < mi; ++i) it.w[i] = std::max(1.0, red.h[i] - gz[i]);
  }
  it.lam = Vec::Ones(mi);
  it.zl = Vec::Zero(n);
  it.zu = Vec::Zero(n);
  for (int j : red.idx_lo) it.zl[j] = 1.0;
  for (int j : red.idx_up) it.zu[j] = 1.0;
  auto qval = [&](const Vec& z) {
    double v = red.r.dot(z) + red.d;
    if (red.P.nonZeros() > 0) v += 0.5 * z.dot(red.P * z);
    return v;
  };
  if (hq) {
    it.wq = std::max(1.0, -qval(it.z));
    it.lamq = 1.0;
  }

  KktSystem kkt;
  kkt.init(red);

  const double tol = opts.tolerance;
  const double rhs_norm = std::max({1.0, me ? red.b.cwiseAbs().maxCoeff() : 0.0,
                                    mi ? red.h.cwiseAbs().maxCoeff() : 0.0});
  const double c_norm = 1.0 + red.c.cwiseAbs().maxCoeff();

  Vec gq = Vec::Zero(n);
  double best_progress = kInf;
  int stalled = 0;

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    // Residuals at the current iterate.
    if (hq) {
      gq = red.r;
      if (red.P.nonZeros() > 0) gq += red.P * it.z;
    }
    Vec r_d = red.c;
    if (red.Q.nonZeros() > 0) r_d += red.Q * it.z;
    if (me > 0) r_d += red.A.transpose() * it.y;
    if (mi > 0) r_d += red.G.transpose() * it.lam;
    if (hq) r_d += it.lamq * gq;
    r_d -= it.zl;
    r_d += it.zu;

    Vec r_eq = me > 0 ? Vec(red.A * it.z - red.b) : Vec();
    Vec r_in = mi > 0 ? Vec(red.G * it.z + it.w - red.h) : Vec();
    const double r_q = hq ? qval(it.z) + it.wq : 0.0;

    double compl_sum = mi > 0 ? kern::dot(it.w.data(), it.lam.data(), mi) : 0.0;
    for (int j : red.idx_lo) compl_sum += (it.z[j] - red.l[j]) * it.zl[j];
    for (int j : red.idx_up) compl_sum += (red.u[j] - it.z[j]) * it.zu[j];
    if (hq) compl_sum += it.wq * it.lamq;
    const double mu = npairs > 0 ? compl_sum / npairs : 0.0;

    const double prim_res =
        std::max({me ? r_eq.cwiseAbs().maxCoeff() : 0.0, mi ? r_in.cwiseAbs().maxCoeff() : 0.0,
                  hq ? std::abs(r_q) : 0.0});
    const double dual_res = kern::max_abs(r_d.data(), n);
    const double obj_now = red.c.dot(it.z) +
                           (red.Q.nonZeros() ? 0.5 * it.z.dot(red.Q * it.z) : 0.0);

    if (opts.verbose) {
      double maxpair = 0.0, minpair = kInf;
      int argmax = -1;
      char kind = '?';
      for (int i = 0; i < mi; ++i) {
        const double pr = it.w[i] * it.lam[i];
        if (pr > maxpair) { maxpair = pr; argmax = i; kind = 'w'; }
        minpair = std::min(minpair, pr);
      }
      for (int j : red.idx_lo) {
        const double pr = (it.z[j] - red.l[j]) * it.zl[j];
        if (pr > maxpair) { maxpair = pr; argmax = j; kind = 'l'; }
        minpair = std::min(minpair, pr);
      }
      for (int j : red.idx_up) {
        const double pr = (red.u[j] - it.z[j]) * it.zu[j];
        if (pr > maxpair) { maxpair = pr; argmax = j; kind = 'u'; }
        minpair = std::min(minpair, pr);
      }
      std::fprintf(stderr,
                   "ipm %3d prim %.3e dual %.3e mu %.3e obj %.9e pair[%.1e,%.1e] max %c%d\n",
                   iter, prim_res, dual_res, mu, obj_now, minpair, maxpair, kind, argmax);
    }

    if (prim_res <= tol * rhs_norm && dual_res <= tol * c_norm &&
        mu <= tol * (1.0 + std::abs(obj_now))) {
      finalize(it, SolveStatus::Optimal, iter);
      out.kkt_residual = std::max({prim_res, dual_res, mu});
      return out;
    }

    // Farkas-style infeasibility certificate from the scaled duals.
    {
      double dmax = std::max({me ? it.y.cwiseAbs().maxCoeff() : 0.0,
                              mi ? it.lam.maxCoeff() : 0.0, it.zl.maxCoeff(),
                              it.zu.maxCoeff(), hq ? it.lamq : 0.0});
      if (dmax > 1e4) {
        Vec comb = Vec::Zero(n);
        if (me > 0) comb += red.A.transpose() * it.y;
        if (mi > 0) comb += red.G.transpose() * it.lam;
        comb -= it.zl;
        comb += it.zu;
        double gap = (me ? red.b.dot(it.y) : 0.0) + (mi ? red.h.dot(it.lam) : 0.0);
        for (int j : red.idx_lo) gap -= red.l[j] * it.zl[j];
        for (int j : red.idx_up) gap += red.u[j] * it.zu[j];
        if (hq) {
          comb += it.lamq * gq;
          gap += it.lamq * (gq.dot(it.z) - qval(it.z));
        }
        if (kern::max_abs(comb.data(), n) <= 1e-8 * dmax && gap <= -1e-8 * dmax) {
          finalize(it, SolveStatus::Infeasible, iter);
          out.message = "dual certificate of primal infeasibility";
          return out;
        }
      }
      // Primal ray certificate for unboundedness.
      const double znorm = kern::max_abs(it.z.data(), n);
      if (znorm > 1e9) {
        Vec dir = it.z / znorm;
        bool ray = red.c.dot(dir) < -1e-8;
        if (ray && red.Q.nonZeros() > 0)
          ray = (red.Q * dir).cwiseAbs().maxCoeff() <= 1e-8;
        if (ray && me > 0) ray = (red.A * dir).cwiseAbs().maxCoeff() <= 1e-6;
        if (ray && mi > 0) ray = (red.G * dir).maxCoeff() <= 1e-6;
        if (ray)
          for (int j : red.idx_up)
            if (dir[j] > 1e-6) ray = false;
        if (ray) {
          finalize(it, SolveStatus::Unbounded, iter);
          out.message = "primal ray detected";
          return out;
        }
      }
    }

    const double progress = std::max(prim_res, mu);
    if (progress < best_progress * 0.99) {
      best_progress = progress;
      stalled = 0;
    } else if (++stalled > 40) {
      break;
    }

    // Barrier diagonal and KKT assembly; caps keep the system factorable in
    // double precision when slacks are crushed against their bounds.
    const auto cap = [](double v) { return std::clamp(v, 1e-14, 1e14); };
    Vec diag_z = Vec::Zero(n);
    for (int j : red.idx_lo) diag_z[j] += cap(it.zl[j] / (it.z[j] - red.l[j]));
    for (int j : red.idx_up) diag_z[j] += cap(it.zu[j] / (red.u[j] - it.z[j]));
    Vec dw_over_lam(mi);
    for (int i = 0; i < mi; ++i) dw_over_lam[i] = cap(it.w[i] / it.lam[i]);

    double reg_p = 1e-10, reg_d = 1e-10;
    bool factored = false;
    for (int attempt = 0; attempt < 8 && !factored; ++attempt) {
      kkt.assemble(red, diag_z, dw_over_lam, it.lamq, gq, hq ? it.wq / it.lamq : 1.0, reg_p,
                   reg_d);
      factored = kkt.factorize();
      if (!factored) {
        reg_p *= 100.0;
        reg_d *= 100.0;
      }
    }
    if (!factored) break;

    // Newton solve with explicit complementarity-row targets; res_scale = 0
    // gives a pure corrector direction on the same factorization.
    struct CompTargets {
      Vec w, lo, up;
      double q = 0.0;
    };
    auto newton = [&](double res_scale, const CompTargets& ct) {
      Direction d;
      Vec rhs(kkt.dim);
      Vec rbz = -res_scale * r_d;
      for (int j : red.idx_lo) rbz[j] += ct.lo[j] / (it.z[j] - red.l[j]);
      for (int j : red.idx_up) rbz[j] -= ct.up[j] / (red.u[j] - it.z[j]);
      rhs.segment(0, n) = rbz;
      if (me > 0) rhs.segment(n, me) = -res_scale * r_eq;
      for (int i = 0; i < mi; ++i)
        rhs[n + me + i] = -res_scale * r_in[i] - ct.w[i] / it.lam[i];
      if (hq) rhs[n + me + mi] = -res_scale * r_q - ct.q / it.lamq;

      const Vec sol = kkt.solve(rhs);
      d.dz = sol.segment(0, n);
      d.dy = me > 0 ? Vec(sol.segment(n, me)) : Vec();
      d.dlam = mi > 0 ? Vec(sol.segment(n + me, mi)) : Vec();
      d.dlamq = hq ? sol[n + me + mi] : 0.0;

      d.dw = mi > 0 ? Vec(-res_scale * r_in - red.G * d.dz) : Vec();
      d.dwq = hq ? -res_scale * r_q - gq.dot(d.dz) : 0.0;
      d.dzl = Vec::Zero(n);
      d.dzu = Vec::Zero(n);
      for (int j : red.idx_lo)
        d.dzl[j] = (ct.lo[j] - it.zl[j] * d.dz[j]) / (it.z[j] - red.l[j]);
      for (int j : red.idx_up)
        d.dzu[j] = (ct.up[j] + it.zu[j] * d.dz[j]) / (red.u[j] - it.z[j]);
      return d;
    };

    auto steps = [&](const Direction& d) {
      double ap = 1.0, ad = 1.0;
      if (mi > 0) {
        ap = std::min(ap, max_step(it.w, d.dw));
        ad = std::min(ad, max_step(it.lam, d.dlam));
      }
      for (int j : red.idx_lo) {
        if (d.dz[j] < 0.0) ap = std::min(ap, -(it.z[j] - red.l[j]) / d.dz[j]);
        if (d.dzl[j] < 0.0) ad = std::min(ad, -it.zl[j] / d.dzl[j]);
      }
      for (int j : red.idx_up) {
        if (d.dz[j] > 0.0) ap = std::min(ap, (red.u[j] - it.z[j]) / d.dz[j]);
        if (d.dzu[j] < 0.0) ad = std::min(ad, -it.zu[j] / d.dzu[j]);
      }
      if (hq) {
        if (d.dwq < 0.0) ap = std::min(ap, -it.wq / d.dwq);
        if (d.dlamq < 0.0) ad = std::min(ad, -it.lamq / d.dlamq);
      }
      return std::pair<double, double>(ap, ad);
    };

    // Products of every complementarity pair at step (a_p, a_d) along d.
    const auto trial_products = [&](const Direction& d, double a_p, double a_d,
                                    CompTargets& out_v) {
      out_v.w.resize(mi);
      out_v.lo = Vec::Zero(n);
      out_v.up = Vec::Zero(n);
      for (int i = 0; i < mi; ++i)
        out_v.w[i] = (it.w[i] + a_p * d.dw[i]) * (it.lam[i] + a_d * d.dlam[i]);
      for (int j : red.idx_lo)
        out_v.lo[j] = (it.z[j] - red.l[j] + a_p * d.dz[j]) * (it.zl[j] + a_d * d.dzl[j]);
      for (int j : red.idx_up)
        out_v.up[j] = (red.u[j] - it.z[j] - a_p * d.dz[j]) * (it.zu[j] + a_d * d.dzu[j]);
      out_v.q = hq ? (it.wq + a_p * d.dwq) * (it.lamq + a_d * d.dlamq) : 0.0;
    };

    // Predictor.
    CompTargets ct;
    ct.w.resize(mi);
    ct.lo = Vec::Zero(n);
    ct.up = Vec::Zero(n);
    for (int i = 0; i < mi; ++i) ct.w[i] = -it.w[i] * it.lam[i];
    for (int j : red.idx_lo) ct.lo[j] = -(it.z[j] - red.l[j]) * it.zl[j];
    for (int j : red.idx_up) ct.up[j] = -(red.u[j] - it.z[j]) * it.zu[j];
    ct.q = hq ? -it.wq * it.lamq : 0.0;
    const Direction aff = newton(1.0, ct);
    const auto [apa, ada] = steps(aff);

    double mu_aff = 0.0;
    if (npairs > 0) {
      CompTargets v;
      trial_products(aff, apa, ada, v);
      mu_aff = (v.w.sum() + v.lo.sum() + v.up.sum() + v.q) / npairs;
    }
    double sigma = mu > 0.0 ? std::pow(mu_aff / mu, 3.0) : 0.0;
    sigma = std::clamp(sigma, 1e-8, 1.0 - 1e-8);
    const double target = sigma * mu;

    // Mehrotra corrector.
    for (int i = 0; i < mi; ++i) ct.w[i] += target - aff.dw[i] * aff.dlam[i];
    for (int j : red.idx_lo) ct.lo[j] += target - aff.dz[j] * aff.dzl[j];
    for (int j : red.idx_up) ct.up[j] += target + aff.dz[j] * aff.dzu[j];
    if (hq) ct.q += target - aff.dwq * aff.dlamq;
    Direction dir = newton(1.0, ct);
    auto [ap, ad] = steps(dir);

    // Gondzio centrality correctors: push outlier pairs back toward the
    // sigma*mu box so no single pair blocks the step.
    for (int cc = 0; cc < 3 && npairs > 0; ++cc) {
      const double atp = std::min(1.0, ap + 0.3), atd = std::min(1.0, ad + 0.3);
      CompTargets v;
      trial_products(dir, atp, atd, v);
      CompTargets extra;
      extra.w = Vec::Zero(mi);
      extra.lo = Vec::Zero(n);
      extra.up = Vec::Zero(n);
      extra.q = 0.0;
      const double lo_box = 0.1 * target, hi_box = 10.0 * target;
      double worst = 0.0;
      const auto clipv = [&](double vv) {
        if (vv < lo_box) return lo_box - vv;
        if (vv > hi_box) return hi_box - vv;
        return 0.0;
      };
      for (int i = 0; i < mi; ++i) {
        extra.w[i] = clipv(v.w[i]);
        worst = std::max(worst, std::abs(extra.w[i]));
      }
      for (int j : red.idx_lo) {
        extra.lo[j] = clipv(v.lo[j]);
        worst = std::max(worst, std::abs(extra.lo[j]));
      }
      for (int j : red.idx_up) {
        extra.up[j] = clipv(v.up[j]);
        worst = std::max(worst, std::abs(extra.up[j]));
      }
      if (hq) {
        extra.q = clipv(v.q);
        worst = std::max(worst, std::abs(extra.q));
      }
      if (worst <= 0.1 * target) break;

      const Direction corr = newton(0.0, extra);
      Direction cand = dir;
      cand.dz += corr.dz;
      if (me > 0) cand.dy += corr.dy;
      if (mi > 0) {
        cand.dlam += corr.dlam;
        cand.dw += corr.dw;
      }
      cand.dzl += corr.dzl;
      cand.dzu += corr.dzu;
      cand.dlamq += corr.dlamq;
      cand.dwq += corr.dwq;
      const auto [apc, adc] = steps(cand);
      if (apc + adc >= ap + ad + 0.02) {
        dir = std::move(cand);
        ap = apc;
        ad = adc;
      } else {
        break;
      }
    }

    const double tau = std::min(0.9995, std::max(0.99, 1.0 - 0.1 * mu));
    ap = std::min(1.0, tau * ap);
    ad = std::min(1.0, tau * ad);
    if (opts.verbose)
      std::fprintf(stderr, "      sigma %.3e ap %.3e ad %.3e apa %.3e ada %.3e kktres %.2e\n",
                   sigma, ap, ad, apa, ada, kkt.last_solve_residual);
    if (ap < 1e-11 && ad < 1e-11) break;

    kern::axpy(ap, dir.dz.data(), it.z.data(), n);
    if (me > 0) kern::axpy(ad, dir.dy.data(), it.y.data(), me);
    if (mi > 0) {
      kern::axpy(ap, dir.dw.data(), it.w.data(), mi);
      kern::axpy(ad, dir.dlam.data(), it.lam.data(), mi);
    }
    for (int j : red.idx_lo) it.zl[j] += ad * dir.dzl[j];
    for (int j : red.idx_up) it.zu[j] += ad * dir.dzu[j];
    if (hq) {
      it.wq += ap * dir.dwq;
      it.lamq += ad * dir.dlamq;
    }
  }

  finalize(it, SolveStatus::IterationLimit, opts.max_iterations);
  out.kkt_residual = prob.max_residual(out.primal);
  out.message = "no convergence within the iteration limit";
  return out;
}

}  // namespace gep
