#include "gep/benders.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace gep {

double BendersCut::evaluate(const Vec& x, const Vec& b) const {
  const int u = static_cast<int>(x.size());
  if (coefficients.size() != 2 * u || b.size() != u)
    throw std::invalid_argument("BendersCut::evaluate: dimension mismatch");
  return constant + coefficients.segment(0, u).dot(x) + coefficients.segment(u, u).dot(b);
}

void BendersOptions::validate() const {
  if (eps_thr <= 0.0) throw std::invalid_argument("BendersOptions: eps_thr must be positive");
  if (max_iter < 1) throw std::invalid_argument("BendersOptions: max_iter must be >= 1");
}

SubproblemCut subproblem_cut(const GepInstance& inst, const Vec& x_fixed, const Vec& b_fixed,
                             ModelKind kind, const IpmOptions& opts) {
  const int G = inst.num_generators, N = inst.num_storage, T = inst.num_periods;
  const int U = G + N;
  if (x_fixed.size() != U || b_fixed.size() != U)
    throw std::invalid_argument("subproblem_cut: investment vectors must have length G+N");
  for (int j = 0; j < U; ++j) {
    const double lo = b_fixed[j] * inst.x_min[j], hi = b_fixed[j] * inst.x_max[j];
    if (x_fixed[j] < lo - 1e-9 || x_fixed[j] > hi + 1e-9)
      throw std::invalid_argument("subproblem_cut: (x, b) violates the investment limits");
  }

  CanonicalProblem prob = build_full(inst, kind);
  const VarMap& vm = *prob.varmap;
  for (int j = 0; j < U; ++j) {
    prob.lower[vm.x(j)] = prob.upper[vm.x(j)] = x_fixed[j];
    prob.lower[vm.b(j)] = prob.upper[vm.b(j)] = b_fixed[j];
    prob.integral[vm.b(j)] = 0;
  }
  const SolveResult res = solve_convex(prob, opts);
  if (res.status != SolveStatus::Optimal)
    throw std::runtime_error("subproblem_cut: operational solve returned " +
                             std::string(to_string(res.status)));

  SubproblemCut out;
  out.value = res.objective - inst.c_inv.dot(x_fixed);
  out.dispatch = decode_solution(prob, res.primal);

  // Subgradient from the duals of the rows where x enters the right-hand
  // side: generation limits and storage-capacity limits.
  const RowMap rm{G, N, T};
  Vec grad = Vec::Zero(U);
  for (int t = 0; t < T; ++t)
    for (int g = 0; g < G; ++g)
      grad[g] -= res.dual_in[rm.in_gen(t, g)] * inst.cap_factor(t, g);
  for (int t = 0; t <= T; ++t)
    for (int n = 0; n < N; ++n)
      grad[G + n] -= res.dual_in[rm.in_scap(t, n)] * inst.delta;

  out.cut.coefficients = Vec::Zero(2 * U);
  out.cut.coefficients.segment(0, U) = grad;
  out.cut.constant = out.value - grad.dot(x_fixed);
  return out;
}

BoundsTrace run_benders(const GepInstance& inst, const BendersOptions& opts) {
  inst.validate();
  opts.validate();
  const int U = inst.num_units();

  BoundsTrace trace;
  std::vector<BendersCut> cuts;

  // Master over (x, b, theta): investment limits plus accumulated cuts.
  const auto build_master = [&]() {
    CanonicalProblem m;
    m.num_vars = 2 * U + 1;
    const int theta = 2 * U;
    m.c = Vec::Zero(m.num_vars);
    m.c.segment(0, U) = inst.c_inv;
    m.c[theta] = 1.0;
    m.lower = Vec::Zero(m.num_vars);
    m.upper = Vec::Constant(m.num_vars, std::numeric_limits<double>::infinity());
    for (int j = 0; j < U; ++j) {
      m.upper[j] = inst.x_max[j];
      m.upper[U + j] = 1.0;
    }
    m.integral.assign(m.num_vars, 0);
    for (int j = 0; j < U; ++j) m.integral[U + j] = 1;
    m.a_eq.resize(0, m.num_vars);
    m.b_eq.resize(0);

    std::vector<Eigen::Triplet<double>> trip;
    const int ncuts = static_cast<int>(cuts.size());
    m.b_in = Vec::Zero(2 * U + ncuts);
    for (int j = 0; j < U; ++j) {
      if (inst.x_min[j] != 0.0) trip.emplace_back(j, U + j, inst.x_min[j]);
      trip.emplace_back(j, j, -1.0);
      trip.emplace_back(U + j, j, 1.0);
      trip.emplace_back(U + j, U + j, -inst.x_max[j]);
    }
    for (int c = 0; c < ncuts; ++c) {
      const int row = 2 * U + c;
      for (int j = 0; j < 2 * U; ++j)
        if (cuts[c].coefficients[j] != 0.0) trip.emplace_back(row, j, cuts[c].coefficients[j]);
      trip.emplace_back(row, theta, -1.0);
      m.b_in[row] = -cuts[c].constant;
    }
    m.a_in.resize(2 * U + ncuts, m.num_vars);
    m.a_in.setFromTriplets(trip.begin(), trip.end());
    m.Q.resize(m.num_vars, m.num_vars);
    return m;
  };

  double lb = -std::numeric_limits<double>::infinity();
  double ub = std::numeric_limits<double>::infinity();

  for (int i = 0; i < opts.max_iter; ++i) {
    const auto t0 = std::chrono::steady_clock::now();

    const SolveResult master = solve_mip(build_master(), opts.master_mip);
    if (master.status != SolveStatus::Optimal) {
      trace.status = TraceStatus::SolverError;
      trace.error = "master solve: " + std::string(to_string(master.status));
      return trace;
    }
    const double lb_cand = master.objective;
    Vec x_bar = master.primal.segment(0, U);
    Vec b_bar = master.primal.segment(U, U);
    // Clamp the relaxation jitter so the subproblem precondition holds.
    for (int j = 0; j < U; ++j) {
      const double lo = b_bar[j] * inst.x_min[j], hi = b_bar[j] * inst.x_max[j];
      x_bar[j] = std::min(std::max(x_bar[j], lo), hi);
    }

    SubproblemCut sp;
    try {
      sp = subproblem_cut(inst, x_bar, b_bar, opts.kind, opts.convex);
    } catch (const std::exception& e) {
      trace.status = TraceStatus::SolverError;
      trace.error = e.what();
      return trace;
    }
    const double ub_cand = inst.c_inv.dot(x_bar) + sp.value;

    lb = std::max(lb, lb_cand);
    ub = std::min(ub, ub_cand);
    if (ub_cand <= ub) {
      trace.feasible = sp.dispatch;
      trace.has_feasible = true;
    }
    const double gap = optimality_gap(ub, std::min(lb, ub));
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    trace.rows.push_back(
        {i, static_cast<int>(cuts.size()), lb_cand, ub_cand, lb, ub, gap, ms});
    trace.final_lb = lb;
    trace.final_ub = ub;

    if (gap <= opts.eps_thr) {
      trace.status = TraceStatus::Converged;
      return trace;
    }
    cuts.push_back(sp.cut);
  }
  trace.status = TraceStatus::IterationLimit;
  return trace;
}

}  // namespace gep
