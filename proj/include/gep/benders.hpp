#pragma once

#include "gep/bounds.hpp"

namespace gep {

// Optimality cut theta >= constant + coefficients'(x, b). Coefficients on the
// b block are zero: the operational value function depends on b only through
// the investment limits, which live in the master.
struct BendersCut {
  double constant = 0.0;
  Vec coefficients;  // length 2(G+N), ordered (x, b)

  double evaluate(const Vec& x, const Vec& b) const;
};

struct BendersOptions {
  ModelKind kind = ModelKind::Milp;
  double eps_thr = 0.01;
  int max_iter = 1000;
  BnbOptions master_mip;
  IpmOptions convex;

  void validate() const;
};

// Operational subproblem at fixed investments: value plus the dual-based cut,
// tight at the query point.
struct SubproblemCut {
  double value = 0.0;  // optimal operational cost at (x_fixed, b_fixed)
  BendersCut cut;
  FullSolution dispatch;  // operational variables achieving `value`
};

SubproblemCut subproblem_cut(const GepInstance& inst, const Vec& x_fixed, const Vec& b_fixed,
                             ModelKind kind, const IpmOptions& opts = {});

// Classical single-cut Benders decomposition: master over (x, b, theta) with
// accumulated cuts, convex operational subproblem providing upper bounds and
// new cuts. Lower bounds are monotone by construction.
BoundsTrace run_benders(const GepInstance& inst, const BendersOptions& opts);

}  // namespace gep
