#pragma once

#include <string>

#include "gep/canonical.hpp"

namespace gep {

enum class SolveStatus { Optimal, Infeasible, Unbounded, IterationLimit };

const char* to_string(SolveStatus s);

struct SolveResult {
  SolveStatus status = SolveStatus::IterationLimit;
  Vec primal;          // length num_vars
  Vec dual_eq;         // y, free sign
  Vec dual_in;         // lambda >= 0 for <= rows
  Vec dual_lower;      // bound multipliers >= 0 (0 where bound infinite)
  Vec dual_upper;
  double dual_qcap = 0.0;
  double objective = 0.0;
  double dual_objective = 0.0;  // Lagrangian value at the returned point
  double kkt_residual = 0.0;    // max of primal/dual/complementarity residuals
  double mip_gap = 0.0;         // mixed-integer solves only
  double root_relaxation = 0.0; // mixed-integer solves only
  long nodes = 0;               // mixed-integer solves only
  int iterations = 0;
  std::string message;
};

struct IpmOptions {
  double tolerance = 1e-9;  // relative KKT tolerance
  int max_iterations = 200;
  bool verbose = false;  // per-iteration residual trace on stderr
};

// Primal-dual interior-point solver for the convex relaxations: PSD
// objective, linear equalities/inequalities, bounds, and at most one convex
// quadratic inequality. The integrality mask is ignored. Throws
// std::invalid_argument when the objective is not PSD (contract violation).
SolveResult solve_convex(const CanonicalProblem& problem, const IpmOptions& opts = {});

}  // namespace gep
