#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "gep/ipm.hpp"

namespace gep {

enum class BranchRule { MostFractional, LowestIndex };
enum class SearchOrder { BestFirst, DepthFirst };

struct BnbOptions {
  double integrality_tol = 1e-6;
  double relative_gap = 1e-8;   // (incumbent - bound) / max(1, |incumbent|)
  long node_limit = 2'000'000;
  BranchRule branching = BranchRule::MostFractional;
  SearchOrder search = SearchOrder::BestFirst;
  IpmOptions ipm;
  // Optional initial incumbent: binary assignment for the integral variables
  // in mask order; seeds the tree with one restricted solve.
  std::optional<Vec> warm_binaries;
  // Per-node observer (node id, node bound, global lower bound, incumbent).
  std::function<void(long, double, double, double)> on_node;

  void validate() const;
};

// Branch-and-bound over the binary investment variables with interior-point
// relaxations. Deterministic for a fixed option set. On node-limit exhaustion
// returns IterationLimit with the best incumbent and a valid lower bound in
// `root_relaxation`-style fields (objective = incumbent, mip_gap as reached).
SolveResult solve_mip(const CanonicalProblem& problem, const BnbOptions& opts = {});

// Exhaustive oracle: solves the convex restriction for every assignment of
// the integral variables and returns the best. Refuses more than 2^20
// combinations.
SolveResult enumerate_binaries(const CanonicalProblem& problem, const IpmOptions& opts = {});

}  // namespace gep
