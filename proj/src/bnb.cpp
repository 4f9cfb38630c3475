#include "gep/bnb.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <stdexcept>
#include <vector>

namespace gep {

namespace {

std::vector<int> integral_indices(const CanonicalProblem& prob) {
  std::vector<int> idx;
  for (int j = 0; j < prob.num_vars; ++j)
    if (j < static_cast<int>(prob.integral.size()) && prob.integral[j]) {
      if (prob.lower[j] < -1e-12 || prob.upper[j] > 1.0 + 1e-12)
        throw std::invalid_argument("solve_mip: integral variables must be binaries in [0,1]");
      idx.push_back(j);
    }
  return idx;
}

// Relaxation of `prob` with the masked variables clamped to the node's
// bounds; the mask itself is ignored by the convex solver.
CanonicalProblem with_bounds(const CanonicalProblem& prob, const std::vector<int>& idx,
                             const std::vector<std::int8_t>& lo,
                             const std::vector<std::int8_t>& hi) {
  CanonicalProblem node = prob;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    node.lower[idx[k]] = std::max(node.lower[idx[k]], static_cast<double>(lo[k]));
    node.upper[idx[k]] = std::min(node.upper[idx[k]], static_cast<double>(hi[k]));
  }
  return node;
}

struct Node {
  std::vector<std::int8_t> lo, hi;
  double bound = -std::numeric_limits<double>::infinity();
  long id = 0;
  int depth = 0;
};

}  // namespace

void BnbOptions::validate() const {
  if (integrality_tol <= 0.0 || relative_gap <= 0.0)
    throw std::invalid_argument("BnbOptions: tolerances must be positive");
  if (node_limit <= 0) throw std::invalid_argument("BnbOptions: node_limit must be positive");
}

SolveResult solve_mip(const CanonicalProblem& prob, const BnbOptions& opts) {
  opts.validate();
  const std::vector<int> idx = integral_indices(prob);
  if (idx.empty()) return solve_convex(prob, opts.ipm);
  const int nb = static_cast<int>(idx.size());

  SolveResult best;
  best.status = SolveStatus::IterationLimit;
  bool have_incumbent = false;
  double incumbent = std::numeric_limits<double>::infinity();

  auto try_incumbent = [&](const std::vector<std::int8_t>& assign) {
    // Polish: re-solve the restriction at the integral point so incumbents
    // are exact restricted optima, not snapped relaxation points.
    CanonicalProblem fixed = with_bounds(prob, idx, assign, assign);
    const SolveResult res = solve_convex(fixed, opts.ipm);
    if (res.status != SolveStatus::Optimal) return;
    if (!have_incumbent || res.objective < incumbent) {
      incumbent = res.objective;
      best = res;
      have_incumbent = true;
    }
  };

  if (opts.warm_binaries) {
    if (opts.warm_binaries->size() != nb)
      throw std::invalid_argument("solve_mip: warm_binaries length must match the mask");
    std::vector<std::int8_t> assign(nb);
    for (int k = 0; k < nb; ++k) {
      const double v = (*opts.warm_binaries)[k];
      if (v != 0.0 && v != 1.0)
        throw std::invalid_argument("solve_mip: warm_binaries entries must be 0 or 1");
      assign[k] = static_cast<std::int8_t>(v);
    }
    try_incumbent(assign);
  }

  const auto better = [&](const Node& a, const Node& b) {
    if (opts.search == SearchOrder::BestFirst) {
      if (a.bound != b.bound) return a.bound < b.bound;
      return a.id < b.id;
    }
    if (a.depth != b.depth) return a.depth > b.depth;
    return a.id > b.id;
  };
  const auto pq_cmp = [&](const Node& a, const Node& b) { return better(b, a); };
  std::priority_queue<Node, std::vector<Node>, decltype(pq_cmp)> open(pq_cmp);
  std::multiset<double> open_bounds;

  Node root;
  root.lo.assign(nb, 0);
  root.hi.assign(nb, 1);
  for (int k = 0; k < nb; ++k) {
    root.lo[k] = static_cast<std::int8_t>(std::ceil(prob.lower[idx[k]] - 1e-9));
    root.hi[k] = static_cast<std::int8_t>(std::floor(prob.upper[idx[k]] + 1e-9));
  }
  open.push(root);
  open_bounds.insert(root.bound);

  long next_id = 1;
  long pops = 0;
  double root_relaxation = -std::numeric_limits<double>::infinity();
  double global_lb = -std::numeric_limits<double>::infinity();
  bool solver_trouble = false;
  std::string trouble_msg;

  const auto gap_of = [&](double inc, double lb) {
    if (!std::isfinite(inc)) return std::numeric_limits<double>::infinity();
    return (inc - lb) / std::max(1.0, std::abs(inc));
  };

  while (!open.empty()) {
    const double lowest_open = *open_bounds.begin();
    global_lb = std::max(global_lb, std::min(lowest_open, incumbent));
    if (have_incumbent && gap_of(incumbent, std::min(lowest_open, incumbent)) <= opts.relative_gap)
      break;
    if (pops >= opts.node_limit) break;

    Node node = open.top();
    open.pop();
    open_bounds.erase(open_bounds.find(node.bound));
    ++pops;

    if (have_incumbent &&
        node.bound >= incumbent - opts.relative_gap * std::max(1.0, std::abs(incumbent)))
      continue;

    const CanonicalProblem relax = with_bounds(prob, idx, node.lo, node.hi);
    const SolveResult res = solve_convex(relax, opts.ipm);
    if (res.status == SolveStatus::Infeasible) continue;
    if (res.status != SolveStatus::Optimal) {
      solver_trouble = true;
      trouble_msg = "node relaxation did not solve: " + std::string(to_string(res.status));
      break;
    }
    // The Lagrangian value is the safe side of the relaxation bound.
    const double node_bound = std::max(node.bound, std::min(res.dual_objective, res.objective));
    if (node.id == 0) root_relaxation = node_bound;
    if (opts.on_node) opts.on_node(node.id, node_bound, global_lb, incumbent);
    if (have_incumbent &&
        node_bound >= incumbent - opts.relative_gap * std::max(1.0, std::abs(incumbent)))
      continue;

    // Fractionality over the masked variables.
    int branch_k = -1;
    double most = opts.integrality_tol;
    for (int k = 0; k < nb; ++k) {
      const double v = res.primal[idx[k]];
      const double frac = std::min(std::abs(v), std::abs(1.0 - v));
      if (opts.branching == BranchRule::MostFractional) {
        if (frac > most) {
          most = frac;
          branch_k = k;
        }
      } else {
        if (frac > opts.integrality_tol) {
          branch_k = k;
          break;
        }
      }
    }

    if (branch_k < 0) {
      // Integral within tolerance: round and polish.
      std::vector<std::int8_t> assign(nb);
      for (int k = 0; k < nb; ++k)
        assign[k] = static_cast<std::int8_t>(res.primal[idx[k]] >= 0.5 ? 1 : 0);
      try_incumbent(assign);
      continue;
    }

    if (node.id == 0 && !have_incumbent) {
      // Root rounding heuristic for an initial incumbent.
      std::vector<std::int8_t> assign(nb);
      for (int k = 0; k < nb; ++k) {
        const double v = res.primal[idx[k]];
        assign[k] = static_cast<std::int8_t>(v >= 0.5 ? 1 : 0);
        assign[k] = std::max(node.lo[k], std::min(node.hi[k], assign[k]));
      }
      try_incumbent(assign);
      if (have_incumbent &&
          node_bound >= incumbent - opts.relative_gap * std::max(1.0, std::abs(incumbent)))
        continue;
    }

    for (int v = 0; v <= 1; ++v) {
      Node child;
      child.lo = node.lo;
      child.hi = node.hi;
      child.lo[branch_k] = child.hi[branch_k] = static_cast<std::int8_t>(v);
      child.bound = node_bound;
      child.id = next_id++;
      child.depth = node.depth + 1;
      open.push(child);
      open_bounds.insert(child.bound);
    }
  }

  const double lowest_open = open.empty() ? incumbent : *open_bounds.begin();
  global_lb = std::max(global_lb, std::min(lowest_open, incumbent));

  if (solver_trouble) {
    best.status = SolveStatus::IterationLimit;
    best.message = trouble_msg;
  } else if (have_incumbent) {
    const double gap = gap_of(incumbent, global_lb);
    best.status = (open.empty() || gap <= opts.relative_gap) ? SolveStatus::Optimal
                                                             : SolveStatus::IterationLimit;
  } else {
    best.status = open.empty() ? SolveStatus::Infeasible : SolveStatus::IterationLimit;
  }
  best.mip_gap = have_incumbent ? std::max(0.0, gap_of(incumbent, global_lb)) : 0.0;
  best.root_relaxation = root_relaxation;
  best.nodes = pops;
  if (have_incumbent) {
    // Snap the masked coordinates exactly.
    for (int k = 0; k < nb; ++k)
      best.primal[idx[k]] = best.primal[idx[k]] >= 0.5 ? 1.0 : 0.0;
    best.objective = incumbent;
  } else if (best.status == SolveStatus::IterationLimit) {
    best.message = best.message.empty() ? "node limit reached without incumbent" : best.message;
    best.objective = global_lb;
  }
  return best;
}

SolveResult enumerate_binaries(const CanonicalProblem& prob, const IpmOptions& opts) {
  const std::vector<int> idx = integral_indices(prob);
  const int nb = static_cast<int>(idx.size());
  if (nb > 20)
    throw std::invalid_argument("enumerate_binaries: refusing more than 2^20 combinations");

  SolveResult best;
  bool found = false;
  bool trouble = false;
  for (std::uint64_t m = 0; m < (1ull << nb); ++m) {
    std::vector<std::int8_t> assign(nb);
    for (int k = 0; k < nb; ++k) assign[k] = static_cast<std::int8_t>((m >> k) & 1u);
    CanonicalProblem fixed = with_bounds(prob, idx, assign, assign);
    bool crossed = false;
    for (int j = 0; j < fixed.num_vars && !crossed; ++j)
      crossed = fixed.lower[j] > fixed.upper[j];
    if (crossed) continue;
    const SolveResult res = solve_convex(fixed, opts);
    if (res.status == SolveStatus::IterationLimit || res.status == SolveStatus::Unbounded)
      trouble = true;
    if (res.status != SolveStatus::Optimal) continue;
    if (!found || res.objective < best.objective) {
      best = res;
      found = true;
    }
  }
  if (!found) {
    best.status = trouble ? SolveStatus::IterationLimit : SolveStatus::Infeasible;
    best.primal = Vec::Zero(prob.num_vars);
    return best;
  }
  for (int k = 0; k < nb; ++k) best.primal[idx[k]] = best.primal[idx[k]] >= 0.5 ? 1.0 : 0.0;
  best.mip_gap = 0.0;
  return best;
}

}  // namespace gep
