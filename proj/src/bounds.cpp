#include "gep/bounds.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <sstream>
#include <stdexcept>

#include "gep/rng.hpp"

namespace gep {

const char* to_string(TraceStatus s) {
  switch (s) {
    case TraceStatus::Converged: return "converged";
    case TraceStatus::IterationLimit: return "iteration_limit";
    case TraceStatus::SolverError: return "solver_error";
  }
  return "unknown";
}

std::string BoundsTrace::to_csv(bool with_timestamp) const {
  std::ostringstream os;
  os.precision(17);
  if (with_timestamp) {
    const std::time_t now = std::time(nullptr);
    char buf[64];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    os << "# generated " << buf << "\n";
  }
  os << "iter,K,lb_cand,ub_cand,lb,ub,gap,ms\n";
  for (const Row& r : rows)
    os << r.iter << "," << r.K << "," << r.lb_candidate << "," << r.ub_candidate << ","
       << r.lb << "," << r.ub << "," << r.gap << "," << r.ms << "\n";
  return os.str();
}

double optimality_gap(double ub, double lb) {
  const double slack = 1e-9 * std::max(1.0, std::abs(ub));
  if (ub < lb - slack)
    throw std::invalid_argument("optimality_gap: upper bound below lower bound");
  if (ub == 0.0) {
    if (std::abs(lb) <= slack) return 0.0;  // 0/0 convention: exact
    throw std::invalid_argument("optimality_gap: undefined for ub = 0 with lb < 0");
  }
  return std::max(0.0, (ub - lb) / ub);
}

void TsaOptions::validate(const GepInstance& inst) const {
  if (k0 < 1 || k0 > inst.num_periods)
    throw std::invalid_argument("TsaOptions: k0 must lie in [1, T]");
  if (rho < 1) throw std::invalid_argument("TsaOptions: rho must be >= 1");
  if (eps_thr <= 0.0) throw std::invalid_argument("TsaOptions: eps_thr must be positive");
  if (max_iter < 0) throw std::invalid_argument("TsaOptions: max_iter must be >= 0");
}

BoundsTrace run_tsa_bounds(const GepInstance& inst, const TsaOptions& opts) {
  inst.validate();
  opts.validate(inst);
  const int T = inst.num_periods;

  BoundsTrace trace;
  const bool needs_features = opts.clustering == ClusterMethod::KMeans ||
                              opts.clustering == ClusterMethod::Gmm ||
                              opts.clustering == ClusterMethod::DpSegmentation;
  FeatureMatrix features;
  if (needs_features) features = make_features(inst);
  else features.rows.resize(T, 0);

  double lb = -std::numeric_limits<double>::infinity();
  double ub = std::numeric_limits<double>::infinity();
  std::optional<Vec> warm;  // incumbent binaries carried across iterations
  int K = std::min(opts.k0, T);

  for (int i = 0; i <= opts.max_iter; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    const bool exact = K >= T;

    ChronoPartition partition;
    try {
      partition = make_partition(opts.clustering, features,
                                 std::min(K, T), Rng(opts.seed).split(i).next_u64());
    } catch (const std::exception& e) {
      trace.status = TraceStatus::SolverError;
      trace.error = std::string("clustering failed: ") + e.what();
      return trace;
    }

    // Lower-bound candidate: the aggregated mixed-integer model.
    const CanonicalProblem agg = build_aggregated(inst, partition, opts.kind);
    BnbOptions mip = opts.mip;
    mip.warm_binaries = warm;
    const SolveResult agg_res = solve_mip(agg, mip);
    if (agg_res.status != SolveStatus::Optimal) {
      trace.status = TraceStatus::SolverError;
      trace.error = "aggregated solve: " + std::string(to_string(agg_res.status));
      return trace;
    }
    const double lb_cand = agg_res.objective;
    Vec b_star(inst.num_units());
    for (int j = 0; j < inst.num_units(); ++j)
      b_star[j] = agg_res.primal[agg.varmap->b(j)];

    // Upper-bound candidate: full model restricted to the aggregated binaries.
    const CanonicalProblem restricted = build_restricted(inst, b_star, opts.kind);
    const SolveResult full_res = solve_convex(restricted, opts.convex);
    if (full_res.status != SolveStatus::Optimal) {
      trace.status = TraceStatus::SolverError;
      trace.error = "restricted solve: " + std::string(to_string(full_res.status));
      return trace;
    }
    const double ub_cand = full_res.objective;

    // Running bounds tighten monotonically (the conditional update).
    lb = std::max(lb, lb_cand);
    ub = std::min(ub, ub_cand);
    if (ub_cand <= ub) {
      trace.feasible = decode_solution(restricted, full_res.primal);
      trace.has_feasible = true;
    }
    const double gap = optimality_gap(ub, std::min(lb, ub));

    const double ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
    trace.rows.push_back({i, partition.num_clusters(), lb_cand, ub_cand, lb, ub, gap, ms});
    trace.final_lb = lb;
    trace.final_ub = ub;
    warm = b_star;

    if (gap <= opts.eps_thr || exact) {
      trace.status = TraceStatus::Converged;
      return trace;
    }
    K = std::min(K + opts.rho, T);
  }
  trace.status = TraceStatus::IterationLimit;
  return trace;
}

}  // namespace gep
