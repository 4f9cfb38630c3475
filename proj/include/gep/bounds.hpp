#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gep/aggregation.hpp"
#include "gep/bnb.hpp"

namespace gep {

enum class TraceStatus { Converged, IterationLimit, SolverError };

const char* to_string(TraceStatus s);

// Per-iteration bound records shared by the aggregation loop and the Benders
// baseline. For the aggregation loop K is the cluster count; for Benders it
// is the number of accumulated cuts.
struct BoundsTrace {
  struct Row {
    int iter = 0;
    int K = 0;
    double lb_candidate = 0.0;
    double ub_candidate = 0.0;
    double lb = 0.0;   // running max
    double ub = 0.0;   // running min
    double gap = 0.0;
    double ms = 0.0;   // wall time of the iteration
  };
  std::vector<Row> rows;
  TraceStatus status = TraceStatus::SolverError;
  double final_lb = 0.0;
  double final_ub = 0.0;
  FullSolution feasible;  // achiever of the running upper bound
  bool has_feasible = false;
  std::string error;

  // CSV body `iter,K,lb_cand,ub_cand,lb,ub,gap,ms`; when with_timestamp is
  // set a `# generated <time>` comment line precedes the header.
  std::string to_csv(bool with_timestamp = false) const;
};

struct TsaOptions {
  ModelKind kind = ModelKind::Milp;
  ClusterMethod clustering = ClusterMethod::Sequential;
  int k0 = 10;
  int rho = 10;
  double eps_thr = 0.01;
  int max_iter = 1000;
  std::uint64_t seed = 0;
  BnbOptions mip;
  IpmOptions convex;

  void validate(const GepInstance& inst) const;
};

// (ub - lb) / ub, with the 0/0 case defined as 0. Throws on ub < lb - 1e-9
// (scaled) and on ub = 0 with lb < 0.
double optimality_gap(double ub, double lb);

// Iterative time-series-aggregation bound refinement: each iteration builds a
// K-cluster partition, solves the aggregated model (lower bound candidate),
// re-solves the full model with the aggregated binaries fixed (feasible
// point, upper bound candidate), and tightens the running bounds
// monotonically. K grows by rho per iteration and is clamped at T, where the
// aggregated model is exact and the loop stops.
BoundsTrace run_tsa_bounds(const GepInstance& inst, const TsaOptions& opts);

}  // namespace gep
