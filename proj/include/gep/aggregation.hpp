#pragma once

#include "gep/clustering.hpp"
#include "gep/model.hpp"

namespace gep {

// Decision variables of the aggregated model over K clusters; states run
// s_0..s_K with s_K mirroring the full model's terminal state.
struct AggSolution {
  Vec x;     // MW, G+N
  Vec b;     // binary, G+N
  Mat p;     // MW, K x G
  Mat s;     // MWh, (K+1) x N
  Mat p_c;   // MW, K x N
  Mat p_d;   // MW, K x N
  Vec d_ns;  // MWh, K

  int num_clusters() const { return static_cast<int>(p.rows()); }
};

// Cluster sizes and arithmetic means of the per-period inputs.
struct AggregatedParams {
  Vec sizes;       // T_k, length K
  Vec demand;      // mean demand per cluster
  Mat cap_factor;  // K x G cluster means
  Mat z_ref;       // K x R cluster means
};

AggregatedParams aggregate_params(const GepInstance& inst, const ChronoPartition& partition);

// Aggregated MILP / MIQP over the partition's clusters. A singleton
// partition reproduces the full-scale problem exactly.
CanonicalProblem build_aggregated(const GepInstance& inst, const ChronoPartition& partition,
                                  ModelKind kind);

// Variable-aggregation map: investments copied, cluster-start storage states
// kept (terminal state appended), remaining variables averaged per cluster.
// Feasibility of the result in the aggregated model is the Lemma the bound
// algorithm rests on.
AggSolution aggregate_solution(const GepInstance& inst, const ChronoPartition& partition,
                               const FullSolution& z);

// Canonical encoding/decoding for aggregated problems.
Vec encode_agg_solution(const CanonicalProblem& agg_problem, const AggSolution& sol);
AggSolution decode_agg_solution(const CanonicalProblem& agg_problem, const Vec& primal);

// JSON persistence of an aggregated solution together with its partition.
void save_agg_solution(const AggSolution& sol, const ChronoPartition& partition,
                       const std::string& path);

}  // namespace gep
