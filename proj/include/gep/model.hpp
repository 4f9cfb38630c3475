#pragma once

#include <string>

#include "gep/canonical.hpp"
#include "gep/instance.hpp"

namespace gep {

enum class ModelKind { Milp, Miqp };

const char* to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);

// Decision variables of a full-scale model (or of an aggregated model, with
// `periods` clusters instead of T periods). States run s_0..s_periods.
struct FullSolution {
  Vec x;        // MW, G+N
  Vec b;        // binary, G+N
  Mat p;        // MW, periods x G
  Mat s;        // MWh, (periods+1) x N
  Mat p_c;      // MW, periods x N
  Mat p_d;      // MW, periods x N
  Vec d_ns;     // MWh, periods

  int periods() const { return static_cast<int>(p.rows()); }
};

struct CostBreakdown {
  double investment = 0.0;
  double operational = 0.0;
  double non_supplied = 0.0;
  double quadratic_penalty = 0.0;  // 0 for MILP
  double total = 0.0;
};

// Row indices of the assembled constraint blocks; shared by the full-scale
// and aggregated models (periods = T or K).
struct RowMap {
  int G = 0, N = 0, periods = 0;
  int eq_balance(int t) const { return t; }
  int eq_dyn(int t, int n) const { return periods + t * N + n; }
  int eq_init(int n) const { return periods + periods * N + n; }
  int num_eq() const { return periods + periods * N + N; }

  int in_gen(int t, int g) const { return t * G + g; }
  int in_scap(int t, int n) const { return periods * G + t * N + n; }
  int in_xlo(int j) const { return periods * G + (periods + 1) * N + j; }
  int in_xhi(int j) const { return periods * G + (periods + 1) * N + (G + N) + j; }
  int num_in() const { return periods * G + (periods + 1) * N + 2 * (G + N); }
};

// Per-period data fed to the shared assembly routine. Full-scale models use
// weight 1 and the raw series; aggregated models use cluster sizes and
// cluster means. The storage dynamics step for period t is weight[t]*delta.
struct PeriodData {
  Vec weight;
  Vec demand;
  Mat cap_factor;  // periods x G
  Mat z_ref;       // periods x R
};

// Assembles the investment + dispatch model over the given period data.
CanonicalProblem build_gep_canonical(const GepInstance& inst, const PeriodData& pd,
                                     ModelKind kind);

// Full-scale MILP / MIQP over all T periods.
CanonicalProblem build_full(const GepInstance& inst, ModelKind kind);

// Full-scale model with the investment binaries fixed; the integrality mask
// is cleared, so the result is convex. Always feasible (d_ns is complete
// recourse). b_fixed entries must be 0 or 1.
CanonicalProblem build_restricted(const GepInstance& inst, const Vec& b_fixed,
                                  ModelKind kind);

struct MetricSpec;  // see gep/metrics.hpp

enum class MetricSense { Minimize, Maximize };

// Metric-specific model: optimize the metric over the full-scale constraints
// plus the cost cap J(z) <= j_ub (a linear row for MILP, the quadratic cap
// for MIQP). The canonical objective is the metric itself for Minimize and
// its negation for Maximize; callers flip the sign of the optimal value back.
CanonicalProblem build_metric_model(const GepInstance& inst, const MetricSpec& metric,
                                    MetricSense sense, double j_ub, ModelKind kind);

// Inverse pair mapping canonical primal vectors to model roles.
FullSolution decode_solution(const CanonicalProblem& problem, const Vec& primal);
Vec encode_solution(const CanonicalProblem& problem, const FullSolution& sol);

// Cost terms of a full-scale solution. total equals the canonical objective
// of build_full(inst, kind) at the encoded point.
CostBreakdown objective_terms(const GepInstance& inst, const FullSolution& sol,
                              ModelKind kind);

// JSON persistence of solutions.
void save_solution(const FullSolution& sol, const std::string& path);
FullSolution load_solution(const std::string& path);

}  // namespace gep
