#pragma once

#include <optional>
#include <string>

#include "gep/bounds.hpp"

namespace gep {

// Linear stakeholder metric over the full-scale decision vector: weights on
// the investment variables plus time-invariant per-period weights on the
// operational variables (states are weighted at s_0..s_{T-1}).
struct MetricSpec {
  std::string name;
  std::string description;
  Vec coef_x;            // length G+N, or empty for zero
  Vec coef_b;            // length G+N, or empty
  Vec coef_p;            // length G, applied at every period, or empty
  Vec coef_s;            // length N, or empty
  Vec coef_pc, coef_pd;  // length N, or empty
  double coef_dns = 0.0;

  void validate(const GepInstance& inst) const;
  Vec to_canonical(const CanonicalProblem& problem) const;
  double evaluate(const FullSolution& sol) const;

  static MetricSpec storage_capacity(const GepInstance& inst, int unit);
  static MetricSpec investment_cost(const GepInstance& inst);
  static MetricSpec operational_cost(const GepInstance& inst);  // incl. non-supplied
  static MetricSpec from_name(const GepInstance& inst, const std::string& name, int unit);
};

struct MetricBounds {
  double mlb = 0.0;
  double mub = 0.0;
  FullSolution min_solution, max_solution;
  double j_lb = 0.0, j_ub = 0.0;  // objective bounds the models were built with
  SolveStatus status = SolveStatus::Optimal;
};

// Solves the max- and min-metric models under the cost cap J <= j_ub. The
// j_lb side is provably redundant and asserted on the returned solutions
// rather than imposed. `warm` seeds both searches when provided.
MetricBounds metric_bounds(const GepInstance& inst, const MetricSpec& metric, double j_lb,
                           double j_ub, ModelKind kind,
                           const std::optional<FullSolution>& warm = std::nullopt,
                           const BnbOptions& opts = {});

enum class RelaxMode { LpRelaxMin, FixVarsMax };

struct RelaxedMetricBound {
  double value = 0.0;
  RelaxMode mode = RelaxMode::LpRelaxMin;
  // Set for FixVarsMax: the value comes from a restriction, i.e. it is an
  // achievable metric value rather than a bound on the exact maximum.
  bool restriction = false;
  SolveStatus status = SolveStatus::Optimal;
};

// Cheaper one-sided variants: LP relaxation of the min model (valid lower
// bound on the metric) or the max model with binaries fixed from a known
// feasible solution.
RelaxedMetricBound metric_bounds_relaxed(const GepInstance& inst, const MetricSpec& metric,
                                         double j_ub, ModelKind kind, RelaxMode mode,
                                         const std::optional<FullSolution>& fix_from =
                                             std::nullopt,
                                         const BnbOptions& opts = {});

// Horizon-normalized view of final objective bounds: per-period values
// bracket the long-run expected operational cost, with the investment share
// reported as the finite-horizon correction.
struct AverageCostBounds {
  double per_period_lb = 0.0;        // J_LB / T
  double per_period_ub = 0.0;        // J_UB / T
  double investment_share = 0.0;     // investment / total of the UB solution
  double investment_per_period = 0.0;
  double operational_per_period = 0.0;  // all non-investment cost of UB solution / T
};

AverageCostBounds average_cost_bounds(const BoundsTrace& trace, const GepInstance& inst,
                                      ModelKind kind);

// Appends `metric,<name>,<mlb>,<mub>` rows to a trace CSV body.
std::string metric_csv_row(const std::string& name, double mlb, double mub);

}  // namespace gep
