#include "gep/metrics.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gep {

namespace {

void check_len(const Vec& v, int expected, const char* field) {
  if (v.size() != 0 && v.size() != expected)
    throw std::invalid_argument(std::string("MetricSpec: ") + field + " must be empty or length " +
                                std::to_string(expected));
  for (int i = 0; i < v.size(); ++i)
    if (!std::isfinite(v[i]))
      throw std::invalid_argument(std::string("MetricSpec: ") + field + " has a non-finite entry");
}

bool any_nonzero(const Vec& v) { return v.size() > 0 && v.cwiseAbs().maxCoeff() > 0.0; }

}  // namespace

void MetricSpec::validate(const GepInstance& inst) const {
  const int U = inst.num_units();
  check_len(coef_x, U, "coef_x");
  check_len(coef_b, U, "coef_b");
  check_len(coef_p, inst.num_generators, "coef_p");
  check_len(coef_s, inst.num_storage, "coef_s");
  check_len(coef_pc, inst.num_storage, "coef_pc");
  check_len(coef_pd, inst.num_storage, "coef_pd");
  if (!std::isfinite(coef_dns)) throw std::invalid_argument("MetricSpec: coef_dns not finite");
  if (!any_nonzero(coef_x) && !any_nonzero(coef_b) && !any_nonzero(coef_p) &&
      !any_nonzero(coef_s) && !any_nonzero(coef_pc) && !any_nonzero(coef_pd) &&
      coef_dns == 0.0)
    throw std::invalid_argument("MetricSpec: all coefficients are zero");
}

Vec MetricSpec::to_canonical(const CanonicalProblem& problem) const {
  if (!problem.varmap)
    throw std::invalid_argument("MetricSpec::to_canonical: problem has no variable map");
  const VarMap& vm = *problem.varmap;
  Vec m = Vec::Zero(problem.num_vars);
  for (int j = 0; j < coef_x.size(); ++j) m[vm.x(j)] = coef_x[j];
  for (int j = 0; j < coef_b.size(); ++j) m[vm.b(j)] = coef_b[j];
  for (int t = 0; t < vm.periods; ++t) {
    for (int g = 0; g < coef_p.size(); ++g) m[vm.p(t, g)] = coef_p[g];
    for (int n = 0; n < coef_s.size(); ++n) m[vm.s(t, n)] = coef_s[n];
    for (int n = 0; n < coef_pc.size(); ++n) m[vm.pc(t, n)] = coef_pc[n];
    for (int n = 0; n < coef_pd.size(); ++n) m[vm.pd(t, n)] = coef_pd[n];
    if (coef_dns != 0.0) m[vm.dns(t)] = coef_dns;
  }
  return m;
}

double MetricSpec::evaluate(const FullSolution& sol) const {
  double v = 0.0;
  if (coef_x.size()) v += coef_x.dot(sol.x);
  if (coef_b.size()) v += coef_b.dot(sol.b);
  for (int t = 0; t < sol.periods(); ++t) {
    if (coef_p.size()) v += coef_p.dot(sol.p.row(t));
    if (coef_s.size()) v += coef_s.dot(sol.s.row(t));
    if (coef_pc.size()) v += coef_pc.dot(sol.p_c.row(t));
    if (coef_pd.size()) v += coef_pd.dot(sol.p_d.row(t));
    v += coef_dns * sol.d_ns[t];
  }
  return v;
}

MetricSpec MetricSpec::storage_capacity(const GepInstance& inst, int unit) {
  if (unit < 0 || unit >= inst.num_storage)
    throw std::invalid_argument("storage_capacity metric: unit out of range");
  MetricSpec m;
  m.name = "storage_capacity_" + std::to_string(unit);
  m.description = "installed capacity of storage unit " + std::to_string(unit);
  m.coef_x = Vec::Zero(inst.num_units());
  m.coef_x[inst.num_generators + unit] = 1.0;
  return m;
}

MetricSpec MetricSpec::investment_cost(const GepInstance& inst) {
  MetricSpec m;
  m.name = "investment_cost";
  m.description = "total capital investment cost";
  m.coef_x = inst.c_inv;
  return m;
}

MetricSpec MetricSpec::operational_cost(const GepInstance& inst) {
  MetricSpec m;
  m.name = "operational_cost";
  m.description = "dispatch plus non-supplied-energy cost over the horizon";
  m.coef_p = inst.c_p * inst.delta;
  m.coef_dns = inst.c_ns;
  return m;
}

MetricSpec MetricSpec::from_name(const GepInstance& inst, const std::string& name, int unit) {
  if (name == "storage_capacity") return storage_capacity(inst, unit);
  if (name == "investment_cost") return investment_cost(inst);
  if (name == "operational_cost") return operational_cost(inst);
  throw std::invalid_argument("unknown metric: " + name);
}

MetricBounds metric_bounds(const GepInstance& inst, const MetricSpec& metric, double j_lb,
                           double j_ub, ModelKind kind,
                           const std::optional<FullSolution>& warm, const BnbOptions& opts) {
  if (j_lb > j_ub) throw std::invalid_argument("metric_bounds: j_lb exceeds j_ub");
  metric.validate(inst);

  BnbOptions mip = opts;
  if (warm) {
    Vec wb(inst.num_units());
    for (int j = 0; j < inst.num_units(); ++j) wb[j] = warm->b[j] >= 0.5 ? 1.0 : 0.0;
    mip.warm_binaries = wb;
  }

  MetricBounds out;
  out.j_lb = j_lb;
  out.j_ub = j_ub;

  const CanonicalProblem max_model = build_metric_model(inst, metric, MetricSense::Maximize,
                                                        j_ub, kind);
  const SolveResult max_res = solve_mip(max_model, mip);
  if (max_res.status != SolveStatus::Optimal) {
    out.status = max_res.status;
    return out;
  }
  out.mub = -max_res.objective;
  out.max_solution = decode_solution(max_model, max_res.primal);

  const CanonicalProblem min_model = build_metric_model(inst, metric, MetricSense::Minimize,
                                                        j_ub, kind);
  const SolveResult min_res = solve_mip(min_model, mip);
  if (min_res.status != SolveStatus::Optimal) {
    out.status = min_res.status;
    return out;
  }
  out.mlb = min_res.objective;
  out.min_solution = decode_solution(min_model, min_res.primal);
  out.status = SolveStatus::Optimal;

  // The omitted J >= j_lb side must hold on its own; a violation means the
  // caller's j_lb was not a valid lower bound.
  for (const FullSolution* sol : {&out.min_solution, &out.max_solution}) {
    const double j = objective_terms(inst, *sol, kind).total;
    if (j < j_lb - 1e-6 * std::max(1.0, std::abs(j_lb)))
      throw std::invalid_argument("metric_bounds: j_lb is not a valid objective lower bound");
  }
  return out;
}

RelaxedMetricBound metric_bounds_relaxed(const GepInstance& inst, const MetricSpec& metric,
                                         double j_ub, ModelKind kind, RelaxMode mode,
                                         const std::optional<FullSolution>& fix_from,
                                         const BnbOptions& opts) {
  metric.validate(inst);
  RelaxedMetricBound out;
  out.mode = mode;

  if (mode == RelaxMode::LpRelaxMin) {
    CanonicalProblem model = build_metric_model(inst, metric, MetricSense::Minimize, j_ub, kind);
    std::fill(model.integral.begin(), model.integral.end(), 0);
    const SolveResult res = solve_convex(model, opts.ipm);
    out.status = res.status;
    if (res.status == SolveStatus::Optimal) out.value = res.objective;
    return out;
  }

  if (!fix_from)
    throw std::invalid_argument("metric_bounds_relaxed: FixVarsMax requires fix_from");
  CanonicalProblem model = build_metric_model(inst, metric, MetricSense::Maximize, j_ub, kind);
  const VarMap& vm = *model.varmap;
  for (int j = 0; j < inst.num_units(); ++j) {
    const double v = fix_from->b[j] >= 0.5 ? 1.0 : 0.0;
    model.lower[vm.b(j)] = model.upper[vm.b(j)] = v;
    model.integral[vm.b(j)] = 0;
  }
  const SolveResult res = solve_convex(model, opts.ipm);
  out.status = res.status;
  out.restriction = true;
  if (res.status == SolveStatus::Optimal) out.value = -res.objective;
  return out;
}

AverageCostBounds average_cost_bounds(const BoundsTrace& trace, const GepInstance& inst,
                                      ModelKind kind) {
  if (!trace.has_feasible)
    throw std::invalid_argument("average_cost_bounds: trace has no feasible solution");
  const double T = inst.num_periods;
  AverageCostBounds out;
  out.per_period_lb = trace.final_lb / T;
  out.per_period_ub = trace.final_ub / T;
  const CostBreakdown bd = objective_terms(inst, trace.feasible, kind);
  out.investment_share = bd.total > 0.0 ? bd.investment / bd.total : 0.0;
  out.investment_per_period = bd.investment / T;
  out.operational_per_period = (bd.total - bd.investment) / T;
  return out;
}

std::string metric_csv_row(const std::string& name, double mlb, double mub) {
  std::ostringstream os;
  os.precision(17);
  os << "metric," << name << "," << mlb << "," << mub << "\n";
  return os.str();
}

}  // namespace gep
