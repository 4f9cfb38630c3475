#include "gep/model.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <vector>

#include "gep/metrics.hpp"

namespace gep {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// Canonical index of the i-th operational variable [p_0..p_{G-1}, d_ns,
// s_0..s_{N-1}, p_c..., p_d...] in period t.
int op_index(const VarMap& vm, int t, int i) {
  const int G = vm.G, N = vm.N;
  if (i < G) return vm.p(t, i);
  if (i == G) return vm.dns(t);
  if (i < G + 1 + N) return vm.s(t, i - G - 1);
  if (i < G + 1 + 2 * N) return vm.pc(t, i - G - 1 - N);
  return vm.pd(t, i - G - 1 - 2 * N);
}

// Quadratic penalty sum_t w_t ||A z_op_t - zref_t||^2 expanded into
// 0.5 z'Qz + c'z + c0 contributions.
void add_penalty_terms(const GepInstance& inst, const PeriodData& pd, const VarMap& vm,
                       std::vector<Eigen::Triplet<double>>& q_trip, Vec& c, double& c0) {
  const int R = inst.num_ref;
  if (R == 0) return;
  const int s = inst.num_op_vars_per_period();
  const Mat ata = inst.penalty_matrix.transpose() * inst.penalty_matrix;  // s x s
  const int periods = static_cast<int>(pd.weight.size());
  for (int t = 0; t < periods; ++t) {
    const double w = pd.weight[t];
    for (int i = 0; i < s; ++i) {
      const int gi = op_index(vm, t, i);
      for (int j = 0; j < s; ++j) {
        const double v = ata(i, j);
        if (v != 0.0) q_trip.emplace_back(gi, op_index(vm, t, j), 2.0 * w * v);
      }
    }
    const Vec az = inst.penalty_matrix.transpose() * pd.z_ref.row(t).transpose();  // s
    for (int i = 0; i < s; ++i) c[op_index(vm, t, i)] -= 2.0 * w * az[i];
    c0 += w * pd.z_ref.row(t).squaredNorm();
  }
}

}  // namespace

const char* to_string(ModelKind kind) { return kind == ModelKind::Milp ? "milp" : "miqp"; }

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "milp") return ModelKind::Milp;
  if (s == "miqp") return ModelKind::Miqp;
  throw std::invalid_argument("unknown model kind: " + s);
}

CanonicalProblem build_gep_canonical(const GepInstance& inst, const PeriodData& pd,
                                     ModelKind kind) {
  const int G = inst.num_generators, N = inst.num_storage;
  const int P = static_cast<int>(pd.weight.size());
  if (pd.demand.size() != P || pd.cap_factor.rows() != P || pd.cap_factor.cols() != G ||
      pd.z_ref.rows() != P || pd.z_ref.cols() != inst.num_ref)
    throw std::invalid_argument("build_gep_canonical: period data dimension mismatch");

  const VarMap vm = VarMap::gep_layout(G, N, P);
  const RowMap rm{G, N, P};
  const double dt = inst.delta;

  CanonicalProblem prob;
  prob.num_vars = vm.num_vars;
  prob.varmap = vm;
  prob.c = Vec::Zero(vm.num_vars);
  prob.lower = Vec::Zero(vm.num_vars);
  prob.upper = Vec::Constant(vm.num_vars, kInf);
  prob.integral.assign(vm.num_vars, 0);

  for (int j = 0; j < G + N; ++j) {
    prob.c[vm.x(j)] = inst.c_inv[j];
    prob.upper[vm.x(j)] = inst.x_max[j];
    prob.upper[vm.b(j)] = 1.0;
    prob.integral[vm.b(j)] = 1;
  }
  for (int t = 0; t < P; ++t) {
    const double w = pd.weight[t];
    for (int g = 0; g < G; ++g) prob.c[vm.p(t, g)] = w * dt * inst.c_p[g];
    prob.c[vm.dns(t)] = w * inst.c_ns;
    for (int n = 0; n < N; ++n) {
      prob.lower[vm.pc(t, n)] = inst.p_s_min[n];
      prob.upper[vm.pc(t, n)] = inst.p_s_max[n];
      prob.lower[vm.pd(t, n)] = inst.p_s_min[N + n];
      prob.upper[vm.pd(t, n)] = inst.p_s_max[N + n];
    }
  }

  std::vector<Eigen::Triplet<double>> eq, in;
  prob.b_eq = Vec::Zero(rm.num_eq());
  prob.b_in = Vec::Zero(rm.num_in());

  for (int t = 0; t < P; ++t) {
    const int row = rm.eq_balance(t);
    for (int g = 0; g < G; ++g) eq.emplace_back(row, vm.p(t, g), dt);
    for (int n = 0; n < N; ++n) {
      eq.emplace_back(row, vm.pd(t, n), dt);
      eq.emplace_back(row, vm.pc(t, n), -dt);
    }
    eq.emplace_back(row, vm.dns(t), 1.0);
    prob.b_eq[row] = pd.demand[t];
  }
  for (int t = 0; t < P; ++t) {
    const double step = pd.weight[t] * dt;
    for (int n = 0; n < N; ++n) {
      const int row = rm.eq_dyn(t, n);
      eq.emplace_back(row, vm.s(t + 1, n), 1.0);
      eq.emplace_back(row, vm.s(t, n), -1.0);
      eq.emplace_back(row, vm.pc(t, n), -inst.eta_c[n] * step);
      eq.emplace_back(row, vm.pd(t, n), inst.eta_d[n] * step);
    }
  }
  for (int n = 0; n < N; ++n) {
    const int row = rm.eq_init(n);
    eq.emplace_back(row, vm.s(0, n), 1.0);
    prob.b_eq[row] = inst.s0[n];
  }

  for (int t = 0; t < P; ++t)
    for (int g = 0; g < G; ++g) {
      const int row = rm.in_gen(t, g);
      in.emplace_back(row, vm.p(t, g), 1.0);
      in.emplace_back(row, vm.x(g), -pd.cap_factor(t, g));
    }
  // Storage capacity covers every state including the terminal one.
  for (int t = 0; t <= P; ++t)
    for (int n = 0; n < N; ++n) {
      const int row = rm.in_scap(t, n);
      in.emplace_back(row, vm.s(t, n), 1.0);
      in.emplace_back(row, vm.x(G + n), -dt);
    }
  for (int j = 0; j < G + N; ++j) {
    const int lo = rm.in_xlo(j), hi = rm.in_xhi(j);
    if (inst.x_min[j] != 0.0) in.emplace_back(lo, vm.b(j), inst.x_min[j]);
    in.emplace_back(lo, vm.x(j), -1.0);
    in.emplace_back(hi, vm.x(j), 1.0);
    in.emplace_back(hi, vm.b(j), -inst.x_max[j]);
  }

  prob.a_eq.resize(rm.num_eq(), vm.num_vars);
  prob.a_eq.setFromTriplets(eq.begin(), eq.end());
  prob.a_in.resize(rm.num_in(), vm.num_vars);
  prob.a_in.setFromTriplets(in.begin(), in.end());

  std::vector<Eigen::Triplet<double>> q_trip;
  prob.c0 = 0.0;
  if (kind == ModelKind::Miqp) add_penalty_terms(inst, pd, vm, q_trip, prob.c, prob.c0);
  prob.Q.resize(vm.num_vars, vm.num_vars);
  prob.Q.setFromTriplets(q_trip.begin(), q_trip.end());

  return prob;
}

CanonicalProblem build_full(const GepInstance& inst, ModelKind kind) {
  inst.validate();
  PeriodData pd;
  pd.weight = Vec::Ones(inst.num_periods);
  pd.demand = inst.demand;
  pd.cap_factor = inst.cap_factor;
  pd.z_ref = inst.z_ref;
  return build_gep_canonical(inst, pd, kind);
}

CanonicalProblem build_restricted(const GepInstance& inst, const Vec& b_fixed,
                                  ModelKind kind) {
  if (b_fixed.size() != inst.num_units())
    throw std::invalid_argument("build_restricted: b_fixed length must be G+N");
  for (int j = 0; j < b_fixed.size(); ++j)
    if (b_fixed[j] != 0.0 && b_fixed[j] != 1.0)
      throw std::invalid_argument("build_restricted: b_fixed entries must be 0 or 1");
  CanonicalProblem prob = build_full(inst, kind);
  const VarMap& vm = *prob.varmap;
  for (int j = 0; j < b_fixed.size(); ++j) {
    prob.lower[vm.b(j)] = b_fixed[j];
    prob.upper[vm.b(j)] = b_fixed[j];
    prob.integral[vm.b(j)] = 0;
  }
  return prob;
}

CanonicalProblem build_metric_model(const GepInstance& inst, const MetricSpec& metric,
                                    MetricSense sense, double j_ub, ModelKind kind) {
  if (!std::isfinite(j_ub)) throw std::invalid_argument("build_metric_model: j_ub must be finite");
  metric.validate(inst);

  CanonicalProblem prob = build_full(inst, kind);
  const Vec cost_c = prob.c;
  const double cost_c0 = prob.c0;
  const SpMat cost_q = prob.Q;

  Vec m = metric.to_canonical(prob);
  prob.c = sense == MetricSense::Maximize ? Vec(-m) : m;
  prob.c0 = 0.0;
  prob.Q.setZero();

  if (kind == ModelKind::Milp) {
    // One extra row J(z) <= j_ub.
    SpMat cap(1, prob.num_vars);
    std::vector<Eigen::Triplet<double>> trip;
    for (int j = 0; j < prob.num_vars; ++j)
      if (cost_c[j] != 0.0) trip.emplace_back(0, j, cost_c[j]);
    cap.setFromTriplets(trip.begin(), trip.end());
    SpMat stacked(prob.a_in.rows() + 1, prob.num_vars);
    std::vector<Eigen::Triplet<double>> all;
    all.reserve(prob.a_in.nonZeros() + cap.nonZeros());
    for (int k = 0; k < prob.a_in.outerSize(); ++k)
      for (SpMat::InnerIterator it(prob.a_in, k); it; ++it)
        all.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    for (int k = 0; k < cap.outerSize(); ++k)
      for (SpMat::InnerIterator it(cap, k); it; ++it)
        all.emplace_back(static_cast<int>(prob.a_in.rows()), static_cast<int>(it.col()),
                         it.value());
    stacked.setFromTriplets(all.begin(), all.end());
    prob.a_in = std::move(stacked);
    Vec rhs(prob.b_in.size() + 1);
    rhs << prob.b_in, j_ub - cost_c0;
    prob.b_in = std::move(rhs);
  } else {
    QuadConstraint qc;
    qc.P = cost_q;
    qc.r = cost_c;
    qc.d = cost_c0 - j_ub;
    prob.qcap = std::move(qc);
  }
  return prob;
}

FullSolution decode_solution(const CanonicalProblem& problem, const Vec& primal) {
  if (!problem.varmap) throw std::invalid_argument("decode_solution: problem has no variable map");
  if (primal.size() != problem.num_vars)
    throw std::invalid_argument("decode_solution: primal length mismatch");
  const VarMap& vm = *problem.varmap;
  FullSolution sol;
  sol.x.resize(vm.G + vm.N);
  sol.b.resize(vm.G + vm.N);
  for (int j = 0; j < vm.G + vm.N; ++j) {
    sol.x[j] = primal[vm.x(j)];
    sol.b[j] = primal[vm.b(j)];
  }
  sol.p.resize(vm.periods, vm.G);
  sol.s.resize(vm.periods + 1, vm.N);
  sol.p_c.resize(vm.periods, vm.N);
  sol.p_d.resize(vm.periods, vm.N);
  sol.d_ns.resize(vm.periods);
  for (int t = 0; t < vm.periods; ++t) {
    for (int g = 0; g < vm.G; ++g) sol.p(t, g) = primal[vm.p(t, g)];
    for (int n = 0; n < vm.N; ++n) {
      sol.p_c(t, n) = primal[vm.pc(t, n)];
      sol.p_d(t, n) = primal[vm.pd(t, n)];
    }
    sol.d_ns[t] = primal[vm.dns(t)];
  }
  for (int t = 0; t <= vm.periods; ++t)
    for (int n = 0; n < vm.N; ++n) sol.s(t, n) = primal[vm.s(t, n)];
  return sol;
}

Vec encode_solution(const CanonicalProblem& problem, const FullSolution& sol) {
  if (!problem.varmap) throw std::invalid_argument("encode_solution: problem has no variable map");
  const VarMap& vm = *problem.varmap;
  if (sol.x.size() != vm.G + vm.N || sol.periods() != vm.periods)
    throw std::invalid_argument("encode_solution: solution shape mismatch");
  Vec z = Vec::Zero(problem.num_vars);
  for (int j = 0; j < vm.G + vm.N; ++j) {
    z[vm.x(j)] = sol.x[j];
    z[vm.b(j)] = sol.b[j];
  }
  for (int t = 0; t < vm.periods; ++t) {
    for (int g = 0; g < vm.G; ++g) z[vm.p(t, g)] = sol.p(t, g);
    for (int n = 0; n < vm.N; ++n) {
      z[vm.pc(t, n)] = sol.p_c(t, n);
      z[vm.pd(t, n)] = sol.p_d(t, n);
    }
    z[vm.dns(t)] = sol.d_ns[t];
  }
  for (int t = 0; t <= vm.periods; ++t)
    for (int n = 0; n < vm.N; ++n) z[vm.s(t, n)] = sol.s(t, n);
  return z;
}

CostBreakdown objective_terms(const GepInstance& inst, const FullSolution& sol,
                              ModelKind kind) {
  const int T = sol.periods();
  if (sol.x.size() != inst.num_units() || T != inst.num_periods)
    throw std::invalid_argument("objective_terms: solution shape mismatch");
  CostBreakdown out;
  out.investment = inst.c_inv.dot(sol.x);
  for (int t = 0; t < T; ++t) {
    out.operational += inst.delta * inst.c_p.dot(sol.p.row(t));
    out.non_supplied += inst.c_ns * sol.d_ns[t];
  }
  if (kind == ModelKind::Miqp && inst.num_ref > 0) {
    const int G = inst.num_generators, N = inst.num_storage;
    Vec op(inst.num_op_vars_per_period());
    for (int t = 0; t < T; ++t) {
      op.segment(0, G) = sol.p.row(t);
      op[G] = sol.d_ns[t];
      op.segment(G + 1, N) = sol.s.row(t);
      op.segment(G + 1 + N, N) = sol.p_c.row(t);
      op.segment(G + 1 + 2 * N, N) = sol.p_d.row(t);
      out.quadratic_penalty +=
          (inst.penalty_matrix * op - inst.z_ref.row(t).transpose()).squaredNorm();
    }
  }
  out.total = out.investment + out.operational + out.non_supplied + out.quadratic_penalty;
  return out;
}

namespace {

using nlohmann::json;

json mat_json(const Mat& m) {
  json a = json::array();
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) a.push_back(m(r, c));
  return a;
}

Mat mat_from(const json& j, const char* field, int rows, int cols) {
  const auto& a = j.at(field);
  if (!a.is_array() || static_cast<int>(a.size()) != rows * cols)
    throw std::runtime_error(std::string("solution file: bad field ") + field);
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = a[r * cols + c].get<double>();
  return m;
}

}  // namespace

void save_solution(const FullSolution& sol, const std::string& path) {
  json j;
  const int U = static_cast<int>(sol.x.size());
  j["num_units"] = U;
  j["num_generators"] = static_cast<int>(sol.p.cols());
  j["num_storage"] = static_cast<int>(sol.s.cols());
  j["periods"] = sol.periods();
  j["x"] = mat_json(sol.x);
  j["b"] = mat_json(sol.b);
  j["p"] = mat_json(sol.p);
  j["s"] = mat_json(sol.s);
  j["p_c"] = mat_json(sol.p_c);
  j["p_d"] = mat_json(sol.p_d);
  j["d_ns"] = mat_json(sol.d_ns);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
}

FullSolution load_solution(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open solution file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("solution file '" + path + "': " + e.what());
  }
  const int U = j.at("num_units").get<int>();
  const int G = j.at("num_generators").get<int>();
  const int N = j.at("num_storage").get<int>();
  const int P = j.at("periods").get<int>();
  if (U != G + N || P < 1) throw std::runtime_error("solution file: inconsistent dimensions");
  FullSolution sol;
  sol.x = mat_from(j, "x", U, 1);
  sol.b = mat_from(j, "b", U, 1);
  sol.p = mat_from(j, "p", P, G);
  sol.s = mat_from(j, "s", P + 1, N);
  sol.p_c = mat_from(j, "p_c", P, N);
  sol.p_d = mat_from(j, "p_d", P, N);
  sol.d_ns = mat_from(j, "d_ns", P, 1);
  return sol;
}

}  // namespace gep
