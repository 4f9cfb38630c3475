#include "gep/aggregation.hpp"

#include <json.hpp>

#include <fstream>
#include <stdexcept>

namespace gep {

namespace {

void check_partition(const GepInstance& inst, const ChronoPartition& partition) {
  partition.validate();
  if (partition.num_periods() != inst.num_periods)
    throw std::invalid_argument("partition covers " + std::to_string(partition.num_periods()) +
                                " periods, instance has " +
                                std::to_string(inst.num_periods));
}

}  // namespace

AggregatedParams aggregate_params(const GepInstance& inst, const ChronoPartition& partition) {
  check_partition(inst, partition);
  const int K = partition.num_clusters();
  AggregatedParams out;
  out.sizes.resize(K);
  out.demand.resize(K);
  out.cap_factor.resize(K, inst.num_generators);
  out.z_ref.resize(K, inst.num_ref);
  for (int k = 0; k < K; ++k) {
    const auto& r = partition.ranges[k];
    out.sizes[k] = r.size();
    out.demand[k] = inst.demand.segment(r.start, r.size()).mean();
    out.cap_factor.row(k) = inst.cap_factor.middleRows(r.start, r.size()).colwise().mean();
    if (inst.num_ref > 0)
      out.z_ref.row(k) = inst.z_ref.middleRows(r.start, r.size()).colwise().mean();
  }
  return out;
}

CanonicalProblem build_aggregated(const GepInstance& inst, const ChronoPartition& partition,
                                  ModelKind kind) {
  inst.validate();
  const AggregatedParams params = aggregate_params(inst, partition);
  PeriodData pd;
  pd.weight = params.sizes;
  pd.demand = params.demand;
  pd.cap_factor = params.cap_factor;
  pd.z_ref = params.z_ref;
  return build_gep_canonical(inst, pd, kind);
}

AggSolution aggregate_solution(const GepInstance& inst, const ChronoPartition& partition,
                               const FullSolution& z) {
  check_partition(inst, partition);
  const int G = inst.num_generators, N = inst.num_storage;
  if (z.x.size() != G + N || z.periods() != inst.num_periods)
    throw std::invalid_argument("aggregate_solution: solution shape mismatch");

  const int K = partition.num_clusters();
  AggSolution a;
  a.x = z.x;
  a.b = z.b;
  a.p.resize(K, G);
  a.s.resize(K + 1, N);
  a.p_c.resize(K, N);
  a.p_d.resize(K, N);
  a.d_ns.resize(K);
  for (int k = 0; k < K; ++k) {
    const auto& r = partition.ranges[k];
    a.p.row(k) = z.p.middleRows(r.start, r.size()).colwise().mean();
    a.p_c.row(k) = z.p_c.middleRows(r.start, r.size()).colwise().mean();
    a.p_d.row(k) = z.p_d.middleRows(r.start, r.size()).colwise().mean();
    a.d_ns[k] = z.d_ns.segment(r.start, r.size()).mean();
    a.s.row(k) = z.s.row(r.start);  // cluster-start state
  }
  a.s.row(K) = z.s.row(inst.num_periods);  // terminal state closes the horizon
  return a;
}

namespace {

FullSolution as_full_shape(const AggSolution& a) {
  FullSolution f;
  f.x = a.x;
  f.b = a.b;
  f.p = a.p;
  f.s = a.s;
  f.p_c = a.p_c;
  f.p_d = a.p_d;
  f.d_ns = a.d_ns;
  return f;
}

}  // namespace

Vec encode_agg_solution(const CanonicalProblem& agg_problem, const AggSolution& sol) {
  return encode_solution(agg_problem, as_full_shape(sol));
}

AggSolution decode_agg_solution(const CanonicalProblem& agg_problem, const Vec& primal) {
  const FullSolution f = decode_solution(agg_problem, primal);
  AggSolution a;
  a.x = f.x;
  a.b = f.b;
  a.p = f.p;
  a.s = f.s;
  a.p_c = f.p_c;
  a.p_d = f.p_d;
  a.d_ns = f.d_ns;
  return a;
}

void save_agg_solution(const AggSolution& sol, const ChronoPartition& partition,
                       const std::string& path) {
  nlohmann::json j;
  j["partition"] = nlohmann::json::array();
  for (const auto& r : partition.ranges) j["partition"].push_back({r.start, r.end});
  auto put = [&](const char* key, const Mat& m) {
    nlohmann::json a = nlohmann::json::array();
    for (int r = 0; r < m.rows(); ++r)
      for (int c = 0; c < m.cols(); ++c) a.push_back(m(r, c));
    j[key] = std::move(a);
  };
  put("x", sol.x);
  put("b", sol.b);
  put("p", sol.p);
  put("s", sol.s);
  put("p_c", sol.p_c);
  put("p_d", sol.p_d);
  put("d_ns", sol.d_ns);
  j["num_clusters"] = sol.num_clusters();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace gep
