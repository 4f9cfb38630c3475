#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "gep/benders.hpp"
#include "gep/bounds.hpp"
#include "gep/metrics.hpp"

namespace {

using namespace gep;

int check_solver_backend() {
  const char* env = std::getenv("GEP_SOLVER");
  if (env && std::string(env) != "internal") {
    std::cerr << "error: solver backend '" << env
              << "' is not available in this build (set GEP_SOLVER=internal or unset it)\n";
    return 2;
  }
  return 0;
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << body;
}

void print_breakdown(const GepInstance& inst, const FullSolution& sol, ModelKind kind) {
  const CostBreakdown bd = objective_terms(inst, sol, kind);
  std::cout << "  investment        " << bd.investment << "\n"
            << "  operational       " << bd.operational << "\n"
            << "  non-supplied      " << bd.non_supplied << "\n"
            << "  quadratic penalty " << bd.quadratic_penalty << "\n"
            << "  total             " << bd.total << "\n";
}

void report_trace(const BoundsTrace& trace, const std::string& label) {
  std::cout << label << ": " << to_string(trace.status) << " after " << trace.rows.size()
            << " iterations";
  if (!trace.rows.empty())
    std::cout << ", lb=" << trace.final_lb << " ub=" << trace.final_ub
              << " gap=" << trace.rows.back().gap;
  std::cout << "\n";
  if (!trace.error.empty()) std::cout << "  error: " << trace.error << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  if (const int rc = check_solver_backend(); rc != 0) return rc;

  CLI::App app{"Generation expansion planning with aggregation-based objective bounds"};
  app.require_subcommand(1);
  std::cout.precision(12);

  // generate
  auto* gen = app.add_subcommand("generate", "Generate a synthetic instance file");
  GenConfig cfg;
  std::string gen_out, gen_ts;
  gen->add_option("--G", cfg.G, "number of generators");
  gen->add_option("--N", cfg.N, "number of storage units");
  gen->add_option("--T", cfg.T, "number of periods");
  gen->add_option("--seed", cfg.seed, "random seed");
  gen->add_option("--fraction-thermal", cfg.fraction_thermal, "thermal share of generators");
  gen->add_option("--delta", cfg.delta, "hours per period");
  gen->add_option("--timeseries", gen_ts, "CSV with demand/capacity-factor/reference series");
  gen->add_option("--out", gen_out, "output instance file")->required();

  // shared solve flags
  std::string inst_path, model_str = "milp", clustering_str = "sequential";
  std::string out_path, trace_path, solution_path, prefix;
  std::uint64_t seed = 0;
  int K = 10, k0 = 10, rho = 10, max_iter = 1000, unit = 0;
  double eps = 0.01, jlb = 0.0, jub = 0.0;
  long node_limit = 2'000'000;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--instance", inst_path, "instance file")->required();
    cmd->add_option("--model", model_str, "milp or miqp");
  };

  auto* full = app.add_subcommand("solve-full", "Solve the full-scale model exactly");
  add_common(full);
  full->add_option("--out", out_path, "write the optimal solution to this file");
  full->add_option("--node-limit", node_limit, "branch-and-bound node limit");

  auto* agg = app.add_subcommand("solve-agg", "Solve an aggregated model");
  add_common(agg);
  agg->add_option("--clustering", clustering_str, "sequential|uniform|kmeans|gmm|dp");
  agg->add_option("--K", K, "number of clusters");
  agg->add_option("--seed", seed, "clustering seed");
  agg->add_option("--partition-out", out_path, "write the partition to this file");

  auto* tsa = app.add_subcommand("tsa-bounds", "Iterative aggregation bounds");
  add_common(tsa);
  tsa->add_option("--clustering", clustering_str, "sequential|uniform|kmeans|gmm|dp");
  tsa->add_option("--k0", k0, "initial cluster count");
  tsa->add_option("--rho", rho, "cluster increment per iteration");
  tsa->add_option("--eps", eps, "optimality gap threshold");
  tsa->add_option("--max-iter", max_iter, "iteration limit");
  tsa->add_option("--seed", seed, "clustering seed");
  tsa->add_option("--trace", trace_path, "write the per-iteration trace CSV");
  tsa->add_option("--solution", solution_path, "write the feasible solution");

  auto* ben = app.add_subcommand("benders", "Benders decomposition baseline");
  add_common(ben);
  ben->add_option("--eps", eps, "optimality gap threshold");
  ben->add_option("--max-iter", max_iter, "iteration limit");
  ben->add_option("--trace", trace_path, "write the per-iteration trace CSV");
  ben->add_option("--solution", solution_path, "write the feasible solution");

  auto* met = app.add_subcommand("metric-bounds", "Stakeholder metric bounds");
  add_common(met);
  std::string metric_name = "storage_capacity", warm_path;
  met->add_option("--metric", metric_name, "storage_capacity|investment_cost|operational_cost");
  met->add_option("--unit", unit, "storage unit index for storage_capacity");
  met->add_option("--jlb", jlb, "objective lower bound")->required();
  met->add_option("--jub", jub, "objective upper bound")->required();
  met->add_option("--warm", warm_path, "feasible solution file for warm starts");
  met->add_option("--trace", trace_path, "append metric rows to this CSV");

  auto* cmp = app.add_subcommand("compare", "Overlay aggregation bounds and Benders");
  add_common(cmp);
  cmp->add_option("--clustering", clustering_str, "sequential|uniform|kmeans|gmm|dp");
  cmp->add_option("--k0", k0, "initial cluster count");
  cmp->add_option("--rho", rho, "cluster increment per iteration");
  cmp->add_option("--eps", eps, "optimality gap threshold");
  cmp->add_option("--max-iter", max_iter, "iteration limit");
  cmp->add_option("--seed", seed, "clustering seed");
  cmp->add_option("--out-prefix", prefix, "trace files <prefix>_tsa.csv and <prefix>_benders.csv")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      GepInstance inst;
      if (!gen_ts.empty()) {
        inst = generate_instance(cfg);
        auto [demand, cap_factor, z_ref] = load_timeseries_csv(gen_ts, cfg.G, cfg.N);
        const int T = static_cast<int>(demand.size());
        GenConfig resized = cfg;
        resized.T = T;
        inst = generate_instance(resized);
        inst.demand = demand;
        inst.cap_factor = cap_factor;
        inst.z_ref = z_ref;
        inst.validate();
      } else {
        inst = generate_instance(cfg);
      }
      save_instance(inst, gen_out);
      std::cout << "wrote " << gen_out << " (G=" << inst.num_generators
                << " N=" << inst.num_storage << " T=" << inst.num_periods << ")\n";
      return 0;
    }

    const GepInstance inst = load_instance(inst_path);
    const ModelKind kind = model_kind_from_string(model_str);

    if (full->parsed()) {
      BnbOptions opts;
      opts.node_limit = node_limit;
      const SolveResult res = solve_mip(build_full(inst, kind), opts);
      std::cout << "status " << to_string(res.status) << " objective " << res.objective
                << " nodes " << res.nodes << " gap " << res.mip_gap << "\n";
      if (res.status != SolveStatus::Optimal && res.status != SolveStatus::IterationLimit)
        return 1;
      const FullSolution sol = decode_solution(build_full(inst, kind), res.primal);
      print_breakdown(inst, sol, kind);
      if (!out_path.empty()) save_solution(sol, out_path);
      return 0;
    }

    if (agg->parsed()) {
      const FeatureMatrix features = make_features(inst);
      const ChronoPartition part =
          make_partition(cluster_method_from_string(clustering_str), features, K, seed);
      const CanonicalProblem prob = build_aggregated(inst, part, kind);
      const SolveResult res = solve_mip(prob, {});
      std::cout << "status " << to_string(res.status) << " objective " << res.objective
                << " K " << part.num_clusters() << "\n";
      if (!out_path.empty()) write_file(out_path, part.to_text());
      return res.status == SolveStatus::Optimal ? 0 : 1;
    }

    if (tsa->parsed()) {
      TsaOptions opts;
      opts.kind = kind;
      opts.clustering = cluster_method_from_string(clustering_str);
      opts.k0 = k0;
      opts.rho = rho;
      opts.eps_thr = eps;
      opts.max_iter = max_iter;
      opts.seed = seed;
      const BoundsTrace trace = run_tsa_bounds(inst, opts);
      report_trace(trace, "tsa-bounds");
      if (!trace_path.empty()) write_file(trace_path, trace.to_csv(true));
      if (!solution_path.empty() && trace.has_feasible)
        save_solution(trace.feasible, solution_path);
      return trace.status == TraceStatus::SolverError ? 1 : 0;
    }

    if (ben->parsed()) {
      BendersOptions opts;
      opts.kind = kind;
      opts.eps_thr = eps;
      opts.max_iter = max_iter;
      const BoundsTrace trace = run_benders(inst, opts);
      report_trace(trace, "benders");
      if (!trace_path.empty()) write_file(trace_path, trace.to_csv(true));
      if (!solution_path.empty() && trace.has_feasible)
        save_solution(trace.feasible, solution_path);
      return trace.status == TraceStatus::SolverError ? 1 : 0;
    }

    if (met->parsed()) {
      const MetricSpec metric = MetricSpec::from_name(inst, metric_name, unit);
      std::optional<FullSolution> warm;
      if (!warm_path.empty()) warm = load_solution(warm_path);
      const MetricBounds mb = metric_bounds(inst, metric, jlb, jub, kind, warm);
      if (mb.status != SolveStatus::Optimal) {
        std::cout << "metric-bounds: " << to_string(mb.status) << "\n";
        return 1;
      }
      std::cout << "metric " << metric.name << " in [" << mb.mlb << ", " << mb.mub << "]\n";
      if (!trace_path.empty()) {
        std::ofstream out(trace_path, std::ios::app);
        if (!out) throw std::runtime_error("cannot open for appending: " + trace_path);
        out << metric_csv_row(metric.name, mb.mlb, mb.mub);
      }
      return 0;
    }

    if (cmp->parsed()) {
      TsaOptions topt;
      topt.kind = kind;
      topt.clustering = cluster_method_from_string(clustering_str);
      topt.k0 = k0;
      topt.rho = rho;
      topt.eps_thr = eps;
      topt.max_iter = max_iter;
      topt.seed = seed;
      const BoundsTrace tsa_trace = run_tsa_bounds(inst, topt);
      report_trace(tsa_trace, "tsa-bounds");

      BendersOptions bopt;
      bopt.kind = kind;
      bopt.eps_thr = eps;
      bopt.max_iter = max_iter;
      const BoundsTrace ben_trace = run_benders(inst, bopt);
      report_trace(ben_trace, "benders");

      write_file(prefix + "_tsa.csv", tsa_trace.to_csv(true));
      write_file(prefix + "_benders.csv", ben_trace.to_csv(true));
      return (tsa_trace.status == TraceStatus::SolverError ||
              ben_trace.status == TraceStatus::SolverError)
                 ? 1
                 : 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
