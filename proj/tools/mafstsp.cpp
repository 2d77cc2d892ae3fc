// Command-line frontend: instance generation, the three-phase solver,
// validation, baselines, bounds, benchmarking and exports.
//
// Exit codes: 0 success, 1 validation findings, 2 usage/input error,
// 3 external backend failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mafstsp/baselines.hpp"
#include "mafstsp/decode.hpp"
#include "mafstsp/fullmilp.hpp"
#include "mafstsp/milp.hpp"
#include "mafstsp/partition.hpp"
#include "mafstsp/pipeline.hpp"
#include "mafstsp/roadnet.hpp"
#include "mafstsp/settsp.hpp"
#include "mafstsp/solution.hpp"
#include "mafstsp/solutioneval.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFindings = 1;
constexpr int kExitUsage = 2;
constexpr int kExitBackend = 3;

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::string default_solver_cmd() {
  const char* env = std::getenv("MAFSTSP_MILP_SOLVER");
  return env ? env : "";
}

// Shared solver flags. A JSON config file provides defaults; explicit flags
// win over the file.
struct SolveFlags {
  std::string config_path;
  std::string phase1 = "nn";
  std::string metric = "set";
  double theta = 0.0;
  std::string backend = "auto";
  std::string mode = "full";
  double budget = 0.0;
  std::string solver = default_solver_cmd();
  int k = -1;
  std::uint64_t seed = 0;
  int parallelism = 0;
  std::string workdir = "/tmp";

  void add_options(CLI::App* cmd) {
    cmd->add_option("--config", config_path,
                    "JSON config file with the same keys as the flags");
    cmd->add_option("--phase1", phase1, "partition rule: nn|mst");
    cmd->add_option("--metric", metric, "partition metric: node|set");
    cmd->add_option("--theta", theta, "partition radius km (0: instance)");
    cmd->add_option("--backend", backend,
                    "set-TSP backend: auto|exact_dp|external_milp|greedy_ls");
    cmd->add_option("--mode", mode,
                    "set system mode: full|no_overlap|boundary_only|both");
    cmd->add_option("--budget", budget, "external solver budget, seconds");
    cmd->add_option("--solver", solver,
                    "external MILP solver command (default: "
                    "$MAFSTSP_MILP_SOLVER)");
    cmd->add_option("--k", k, "override drones per truck (-1: instance)");
    cmd->add_option("--seed", seed, "run seed (recorded in outputs)");
    cmd->add_option("--parallelism", parallelism,
                    "worker threads (0: one per group)");
    cmd->add_option("--workdir", workdir, "scratch dir for backends");
  }

  void merge_config(const CLI::App* cmd) {
    if (config_path.empty()) return;
    std::ifstream in(config_path);
    if (!in) throw std::invalid_argument("cannot read config " + config_path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument("config JSON malformed: " +
                                  std::string(e.what()));
    }
    auto absorb = [&](const char* flag, const char* key, auto& field) {
      if (cmd->count(flag) == 0 && j.contains(key))
        field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    absorb("--phase1", "phase1", phase1);
    absorb("--metric", "metric", metric);
    absorb("--theta", "theta", theta);
    absorb("--backend", "backend", backend);
    absorb("--mode", "mode", mode);
    absorb("--budget", "budget", budget);
    absorb("--solver", "solver", solver);
    absorb("--k", "k", k);
    absorb("--seed", "seed", seed);
    absorb("--parallelism", "parallelism", parallelism);
    absorb("--workdir", "workdir", workdir);
  }

  mafstsp::RunConfig to_run_config() const {
    mafstsp::RunConfig cfg;
    if (phase1 == "nn")
      cfg.phase1_rule = mafstsp::PartitionRule::nn;
    else if (phase1 == "mst")
      cfg.phase1_rule = mafstsp::PartitionRule::mst;
    else
      throw std::invalid_argument("unknown phase1 rule: " + phase1);
    if (metric == "node")
      cfg.phase1_metric = mafstsp::PartitionMetric::node;
    else if (metric == "set")
      cfg.phase1_metric = mafstsp::PartitionMetric::set;
    else
      throw std::invalid_argument("unknown partition metric: " + metric);
    cfg.theta_km = theta;
    if (backend == "auto")
      cfg.phase2.backend = mafstsp::SetTspConfig::Backend::auto_select;
    else if (backend == "exact_dp")
      cfg.phase2.backend = mafstsp::SetTspConfig::Backend::exact_dp;
    else if (backend == "external_milp")
      cfg.phase2.backend = mafstsp::SetTspConfig::Backend::external_milp;
    else if (backend == "greedy_ls")
      cfg.phase2.backend = mafstsp::SetTspConfig::Backend::greedy_ls;
    else
      throw std::invalid_argument("unknown set-TSP backend: " + backend);
    cfg.phase2.solver_cmd = solver;
    cfg.phase2.budget_s = budget;
    cfg.mode = mafstsp::set_system_mode_from(mode);
    cfg.k_override = k;
    cfg.seed = seed;
    cfg.parallelism = parallelism;
    cfg.workdir = workdir;
    return cfg;
  }
};

int run(int argc, char** argv) {
  CLI::App app{"MA-FSTSP road-network solver"};
  app.require_subcommand(1);

  // ---- gen ----
  auto* gen = app.add_subcommand("gen", "generate a random instance");
  std::string gen_kind = "grid", gen_out = "instance.json";
  mafstsp::GenSpec spec;
  gen->add_option("--kind", gen_kind, "grid|geometric");
  gen->add_option("--rows", spec.rows);
  gen->add_option("--cols", spec.cols);
  gen->add_option("--block-km", spec.block_km);
  gen->add_option("--num-vertices", spec.num_vertices);
  gen->add_option("--extent-km", spec.extent_km);
  gen->add_option("--k-nearest", spec.k_nearest);
  gen->add_option("--depots", spec.num_depots);
  gen->add_option("--customers", spec.num_customers);
  gen->add_option("--seed", spec.seed);
  gen->add_option("--truck-speed", spec.params.truck_speed_kmh);
  gen->add_option("--drone-speed", spec.params.drone_speed_kmh);
  gen->add_option("--range", spec.params.drone_range_km);
  gen->add_option("--k", spec.params.drones_per_truck);
  double gen_theta = 0.0;
  gen->add_option("--theta", gen_theta, "partition radius km");
  gen->add_option("-o,--output", gen_out);

  // ---- solve ----
  auto* solve = app.add_subcommand("solve", "run the three-phase pipeline");
  std::string solve_in, solve_out, solve_metrics;
  SolveFlags solve_flags;
  solve->add_option("-i,--instance", solve_in)->required();
  solve->add_option("-o,--output", solve_out, "solution JSON path");
  solve->add_option("--metrics", solve_metrics, "metrics JSON path");
  solve_flags.add_options(solve);

  // ---- validate ----
  auto* validate = app.add_subcommand("validate", "check a solution");
  std::string val_in, val_sol;
  validate->add_option("-i,--instance", val_in)->required();
  validate->add_option("-s,--solution", val_sol)->required();

  // ---- baseline ----
  auto* baseline = app.add_subcommand("baseline", "run the HC-VNS heuristic");
  std::string base_in, base_out;
  mafstsp::VnsConfig vns;
  baseline->add_option("-i,--instance", base_in)->required();
  baseline->add_option("-o,--output", base_out);
  baseline->add_option("--max-iterations", vns.max_iterations);
  baseline->add_option("--patience", vns.no_improve_patience);
  baseline->add_option("--seed", vns.seed);

  // ---- bound ----
  auto* bound = app.add_subcommand("bound", "lower bound on the optimum");
  std::string bound_in, bound_mode = "relaxed";
  bound->add_option("-i,--instance", bound_in)->required();
  bound->add_option("--mode", bound_mode, "exact_small|relaxed");

  // ---- bench ----
  auto* bench = app.add_subcommand("bench", "benchmark a suite directory");
  std::string bench_suite, bench_out;
  std::vector<std::string> bench_methods = {"pipeline"};
  bool bench_lb = false;
  std::string bench_bound_mode = "relaxed";
  std::vector<int> bench_k;
  std::vector<double> bench_sdr, bench_r;
  SolveFlags bench_flags;
  bench->add_option("--suite", bench_suite, "directory of instance JSONs")
      ->required();
  bench->add_option("-o,--output", bench_out, "CSV path (default stdout)");
  bench->add_option("--methods", bench_methods, "pipeline and/or hc_vns")
      ->delimiter(',');
  bench->add_flag("--lower-bound", bench_lb, "add bound and gap columns");
  bench->add_option("--bound-mode", bench_bound_mode, "exact_small|relaxed");
  bench->add_option("--sweep-k", bench_k, "drone-count sweep values")
      ->delimiter(',');
  bench->add_option("--sweep-sdr", bench_sdr, "drone-speed sweep values")
      ->delimiter(',');
  bench->add_option("--sweep-r", bench_r, "drone-range sweep values")
      ->delimiter(',');
  bench_flags.add_options(bench);

  // ---- export-milp ----
  auto* emilp = app.add_subcommand("export-milp", "write an LP model file");
  std::string emilp_in, emilp_out = "model.lp", emilp_what = "full";
  int emilp_T = 0, emilp_depot = -1;
  double emilp_bigm = 0.0;
  std::string emilp_mode = "full";
  emilp->add_option("-i,--instance", emilp_in)->required();
  emilp->add_option("-o,--output", emilp_out);
  emilp->add_option("--what", emilp_what, "full|settsp");
  emilp->add_option("--horizon", emilp_T, "full model horizon T (0: derive)");
  emilp->add_option("--big-m", emilp_bigm, "big-M (0: derive)");
  emilp->add_option("--depot", emilp_depot,
                    "settsp: depot whose group to model (default: first)");
  emilp->add_option("--mode", emilp_mode, "settsp: set system mode");

  // ---- export-geojson ----
  auto* egeo = app.add_subcommand("export-geojson", "write routes as GeoJSON");
  std::string egeo_in, egeo_sol, egeo_out = "solution.geojson";
  egeo->add_option("-i,--instance", egeo_in)->required();
  egeo->add_option("-s,--solution", egeo_sol)->required();
  egeo->add_option("-o,--output", egeo_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen->parsed()) {
      if (gen_kind == "grid")
        spec.kind = mafstsp::GenSpec::Kind::grid;
      else if (gen_kind == "geometric")
        spec.kind = mafstsp::GenSpec::Kind::geometric;
      else
        throw std::invalid_argument("unknown generator kind: " + gen_kind);
      if (gen->count("--theta")) spec.params.theta_partition_km = gen_theta;
      if (!gen->count("--seed")) spec.seed = 1;
      mafstsp::Instance inst = mafstsp::generate_instance(spec);
      mafstsp::save_instance(inst, gen_out);
      std::cout << "wrote " << gen_out << ": " << inst.net.size()
                << " vertices, " << inst.net.arcs.size() << " arcs, "
                << inst.depots.size() << " depots, " << inst.customers.size()
                << " customers\n";
      return kExitOk;
    }

    if (solve->parsed()) {
      solve_flags.merge_config(solve);
      mafstsp::Instance inst = mafstsp::load_instance(solve_in);
      mafstsp::PipelineResult res =
          mafstsp::solve_pipeline(inst, solve_flags.to_run_config());
      if (!solve_out.empty()) mafstsp::save_solution(res.solution, solve_out);
      if (!solve_metrics.empty())
        write_text(solve_metrics, res.metrics.dump(2) + "\n");
      std::cout << res.metrics.dump(2) << "\n";
      return kExitOk;
    }

    if (validate->parsed()) {
      mafstsp::Instance inst = mafstsp::load_instance(val_in);
      mafstsp::Solution sol = mafstsp::load_solution(val_sol);
      const std::vector<std::string> findings =
          mafstsp::validate_solution(inst, sol);
      if (findings.empty()) {
        std::cout << "solution is feasible, total cost "
                  << sol.total_cost_h << " h\n";
        return kExitOk;
      }
      for (const std::string& f : findings) std::cout << f << "\n";
      return kExitFindings;
    }

    if (baseline->parsed()) {
      mafstsp::Instance inst = mafstsp::load_instance(base_in);
      mafstsp::Solution sol = mafstsp::hc_vns_solve(inst, vns);
      if (!base_out.empty()) mafstsp::save_solution(sol, base_out);
      std::cout << "hc_vns cost " << sol.total_cost_h << " h ("
                << sol.meta.at("sweeps").get<int>() << " sweeps)\n";
      return kExitOk;
    }

    if (bound->parsed()) {
      mafstsp::Instance inst = mafstsp::load_instance(bound_in);
      mafstsp::BoundMode m;
      if (bound_mode == "exact_small")
        m = mafstsp::BoundMode::exact_small;
      else if (bound_mode == "relaxed")
        m = mafstsp::BoundMode::relaxed;
      else
        throw std::invalid_argument("unknown bound mode: " + bound_mode);
      std::cout << mafstsp::lower_bound(inst, m) << "\n";
      return kExitOk;
    }

    if (bench->parsed()) {
      bench_flags.merge_config(bench);
      mafstsp::BenchConfig bc;
      bc.methods = bench_methods;
      bc.with_lower_bound = bench_lb;
      if (bench_bound_mode == "exact_small")
        bc.bound_mode = mafstsp::BoundMode::exact_small;
      else if (bench_bound_mode == "relaxed")
        bc.bound_mode = mafstsp::BoundMode::relaxed;
      else
        throw std::invalid_argument("unknown bound mode: " + bench_bound_mode);
      bc.k_sweep = bench_k;
      bc.sdr_sweep = bench_sdr;
      bc.r_sweep = bench_r;
      bc.run = bench_flags.to_run_config();
      std::vector<std::pair<std::string, mafstsp::Instance>> suite;
      std::vector<std::filesystem::path> paths;
      for (const auto& entry :
           std::filesystem::directory_iterator(bench_suite))
        if (entry.path().extension() == ".json") paths.push_back(entry.path());
      std::sort(paths.begin(), paths.end());
      std::string load_errors;
      for (const auto& path : paths) {
        try {
          suite.push_back(
              {path.filename().string(), mafstsp::load_instance(path)});
        } catch (const std::exception& e) {
          load_errors += "# error instance=" + path.filename().string() +
                         ": " + e.what() + "\n";
        }
      }
      const std::string csv = mafstsp::bench_csv(suite, bc) + load_errors;
      if (bench_out.empty())
        std::cout << csv;
      else
        write_text(bench_out, csv);
      return kExitOk;
    }

    if (emilp->parsed()) {
      mafstsp::Instance inst = mafstsp::load_instance(emilp_in);
      mafstsp::MilpModel model;
      if (emilp_what == "full") {
        mafstsp::FullModelConfig cfg;
        cfg.T = emilp_T;
        cfg.bigM = emilp_bigm;
        mafstsp::FullMilpBuild built = mafstsp::build_full_milp(inst, cfg);
        model = std::move(built.model);
        std::cout << "full model: T=" << built.T << " bigM=" << built.bigM
                  << " vars=" << model.vars.size()
                  << " constraints=" << model.constraints.size() << "\n";
      } else if (emilp_what == "settsp") {
        mafstsp::Assignment asg =
            mafstsp::partition(inst, mafstsp::PartitionRule::nn,
                               mafstsp::PartitionMetric::node);
        const int depot = emilp_depot >= 0 ? emilp_depot : inst.depots.front();
        if (!asg.groups.count(depot))
          throw std::invalid_argument("no group for depot " +
                                      std::to_string(depot));
        mafstsp::SetSystem sys = mafstsp::build_set_system(
            inst, depot, asg.groups.at(depot),
            inst.params.drone_range_km / 2.0,
            mafstsp::set_system_mode_from(emilp_mode));
        mafstsp::DistanceOracle oracle = mafstsp::make_set_tsp_oracle(inst, sys);
        mafstsp::SetTspCosts costs{&inst, &oracle};
        model = mafstsp::build_set_tsp_milp(sys, costs);
        std::cout << "set-TSP model for depot " << depot << ": vars="
                  << model.vars.size()
                  << " constraints=" << model.constraints.size() << "\n";
      } else {
        throw std::invalid_argument("unknown model kind: " + emilp_what);
      }
      mafstsp::export_lp(model, emilp_out);
      std::cout << "wrote " << emilp_out << "\n";
      return kExitOk;
    }

    if (egeo->parsed()) {
      mafstsp::Instance inst = mafstsp::load_instance(egeo_in);
      mafstsp::Solution sol = mafstsp::load_solution(egeo_sol);
      const std::vector<std::string> findings =
          mafstsp::validate_solution(inst, sol);
      if (!findings.empty()) {
        for (const std::string& f : findings) std::cout << f << "\n";
        return kExitFindings;
      }
      write_text(egeo_out,
                 mafstsp::solution_to_geojson(inst, sol).dump(2) + "\n");
      std::cout << "wrote " << egeo_out << "\n";
      return kExitOk;
    }
  } catch (const mafstsp::BackendError& e) {
    std::cerr << "backend failure: " << e.what() << "\n";
    return kExitBackend;
  } catch (const std::exception& e) {
    const std::string msg = e.what();
    std::cerr << "error: " << msg << "\n";
    return msg.rfind("pipeline self-validation failed", 0) == 0
               ? kExitFindings
               : kExitUsage;
  }
  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
