#pragma once

/// Three-phase solver pipeline (partition -> per-group Set-TSP -> decode),
/// GeoJSON export and the benchmark table generator.

#include <atomic>
#include <chrono>
#include <exception>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "mafstsp/baselines.hpp"
#include "mafstsp/decode.hpp"
#include "mafstsp/partition.hpp"
#include "mafstsp/roadnet.hpp"
#include "mafstsp/settsp.hpp"
#include "mafstsp/solution.hpp"
#include "mafstsp/solutioneval.hpp"

namespace mafstsp {

struct RunConfig {
  PartitionRule phase1_rule = PartitionRule::nn;
  PartitionMetric phase1_metric = PartitionMetric::set;
  /// Partition radius override (km); <= 0 keeps the instance value
  /// (theta_partition_km, itself defaulting to range/2).
  double theta_km = 0.0;
  SetTspConfig phase2;
  SetSystemMode mode = SetSystemMode::full;
  int k_override = -1;  ///< < 0 keeps the instance drone count
  std::uint64_t seed = 0;
  int parallelism = 0;  ///< <= 0: one worker per group
  std::string workdir = "/tmp";
};

struct PipelineResult {
  Solution solution;
  nlohmann::json metrics = nlohmann::json::object();
};

namespace detail {

inline double seconds_since(
    std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

}  // namespace detail

/// Runs the full pipeline and self-validates the result. Group stages run
/// in parallel (one thread per group by default); aggregation is by depot
/// order, so results are independent of scheduling.
inline PipelineResult solve_pipeline(const Instance& input,
                                     RunConfig cfg = {}) {
  if (cfg.phase2.budget_s < 0.0)
    throw std::invalid_argument("pipeline: phase budget must be positive");
  Instance inst = input;
  if (cfg.k_override >= 0) inst.params.drones_per_truck = cfg.k_override;
  if (cfg.theta_km > 0.0) inst.params.theta_partition_km = cfg.theta_km;
  require_valid_instance(inst);

  PipelineResult out;
  nlohmann::json& metrics = out.metrics;

  // Phase 1: assign customers to depots.
  auto t0 = std::chrono::steady_clock::now();
  Assignment asg;
  try {
    asg = partition(inst, cfg.phase1_rule, cfg.phase1_metric);
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("phase1 (partition): ") + e.what());
  }
  metrics["phase1_s"] = detail::seconds_since(t0);
  metrics["phase1_method"] = asg.method;

  struct GroupJob {
    int depot = -1;
    std::vector<int> customers;
    SetTour tour;
    TruckGroupRoute group;
    double settsp_s = 0.0;
    double decode_s = 0.0;
    std::exception_ptr error;
  };
  std::vector<GroupJob> jobs;
  for (const auto& [p, cs] : asg.groups) {
    GroupJob job;
    job.depot = p;
    job.customers = cs;
    jobs.push_back(std::move(job));
  }

  // Phases 2 + 3 per group. The sortie radius is range/2 regardless of the
  // partition radius: any pair within such a set is a feasible sortie.
  const double service_theta = inst.params.drone_range_km / 2.0;
  auto run_job = [&](GroupJob& job) {
    try {
      auto t = std::chrono::steady_clock::now();
      SetSystem sys = build_set_system(inst, job.depot, job.customers,
                                       service_theta, cfg.mode);
      DistanceOracle oracle = make_set_tsp_oracle(inst, sys);
      SetTspCosts costs{&inst, &oracle};
      const std::string dir =
          cfg.workdir + "/group_" + std::to_string(job.depot);
      job.tour = solve_set_tsp(sys, costs, cfg.phase2, dir);
      job.settsp_s = detail::seconds_since(t);
    } catch (const std::exception& e) {
      job.error = std::make_exception_ptr(
          std::runtime_error(std::string("phase2 (set-tsp): ") + e.what()));
      return;
    }
    try {
      auto t = std::chrono::steady_clock::now();
      job.group = decode(inst, job.depot, extract_visit_order(job.tour));
      job.decode_s = detail::seconds_since(t);
    } catch (const std::exception& e) {
      job.error = std::make_exception_ptr(
          std::runtime_error(std::string("phase3 (decode): ") + e.what()));
    }
  };

  int workers = cfg.parallelism > 0 ? cfg.parallelism
                                    : static_cast<int>(jobs.size());
  workers = std::max(1, std::min<int>(workers, jobs.size()));
  if (workers <= 1) {
    for (GroupJob& job : jobs) run_job(job);
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < jobs.size(); i = next++)
        run_job(jobs[i]);
    };
    std::vector<std::thread> threads;
    for (int w = 0; w < workers; ++w) threads.emplace_back(worker);
    for (auto& th : threads) th.join();
  }
  for (GroupJob& job : jobs)
    if (job.error) std::rethrow_exception(job.error);

  Solution& sol = out.solution;
  sol.total_cost_h = 0.0;
  metrics["groups"] = nlohmann::json::array();
  double settsp_total = 0.0, decode_total = 0.0;
  for (GroupJob& job : jobs) {
    sol.groups.push_back(job.group);
    sol.total_cost_h += job.group.cost_h;
    settsp_total += job.settsp_s;
    decode_total += job.decode_s;
    metrics["groups"].push_back({{"depot", job.depot},
                                 {"customers", job.customers.size()},
                                 {"backend", job.tour.backend},
                                 {"set_tsp_cost_h", job.tour.cost_h},
                                 {"cost_h", job.group.cost_h},
                                 {"settsp_s", job.settsp_s},
                                 {"decode_s", job.decode_s}});
  }
  metrics["phase2_s"] = settsp_total;
  metrics["phase3_s"] = decode_total;
  metrics["cost_h"] = sol.total_cost_h;
  sol.meta = {{"method", "pipeline"},
              {"phase1", asg.method},
              {"mode", to_string(cfg.mode)},
              {"seed", cfg.seed}};

  const std::vector<std::string> findings = validate_solution(inst, sol);
  if (!findings.empty()) {
    std::string msg = "pipeline self-validation failed:";
    for (const auto& f : findings) msg += "\n  - " + f;
    throw std::runtime_error(msg);
  }
  return out;
}

// ---------------------------------------------------------------------------
// GeoJSON export
// ---------------------------------------------------------------------------

/// FeatureCollection: one LineString per truck route (role=truck), one
/// 3-point LineString per sortie (role=drone, takeoff -> customer ->
/// landing), and Points for depots and customers.
inline nlohmann::json solution_to_geojson(const Instance& inst,
                                          const Solution& sol) {
  auto coord = [&](int v) {
    return nlohmann::json::array(
        {inst.net.vertices[v].x, inst.net.vertices[v].y});
  };
  nlohmann::json features = nlohmann::json::array();
  for (const TruckGroupRoute& g : sol.groups) {
    nlohmann::json coords = nlohmann::json::array();
    for (int v : g.truck_route) coords.push_back(coord(v));
    features.push_back(
        {{"type", "Feature"},
         {"geometry", {{"type", "LineString"}, {"coordinates", coords}}},
         {"properties",
          {{"role", "truck"}, {"depot", g.depot}, {"cost_h", g.cost_h}}}});
  }
  for (const TruckGroupRoute& g : sol.groups)
    for (const Delivery& d : g.deliveries) {
      nlohmann::json coords =
          nlohmann::json::array({coord(g.truck_route[d.takeoff_index]),
                                 coord(d.customer),
                                 coord(g.truck_route[d.landing_index])});
      features.push_back(
          {{"type", "Feature"},
           {"geometry", {{"type", "LineString"}, {"coordinates", coords}}},
           {"properties",
            {{"role", "drone"},
             {"customer", d.customer},
             {"depot", g.depot},
             {"drone", d.drone}}}});
    }
  for (int p : inst.depots)
    features.push_back(
        {{"type", "Feature"},
         {"geometry", {{"type", "Point"}, {"coordinates", coord(p)}}},
         {"properties", {{"role", "depot"}, {"id", p}}}});
  for (int c : inst.customers)
    features.push_back(
        {{"type", "Feature"},
         {"geometry", {{"type", "Point"}, {"coordinates", coord(c)}}},
         {"properties", {{"role", "customer"}, {"id", c}}}});
  return {{"type", "FeatureCollection"}, {"features", features}};
}

// ---------------------------------------------------------------------------
// Benchmarks
// ---------------------------------------------------------------------------

struct BenchConfig {
  std::vector<std::string> methods = {"pipeline"};  // "pipeline" | "hc_vns"
  bool with_lower_bound = false;
  BoundMode bound_mode = BoundMode::relaxed;
  std::vector<int> k_sweep;        ///< optional sweep of drones per truck
  std::vector<double> sdr_sweep;   ///< optional sweep of drone speed (km/h)
  std::vector<double> r_sweep;     ///< optional sweep of drone range (km)
  RunConfig run;
  VnsConfig vns;
};

namespace detail {

inline std::string csv_num(double x) {
  std::ostringstream os;
  os.precision(9);
  os << x;
  return os.str();
}

inline void bench_row(std::ostream& os, const std::string& name,
                      const std::string& method, const std::string& label,
                      const Instance& inst, const BenchConfig& cfg) {
  double cost = 0.0;
  auto t0 = std::chrono::steady_clock::now();
  try {
    if (method == "pipeline")
      cost = solve_pipeline(inst, cfg.run).solution.total_cost_h;
    else
      cost = hc_vns_solve(inst, cfg.vns).total_cost_h;
  } catch (const std::exception& e) {
    os << "# error instance=" << name << " method=" << label << ": "
       << e.what() << "\n";
    return;
  }
  const double wall = seconds_since(t0);
  std::string lb, gap;
  if (cfg.with_lower_bound) {
    try {
      const double b = lower_bound(inst, cfg.bound_mode);
      lb = csv_num(b);
      if (b > 0.0) gap = csv_num((cost - b) / b * 100.0);
    } catch (const std::exception&) {
      // bound unavailable (e.g. caps): leave the columns empty
    }
  }
  os << name << "," << label << "," << csv_num(cost) << "," << csv_num(wall)
     << "," << lb << "," << gap << "\n";
}

}  // namespace detail

/// Fixed column order: instance,method,cost_h,wall_s,lower_bound,gap.
/// Sweep rows annotate the method column (e.g. "pipeline k=2"). Failures
/// become "# error ..." comment lines and the run continues.
inline std::string bench_csv(
    const std::vector<std::pair<std::string, Instance>>& suite,
    const BenchConfig& cfg = {}) {
  for (const std::string& method : cfg.methods)
    if (method != "pipeline" && method != "hc_vns")
      throw std::invalid_argument("bench: unknown method " + method);
  std::ostringstream os;
  os << "instance,method,cost_h,wall_s,lower_bound,gap\n";
  for (const auto& [name, inst] : suite) {
    for (const std::string& method : cfg.methods) {
      if (cfg.k_sweep.empty() && cfg.sdr_sweep.empty() && cfg.r_sweep.empty())
        detail::bench_row(os, name, method, method, inst, cfg);
      for (int k : cfg.k_sweep) {
        Instance variant = inst;
        variant.params.drones_per_truck = k;
        detail::bench_row(os, name, method, method + " k=" + std::to_string(k),
                          variant, cfg);
      }
      for (double s : cfg.sdr_sweep) {
        Instance variant = inst;
        variant.params.drone_speed_kmh = s;
        detail::bench_row(os, name, method,
                          method + " s_dr=" + detail::csv_num(s), variant,
                          cfg);
      }
      for (double r : cfg.r_sweep) {
        Instance variant = inst;
        variant.params.drone_range_km = r;
        detail::bench_row(os, name, method, method + " r=" + detail::csv_num(r),
                          variant, cfg);
      }
    }
  }
  return os.str();
}

}  // namespace mafstsp
