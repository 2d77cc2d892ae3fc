#pragma once

/// Exact time-indexed MILP of the whole multi-truck problem, plus a
/// brute-force optimum for tiny instances.
///
/// The model routes every truck in the shortest-path closure of the road
/// graph: an "arc" (u, v) at step t means the truck drives the cheapest road
/// path from u to v, and self-loops (u == v) cost nothing and model waiting.
/// A route occupies positions v_-1 .. v_T with v_-1 = depot; the arc taken at
/// step t arrives at position t. Drone sorties are step-indexed: x_{u,c,t}
/// launches towards c from position t-1 (vertex u), y_{u,c,t} recovers the
/// drone at position t (vertex u).
///
/// Variable families (declaration order, all lowercase names):
///   a_<p>_<c>        customer c assigned to depot p            binary
///   e_<p>_<u>_<v>_<t> truck p drives u -> v at step t, t in 0..T  binary
///   beta_<c>         customer c served by drone                binary
///   x_<u>_<c>_<t>    takeoff, t in 1..T                        binary
///   y_<u>_<c>_<t>    landing, t in 1..T                        binary
///   zx_<p>_<u>_<c>_<t>  linearized x * a                       binary
///   zy_<p>_<u>_<c>_<t>  linearized y * a                       binary
///   l_<p>_<t>        drones aboard truck p after step t, 1..T  continuous
///   tau_<p>_<u>_<t>  arrival time bound at (u, t), t in 0..T   continuous
///
/// The objective minimizes sum_p tau_<p>_<p>_<T>.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "mafstsp/milp.hpp"
#include "mafstsp/partition.hpp"
#include "mafstsp/roadnet.hpp"
#include "mafstsp/solution.hpp"
#include "mafstsp/solutioneval.hpp"

namespace mafstsp {

struct FullModelConfig {
  /// Route step horizon. <= 0 derives 2 * (largest nearest-neighbour
  /// reference tour vertex count) from the instance.
  int T = 0;
  /// Big-M constant for the indicator constraints. <= 0 derives 2 * (total
  /// nearest-neighbour reference tour duration in hours).
  double bigM = 0.0;
};

struct FullMilpBuild {
  MilpModel model;
  int T = 0;
  double bigM = 0.0;
};

namespace detail {

/// Greedy nearest-neighbour reference tours (one per depot, customers from
/// the node-metric nearest-depot partition). Used to derive T and big-M
/// defaults and as the pruning bound of the brute-force search.
struct NnReference {
  std::map<int, std::vector<int>> order;  // depot -> customer visit order
  std::map<int, double> tour_h;           // depot -> truck-only tour hours
  double total_h = 0.0;
  int max_tour_vertices = 2;  // depot, customers..., depot
};

inline NnReference nn_reference(const Instance& inst,
                                const DistanceOracle& oracle) {
  NnReference ref;
  Assignment asg = partition(inst, PartitionRule::nn, PartitionMetric::node);
  for (const auto& [p, customers] : asg.groups) {
    std::vector<int> left = customers;
    std::vector<int> ord;
    int cur = p;
    double hours = 0.0;
    while (!left.empty()) {
      int best = -1;
      double best_d = kInf;
      for (int c : left)
        if (oracle.road(cur, c) < best_d - kDistTol) {
          best_d = oracle.road(cur, c);
          best = c;
        }
      hours += oracle.road(cur, best) / inst.params.truck_speed_kmh;
      cur = best;
      ord.push_back(best);
      left.erase(std::find(left.begin(), left.end(), best));
    }
    hours += oracle.road(cur, p) / inst.params.truck_speed_kmh;
    ref.order[p] = ord;
    ref.tour_h[p] = hours;
    ref.total_h += hours;
    ref.max_tour_vertices = std::max(
        ref.max_tour_vertices, static_cast<int>(customers.size()) + 2);
  }
  return ref;
}

}  // namespace detail

/// Closed-form size of the full model, kept next to the builder so audits
/// can cross-check. P = depots, V = vertices, C = customers, T = horizon.
inline std::size_t full_milp_var_count(std::size_t P, std::size_t V,
                                       std::size_t C, std::size_t T) {
  return P * C                  // a
         + P * V * V * (T + 1)  // e
         + C                    // beta
         + 2 * V * C * T        // x, y
         + 2 * P * V * C * T    // zx, zy
         + P * T                // l
         + P * V * (T + 1);     // tau
}

inline std::size_t full_milp_constraint_count(std::size_t P, std::size_t V,
                                              std::size_t C, std::size_t T) {
  return C                              // part
         + P                            // edge_start
         + P                            // start_anchor
         + P * (T + 1)                  // one_arc
         + P * T                        // contig
         + P * V                        // balance
         + P * V * T                    // chain
         + C                            // take
         + C                            // land
         + C * T                        // order
         + C                            // range
         + P * C                        // truck_visit
         + 2 * P * V * T                // sync_takeoff, sync_land
         + P * V                        // cycle
         + P                            // drone_start
         + P                            // drone_final
         + P * T                        // drone_cap
         + P * (T - 1)                  // drone_bal
         + P * V * T                    // time_consist
         + P * V                        // time_truck_start
         + P * V * V * T                // time_truck
         + P * V * V * C * (T * (T + 1) / 2)  // time_drone
         + 2 * 3 * P * V * C * T;       // zx / zy linking
}

inline FullMilpBuild build_full_milp(const Instance& inst,
                                     FullModelConfig cfg = {}) {
  require_valid_instance(inst);
  const int V = inst.net.size();
  const int C = static_cast<int>(inst.customers.size());
  const int k = inst.params.drones_per_truck;
  const double s_tr = inst.params.truck_speed_kmh;
  const double s_dr = inst.params.drone_speed_kmh;
  DistanceOracle oracle = DistanceOracle::all_pairs(inst.net);
  detail::NnReference ref = detail::nn_reference(inst, oracle);

  int required_T = 2;
  for (const auto& [p, ord] : ref.order)
    required_T = std::max(required_T, static_cast<int>(ord.size()) + 1);
  int T = cfg.T > 0 ? cfg.T : 2 * ref.max_tour_vertices;
  if (T < 2) throw std::invalid_argument("full MILP: T must be at least 2");
  if (T < required_T)
    throw std::invalid_argument(
        "full MILP: T=" + std::to_string(T) +
        " too small, the nearest-neighbour reference tour needs T >= " +
        std::to_string(required_T));
  double M = cfg.bigM > 0.0 ? cfg.bigM : std::max(2.0 * ref.total_h, 1.0);

  const std::vector<int>& P = inst.depots;  // sorted, distinct
  auto num = [](int i) { return std::to_string(i); };

  FullMilpBuild out;
  out.T = T;
  out.bigM = M;
  MilpModel& mo = out.model;
  mo.name = "mafstsp_full";

  // --- variables (deterministic declaration order) ---
  for (int p : P)
    for (int c : inst.customers)
      mo.add_var("a_" + num(p) + "_" + num(c), 0, 1, true);
  for (int p : P)
    for (int u = 0; u < V; ++u)
      for (int v = 0; v < V; ++v)
        for (int t = 0; t <= T; ++t)
          mo.add_var("e_" + num(p) + "_" + num(u) + "_" + num(v) + "_" + num(t),
                     0, 1, true);
  for (int c : inst.customers) mo.add_var("beta_" + num(c), 0, 1, true);
  for (int u = 0; u < V; ++u)
    for (int c : inst.customers)
      for (int t = 1; t <= T; ++t)
        mo.add_var("x_" + num(u) + "_" + num(c) + "_" + num(t), 0, 1, true);
  for (int u = 0; u < V; ++u)
    for (int c : inst.customers)
      for (int t = 1; t <= T; ++t)
        mo.add_var("y_" + num(u) + "_" + num(c) + "_" + num(t), 0, 1, true);
  for (int p : P)
    for (int u = 0; u < V; ++u)
      for (int c : inst.customers)
        for (int t = 1; t <= T; ++t)
          mo.add_var(
              "zx_" + num(p) + "_" + num(u) + "_" + num(c) + "_" + num(t), 0, 1,
              true);
  for (int p : P)
    for (int u = 0; u < V; ++u)
      for (int c : inst.customers)
        for (int t = 1; t <= T; ++t)
          mo.add_var(
              "zy_" + num(p) + "_" + num(u) + "_" + num(c) + "_" + num(t), 0, 1,
              true);
  for (int p : P)
    for (int t = 1; t <= T; ++t)
      mo.add_var("l_" + num(p) + "_" + num(t), 0, k, false);
  for (int p : P)
    for (int u = 0; u < V; ++u)
      for (int t = 0; t <= T; ++t)
        mo.add_var("tau_" + num(p) + "_" + num(u) + "_" + num(t), 0, M, false,
                   (u == p && t == T) ? 1.0 : 0.0);

  auto av = [&](int p, int c) { return mo.var("a_" + num(p) + "_" + num(c)); };
  auto ev = [&](int p, int u, int v, int t) {
    return mo.var("e_" + num(p) + "_" + num(u) + "_" + num(v) + "_" + num(t));
  };
  auto betav = [&](int c) { return mo.var("beta_" + num(c)); };
  auto xv = [&](int u, int c, int t) {
    return mo.var("x_" + num(u) + "_" + num(c) + "_" + num(t));
  };
  auto yv = [&](int u, int c, int t) {
    return mo.var("y_" + num(u) + "_" + num(c) + "_" + num(t));
  };
  auto zxv = [&](int p, int u, int c, int t) {
    return mo.var("zx_" + num(p) + "_" + num(u) + "_" + num(c) + "_" + num(t));
  };
  auto zyv = [&](int p, int u, int c, int t) {
    return mo.var("zy_" + num(p) + "_" + num(u) + "_" + num(c) + "_" + num(t));
  };
  auto lv = [&](int p, int t) { return mo.var("l_" + num(p) + "_" + num(t)); };
  auto tauv = [&](int p, int u, int t) {
    return mo.var("tau_" + num(p) + "_" + num(u) + "_" + num(t));
  };
  auto drive_h = [&](int u, int v) {
    return u == v ? 0.0 : oracle.road(u, v) / s_tr;
  };
  auto fly_km = [&](int u, int v) {
    return euclid(inst.net, u, v);
  };
  using Terms = std::vector<MilpModel::Term>;

  // part: every customer belongs to exactly one truck group.
  for (int c : inst.customers) {
    Terms ts;
    for (int p : P) ts.push_back({av(p, c), 1.0});
    mo.add_constraint("part_" + num(c), ts, '=', 1.0);
  }
  // edge_start: a truck with at least one customer takes a step-0 arc out of
  // its depot (possibly the depot self-loop).
  for (int p : P) {
    Terms ts;
    for (int v = 0; v < V; ++v) ts.push_back({ev(p, p, v, 0), double(C)});
    for (int c : inst.customers) ts.push_back({av(p, c), -1.0});
    mo.add_constraint("edge_start_" + num(p), ts, '>', 0.0);
  }
  // start_anchor: step-0 arcs may only leave the depot (position -1 is p).
  for (int p : P) {
    Terms ts;
    for (int u = 0; u < V; ++u) {
      if (u == p) continue;
      for (int v = 0; v < V; ++v) ts.push_back({ev(p, u, v, 0), 1.0});
    }
    mo.add_constraint("start_anchor_" + num(p), ts, '=', 0.0);
  }
  // one_arc: at most one arc per step.
  for (int p : P)
    for (int t = 0; t <= T; ++t) {
      Terms ts;
      for (int u = 0; u < V; ++u)
        for (int v = 0; v < V; ++v) ts.push_back({ev(p, u, v, t), 1.0});
      mo.add_constraint("one_arc_" + num(p) + "_" + num(t), ts, '<', 1.0);
    }
  // contig: once the truck stops taking arcs it never resumes.
  for (int p : P)
    for (int t = 0; t < T; ++t) {
      Terms ts;
      for (int u = 0; u < V; ++u)
        for (int v = 0; v < V; ++v) {
          ts.push_back({ev(p, u, v, t + 1), 1.0});
          ts.push_back({ev(p, u, v, t), -1.0});
        }
      mo.add_constraint("contig_" + num(p) + "_" + num(t), ts, '<', 0.0);
    }
  // balance: arcs into a vertex equal arcs out of it (closed route).
  for (int p : P)
    for (int v = 0; v < V; ++v) {
      Terms ts;
      for (int u = 0; u < V; ++u)
        for (int t = 0; t <= T; ++t) {
          ts.push_back({ev(p, u, v, t), 1.0});
          ts.push_back({ev(p, v, u, t), -1.0});
        }
      mo.add_constraint("balance_" + num(p) + "_" + num(v), ts, '=', 0.0);
    }
  // chain: the head of the step-t arc is the tail of the step-t+1 arc.
  for (int p : P)
    for (int v = 0; v < V; ++v)
      for (int t = 0; t < T; ++t) {
        Terms ts;
        for (int u = 0; u < V; ++u) {
          ts.push_back({ev(p, u, v, t), 1.0});
          ts.push_back({ev(p, v, u, t + 1), -1.0});
        }
        mo.add_constraint("chain_" + num(p) + "_" + num(v) + "_" + num(t), ts,
                          '=', 0.0);
      }
  // take / land: a drone-served customer has exactly one takeoff and landing.
  for (int c : inst.customers) {
    Terms ts;
    for (int u = 0; u < V; ++u)
      for (int t = 1; t <= T; ++t) ts.push_back({xv(u, c, t), 1.0});
    ts.push_back({betav(c), -1.0});
    mo.add_constraint("take_" + num(c), ts, '=', 0.0);
  }
  for (int c : inst.customers) {
    Terms ts;
    for (int u = 0; u < V; ++u)
      for (int t = 1; t <= T; ++t) ts.push_back({yv(u, c, t), 1.0});
    ts.push_back({betav(c), -1.0});
    mo.add_constraint("land_" + num(c), ts, '=', 0.0);
  }
  // order: cumulative takeoffs dominate cumulative landings.
  for (int c : inst.customers)
    for (int t = 1; t <= T; ++t) {
      Terms ts;
      for (int u = 0; u < V; ++u)
        for (int s = 1; s <= t; ++s) {
          ts.push_back({xv(u, c, s), 1.0});
          ts.push_back({yv(u, c, s), -1.0});
        }
      mo.add_constraint("order_" + num(c) + "_" + num(t), ts, '>', 0.0);
    }
  // range: total flight distance of the sortie serving c stays within r.
  for (int c : inst.customers) {
    Terms ts;
    for (int u = 0; u < V; ++u)
      for (int t = 1; t <= T; ++t) {
        ts.push_back({xv(u, c, t), fly_km(u, c)});
        ts.push_back({yv(u, c, t), fly_km(c, u)});
      }
    mo.add_constraint("range_" + num(c), ts, '<',
                      inst.params.drone_range_km);
  }
  // truck_visit: a truck-served customer sees a real (non-self) departing arc.
  for (int p : P)
    for (int c : inst.customers) {
      Terms ts;
      for (int u = 0; u < V; ++u) {
        if (u == c) continue;
        for (int t = 0; t <= T; ++t) ts.push_back({ev(p, c, u, t), 1.0});
      }
      ts.push_back({betav(c), 1.0});
      ts.push_back({av(p, c), -M});
      mo.add_constraint("truck_visit_" + num(p) + "_" + num(c), ts, '>',
                        1.0 - M);
    }
  // sync_takeoff / sync_land: the truck is at the takeoff vertex when its
  // drones launch and at the landing vertex when they return.
  for (int p : P)
    for (int v = 0; v < V; ++v)
      for (int t = 1; t <= T; ++t) {
        Terms ts;
        for (int u = 0; u < V; ++u) ts.push_back({ev(p, v, u, t), double(k)});
        for (int c : inst.customers) ts.push_back({zxv(p, v, c, t), -1.0});
        mo.add_constraint(
            "sync_takeoff_" + num(p) + "_" + num(v) + "_" + num(t), ts, '>',
            0.0);
      }
  for (int p : P)
    for (int v = 0; v < V; ++v)
      for (int t = 1; t <= T; ++t) {
        Terms ts;
        for (int u = 0; u < V; ++u) ts.push_back({ev(p, u, v, t), double(k)});
        for (int c : inst.customers) ts.push_back({zyv(p, v, c, t), -1.0});
        mo.add_constraint("sync_land_" + num(p) + "_" + num(v) + "_" + num(t),
                          ts, '>', 0.0);
      }
  // cycle: takeoff/landing vertices are genuinely visited, not just waited
  // on - the truck must leave them over a real arc.
  for (int p : P)
    for (int u = 0; u < V; ++u) {
      Terms ts;
      for (int v = 0; v < V; ++v) {
        if (v == u) continue;
        for (int t = 0; t <= T; ++t)
          ts.push_back({ev(p, u, v, t), 2.0 * C});
      }
      for (int c : inst.customers)
        for (int t = 1; t <= T; ++t) {
          ts.push_back({zxv(p, u, c, t), -1.0});
          ts.push_back({zyv(p, u, c, t), -1.0});
        }
      mo.add_constraint("cycle_" + num(p) + "_" + num(u), ts, '>', 0.0);
    }
  // drone accounting.
  for (int p : P) {
    Terms ts;
    ts.push_back({lv(p, 1), 1.0});
    for (int c : inst.customers) ts.push_back({zxv(p, p, c, 1), 1.0});
    mo.add_constraint("drone_start_" + num(p), ts, '=', double(k));
  }
  for (int p : P)
    mo.add_constraint("drone_final_" + num(p), {{lv(p, T), 1.0}}, '=',
                      double(k));
  for (int p : P)
    for (int t = 1; t <= T; ++t)
      mo.add_constraint("drone_cap_" + num(p) + "_" + num(t),
                        {{lv(p, t), 1.0}}, '<', double(k));
  for (int p : P)
    for (int t = 2; t <= T; ++t) {
      Terms ts;
      ts.push_back({lv(p, t), 1.0});
      ts.push_back({lv(p, t - 1), -1.0});
      for (int u = 0; u < V; ++u)
        for (int c : inst.customers) {
          ts.push_back({zyv(p, u, c, t), -1.0});
          ts.push_back({zxv(p, u, c, t), 1.0});
        }
      mo.add_constraint("drone_bal_" + num(p) + "_" + num(t), ts, '=', 0.0);
    }
  // time_consist: arrival bounds are non-decreasing along the horizon.
  for (int p : P)
    for (int u = 0; u < V; ++u)
      for (int t = 0; t < T; ++t)
        mo.add_constraint(
            "time_consist_" + num(p) + "_" + num(u) + "_" + num(t),
            {{tauv(p, u, t), 1.0}, {tauv(p, u, t + 1), -1.0}}, '<', 0.0);
  // time_truck_start: the step-0 arc out of the depot charges its drive time.
  for (int p : P)
    for (int u = 0; u < V; ++u)
      mo.add_constraint(
          "time_truck_start_" + num(p) + "_" + num(u),
          {{tauv(p, u, 0), 1.0}, {ev(p, p, u, 0), -(drive_h(p, u) + M)}}, '>',
          -M);
  // time_truck: driving v -> u at step t accumulates travel time.
  for (int p : P)
    for (int u = 0; u < V; ++u)
      for (int v = 0; v < V; ++v)
        for (int t = 1; t <= T; ++t)
          mo.add_constraint("time_truck_" + num(p) + "_" + num(u) + "_" +
                                num(v) + "_" + num(t),
                            {{tauv(p, u, t), 1.0},
                             {tauv(p, v, t - 1), -1.0},
                             {ev(p, v, u, t), -(drive_h(v, u) + M)}},
                            '>', -M);
  // time_drone: a sortie launched at position s and recovered at position t
  // forces the landing arrival to absorb both flight legs.
  for (int p : P)
    for (int u = 0; u < V; ++u)
      for (int v = 0; v < V; ++v)
        for (int c : inst.customers)
          for (int t = 1; t <= T; ++t)
            for (int s = 0; s < t; ++s) {
              Terms ts;
              ts.push_back({tauv(p, u, t), 1.0});
              ts.push_back({tauv(p, v, s), -1.0});
              ts.push_back({zxv(p, v, c, s + 1), -fly_km(v, c) / s_dr});
              ts.push_back({zyv(p, u, c, t), -fly_km(c, u) / s_dr});
              ts.push_back({xv(v, c, s + 1), -M});
              ts.push_back({yv(u, c, t), -M});
              mo.add_constraint("time_drone_" + num(p) + "_" + num(v) + "_" +
                                    num(s) + "_" + num(c) + "_" + num(u) +
                                    "_" + num(t),
                                ts, '>', -2.0 * M);
            }
  // z-linearisation: zx = x * a and zy = y * a.
  for (int p : P)
    for (int u = 0; u < V; ++u)
      for (int c : inst.customers)
        for (int t = 1; t <= T; ++t) {
          std::string sfx =
              num(p) + "_" + num(u) + "_" + num(c) + "_" + num(t);
          mo.add_constraint(
              "zx_lb_" + sfx,
              {{zxv(p, u, c, t), 1.0}, {xv(u, c, t), -1.0}, {av(p, c), -1.0}},
              '>', -1.0);
          mo.add_constraint("zx_ubx_" + sfx,
                            {{zxv(p, u, c, t), 1.0}, {xv(u, c, t), -1.0}},
                            '<', 0.0);
          mo.add_constraint("zx_uba_" + sfx,
                            {{zxv(p, u, c, t), 1.0}, {av(p, c), -1.0}}, '<',
                            0.0);
        }
  for (int p : P)
    for (int u = 0; u < V; ++u)
      for (int c : inst.customers)
        for (int t = 1; t <= T; ++t) {
          std::string sfx =
              num(p) + "_" + num(u) + "_" + num(c) + "_" + num(t);
          mo.add_constraint(
              "zy_lb_" + sfx,
              {{zyv(p, u, c, t), 1.0}, {yv(u, c, t), -1.0}, {av(p, c), -1.0}},
              '>', -1.0);
          mo.add_constraint("zy_ubx_" + sfx,
                            {{zyv(p, u, c, t), 1.0}, {yv(u, c, t), -1.0}},
                            '<', 0.0);
          mo.add_constraint("zy_uba_" + sfx,
                            {{zyv(p, u, c, t), 1.0}, {av(p, c), -1.0}}, '<',
                            0.0);
        }
  return out;
}

// ---------------------------------------------------------------------------
// Brute-force optimum for tiny instances
// ---------------------------------------------------------------------------

struct BruteForceCaps {
  int max_route_vertices = 0;  // 0: |V| + 2
  int max_customers = 4;
  int max_drones_per_truck = 2;
  int max_graph_vertices = 12;
};

namespace detail {

/// One candidate way a single group can serve some customer subset.
struct GroupPlan {
  double cost_h = kInf;
  TruckGroupRoute group;
};

/// Assigns drone slots greedily by takeoff index (classic interval
/// partitioning; matches the validator's slot-reuse rule). Returns false if
/// more than k drones would be airborne at once.
inline bool assign_slots(std::vector<Delivery>& ds, int k) {
  std::vector<int> idx(ds.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    return std::tie(ds[a].takeoff_index, ds[a].landing_index, ds[a].customer) <
           std::tie(ds[b].takeoff_index, ds[b].landing_index, ds[b].customer);
  });
  std::vector<int> last_land(static_cast<std::size_t>(std::max(k, 0)),
                             std::numeric_limits<int>::min());
  for (int i : idx) {
    int slot = -1;
    for (int s = 0; s < k; ++s)
      if (last_land[s] <= ds[i].takeoff_index) {
        slot = s;
        break;
      }
    if (slot < 0) return false;
    ds[i].drone = slot;
    last_land[slot] = ds[i].landing_index;
  }
  return true;
}

/// Enumerates every service plan of `route` over the customer list and
/// updates best[mask] (mask over customer indices) wherever it improves.
class PlanEnumerator {
 public:
  PlanEnumerator(const Instance& inst, const std::vector<int>& customers,
                 std::vector<GroupPlan>& best, int depot)
      : inst_(inst), customers_(customers), best_(best), depot_(depot) {}

  void run(const std::vector<int>& route) {
    route_ = &route;
    on_route_.assign(customers_.size(), false);
    for (std::size_t ci = 0; ci < customers_.size(); ++ci)
      on_route_[ci] = std::find(route.begin(), route.end(), customers_[ci]) !=
                      route.end();
    deliveries_.clear();
    descend(0, 0);
  }

 private:
  // Timing grows when deliveries are added, so a partial plan whose cost
  // already matches every still-reachable mask's best can be cut.
  bool prunable(int next_ci, int mask) const {
    TruckGroupRoute g;
    g.depot = depot_;
    g.truck_route = *route_;
    g.deliveries = deliveries_;
    double partial = timing(inst_, g).cost_h;
    int remaining = 0;
    for (std::size_t ci = next_ci; ci < customers_.size(); ++ci)
      remaining |= 1 << ci;
    for (int extra = remaining;; extra = (extra - 1) & remaining) {
      if (partial < best_[mask | extra].cost_h - kCostTol) return false;
      if (extra == 0) break;
    }
    return true;
  }

  void descend(std::size_t ci, int mask) {
    if (ci == customers_.size()) {
      finish(mask);
      return;
    }
    if (prunable(static_cast<int>(ci), mask)) return;
    // Option 1: leave the customer to another group.
    descend(ci + 1, mask);
    // Option 2: serve by truck pass-through.
    if (on_route_[ci]) descend(ci + 1, mask | (1 << ci));
    // Option 3: serve by a drone sortie (takeoff i, landing j).
    const std::vector<int>& route = *route_;
    int c = customers_[ci];
    for (std::size_t i = 0; i < route.size(); ++i)
      for (std::size_t j = i; j < route.size(); ++j) {
        double flight = euclid(inst_.net, route[i], c) +
                        euclid(inst_.net, c, route[j]);
        if (flight > inst_.params.drone_range_km + kDistTol) continue;
        deliveries_.push_back(
            {static_cast<int>(i), c, static_cast<int>(j), 0});
        descend(ci + 1, mask | (1 << ci));
        deliveries_.pop_back();
      }
  }

  void finish(int mask) {
    TruckGroupRoute g;
    g.depot = depot_;
    g.truck_route = *route_;
    g.deliveries = deliveries_;
    if (!assign_slots(g.deliveries, inst_.params.drones_per_truck)) return;
    g.cost_h = timing(inst_, g).cost_h;
    if (g.cost_h < best_[mask].cost_h - kCostTol) {
      best_[mask].cost_h = g.cost_h;
      best_[mask].group = g;
    }
  }

  const Instance& inst_;
  const std::vector<int>& customers_;
  std::vector<GroupPlan>& best_;
  int depot_;
  const std::vector<int>* route_ = nullptr;
  std::vector<bool> on_route_;
  std::vector<Delivery> deliveries_;
};

}  // namespace detail

/// Exhaustive optimum over truck walks of bounded length. Shares the
/// validator's timing semantics by construction. Throws when the instance
/// exceeds the caps.
inline Solution brute_force_exact(const Instance& inst,
                                  BruteForceCaps caps = {}) {
  require_valid_instance(inst);
  const int V = inst.net.size();
  const int n = static_cast<int>(inst.customers.size());
  if (V > caps.max_graph_vertices)
    throw std::invalid_argument(
        "brute_force_exact: " + std::to_string(V) + " vertices exceed cap " +
        std::to_string(caps.max_graph_vertices));
  if (n > caps.max_customers)
    throw std::invalid_argument(
        "brute_force_exact: " + std::to_string(n) + " customers exceed cap " +
        std::to_string(caps.max_customers));
  if (inst.params.drones_per_truck > caps.max_drones_per_truck)
    throw std::invalid_argument(
        "brute_force_exact: k=" + std::to_string(inst.params.drones_per_truck) +
        " exceeds cap " + std::to_string(caps.max_drones_per_truck));
  const int L = caps.max_route_vertices > 0 ? caps.max_route_vertices : V + 2;
  const double s_tr = inst.params.truck_speed_kmh;
  DistanceOracle oracle = DistanceOracle::all_pairs(inst.net);

  const int full = (1 << n) - 1;
  std::map<int, std::vector<detail::GroupPlan>> best;  // depot -> per mask
  for (int p : inst.depots) {
    // Upper bound: a truck-only tour of the complete customer set passes
    // every customer, so it witnesses every mask at once.
    double ub = 0.0;
    {
      std::vector<int> left = inst.customers;
      int cur = p;
      while (!left.empty()) {
        int bestc = -1;
        double bd = kInf;
        for (int c : left)
          if (oracle.road(cur, c) < bd - kDistTol) {
            bd = oracle.road(cur, c);
            bestc = c;
          }
        ub += oracle.road(cur, bestc) / s_tr;
        cur = bestc;
        left.erase(std::find(left.begin(), left.end(), bestc));
      }
      ub += oracle.road(cur, p) / s_tr;
    }
    std::vector<detail::GroupPlan> plans(full + 1);
    detail::PlanEnumerator plan(inst, inst.customers, plans, p);
    std::vector<int> route = {p};
    // DFS over closed walks from p with at most L vertices, pruned by the
    // truck-only upper bound (waiting for drones never shrinks a walk cost).
    auto dfs = [&](auto&& self, double drive_h) -> void {
      if (route.back() == p) plan.run(route);
      if (static_cast<int>(route.size()) >= L) return;
      int cur = route.back();
      for (const auto& [head, len] : inst.net.out_adj[cur]) {
        double nd = drive_h + len / s_tr;
        if (nd + oracle.road(head, p) / s_tr > ub + kCostTol) continue;
        route.push_back(head);
        self(self, nd);
        route.pop_back();
      }
    };
    dfs(dfs, 0.0);
    best[p] = std::move(plans);
  }

  // Combine groups: assign a disjoint customer mask to every depot.
  const int m = static_cast<int>(inst.depots.size());
  std::vector<std::vector<double>> f(m + 1,
                                     std::vector<double>(full + 1, kInf));
  std::vector<std::vector<int>> pick(m, std::vector<int>(full + 1, -1));
  f[m][0] = 0.0;
  for (int i = m - 1; i >= 0; --i) {
    const auto& plans = best[inst.depots[i]];
    for (int S = 0; S <= full; ++S) {
      for (int sub = S;; sub = (sub - 1) & S) {
        if (plans[sub].cost_h < kInf && f[i + 1][S & ~sub] < kInf) {
          double cand = plans[sub].cost_h + f[i + 1][S & ~sub];
          if (cand < f[i][S] - kCostTol) {
            f[i][S] = cand;
            pick[i][S] = sub;
          }
        }
        if (sub == 0) break;
      }
    }
  }
  if (f[0][full] >= kInf)
    throw std::runtime_error(
        "brute_force_exact: no feasible solution within the route length cap");

  Solution sol;
  int S = full;
  for (int i = 0; i < m; ++i) {
    int sub = pick[i][S];
    sol.groups.push_back(best[inst.depots[i]][sub].group);
    S &= ~sub;
  }
  sol.total_cost_h = f[0][full];
  sol.meta["method"] = "brute_force_exact";
  return sol;
}

}  // namespace mafstsp
