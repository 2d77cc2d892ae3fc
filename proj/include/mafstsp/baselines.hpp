#pragma once

/// Comparison methods: the HC-VNS hill-climbing heuristic and the
/// truck-only Set-MATSP lower bound.

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "mafstsp/partition.hpp"
#include "mafstsp/roadnet.hpp"
#include "mafstsp/settsp.hpp"
#include "mafstsp/solution.hpp"
#include "mafstsp/solutioneval.hpp"

namespace mafstsp {

// ---------------------------------------------------------------------------
// HC-VNS
// ---------------------------------------------------------------------------

enum class VnsOperator {
  modify_takeoff_landing,  ///< move a sortie's takeoff/landing vertices
  reassign_to_drone,       ///< turn a truck visit into a drone sortie
  swap_consecutive,        ///< swap two neighbouring stops in service order
};

struct VnsConfig {
  int max_iterations = 1000;      ///< sweep budget
  int no_improve_patience = 50;   ///< non-improving sweeps before giving up
  std::vector<VnsOperator> operators = {
      VnsOperator::modify_takeoff_landing, VnsOperator::reassign_to_drone,
      VnsOperator::swap_consecutive};
  std::uint64_t seed = 0;  ///< recorded in meta; the search is deterministic
};

namespace detail {

/// One service stop of a group: either the truck drives through the
/// customer, or it launches a drone at `takeoff_v` and recovers it at
/// `landing_v`.
struct VnsStop {
  int customer = -1;
  bool drone = false;
  int takeoff_v = -1;
  int landing_v = -1;
};

inline void vns_extend_route(const RoadNetwork& net, std::vector<int>& route,
                             int to) {
  if (route.back() == to) return;
  std::vector<int> path = shortest_path(net, route.back(), to);
  route.insert(route.end(), path.begin() + 1, path.end());
}

/// Materializes a stop list into a validated group route with exact timing.
inline TruckGroupRoute vns_build_group(const Instance& inst, int depot,
                                       const std::vector<VnsStop>& stops) {
  TruckGroupRoute g;
  g.depot = depot;
  g.truck_route = {depot};
  for (const VnsStop& s : stops) {
    if (!s.drone) {
      vns_extend_route(inst.net, g.truck_route, s.customer);
      continue;
    }
    vns_extend_route(inst.net, g.truck_route, s.takeoff_v);
    const int takeoff = static_cast<int>(g.truck_route.size()) - 1;
    vns_extend_route(inst.net, g.truck_route, s.landing_v);
    const int landing = static_cast<int>(g.truck_route.size()) - 1;
    g.deliveries.push_back({takeoff, s.customer, landing, 0});
  }
  vns_extend_route(inst.net, g.truck_route, depot);
  g.cost_h = timing(inst, g).cost_h;
  return g;
}

/// Takeoff/landing candidates for customer c: vertices of S_c(r) that lie on
/// the current truck route or border it in the road graph.
inline std::vector<int> vns_candidates(const Instance& inst,
                                       const std::vector<int>& route, int c) {
  std::set<int> near;
  for (int v : route) {
    near.insert(v);
    for (const auto& [w, len] : inst.net.out_adj[v]) near.insert(w);
    for (const auto& [w, len] : inst.net.in_adj[v]) near.insert(w);
  }
  std::vector<int> cands;
  for (int v : near)
    if (euclid(inst.net, v, c) <= inst.params.drone_range_km + kDistTol)
      cands.push_back(v);
  return cands;  // set iteration is already ascending
}

}  // namespace detail

/// Hill-climbing baseline: nearest-neighbour initialization, then
/// best-improvement sweeps over the union neighborhood of the three
/// operators. Every evaluated candidate is a feasible solution; costs come
/// from the exact validator timing.
inline Solution hc_vns_solve(const Instance& inst, VnsConfig cfg = {}) {
  require_valid_instance(inst);
  if (cfg.no_improve_patience < 1)
    throw std::invalid_argument("hc_vns: patience must be >= 1");
  if (cfg.max_iterations < 0)
    throw std::invalid_argument("hc_vns: max_iterations must be >= 0");
  {
    std::vector<VnsOperator> ops = cfg.operators;
    std::sort(ops.begin(), ops.end());
    if (ops != std::vector<VnsOperator>{VnsOperator::modify_takeoff_landing,
                                        VnsOperator::reassign_to_drone,
                                        VnsOperator::swap_consecutive})
      throw std::invalid_argument(
          "hc_vns: operators must be exactly the three known neighborhoods");
  }
  const double r = inst.params.drone_range_km;
  const double k = inst.params.drones_per_truck;
  DistanceOracle oracle = DistanceOracle::all_pairs(inst.net);

  // Initialization: nearest-depot assignment, greedy nearest-customer
  // truck-only order per group.
  Assignment asg = partition(inst, PartitionRule::nn, PartitionMetric::node);
  std::vector<int> depots;
  std::map<int, std::vector<detail::VnsStop>> stops;
  std::map<int, TruckGroupRoute> built;
  for (const auto& [p, customers] : asg.groups) {
    depots.push_back(p);
    std::vector<int> left = customers;
    int cur = p;
    std::vector<detail::VnsStop> ss;
    while (!left.empty()) {
      int best = -1;
      double bd = kInf;
      for (int c : left)
        if (oracle.road(cur, c) < bd - kDistTol) {
          bd = oracle.road(cur, c);
          best = c;
        }
      ss.push_back({best, false, -1, -1});
      cur = best;
      left.erase(std::find(left.begin(), left.end(), best));
    }
    stops[p] = ss;
    built[p] = detail::vns_build_group(inst, p, ss);
  }

  auto flight_ok = [&](int u, int c, int v) {
    return euclid(inst.net, u, c) + euclid(inst.net, c, v) <= r + kDistTol;
  };

  int sweeps = 0;
  int stale = 0;
  while (sweeps < cfg.max_iterations && stale < cfg.no_improve_patience) {
    ++sweeps;
    int best_depot = -1;
    std::vector<detail::VnsStop> best_stops;
    TruckGroupRoute best_group;
    double best_delta = -kCostTol;  // accept strict improvements only

    auto consider = [&](int p, const std::vector<detail::VnsStop>& cand) {
      TruckGroupRoute g = detail::vns_build_group(inst, p, cand);
      const double delta = g.cost_h - built[p].cost_h;
      if (delta < best_delta) {
        best_delta = delta;
        best_depot = p;
        best_stops = cand;
        best_group = g;
      }
    };

    for (int p : depots) {
      const std::vector<detail::VnsStop>& cur = stops[p];
      for (VnsOperator op : cfg.operators) {
        switch (op) {
          case VnsOperator::modify_takeoff_landing:
            for (std::size_t i = 0; i < cur.size(); ++i) {
              if (!cur[i].drone) continue;
              const auto cands = detail::vns_candidates(
                  inst, built[p].truck_route, cur[i].customer);
              for (int u : cands)
                for (int v : cands) {
                  if (u == cur[i].takeoff_v && v == cur[i].landing_v) continue;
                  if (!flight_ok(u, cur[i].customer, v)) continue;
                  std::vector<detail::VnsStop> cand = cur;
                  cand[i].takeoff_v = u;
                  cand[i].landing_v = v;
                  consider(p, cand);
                }
            }
            break;
          case VnsOperator::reassign_to_drone:
            if (k < 1) break;
            for (std::size_t i = 0; i < cur.size(); ++i) {
              if (cur[i].drone) continue;
              const auto cands = detail::vns_candidates(
                  inst, built[p].truck_route, cur[i].customer);
              for (int u : cands)
                for (int v : cands) {
                  if (!flight_ok(u, cur[i].customer, v)) continue;
                  std::vector<detail::VnsStop> cand = cur;
                  cand[i] = {cur[i].customer, true, u, v};
                  consider(p, cand);
                }
            }
            break;
          case VnsOperator::swap_consecutive:
            for (std::size_t i = 0; i + 1 < cur.size(); ++i) {
              std::vector<detail::VnsStop> cand = cur;
              std::swap(cand[i], cand[i + 1]);
              consider(p, cand);
            }
            break;
        }
      }
    }

    if (best_depot >= 0) {
      stops[best_depot] = best_stops;
      built[best_depot] = best_group;
      stale = 0;
    } else {
      // Deterministic sweeps repeat verbatim, so one non-improving sweep
      // already exhausts the patience budget.
      stale = cfg.no_improve_patience;
    }
  }

  Solution sol;
  sol.total_cost_h = 0.0;
  for (int p : depots) {
    sol.groups.push_back(built[p]);
    sol.total_cost_h += built[p].cost_h;
  }
  sol.meta = {{"method", "hc_vns"},
              {"sweeps", sweeps},
              {"seed", cfg.seed}};
  return sol;
}

// ---------------------------------------------------------------------------
// Set-MATSP lower bound
// ---------------------------------------------------------------------------

enum class BoundMode { exact_small, relaxed };

namespace detail {

/// Truck-only edge costs for the relaxation: serving a set means merely
/// reaching one of its vertices, so only same-vertex service pairs are
/// admitted and all drone terms vanish.
struct TruckOnlyCosts {
  const DistanceOracle* oracle = nullptr;
  double s_tr = 1.0;
  double travel(int u, int v) const { return oracle->road(u, v) / s_tr; }
  double intra(int, int u, int v) const { return u == v ? 0.0 : kInf; }
};

}  // namespace detail

/// Lower bound on the optimal total cost.
///
/// exact_small: optimal truck-only Set-MATSP over the sets S_c(r/2) —
/// exact assignment search (subset DP over customer masks) with each group
/// cost solved by the Set-TSP exact DP under truck-only costs. Requires
/// n <= 10 and m <= 3.
///
/// relaxed: every solution's group serving customer c must reach S_c(r/2),
/// so  max_c min_p (cheapest p -> S_c(r/2) -> p road round trip) / s_tr
/// bounds the total from below at any instance size.
inline double lower_bound(const Instance& inst,
                          BoundMode mode = BoundMode::relaxed) {
  require_valid_instance(inst);
  const double theta = inst.params.drone_range_km / 2.0;
  const double s_tr = inst.params.truck_speed_kmh;
  const int n = static_cast<int>(inst.customers.size());
  const int m = static_cast<int>(inst.depots.size());

  if (mode == BoundMode::relaxed) {
    std::vector<std::vector<int>> members_of;
    std::vector<int> sources = inst.depots;
    for (int c : inst.customers) {
      members_of.push_back(neighbor_set(inst.net, c, theta).members);
      sources.insert(sources.end(), members_of.back().begin(),
                     members_of.back().end());
    }
    std::sort(sources.begin(), sources.end());
    sources.erase(std::unique(sources.begin(), sources.end()), sources.end());
    DistanceOracle oracle(inst.net, sources);
    double best_over_customers = 0.0;
    for (std::size_t ci = 0; ci < inst.customers.size(); ++ci) {
      const std::vector<int>& members = members_of[ci];
      double cheapest = kInf;
      for (int p : inst.depots)
        for (int v : members)
          cheapest =
              std::min(cheapest, (oracle.road(p, v) + oracle.road(v, p)) / s_tr);
      best_over_customers = std::max(best_over_customers, cheapest);
    }
    return best_over_customers;
  }

  if (n > 10 || m > 3)
    throw std::invalid_argument(
        "lower_bound: exact_small needs n <= 10 and m <= 3 (got n=" +
        std::to_string(n) + ", m=" + std::to_string(m) +
        "); use the relaxed mode");

  // Shared oracle across all masks: register every vertex any subsystem uses.
  SetSystem everything = build_set_system(inst, inst.depots.front(),
                                          inst.customers, theta,
                                          SetSystemMode::full);
  std::vector<int> sources = everything.all_vertices();
  sources.insert(sources.end(), inst.depots.begin(), inst.depots.end());
  std::sort(sources.begin(), sources.end());
  sources.erase(std::unique(sources.begin(), sources.end()), sources.end());
  DistanceOracle oracle(inst.net, sources);
  detail::TruckOnlyCosts costs{&oracle, s_tr};

  const int full = (1 << n) - 1;
  std::vector<std::vector<double>> group_cost(
      m, std::vector<double>(full + 1, 0.0));
  for (int pi = 0; pi < m; ++pi)
    for (int mask = 1; mask <= full; ++mask) {
      std::vector<int> customers;
      for (int ci = 0; ci < n; ++ci)
        if (mask & (1 << ci)) customers.push_back(inst.customers[ci]);
      SetSystem sys = build_set_system(inst, inst.depots[pi], customers, theta,
                                       SetSystemMode::full);
      group_cost[pi][mask] = detail::set_tsp_exact_dp(sys, costs).cost_h;
    }

  std::vector<std::vector<double>> f(m + 1,
                                     std::vector<double>(full + 1, kInf));
  f[m][0] = 0.0;
  for (int i = m - 1; i >= 0; --i)
    for (int S = 0; S <= full; ++S)
      for (int sub = S;; sub = (sub - 1) & S) {
        if (f[i + 1][S & ~sub] < kInf)
          f[i][S] = std::min(f[i][S], group_cost[i][sub] + f[i + 1][S & ~sub]);
        if (sub == 0) break;
      }
  return f[0][full];
}

}  // namespace mafstsp
