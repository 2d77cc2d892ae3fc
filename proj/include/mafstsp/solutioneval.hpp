#pragma once

/// Solution evaluator: exact timing reconstruction, feasibility validation
/// and cost comparison.
///
/// Timing model. The truck traverses its route arc by arc at truck speed.
/// A drone dispatched at route index x flies straight to its customer and
/// then to route index y; whoever arrives at index y first waits for the
/// other. Dispatches at index x happen once the truck has arrived there and
/// has collected every inbound drone landing at x (one dispatched at an
/// earlier index). Sorties that take off together at x do not delay each
/// other, even if some of them also land at x.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "mafstsp/roadnet.hpp"
#include "mafstsp/solution.hpp"

namespace mafstsp {

struct TimingTrace {
  /// Truck ready time per route index: arrival plus any waiting for drones
  /// landing there. The group cost is the last entry.
  std::vector<double> ready_h;
  std::vector<double> dispatch_h;   ///< per delivery, list order
  std::vector<double> touchdown_h;  ///< per delivery, list order
  double cost_h = 0.0;
};

namespace detail {

/// Length of the cheapest arc u->v, or +inf when absent.
inline double arc_length(const RoadNetwork& net, int u, int v) {
  double best = kInf;
  for (auto [w, len] : net.out_adj[u])
    if (w == v) best = std::min(best, len);
  return best;
}

}  // namespace detail

/// Recomputes the exact schedule of one group. Requires a structurally
/// valid route (validate_solution reports violations instead of throwing).
inline TimingTrace timing(const Instance& inst, const TruckGroupRoute& g) {
  const double s_tr = inst.params.truck_speed_kmh;
  const double s_dr = inst.params.drone_speed_kmh;
  const int len = static_cast<int>(g.truck_route.size());
  TimingTrace trace;
  trace.ready_h.assign(len, 0.0);
  trace.dispatch_h.assign(g.deliveries.size(), 0.0);
  trace.touchdown_h.assign(g.deliveries.size(), 0.0);

  for (int t = 0; t < len; ++t) {
    double base = 0.0;
    if (t > 0) {
      const double arc =
          detail::arc_length(inst.net, g.truck_route[t - 1], g.truck_route[t]);
      base = trace.ready_h[t - 1] + arc / s_tr;
    }
    double ready = base;
    // Inbound drones landing here block new dispatches; their touchdowns
    // are known because their takeoff index is smaller than t.
    double launch = base;
    for (std::size_t i = 0; i < g.deliveries.size(); ++i)
      if (g.deliveries[i].landing_index == t &&
          g.deliveries[i].takeoff_index < t)
        launch = std::max(launch, trace.touchdown_h[i]);
    for (std::size_t i = 0; i < g.deliveries.size(); ++i) {
      const Delivery& d = g.deliveries[i];
      if (d.takeoff_index != t) continue;
      const double flight =
          euclid(inst.net, g.truck_route[d.takeoff_index], d.customer) +
          euclid(inst.net, d.customer, g.truck_route[d.landing_index]);
      trace.dispatch_h[i] = launch;
      trace.touchdown_h[i] = launch + flight / s_dr;
    }
    for (std::size_t i = 0; i < g.deliveries.size(); ++i)
      if (g.deliveries[i].landing_index == t)
        ready = std::max(ready, trace.touchdown_h[i]);
    trace.ready_h[t] = ready;
  }
  trace.cost_h = len > 0 ? trace.ready_h.back() : 0.0;
  return trace;
}

/// Full feasibility audit of a solution against its instance. Returns one
/// finding per violation; an empty list means the solution is feasible and
/// its declared costs match the recomputed schedule.
inline std::vector<std::string> validate_solution(const Instance& inst,
                                                  const Solution& sol) {
  std::vector<std::string> findings;
  const int n = inst.net.size();
  const int k = inst.params.drones_per_truck;
  const double r = inst.params.drone_range_km;
  std::set<int> depot_set(inst.depots.begin(), inst.depots.end());
  std::set<int> customer_set(inst.customers.begin(), inst.customers.end());

  std::map<int, int> delivery_count;      // customer -> sorties across groups
  std::set<int> truck_visited;            // customers on some truck route
  std::set<int> depots_seen;
  double recomputed_total = 0.0;

  for (std::size_t gi = 0; gi < sol.groups.size(); ++gi) {
    const TruckGroupRoute& g = sol.groups[gi];
    const std::string tag = "group " + std::to_string(gi);

    if (!depot_set.count(g.depot))
      findings.push_back(tag + ": vertex " + std::to_string(g.depot) +
                         " is not a depot");
    if (depots_seen.count(g.depot))
      findings.push_back(tag + ": duplicate group for depot " +
                         std::to_string(g.depot));
    depots_seen.insert(g.depot);

    if (g.truck_route.empty()) {
      findings.push_back(tag + ": empty truck route");
      continue;
    }
    bool structural_ok = true;
    for (int v : g.truck_route)
      if (v < 0 || v >= n) {
        findings.push_back(tag + ": route vertex " + std::to_string(v) +
                           " out of range");
        structural_ok = false;
      }
    if (!structural_ok) continue;

    if (g.truck_route.front() != g.depot || g.truck_route.back() != g.depot)
      findings.push_back(tag + ": truck route must start and end at depot " +
                         std::to_string(g.depot));
    const int len = static_cast<int>(g.truck_route.size());
    for (int t = 1; t < len; ++t) {
      if (detail::arc_length(inst.net, g.truck_route[t - 1],
                             g.truck_route[t]) == kInf) {
        findings.push_back(tag + ": no arc " +
                           std::to_string(g.truck_route[t - 1]) + "->" +
                           std::to_string(g.truck_route[t]) +
                           " at route index " + std::to_string(t));
        structural_ok = false;
      }
    }
    for (int v : g.truck_route)
      if (customer_set.count(v)) truck_visited.insert(v);

    bool indices_ok = true;
    for (const Delivery& d : g.deliveries) {
      if (d.takeoff_index < 0 || d.takeoff_index >= len ||
          d.landing_index < 0 || d.landing_index >= len ||
          d.takeoff_index > d.landing_index) {
        findings.push_back(tag + ": delivery for customer " +
                           std::to_string(d.customer) +
                           " has invalid route indices " +
                           std::to_string(d.takeoff_index) + ".." +
                           std::to_string(d.landing_index));
        indices_ok = false;
        continue;
      }
      if (!customer_set.count(d.customer)) {
        findings.push_back(tag + ": delivery target " +
                           std::to_string(d.customer) + " is not a customer");
        continue;
      }
      delivery_count[d.customer] += 1;
      const double flight =
          euclid(inst.net, g.truck_route[d.takeoff_index], d.customer) +
          euclid(inst.net, d.customer, g.truck_route[d.landing_index]);
      if (flight > r + kDistTol)
        findings.push_back(tag + ": delivery for customer " +
                           std::to_string(d.customer) +
                           " exceeds drone range: flight " +
                           std::to_string(flight) + " km > " +
                           std::to_string(r) + " km");
      if (k == 0)
        findings.push_back(tag + ": delivery for customer " +
                           std::to_string(d.customer) +
                           " but the truck carries no drones");
      else if (d.drone < 0 || d.drone >= k)
        findings.push_back(tag + ": delivery for customer " +
                           std::to_string(d.customer) + " uses drone slot " +
                           std::to_string(d.drone) + " but slots are 0.." +
                           std::to_string(k - 1));
    }

    if (indices_ok) {
      // Airborne count between consecutive route indices.
      for (int t = 0; t + 1 < len; ++t) {
        int airborne = 0;
        for (const Delivery& d : g.deliveries)
          if (d.takeoff_index <= t && t < d.landing_index) ++airborne;
        if (airborne > k)
          findings.push_back(tag + ": " + std::to_string(airborne) +
                             " drones airborne after route index " +
                             std::to_string(t) + " exceeds capacity " +
                             std::to_string(k));
      }
      // A slot must be back on the truck before it is dispatched again.
      for (std::size_t i = 0; i < g.deliveries.size(); ++i)
        for (std::size_t e = 0; e < i; ++e) {
          const Delivery& a = g.deliveries[e];
          const Delivery& b = g.deliveries[i];
          if (a.drone != b.drone) continue;
          const bool disjoint = a.landing_index <= b.takeoff_index ||
                                b.landing_index <= a.takeoff_index;
          if (!disjoint)
            findings.push_back(tag + ": drone slot " + std::to_string(a.drone) +
                               " redispatched while airborne");
        }
    }

    if (structural_ok && indices_ok) {
      const TimingTrace trace = timing(inst, g);
      recomputed_total += trace.cost_h;
      if (std::abs(trace.cost_h - g.cost_h) > kCostTol)
        findings.push_back(tag + ": cost mismatch: declared " +
                           std::to_string(g.cost_h) + " h, recomputed " +
                           std::to_string(trace.cost_h) + " h");
    }
  }

  // Exactly-once coverage. Drone sorties count individually; a customer with
  // no sortie counts as served once when some truck route passes through it
  // (trucks of other groups may legitimately drive past a customer vertex).
  for (int c : inst.customers) {
    int visits = 0;
    if (auto it = delivery_count.find(c); it != delivery_count.end())
      visits = it->second;
    else if (truck_visited.count(c))
      visits = 1;
    if (visits != 1)
      findings.push_back("customer " + std::to_string(c) + " visited " +
                         std::to_string(visits) + " times");
  }
  double declared_sum = 0.0;
  for (const TruckGroupRoute& g : sol.groups) declared_sum += g.cost_h;
  if (std::abs(sol.total_cost_h - declared_sum) > kCostTol)
    findings.push_back("total cost mismatch: declared " +
                       std::to_string(sol.total_cost_h) +
                       " h, groups sum to " + std::to_string(declared_sum) +
                       " h");
  return findings;
}

/// Relative improvement of b over a, in percent of a:
/// (cost_a - cost_b) / cost_a * 100.
inline double improvement_pct(double cost_a, double cost_b) {
  return (cost_a - cost_b) / cost_a * 100.0;
}

}  // namespace mafstsp
