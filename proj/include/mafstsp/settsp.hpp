#pragma once

/// Phase 2: order the customer neighbor sets of one truck group.
///
/// Each customer c contributes a set S_c(theta) (theta = range/2 by
/// default); a tour enters each set at a service vertex u, serves c per the
/// edge-cost rule below, exits at v, and drives to the next set. Backends:
/// exact Held-Karp DP over sets, a single-commodity-flow MILP for external
/// solvers, and a greedy insertion + local search fallback.

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "mafstsp/milp.hpp"
#include "mafstsp/roadnet.hpp"

namespace mafstsp {

enum class SetSystemMode { full, no_overlap, boundary_only, both };

inline std::string to_string(SetSystemMode m) {
  switch (m) {
    case SetSystemMode::full: return "full";
    case SetSystemMode::no_overlap: return "no_overlap";
    case SetSystemMode::boundary_only: return "boundary_only";
    case SetSystemMode::both: return "both";
  }
  return "?";
}

inline SetSystemMode set_system_mode_from(const std::string& s) {
  if (s == "full") return SetSystemMode::full;
  if (s == "no_overlap") return SetSystemMode::no_overlap;
  if (s == "boundary_only") return SetSystemMode::boundary_only;
  if (s == "both") return SetSystemMode::both;
  throw std::invalid_argument("unknown set system mode: " + s);
}

/// Neighbor sets of one group after the selected acceleration strategy.
/// `members[i]` lists the service candidates of customers[i], ascending.
struct SetSystem {
  int depot = -1;
  double theta_km = 0.0;
  SetSystemMode mode = SetSystemMode::full;
  std::vector<int> customers;
  std::vector<std::vector<int>> members;

  int set_index(int customer) const {
    auto it = std::find(customers.begin(), customers.end(), customer);
    if (it == customers.end())
      throw std::logic_error("SetSystem: customer " + std::to_string(customer) +
                             " is not in this group");
    return static_cast<int>(it - customers.begin());
  }

  /// Every vertex usable as a service or transfer point, plus depot and
  /// customer vertices (needed as road sources for truck detours).
  std::vector<int> all_vertices() const {
    std::vector<int> all{depot};
    all.insert(all.end(), customers.begin(), customers.end());
    for (const auto& m : members) all.insert(all.end(), m.begin(), m.end());
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    return all;
  }
};

/// Builds the set system for one group. Overlap removal assigns each shared
/// vertex to its nearest customer (straight-line distance, ties to the lower
/// customer id); the depot vertex always stays exclusive to the depot.
/// Boundary reduction keeps only boundary vertices of the (possibly already
/// deduplicated) sets; a set whose boundary would be empty keeps {c}.
inline SetSystem build_set_system(const Instance& inst, int depot,
                                  std::vector<int> customers, double theta,
                                  SetSystemMode mode) {
  SetSystem sys;
  sys.depot = depot;
  sys.theta_km = theta;
  sys.mode = mode;
  std::sort(customers.begin(), customers.end());
  sys.customers = customers;
  for (int c : customers)
    sys.members.push_back(neighbor_set(inst.net, c, theta).members);

  const bool dedup =
      mode == SetSystemMode::no_overlap || mode == SetSystemMode::both;
  const bool boundary =
      mode == SetSystemMode::boundary_only || mode == SetSystemMode::both;

  if (dedup) {
    // Ownership: vertex -> nearest customer among the sets containing it.
    std::map<int, int> owner;
    for (std::size_t i = 0; i < sys.customers.size(); ++i)
      for (int v : sys.members[i]) {
        auto it = owner.find(v);
        if (it == owner.end()) {
          owner[v] = sys.customers[i];
          continue;
        }
        const double cur = euclid(inst.net, v, it->second);
        const double alt = euclid(inst.net, v, sys.customers[i]);
        if (alt < cur - kDistTol ||
            (std::abs(alt - cur) <= kDistTol && sys.customers[i] < it->second))
          it->second = sys.customers[i];
      }
    for (std::size_t i = 0; i < sys.customers.size(); ++i) {
      std::vector<int> kept;
      for (int v : sys.members[i])
        if (v != depot && owner[v] == sys.customers[i]) kept.push_back(v);
      if (kept.empty()) kept.push_back(sys.customers[i]);
      sys.members[i] = kept;
    }
  }
  if (boundary) {
    for (std::size_t i = 0; i < sys.customers.size(); ++i) {
      std::vector<int> kept =
          boundary_of(inst.net, sys.customers[i], theta, sys.members[i]);
      if (kept.empty()) kept.push_back(sys.customers[i]);
      sys.members[i] = kept;
    }
  }
  return sys;
}

inline DistanceOracle make_set_tsp_oracle(const Instance& inst,
                                          const SetSystem& sys) {
  return DistanceOracle(inst.net, sys.all_vertices());
}

// ---------------------------------------------------------------------------
// Edge costs
// ---------------------------------------------------------------------------

/// Tour edge costs in hours. Within a set the customer is served on the way
/// (drone sortie if in range, otherwise the truck detours through the
/// customer); between sets the truck just drives.
struct SetTspCosts {
  const Instance* inst = nullptr;
  const DistanceOracle* oracle = nullptr;

  double s_tr() const { return inst->params.truck_speed_kmh; }
  double s_dr() const { return inst->params.drone_speed_kmh; }

  /// Same-set leg u -> (serve c) -> v:
  /// min of the drone option max{(d(u,c)+d(c,v))/s_dr, d_tr(u,v)/s_tr} and
  /// the truck detour (d_tr(u,c)+d_tr(c,v))/s_tr. The drone option only
  /// applies within range (always true for theta <= range/2).
  double intra(int c, int u, int v) const {
    const double flight = euclid(inst->net, u, c) + euclid(inst->net, c, v);
    const double truck_detour =
        (oracle->road(u, c) + oracle->road(c, v)) / s_tr();
    if (flight > inst->params.drone_range_km + kDistTol) return truck_detour;
    const double drone =
        std::max(flight / s_dr(), oracle->road(u, v) / s_tr());
    return std::min(drone, truck_detour);
  }

  /// Between-sets truck leg.
  double travel(int u, int v) const { return oracle->road(u, v) / s_tr(); }
};

/// Cost of a tour edge u -> v given the system: when both endpoints share a
/// set, the cheapest way to serve that set's customer in between; otherwise
/// a plain truck leg.
template <class Costs>
inline double edge_cost(const SetSystem& sys, const Costs& costs, int u,
                        int v) {
  double best = kInf;
  for (std::size_t i = 0; i < sys.customers.size(); ++i) {
    const auto& m = sys.members[i];
    if (std::binary_search(m.begin(), m.end(), u) &&
        std::binary_search(m.begin(), m.end(), v))
      best = std::min(best, costs.intra(sys.customers[i], u, v));
  }
  return best < kInf ? best : costs.travel(u, v);
}

// ---------------------------------------------------------------------------
// Tours
// ---------------------------------------------------------------------------

/// Set-TSP tour: service order of the customers and the (enter, exit)
/// vertex pair used inside each set.
struct SetTour {
  int depot = -1;
  std::vector<int> order;
  std::vector<std::pair<int, int>> service;
  double cost_h = 0.0;
  std::string backend;
};

inline std::vector<int> extract_visit_order(const SetTour& tour) {
  return tour.order;
}

/// Recomputes a tour's cost from its order and service pairs.
template <class Costs>
inline double tour_cost(const SetSystem& sys, const Costs& costs,
                        const SetTour& tour) {
  double total = 0.0;
  int at = sys.depot;
  for (std::size_t i = 0; i < tour.order.size(); ++i) {
    const auto [u, v] = tour.service[i];
    total += costs.travel(at, u) + costs.intra(tour.order[i], u, v);
    at = v;
  }
  return total + costs.travel(at, sys.depot);
}

// ---------------------------------------------------------------------------
// Exact DP backend (Held-Karp over sets)
// ---------------------------------------------------------------------------

struct SetTspConfig {
  enum class Backend { auto_select, exact_dp, external_milp, greedy_ls };
  Backend backend = Backend::auto_select;
  std::string solver_cmd;  ///< external solver; empty = not configured
  double budget_s = 0.0;   ///< subprocess budget, <= 0: unlimited
  int exact_customer_cap = 14;
  int exact_set_vertex_cap = 32;
};

namespace detail {

template <class Costs>
inline SetTour set_tsp_exact_dp(const SetSystem& sys, const Costs& costs) {
  SetTour tour;
  tour.depot = sys.depot;
  tour.backend = "exact_dp";
  const int n = static_cast<int>(sys.customers.size());
  if (n == 0) return tour;

  // Flat state indexing: offset[i] + vi addresses (set i, exit vertex vi).
  std::vector<int> offset(n + 1, 0);
  for (int i = 0; i < n; ++i)
    offset[i + 1] = offset[i] + static_cast<int>(sys.members[i].size());
  const int total = offset[n];

  const double inf = kInf;
  std::vector<std::vector<double>> dp(
      1 << n, std::vector<double>(total, inf));
  // parent: previous flat state (-1 for first set), chosen entry vertex.
  std::vector<std::vector<std::pair<int, int>>> parent(
      1 << n, std::vector<std::pair<int, int>>(total, {-1, -1}));

  for (int i = 0; i < n; ++i)
    for (std::size_t vi = 0; vi < sys.members[i].size(); ++vi) {
      double best = inf;
      int best_u = -1;
      for (int u : sys.members[i]) {
        const double c = costs.travel(sys.depot, u) +
                         costs.intra(sys.customers[i], u, sys.members[i][vi]);
        if (c < best) {
          best = c;
          best_u = u;
        }
      }
      dp[1 << i][offset[i] + vi] = best;
      parent[1 << i][offset[i] + vi] = {-1, best_u};
    }

  for (int mask = 1; mask < (1 << n); ++mask) {
    for (int i = 0; i < n; ++i) {
      if (!(mask & (1 << i))) continue;
      for (std::size_t vi = 0; vi < sys.members[i].size(); ++vi) {
        const double base = dp[mask][offset[i] + vi];
        if (base == inf) continue;
        const int exit_v = sys.members[i][vi];
        for (int j = 0; j < n; ++j) {
          if (mask & (1 << j)) continue;
          const int nmask = mask | (1 << j);
          for (std::size_t vj = 0; vj < sys.members[j].size(); ++vj) {
            double best = dp[nmask][offset[j] + vj];
            int best_u = -1;
            for (int u : sys.members[j]) {
              const double c =
                  base + costs.travel(exit_v, u) +
                  costs.intra(sys.customers[j], u, sys.members[j][vj]);
              if (c < best) {
                best = c;
                best_u = u;
              }
            }
            if (best_u >= 0) {
              dp[nmask][offset[j] + vj] = best;
              parent[nmask][offset[j] + vj] = {offset[i] + (int)vi, best_u};
            }
          }
        }
      }
    }
  }

  const int full = (1 << n) - 1;
  double best = inf;
  int best_state = -1;
  for (int i = 0; i < n; ++i)
    for (std::size_t vi = 0; vi < sys.members[i].size(); ++vi) {
      const double c = dp[full][offset[i] + vi] +
                       costs.travel(sys.members[i][vi], sys.depot);
      if (c < best) {
        best = c;
        best_state = offset[i] + static_cast<int>(vi);
      }
    }
  if (best_state < 0)
    throw std::logic_error("set_tsp_exact_dp: no feasible tour");

  // Backtrack.
  std::vector<std::pair<int, std::pair<int, int>>> rev;  // set, (enter, exit)
  int mask = full;
  int state = best_state;
  while (state >= 0) {
    int i = 0;
    while (offset[i + 1] <= state) ++i;
    const int exit_v = sys.members[i][state - offset[i]];
    const auto [prev_state, enter_u] = parent[mask][state];
    rev.push_back({i, {enter_u, exit_v}});
    mask &= ~(1 << i);
    state = prev_state;
  }
  for (auto it = rev.rbegin(); it != rev.rend(); ++it) {
    tour.order.push_back(sys.customers[it->first]);
    tour.service.push_back(it->second);
  }
  tour.cost_h = best;
  return tour;
}

/// Optimal service pairs for a fixed set order (layered shortest path).
template <class Costs>
inline SetTour best_tour_for_order(const SetSystem& sys, const Costs& costs,
                                   const std::vector<int>& order) {
  SetTour tour;
  tour.depot = sys.depot;
  tour.order = order;
  const int n = static_cast<int>(order.size());
  if (n == 0) return tour;
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = sys.set_index(order[i]);

  std::vector<std::vector<double>> cost(n);
  std::vector<std::vector<std::pair<int, int>>> parent(n);  // prev exit, entry
  for (int i = 0; i < n; ++i) {
    const auto& mem = sys.members[idx[i]];
    cost[i].assign(mem.size(), kInf);
    parent[i].assign(mem.size(), {-1, -1});
    for (std::size_t vi = 0; vi < mem.size(); ++vi)
      for (int u : mem) {
        if (i == 0) {
          const double c = costs.travel(sys.depot, u) +
                           costs.intra(order[0], u, mem[vi]);
          if (c < cost[0][vi]) {
            cost[0][vi] = c;
            parent[0][vi] = {-1, u};
          }
        } else {
          const auto& pmem = sys.members[idx[i - 1]];
          for (std::size_t w = 0; w < pmem.size(); ++w) {
            const double c = cost[i - 1][w] + costs.travel(pmem[w], u) +
                             costs.intra(order[i], u, mem[vi]);
            if (c < cost[i][vi]) {
              cost[i][vi] = c;
              parent[i][vi] = {static_cast<int>(w), u};
            }
          }
        }
      }
  }
  double best = kInf;
  int best_vi = -1;
  const auto& last = sys.members[idx[n - 1]];
  for (std::size_t vi = 0; vi < last.size(); ++vi) {
    const double c = cost[n - 1][vi] + costs.travel(last[vi], sys.depot);
    if (c < best) {
      best = c;
      best_vi = static_cast<int>(vi);
    }
  }
  tour.cost_h = best;
  tour.service.assign(n, {-1, -1});
  int vi = best_vi;
  for (int i = n - 1; i >= 0; --i) {
    const auto [pw, u] = parent[i][vi];
    tour.service[i] = {u, sys.members[idx[i]][vi]};
    vi = pw;
  }
  return tour;
}

template <class Costs>
inline SetTour set_tsp_greedy_ls(const SetSystem& sys, const Costs& costs) {
  const int n = static_cast<int>(sys.customers.size());
  std::vector<int> order;
  // Cheapest insertion, exact evaluation of each candidate order.
  std::vector<int> remaining = sys.customers;
  while (!remaining.empty()) {
    double best = kInf;
    std::vector<int> best_order;
    int best_c = -1;
    for (int c : remaining)
      for (std::size_t pos = 0; pos <= order.size(); ++pos) {
        std::vector<int> cand = order;
        cand.insert(cand.begin() + pos, c);
        const double cost = best_tour_for_order(sys, costs, cand).cost_h;
        if (cost < best) {
          best = cost;
          best_order = cand;
          best_c = c;
        }
      }
    order = best_order;
    remaining.erase(std::find(remaining.begin(), remaining.end(), best_c));
  }

  // 2-opt on the set order; service pairs re-optimized per candidate.
  SetTour tour = best_tour_for_order(sys, costs, order);
  bool improved = n >= 2;
  while (improved) {
    improved = false;
    SetTour best = tour;
    for (int i = 0; i < n - 1; ++i)
      for (int j = i + 1; j < n; ++j) {
        std::vector<int> cand = tour.order;
        std::reverse(cand.begin() + i, cand.begin() + j + 1);
        SetTour t = best_tour_for_order(sys, costs, cand);
        if (t.cost_h < best.cost_h - kDistTol) best = t;
      }
    if (best.cost_h < tour.cost_h - kDistTol) {
      tour = best;
      improved = true;
    }
  }
  tour.backend = "greedy_ls";
  return tour;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// MILP backend
// ---------------------------------------------------------------------------

/// Single-commodity-flow Set-TSP model. Meta nodes are the depot plus the
/// group's customers; arcs carry |C| units of flow out of the depot, each
/// customer consumes one, which forbids subtours. Service placement inside
/// a set is chosen by gamma (intra-set pair), truck transfers between
/// consecutive sets by delta.
inline MilpModel build_set_tsp_milp(const SetSystem& sys,
                                    const SetTspCosts& costs) {
  MilpModel m;
  m.name = "set_tsp depot " + std::to_string(sys.depot);
  const int n = static_cast<int>(sys.customers.size());
  // Meta node 0 is the depot; the depot "set" is the depot vertex alone.
  std::vector<int> node(n + 1);
  node[0] = sys.depot;
  for (int i = 0; i < n; ++i) node[i + 1] = sys.customers[i];
  std::vector<std::vector<int>> mem(n + 1);
  mem[0] = {sys.depot};
  for (int i = 0; i < n; ++i) mem[i + 1] = sys.members[i];

  auto bname = [&](int i, int j) {
    return "b_" + std::to_string(node[i]) + "_" + std::to_string(node[j]);
  };
  auto yname = [&](int i, int j) {
    return "y_" + std::to_string(node[i]) + "_" + std::to_string(node[j]);
  };
  auto gname = [&](int i, int u, int v) {
    return "g_" + std::to_string(node[i]) + "_" + std::to_string(u) + "_" +
           std::to_string(v);
  };
  auto dname = [&](int i, int u, int j, int v) {
    return "d_" + std::to_string(node[i]) + "_" + std::to_string(u) + "_" +
           std::to_string(node[j]) + "_" + std::to_string(v);
  };

  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) m.add_var(bname(i, j), 0, 1, true);
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) m.add_var(yname(i, j), 0, n, false);
  for (int i = 1; i <= n; ++i)
    for (int u : mem[i])
      for (int v : mem[i])
        m.add_var(gname(i, u, v), 0, 1, true,
                  costs.intra(node[i], u, v));
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) {
      if (i == j) continue;
      for (int u : mem[i])
        for (int v : mem[j])
          m.add_var(dname(i, u, j, v), 0, 1, true, costs.travel(u, v));
    }

  using T = MilpModel::Term;
  // Self-loops are forbidden.
  for (int i = 0; i <= n; ++i) {
    m.add_constraint("noself_b_" + std::to_string(node[i]),
                     {{m.var(bname(i, i)), 1.0}}, '=', 0.0);
    m.add_constraint("noself_y_" + std::to_string(node[i]),
                     {{m.var(yname(i, i)), 1.0}}, '=', 0.0);
  }
  // Degree one in and out of every meta node.
  for (int i = 0; i <= n; ++i) {
    std::vector<T> out, in;
    for (int j = 0; j <= n; ++j) {
      out.push_back({m.var(bname(i, j)), 1.0});
      in.push_back({m.var(bname(j, i)), 1.0});
    }
    m.add_constraint("deg_out_" + std::to_string(node[i]), out, '=', 1.0);
    m.add_constraint("deg_in_" + std::to_string(node[i]), in, '=', 1.0);
  }
  // Flow capacity, source, sink, conservation.
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j)
      m.add_constraint(
          "cap_" + std::to_string(node[i]) + "_" + std::to_string(node[j]),
          {{m.var(yname(i, j)), 1.0}, {m.var(bname(i, j)), -double(n)}}, '<',
          0.0);
  {
    std::vector<T> src;
    for (int j = 0; j <= n; ++j) src.push_back({m.var(yname(0, j)), 1.0});
    m.add_constraint("flow_source", src, '=', double(n));
    std::vector<T> sink;
    for (int j = 0; j <= n; ++j) sink.push_back({m.var(yname(j, 0)), 1.0});
    m.add_constraint("flow_sink", sink, '=', 0.0);
  }
  for (int i = 1; i <= n; ++i) {
    std::vector<T> bal;
    for (int j = 0; j <= n; ++j) {
      bal.push_back({m.var(yname(j, i)), 1.0});
      bal.push_back({m.var(yname(i, j)), -1.0});
    }
    m.add_constraint("flow_bal_" + std::to_string(node[i]), bal, '=', 1.0);
  }
  // Exactly one service pair per customer set.
  for (int i = 1; i <= n; ++i) {
    std::vector<T> visit;
    for (int u : mem[i])
      for (int v : mem[i]) visit.push_back({m.var(gname(i, u, v)), 1.0});
    m.add_constraint("visit_" + std::to_string(node[i]), visit, '=', 1.0);
  }
  // Truck transfers follow the set-level arcs.
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) {
      if (i == j) continue;
      std::vector<T> align;
      for (int u : mem[i])
        for (int v : mem[j]) align.push_back({m.var(dname(i, u, j, v)), 1.0});
      align.push_back({m.var(bname(i, j)), -1.0});
      m.add_constraint(
          "align_" + std::to_string(node[i]) + "_" + std::to_string(node[j]),
          align, '=', 0.0);
    }
  // Service exit feeds the outgoing transfer; service entry consumes the
  // incoming one. The depot's virtual service pair is the constant (p, p).
  for (int i = 0; i <= n; ++i)
    for (int v : mem[i]) {
      std::vector<T> in_terms, out_terms;
      if (i > 0) {
        for (int u : mem[i]) {
          in_terms.push_back({m.var(gname(i, u, v)), 1.0});
          out_terms.push_back({m.var(gname(i, v, u)), 1.0});
        }
      }
      double rhs = (i == 0) ? 1.0 : 0.0;
      std::vector<T> leave = in_terms;
      for (int j = 0; j <= n; ++j) {
        if (j == i) continue;
        for (int w : mem[j]) leave.push_back({m.var(dname(i, v, j, w)), -1.0});
      }
      m.add_constraint(
          "sync_out_" + std::to_string(node[i]) + "_" + std::to_string(v),
          leave, '=', -rhs);
      std::vector<T> arrive = out_terms;
      for (int j = 0; j <= n; ++j) {
        if (j == i) continue;
        for (int w : mem[j]) arrive.push_back({m.var(dname(j, w, i, v)), -1.0});
      }
      m.add_constraint(
          "sync_in_" + std::to_string(node[i]) + "_" + std::to_string(v),
          arrive, '=', -rhs);
    }
  return m;
}

/// Rebuilds a tour from an external solver's variable assignment.
/// Assignments that do not describe a single depot-anchored cycle with one
/// service pair per set raise BackendError.
inline SetTour tour_from_milp_solution(
    const SetSystem& sys, const SetTspCosts& costs,
    const std::map<std::string, double>& values) {
  const int n = static_cast<int>(sys.customers.size());
  std::vector<int> node(n + 1);
  node[0] = sys.depot;
  for (int i = 0; i < n; ++i) node[i + 1] = sys.customers[i];

  auto value = [&](const std::string& name) {
    auto it = values.find(name);
    return it == values.end() ? 0.0 : it->second;
  };

  std::vector<int> succ(n + 1, -1);
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) {
      const std::string name =
          "b_" + std::to_string(node[i]) + "_" + std::to_string(node[j]);
      if (value(name) > 0.5) {
        if (succ[i] != -1)
          throw BackendError("invalid solver output: two arcs leave set " +
                             std::to_string(node[i]));
        succ[i] = j;
      }
    }
  SetTour tour;
  tour.depot = sys.depot;
  tour.backend = "external_milp";
  int at = 0;
  for (int step = 0; step < n; ++step) {
    at = succ[at];
    if (at <= 0)
      throw BackendError(
          "invalid solver output: set arcs do not form a depot tour");
    tour.order.push_back(node[at]);
  }
  if (succ[at] != 0)
    throw BackendError("invalid solver output: tour does not return to depot");
  std::vector<int> covered = tour.order;
  std::sort(covered.begin(), covered.end());
  if (covered != sys.customers)
    throw BackendError(
        "invalid solver output: tour does not visit every set exactly once");

  for (int c : tour.order) {
    const int i = sys.set_index(c);
    std::pair<int, int> pick{-1, -1};
    for (int u : sys.members[i])
      for (int v : sys.members[i]) {
        const std::string name = "g_" + std::to_string(c) + "_" +
                                 std::to_string(u) + "_" + std::to_string(v);
        if (value(name) > 0.5) {
          if (pick.first != -1)
            throw BackendError(
                "invalid solver output: two service pairs for customer " +
                std::to_string(c));
          pick = {u, v};
        }
      }
    if (pick.first == -1)
      throw BackendError("invalid solver output: no service pair for customer " +
                         std::to_string(c));
    tour.service.push_back(pick);
  }
  tour.cost_h = tour_cost(sys, costs, tour);
  return tour;
}

// ---------------------------------------------------------------------------
// Backend dispatch
// ---------------------------------------------------------------------------

inline bool within_exact_caps(const SetSystem& sys, const SetTspConfig& cfg) {
  if (static_cast<int>(sys.customers.size()) > cfg.exact_customer_cap)
    return false;
  for (const auto& mem : sys.members)
    if (static_cast<int>(mem.size()) > cfg.exact_set_vertex_cap) return false;
  return true;
}

inline SetTour solve_set_tsp(const SetSystem& sys, const SetTspCosts& costs,
                             const SetTspConfig& cfg = {},
                             const std::string& workdir = "/tmp") {
  using B = SetTspConfig::Backend;
  B backend = cfg.backend;
  if (backend == B::auto_select) {
    if (within_exact_caps(sys, cfg))
      backend = B::exact_dp;
    else if (!cfg.solver_cmd.empty())
      backend = B::external_milp;
    else
      backend = B::greedy_ls;
  }
  switch (backend) {
    case B::exact_dp:
      if (!within_exact_caps(sys, cfg))
        throw std::invalid_argument(
            "set_tsp exact_dp: instance exceeds caps (customers <= " +
            std::to_string(cfg.exact_customer_cap) + ", set vertices <= " +
            std::to_string(cfg.exact_set_vertex_cap) + ")");
      return detail::set_tsp_exact_dp(sys, costs);
    case B::external_milp: {
      if (cfg.solver_cmd.empty())
        throw BackendError("external_milp backend requested but no solver "
                           "command configured");
      MilpModel model = build_set_tsp_milp(sys, costs);
      auto values =
          run_external_solver(cfg.solver_cmd, model, workdir, cfg.budget_s);
      return tour_from_milp_solution(sys, costs, values);
    }
    case B::greedy_ls:
      return detail::set_tsp_greedy_ls(sys, costs);
    default:
      throw std::logic_error("solve_set_tsp: unresolved backend");
  }
}

// ---------------------------------------------------------------------------
// SetTour JSON
// ---------------------------------------------------------------------------

inline nlohmann::json set_tour_to_json(const SetTour& t) {
  nlohmann::json j;
  j["depot"] = t.depot;
  j["order"] = t.order;
  j["service"] = nlohmann::json::array();
  for (auto [u, v] : t.service)
    j["service"].push_back({{"enter", u}, {"exit", v}});
  j["cost_h"] = t.cost_h;
  j["backend"] = t.backend;
  return j;
}

inline SetTour set_tour_from_json(const nlohmann::json& j) {
  SetTour t;
  try {
    t.depot = j.at("depot").get<int>();
    t.order = j.at("order").get<std::vector<int>>();
    for (const auto& sj : j.at("service"))
      t.service.push_back(
          {sj.at("enter").get<int>(), sj.at("exit").get<int>()});
    t.cost_h = j.at("cost_h").get<double>();
    t.backend = j.value("backend", "");
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("set tour JSON malformed: ") +
                             e.what());
  }
  return t;
}

}  // namespace mafstsp
