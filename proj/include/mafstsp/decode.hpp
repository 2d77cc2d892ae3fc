#pragma once

/// Phase 3: turn a per-group customer visit order into a concrete truck
/// route with drone sorties.
///
/// Dynamic program over (number of customers served, truck vertex).
/// Customers are consumed in the given order either by a standalone truck
/// detour or by a batch of up to k sorties dispatched together: all batch
/// drones take off at the same vertex, the truck then drives through the
/// landing vertices in customer order collecting them, waiting wherever a
/// drone is late. The first sortie of a batch may degrade to a truck detour
/// when its flight would exceed the range. TIME(u, v; a, t) is the batch
/// makespan from dispatch at u to collection of the t-th drone at v;
/// VALUE(s, v) the earliest time the first s customers are served with the
/// truck ready at v.
///
/// One batch per stop: a batch whose sorties all land at the dispatch
/// vertex leaves the truck at the same route index, and a second batch
/// dispatched there could not be told apart from one oversized batch in the
/// (takeoff, customer, landing) encoding. The DP therefore carries a flag
/// "this stop already dispatched a batch" and launches batches only from
/// unflagged states; the truck has to move (or detour to a customer) before
/// dispatching again.

#include <algorithm>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "mafstsp/roadnet.hpp"
#include "mafstsp/solution.hpp"

namespace mafstsp {

namespace detail {

/// Truck vertex domain per stage s: the depot, the landing sets of the
/// stage's own customer and of the next two. The extra sets keep every
/// useful dispatch vertex reachable: a batch launched after stage s serves
/// O^{s+1} first (dispatch within its set, or a truck detour immediately
/// followed by a sortie to O^{s+2}).
struct DecodeDomains {
  std::vector<std::vector<int>> sets;  // landing set of order[i], ascending
  std::vector<std::vector<int>> dom;   // dom[s], s = 0..n, ascending

  DecodeDomains(const Instance& inst, int depot,
                const std::vector<int>& order) {
    const double r = inst.params.drone_range_km;
    const int n = static_cast<int>(order.size());
    sets.reserve(n);
    for (int c : order) sets.push_back(neighbor_set(inst.net, c, r).members);
    dom.resize(n + 1);
    for (int s = 0; s <= n; ++s) {
      std::vector<int>& d = dom[s];
      d.push_back(depot);
      if (s == 0) {
        for (const auto& m : sets) d.insert(d.end(), m.begin(), m.end());
      } else {
        for (int i = s - 1; i <= s + 1 && i < n; ++i)
          d.insert(d.end(), sets[i].begin(), sets[i].end());
      }
      std::sort(d.begin(), d.end());
      d.erase(std::unique(d.begin(), d.end()), d.end());
    }
  }

  std::size_t index_in(int s, int v) const {
    const auto it = std::lower_bound(dom[s].begin(), dom[s].end(), v);
    if (it == dom[s].end() || *it != v)
      throw std::logic_error("decode: vertex " + std::to_string(v) +
                             " missing from stage domain");
    return static_cast<std::size_t>(it - dom[s].begin());
  }
};

}  // namespace detail

/// Decodes a visit order into a priced group route. The oracle must cover
/// the depot, the customers and all their range-r landing sets as sources
/// (make_decode_oracle below builds exactly that).
inline TruckGroupRoute decode(const Instance& inst,
                              const DistanceOracle& oracle, int depot,
                              const std::vector<int>& order) {
  const double s_tr = inst.params.truck_speed_kmh;
  const double s_dr = inst.params.drone_speed_kmh;
  const double r = inst.params.drone_range_km;
  const int k = inst.params.drones_per_truck;
  const int n = static_cast<int>(order.size());

  TruckGroupRoute out;
  out.depot = depot;
  if (n == 0) {
    out.truck_route = {depot};
    out.cost_h = 0.0;
    return out;
  }

  detail::DecodeDomains dd(inst, depot, order);
  const auto& sets = dd.sets;
  const auto& dom = dd.dom;

  auto drive = [&](int u, int v) { return oracle.road(u, v) / s_tr; };
  auto fly = [&](int u, int c, int v) {
    return euclid(inst.net, u, c) + euclid(inst.net, c, v);
  };

  // State (s, v, parked): parked set when the segment that produced the
  // state was a batch that never moved the truck (every landing at the
  // dispatch vertex), or a zero-length truck detour that kept the flag.
  struct Choice {
    enum Kind { none, truck, batch } kind = none;
    int a = -1;          // first customer stage of the segment (1-based)
    int u = -1;          // vertex the segment starts from
    int w = -1;          // final landing vertex (batch only)
    int prev_parked = 0; // flag of the predecessor state (truck only)
  };
  std::vector<std::vector<double>> value(n + 1);
  std::vector<std::vector<Choice>> choice(n + 1);
  for (int s = 0; s <= n; ++s) {
    value[s].assign(dom[s].size() * 2, kInf);
    choice[s].resize(dom[s].size() * 2);
  }
  for (std::size_t vi = 0; vi < dom[0].size(); ++vi)
    value[0][vi * 2] = drive(depot, dom[0][vi]);

  // TIME(u, ·; a, j) for the batch launched at u after stage a-1, together
  // with the argmin chain and a "never moved" flag per entry.
  auto batch_time = [&](int u, int a, int jmax,
                        std::vector<std::vector<double>>& times,
                        std::vector<std::vector<int>>& args,
                        std::vector<std::vector<char>>& still) {
    times.clear();
    args.clear();
    still.clear();
    std::vector<double> prev;
    std::vector<char> prev_still;
    for (int j = 1; j <= jmax; ++j) {
      const int ci = a - 1 + j - 1;  // 0-based customer index
      const int c = order[ci];
      const auto& land = sets[ci];
      std::vector<double> cur(land.size(), kInf);
      std::vector<int> curarg(land.size(), -1);
      std::vector<char> curstill(land.size(), 0);
      for (std::size_t wi = 0; wi < land.size(); ++wi) {
        const int v = land[wi];
        const double flight = fly(u, c, v);
        const bool in_range = flight <= r + kDistTol;
        if (j == 1) {
          cur[wi] = in_range ? std::max(flight / s_dr, drive(u, v))
                             : drive(u, c) + drive(c, v);
          curstill[wi] = in_range && v == u;
        } else {
          if (!in_range) continue;
          double truck = kInf;
          int best = -1;
          const auto& from = sets[ci - 1];
          for (std::size_t pi = 0; pi < from.size(); ++pi) {
            if (prev[pi] == kInf) continue;
            const double t = prev[pi] + drive(from[pi], v);
            if (t < truck) {
              truck = t;
              best = static_cast<int>(pi);
            }
          }
          if (truck == kInf) continue;
          cur[wi] = std::max(truck, flight / s_dr);
          curarg[wi] = best;
          curstill[wi] = v == u && prev_still[best];
        }
      }
      times.push_back(cur);
      args.push_back(curarg);
      still.push_back(curstill);
      prev = cur;
      prev_still = curstill;
    }
  };

  for (int s = 0; s < n; ++s) {
    // Batch contributions from stage s forward (never from parked states).
    for (std::size_t ui = 0; ui < dom[s].size(); ++ui) {
      const double base = value[s][ui * 2];
      if (base == kInf) continue;
      const int u = dom[s][ui];
      const int jmax = std::min(k, n - s);
      if (jmax < 1) continue;
      std::vector<std::vector<double>> times;
      std::vector<std::vector<int>> args;
      std::vector<std::vector<char>> still;
      batch_time(u, s + 1, jmax, times, args, still);
      for (int j = 1; j <= jmax; ++j) {
        const int target = s + j;
        const auto& land = sets[target - 1];
        const auto& cur = times[j - 1];
        for (std::size_t vi = 0; vi < dom[target].size(); ++vi) {
          const int v = dom[target][vi];
          double best = kInf;
          int bestw = -1;
          for (std::size_t wi = 0; wi < land.size(); ++wi) {
            if (cur[wi] == kInf) continue;
            const double t = base + cur[wi] + drive(land[wi], v);
            if (t < best) {
              best = t;
              bestw = static_cast<int>(wi);
            }
          }
          if (bestw < 0) continue;
          const int parked = (v == u && still[j - 1][bestw]) ? 1 : 0;
          if (best < value[target][vi * 2 + parked]) {
            value[target][vi * 2 + parked] = best;
            choice[target][vi * 2 + parked] = {Choice::batch, s + 1, u,
                                               land[bestw], 0};
          }
        }
      }
    }
    // Standalone truck detour for customer s+1. Leaving the stop clears the
    // parked flag; a zero-length detour (customer == parked vertex) keeps it.
    const int c = order[s];
    double best_all = kInf, best_keep = kInf;
    int all_u = -1, all_parked = 0, keep_u = -1, keep_parked = 0;
    for (std::size_t ui = 0; ui < dom[s].size(); ++ui)
      for (int parked = 0; parked < 2; ++parked) {
        const double base = value[s][ui * 2 + parked];
        if (base == kInf) continue;
        const int u = dom[s][ui];
        const double t = base + drive(u, c);
        if (t < best_all) {
          best_all = t;
          all_u = u;
          all_parked = parked;
        }
        if (!(parked == 1 && u == c) && t < best_keep) {
          best_keep = t;
          keep_u = u;
          keep_parked = parked;
        }
      }
    for (std::size_t vi = 0; vi < dom[s + 1].size(); ++vi) {
      const int v = dom[s + 1][vi];
      if (v == c) {
        if (best_keep < value[s + 1][vi * 2]) {
          value[s + 1][vi * 2] = best_keep;
          choice[s + 1][vi * 2] = {Choice::truck, s + 1, keep_u, -1,
                                   keep_parked};
        }
        const std::size_t ci = dd.index_in(s, c);
        const double stay = value[s][ci * 2 + 1];
        if (stay < value[s + 1][vi * 2 + 1]) {
          value[s + 1][vi * 2 + 1] = stay;
          choice[s + 1][vi * 2 + 1] = {Choice::truck, s + 1, c, -1, 1};
        }
      } else {
        const double t = best_all + drive(c, v);
        if (t < value[s + 1][vi * 2]) {
          value[s + 1][vi * 2] = t;
          choice[s + 1][vi * 2] = {Choice::truck, s + 1, all_u, -1,
                                   all_parked};
        }
      }
    }
  }

  const std::size_t pidx = dd.index_in(n, depot);
  const int fin_parked =
      value[n][pidx * 2] <= value[n][pidx * 2 + 1] ? 0 : 1;
  const double total = value[n][pidx * 2 + fin_parked];
  if (total == kInf)
    throw std::logic_error("decode: no feasible schedule for depot " +
                           std::to_string(depot));

  // ---- Reconstruction ----------------------------------------------------
  struct Segment {
    Choice::Kind kind;
    int a, s;  // serves customers a..s (1-based stages)
    int u, v;  // truck vertex before/after
    int w;     // final landing vertex (batch)
  };
  std::vector<Segment> segs;
  {
    int s = n;
    int v = depot;
    int parked = fin_parked;
    while (s > 0) {
      const Choice& ch = choice[s][dd.index_in(s, v) * 2 + parked];
      if (ch.kind == Choice::none)
        throw std::logic_error("decode: broken backtrack chain");
      segs.push_back({ch.kind, ch.a, s, ch.u, v, ch.w});
      s = ch.a - 1;
      v = ch.u;
      parked = ch.kind == Choice::batch ? 0 : ch.prev_parked;
    }
    std::reverse(segs.begin(), segs.end());
  }

  std::vector<int>& route = out.truck_route;
  route.push_back(depot);
  auto extend_to = [&](int target) {
    if (route.back() == target) return;
    const std::vector<int> path =
        shortest_path(inst.net, route.back(), target);
    route.insert(route.end(), path.begin() + 1, path.end());
  };

  extend_to(segs.front().u);
  for (const Segment& seg : segs) {
    if (seg.kind == Choice::truck) {
      extend_to(order[seg.s - 1]);
      extend_to(seg.v);
      continue;
    }
    const int t = seg.s - seg.a + 1;
    // Recover the landing chain by replaying the batch argmins.
    std::vector<std::vector<double>> times;
    std::vector<std::vector<int>> args;
    std::vector<std::vector<char>> still;
    batch_time(seg.u, seg.a, t, times, args, still);
    std::vector<int> landings(t);
    {
      const auto& last = sets[seg.s - 1];
      int wi = static_cast<int>(
          std::lower_bound(last.begin(), last.end(), seg.w) - last.begin());
      for (int j = t; j >= 1; --j) {
        landings[j - 1] = sets[seg.a - 1 + j - 1][wi];
        if (j > 1) wi = args[j - 1][wi];
      }
    }
    const int takeoff_index = static_cast<int>(route.size()) - 1;
    int slot = 0;
    for (int j = 1; j <= t; ++j) {
      const int c = order[seg.a - 1 + j - 1];
      const int w = landings[j - 1];
      if (j == 1 && fly(seg.u, c, w) > r + kDistTol) {
        // Range fallback: the truck serves the first customer in person on
        // its way to the first landing vertex.
        extend_to(c);
        extend_to(w);
        continue;
      }
      extend_to(w);
      out.deliveries.push_back(
          {takeoff_index, c, static_cast<int>(route.size()) - 1, slot++});
    }
    extend_to(seg.v);
  }
  extend_to(depot);
  out.cost_h = total;
  return out;
}

/// Distance oracle covering everything decode() queries for one group.
inline DistanceOracle make_decode_oracle(const Instance& inst, int depot,
                                         const std::vector<int>& order) {
  std::vector<int> sources{depot};
  for (int c : order) {
    sources.push_back(c);
    const auto mem =
        neighbor_set(inst.net, c, inst.params.drone_range_km).members;
    sources.insert(sources.end(), mem.begin(), mem.end());
  }
  std::sort(sources.begin(), sources.end());
  sources.erase(std::unique(sources.begin(), sources.end()), sources.end());
  return DistanceOracle(inst.net, sources);
}

inline TruckGroupRoute decode(const Instance& inst, int depot,
                              const std::vector<int>& order) {
  const DistanceOracle oracle = make_decode_oracle(inst, depot, order);
  return decode(inst, oracle, depot, order);
}

/// Decodes every group of an assignment-with-orders and sums the costs.
inline Solution decode_all(const Instance& inst,
                           const std::map<int, std::vector<int>>& orders) {
  Solution sol;
  for (const auto& [depot, order] : orders) {
    sol.groups.push_back(decode(inst, depot, order));
    sol.total_cost_h += sol.groups.back().cost_h;
  }
  return sol;
}

}  // namespace mafstsp
