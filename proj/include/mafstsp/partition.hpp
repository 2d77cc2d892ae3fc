#pragma once

/// Phase 1: partition customers into truck groups, one group per depot.
/// Two assignment rules (nearest-neighbor, MST split) over two metrics
/// (plain road distance between nodes, or the set-to-set distance that
/// accounts for drone handoffs at neighbor-set members).

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "mafstsp/roadnet.hpp"

namespace mafstsp {

enum class PartitionMetric { node, set };
enum class PartitionRule { nn, mst };

inline std::string partition_method_name(PartitionRule rule,
                                         PartitionMetric metric) {
  return std::string(rule == PartitionRule::nn ? "nn" : "mst") + "_" +
         (metric == PartitionMetric::node ? "node" : "set");
}

/// Set distance between two terminals (customers or depots): the cheapest
/// drone-out / truck-between / drone-in relay through their neighbor sets,
///   min over v in S_c(theta), v' in S_c'(theta) of
///     (d(c,v)/s_dr + d_tr(v,v')/s_tr + d(v',c')/s_dr) * s_tr,
/// expressed in km-equivalents at truck speed. Depot sets are the depot
/// vertex alone. The oracle must cover every member of S_c(theta) as source.
inline double set_distance(const Instance& inst, const DistanceOracle& oracle,
                           int c, int c2, double theta, bool c_is_depot,
                           bool c2_is_depot) {
  const double s_tr = inst.params.truck_speed_kmh;
  const double s_dr = inst.params.drone_speed_kmh;
  const std::vector<int> from =
      c_is_depot ? std::vector<int>{c} : neighbor_set(inst.net, c, theta).members;
  const std::vector<int> to = c2_is_depot
                                  ? std::vector<int>{c2}
                                  : neighbor_set(inst.net, c2, theta).members;
  double best = kInf;
  for (int v : from)
    for (int v2 : to) {
      const double t = euclid(inst.net, c, v) / s_dr +
                       oracle.road(v, v2) / s_tr +
                       euclid(inst.net, v2, c2) / s_dr;
      best = std::min(best, t * s_tr);
    }
  return best;
}

/// Complete weighted meta graph over depots and customers. Weights are
/// directional (directed roads); MST symmetrizes them on use.
struct MetaGraph {
  std::vector<int> depots;
  std::vector<int> customers;
  std::vector<int> nodes;  ///< depots then customers
  PartitionMetric metric = PartitionMetric::node;
  double theta_km = 0.0;
  /// weight[i][j]: cost from nodes[i] to nodes[j], km-equivalents.
  std::vector<std::vector<double>> weight;

  int index_of(int vertex) const {
    auto it = std::find(nodes.begin(), nodes.end(), vertex);
    if (it == nodes.end())
      throw std::logic_error("MetaGraph: vertex " + std::to_string(vertex) +
                             " is not a terminal");
    return static_cast<int>(it - nodes.begin());
  }

  double sym(int i, int j) const {
    return std::min(weight[i][j], weight[j][i]);
  }
};

inline MetaGraph build_meta_graph(const Instance& inst,
                                  PartitionMetric metric, double theta) {
  MetaGraph mg;
  mg.depots = inst.depots;
  mg.customers = inst.customers;
  mg.metric = metric;
  mg.theta_km = theta;
  mg.nodes = inst.depots;
  mg.nodes.insert(mg.nodes.end(), inst.customers.begin(),
                  inst.customers.end());

  // Sources: every set member of every terminal (plus the terminals).
  std::vector<int> sources = mg.nodes;
  if (metric == PartitionMetric::set)
    for (int c : inst.customers)
      for (int v : neighbor_set(inst.net, c, theta).members)
        sources.push_back(v);
  DistanceOracle oracle(inst.net, sources);

  const int n = static_cast<int>(mg.nodes.size());
  const int m = static_cast<int>(inst.depots.size());
  mg.weight.assign(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      if (metric == PartitionMetric::node)
        mg.weight[i][j] = oracle.road(mg.nodes[i], mg.nodes[j]);
      else
        mg.weight[i][j] = set_distance(inst, oracle, mg.nodes[i], mg.nodes[j],
                                       theta, i < m, j < m);
    }
  return mg;
}

/// Customer-to-depot assignment, serializable. Groups are keyed by depot id
/// and list customers in ascending order.
struct Assignment {
  std::string method;
  double theta_km = 0.0;
  std::map<int, std::vector<int>> groups;
};

/// Nearest terminal rule: each customer joins the depot with the smallest
/// one-way weight w(p, c); ties go to the lowest depot id. `round_trip`
/// scores w(p,c) + w(c,p) instead.
inline Assignment partition_nn(const Instance& inst, const MetaGraph& mg,
                               bool round_trip = false) {
  Assignment a;
  a.method = partition_method_name(PartitionRule::nn, mg.metric);
  a.theta_km = mg.theta_km;
  for (int p : inst.depots) a.groups[p] = {};
  const int m = static_cast<int>(inst.depots.size());
  for (std::size_t ci = 0; ci < inst.customers.size(); ++ci) {
    const int cj = m + static_cast<int>(ci);
    int best_depot = -1;
    double best_w = kInf;
    for (int pi = 0; pi < m; ++pi) {
      double w = mg.weight[pi][cj];
      if (round_trip) w += mg.weight[cj][pi];
      if (w < best_w - kDistTol ||
          (std::abs(w - best_w) <= kDistTol &&
           mg.nodes[pi] < best_depot)) {
        best_w = w;
        best_depot = mg.nodes[pi];
      }
    }
    a.groups[best_depot].push_back(inst.customers[ci]);
  }
  for (auto& [p, cs] : a.groups) std::sort(cs.begin(), cs.end());
  return a;
}

/// MST split rule: build the minimum spanning tree over all terminals with
/// symmetrized weights, then repeatedly delete the heaviest edge that lies
/// on a tree path between two depots, until every component holds exactly
/// one depot. Edge ties break on (weight, smaller endpoint, larger endpoint).
inline Assignment partition_mst(const Instance& inst, const MetaGraph& mg) {
  Assignment a;
  a.method = partition_method_name(PartitionRule::mst, mg.metric);
  a.theta_km = mg.theta_km;
  const int n = static_cast<int>(mg.nodes.size());
  const int m = static_cast<int>(inst.depots.size());

  struct Edge {
    double w;
    int a, b;  // node indexes with nodes[a] < nodes[b]
  };
  std::vector<Edge> all;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      int lo = i, hi = j;
      if (mg.nodes[lo] > mg.nodes[hi]) std::swap(lo, hi);
      all.push_back({mg.sym(i, j), lo, hi});
    }
  std::sort(all.begin(), all.end(), [&](const Edge& x, const Edge& y) {
    if (x.w != y.w) return x.w < y.w;
    if (mg.nodes[x.a] != mg.nodes[y.a]) return mg.nodes[x.a] < mg.nodes[y.a];
    return mg.nodes[x.b] < mg.nodes[y.b];
  });

  // Kruskal.
  std::vector<int> parent(n);
  for (int i = 0; i < n; ++i) parent[i] = i;
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::vector<Edge> tree;
  for (const Edge& e : all) {
    if (find(e.a) == find(e.b)) continue;
    parent[find(e.a)] = find(e.b);
    tree.push_back(e);
    if (static_cast<int>(tree.size()) == n - 1) break;
  }

  // Delete depot-separating edges, heaviest first.
  auto component_of = [&](const std::vector<Edge>& edges) {
    std::vector<int> comp(n, -1);
    std::vector<std::vector<int>> adj(n);
    for (const Edge& e : edges) {
      adj[e.a].push_back(e.b);
      adj[e.b].push_back(e.a);
    }
    int nc = 0;
    for (int s = 0; s < n; ++s) {
      if (comp[s] >= 0) continue;
      std::vector<int> stack{s};
      comp[s] = nc;
      while (!stack.empty()) {
        int x = stack.back();
        stack.pop_back();
        for (int y : adj[x])
          if (comp[y] < 0) {
            comp[y] = nc;
            stack.push_back(y);
          }
      }
      ++nc;
    }
    return comp;
  };

  while (true) {
    std::vector<int> comp = component_of(tree);
    // Depots per component.
    std::map<int, int> depot_count;
    for (int i = 0; i < m; ++i) depot_count[comp[i]] += 1;
    bool split_needed = false;
    for (auto [c, cnt] : depot_count)
      if (cnt >= 2) split_needed = true;
    if (!split_needed) break;

    // Candidate edges: removing them leaves a depot on each side.
    int pick = -1;
    for (std::size_t ei = 0; ei < tree.size(); ++ei) {
      std::vector<Edge> rest = tree;
      rest.erase(rest.begin() + ei);
      std::vector<int> comp2 = component_of(rest);
      const int ca = comp2[tree[ei].a];
      const int cb = comp2[tree[ei].b];
      int da = 0, db = 0;
      for (int i = 0; i < m; ++i) {
        if (comp2[i] == ca) ++da;
        if (comp2[i] == cb) ++db;
      }
      if (da >= 1 && db >= 1) {
        if (pick < 0) {
          pick = static_cast<int>(ei);
          continue;
        }
        const Edge& e = tree[ei];
        const Edge& b = tree[pick];
        const bool heavier =
            e.w > b.w + kDistTol ||
            (std::abs(e.w - b.w) <= kDistTol &&
             (mg.nodes[e.a] < mg.nodes[b.a] ||
              (mg.nodes[e.a] == mg.nodes[b.a] && mg.nodes[e.b] < mg.nodes[b.b])));
        if (heavier) pick = static_cast<int>(ei);
      }
    }
    if (pick < 0)
      throw std::logic_error("partition_mst: no depot-separating edge found");
    tree.erase(tree.begin() + pick);
  }

  std::vector<int> comp = component_of(tree);
  std::vector<int> comp_depot(n, -1);
  for (int i = 0; i < m; ++i) comp_depot[comp[i]] = mg.nodes[i];
  for (int p : inst.depots) a.groups[p] = {};
  for (int j = m; j < n; ++j) {
    const int depot = comp_depot[comp[j]];
    if (depot < 0)
      throw std::logic_error("partition_mst: component without depot");
    a.groups[depot].push_back(mg.nodes[j]);
  }
  for (auto& [p, cs] : a.groups) std::sort(cs.begin(), cs.end());
  return a;
}

inline Assignment partition(const Instance& inst, PartitionRule rule,
                            PartitionMetric metric) {
  const double theta = inst.params.theta();
  MetaGraph mg = build_meta_graph(inst, metric, theta);
  return rule == PartitionRule::nn ? partition_nn(inst, mg)
                                   : partition_mst(inst, mg);
}

inline nlohmann::json assignment_to_json(const Assignment& a) {
  nlohmann::json j;
  j["method"] = a.method;
  j["theta_km"] = a.theta_km;
  j["groups"] = nlohmann::json::object();
  for (const auto& [p, cs] : a.groups) j["groups"][std::to_string(p)] = cs;
  return j;
}

inline Assignment assignment_from_json(const nlohmann::json& j) {
  Assignment a;
  try {
    a.method = j.at("method").get<std::string>();
    a.theta_km = j.at("theta_km").get<double>();
    for (const auto& [key, val] : j.at("groups").items())
      a.groups[std::stoi(key)] = val.get<std::vector<int>>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("assignment JSON malformed: ") +
                             e.what());
  }
  return a;
}

inline void save_assignment(const Assignment& a, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write assignment file: " + path);
  out << assignment_to_json(a).dump(2) << "\n";
}

inline Assignment load_assignment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open assignment file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("cannot parse " + path + ": " + e.what());
  }
  return assignment_from_json(j);
}

}  // namespace mafstsp
