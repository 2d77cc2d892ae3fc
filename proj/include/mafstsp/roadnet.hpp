#pragma once

/// Road-network instance model: directed graph with planar coordinates,
/// shortest-path distances, neighbor sets, JSON I/O and instance generators.
///
/// Units are fixed across the library: coordinates and lengths in km,
/// speeds in km/h, times in hours.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <queue>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace mafstsp {

/// Distance comparison tolerance (km, and hours for time comparisons).
inline constexpr double kDistTol = 1e-9;
/// Tolerance for comparing route costs against DP/MILP objectives (hours).
inline constexpr double kCostTol = 1e-6;
/// Value used for unreachable / infeasible entries.
inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Vertex {
  int id = -1;
  double x = 0.0;  ///< km
  double y = 0.0;  ///< km
};

struct Arc {
  int u = -1;
  int v = -1;
  double length_km = 0.0;  ///< > 0; defaults to euclid(u,v) when absent in input
};

/// Strongly connected directed road graph with planar vertex coordinates.
struct RoadNetwork {
  std::vector<Vertex> vertices;
  std::vector<Arc> arcs;

  // Adjacency indexes, rebuilt whenever vertices/arcs change.
  std::vector<std::vector<std::pair<int, double>>> out_adj;
  std::vector<std::vector<std::pair<int, double>>> in_adj;

  int size() const { return static_cast<int>(vertices.size()); }

  void rebuild_index() {
    out_adj.assign(vertices.size(), {});
    in_adj.assign(vertices.size(), {});
    for (const Arc& a : arcs) {
      out_adj[a.u].push_back({a.v, a.length_km});
      in_adj[a.v].push_back({a.u, a.length_km});
    }
    for (auto& row : out_adj) std::sort(row.begin(), row.end());
    for (auto& row : in_adj) std::sort(row.begin(), row.end());
  }
};

/// Straight-line distance between two vertices (drone metric), km.
inline double euclid(const RoadNetwork& net, int u, int v) {
  const double dx = net.vertices[u].x - net.vertices[v].x;
  const double dy = net.vertices[u].y - net.vertices[v].y;
  return std::sqrt(dx * dx + dy * dy);
}

/// Problem parameters shared by every solver stage.
struct Params {
  double truck_speed_kmh = 30.0;
  double drone_speed_kmh = 48.0;
  double drone_range_km = 1.5;
  int drones_per_truck = 3;
  /// Neighbor-set radius used by the partition phase; defaults to range/2.
  std::optional<double> theta_partition_km;
  std::optional<std::uint64_t> seed;

  double theta() const {
    return theta_partition_km ? *theta_partition_km : drone_range_km / 2.0;
  }
};

struct Instance {
  RoadNetwork net;
  std::vector<int> depots;
  std::vector<int> customers;
  Params params;
};

// ---------------------------------------------------------------------------
// Shortest paths
// ---------------------------------------------------------------------------

/// Single-source Dijkstra over the directed arc set. When `reversed` is set
/// the arcs are traversed backwards, yielding distances *to* the source.
inline std::vector<double> dijkstra(const RoadNetwork& net, int source,
                                    bool reversed = false) {
  std::vector<double> dist(net.vertices.size(), kInf);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
  dist[source] = 0.0;
  pq.push({0.0, source});
  const auto& adj = reversed ? net.in_adj : net.out_adj;
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[u]) continue;
    for (auto [v, len] : adj[u]) {
      if (d + len < dist[v]) {
        dist[v] = d + len;
        pq.push({dist[v], v});
      }
    }
  }
  return dist;
}

/// Precomputed road distances from a fixed set of source vertices to all
/// vertices. Lookups require the source to be registered.
class DistanceOracle {
 public:
  DistanceOracle() = default;

  DistanceOracle(const RoadNetwork& net, std::vector<int> sources)
      : net_(&net) {
    std::sort(sources.begin(), sources.end());
    sources.erase(std::unique(sources.begin(), sources.end()), sources.end());
    for (int s : sources) {
      row_of_[s] = static_cast<int>(rows_.size());
      rows_.push_back(dijkstra(net, s));
    }
  }

  /// All-pairs convenience constructor (every vertex is a source).
  static DistanceOracle all_pairs(const RoadNetwork& net) {
    std::vector<int> all(net.vertices.size());
    for (int i = 0; i < net.size(); ++i) all[i] = i;
    return DistanceOracle(net, all);
  }

  bool has_source(int u) const { return row_of_.count(u) > 0; }

  /// Road (shortest-path) distance u -> v in km. `u` must be a source.
  double road(int u, int v) const {
    auto it = row_of_.find(u);
    if (it == row_of_.end())
      throw std::logic_error("DistanceOracle: vertex " + std::to_string(u) +
                             " is not a registered source");
    return rows_[it->second][v];
  }

  double euclid(int u, int v) const { return mafstsp::euclid(*net_, u, v); }

  const RoadNetwork& net() const { return *net_; }

 private:
  const RoadNetwork* net_ = nullptr;
  std::unordered_map<int, int> row_of_;
  std::vector<std::vector<double>> rows_;
};

/// Explicit shortest path from `src` to `dst` as a vertex sequence
/// (inclusive of both endpoints). Among equal-length paths, returns the
/// lexicographically smallest vertex sequence: the walk greedily picks the
/// smallest-id successor that stays on a shortest path.
inline std::vector<int> shortest_path(const RoadNetwork& net, int src,
                                      int dst) {
  if (src == dst) return {src};
  std::vector<double> to_dst = dijkstra(net, dst, /*reversed=*/true);
  if (to_dst[src] == kInf)
    throw std::runtime_error("shortest_path: no path " + std::to_string(src) +
                             "->" + std::to_string(dst));
  std::vector<int> path{src};
  int cur = src;
  while (cur != dst) {
    int next = -1;
    for (auto [w, len] : net.out_adj[cur]) {
      if (std::abs(len + to_dst[w] - to_dst[cur]) <= kDistTol) {
        next = w;
        break;  // out_adj is sorted by id, first hit is the smallest
      }
    }
    if (next < 0)
      throw std::logic_error("shortest_path: walk stalled at vertex " +
                             std::to_string(cur));
    path.push_back(next);
    cur = next;
  }
  return path;
}

// ---------------------------------------------------------------------------
// Neighbor sets
// ---------------------------------------------------------------------------

/// S_c(theta): vertices within straight-line distance theta of the center,
/// plus the subset of them that forms the set boundary. A member is a
/// boundary vertex when it has a graph neighbor (either direction) outside
/// the member set, or lies on the radius shell within tolerance.
struct NeighborSet {
  int center = -1;
  double theta_km = 0.0;
  std::vector<int> members;   ///< ascending vertex ids, always contains center
  std::vector<int> boundary;  ///< ascending, subset of members
};

inline std::vector<int> boundary_of(const RoadNetwork& net, int center,
                                    double theta,
                                    const std::vector<int>& members) {
  std::vector<char> in_set(net.vertices.size(), 0);
  for (int v : members) in_set[v] = 1;
  std::vector<int> boundary;
  for (int v : members) {
    bool edge_out = false;
    for (auto [w, len] : net.out_adj[v])
      if (!in_set[w]) { edge_out = true; break; }
    if (!edge_out)
      for (auto [w, len] : net.in_adj[v])
        if (!in_set[w]) { edge_out = true; break; }
    if (edge_out || std::abs(euclid(net, v, center) - theta) <= kDistTol)
      boundary.push_back(v);
  }
  return boundary;
}

inline NeighborSet neighbor_set(const RoadNetwork& net, int center,
                                double theta) {
  NeighborSet s;
  s.center = center;
  s.theta_km = theta;
  for (const Vertex& v : net.vertices)
    if (euclid(net, v.id, center) <= theta + kDistTol) s.members.push_back(v.id);
  s.boundary = boundary_of(net, center, theta, s.members);
  return s;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

/// Structural checks on a loaded instance. Returns human-readable findings;
/// empty means the instance is usable by every solver stage.
inline std::vector<std::string> validate_instance(const Instance& inst) {
  std::vector<std::string> findings;
  const RoadNetwork& net = inst.net;
  const int n = net.size();

  for (int i = 0; i < n; ++i)
    if (net.vertices[i].id != i) {
      findings.push_back("vertex ids are not dense 0.." + std::to_string(n - 1) +
                         ": position " + std::to_string(i) + " has id " +
                         std::to_string(net.vertices[i].id));
      return findings;  // later checks index by id
    }

  for (const Arc& a : net.arcs) {
    if (a.u < 0 || a.u >= n || a.v < 0 || a.v >= n) {
      findings.push_back("arc endpoint out of range: " + std::to_string(a.u) +
                         "->" + std::to_string(a.v));
      return findings;
    }
    if (!(a.length_km > 0.0))
      findings.push_back("arc " + std::to_string(a.u) + "->" +
                         std::to_string(a.v) + " has non-positive length");
    if (a.u == a.v)
      findings.push_back("self-loop arc at vertex " + std::to_string(a.u));
  }

  if (n > 0) {
    std::vector<double> fwd = dijkstra(net, 0);
    std::vector<double> bwd = dijkstra(net, 0, /*reversed=*/true);
    for (int v = 0; v < n; ++v) {
      if (fwd[v] == kInf)
        findings.push_back("not strongly connected: no path 0->" +
                           std::to_string(v));
      if (bwd[v] == kInf)
        findings.push_back("not strongly connected: no path " +
                           std::to_string(v) + "->0");
    }
  }

  auto check_ids = [&](const std::vector<int>& ids, const std::string& what) {
    std::vector<int> sorted = ids;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      findings.push_back("duplicate " + what + " id");
    for (int v : ids)
      if (v < 0 || v >= n)
        findings.push_back(what + " id " + std::to_string(v) +
                           " is not a vertex");
  };
  if (inst.depots.empty()) findings.push_back("no depots");
  check_ids(inst.depots, "depot");
  check_ids(inst.customers, "customer");
  for (int c : inst.customers)
    if (std::find(inst.depots.begin(), inst.depots.end(), c) !=
        inst.depots.end())
      findings.push_back("vertex " + std::to_string(c) +
                         " is both a depot and a customer");

  if (!(inst.params.truck_speed_kmh > 0.0))
    findings.push_back("truck_speed_kmh must be positive");
  if (!(inst.params.drone_speed_kmh > 0.0))
    findings.push_back("drone_speed_kmh must be positive");
  if (inst.params.drone_range_km < 0.0)
    findings.push_back("drone_range_km must be non-negative");
  if (inst.params.drones_per_truck < 0)
    findings.push_back("drones_per_truck must be non-negative");
  return findings;
}

/// Throws std::invalid_argument on the first validation finding; solver
/// entry points use this to enforce their "instance valid" precondition.
inline void require_valid_instance(const Instance& inst) {
  const std::vector<std::string> findings = validate_instance(inst);
  if (!findings.empty())
    throw std::invalid_argument("invalid instance: " + findings.front());
}

// ---------------------------------------------------------------------------
// JSON I/O
// ---------------------------------------------------------------------------

inline nlohmann::json instance_to_json(const Instance& inst) {
  nlohmann::json j;
  j["nodes"] = nlohmann::json::array();
  for (const Vertex& v : inst.net.vertices)
    j["nodes"].push_back({{"id", v.id}, {"x", v.x}, {"y", v.y}});
  j["edges"] = nlohmann::json::array();
  for (const Arc& a : inst.net.arcs)
    j["edges"].push_back({{"u", a.u}, {"v", a.v}, {"length", a.length_km}});
  j["depots"] = inst.depots;
  j["customers"] = inst.customers;
  nlohmann::json p;
  p["truck_speed_kmh"] = inst.params.truck_speed_kmh;
  p["drone_speed_kmh"] = inst.params.drone_speed_kmh;
  p["drone_range_km"] = inst.params.drone_range_km;
  p["drones_per_truck"] = inst.params.drones_per_truck;
  if (inst.params.theta_partition_km)
    p["theta_partition_km"] = *inst.params.theta_partition_km;
  if (inst.params.seed) p["seed"] = *inst.params.seed;
  j["params"] = p;
  return j;
}

inline Instance instance_from_json(const nlohmann::json& j) {
  Instance inst;
  try {
    for (const auto& nj : j.at("nodes")) {
      Vertex v;
      v.id = nj.at("id").get<int>();
      v.x = nj.at("x").get<double>();
      v.y = nj.at("y").get<double>();
      inst.net.vertices.push_back(v);
    }
    // Instances index vertices by id; keep the array in id order.
    std::sort(inst.net.vertices.begin(), inst.net.vertices.end(),
              [](const Vertex& a, const Vertex& b) { return a.id < b.id; });
    for (const auto& ej : j.at("edges")) {
      Arc a;
      a.u = ej.at("u").get<int>();
      a.v = ej.at("v").get<int>();
      if (a.u < 0 || a.u >= inst.net.size() || a.v < 0 ||
          a.v >= inst.net.size())
        throw std::runtime_error("edge endpoint out of range: " +
                                 std::to_string(a.u) + "->" +
                                 std::to_string(a.v));
      a.length_km = ej.contains("length") ? ej.at("length").get<double>()
                                          : euclid(inst.net, a.u, a.v);
      inst.net.arcs.push_back(a);
    }
    inst.depots = j.at("depots").get<std::vector<int>>();
    inst.customers = j.at("customers").get<std::vector<int>>();
    const auto& p = j.at("params");
    inst.params.truck_speed_kmh = p.at("truck_speed_kmh").get<double>();
    inst.params.drone_speed_kmh = p.at("drone_speed_kmh").get<double>();
    inst.params.drone_range_km = p.at("drone_range_km").get<double>();
    inst.params.drones_per_truck = p.at("drones_per_truck").get<int>();
    if (p.contains("theta_partition_km"))
      inst.params.theta_partition_km = p.at("theta_partition_km").get<double>();
    if (p.contains("seed"))
      inst.params.seed = p.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("instance JSON malformed: ") +
                             e.what());
  }
  inst.net.rebuild_index();
  return inst;
}

inline Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open instance file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("cannot parse " + path + ": " + e.what());
  }
  return instance_from_json(j);
}

inline void save_instance(const Instance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot write instance file: " + path);
  out << instance_to_json(inst).dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

struct GenSpec {
  enum class Kind { grid, geometric };
  Kind kind = Kind::grid;

  // grid
  int rows = 4;
  int cols = 4;
  double block_km = 0.1;

  // geometric
  int num_vertices = 50;
  double extent_km = 2.0;
  int k_nearest = 4;

  int num_depots = 1;
  int num_customers = 5;
  Params params;
  std::uint64_t seed = 0;
};

namespace detail {

/// Euclidean MST over the vertex set (Prim, O(V^2)); returned as vertex pairs.
/// Added both ways to a geometric graph it guarantees strong connectivity.
inline std::vector<std::pair<int, int>> euclid_mst(const RoadNetwork& net) {
  const int n = net.size();
  std::vector<std::pair<int, int>> edges;
  if (n <= 1) return edges;
  std::vector<char> in_tree(n, 0);
  std::vector<double> best(n, kInf);
  std::vector<int> best_from(n, -1);
  in_tree[0] = 1;
  for (int v = 1; v < n; ++v) {
    best[v] = euclid(net, 0, v);
    best_from[v] = 0;
  }
  for (int step = 1; step < n; ++step) {
    int pick = -1;
    for (int v = 0; v < n; ++v)
      if (!in_tree[v] && (pick < 0 || best[v] < best[pick])) pick = v;
    in_tree[pick] = 1;
    edges.push_back({best_from[pick], pick});
    for (int v = 0; v < n; ++v)
      if (!in_tree[v] && euclid(net, pick, v) < best[v]) {
        best[v] = euclid(net, pick, v);
        best_from[v] = pick;
      }
  }
  return edges;
}

}  // namespace detail

/// Deterministic instance generator. Grid graphs use bidirectional
/// unit-block arcs; geometric graphs connect k-nearest neighbors plus the
/// Euclidean MST (both directions) so the result is strongly connected.
inline Instance generate_instance(const GenSpec& spec) {
  Instance inst;
  inst.params = spec.params;
  std::mt19937_64 rng(spec.seed);

  if (spec.kind == GenSpec::Kind::grid) {
    if (spec.rows < 1 || spec.cols < 1)
      throw std::runtime_error("generate_instance: grid needs rows,cols >= 1");
    for (int r = 0; r < spec.rows; ++r)
      for (int c = 0; c < spec.cols; ++c)
        inst.net.vertices.push_back(
            {r * spec.cols + c, c * spec.block_km, r * spec.block_km});
    auto add_both = [&](int a, int b) {
      inst.net.arcs.push_back({a, b, spec.block_km});
      inst.net.arcs.push_back({b, a, spec.block_km});
    };
    for (int r = 0; r < spec.rows; ++r)
      for (int c = 0; c < spec.cols; ++c) {
        int id = r * spec.cols + c;
        if (c + 1 < spec.cols) add_both(id, id + 1);
        if (r + 1 < spec.rows) add_both(id, id + spec.cols);
      }
  } else {
    if (spec.num_vertices < 2)
      throw std::runtime_error(
          "generate_instance: geometric needs num_vertices >= 2");
    std::uniform_real_distribution<double> coord(0.0, spec.extent_km);
    for (int i = 0; i < spec.num_vertices; ++i)
      inst.net.vertices.push_back({i, coord(rng), coord(rng)});
    std::vector<std::pair<int, int>> undirected;
    for (int u = 0; u < spec.num_vertices; ++u) {
      std::vector<std::pair<double, int>> near;
      for (int v = 0; v < spec.num_vertices; ++v)
        if (v != u) near.push_back({euclid(inst.net, u, v), v});
      std::sort(near.begin(), near.end());
      const int kn = std::min<int>(spec.k_nearest, near.size());
      for (int i = 0; i < kn; ++i)
        undirected.push_back({std::min(u, near[i].second),
                              std::max(u, near[i].second)});
    }
    for (auto [a, b] : detail::euclid_mst(inst.net))
      undirected.push_back({std::min(a, b), std::max(a, b)});
    std::sort(undirected.begin(), undirected.end());
    undirected.erase(std::unique(undirected.begin(), undirected.end()),
                     undirected.end());
    for (auto [a, b] : undirected) {
      inst.net.arcs.push_back({a, b, euclid(inst.net, a, b)});
      inst.net.arcs.push_back({b, a, euclid(inst.net, a, b)});
    }
  }
  inst.net.rebuild_index();

  const int n = inst.net.size();
  if (spec.num_depots + spec.num_customers > n)
    throw std::runtime_error(
        "generate_instance: more depots+customers than vertices");
  std::vector<int> ids(n);
  for (int i = 0; i < n; ++i) ids[i] = i;
  std::shuffle(ids.begin(), ids.end(), rng);
  inst.depots.assign(ids.begin(), ids.begin() + spec.num_depots);
  inst.customers.assign(ids.begin() + spec.num_depots,
                        ids.begin() + spec.num_depots + spec.num_customers);
  std::sort(inst.depots.begin(), inst.depots.end());
  std::sort(inst.customers.begin(), inst.customers.end());
  return inst;
}

}  // namespace mafstsp
