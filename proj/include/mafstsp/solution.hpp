#pragma once

/// Solution model shared by the decoder, the baselines and the evaluator.
/// A solution is one route per truck group plus the drone delivery tuples
/// hanging off it.

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mafstsp/roadnet.hpp"

namespace mafstsp {

/// One drone sortie (x, c, y): takeoff at truck route index x, serve
/// customer c, land on the same truck at route index y >= x. `drone` is the
/// slot id of the drone used, in [0, drones_per_truck).
struct Delivery {
  int takeoff_index = -1;
  int customer = -1;
  int landing_index = -1;
  int drone = 0;
};

/// Truck route of a group: explicit vertex cycle over road arcs starting and
/// ending at the group's depot (a single-vertex route means the truck never
/// moves). Delivery timing is fully determined by the route indices; the
/// list order carries no timing information.
struct TruckGroupRoute {
  int depot = -1;
  std::vector<int> truck_route;
  std::vector<Delivery> deliveries;
  double cost_h = 0.0;
};

struct Solution {
  std::vector<TruckGroupRoute> groups;
  double total_cost_h = 0.0;
  nlohmann::json meta = nlohmann::json::object();
};

inline nlohmann::json solution_to_json(const Solution& sol) {
  nlohmann::json j;
  j["groups"] = nlohmann::json::array();
  for (const TruckGroupRoute& g : sol.groups) {
    nlohmann::json gj;
    gj["depot"] = g.depot;
    gj["truck_route"] = g.truck_route;
    gj["deliveries"] = nlohmann::json::array();
    for (const Delivery& d : g.deliveries)
      gj["deliveries"].push_back({{"takeoff_index", d.takeoff_index},
                                  {"customer", d.customer},
                                  {"landing_index", d.landing_index},
                                  {"drone", d.drone}});
    gj["cost_h"] = g.cost_h;
    j["groups"].push_back(gj);
  }
  j["total_cost_h"] = sol.total_cost_h;
  j["meta"] = sol.meta;
  return j;
}

inline Solution solution_from_json(const nlohmann::json& j) {
  Solution sol;
  try {
    for (const auto& gj : j.at("groups")) {
      TruckGroupRoute g;
      g.depot = gj.at("depot").get<int>();
      g.truck_route = gj.at("truck_route").get<std::vector<int>>();
      for (const auto& dj : gj.at("deliveries")) {
        Delivery d;
        d.takeoff_index = dj.at("takeoff_index").get<int>();
        d.customer = dj.at("customer").get<int>();
        d.landing_index = dj.at("landing_index").get<int>();
        d.drone = dj.value("drone", 0);
        g.deliveries.push_back(d);
      }
      g.cost_h = gj.at("cost_h").get<double>();
      sol.groups.push_back(g);
    }
    sol.total_cost_h = j.at("total_cost_h").get<double>();
    if (j.contains("meta")) sol.meta = j.at("meta");
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("solution JSON malformed: ") +
                             e.what());
  }
  return sol;
}

inline Solution load_solution(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open solution file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("cannot parse " + path + ": " + e.what());
  }
  return solution_from_json(j);
}

inline void save_solution(const Solution& sol, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write solution file: " + path);
  out << solution_to_json(sol).dump(2) << "\n";
}

}  // namespace mafstsp
