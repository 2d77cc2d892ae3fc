// Baseline tests: the hill-climbing VNS heuristic (feasibility, determinism,
// config validation, never beating the exhaustive optimum) and the two
// lower-bound modes.

#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "mafstsp/baselines.hpp"
#include "mafstsp/fullmilp.hpp"
#include "mafstsp/solutioneval.hpp"
#include "test_support.hpp"

using namespace mafstsp;
using testsup::grid_instance;
using testsup::line_instance;
using testsup::make_instance;
using testsup::make_params;

namespace {

Instance star_instance(const Params& prm) {
  return make_instance(
      {{0.0, 0.0}, {1.0, 0.0}, {2.0, 0.0}, {1.0, 1.0}, {1.0, -1.0}},
      {{0, 1, 1.0}, {1, 2, 1.0}, {1, 3, 1.0}, {1, 4, 1.0}}, {0}, {3, 4}, prm);
}

}  // namespace

TEST_CASE("hc_vns output is feasible and deterministic", "[baselines]") {
  const Instance inst =
      grid_instance(3, 3, 1.0, {0}, {2, 4, 7}, make_params(30, 48, 1.5, 2));
  const Solution a = hc_vns_solve(inst);
  const Solution b = hc_vns_solve(inst);
  CHECK(validate_solution(inst, a).empty());
  CHECK(solution_to_json(a).dump() == solution_to_json(b).dump());
  CHECK(a.meta.at("method") == "hc_vns");
  CHECK(a.meta.at("seed") == 0);
  CHECK(a.meta.at("sweeps").get<int>() >= 1);
}

TEST_CASE("hc_vns without drones keeps the truck tour", "[baselines]") {
  const Instance inst = line_instance({0}, {2}, make_params(30, 48, 1.5, 0));
  const Solution sol = hc_vns_solve(inst);
  CHECK(sol.total_cost_h == Catch::Approx(4.0 / 30.0).margin(1e-9));
  for (const auto& g : sol.groups) CHECK(g.deliveries.empty());
}

TEST_CASE("hc_vns discovers the profitable sortie", "[baselines]") {
  // Truck-only service of customer 2 costs 4/30; launching from vertex 1
  // and waiting for the 2 km round flight costs 2/30 + 1/30.
  const Instance inst = line_instance({0}, {2}, make_params(30, 60, 2.0, 1));
  const Solution sol = hc_vns_solve(inst);
  CHECK(validate_solution(inst, sol).empty());
  CHECK(sol.total_cost_h == Catch::Approx(0.1).margin(1e-9));
  REQUIRE(sol.groups.size() == 1);
  REQUIRE(sol.groups[0].deliveries.size() == 1);
  CHECK(sol.groups[0].deliveries[0].customer == 2);
}

TEST_CASE("hc_vns zero sweep budget returns the greedy start", "[baselines]") {
  const Instance inst =
      grid_instance(3, 3, 1.0, {0}, {4, 8}, make_params(30, 48, 1.5, 1));
  VnsConfig cfg;
  cfg.max_iterations = 0;
  const Solution sol = hc_vns_solve(inst, cfg);
  CHECK(validate_solution(inst, sol).empty());
  CHECK(sol.meta.at("sweeps") == 0);
}

TEST_CASE("hc_vns config validation", "[baselines]") {
  const Instance inst = line_instance({0}, {2}, make_params(30, 48, 1.5, 1));
  VnsConfig cfg;
  SECTION("patience") {
    cfg.no_improve_patience = 0;
    CHECK_THROWS_WITH(hc_vns_solve(inst, cfg), "hc_vns: patience must be >= 1");
  }
  SECTION("sweep budget") {
    cfg.max_iterations = -1;
    CHECK_THROWS_WITH(hc_vns_solve(inst, cfg),
                      "hc_vns: max_iterations must be >= 0");
  }
  SECTION("operator set") {
    cfg.operators = {VnsOperator::swap_consecutive};
    CHECK_THROWS_WITH(
        hc_vns_solve(inst, cfg),
        "hc_vns: operators must be exactly the three known neighborhoods");
    cfg.operators = {VnsOperator::swap_consecutive,
                     VnsOperator::swap_consecutive,
                     VnsOperator::swap_consecutive};
    CHECK_THROWS_WITH(
        hc_vns_solve(inst, cfg),
        "hc_vns: operators must be exactly the three known neighborhoods");
  }
}

TEST_CASE("hc_vns never beats the exhaustive optimum", "[baselines]") {
  // Chains and stars need routes longer than the default |V|+2 cap to
  // reach far customers and double back, so those pass an explicit cap.
  const std::vector<std::pair<Instance, BruteForceCaps>> fixtures = {
      {line_instance({0}, {2}, make_params(30, 60, 2.0, 1)), {8}},
      {line_instance({0}, {1, 3}, make_params(30, 48, 1.0, 1)), {8}},
      {star_instance(make_params(30, 60, 2.0, 1)), {10}},
      {star_instance(make_params(30, 60, 2.0, 2)), {10}},
      {grid_instance(2, 3, 0.9, {0}, {2, 4}, make_params(30, 48, 1.0, 1)), {}},
      {grid_instance(3, 3, 1.0, {0, 8}, {2, 4}, make_params(30, 48, 1.1, 1)),
       {}},
  };
  for (std::size_t i = 0; i < fixtures.size(); ++i) {
    const auto& [inst, caps] = fixtures[i];
    INFO("fixture " << i);
    const Solution vns = hc_vns_solve(inst);
    const Solution opt = brute_force_exact(inst, caps);
    CHECK(validate_solution(inst, vns).empty());
    CHECK(validate_solution(inst, opt).empty());
    CHECK(vns.total_cost_h >= opt.total_cost_h - 1e-9);
  }
}

TEST_CASE("relaxed lower bound worked examples", "[baselines][bound]") {
  SECTION("zero range reduces to the farthest round trip") {
    const Instance inst = line_instance({0}, {2, 3}, make_params(30, 48, 0, 1));
    CHECK(lower_bound(inst) == Catch::Approx(0.2).margin(1e-12));
  }
  SECTION("a depot inside every half range set gives a zero bound") {
    const Instance inst = line_instance({0}, {1}, make_params(30, 48, 4.0, 1));
    CHECK(lower_bound(inst) == 0.0);
  }
  SECTION("the nearest set vertex defines the round trip") {
    // theta = 1: both spokes are reachable from vertex 1, 2 km round trip.
    const Instance inst = star_instance(make_params(30, 60, 2.0, 1));
    CHECK(lower_bound(inst) == Catch::Approx(2.0 / 30.0).margin(1e-12));
  }
  SECTION("multiple depots take the cheapest one") {
    const Instance inst =
        grid_instance(1, 6, 1.0, {0, 5}, {4}, make_params(30, 48, 0, 1));
    // Customer 4 is 1 km from depot 5 and 4 km from depot 0.
    CHECK(lower_bound(inst) == Catch::Approx(2.0 / 30.0).margin(1e-12));
  }
}

TEST_CASE("bound ordering: relaxed <= exact_small <= optimum",
          "[baselines][bound]") {
  const std::vector<std::pair<Instance, BruteForceCaps>> fixtures = {
      {line_instance({0}, {2}, make_params(30, 60, 2.0, 1)), {8}},
      {line_instance({0}, {1, 3}, make_params(30, 48, 1.0, 1)), {8}},
      {star_instance(make_params(30, 60, 2.0, 1)), {10}},
      {grid_instance(2, 3, 0.9, {0}, {2, 4}, make_params(30, 48, 1.0, 1)), {}},
      {grid_instance(3, 3, 1.0, {0, 8}, {2, 4}, make_params(30, 48, 1.1, 1)),
       {}},
  };
  for (std::size_t i = 0; i < fixtures.size(); ++i) {
    const auto& [inst, caps] = fixtures[i];
    INFO("fixture " << i);
    const double relaxed = lower_bound(inst, BoundMode::relaxed);
    const double exact = lower_bound(inst, BoundMode::exact_small);
    const Solution opt = brute_force_exact(inst, caps);
    CHECK(relaxed <= exact + 1e-9);
    CHECK(exact <= opt.total_cost_h + 1e-9);
  }
}

TEST_CASE("exact_small rejects big instances", "[baselines][bound]") {
  std::vector<int> customers;
  for (int v = 1; v <= 11; ++v) customers.push_back(v);
  const Instance inst =
      grid_instance(4, 4, 1.0, {0}, customers, make_params(30, 48, 1.5, 1));
  CHECK_THROWS_WITH(
      lower_bound(inst, BoundMode::exact_small),
      Catch::Matchers::ContainsSubstring(
          "lower_bound: exact_small needs n <= 10 and m <= 3 (got n=11"));
  CHECK(lower_bound(inst, BoundMode::relaxed) >= 0.0);
}
