// Phase-2 Set-TSP tests: set-system construction modes, edge costs, the
// exact DP against a permutation-enumeration oracle, the greedy fallback,
// the flow MILP (counts, LP export/parse, external solver protocol).

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mafstsp/settsp.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace mafstsp;
using testsup::grid_instance;
using testsup::line_instance;
using testsup::make_instance;
using testsup::make_params;

namespace {

struct Fixture {
  Instance inst;
  SetSystem sys;
  DistanceOracle oracle;
  Fixture(Instance in, int depot, std::vector<int> customers, double theta,
          SetSystemMode mode)
      : inst(std::move(in)),
        sys(build_set_system(inst, depot, std::move(customers), theta, mode)),
        oracle(make_set_tsp_oracle(inst, sys)) {}
  SetTspCosts costs() const { return SetTspCosts{&inst, &oracle}; }
};

bool is_permutation_of(std::vector<int> a, std::vector<int> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b;
}

void check_tour_structure(const SetSystem& sys, const SetTspCosts& costs,
                          const SetTour& tour) {
  REQUIRE(tour.depot == sys.depot);
  REQUIRE(is_permutation_of(tour.order, sys.customers));
  REQUIRE(tour.service.size() == tour.order.size());
  for (std::size_t i = 0; i < tour.order.size(); ++i) {
    const auto& mem = sys.members[sys.set_index(tour.order[i])];
    auto in_set = [&](int v) {
      return std::find(mem.begin(), mem.end(), v) != mem.end();
    };
    CHECK(in_set(tour.service[i].first));
    CHECK(in_set(tour.service[i].second));
  }
  CHECK(tour.cost_h == Catch::Approx(tour_cost(sys, costs, tour)).margin(1e-9));
}

// Writes an executable shell script and returns its path.
std::string write_script(const std::string& dir, const std::string& name,
                         const std::string& body) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const std::string path = dir + "/" + name;
  {
    std::ofstream out(path);
    out << "#!/bin/sh\n" << body;
  }
  fs::permissions(path, fs::perms::owner_all | fs::perms::group_read |
                            fs::perms::others_read);
  return path;
}

// Variable assignment (b_ arcs and g_ service pairs) describing a tour.
std::map<std::string, double> assignment_for(const SetTour& tour) {
  std::map<std::string, double> values;
  int at = tour.depot;
  for (int c : tour.order) {
    values["b_" + std::to_string(at) + "_" + std::to_string(c)] = 1.0;
    at = c;
  }
  values["b_" + std::to_string(at) + "_" + std::to_string(tour.depot)] = 1.0;
  for (std::size_t i = 0; i < tour.order.size(); ++i)
    values["g_" + std::to_string(tour.order[i]) + "_" +
           std::to_string(tour.service[i].first) + "_" +
           std::to_string(tour.service[i].second)] = 1.0;
  return values;
}

template <class Fn>
std::string backend_error_message(Fn&& fn) {
  try {
    fn();
  } catch (const BackendError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("set system mode parsing", "[settsp]") {
  for (auto m : {SetSystemMode::full, SetSystemMode::no_overlap,
                 SetSystemMode::boundary_only, SetSystemMode::both})
    CHECK(set_system_mode_from(to_string(m)) == m);
  CHECK_THROWS_AS(set_system_mode_from("fast"), std::invalid_argument);
}

TEST_CASE("edge cost worked examples", "[settsp]") {
  // Chain 0-1-2-3, unit arcs; depot 3, customer 0.
  const Instance inst = line_instance({3}, {0}, make_params(30, 60, 2.0, 3));
  Fixture fx(inst, 3, {0}, 1.0, SetSystemMode::full);
  auto costs = fx.costs();
  REQUIRE(fx.sys.members == std::vector<std::vector<int>>{{0, 1}});

  SECTION("serving at the customer vertex itself is free") {
    CHECK(edge_cost(fx.sys, costs, 0, 0) == Catch::Approx(0.0).margin(1e-12));
  }
  SECTION("within a set the truck leg can dominate the flight") {
    // u=1, v=0: flight 1 km at 60 vs truck 1 km at 30 -> 1/30 h.
    CHECK(edge_cost(fx.sys, costs, 1, 0) ==
          Catch::Approx(1.0 / 30.0).margin(1e-12));
  }
  SECTION("endpoints in different sets cost a plain truck leg") {
    // road(1,3) = 2 km at 30 km/h.
    CHECK(edge_cost(fx.sys, costs, 1, 3) ==
          Catch::Approx(1.0 / 15.0).margin(1e-12));
  }
  SECTION("out-of-range sortie falls back to the truck detour") {
    // u=v=1, c=0: round flight 2 km. In range (r=2.5): max{2/60, 0} = 1/30.
    // Out of range (r=0.5): truck detour 2 km -> 1/15.
    Instance near = inst;
    near.params.drone_range_km = 2.5;
    Fixture fn(near, 3, {0}, 1.0, SetSystemMode::full);
    CHECK(edge_cost(fn.sys, fn.costs(), 1, 1) ==
          Catch::Approx(1.0 / 30.0).margin(1e-12));
    Instance far = inst;
    far.params.drone_range_km = 0.5;
    Fixture ff(far, 3, {0}, 1.0, SetSystemMode::full);
    CHECK(edge_cost(ff.sys, ff.costs(), 1, 1) ==
          Catch::Approx(1.0 / 15.0).margin(1e-12));
  }
}

TEST_CASE("set system construction modes", "[settsp]") {
  const Params prm = make_params(30, 48, 1.5, 3);

  SECTION("theta zero keeps only the customer vertex") {
    const Instance inst = grid_instance(3, 3, 1.0, {0}, {4, 8}, prm);
    for (auto mode : {SetSystemMode::full, SetSystemMode::no_overlap,
                      SetSystemMode::boundary_only, SetSystemMode::both}) {
      SetSystem sys = build_set_system(inst, 0, {8, 4}, 0.0, mode);
      CHECK(sys.customers == std::vector<int>{4, 8});  // sorted
      CHECK(sys.members == std::vector<std::vector<int>>{{4}, {8}});
    }
  }

  SECTION("disjoint sets are untouched by overlap removal") {
    const Instance inst = grid_instance(1, 7, 1.0, {3}, {0, 6}, prm);
    SetSystem full = build_set_system(inst, 3, {0, 6}, 1.0, SetSystemMode::full);
    SetSystem dedup =
        build_set_system(inst, 3, {0, 6}, 1.0, SetSystemMode::no_overlap);
    CHECK(full.members == dedup.members);
    CHECK(full.members == std::vector<std::vector<int>>{{0, 1}, {5, 6}});
  }

  SECTION("overlap removal splits shared vertices by proximity") {
    // Chain 0..4, depot 4, customers 0 and 3, theta 2. Vertex 1 is closer
    // to 0, vertex 2 closer to 3; the depot vertex is dropped.
    const Instance inst = grid_instance(1, 5, 1.0, {4}, {0, 3}, prm);
    SetSystem full = build_set_system(inst, 4, {0, 3}, 2.0, SetSystemMode::full);
    CHECK(full.members ==
          std::vector<std::vector<int>>{{0, 1, 2}, {1, 2, 3, 4}});
    SetSystem dedup =
        build_set_system(inst, 4, {0, 3}, 2.0, SetSystemMode::no_overlap);
    CHECK(dedup.members == std::vector<std::vector<int>>{{0, 1}, {2, 3}});
  }

  SECTION("equidistant shared vertices go to the lower customer id") {
    // Chain 0..4, vertex 1 is exactly 1 km from customers 0 and 2.
    const Instance inst = grid_instance(1, 5, 1.0, {4}, {0, 2}, prm);
    SetSystem dedup =
        build_set_system(inst, 4, {0, 2}, 1.5, SetSystemMode::no_overlap);
    CHECK(dedup.members == std::vector<std::vector<int>>{{0, 1}, {2, 3}});
  }

  SECTION("a customer stripped of every vertex keeps itself") {
    // Vertices 0 and 1 share coordinates, so customer 0 owns both copies
    // (tie -> lower id) and customer 1's set would come out empty.
    const Instance inst = make_instance(
        {{0.0, 0.0}, {0.0, 0.0}, {1.0, 0.0}},
        {{0, 1, 0.5}, {0, 2, 1.0}, {1, 2, 1.0}}, {2}, {0, 1}, prm);
    REQUIRE(validate_instance(inst).empty());
    SetSystem dedup =
        build_set_system(inst, 2, {0, 1}, 0.0, SetSystemMode::no_overlap);
    CHECK(dedup.members == std::vector<std::vector<int>>{{0, 1}, {1}});
  }

  SECTION("boundary reduction keeps the disc boundary") {
    // 7x7 unit grid, customer at the center, theta 2: 13-vertex disc whose
    // boundary is the 4 shell vertices plus the 4 diagonal corners.
    const Instance inst = grid_instance(7, 7, 1.0, {0}, {24}, prm);
    SetSystem full = build_set_system(inst, 0, {24}, 2.0, SetSystemMode::full);
    REQUIRE(full.members[0].size() == 13);
    SetSystem red =
        build_set_system(inst, 0, {24}, 2.0, SetSystemMode::boundary_only);
    CHECK(red.members[0] == std::vector<int>{10, 16, 18, 22, 26, 30, 32, 38});
    for (int v : red.members[0]) {
      CHECK(std::find(full.members[0].begin(), full.members[0].end(), v) !=
            full.members[0].end());
    }
  }

  SECTION("an empty boundary falls back to the customer vertex") {
    // Theta covers the whole graph: no member has an outside neighbor and
    // none sits on the shell.
    const Instance inst = line_instance({3}, {0}, prm);
    SetSystem red =
        build_set_system(inst, 3, {0}, 100.0, SetSystemMode::boundary_only);
    CHECK(red.members == std::vector<std::vector<int>>{{0}});
  }

  SECTION("both mode composes overlap removal and boundary reduction") {
    const Instance inst = grid_instance(1, 5, 1.0, {4}, {0, 3}, prm);
    SetSystem both =
        build_set_system(inst, 4, {0, 3}, 2.0, SetSystemMode::both);
    SetSystem dedup =
        build_set_system(inst, 4, {0, 3}, 2.0, SetSystemMode::no_overlap);
    for (std::size_t i = 0; i < both.members.size(); ++i)
      for (int v : both.members[i])
        CHECK(std::find(dedup.members[i].begin(), dedup.members[i].end(), v) !=
              dedup.members[i].end());
  }
}

TEST_CASE("exact dp matches the permutation enumeration oracle", "[settsp]") {
  std::mt19937_64 rng(2024);
  const std::vector<Params> param_sets = {make_params(30, 48, 1.5, 3),
                                          make_params(30, 60, 2.0, 2)};
  int cases = 0;
  for (int draw = 0; draw < 5; ++draw) {
    std::vector<int> pool;
    for (int v = 1; v < 16; ++v) pool.push_back(v);
    std::shuffle(pool.begin(), pool.end(), rng);
    const std::vector<int> customers(pool.begin(), pool.begin() + 3);
    for (const Params& prm : param_sets)
      for (double theta : {0.5, 1.0})
        for (auto mode : {SetSystemMode::full, SetSystemMode::no_overlap,
                          SetSystemMode::boundary_only, SetSystemMode::both}) {
          const Instance inst = grid_instance(4, 4, 0.5, {0}, customers, prm);
          Fixture fx(inst, 0, customers, theta, mode);
          auto costs = fx.costs();
          SetTour tour = solve_set_tsp(fx.sys, costs);
          INFO("draw " << draw << " theta " << theta << " mode "
                       << to_string(mode));
          CHECK(tour.backend == "exact_dp");
          check_tour_structure(fx.sys, costs, tour);
          CHECK(tour.cost_h ==
                Catch::Approx(oracles::set_tsp_cost(fx.sys, costs))
                    .margin(1e-9));
          ++cases;
        }
  }
  CHECK(cases == 80);
}

TEST_CASE("exact dp matches the oracle on a six customer chain", "[settsp]") {
  const Instance inst = grid_instance(1, 8, 1.0, {0}, {1, 2, 3, 4, 5, 6},
                                      make_params(30, 48, 1.5, 3));
  Fixture fx(inst, 0, {1, 2, 3, 4, 5, 6}, 1.0, SetSystemMode::full);
  auto costs = fx.costs();
  for (const auto& mem : fx.sys.members) REQUIRE(mem.size() <= 4);
  SetTour tour = detail::set_tsp_exact_dp(fx.sys, costs);
  check_tour_structure(fx.sys, costs, tour);
  CHECK(tour.cost_h ==
        Catch::Approx(oracles::set_tsp_cost(fx.sys, costs)).margin(1e-9));
}

TEST_CASE("single customer tour equals the service pair brute force",
          "[settsp]") {
  const Instance inst =
      grid_instance(3, 3, 0.8, {0}, {4}, make_params(30, 48, 1.6, 2));
  Fixture fx(inst, 0, {4}, 0.8, SetSystemMode::full);
  auto costs = fx.costs();
  double best = kInf;
  for (int u : fx.sys.members[0])
    for (int v : fx.sys.members[0])
      best = std::min(best, costs.travel(0, u) + costs.intra(4, u, v) +
                                costs.travel(v, 0));
  SetTour tour = solve_set_tsp(fx.sys, costs);
  CHECK(tour.cost_h == Catch::Approx(best).margin(1e-9));
  CHECK(extract_visit_order(tour) == std::vector<int>{4});
}

TEST_CASE("theta zero reduces to a plain road TSP", "[settsp]") {
  const Instance inst =
      grid_instance(3, 4, 1.0, {0}, {3, 5, 10}, make_params(30, 48, 1.5, 3));
  Fixture fx(inst, 0, {3, 5, 10}, 0.0, SetSystemMode::full);
  auto costs = fx.costs();
  SetTour tour = solve_set_tsp(fx.sys, costs);
  for (std::size_t i = 0; i < tour.order.size(); ++i) {
    CHECK(tour.service[i].first == tour.order[i]);
    CHECK(tour.service[i].second == tour.order[i]);
  }
  // Plain TSP by permutation enumeration on road hours.
  std::vector<int> perm = {3, 5, 10};
  double best = kInf;
  std::sort(perm.begin(), perm.end());
  do {
    double c = 0.0;
    int at = 0;
    for (int v : perm) {
      c += costs.travel(at, v);
      at = v;
    }
    c += costs.travel(at, 0);
    best = std::min(best, c);
  } while (std::next_permutation(perm.begin(), perm.end()));
  CHECK(tour.cost_h == Catch::Approx(best).margin(1e-9));
}

TEST_CASE("greedy local search is feasible and never beats the optimum",
          "[settsp]") {
  std::mt19937_64 rng(7);
  for (int draw = 0; draw < 6; ++draw) {
    std::vector<int> pool;
    for (int v = 1; v < 16; ++v) pool.push_back(v);
    std::shuffle(pool.begin(), pool.end(), rng);
    const int n = 2 + draw % 3;
    const std::vector<int> customers(pool.begin(), pool.begin() + n);
    const Instance inst =
        grid_instance(4, 4, 0.5, {0}, customers, make_params(30, 48, 1.5, 3));
    Fixture fx(inst, 0, customers, 0.75, SetSystemMode::full);
    auto costs = fx.costs();
    SetTspConfig greedy_cfg;
    greedy_cfg.backend = SetTspConfig::Backend::greedy_ls;
    SetTour greedy = solve_set_tsp(fx.sys, costs, greedy_cfg);
    SetTour exact = solve_set_tsp(fx.sys, costs);
    INFO("draw " << draw);
    CHECK(greedy.backend == "greedy_ls");
    check_tour_structure(fx.sys, costs, greedy);
    CHECK(greedy.cost_h >= exact.cost_h - 1e-9);
    if (n <= 2)  // insertion enumerates both orders, so it is exact here
      CHECK(greedy.cost_h == Catch::Approx(exact.cost_h).margin(1e-9));
  }
}

TEST_CASE("empty group solves to an empty zero cost tour", "[settsp]") {
  const Instance inst =
      grid_instance(2, 2, 1.0, {0}, {3}, make_params(30, 48, 1.5, 3));
  Fixture fx(inst, 0, {}, 0.75, SetSystemMode::full);
  auto costs = fx.costs();
  for (auto backend : {SetTspConfig::Backend::exact_dp,
                       SetTspConfig::Backend::greedy_ls}) {
    SetTspConfig cfg;
    cfg.backend = backend;
    SetTour tour = solve_set_tsp(fx.sys, costs, cfg);
    CHECK(tour.order.empty());
    CHECK(tour.service.empty());
    CHECK(tour.cost_h == 0.0);
  }
}

TEST_CASE("exact dp cap violations are reported", "[settsp]") {
  const Instance inst =
      grid_instance(1, 5, 1.0, {4}, {0, 2}, make_params(30, 48, 1.5, 3));
  Fixture fx(inst, 4, {0, 2}, 0.5, SetSystemMode::full);
  auto costs = fx.costs();
  SetTspConfig cfg;
  cfg.backend = SetTspConfig::Backend::exact_dp;
  cfg.exact_customer_cap = 1;
  CHECK_THROWS_WITH(
      solve_set_tsp(fx.sys, costs, cfg),
      "set_tsp exact_dp: instance exceeds caps (customers <= 1, set vertices "
      "<= 32)");
}

TEST_CASE("set tsp milp counts match the closed forms", "[settsp][milp]") {
  const Params prm = make_params(30, 48, 1.5, 3);

  auto audit = [](const SetSystem& sys, const SetTspCosts& costs) {
    const MilpModel m = build_set_tsp_milp(sys, costs);
    const int n = static_cast<int>(sys.customers.size());
    const int N = n + 1;
    std::vector<std::size_t> size{1};  // depot meta set
    for (const auto& mem : sys.members) size.push_back(mem.size());
    std::size_t beta = std::size_t(N) * N;
    std::size_t gamma = 0;
    for (int i = 1; i <= n; ++i) gamma += size[i] * size[i];
    std::size_t delta = 0;
    std::size_t members_total = 0;
    for (int i = 0; i <= n; ++i) {
      members_total += size[i];
      for (int j = 0; j <= n; ++j)
        if (i != j) delta += size[i] * size[j];
    }
    CHECK(m.vars.size() == 2 * beta + gamma + delta);
    CHECK(m.num_binary() == beta + gamma + delta);
    const std::size_t expect_cons = 2 * N        // self loops
                                    + 2 * N      // degrees
                                    + beta       // flow caps
                                    + 2          // source and sink
                                    + n          // flow balance
                                    + n          // one service pair per set
                                    + std::size_t(N) * (N - 1)  // alignment
                                    + 2 * members_total;        // sync
    CHECK(m.constraints.size() == expect_cons);
    return m;
  };

  SECTION("one customer with singleton sets") {
    const Instance inst = grid_instance(1, 3, 1.0, {0}, {2}, prm);
    Fixture fx(inst, 0, {2}, 0.0, SetSystemMode::full);
    const MilpModel m = audit(fx.sys, fx.costs());
    // b has 4 entries, g has 1 and d has 2.
    CHECK(m.vars.size() == 4 + 4 + 1 + 2);
    CHECK(m.num_binary() == 7);
    CHECK(m.constraints.size() == 22);
  }

  SECTION("grid group with richer sets") {
    const Instance inst = grid_instance(4, 4, 0.5, {0}, {5, 10, 15}, prm);
    Fixture fx(inst, 0, {5, 10, 15}, 0.75, SetSystemMode::full);
    audit(fx.sys, fx.costs());
  }

  SECTION("boundary reduction shrinks the gamma block") {
    const Instance inst = grid_instance(5, 5, 0.5, {0}, {12}, prm);
    Fixture full(inst, 0, {12}, 1.0, SetSystemMode::full);
    Fixture red(inst, 0, {12}, 1.0, SetSystemMode::boundary_only);
    const MilpModel mf = audit(full.sys, full.costs());
    const MilpModel mr = audit(red.sys, red.costs());
    CHECK(red.sys.members[0].size() < full.sys.members[0].size());
    CHECK(mr.vars.size() < mf.vars.size());
  }
}

TEST_CASE("lp export is deterministic and round trips", "[settsp][milp]") {
  const Instance inst = grid_instance(3, 3, 0.8, {0}, {4, 8},
                                      make_params(30, 48, 1.6, 2));
  Fixture fx(inst, 0, {4, 8}, 0.8, SetSystemMode::full);
  auto costs = fx.costs();

  auto to_text = [](const MilpModel& m) {
    std::ostringstream os;
    export_lp(m, os);
    return os.str();
  };

  SECTION("two builds export byte identical text") {
    const MilpModel a = build_set_tsp_milp(fx.sys, costs);
    const MilpModel b = build_set_tsp_milp(fx.sys, costs);
    CHECK(to_text(a) == to_text(b));
  }

  SECTION("parse of an exported file reproduces the model") {
    const MilpModel orig = build_set_tsp_milp(fx.sys, costs);
    const std::string dir = "/tmp/mafstsp_test_settsp/roundtrip";
    std::filesystem::create_directories(dir);
    const std::string path = dir + "/model.lp";
    export_lp(orig, path);
    MilpModel parsed = parse_lp(path);
    REQUIRE(parsed.vars.size() == orig.vars.size());
    REQUIRE(parsed.constraints.size() == orig.constraints.size());
    for (std::size_t i = 0; i < orig.vars.size(); ++i) {
      CHECK(parsed.vars[i].name == orig.vars[i].name);
      CHECK(parsed.vars[i].integer == orig.vars[i].integer);
      CHECK(parsed.vars[i].lb == orig.vars[i].lb);
      CHECK(parsed.vars[i].ub == orig.vars[i].ub);
      CHECK(parsed.vars[i].obj == Catch::Approx(orig.vars[i].obj).margin(0.0));
    }
    for (std::size_t i = 0; i < orig.constraints.size(); ++i) {
      CHECK(parsed.constraints[i].name == orig.constraints[i].name);
      CHECK(parsed.constraints[i].sense == orig.constraints[i].sense);
      CHECK(parsed.constraints[i].rhs == orig.constraints[i].rhs);
      CHECK(parsed.constraints[i].terms.size() ==
            orig.constraints[i].terms.size());
    }
    parsed.name = orig.name;  // the parser records the path as the name
    CHECK(to_text(parsed) == to_text(orig));
  }
}

TEST_CASE("tour reconstruction from a variable assignment", "[settsp][milp]") {
  const Instance inst = grid_instance(3, 3, 0.8, {0}, {4, 8},
                                      make_params(30, 48, 1.6, 2));
  Fixture fx(inst, 0, {4, 8}, 0.8, SetSystemMode::full);
  auto costs = fx.costs();
  const SetTour exact = solve_set_tsp(fx.sys, costs);
  const auto good = assignment_for(exact);

  SECTION("a valid assignment reproduces the tour") {
    SetTour tour = tour_from_milp_solution(fx.sys, costs, good);
    CHECK(tour.backend == "external_milp");
    CHECK(tour.order == exact.order);
    CHECK(tour.cost_h == Catch::Approx(exact.cost_h).margin(1e-9));
  }
  SECTION("a duplicate outgoing arc is rejected") {
    auto bad = good;
    // The depot already has an outgoing arc to order[0]; add a second one.
    bad["b_0_" + std::to_string(exact.order[1])] = 1.0;
    const auto msg =
        backend_error_message([&] { tour_from_milp_solution(fx.sys, costs, bad); });
    CHECK(msg.find("two arcs leave set") != std::string::npos);
  }
  SECTION("arcs that skip the depot are rejected") {
    std::map<std::string, double> bad;
    bad["b_4_8"] = 1.0;
    bad["b_8_4"] = 1.0;
    const auto msg =
        backend_error_message([&] { tour_from_milp_solution(fx.sys, costs, bad); });
    CHECK(msg.find("do not form a depot tour") != std::string::npos);
  }
  SECTION("a missing service pair is rejected") {
    auto bad = good;
    for (auto it = bad.begin(); it != bad.end();)
      it = it->first.rfind("g_4_", 0) == 0 ? bad.erase(it) : std::next(it);
    const auto msg =
        backend_error_message([&] { tour_from_milp_solution(fx.sys, costs, bad); });
    CHECK(msg.find("no service pair for customer 4") != std::string::npos);
  }
  SECTION("a tour that ends away from the depot is rejected") {
    std::map<std::string, double> bad;
    int at = 0;
    for (int c : exact.order) {
      bad["b_" + std::to_string(at) + "_" + std::to_string(c)] = 1.0;
      at = c;
    }
    // no closing arc back to the depot
    const auto msg =
        backend_error_message([&] { tour_from_milp_solution(fx.sys, costs, bad); });
    CHECK(msg.find("invalid solver output") != std::string::npos);
  }
}

TEST_CASE("external solver protocol", "[settsp][milp]") {
  const Instance inst = grid_instance(3, 3, 0.8, {0}, {4, 8},
                                      make_params(30, 48, 1.6, 2));
  Fixture fx(inst, 0, {4, 8}, 0.8, SetSystemMode::full);
  auto costs = fx.costs();
  const SetTour exact = solve_set_tsp(fx.sys, costs);
  const std::string dir = "/tmp/mafstsp_test_settsp/solver";
  std::filesystem::create_directories(dir);

  // Stub that answers with the precomputed optimum.
  std::ostringstream heredoc;
  heredoc << "cat > \"$2\" <<'EOF'\n# stub solver answer\n\n";
  for (const auto& [name, value] : assignment_for(exact))
    heredoc << name << " " << value << "\n";
  heredoc << "EOF\n";
  const std::string good_cmd = write_script(dir, "good.sh", heredoc.str());

  SetTspConfig cfg;
  cfg.backend = SetTspConfig::Backend::external_milp;

  SECTION("a correct answer round trips through lp, subprocess and parse") {
    cfg.solver_cmd = good_cmd;
    SetTour tour = solve_set_tsp(fx.sys, costs, cfg, dir);
    CHECK(tour.backend == "external_milp");
    CHECK(tour.cost_h == Catch::Approx(exact.cost_h).margin(1e-9));
    CHECK(std::filesystem::exists(dir + "/model.lp"));
    // The exported model must itself parse back.
    CHECK(parse_lp(dir + "/model.lp").constraints.size() > 0);
  }
  SECTION("a time budget wraps the command without breaking it") {
    cfg.solver_cmd = good_cmd;
    cfg.budget_s = 5.0;
    SetTour tour = solve_set_tsp(fx.sys, costs, cfg, dir);
    CHECK(tour.cost_h == Catch::Approx(exact.cost_h).margin(1e-9));
  }
  SECTION("a missing workdir is created on demand") {
    // The pipeline hands each group a fresh scratch subdirectory; the
    // backend must not require the caller to have created it.
    const std::string fresh = dir + "/fresh/nested";
    std::filesystem::remove_all(dir + "/fresh");
    cfg.solver_cmd = good_cmd;
    SetTour tour = solve_set_tsp(fx.sys, costs, cfg, fresh);
    CHECK(tour.cost_h == Catch::Approx(exact.cost_h).margin(1e-9));
    CHECK(std::filesystem::exists(fresh + "/model.lp"));
  }
  SECTION("missing solver command") {
    const auto msg =
        backend_error_message([&] { solve_set_tsp(fx.sys, costs, cfg, dir); });
    CHECK(msg.find("no solver command configured") != std::string::npos);
  }
  SECTION("nonzero exit status") {
    cfg.solver_cmd = write_script(dir, "fail.sh", "exit 3\n");
    const auto msg =
        backend_error_message([&] { solve_set_tsp(fx.sys, costs, cfg, dir); });
    CHECK(msg.find("solver command failed") != std::string::npos);
  }
  SECTION("no output file") {
    cfg.solver_cmd = write_script(dir, "silent.sh", "exit 0\n");
    const auto msg =
        backend_error_message([&] { solve_set_tsp(fx.sys, costs, cfg, dir); });
    CHECK(msg.find("solver produced no output file") != std::string::npos);
  }
  SECTION("garbage output") {
    cfg.solver_cmd =
        write_script(dir, "garbage.sh", "printf 'b_0_4 banana\\n' > \"$2\"\n");
    const auto msg =
        backend_error_message([&] { solve_set_tsp(fx.sys, costs, cfg, dir); });
    CHECK(msg.find("invalid solver output at line 1") != std::string::npos);
  }
}

TEST_CASE("backend auto selection", "[settsp]") {
  const Instance inst = grid_instance(3, 3, 0.8, {0}, {4, 8},
                                      make_params(30, 48, 1.6, 2));
  Fixture fx(inst, 0, {4, 8}, 0.8, SetSystemMode::full);
  auto costs = fx.costs();

  SECTION("within caps the exact dp wins") {
    CHECK(solve_set_tsp(fx.sys, costs).backend == "exact_dp");
  }
  SECTION("beyond caps without a solver the greedy runs") {
    SetTspConfig cfg;
    cfg.exact_customer_cap = 1;
    CHECK(solve_set_tsp(fx.sys, costs, cfg).backend == "greedy_ls");
  }
  SECTION("beyond caps a configured solver is preferred") {
    const SetTour exact = detail::set_tsp_exact_dp(fx.sys, costs);
    const std::string dir = "/tmp/mafstsp_test_settsp/auto";
    std::ostringstream heredoc;
    heredoc << "cat > \"$2\" <<'EOF'\n";
    for (const auto& [name, value] : assignment_for(exact))
      heredoc << name << " " << value << "\n";
    heredoc << "EOF\n";
    SetTspConfig cfg;
    cfg.exact_customer_cap = 1;
    cfg.solver_cmd = write_script(dir, "auto.sh", heredoc.str());
    SetTour tour = solve_set_tsp(fx.sys, costs, cfg, dir);
    CHECK(tour.backend == "external_milp");
    CHECK(tour.cost_h == Catch::Approx(exact.cost_h).margin(1e-9));
  }
}

TEST_CASE("set tour json round trip", "[settsp]") {
  SetTour t;
  t.depot = 3;
  t.order = {5, 2};
  t.service = {{4, 6}, {2, 2}};
  t.cost_h = 0.125;
  t.backend = "exact_dp";
  const auto j = set_tour_to_json(t);
  const SetTour back = set_tour_from_json(j);
  CHECK(back.depot == t.depot);
  CHECK(back.order == t.order);
  CHECK(back.service == t.service);
  CHECK(back.cost_h == t.cost_h);
  CHECK(back.backend == t.backend);
  CHECK_THROWS_WITH(set_tour_from_json(nlohmann::json{{"depot", 1}}),
                    Catch::Matchers::ContainsSubstring("set tour JSON"));
}
