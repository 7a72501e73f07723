#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "goalrba/decision.hpp"

using namespace goalrba;

namespace {

DrInstance two_ed() {
  DrInstance inst;
  inst.costs = {1.0, 2.0};
  inst.xi_lo = {1.0, 1.0};
  inst.xi_hi = {10.0, 10.0};
  inst.pi_min = 2.0;
  return inst;
}

// Exhaustive vertex enumeration of the covering LP: every vertex has all
// coordinates at a bound except at most one fractional coordinate.
double vertex_enumeration_cost(const DrInstance& inst) {
  const auto cap = inst.effective_capacity();
  const std::size_t n = cap.size();
  double best = std::numeric_limits<double>::infinity();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    double sum = 0, cost = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (mask >> j & 1) {
        sum += cap[j];
        cost += inst.costs[j] * cap[j];
      }
    }
    if (sum >= inst.pi_min - 1e-12) best = std::min(best, cost);
    for (std::size_t f = 0; f < n; ++f) {
      if (mask >> f & 1) continue;
      const double need = inst.pi_min - sum;
      if (need >= 0 && need <= cap[f]) best = std::min(best, cost + inst.costs[f] * need);
    }
  }
  return best;
}

DrInstance random_instance(Rng& rng, int n) {
  DrInstance inst;
  for (int j = 0; j < n; ++j) {
    inst.costs.push_back(uniform(rng, 0, 5));
    inst.xi_lo.push_back(uniform(rng, 0.5, 2));
    inst.xi_hi.push_back(inst.xi_lo.back() + uniform(rng, 0, 20));
  }
  double lo = 0;
  for (double v : inst.xi_lo) lo += v;
  inst.pi_min = uniform(rng, 0, lo);
  for (int j = 0; j < n; ++j) {
    if (uniform01(rng) < 0.4) {
      const auto u = static_cast<std::size_t>(j);
      inst.known[j] = uniform(rng, inst.xi_lo[u], inst.xi_hi[u]);
    }
  }
  return inst;
}

// s=0, a=1, t=2: s->a (1), a->t (1) known; s->t unknown in [1, 5].
RoutingInstance three_node() {
  RoutingInstance inst;
  inst.num_nodes = 3;
  inst.source = 0;
  inst.destination = 2;
  inst.roads = {{0, 1, 1, 1}, {1, 2, 1, 1}, {0, 2, 1, 5}};
  inst.known = {{0, 1.0}, {1, 1.0}};
  return inst;
}

double floyd_warshall(const RoutingInstance& inst) {
  const auto n = static_cast<std::size_t>(inst.num_nodes);
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, inf));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0;
  const auto t = inst.effective_times();
  for (std::size_t e = 0; e < inst.roads.size(); ++e) {
    auto& cell = d[static_cast<std::size_t>(inst.roads[e].from)][static_cast<std::size_t>(inst.roads[e].to)];
    cell = std::min(cell, t[e]);
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  return d[static_cast<std::size_t>(inst.source)][static_cast<std::size_t>(inst.destination)];
}

}  // namespace

TEST(SolveDr, HandLpExamples) {
  auto inst = two_ed();
  auto sol = solve_dr(inst);
  EXPECT_DOUBLE_EQ(sol.cost, 3.0);
  EXPECT_EQ(sol.reductions, (std::vector<double>{1.0, 1.0}));
  inst.known[0] = 10.0;
  sol = solve_dr(inst);
  EXPECT_DOUBLE_EQ(sol.cost, 2.0);
  EXPECT_EQ(sol.reductions, (std::vector<double>{2.0, 0.0}));
  inst.pi_min = 0;
  EXPECT_EQ(solve_dr(inst).cost, 0.0);
}

TEST(SolveDr, Infeasible) {
  auto inst = two_ed();
  inst.pi_min = 2.5;
  try {
    solve_dr(inst);
    FAIL();
  } catch (const InfeasibleError& e) {
    EXPECT_NE(std::string(e.what()).find("insufficient shedding capacity"), std::string::npos);
  }
}

TEST(SolveDr, Validation) {
  auto inst = two_ed();
  inst.known[0] = 11.0;
  EXPECT_THROW(solve_dr(inst), std::invalid_argument);
  inst = two_ed();
  inst.xi_hi[1] = 0.5;
  EXPECT_THROW(solve_dr(inst), std::invalid_argument);
}

TEST(SolveDr, MatchesVertexEnumeration) {
  Rng rng(31);
  for (int trial = 0; trial < 400; ++trial) {
    const auto inst = random_instance(rng, 1 + static_cast<int>(uniform_index(rng, 8)));
    EXPECT_NEAR(solve_dr(inst).cost, vertex_enumeration_cost(inst), 1e-9);
  }
}

TEST(SolveDr, EqualCostTiesDispatchInIdOrder) {
  DrInstance inst;
  inst.costs = {1.0, 1.0, 1.0};
  inst.xi_lo = {1, 1, 1};
  inst.xi_hi = {1, 1, 1};
  inst.pi_min = 1.5;
  EXPECT_EQ(solve_dr(inst).reductions, (std::vector<double>{1.0, 0.5, 0.0}));
}

TEST(CoverLp, OverrideMatchesFullResolve) {
  Rng rng(41);
  for (int trial = 0; trial < 300; ++trial) {
    auto inst = random_instance(rng, 2 + static_cast<int>(uniform_index(rng, 30)));
    const CoverLp lp(inst.costs, inst.effective_capacity(), inst.pi_min);
    EXPECT_NEAR(lp.cost(), solve_dr(inst).cost, 1e-9);
    const auto j = static_cast<int>(uniform_index(rng, inst.size()));
    const auto u = static_cast<std::size_t>(j);
    const double v = uniform(rng, inst.xi_lo[u], inst.xi_hi[u]);
    DrInstance with = inst;
    with.known[j] = v;
    EXPECT_NEAR(lp.cost_with_override(u, v), solve_dr(with).cost, 1e-9);
  }
}

TEST(DrMarginal, Examples) {
  const auto inst = two_ed();
  EXPECT_DOUBLE_EQ(dr_marginal_utility(inst, 0, 10.0), 1.0);
  EXPECT_DOUBLE_EQ(dr_marginal_utility(inst, 0, 1.0), 0.0);
  DrInstance pricey = two_ed();
  pricey.costs = {1.0, 100.0};
  pricey.xi_lo = {2.0, 1.0};
  EXPECT_DOUBLE_EQ(dr_marginal_utility(pricey, 1, 10.0), 0.0);
}

TEST(DrMarginal, MonotoneInRevelations) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    auto inst = random_instance(rng, 6);
    inst.known.clear();
    double prev = solve_dr(inst).cost;
    for (int j = 0; j < 6; ++j) {
      const auto u = static_cast<std::size_t>(j);
      inst.known[j] = uniform(rng, inst.xi_lo[u], inst.xi_hi[u]);
      const double cur = solve_dr(inst).cost;
      EXPECT_LE(cur, prev + 1e-12);
      prev = cur;
    }
  }
}

TEST(Routing, Examples) {
  auto inst = three_node();
  auto sol = solve_routing(inst);
  EXPECT_DOUBLE_EQ(sol.time, 2.0);
  EXPECT_EQ(sol.path, (std::vector<int>{0, 1, 2}));
  EXPECT_DOUBLE_EQ(routing_marginal_utility(inst, 2, 1.0), 1.0);
  inst.known[2] = 1.0;
  sol = solve_routing(inst);
  EXPECT_DOUBLE_EQ(sol.time, 1.0);
  EXPECT_EQ(sol.path, (std::vector<int>{0, 2}));

  RoutingInstance single;
  single.num_nodes = 2;
  single.roads = {{0, 1, 7, 7}};
  single.known[0] = 7.0;
  EXPECT_DOUBLE_EQ(solve_routing(single).time, 7.0);
}

TEST(Routing, ZeroGainCases) {
  auto inst = three_node();
  EXPECT_DOUBLE_EQ(routing_marginal_utility(inst, 2, 5.0), 0.0);
  // A dead-end road off the path.
  inst.num_nodes = 4;
  inst.roads.push_back({1, 3, 1, 9});
  EXPECT_DOUBLE_EQ(routing_marginal_utility(inst, 3, 1.0), 0.0);
}

TEST(Routing, NoPath) {
  RoutingInstance inst;
  inst.num_nodes = 3;
  inst.roads = {{0, 1, 1, 1}};
  inst.destination = 2;
  EXPECT_THROW(solve_routing(inst), NoPathError);
}

TEST(Routing, DijkstraMatchesFloydWarshall) {
  Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    RoutingInstance inst;
    inst.num_nodes = 3 + static_cast<int>(uniform_index(rng, 8));
    inst.source = 0;
    inst.destination = inst.num_nodes - 1;
    for (int i = 0; i < inst.num_nodes - 1; ++i) inst.roads.push_back({i, i + 1, 1, uniform(rng, 1, 9)});
    const int extra = static_cast<int>(uniform_index(rng, 20));
    for (int e = 0; e < extra; ++e) {
      const int a = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(inst.num_nodes)));
      const int b = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(inst.num_nodes)));
      const double lo = uniform(rng, 0, 5);
      inst.roads.push_back({a, b, lo, lo + uniform(rng, 0, 10)});
    }
    for (std::size_t e = 0; e < inst.roads.size(); ++e) {
      if (uniform01(rng) < 0.3) inst.known[static_cast<int>(e)] = uniform(rng, inst.roads[e].tau_lo, inst.roads[e].tau_hi);
    }
    const auto sol = solve_routing(inst);
    EXPECT_NEAR(sol.time, floyd_warshall(inst), 1e-9);
    // The returned path is consistent with its time.
    double along = 0;
    const auto t = inst.effective_times();
    for (std::size_t k = 0; k + 1 < sol.path.size(); ++k) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t e = 0; e < inst.roads.size(); ++e) {
        if (inst.roads[e].from == sol.path[k] && inst.roads[e].to == sol.path[k + 1]) best = std::min(best, t[e]);
      }
      along += best;
    }
    EXPECT_NEAR(along, sol.time, 1e-9);
  }
}

TEST(Routing, RevelationsNeverLengthen) {
  RoutingWorkload w(RoutingParams{}, 3);
  const double before = w.goal_value();
  std::vector<int> all(static_cast<std::size_t>(w.num_eds()));
  std::iota(all.begin(), all.end(), 0);
  double prev = before;
  for (int e : all) {
    const int one[] = {e};
    w.ingest(one);
    EXPECT_LE(w.goal_value(), prev + 1e-12);
    prev = w.goal_value();
  }
}

TEST(DemandResponseWorkload, GeneratorShapeAndDeterminism) {
  DemandResponseParams p;
  p.num_eds = 50;
  DemandResponseWorkload a(p, 9), b(p, 9);
  EXPECT_EQ(a.instance().costs, b.instance().costs);
  EXPECT_EQ(a.realtime(), b.realtime());
  EXPECT_NEAR(a.instance().pi_min, 50.0 * 10000.0 / 15000.0, 1e-12);
  for (std::size_t j = 0; j < 50; ++j) {
    EXPECT_GE(a.instance().costs[j], 0.0);
    EXPECT_LE(a.instance().costs[j], 5.0);
    EXPECT_EQ(a.instance().xi_lo[j], 1.0);
    EXPECT_LE(a.instance().xi_hi[j], 30.0);
    EXPECT_GE(a.realtime()[j], 1.0);
    EXPECT_LE(a.realtime()[j], a.instance().xi_hi[j]);
  }
  EXPECT_EQ(a.payload_bits(0), 512.0);
}

TEST(DemandResponseWorkload, ExactDeltaMatchesResolveAndGainIdentity) {
  DemandResponseParams p;
  p.num_eds = 40;
  DemandResponseWorkload w(p, 4);
  const auto deltas = w.marginal_utilities();
  for (const auto& d : deltas) {
    EXPECT_NEAR(d.delta, std::max(0.0, dr_marginal_utility(w.instance(), d.ed_id, w.realtime()[static_cast<std::size_t>(d.ed_id)])), 1e-9);
  }
  const std::vector<int> sel{1, 5, 7, 20};
  const double before = w.goal_value();
  const double hypo = w.goal_value_if_ingested(sel);
  w.ingest(sel);
  DrInstance check = w.instance();
  EXPECT_NEAR(w.goal_value(), solve_dr(check).cost, 1e-9);
  EXPECT_NEAR(before - w.goal_value(), before - hypo, 1e-9);
  EXPECT_GE(before - w.goal_value(), -1e-12);
}

TEST(DemandResponseWorkload, RoundsAreFreshScenarios) {
  DemandResponseParams p;
  p.num_eds = 30;
  DemandResponseWorkload w(p, 2);
  const auto rt0 = w.realtime();
  const double c0 = w.goal_value();
  const std::vector<int> sel{0, 1, 2};
  w.ingest(sel);
  w.begin_round(1);
  EXPECT_TRUE(w.instance().known.empty());
  EXPECT_NE(w.realtime(), rt0);
  EXPECT_DOUBLE_EQ(w.goal_value(), c0);  // all-unknown worst case is round-invariant
}
