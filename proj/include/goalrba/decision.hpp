#pragma once

// Data-driven decision workloads. The operator decides robustly: quantities it
// has not measured this interval take their worst value over the support
// (smallest reducible load, slowest travel time).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "goalrba/errors.hpp"
#include "goalrba/random.hpp"
#include "goalrba/workload.hpp"

namespace goalrba {

// ---------------------------------------------------------------------------
// Emergency demand response: min sum c_j pi_j  s.t.  sum pi_j >= pi_min,
// 0 <= pi_j <= xi_j.

struct DrInstance {
  std::vector<double> costs;    // $/kW
  std::vector<double> xi_lo;    // support lower bound, kW
  std::vector<double> xi_hi;    // support upper bound, kW
  double pi_min = 0.0;          // kW
  std::map<int, double> known;  // revealed real-time capacity

  std::size_t size() const { return costs.size(); }

  void validate() const {
    if (xi_lo.size() != costs.size() || xi_hi.size() != costs.size()) {
      throw std::invalid_argument("DrInstance: size mismatch");
    }
    if (!(pi_min >= 0)) throw std::invalid_argument("DrInstance: pi_min < 0");
    for (std::size_t j = 0; j < size(); ++j) {
      if (!(xi_lo[j] >= 0 && xi_lo[j] <= xi_hi[j])) {
        throw std::invalid_argument("DrInstance: bad support for ed " + std::to_string(j));
      }
    }
    for (const auto& [id, v] : known) {
      if (id < 0 || static_cast<std::size_t>(id) >= size()) {
        throw std::invalid_argument("DrInstance: unknown ed " + std::to_string(id));
      }
      const auto j = static_cast<std::size_t>(id);
      if (!(v >= xi_lo[j] && v <= xi_hi[j])) {
        throw std::invalid_argument("DrInstance: revealed value outside support for ed " +
                                    std::to_string(id));
      }
    }
  }

  // Worst-case capacity: revealed value if known, else the support minimum.
  std::vector<double> effective_capacity() const {
    std::vector<double> cap = xi_lo;
    for (const auto& [id, v] : known) cap[static_cast<std::size_t>(id)] = v;
    return cap;
  }
};

struct DrSolution {
  double cost = 0.0;
  std::vector<double> reductions;
};

namespace detail {

inline double feasibility_slack(double demand) { return 1e-9 * std::max(1.0, demand); }

}  // namespace detail

// Continuous covering LP. Filling cheapest-first (ties by ed_id) is exact.
// Prefix sums over the sorted order let one ED's capacity be overridden in
// O(log J), which is what marginal-gain evaluation needs.
class CoverLp {
 public:
  CoverLp(std::span<const double> costs, std::span<const double> caps, double demand)
      : demand_(demand), costs_(costs.begin(), costs.end()), caps_(caps.begin(), caps.end()) {
    const std::size_t n = costs_.size();
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
      if (costs_[a] != costs_[b]) return costs_[a] < costs_[b];
      return a < b;
    });
    pos_.resize(n);
    cum_cap_.assign(n + 1, 0.0);
    cum_cost_.assign(n + 1, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t j = order_[k];
      pos_[j] = k;
      cum_cap_[k + 1] = cum_cap_[k] + caps_[j];
      cum_cost_[k + 1] = cum_cost_[k] + costs_[j] * caps_[j];
    }
  }

  double cost() const { return cost_with_override(npos, 0.0); }

  // Optimal cost if ED `ed`'s capacity were `cap` instead.
  double cost_with_override(std::size_t ed, double cap) const {
    if (demand_ <= 0) return 0.0;
    const std::size_t n = order_.size();
    std::size_t p = n;  // prefix entries k > p are shifted
    double dcap = 0.0;
    double dcost = 0.0;
    if (ed != npos) {
      p = pos_[ed];
      dcap = cap - caps_[ed];
      dcost = costs_[ed] * dcap;
    }
    auto cap_at = [&](std::size_t k) { return cum_cap_[k] + (k > p ? dcap : 0.0); };
    auto cost_at = [&](std::size_t k) { return cum_cost_[k] + (k > p ? dcost : 0.0); };
    if (cap_at(n) < demand_ - detail::feasibility_slack(demand_)) {
      throw InfeasibleError("insufficient shedding capacity: " + std::to_string(cap_at(n)) +
                            " kW < " + std::to_string(demand_) + " kW");
    }
    // smallest k >= 1 with cap_at(k) >= demand
    std::size_t lo = 1, hi = n;
    while (lo < hi) {
      const std::size_t mid = lo + (hi - lo) / 2;
      if (cap_at(mid) >= demand_) {
        hi = mid;
      } else {
        lo = mid + 1;
      }
    }
    const std::size_t k = lo;
    const double marginal_cost = costs_[order_[k - 1]];
    const double remaining = std::max(0.0, demand_ - cap_at(k - 1));
    return cost_at(k - 1) + marginal_cost * remaining;
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  double demand_;
  std::vector<double> costs_;
  std::vector<double> caps_;
  std::vector<std::size_t> order_;
  std::vector<std::size_t> pos_;
  std::vector<double> cum_cap_;
  std::vector<double> cum_cost_;
};

inline DrSolution solve_dr(const DrInstance& instance) {
  instance.validate();
  const auto cap = instance.effective_capacity();
  const double total = std::accumulate(cap.begin(), cap.end(), 0.0);
  if (total < instance.pi_min - detail::feasibility_slack(instance.pi_min)) {
    throw InfeasibleError("insufficient shedding capacity: " + std::to_string(total) + " kW < " +
                          std::to_string(instance.pi_min) + " kW");
  }
  std::vector<std::size_t> order(instance.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (instance.costs[a] != instance.costs[b]) return instance.costs[a] < instance.costs[b];
    return a < b;
  });
  DrSolution sol;
  sol.reductions.assign(instance.size(), 0.0);
  double remaining = instance.pi_min;
  for (std::size_t j : order) {
    if (remaining <= 0) break;
    const double take = std::min(cap[j], remaining);
    sol.reductions[j] = take;
    sol.cost += instance.costs[j] * take;
    remaining -= take;
  }
  return sol;
}

// Cost reduction from learning ED `ed_id`'s real-time capacity.
inline double dr_marginal_utility(const DrInstance& instance, int ed_id, double revealed,
                                  double tolerance = 1e-9) {
  DrInstance with = instance;
  with.known[ed_id] = revealed;
  const double delta = solve_dr(instance).cost - solve_dr(with).cost;
  return delta < 0 && delta > -tolerance ? 0.0 : delta;
}

// ---------------------------------------------------------------------------
// Robust routing: shortest source->destination path where unmeasured roads
// take their maximum travel time.

struct Road {
  int from = 0;
  int to = 0;
  double tau_lo = 0.0;
  double tau_hi = 0.0;
};

struct RoutingInstance {
  int num_nodes = 0;
  std::vector<Road> roads;
  std::map<int, double> known;  // road index -> revealed travel time
  int source = 0;
  int destination = 1;

  void validate() const {
    if (source == destination) throw std::invalid_argument("RoutingInstance: source == destination");
    auto in_range = [&](int v) { return v >= 0 && v < num_nodes; };
    if (!in_range(source) || !in_range(destination)) {
      throw std::invalid_argument("RoutingInstance: endpoint out of range");
    }
    for (const auto& r : roads) {
      if (!in_range(r.from) || !in_range(r.to) || !(r.tau_lo >= 0) || !(r.tau_lo <= r.tau_hi)) {
        throw std::invalid_argument("RoutingInstance: bad road");
      }
    }
    for (const auto& [id, v] : known) {
      if (id < 0 || static_cast<std::size_t>(id) >= roads.size()) {
        throw std::invalid_argument("RoutingInstance: unknown road " + std::to_string(id));
      }
      const auto& r = roads[static_cast<std::size_t>(id)];
      if (!(v >= r.tau_lo && v <= r.tau_hi)) {
        throw std::invalid_argument("RoutingInstance: revealed time outside support");
      }
    }
  }

  std::vector<double> effective_times() const {
    std::vector<double> t(roads.size());
    for (std::size_t i = 0; i < roads.size(); ++i) t[i] = roads[i].tau_hi;
    for (const auto& [id, v] : known) t[static_cast<std::size_t>(id)] = v;
    return t;
  }
};

struct RouteSolution {
  double time = 0.0;
  std::vector<int> path;  // node sequence source..destination
};

namespace detail {

struct Adjacency {
  std::vector<std::vector<int>> out;  // node -> road indices

  explicit Adjacency(const RoutingInstance& inst) : out(static_cast<std::size_t>(inst.num_nodes)) {
    for (std::size_t i = 0; i < inst.roads.size(); ++i) {
      out[static_cast<std::size_t>(inst.roads[i].from)].push_back(static_cast<int>(i));
    }
  }
};

// Dijkstra; returns distances and the incoming road on a shortest path.
inline std::pair<std::vector<double>, std::vector<int>> dijkstra(const RoutingInstance& inst,
                                                                 const Adjacency& adj,
                                                                 std::span<const double> times) {
  const auto n = static_cast<std::size_t>(inst.num_nodes);
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<int> via(n, -1);
  using Entry = std::pair<double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  dist[static_cast<std::size_t>(inst.source)] = 0.0;
  heap.emplace(0.0, inst.source);
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[static_cast<std::size_t>(u)]) continue;
    for (int e : adj.out[static_cast<std::size_t>(u)]) {
      const auto& r = inst.roads[static_cast<std::size_t>(e)];
      const double nd = d + times[static_cast<std::size_t>(e)];
      auto& cur = dist[static_cast<std::size_t>(r.to)];
      if (nd < cur) {
        cur = nd;
        via[static_cast<std::size_t>(r.to)] = e;
        heap.emplace(nd, r.to);
      }
    }
  }
  return {std::move(dist), std::move(via)};
}

inline double shortest_time(const RoutingInstance& inst, const Adjacency& adj,
                            std::span<const double> times) {
  const double t = dijkstra(inst, adj, times).first[static_cast<std::size_t>(inst.destination)];
  if (!std::isfinite(t)) {
    throw NoPathError("no path from node " + std::to_string(inst.source) + " to node " +
                      std::to_string(inst.destination));
  }
  return t;
}

}  // namespace detail

inline RouteSolution solve_routing(const RoutingInstance& instance) {
  instance.validate();
  const detail::Adjacency adj(instance);
  const auto times = instance.effective_times();
  auto [dist, via] = detail::dijkstra(instance, adj, times);
  const auto dst = static_cast<std::size_t>(instance.destination);
  if (!std::isfinite(dist[dst])) {
    throw NoPathError("no path from node " + std::to_string(instance.source) + " to node " +
                      std::to_string(instance.destination));
  }
  RouteSolution sol;
  sol.time = dist[dst];
  for (int v = instance.destination; v != instance.source;) {
    sol.path.push_back(v);
    v = instance.roads[static_cast<std::size_t>(via[static_cast<std::size_t>(v)])].from;
  }
  sol.path.push_back(instance.source);
  std::reverse(sol.path.begin(), sol.path.end());
  return sol;
}

inline double routing_marginal_utility(const RoutingInstance& instance, int road, double revealed) {
  RoutingInstance with = instance;
  with.known[road] = revealed;
  const double delta = solve_routing(instance).time - solve_routing(with).time;
  return std::max(0.0, delta);
}

// ---------------------------------------------------------------------------
// Workloads. Each scheduling interval is a fresh scenario: real-time values are
// redrawn and nothing is known until EDs upload; the history is fixed.

struct DemandResponseParams {
  int num_eds = 500;
  double cost_max = 5.0;           // c_j ~ U[0, cost_max]
  double xi_min = 1.0;             // support lower bound
  double xi_max_cap = 30.0;        // xi_max,j ~ U[xi_min, xi_max_cap]
  double pi_min_per_ed = 10000.0 / 15000.0;
  int history_size = 32;
  int payload_bytes = 64;
};

class DemandResponseWorkload final : public Workload {
 public:
  DemandResponseWorkload(const DemandResponseParams& params, std::uint64_t seed)
      : params_(params), seed_(seed) {
    if (params.num_eds < 1) throw std::invalid_argument("demand_response: num_eds < 1");
    if (params.history_size < 0) throw std::invalid_argument("demand_response: history_size < 0");
    Rng rng(derive_seed(seed, kStreamWorkload));
    const auto n = static_cast<std::size_t>(params.num_eds);
    instance_.costs.resize(n);
    instance_.xi_lo.assign(n, params.xi_min);
    instance_.xi_hi.resize(n);
    history_.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      instance_.costs[j] = uniform(rng, 0.0, params.cost_max);
      instance_.xi_hi[j] = uniform(rng, params.xi_min, params.xi_max_cap);
    }
    for (std::size_t j = 0; j < n; ++j) {
      history_[j].resize(static_cast<std::size_t>(params.history_size));
      for (auto& h : history_[j]) h = uniform(rng, instance_.xi_lo[j], instance_.xi_hi[j]);
    }
    instance_.pi_min = params.pi_min_per_ed * params.num_eds;
    begin_round(0);
  }

  // Wrap an explicit instance (tests, small hand-built cases).
  DemandResponseWorkload(DrInstance instance, std::vector<double> realtime,
                         std::vector<std::vector<double>> history, int payload_bytes = 64)
      : instance_(std::move(instance)), realtime_(std::move(realtime)), history_(std::move(history)) {
    params_.num_eds = static_cast<int>(instance_.size());
    params_.payload_bytes = payload_bytes;
    fixed_realtime_ = true;
    if (realtime_.size() != instance_.size() || history_.size() != instance_.size()) {
      throw std::invalid_argument("demand_response: size mismatch");
    }
    instance_.validate();
    rebuild();
  }

  std::string_view kind() const override { return "demand_response"; }
  int num_eds() const override { return params_.num_eds; }

  void begin_round(int round) override {
    instance_.known.clear();
    if (!fixed_realtime_) {
      Rng rng(derive_seed(seed_, kStreamWorkload, static_cast<std::uint64_t>(round) + 1));
      realtime_.resize(instance_.size());
      for (std::size_t j = 0; j < instance_.size(); ++j) {
        realtime_[j] = uniform(rng, instance_.xi_lo[j], instance_.xi_hi[j]);
      }
    }
    rebuild();
  }

  std::vector<EdUtility> marginal_utilities() const override {
    std::vector<EdUtility> out;
    out.reserve(instance_.size());
    for (std::size_t j = 0; j < instance_.size(); ++j) {
      out.push_back({static_cast<int>(j), gain_if_revealed(j, realtime_[j])});
    }
    return out;
  }

  bool has_sampler() const override { return true; }

  double sampled_marginal_utility(int ed_id, Rng& rng) const override {
    const auto j = static_cast<std::size_t>(ed_id);
    const auto& h = history_.at(j);
    if (h.empty()) {
      throw NoEmpiricalDistribution("no empirical distribution for ed " + std::to_string(ed_id));
    }
    return gain_if_revealed(j, h[uniform_index(rng, h.size())]);
  }

  void ingest(std::span<const int> selected) override {
    for (int id : selected) instance_.known[id] = realtime_.at(static_cast<std::size_t>(id));
    rebuild();
  }

  double goal_value() const override { return base_cost_; }

  double goal_value_if_ingested(std::span<const int> selected) const override {
    DrInstance hypo = instance_;
    for (int id : selected) hypo.known[id] = realtime_.at(static_cast<std::size_t>(id));
    return solve_dr(hypo).cost;
  }

  double payload_bits(int) const override { return 8.0 * params_.payload_bytes; }

  const DrInstance& instance() const { return instance_; }
  const std::vector<double>& realtime() const { return realtime_; }

 private:
  double gain_if_revealed(std::size_t j, double value) const {
    if (instance_.known.count(static_cast<int>(j)) != 0) return 0.0;
    const double delta = base_cost_ - lp_->cost_with_override(j, value);
    return std::max(0.0, delta);
  }

  void rebuild() {
    const auto cap = instance_.effective_capacity();
    lp_.emplace(instance_.costs, cap, instance_.pi_min);
    base_cost_ = lp_->cost();
  }

  DemandResponseParams params_;
  std::uint64_t seed_ = 0;
  bool fixed_realtime_ = false;
  DrInstance instance_;
  std::vector<double> realtime_;
  std::vector<std::vector<double>> history_;
  std::optional<CoverLp> lp_;
  double base_cost_ = 0.0;
};

struct RoutingParams {
  int grid_size = 5;          // grid_size x grid_size nodes, roads both ways
  double tau_lo_max = 5.0;    // tau_lo ~ U[1, tau_lo_max]
  double spread_max = 10.0;   // tau_hi = tau_lo + U[0, spread_max]
  int history_size = 32;
  int payload_bytes = 64;
};

class RoutingWorkload final : public Workload {
 public:
  RoutingWorkload(const RoutingParams& params, std::uint64_t seed) : params_(params), seed_(seed) {
    if (params.grid_size < 2) throw std::invalid_argument("routing: grid_size < 2");
    Rng rng(derive_seed(seed, kStreamWorkload));
    const int g = params.grid_size;
    instance_.num_nodes = g * g;
    instance_.source = 0;
    instance_.destination = g * g - 1;
    auto add = [&](int a, int b) {
      const double lo = uniform(rng, 1.0, params.tau_lo_max);
      instance_.roads.push_back({a, b, lo, lo + uniform(rng, 0.0, params.spread_max)});
    };
    for (int r = 0; r < g; ++r) {
      for (int c = 0; c < g; ++c) {
        const int v = r * g + c;
        if (c + 1 < g) {
          add(v, v + 1);
          add(v + 1, v);
        }
        if (r + 1 < g) {
          add(v, v + g);
          add(v + g, v);
        }
      }
    }
    history_.resize(instance_.roads.size());
    for (std::size_t e = 0; e < history_.size(); ++e) {
      history_[e].resize(static_cast<std::size_t>(params.history_size));
      for (auto& h : history_[e]) h = uniform(rng, instance_.roads[e].tau_lo, instance_.roads[e].tau_hi);
    }
    begin_round(0);
  }

  RoutingWorkload(RoutingInstance instance, std::vector<double> realtime,
                  std::vector<std::vector<double>> history, int payload_bytes = 64)
      : instance_(std::move(instance)), realtime_(std::move(realtime)), history_(std::move(history)) {
    params_.payload_bytes = payload_bytes;
    fixed_realtime_ = true;
    if (realtime_.size() != instance_.roads.size() || history_.size() != instance_.roads.size()) {
      throw std::invalid_argument("routing: size mismatch");
    }
    instance_.validate();
    rebuild();
  }

  std::string_view kind() const override { return "routing"; }
  int num_eds() const override { return static_cast<int>(instance_.roads.size()); }

  void begin_round(int round) override {
    instance_.known.clear();
    if (!fixed_realtime_) {
      Rng rng(derive_seed(seed_, kStreamWorkload, static_cast<std::uint64_t>(round) + 1));
      realtime_.resize(instance_.roads.size());
      for (std::size_t e = 0; e < realtime_.size(); ++e) {
        realtime_[e] = uniform(rng, instance_.roads[e].tau_lo, instance_.roads[e].tau_hi);
      }
    }
    rebuild();
  }

  std::vector<EdUtility> marginal_utilities() const override {
    std::vector<EdUtility> out;
    for (std::size_t e = 0; e < instance_.roads.size(); ++e) {
      out.push_back({static_cast<int>(e), gain_if_revealed(e, realtime_[e])});
    }
    return out;
  }

  bool has_sampler() const override { return true; }

  double sampled_marginal_utility(int ed_id, Rng& rng) const override {
    const auto e = static_cast<std::size_t>(ed_id);
    const auto& h = history_.at(e);
    if (h.empty()) {
      throw NoEmpiricalDistribution("no empirical distribution for road " + std::to_string(ed_id));
    }
    return gain_if_revealed(e, h[uniform_index(rng, h.size())]);
  }

  void ingest(std::span<const int> selected) override {
    for (int id : selected) instance_.known[id] = realtime_.at(static_cast<std::size_t>(id));
    rebuild();
  }

  double goal_value() const override { return base_time_; }

  double goal_value_if_ingested(std::span<const int> selected) const override {
    RoutingInstance hypo = instance_;
    for (int id : selected) hypo.known[id] = realtime_.at(static_cast<std::size_t>(id));
    return solve_routing(hypo).time;
  }

  double payload_bits(int) const override { return 8.0 * params_.payload_bytes; }

  const RoutingInstance& instance() const { return instance_; }
  const std::vector<double>& realtime() const { return realtime_; }

 private:
  double gain_if_revealed(std::size_t e, double value) const {
    if (instance_.known.count(static_cast<int>(e)) != 0) return 0.0;
    if (value >= times_[e]) return 0.0;
    std::vector<double> t = times_;
    t[e] = value;
    return std::max(0.0, base_time_ - detail::shortest_time(instance_, *adj_, t));
  }

  void rebuild() {
    adj_.emplace(instance_);
    times_ = instance_.effective_times();
    base_time_ = detail::shortest_time(instance_, *adj_, times_);
  }

  RoutingParams params_;
  std::uint64_t seed_ = 0;
  bool fixed_realtime_ = false;
  RoutingInstance instance_;
  std::vector<double> realtime_;
  std::vector<std::vector<double>> history_;
  std::optional<detail::Adjacency> adj_;
  std::vector<double> times_;
  double base_time_ = 0.0;
};

}  // namespace goalrba
