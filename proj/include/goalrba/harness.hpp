#pragma once

// Scenario orchestration: per round sample gains, collect (Delta_j, w_j)
// reports, allocate RBs under the chosen policy, ingest the selected EDs' data
// and record metrics.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "goalrba/allocator.hpp"
#include "goalrba/channel.hpp"
#include "goalrba/config.hpp"
#include "goalrba/errors.hpp"
#include "goalrba/random.hpp"
#include "goalrba/workload.hpp"

namespace goalrba {

struct RoundMetrics {
  int round = 0;
  Policy policy = Policy::kHybrid;
  std::uint64_t seed = 0;
  std::int64_t throughput = 0;
  double utility_gain = 0.0;  // C(z_old) - C(z_new)
  double goal_value = 0.0;    // C(z_new)
  double wall_ms = 0.0;

  // Not part of the CSV.
  double goal_before = 0.0;
  double reported_value = 0.0;  // sum of selected Delta_j as reported
  std::int64_t capacity_used = 0;
  std::vector<int> selected;
  double progress = 0.0;

  bool operator==(const RoundMetrics& o) const {
    return round == o.round && policy == o.policy && seed == o.seed && throughput == o.throughput &&
           utility_gain == o.utility_gain && goal_value == o.goal_value && wall_ms == o.wall_ms;
  }
};

inline std::unique_ptr<Workload> make_workload(const ScenarioConfig& c) {
  switch (c.workload) {
    case WorkloadKind::kDemandResponse: return std::make_unique<DemandResponseWorkload>(c.demand_response, c.seed);
    case WorkloadKind::kRouting: return std::make_unique<RoutingWorkload>(c.routing, c.seed);
    case WorkloadKind::kEdgeLearning: return std::make_unique<EdgeLearningWorkload>(c.edge_learning, c.seed);
    case WorkloadKind::kFederated: return std::make_unique<FederatedWorkload>(c.federated, c.seed);
    case WorkloadKind::kAdmm: return std::make_unique<AdmmWorkload>(c.admm, c.seed);
  }
  throw ConfigError("unknown workload");
}

struct RoundContext {
  const Workload& workload;
  const std::vector<double>& gains;
  const std::vector<UtilityReport>& reports;
  const Allocation& allocation;
  const RoundMetrics& metrics;
};

using RoundObserver = std::function<void(const RoundContext&)>;

// Drives an existing workload; the workload has already begun round 0 (its
// constructor does so), later rounds are advanced here. Channel draws depend
// only on (seed, round), so every policy faces the same gains.
inline std::vector<RoundMetrics> run_scenario(const ScenarioConfig& c, Workload& workload,
                                              const RoundObserver& observer = {}) {
  if (c.rounds < 1) throw ConfigError("rounds must be >= 1");
  if (c.capacity < 0) throw ConfigError("capacity must be >= 0");
  std::vector<RoundMetrics> out;
  out.reserve(static_cast<std::size_t>(c.rounds));
  for (int k = 0; k < c.rounds; ++k) {
    try {
      const auto t0 = std::chrono::steady_clock::now();
      if (k > 0) workload.begin_round(k);
      RoundMetrics m;
      m.round = k;
      m.policy = c.policy;
      m.seed = c.seed;
      m.goal_before = workload.goal_value();

      const auto gains = sample_gains(derive_seed(c.seed, kStreamGains, static_cast<std::uint64_t>(k)),
                                      workload.num_eds());
      UtilityOptions uopt{c.utility_mode, c.utility_samples,
                          derive_seed(c.seed, kStreamExpected, static_cast<std::uint64_t>(k))};
      const auto reports = collect_reports(workload, gains, c.rb, c.power_w, uopt);
      const Allocation alloc = allocate(c.policy, gains, reports, c.capacity, c.halt);
      if (!allocation_is_consistent(alloc, reports, c.capacity)) {
        throw Error("allocation violates the RB budget or demand constraints");
      }
      m.throughput = workload.transmitted_units(alloc.selected);
      m.reported_value = alloc.value;
      m.capacity_used = alloc.capacity_used;
      m.selected = alloc.selected;

      workload.ingest(alloc.selected);
      m.goal_value = workload.goal_value();
      m.utility_gain = m.goal_before - m.goal_value;
      m.progress = workload.progress();
      if (c.timing) {
        m.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      }
      out.push_back(m);
      if (observer) observer(RoundContext{workload, gains, reports, alloc, out.back()});
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw Error(std::string(to_string(c.workload)) + " round " + std::to_string(k) + ": " + e.what());
    }
  }
  return out;
}

inline std::vector<RoundMetrics> run_scenario(const ScenarioConfig& c, const RoundObserver& observer = {}) {
  auto workload = make_workload(c);
  return run_scenario(c, *workload, observer);
}

// The three policies on shared seeds, in channel, utility, hybrid order.
struct Comparison {
  std::vector<std::vector<RoundMetrics>> runs;
};

inline void normalize_per_round_max(std::vector<std::vector<RoundMetrics>>& runs) {
  if (runs.empty()) return;
  for (std::size_t k = 0; k < runs.front().size(); ++k) {
    double best = 0.0;
    for (const auto& r : runs) best = std::max(best, r.at(k).utility_gain);
    if (best <= 0.0) continue;
    for (auto& r : runs) r[k].utility_gain /= best;
  }
}

inline Comparison run_comparison(const ScenarioConfig& base) {
  Comparison cmp;
  for (Policy p : {Policy::kChannel, Policy::kUtility, Policy::kHybrid}) {
    ScenarioConfig c = base;
    c.policy = p;
    cmp.runs.push_back(run_scenario(c));
  }
  if (base.normalization == Normalization::kPerRoundMax) normalize_per_round_max(cmp.runs);
  return cmp;
}

// ---------------------------------------------------------------------------
// CSV

inline constexpr const char* kMetricsHeader = "round,policy,seed,throughput,utility_gain,goal_value,wall_ms";

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline void write_metrics_csv(std::ostream& os, const std::vector<RoundMetrics>& metrics) {
  os << kMetricsHeader << '\n';
  for (const auto& m : metrics) {
    os << m.round << ',' << to_string(m.policy) << ',' << m.seed << ',' << m.throughput << ','
       << detail::format_double(m.utility_gain) << ',' << detail::format_double(m.goal_value) << ','
       << detail::format_double(m.wall_ms) << '\n';
  }
}

inline void emit_metrics(const std::vector<RoundMetrics>& metrics, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open metrics file for writing: " + path.string());
  write_metrics_csv(out, metrics);
  out.flush();
  if (!out) throw Error("failed writing metrics file: " + path.string());
}

inline std::vector<RoundMetrics> parse_metrics_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kMetricsHeader) throw Error("metrics CSV: bad or missing header");
  std::vector<RoundMetrics> out;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 7) throw Error("metrics CSV line " + std::to_string(lineno) + ": expected 7 fields");
    try {
      RoundMetrics m;
      m.round = std::stoi(f[0]);
      m.policy = parse_policy(f[1]);
      m.seed = std::stoull(f[2]);
      m.throughput = std::stoll(f[3]);
      m.utility_gain = std::stod(f[4]);
      m.goal_value = std::stod(f[5]);
      m.wall_ms = std::stod(f[6]);
      out.push_back(m);
    } catch (const std::exception& e) {
      throw Error("metrics CSV line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

inline std::vector<RoundMetrics> read_metrics(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open metrics file: " + path.string());
  return parse_metrics_csv(in);
}

}  // namespace goalrba
