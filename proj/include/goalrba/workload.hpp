#pragma once

// The contract every goal workload satisfies, plus the machinery that turns a
// workload and a channel realization into knapsack items.

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "goalrba/allocator.hpp"
#include "goalrba/channel.hpp"
#include "goalrba/errors.hpp"
#include "goalrba/random.hpp"

namespace goalrba {

struct EdUtility {
  int ed_id = 0;
  double delta = 0.0;
};

// A pluggable CPS goal. Lower goal_value() is better; ingesting data must not
// raise it (information positivity). Per-round flow:
//   begin_round -> marginal_utilities (const, parallel-safe) -> ingest.
class Workload {
 public:
  virtual ~Workload() = default;

  virtual std::string_view kind() const = 0;
  virtual int num_eds() const = 0;

  // Advance to scheduling interval `round`: draw fresh ED data, broadcast the
  // current model, precompute per-ED candidates, etc.
  virtual void begin_round(int round) { (void)round; }

  // Delta_j of every ED against the operator's current data.
  virtual std::vector<EdUtility> marginal_utilities() const = 0;

  // Draws z_j+ from the empirical distribution of the operator's history and
  // returns the resulting Delta_j.
  virtual bool has_sampler() const { return false; }
  virtual double sampled_marginal_utility(int ed_id, Rng& rng) const {
    (void)rng;
    throw NoEmpiricalDistribution("no empirical distribution for ed " + std::to_string(ed_id));
  }

  // z_new = z_old U { z_j+ : j selected }.
  virtual void ingest(std::span<const int> selected) = 0;

  virtual double goal_value() const = 0;

  // C(z_old U selected data) without mutating state. Only workloads with a
  // cheap exact re-solve implement this.
  virtual double goal_value_if_ingested(std::span<const int> selected) const {
    (void)selected;
    throw std::logic_error(std::string(kind()) + ": hypothetical goal evaluation unsupported");
  }

  // r_min contribution of ED j this round, in bits.
  virtual double payload_bits(int ed_id) const = 0;

  // Throughput units carried by a selection (EDs by default; samples for
  // workloads that upload batches).
  virtual std::int64_t transmitted_units(std::span<const int> selected) const {
    return static_cast<std::int64_t>(selected.size());
  }

  // Workload-specific progress indicator (test accuracy, relative gap); NaN
  // when not applicable.
  virtual double progress() const { return std::numeric_limits<double>::quiet_NaN(); }
};

struct GainLedger {
  int round = 0;
  std::vector<EdUtility> deltas;
  double realized_gain = 0.0;  // C(z_old) - C(z_new)
};

enum class UtilityMode { kExact, kExpected };

inline std::string_view to_string(UtilityMode m) {
  return m == UtilityMode::kExact ? "exact" : "expected";
}

inline UtilityMode parse_utility_mode(std::string_view s) {
  if (s == "exact") return UtilityMode::kExact;
  if (s == "expected") return UtilityMode::kExpected;
  throw std::invalid_argument("unknown utility mode: " + std::string(s));
}

struct UtilityOptions {
  UtilityMode mode = UtilityMode::kExact;
  int samples = 256;
  std::uint64_t seed = 0;
};

// Monte Carlo mean of Delta_j over `num_samples` draws from the history.
inline double expected_marginal_utility(const Workload& workload, int ed_id, int num_samples,
                                        std::uint64_t seed) {
  if (num_samples < 1) throw std::invalid_argument("expected_marginal_utility: num_samples < 1");
  if (!workload.has_sampler()) {
    throw NoEmpiricalDistribution(std::string(workload.kind()) + " exposes no history sampler");
  }
  Rng rng(seed);
  double sum = 0.0;
  for (int s = 0; s < num_samples; ++s) sum += workload.sampled_marginal_utility(ed_id, rng);
  return sum / num_samples;
}

// Pairs each reachable ED's Delta_j with its RB demand. EDs whose gain is zero
// are dropped rather than failing the round.
inline std::vector<UtilityReport> collect_reports(const Workload& workload,
                                                  std::span<const double> gains,
                                                  const RbParams& rb, double power_w,
                                                  const UtilityOptions& options = {}) {
  std::vector<EdUtility> deltas;
  if (options.mode == UtilityMode::kExact) {
    deltas = workload.marginal_utilities();
  } else {
    deltas.reserve(static_cast<std::size_t>(workload.num_eds()));
    for (int j = 0; j < workload.num_eds(); ++j) {
      const auto seed = derive_seed(options.seed, kStreamExpected, static_cast<std::uint64_t>(j));
      deltas.push_back({j, expected_marginal_utility(workload, j, options.samples, seed)});
    }
  }
  std::vector<UtilityReport> reports;
  reports.reserve(deltas.size());
  for (const auto& d : deltas) {
    if (d.ed_id < 0 || static_cast<std::size_t>(d.ed_id) >= gains.size()) {
      throw std::out_of_range("collect_reports: no gain for ed " + std::to_string(d.ed_id));
    }
    const EdRadio radio{d.ed_id, power_w, workload.payload_bits(d.ed_id)};
    const double per_rb = rb_bits(gains[static_cast<std::size_t>(d.ed_id)], radio, rb);
    try {
      reports.push_back({d.ed_id, std::max(0.0, d.delta), rb_demand(radio, per_rb)});
    } catch (const UnreachableError&) {
      // excluded from candidacy this round
    }
  }
  return reports;
}

struct SubmodularCheck {
  double lhs = 0.0;  // C(z_old) - C(z_old U subset data)
  double rhs = 0.0;  // sum of standalone gains
  bool holds = true;
};

inline constexpr std::size_t kMaxEnumerationSubset = 12;

inline SubmodularCheck submodular_bound_check(const Workload& workload, std::span<const int> subset,
                                              double tolerance = 1e-9) {
  if (subset.size() > kMaxEnumerationSubset) {
    throw EnumerationScaleError("enumeration scale: subset of " + std::to_string(subset.size()) +
                                " EDs exceeds " + std::to_string(kMaxEnumerationSubset));
  }
  SubmodularCheck out;
  if (subset.empty()) return out;
  const double base = workload.goal_value();
  out.lhs = base - workload.goal_value_if_ingested(subset);
  for (int j : subset) {
    const int one[] = {j};
    out.rhs += base - workload.goal_value_if_ingested(one);
  }
  out.holds = out.lhs <= out.rhs + tolerance;
  return out;
}

}  // namespace goalrba
