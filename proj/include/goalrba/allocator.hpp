#pragma once

// Knapsack-style RB allocation: the ratio-greedy hybrid rule, the two
// throughput/utility baselines, and an exact DP oracle.

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "goalrba/errors.hpp"

namespace goalrba {

struct UtilityReport {
  int ed_id = 0;
  double delta = 0.0;   // marginal information-utility gain
  std::int64_t w = 0;   // RB demand
};

struct Allocation {
  std::vector<int> selected;                 // ascending ed_id
  std::map<int, std::int64_t> rb_counts;
  std::int64_t capacity_used = 0;
  double value = 0.0;                        // sum of selected deltas
};

enum class Policy { kChannel, kUtility, kHybrid };

// What to do when the next item in priority order does not fit.
enum class HaltMode { kHaltAtFirstOverflow, kSkipAndContinue };

inline std::string_view to_string(Policy p) {
  switch (p) {
    case Policy::kChannel: return "channel";
    case Policy::kUtility: return "utility";
    case Policy::kHybrid: return "hybrid";
  }
  return "?";
}

inline Policy parse_policy(std::string_view s) {
  if (s == "channel") return Policy::kChannel;
  if (s == "utility") return Policy::kUtility;
  if (s == "hybrid") return Policy::kHybrid;
  throw std::invalid_argument("unknown policy: " + std::string(s));
}

inline std::string_view to_string(HaltMode m) {
  return m == HaltMode::kHaltAtFirstOverflow ? "halt" : "skip";
}

inline HaltMode parse_halt_mode(std::string_view s) {
  if (s == "halt") return HaltMode::kHaltAtFirstOverflow;
  if (s == "skip") return HaltMode::kSkipAndContinue;
  throw std::invalid_argument("unknown halt mode: " + std::string(s));
}

namespace detail {

inline void validate_reports(std::span<const UtilityReport> reports, std::int64_t capacity) {
  if (capacity < 0) throw std::invalid_argument("allocation: negative capacity");
  for (const auto& r : reports) {
    if (!(r.delta >= 0)) {
      throw std::invalid_argument("allocation: negative delta for ed " + std::to_string(r.ed_id));
    }
    if (r.w < 0) throw std::invalid_argument("allocation: negative RB demand");
  }
}

inline void grant(Allocation& a, const UtilityReport& r) {
  a.selected.push_back(r.ed_id);
  a.rb_counts[r.ed_id] = r.w;
  a.capacity_used += r.w;
  a.value += r.delta;
}

inline void finish(Allocation& a) { std::sort(a.selected.begin(), a.selected.end()); }

// Walks `order` granting each item its demand. Returns when the budget check
// halts (kHaltAtFirstOverflow) or the list is exhausted.
inline void fill_in_order(Allocation& a, std::span<const UtilityReport> order,
                          std::int64_t capacity, HaltMode mode) {
  for (const auto& r : order) {
    if (a.capacity_used + r.w > capacity) {
      if (mode == HaltMode::kHaltAtFirstOverflow) return;
      continue;
    }
    grant(a, r);
  }
}

}  // namespace detail

// Hybrid rule: order by delta/w descending (ties: ascending ed_id) and pick
// until the budget is used up. Zero-demand items with positive delta are
// admitted for free first; zero-delta items are never picked.
inline Allocation greedy_allocate(std::span<const UtilityReport> reports, std::int64_t capacity,
                                  HaltMode mode = HaltMode::kHaltAtFirstOverflow) {
  detail::validate_reports(reports, capacity);
  Allocation a;
  std::vector<UtilityReport> candidates;
  for (const auto& r : reports) {
    if (r.delta <= 0) continue;
    if (r.w == 0) {
      detail::grant(a, r);
    } else {
      candidates.push_back(r);
    }
  }
  // Cross-multiplied ratio comparison avoids a division per comparison.
  std::sort(candidates.begin(), candidates.end(), [](const UtilityReport& x, const UtilityReport& y) {
    const double lhs = x.delta * static_cast<double>(y.w);
    const double rhs = y.delta * static_cast<double>(x.w);
    if (lhs != rhs) return lhs > rhs;
    return x.ed_id < y.ed_id;
  });
  detail::fill_in_order(a, candidates, capacity, mode);
  detail::finish(a);
  return a;
}

// Throughput baseline: best channel first. `gains` is indexed by ed_id.
inline Allocation channel_policy(std::span<const double> gains, std::span<const UtilityReport> reports,
                                 std::int64_t capacity,
                                 HaltMode mode = HaltMode::kHaltAtFirstOverflow) {
  detail::validate_reports(reports, capacity);
  std::vector<UtilityReport> order(reports.begin(), reports.end());
  for (const auto& r : order) {
    if (r.ed_id < 0 || static_cast<std::size_t>(r.ed_id) >= gains.size()) {
      throw std::out_of_range("channel_policy: no gain for ed " + std::to_string(r.ed_id));
    }
  }
  std::sort(order.begin(), order.end(), [&](const UtilityReport& x, const UtilityReport& y) {
    const double gx = gains[static_cast<std::size_t>(x.ed_id)];
    const double gy = gains[static_cast<std::size_t>(y.ed_id)];
    if (gx != gy) return gx > gy;
    return x.ed_id < y.ed_id;
  });
  Allocation a;
  detail::fill_in_order(a, order, capacity, mode);
  detail::finish(a);
  return a;
}

// Utility baseline: largest delta first, ignoring channel cost.
inline Allocation utility_policy(std::span<const UtilityReport> reports, std::int64_t capacity,
                                 HaltMode mode = HaltMode::kHaltAtFirstOverflow) {
  detail::validate_reports(reports, capacity);
  std::vector<UtilityReport> order;
  for (const auto& r : reports) {
    if (r.delta > 0) order.push_back(r);
  }
  std::sort(order.begin(), order.end(), [](const UtilityReport& x, const UtilityReport& y) {
    if (x.delta != y.delta) return x.delta > y.delta;
    return x.ed_id < y.ed_id;
  });
  Allocation a;
  detail::fill_in_order(a, order, capacity, mode);
  detail::finish(a);
  return a;
}

inline Allocation allocate(Policy policy, std::span<const double> gains,
                           std::span<const UtilityReport> reports, std::int64_t capacity,
                           HaltMode mode = HaltMode::kHaltAtFirstOverflow) {
  switch (policy) {
    case Policy::kChannel: return channel_policy(gains, reports, capacity, mode);
    case Policy::kUtility: return utility_policy(reports, capacity, mode);
    case Policy::kHybrid: return greedy_allocate(reports, capacity, mode);
  }
  throw std::logic_error("allocate: bad policy");
}

inline constexpr std::int64_t kDefaultOracleBound = 100'000;

// Maximum-value selection by DP over capacity. Exact; used to certify the
// heuristics. The table is (items x capacity) so the product is bounded.
inline Allocation exact_knapsack(std::span<const UtilityReport> reports, std::int64_t capacity,
                                 std::int64_t oracle_bound = kDefaultOracleBound) {
  detail::validate_reports(reports, capacity);
  Allocation a;
  std::vector<UtilityReport> items;
  for (const auto& r : reports) {
    if (r.delta <= 0) continue;
    if (r.w == 0) {
      detail::grant(a, r);
    } else if (r.w <= capacity) {
      items.push_back(r);
    }
  }
  const auto n = static_cast<std::int64_t>(items.size());
  if (n * capacity > oracle_bound) {
    throw OracleScaleError("oracle scale: " + std::to_string(n) + " items x capacity " +
                           std::to_string(capacity) + " exceeds " + std::to_string(oracle_bound));
  }
  const auto cols = static_cast<std::size_t>(capacity + 1);
  std::vector<double> best(cols, 0.0);
  std::vector<std::vector<bool>> take(items.size(), std::vector<bool>(cols, false));
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto w = static_cast<std::size_t>(items[i].w);
    for (std::size_t c = cols; c-- > w;) {
      const double with = best[c - w] + items[i].delta;
      if (with > best[c]) {
        best[c] = with;
        take[i][c] = true;
      }
    }
  }
  auto c = static_cast<std::size_t>(capacity);
  for (std::size_t i = items.size(); i-- > 0;) {
    if (take[i][c]) {
      detail::grant(a, items[i]);
      c -= static_cast<std::size_t>(items[i].w);
    }
  }
  detail::finish(a);
  return a;
}

inline double suboptimality_ratio(double greedy_value, double opt_value) {
  if (greedy_value < 0 || opt_value < 0) {
    throw std::invalid_argument("suboptimality_ratio: negative value");
  }
  const double slack = 1e-12 * std::max(1.0, opt_value);
  if (greedy_value > opt_value + slack) {
    throw OracleViolation("oracle violation: heuristic value " + std::to_string(greedy_value) +
                          " exceeds optimum " + std::to_string(opt_value));
  }
  if (opt_value == 0) return 1.0;
  return std::min(1.0, greedy_value / opt_value);
}

// Structural invariants every policy output must satisfy.
inline bool allocation_is_consistent(const Allocation& a, std::span<const UtilityReport> reports,
                                     std::int64_t capacity) {
  std::map<int, std::int64_t> demand;
  for (const auto& r : reports) demand[r.ed_id] = r.w;
  std::int64_t used = 0;
  for (int id : a.selected) {
    auto it = a.rb_counts.find(id);
    auto d = demand.find(id);
    if (it == a.rb_counts.end() || d == demand.end() || it->second < d->second) return false;
    used += it->second;
  }
  return used == a.capacity_used && used <= capacity && a.rb_counts.size() == a.selected.size();
}

}  // namespace goalrba
