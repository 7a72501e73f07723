#include <gtest/gtest.h>

#include <vector>

#include "goalrba/decision.hpp"
#include "goalrba/workload.hpp"

using namespace goalrba;

namespace {

// Fixed deltas and payloads; goal is the sum of deltas not yet ingested.
class TableWorkload final : public Workload {
 public:
  TableWorkload(std::vector<double> deltas, double bits) : deltas_(std::move(deltas)), bits_(bits) {}
  std::string_view kind() const override { return "table"; }
  int num_eds() const override { return static_cast<int>(deltas_.size()); }
  std::vector<EdUtility> marginal_utilities() const override {
    std::vector<EdUtility> out;
    for (std::size_t j = 0; j < deltas_.size(); ++j) out.push_back({static_cast<int>(j), deltas_[j]});
    return out;
  }
  void ingest(std::span<const int> selected) override {
    for (int j : selected) deltas_[static_cast<std::size_t>(j)] = 0;
  }
  double goal_value() const override {
    double s = 0;
    for (double d : deltas_) s += d;
    return s;
  }
  double payload_bits(int) const override { return bits_; }

 private:
  std::vector<double> deltas_;
  double bits_;
};

DrInstance two_ed_instance() {
  DrInstance inst;
  inst.costs = {1.0, 2.0};
  inst.xi_lo = {1.0, 1.0};
  inst.xi_hi = {10.0, 10.0};
  inst.pi_min = 2.0;
  return inst;
}

// Deterministic random DR instance of n EDs with history.
DemandResponseWorkload random_dr(int n, std::uint64_t seed) {
  Rng rng(seed);
  DrInstance inst;
  std::vector<double> rt;
  std::vector<std::vector<double>> hist(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    inst.costs.push_back(uniform(rng, 0, 5));
    inst.xi_lo.push_back(1.0);
    inst.xi_hi.push_back(uniform(rng, 1, 30));
    rt.push_back(uniform(rng, 1.0, inst.xi_hi.back()));
    for (int h = 0; h < 8; ++h) hist[static_cast<std::size_t>(j)].push_back(uniform(rng, 1.0, inst.xi_hi.back()));
  }
  inst.pi_min = n * uniform(rng, 0.2, 1.0);
  return DemandResponseWorkload(inst, rt, hist);
}

}  // namespace

TEST(CollectReports, AllZeroDeltas) {
  TableWorkload w({0, 0, 0}, 512);
  const std::vector<double> gains{1, 2, 3};
  for (const auto& r : collect_reports(w, gains, RbParams{}, 1.0)) EXPECT_EQ(r.delta, 0.0);
}

TEST(CollectReports, DemandMatchesChannelModel) {
  TableWorkload w({1, 2, 3}, 512);
  const std::vector<double> gains{1.0, 3.0, 0.4};
  const auto reports = collect_reports(w, gains, RbParams{}, 1.0);
  ASSERT_EQ(reports.size(), 3u);
  for (const auto& r : reports) {
    const EdRadio ed{r.ed_id, 1.0, 512};
    EXPECT_EQ(r.w, rb_demand(ed, rb_bits(gains[static_cast<std::size_t>(r.ed_id)], ed, RbParams{})));
  }
  EXPECT_EQ(reports[0].w, 6);
  EXPECT_EQ(reports[1].w, 3);
}

TEST(CollectReports, ZeroGainExcluded) {
  TableWorkload w({1, 2, 3}, 512);
  const std::vector<double> gains{1.0, 0.0, 2.0};
  const auto reports = collect_reports(w, gains, RbParams{}, 1.0);
  ASSERT_EQ(reports.size(), 2u);
  EXPECT_EQ(reports[0].ed_id, 0);
  EXPECT_EQ(reports[1].ed_id, 2);
}

TEST(ExpectedUtility, DegenerateHistoryEqualsOneShot) {
  DemandResponseWorkload w(two_ed_instance(), {10.0, 1.0}, {{7.5}, {3.0}});
  DrInstance revealed = two_ed_instance();
  const double one_shot = dr_marginal_utility(revealed, 0, 7.5);
  EXPECT_DOUBLE_EQ(expected_marginal_utility(w, 0, 50, 1), one_shot);
}

TEST(ExpectedUtility, QuadratureOracle) {
  // History: a fine uniform sample of the support [1, 10].
  std::vector<double> grid;
  for (int i = 0; i < 9000; ++i) grid.push_back(1.0 + 9.0 * (i + 0.5) / 9000.0);
  DemandResponseWorkload w(two_ed_instance(), {10.0, 1.0}, {grid, grid});
  // E[Delta_1] = (1/9) * (int_1^2 (x - 1) dx + int_2^10 1 dx).
  const double analytic = (0.5 + 8.0) / 9.0;
  const double est = expected_marginal_utility(w, 0, 10'000, 123);
  EXPECT_NEAR(est, analytic, 0.05 * analytic);
}

TEST(ExpectedUtility, DeterministicPerSeed) {
  auto w = random_dr(20, 4);
  EXPECT_EQ(expected_marginal_utility(w, 3, 256, 9), expected_marginal_utility(w, 3, 256, 9));
}

TEST(ExpectedUtility, EmptyHistoryRaises) {
  DemandResponseWorkload w(two_ed_instance(), {10.0, 1.0}, {{}, {2.0}});
  EXPECT_THROW(expected_marginal_utility(w, 0, 10, 1), NoEmpiricalDistribution);
  TableWorkload t({1.0}, 8);
  EXPECT_THROW(expected_marginal_utility(t, 0, 10, 1), NoEmpiricalDistribution);
  EXPECT_THROW(expected_marginal_utility(w, 1, 0, 1), std::invalid_argument);
}

TEST(ExpectedUtility, ReportsUseExpectationMode) {
  auto w = random_dr(10, 6);
  const std::vector<double> gains(10, 1.0);
  UtilityOptions opt{UtilityMode::kExpected, 64, 77};
  const auto reports = collect_reports(w, gains, RbParams{}, 1.0, opt);
  for (const auto& r : reports) {
    const double expect = expected_marginal_utility(w, r.ed_id, 64, derive_seed(77, kStreamExpected, r.ed_id));
    EXPECT_DOUBLE_EQ(r.delta, std::max(0.0, expect));
  }
}

TEST(Submodular, EmptyAndSingleton) {
  auto w = random_dr(8, 2);
  const auto empty = submodular_bound_check(w, {});
  EXPECT_EQ(empty.lhs, 0.0);
  EXPECT_EQ(empty.rhs, 0.0);
  EXPECT_TRUE(empty.holds);
  const auto deltas = w.marginal_utilities();
  for (int j = 0; j < 8; ++j) {
    const int one[] = {j};
    const auto c = submodular_bound_check(w, one);
    EXPECT_NEAR(c.lhs, c.rhs, 1e-12);
    EXPECT_NEAR(c.rhs, deltas[static_cast<std::size_t>(j)].delta, 1e-9);
    EXPECT_TRUE(c.holds);
  }
}

TEST(Submodular, FiveEdInstanceAllSubsets) {
  auto w = random_dr(5, 10);
  // Independent oracle: re-solve the LP with the subset's values revealed.
  const DrInstance base = w.instance();
  const double c0 = solve_dr(base).cost;
  for (unsigned mask = 0; mask < 32; ++mask) {
    std::vector<int> subset;
    DrInstance hypo = base;
    double rhs = 0.0;
    for (int j = 0; j < 5; ++j) {
      if (!(mask >> j & 1)) continue;
      subset.push_back(j);
      hypo.known[j] = w.realtime()[static_cast<std::size_t>(j)];
      DrInstance single = base;
      single.known[j] = w.realtime()[static_cast<std::size_t>(j)];
      rhs += c0 - solve_dr(single).cost;
    }
    const auto c = submodular_bound_check(w, subset);
    EXPECT_NEAR(c.lhs, c0 - solve_dr(hypo).cost, 1e-9);
    EXPECT_NEAR(c.rhs, rhs, 1e-9);
    EXPECT_TRUE(c.holds) << "mask " << mask;
  }
}

TEST(Submodular, ScaleGuard) {
  auto w = random_dr(20, 3);
  std::vector<int> big(13);
  std::iota(big.begin(), big.end(), 0);
  EXPECT_THROW(submodular_bound_check(w, big), EnumerationScaleError);
}

TEST(Submodular, UnsupportedWorkload) {
  TableWorkload t({1.0, 2.0}, 8);
  const int s[] = {0, 1};
  EXPECT_THROW(submodular_bound_check(t, s), std::logic_error);
}

TEST(Reports, InsensitiveToEnumerationOrder) {
  auto a = random_dr(6, 12);
  const auto base = a.instance();
  // Same instance with EDs listed in reverse.
  DrInstance rev;
  std::vector<double> rt;
  std::vector<std::vector<double>> hist;
  for (int j = 5; j >= 0; --j) {
    const auto u = static_cast<std::size_t>(j);
    rev.costs.push_back(base.costs[u]);
    rev.xi_lo.push_back(base.xi_lo[u]);
    rev.xi_hi.push_back(base.xi_hi[u]);
    rt.push_back(a.realtime()[u]);
    hist.push_back({1.0});
  }
  rev.pi_min = base.pi_min;
  DemandResponseWorkload b(rev, rt, hist);
  const auto da = a.marginal_utilities();
  const auto db = b.marginal_utilities();
  for (int j = 0; j < 6; ++j) {
    EXPECT_NEAR(da[static_cast<std::size_t>(j)].delta, db[static_cast<std::size_t>(5 - j)].delta, 1e-9);
  }
}

TEST(UtilityMode, Parse) {
  EXPECT_EQ(parse_utility_mode("exact"), UtilityMode::kExact);
  EXPECT_EQ(parse_utility_mode("expected"), UtilityMode::kExpected);
  EXPECT_THROW(parse_utility_mode("mean"), std::invalid_argument);
}
