// Acceptance checks: one PASS/FAIL line per criterion, non-zero exit on any
// failure.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "goalrba.hpp"

namespace {

using namespace goalrba;
namespace fs = std::filesystem;

struct Outcome {
  bool passed = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

fs::path config_path(const std::string& name) { return fs::path(GOALRBA_SOURCE_DIR) / "configs" / (name + ".json"); }

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// 1-based round at which `reached` first holds, or rounds + 1 if never.
int rounds_to(const std::vector<RoundMetrics>& run, const std::function<bool(const RoundMetrics&)>& reached) {
  for (const auto& m : run) {
    if (reached(m)) return m.round + 1;
  }
  return static_cast<int>(run.size()) + 1;
}

// ---------------------------------------------------------------------------

Outcome greedy_guarantee() {
  const auto t0 = Clock::now();
  const auto r = verify_greedy_guarantee(200, 0.25, 20240601);
  const double s = seconds_since(t0);
  return {r.passed && r.cases == 200 && s < 10.0, fmt("%d instances, %s, %.2f s", r.cases, r.detail.c_str(), s)};
}

Outcome rate_model() {
  const RbParams rb;  // 0.5 ms x 180 kHz, unit noise power
  const double at1 = rb_bits(1.0, EdRadio{0, 1.0, 0.0}, rb);
  const double at3 = rb_bits(3.0, EdRadio{0, 1.0, 0.0}, rb);
  const bool ok = std::abs(at1 - 90.0) <= 1e-9 * 90.0 && std::abs(at3 - 180.0) <= 1e-9 * 180.0;
  return {ok, fmt("SNR 1 -> %.12g bits, SNR 3 -> %.12g bits", at1, at3)};
}

Outcome demand_response_replication() {
  const auto t0 = Clock::now();
  const ScenarioConfig c = load_config(config_path("demand_response"));
  if (c.demand_response.num_eds != 500 || c.rounds != 100) return {false, "preset is not J=500 over 100 scenarios"};
  double cost[2] = {0, 0};
  bool binding = true;
  const Policy policies[2] = {Policy::kChannel, Policy::kHybrid};
  for (int i = 0; i < 2; ++i) {
    ScenarioConfig ci = c;
    ci.policy = policies[i];
    for (const auto& m : run_scenario(ci)) {
      cost[i] += m.goal_value / c.rounds;
      binding = binding && static_cast<int>(m.selected.size()) < c.demand_response.num_eds;
    }
  }
  const double reduction = 1.0 - cost[1] / cost[0];
  const double s = seconds_since(t0);
  return {binding && cost[1] <= cost[0] && reduction >= 0.20 && s < 120.0,
          fmt("mean cost channel %.4f hybrid %.4f, reduction %.1f%%, budget %s, %.1f s", cost[0], cost[1],
              100 * reduction, binding ? "binding" : "NOT binding", s)};
}

// Realized gain against two independent LP solves of the operator's problem.
Outcome gain_identity() {
  ScenarioConfig c = load_config(config_path("demand_response"));
  double worst = 0.0;
  int rounds = 0;
  for (Policy p : {Policy::kChannel, Policy::kUtility, Policy::kHybrid}) {
    c.policy = p;
    run_scenario(c, [&](const RoundContext& ctx) {
      const auto& w = dynamic_cast<const DemandResponseWorkload&>(ctx.workload);
      DrInstance before = w.instance();
      before.known.clear();
      const double realized = solve_dr(before).cost - solve_dr(w.instance()).cost;
      worst = std::max(worst, std::abs(realized - ctx.metrics.utility_gain));
      ++rounds;
    });
  }
  return {worst <= 1e-9, fmt("%d rounds, max |gain - (C_old - C_new)| = %.3g", rounds, worst)};
}

Outcome submodularity() {
  const auto r = verify_submodularity(20, 12, 12, 77);
  return {r.passed && r.cases == 20 * 4096, fmt("%d subsets over 20 instances of 12 EDs, %s", r.cases, r.detail.c_str())};
}

struct PolicyRounds {
  std::vector<double> channel, hybrid;
};

PolicyRounds rounds_to_target(const ScenarioConfig& base, int seeds,
                              const std::function<bool(const RoundMetrics&)>& reached) {
  PolicyRounds out;
  for (int i = 0; i < seeds; ++i) {
    ScenarioConfig c = base;
    c.seed = base.seed + static_cast<std::uint64_t>(i);
    c.policy = Policy::kChannel;
    out.channel.push_back(rounds_to(run_scenario(c), reached));
    c.policy = Policy::kHybrid;
    out.hybrid.push_back(rounds_to(run_scenario(c), reached));
  }
  return out;
}

std::string list(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + fmt("%g", v[i]);
  return s + "]";
}

Outcome edge_learning() {
  const auto t0 = Clock::now();
  const ScenarioConfig c = load_config(config_path("edge_learning"));
  const auto r = rounds_to_target(c, 5, [](const RoundMetrics& m) { return m.progress >= 0.90; });
  const double ch = median(r.channel), hy = median(r.hybrid);
  const double s = seconds_since(t0);
  const bool censored = ch > c.rounds || hy > c.rounds;
  return {!censored && hy <= 0.8 * ch && s < 600.0,
          fmt("rounds to 0.90 accuracy: channel %s median %g, hybrid %s median %g (%.0f%% fewer)%s, %.0f s",
              list(r.channel).c_str(), ch, list(r.hybrid).c_str(), hy, 100 * (1 - hy / ch),
              censored ? ", threshold not reached" : "", s)};
}

Outcome federated_descent() {
  const auto r = verify_federated_descent(100, 31, 1e-10);
  return {r.passed && r.cases == 100, fmt("%d draws, %s", r.cases, r.detail.c_str())};
}

Outcome gradient_finite_differences() {
  double worst = 0.0;
  int probes = 0;
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    auto m = Mlp::initialized(MlpShape{784, 64, 10}, seed);
    GaussianMixture mix(MixtureSpec{}, seed);
    Rng rng(derive_seed(seed, kStreamBatch));
    const Dataset d = mix.sample(32, rng);
    const Eigen::VectorXd g = loss_gradient(m, d);
    for (int probe = 0; probe < 20; ++probe) {
      const auto k = static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::uint64_t>(g.size())));
      const double h = 1e-5;
      const double orig = m.params()(k);
      m.params()(k) = orig + h;
      const double up = loss(m, d);
      m.params()(k) = orig - h;
      const double down = loss(m, d);
      m.params()(k) = orig;
      const double fd = (up - down) / (2 * h);
      worst = std::max(worst, std::abs(g(k) - fd) / std::max(std::abs(fd), 1e-5));
      ++probes;
    }
  }
  return {worst <= 1e-4, fmt("%d probes, max relative error %.3g", probes, worst)};
}

Outcome federated_policies() {
  const ScenarioConfig c = load_config(config_path("federated"));
  const double target = 0.90;
  const auto r = rounds_to_target(c, 5, [&](const RoundMetrics& m) { return m.progress >= target; });
  const double ch = median(r.channel), hy = median(r.hybrid);
  const bool censored = ch > c.rounds || hy > c.rounds;
  return {!censored && hy <= ch,
          fmt("rounds to %.2f accuracy: channel %s median %g, hybrid %s median %g%s", target, list(r.channel).c_str(),
              ch, list(r.hybrid).c_str(), hy, censored ? ", threshold not reached" : "")};
}

Outcome admm_certificate(bool dual) {
  const auto r = verify_admm_certificate(50, 30, 8080);
  const auto& s = dual ? r.dual_bound : r.certificate;
  return {s.passed, fmt("50 runs, %d rounds checked%s%s", s.cases, s.detail.empty() ? "" : ", ", s.detail.c_str())};
}

Outcome admm_policies() {
  const auto t0 = Clock::now();
  const ScenarioConfig c = load_config(config_path("admm"));
  const auto r = rounds_to_target(c, 5, [](const RoundMetrics& m) { return m.progress <= 1e-3; });
  const double ch = median(r.channel), hy = median(r.hybrid);
  const double s = seconds_since(t0);
  const bool censored = ch > c.rounds || hy > c.rounds;
  return {!censored && hy <= ch && s < 300.0,
          fmt("rounds to relative gap 1e-3: channel %s median %g, hybrid %s median %g%s, %.1f s",
              list(r.channel).c_str(), ch, list(r.hybrid).c_str(), hy, censored ? ", threshold not reached" : "",
              s)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism(const std::string& cli) {
  if (cli.empty()) return {false, "no --cli given"};
  const fs::path dir = fs::temp_directory_path() / "goalrba_acceptance";
  fs::create_directories(dir);
  std::string detail;
  bool ok = true;
  for (const char* preset : {"demand_response", "admm", "federated"}) {
    std::string runs[2];
    for (int i = 0; i < 2; ++i) {
      const fs::path out = dir / fmt("%s_%d.csv", preset, i);
      fs::remove(out);
      const std::string cmd = "\"" + cli + "\" run --config \"" + config_path(preset).string() +
                              "\" --seed 12345 --rounds 5 --out \"" + out.string() + "\" > /dev/null";
      if (std::system(cmd.c_str()) != 0) return {false, std::string("run failed for ") + preset};
      runs[i] = slurp(out);
    }
    const bool same = !runs[0].empty() && runs[0] == runs[1];
    ok = ok && same;
    detail += fmt("%s%s %s (%zu bytes)", detail.empty() ? "" : ", ", preset, same ? "identical" : "DIFFER",
                  runs[0].size());
  }
  return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string cli;
  std::vector<std::string> only;
  app.add_option("--cli", cli, "Path to the goalrba_cli binary");
  app.add_option("--only", only, "Run only these criterion ids (1, 7a, ...)");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1", greedy_guarantee},
      {"2", rate_model},
      {"3", demand_response_replication},
      {"4", gain_identity},
      {"5", submodularity},
      {"6", edge_learning},
      {"7a", federated_descent},
      {"7b", gradient_finite_differences},
      {"7c", federated_policies},
      {"8a", [] { return admm_certificate(false); }},
      {"8b", [] { return admm_certificate(true); }},
      {"8c", admm_policies},
      {"9", [&] { return determinism(cli); }},
  };

  int failures = 0;
  for (const auto& [id, check] : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s criterion %s: %s\n", o.passed ? "PASS" : "FAIL", id.c_str(), o.detail.c_str());
    std::fflush(stdout);
    failures += o.passed ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
