// Command-line front end: run one scenario, compare the three policies on
// shared seeds, or run the property/oracle suites.
//
// Exit codes: 0 success, 1 config error, 2 runtime error, 3 verification failure.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "goalrba.hpp"

namespace {

using namespace goalrba;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitVerify = 3;

struct RunArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> policy;
  std::optional<int> rounds;
  std::string out;
};

ScenarioConfig resolve(const RunArgs& a) {
  ScenarioConfig c = load_config(a.config);
  if (a.seed) c.seed = *a.seed;
  if (a.policy) {
    try {
      c.policy = parse_policy(*a.policy);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (a.rounds) {
    if (*a.rounds < 1) throw ConfigError("--rounds must be >= 1");
    c.rounds = *a.rounds;
  }
  if (!a.out.empty()) c.output = a.out;
  return c;
}

int cmd_run(const RunArgs& a) {
  const ScenarioConfig c = resolve(a);
  if (c.output.empty()) throw ConfigError("no output path: pass --out or set \"output\" in the config");
  const auto metrics = run_scenario(c);
  emit_metrics(metrics, c.output);
  const auto& last = metrics.back();
  std::cout << to_string(c.workload) << " policy=" << to_string(c.policy) << " seed=" << c.seed
            << " rounds=" << metrics.size() << " final_goal=" << last.goal_value << " -> " << c.output << "\n";
  return kExitOk;
}

int cmd_compare(const RunArgs& a) {
  const ScenarioConfig c = resolve(RunArgs{a.config, a.seed, std::nullopt, a.rounds, ""});
  if (a.out.empty()) throw ConfigError("compare needs --out <dir>");
  const std::filesystem::path dir(a.out);
  std::filesystem::create_directories(dir);
  const auto cmp = run_comparison(c);
  const Policy order[] = {Policy::kChannel, Policy::kUtility, Policy::kHybrid};
  std::printf("%-8s %12s %14s %14s\n", "policy", "throughput", "total_gain", "final_goal");
  for (std::size_t i = 0; i < cmp.runs.size(); ++i) {
    const auto& run = cmp.runs[i];
    const auto path = dir / (std::string(to_string(order[i])) + ".csv");
    emit_metrics(run, path);
    std::int64_t tp = 0;
    double gain = 0;
    for (const auto& m : run) {
      tp += m.throughput;
      gain += m.utility_gain;
    }
    std::printf("%-8s %12lld %14.6g %14.6g\n", std::string(to_string(order[i])).c_str(), static_cast<long long>(tp),
                gain, run.back().goal_value);
  }
  return kExitOk;
}

int cmd_verify(bool quick) {
  const int scale = quick ? 4 : 1;
  std::vector<SuiteResult> results;
  results.push_back(verify_greedy_guarantee(200 / scale, 0.25, 1));
  results.push_back(verify_submodularity(20 / scale, 12, 12, 2));
  results.push_back(verify_federated_descent(100, 3));
  const auto admm = verify_admm_certificate(50 / scale, 30, 4);
  results.push_back(admm.certificate);
  results.push_back(admm.dual_bound);
  bool ok = true;
  for (const auto& r : results) {
    std::printf("%s %-20s cases=%-7d %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.cases, r.detail.c_str());
    ok = ok && r.passed;
  }
  return ok ? kExitOk : kExitVerify;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Goal-oriented resource-block allocation simulator"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Run one scenario and write per-round metrics as CSV");
  run->add_option("--config", run_args.config, "Scenario config (JSON)")->required();
  run->add_option("--seed", run_args.seed, "Override the config seed");
  run->add_option("--policy", run_args.policy, "channel | utility | hybrid");
  run->add_option("--rounds", run_args.rounds, "Override the round count");
  run->add_option("--out", run_args.out, "Metrics CSV path (defaults to the config's output)");

  RunArgs cmp_args;
  auto* cmp = app.add_subcommand("compare", "Run all three policies on shared seeds");
  cmp->add_option("--config", cmp_args.config, "Scenario config (JSON)")->required();
  cmp->add_option("--seed", cmp_args.seed, "Override the config seed");
  cmp->add_option("--rounds", cmp_args.rounds, "Override the round count");
  cmp->add_option("--out", cmp_args.out, "Output directory for <policy>.csv")->required();

  bool quick = false;
  auto* verify = app.add_subcommand("verify", "Run the property and oracle suites");
  verify->add_flag("--quick", quick, "Smaller instance counts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return cmd_run(run_args);
    if (*cmp) return cmd_compare(cmp_args);
    if (*verify) return cmd_verify(quick);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitRuntime;
}
