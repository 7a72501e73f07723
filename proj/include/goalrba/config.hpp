#pragma once

// Scenario configuration: a JSON document with one top-level block per
// concern. Omitted fields take defaults; unknown keys are rejected with their
// full path. See README.md for the schema.

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "goalrba/admm.hpp"
#include "goalrba/allocator.hpp"
#include "goalrba/channel.hpp"
#include "goalrba/decision.hpp"
#include "goalrba/errors.hpp"
#include "goalrba/learning.hpp"
#include "goalrba/workload.hpp"

namespace goalrba {

using Json = nlohmann::ordered_json;

enum class WorkloadKind { kDemandResponse, kRouting, kEdgeLearning, kFederated, kAdmm };

inline std::string_view to_string(WorkloadKind k) {
  switch (k) {
    case WorkloadKind::kDemandResponse: return "demand_response";
    case WorkloadKind::kRouting: return "routing";
    case WorkloadKind::kEdgeLearning: return "edge_learning";
    case WorkloadKind::kFederated: return "federated";
    case WorkloadKind::kAdmm: return "admm";
  }
  return "?";
}

inline WorkloadKind parse_workload_kind(std::string_view s) {
  for (auto k : {WorkloadKind::kDemandResponse, WorkloadKind::kRouting, WorkloadKind::kEdgeLearning,
                 WorkloadKind::kFederated, WorkloadKind::kAdmm}) {
    if (to_string(k) == s) return k;
  }
  throw std::invalid_argument("unknown workload: " + std::string(s));
}

// Small payloads (a few bytes per ED) rank by expected gain; large payloads
// are announced and ranked exactly.
inline bool is_small_payload(WorkloadKind k) {
  return k == WorkloadKind::kDemandResponse || k == WorkloadKind::kRouting;
}

enum class Normalization { kRaw, kPerRoundMax };

inline std::string_view to_string(Normalization n) { return n == Normalization::kRaw ? "raw" : "per_round_max"; }

inline Normalization parse_normalization(std::string_view s) {
  if (s == "raw") return Normalization::kRaw;
  if (s == "per_round_max") return Normalization::kPerRoundMax;
  throw std::invalid_argument("unknown normalization: " + std::string(s));
}

struct ScenarioConfig {
  WorkloadKind workload = WorkloadKind::kDemandResponse;
  Policy policy = Policy::kHybrid;
  HaltMode halt = HaltMode::kHaltAtFirstOverflow;
  int rounds = 1;
  std::uint64_t seed = 0;

  RbParams rb{};
  double power_w = 1.0;
  std::int64_t capacity = kDefaultIntervalCapacity;

  UtilityMode utility_mode = UtilityMode::kExpected;
  int utility_samples = 256;

  Normalization normalization = Normalization::kRaw;
  bool timing = false;  // wall_ms is written as 0 unless enabled
  std::string output;

  DemandResponseParams demand_response{};
  RoutingParams routing{};
  EdgeLearningParams edge_learning{};
  FederatedParams federated{};
  AdmmWorkloadParams admm{};
};

namespace detail {

// Reads fields from one JSON object and remembers which keys were consumed so
// leftovers can be reported.
class ObjectReader {
 public:
  ObjectReader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(where(key) + ": " + e.what());
    }
  }

  template <typename T, typename Parse>
  void get_enum(const char* key, T& out, Parse parse) {
    std::string s;
    bool present = j_.contains(key);
    get(key, s);
    if (!present) return;
    try {
      out = parse(s);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(where(key) + ": " + e.what());
    }
  }

  bool has(const char* key) const { return j_.contains(key); }

  ObjectReader child(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    static const Json kEmpty = Json::object();
    return ObjectReader(it == j_.end() ? kEmpty : *it, where(key));
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError("unknown key \"" + it.key() + "\" at " + where());
    }
  }

  std::string where(const std::string& key = "") const {
    const std::string p = path_.empty() ? std::string("<root>") : path_;
    return key.empty() ? p : (path_.empty() ? key : path_ + "." + key);
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

inline void read_data(ObjectReader r, LearningDataParams& d) {
  r.get("num_eds", d.num_eds);
  r.get("samples_per_ed", d.samples_per_ed);
  r.get("test_size", d.test_size);
  r.get("dim", d.mixture.dim);
  r.get("classes", d.mixture.classes);
  r.get("mean_scale", d.mixture.mean_scale);
  r.get("noise", d.mixture.noise);
  r.get("concentration", d.concentration);
  r.get("designated_classes", d.designated_classes);
  r.get("mnist_dir", d.mnist_dir);
  r.finish();
  require(d.num_eds >= 1 && d.samples_per_ed >= 1 && d.test_size >= 1,
          r.where() + ": num_eds, samples_per_ed, test_size must be >= 1");
  require(d.mixture.dim >= 1 && d.mixture.classes >= 2, r.where() + ": dim >= 1 and classes >= 2 required");
  require(d.concentration >= 0 && d.concentration <= 1, r.where() + ".concentration must be in [0, 1]");
  for (int c : d.designated_classes) {
    require(c >= 0 && c < d.mixture.classes, r.where() + ".designated_classes: class out of range");
  }
  require(static_cast<int>(d.designated_classes.size()) <= d.num_eds,
          r.where() + ".designated_classes: more classes than EDs");
}

inline Json write_data(const LearningDataParams& d) {
  return Json{{"num_eds", d.num_eds},
              {"samples_per_ed", d.samples_per_ed},
              {"test_size", d.test_size},
              {"dim", d.mixture.dim},
              {"classes", d.mixture.classes},
              {"mean_scale", d.mixture.mean_scale},
              {"noise", d.mixture.noise},
              {"concentration", d.concentration},
              {"designated_classes", d.designated_classes},
              {"mnist_dir", d.mnist_dir}};
}

inline void read_workload_block(ObjectReader r, ScenarioConfig& c) {
  switch (c.workload) {
    case WorkloadKind::kDemandResponse: {
      auto& p = c.demand_response;
      r.get("num_eds", p.num_eds);
      r.get("cost_max", p.cost_max);
      r.get("xi_min", p.xi_min);
      r.get("xi_max_cap", p.xi_max_cap);
      r.get("pi_min_per_ed", p.pi_min_per_ed);
      r.get("history_size", p.history_size);
      r.get("payload_bytes", p.payload_bytes);
      r.finish();
      require(p.num_eds >= 1, r.where() + ".num_eds must be >= 1");
      require(p.cost_max >= 0 && p.xi_min >= 0 && p.xi_max_cap >= p.xi_min,
              r.where() + ": need cost_max >= 0 and 0 <= xi_min <= xi_max_cap");
      require(p.pi_min_per_ed >= 0 && p.pi_min_per_ed <= p.xi_min,
              r.where() + ".pi_min_per_ed must lie in [0, xi_min] so the worst case stays feasible");
      require(p.history_size >= 0 && p.payload_bytes >= 0, r.where() + ": negative size");
      break;
    }
    case WorkloadKind::kRouting: {
      auto& p = c.routing;
      r.get("grid_size", p.grid_size);
      r.get("tau_lo_max", p.tau_lo_max);
      r.get("spread_max", p.spread_max);
      r.get("history_size", p.history_size);
      r.get("payload_bytes", p.payload_bytes);
      r.finish();
      require(p.grid_size >= 2, r.where() + ".grid_size must be >= 2");
      require(p.tau_lo_max >= 1 && p.spread_max >= 0, r.where() + ": need tau_lo_max >= 1, spread_max >= 0");
      require(p.history_size >= 0 && p.payload_bytes >= 0, r.where() + ": negative size");
      break;
    }
    case WorkloadKind::kEdgeLearning: {
      auto& p = c.edge_learning;
      read_data(r.child("data"), p.data);
      r.get("offer_size", p.offer_size);
      r.get("epochs_per_round", p.epochs_per_round);
      r.get("batch", p.batch);
      r.get("learning_rate", p.learning_rate);
      r.get("momentum", p.momentum);
      r.get("bytes_per_sample", p.bytes_per_sample);
      r.finish();
      require(p.offer_size >= 1 && p.batch >= 1 && p.epochs_per_round >= 0,
              r.where() + ": need offer_size >= 1, batch >= 1, epochs_per_round >= 0");
      require(p.learning_rate > 0 && p.momentum >= 0 && p.momentum < 1,
              r.where() + ": need learning_rate > 0 and momentum in [0, 1)");
      require(p.bytes_per_sample >= 1, r.where() + ".bytes_per_sample must be >= 1");
      break;
    }
    case WorkloadKind::kFederated: {
      auto& p = c.federated;
      read_data(r.child("data"), p.data);
      r.get("batch", p.batch);
      r.get("learning_rate", p.learning_rate);
      r.get("kappa", p.kappa);
      r.get("bits_per_weight", p.bits_per_weight);
      r.finish();
      require(p.batch >= 1, r.where() + ".batch must be >= 1");
      require(p.kappa > 0 && p.learning_rate > 0 && p.learning_rate < 2.0 / p.kappa,
              r.where() + ": need kappa > 0 and 0 < learning_rate < 2/kappa");
      require(p.bits_per_weight >= 1, r.where() + ".bits_per_weight must be >= 1");
      break;
    }
    case WorkloadKind::kAdmm: {
      auto& p = c.admm;
      auto& i = p.instance;
      r.get("dim", i.dim);
      r.get("num_eds", i.num_eds);
      r.get("samples", i.samples);
      r.get("zero_fraction", i.zero_fraction);
      r.get("noise_variance_step", i.noise_variance_step);
      r.get("sparsity", i.sparsity);
      r.get("rho", i.rho);
      r.get("kappa_target", i.kappa_target);
      r.get_enum("dual_init", i.dual_init, [](std::string_view s) {
        if (s == "zero") return DualInit::kZero;
        if (s == "gradient") return DualInit::kGradient;
        throw std::invalid_argument("expected zero | gradient, got " + std::string(s));
      });
      r.get("local_tolerance", p.local.tolerance);
      r.get("local_max_iterations", p.local.max_iterations);
      r.get("alpha", p.alpha);
      r.get("bits_per_entry", p.bits_per_entry);
      r.finish();
      try {
        i.validate();
      } catch (const std::invalid_argument& e) {
        throw ConfigError(r.where() + ": " + e.what());
      }
      require(p.local.tolerance > 0 && p.local.max_iterations >= 1,
              r.where() + ": need local_tolerance > 0, local_max_iterations >= 1");
      require(p.alpha > 0 && p.bits_per_entry >= 1, r.where() + ": need alpha > 0, bits_per_entry >= 1");
      break;
    }
  }
}

inline Json write_workload_block(const ScenarioConfig& c) {
  switch (c.workload) {
    case WorkloadKind::kDemandResponse: {
      const auto& p = c.demand_response;
      return Json{{"num_eds", p.num_eds},           {"cost_max", p.cost_max},
                  {"xi_min", p.xi_min},             {"xi_max_cap", p.xi_max_cap},
                  {"pi_min_per_ed", p.pi_min_per_ed}, {"history_size", p.history_size},
                  {"payload_bytes", p.payload_bytes}};
    }
    case WorkloadKind::kRouting: {
      const auto& p = c.routing;
      return Json{{"grid_size", p.grid_size},       {"tau_lo_max", p.tau_lo_max},
                  {"spread_max", p.spread_max},     {"history_size", p.history_size},
                  {"payload_bytes", p.payload_bytes}};
    }
    case WorkloadKind::kEdgeLearning: {
      const auto& p = c.edge_learning;
      return Json{{"data", write_data(p.data)},        {"offer_size", p.offer_size},
                  {"epochs_per_round", p.epochs_per_round}, {"batch", p.batch},
                  {"learning_rate", p.learning_rate},  {"momentum", p.momentum},
                  {"bytes_per_sample", p.bytes_per_sample}};
    }
    case WorkloadKind::kFederated: {
      const auto& p = c.federated;
      return Json{{"data", write_data(p.data)}, {"batch", p.batch}, {"learning_rate", p.learning_rate},
                  {"kappa", p.kappa}, {"bits_per_weight", p.bits_per_weight}};
    }
    case WorkloadKind::kAdmm: {
      const auto& p = c.admm;
      const auto& i = p.instance;
      return Json{{"dim", i.dim},
                  {"num_eds", i.num_eds},
                  {"samples", i.samples},
                  {"zero_fraction", i.zero_fraction},
                  {"noise_variance_step", i.noise_variance_step},
                  {"sparsity", i.sparsity},
                  {"rho", i.rho},
                  {"kappa_target", i.kappa_target},
                  {"dual_init", i.dual_init == DualInit::kZero ? "zero" : "gradient"},
                  {"local_tolerance", p.local.tolerance},
                  {"local_max_iterations", p.local.max_iterations},
                  {"alpha", p.alpha},
                  {"bits_per_entry", p.bits_per_entry}};
    }
  }
  return Json::object();
}

}  // namespace detail

inline ScenarioConfig parse_config(const Json& j) {
  ScenarioConfig c;
  detail::ObjectReader r(j, "");
  detail::require(r.has("workload"), "missing required key \"workload\"");
  r.get_enum("workload", c.workload, parse_workload_kind);
  c.utility_mode = is_small_payload(c.workload) ? UtilityMode::kExpected : UtilityMode::kExact;
  r.get_enum("policy", c.policy, parse_policy);
  r.get_enum("halt_mode", c.halt, parse_halt_mode);
  r.get("rounds", c.rounds);
  r.get("seed", c.seed);
  r.get_enum("normalization", c.normalization, parse_normalization);
  r.get("timing", c.timing);
  r.get("output", c.output);

  {
    auto ch = r.child("channel");
    ch.get("duration_s", c.rb.duration_s);
    ch.get("bandwidth_hz", c.rb.bandwidth_hz);
    ch.get("noise_power_w", c.rb.noise_power_w);
    ch.get("power_w", c.power_w);
    ch.get("capacity", c.capacity);
    ch.finish();
    try {
      c.rb.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("channel: ") + e.what());
    }
    detail::require(c.power_w > 0, "channel.power_w must be > 0");
    detail::require(c.capacity >= 1, "channel.capacity must be >= 1");
  }
  {
    auto u = r.child("utility");
    u.get_enum("mode", c.utility_mode, parse_utility_mode);
    u.get("samples", c.utility_samples);
    u.finish();
    detail::require(c.utility_samples >= 1, "utility.samples must be >= 1");
  }

  for (auto k : {WorkloadKind::kDemandResponse, WorkloadKind::kRouting, WorkloadKind::kEdgeLearning,
                 WorkloadKind::kFederated, WorkloadKind::kAdmm}) {
    const std::string key(to_string(k));
    if (k != c.workload && r.has(key.c_str())) {
      throw ConfigError("block \"" + key + "\" does not apply to workload " + std::string(to_string(c.workload)));
    }
  }
  detail::read_workload_block(r.child(std::string(to_string(c.workload)).c_str()), c);
  r.finish();
  detail::require(c.rounds >= 1, "rounds must be >= 1");
  return c;
}

inline Json to_json(const ScenarioConfig& c) {
  Json j;
  j["workload"] = to_string(c.workload);
  j["policy"] = to_string(c.policy);
  j["halt_mode"] = to_string(c.halt);
  j["rounds"] = c.rounds;
  j["seed"] = c.seed;
  j["normalization"] = to_string(c.normalization);
  j["timing"] = c.timing;
  j["output"] = c.output;
  j["channel"] = Json{{"duration_s", c.rb.duration_s},
                      {"bandwidth_hz", c.rb.bandwidth_hz},
                      {"noise_power_w", c.rb.noise_power_w},
                      {"power_w", c.power_w},
                      {"capacity", c.capacity}};
  j["utility"] = Json{{"mode", to_string(c.utility_mode)}, {"samples", c.utility_samples}};
  j[std::string(to_string(c.workload))] = detail::write_workload_block(c);
  return j;
}

inline bool operator==(const ScenarioConfig& a, const ScenarioConfig& b) { return to_json(a) == to_json(b); }

inline std::string serialize_config(const ScenarioConfig& c) { return to_json(c).dump(2) + "\n"; }

inline ScenarioConfig parse_config_text(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

inline ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace goalrba
