#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nfvscale/ddpg.hpp"
#include "nfvscale/domain.hpp"
#include "nfvscale/monitor.hpp"
#include "nfvscale/scaling.hpp"
#include "nfvscale/sim.hpp"
#include "nfvscale/traffic.hpp"

namespace nfvs {

// Any config problem (unreadable file, bad JSON, wrong type, out-of-range
// value) lands here; messages carry the offending field path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace cfgdetail {

using nlohmann::json;

inline void check_object(const json& j, const std::string& ctx) {
  if (!j.is_object()) throw ConfigError(ctx + ": expected an object");
}

inline void check_keys(const json& j, const std::string& ctx, const std::set<std::string>& known) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw ConfigError(ctx + it.key() + ": unknown field");
}

template <typename T>
T opt(const json& j, const std::string& ctx, const char* key, T def) {
  if (!j.contains(key)) return def;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(ctx + key + ": wrong type");
  }
}

template <typename T>
T req(const json& j, const std::string& ctx, const char* key) {
  if (!j.contains(key)) throw ConfigError(ctx + key + ": missing required field");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(ctx + key + ": wrong type");
  }
}

}  // namespace cfgdetail

enum class PolicyKind { Static = 0, Proportional, Ddpg };

inline const char* to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::Static: return "static";
    case PolicyKind::Proportional: return "proportional";
    case PolicyKind::Ddpg: return "ddpg";
  }
  return "?";
}

struct PolicyConfig {
  PolicyKind kind = PolicyKind::Static;
  // static
  double upper = 0.8;
  double lower = 0.2;
  // ddpg
  std::string checkpoint;
  // proportional controller on the upper threshold
  double k_i = 0.1;
  double u_set = 0.6;
  double gap = 0.4;
  double initial_upper = 0.8;
};

struct VnfTypeConfig {
  std::string name;
  VnfProfile profile;
  int initial_instances = 1;
};

struct PoolConfig {
  int max_vms = 12;
  int initial_idle = 1;
  int hosts_per_rack = 4;
  int vms_per_host = 1;
  Tick boot_delay = 30;
  Tick migration_base_ticks = 1;
  Tick migration_per_hop_ticks = 1;
};

// Everything one run needs. finalize() fills derived defaults and validates;
// call it once after construction or parsing.
struct RunConfig {
  std::uint64_t seed = 1;
  Tick cycle_len = 60;
  TrafficScenario scenario;
  std::vector<VnfTypeConfig> vnf_types;
  PoolConfig pool;
  PolicyConfig policy;
  EnergyConfig energy;
  SlaPolicy sla;
  Tick emergency_cooldown = -1;  // -1: one cycle
  AgentConfig agent;
  NormalizationConstants norms;
  bool norms_given = false;
  double threshold_margin = kDefaultThresholdMargin;
  double reward_scale = 0.0;  // 0: derive 1/base_rate

  int num_types() const { return static_cast<int>(vnf_types.size()); }

  void finalize() {
    if (vnf_types.empty()) vnf_types.push_back(VnfTypeConfig{"vnf0", VnfProfile{}, 1});
    for (std::size_t i = 0; i < vnf_types.size(); ++i) {
      if (vnf_types[i].name.empty()) vnf_types[i].name = "vnf" + std::to_string(i);
    }
    if (scenario.seed == 0) scenario.seed = seed;
    if (agent.seed == 0) agent.seed = seed;
    agent.feature_dim = feature_vector_length(num_types());
    agent.threshold_margin = threshold_margin;
    if (emergency_cooldown < 0) emergency_cooldown = cycle_len;

    if (!norms_given) {
      const double per_type_rate = scenario.base_rate / std::max(1, num_types());
      const double cycle_packets = per_type_rate * static_cast<double>(cycle_len);
      norms.s = std::max(1.0, 2.0 * cycle_packets);
      norms.l = norms.s;
      double max_q = 0.0;
      for (const auto& t : vnf_types) max_q = std::max(max_q, static_cast<double>(t.profile.max_queue_len));
      norms.q = std::max(1.0, 4.0 * max_q);
      double peak = scenario.base_rate * 1.3;
      if (scenario.pattern == TrafficPattern::SpikyPeriodic)
        peak += scenario.spike_magnitude * scenario.base_rate;
      peak *= 1.0 + scenario.noise_level;
      const double cap = scenario.effective_flow_cap();
      norms.m = std::max(1.0, 2.0 * std::ceil(peak / std::max(1e-9, cap)) /
                                  std::max(1, num_types()));
    }
    if (reward_scale == 0.0)
      reward_scale = scenario.base_rate > 0.0 ? 1.0 / scenario.base_rate : 1.0;
    validate();
  }

  void validate() const {
    if (cycle_len < 1) throw ConfigError("cycle_len: must be >= 1");
    try {
      scenario.validate();
    } catch (const std::exception& e) {
      throw ConfigError(std::string("scenario.") + e.what());
    }
    if (vnf_types.empty()) throw ConfigError("vnf_types: must not be empty");
    int initial = pool.initial_idle;
    for (std::size_t i = 0; i < vnf_types.size(); ++i) {
      const auto ctx = "vnf_types[" + std::to_string(i) + "].";
      try {
        vnf_types[i].profile.validate();
      } catch (const std::exception& e) {
        throw ConfigError(ctx + e.what());
      }
      if (vnf_types[i].initial_instances < 1)
        throw ConfigError(ctx + "initial_instances: must be >= 1");
      initial += vnf_types[i].initial_instances;
    }
    if (pool.max_vms < 1) throw ConfigError("pool.max_vms: must be >= 1");
    if (pool.initial_idle < 0) throw ConfigError("pool.initial_idle: must be >= 0");
    if (pool.hosts_per_rack < 1) throw ConfigError("pool.hosts_per_rack: must be >= 1");
    if (pool.vms_per_host < 1) throw ConfigError("pool.vms_per_host: must be >= 1");
    if (pool.boot_delay < 0) throw ConfigError("pool.boot_delay: must be >= 0");
    if (pool.migration_base_ticks < 0 || pool.migration_per_hop_ticks < 0)
      throw ConfigError("pool: migration tick costs must be >= 0");
    if (initial > pool.max_vms)
      throw ConfigError("pool.max_vms: smaller than initial instances plus initial_idle (" +
                        std::to_string(initial) + ")");
    if (policy.kind == PolicyKind::Static || policy.kind == PolicyKind::Proportional) {
      ThresholdPair tp{policy.upper, policy.lower};
      if (policy.kind == PolicyKind::Proportional) tp.upper = policy.initial_upper;
      if (auto err = validate_thresholds(tp, threshold_margin))
        throw ConfigError("policy: " + *err);
    }
    if (policy.kind == PolicyKind::Proportional) {
      if (!(policy.k_i > 0.0)) throw ConfigError("policy.k_i: must be > 0");
      if (!(policy.u_set > 0.0 && policy.u_set < 1.0))
        throw ConfigError("policy.u_set: must be in (0,1)");
      if (!(policy.gap > 0.0)) throw ConfigError("policy.gap: must be > 0");
    }
    try {
      energy.validate();
      sla.validate();
      agent.validate();
      norms.validate();
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
    if (!(threshold_margin > 0.0 && threshold_margin < 0.45))
      throw ConfigError("threshold_margin: must be in (0, 0.45)");
    if (!(reward_scale > 0.0)) throw ConfigError("reward_scale: must be > 0");
  }
};

inline TrafficPattern parse_pattern(const std::string& s, const std::string& ctx) {
  if (s == "flat_periodic") return TrafficPattern::FlatPeriodic;
  if (s == "spiky_periodic") return TrafficPattern::SpikyPeriodic;
  if (s == "aperiodic") return TrafficPattern::Aperiodic;
  throw ConfigError(ctx + ": unknown pattern '" + s + "'");
}

inline PolicyKind parse_policy_kind(const std::string& s, const std::string& ctx) {
  if (s == "static") return PolicyKind::Static;
  if (s == "proportional") return PolicyKind::Proportional;
  if (s == "ddpg") return PolicyKind::Ddpg;
  throw ConfigError(ctx + ": unknown policy '" + s + "'");
}

inline RunConfig parse_run_config(const nlohmann::json& j) {
  using namespace cfgdetail;
  check_object(j, "config");
  check_keys(j, "",
             {"seed", "cycle_len", "scenario", "vnf_types", "pool", "policy", "energy", "sla",
              "emergency_cooldown", "agent", "norms", "threshold_margin", "reward_scale"});

  RunConfig cfg;
  cfg.seed = opt<std::uint64_t>(j, "", "seed", 1);
  cfg.cycle_len = opt<Tick>(j, "", "cycle_len", 60);
  cfg.threshold_margin = opt<double>(j, "", "threshold_margin", kDefaultThresholdMargin);
  cfg.reward_scale = opt<double>(j, "", "reward_scale", 0.0);
  cfg.emergency_cooldown = opt<Tick>(j, "", "emergency_cooldown", -1);

  if (j.contains("scenario")) {
    const auto& js = j.at("scenario");
    const std::string ctx = "scenario.";
    check_object(js, "scenario");
    check_keys(js, ctx,
               {"pattern", "horizon", "base_rate", "period", "spike_count", "spike_magnitude",
                "noise_level", "seed", "flow_rate_cap", "flow_duration", "spike_offsets"});
    auto& s = cfg.scenario;
    s.pattern = parse_pattern(opt<std::string>(js, ctx, "pattern", "flat_periodic"),
                              ctx + "pattern");
    s.horizon = opt<Tick>(js, ctx, "horizon", s.horizon);
    s.base_rate = opt<double>(js, ctx, "base_rate", s.base_rate);
    s.period = opt<Tick>(js, ctx, "period", s.period);
    s.spike_count = opt<int>(js, ctx, "spike_count", s.spike_count);
    s.spike_magnitude = opt<double>(js, ctx, "spike_magnitude", s.spike_magnitude);
    s.noise_level = opt<double>(js, ctx, "noise_level", s.noise_level);
    s.seed = opt<std::uint64_t>(js, ctx, "seed", 0);
    s.flow_rate_cap = opt<double>(js, ctx, "flow_rate_cap", s.flow_rate_cap);
    s.flow_duration = opt<Tick>(js, ctx, "flow_duration", s.flow_duration);
    s.spike_offsets = opt<std::vector<Tick>>(js, ctx, "spike_offsets", {});
  }

  if (j.contains("vnf_types")) {
    const auto& ja = j.at("vnf_types");
    if (!ja.is_array()) throw ConfigError("vnf_types: expected an array");
    for (std::size_t i = 0; i < ja.size(); ++i) {
      const std::string ctx = "vnf_types[" + std::to_string(i) + "].";
      const auto& jt = ja.at(i);
      check_object(jt, ctx);
      check_keys(jt, ctx,
                 {"name", "per_packet_cost", "max_queue_len", "base_capacity",
                  "initial_instances"});
      VnfTypeConfig t;
      t.name = opt<std::string>(jt, ctx, "name", "");
      t.profile.per_packet_cost = opt<double>(jt, ctx, "per_packet_cost", 1.0);
      t.profile.max_queue_len = opt<std::int64_t>(jt, ctx, "max_queue_len", 100);
      t.profile.base_capacity = opt<double>(jt, ctx, "base_capacity", 100.0);
      t.initial_instances = opt<int>(jt, ctx, "initial_instances", 1);
      cfg.vnf_types.push_back(std::move(t));
    }
  }

  if (j.contains("pool")) {
    const auto& jp = j.at("pool");
    const std::string ctx = "pool.";
    check_object(jp, "pool");
    check_keys(jp, ctx,
               {"max_vms", "initial_idle", "hosts_per_rack", "vms_per_host", "boot_delay",
                "migration_base_ticks", "migration_per_hop_ticks"});
    cfg.pool.max_vms = opt<int>(jp, ctx, "max_vms", cfg.pool.max_vms);
    cfg.pool.initial_idle = opt<int>(jp, ctx, "initial_idle", cfg.pool.initial_idle);
    cfg.pool.hosts_per_rack = opt<int>(jp, ctx, "hosts_per_rack", cfg.pool.hosts_per_rack);
    cfg.pool.vms_per_host = opt<int>(jp, ctx, "vms_per_host", cfg.pool.vms_per_host);
    cfg.pool.boot_delay = opt<Tick>(jp, ctx, "boot_delay", cfg.pool.boot_delay);
    cfg.pool.migration_base_ticks =
        opt<Tick>(jp, ctx, "migration_base_ticks", cfg.pool.migration_base_ticks);
    cfg.pool.migration_per_hop_ticks =
        opt<Tick>(jp, ctx, "migration_per_hop_ticks", cfg.pool.migration_per_hop_ticks);
  }

  if (j.contains("policy")) {
    const auto& jp = j.at("policy");
    const std::string ctx = "policy.";
    check_object(jp, "policy");
    check_keys(jp, ctx,
               {"kind", "upper", "lower", "checkpoint", "k_i", "u_set", "gap", "initial_upper"});
    cfg.policy.kind = parse_policy_kind(opt<std::string>(jp, ctx, "kind", "static"), ctx + "kind");
    cfg.policy.upper = opt<double>(jp, ctx, "upper", cfg.policy.upper);
    cfg.policy.lower = opt<double>(jp, ctx, "lower", cfg.policy.lower);
    cfg.policy.checkpoint = opt<std::string>(jp, ctx, "checkpoint", "");
    cfg.policy.k_i = opt<double>(jp, ctx, "k_i", cfg.policy.k_i);
    cfg.policy.u_set = opt<double>(jp, ctx, "u_set", cfg.policy.u_set);
    cfg.policy.gap = opt<double>(jp, ctx, "gap", cfg.policy.gap);
    cfg.policy.initial_upper = opt<double>(jp, ctx, "initial_upper", cfg.policy.initial_upper);
  }

  if (j.contains("energy")) {
    const auto& je = j.at("energy");
    const std::string ctx = "energy.";
    check_object(je, "energy");
    check_keys(je, ctx, {"ideal_ratio", "min_idle", "max_idle"});
    cfg.energy.ideal_ratio = opt<double>(je, ctx, "ideal_ratio", cfg.energy.ideal_ratio);
    cfg.energy.min_idle = opt<int>(je, ctx, "min_idle", cfg.energy.min_idle);
    cfg.energy.max_idle = opt<int>(je, ctx, "max_idle", cfg.energy.max_idle);
  }

  if (j.contains("sla")) {
    const auto& js = j.at("sla");
    const std::string ctx = "sla.";
    check_object(js, "sla");
    check_keys(js, ctx, {"enabled", "max_loss_rate", "max_queue_frac", "consecutive_ticks"});
    cfg.sla.enabled = opt<bool>(js, ctx, "enabled", cfg.sla.enabled);
    cfg.sla.max_loss_rate = opt<double>(js, ctx, "max_loss_rate", cfg.sla.max_loss_rate);
    cfg.sla.max_queue_frac = opt<double>(js, ctx, "max_queue_frac", cfg.sla.max_queue_frac);
    cfg.sla.consecutive_ticks = opt<int>(js, ctx, "consecutive_ticks", cfg.sla.consecutive_ticks);
  }

  if (j.contains("agent")) {
    const auto& ja = j.at("agent");
    const std::string ctx = "agent.";
    check_object(ja, "agent");
    check_keys(ja, ctx,
               {"actor_hidden", "critic_hidden", "actor_lr", "critic_lr", "gamma", "tau",
                "buffer_capacity", "batch_size", "ou_theta", "ou_sigma", "ou_sigma_decay",
                "ou_sigma_min", "optimizer", "seed"});
    auto& a = cfg.agent;
    a.actor_hidden = opt<std::vector<int>>(ja, ctx, "actor_hidden", a.actor_hidden);
    a.critic_hidden = opt<std::vector<int>>(ja, ctx, "critic_hidden", a.critic_hidden);
    a.actor_lr = opt<double>(ja, ctx, "actor_lr", a.actor_lr);
    a.critic_lr = opt<double>(ja, ctx, "critic_lr", a.critic_lr);
    a.gamma = opt<double>(ja, ctx, "gamma", a.gamma);
    a.tau = opt<double>(ja, ctx, "tau", a.tau);
    a.buffer_capacity = opt<std::size_t>(ja, ctx, "buffer_capacity", a.buffer_capacity);
    a.batch_size = opt<std::size_t>(ja, ctx, "batch_size", a.batch_size);
    a.ou_theta = opt<double>(ja, ctx, "ou_theta", a.ou_theta);
    a.ou_sigma = opt<double>(ja, ctx, "ou_sigma", a.ou_sigma);
    a.ou_sigma_decay = opt<double>(ja, ctx, "ou_sigma_decay", a.ou_sigma_decay);
    a.ou_sigma_min = opt<double>(ja, ctx, "ou_sigma_min", a.ou_sigma_min);
    const std::string optname = opt<std::string>(ja, ctx, "optimizer", "adam");
    if (optname == "adam")
      a.use_adam = true;
    else if (optname == "sgd")
      a.use_adam = false;
    else
      throw ConfigError(ctx + "optimizer: must be 'adam' or 'sgd'");
    a.seed = opt<std::uint64_t>(ja, ctx, "seed", 0);
  }

  if (j.contains("norms")) {
    const auto& jn = j.at("norms");
    const std::string ctx = "norms.";
    check_object(jn, "norms");
    check_keys(jn, ctx, {"m", "s", "l", "q"});
    cfg.norms.m = opt<double>(jn, ctx, "m", cfg.norms.m);
    cfg.norms.s = opt<double>(jn, ctx, "s", cfg.norms.s);
    cfg.norms.l = opt<double>(jn, ctx, "l", cfg.norms.l);
    cfg.norms.q = opt<double>(jn, ctx, "q", cfg.norms.q);
    cfg.norms_given = true;
  }

  cfg.finalize();
  return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": invalid JSON: " + e.what());
  }
  return parse_run_config(j);
}

}  // namespace nfvs
