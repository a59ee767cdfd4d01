#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nfvscale/config.hpp"
#include "nfvscale/csv.hpp"
#include "nfvscale/ddpg.hpp"
#include "nfvscale/domain.hpp"
#include "nfvscale/monitor.hpp"
#include "nfvscale/policy.hpp"
#include "nfvscale/rng.hpp"
#include "nfvscale/scaling.hpp"
#include "nfvscale/sim.hpp"
#include "nfvscale/traffic.hpp"

namespace nfvs {

// Host-weighted penalty metrics: completion time (or latency) scaled by the
// peak number of powered-on VMs.
inline double metric_alpha(double mean_flow_completion, int n_peak) {
  return mean_flow_completion * static_cast<double>(n_peak);
}

inline double metric_pun(double mean_latency, int n_peak) {
  return mean_latency * static_cast<double>(n_peak);
}

struct RunMetrics {
  std::int64_t generated = 0;
  std::int64_t processed = 0;
  std::int64_t dropped = 0;
  std::int64_t residual = 0;  // still queued or buffered at the end
  double packet_loss_rate = 0.0;
  double mean_flow_completion = 0.0;  // ticks, over loss-free finished flows
  double mean_latency = 0.0;          // per packet
  double alpha = 0.0;                 // completion time x peak pool size
  double pun = 0.0;                   // latency x peak pool size
  int n_peak = 0;
  std::int64_t vm_ticks = 0;
  std::int64_t flows_completed = 0;
  std::int64_t flows_with_loss = 0;
  std::int64_t flows_residual = 0;
  std::int64_t cycles = 0;
  double mean_reward = 0.0;  // unscaled, per cycle
};

struct CycleResult {
  std::vector<VnfObservation> obs;
  std::vector<std::vector<double>> features;
  double reward_scaled = 0.0;
  double reward_raw = 0.0;
  bool done = false;
};

// Owns one simulation run end to end: traffic, world, scaling engine, SLA
// monitor and all output logs. Drives the world one monitoring cycle at a
// time; the caller supplies the thresholds for each cycle.
class SimDriver {
 public:
  explicit SimDriver(RunConfig cfg) : cfg_(std::move(cfg)) {
    SimConfig sc;
    sc.boot_delay = cfg_.pool.boot_delay;
    sc.max_vms = cfg_.pool.max_vms;
    sc.hosts_per_rack = cfg_.pool.hosts_per_rack;
    sc.vms_per_host = cfg_.pool.vms_per_host;
    sc.base_migration_ticks = cfg_.pool.migration_base_ticks;
    sc.per_hop_ticks = cfg_.pool.migration_per_hop_ticks;
    for (const auto& t : cfg_.vnf_types) sc.profiles.push_back(t.profile);
    world_ = std::make_unique<World>(sc);

    for (int type = 0; type < cfg_.num_types(); ++type)
      for (int k = 0; k < cfg_.vnf_types[static_cast<std::size_t>(type)].initial_instances; ++k)
        world_->deploy_instance(type);
    for (int k = 0; k < cfg_.pool.initial_idle; ++k) world_->warm_idle_vm();

    engine_ = std::make_unique<ScalingEngine>(cfg_.energy);
    engine_->sync_from_world(*world_);
    monitor_ = std::make_unique<ResourceMonitor>(cfg_.sla, *world_);
    emergency_ = std::make_unique<EmergencyProcessor>(cfg_.emergency_cooldown);

    flows_ = generate(cfg_.scenario, cfg_.num_types());
    for (const auto& f : flows_) world_->register_flow(f);
    quantizers_.resize(flows_.size());
    for (const auto& f : flows_)
      quantizers_[static_cast<std::size_t>(f.flow_id)] = PacketQuantizer(flow_phase(f.flow_id));

    ticks_csv_ = std::make_unique<CsvBuilder>(
        "tick,vm,vnf_type,arrivals,processed,dropped,queue,util,powered_on");
    alarms_csv_ = std::make_unique<CsvBuilder>("tick,vnf_type,vm,cause,acted");
  }

  const RunConfig& config() const { return cfg_; }
  const World& world() const { return *world_; }
  const ScalingEngine& engine() const { return *engine_; }
  bool done() const { return world_->now() >= cfg_.scenario.horizon; }

  // Observation and feature layout for "nothing has happened yet", used for
  // the first decision at tick 0.
  std::vector<VnfObservation> initial_observations() const {
    std::vector<VnfObservation> obs(static_cast<std::size_t>(cfg_.num_types()));
    for (int t = 0; t < cfg_.num_types(); ++t) obs[static_cast<std::size_t>(t)].f = t;
    return obs;
  }

  std::vector<std::vector<double>> features_of(const std::vector<VnfObservation>& obs) const {
    std::vector<std::vector<double>> out;
    out.reserve(obs.size());
    for (const auto& o : obs)
      out.push_back(observation_to_feature_vector(o, cfg_.norms, cfg_.num_types()));
    return out;
  }

  // Applies boundary decisions for the thresholds, then advances one cycle
  // (or to the horizon, whichever is closer) and reports the new state.
  CycleResult run_cycle(const std::vector<ActResult>& acts) {
    if (acts.size() != static_cast<std::size_t>(cfg_.num_types()))
      throw std::invalid_argument("run_cycle: one action per vnf type required");
    if (done()) throw std::logic_error("run_cycle: horizon already reached");

    std::vector<ThresholdPair> tps;
    tps.reserve(acts.size());
    for (const auto& a : acts) tps.push_back(a.thresholds);
    engine_->set_thresholds(tps);

    const Tick now = world_->now();
    if (boundary_ > 0) apply_boundary_decisions(tps, now);

    std::vector<CycleTypeAgg> agg(static_cast<std::size_t>(cfg_.num_types()));
    const Tick cycle_end = std::min<Tick>(now + cfg_.cycle_len, cfg_.scenario.horizon);
    while (world_->now() < cycle_end) run_tick(agg);

    CycleResult res;
    res.obs = world_->snapshot_observations();
    res.features = features_of(res.obs);
    std::vector<VnfCycleAggregate> reward_in;
    for (const auto& a : agg) {
      VnfCycleAggregate r;
      r.processed = static_cast<double>(a.processed);
      r.dropped = static_cast<double>(a.dropped);
      r.mean_queue = a.ticks > 0 ? a.queue_sum / static_cast<double>(a.ticks) : 0.0;
      reward_in.push_back(r);
    }
    res.reward_raw = compute_reward(reward_in, 1.0);
    res.reward_scaled = res.reward_raw * cfg_.reward_scale;
    res.done = done();
    reward_sum_ += res.reward_raw;
    ++cycles_;
    last_obs_ = res.obs;
    ++boundary_;
    return res;
  }

  // Aggregated results; valid once done().
  RunMetrics finish() const {
    RunMetrics m;
    m.generated = world_->total_generated();
    m.processed = world_->total_processed();
    m.dropped = world_->total_dropped();
    m.residual = world_->residual_queued();
    m.packet_loss_rate =
        m.generated > 0 ? static_cast<double>(m.dropped) / static_cast<double>(m.generated) : 0.0;

    double completion_sum = 0.0;
    for (const auto& [id, fr] : world_->flows()) {
      const std::int64_t leftover = fr.generated - fr.processed - fr.dropped;
      if (leftover > 0) {
        ++m.flows_residual;
      } else if (fr.dropped > 0) {
        ++m.flows_with_loss;
      } else {
        ++m.flows_completed;
        if (fr.generated > 0)
          completion_sum += static_cast<double>(fr.last_departure - fr.spec.arrival_tick + 1);
      }
    }
    if (m.flows_completed > 0)
      m.mean_flow_completion = completion_sum / static_cast<double>(m.flows_completed);
    m.mean_latency = latency_count_ > 0
                         ? static_cast<double>(latency_sum_) / static_cast<double>(latency_count_)
                         : 0.0;
    m.n_peak = peak_powered_;
    m.vm_ticks = vm_ticks_;
    m.alpha = metric_alpha(m.mean_flow_completion, m.n_peak);
    m.pun = metric_pun(m.mean_latency, m.n_peak);
    m.cycles = cycles_;
    m.mean_reward = cycles_ > 0 ? reward_sum_ / static_cast<double>(cycles_) : 0.0;
    return m;
  }

  std::string metrics_csv(const std::string& policy_name) const {
    const RunMetrics m = finish();
    CsvBuilder csv(
        "seed,pattern,policy,horizon,cycle_len,generated,processed,dropped,residual,"
        "packet_loss_rate,mean_flow_completion_time,mean_latency,alpha,pun,n_peak,vm_ticks,"
        "flows_completed,flows_with_loss,flows_residual,cycles,mean_reward");
    csv.row(csv_num(static_cast<std::int64_t>(cfg_.seed)), to_string(cfg_.scenario.pattern),
            policy_name, csv_num(cfg_.scenario.horizon), csv_num(cfg_.cycle_len), m.generated,
            m.processed, m.dropped, m.residual, m.packet_loss_rate, m.mean_flow_completion,
            m.mean_latency, m.alpha, m.pun, m.n_peak, m.vm_ticks, m.flows_completed,
            m.flows_with_loss, m.flows_residual, m.cycles, m.mean_reward);
    return csv.str();
  }

  const std::string& ticks_csv() const { return ticks_csv_->str(); }
  const std::string& alarms_csv() const { return alarms_csv_->str(); }

  std::string decisions_csv() const {
    CsvBuilder csv(
        "tick,vnf_type,action,origin,victim,destination,migrated_flows,n_run,n_idle,"
        "measured_ratio,idle_target");
    for (const auto& d : engine_->log())
      csv.row(csv_num(d.tick), d.vnf_type, d.action, to_string(d.origin), d.victim, d.destination,
              d.migrated_flows, d.n_run, d.n_idle, d.measured_ratio, d.idle_target);
    return csv.str();
  }

  FlowRateFn rate_fn() {
    return [this](int flow_id) {
      const auto& f = flows_.at(static_cast<std::size_t>(flow_id));
      return f.rate_at(world_->now());
    };
  }

 private:
  struct CycleTypeAgg {
    std::int64_t processed = 0;
    std::int64_t dropped = 0;
    double queue_sum = 0.0;
    Tick ticks = 0;
  };

  void apply_boundary_decisions(const std::vector<ThresholdPair>& tps, Tick now) {
    auto rates = rate_fn();
    for (int type = 0; type < cfg_.num_types(); ++type) {
      const auto& obs = last_obs_[static_cast<std::size_t>(type)];
      const auto& tp = tps[static_cast<std::size_t>(type)];
      const int running = engine_->running_count(*world_, type);
      const ScaleAction act = evaluate_thresholds(obs, tp, running);
      if (act == ScaleAction::ScaleOut) {
        const int src = engine_->busiest_instance(*world_, type);
        engine_->scale_out(*world_, type, src, tp, rates, now, DecisionOrigin::Cycle);
      } else if (act == ScaleAction::ScaleIn) {
        engine_->scale_in(*world_, type, tp, rates, now);
      } else {
        world_->set_last_action(type, ScaleAction::NoOp);
      }
    }

    // Pool maintenance from the elapsed window: measured efficiency of the
    // powered fleet against the ideal, idle pool resized to match.
    const int n_run = static_cast<int>(engine_->queues().running.size());
    const int n_idle = static_cast<int>(engine_->queues().idle.size());
    if (n_run + n_idle > 0 && window_volume_ >= 0) {
      double h_mean = 0.0;
      for (const auto& tp : tps) h_mean += tp.upper;
      h_mean /= static_cast<double>(tps.size());
      EnergyRatioInputs in;
      in.v_total = static_cast<double>(window_volume_);
      in.n_run = n_run;
      in.n_idle = n_idle;
      in.h = h_mean;
      in.t = cfg_.cycle_len;
      const double ratio = energy_ratio(in);
      const int target = tuned_idle_count(ratio, cfg_.energy.ideal_ratio, n_run, n_idle);
      engine_->resize_idle_pool(*world_, target, now, ratio);
    }
    window_volume_ = 0;
    engine_->retry_deferred(*world_, rates, now);
  }

  void run_tick(std::vector<CycleTypeAgg>& agg) {
    const Tick t = world_->now();
    auto rates = rate_fn();

    std::vector<std::pair<int, int>> inputs;
    for (auto& f : flows_) {
      if (t == f.arrival_tick + f.duration) world_->end_flow(f.flow_id);
      if (!f.active_at(t)) continue;
      const int pkts = quantizers_[static_cast<std::size_t>(f.flow_id)].emit(f.rate_at(t));
      if (pkts > 0) inputs.emplace_back(f.flow_id, pkts);
    }

    const TickReport report = world_->step(inputs);
    engine_->observe_events(report);
    engine_->retry_deferred(*world_, rates, report.tick);

    if (auto alarm = monitor_->monitor_tick(report)) {
      const auto& tp = engine_->thresholds().at(static_cast<std::size_t>(alarm->vnf_type));
      const auto dec = emergency_->emergency_scale(*world_, *engine_, *alarm, tp, rates);
      alarms_csv_->row(csv_num(alarm->tick), alarm->vnf_type, alarm->vm, to_string(alarm->cause),
                       dec.has_value() ? 1 : 0);
    }

    const int powered = world_->powered_on_count();
    peak_powered_ = std::max(peak_powered_, powered);
    vm_ticks_ += powered;
    latency_sum_ += report.latency_sum;
    latency_count_ += report.latency_count;

    for (const auto& row : report.rows) {
      auto& a = agg[static_cast<std::size_t>(row.vnf_type)];
      a.processed += row.processed;
      a.dropped += row.dropped;
      a.queue_sum += static_cast<double>(row.queue);
      window_volume_ += row.processed;
      ticks_csv_->row(csv_num(report.tick), row.vm, row.vnf_type, row.arrivals, row.processed,
                      row.dropped, row.queue, row.util, powered);
    }
    for (auto& a : agg) ++a.ticks;
  }

  RunConfig cfg_;
  std::unique_ptr<World> world_;
  std::unique_ptr<ScalingEngine> engine_;
  std::unique_ptr<ResourceMonitor> monitor_;
  std::unique_ptr<EmergencyProcessor> emergency_;
  std::vector<FlowSpec> flows_;
  std::vector<PacketQuantizer> quantizers_;
  std::vector<VnfObservation> last_obs_;
  std::unique_ptr<CsvBuilder> ticks_csv_;
  std::unique_ptr<CsvBuilder> alarms_csv_;
  int boundary_ = 0;
  std::int64_t window_volume_ = 0;
  std::int64_t latency_sum_ = 0;
  std::int64_t latency_count_ = 0;
  std::int64_t vm_ticks_ = 0;
  int peak_powered_ = 0;
  std::int64_t cycles_ = 0;
  double reward_sum_ = 0.0;
};

struct EpisodeResult {
  double total_scaled_reward = 0.0;
  double mean_raw_reward = 0.0;
  double mean_critic_loss = 0.0;
  double mean_actor_objective = 0.0;
  int train_steps = 0;
  RunMetrics metrics;
};

// Plays the driver's scenario to the horizon with the agent picking
// thresholds each cycle. With learn set, transitions are stored and one
// train step runs per cycle once the buffer can serve a batch.
inline EpisodeResult run_episode(SimDriver& driver, DdpgAgent& agent, bool explore, bool learn) {
  EpisodeResult out;
  auto obs = driver.initial_observations();
  auto features = driver.features_of(obs);
  agent.reset_noise();

  while (!driver.done()) {
    std::vector<ActResult> acts;
    acts.reserve(features.size());
    for (const auto& f : features) acts.push_back(agent.act(f, explore));
    const CycleResult res = driver.run_cycle(acts);
    out.total_scaled_reward += res.reward_scaled;
    out.mean_raw_reward += res.reward_raw;

    if (learn) {
      for (std::size_t t = 0; t < features.size(); ++t) {
        Transition tr;
        tr.state = features[t];
        tr.action = {acts[t].raw[0], acts[t].raw[1]};
        tr.reward = res.reward_scaled;
        tr.next_state = res.features[t];
        tr.terminal = res.done;
        agent.remember(std::move(tr));
      }
      if (agent.can_train()) {
        const TrainStats st = agent.train_step();
        out.mean_critic_loss += st.critic_loss;
        out.mean_actor_objective += st.actor_objective;
        ++out.train_steps;
      }
    }
    features = res.features;
  }

  out.metrics = driver.finish();
  if (out.metrics.cycles > 0) out.mean_raw_reward /= static_cast<double>(out.metrics.cycles);
  if (out.train_steps > 0) {
    out.mean_critic_loss /= static_cast<double>(out.train_steps);
    out.mean_actor_objective /= static_cast<double>(out.train_steps);
  }
  return out;
}

struct RunOutputs {
  RunMetrics metrics;
  std::string policy_name;
};

namespace fsdetail {

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << content;
}

}  // namespace fsdetail

inline void write_run_outputs(const SimDriver& driver, const std::string& policy_name,
                              const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  fsdetail::write_file(out_dir / "metrics.csv", driver.metrics_csv(policy_name));
  fsdetail::write_file(out_dir / "ticks.csv", driver.ticks_csv());
  fsdetail::write_file(out_dir / "decisions.csv", driver.decisions_csv());
  fsdetail::write_file(out_dir / "alarms.csv", driver.alarms_csv());
}

// Executes one full run of the configured policy and writes the four output
// files to out_dir (when given).
inline RunOutputs run(const RunConfig& cfg, const std::optional<std::filesystem::path>& out_dir) {
  SimDriver driver(cfg);
  RunOutputs out;

  if (cfg.policy.kind == PolicyKind::Ddpg) {
    DdpgAgent agent(cfg.agent);
    if (!cfg.policy.checkpoint.empty()) {
      std::ifstream in(cfg.policy.checkpoint);
      if (!in) throw ConfigError("policy.checkpoint: cannot open " + cfg.policy.checkpoint);
      agent.load(in);
    }
    const EpisodeResult ep = run_episode(driver, agent, false, false);
    out.metrics = ep.metrics;
    out.policy_name = "ddpg";
  } else {
    std::unique_ptr<ThresholdProvider> provider;
    if (cfg.policy.kind == PolicyKind::Static)
      provider = std::make_unique<StaticProvider>(
          ThresholdPair{cfg.policy.upper, cfg.policy.lower}, cfg.num_types(),
          cfg.threshold_margin);
    else
      provider = std::make_unique<ProportionalProvider>(cfg.policy, cfg.num_types());

    auto obs = driver.initial_observations();
    auto features = driver.features_of(obs);
    while (!driver.done()) {
      const auto acts = provider->decide(obs, features);
      const CycleResult res = driver.run_cycle(acts);
      obs = res.obs;
      features = res.features;
    }
    out.metrics = driver.finish();
    out.policy_name = provider->name();
  }

  if (out_dir) write_run_outputs(driver, out.policy_name, *out_dir);
  return out;
}

struct TrainOutputs {
  std::filesystem::path best_checkpoint;
  std::filesystem::path last_checkpoint;
  double best_alpha = 0.0;
  int best_episode = 0;
  std::string curve_csv;
};

// Trains for the given number of episodes over seeded scenario variants,
// evaluating after each on a fixed held-out variant. The checkpoint with the
// lowest evaluation alpha wins.
inline TrainOutputs train(const RunConfig& cfg, int episodes,
                          const std::filesystem::path& out_dir) {
  if (episodes < 0) throw ConfigError("episodes: must be >= 0");
  std::filesystem::create_directories(out_dir);
  DdpgAgent agent(cfg.agent);

  CsvBuilder curve(
      "episode,train_reward,train_critic_loss,train_actor_objective,noise_sigma,"
      "eval_alpha,eval_loss_rate,eval_mean_reward,best");
  TrainOutputs out;
  out.best_checkpoint = out_dir / "checkpoint_best.txt";
  out.last_checkpoint = out_dir / "checkpoint_last.txt";
  out.best_alpha = 0.0;
  out.best_episode = -1;

  const auto save_agent = [&](const std::filesystem::path& p) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    agent.save(os);
  };

  for (int ep = 1; ep <= episodes; ++ep) {
    RunConfig train_cfg = cfg;
    train_cfg.scenario.seed = derive_seed(cfg.scenario.seed, 0x7000u + static_cast<unsigned>(ep));
    SimDriver train_driver(train_cfg);
    const EpisodeResult tr = run_episode(train_driver, agent, true, true);
    agent.decay_noise();

    RunConfig eval_cfg = cfg;
    eval_cfg.scenario.seed = derive_seed(cfg.scenario.seed, 0xE0A1u);
    SimDriver eval_driver(eval_cfg);
    const EpisodeResult ev = run_episode(eval_driver, agent, false, false);

    const bool is_best = out.best_episode < 0 || ev.metrics.alpha < out.best_alpha;
    if (is_best) {
      out.best_alpha = ev.metrics.alpha;
      out.best_episode = ep;
      save_agent(out.best_checkpoint);
    }
    curve.row(ep, tr.total_scaled_reward, tr.mean_critic_loss, tr.mean_actor_objective,
              agent.noise_sigma(), ev.metrics.alpha, ev.metrics.packet_loss_rate,
              ev.metrics.mean_reward, is_best ? 1 : 0);
  }

  save_agent(out.last_checkpoint);
  if (out.best_episode < 0) save_agent(out.best_checkpoint);
  out.curve_csv = curve.str();
  fsdetail::write_file(out_dir / "learning_curve.csv", out.curve_csv);
  return out;
}

}  // namespace nfvs
