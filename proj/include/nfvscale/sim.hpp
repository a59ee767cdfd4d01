#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nfvscale/domain.hpp"

namespace nfvs {

struct Location {
  int rack = 0;
  int host = 0;
};

// Hop distance used for migration cost and placement: 0 on the same host,
// 1 within a rack, 1 + rack gap across racks.
inline int distance(const Location& a, const Location& b) {
  if (a.rack == b.rack) return a.host == b.host ? 0 : 1;
  return 1 + std::abs(a.rack - b.rack);
}

enum class VmState { Off = 0, Booting, Idle, Running, Draining };

inline const char* to_string(VmState s) {
  switch (s) {
    case VmState::Off: return "off";
    case VmState::Booting: return "booting";
    case VmState::Idle: return "idle";
    case VmState::Running: return "running";
    case VmState::Draining: return "draining";
  }
  return "?";
}

struct VmSlot {
  int vm_id = -1;
  VmState state = VmState::Off;
  Tick boot_remaining = 0;  // valid while Booting
  int vnf_type = -1;        // valid while Running/Draining
  Location location;
  Tick enqueued_at = 0;     // tick the slot last became Idle

  bool powered_on() const { return state != VmState::Off; }
};

struct SimConfig {
  Tick boot_delay = 30;
  int max_vms = 12;
  int hosts_per_rack = 4;
  int vms_per_host = 1;
  Tick base_migration_ticks = 1;
  Tick per_hop_ticks = 1;
  std::vector<VnfProfile> profiles;  // indexed by VNF type id

  void validate() const {
    if (max_vms < 1) throw std::invalid_argument("SimConfig: max_vms must be >= 1");
    if (hosts_per_rack < 1) throw std::invalid_argument("SimConfig: hosts_per_rack must be >= 1");
    if (vms_per_host < 1) throw std::invalid_argument("SimConfig: vms_per_host must be >= 1");
    if (boot_delay < 0) throw std::invalid_argument("SimConfig: boot_delay must be >= 0");
    if (base_migration_ticks < 0 || per_hop_ticks < 0)
      throw std::invalid_argument("SimConfig: migration ticks must be >= 0");
    if (profiles.empty()) throw std::invalid_argument("SimConfig: need at least one VNF profile");
    for (const auto& p : profiles) p.validate();
  }
};

struct QueuedPacket {
  Tick enqueued = 0;
  int flow_id = -1;
};

// Live state of a Running or Draining VM.
struct VnfInstance {
  int vm = -1;
  int vnf_type = -1;
  std::deque<QueuedPacket> queue;
  std::set<int> active_flows;
  double cpu_util = 0.0;
  // this-tick counters
  std::int64_t arrivals = 0;
  std::int64_t processed = 0;
  std::int64_t dropped = 0;
  // since the last observation snapshot
  std::int64_t win_processed = 0;
  std::int64_t win_dropped = 0;
};

// One flow in motion between instances. Packets arriving for the flow are
// held at the destination (counted against its queue) until the move
// completes; the flow itself is paused at the source.
struct MigrationJob {
  int job_id = -1;
  int flow_id = -1;
  int src_vm = -1;
  int dst_vm = -1;
  Tick remaining = 0;
  std::deque<QueuedPacket> buffered;
};

struct InstanceTickRow {
  int vm = -1;
  int vnf_type = -1;
  std::int64_t arrivals = 0;
  std::int64_t processed = 0;
  std::int64_t dropped = 0;
  std::int64_t queue = 0;
  double util = 0.0;
};

enum class SimEventKind { BootComplete, VmIdle, MigrationComplete };

struct SimEvent {
  SimEventKind kind;
  int vm = -1;
  int flow = -1;
};

struct TickReport {
  Tick tick = 0;
  std::vector<InstanceTickRow> rows;  // ascending vm order
  std::vector<SimEvent> events;
  std::int64_t latency_sum = 0;
  std::int64_t latency_count = 0;
};

// Per-flow bookkeeping the world maintains for routing and accounting.
struct FlowRuntime {
  FlowSpec spec;
  int routed_vm = -1;    // -1 until routed / while migrating
  int migration = -1;    // job id, -1 if none
  bool ended = false;
  std::int64_t generated = 0;
  std::int64_t processed = 0;
  std::int64_t dropped = 0;
  Tick last_departure = -1;
};

class PoolExhaustedError : public std::runtime_error {
 public:
  PoolExhaustedError() : std::runtime_error("VM pool exhausted") {}
};

class RoutingError : public std::runtime_error {
 public:
  explicit RoutingError(const std::string& what) : std::runtime_error(what) {}
};

// Tick-based plant: VM lifecycle, per-instance FIFO queues, drops, CPU
// utilization and flow migration. Single mutator; snapshots are values.
class World {
 public:
  explicit World(SimConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    vms_.resize(static_cast<std::size_t>(cfg_.max_vms));
    for (int i = 0; i < cfg_.max_vms; ++i) {
      const int host_index = i / cfg_.vms_per_host;
      vms_[static_cast<std::size_t>(i)].vm_id = i;
      vms_[static_cast<std::size_t>(i)].location = {host_index / cfg_.hosts_per_rack,
                                                    host_index % cfg_.hosts_per_rack};
    }
    last_action_.assign(cfg_.profiles.size(), ScaleAction::NoOp);
  }

  const SimConfig& config() const { return cfg_; }
  Tick now() const { return tick_; }
  int num_types() const { return static_cast<int>(cfg_.profiles.size()); }
  const VnfProfile& profile(int type) const {
    return cfg_.profiles.at(static_cast<std::size_t>(type));
  }

  const std::vector<VmSlot>& vms() const { return vms_; }
  const VmSlot& vm(int id) const { return vms_.at(static_cast<std::size_t>(id)); }
  const std::map<int, VnfInstance>& instances() const { return instances_; }
  const VnfInstance& instance(int vm) const {
    auto it = instances_.find(vm);
    if (it == instances_.end()) throw std::out_of_range("no instance on vm " + std::to_string(vm));
    return it->second;
  }
  const std::map<int, MigrationJob>& migrations() const { return migrations_; }
  const std::map<int, FlowRuntime>& flows() const { return flows_; }

  // ---- setup ------------------------------------------------------------

  // Off -> Running on the lowest free slot; used for initial deployment.
  int deploy_instance(int vnf_type) {
    const int vm = find_off_slot(std::nullopt);
    if (vm < 0) throw PoolExhaustedError();
    auto& slot = vms_[static_cast<std::size_t>(vm)];
    slot.state = VmState::Running;
    slot.vnf_type = vnf_type;
    make_instance(vm, vnf_type);
    return vm;
  }

  // Off -> Idle on the lowest free slot; used to pre-warm the idle pool.
  int warm_idle_vm() {
    const int vm = find_off_slot(std::nullopt);
    if (vm < 0) throw PoolExhaustedError();
    auto& slot = vms_[static_cast<std::size_t>(vm)];
    slot.state = VmState::Idle;
    slot.enqueued_at = tick_;
    return vm;
  }

  void register_flow(const FlowSpec& spec) {
    spec.validate();
    if (spec.vnf_type < 0 || spec.vnf_type >= num_types())
      throw std::invalid_argument("register_flow: unknown vnf_type");
    if (!flows_.emplace(spec.flow_id, FlowRuntime{spec}).second)
      throw std::invalid_argument("register_flow: duplicate flow id");
  }

  // ---- lifecycle operations ----------------------------------------------

  // Powers on an Off slot; it becomes Idle after max(1, boot_delay) ticks.
  int boot_vm(std::optional<Location> hint) {
    const int vm = find_off_slot(hint);
    if (vm < 0) throw PoolExhaustedError();
    auto& slot = vms_[static_cast<std::size_t>(vm)];
    slot.state = VmState::Booting;
    slot.boot_remaining = std::max<Tick>(1, cfg_.boot_delay);
    return vm;
  }

  int booting_count() const {
    int n = 0;
    for (const auto& s : vms_)
      if (s.state == VmState::Booting) ++n;
    return n;
  }

  void set_running(int vm, int vnf_type) {
    auto& slot = mutable_vm(vm);
    if (slot.state != VmState::Idle)
      throw std::logic_error("set_running: vm " + std::to_string(vm) + " is not idle");
    if (vnf_type < 0 || vnf_type >= num_types())
      throw std::invalid_argument("set_running: unknown vnf_type");
    slot.state = VmState::Running;
    slot.vnf_type = vnf_type;
    make_instance(vm, vnf_type);
  }

  // Running -> Draining. Returns true when the instance was already empty
  // and went straight to Idle.
  bool begin_drain(int vm) {
    auto& slot = mutable_vm(vm);
    if (slot.state != VmState::Running)
      throw std::logic_error("begin_drain: vm " + std::to_string(vm) + " is not running");
    auto& inst = instances_.at(vm);
    if (inst.queue.empty() && inst.active_flows.empty() && !has_inbound_migration(vm)) {
      instances_.erase(vm);
      slot.state = VmState::Idle;
      slot.vnf_type = -1;
      slot.enqueued_at = tick_;
      return true;
    }
    slot.state = VmState::Draining;
    return false;
  }

  void power_off(int vm) {
    auto& slot = mutable_vm(vm);
    if (slot.state != VmState::Idle)
      throw std::logic_error("power_off: vm " + std::to_string(vm) + " is not idle");
    slot.state = VmState::Off;
    slot.vnf_type = -1;
  }

  // Starts moving a flow between same-type Running instances. Cost is
  // base_migration_ticks + hop distance * per_hop_ticks.
  const MigrationJob& start_migration(int flow_id, int src_vm, int dst_vm) {
    auto fit = flows_.find(flow_id);
    if (fit == flows_.end()) throw std::invalid_argument("start_migration: unknown flow");
    FlowRuntime& fr = fit->second;
    if (fr.migration >= 0)
      throw std::logic_error("start_migration: flow " + std::to_string(flow_id) +
                             " is already migrating");
    if (fr.routed_vm != src_vm)
      throw std::logic_error("start_migration: flow " + std::to_string(flow_id) +
                             " is not active at vm " + std::to_string(src_vm));
    const VmSlot& dst = vm(dst_vm);
    if (dst.state != VmState::Running)
      throw std::logic_error("start_migration: destination vm is not running");
    auto sit = instances_.find(src_vm);
    if (sit == instances_.end())
      throw std::logic_error("start_migration: source has no instance");
    if (dst.vnf_type != sit->second.vnf_type)
      throw std::logic_error("start_migration: vnf type mismatch");

    MigrationJob job;
    job.job_id = next_job_id_++;
    job.flow_id = flow_id;
    job.src_vm = src_vm;
    job.dst_vm = dst_vm;
    job.remaining = cfg_.base_migration_ticks +
                    static_cast<Tick>(distance(vm(src_vm).location, dst.location)) *
                        cfg_.per_hop_ticks;
    sit->second.active_flows.erase(flow_id);
    fr.routed_vm = -1;
    fr.migration = job.job_id;
    auto [it, ok] = migrations_.emplace(job.job_id, std::move(job));
    (void)ok;
    return it->second;
  }

  void set_last_action(int type, ScaleAction a) {
    last_action_.at(static_cast<std::size_t>(type)) = a;
  }
  ScaleAction last_action(int type) const {
    return last_action_.at(static_cast<std::size_t>(type));
  }

  // The flow will emit no further packets; it stops counting as active.
  void end_flow(int flow_id) {
    auto it = flows_.find(flow_id);
    if (it == flows_.end()) return;
    FlowRuntime& fr = it->second;
    fr.ended = true;
    if (fr.routed_vm >= 0) {
      auto iit = instances_.find(fr.routed_vm);
      if (iit != instances_.end()) iit->second.active_flows.erase(flow_id);
    }
  }

  // ---- the tick ----------------------------------------------------------

  // Advances one tick. tick_inputs maps flow id -> integer packets offered
  // this tick, ascending by flow id.
  TickReport step(const std::vector<std::pair<int, int>>& tick_inputs) {
    TickReport report;
    report.tick = tick_;

    for (auto& [vm, inst] : instances_) {
      inst.arrivals = 0;
      inst.processed = 0;
      inst.dropped = 0;
    }

    // Boot progress.
    for (auto& slot : vms_) {
      if (slot.state != VmState::Booting) continue;
      if (--slot.boot_remaining <= 0) {
        slot.state = VmState::Idle;
        slot.boot_remaining = 0;
        slot.enqueued_at = tick_;
        report.events.push_back({SimEventKind::BootComplete, slot.vm_id, -1});
      }
    }

    // Migration progress; completed jobs hand the flow and its buffered
    // packets to the destination.
    for (auto it = migrations_.begin(); it != migrations_.end();) {
      MigrationJob& job = it->second;
      if (--job.remaining <= 0) {
        auto& dst = instances_.at(job.dst_vm);
        for (auto& p : job.buffered) dst.queue.push_back(p);
        FlowRuntime& fr = flows_.at(job.flow_id);
        fr.migration = -1;
        fr.routed_vm = job.dst_vm;
        if (!fr.ended) dst.active_flows.insert(job.flow_id);
        report.events.push_back({SimEventKind::MigrationComplete, job.dst_vm, job.flow_id});
        it = migrations_.erase(it);
      } else {
        ++it;
      }
    }

    // Work already waiting when the tick starts, and the per-tick service
    // budget. Backlog is served before new arrivals; arrivals that still fit
    // in the budget go straight through with zero queueing delay, the rest
    // queue up to max_queue_len and overflow is dropped.
    std::map<int, std::int64_t> backlog;
    budget_.clear();
    for (auto& [vm, inst] : instances_) {
      backlog[vm] = total_queued(vm);
      std::int64_t& budget = budget_[vm];
      budget = static_cast<std::int64_t>(profile(inst.vnf_type).base_capacity);
      const std::int64_t n =
          std::min<std::int64_t>(budget, static_cast<std::int64_t>(inst.queue.size()));
      for (std::int64_t k = 0; k < n; ++k) {
        const QueuedPacket p = inst.queue.front();
        inst.queue.pop_front();
        report.latency_sum += tick_ - p.enqueued;
        ++report.latency_count;
        auto& fr = flows_.at(p.flow_id);
        ++fr.processed;
        fr.last_departure = tick_;
      }
      budget -= n;
      inst.processed += n;
      inst.win_processed += n;
      total_processed_ += n;
    }

    // Arrivals, ascending flow id.
    for (const auto& [flow_id, pkts] : tick_inputs) {
      if (pkts <= 0) continue;
      auto fit = flows_.find(flow_id);
      if (fit == flows_.end())
        throw RoutingError("step: packets for unknown flow " + std::to_string(flow_id));
      FlowRuntime& fr = fit->second;
      fr.generated += pkts;
      total_generated_ += pkts;

      if (fr.migration >= 0) {
        MigrationJob& job = migrations_.at(fr.migration);
        deliver(job.dst_vm, fr, pkts, &job.buffered, report);
      } else {
        if (fr.routed_vm < 0) route_flow(fr);
        deliver(fr.routed_vm, fr, pkts, nullptr, report);
      }
    }

    // Utilization reflects the work offered this tick, clamped at 1.
    for (auto& [vm, inst] : instances_) {
      const auto& prof = profile(inst.vnf_type);
      const double offered = static_cast<double>(backlog[vm] + inst.arrivals);
      inst.cpu_util = std::min(1.0, offered * prof.per_packet_cost / prof.base_capacity);
      inst.win_dropped += inst.dropped;
    }

    for (const auto& [vm, inst] : instances_) {
      report.rows.push_back({vm, inst.vnf_type, inst.arrivals, inst.processed, inst.dropped,
                             total_queued(vm), inst.cpu_util});
    }

    // Drained-out victims return to the idle pool.
    for (auto it = instances_.begin(); it != instances_.end();) {
      auto& slot = mutable_vm(it->first);
      if (slot.state == VmState::Draining && it->second.queue.empty() &&
          it->second.active_flows.empty() && !has_inbound_migration(it->first)) {
        slot.state = VmState::Idle;
        slot.vnf_type = -1;
        slot.enqueued_at = tick_;
        report.events.push_back({SimEventKind::VmIdle, it->first, -1});
        it = instances_.erase(it);
      } else {
        ++it;
      }
    }

    ++tick_;
    return report;
  }

  // ---- observation -------------------------------------------------------

  // One observation per VNF type: window counters summed over the type's
  // Running instances, queue summed, utilization and flow count sampled at
  // the boundary. Resets the window counters.
  std::vector<VnfObservation> snapshot_observations() {
    std::vector<VnfObservation> out(static_cast<std::size_t>(num_types()));
    std::vector<int> running(static_cast<std::size_t>(num_types()), 0);
    for (int t = 0; t < num_types(); ++t) {
      out[static_cast<std::size_t>(t)].f = t;
      out[static_cast<std::size_t>(t)].a = last_action_[static_cast<std::size_t>(t)];
      out[static_cast<std::size_t>(t)].tick = tick_;
    }
    for (auto& [vm_id, inst] : instances_) {
      if (vm(vm_id).state != VmState::Running) continue;
      auto& o = out[static_cast<std::size_t>(inst.vnf_type)];
      o.m += static_cast<std::int64_t>(inst.active_flows.size());
      o.s += inst.win_processed;
      o.l += inst.win_dropped;
      o.q += total_queued(vm_id);
      o.u += inst.cpu_util;
      ++running[static_cast<std::size_t>(inst.vnf_type)];
    }
    for (int t = 0; t < num_types(); ++t) {
      auto& o = out[static_cast<std::size_t>(t)];
      if (running[static_cast<std::size_t>(t)] > 0)
        o.u /= running[static_cast<std::size_t>(t)];
    }
    for (auto& [vm_id, inst] : instances_) {
      inst.win_processed = 0;
      inst.win_dropped = 0;
    }
    return out;
  }

  // ---- accounting ---------------------------------------------------------

  std::int64_t total_generated() const { return total_generated_; }
  std::int64_t total_processed() const { return total_processed_; }
  std::int64_t total_dropped() const { return total_dropped_; }

  std::int64_t residual_queued() const {
    std::int64_t n = 0;
    for (const auto& [vm, inst] : instances_) n += static_cast<std::int64_t>(inst.queue.size());
    for (const auto& [id, job] : migrations_) n += static_cast<std::int64_t>(job.buffered.size());
    return n;
  }

  // Main queue plus packets buffered at this vm by in-flight migrations.
  std::int64_t total_queued(int vm) const {
    auto it = instances_.find(vm);
    std::int64_t n = it == instances_.end() ? 0 : static_cast<std::int64_t>(it->second.queue.size());
    return n + inbound_buffered(vm);
  }

  int powered_on_count() const {
    int n = 0;
    for (const auto& s : vms_)
      if (s.powered_on()) ++n;
    return n;
  }

  std::vector<int> running_instances_of(int type) const {
    std::vector<int> out;
    for (const auto& [vm_id, inst] : instances_)
      if (inst.vnf_type == type && vm(vm_id).state == VmState::Running) out.push_back(vm_id);
    return out;
  }

 private:
  VmSlot& mutable_vm(int id) { return vms_.at(static_cast<std::size_t>(id)); }

  std::int64_t inbound_buffered(int vm) const {
    std::int64_t n = 0;
    for (const auto& [id, job] : migrations_)
      if (job.dst_vm == vm) n += static_cast<std::int64_t>(job.buffered.size());
    return n;
  }

  bool has_inbound_migration(int vm) const {
    for (const auto& [id, job] : migrations_)
      if (job.dst_vm == vm) return true;
    return false;
  }

  void make_instance(int vm, int vnf_type) {
    VnfInstance inst;
    inst.vm = vm;
    inst.vnf_type = vnf_type;
    instances_.emplace(vm, std::move(inst));
  }

  int find_off_slot(std::optional<Location> hint) const {
    int best = -1;
    int best_dist = 0;
    for (const auto& s : vms_) {
      if (s.state != VmState::Off) continue;
      const int d = hint ? distance(*hint, s.location) : 0;
      if (best < 0 || d < best_dist) {
        best = s.vm_id;
        best_dist = d;
      }
    }
    return best;
  }

  // New flows go to the least-utilized Running instance of their type.
  void route_flow(FlowRuntime& fr) {
    int best = -1;
    double best_u = 0.0;
    for (const auto& [vm_id, inst] : instances_) {
      if (inst.vnf_type != fr.spec.vnf_type) continue;
      if (vm(vm_id).state != VmState::Running) continue;
      if (best < 0 || inst.cpu_util < best_u) {
        best = vm_id;
        best_u = inst.cpu_util;
      }
    }
    if (best < 0)
      throw RoutingError("no running instance of type " + std::to_string(fr.spec.vnf_type) +
                         " for flow " + std::to_string(fr.spec.flow_id));
    fr.routed_vm = best;
    instances_.at(best).active_flows.insert(fr.spec.flow_id);
  }

  // Admits packets against the vm's queue cap; the sink is either the main
  // queue (nullptr) or a migration buffer, both counted against the cap.
  // Packets headed for the main queue are served on the spot while the tick
  // budget lasts; buffered migration traffic can only wait.
  void deliver(int vm_id, FlowRuntime& fr, int pkts, std::deque<QueuedPacket>* buffer,
               TickReport& report) {
    auto it = instances_.find(vm_id);
    if (it == instances_.end())
      throw RoutingError("flow " + std::to_string(fr.spec.flow_id) +
                         " routed to vm without instance");
    VnfInstance& inst = it->second;
    const auto cap = static_cast<std::int64_t>(profile(inst.vnf_type).max_queue_len);
    inst.arrivals += pkts;
    std::int64_t& budget = budget_[vm_id];
    for (int k = 0; k < pkts; ++k) {
      if (!buffer && budget > 0) {
        --budget;
        ++inst.processed;
        ++inst.win_processed;
        ++total_processed_;
        ++fr.processed;
        fr.last_departure = tick_;
        ++report.latency_count;  // served on arrival: zero delay
      } else if (total_queued(vm_id) < cap) {
        QueuedPacket p{tick_, fr.spec.flow_id};
        if (buffer)
          buffer->push_back(p);
        else
          inst.queue.push_back(p);
      } else {
        ++inst.dropped;
        ++fr.dropped;
        ++total_dropped_;
      }
    }
  }

  SimConfig cfg_;
  Tick tick_ = 0;
  std::map<int, std::int64_t> budget_;  // per-vm service budget within a tick
  std::vector<VmSlot> vms_;
  std::map<int, VnfInstance> instances_;
  std::map<int, MigrationJob> migrations_;
  std::map<int, FlowRuntime> flows_;
  std::vector<ScaleAction> last_action_;
  int next_job_id_ = 0;
  std::int64_t total_generated_ = 0;
  std::int64_t total_processed_ = 0;
  std::int64_t total_dropped_ = 0;
};

}  // namespace nfvs
