#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nfvscale/domain.hpp"
#include "nfvscale/sim.hpp"

namespace nfvs {

// Compares a type's utilization against its threshold pair. Scale-in is
// blocked while the type has fewer than two running instances.
inline ScaleAction evaluate_thresholds(const VnfObservation& obs, const ThresholdPair& tp,
                                       int running_count) {
  if (auto err = validate_thresholds(tp)) throw std::invalid_argument(*err);
  if (obs.u > tp.upper) return ScaleAction::ScaleOut;
  if (obs.u < tp.lower && running_count >= 2) return ScaleAction::ScaleIn;
  return ScaleAction::NoOp;
}

// Measured efficiency of the powered pool: packets per (vm * target-util *
// tick) over the window.
inline double energy_ratio(const EnergyRatioInputs& in) {
  in.validate();
  const int n = in.n_run + in.n_idle;
  if (n < 1) throw std::invalid_argument("energy_ratio: no powered vms");
  return in.v_total / (static_cast<double>(n) * in.h * static_cast<double>(in.t));
}

// Idle pool size that would bring the measured ratio back to the ideal,
// before rounding. Derived by solving ratio(n_run + x) = ideal for x.
inline double tuned_idle_real(double measured_ratio, double ideal_ratio, int n_run, int n_idle) {
  if (!(ideal_ratio > 0.0)) throw std::invalid_argument("tuned_idle: ideal_ratio must be > 0");
  if (n_run < 0 || n_idle < 0) throw std::invalid_argument("tuned_idle: negative counts");
  return (measured_ratio * static_cast<double>(n_run + n_idle) -
          ideal_ratio * static_cast<double>(n_run)) /
         ideal_ratio;
}

// Same, rounded half-up and clamped at zero.
inline int tuned_idle_count(double measured_ratio, double ideal_ratio, int n_run, int n_idle) {
  const double x = tuned_idle_real(measured_ratio, ideal_ratio, n_run, n_idle);
  const double rounded = std::floor(x + 0.5);
  return rounded < 0.0 ? 0 : static_cast<int>(rounded);
}

struct EnergyConfig {
  double ideal_ratio = 1.0;  // packets per vm per target-utilization-tick
  int min_idle = 0;
  int max_idle = -1;  // -1: no cap

  void validate() const {
    if (!(ideal_ratio > 0.0)) throw std::invalid_argument("energy.ideal_ratio must be > 0");
    if (min_idle < 0) throw std::invalid_argument("energy.min_idle must be >= 0");
    if (max_idle >= 0 && max_idle < min_idle)
      throw std::invalid_argument("energy.max_idle must be >= min_idle");
  }
};

// Instance bookkeeping: the set of working VMs plus the idle pool as a FIFO
// ordered by the tick each VM went idle (oldest at the front). Scale-out
// consumes from the tail end via proximity; pool shrinking evicts the head.
struct BufferQueues {
  std::set<int> running;                    // Running or Draining
  std::deque<std::pair<int, Tick>> idle;    // (vm, went idle at)

  void push_idle(int vm, Tick at) {
    for (const auto& [v, t] : idle)
      if (v == vm) throw std::logic_error("BufferQueues: vm already idle");
    idle.emplace_back(vm, at);
  }

  bool erase_idle(int vm) {
    for (auto it = idle.begin(); it != idle.end(); ++it) {
      if (it->first == vm) {
        idle.erase(it);
        return true;
      }
    }
    return false;
  }

  bool is_idle(int vm) const {
    for (const auto& [v, t] : idle)
      if (v == vm) return true;
    return false;
  }
};

enum class DecisionOrigin { Cycle = 0, Emergency, Deferred, Resize };

inline const char* to_string(DecisionOrigin o) {
  switch (o) {
    case DecisionOrigin::Cycle: return "cycle";
    case DecisionOrigin::Emergency: return "emergency";
    case DecisionOrigin::Deferred: return "deferred";
    case DecisionOrigin::Resize: return "resize";
  }
  return "?";
}

// One row in the decision log.
struct DecisionRecord {
  Tick tick = 0;
  int vnf_type = -1;
  std::string action;
  DecisionOrigin origin = DecisionOrigin::Cycle;
  int victim = -1;
  int destination = -1;
  int migrated_flows = 0;
  int n_run = 0;
  int n_idle = 0;
  double measured_ratio = 0.0;
  int idle_target = -1;
};

// Rate lookup for a flow at the current tick, used to plan load moves.
using FlowRateFn = std::function<double(int flow_id)>;

// Executes scale decisions against the world: picks destinations from the
// idle pool, plans flow moves, books VMs in and out of the pool, and keeps a
// log of everything it did.
class ScalingEngine {
 public:
  explicit ScalingEngine(EnergyConfig energy) : energy_(energy) { energy_.validate(); }

  BufferQueues& queues() { return queues_; }
  const BufferQueues& queues() const { return queues_; }
  const std::vector<DecisionRecord>& log() const { return log_; }
  void set_thresholds(std::vector<ThresholdPair> tps) { thresholds_ = std::move(tps); }
  const std::vector<ThresholdPair>& thresholds() const { return thresholds_; }

  // Registers the world's current population (initial deployment).
  void sync_from_world(const World& world) {
    queues_.running.clear();
    queues_.idle.clear();
    for (const auto& slot : world.vms()) {
      if (slot.state == VmState::Running || slot.state == VmState::Draining)
        queues_.running.insert(slot.vm_id);
      else if (slot.state == VmState::Idle)
        queues_.push_idle(slot.vm_id, slot.enqueued_at);
    }
  }

  // Folds tick events into the queues: boot completions and drained victims
  // join the idle FIFO in event order.
  void observe_events(const TickReport& report) {
    for (const auto& ev : report.events) {
      if (ev.kind == SimEventKind::BootComplete) {
        queues_.push_idle(ev.vm, report.tick);
      } else if (ev.kind == SimEventKind::VmIdle) {
        queues_.running.erase(ev.vm);
        queues_.push_idle(ev.vm, report.tick);
      }
    }
  }

  int running_count(const World& world, int type) const {
    return static_cast<int>(world.running_instances_of(type).size());
  }

  bool has_deferred(int type) const { return deferred_.count(type) > 0; }

  // Adds an instance for the type. Prefers the idle VM closest to src_vm
  // (most recently idled on ties, then lowest id) and offloads the source's
  // heaviest flows until its projected utilization sits at the threshold
  // midpoint. With no idle VM available a boot is kicked off (if a slot
  // remains) and the decision is parked for retry.
  std::optional<ScaleDecision> scale_out(World& world, int type, int src_vm,
                                         const ThresholdPair& tp, const FlowRateFn& rates,
                                         Tick now, DecisionOrigin origin) {
    ScaleDecision dec;
    dec.vnf_type = type;
    dec.action = ScaleAction::ScaleOut;
    dec.source_vm = src_vm;

    const int dest = pick_idle_near(world, src_vm);
    if (dest < 0) {
      try {
        world.boot_vm(src_vm >= 0 ? std::optional<Location>(world.vm(src_vm).location)
                                  : std::nullopt);
      } catch (const PoolExhaustedError&) {
        // nothing to boot; the retry fires if a vm frees up later
      }
      deferred_.insert(type);
      dec.deferred = true;
      world.set_last_action(type, ScaleAction::ScaleOut);
      log_decision(now, type, "scale_out", origin, src_vm, -1, 0);
      return dec;
    }

    queues_.erase_idle(dest);
    world.set_running(dest, type);
    queues_.running.insert(dest);
    dec.target_vm = dest;

    if (src_vm >= 0 && world.instances().count(src_vm)) {
      dec.migration_plan = plan_offload(world, src_vm, dest, tp, rates);
      for (const auto& mv : dec.migration_plan)
        world.start_migration(mv.flow_id, src_vm, mv.dst_vm);
    }
    world.set_last_action(type, ScaleAction::ScaleOut);
    log_decision(now, type, "scale_out", origin, src_vm, dest,
                 static_cast<int>(dec.migration_plan.size()));
    return dec;
  }

  // Removes the least-utilized instance of the type, migrating its flows to
  // peers. Aborts (NoOp) when the flows cannot be placed without pushing any
  // destination past the upper threshold.
  std::optional<ScaleDecision> scale_in(World& world, int type, const ThresholdPair& tp,
                                        const FlowRateFn& rates, Tick now) {
    const auto running = world.running_instances_of(type);
    if (running.size() < 2) return std::nullopt;

    int victim = -1;
    double victim_u = 0.0;
    for (int vm : running) {
      const double u = world.instance(vm).cpu_util;
      if (victim < 0 || u < victim_u) {
        victim = vm;
        victim_u = u;
      }
    }

    const auto& prof = world.profile(type);
    // Rate-based placement: flows of the victim, heaviest first, onto the
    // least-loaded peer that stays at or under the upper threshold.
    std::vector<std::pair<double, int>> flows;  // (rate, flow)
    for (int f : world.instance(victim).active_flows) flows.emplace_back(rates(f), f);
    std::sort(flows.begin(), flows.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });

    std::map<int, double> load;  // projected offered rate per destination
    for (int vm : running) {
      if (vm == victim) continue;
      double r = 0.0;
      for (int f : world.instance(vm).active_flows) r += rates(f);
      load[vm] = r;
    }

    std::vector<FlowMove> plan;
    const double cap_rate = prof.base_capacity / prof.per_packet_cost;
    for (const auto& [rate, flow] : flows) {
      int best = -1;
      double best_load = 0.0;
      for (const auto& [vm, l] : load) {
        if ((l + rate) / cap_rate > tp.upper) continue;
        if (best < 0 || l < best_load) {
          best = vm;
          best_load = l;
        }
      }
      if (best < 0) {
        log_decision(now, type, "scale_in_abort", DecisionOrigin::Cycle, victim, -1, 0);
        return std::nullopt;
      }
      load[best] += rate;
      plan.push_back({flow, best});
    }

    ScaleDecision dec;
    dec.vnf_type = type;
    dec.action = ScaleAction::ScaleIn;
    dec.source_vm = victim;
    dec.migration_plan = plan;
    for (const auto& mv : plan) world.start_migration(mv.flow_id, victim, mv.dst_vm);
    const bool idled = world.begin_drain(victim);
    if (idled) {
      queues_.running.erase(victim);
      queues_.push_idle(victim, now);
    }
    world.set_last_action(type, ScaleAction::ScaleIn);
    log_decision(now, type, "scale_in", DecisionOrigin::Cycle, victim, -1,
                 static_cast<int>(plan.size()));
    return dec;
  }

  // Brings the idle pool to the target size: boots the shortfall (counting
  // VMs already booting toward it), powers off overshoot oldest-first.
  void resize_idle_pool(World& world, int target, Tick now, double measured_ratio) {
    target = std::max(target, energy_.min_idle);
    if (energy_.max_idle >= 0) target = std::min(target, energy_.max_idle);

    while (static_cast<int>(queues_.idle.size()) > target) {
      const int vm = queues_.idle.front().first;
      queues_.idle.pop_front();
      world.power_off(vm);
      auto& rec = log_decision(now, -1, "power_off", DecisionOrigin::Resize, vm, -1, 0);
      rec.measured_ratio = measured_ratio;
      rec.idle_target = target;
    }

    int deficit = target - static_cast<int>(queues_.idle.size()) - world.booting_count();
    while (deficit-- > 0) {
      int vm = -1;
      try {
        vm = world.boot_vm(std::nullopt);
      } catch (const PoolExhaustedError&) {
        break;
      }
      auto& rec = log_decision(now, -1, "boot", DecisionOrigin::Resize, -1, vm, 0);
      rec.measured_ratio = measured_ratio;
      rec.idle_target = target;
    }
  }

  // Re-runs parked scale-outs once idle capacity exists. The source is
  // re-picked as the currently busiest instance of the type.
  std::vector<ScaleDecision> retry_deferred(World& world, const FlowRateFn& rates, Tick now) {
    std::vector<ScaleDecision> out;
    if (deferred_.empty() || queues_.idle.empty()) return out;
    std::vector<int> types(deferred_.begin(), deferred_.end());
    for (int type : types) {
      if (queues_.idle.empty()) break;
      deferred_.erase(type);
      const ThresholdPair tp = threshold_for(type);
      const int src = busiest_instance(world, type);
      auto dec = scale_out(world, type, src, tp, rates, now, DecisionOrigin::Deferred);
      if (dec) out.push_back(*dec);
    }
    return out;
  }

  int busiest_instance(const World& world, int type) const {
    int best = -1;
    double best_u = -1.0;
    for (int vm : world.running_instances_of(type)) {
      const double u = world.instance(vm).cpu_util;
      if (u > best_u) {
        best = vm;
        best_u = u;
      }
    }
    return best;
  }

 private:
  ThresholdPair threshold_for(int type) const {
    if (type >= 0 && static_cast<std::size_t>(type) < thresholds_.size())
      return thresholds_[static_cast<std::size_t>(type)];
    return ThresholdPair{};
  }

  // Closest idle VM to src (any idle VM if src < 0); ties prefer the most
  // recently idled, then the lowest id.
  int pick_idle_near(const World& world, int src_vm) const {
    int best = -1;
    int best_d = 0;
    Tick best_at = 0;
    for (const auto& [vm, at] : queues_.idle) {
      const int d = src_vm >= 0 ? distance(world.vm(src_vm).location, world.vm(vm).location) : 0;
      if (best < 0 || d < best_d || (d == best_d && at > best_at) ||
          (d == best_d && at == best_at && vm < best)) {
        best = vm;
        best_d = d;
        best_at = at;
      }
    }
    return best;
  }

  // Heaviest flows leave src until its projected utilization is at or below
  // the midpoint between the thresholds.
  std::vector<FlowMove> plan_offload(const World& world, int src, int dest,
                                     const ThresholdPair& tp, const FlowRateFn& rates) const {
    const auto& inst = world.instance(src);
    const auto& prof = world.profile(inst.vnf_type);
    std::vector<std::pair<double, int>> flows;
    double total = 0.0;
    for (int f : inst.active_flows) {
      const double r = rates(f);
      flows.emplace_back(r, f);
      total += r;
    }
    std::sort(flows.begin(), flows.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    const double cap_rate = prof.base_capacity / prof.per_packet_cost;
    const double target_u = (tp.upper + tp.lower) / 2.0;
    std::vector<FlowMove> plan;
    for (const auto& [rate, flow] : flows) {
      if (total / cap_rate <= target_u) break;
      plan.push_back({flow, dest});
      total -= rate;
    }
    return plan;
  }

  DecisionRecord& log_decision(Tick now, int type, std::string action,
                               DecisionOrigin origin, int victim, int dest, int migrated) {
    DecisionRecord rec;
    rec.tick = now;
    rec.vnf_type = type;
    rec.action = std::move(action);
    rec.origin = origin;
    rec.victim = victim;
    rec.destination = dest;
    rec.migrated_flows = migrated;
    rec.n_run = static_cast<int>(queues_.running.size());
    rec.n_idle = static_cast<int>(queues_.idle.size());
    log_.push_back(std::move(rec));
    return log_.back();
  }

  EnergyConfig energy_;
  BufferQueues queues_;
  std::vector<ThresholdPair> thresholds_;
  std::set<int> deferred_;
  std::vector<DecisionRecord> log_;
};

}  // namespace nfvs
