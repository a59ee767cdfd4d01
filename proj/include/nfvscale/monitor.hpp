#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include "nfvscale/domain.hpp"
#include "nfvscale/scaling.hpp"
#include "nfvscale/sim.hpp"

namespace nfvs {

// Per-tick SLA limits. An alarm needs the breach to hold for
// consecutive_ticks ticks in a row on the same instance. Both comparisons
// are strict, so a limit of 1.0 (or queue_frac 1.0) can never fire.
struct SlaPolicy {
  bool enabled = true;
  double max_loss_rate = 0.1;   // dropped / offered per tick
  double max_queue_frac = 0.9;  // of max_queue_len
  int consecutive_ticks = 2;

  void validate() const {
    if (!(max_loss_rate >= 0.0 && max_loss_rate <= 1.0))
      throw std::invalid_argument("sla.max_loss_rate must be in [0,1]");
    if (!(max_queue_frac >= 0.0 && max_queue_frac <= 1.0))
      throw std::invalid_argument("sla.max_queue_frac must be in [0,1]");
    if (consecutive_ticks < 1) throw std::invalid_argument("sla.consecutive_ticks must be >= 1");
  }
};

enum class AlarmCause { LossRate = 0, QueueDepth };

inline const char* to_string(AlarmCause c) {
  switch (c) {
    case AlarmCause::LossRate: return "loss_rate";
    case AlarmCause::QueueDepth: return "queue_depth";
  }
  return "?";
}

struct Alarm {
  Tick tick = 0;
  int vnf_type = -1;
  int vm = -1;
  AlarmCause cause = AlarmCause::LossRate;
};

// Watches per-instance tick reports for SLA breaches. State is a breach
// streak per vm and condition; one alarm (lowest vm, loss before queue) is
// surfaced per tick.
class ResourceMonitor {
 public:
  ResourceMonitor(SlaPolicy policy, const World& world) : policy_(policy), world_(&world) {
    policy_.validate();
  }

  const SlaPolicy& policy() const { return policy_; }

  std::optional<Alarm> monitor_tick(const TickReport& report) {
    if (!policy_.enabled) return std::nullopt;
    std::optional<Alarm> alarm;
    for (const auto& row : report.rows) {
      const auto& prof = world_->profile(row.vnf_type);
      const double loss = row.arrivals > 0
                              ? static_cast<double>(row.dropped) / static_cast<double>(row.arrivals)
                              : 0.0;
      const bool loss_bad = row.arrivals > 0 && loss > policy_.max_loss_rate;
      const bool queue_bad =
          static_cast<double>(row.queue) >
          policy_.max_queue_frac * static_cast<double>(prof.max_queue_len);

      int& ls = loss_streak_[row.vm];
      int& qs = queue_streak_[row.vm];
      ls = loss_bad ? ls + 1 : 0;
      qs = queue_bad ? qs + 1 : 0;

      if (!alarm) {
        if (ls >= policy_.consecutive_ticks)
          alarm = Alarm{report.tick, row.vnf_type, row.vm, AlarmCause::LossRate};
        else if (qs >= policy_.consecutive_ticks)
          alarm = Alarm{report.tick, row.vnf_type, row.vm, AlarmCause::QueueDepth};
      }
    }
    return alarm;
  }

 private:
  SlaPolicy policy_;
  const World* world_;
  std::map<int, int> loss_streak_;
  std::map<int, int> queue_streak_;
};

// Turns alarms into immediate scale-outs, without waiting for the next
// monitoring boundary. Only ever adds capacity. A per-type cooldown keeps
// one alarm storm from booting the whole pool.
class EmergencyProcessor {
 public:
  explicit EmergencyProcessor(Tick cooldown_ticks) : cooldown_(cooldown_ticks) {
    if (cooldown_ticks < 0) throw std::invalid_argument("emergency cooldown must be >= 0");
  }

  // Returns the decision when the alarm was acted on, nullopt during
  // cooldown.
  std::optional<ScaleDecision> emergency_scale(World& world, ScalingEngine& engine,
                                               const Alarm& alarm, const ThresholdPair& tp,
                                               const FlowRateFn& rates) {
    auto it = last_fired_.find(alarm.vnf_type);
    if (it != last_fired_.end() && alarm.tick - it->second < cooldown_) return std::nullopt;
    last_fired_[alarm.vnf_type] = alarm.tick;
    const int src = alarm.vm >= 0 ? alarm.vm : engine.busiest_instance(world, alarm.vnf_type);
    return engine.scale_out(world, alarm.vnf_type, src, tp, rates, alarm.tick,
                            DecisionOrigin::Emergency);
  }

 private:
  Tick cooldown_;
  std::map<int, Tick> last_fired_;
};

}  // namespace nfvs
