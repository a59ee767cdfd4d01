#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nfvs {

using Tick = std::int64_t;

enum class ScaleAction { ScaleIn = 0, ScaleOut = 1, NoOp = 2 };

inline const char* to_string(ScaleAction a) {
  switch (a) {
    case ScaleAction::ScaleIn: return "scale_in";
    case ScaleAction::ScaleOut: return "scale_out";
    case ScaleAction::NoOp: return "noop";
  }
  return "?";
}

// Behavioral profile of one VNF type: how expensive a packet is, how deep
// the per-instance queue is, and how many packets one instance serves per
// tick at full utilization.
struct VnfProfile {
  double per_packet_cost = 1.0;   // CPU units per packet
  int max_queue_len = 100;        // packets
  double base_capacity = 100.0;   // packets/tick at U = 1.0

  void validate() const {
    if (per_packet_cost <= 0) throw std::invalid_argument("VnfProfile: per_packet_cost must be > 0");
    if (base_capacity <= 0) throw std::invalid_argument("VnfProfile: base_capacity must be > 0");
    if (max_queue_len < 1) throw std::invalid_argument("VnfProfile: max_queue_len must be >= 1");
  }
};

struct VnfType {
  int id = 0;
  VnfProfile profile;
};

// Per-VNF state sample: type, flow count, served, dropped, queue depth,
// CPU utilization and the previous cycle's scale action.
struct VnfObservation {
  int f = 0;           // VNF type id
  std::int64_t m = 0;  // flows handled
  std::int64_t s = 0;  // packets processed this cycle
  std::int64_t l = 0;  // packets dropped this cycle
  std::int64_t q = 0;  // queue length at sample time
  double u = 0.0;      // CPU utilization in [0,1]
  ScaleAction a = ScaleAction::NoOp;
  Tick tick = 0;
};

// Upper/lower CPU-utilization thresholds; the agent's action.
struct ThresholdPair {
  double upper = 0.8;
  double lower = 0.2;
};

constexpr double kDefaultThresholdMargin = 0.1;

// Slack for the margin comparison: a pair built as lower = upper - margin can
// round one ulp short of the margin, which must still count as satisfying it.
constexpr double kMarginSlack = 1e-9;

// nullopt means ok; otherwise names the broken constraint.
inline std::optional<std::string> validate_thresholds(
    const ThresholdPair& tp, double margin = kDefaultThresholdMargin) {
  if (!(tp.lower > 0.0)) return "lower must be > 0";
  if (!(tp.upper < 1.0)) return "upper must be < 1";
  if (!(tp.lower < tp.upper)) return "lower >= upper";
  if (!(tp.upper - tp.lower >= margin - kMarginSlack)) return "margin: upper - lower < margin";
  return std::nullopt;
}

enum class FlowProtocol { Tcp = 0, Udp = 1 };

// One flow's demand: a piecewise-constant packets/tick trajectory starting
// at arrival_tick and lasting `duration` ticks (rate[k] applies to tick
// arrival_tick + k).
struct FlowSpec {
  int flow_id = 0;
  int vnf_type = 0;
  FlowProtocol protocol = FlowProtocol::Tcp;
  Tick arrival_tick = 0;
  Tick duration = 1;
  std::vector<double> rate;

  bool active_at(Tick t) const {
    return t >= arrival_tick && t < arrival_tick + duration;
  }
  double rate_at(Tick t) const {
    if (!active_at(t)) return 0.0;
    return rate[static_cast<std::size_t>(t - arrival_tick)];
  }
  void validate() const {
    if (duration < 1) throw std::invalid_argument("FlowSpec: duration must be >= 1");
    if (rate.size() != static_cast<std::size_t>(duration))
      throw std::invalid_argument("FlowSpec: rate trajectory length != duration");
    for (double r : rate)
      if (r < 0) throw std::invalid_argument("FlowSpec: negative rate");
  }
};

// Inputs of the pool-sizing ratio: traffic V over a window of T ticks
// against n_run + n_idle machines capped at threshold h.
struct EnergyRatioInputs {
  double v_total = 0.0;
  int n_run = 0;
  int n_idle = 0;
  double h = 0.8;
  Tick t = 1;

  void validate() const {
    if (n_run < 0 || n_idle < 0) throw std::invalid_argument("EnergyRatioInputs: negative counts");
    if (!(h > 0.0 && h < 1.0)) throw std::invalid_argument("EnergyRatioInputs: h must be in (0,1)");
    if (t < 1) throw std::invalid_argument("EnergyRatioInputs: t must be >= 1");
    if (v_total < 0) throw std::invalid_argument("EnergyRatioInputs: v_total must be >= 0");
  }
};

struct FlowMove {
  int flow_id = 0;
  int dst_vm = -1;
};

// A resolved scaling decision. ScaleOut carries the destination VM;
// ScaleIn carries the victim and a migration plan covering its flows.
struct ScaleDecision {
  int vnf_type = 0;
  ScaleAction action = ScaleAction::NoOp;
  int source_vm = -1;
  int target_vm = -1;
  std::vector<FlowMove> migration_plan;
  bool deferred = false;
};

// Fixed divisors that bring the M,S,L,Q counters into [0,1].
struct NormalizationConstants {
  double m = 1.0;
  double s = 1.0;
  double l = 1.0;
  double q = 1.0;

  void validate() const {
    if (m <= 0 || s <= 0 || l <= 0 || q <= 0)
      throw std::invalid_argument("NormalizationConstants: all norms must be > 0");
  }
};

inline constexpr int kActionSlots = 3;

inline std::size_t feature_vector_length(int num_vnf_types) {
  return static_cast<std::size_t>(num_vnf_types) + 4 + 1 + kActionSlots;
}

// Encodes an observation as a fixed-length vector:
// [F one-hot | M S L Q scaled+clipped | U | A one-hot].
inline std::vector<double> observation_to_feature_vector(
    const VnfObservation& obs, const NormalizationConstants& norms,
    int num_vnf_types) {
  norms.validate();
  if (obs.f < 0 || obs.f >= num_vnf_types)
    throw std::out_of_range("observation_to_feature_vector: unknown VnfType id " +
                            std::to_string(obs.f));
  std::vector<double> v(feature_vector_length(num_vnf_types), 0.0);
  std::size_t k = 0;
  v[k + static_cast<std::size_t>(obs.f)] = 1.0;
  k += static_cast<std::size_t>(num_vnf_types);
  auto scaled = [](std::int64_t x, double norm) {
    return std::clamp(static_cast<double>(x) / norm, 0.0, 1.0);
  };
  v[k++] = scaled(obs.m, norms.m);
  v[k++] = scaled(obs.s, norms.s);
  v[k++] = scaled(obs.l, norms.l);
  v[k++] = scaled(obs.q, norms.q);
  v[k++] = obs.u;
  v[k + static_cast<std::size_t>(obs.a)] = 1.0;
  return v;
}

}  // namespace nfvs
