#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "nfvscale/domain.hpp"
#include "nfvscale/rng.hpp"

namespace nfvs {

enum class TrafficPattern { FlatPeriodic = 0, SpikyPeriodic = 1, Aperiodic = 2 };

inline const char* to_string(TrafficPattern p) {
  switch (p) {
    case TrafficPattern::FlatPeriodic: return "flat_periodic";
    case TrafficPattern::SpikyPeriodic: return "spiky_periodic";
    case TrafficPattern::Aperiodic: return "aperiodic";
  }
  return "?";
}

// A reproducible traffic scenario. The aggregate packets/tick shape is
//   FlatPeriodic : base_rate * (1 + 0.3 sin(2*pi*t/period)), +- noise
//   SpikyPeriodic: the flat shape plus `spike_count` rectangular spikes of
//                  height spike_magnitude*base_rate and width period/10
//   Aperiodic    : a seeded random walk clamped to [0, 4*base_rate]
// and is realized as equal-rate flows with staggered arrivals, each capped
// at flow_rate_cap packets/tick.
struct TrafficScenario {
  TrafficPattern pattern = TrafficPattern::FlatPeriodic;
  Tick horizon = 3600;
  double base_rate = 100.0;        // packets/tick
  Tick period = 600;
  int spike_count = 0;
  double spike_magnitude = 1.0;    // multiplier on base_rate
  double noise_level = 0.0;        // in [0,1)
  std::uint64_t seed = 1;
  double flow_rate_cap = 0.0;      // 0 => base_rate/8
  Tick flow_duration = 0;          // 0 => min(horizon, 4*period)
  std::vector<Tick> spike_offsets; // empty => seeded random placement

  Tick spike_width() const { return std::max<Tick>(1, period / 10); }

  double effective_flow_cap() const {
    return flow_rate_cap > 0 ? flow_rate_cap : std::max(1.0, base_rate / 8.0);
  }
  Tick effective_flow_duration() const {
    return flow_duration > 0 ? std::min(flow_duration, horizon)
                             : std::min(horizon, 4 * period);
  }

  void validate() const {
    if (period < 1) throw std::invalid_argument("TrafficScenario: period must be >= 1");
    if (horizon < period) throw std::invalid_argument("TrafficScenario: horizon must be >= period");
    if (spike_magnitude < 1.0) throw std::invalid_argument("TrafficScenario: spike_magnitude must be >= 1");
    if (noise_level < 0.0 || noise_level >= 1.0)
      throw std::invalid_argument("TrafficScenario: noise_level must be in [0,1)");
    if (base_rate < 0.0) throw std::invalid_argument("TrafficScenario: base_rate must be >= 0");
    if (spike_count < 0) throw std::invalid_argument("TrafficScenario: spike_count must be >= 0");
    for (Tick o : spike_offsets)
      if (o < 0 || o + spike_width() > horizon)
        throw std::invalid_argument("TrafficScenario: spike offset out of range");
  }
};

namespace detail {

inline std::vector<Tick> place_spikes(const TrafficScenario& scn, Rng& rng) {
  if (!scn.spike_offsets.empty()) {
    if (static_cast<int>(scn.spike_offsets.size()) != scn.spike_count)
      throw std::invalid_argument("TrafficScenario: spike_offsets size != spike_count");
    auto offs = scn.spike_offsets;
    std::sort(offs.begin(), offs.end());
    return offs;
  }
  const Tick w = scn.spike_width();
  std::vector<Tick> offs;
  int attempts = 0;
  while (static_cast<int>(offs.size()) < scn.spike_count) {
    if (++attempts > 10000)
      throw std::runtime_error("place_spikes: cannot fit spikes into horizon");
    const Tick o = rng.uniform_int(0, scn.horizon - w);
    bool overlaps = false;
    for (Tick e : offs)
      if (o + w + 1 > e && e + w + 1 > o) { overlaps = true; break; }
    if (!overlaps) offs.push_back(o);
  }
  std::sort(offs.begin(), offs.end());
  return offs;
}

}  // namespace detail

// The aggregate packets/tick trace the flows will realize.
inline std::vector<double> scenario_rate_trace(const TrafficScenario& scn) {
  scn.validate();
  Rng rng(derive_seed(scn.seed, 0xA11CE));
  const auto n = static_cast<std::size_t>(scn.horizon);
  std::vector<double> r(n, 0.0);
  switch (scn.pattern) {
    case TrafficPattern::FlatPeriodic:
    case TrafficPattern::SpikyPeriodic: {
      for (std::size_t t = 0; t < n; ++t) {
        double v = scn.base_rate *
                   (1.0 + 0.3 * std::sin(2.0 * M_PI * static_cast<double>(t) /
                                         static_cast<double>(scn.period)));
        if (scn.noise_level > 0.0)
          v *= 1.0 + scn.noise_level * rng.uniform(-1.0, 1.0);
        r[t] = std::max(0.0, v);
      }
      if (scn.pattern == TrafficPattern::SpikyPeriodic) {
        const Tick w = scn.spike_width();
        for (Tick o : detail::place_spikes(scn, rng))
          for (Tick t = o; t < o + w; ++t)
            r[static_cast<std::size_t>(t)] += scn.spike_magnitude * scn.base_rate;
      }
      break;
    }
    case TrafficPattern::Aperiodic: {
      const double step = scn.base_rate * (0.05 + 0.45 * scn.noise_level);
      double v = scn.base_rate;
      for (std::size_t t = 0; t < n; ++t) {
        r[t] = v;
        v = std::clamp(v + step * rng.uniform(-1.0, 1.0), 0.0, 4.0 * scn.base_rate);
      }
      break;
    }
  }
  return r;
}

// Splits the aggregate trace into `slots` staggered back-to-back flow
// chains; at every tick each slot has exactly one live flow carrying
// rate(t)/slots. Slot count is padded to a multiple of num_vnf_types so
// the per-type share is equal, and sized so per-flow rate <= the cap.
inline std::vector<FlowSpec> generate(const TrafficScenario& scn,
                                      int num_vnf_types = 1) {
  if (num_vnf_types < 1) throw std::invalid_argument("generate: num_vnf_types must be >= 1");
  const std::vector<double> trace = scenario_rate_trace(scn);
  const double peak = trace.empty() ? 0.0 : *std::max_element(trace.begin(), trace.end());
  std::vector<FlowSpec> flows;
  if (peak <= 0.0) return flows;

  const double cap = scn.effective_flow_cap();
  int slots = static_cast<int>(std::ceil(peak / cap));
  slots = ((slots + num_vnf_types - 1) / num_vnf_types) * num_vnf_types;
  const Tick dur = scn.effective_flow_duration();

  int next_id = 0;
  for (int s = 0; s < slots; ++s) {
    const Tick offset = static_cast<Tick>(
        static_cast<double>(s) * static_cast<double>(dur) / slots);
    Tick start = 0;
    while (start < scn.horizon) {
      Tick end = (start == 0 && offset > 0) ? offset : start + dur;
      end = std::min(end, scn.horizon);
      FlowSpec f;
      f.flow_id = next_id++;
      f.vnf_type = s % num_vnf_types;
      f.protocol = (s % 2 == 0) ? FlowProtocol::Tcp : FlowProtocol::Udp;
      f.arrival_tick = start;
      f.duration = end - start;
      f.rate.resize(static_cast<std::size_t>(f.duration));
      for (Tick t = start; t < end; ++t)
        f.rate[static_cast<std::size_t>(t - start)] =
            trace[static_cast<std::size_t>(t)] / slots;
      f.validate();
      flows.push_back(std::move(f));
      start = end;
    }
  }
  return flows;
}

// Sum of the spec'd (real-valued) rates of all flows active at t.
inline double aggregate_rate(const std::vector<FlowSpec>& flows, Tick t) {
  double sum = 0.0;
  for (const auto& f : flows) sum += f.rate_at(t);
  return sum;
}

// Turns a flow's real-valued rate into integer packets per tick without
// losing long-run volume: the fractional remainder carries over. An initial
// phase in [0,1) offsets the first emission; without it, flows that carry
// identical rate trajectories release their packets on exactly the same
// ticks and the aggregate arrives as synchronized waves instead of the
// near-constant stream the trace describes.
class PacketQuantizer {
 public:
  PacketQuantizer() = default;
  explicit PacketQuantizer(double phase) : acc_(phase) {}

  int emit(double rate) {
    acc_ += rate;
    int n = static_cast<int>(std::floor(acc_ + 1e-9));
    if (n < 0) n = 0;
    acc_ -= n;
    return n;
  }

 private:
  double acc_ = 0.0;
};

// Low-discrepancy quantizer phase for a flow id: golden-ratio steps spread
// equal-rate flows' emission ticks as evenly as possible.
inline double flow_phase(int flow_id) {
  const double x = static_cast<double>(flow_id) * 0.6180339887498949;
  return x - std::floor(x);
}

}  // namespace nfvs
