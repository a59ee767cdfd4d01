#pragma once

#include <algorithm>
#include <memory>
#include <stdexcept>
#include <vector>

#include "nfvscale/config.hpp"
#include "nfvscale/ddpg.hpp"
#include "nfvscale/domain.hpp"

namespace nfvs {

// Produces one threshold pair per VNF type at every monitoring boundary.
class ThresholdProvider {
 public:
  virtual ~ThresholdProvider() = default;
  virtual std::vector<ActResult> decide(const std::vector<VnfObservation>& obs,
                                        const std::vector<std::vector<double>>& features) = 0;
  virtual const char* name() const = 0;
};

class StaticProvider : public ThresholdProvider {
 public:
  StaticProvider(ThresholdPair tp, int num_types, double margin = kDefaultThresholdMargin)
      : tp_(tp), num_types_(num_types) {
    if (auto err = validate_thresholds(tp_, margin))
      throw std::invalid_argument("StaticProvider: " + *err);
  }

  std::vector<ActResult> decide(const std::vector<VnfObservation>&,
                                const std::vector<std::vector<double>>&) override {
    ActResult r;
    r.thresholds = tp_;
    return std::vector<ActResult>(static_cast<std::size_t>(num_types_), r);
  }

  const char* name() const override { return "static"; }

 private:
  ThresholdPair tp_;
  int num_types_;
};

// Integral controller per type: nudges the upper threshold toward a target
// utilization, the lower trails at a fixed gap.
class ProportionalProvider : public ThresholdProvider {
 public:
  ProportionalProvider(const PolicyConfig& pc, int num_types)
      : pc_(pc), upper_(static_cast<std::size_t>(num_types), pc.initial_upper) {}

  std::vector<ActResult> decide(const std::vector<VnfObservation>& obs,
                                const std::vector<std::vector<double>>&) override {
    std::vector<ActResult> out(upper_.size());
    for (std::size_t t = 0; t < upper_.size(); ++t) {
      double& h = upper_[t];
      if (t < obs.size()) h += pc_.k_i * (obs[t].u - pc_.u_set);
      h = std::clamp(h, 0.5, 0.95);
      out[t].thresholds.upper = h;
      out[t].thresholds.lower = std::max(0.05, h - pc_.gap);
    }
    return out;
  }

  const char* name() const override { return "proportional"; }

 private:
  PolicyConfig pc_;
  std::vector<double> upper_;
};

// Wraps a trained (or training) agent; one act() per type.
class DdpgProvider : public ThresholdProvider {
 public:
  DdpgProvider(DdpgAgent& agent, bool explore) : agent_(&agent), explore_(explore) {}

  std::vector<ActResult> decide(const std::vector<VnfObservation>&,
                                const std::vector<std::vector<double>>& features) override {
    std::vector<ActResult> out;
    out.reserve(features.size());
    for (const auto& f : features) out.push_back(agent_->act(f, explore_));
    return out;
  }

  const char* name() const override { return "ddpg"; }

 private:
  DdpgAgent* agent_;
  bool explore_;
};

}  // namespace nfvs
