#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nfvscale/domain.hpp"
#include "nfvscale/net.hpp"
#include "nfvscale/rng.hpp"

namespace nfvs {

// Maps a raw actor output in [-1,1]^2 onto a threshold pair: the first
// component spans upper in [0.5, 0.95], the second lower in [0.05, 0.5],
// then lower is pulled down if needed to keep the margin.
inline ThresholdPair map_raw_to_thresholds(const std::array<double, 2>& raw,
                                           double margin = kDefaultThresholdMargin) {
  const double a0 = std::clamp(raw[0], -1.0, 1.0);
  const double a1 = std::clamp(raw[1], -1.0, 1.0);
  ThresholdPair tp;
  tp.upper = 0.5 + 0.225 * (a0 + 1.0);
  tp.lower = 0.05 + 0.225 * (a1 + 1.0);
  tp.lower = std::min(tp.lower, tp.upper - margin);
  return tp;
}

// Per-type aggregates over one monitoring cycle, the reward inputs.
struct VnfCycleAggregate {
  double processed = 0.0;   // packets handled by the type's instances
  double dropped = 0.0;     // packets lost
  double mean_queue = 0.0;  // queue length averaged over the cycle's ticks
};

// Mean over types of (processed - dropped - mean_queue), scaled. Higher is
// better: throughput counts for, losses and standing queues against.
inline double compute_reward(const std::vector<VnfCycleAggregate>& per_type, double scale = 1.0) {
  if (per_type.empty()) throw std::invalid_argument("compute_reward: no vnf types");
  double sum = 0.0;
  for (const auto& a : per_type) sum += a.processed - a.dropped - a.mean_queue;
  return scale * sum / static_cast<double>(per_type.size());
}

struct Transition {
  std::vector<double> state;
  std::vector<double> action;  // raw, pre-mapping
  double reward = 0.0;
  std::vector<double> next_state;
  bool terminal = false;
};

// Fixed-capacity ring. Sampling picks distinct indices uniformly.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ < 1) throw std::invalid_argument("ReplayBuffer: capacity must be >= 1");
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return store_.size(); }

  void push(Transition t) {
    if (store_.size() < capacity_) {
      store_.push_back(std::move(t));
    } else {
      store_[next_] = std::move(t);
    }
    next_ = (next_ + 1) % capacity_;
  }

  const Transition& at(std::size_t i) const { return store_.at(i); }

  // k distinct indices via Floyd's algorithm; order is then shuffled so the
  // minibatch carries no index bias.
  std::vector<std::size_t> sample_indices(std::size_t k, Rng& rng) const {
    const std::size_t n = store_.size();
    if (k > n) throw std::invalid_argument("ReplayBuffer: sample larger than population");
    std::vector<std::size_t> picked;
    picked.reserve(k);
    for (std::size_t j = n - k; j < n; ++j) {
      const auto r =
          static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(j)));
      if (std::find(picked.begin(), picked.end(), r) == picked.end())
        picked.push_back(r);
      else
        picked.push_back(j);
    }
    for (std::size_t i = picked.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(picked[i - 1], picked[j]);
    }
    return picked;
  }

 private:
  std::size_t capacity_;
  std::vector<Transition> store_;
  std::size_t next_ = 0;
};

// Ornstein-Uhlenbeck exploration noise: temporally correlated, decays toward
// mu when sigma is cut.
class OuNoise {
 public:
  OuNoise(std::size_t dims, double theta, double sigma, std::uint64_t seed, double mu = 0.0)
      : theta_(theta), sigma_(sigma), mu_(mu), state_(dims, mu), rng_(seed) {
    if (dims < 1) throw std::invalid_argument("OuNoise: dims must be >= 1");
    if (theta_ < 0.0 || theta_ > 1.0) throw std::invalid_argument("OuNoise: theta in [0,1]");
    if (sigma_ < 0.0) throw std::invalid_argument("OuNoise: sigma must be >= 0");
  }

  void reset() { std::fill(state_.begin(), state_.end(), mu_); }
  double sigma() const { return sigma_; }
  void set_sigma(double s) { sigma_ = std::max(0.0, s); }

  const std::vector<double>& sample() {
    for (auto& x : state_) x += theta_ * (mu_ - x) + sigma_ * rng_.gaussian();
    return state_;
  }

 private:
  double theta_;
  double sigma_;
  double mu_;
  std::vector<double> state_;
  Rng rng_;
};

struct AgentConfig {
  int feature_dim = 0;
  std::vector<int> actor_hidden{64, 64};
  std::vector<int> critic_hidden{64, 64};
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  double gamma = 0.95;
  double tau = 0.01;
  std::size_t buffer_capacity = 50000;
  std::size_t batch_size = 64;
  double ou_theta = 0.15;
  double ou_sigma = 0.25;
  double ou_sigma_decay = 0.995;
  double ou_sigma_min = 0.02;
  double threshold_margin = kDefaultThresholdMargin;
  bool use_adam = true;  // false: plain SGD
  std::uint64_t seed = 1;

  void validate() const {
    if (feature_dim < 1) throw std::invalid_argument("agent.feature_dim must be >= 1");
    for (int h : actor_hidden)
      if (h < 1) throw std::invalid_argument("agent.actor_hidden sizes must be >= 1");
    for (int h : critic_hidden)
      if (h < 1) throw std::invalid_argument("agent.critic_hidden sizes must be >= 1");
    if (actor_lr < 0.0 || critic_lr < 0.0)
      throw std::invalid_argument("agent learning rates must be >= 0");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("agent.gamma in [0,1)");
    if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("agent.tau in (0,1]");
    if (batch_size < 1 || batch_size > buffer_capacity)
      throw std::invalid_argument("agent.batch_size must be in [1, buffer_capacity]");
    if (ou_sigma < 0.0 || ou_sigma_min < 0.0 || ou_sigma_decay <= 0.0 || ou_sigma_decay > 1.0)
      throw std::invalid_argument("agent noise parameters out of range");
    if (!(threshold_margin > 0.0 && threshold_margin < 0.45))
      throw std::invalid_argument("agent.threshold_margin out of range");
  }
};

struct ActResult {
  std::array<double, 2> raw{0.0, 0.0};
  ThresholdPair thresholds;
};

struct TrainStats {
  double critic_loss = 0.0;
  double actor_objective = 0.0;  // mean Q(s, actor(s)) over the batch
};

inline constexpr int kActionDim = 2;

// Deterministic-policy-gradient learner over the threshold action space.
// One agent serves every VNF type; the type is part of the feature vector.
class DdpgAgent {
 public:
  explicit DdpgAgent(AgentConfig cfg)
      : cfg_(validated(std::move(cfg))),
        rng_(derive_seed(cfg_.seed, 0xD0)),
        actor_(layer_sizes(cfg_.feature_dim, cfg_.actor_hidden, kActionDim),
               OutputActivation::Tanh, rng_),
        critic_(layer_sizes(cfg_.feature_dim + kActionDim, cfg_.critic_hidden, 1),
                OutputActivation::Linear, rng_),
        actor_target_(actor_),
        critic_target_(critic_),
        buffer_(cfg_.buffer_capacity),
        noise_(kActionDim, cfg_.ou_theta, cfg_.ou_sigma, derive_seed(cfg_.seed, 0x0E)),
        sample_rng_(derive_seed(cfg_.seed, 0x5A)),
        actor_adam_(AdamState::for_net(actor_)),
        critic_adam_(AdamState::for_net(critic_)) {}

  const AgentConfig& config() const { return cfg_; }
  const DenseNet& actor() const { return actor_; }
  const DenseNet& critic() const { return critic_; }
  const DenseNet& actor_target() const { return actor_target_; }
  const DenseNet& critic_target() const { return critic_target_; }
  std::size_t buffer_size() const { return buffer_.size(); }
  double noise_sigma() const { return noise_.sigma(); }
  void reset_noise() { noise_.reset(); }
  void decay_noise() {
    noise_.set_sigma(std::max(cfg_.ou_sigma_min, noise_.sigma() * cfg_.ou_sigma_decay));
  }

  // Policy output for one feature vector; exploration adds OU noise before
  // clamping and mapping.
  ActResult act(const std::vector<double>& features, bool explore) {
    const auto out = actor_.forward(features);
    ActResult r;
    r.raw = {out[0], out[1]};
    if (explore) {
      const auto& n = noise_.sample();
      r.raw[0] += n[0];
      r.raw[1] += n[1];
    }
    r.raw[0] = std::clamp(r.raw[0], -1.0, 1.0);
    r.raw[1] = std::clamp(r.raw[1], -1.0, 1.0);
    r.thresholds = map_raw_to_thresholds(r.raw, cfg_.threshold_margin);
    return r;
  }

  void remember(Transition t) {
    if (t.state.size() != static_cast<std::size_t>(cfg_.feature_dim) ||
        t.next_state.size() != static_cast<std::size_t>(cfg_.feature_dim))
      throw std::invalid_argument("remember: feature size mismatch");
    if (t.action.size() != static_cast<std::size_t>(kActionDim))
      throw std::invalid_argument("remember: action size mismatch");
    buffer_.push(std::move(t));
  }

  bool can_train() const { return buffer_.size() >= cfg_.batch_size; }

  // One minibatch update: critic toward the frozen-target TD value, actor up
  // the critic's action gradient, then soft target sync.
  TrainStats train_step() {
    if (!can_train()) throw std::logic_error("train_step: buffer smaller than batch");
    const auto idx = buffer_.sample_indices(cfg_.batch_size, sample_rng_);
    const double inv_b = 1.0 / static_cast<double>(cfg_.batch_size);

    TrainStats stats;
    ParamGrad critic_grad = critic_.zeros_like();
    for (const auto i : idx) {
      const Transition& tr = buffer_.at(i);
      double y = tr.reward;
      if (!tr.terminal) {
        const auto a2 = actor_target_.forward(tr.next_state);
        y += cfg_.gamma * critic_target_.forward(join(tr.next_state, a2))[0];
      }
      const auto sa = join(tr.state, tr.action);
      const double q = critic_.forward(sa)[0];
      const double err = q - y;
      stats.critic_loss += err * err * inv_b;
      auto bw = critic_.backward(sa, {2.0 * err * inv_b});
      critic_grad.add_scaled(bw.grad, 1.0);
    }
    if (cfg_.use_adam)
      critic_adam_.apply(critic_, critic_grad, cfg_.critic_lr);
    else
      critic_.sgd_update(critic_grad, cfg_.critic_lr);

    ParamGrad actor_grad = actor_.zeros_like();
    for (const auto i : idx) {
      const Transition& tr = buffer_.at(i);
      const auto a = actor_.forward(tr.state);
      const auto bw = critic_.backward(join(tr.state, a), {1.0});
      stats.actor_objective += bw.output[0] * inv_b;
      std::vector<double> dq_da(bw.input_grad.end() - kActionDim, bw.input_grad.end());
      for (auto& g : dq_da) g *= -inv_b;  // ascend Q
      actor_grad.add_scaled(actor_.backward(tr.state, dq_da).grad, 1.0);
    }
    if (cfg_.use_adam)
      actor_adam_.apply(actor_, actor_grad, cfg_.actor_lr);
    else
      actor_.sgd_update(actor_grad, cfg_.actor_lr);

    actor_target_.soft_update_from(actor_, cfg_.tau);
    critic_target_.soft_update_from(critic_, cfg_.tau);
    return stats;
  }

  void save(std::ostream& os) const {
    os << "nfvscale-agent 1\n";
    os << "feature_dim " << cfg_.feature_dim << " margin ";
    os.precision(17);
    os << cfg_.threshold_margin << '\n';
    actor_.save(os);
    critic_.save(os);
    actor_target_.save(os);
    critic_target_.save(os);
  }

  // Restores the four networks; hyperparameters stay as configured.
  void load(std::istream& is) {
    std::string tag;
    int version = 0;
    if (!(is >> tag >> version) || tag != "nfvscale-agent" || version != 1)
      throw std::runtime_error("agent load: bad header");
    std::string key;
    int fd = 0;
    double margin = 0.0;
    if (!(is >> key >> fd) || key != "feature_dim")
      throw std::runtime_error("agent load: missing feature_dim");
    if (!(is >> key >> margin) || key != "margin")
      throw std::runtime_error("agent load: missing margin");
    if (fd != cfg_.feature_dim)
      throw std::runtime_error("agent load: checkpoint feature_dim " + std::to_string(fd) +
                               " does not match configuration " +
                               std::to_string(cfg_.feature_dim));
    cfg_.threshold_margin = margin;
    actor_ = DenseNet::load(is);
    critic_ = DenseNet::load(is);
    actor_target_ = DenseNet::load(is);
    critic_target_ = DenseNet::load(is);
    if (actor_.input_size() != cfg_.feature_dim || actor_.output_size() != kActionDim ||
        critic_.input_size() != cfg_.feature_dim + kActionDim || critic_.output_size() != 1)
      throw std::runtime_error("agent load: network shapes do not fit the configuration");
    actor_adam_ = AdamState::for_net(actor_);
    critic_adam_ = AdamState::for_net(critic_);
  }

 private:
  static AgentConfig validated(AgentConfig c) {
    c.validate();
    return c;
  }

  static std::vector<int> layer_sizes(int in, const std::vector<int>& hidden, int out) {
    std::vector<int> s;
    s.push_back(in);
    s.insert(s.end(), hidden.begin(), hidden.end());
    s.push_back(out);
    return s;
  }

  static std::vector<double> join(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out;
    out.reserve(a.size() + b.size());
    out.insert(out.end(), a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    return out;
  }

  AgentConfig cfg_;
  Rng rng_;
  DenseNet actor_;
  DenseNet critic_;
  DenseNet actor_target_;
  DenseNet critic_target_;
  ReplayBuffer buffer_;
  OuNoise noise_;
  Rng sample_rng_;
  AdamState actor_adam_;
  AdamState critic_adam_;
};

}  // namespace nfvs
