#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nfvscale/rng.hpp"

namespace nfvs {

enum class OutputActivation { Linear = 0, Tanh = 1 };

// Per-layer weight and bias gradients, congruent with a DenseNet's shape.
struct ParamGrad {
  std::vector<std::vector<double>> w;
  std::vector<std::vector<double>> b;

  void add_scaled(const ParamGrad& other, double scale) {
    for (std::size_t l = 0; l < w.size(); ++l) {
      for (std::size_t i = 0; i < w[l].size(); ++i) w[l][i] += scale * other.w[l][i];
      for (std::size_t i = 0; i < b[l].size(); ++i) b[l][i] += scale * other.b[l][i];
    }
  }

  void scale(double s) {
    for (auto& layer : w)
      for (auto& v : layer) v *= s;
    for (auto& layer : b)
      for (auto& v : layer) v *= s;
  }
};

// Fully connected net, ReLU on hidden layers, Linear or Tanh on the output.
// Weights are stored row-major per layer: w[l][row * in + col] maps input
// `col` to output `row`.
class DenseNet {
 public:
  DenseNet() = default;

  // sizes = {in, hidden..., out}. Weights are drawn uniformly from
  // +-1/sqrt(fan_in), biases start at zero.
  DenseNet(std::vector<int> sizes, OutputActivation out_act, Rng& rng)
      : sizes_(std::move(sizes)), out_act_(out_act) {
    check_sizes();
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      const auto in = static_cast<std::size_t>(sizes_[l]);
      const auto out = static_cast<std::size_t>(sizes_[l + 1]);
      const double limit = 1.0 / std::sqrt(static_cast<double>(in));
      std::vector<double> wl(in * out);
      for (auto& v : wl) v = rng.uniform(-limit, limit);
      w_.push_back(std::move(wl));
      b_.emplace_back(out, 0.0);
    }
  }

  const std::vector<int>& sizes() const { return sizes_; }
  OutputActivation output_activation() const { return out_act_; }
  std::vector<std::vector<double>>& weights() { return w_; }
  const std::vector<std::vector<double>>& weights() const { return w_; }
  std::vector<std::vector<double>>& biases() { return b_; }
  const std::vector<std::vector<double>>& biases() const { return b_; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }

  std::size_t num_params() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < w_.size(); ++l) n += w_[l].size() + b_[l].size();
    return n;
  }

  std::vector<double> forward(const std::vector<double>& x) const {
    check_input(x);
    std::vector<double> a = x;
    for (std::size_t l = 0; l < w_.size(); ++l) a = layer_forward(l, a);
    return a;
  }

  struct Backward {
    ParamGrad grad;         // d(upstream . y)/d(params)
    std::vector<double> input_grad;  // d(upstream . y)/dx
    std::vector<double> output;      // forward(x), saved from the pass
  };

  // Gradient of the scalar upstream . forward(x) with respect to all
  // parameters and to the input.
  Backward backward(const std::vector<double>& x, const std::vector<double>& upstream) const {
    check_input(x);
    if (upstream.size() != static_cast<std::size_t>(output_size()))
      throw std::invalid_argument("backward: upstream size mismatch");

    std::vector<std::vector<double>> acts;  // activations per layer, acts[0] = x
    acts.push_back(x);
    for (std::size_t l = 0; l < w_.size(); ++l) acts.push_back(layer_forward(l, acts.back()));

    Backward out;
    out.output = acts.back();
    out.grad = zeros_like();

    std::vector<double> delta = upstream;  // d(scalar)/d(layer output)
    for (std::size_t li = w_.size(); li-- > 0;) {
      const auto in = static_cast<std::size_t>(sizes_[li]);
      const auto n_out = static_cast<std::size_t>(sizes_[li + 1]);
      const bool last = li + 1 == w_.size();
      // fold the activation derivative into delta
      for (std::size_t r = 0; r < n_out; ++r) {
        const double y = acts[li + 1][r];
        if (last) {
          if (out_act_ == OutputActivation::Tanh) delta[r] *= 1.0 - y * y;
        } else {
          if (y <= 0.0) delta[r] = 0.0;  // ReLU
        }
      }
      auto& gw = out.grad.w[li];
      auto& gb = out.grad.b[li];
      std::vector<double> prev(in, 0.0);
      for (std::size_t r = 0; r < n_out; ++r) {
        const double d = delta[r];
        gb[r] += d;
        const double* wrow = &w_[li][r * in];
        for (std::size_t c = 0; c < in; ++c) {
          gw[r * in + c] += d * acts[li][c];
          prev[c] += d * wrow[c];
        }
      }
      delta = std::move(prev);
    }
    out.input_grad = std::move(delta);
    return out;
  }

  ParamGrad zeros_like() const {
    ParamGrad g;
    for (std::size_t l = 0; l < w_.size(); ++l) {
      g.w.emplace_back(w_[l].size(), 0.0);
      g.b.emplace_back(b_[l].size(), 0.0);
    }
    return g;
  }

  // theta -= lr * grad
  void sgd_update(const ParamGrad& g, double lr) {
    check_grad(g);
    for (std::size_t l = 0; l < w_.size(); ++l) {
      for (std::size_t i = 0; i < w_[l].size(); ++i) w_[l][i] -= lr * g.w[l][i];
      for (std::size_t i = 0; i < b_[l].size(); ++i) b_[l][i] -= lr * g.b[l][i];
    }
  }

  // theta <- tau * source + (1 - tau) * theta
  void soft_update_from(const DenseNet& source, double tau) {
    if (source.sizes_ != sizes_) throw std::invalid_argument("soft_update_from: shape mismatch");
    if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("soft_update_from: tau in [0,1]");
    for (std::size_t l = 0; l < w_.size(); ++l) {
      for (std::size_t i = 0; i < w_[l].size(); ++i)
        w_[l][i] = tau * source.w_[l][i] + (1.0 - tau) * w_[l][i];
      for (std::size_t i = 0; i < b_[l].size(); ++i)
        b_[l][i] = tau * source.b_[l][i] + (1.0 - tau) * b_[l][i];
    }
  }

  void save(std::ostream& os) const {
    os << "densenet " << sizes_.size();
    for (int s : sizes_) os << ' ' << s;
    os << ' ' << (out_act_ == OutputActivation::Tanh ? "tanh" : "linear") << '\n';
    os.precision(17);
    for (std::size_t l = 0; l < w_.size(); ++l) {
      for (double v : w_[l]) os << v << '\n';
      for (double v : b_[l]) os << v << '\n';
    }
  }

  static DenseNet load(std::istream& is) {
    std::string tag;
    std::size_t n_sizes = 0;
    if (!(is >> tag >> n_sizes) || tag != "densenet")
      throw std::runtime_error("DenseNet::load: bad header");
    if (n_sizes < 2 || n_sizes > 64) throw std::runtime_error("DenseNet::load: bad layer count");
    DenseNet net;
    net.sizes_.resize(n_sizes);
    for (auto& s : net.sizes_)
      if (!(is >> s)) throw std::runtime_error("DenseNet::load: truncated sizes");
    std::string act;
    if (!(is >> act)) throw std::runtime_error("DenseNet::load: missing activation");
    if (act == "tanh")
      net.out_act_ = OutputActivation::Tanh;
    else if (act == "linear")
      net.out_act_ = OutputActivation::Linear;
    else
      throw std::runtime_error("DenseNet::load: unknown activation '" + act + "'");
    net.check_sizes();
    for (std::size_t l = 0; l + 1 < net.sizes_.size(); ++l) {
      const auto in = static_cast<std::size_t>(net.sizes_[l]);
      const auto out = static_cast<std::size_t>(net.sizes_[l + 1]);
      std::vector<double> wl(in * out);
      for (auto& v : wl)
        if (!(is >> v)) throw std::runtime_error("DenseNet::load: truncated weights");
      std::vector<double> bl(out);
      for (auto& v : bl)
        if (!(is >> v)) throw std::runtime_error("DenseNet::load: truncated biases");
      net.w_.push_back(std::move(wl));
      net.b_.push_back(std::move(bl));
    }
    return net;
  }

 private:
  void check_sizes() const {
    if (sizes_.size() < 2) throw std::invalid_argument("DenseNet: need input and output layer");
    for (int s : sizes_)
      if (s < 1) throw std::invalid_argument("DenseNet: layer sizes must be >= 1");
  }

  void check_input(const std::vector<double>& x) const {
    if (x.size() != static_cast<std::size_t>(input_size()))
      throw std::invalid_argument("DenseNet: input size mismatch (got " +
                                  std::to_string(x.size()) + ", want " +
                                  std::to_string(input_size()) + ")");
  }

  void check_grad(const ParamGrad& g) const {
    if (g.w.size() != w_.size() || g.b.size() != b_.size())
      throw std::invalid_argument("DenseNet: gradient shape mismatch");
    for (std::size_t l = 0; l < w_.size(); ++l)
      if (g.w[l].size() != w_[l].size() || g.b[l].size() != b_[l].size())
        throw std::invalid_argument("DenseNet: gradient shape mismatch");
  }

  std::vector<double> layer_forward(std::size_t l, const std::vector<double>& a) const {
    const auto in = static_cast<std::size_t>(sizes_[l]);
    const auto out = static_cast<std::size_t>(sizes_[l + 1]);
    const bool last = l + 1 == w_.size();
    std::vector<double> z(out);
    for (std::size_t r = 0; r < out; ++r) {
      double acc = b_[l][r];
      const double* wrow = &w_[l][r * in];
      for (std::size_t c = 0; c < in; ++c) acc += wrow[c] * a[c];
      if (last)
        z[r] = out_act_ == OutputActivation::Tanh ? std::tanh(acc) : acc;
      else
        z[r] = acc > 0.0 ? acc : 0.0;
    }
    return z;
  }

  std::vector<int> sizes_;
  OutputActivation out_act_ = OutputActivation::Linear;
  std::vector<std::vector<double>> w_;
  std::vector<std::vector<double>> b_;
};

// Adam optimizer state for one DenseNet. Optional alternative to plain SGD;
// keeps first/second moment estimates congruent with the net.
struct AdamState {
  ParamGrad m;
  ParamGrad v;
  long t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState for_net(const DenseNet& net) {
    AdamState s;
    s.m = net.zeros_like();
    s.v = net.zeros_like();
    return s;
  }

  void apply(DenseNet& net, const ParamGrad& g, double lr) {
    ++t;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    ParamGrad step = net.zeros_like();
    for (std::size_t l = 0; l < g.w.size(); ++l) {
      for (std::size_t i = 0; i < g.w[l].size(); ++i) {
        m.w[l][i] = beta1 * m.w[l][i] + (1.0 - beta1) * g.w[l][i];
        v.w[l][i] = beta2 * v.w[l][i] + (1.0 - beta2) * g.w[l][i] * g.w[l][i];
        step.w[l][i] = (m.w[l][i] / c1) / (std::sqrt(v.w[l][i] / c2) + eps);
      }
      for (std::size_t i = 0; i < g.b[l].size(); ++i) {
        m.b[l][i] = beta1 * m.b[l][i] + (1.0 - beta1) * g.b[l][i];
        v.b[l][i] = beta2 * v.b[l][i] + (1.0 - beta2) * g.b[l][i] * g.b[l][i];
        step.b[l][i] = (m.b[l][i] / c1) / (std::sqrt(v.b[l][i] / c2) + eps);
      }
    }
    net.sgd_update(step, lr);
  }
};

}  // namespace nfvs
