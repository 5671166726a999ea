#include "ctes/mlp.hpp"

#include <cmath>
#include <string>

#include "ctes/errors.hpp"

namespace ctes {
namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double silu(double x) { return x * sigmoid(x); }
inline double silu_grad(double x) {
  const double s = sigmoid(x);
  return s * (1.0 + x * (1.0 - s));
}

}  // namespace

Mlp::Mlp(std::vector<int> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.size() < 2) throw ShapeError("network needs input and output layers");
  if (sizes_.back() != 1) throw ShapeError("output layer must be scalar");
  int total = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    if (sizes_[l] <= 0) throw ShapeError("layer sizes must be positive");
    layer_offsets_.push_back(total);
    total += sizes_[l] * sizes_[l + 1] + sizes_[l + 1];
  }
  params_.assign(total, 0.0);

  int scratch = 0;
  for (std::size_t l = 1; l < sizes_.size(); ++l) scratch += sizes_[l];
  scratch_.assign(2 * scratch, 0.0);  // pre-activations + activations
}

Mlp Mlp::glorot_init(int input_dim, const std::vector<int>& hidden, Rng& rng) {
  std::vector<int> sizes;
  sizes.push_back(input_dim);
  for (int h : hidden) sizes.push_back(h);
  sizes.push_back(1);
  Mlp net(std::move(sizes));
  for (std::size_t l = 0; l + 1 < net.sizes_.size(); ++l) {
    const int fan_in = net.sizes_[l];
    const int fan_out = net.sizes_[l + 1];
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    double* w = net.params_.data() + net.layer_offsets_[l];
    for (int i = 0; i < fan_in * fan_out; ++i) w[i] = rng.uniform(-limit, limit);
    // biases stay zero
  }
  return net;
}

double Mlp::forward(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != sizes_.front()) {
    throw ShapeError("input has " + std::to_string(x.size()) +
                     " features, network expects " +
                     std::to_string(sizes_.front()));
  }
  const double* in = x.data();
  int in_dim = sizes_.front();
  double* act = scratch_.data();
  double out = 0.0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const int out_dim = sizes_[l + 1];
    const double* w = params_.data() + layer_offsets_[l];
    const double* b = w + in_dim * out_dim;
    const bool last = l + 2 == sizes_.size();
    for (int j = 0; j < out_dim; ++j) {
      double z = b[j];
      const double* wj = w + j * in_dim;
      for (int i = 0; i < in_dim; ++i) z += wj[i] * in[i];
      act[j] = last ? z : silu(z);
    }
    if (last) {
      out = act[0];
    } else {
      in = act;
      act += out_dim;
      in_dim = out_dim;
    }
  }
  return out;
}

double Mlp::forward_backward(std::span<const double> x, double upstream,
                             std::span<double> grad) const {
  if (static_cast<int>(x.size()) != sizes_.front()) {
    throw ShapeError("input has " + std::to_string(x.size()) +
                     " features, network expects " +
                     std::to_string(sizes_.front()));
  }
  if (static_cast<int>(grad.size()) != num_params()) {
    throw ShapeError("gradient buffer has wrong length");
  }

  const std::size_t layers = sizes_.size() - 1;
  // Forward pass keeping pre-activations (z) and activations (a) per layer.
  int act_total = 0;
  for (std::size_t l = 1; l < sizes_.size(); ++l) act_total += sizes_[l];
  double* z_buf = scratch_.data();
  double* a_buf = scratch_.data() + act_total;

  {
    const double* in = x.data();
    int in_dim = sizes_.front();
    int off = 0;
    for (std::size_t l = 0; l < layers; ++l) {
      const int out_dim = sizes_[l + 1];
      const double* w = params_.data() + layer_offsets_[l];
      const double* b = w + in_dim * out_dim;
      const bool last = l + 1 == layers;
      for (int j = 0; j < out_dim; ++j) {
        double z = b[j];
        const double* wj = w + j * in_dim;
        for (int i = 0; i < in_dim; ++i) z += wj[i] * in[i];
        z_buf[off + j] = z;
        a_buf[off + j] = last ? z : silu(z);
      }
      in = a_buf + off;
      in_dim = out_dim;
      off += out_dim;
    }
  }

  const double out_value = a_buf[act_total - 1];

  // Backward pass.
  std::vector<double> delta(1, upstream);
  std::vector<double> delta_prev;
  int off_end = act_total;
  for (std::size_t li = layers; li-- > 0;) {
    const int out_dim = sizes_[li + 1];
    const int in_dim = sizes_[li];
    off_end -= out_dim;
    const int in_off = off_end - in_dim;  // valid only when li > 0
    const double* in_act = li == 0 ? x.data() : a_buf + in_off;
    const double* w = params_.data() + layer_offsets_[li];
    double* gw = grad.data() + layer_offsets_[li];
    double* gb = gw + in_dim * out_dim;

    if (li > 0) delta_prev.assign(in_dim, 0.0);
    for (int j = 0; j < out_dim; ++j) {
      const double d = delta[j];
      const double* wj = w + j * in_dim;
      double* gwj = gw + j * in_dim;
      for (int i = 0; i < in_dim; ++i) {
        gwj[i] += d * in_act[i];
        if (li > 0) delta_prev[i] += d * wj[i];
      }
      gb[j] += d;
    }
    if (li > 0) {
      for (int i = 0; i < in_dim; ++i) {
        delta_prev[i] *= silu_grad(z_buf[in_off + i]);
      }
      delta.swap(delta_prev);
    }
  }
  return out_value;
}

AdamOptimizer::AdamOptimizer(int num_params, double learning_rate, double beta1,
                             double beta2, double epsilon)
    : lr_(learning_rate),
      beta1_(beta1),
      beta2_(beta2),
      eps_(epsilon),
      m_(num_params, 0.0),
      v_(num_params, 0.0) {}

void AdamOptimizer::step(std::span<double> params,
                         std::span<const double> grad) {
  if (params.size() != m_.size() || grad.size() != m_.size()) {
    throw ShapeError("optimizer state does not match parameter count");
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < m_.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
    const double mhat = m_[i] / bc1;
    const double vhat = v_[i] / bc2;
    params[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
  }
}

}  // namespace ctes
