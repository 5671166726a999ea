#pragma once

#include <span>
#include <vector>

#include "ctes/rng.hpp"

namespace ctes {

// Fully connected network with SiLU hidden activations and a linear scalar
// output. Parameters live in one flat vector (per layer: row-major weights,
// then biases), which keeps optimizer state and gradient checking simple.
class Mlp {
 public:
  // sizes = {input, hidden..., 1}. Weights start at zero; use glorot_init
  // for trainable networks.
  explicit Mlp(std::vector<int> sizes);

  static Mlp glorot_init(int input_dim, const std::vector<int>& hidden,
                         Rng& rng);

  // Scalar output. Throws ShapeError if x.size() != input_dim().
  double forward(std::span<const double> x) const;

  // Accumulates d(upstream * output)/d(params) into grad (same layout and
  // length as params()). Returns the forward value.
  double forward_backward(std::span<const double> x, double upstream,
                          std::span<double> grad) const;

  int input_dim() const { return sizes_.front(); }
  const std::vector<int>& layer_sizes() const { return sizes_; }
  int num_params() const { return static_cast<int>(params_.size()); }

  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

 private:
  std::vector<int> sizes_;
  std::vector<double> params_;
  std::vector<int> layer_offsets_;  // start of each layer's weight block
  mutable std::vector<double> scratch_;  // activation workspace
};

// Adaptive-moment gradient descent with bias correction.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(int num_params, double learning_rate = 0.01,
                         double beta1 = 0.9, double beta2 = 0.999,
                         double epsilon = 1e-8);

  void step(std::span<double> params, std::span<const double> grad);

  long iterations() const { return t_; }
  double learning_rate() const { return lr_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<double> m_, v_;
};

}  // namespace ctes
