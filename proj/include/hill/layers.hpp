#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <string_view>

#include "hill/tensor.hpp"

namespace hill {

/// Callback used to walk trainable parameters: (name, value, grad).
using ParamVisitor = std::function<void(std::string_view, Tensor&, Tensor&)>;

using Rng = std::mt19937_64;

/// y = x W + b, W: in x out, b: 1 x out.
struct Linear {
  Tensor weight;
  Tensor bias;
  Tensor weight_grad;
  Tensor bias_grad;
  bool has_bias = true;

  /// Glorot-uniform weights, zero bias.
  static Linear init(std::size_t in, std::size_t out, Rng& rng, bool with_bias = true);

  std::size_t in_dim() const { return weight.rows(); }
  std::size_t out_dim() const { return weight.cols(); }

  Tensor forward(const Tensor& x) const;
  /// Accumulates parameter grads and returns dL/dx.
  Tensor backward(const Tensor& x, const Tensor& grad_out);
  void zero_grad();
  void visit(std::string_view prefix, const ParamVisitor& f);
};

/// Linear -> ReLU -> Linear.
struct Mlp2 {
  struct Cache {
    Tensor input;
    Tensor pre;     // first layer output, before ReLU
    Tensor hidden;  // after ReLU
  };

  Linear first;
  Linear second;

  static Mlp2 init(std::size_t in, std::size_t hidden, std::size_t out, Rng& rng,
                   bool second_bias = true);

  Tensor forward(const Tensor& x, Cache* cache = nullptr) const;
  Tensor backward(const Cache& cache, const Tensor& grad_out);
  void zero_grad();
  void visit(std::string_view prefix, const ParamVisitor& f);
};

}  // namespace hill
