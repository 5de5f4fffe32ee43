#include "hill/layers.hpp"

#include <cmath>

#include "hill/error.hpp"

namespace hill {

Linear Linear::init(std::size_t in, std::size_t out, Rng& rng, bool with_bias) {
  Linear l;
  l.weight = Tensor(in, out);
  const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (auto& w : l.weight.data()) w = dist(rng);
  l.has_bias = with_bias;
  l.bias = Tensor(1, with_bias ? out : 0);
  l.weight_grad = Tensor(in, out);
  l.bias_grad = Tensor(1, with_bias ? out : 0);
  return l;
}

Tensor Linear::forward(const Tensor& x) const {
  Tensor y = matmul(x, weight);
  return has_bias ? add_bias(y, bias) : y;
}

Tensor Linear::backward(const Tensor& x, const Tensor& grad_out) {
  auto g = matmul_backward(x, weight, grad_out);
  weight_grad.add_scaled(g.b);
  if (has_bias) bias_grad.add_scaled(sum_rows(grad_out));
  return std::move(g.a);
}

void Linear::zero_grad() {
  weight_grad.fill(0.0);
  bias_grad.fill(0.0);
}

void Linear::visit(std::string_view prefix, const ParamVisitor& f) {
  f(std::string(prefix) + ".weight", weight, weight_grad);
  if (has_bias) f(std::string(prefix) + ".bias", bias, bias_grad);
}

Mlp2 Mlp2::init(std::size_t in, std::size_t hidden, std::size_t out, Rng& rng, bool second_bias) {
  Mlp2 m;
  m.first = Linear::init(in, hidden, rng);
  m.second = Linear::init(hidden, out, rng, second_bias);
  return m;
}

Tensor Mlp2::forward(const Tensor& x, Cache* cache) const {
  Tensor pre = first.forward(x);
  Tensor hidden = relu(pre);
  Tensor out = second.forward(hidden);
  if (cache) {
    cache->input = x;
    cache->pre = std::move(pre);
    cache->hidden = std::move(hidden);
  }
  return out;
}

Tensor Mlp2::backward(const Cache& cache, const Tensor& grad_out) {
  Tensor d_hidden = second.backward(cache.hidden, grad_out);
  Tensor d_pre = relu_backward(cache.pre, d_hidden);
  return first.backward(cache.input, d_pre);
}

void Mlp2::zero_grad() {
  first.zero_grad();
  second.zero_grad();
}

void Mlp2::visit(std::string_view prefix, const ParamVisitor& f) {
  first.visit(std::string(prefix) + ".0", f);
  second.visit(std::string(prefix) + ".1", f);
}

}  // namespace hill
