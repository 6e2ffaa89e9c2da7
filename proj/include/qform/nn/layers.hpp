#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "qform/nn/ops.hpp"
#include "qform/nn/tensor.hpp"
#include "qform/rng.hpp"

namespace qform::nn {

template <typename T>
void init_uniform(Tensor<T>& t, double bound, Rng& rng) {
  for (T& v : t.values()) v = static_cast<T>(rng.uniform(-bound, bound));
}

template <typename T>
void init_normal(Tensor<T>& t, Rng& rng) {
  for (T& v : t.values()) v = static_cast<T>(rng.normal());
}

/// Uniform on (-1/sqrt(fan_in), 1/sqrt(fan_in)) for weight and bias.
template <typename T>
void init_fan_in(Parameter<T>& weight, Parameter<T>& bias, std::size_t fan_in,
                 Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  init_uniform(weight.value, bound, rng);
  init_uniform(bias.value, bound, rng);
}

/// y = W x + b
template <typename T>
class Linear {
 public:
  Linear() = default;
  Linear(const std::string& name, std::size_t in, std::size_t out)
      : weight(name + ".weight", {out, in}), bias(name + ".bias", {out}) {}

  std::size_t in_dim() const { return weight.value.cols(); }
  std::size_t out_dim() const { return weight.value.rows(); }

  void init(Rng& rng) { init_fan_in(weight, bias, in_dim(), rng); }

  void forward(std::span<const T> x, std::span<T> y) const {
    matvec(weight.value, x, y);
    add_to<T>(y, bias.value.values());
  }

  std::vector<T> forward(std::span<const T> x) const {
    std::vector<T> y(out_dim());
    forward(x, y);
    return y;
  }

  /// Accumulates parameter gradients; adds W^T dy into dx when given.
  void backward(std::span<const T> x, std::span<const T> dy, std::span<T> dx) {
    outer_add(weight.grad, dy, x);
    add_to<T>(bias.grad.values(), dy);
    if (!dx.empty()) matvec_transpose_add(weight.value, dy, dx);
  }

  ParameterList<T> parameters() { return {&weight, &bias}; }

  Parameter<T> weight;
  Parameter<T> bias;
};

template <typename T>
class Embedding {
 public:
  Embedding() = default;
  Embedding(const std::string& name, std::size_t vocab, std::size_t dim)
      : table(name + ".weight", {vocab, dim}) {}

  std::size_t vocab_size() const { return table.value.rows(); }
  std::size_t dim() const { return table.value.cols(); }

  /// Standard normal entries.
  void init(Rng& rng) { init_normal(table.value, rng); }

  std::vector<T> lookup(std::size_t id) const {
    if (id >= vocab_size()) throw InvalidArgument("embedding id out of range");
    auto row = table.value.row(id);
    return {row.begin(), row.end()};
  }

  void backward(std::size_t id, std::span<const T> grad) {
    add_to<T>(table.grad.row(id), grad);
  }

  ParameterList<T> parameters() { return {&table}; }

  Parameter<T> table;
};

/// theta <- theta - lr * grad, then grad <- 0.
template <typename T>
void sgd_step(const ParameterList<T>& params, double lr) {
  const T rate = static_cast<T>(lr);
  for (Parameter<T>* p : params) {
    auto value = p->value.values();
    auto grad = p->grad.values();
    for (std::size_t i = 0; i < value.size(); ++i) value[i] -= rate * grad[i];
    p->zero_grad();
  }
}

template <typename T>
void zero_grads(const ParameterList<T>& params) {
  for (Parameter<T>* p : params) p->zero_grad();
}

}  // namespace qform::nn
