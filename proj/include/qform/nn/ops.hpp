#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "qform/error.hpp"
#include "qform/nn/tensor.hpp"
#include "qform/rng.hpp"

namespace qform::nn {

namespace detail {

template <typename T>
using RowMajor = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

template <typename T>
Eigen::Map<const RowMajor<T>> map(const Tensor<T>& m) {
  return {m.data(), static_cast<Eigen::Index>(m.rows()),
          static_cast<Eigen::Index>(m.cols())};
}
template <typename T>
Eigen::Map<RowMajor<T>> map(Tensor<T>& m) {
  return {m.data(), static_cast<Eigen::Index>(m.rows()),
          static_cast<Eigen::Index>(m.cols())};
}
template <typename T>
Eigen::Map<const Vec<T>> map(std::span<const T> v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}
template <typename T>
Eigen::Map<Vec<T>> map(std::span<T> v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

inline void require(bool ok, const char* what) {
  if (!ok) throw ShapeError(what);
}

}  // namespace detail

template <typename T>
void ensure_finite(std::span<const T> values, const char* what) {
  for (T v : values) {
    if (!std::isfinite(v)) throw NumericError(std::string("non-finite value in ") + what);
  }
}

/// y = W x
template <typename T>
void matvec(const Tensor<T>& w, std::span<const T> x, std::span<T> y) {
  detail::require(w.rank() == 2 && x.size() == w.cols() && y.size() == w.rows(),
                  "matvec: shape mismatch");
  detail::map(y).noalias() = detail::map(w) * detail::map(x);
}

/// y += W x
template <typename T>
void matvec_add(const Tensor<T>& w, std::span<const T> x, std::span<T> y) {
  detail::require(w.rank() == 2 && x.size() == w.cols() && y.size() == w.rows(),
                  "matvec_add: shape mismatch");
  detail::map(y).noalias() += detail::map(w) * detail::map(x);
}

/// dx += W^T dy
template <typename T>
void matvec_transpose_add(const Tensor<T>& w, std::span<const T> dy,
                          std::span<T> dx) {
  detail::require(w.rank() == 2 && dy.size() == w.rows() && dx.size() == w.cols(),
                  "matvec_transpose_add: shape mismatch");
  detail::map(dx).noalias() += detail::map(w).transpose() * detail::map(dy);
}

/// dW += dy x^T
template <typename T>
void outer_add(Tensor<T>& dw, std::span<const T> dy, std::span<const T> x) {
  detail::require(dw.rank() == 2 && dy.size() == dw.rows() && x.size() == dw.cols(),
                  "outer_add: shape mismatch");
  detail::map(dw).noalias() += detail::map(dy) * detail::map(x).transpose();
}

template <typename T>
void add_to(std::span<T> dst, std::span<const T> src) {
  detail::require(dst.size() == src.size(), "add_to: shape mismatch");
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

template <typename T>
std::vector<T> concat(std::span<const T> a, std::span<const T> b) {
  std::vector<T> out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

template <typename T>
T sigmoid(T x) {
  return T(1) / (T(1) + std::exp(-x));
}

template <typename T>
void tanh_inplace(std::span<T> v) {
  for (T& x : v) x = std::tanh(x);
}

template <typename T>
void sigmoid_inplace(std::span<T> v) {
  for (T& x : v) x = sigmoid(x);
}

template <typename T>
std::vector<T> elementwise_product(std::span<const T> a, std::span<const T> b) {
  detail::require(a.size() == b.size(), "elementwise_product: shape mismatch");
  std::vector<T> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

template <typename T>
std::vector<T> elementwise_sum(std::span<const T> a, std::span<const T> b) {
  detail::require(a.size() == b.size(), "elementwise_sum: shape mismatch");
  std::vector<T> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

template <typename T>
std::vector<T> log_softmax(std::span<const T> logits) {
  detail::require(!logits.empty(), "log_softmax: empty input");
  const T peak = *std::max_element(logits.begin(), logits.end());
  T sum = 0;
  for (T v : logits) sum += std::exp(v - peak);
  const T log_z = peak + std::log(sum);
  std::vector<T> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - log_z;
  ensure_finite<T>(out, "log_softmax");
  return out;
}

template <typename T>
std::vector<T> softmax(std::span<const T> logits) {
  auto out = log_softmax(logits);
  for (T& v : out) v = std::exp(v);
  return out;
}

template <typename T>
T nll_loss(std::span<const T> log_probs, std::size_t target) {
  if (target >= log_probs.size()) {
    throw InvalidArgument("nll_loss: target index out of range");
  }
  return -log_probs[target];
}

template <typename T>
std::size_t argmax(std::span<const T> values) {
  detail::require(!values.empty(), "argmax: empty input");
  return static_cast<std::size_t>(
      std::max_element(values.begin(), values.end()) - values.begin());
}

// Backward rules. Each returns the gradient with respect to the op's input
// given the op's output `y` (or input, where noted) and upstream `dy`.

template <typename T>
std::vector<T> tanh_backward(std::span<const T> y, std::span<const T> dy) {
  detail::require(y.size() == dy.size(), "tanh_backward: shape mismatch");
  std::vector<T> dx(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) dx[i] = dy[i] * (T(1) - y[i] * y[i]);
  return dx;
}

template <typename T>
std::vector<T> sigmoid_backward(std::span<const T> y, std::span<const T> dy) {
  detail::require(y.size() == dy.size(), "sigmoid_backward: shape mismatch");
  std::vector<T> dx(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) dx[i] = dy[i] * y[i] * (T(1) - y[i]);
  return dx;
}

/// `log_probs` is the output of log_softmax.
template <typename T>
std::vector<T> log_softmax_backward(std::span<const T> log_probs,
                                    std::span<const T> dy) {
  detail::require(log_probs.size() == dy.size(),
                  "log_softmax_backward: shape mismatch");
  T total = 0;
  for (T g : dy) total += g;
  std::vector<T> dx(dy.size());
  for (std::size_t i = 0; i < dy.size(); ++i) {
    dx[i] = dy[i] - std::exp(log_probs[i]) * total;
  }
  return dx;
}

/// `probs` is the output of softmax.
template <typename T>
std::vector<T> softmax_backward(std::span<const T> probs, std::span<const T> dy) {
  detail::require(probs.size() == dy.size(), "softmax_backward: shape mismatch");
  T dot = 0;
  for (std::size_t i = 0; i < dy.size(); ++i) dot += probs[i] * dy[i];
  std::vector<T> dx(dy.size());
  for (std::size_t i = 0; i < dy.size(); ++i) dx[i] = probs[i] * (dy[i] - dot);
  return dx;
}

/// Gradient of the combined log_softmax + nll_loss with respect to logits.
template <typename T>
std::vector<T> nll_logits_backward(std::span<const T> log_probs,
                                   std::size_t target, T scale) {
  if (target >= log_probs.size()) {
    throw InvalidArgument("nll_loss: target index out of range");
  }
  std::vector<T> dx(log_probs.size());
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] = scale * std::exp(log_probs[i]);
  dx[target] -= scale;
  return dx;
}

/// Inverted-dropout mask: each entry 0 with probability p, else 1/(1-p).
template <typename T>
std::vector<T> dropout_mask(std::size_t n, double p, Rng& rng) {
  if (!(p >= 0.0 && p < 1.0)) throw InvalidArgument("dropout: p must be in [0, 1)");
  const T keep = static_cast<T>(1.0 / (1.0 - p));
  std::vector<T> mask(n, keep);
  if (p == 0.0) return mask;
  for (T& m : mask) {
    if (rng.uniform01() < p) m = T(0);
  }
  return mask;
}

template <typename T>
std::vector<T> dropout(std::span<const T> x, double p, bool training, Rng& rng) {
  std::vector<T> out(x.begin(), x.end());
  if (!training) return out;
  const auto mask = dropout_mask<T>(x.size(), p, rng);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  return out;
}

}  // namespace qform::nn
