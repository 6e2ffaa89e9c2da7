#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qform/error.hpp"
#include "qform/nn/layers.hpp"
#include "qform/nn/ops.hpp"

namespace qform::rnn {

enum class CellKind { SRN, GRU, LSTM };

std::string to_string(CellKind kind);
CellKind parse_cell_kind(std::string_view text);

template <typename T>
struct CellState {
  std::vector<T> h;
  std::vector<T> c;  // LSTM only; empty otherwise
};

/// Everything backward() needs from one forward step.
template <typename T>
struct StepCache {
  std::vector<T> u;  // [h_prev, x]
  std::vector<T> x;
  std::vector<T> h_prev;
  std::vector<T> c_prev;
  // SRN: gate[0] = h. GRU: r, z, n and W_nD h_prev + b_nD.
  // LSTM: i, f, g, o.
  std::vector<T> gate[4];
  std::vector<T> tanh_c;
  CellState<T> out;
};

/// One recurrent unit. Gates that read the whole [h_prev, x] vector share the
/// layout of the SRN update; the GRU new gate keeps its input and hidden
/// projections separate.
template <typename T>
class RecurrentCell {
 public:
  RecurrentCell() = default;
  RecurrentCell(const std::string& name, CellKind kind, std::size_t input_dim,
                std::size_t hidden_dim)
      : kind_(kind), input_dim_(input_dim), hidden_dim_(hidden_dim) {
    const std::size_t joint = hidden_dim + input_dim;
    switch (kind) {
      case CellKind::SRN:
        layers_ = {nn::Linear<T>(name + ".W", joint, hidden_dim)};
        break;
      case CellKind::GRU:
        layers_ = {nn::Linear<T>(name + ".W_r", joint, hidden_dim),
                   nn::Linear<T>(name + ".W_z", joint, hidden_dim),
                   nn::Linear<T>(name + ".W_nw", input_dim, hidden_dim),
                   nn::Linear<T>(name + ".W_nD", hidden_dim, hidden_dim)};
        break;
      case CellKind::LSTM:
        layers_ = {nn::Linear<T>(name + ".W_i", joint, hidden_dim),
                   nn::Linear<T>(name + ".W_f", joint, hidden_dim),
                   nn::Linear<T>(name + ".W_g", joint, hidden_dim),
                   nn::Linear<T>(name + ".W_o", joint, hidden_dim)};
        break;
    }
  }

  CellKind kind() const { return kind_; }
  std::size_t input_dim() const { return input_dim_; }
  std::size_t hidden_dim() const { return hidden_dim_; }
  bool has_cell_state() const { return kind_ == CellKind::LSTM; }

  CellState<T> zero_state() const {
    CellState<T> s;
    s.h.assign(hidden_dim_, T(0));
    if (has_cell_state()) s.c.assign(hidden_dim_, T(0));
    return s;
  }

  void init(Rng& rng) {
    for (auto& layer : layers_) layer.init(rng);
  }

  std::vector<nn::Linear<T>>& layers() { return layers_; }
  const std::vector<nn::Linear<T>>& layers() const { return layers_; }

  StepCache<T> step(const CellState<T>& prev, std::span<const T> x) const {
    if (prev.h.size() != hidden_dim_ || x.size() != input_dim_ ||
        (has_cell_state() && prev.c.size() != hidden_dim_)) {
      throw ShapeError("recurrent step: shape mismatch");
    }
    StepCache<T> cache;
    cache.x.assign(x.begin(), x.end());
    cache.h_prev = prev.h;
    cache.u = nn::concat<T>(prev.h, x);
    const std::size_t H = hidden_dim_;
    switch (kind_) {
      case CellKind::SRN: {
        auto h = layers_[0].forward(cache.u);
        nn::tanh_inplace<T>(h);
        cache.gate[0] = h;
        cache.out.h = std::move(h);
        break;
      }
      case CellKind::GRU: {
        auto r = layers_[0].forward(cache.u);
        auto z = layers_[1].forward(cache.u);
        nn::sigmoid_inplace<T>(r);
        nn::sigmoid_inplace<T>(z);
        auto hn = layers_[3].forward(prev.h);
        auto n = layers_[2].forward(x);
        for (std::size_t j = 0; j < H; ++j) n[j] = std::tanh(n[j] + r[j] * hn[j]);
        std::vector<T> h(H);
        for (std::size_t j = 0; j < H; ++j) {
          h[j] = z[j] * prev.h[j] + (T(1) - z[j]) * n[j];
        }
        cache.gate[0] = std::move(r);
        cache.gate[1] = std::move(z);
        cache.gate[2] = std::move(n);
        cache.gate[3] = std::move(hn);
        cache.out.h = std::move(h);
        break;
      }
      case CellKind::LSTM: {
        cache.c_prev = prev.c;
        auto i = layers_[0].forward(cache.u);
        auto f = layers_[1].forward(cache.u);
        auto g = layers_[2].forward(cache.u);
        auto o = layers_[3].forward(cache.u);
        nn::sigmoid_inplace<T>(i);
        nn::sigmoid_inplace<T>(f);
        nn::tanh_inplace<T>(g);
        nn::sigmoid_inplace<T>(o);
        std::vector<T> c(H), h(H), tc(H);
        for (std::size_t j = 0; j < H; ++j) {
          c[j] = f[j] * prev.c[j] + i[j] * g[j];
          tc[j] = std::tanh(c[j]);
          h[j] = o[j] * tc[j];
        }
        cache.gate[0] = std::move(i);
        cache.gate[1] = std::move(f);
        cache.gate[2] = std::move(g);
        cache.gate[3] = std::move(o);
        cache.tanh_c = std::move(tc);
        cache.out.h = std::move(h);
        cache.out.c = std::move(c);
        break;
      }
    }
    return cache;
  }

  /// Accumulates parameter gradients. dh_prev, dc_prev and dx are
  /// overwritten; dc and dc_prev are ignored for cells without a cell state.
  void backward(const StepCache<T>& cache, std::span<const T> dh,
                std::span<const T> dc, std::span<T> dh_prev,
                std::span<T> dc_prev, std::span<T> dx) {
    const std::size_t H = hidden_dim_;
    std::vector<T> du(H + input_dim_, T(0));
    std::fill(dh_prev.begin(), dh_prev.end(), T(0));
    std::fill(dx.begin(), dx.end(), T(0));
    switch (kind_) {
      case CellKind::SRN: {
        auto da = nn::tanh_backward<T>(cache.gate[0], dh);
        layers_[0].backward(cache.u, da, du);
        break;
      }
      case CellKind::GRU: {
        const auto& r = cache.gate[0];
        const auto& z = cache.gate[1];
        const auto& n = cache.gate[2];
        const auto& hn = cache.gate[3];
        std::vector<T> dz(H), dn(H);
        for (std::size_t j = 0; j < H; ++j) {
          dz[j] = dh[j] * (cache.h_prev[j] - n[j]);
          dn[j] = dh[j] * (T(1) - z[j]);
          dh_prev[j] = dh[j] * z[j];
        }
        auto dan = nn::tanh_backward<T>(n, dn);
        std::vector<T> dr(H), dhn(H);
        for (std::size_t j = 0; j < H; ++j) {
          dr[j] = dan[j] * hn[j];
          dhn[j] = dan[j] * r[j];
        }
        layers_[2].backward(cache.x, dan, dx);
        layers_[3].backward(cache.h_prev, dhn, dh_prev);
        layers_[0].backward(cache.u, nn::sigmoid_backward<T>(r, dr), du);
        layers_[1].backward(cache.u, nn::sigmoid_backward<T>(z, dz), du);
        break;
      }
      case CellKind::LSTM: {
        const auto& i = cache.gate[0];
        const auto& f = cache.gate[1];
        const auto& g = cache.gate[2];
        const auto& o = cache.gate[3];
        const auto& tc = cache.tanh_c;
        std::vector<T> di(H), df(H), dg(H), d_o(H), dct(H);
        for (std::size_t j = 0; j < H; ++j) {
          d_o[j] = dh[j] * tc[j];
          dct[j] = dc[j] + dh[j] * o[j] * (T(1) - tc[j] * tc[j]);
          df[j] = dct[j] * cache.c_prev[j];
          di[j] = dct[j] * g[j];
          dg[j] = dct[j] * i[j];
          dc_prev[j] = dct[j] * f[j];
        }
        layers_[0].backward(cache.u, nn::sigmoid_backward<T>(i, di), du);
        layers_[1].backward(cache.u, nn::sigmoid_backward<T>(f, df), du);
        layers_[2].backward(cache.u, nn::tanh_backward<T>(g, dg), du);
        layers_[3].backward(cache.u, nn::sigmoid_backward<T>(o, d_o), du);
        break;
      }
    }
    for (std::size_t j = 0; j < H; ++j) dh_prev[j] += du[j];
    for (std::size_t k = 0; k < input_dim_; ++k) dx[k] += du[H + k];
  }

  nn::ParameterList<T> parameters() {
    nn::ParameterList<T> out;
    for (auto& layer : layers_) {
      out.push_back(&layer.weight);
      out.push_back(&layer.bias);
    }
    return out;
  }

 private:
  CellKind kind_ = CellKind::SRN;
  std::size_t input_dim_ = 0;
  std::size_t hidden_dim_ = 0;
  std::vector<nn::Linear<T>> layers_;
};

}  // namespace qform::rnn
