#include "qform/rnn/seq2seq.hpp"

#include <algorithm>

#include "qform/error.hpp"

namespace qform::rnn {

std::string to_string(CellKind kind) {
  switch (kind) {
    case CellKind::SRN: return "SRN";
    case CellKind::GRU: return "GRU";
    case CellKind::LSTM: return "LSTM";
  }
  return "?";
}

CellKind parse_cell_kind(std::string_view text) {
  if (text == "SRN" || text == "srn") return CellKind::SRN;
  if (text == "GRU" || text == "gru") return CellKind::GRU;
  if (text == "LSTM" || text == "lstm") return CellKind::LSTM;
  throw InvalidArgument("unknown cell type: " + std::string(text));
}

std::string to_string(LossReduction reduction) {
  return reduction == LossReduction::Mean ? "mean" : "sum";
}

LossReduction parse_loss_reduction(std::string_view text) {
  if (text == "mean") return LossReduction::Mean;
  if (text == "sum") return LossReduction::Sum;
  throw InvalidArgument("unknown loss reduction: " + std::string(text));
}

double ModelConfig::lr() const {
  if (learning_rate) return *learning_rate;
  return cell == CellKind::SRN ? 0.001 : 0.01;
}

std::string ModelConfig::architecture() const {
  return to_string(cell) + (attention ? "+attn" : "");
}

// ---------------------------------------------------------------------------
// Attention

template <typename T>
AttentionResult<T> Attention<T>::attend(
    std::span<const T> query, std::span<const std::vector<T>> states) const {
  const std::size_t n = states.size();
  if (n == 0) throw InvalidArgument("attention over an empty input");
  if (n > max_input_len()) {
    throw InvalidArgument("input of length " + std::to_string(n) +
                          " exceeds max_input_len " +
                          std::to_string(max_input_len()));
  }
  const auto raw = scores.forward(query);
  AttentionResult<T> result;
  result.weights = nn::softmax<T>(std::span<const T>(raw).first(n));
  result.context.assign(states[0].size(), T(0));
  for (std::size_t k = 0; k < n; ++k) {
    const T a = result.weights[k];
    for (std::size_t j = 0; j < result.context.size(); ++j) {
      result.context[j] += a * states[k][j];
    }
  }
  return result;
}

template <typename T>
void Attention<T>::backward(std::span<const T> query,
                            std::span<const std::vector<T>> states,
                            const AttentionResult<T>& result,
                            std::span<const T> dcontext, std::span<T> dquery,
                            std::span<std::vector<T>> dstates) {
  const std::size_t n = states.size();
  std::vector<T> dweights(n, T(0));
  for (std::size_t k = 0; k < n; ++k) {
    const T a = result.weights[k];
    T dot = 0;
    for (std::size_t j = 0; j < dcontext.size(); ++j) {
      dot += dcontext[j] * states[k][j];
      dstates[k][j] += a * dcontext[j];
    }
    dweights[k] = dot;
  }
  const auto dmasked = nn::softmax_backward<T>(result.weights, dweights);
  std::vector<T> dscores(max_input_len(), T(0));
  std::copy(dmasked.begin(), dmasked.end(), dscores.begin());
  scores.backward(query, dscores, dquery);
}

// ---------------------------------------------------------------------------
// Seq2Seq

template <typename T>
struct Seq2Seq<T>::Trace {
  struct EncoderStep {
    std::vector<T> mask;
    StepCache<T> cell;
  };
  struct DecoderStep {
    std::size_t input_id = 0;
    std::size_t target = 0;
    std::vector<T> mask;
    std::vector<T> query;
    AttentionResult<T> attention;
    StepCache<T> cell;
    std::vector<T> log_probs;
  };
  std::vector<std::size_t> input;
  std::vector<EncoderStep> encoder;
  EncoderStates<T> states;
  std::vector<DecoderStep> decoder;
};

template <typename T>
Seq2Seq<T>::Seq2Seq(const ModelConfig& config, std::size_t vocab_size,
                    std::vector<std::size_t> stop_ids)
    : encoder_embedding("encoder.embedding", vocab_size, config.embedding_dim),
      decoder_embedding("decoder.embedding", vocab_size + 1, config.embedding_dim),
      encoder("encoder.cell", config.cell, config.embedding_dim, config.hidden_dim),
      decoder("decoder.cell", config.cell,
              config.embedding_dim + (config.attention ? config.hidden_dim : 0),
              config.hidden_dim),
      output("decoder.out", config.hidden_dim, vocab_size),
      config_(config),
      vocab_size_(vocab_size),
      stop_ids_(std::move(stop_ids)) {
  if (vocab_size == 0) throw InvalidArgument("empty vocabulary");
  if (!(config.dropout_p >= 0.0 && config.dropout_p < 1.0)) {
    throw InvalidArgument("dropout_p must be in [0, 1)");
  }
  if (config.attention) {
    attention = Attention<T>("decoder.attention", config.hidden_dim,
                             config.embedding_dim, config.max_input_len);
  }
}

template <typename T>
void Seq2Seq<T>::init(Rng& rng) {
  encoder_embedding.init(rng);
  decoder_embedding.init(rng);
  encoder.init(rng);
  decoder.init(rng);
  if (config_.attention) attention.scores.init(rng);
  output.init(rng);
}

template <typename T>
nn::ParameterList<T> Seq2Seq<T>::parameters() {
  nn::ParameterList<T> out = encoder_embedding.parameters();
  for (auto* p : decoder_embedding.parameters()) out.push_back(p);
  for (auto* p : encoder.parameters()) out.push_back(p);
  for (auto* p : decoder.parameters()) out.push_back(p);
  if (config_.attention) {
    for (auto* p : attention.scores.parameters()) out.push_back(p);
  }
  for (auto* p : output.parameters()) out.push_back(p);
  return out;
}

template <typename T>
bool Seq2Seq<T>::is_stop(std::size_t id) const {
  return std::find(stop_ids_.begin(), stop_ids_.end(), id) != stop_ids_.end();
}

template <typename T>
std::vector<T> Seq2Seq<T>::embed(const nn::Embedding<T>& table, std::size_t id,
                                 bool training, Rng& rng,
                                 std::vector<T>* mask) const {
  auto v = table.lookup(id);
  if (training && config_.dropout_p > 0.0) {
    auto m = nn::dropout_mask<T>(v.size(), config_.dropout_p, rng);
    for (std::size_t j = 0; j < v.size(); ++j) v[j] *= m[j];
    if (mask) *mask = std::move(m);
  }
  return v;
}

template <typename T>
EncoderStates<T> Seq2Seq<T>::run_encoder(std::span<const std::size_t> input,
                                         bool training, Rng& rng,
                                         Trace* trace) const {
  if (input.empty()) throw InvalidArgument("empty input sequence");
  if (input.size() > config_.max_input_len) {
    throw InvalidArgument("input of length " + std::to_string(input.size()) +
                          " exceeds max_input_len " +
                          std::to_string(config_.max_input_len));
  }
  for (auto id : input) {
    if (id >= vocab_size_) throw UnknownTokenError("input id out of vocabulary");
  }
  EncoderStates<T> out;
  CellState<T> state = encoder.zero_state();
  out.states.reserve(input.size() + 1);
  out.states.push_back(state.h);
  for (auto id : input) {
    std::vector<T> mask;
    const auto x = embed(encoder_embedding, id, training, rng, &mask);
    auto cache = encoder.step(state, x);
    state = cache.out;
    out.states.push_back(state.h);
    if (trace) trace->encoder.push_back({std::move(mask), std::move(cache)});
  }
  out.final_cell = state.c;
  return out;
}

template <typename T>
EncoderStates<T> Seq2Seq<T>::encode(std::span<const std::size_t> input,
                                    bool training, Rng& rng) const {
  return run_encoder(input, training, rng, nullptr);
}

template <typename T>
std::vector<std::size_t> Seq2Seq<T>::decode_greedy(const EncoderStates<T>& states,
                                                   std::size_t max_len) const {
  std::vector<std::size_t> out;
  CellState<T> state{states.encoding(), states.final_cell};
  const std::span<const std::vector<T>> memory =
      std::span<const std::vector<T>>(states.states).subspan(1);
  std::size_t prev = sos_id();
  while (out.size() < max_len) {
    auto x = decoder_embedding.lookup(prev);
    if (config_.attention) {
      const auto query = nn::concat<T>(state.h, x);
      const auto attended = attention.attend(query, memory);
      x = nn::concat<T>(x, attended.context);
    }
    state = decoder.step(state, x).out;
    const auto logits = output.forward(state.h);
    const std::size_t id = nn::argmax<T>(logits);
    out.push_back(id);
    if (is_stop(id)) break;
    prev = id;
  }
  return out;
}

template <typename T>
std::vector<std::size_t> Seq2Seq<T>::predict(
    std::span<const std::size_t> input) const {
  Rng unused(0);
  return decode_greedy(encode(input, false, unused), config_.max_decode_len);
}

template <typename T>
T Seq2Seq<T>::run(std::span<const std::size_t> input,
                  std::span<const std::size_t> target, bool training, Rng& rng,
                  Trace* trace) const {
  if (target.empty()) throw InvalidArgument("empty target sequence");
  for (auto id : target) {
    if (id >= vocab_size_) throw UnknownTokenError("target id out of vocabulary");
  }
  auto states = run_encoder(input, training, rng, trace);
  // Teacher forcing is decided once per sequence.
  const bool forcing = !training || rng.bernoulli(config_.teacher_forcing_ratio);

  const std::span<const std::vector<T>> memory =
      std::span<const std::vector<T>>(states.states).subspan(1);
  CellState<T> state{states.encoding(), states.final_cell};
  std::size_t prev = sos_id();
  T total = 0;
  for (std::size_t t = 0; t < target.size(); ++t) {
    typename Trace::DecoderStep step;
    step.input_id = prev;
    step.target = target[t];
    auto x = embed(decoder_embedding, prev, training, rng, &step.mask);
    if (config_.attention) {
      step.query = nn::concat<T>(state.h, x);
      step.attention = attention.attend(step.query, memory);
      x = nn::concat<T>(x, step.attention.context);
    }
    step.cell = decoder.step(state, x);
    state = step.cell.out;
    const auto logits = output.forward(state.h);
    step.log_probs = nn::log_softmax<T>(logits);
    total += nn::nll_loss<T>(step.log_probs, target[t]);
    prev = forcing ? target[t] : nn::argmax<T>(step.log_probs);
    if (trace) trace->decoder.push_back(std::move(step));
  }
  if (trace) {
    trace->input.assign(input.begin(), input.end());
    trace->states = std::move(states);
  }
  return total / static_cast<T>(target.size());
}

template <typename T>
T Seq2Seq<T>::loss(std::span<const std::size_t> input,
                   std::span<const std::size_t> target, bool training,
                   Rng& rng) const {
  return run(input, target, training, rng, nullptr);
}

template <typename T>
T Seq2Seq<T>::train_example(std::span<const std::size_t> input,
                            std::span<const std::size_t> target, bool training,
                            Rng& rng, T token_scale) {
  Trace trace;
  const T mean_loss = run(input, target, training, rng, &trace);
  backprop(trace, token_scale);
  return mean_loss;
}

template <typename T>
void Seq2Seq<T>::backprop(const Trace& trace, T token_scale) {
  const std::size_t H = config_.hidden_dim;
  const std::size_t E = config_.embedding_dim;
  const std::size_t n = trace.input.size();
  const std::span<const std::vector<T>> memory =
      std::span<const std::vector<T>>(trace.states.states).subspan(1);

  std::vector<std::vector<T>> dstates(n + 1, std::vector<T>(H, T(0)));
  std::vector<T> dh(H, T(0)), dc(H, T(0)), dh_prev(H), dc_prev(H);
  std::vector<T> dx(decoder.input_dim());

  for (std::size_t t = trace.decoder.size(); t-- > 0;) {
    const auto& step = trace.decoder[t];
    const auto dlogits =
        nn::nll_logits_backward<T>(step.log_probs, step.target, token_scale);
    output.backward(step.cell.out.h, dlogits, dh);
    decoder.backward(step.cell, dh, dc, dh_prev, dc_prev, dx);
    std::vector<T> demb(dx.begin(), dx.begin() + static_cast<std::ptrdiff_t>(E));
    if (config_.attention) {
      std::vector<T> dquery(H + E, T(0));
      attention.backward(step.query, memory, step.attention,
                         std::span<const T>(dx).subspan(E), dquery,
                         std::span<std::vector<T>>(dstates).subspan(1));
      for (std::size_t j = 0; j < H; ++j) dh_prev[j] += dquery[j];
      for (std::size_t j = 0; j < E; ++j) demb[j] += dquery[H + j];
    }
    if (!step.mask.empty()) {
      for (std::size_t j = 0; j < E; ++j) demb[j] *= step.mask[j];
    }
    decoder_embedding.backward(step.input_id, demb);
    std::swap(dh, dh_prev);
    std::swap(dc, dc_prev);
  }

  // The decoder started from the final encoder state.
  nn::add_to<T>(dstates[n], dh);
  std::vector<T> carry_h(H, T(0));
  std::vector<T> carry_c = dc;
  std::vector<T> dxe(encoder.input_dim());
  for (std::size_t k = n; k >= 1; --k) {
    const auto& step = trace.encoder[k - 1];
    nn::add_to<T>(carry_h, dstates[k]);
    encoder.backward(step.cell, carry_h, carry_c, dh_prev, dc_prev, dxe);
    if (!step.mask.empty()) {
      for (std::size_t j = 0; j < E; ++j) dxe[j] *= step.mask[j];
    }
    encoder_embedding.backward(trace.input[k - 1], dxe);
    std::swap(carry_h, dh_prev);
    std::swap(carry_c, dc_prev);
  }
}

template class Attention<float>;
template class Attention<double>;
template class Seq2Seq<float>;
template class Seq2Seq<double>;

}  // namespace qform::rnn
