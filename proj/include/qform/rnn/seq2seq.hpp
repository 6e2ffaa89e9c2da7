#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qform/nn/layers.hpp"
#include "qform/rng.hpp"
#include "qform/rnn/cells.hpp"

namespace qform::rnn {

/// How per-token losses are combined before differentiation. The reported
/// loss is always the per-token mean.
enum class LossReduction { Mean, Sum };

std::string to_string(LossReduction reduction);
LossReduction parse_loss_reduction(std::string_view text);

struct ModelConfig {
  CellKind cell = CellKind::GRU;
  bool attention = false;
  std::size_t hidden_dim = 256;
  std::size_t embedding_dim = 256;
  double dropout_p = 0.1;
  std::optional<double> learning_rate;  // unset: keyed to the cell type
  std::size_t batches = 30000;
  std::size_t batch_size = 5;
  double teacher_forcing_ratio = 0.5;
  std::size_t max_input_len = 20;
  std::size_t max_decode_len = 25;
  std::uint64_t seed = 1;
  LossReduction loss_reduction = LossReduction::Sum;

  /// 0.001 for SRNs, 0.01 for gated cells, unless overridden.
  double lr() const;
  /// Short architecture name, e.g. "GRU+attn".
  std::string architecture() const;
};

/// E_0..E_n from the encoder, plus the final LSTM cell state.
template <typename T>
struct EncoderStates {
  std::vector<std::vector<T>> states;
  std::vector<T> final_cell;

  const std::vector<T>& encoding() const { return states.back(); }
  std::size_t input_length() const { return states.size() - 1; }
};

template <typename T>
struct AttentionResult {
  std::vector<T> weights;  // one per true input position
  std::vector<T> context;  // A = sum_k weights[k] * E_k
};

/// Scores [D_prev, w_prev] against max_input_len slots, masks the slots past
/// the input, and normalizes with a softmax.
template <typename T>
class Attention {
 public:
  Attention() = default;
  Attention(const std::string& name, std::size_t hidden_dim,
            std::size_t embedding_dim, std::size_t max_input_len)
      : scores(name, hidden_dim + embedding_dim, max_input_len) {}

  std::size_t max_input_len() const { return scores.out_dim(); }

  /// `states` are E_1..E_n.
  AttentionResult<T> attend(std::span<const T> query,
                            std::span<const std::vector<T>> states) const;

  /// `query` is [D_prev, w_prev]; dquery and dstates (indexed like `states`)
  /// are accumulated into.
  void backward(std::span<const T> query,
                std::span<const std::vector<T>> states,
                const AttentionResult<T>& result, std::span<const T> dcontext,
                std::span<T> dquery, std::span<std::vector<T>> dstates);

  nn::Linear<T> scores;
};

template <typename T>
class Seq2Seq {
 public:
  /// `stop_ids` are the end-of-sequence tokens (the task tokens). The decoder
  /// embedding gets one extra row, id `vocab_size`, for start-of-sequence.
  Seq2Seq(const ModelConfig& config, std::size_t vocab_size,
          std::vector<std::size_t> stop_ids);

  const ModelConfig& config() const { return config_; }
  std::size_t vocab_size() const { return vocab_size_; }
  std::size_t sos_id() const { return vocab_size_; }
  const std::vector<std::size_t>& stop_ids() const { return stop_ids_; }

  void init(Rng& rng);

  EncoderStates<T> encode(std::span<const std::size_t> input, bool training,
                          Rng& rng) const;

  /// Greedy decoding with dropout off. Stops after emitting a stop token or
  /// after max_len tokens.
  std::vector<std::size_t> decode_greedy(const EncoderStates<T>& states,
                                         std::size_t max_len) const;

  std::vector<std::size_t> predict(std::span<const std::size_t> input) const;

  /// Mean per-token NLL of `target` with no gradient bookkeeping. Consumes
  /// random numbers exactly as train_example does.
  T loss(std::span<const std::size_t> input, std::span<const std::size_t> target,
         bool training, Rng& rng) const;

  /// Forward and backward pass for one example. Every token's gradient is
  /// multiplied by `token_scale`. Returns the mean per-token NLL.
  T train_example(std::span<const std::size_t> input,
                  std::span<const std::size_t> target, bool training, Rng& rng,
                  T token_scale);

  nn::ParameterList<T> parameters();

  nn::Embedding<T> encoder_embedding;
  nn::Embedding<T> decoder_embedding;
  RecurrentCell<T> encoder;
  RecurrentCell<T> decoder;
  Attention<T> attention;  // unused without attention
  nn::Linear<T> output;

 private:
  struct Trace;
  EncoderStates<T> run_encoder(std::span<const std::size_t> input,
                               bool training, Rng& rng, Trace* trace) const;
  T run(std::span<const std::size_t> input, std::span<const std::size_t> target,
        bool training, Rng& rng, Trace* trace) const;
  void backprop(const Trace& trace, T token_scale);
  std::vector<T> embed(const nn::Embedding<T>& table, std::size_t id,
                       bool training, Rng& rng, std::vector<T>* mask) const;
  bool is_stop(std::size_t id) const;

  ModelConfig config_;
  std::size_t vocab_size_;
  std::vector<std::size_t> stop_ids_;
};

extern template class Attention<float>;
extern template class Attention<double>;
extern template class Seq2Seq<float>;
extern template class Seq2Seq<double>;

}  // namespace qform::rnn
