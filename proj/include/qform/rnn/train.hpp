#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "qform/dataset.hpp"
#include "qform/rng.hpp"
#include "qform/rnn/seq2seq.hpp"
#include "qform/vocab.hpp"

namespace qform::rnn {

struct EncodedExample {
  std::vector<std::size_t> input;
  std::vector<std::size_t> target;
};

std::vector<EncodedExample> encode_examples(const std::vector<Example>& examples,
                                            const Vocabulary& vocab);

/// Ids of the task tokens, which double as end-of-sequence markers.
std::vector<std::size_t> task_token_ids(const Vocabulary& vocab);

struct TrainedModel {
  Seq2Seq<float> model;
  std::vector<double> loss_trace;  // mean per-token loss of each batch
};

/// Called after every batch with the 1-based batch index and its loss.
using ProgressFn = std::function<void(std::size_t, double)>;

/// Initializes a model from `rng` and runs config.batches SGD steps, each on
/// config.batch_size examples drawn uniformly with replacement. Throws
/// NumericError if a batch loss is not finite.
TrainedModel train_run(const ModelConfig& config,
                       const std::vector<EncodedExample>& train,
                       std::size_t vocab_size, std::vector<std::size_t> stop_ids,
                       Rng& rng, const ProgressFn& progress = {});

}  // namespace qform::rnn
