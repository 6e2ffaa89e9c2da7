#include "qform/rnn/train.hpp"

#include <cmath>
#include <string>

#include "qform/error.hpp"
#include "qform/nn/layers.hpp"

namespace qform::rnn {

std::vector<EncodedExample> encode_examples(const std::vector<Example>& examples,
                                            const Vocabulary& vocab) {
  std::vector<EncodedExample> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) {
    out.push_back({vocab.encode(ex.input), vocab.encode(ex.target)});
  }
  return out;
}

std::vector<std::size_t> task_token_ids(const Vocabulary& vocab) {
  std::vector<std::size_t> ids;
  for (Task task : {Task::Ident, Task::Quest}) {
    if (auto id = vocab.find(std::string(to_string(task)))) ids.push_back(*id);
  }
  return ids;
}

TrainedModel train_run(const ModelConfig& config,
                       const std::vector<EncodedExample>& train,
                       std::size_t vocab_size, std::vector<std::size_t> stop_ids,
                       Rng& rng, const ProgressFn& progress) {
  if (config.batches > 0 && train.empty()) {
    throw InvalidArgument("training set is empty");
  }
  if (config.batch_size == 0) throw InvalidArgument("batch_size must be positive");

  // Separate streams so initialization does not shift with data order.
  Rng init_rng = rng.split(1);
  Rng sample_rng = rng.split(2);
  Rng noise_rng = rng.split(3);

  TrainedModel run{Seq2Seq<float>(config, vocab_size, std::move(stop_ids)), {}};
  run.model.init(init_rng);
  const auto params = run.model.parameters();
  run.loss_trace.reserve(config.batches);

  const double lr = config.lr();
  const float per_example = 1.0f / static_cast<float>(config.batch_size);
  for (std::size_t b = 0; b < config.batches; ++b) {
    double batch_loss = 0.0;
    for (std::size_t k = 0; k < config.batch_size; ++k) {
      const auto& ex = train[sample_rng.uniform_index(train.size())];
      float scale = per_example;
      if (config.loss_reduction == LossReduction::Mean) {
        scale /= static_cast<float>(ex.target.size());
      }
      try {
        batch_loss += run.model.train_example(ex.input, ex.target, true, noise_rng, scale);
      } catch (const NumericError& e) {
        throw NumericError("training diverged at batch " + std::to_string(b + 1) + ": " +
                           e.what());
      }
    }
    batch_loss /= static_cast<double>(config.batch_size);
    if (!std::isfinite(batch_loss)) {
      throw NumericError("training diverged at batch " + std::to_string(b + 1));
    }
    nn::sgd_step(params, lr);
    run.loss_trace.push_back(batch_loss);
    if (progress) progress(b + 1, batch_loss);
  }
  return run;
}

}  // namespace qform::rnn
