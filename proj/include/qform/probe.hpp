#pragma once

#include <array>
#include <cstddef>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "qform/dataset.hpp"
#include "qform/nn/layers.hpp"
#include "qform/rng.hpp"
#include "qform/rnn/seq2seq.hpp"
#include "qform/vocab.hpp"

namespace qform::probe {

enum class LabelKind { MainAux, FourthWord, SubjectNoun };

inline constexpr std::array<LabelKind, 3> kLabelKinds = {
    LabelKind::MainAux, LabelKind::FourthWord, LabelKind::SubjectNoun};

std::string to_string(LabelKind kind);

struct LabeledEncoding {
  std::vector<float> encoding;
  std::string main_aux;
  std::string fourth_word;
  std::string subject_noun;

  const std::string& label(LabelKind kind) const;
  bool operator==(const LabeledEncoding& other) const = default;
};

LabeledEncoding label_encoding(std::vector<float> encoding,
                               const SentenceAnnotation& annotation);

/// Final encoder state of each example's input (dropout off), labelled from
/// its annotation.
std::vector<LabeledEncoding> collect_encodings(const rnn::Seq2Seq<float>& model,
                                               const Vocabulary& vocab,
                                               const std::vector<Example>& examples);

struct ProbeOptions {
  double learning_rate = 0.01;
  std::size_t batch_size = 32;
  std::size_t patience = 5;
  std::size_t max_epochs = 500;
  std::size_t min_examples = 100;
};

struct ProbeResult {
  LabelKind kind = LabelKind::MainAux;
  std::vector<std::string> classes;  // sorted; index = class id
  nn::Linear<float> classifier;
  double test_accuracy = 0;
  double chance = 0;
  double best_dev_loss = 0;
  std::size_t epochs = 0;
  std::size_t train_size = 0;
  std::size_t dev_size = 0;
  std::size_t test_size = 0;

  std::size_t n_classes() const { return classes.size(); }
};

/// Single linear layer trained with mini-batch SGD on cross-entropy over a
/// 75/5/20 train/dev/test split. Stops after `patience` epochs without a dev
/// loss improvement and keeps the best-dev parameters. Throws
/// InvalidArgument on too few encodings or fewer than two classes.
ProbeResult train_probe(const std::vector<LabeledEncoding>& encodings,
                        LabelKind kind, Rng& rng, const ProbeOptions& options = {});

/// One line per encoding: main_aux, fourth_word, subject_noun, then the
/// space-separated vector, all tab-separated.
void write_encodings(std::ostream& out, const std::vector<LabeledEncoding>& encodings);
std::vector<LabeledEncoding> read_encodings(std::istream& in);

/// Header for the probe CSV, and one row of it.
inline constexpr const char* kProbeCsvHeader =
    "language,config,seed,label_kind,accuracy,chance,n_classes\n";
std::string format_probe_row(const std::string& language, const std::string& config,
                             std::uint64_t seed, const ProbeResult& result);

}  // namespace qform::probe
