#include "qform/probe.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

#include "qform/error.hpp"
#include "qform/nn/ops.hpp"

namespace qform::probe {

std::string to_string(LabelKind kind) {
  switch (kind) {
    case LabelKind::MainAux: return "main_aux";
    case LabelKind::FourthWord: return "fourth_word";
    case LabelKind::SubjectNoun: return "subject_noun";
  }
  return "?";
}

const std::string& LabeledEncoding::label(LabelKind kind) const {
  switch (kind) {
    case LabelKind::MainAux: return main_aux;
    case LabelKind::FourthWord: return fourth_word;
    case LabelKind::SubjectNoun: return subject_noun;
  }
  return main_aux;
}

LabeledEncoding label_encoding(std::vector<float> encoding,
                               const SentenceAnnotation& annotation) {
  return {std::move(encoding), annotation.main_aux(), annotation.fourth_word,
          annotation.subject_noun()};
}

std::vector<LabeledEncoding> collect_encodings(const rnn::Seq2Seq<float>& model,
                                               const Vocabulary& vocab,
                                               const std::vector<Example>& examples) {
  std::vector<LabeledEncoding> out;
  out.reserve(examples.size());
  Rng unused(0);
  for (const auto& ex : examples) {
    const auto states = model.encode(vocab.encode(ex.input), false, unused);
    out.push_back(label_encoding(states.encoding(), ex.annotation));
  }
  return out;
}

namespace {

struct Sample {
  std::span<const float> x;
  std::size_t y;
};

double mean_loss(const nn::Linear<float>& layer, const std::vector<Sample>& samples) {
  double total = 0;
  for (const auto& s : samples) {
    const auto logits = layer.forward(s.x);
    total += nn::nll_loss<float>(nn::log_softmax<float>(logits), s.y);
  }
  return samples.empty() ? 0.0 : total / static_cast<double>(samples.size());
}

double accuracy(const nn::Linear<float>& layer, const std::vector<Sample>& samples) {
  std::size_t hits = 0;
  for (const auto& s : samples) {
    hits += nn::argmax<float>(layer.forward(s.x)) == s.y;
  }
  return samples.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(samples.size());
}

void shuffle(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng.uniform_index(i)]);
  }
}

}  // namespace

ProbeResult train_probe(const std::vector<LabeledEncoding>& encodings,
                        LabelKind kind, Rng& rng, const ProbeOptions& options) {
  if (encodings.size() < options.min_examples) {
    throw InvalidArgument("probe needs at least " + std::to_string(options.min_examples) +
                          " encodings, got " + std::to_string(encodings.size()));
  }
  const std::size_t dim = encodings.front().encoding.size();
  std::map<std::string, std::size_t> index;
  for (const auto& e : encodings) {
    if (e.encoding.size() != dim) throw ShapeError("probe encodings differ in size");
    index.emplace(e.label(kind), 0);
  }
  if (index.size() < 2) {
    throw InvalidArgument("probe label " + to_string(kind) + " has a single class");
  }
  ProbeResult result;
  result.kind = kind;
  for (auto& [label, id] : index) {
    id = result.classes.size();
    result.classes.push_back(label);
  }
  result.chance = 1.0 / static_cast<double>(result.classes.size());

  std::vector<std::size_t> order(encodings.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  shuffle(order, rng);
  const std::size_t n = order.size();
  result.train_size = n * 75 / 100;
  result.dev_size = n * 5 / 100;
  result.test_size = n - result.train_size - result.dev_size;

  std::vector<Sample> train, dev, test;
  for (std::size_t k = 0; k < n; ++k) {
    const auto& e = encodings[order[k]];
    Sample s{e.encoding, index.at(e.label(kind))};
    if (k < result.train_size) {
      train.push_back(s);
    } else if (k < result.train_size + result.dev_size) {
      dev.push_back(s);
    } else {
      test.push_back(s);
    }
  }

  nn::Linear<float> layer("probe." + to_string(kind), dim, result.classes.size());
  layer.init(rng);
  const auto params = layer.parameters();
  nn::Linear<float> best = layer;
  double best_loss = mean_loss(layer, dev);
  std::size_t stale = 0;
  std::vector<std::size_t> batch_order(train.size());
  for (std::size_t i = 0; i < batch_order.size(); ++i) batch_order[i] = i;

  std::size_t epoch = 0;
  while (epoch < options.max_epochs && stale < options.patience) {
    ++epoch;
    shuffle(batch_order, rng);
    for (std::size_t start = 0; start < train.size(); start += options.batch_size) {
      const std::size_t stop = std::min(train.size(), start + options.batch_size);
      const float scale = 1.0f / static_cast<float>(stop - start);
      for (std::size_t k = start; k < stop; ++k) {
        const auto& s = train[batch_order[k]];
        const auto logp = nn::log_softmax<float>(layer.forward(s.x));
        const auto dlogits = nn::nll_logits_backward<float>(logp, s.y, scale);
        layer.backward(s.x, dlogits, {});
      }
      nn::sgd_step(params, options.learning_rate);
    }
    const double loss = mean_loss(layer, dev);
    if (loss < best_loss) {
      best_loss = loss;
      best = layer;
      stale = 0;
    } else {
      ++stale;
    }
  }
  result.classifier = best;
  result.best_dev_loss = best_loss;
  result.epochs = epoch;
  result.test_accuracy = accuracy(best, test);
  return result;
}

void write_encodings(std::ostream& out, const std::vector<LabeledEncoding>& encodings) {
  char buf[32];
  for (const auto& e : encodings) {
    out << e.main_aux << '\t' << e.fourth_word << '\t' << e.subject_noun << '\t';
    for (std::size_t j = 0; j < e.encoding.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(e.encoding[j]));
      if (j) out << ' ';
      out << buf;
    }
    out << '\n';
  }
}

std::vector<LabeledEncoding> read_encodings(std::istream& in) {
  std::vector<LabeledEncoding> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    LabeledEncoding e;
    std::string values;
    if (!std::getline(fields, e.main_aux, '\t') ||
        !std::getline(fields, e.fourth_word, '\t') ||
        !std::getline(fields, e.subject_noun, '\t') || !std::getline(fields, values)) {
      throw ParseError(line_no, "expected four tab-separated fields");
    }
    std::istringstream nums(values);
    float v;
    while (nums >> v) e.encoding.push_back(v);
    if (!nums.eof() || e.encoding.empty()) {
      throw ParseError(line_no, "malformed encoding vector");
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::string format_probe_row(const std::string& language, const std::string& config,
                             std::uint64_t seed, const ProbeResult& result) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%.6f,%.6f,%zu", result.test_accuracy, result.chance,
                result.n_classes());
  return language + "," + config + "," + std::to_string(seed) + "," +
         to_string(result.kind) + "," + buf + "\n";
}

}  // namespace qform::probe
