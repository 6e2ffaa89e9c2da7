#include "qform/dataset.hpp"

#include <iomanip>
#include <sstream>
#include <unordered_set>

#include "qform/error.hpp"
#include "qform/grammar_parse.hpp"

namespace qform {

Example make_example(const SentenceAnnotation& annotation, Task task) {
  Example ex;
  ex.annotation = annotation;
  ex.task = task;
  ex.input = annotation.tokens;
  ex.input.emplace_back(to_string(task));
  ex.target = apply_task(task, annotation);
  ex.target.emplace_back(to_string(task));
  return ex;
}

bool is_withheld(const SentenceAnnotation& annotation, Task task) {
  return task == Task::Quest && annotation.sentence_type.subject == Modifier::RC;
}

DatasetSplits build_splits(const Grammar& grammar, const SplitSizes& sizes,
                           Rng& rng, std::size_t draw_budget) {
  if (draw_budget == 0) draw_budget = 50 * sizes.total() + 10000;
  DatasetSplits splits;
  splits.seed = rng.seed();
  splits.grammar_id = grammar.id();
  splits.train.reserve(sizes.train);
  splits.test.reserve(sizes.test);
  splits.generalization.reserve(sizes.generalization);

  std::unordered_set<std::string> seen;
  auto train_test_full = [&] {
    return splits.train.size() >= sizes.train && splits.test.size() >= sizes.test;
  };
  auto gen_full = [&] {
    return splits.generalization.size() >= sizes.generalization;
  };

  while (!train_test_full() || !gen_full()) {
    if (splits.draws >= draw_budget) {
      std::ostringstream msg;
      msg << "draw budget " << draw_budget << " exhausted with train "
          << splits.train.size() << "/" << sizes.train << ", test "
          << splits.test.size() << "/" << sizes.test << ", generalization "
          << splits.generalization.size() << "/" << sizes.generalization;
      throw ExhaustionError(msg.str());
    }
    ++splits.draws;
    const SentenceAnnotation ann = annotate(grammar, sample_tree(grammar, rng));
    std::string key = join_tokens(ann.tokens);
    if (seen.count(key)) continue;
    const Task task = rng.bernoulli(0.5) ? Task::Quest : Task::Ident;

    if (ann.sentence_type.subject == Modifier::RC &&
        (task == Task::Quest || train_test_full())) {
      // Withheld candidates feed the generalization split; once train and
      // test are full, fresh subject-RC draws go there as questions too.
      if (!gen_full()) {
        seen.insert(std::move(key));
        splits.generalization.push_back(make_example(ann, Task::Quest));
      }
      continue;
    }
    if (train_test_full()) continue;

    seen.insert(std::move(key));
    const std::size_t train_left = sizes.train - splits.train.size();
    const std::size_t test_left = sizes.test - splits.test.size();
    const bool to_test = rng.uniform_index(train_left + test_left) < test_left;
    (to_test ? splits.test : splits.train).push_back(make_example(ann, task));
  }
  return splits;
}

Vocabulary build_vocabulary(const DatasetSplits& splits, const Lexicon& lexicon) {
  Vocabulary vocab;
  for (const auto* split : {&splits.train, &splits.test, &splits.generalization}) {
    for (const auto& ex : *split) {
      for (const auto& t : ex.input) vocab.add(t);
      for (const auto& t : ex.target) vocab.add(t);
    }
  }
  for (const auto& w : lexicon.words()) vocab.add(w);
  return vocab;
}

std::string format_example_line(const Example& example) {
  return join_tokens(example.input) + '\t' + join_tokens(example.target);
}

void write_split(std::ostream& out, const std::vector<Example>& split) {
  for (const auto& ex : split) out << format_example_line(ex) << '\n';
}

std::vector<TokenPair> read_pairs(std::istream& in) {
  std::vector<TokenPair> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(line_no, "missing tab");
    if (line.find('\t', tab + 1) != std::string::npos) {
      throw ParseError(line_no, "more than one tab");
    }
    TokenPair pair{split_tokens(std::string_view(line).substr(0, tab)),
                   split_tokens(std::string_view(line).substr(tab + 1))};
    if (pair.input.empty() || pair.target.empty()) {
      throw ParseError(line_no, "empty input or target");
    }
    out.push_back(std::move(pair));
  }
  return out;
}

std::vector<Example> load_split(std::istream& in, const Grammar& grammar) {
  std::vector<Example> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream one(line);
    std::vector<TokenPair> pair;
    try {
      pair = read_pairs(one);
    } catch (const ParseError& e) {
      throw ParseError(line_no, e.what());
    }
    const TokenPair& p = pair.front();
    const auto task = parse_task(p.input.back());
    if (!task) throw ParseError(line_no, "input does not end in a task token");
    const Tokens declarative(p.input.begin(), p.input.end() - 1);
    Example ex;
    try {
      ex = make_example(annotate(grammar, parse_sentence(grammar, declarative)),
                        *task);
    } catch (const Error& e) {
      throw ParseError(line_no, e.what());
    }
    if (ex.target != p.target) {
      throw ParseError(line_no, "target disagrees with the " +
                                    std::string(to_string(*task)) + " oracle");
    }
    out.push_back(std::move(ex));
  }
  return out;
}

FrequencyTable frequency_report(const std::vector<Example>& split) {
  FrequencyTable table;
  for (const auto& ex : split) {
    const std::size_t row = sentence_type_row(ex.annotation.sentence_type);
    ++table.count[row][ex.task == Task::Ident ? 0 : 1];
  }
  table.total = split.size();
  if (table.total == 0) return table;
  for (std::size_t r = 0; r < kSentenceTypeCount; ++r) {
    for (std::size_t c = 0; c < 2; ++c) {
      table.fraction[r][c] =
          static_cast<double>(table.count[r][c]) / static_cast<double>(table.total);
    }
  }
  return table;
}

std::string format_frequency_table(const FrequencyTable& table) {
  std::ostringstream out;
  out << "row,sentence_type,identity,question\n";
  out << std::fixed << std::setprecision(4);
  for (std::size_t r = 0; r < kSentenceTypeCount; ++r) {
    out << r << ',' << sentence_type_label(sentence_type_from_row(r)) << ','
        << table.fraction[r][0] << ',' << table.fraction[r][1] << '\n';
  }
  return out.str();
}

}  // namespace qform
