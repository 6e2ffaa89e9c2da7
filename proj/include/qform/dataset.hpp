#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "qform/grammar.hpp"
#include "qform/rng.hpp"
#include "qform/transform.hpp"
#include "qform/vocab.hpp"

namespace qform {

struct Example {
  Tokens input;   // declarative ++ [task]
  Tokens target;  // oracle(task)(declarative) ++ [task]
  SentenceAnnotation annotation;
  Task task = Task::Ident;
};

Example make_example(const SentenceAnnotation& annotation, Task task);

/// Question formation on a sentence whose subject carries a relative clause:
/// the case kept out of training and test.
bool is_withheld(const SentenceAnnotation& annotation, Task task);

struct SplitSizes {
  std::size_t train = 120000;
  std::size_t test = 10000;
  std::size_t generalization = 10000;

  std::size_t total() const { return train + test + generalization; }
};

struct DatasetSplits {
  std::vector<Example> train;
  std::vector<Example> test;
  std::vector<Example> generalization;
  std::uint64_t seed = 0;
  std::string grammar_id;
  std::size_t draws = 0;
};

/// Rejection-samples unique declaratives and routes them into the three
/// splits. `draw_budget == 0` picks 50 draws per requested example.
/// Throws ExhaustionError when the budget runs out.
DatasetSplits build_splits(const Grammar& grammar, const SplitSizes& sizes,
                           Rng& rng, std::size_t draw_budget = 0);

/// First-occurrence ids over the splits (train, test, generalization; input
/// before target), followed by any grammar word never seen.
Vocabulary build_vocabulary(const DatasetSplits& splits, const Lexicon& lexicon);

// Serialization: one example per line, "input<TAB>target", tokens separated
// by single spaces.

std::string format_example_line(const Example& example);
void write_split(std::ostream& out, const std::vector<Example>& split);

struct TokenPair {
  Tokens input;
  Tokens target;
  bool operator==(const TokenPair& other) const = default;
};

/// Reads the raw pairs. Throws ParseError carrying the 1-based line number.
std::vector<TokenPair> read_pairs(std::istream& in);

/// Reads a split and re-derives each annotation by parsing the declarative.
/// Lines whose target disagrees with the task oracle are rejected.
std::vector<Example> load_split(std::istream& in, const Grammar& grammar);

/// Fraction of a split in each (sentence type, task) cell.
struct FrequencyTable {
  std::array<std::array<double, 2>, kSentenceTypeCount> fraction{};
  std::array<std::array<std::size_t, 2>, kSentenceTypeCount> count{};
  std::size_t total = 0;

  double at(std::size_t row, Task task) const {
    return fraction[row][task == Task::Ident ? 0 : 1];
  }
};

FrequencyTable frequency_report(const std::vector<Example>& split);

/// CSV: row,label,identity,question
std::string format_frequency_table(const FrequencyTable& table);

}  // namespace qform
