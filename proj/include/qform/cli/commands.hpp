#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "qform/cli/config.hpp"
#include "qform/dataset.hpp"
#include "qform/grammar.hpp"
#include "qform/rnn/seq2seq.hpp"
#include "qform/vocab.hpp"

namespace qform::cli {

// Output layout under config.output:
//   data/<language>/{train,test,generalization}.tsv, vocab.tsv, manifest.json
//   runs/<language>/<architecture>/seed-<n>/{checkpoint.bin,loss.csv,manifest.json}
//   reports/*.csv, reports/audit/..., reports/report.txt

std::filesystem::path data_dir(const ExperimentConfig& config, Language language);
std::filesystem::path run_dir(const ExperimentConfig& config, Language language,
                              const Architecture& arch, std::uint64_t seed);
std::filesystem::path reports_dir(const ExperimentConfig& config);

Grammar make_grammar(Language language, bool object_rc_transitive);

struct LoadedData {
  Grammar grammar;
  Vocabulary vocab;
  std::vector<Example> train;
  std::vector<Example> test;
  std::vector<Example> generalization;
};

/// Reads a generated dataset back; annotations are re-derived by parsing.
LoadedData load_data(const ExperimentConfig& config, Language language,
                     bool with_train = true);

/// Loads a trained model from its run directory.
rnn::Seq2Seq<float> load_model(const std::filesystem::path& dir, const Vocabulary& vocab);

struct CommandOptions {
  bool resume = false;
  std::ostream* log = nullptr;
};

void cmd_gen_data(const ExperimentConfig& config, const CommandOptions& options);
void cmd_train(const ExperimentConfig& config, const CommandOptions& options);
void cmd_eval(const ExperimentConfig& config, const CommandOptions& options);
void cmd_probe(const ExperimentConfig& config, const CommandOptions& options);
void cmd_analyze(const ExperimentConfig& config, const CommandOptions& options);
void cmd_report(const ExperimentConfig& config, const CommandOptions& options);

/// Worker count actually used: config.workers, or the hardware concurrency.
std::size_t effective_workers(const ExperimentConfig& config);

}  // namespace qform::cli
