#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "qform/dataset.hpp"
#include "qform/eval.hpp"
#include "qform/probe.hpp"
#include "qform/rnn/seq2seq.hpp"

namespace qform::cli {

enum class Language { Agreement, NoAgreement };

std::string to_string(Language language);
Language parse_language(std::string_view text);

/// A trainable architecture or one of the oracle pseudo-models.
struct Architecture {
  std::string name;  // "GRU+attn", "SRN", "oracle-linear", ...
  rnn::CellKind cell = rnn::CellKind::GRU;
  bool attention = false;
  std::optional<eval::Oracle> oracle;

  bool trainable() const { return !oracle.has_value(); }
};

Architecture parse_architecture(std::string_view text);

/// "1,2,5-8" -> {1, 2, 5, 6, 7, 8}
std::vector<std::uint64_t> parse_seeds(std::string_view text);

struct ExperimentConfig {
  std::vector<Language> languages{Language::NoAgreement};
  std::vector<Architecture> architectures;
  std::vector<std::uint64_t> seeds{1};
  std::filesystem::path output = "qform-out";
  std::uint64_t data_seed = 1;
  bool object_rc_transitive = false;
  SplitSizes sizes;
  rnn::ModelConfig model;  // cell, attention and seed are set per run
  probe::ProbeOptions probe;
  std::size_t permutations = 10000;
  std::size_t workers = 0;  // 0: hardware concurrency

  /// Model config for one run.
  rnn::ModelConfig run_config(const Architecture& arch, std::uint64_t seed) const;
};

/// All six architectures, no oracles.
std::vector<Architecture> default_architectures();

/// INI text: sections [experiment], [data], [model], [probe], [eval].
/// Missing keys keep their defaults. Throws ParseError on unknown keys or
/// malformed values.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);

/// The effective configuration in the same INI format.
std::string format_config(const ExperimentConfig& config);

}  // namespace qform::cli
