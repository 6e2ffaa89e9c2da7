#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "qform/dataset.hpp"
#include "qform/grammar.hpp"

namespace qform::analysis {

/// Which input auxiliary was placed at the front. Positions refer to
/// aux_indices[0] and aux_indices[1].
enum class Preposed { First, Second, Other };
enum class Deleted { First, Second, None };

std::string to_string(Preposed p);
std::string to_string(Deleted d);

struct ErrorCategory {
  bool categorized = false;
  Preposed preposed = Preposed::Other;
  Deleted deleted = Deleted::None;
  /// The preposed word and the deleted token position behind the category.
  std::string preposed_word;
  std::optional<std::size_t> deleted_index;
  /// Matched only by deleting a third auxiliary; left uncategorized.
  bool third_aux_deleted = false;

  std::string label() const;
};

/// `[preposed] ++ (tokens without deleted_index)` with "." turned into "?".
Tokens construct_question(const Tokens& declarative, const std::string& preposed,
                          std::optional<std::size_t> deleted_index);

/// Tries every auxiliary word p of the lexicon and every deletion d in the
/// order none, aux_indices[0], aux_indices[1], ...; the first (d, p) whose
/// construction equals `output` wins. A trailing task token on `output` is
/// ignored. When p is the deleted word itself, it is credited to the deleted
/// position (the movement reading); otherwise it is the first auxiliary if it
/// equals that word, else the second, else other.
ErrorCategory categorize(const SentenceAnnotation& annotation, const Tokens& output,
                         const Lexicon& lexicon);

/// Rows: deleted (first, second, none); columns: preposed (first, second,
/// other). Percentages are over all outputs, uncategorized included.
struct TaxonomyTable {
  std::array<std::array<std::size_t, 3>, 3> counts{};
  std::size_t uncategorized = 0;
  std::size_t third_aux_deleted = 0;  // subset of uncategorized
  std::size_t total = 0;

  void add(const ErrorCategory& category);
  double percent(Deleted d, Preposed p) const;
  double uncategorized_percent() const;
  double categorized_percent() const;
};

TaxonomyTable taxonomy_table(const std::vector<Example>& generalization,
                             const std::vector<Tokens>& outputs,
                             const Lexicon& lexicon);

/// Per-example audit log as TSV: input, output, category.
std::string format_audit_log(const std::vector<Example>& generalization,
                             const std::vector<Tokens>& outputs,
                             const Lexicon& lexicon);

/// CSV rows "language,config,seed,cell,percent" for the nine cells, the
/// uncategorized mass and the third-auxiliary count.
std::string format_taxonomy_rows(const std::string& language,
                                 const std::string& config, std::uint64_t seed,
                                 const TaxonomyTable& table);

}  // namespace qform::analysis
