#include "qform/analysis.hpp"

#include <cstdio>
#include <sstream>

#include "qform/error.hpp"
#include "qform/transform.hpp"

namespace qform::analysis {

std::string to_string(Preposed p) {
  switch (p) {
    case Preposed::First: return "prepose_first";
    case Preposed::Second: return "prepose_second";
    case Preposed::Other: return "prepose_other";
  }
  return "?";
}

std::string to_string(Deleted d) {
  switch (d) {
    case Deleted::First: return "delete_first";
    case Deleted::Second: return "delete_second";
    case Deleted::None: return "delete_none";
  }
  return "?";
}

std::string ErrorCategory::label() const {
  if (!categorized) return third_aux_deleted ? "uncategorized_third_deleted" : "uncategorized";
  return to_string(preposed) + "/" + to_string(deleted);
}

Tokens construct_question(const Tokens& declarative, const std::string& preposed,
                          std::optional<std::size_t> deleted_index) {
  Tokens out;
  out.reserve(declarative.size() + 1);
  out.push_back(preposed);
  for (std::size_t i = 0; i < declarative.size(); ++i) {
    if (deleted_index && *deleted_index == i) continue;
    out.push_back(declarative[i] == "." ? "?" : declarative[i]);
  }
  return out;
}

ErrorCategory categorize(const SentenceAnnotation& annotation, const Tokens& output,
                         const Lexicon& lexicon) {
  Tokens body = output;
  if (!body.empty()) {
    const LexEntry* last = lexicon.find(body.back());
    if (last && last->category == Category::Task) body.pop_back();
  }
  const auto& aux = annotation.aux_indices;
  const auto aux_words = lexicon.words_matching(Category::Aux, Number::None);

  std::vector<std::optional<std::size_t>> deletions{std::nullopt};
  for (std::size_t idx : aux) deletions.emplace_back(idx);

  ErrorCategory result;
  for (std::size_t k = 0; k < deletions.size(); ++k) {
    const auto d = deletions[k];
    // Cheap pre-check: the construction's length is fixed by d.
    const std::size_t length = annotation.tokens.size() + (d ? 0 : 1);
    if (body.size() != length) continue;
    for (const auto& p : aux_words) {
      if (construct_question(annotation.tokens, p, d) != body) continue;
      result.preposed_word = p;
      result.deleted_index = d;
      if (k >= 3) {
        result.third_aux_deleted = true;
        return result;
      }
      result.categorized = true;
      result.deleted = k == 0 ? Deleted::None : (k == 1 ? Deleted::First : Deleted::Second);
      if (d && annotation.tokens[*d] == p) {
        result.preposed = k == 1 ? Preposed::First : Preposed::Second;
      } else if (!aux.empty() && annotation.tokens[aux[0]] == p) {
        result.preposed = Preposed::First;
      } else if (aux.size() > 1 && annotation.tokens[aux[1]] == p) {
        result.preposed = Preposed::Second;
      } else {
        result.preposed = Preposed::Other;
      }
      return result;
    }
  }
  return result;
}

void TaxonomyTable::add(const ErrorCategory& category) {
  ++total;
  if (!category.categorized) {
    ++uncategorized;
    if (category.third_aux_deleted) ++third_aux_deleted;
    return;
  }
  ++counts[static_cast<std::size_t>(category.deleted)]
          [static_cast<std::size_t>(category.preposed)];
}

double TaxonomyTable::percent(Deleted d, Preposed p) const {
  if (total == 0) return 0.0;
  return 100.0 * static_cast<double>(counts[static_cast<std::size_t>(d)]
                                           [static_cast<std::size_t>(p)]) /
         static_cast<double>(total);
}

double TaxonomyTable::uncategorized_percent() const {
  return total == 0 ? 0.0 : 100.0 * static_cast<double>(uncategorized) / static_cast<double>(total);
}

double TaxonomyTable::categorized_percent() const {
  return total == 0 ? 0.0 : 100.0 - uncategorized_percent();
}

TaxonomyTable taxonomy_table(const std::vector<Example>& generalization,
                             const std::vector<Tokens>& outputs,
                             const Lexicon& lexicon) {
  if (generalization.size() != outputs.size()) {
    throw InvalidArgument("outputs and examples differ in length");
  }
  TaxonomyTable table;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    table.add(categorize(generalization[i].annotation, outputs[i], lexicon));
  }
  return table;
}

std::string format_audit_log(const std::vector<Example>& generalization,
                             const std::vector<Tokens>& outputs,
                             const Lexicon& lexicon) {
  std::ostringstream out;
  out << "input\toutput\tcategory\n";
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    const auto& a = generalization[i].annotation;
    out << join_tokens(a.tokens) << '\t' << join_tokens(outputs[i]) << '\t'
        << categorize(a, outputs[i], lexicon).label() << '\n';
  }
  return out.str();
}

std::string format_taxonomy_rows(const std::string& language,
                                 const std::string& config, std::uint64_t seed,
                                 const TaxonomyTable& table) {
  std::ostringstream out;
  auto row = [&](const std::string& cell, double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", value);
    out << language << ',' << config << ',' << seed << ',' << cell << ',' << buf << '\n';
  };
  for (Deleted d : {Deleted::First, Deleted::Second, Deleted::None}) {
    for (Preposed p : {Preposed::First, Preposed::Second, Preposed::Other}) {
      row(to_string(p) + "/" + to_string(d), table.percent(d, p));
    }
  }
  row("uncategorized", table.uncategorized_percent());
  row("third_aux_deleted",
      table.total == 0 ? 0.0
                       : 100.0 * static_cast<double>(table.third_aux_deleted) /
                             static_cast<double>(table.total));
  return out.str();
}

}  // namespace qform::analysis
