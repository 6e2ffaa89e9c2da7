#pragma once

#include <initializer_list>
#include <string>
#include <utility>

#include "qform/grammar.hpp"
#include "qform/grammar_parse.hpp"

namespace qform::test {

/// The same grammar with extra words, for example sentences that use words
/// outside the fragment's lexicon ("his", "seal").
inline Grammar with_words(const Grammar& g,
                          std::initializer_list<std::pair<std::string, LexEntry>> words) {
  Lexicon lex = g.lexicon();
  for (const auto& [w, e] : words) lex.add(w, e.category, e.number);
  return Grammar(g.id(), g.start(), g.productions(), lex, g.agreement());
}

inline Grammar no_agreement_plus() {
  return with_words(build_no_agreement_grammar(),
                    {{"his", {Category::Det}}, {"seal", {Category::N}}});
}

inline Grammar agreement_plus() {
  return with_words(build_agreement_grammar(),
                    {{"his", {Category::Det}}, {"seal", {Category::N, Number::Sg}}});
}

inline SentenceAnnotation annotation_of(const Grammar& g, const std::string& text) {
  return annotate(g, parse_sentence(g, split_tokens(text)));
}

}  // namespace qform::test
