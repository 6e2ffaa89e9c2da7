#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "qform/rng.hpp"

namespace qform {

using Tokens = std::vector<std::string>;

enum class Category { Det, N, Vintrans, Vtrans, Aux, P, Rel, Punct, Task };
enum class Number { None, Sg, Pl };

std::string_view to_string(Category category);
std::string_view to_string(Number number);

struct LexEntry {
  Category category;
  Number number = Number::None;
};

/// Word inventory of a language fragment, kept in insertion order.
class Lexicon {
 public:
  void add(const std::string& word, Category category,
           Number number = Number::None);

  const LexEntry* find(std::string_view word) const;
  bool contains(std::string_view word) const { return find(word) != nullptr; }

  const std::vector<std::string>& words() const { return order_; }

  /// Words of `category`; `number == None` matches every number feature.
  std::vector<std::string> words_matching(Category category,
                                          Number number) const;

  std::size_t count(Category category) const;
  std::size_t size() const { return order_.size(); }

 private:
  std::vector<std::string> order_;
  std::unordered_map<std::string, LexEntry> entries_;
};

/// Right-hand-side symbol. Preterminals stand for any lexicon word of a
/// category (optionally restricted to one number); Word symbols are literal
/// tokens such as ".".
struct Symbol {
  enum class Kind { Nonterminal, Preterminal, Word };

  Kind kind = Kind::Nonterminal;
  std::string name;
  Category category = Category::Punct;
  Number number = Number::None;

  static Symbol nonterminal(std::string name);
  static Symbol preterminal(std::string name, Category category,
                            Number number = Number::None);
  static Symbol word(std::string token);

  bool operator==(const Symbol& other) const = default;
};

struct Production {
  std::string lhs;
  std::vector<Symbol> rhs;
  double weight = 1.0;
};

struct GrammarOptions {
  /// Use V_trans inside object relatives ("that the newt will confuse")
  /// instead of the printed V_intrans.
  bool object_rc_transitive = false;
};

class Grammar {
 public:
  Grammar(std::string id, std::string start, std::vector<Production> productions,
          Lexicon lexicon, bool agreement);

  const std::string& id() const { return id_; }
  const std::string& start() const { return start_; }
  const std::vector<Production>& productions() const { return productions_; }
  const Lexicon& lexicon() const { return lexicon_; }
  bool agreement() const { return agreement_; }

  bool is_nonterminal(std::string_view name) const;

  /// Indices into productions() whose lhs is `lhs`.
  const std::vector<std::size_t>& productions_for(std::string_view lhs) const;

  /// Terminal words a preterminal or word symbol can produce.
  const std::vector<std::string>& words_for(const Symbol& symbol) const;

  /// Every distinct non-Task preterminal symbol, in first-use order.
  std::vector<Symbol> preterminals() const;

  /// Plain-text export: `LHS -> sym ... [weight]` per production followed by
  /// `CAT: word word ...` per preterminal.
  std::string to_text() const;

 private:
  std::string id_;
  std::string start_;
  std::vector<Production> productions_;
  Lexicon lexicon_;
  bool agreement_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> by_lhs_;
  mutable std::map<std::string, std::vector<std::string>, std::less<>>
      word_cache_;
};

Grammar build_no_agreement_grammar(const GrammarOptions& options = {});
Grammar build_agreement_grammar(const GrammarOptions& options = {});

/// Derivation tree. Nonterminal nodes carry the production index used;
/// preterminal and word nodes are leaves carrying the emitted token.
struct ParseTree {
  std::string label;
  int production = -1;
  std::string word;
  std::vector<ParseTree> children;

  bool is_leaf() const { return children.empty(); }
  Tokens linearize() const;
};

ParseTree sample_tree(const Grammar& grammar, Rng& rng);

enum class Modifier { None, PP, RC };
enum class Transitivity { Intransitive, Transitive };

struct SentenceType {
  Modifier subject = Modifier::None;
  Transitivity transitivity = Transitivity::Intransitive;
  /// Empty for intransitive sentences.
  std::optional<Modifier> object;

  bool operator==(const SentenceType& other) const = default;
};

/// The twelve frequency-table rows: three intransitive types followed by
/// the nine transitive subject/object modifier combinations.
inline constexpr std::size_t kSentenceTypeCount = 12;
std::size_t sentence_type_row(const SentenceType& type);
SentenceType sentence_type_from_row(std::size_t row);
std::string sentence_type_label(const SentenceType& type);

struct SentenceAnnotation {
  Tokens tokens;
  std::size_t main_aux_index = 0;
  std::vector<std::size_t> aux_indices;
  /// Head noun of the local subject of each auxiliary, parallel to
  /// aux_indices.
  std::vector<std::size_t> aux_subject_indices;
  std::size_t subject_noun_index = 1;
  Number subject_number = Number::None;
  /// Number of the local subject inside a subject relative clause.
  std::optional<Number> rc_subject_number;
  SentenceType sentence_type;
  std::string fourth_word;

  const std::string& main_aux() const { return tokens[main_aux_index]; }
  const std::string& first_aux() const { return tokens[aux_indices.front()]; }
  const std::string& subject_noun() const { return tokens[subject_noun_index]; }
};

SentenceAnnotation annotate(const Grammar& grammar, const ParseTree& tree);
SentenceType classify_sentence_type(const SentenceAnnotation& annotation);

/// Exact number of distinct sentences (dynamic programming over the
/// non-recursive grammar). Throws on 64-bit overflow.
std::uint64_t count_sentences(const Grammar& grammar);

/// Every derivation with lexical choices left open: sequences of
/// preterminal and word symbols.
std::vector<std::vector<Symbol>> enumerate_skeletons(const Grammar& grammar);

std::string join_tokens(const Tokens& tokens);
Tokens split_tokens(std::string_view text);

}  // namespace qform
