#include "qform/grammar_parse.hpp"

#include <map>
#include <utility>

#include "qform/error.hpp"

namespace qform {

namespace {

using Partial = std::pair<std::size_t, ParseTree>;

class Parser {
 public:
  Parser(const Grammar& grammar, std::span<const std::string> tokens,
         std::size_t limit)
      : grammar_(grammar), tokens_(tokens), limit_(limit) {}

  const std::vector<Partial>& parse(const Symbol& symbol, std::size_t start) {
    const auto key = std::make_pair(
        (symbol.kind == Symbol::Kind::Nonterminal ? "N:" : "T:") + symbol.name,
        start);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    std::vector<Partial> out;
    if (symbol.kind != Symbol::Kind::Nonterminal) {
      if (start < tokens_.size() && matches(symbol, tokens_[start])) {
        ParseTree leaf;
        leaf.label = symbol.name;
        leaf.word = tokens_[start];
        out.emplace_back(start + 1, std::move(leaf));
      }
    } else {
      for (auto pi : grammar_.productions_for(symbol.name)) {
        std::vector<ParseTree> children;
        extend(pi, 0, start, children, out);
      }
    }
    return memo_.emplace(key, std::move(out)).first->second;
  }

 private:
  bool matches(const Symbol& symbol, const std::string& token) const {
    if (symbol.kind == Symbol::Kind::Word) return token == symbol.name;
    const LexEntry* e = grammar_.lexicon().find(token);
    return e != nullptr && e->category == symbol.category &&
           (symbol.number == Number::None || e->number == symbol.number);
  }

  void extend(std::size_t pi, std::size_t index, std::size_t pos,
              std::vector<ParseTree>& children, std::vector<Partial>& out) {
    const Production& prod = grammar_.productions()[pi];
    if (index == prod.rhs.size()) {
      std::size_t same_end = 0;
      for (const auto& p : out) same_end += p.first == pos ? 1 : 0;
      if (same_end >= limit_) return;
      ParseTree node;
      node.label = prod.lhs;
      node.production = static_cast<int>(pi);
      node.children = children;
      out.emplace_back(pos, std::move(node));
      return;
    }
    // std::map entries stay put while recursion inserts new ones.
    const std::vector<Partial>& next = parse(prod.rhs[index], pos);
    for (const auto& [end, tree] : next) {
      children.push_back(tree);
      extend(pi, index + 1, end, children, out);
      children.pop_back();
    }
  }

  const Grammar& grammar_;
  std::span<const std::string> tokens_;
  std::size_t limit_;
  std::map<std::pair<std::string, std::size_t>, std::vector<Partial>> memo_;
};

bool has_suffix(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

bool is_vp(const std::string& name) {
  return name == "VP" || has_suffix(name, "VP_sg") || has_suffix(name, "VP_pl");
}

enum class GapMode { Anywhere, FromStart, VerbPhraseOnly };

struct GapBuilder {
  const Grammar& grammar;
  std::vector<Production>& out;
  std::map<std::string, bool> done;

  // Adds productions for `lhs/aux` and reports whether any exist.
  bool build(const std::string& lhs, const Symbol& aux, GapMode mode) {
    const std::string name = lhs + "/" + aux.name;
    if (auto it = done.find(name); it != done.end()) return it->second;
    done[name] = false;
    bool any = false;
    for (auto pi : grammar.productions_for(lhs)) {
      const Production& prod = grammar.productions()[pi];
      for (std::size_t i = 0; i < prod.rhs.size(); ++i) {
        const Symbol& child = prod.rhs[i];
        const bool direct_ok = mode != GapMode::FromStart;
        if (child.kind == Symbol::Kind::Preterminal && child == aux && direct_ok) {
          Production gapped{name, {}, prod.weight};
          for (std::size_t j = 0; j < prod.rhs.size(); ++j) {
            if (j != i) gapped.rhs.push_back(prod.rhs[j]);
          }
          out.push_back(std::move(gapped));
          any = true;
          continue;
        }
        if (child.kind != Symbol::Kind::Nonterminal) continue;
        GapMode child_mode = GapMode::Anywhere;
        if (mode == GapMode::VerbPhraseOnly) continue;
        if (mode == GapMode::FromStart) {
          if (!is_vp(child.name)) continue;
          child_mode = GapMode::VerbPhraseOnly;
        }
        if (build(child.name, aux, child_mode)) {
          Production gapped{name, prod.rhs, prod.weight};
          gapped.rhs[i] = Symbol::nonterminal(child.name + "/" + aux.name);
          out.push_back(std::move(gapped));
          any = true;
        }
      }
    }
    done[name] = any;
    return any;
  }
};

}  // namespace

std::vector<ParseTree> parse_all(const Grammar& grammar,
                                 std::span<const std::string> tokens,
                                 std::size_t limit) {
  Parser parser(grammar, tokens, limit);
  std::vector<ParseTree> out;
  for (const auto& [end, tree] :
       parser.parse(Symbol::nonterminal(grammar.start()), 0)) {
    if (end == tokens.size() && out.size() < limit) out.push_back(tree);
  }
  return out;
}

bool recognizes(const Grammar& grammar, std::span<const std::string> tokens) {
  return !parse_all(grammar, tokens, 1).empty();
}

ParseTree parse_sentence(const Grammar& grammar, const Tokens& tokens) {
  auto parses = parse_all(grammar, tokens, 2);
  if (parses.empty()) {
    throw InvalidArgument("not derivable: " + join_tokens(tokens));
  }
  if (parses.size() > 1) {
    throw InvalidArgument("ambiguous: " + join_tokens(tokens));
  }
  return std::move(parses.front());
}

Grammar make_question_grammar(const Grammar& declarative, GapScope scope) {
  std::vector<Production> productions = declarative.productions();
  GapBuilder builder{declarative, productions, {}};
  std::vector<Production> questions;
  for (const Symbol& pre : declarative.preterminals()) {
    if (pre.category != Category::Aux) continue;
    const GapMode mode =
        scope == GapScope::AnyClause ? GapMode::Anywhere : GapMode::FromStart;
    if (builder.build(declarative.start(), pre, mode)) {
      questions.push_back(
          {"Q",
           {pre, Symbol::nonterminal(declarative.start() + "/" + pre.name),
            Symbol::word("?")}});
    }
  }
  if (questions.empty()) {
    throw InvalidArgument("grammar has no auxiliary to front");
  }
  // The question mark replaces the declarative's final period.
  for (auto& prod : productions) {
    if (prod.lhs.rfind(declarative.start() + "/", 0) != 0) continue;
    std::erase(prod.rhs, Symbol::word("."));
  }
  productions.insert(productions.end(), questions.begin(), questions.end());
  const std::string id =
      declarative.id() +
      (scope == GapScope::AnyClause ? "/question-any" : "/question-main");
  return Grammar(id, "Q", std::move(productions), declarative.lexicon(),
                 declarative.agreement());
}

}  // namespace qform
