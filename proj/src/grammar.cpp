#include "qform/grammar.hpp"

#include <algorithm>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "qform/error.hpp"

namespace qform {

std::string_view to_string(Category category) {
  switch (category) {
    case Category::Det: return "Det";
    case Category::N: return "N";
    case Category::Vintrans: return "V_intrans";
    case Category::Vtrans: return "V_trans";
    case Category::Aux: return "Aux";
    case Category::P: return "P";
    case Category::Rel: return "Rel";
    case Category::Punct: return "Punct";
    case Category::Task: return "Task";
  }
  return "?";
}

std::string_view to_string(Number number) {
  switch (number) {
    case Number::None: return "none";
    case Number::Sg: return "sg";
    case Number::Pl: return "pl";
  }
  return "?";
}

void Lexicon::add(const std::string& word, Category category, Number number) {
  if (entries_.count(word) != 0) {
    throw InvalidArgument("duplicate lexicon word '" + word + "'");
  }
  entries_.emplace(word, LexEntry{category, number});
  order_.push_back(word);
}

const LexEntry* Lexicon::find(std::string_view word) const {
  auto it = entries_.find(std::string(word));
  return it == entries_.end() ? nullptr : &it->second;
}

std::vector<std::string> Lexicon::words_matching(Category category,
                                                 Number number) const {
  std::vector<std::string> out;
  for (const auto& w : order_) {
    const auto& e = entries_.at(w);
    if (e.category == category &&
        (number == Number::None || e.number == number)) {
      out.push_back(w);
    }
  }
  return out;
}

std::size_t Lexicon::count(Category category) const {
  return static_cast<std::size_t>(
      std::count_if(order_.begin(), order_.end(), [&](const std::string& w) {
        return entries_.at(w).category == category;
      }));
}

Symbol Symbol::nonterminal(std::string name) {
  Symbol s;
  s.kind = Kind::Nonterminal;
  s.name = std::move(name);
  return s;
}

Symbol Symbol::preterminal(std::string name, Category category, Number number) {
  Symbol s;
  s.kind = Kind::Preterminal;
  s.name = std::move(name);
  s.category = category;
  s.number = number;
  return s;
}

Symbol Symbol::word(std::string token) {
  Symbol s;
  s.kind = Kind::Word;
  s.name = std::move(token);
  return s;
}

Grammar::Grammar(std::string id, std::string start,
                 std::vector<Production> productions, Lexicon lexicon,
                 bool agreement)
    : id_(std::move(id)),
      start_(std::move(start)),
      productions_(std::move(productions)),
      lexicon_(std::move(lexicon)),
      agreement_(agreement) {
  for (std::size_t i = 0; i < productions_.size(); ++i) {
    if (productions_[i].weight < 0.0) {
      throw InvalidArgument("negative production weight for " +
                            productions_[i].lhs);
    }
    by_lhs_[productions_[i].lhs].push_back(i);
  }
  if (!is_nonterminal(start_)) {
    throw InvalidArgument("start symbol " + start_ + " has no productions");
  }
  for (const auto& p : productions_) {
    for (const auto& s : p.rhs) {
      if (s.kind == Symbol::Kind::Nonterminal && !is_nonterminal(s.name)) {
        throw InvalidArgument("undefined nonterminal " + s.name);
      }
      if (s.kind != Symbol::Kind::Nonterminal && words_for(s).empty()) {
        throw InvalidArgument("symbol " + s.name + " has no words");
      }
    }
  }
}

bool Grammar::is_nonterminal(std::string_view name) const {
  return by_lhs_.find(name) != by_lhs_.end();
}

const std::vector<std::size_t>& Grammar::productions_for(
    std::string_view lhs) const {
  auto it = by_lhs_.find(lhs);
  if (it == by_lhs_.end()) {
    throw InvalidArgument("no productions for " + std::string(lhs));
  }
  return it->second;
}

const std::vector<std::string>& Grammar::words_for(const Symbol& symbol) const {
  auto key = symbol.kind == Symbol::Kind::Word ? "'" + symbol.name
                                               : symbol.name;
  auto it = word_cache_.find(key);
  if (it != word_cache_.end()) return it->second;
  std::vector<std::string> words;
  if (symbol.kind == Symbol::Kind::Word) {
    words.push_back(symbol.name);
  } else if (symbol.kind == Symbol::Kind::Preterminal) {
    words = lexicon_.words_matching(symbol.category, symbol.number);
  }
  return word_cache_.emplace(key, std::move(words)).first->second;
}

std::vector<Symbol> Grammar::preterminals() const {
  std::vector<Symbol> out;
  for (const auto& p : productions_) {
    for (const auto& s : p.rhs) {
      if (s.kind == Symbol::Kind::Preterminal &&
          std::find(out.begin(), out.end(), s) == out.end()) {
        out.push_back(s);
      }
    }
  }
  return out;
}

std::string Grammar::to_text() const {
  std::ostringstream out;
  out << "# grammar " << id_ << "\n";
  out << "# start " << start_ << "\n";
  for (const auto& p : productions_) {
    out << p.lhs << " ->";
    for (const auto& s : p.rhs) out << ' ' << s.name;
    out << " [" << p.weight << "]\n";
  }
  for (const auto& s : preterminals()) {
    out << s.name << ":";
    for (const auto& w : words_for(s)) out << ' ' << w;
    out << "\n";
  }
  return out.str();
}

namespace {

const char* const kDeterminers[] = {"the", "some", "my", "your", "our", "her"};
const char* const kNounPairs[][2] = {
    {"newt", "newts"},
    {"orangutan", "orangutans"},
    {"peacock", "peacocks"},
    {"quail", "quails"},
    {"raven", "ravens"},
    {"salamander", "salamanders"},
    {"tyrannosaurus", "tyrannosauruses"},
    {"unicorn", "unicorns"},
    {"vulture", "vultures"},
    {"walrus", "walruses"},
    {"xylophone", "xylophones"},
    {"yak", "yaks"},
    {"zebra", "zebras"},
};
const char* const kIntransitive[] = {"giggle", "smile", "sleep",  "swim", "wait",
                                     "move",   "change", "read", "eat"};
const char* const kTransitive[] = {"entertain", "amuse",  "high_five",
                                   "applaud",   "confuse", "admire",
                                   "accept",    "remember", "comfort"};
const char* const kPrepositions[] = {"around", "near",   "with",  "upon",
                                     "by",     "behind", "above", "below"};
const char* const kRelativizers[] = {"who", "that"};

Lexicon base_lexicon(bool agreement) {
  Lexicon lex;
  for (const char* w : kDeterminers) lex.add(w, Category::Det);
  for (const auto& pair : kNounPairs) {
    lex.add(pair[0], Category::N, Number::Sg);
    lex.add(pair[1], Category::N, Number::Pl);
  }
  for (const char* w : kIntransitive) lex.add(w, Category::Vintrans);
  for (const char* w : kTransitive) lex.add(w, Category::Vtrans);
  if (agreement) {
    lex.add("do", Category::Aux, Number::Pl);
    lex.add("don't", Category::Aux, Number::Pl);
    lex.add("does", Category::Aux, Number::Sg);
    lex.add("doesn't", Category::Aux, Number::Sg);
  } else {
    for (const char* w : {"can", "will", "could", "would"}) {
      lex.add(w, Category::Aux);
    }
  }
  for (const char* w : kPrepositions) lex.add(w, Category::P);
  for (const char* w : kRelativizers) lex.add(w, Category::Rel);
  lex.add(".", Category::Punct);
  lex.add("?", Category::Punct);
  lex.add("IDENT", Category::Task);
  lex.add("QUEST", Category::Task);
  return lex;
}

Symbol nt(const std::string& name) { return Symbol::nonterminal(name); }
Symbol det() { return Symbol::preterminal("Det", Category::Det); }
Symbol noun(Number n = Number::None) {
  switch (n) {
    case Number::Sg: return Symbol::preterminal("N_sg", Category::N, n);
    case Number::Pl: return Symbol::preterminal("N_pl", Category::N, n);
    case Number::None: break;
  }
  return Symbol::preterminal("N", Category::N);
}
Symbol aux(Number n = Number::None) {
  switch (n) {
    case Number::Sg: return Symbol::preterminal("Aux_sg", Category::Aux, n);
    case Number::Pl: return Symbol::preterminal("Aux_pl", Category::Aux, n);
    case Number::None: break;
  }
  return Symbol::preterminal("Aux", Category::Aux);
}
Symbol vintr() { return Symbol::preterminal("V_intrans", Category::Vintrans); }
Symbol vtr() { return Symbol::preterminal("V_trans", Category::Vtrans); }
Symbol prep() { return Symbol::preterminal("P", Category::P); }
Symbol rel() { return Symbol::preterminal("Rel", Category::Rel); }
Symbol period() { return Symbol::word("."); }

std::string base_label(std::string_view label) {
  for (std::string_view suffix : {"_sg", "_pl"}) {
    if (label.size() > suffix.size() &&
        label.substr(label.size() - suffix.size()) == suffix) {
      return std::string(label.substr(0, label.size() - suffix.size()));
    }
  }
  return std::string(label);
}

}  // namespace

Grammar build_no_agreement_grammar(const GrammarOptions& options) {
  const Symbol rc_verb = options.object_rc_transitive ? vtr() : vintr();
  std::vector<Production> p = {
      {"S", {nt("NP"), nt("VP"), period()}},
      {"NP", {det(), noun()}},
      {"NP", {det(), noun(), nt("PP")}},
      {"NP", {det(), noun(), nt("RC")}},
      {"VP", {aux(), vintr()}},
      {"VP", {aux(), vtr(), nt("NP")}},
      {"PP", {prep(), det(), noun()}},
      {"RC", {rel(), aux(), vintr()}},
      {"RC", {rel(), det(), noun(), aux(), rc_verb}},
      {"RC", {rel(), aux(), vtr(), det(), noun()}},
  };
  std::string id = "no_agreement";
  if (options.object_rc_transitive) id += "+object_rc_transitive";
  return Grammar(id, "S", std::move(p), base_lexicon(false), false);
}

Grammar build_agreement_grammar(const GrammarOptions& options) {
  const Symbol rc_verb = options.object_rc_transitive ? vtr() : vintr();
  std::vector<Production> p = {
      {"S", {nt("NP_sg"), nt("VP_sg"), period()}},
      {"S", {nt("NP_pl"), nt("VP_pl"), period()}},
      {"NP", {nt("NP_sg")}},
      {"NP", {nt("NP_pl")}},
  };
  for (Number n : {Number::Sg, Number::Pl}) {
    const std::string sfx = n == Number::Sg ? "_sg" : "_pl";
    p.push_back({"NP" + sfx, {det(), noun(n)}});
    p.push_back({"NP" + sfx, {det(), noun(n), nt("PP")}});
    p.push_back({"NP" + sfx, {det(), noun(n), nt("RC" + sfx)}});
  }
  for (Number n : {Number::Sg, Number::Pl}) {
    const std::string sfx = n == Number::Sg ? "_sg" : "_pl";
    p.push_back({"VP" + sfx, {aux(n), vintr()}});
    p.push_back({"VP" + sfx, {aux(n), vtr(), nt("NP")}});
  }
  p.push_back({"PP", {prep(), det(), noun()}});
  for (Number n : {Number::Sg, Number::Pl}) {
    const std::string sfx = n == Number::Sg ? "_sg" : "_pl";
    p.push_back({"RC" + sfx, {rel(), aux(n), vintr()}});
    p.push_back({"RC" + sfx, {rel(), nt("Subj_RC")}});
    p.push_back({"RC" + sfx, {rel(), aux(n), vtr(), det(), noun()}});
  }
  p.push_back({"Subj_RC", {det(), noun(Number::Sg), aux(Number::Sg), rc_verb}});
  p.push_back({"Subj_RC", {det(), noun(Number::Pl), aux(Number::Pl), rc_verb}});
  std::string id = "agreement";
  if (options.object_rc_transitive) id += "+object_rc_transitive";
  return Grammar(id, "S", std::move(p), base_lexicon(true), true);
}

Tokens ParseTree::linearize() const {
  Tokens out;
  auto walk = [&out](const ParseTree& node, auto& self) -> void {
    if (node.is_leaf()) {
      out.push_back(node.word);
      return;
    }
    for (const auto& c : node.children) self(c, self);
  };
  walk(*this, walk);
  return out;
}

namespace {

std::size_t pick_production(const Grammar& g, const std::vector<std::size_t>& ids,
                            Rng& rng) {
  const auto& prods = g.productions();
  const double first = prods[ids.front()].weight;
  const bool uniform = std::all_of(ids.begin(), ids.end(), [&](std::size_t i) {
    return prods[i].weight == first;
  });
  if (uniform) return ids[rng.uniform_index(ids.size())];
  double total = 0.0;
  for (auto i : ids) total += prods[i].weight;
  double u = rng.uniform01() * total;
  for (auto i : ids) {
    u -= prods[i].weight;
    if (u < 0.0) return i;
  }
  return ids.back();
}

ParseTree expand(const Grammar& g, const Symbol& symbol, Rng& rng) {
  ParseTree node;
  node.label = symbol.name;
  if (symbol.kind != Symbol::Kind::Nonterminal) {
    const auto& words = g.words_for(symbol);
    node.word = words[rng.uniform_index(words.size())];
    return node;
  }
  const std::size_t pi = pick_production(g, g.productions_for(symbol.name), rng);
  node.production = static_cast<int>(pi);
  for (const auto& child : g.productions()[pi].rhs) {
    node.children.push_back(expand(g, child, rng));
  }
  return node;
}

}  // namespace

ParseTree sample_tree(const Grammar& grammar, Rng& rng) {
  return expand(grammar, Symbol::nonterminal(grammar.start()), rng);
}

std::size_t sentence_type_row(const SentenceType& type) {
  const auto mod = [](Modifier m) { return static_cast<std::size_t>(m); };
  if (type.transitivity == Transitivity::Intransitive) return mod(type.subject);
  const Modifier obj = type.object.value_or(Modifier::None);
  // Transitive rows, in frequency-table order.
  static const Modifier kRows[9][2] = {
      {Modifier::None, Modifier::None}, {Modifier::PP, Modifier::None},
      {Modifier::None, Modifier::PP},   {Modifier::RC, Modifier::None},
      {Modifier::None, Modifier::RC},   {Modifier::PP, Modifier::PP},
      {Modifier::PP, Modifier::RC},     {Modifier::RC, Modifier::PP},
      {Modifier::RC, Modifier::RC},
  };
  for (std::size_t r = 0; r < 9; ++r) {
    if (kRows[r][0] == type.subject && kRows[r][1] == obj) return 3 + r;
  }
  throw InvalidArgument("unreachable sentence type");
}

SentenceType sentence_type_from_row(std::size_t row) {
  if (row >= kSentenceTypeCount) throw InvalidArgument("sentence type row");
  static const Modifier kRows[9][2] = {
      {Modifier::None, Modifier::None}, {Modifier::PP, Modifier::None},
      {Modifier::None, Modifier::PP},   {Modifier::RC, Modifier::None},
      {Modifier::None, Modifier::RC},   {Modifier::PP, Modifier::PP},
      {Modifier::PP, Modifier::RC},     {Modifier::RC, Modifier::PP},
      {Modifier::RC, Modifier::RC},
  };
  SentenceType t;
  if (row < 3) {
    t.subject = static_cast<Modifier>(row);
    t.transitivity = Transitivity::Intransitive;
    return t;
  }
  t.transitivity = Transitivity::Transitive;
  t.subject = kRows[row - 3][0];
  t.object = kRows[row - 3][1];
  return t;
}

std::string sentence_type_label(const SentenceType& type) {
  auto mod = [](Modifier m) {
    return m == Modifier::PP ? "PP" : m == Modifier::RC ? "RC" : "none";
  };
  std::string out = type.transitivity == Transitivity::Intransitive
                        ? "intransitive"
                        : "transitive";
  out += std::string(" subject=") + mod(type.subject);
  if (type.object) out += std::string(" object=") + mod(*type.object);
  return out;
}

namespace {

struct Annotator {
  const Grammar& grammar;
  std::unordered_map<const ParseTree*, std::size_t> leaf_index;
  Tokens tokens;

  void index_leaves(const ParseTree& node) {
    if (node.is_leaf()) {
      leaf_index[&node] = tokens.size();
      tokens.push_back(node.word);
      return;
    }
    for (const auto& c : node.children) index_leaves(c);
  }

  static const ParseTree& resolve_np(const ParseTree& node) {
    const ParseTree* p = &node;
    while (p->children.size() == 1 && !p->children.front().is_leaf()) {
      p = &p->children.front();
    }
    return *p;
  }

  static Modifier modifier_of(const ParseTree& np) {
    if (np.children.size() < 3) return Modifier::None;
    const std::string b = base_label(np.children[2].label);
    if (b == "PP") return Modifier::PP;
    if (b == "RC") return Modifier::RC;
    throw InvalidArgument("unexpected NP modifier " + np.children[2].label);
  }

  static void leaves_of(const ParseTree& node,
                        std::vector<const ParseTree*>& out) {
    if (node.is_leaf()) {
      out.push_back(&node);
      return;
    }
    for (const auto& c : node.children) leaves_of(c, out);
  }

  static bool is_aux_leaf(const ParseTree& leaf) {
    return base_label(leaf.label) == "Aux";
  }
  static bool is_noun_leaf(const ParseTree& leaf) {
    return base_label(leaf.label) == "N";
  }

  Number number_of(const ParseTree& leaf) const {
    if (const auto* e = grammar.lexicon().find(leaf.word)) return e->number;
    if (leaf.label.ends_with("_sg")) return Number::Sg;
    if (leaf.label.ends_with("_pl")) return Number::Pl;
    return Number::None;
  }

  // Records the auxiliary of a relative clause attached to the NP whose head
  // noun sits at `head`. Returns the local subject's noun leaf.
  const ParseTree* relative_clause(const ParseTree& rc, std::size_t head,
                                   std::map<std::size_t, std::size_t>& aux_subj) {
    std::vector<const ParseTree*> leaves;
    leaves_of(rc, leaves);
    // A noun preceding the RC auxiliary is the RC-internal subject.
    const ParseTree* local_subject = nullptr;
    for (const auto* leaf : leaves) {
      if (is_aux_leaf(*leaf)) break;
      if (is_noun_leaf(*leaf)) local_subject = leaf;
    }
    for (const auto* leaf : leaves) {
      if (is_aux_leaf(*leaf)) {
        aux_subj[leaf_index.at(leaf)] =
            local_subject ? leaf_index.at(local_subject) : head;
      }
    }
    return local_subject;
  }
};

}  // namespace

SentenceAnnotation annotate(const Grammar& grammar, const ParseTree& tree) {
  if (tree.children.size() < 2) {
    throw InvalidArgument("annotate: tree is not a sentence derivation");
  }
  Annotator a{grammar, {}, {}};
  a.index_leaves(tree);

  SentenceAnnotation ann;
  const ParseTree& subject = Annotator::resolve_np(tree.children[0]);
  const ParseTree& vp = tree.children[1];
  if (subject.children.size() < 2 || vp.children.size() < 2) {
    throw InvalidArgument("annotate: malformed clause");
  }
  const ParseTree& head = subject.children[1];
  ann.subject_noun_index = a.leaf_index.at(&head);
  ann.subject_number = a.number_of(head);

  std::map<std::size_t, std::size_t> aux_subject;
  const ParseTree& main_aux = vp.children[0];
  if (!Annotator::is_aux_leaf(main_aux)) {
    throw InvalidArgument("annotate: VP does not start with an auxiliary");
  }
  ann.main_aux_index = a.leaf_index.at(&main_aux);
  aux_subject[ann.main_aux_index] = ann.subject_noun_index;

  SentenceType type;
  type.subject = Annotator::modifier_of(subject);
  if (type.subject == Modifier::RC) {
    const ParseTree* local =
        a.relative_clause(subject.children[2], ann.subject_noun_index, aux_subject);
    ann.rc_subject_number = local ? a.number_of(*local) : ann.subject_number;
  }
  if (vp.children.size() >= 3) {
    type.transitivity = Transitivity::Transitive;
    const ParseTree& object = Annotator::resolve_np(vp.children[2]);
    type.object = Annotator::modifier_of(object);
    if (*type.object == Modifier::RC) {
      a.relative_clause(object.children[2], a.leaf_index.at(&object.children[1]),
                        aux_subject);
    }
  } else {
    type.transitivity = Transitivity::Intransitive;
  }
  ann.sentence_type = type;

  for (const auto& [index, subj] : aux_subject) {
    ann.aux_indices.push_back(index);
    ann.aux_subject_indices.push_back(subj);
  }
  ann.tokens = std::move(a.tokens);
  ann.fourth_word = ann.tokens.size() > 3 ? ann.tokens[3] : std::string();
  return ann;
}

SentenceType classify_sentence_type(const SentenceAnnotation& annotation) {
  return annotation.sentence_type;
}

std::uint64_t count_sentences(const Grammar& grammar) {
  std::map<std::string, std::uint64_t> memo;
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  auto count = [&](const Symbol& s, auto& self) -> std::uint64_t {
    if (s.kind != Symbol::Kind::Nonterminal) return grammar.words_for(s).size();
    if (auto it = memo.find(s.name); it != memo.end()) return it->second;
    std::uint64_t total = 0;
    for (auto pi : grammar.productions_for(s.name)) {
      std::uint64_t prod = 1;
      for (const auto& c : grammar.productions()[pi].rhs) {
        const std::uint64_t k = self(c, self);
        if (k != 0 && prod > kMax / k) throw NumericError("sentence count overflow");
        prod *= k;
      }
      if (total > kMax - prod) throw NumericError("sentence count overflow");
      total += prod;
    }
    memo[s.name] = total;
    return total;
  };
  return count(Symbol::nonterminal(grammar.start()), count);
}

std::vector<std::vector<Symbol>> enumerate_skeletons(const Grammar& grammar) {
  std::map<std::string, std::vector<std::vector<Symbol>>> memo;
  auto expand_sym = [&](const Symbol& s,
                        auto& self) -> std::vector<std::vector<Symbol>> {
    if (s.kind != Symbol::Kind::Nonterminal) return {{s}};
    if (auto it = memo.find(s.name); it != memo.end()) return it->second;
    std::vector<std::vector<Symbol>> out;
    for (auto pi : grammar.productions_for(s.name)) {
      std::vector<std::vector<Symbol>> partial = {{}};
      for (const auto& c : grammar.productions()[pi].rhs) {
        const auto tails = self(c, self);
        std::vector<std::vector<Symbol>> next;
        next.reserve(partial.size() * tails.size());
        for (const auto& head : partial) {
          for (const auto& tail : tails) {
            auto joined = head;
            joined.insert(joined.end(), tail.begin(), tail.end());
            next.push_back(std::move(joined));
          }
        }
        partial = std::move(next);
      }
      out.insert(out.end(), partial.begin(), partial.end());
    }
    memo[s.name] = out;
    return out;
  };
  return expand_sym(Symbol::nonterminal(grammar.start()), expand_sym);
}

std::string join_tokens(const Tokens& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

Tokens split_tokens(std::string_view text) {
  Tokens out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && text[i] == ' ') ++i;
    std::size_t j = i;
    while (j < text.size() && text[j] != ' ') ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace qform
