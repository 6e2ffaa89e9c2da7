#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "qform/grammar.hpp"

namespace qform {

/// All derivations of `tokens` from the grammar's start symbol, at most
/// `limit` of them. The grammars here are non-recursive, so a memoized
/// top-down search terminates.
std::vector<ParseTree> parse_all(const Grammar& grammar,
                                 std::span<const std::string> tokens,
                                 std::size_t limit = 2);

bool recognizes(const Grammar& grammar, std::span<const std::string> tokens);

/// Recovers the unique derivation of a declarative. Throws InvalidArgument
/// when the sentence is not derivable or is ambiguous.
ParseTree parse_sentence(const Grammar& grammar, const Tokens& tokens);

enum class GapScope {
  /// The fronted auxiliary may have been taken from any clause.
  AnyClause,
  /// Only the matrix clause's auxiliary may be fronted.
  MainClause,
};

/// Grammar of yes/no questions built from a declarative grammar:
/// `Q -> A S/A ?` where `S/A` is S with exactly one auxiliary of preterminal
/// A left out.
Grammar make_question_grammar(const Grammar& declarative, GapScope scope);

}  // namespace qform
