#pragma once

#include <optional>
#include <string_view>

#include "qform/grammar.hpp"

namespace qform {

/// Task marker appended to inputs and targets; doubles as end-of-sequence.
enum class Task { Ident, Quest };

std::string_view to_string(Task task);
std::optional<Task> parse_task(std::string_view token);

/// The declarative unchanged.
Tokens identity_task(const SentenceAnnotation& annotation);

/// Fronts the matrix-clause auxiliary: the structure-dependent rule.
Tokens hierarchical_question(const SentenceAnnotation& annotation);

/// Fronts the linearly first auxiliary. Reference oracle only.
Tokens linear_question(const SentenceAnnotation& annotation);

/// `[declarative[aux_index]] ++ declarative without aux_index`, with the
/// final "." turned into "?".
Tokens front_auxiliary(const Tokens& declarative, std::size_t aux_index);

/// Target for `task`, without the trailing task token.
Tokens apply_task(Task task, const SentenceAnnotation& annotation);

}  // namespace qform
