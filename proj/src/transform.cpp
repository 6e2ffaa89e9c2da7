#include "qform/transform.hpp"

#include "qform/error.hpp"

namespace qform {

std::string_view to_string(Task task) {
  return task == Task::Ident ? "IDENT" : "QUEST";
}

std::optional<Task> parse_task(std::string_view token) {
  if (token == "IDENT") return Task::Ident;
  if (token == "QUEST") return Task::Quest;
  return std::nullopt;
}

Tokens identity_task(const SentenceAnnotation& annotation) {
  if (annotation.tokens.empty()) {
    throw InvalidArgument("identity_task: empty sentence");
  }
  return annotation.tokens;
}

Tokens front_auxiliary(const Tokens& declarative, std::size_t aux_index) {
  if (declarative.empty() || declarative.back() != ".") {
    throw InvalidArgument("front_auxiliary: declarative must end in '.'");
  }
  if (aux_index + 1 >= declarative.size()) {
    throw InvalidArgument("front_auxiliary: auxiliary index out of range");
  }
  Tokens out;
  out.reserve(declarative.size());
  out.push_back(declarative[aux_index]);
  for (std::size_t i = 0; i < declarative.size(); ++i) {
    if (i != aux_index) out.push_back(declarative[i]);
  }
  out.back() = "?";
  return out;
}

Tokens hierarchical_question(const SentenceAnnotation& annotation) {
  if (annotation.aux_indices.empty()) {
    throw InvalidArgument("hierarchical_question: no auxiliary");
  }
  return front_auxiliary(annotation.tokens, annotation.main_aux_index);
}

Tokens linear_question(const SentenceAnnotation& annotation) {
  if (annotation.aux_indices.empty()) {
    throw InvalidArgument("linear_question: no auxiliary");
  }
  return front_auxiliary(annotation.tokens, annotation.aux_indices.front());
}

Tokens apply_task(Task task, const SentenceAnnotation& annotation) {
  return task == Task::Ident ? identity_task(annotation)
                             : hierarchical_question(annotation);
}

}  // namespace qform
