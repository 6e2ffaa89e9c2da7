#include "qform/vocab.hpp"

#include <charconv>

#include "qform/error.hpp"

namespace qform {

std::size_t Vocabulary::add(const std::string& word) {
  if (auto it = ids_.find(word); it != ids_.end()) return it->second;
  const std::size_t id = words_.size();
  words_.push_back(word);
  ids_.emplace(word, id);
  return id;
}

std::optional<std::size_t> Vocabulary::find(const std::string& word) const {
  auto it = ids_.find(word);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::size_t Vocabulary::id(const std::string& word) const {
  auto it = ids_.find(word);
  if (it == ids_.end()) throw UnknownTokenError(word);
  return it->second;
}

std::vector<std::size_t> Vocabulary::encode(const Tokens& tokens) const {
  std::vector<std::size_t> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(id(t));
  return out;
}

Tokens Vocabulary::decode(std::span<const std::size_t> ids) const {
  Tokens out;
  out.reserve(ids.size());
  for (auto i : ids) out.push_back(word(i));
  return out;
}

void Vocabulary::write(std::ostream& out) const {
  for (std::size_t i = 0; i < words_.size(); ++i) {
    out << words_[i] << '\t' << i << '\n';
  }
}

Vocabulary Vocabulary::read(std::istream& in) {
  Vocabulary vocab;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(line_no, "missing tab");
    std::size_t id = 0;
    const char* first = line.data() + tab + 1;
    const char* last = line.data() + line.size();
    auto [ptr, ec] = std::from_chars(first, last, id);
    if (ec != std::errc() || ptr != last) throw ParseError(line_no, "bad id");
    if (id != vocab.size()) {
      throw ParseError(line_no, "ids must be consecutive from 0");
    }
    const std::string word = line.substr(0, tab);
    if (vocab.find(word)) throw ParseError(line_no, "duplicate word " + word);
    vocab.add(word);
  }
  return vocab;
}

}  // namespace qform
