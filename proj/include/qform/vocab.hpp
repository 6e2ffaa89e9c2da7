#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "qform/grammar.hpp"

namespace qform {

/// Word <-> integer id mapping used for embedding rows and output classes.
class Vocabulary {
 public:
  /// Returns the id of `word`, adding it if new.
  std::size_t add(const std::string& word);

  std::optional<std::size_t> find(const std::string& word) const;
  /// Throws UnknownTokenError for out-of-vocabulary words.
  std::size_t id(const std::string& word) const;
  const std::string& word(std::size_t id) const { return words_.at(id); }
  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }

  std::vector<std::size_t> encode(const Tokens& tokens) const;
  Tokens decode(std::span<const std::size_t> ids) const;

  /// `word<TAB>id` per line.
  void write(std::ostream& out) const;
  static Vocabulary read(std::istream& in);

  bool operator==(const Vocabulary& other) const { return words_ == other.words_; }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> ids_;
};

}  // namespace qform
