#include "qform/cli/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "qform/error.hpp"

namespace qform::cli {

namespace pt = boost::property_tree;

std::string to_string(Language language) {
  return language == Language::Agreement ? "agreement" : "no_agreement";
}

Language parse_language(std::string_view text) {
  if (text == "agreement") return Language::Agreement;
  if (text == "no_agreement") return Language::NoAgreement;
  throw InvalidArgument("unknown language: " + std::string(text));
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto piece = trim(text.substr(start, comma == std::string_view::npos
                                                   ? std::string_view::npos
                                                   : comma - start));
    if (!piece.empty()) out.push_back(piece);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::uint64_t parse_u64(std::string_view text, const std::string& key) {
  const auto t = trim(text);
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw ParseError(0, key + ": expected a non-negative integer, got '" + t + "'");
  }
  return value;
}

double parse_double(std::string_view text, const std::string& key) {
  const auto t = trim(text);
  try {
    std::size_t used = 0;
    const double v = std::stod(t, &used);
    if (used != t.size()) throw std::invalid_argument(t);
    return v;
  } catch (const std::exception&) {
    throw ParseError(0, key + ": expected a number, got '" + t + "'");
  }
}

bool parse_bool(std::string_view text, const std::string& key) {
  const auto t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ParseError(0, key + ": expected true or false, got '" + t + "'");
}

// Shortest text that parses back to the same value.
std::string format_double(double v) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

}  // namespace

Architecture parse_architecture(std::string_view text) {
  Architecture arch;
  arch.name = trim(text);
  if (auto oracle = eval::parse_oracle(arch.name)) {
    arch.oracle = oracle;
    return arch;
  }
  std::string_view cell = arch.name;
  if (cell.ends_with("+attn")) {
    arch.attention = true;
    cell.remove_suffix(5);
  }
  arch.cell = rnn::parse_cell_kind(cell);
  arch.name = rnn::to_string(arch.cell) + (arch.attention ? "+attn" : "");
  return arch;
}

std::vector<std::uint64_t> parse_seeds(std::string_view text) {
  std::vector<std::uint64_t> seeds;
  for (const auto& piece : split_list(text)) {
    const auto dash = piece.find('-');
    if (dash == std::string::npos) {
      seeds.push_back(parse_u64(piece, "seeds"));
      continue;
    }
    const auto lo = parse_u64(std::string_view(piece).substr(0, dash), "seeds");
    const auto hi = parse_u64(std::string_view(piece).substr(dash + 1), "seeds");
    if (hi < lo) throw ParseError(0, "seeds: empty range " + piece);
    for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
  }
  if (seeds.empty()) throw ParseError(0, "seeds: no seeds given");
  return seeds;
}

std::vector<Architecture> default_architectures() {
  std::vector<Architecture> out;
  for (const char* name : {"SRN", "SRN+attn", "GRU", "GRU+attn", "LSTM", "LSTM+attn"}) {
    out.push_back(parse_architecture(name));
  }
  return out;
}

rnn::ModelConfig ExperimentConfig::run_config(const Architecture& arch,
                                              std::uint64_t seed) const {
  rnn::ModelConfig c = model;
  c.cell = arch.cell;
  c.attention = arch.attention;
  c.seed = seed;
  return c;
}

ExperimentConfig parse_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(e.line(), e.message());
  }

  ExperimentConfig c;
  c.architectures = default_architectures();

  using Setter = std::function<void(const std::string&)>;
  std::string key;
  const std::map<std::string, Setter> setters = {
      {"experiment.languages",
       [&](const std::string& v) {
         c.languages.clear();
         for (const auto& l : split_list(v)) c.languages.push_back(parse_language(l));
         if (c.languages.empty()) throw ParseError(0, "languages: none given");
       }},
      {"experiment.architectures",
       [&](const std::string& v) {
         c.architectures.clear();
         for (const auto& a : split_list(v)) c.architectures.push_back(parse_architecture(a));
       }},
      {"experiment.seeds", [&](const std::string& v) { c.seeds = parse_seeds(v); }},
      {"experiment.output", [&](const std::string& v) { c.output = trim(v); }},
      {"experiment.data_seed", [&](const std::string& v) { c.data_seed = parse_u64(v, key); }},
      {"experiment.object_rc_transitive",
       [&](const std::string& v) { c.object_rc_transitive = parse_bool(v, key); }},
      {"experiment.workers", [&](const std::string& v) { c.workers = parse_u64(v, key); }},
      {"data.train_size", [&](const std::string& v) { c.sizes.train = parse_u64(v, key); }},
      {"data.test_size", [&](const std::string& v) { c.sizes.test = parse_u64(v, key); }},
      {"data.generalization_size",
       [&](const std::string& v) { c.sizes.generalization = parse_u64(v, key); }},
      {"model.hidden_dim", [&](const std::string& v) { c.model.hidden_dim = parse_u64(v, key); }},
      {"model.embedding_dim",
       [&](const std::string& v) { c.model.embedding_dim = parse_u64(v, key); }},
      {"model.dropout", [&](const std::string& v) { c.model.dropout_p = parse_double(v, key); }},
      {"model.learning_rate",
       [&](const std::string& v) {
         if (trim(v) == "auto" || trim(v).empty()) {
           c.model.learning_rate.reset();
         } else {
           c.model.learning_rate = parse_double(v, key);
         }
       }},
      {"model.batches", [&](const std::string& v) { c.model.batches = parse_u64(v, key); }},
      {"model.batch_size", [&](const std::string& v) { c.model.batch_size = parse_u64(v, key); }},
      {"model.teacher_forcing_ratio",
       [&](const std::string& v) { c.model.teacher_forcing_ratio = parse_double(v, key); }},
      {"model.max_input_len",
       [&](const std::string& v) { c.model.max_input_len = parse_u64(v, key); }},
      {"model.max_decode_len",
       [&](const std::string& v) { c.model.max_decode_len = parse_u64(v, key); }},
      {"model.loss_reduction",
       [&](const std::string& v) { c.model.loss_reduction = rnn::parse_loss_reduction(trim(v)); }},
      {"probe.learning_rate",
       [&](const std::string& v) { c.probe.learning_rate = parse_double(v, key); }},
      {"probe.batch_size", [&](const std::string& v) { c.probe.batch_size = parse_u64(v, key); }},
      {"probe.patience", [&](const std::string& v) { c.probe.patience = parse_u64(v, key); }},
      {"probe.max_epochs", [&](const std::string& v) { c.probe.max_epochs = parse_u64(v, key); }},
      {"eval.permutations", [&](const std::string& v) { c.permutations = parse_u64(v, key); }},
  };

  for (const auto& [section, entries] : tree) {
    if (entries.empty() && !entries.data().empty()) {
      throw ParseError(0, "key '" + section + "' is outside any section");
    }
    for (const auto& [name, value] : entries) {
      key = section + "." + name;
      const auto it = setters.find(key);
      if (it == setters.end()) throw ParseError(0, "unknown config key: " + key);
      it->second(value.data());
    }
  }
  if (c.model.batch_size == 0) throw ParseError(0, "model.batch_size must be positive");
  if (!(c.model.dropout_p >= 0.0 && c.model.dropout_p < 1.0)) {
    throw ParseError(0, "model.dropout must be in [0, 1)");
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open config file " + path.string());
  return parse_config(in);
}

std::string format_config(const ExperimentConfig& c) {
  std::ostringstream out;
  auto join = [](const auto& items, auto fn) {
    std::string s;
    for (const auto& item : items) {
      if (!s.empty()) s += ", ";
      s += fn(item);
    }
    return s;
  };
  out << "[experiment]\n"
      << "languages = " << join(c.languages, [](Language l) { return to_string(l); }) << '\n'
      << "architectures = "
      << join(c.architectures, [](const Architecture& a) { return a.name; }) << '\n'
      << "seeds = "
      << join(c.seeds, [](std::uint64_t s) { return std::to_string(s); }) << '\n'
      << "output = " << c.output.string() << '\n'
      << "data_seed = " << c.data_seed << '\n'
      << "object_rc_transitive = " << (c.object_rc_transitive ? "true" : "false") << '\n'
      << "workers = " << c.workers << '\n'
      << "\n[data]\n"
      << "train_size = " << c.sizes.train << '\n'
      << "test_size = " << c.sizes.test << '\n'
      << "generalization_size = " << c.sizes.generalization << '\n'
      << "\n[model]\n"
      << "hidden_dim = " << c.model.hidden_dim << '\n'
      << "embedding_dim = " << c.model.embedding_dim << '\n'
      << "dropout = " << format_double(c.model.dropout_p) << '\n'
      << "learning_rate = "
      << (c.model.learning_rate ? format_double(*c.model.learning_rate) : "auto") << '\n'
      << "batches = " << c.model.batches << '\n'
      << "batch_size = " << c.model.batch_size << '\n'
      << "teacher_forcing_ratio = " << format_double(c.model.teacher_forcing_ratio) << '\n'
      << "max_input_len = " << c.model.max_input_len << '\n'
      << "max_decode_len = " << c.model.max_decode_len << '\n'
      << "loss_reduction = " << rnn::to_string(c.model.loss_reduction) << '\n'
      << "\n[probe]\n"
      << "learning_rate = " << format_double(c.probe.learning_rate) << '\n'
      << "batch_size = " << c.probe.batch_size << '\n'
      << "patience = " << c.probe.patience << '\n'
      << "max_epochs = " << c.probe.max_epochs << '\n'
      << "\n[eval]\n"
      << "permutations = " << c.permutations << '\n';
  return out.str();
}

}  // namespace qform::cli
