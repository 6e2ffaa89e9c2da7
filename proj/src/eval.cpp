#include "qform/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "qform/error.hpp"
#include "qform/transform.hpp"

namespace qform::eval {

bool word_match(const Tokens& predicted, const Tokens& gold) {
  return predicted == gold;
}

bool pos_match(const Tokens& predicted, const Tokens& gold, const Lexicon& lexicon) {
  if (predicted.size() != gold.size()) return false;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const LexEntry* g = lexicon.find(gold[i]);
    const LexEntry* p = lexicon.find(predicted[i]);
    if (!g || !p) return false;
    if (g->category == Category::Punct || g->category == Category::Task) {
      if (predicted[i] != gold[i]) return false;
    } else if (p->category != g->category) {
      return false;
    }
  }
  return true;
}

Tokens ModelPredictor::predict(const Example& example) const {
  const auto ids = model_.predict(vocab_.encode(example.input));
  return vocab_.decode(ids);
}

std::string to_string(Oracle oracle) {
  switch (oracle) {
    case Oracle::Copy: return "oracle-copy";
    case Oracle::Hierarchical: return "oracle-hierarchical";
    case Oracle::Linear: return "oracle-linear";
  }
  return "?";
}

std::optional<Oracle> parse_oracle(std::string_view name) {
  for (Oracle o : {Oracle::Copy, Oracle::Hierarchical, Oracle::Linear}) {
    if (name == to_string(o)) return o;
  }
  return std::nullopt;
}

Tokens OraclePredictor::predict(const Example& example) const {
  Tokens out;
  if (example.task == Task::Ident || oracle_ == Oracle::Copy) {
    out = identity_task(example.annotation);
  } else if (oracle_ == Oracle::Hierarchical) {
    out = hierarchical_question(example.annotation);
  } else {
    out = linear_question(example.annotation);
  }
  out.emplace_back(to_string(example.task));
  return out;
}

std::vector<Tokens> predict_all(const Predictor& predictor,
                                const std::vector<Example>& examples) {
  std::vector<Tokens> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) out.push_back(predictor.predict(ex));
  return out;
}

namespace {

double rate(std::size_t part, std::size_t whole) {
  return whole == 0 ? 0.0 : static_cast<double>(part) / static_cast<double>(whole);
}

void require_parallel(std::size_t a, std::size_t b) {
  if (a != b) throw InvalidArgument("outputs and examples differ in length");
}

}  // namespace

double SplitMetrics::word_match_rate() const { return rate(word_matches, total); }
double SplitMetrics::pos_match_rate() const { return rate(pos_matches, total); }

SplitMetrics score_split(const std::vector<Example>& examples,
                         const std::vector<Tokens>& outputs,
                         const Lexicon& lexicon) {
  require_parallel(examples.size(), outputs.size());
  SplitMetrics m;
  m.total = examples.size();
  for (std::size_t i = 0; i < examples.size(); ++i) {
    m.word_matches += word_match(outputs[i], examples[i].target);
    m.pos_matches += pos_match(outputs[i], examples[i].target, lexicon);
  }
  return m;
}

double FirstAuxBreakdown::main_aux_rate() const { return rate(main_aux, evaluated); }
double FirstAuxBreakdown::first_aux_rate() const { return rate(first_aux, evaluated); }
double FirstAuxBreakdown::other_rate() const { return rate(other, evaluated); }

bool first_aux_eligible(const SentenceAnnotation& annotation,
                        const Lexicon& lexicon, bool agreement) {
  if (annotation.aux_indices.size() < 2) return false;
  const std::string& first = annotation.first_aux();
  const std::string& main = annotation.main_aux();
  if (first == main) return false;
  if (agreement) {
    for (const auto* word : {&first, &main}) {
      const LexEntry* e = lexicon.find(*word);
      if (!e || e->number != annotation.subject_number) return false;
    }
  }
  return true;
}

FirstAuxBreakdown first_aux_breakdown(const std::vector<Example>& generalization,
                                      const std::vector<Tokens>& outputs,
                                      const Lexicon& lexicon, bool agreement) {
  require_parallel(generalization.size(), outputs.size());
  FirstAuxBreakdown b;
  for (std::size_t i = 0; i < generalization.size(); ++i) {
    const auto& a = generalization[i].annotation;
    if (!first_aux_eligible(a, lexicon, agreement)) continue;
    ++b.evaluated;
    const std::string word = outputs[i].empty() ? std::string() : outputs[i].front();
    if (word == a.main_aux()) {
      ++b.main_aux;
    } else if (word == a.first_aux()) {
      ++b.first_aux;
    } else {
      ++b.other;
      const LexEntry* e = lexicon.find(word);
      if (e && e->category == Category::Aux &&
          std::find(a.tokens.begin(), a.tokens.end(), word) == a.tokens.end()) {
        ++b.other_absent_aux;
      }
    }
  }
  if (b.evaluated == 0) {
    throw InvalidArgument("first-auxiliary filter left no examples");
  }
  return b;
}

FirstAuxBreakdown first_aux_eval(const Predictor& predictor,
                                 const std::vector<Example>& generalization,
                                 const Lexicon& lexicon, bool agreement) {
  std::vector<Tokens> outputs(generalization.size());
  for (std::size_t i = 0; i < generalization.size(); ++i) {
    if (first_aux_eligible(generalization[i].annotation, lexicon, agreement)) {
      outputs[i] = predictor.predict(generalization[i]);
    }
  }
  return first_aux_breakdown(generalization, outputs, lexicon, agreement);
}

std::vector<std::pair<std::string, double>> MetricsReport::values() const {
  return {
      {"test_word_match", test.word_match_rate()},
      {"test_pos_match", test.pos_match_rate()},
      {"gen_word_match", generalization.word_match_rate()},
      {"gen_pos_match", generalization.pos_match_rate()},
      {"main_aux_rate", first_aux.main_aux_rate()},
      {"first_aux_rate", first_aux.first_aux_rate()},
      {"other_rate", first_aux.other_rate()},
      {"other_absent_aux_rate", rate(first_aux.other_absent_aux, first_aux.evaluated)},
      {"first_aux_evaluated", static_cast<double>(first_aux.evaluated)},
  };
}

const MetricSummary& Summary::metric(std::string_view name) const {
  for (const auto& m : metrics) {
    if (m.metric == name) return m;
  }
  throw InvalidArgument("no metric named " + std::string(name));
}

Summary aggregate(const std::vector<MetricsReport>& runs) {
  if (runs.empty()) throw InvalidArgument("aggregate needs at least one run");
  Summary s;
  s.config = runs.front().config;
  s.language = runs.front().language;
  for (const auto& r : runs) {
    if (r.config != s.config || r.language != s.language) {
      throw InvalidArgument("aggregate over mixed configurations");
    }
    s.seeds.push_back(r.seed);
  }
  const auto names = runs.front().values();
  for (std::size_t k = 0; k < names.size(); ++k) {
    MetricSummary m;
    m.metric = names[k].first;
    for (const auto& r : runs) m.values.push_back(r.values()[k].second);
    auto sorted = m.values;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    m.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(n);
    m.median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    m.min = sorted.front();
    m.max = sorted.back();
    s.metrics.push_back(std::move(m));
  }
  return s;
}

double permutation_test(const std::vector<double>& a, const std::vector<double>& b,
                        Rng& rng, std::size_t permutations) {
  if (a.size() < 2 || b.size() < 2) {
    throw InvalidArgument("permutation test needs at least two values per side");
  }
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  const double total = std::accumulate(pooled.begin(), pooled.end(), 0.0);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  auto diff = [&](const std::vector<double>& values) {
    const double sa = std::accumulate(values.begin(), values.begin() + a.size(), 0.0);
    return std::abs(sa / na - (total - sa) / nb);
  };
  const double observed = diff(pooled);
  // Guards against summation-order noise counting as a smaller statistic.
  const double slack = 1e-12 * std::max(1.0, observed);
  std::size_t extreme = 0;
  for (std::size_t p = 0; p < permutations; ++p) {
    for (std::size_t i = pooled.size() - 1; i > 0; --i) {
      std::swap(pooled[i], pooled[rng.uniform_index(i + 1)]);
    }
    if (diff(pooled) >= observed - slack) ++extreme;
  }
  return static_cast<double>(1 + extreme) / static_cast<double>(1 + permutations);
}

double compare_languages(const Summary& agreement, const Summary& no_agreement,
                         Rng& rng, std::size_t permutations) {
  return permutation_test(agreement.metric("main_aux_rate").values,
                          no_agreement.metric("main_aux_rate").values, rng,
                          permutations);
}

std::string format_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  return buf;
}

std::string format_run_csv(const std::vector<MetricsReport>& runs) {
  std::ostringstream out;
  out << "language,config,seed,metric,value\n";
  for (const auto& r : runs) {
    for (const auto& [name, value] : r.values()) {
      out << r.language << ',' << r.config << ',' << r.seed << ',' << name << ','
          << format_number(value) << '\n';
    }
  }
  return out.str();
}

std::string format_summary_csv(const std::vector<Summary>& summaries) {
  std::ostringstream out;
  out << "language,config,metric,n,mean,median,min,max\n";
  for (const auto& s : summaries) {
    for (const auto& m : s.metrics) {
      out << s.language << ',' << s.config << ',' << m.metric << ','
          << m.values.size() << ',' << format_number(m.mean) << ','
          << format_number(m.median) << ',' << format_number(m.min) << ','
          << format_number(m.max) << '\n';
    }
  }
  return out.str();
}

std::string format_scatter_csv(const std::vector<MetricsReport>& runs) {
  std::ostringstream out;
  out << "language,config,seed,main_aux_rate,first_aux_rate,other_rate,evaluated\n";
  for (const auto& r : runs) {
    out << r.language << ',' << r.config << ',' << r.seed << ','
        << format_number(r.first_aux.main_aux_rate()) << ','
        << format_number(r.first_aux.first_aux_rate()) << ','
        << format_number(r.first_aux.other_rate()) << ',' << r.first_aux.evaluated
        << '\n';
  }
  return out.str();
}

}  // namespace qform::eval
