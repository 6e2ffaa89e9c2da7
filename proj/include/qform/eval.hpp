#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qform/dataset.hpp"
#include "qform/grammar.hpp"
#include "qform/rng.hpp"
#include "qform/rnn/seq2seq.hpp"
#include "qform/vocab.hpp"

namespace qform::eval {

/// Exact token-sequence equality, task token included.
bool word_match(const Tokens& predicted, const Tokens& gold);

/// Equal length, and every predicted token shares its gold token's lexical
/// category. Punctuation and task tokens must match exactly; a predicted
/// token outside the lexicon never matches.
bool pos_match(const Tokens& predicted, const Tokens& gold, const Lexicon& lexicon);

/// Anything that maps an example's input to an output token sequence.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual std::string name() const = 0;
  virtual Tokens predict(const Example& example) const = 0;
};

class ModelPredictor : public Predictor {
 public:
  ModelPredictor(const rnn::Seq2Seq<float>& model, const Vocabulary& vocab)
      : model_(model), vocab_(vocab) {}
  std::string name() const override { return model_.config().architecture(); }
  Tokens predict(const Example& example) const override;

 private:
  const rnn::Seq2Seq<float>& model_;
  const Vocabulary& vocab_;
};

/// Reference pseudo-models built from the transformation oracles. All three
/// handle identity examples by copying; they differ on questions.
enum class Oracle { Copy, Hierarchical, Linear };

std::string to_string(Oracle oracle);
/// Accepts "oracle-copy", "oracle-hierarchical" and "oracle-linear".
std::optional<Oracle> parse_oracle(std::string_view name);

class OraclePredictor : public Predictor {
 public:
  explicit OraclePredictor(Oracle oracle) : oracle_(oracle) {}
  std::string name() const override { return to_string(oracle_); }
  Tokens predict(const Example& example) const override;

 private:
  Oracle oracle_;
};

std::vector<Tokens> predict_all(const Predictor& predictor,
                                const std::vector<Example>& examples);

struct SplitMetrics {
  std::size_t total = 0;
  std::size_t word_matches = 0;
  std::size_t pos_matches = 0;

  double word_match_rate() const;
  double pos_match_rate() const;
};

SplitMetrics score_split(const std::vector<Example>& examples,
                         const std::vector<Tokens>& outputs,
                         const Lexicon& lexicon);

/// Classification of the first output word on generalization examples whose
/// linearly first and main auxiliaries differ.
struct FirstAuxBreakdown {
  std::size_t evaluated = 0;
  std::size_t main_aux = 0;
  std::size_t first_aux = 0;
  std::size_t other = 0;
  /// Part of `other`: an auxiliary that does not occur in the input.
  std::size_t other_absent_aux = 0;

  double main_aux_rate() const;
  double first_aux_rate() const;
  double other_rate() const;
};

/// True when the example takes part in the first-auxiliary diagnostic.
/// With agreement, both candidate auxiliaries must agree with the matrix
/// subject.
bool first_aux_eligible(const SentenceAnnotation& annotation,
                        const Lexicon& lexicon, bool agreement);

/// Throws InvalidArgument when no example passes the filter.
FirstAuxBreakdown first_aux_breakdown(const std::vector<Example>& generalization,
                                      const std::vector<Tokens>& outputs,
                                      const Lexicon& lexicon, bool agreement);

FirstAuxBreakdown first_aux_eval(const Predictor& predictor,
                                 const std::vector<Example>& generalization,
                                 const Lexicon& lexicon, bool agreement);

struct MetricsReport {
  std::string config;  // architecture label
  std::string language;
  std::uint64_t seed = 0;
  SplitMetrics test;
  SplitMetrics generalization;
  FirstAuxBreakdown first_aux;

  /// Named scalar metrics in a fixed order.
  std::vector<std::pair<std::string, double>> values() const;
};

struct MetricSummary {
  std::string metric;
  std::vector<double> values;  // per run, in input order
  double mean = 0;
  double median = 0;
  double min = 0;
  double max = 0;
};

struct Summary {
  std::string config;
  std::string language;
  std::vector<std::uint64_t> seeds;
  std::vector<MetricSummary> metrics;

  const MetricSummary& metric(std::string_view name) const;
};

/// Runs must share config and language. Throws InvalidArgument on none.
Summary aggregate(const std::vector<MetricsReport>& runs);

/// Two-sided permutation test on the difference of means, returning
/// (1 + #{|perm diff| >= |observed diff|}) / (1 + permutations).
double permutation_test(const std::vector<double>& a, const std::vector<double>& b,
                        Rng& rng, std::size_t permutations = 10000);

/// Permutation test on per-seed main_aux_rate. Needs two runs per side.
double compare_languages(const Summary& agreement, const Summary& no_agreement,
                         Rng& rng, std::size_t permutations = 10000);

// CSV output. Numbers are printed with fixed precision so reruns are
// byte-identical.

std::string format_number(double value);
/// language,config,seed,metric,value
std::string format_run_csv(const std::vector<MetricsReport>& runs);
/// language,config,metric,n,mean,median,min,max
std::string format_summary_csv(const std::vector<Summary>& summaries);
/// language,config,seed,main_aux_rate,first_aux_rate,other_rate,evaluated
std::string format_scatter_csv(const std::vector<MetricsReport>& runs);

}  // namespace qform::eval
