#include <doctest.h>

#include "qform/dataset.hpp"
#include "qform/error.hpp"
#include "qform/eval.hpp"
#include "support.hpp"

using namespace qform;
using namespace qform::eval;
using doctest::Approx;

namespace {

Example quest(const Grammar& g, const std::string& s) {
  return make_example(test::annotation_of(g, s), Task::Quest);
}

}  // namespace

TEST_SUITE("eval") {
  TEST_CASE("word match") {
    CHECK(word_match(split_tokens("a b QUEST"), split_tokens("a b QUEST")));
    CHECK_FALSE(word_match(split_tokens("a c QUEST"), split_tokens("a b QUEST")));
    CHECK_FALSE(word_match(split_tokens("a b"), split_tokens("a b QUEST")));
  }

  TEST_CASE("POS match") {
    const auto grammar = build_no_agreement_grammar();
    const auto& lex = grammar.lexicon();
    const auto gold = split_tokens("the walrus can giggle ? QUEST");
    CHECK(pos_match(split_tokens("the yak can swim ? QUEST"), gold, lex));
    CHECK(pos_match(split_tokens("my yaks will swim ? QUEST"), gold, lex));
    CHECK_FALSE(pos_match(split_tokens("the yak can swim . QUEST"), gold, lex));
    CHECK_FALSE(pos_match(split_tokens("the yak can swim ? IDENT"), gold, lex));
    CHECK_FALSE(pos_match(split_tokens("the yak can ? QUEST"), gold, lex));
    CHECK_FALSE(pos_match(split_tokens("the yak can frobnicate ? QUEST"), gold, lex));
    CHECK_FALSE(pos_match(split_tokens("the yak can amuse ? QUEST"), gold, lex));
  }

  TEST_CASE("word match implies POS match") {
    const auto g = build_no_agreement_grammar();
    Rng rng(1);
    for (int i = 0; i < 500; ++i) {
      const auto ann = annotate(g, sample_tree(g, rng));
      auto a = ann.tokens, b = ann.tokens;
      if (rng.bernoulli(0.5)) b[rng.uniform_index(b.size())] = "yak";
      if (word_match(a, b)) CHECK(pos_match(a, b, g.lexicon()));
    }
  }

  TEST_CASE("first auxiliary classification") {
    const auto g = test::with_words(build_no_agreement_grammar({.object_rc_transitive = true}),
                                    {{"seal", {Category::N}}});
    const std::vector<Example> gen{quest(g, "my yak who the seal can amuse will giggle .")};
    const auto& lex = g.lexicon();
    auto b = first_aux_breakdown(gen, {split_tokens("will my yak who the seal can amuse giggle ? QUEST")},
                                 lex, false);
    CHECK(b.main_aux == 1);
    b = first_aux_breakdown(gen, {split_tokens("can my yak who the seal amuse will giggle ? QUEST")}, lex,
                            false);
    CHECK(b.first_aux == 1);
    b = first_aux_breakdown(gen, {split_tokens("would my yak ? QUEST")}, lex, false);
    CHECK(b.other == 1);
    CHECK(b.other_absent_aux == 1);
    b = first_aux_breakdown(gen, {split_tokens("my yak ? QUEST")}, lex, false);
    CHECK(b.other == 1);
    CHECK(b.other_absent_aux == 0);
    CHECK(b.main_aux_rate() + b.first_aux_rate() + b.other_rate() == 1.0);
  }

  TEST_CASE("first auxiliary filter") {
    const auto na = build_no_agreement_grammar();
    CHECK_FALSE(first_aux_eligible(test::annotation_of(na, "the walrus can giggle ."), na.lexicon(), false));
    CHECK_FALSE(first_aux_eligible(test::annotation_of(na, "the newt who can sleep can giggle ."),
                                   na.lexicon(), false));
    CHECK(first_aux_eligible(test::annotation_of(na, "the newt who will sleep can giggle ."),
                             na.lexicon(), false));

    const auto ag = build_agreement_grammar({.object_rc_transitive = true});
    const auto excluded = test::annotation_of(
        ag, "the walruses that the newt does confuse do high_five your peacocks .");
    CHECK_FALSE(first_aux_eligible(excluded, ag.lexicon(), true));
    const auto kept =
        test::annotation_of(ag, "the walruses that the newts don't confuse do high_five your peacocks .");
    CHECK(first_aux_eligible(kept, ag.lexicon(), true));

    const std::vector<Example> only_single{quest(na, "the walrus can giggle .")};
    CHECK_THROWS_AS(first_aux_breakdown(only_single, {split_tokens("can")}, na.lexicon(), false),
                    InvalidArgument);
  }

  TEST_CASE("oracles on a generated split") {
    const auto g = build_no_agreement_grammar();
    Rng rng(3);
    const auto s = build_splits(g, {10, 500, 500}, rng);
    const auto& lex = g.lexicon();
    const OraclePredictor hier(Oracle::Hierarchical), lin(Oracle::Linear), copy(Oracle::Copy);
    CHECK(score_split(s.test, predict_all(hier, s.test), lex).word_match_rate() == 1.0);
    CHECK(score_split(s.generalization, predict_all(hier, s.generalization), lex).word_match_rate() ==
          1.0);
    CHECK(score_split(s.generalization, predict_all(lin, s.generalization), lex).word_match_rate() ==
          0.0);
    CHECK(first_aux_eval(hier, s.generalization, lex, false).main_aux_rate() == 1.0);
    CHECK(first_aux_eval(lin, s.generalization, lex, false).first_aux_rate() == 1.0);

    std::vector<Example> ident;
    for (const auto& ex : s.test) {
      if (ex.task == Task::Ident) ident.push_back(ex);
    }
    REQUIRE_FALSE(ident.empty());
    CHECK(score_split(ident, predict_all(copy, ident), lex).word_match_rate() == 1.0);
    CHECK(parse_oracle("oracle-linear") == Oracle::Linear);
    CHECK_FALSE(parse_oracle("GRU").has_value());
  }

  TEST_CASE("aggregate") {
    MetricsReport a, b;
    a.config = b.config = "GRU";
    a.language = b.language = "no_agreement";
    a.seed = 1;
    b.seed = 2;
    a.first_aux = {10, 0, 10, 0, 0};
    b.first_aux = {10, 10, 0, 0, 0};
    auto s = aggregate({a});
    CHECK(s.metric("main_aux_rate").mean == 0.0);
    CHECK(s.metric("first_aux_rate").max == 1.0);
    s = aggregate({a, b});
    const auto& m = s.metric("main_aux_rate");
    CHECK(m.mean == 0.5);
    CHECK(m.median == 0.5);
    CHECK(m.min == 0.0);
    CHECK(m.max == 1.0);
    CHECK(m.values == std::vector<double>{0.0, 1.0});
    CHECK(s.seeds == std::vector<std::uint64_t>{1, 2});
    CHECK_THROWS_AS(aggregate({}), InvalidArgument);
    b.config = "LSTM";
    CHECK_THROWS_AS(aggregate({a, b}), InvalidArgument);
  }

  TEST_CASE("permutation test") {
    Rng rng(1);
    const std::vector<double> same{0.5, 0.5, 0.5};
    CHECK(permutation_test(same, same, rng, 1000) == 1.0);
    const std::vector<double> lo(10, 0.0), hi(10, 1.0);
    // Only 2 of the C(20,10) = 184756 relabelings are as extreme, so almost
    // every sampled permutation is less extreme than the observed one.
    const double p = permutation_test(lo, hi, rng, 10000);
    CHECK(p <= 3.0 / 10001.0);
    CHECK(p >= 1.0 / 10001.0);
    CHECK_THROWS_AS(permutation_test({1.0}, {0.0, 1.0}, rng), InvalidArgument);
    Rng a(5), b(5);
    const std::vector<double> x{0.1, 0.4, 0.3}, y{0.2, 0.9, 0.8};
    CHECK(permutation_test(x, y, a, 500) == permutation_test(x, y, b, 500));
  }

  TEST_CASE("CSV output") {
    MetricsReport r;
    r.config = "GRU";
    r.language = "agreement";
    r.seed = 3;
    r.first_aux = {4, 1, 3, 0, 0};
    const auto run = format_run_csv({r});
    CHECK(run.starts_with("language,config,seed,metric,value\n"));
    CHECK(run.find("agreement,GRU,3,main_aux_rate,0.250000\n") != std::string::npos);
    const auto scatter = format_scatter_csv({r});
    CHECK(scatter.find("agreement,GRU,3,0.250000,0.750000,0.000000,4") != std::string::npos);
    CHECK(format_summary_csv({aggregate({r})}).find("agreement,GRU,first_aux_rate,1,0.750000") !=
          std::string::npos);
  }
}
