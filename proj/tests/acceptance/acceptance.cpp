// Acceptance checks. Run `acceptance N` for one criterion or `acceptance` for
// all of them; each prints one PASS/FAIL line.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include "qform/analysis.hpp"
#include "qform/cli/commands.hpp"
#include "qform/cli/io.hpp"
#include "qform/dataset.hpp"
#include "qform/eval.hpp"
#include "qform/grammar.hpp"
#include "qform/grammar_parse.hpp"
#include "qform/probe.hpp"
#include "qform/rnn/seq2seq.hpp"
#include "qform/rnn/train.hpp"
#include "qform/transform.hpp"

using namespace qform;
namespace fs = std::filesystem;

namespace {

// Tolerances and thresholds.
constexpr double kLanguageSizeFloor = 1e15;
constexpr std::size_t kMaxSentenceLength = 17;
constexpr std::size_t kFourthWordClasses = 28;
constexpr double kFreqTolerance = 0.01;
constexpr std::size_t kOracleSample = 10000;
constexpr double kCellTolerance = 1e-6;
constexpr double kGradTolerance = 1e-3;
constexpr double kGradEps = 1e-4;
constexpr std::uint64_t kGradSeeds = 10;
constexpr double kLstmWordMatch = 0.9;
constexpr double kLstmPosMatch = 0.95;
constexpr double kPresentAuxFloor = 0.9;
constexpr double kProbeSeparable = 0.99;
constexpr double kProbeChanceBand = 0.05;
constexpr double kTaxonomyTotalTolerance = 0.01;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome grammar_fidelity() {
  Outcome o{true, ""};
  std::ostringstream d;
  for (const auto& g : {build_no_agreement_grammar(), build_agreement_grammar()}) {
    const auto& lex = g.lexicon();
    const std::size_t sizes[] = {lex.count(Category::Det),      lex.count(Category::N),
                                 lex.count(Category::Vintrans), lex.count(Category::Vtrans),
                                 lex.count(Category::Aux),      lex.count(Category::P),
                                 lex.count(Category::Rel)};
    const std::size_t expected[] = {6, 26, 9, 9, 4, 8, 2};
    const bool lex_ok = std::equal(std::begin(sizes), std::end(sizes), std::begin(expected));
    const std::size_t vocab = lex.size() - lex.count(Category::Task);

    std::size_t longest = 0;
    std::set<std::string> fourth;
    for (const auto& sk : enumerate_skeletons(g)) {
      longest = std::max(longest, sk.size());
      if (sk.size() > 3) {
        for (const auto& w : g.words_for(sk[3])) fourth.insert(w);
      }
    }
    const double size = static_cast<double>(count_sentences(g));
    const bool ok = lex_ok && vocab == 66 && longest <= kMaxSentenceLength &&
                    fourth.size() == kFourthWordClasses && size > kLanguageSizeFloor;
    o.pass = o.pass && ok;
    d << g.id() << ": lexicon " << (lex_ok ? "6/26/9/9/4/8/2" : "MISMATCH") << ", vocab " << vocab
      << ", max length " << longest << ", fourth-word classes " << fourth.size()
      << ", language size " << fmt("%.4g", size) << (size > kLanguageSizeFloor ? "" : " (<= 1e15)")
      << "; ";
  }
  o.detail = d.str();
  return o;
}

// ---------------------------------------------------------------------------

Outcome distribution() {
  // Expected (identity, question) fractions for the no-agreement training set.
  const double table[kSentenceTypeCount][2] = {
      {0.012, 0.012}, {0.122, 0.125}, {0.121, 0.000},                  // intransitive
      {0.040, 0.040}, {0.041, 0.041}, {0.041, 0.041}, {0.041, 0.000},  // transitive
      {0.041, 0.041}, {0.040, 0.040}, {0.041, 0.041}, {0.041, 0.000}, {0.040, 0.000},
  };
  const auto g = build_no_agreement_grammar();
  Rng rng(1);
  const auto splits = build_splits(g, {}, rng);
  const auto t = frequency_report(splits.train);
  bool ok = splits.train.size() == 120000;
  double worst = 0;
  std::string worst_cell;
  for (std::size_t r = 0; r < kSentenceTypeCount; ++r) {
    for (int k = 0; k < 2; ++k) {
      const double got = t.fraction[r][k];
      const double want = table[r][k];
      if (want == 0.0) {
        ok = ok && got == 0.0;
        continue;
      }
      const double dev = std::abs(got - want);
      if (dev > worst) {
        worst = dev;
        worst_cell = sentence_type_label(sentence_type_from_row(r)) + (k ? " QUEST" : " IDENT") +
                     " " + fmt("%.4f", got) + " vs " + fmt("%.3f", want);
      }
    }
  }
  ok = ok && worst <= kFreqTolerance;
  return {ok, "120000 train examples; withheld cells exactly 0; largest deviation " +
                  fmt("%.4f", worst) + " at " + worst_cell};
}

// ---------------------------------------------------------------------------

Outcome oracle_equivalence() {
  const auto g = build_no_agreement_grammar();
  const auto questions = make_question_grammar(g, GapScope::AnyClause);
  Rng rng(7);
  std::size_t disagreements = 0, rc_subjects = 0, mismatched = 0, unparsed = 0;
  for (std::size_t i = 0; i < kOracleSample; ++i) {
    const auto a = annotate(g, sample_tree(g, rng));
    const auto h = hierarchical_question(a);
    const auto l = linear_question(a);
    const bool rc = a.sentence_type.subject == Modifier::RC;
    rc_subjects += rc;
    disagreements += h != l;
    mismatched += (h != l) != rc;
    unparsed += !recognizes(questions, h);
    unparsed += !recognizes(questions, l);
  }
  return {mismatched == 0 && unparsed == 0,
          std::to_string(kOracleSample) + " sentences, " + std::to_string(rc_subjects) +
              " with subject RC, " + std::to_string(disagreements) + " disagreements, " +
              std::to_string(mismatched) + " off the subject-RC subset, " +
              std::to_string(unparsed) + " outputs rejected by the question grammar"};
}

// ---------------------------------------------------------------------------

double sig(double v) { return 1.0 / (1.0 + std::exp(-v)); }

double affine(const nn::Linear<double>& l, const std::vector<double>& v, std::size_t j) {
  double s = l.bias.value[j];
  for (std::size_t k = 0; k < v.size(); ++k) s += l.weight.value.at(j, k) * v[k];
  return s;
}

Outcome numerical_correctness() {
  using rnn::CellKind;
  const CellKind kinds[] = {CellKind::SRN, CellKind::GRU, CellKind::LSTM};
  const std::size_t H = 3, X = 4;
  double worst_cell = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    for (CellKind kind : kinds) {
      rnn::RecurrentCell<double> cell("c", kind, X, H);
      cell.init(rng);
      rnn::CellState<double> prev;
      for (std::size_t j = 0; j < H; ++j) prev.h.push_back(rng.uniform(-1, 1));
      if (kind == CellKind::LSTM) {
        for (std::size_t j = 0; j < H; ++j) prev.c.push_back(rng.uniform(-2, 2));
      }
      std::vector<double> x(X);
      for (double& v : x) v = rng.normal();
      const auto out = cell.step(prev, x).out;
      auto u = prev.h;
      u.insert(u.end(), x.begin(), x.end());
      const auto& L = cell.layers();
      for (std::size_t j = 0; j < H; ++j) {
        double h = 0;
        if (kind == CellKind::SRN) {
          h = std::tanh(affine(L[0], u, j));
        } else if (kind == CellKind::GRU) {
          const double r = sig(affine(L[0], u, j)), z = sig(affine(L[1], u, j));
          const double n = std::tanh(affine(L[2], x, j) + r * affine(L[3], prev.h, j));
          h = z * prev.h[j] + (1 - z) * n;
        } else {
          const double i = sig(affine(L[0], u, j)), f = sig(affine(L[1], u, j));
          const double g = std::tanh(affine(L[2], u, j)), o = sig(affine(L[3], u, j));
          const double c = f * prev.c[j] + i * g;
          h = o * std::tanh(c);
          worst_cell = std::max(worst_cell, std::abs(c - out.c[j]));
        }
        worst_cell = std::max(worst_cell, std::abs(h - out.h[j]));
      }
    }
  }

  double worst_grad = 0;
  const std::vector<std::size_t> in{0, 1, 2}, tg{3, 1, 4};
  for (CellKind kind : kinds) {
    for (bool attention : {false, true}) {
      for (std::uint64_t seed = 1; seed <= kGradSeeds; ++seed) {
        rnn::ModelConfig c;
        c.cell = kind;
        c.attention = attention;
        c.hidden_dim = 4;
        c.embedding_dim = 3;
        c.max_input_len = 5;
        rnn::Seq2Seq<double> m(c, 6, {4, 5});
        Rng init(seed);
        m.init(init);
        Rng r(1000 + seed);
        m.train_example(in, tg, true, r, 1.0 / static_cast<double>(tg.size()));
        for (auto* p : m.parameters()) {
          for (std::size_t i = 0; i < p->value.size(); ++i) {
            const double old = p->value[i];
            p->value[i] = old + kGradEps;
            Rng r1(1000 + seed);
            const double up = m.loss(in, tg, true, r1);
            p->value[i] = old - kGradEps;
            Rng r2(1000 + seed);
            const double down = m.loss(in, tg, true, r2);
            p->value[i] = old;
            const double fd = (up - down) / (2 * kGradEps);
            const double g = p->grad[i];
            worst_grad = std::max(worst_grad, std::abs(fd - g) / std::max(1e-6, std::abs(fd) + std::abs(g)));
          }
        }
      }
    }
  }
  return {worst_cell < kCellTolerance && worst_grad < kGradTolerance,
          "cells (hidden 3, 20 draws each) max abs error " + fmt("%.2e", worst_cell) +
              "; gradients (6 architectures x " + std::to_string(kGradSeeds) +
              " seeds) max relative error " + fmt("%.2e", worst_grad)};
}

// ---------------------------------------------------------------------------

Outcome full_scale_lstm() {
  const auto g = build_agreement_grammar();
  Rng data_rng(1);
  const auto splits = build_splits(g, {}, data_rng);
  const auto vocab = build_vocabulary(splits, g.lexicon());
  rnn::ModelConfig c;
  c.cell = rnn::CellKind::LSTM;
  c.attention = false;
  Rng rng(1);
  const auto start = std::chrono::steady_clock::now();
  const auto trained = rnn::train_run(c, rnn::encode_examples(splits.train, vocab), vocab.size(),
                                      rnn::task_token_ids(vocab), rng);
  const double minutes =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() / 60.0;
  const eval::ModelPredictor predictor(trained.model, vocab);
  const auto m = eval::score_split(splits.test, eval::predict_all(predictor, splits.test), g.lexicon());
  return {m.word_match_rate() >= kLstmWordMatch && m.pos_match_rate() >= kLstmPosMatch,
          "LSTM, agreement language, 256 dims, 30000 batches of 5: test word-match " +
              fmt("%.4f", m.word_match_rate()) + ", POS-match " + fmt("%.4f", m.pos_match_rate()) +
              ", final loss " + fmt("%.4f", trained.loss_trace.back()) + ", " +
              fmt("%.1f", minutes) + " min"};
}

// ---------------------------------------------------------------------------

Outcome reduced_sweep_and_oracles() {
  const auto g = build_no_agreement_grammar();
  const auto& lex = g.lexicon();
  Rng data_rng(1);
  const auto splits = build_splits(g, {}, data_rng);
  const auto vocab = build_vocabulary(splits, lex);
  const auto train = rnn::encode_examples(splits.train, vocab);

  bool ok = true;
  std::ostringstream d;
  d << "GRU hidden 64, 10000 batches:";
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    rnn::ModelConfig c;
    c.cell = rnn::CellKind::GRU;
    c.hidden_dim = c.embedding_dim = 64;
    c.batches = 10000;
    Rng rng(seed);
    const auto trained = rnn::train_run(c, train, vocab.size(), rnn::task_token_ids(vocab), rng);
    const eval::ModelPredictor predictor(trained.model, vocab);
    const auto outputs = eval::predict_all(predictor, splits.generalization);
    const auto b = eval::first_aux_breakdown(splits.generalization, outputs, lex, false);
    const bool sums = b.main_aux + b.first_aux + b.other == b.evaluated &&
                      std::abs(b.main_aux_rate() + b.first_aux_rate() + b.other_rate() - 1.0) < 1e-12;
    std::size_t present = 0;
    for (std::size_t i = 0; i < outputs.size(); ++i) {
      const auto& a = splits.generalization[i].annotation;
      if (!eval::first_aux_eligible(a, lex, false) || outputs[i].empty()) continue;
      const auto* e = lex.find(outputs[i].front());
      if (e && e->category == Category::Aux &&
          std::find(a.tokens.begin(), a.tokens.end(), outputs[i].front()) != a.tokens.end()) {
        ++present;
      }
    }
    const double frac = static_cast<double>(present) / static_cast<double>(b.evaluated);
    ok = ok && sums && frac >= kPresentAuxFloor;
    d << " seed " << seed << " main/first/other " << fmt("%.3f", b.main_aux_rate()) << "/"
      << fmt("%.3f", b.first_aux_rate()) << "/" << fmt("%.3f", b.other_rate())
      << " present-aux " << fmt("%.3f", frac) << (sums ? "" : " (does not sum)") << ";";
  }

  const eval::OraclePredictor hier(eval::Oracle::Hierarchical), lin(eval::Oracle::Linear);
  const double hier_main = eval::first_aux_eval(hier, splits.generalization, lex, false).main_aux_rate();
  const double lin_first = eval::first_aux_eval(lin, splits.generalization, lex, false).first_aux_rate();
  const auto th = analysis::taxonomy_table(splits.generalization,
                                           eval::predict_all(hier, splits.generalization), lex);
  const auto tl = analysis::taxonomy_table(splits.generalization,
                                           eval::predict_all(lin, splits.generalization), lex);
  using analysis::Deleted;
  using analysis::Preposed;
  const bool oracles = hier_main == 1.0 && lin_first == 1.0 &&
                       th.percent(Deleted::Second, Preposed::Second) == 100.0 &&
                       tl.percent(Deleted::First, Preposed::First) == 100.0;
  d << " oracles: hierarchical main_aux_rate " << fmt("%.3f", hier_main) << " ("
    << fmt("%.1f", th.percent(Deleted::Second, Preposed::Second))
    << "% prepose 2nd/delete 2nd), linear first_aux_rate " << fmt("%.3f", lin_first) << " ("
    << fmt("%.1f", tl.percent(Deleted::First, Preposed::First)) << "% prepose 1st/delete 1st)";
  return {ok && oracles, d.str()};
}

// ---------------------------------------------------------------------------

Outcome probe_machinery() {
  const std::pair<probe::LabelKind, std::size_t> kinds[] = {{probe::LabelKind::MainAux, 4},
                                                            {probe::LabelKind::FourthWord, 28},
                                                            {probe::LabelKind::SubjectNoun, 26}};
  bool ok = true;
  std::ostringstream d;
  for (const auto& [kind, n] : kinds) {
    Rng rng(11 + n);
    std::vector<probe::LabeledEncoding> data;
    for (std::size_t i = 0; i < 5000; ++i) {
      const std::size_t k = rng.uniform_index(n);
      probe::LabeledEncoding e;
      e.encoding.assign(n, 0.0f);
      e.encoding[k] = 1.0f;
      e.main_aux = e.fourth_word = e.subject_noun = "class" + std::to_string(k);
      data.push_back(std::move(e));
    }
    const auto clean = probe::train_probe(data, kind, rng);
    auto shuffled = data;
    for (std::size_t i = shuffled.size(); i > 1; --i) {
      std::swap(shuffled[i - 1].encoding, shuffled[rng.uniform_index(i)].encoding);
    }
    const auto control = probe::train_probe(shuffled, kind, rng);
    const bool k_ok = clean.test_accuracy >= kProbeSeparable &&
                      std::abs(control.test_accuracy - control.chance) <= kProbeChanceBand &&
                      clean.n_classes() == n;
    ok = ok && k_ok;
    d << probe::to_string(kind) << " (" << n << " classes): one-hot " << fmt("%.4f", clean.test_accuracy)
      << ", shuffled " << fmt("%.4f", control.test_accuracy) << " vs chance "
      << fmt("%.4f", control.chance) << "; ";
  }
  return {ok, d.str()};
}

// ---------------------------------------------------------------------------

Outcome taxonomy_soundness() {
  const auto g = build_no_agreement_grammar();
  const auto& lex = g.lexicon();
  Rng data_rng(3);
  const auto splits = build_splits(g, {20000, 100, 2000}, data_rng);
  const auto vocab = build_vocabulary(splits, lex);

  // Outputs from a small trained network plus systematic constructions and
  // corruptions, so every cell and the uncategorized bucket are exercised.
  rnn::ModelConfig c;
  c.hidden_dim = c.embedding_dim = 32;
  c.batches = 2000;
  Rng rng(5);
  const auto trained = rnn::train_run(c, rnn::encode_examples(splits.train, vocab), vocab.size(),
                                      rnn::task_token_ids(vocab), rng);
  const eval::ModelPredictor model(trained.model, vocab);

  std::vector<Example> inputs;
  std::vector<Tokens> outputs;
  const auto aux_words = lex.words_matching(Category::Aux, Number::None);
  for (const auto& ex : splits.generalization) {
    inputs.push_back(ex);
    outputs.push_back(model.predict(ex));
    const auto& a = ex.annotation;
    const auto& p = aux_words[rng.uniform_index(aux_words.size())];
    std::optional<std::size_t> d;
    if (rng.bernoulli(0.75)) d = a.aux_indices[rng.uniform_index(a.aux_indices.size())];
    auto built = analysis::construct_question(a.tokens, p, d);
    if (rng.bernoulli(0.2)) built[1 + rng.uniform_index(built.size() - 1)] = "yak";
    inputs.push_back(ex);
    outputs.push_back(built);
  }

  analysis::TaxonomyTable table;
  std::size_t categorized = 0, rebuilt = 0;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    const auto cat = analysis::categorize(inputs[i].annotation, outputs[i], lex);
    table.add(cat);
    if (!cat.categorized) continue;
    ++categorized;
    Tokens body = outputs[i];
    if (!body.empty() && parse_task(body.back())) body.pop_back();
    rebuilt += analysis::construct_question(inputs[i].annotation.tokens, cat.preposed_word,
                                            cat.deleted_index) == body;
  }
  double total = table.uncategorized_percent();
  using analysis::Deleted;
  using analysis::Preposed;
  for (Deleted d : {Deleted::First, Deleted::Second, Deleted::None}) {
    for (Preposed p : {Preposed::First, Preposed::Second, Preposed::Other}) total += table.percent(d, p);
  }
  return {categorized > 0 && rebuilt == categorized && std::abs(total - 100.0) <= kTaxonomyTotalTolerance,
          std::to_string(outputs.size()) + " outputs, " + std::to_string(categorized) +
              " categorized, " + std::to_string(rebuilt) + " rebuilt exactly; cells + uncategorized = " +
              fmt("%.6f", total) + "%"};
}

// ---------------------------------------------------------------------------

Outcome determinism() {
  const auto root = fs::temp_directory_path() / "qform-acceptance-determinism";
  fs::remove_all(root);
  auto make = [&](const std::string& name) {
    cli::ExperimentConfig c;
    c.languages = {cli::Language::Agreement, cli::Language::NoAgreement};
    c.architectures = {cli::parse_architecture("GRU+attn"), cli::parse_architecture("LSTM"),
                       cli::parse_architecture("SRN")};
    c.seeds = {1, 2};
    c.workers = 1;
    c.sizes = {5000, 500, 500};
    c.model.hidden_dim = c.model.embedding_dim = 24;
    c.model.batches = 300;
    c.permutations = 1000;
    c.output = root / name;
    return c;
  };
  const cli::CommandOptions quiet;
  for (const char* name : {"a", "b"}) {
    const auto c = make(name);
    cli::cmd_gen_data(c, quiet);
    cli::cmd_train(c, quiet);
    cli::cmd_eval(c, quiet);
    cli::cmd_probe(c, quiet);
    cli::cmd_analyze(c, quiet);
    cli::cmd_report(c, quiet);
  }
  std::size_t files = 0, differing = 0, checkpoints = 0, csvs = 0;
  std::string first_diff;
  for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), root / "a");
    ++files;
    checkpoints += rel.filename() == "checkpoint.bin";
    csvs += rel.extension() == ".csv";
    const auto other = root / "b" / rel;
    if (!fs::exists(other) || cli::read_file(e.path()) != cli::read_file(other)) {
      if (differing++ == 0) first_diff = rel.string();
    }
  }
  fs::remove_all(root);
  return {differing == 0 && checkpoints == 12 && files > 0,
          std::to_string(files) + " files compared (" + std::to_string(checkpoints) +
              " checkpoints, " + std::to_string(csvs) + " CSVs), " + std::to_string(differing) +
              " differ" + (first_diff.empty() ? "" : ", first: " + first_diff)};
}

struct Criterion {
  const char* name;
  Outcome (*run)();
};

const Criterion kCriteria[] = {
    {"grammar fidelity", grammar_fidelity},
    {"distributional reproduction", distribution},
    {"oracle equivalence", oracle_equivalence},
    {"numerical correctness", numerical_correctness},
    {"trainability at full scale", full_scale_lstm},
    {"reduced sweep and oracle pipelines", reduced_sweep_and_oracles},
    {"probe machinery", probe_machinery},
    {"taxonomy soundness", taxonomy_soundness},
    {"determinism", determinism},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::stoi(argv[i]));
  if (selected.empty()) {
    for (int i = 1; i <= 9; ++i) selected.push_back(i);
  }
  int failures = 0;
  for (int n : selected) {
    if (n < 1 || n > 9) {
      std::cerr << "no criterion " << n << '\n';
      return 2;
    }
    const auto& c = kCriteria[n - 1];
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << "criterion " << n << " " << (o.pass ? "PASS" : "FAIL") << " " << c.name << ": "
              << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
