#include "qform/cli/commands.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "qform/analysis.hpp"
#include "qform/cli/io.hpp"
#include "qform/error.hpp"
#include "qform/eval.hpp"
#include "qform/nn/checkpoint.hpp"
#include "qform/probe.hpp"
#include "qform/rnn/train.hpp"

namespace qform::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

fs::path data_dir(const ExperimentConfig& config, Language language) {
  return config.output / "data" / to_string(language);
}

fs::path run_dir(const ExperimentConfig& config, Language language,
                 const Architecture& arch, std::uint64_t seed) {
  return config.output / "runs" / to_string(language) / arch.name /
         ("seed-" + std::to_string(seed));
}

fs::path reports_dir(const ExperimentConfig& config) { return config.output / "reports"; }

Grammar make_grammar(Language language, bool object_rc_transitive) {
  GrammarOptions options;
  options.object_rc_transitive = object_rc_transitive;
  return language == Language::Agreement ? build_agreement_grammar(options)
                                         : build_no_agreement_grammar(options);
}

std::size_t effective_workers(const ExperimentConfig& config) {
  if (config.workers > 0) return config.workers;
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

constexpr const char* kInitDescription =
    "embeddings N(0,1); weights and biases U(-1/sqrt(fan_in), 1/sqrt(fan_in))";

class Log {
 public:
  explicit Log(std::ostream* out) : out_(out) {}
  void line(const std::string& text) {
    if (!out_) return;
    std::lock_guard lock(mutex_);
    *out_ << text << '\n' << std::flush;
  }

 private:
  std::ostream* out_;
  std::mutex mutex_;
};

/// Runs fn(0..n-1) on up to `workers` threads. Jobs must not throw.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

json model_config_json(const rnn::ModelConfig& c) {
  return {
      {"cell", rnn::to_string(c.cell)},
      {"attention", c.attention},
      {"hidden_dim", c.hidden_dim},
      {"embedding_dim", c.embedding_dim},
      {"dropout_p", c.dropout_p},
      {"learning_rate", c.lr()},
      {"learning_rate_source", c.learning_rate ? "config" : "cell default"},
      {"batches", c.batches},
      {"batch_size", c.batch_size},
      {"teacher_forcing_ratio", c.teacher_forcing_ratio},
      {"max_input_len", c.max_input_len},
      {"max_decode_len", c.max_decode_len},
      {"seed", c.seed},
      {"loss_reduction", rnn::to_string(c.loss_reduction)},
  };
}

rnn::ModelConfig model_config_from_json(const json& j) {
  rnn::ModelConfig c;
  c.cell = rnn::parse_cell_kind(j.at("cell").get<std::string>());
  c.attention = j.at("attention").get<bool>();
  c.hidden_dim = j.at("hidden_dim").get<std::size_t>();
  c.embedding_dim = j.at("embedding_dim").get<std::size_t>();
  c.dropout_p = j.at("dropout_p").get<double>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.batches = j.at("batches").get<std::size_t>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.teacher_forcing_ratio = j.at("teacher_forcing_ratio").get<double>();
  c.max_input_len = j.at("max_input_len").get<std::size_t>();
  c.max_decode_len = j.at("max_decode_len").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.loss_reduction = rnn::parse_loss_reduction(j.at("loss_reduction").get<std::string>());
  return c;
}

std::optional<json> read_manifest(const fs::path& dir) {
  const auto path = dir / "manifest.json";
  if (!fs::exists(path)) return std::nullopt;
  try {
    return json::parse(read_file(path));
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

bool run_finished(const fs::path& dir) {
  const auto m = read_manifest(dir);
  if (!m) return false;
  const auto status = m->value("status", "");
  return status == "complete" || status == "diverged";
}

bool run_complete(const fs::path& dir) {
  const auto m = read_manifest(dir);
  return m && m->value("status", "") == "complete";
}

std::string split_text(const std::vector<Example>& split) {
  std::ostringstream out;
  write_split(out, split);
  return out.str();
}

std::vector<Example> read_split_file(const fs::path& path, const Grammar& grammar) {
  std::istringstream in(read_file(path));
  try {
    return load_split(in, grammar);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path.string() + ": " + e.what());
  }
}

struct Job {
  Language language;
  Architecture arch;
  std::uint64_t seed;
};

std::vector<Job> make_jobs(const ExperimentConfig& config, bool trainable_only) {
  std::vector<Job> jobs;
  for (Language l : config.languages) {
    for (const auto& a : config.architectures) {
      if (trainable_only && !a.trainable()) continue;
      for (auto s : config.seeds) jobs.push_back({l, a, s});
    }
  }
  return jobs;
}

std::string job_label(const Job& job) {
  return to_string(job.language) + "/" + job.arch.name + "/seed-" + std::to_string(job.seed);
}

std::map<Language, LoadedData> load_languages(const ExperimentConfig& config,
                                              bool with_train) {
  std::map<Language, LoadedData> out;
  for (Language l : config.languages) out.emplace(l, load_data(config, l, with_train));
  return out;
}

/// A predictor for one job, or nullptr with `missing` set.
std::unique_ptr<eval::Predictor> make_predictor(
    const ExperimentConfig& config, const Job& job, const LoadedData& data,
    std::unique_ptr<rnn::Seq2Seq<float>>& model_holder, std::string& missing) {
  if (job.arch.oracle) return std::make_unique<eval::OraclePredictor>(*job.arch.oracle);
  const auto dir = run_dir(config, job.language, job.arch, job.seed);
  if (!run_complete(dir)) {
    missing = job_label(job) + ": no completed checkpoint";
    return nullptr;
  }
  model_holder = std::make_unique<rnn::Seq2Seq<float>>(load_model(dir, data.vocab));
  return std::make_unique<eval::ModelPredictor>(*model_holder, data.vocab);
}

void write_missing(const ExperimentConfig& config, const std::string& name,
                   const std::vector<std::string>& missing, Log& log) {
  std::string text;
  for (const auto& m : missing) {
    if (m.empty()) continue;
    text += m + '\n';
    log.line("missing: " + m);
  }
  atomic_write(reports_dir(config) / name, text);
}

}  // namespace

LoadedData load_data(const ExperimentConfig& config, Language language,
                     bool with_train) {
  const auto dir = data_dir(config, language);
  if (!fs::exists(dir / "manifest.json")) {
    throw Error("missing_data", "no dataset at " + dir.string() + "; run gen-data first");
  }
  LoadedData data{make_grammar(language, config.object_rc_transitive), {}, {}, {}, {}};
  const auto manifest = json::parse(read_file(dir / "manifest.json"));
  if (manifest.value("grammar", "") != data.grammar.id()) {
    throw Error("config_mismatch", "dataset grammar " + manifest.value("grammar", "") +
                                       " differs from configured " + data.grammar.id());
  }
  {
    std::istringstream in(read_file(dir / "vocab.tsv"));
    data.vocab = Vocabulary::read(in);
  }
  if (with_train) data.train = read_split_file(dir / "train.tsv", data.grammar);
  data.test = read_split_file(dir / "test.tsv", data.grammar);
  data.generalization = read_split_file(dir / "generalization.tsv", data.grammar);
  return data;
}

rnn::Seq2Seq<float> load_model(const fs::path& dir, const Vocabulary& vocab) {
  const auto manifest = read_manifest(dir);
  if (!manifest) throw Error("missing_run", "no manifest in " + dir.string());
  const auto config = model_config_from_json(manifest->at("config"));
  if (manifest->value("vocab_size", std::size_t{0}) != vocab.size()) {
    throw Error("config_mismatch", "vocabulary size differs from " + dir.string());
  }
  rnn::Seq2Seq<float> model(config, vocab.size(), rnn::task_token_ids(vocab));
  std::ifstream in(dir / "checkpoint.bin", std::ios::binary);
  if (!in) throw Error("missing_run", "no checkpoint in " + dir.string());
  nn::read_checkpoint(in, model.parameters());
  return model;
}

void cmd_gen_data(const ExperimentConfig& config, const CommandOptions& options) {
  Log log(options.log);
  for (Language language : config.languages) {
    const auto dir = data_dir(config, language);
    if (options.resume && fs::exists(dir / "manifest.json")) {
      log.line("gen-data " + to_string(language) + ": exists, skipped");
      continue;
    }
    const Grammar grammar = make_grammar(language, config.object_rc_transitive);
    Rng rng(config.data_seed);
    const auto splits = build_splits(grammar, config.sizes, rng);
    const auto vocab = build_vocabulary(splits, grammar.lexicon());

    atomic_write(dir / "train.tsv", split_text(splits.train));
    atomic_write(dir / "test.tsv", split_text(splits.test));
    atomic_write(dir / "generalization.tsv", split_text(splits.generalization));
    std::ostringstream vocab_text;
    vocab.write(vocab_text);
    atomic_write(dir / "vocab.tsv", vocab_text.str());
    atomic_write(dir / "train_frequencies.csv",
                 format_frequency_table(frequency_report(splits.train)));

    json manifest = {
        {"language", to_string(language)},
        {"grammar", grammar.id()},
        {"rng", std::string(Rng::kAlgorithm)},
        {"seed", config.data_seed},
        {"sizes",
         {{"train", splits.train.size()},
          {"test", splits.test.size()},
          {"generalization", splits.generalization.size()}}},
        {"draws", splits.draws},
        {"vocab_size", vocab.size()},
    };
    // Written last: its presence marks a complete dataset.
    atomic_write(dir / "manifest.json", manifest.dump(2) + "\n");
    log.line("gen-data " + to_string(language) + ": " + std::to_string(splits.train.size()) +
             "/" + std::to_string(splits.test.size()) + "/" +
             std::to_string(splits.generalization.size()) + " examples from " +
             std::to_string(splits.draws) + " draws");
  }
}

void cmd_train(const ExperimentConfig& config, const CommandOptions& options) {
  Log log(options.log);
  const auto jobs = make_jobs(config, true);
  std::map<Language, LoadedData> data;
  std::map<Language, std::vector<rnn::EncodedExample>> encoded;
  for (Language l : config.languages) {
    data.emplace(l, load_data(config, l, true));
    encoded.emplace(l, rnn::encode_examples(data.at(l).train, data.at(l).vocab));
  }

  std::vector<std::string> failures(jobs.size());
  parallel_for(jobs.size(), effective_workers(config), [&](std::size_t i) {
    const Job& job = jobs[i];
    const auto dir = run_dir(config, job.language, job.arch, job.seed);
    if (options.resume && run_finished(dir)) {
      log.line("train " + job_label(job) + ": already finished, skipped");
      return;
    }
    try {
      const auto& d = data.at(job.language);
      const auto model_config = config.run_config(job.arch, job.seed);
      fs::path partial = dir;
      partial += ".partial";
      fs::remove_all(partial);
      fs::create_directories(partial);

      json manifest = {
          {"language", to_string(job.language)},
          {"architecture", job.arch.name},
          {"seed", job.seed},
          {"rng", std::string(Rng::kAlgorithm)},
          {"initialization", kInitDescription},
          {"precision", "float32"},
          {"grammar", d.grammar.id()},
          {"data_seed", config.data_seed},
          {"vocab_size", d.vocab.size()},
          {"config", model_config_json(model_config)},
          {"status", "running"},
      };
      atomic_write(partial / "manifest.json", manifest.dump(2) + "\n");

      Rng rng(job.seed);
      const std::size_t every = std::max<std::size_t>(1, model_config.batches / 10);
      auto progress = [&](std::size_t b, double loss) {
        if (b % every == 0) {
          log.line("train " + job_label(job) + ": batch " + std::to_string(b) + " loss " +
                   fixed(loss, 4));
        }
      };
      std::ostringstream loss_csv;
      loss_csv << "batch,loss\n";
      try {
        auto run = rnn::train_run(model_config, encoded.at(job.language), d.vocab.size(),
                                  rnn::task_token_ids(d.vocab), rng, progress);
        for (std::size_t b = 0; b < run.loss_trace.size(); ++b) {
          loss_csv << b + 1 << ',' << fixed(run.loss_trace[b]) << '\n';
        }
        std::ostringstream ckpt;
        nn::write_checkpoint(ckpt, run.model.parameters());
        atomic_write(partial / "checkpoint.bin", ckpt.str());
        manifest["status"] = "complete";
        manifest["batches_run"] = run.loss_trace.size();
        manifest["final_loss"] = run.loss_trace.empty() ? 0.0 : run.loss_trace.back();
      } catch (const NumericError& e) {
        manifest["status"] = "diverged";
        manifest["error"] = e.what();
        failures[i] = job_label(job) + ": " + e.what();
      }
      atomic_write(partial / "loss.csv", loss_csv.str());
      atomic_write(partial / "manifest.json", manifest.dump(2) + "\n");
      fs::remove_all(dir);
      fs::rename(partial, dir);
      log.line("train " + job_label(job) + ": " + manifest["status"].get<std::string>());
    } catch (const std::exception& e) {
      failures[i] = job_label(job) + ": " + e.what();
      log.line("train " + job_label(job) + ": failed: " + e.what());
    }
  });
  write_missing(config, "train_failures.txt", failures, log);
}

void cmd_eval(const ExperimentConfig& config, const CommandOptions& options) {
  Log log(options.log);
  const auto data = load_languages(config, false);
  const auto jobs = make_jobs(config, false);
  std::vector<std::optional<eval::MetricsReport>> reports(jobs.size());
  std::vector<std::string> missing(jobs.size());

  parallel_for(jobs.size(), effective_workers(config), [&](std::size_t i) {
    const Job& job = jobs[i];
    try {
      const auto& d = data.at(job.language);
      std::unique_ptr<rnn::Seq2Seq<float>> model;
      auto predictor = make_predictor(config, job, d, model, missing[i]);
      if (!predictor) return;
      eval::MetricsReport r;
      r.config = job.arch.name;
      r.language = to_string(job.language);
      r.seed = job.seed;
      const auto test_out = eval::predict_all(*predictor, d.test);
      const auto gen_out = eval::predict_all(*predictor, d.generalization);
      r.test = eval::score_split(d.test, test_out, d.grammar.lexicon());
      r.generalization = eval::score_split(d.generalization, gen_out, d.grammar.lexicon());
      try {
        r.first_aux = eval::first_aux_breakdown(d.generalization, gen_out, d.grammar.lexicon(),
                                                job.language == Language::Agreement);
      } catch (const InvalidArgument&) {
        log.line("eval " + job_label(job) + ": first-auxiliary filter is empty");
      }
      reports[i] = r;
      log.line("eval " + job_label(job) + ": test word " + fixed(r.test.word_match_rate(), 4) +
               ", main_aux " + fixed(r.first_aux.main_aux_rate(), 4));
    } catch (const std::exception& e) {
      missing[i] = job_label(job) + ": " + e.what();
    }
  });

  std::vector<eval::MetricsReport> runs;
  for (const auto& r : reports) {
    if (r) runs.push_back(*r);
  }
  // Group in job order: language, then architecture.
  std::vector<eval::Summary> summaries;
  std::map<std::pair<std::string, std::string>, eval::Summary> by_key;
  for (Language l : config.languages) {
    for (const auto& a : config.architectures) {
      std::vector<eval::MetricsReport> group;
      for (const auto& r : runs) {
        if (r.language == to_string(l) && r.config == a.name) group.push_back(r);
      }
      if (group.empty()) continue;
      summaries.push_back(eval::aggregate(group));
      by_key.emplace(std::make_pair(to_string(l), a.name), summaries.back());
    }
  }

  const auto dir = reports_dir(config);
  atomic_write(dir / "metrics_runs.csv", eval::format_run_csv(runs));
  atomic_write(dir / "metrics_summary.csv", eval::format_summary_csv(summaries));
  atomic_write(dir / "scatter.csv", eval::format_scatter_csv(runs));

  std::ostringstream cmp;
  cmp << "config,n_agreement,n_no_agreement,mean_main_aux_agreement,"
         "mean_main_aux_no_agreement,p_value\n";
  for (std::size_t k = 0; k < config.architectures.size(); ++k) {
    const auto& a = config.architectures[k];
    const auto ag = by_key.find({"agreement", a.name});
    const auto na = by_key.find({"no_agreement", a.name});
    if (ag == by_key.end() || na == by_key.end()) continue;
    if (ag->second.seeds.size() < 2 || na->second.seeds.size() < 2) continue;
    Rng rng = Rng(config.data_seed).split(k);
    const double p = eval::compare_languages(ag->second, na->second, rng, config.permutations);
    cmp << a.name << ',' << ag->second.seeds.size() << ',' << na->second.seeds.size() << ','
        << fixed(ag->second.metric("main_aux_rate").mean) << ','
        << fixed(na->second.metric("main_aux_rate").mean) << ',' << fixed(p) << '\n';
  }
  atomic_write(dir / "language_comparison.csv", cmp.str());
  write_missing(config, "eval_missing.txt", missing, log);
}

void cmd_probe(const ExperimentConfig& config, const CommandOptions& options) {
  Log log(options.log);
  const auto data = load_languages(config, false);
  const auto jobs = make_jobs(config, true);
  std::vector<std::string> rows(jobs.size());
  std::vector<std::string> missing(jobs.size());

  parallel_for(jobs.size(), effective_workers(config), [&](std::size_t i) {
    const Job& job = jobs[i];
    try {
      const auto& d = data.at(job.language);
      const auto dir = run_dir(config, job.language, job.arch, job.seed);
      if (!run_complete(dir)) {
        missing[i] = job_label(job) + ": no completed checkpoint";
        return;
      }
      const auto model = load_model(dir, d.vocab);
      const auto encodings = probe::collect_encodings(model, d.vocab, d.test);
      std::ostringstream enc_text;
      probe::write_encodings(enc_text, encodings);
      atomic_write(dir / "encodings.tsv", enc_text.str());
      for (std::size_t k = 0; k < probe::kLabelKinds.size(); ++k) {
        Rng rng = Rng(job.seed).split(1000 + k);
        const auto result = probe::train_probe(encodings, probe::kLabelKinds[k], rng, config.probe);
        rows[i] += probe::format_probe_row(to_string(job.language), job.arch.name, job.seed, result);
        log.line("probe " + job_label(job) + " " + probe::to_string(result.kind) + ": " +
                 fixed(result.test_accuracy, 4) + " (chance " + fixed(result.chance, 4) + ")");
      }
    } catch (const std::exception& e) {
      missing[i] = job_label(job) + ": " + e.what();
      rows[i].clear();
    }
  });

  std::string csv = probe::kProbeCsvHeader;
  for (const auto& r : rows) csv += r;
  atomic_write(reports_dir(config) / "probes.csv", csv);
  write_missing(config, "probe_missing.txt", missing, log);
}

void cmd_analyze(const ExperimentConfig& config, const CommandOptions& options) {
  Log log(options.log);
  const auto data = load_languages(config, false);
  const auto jobs = make_jobs(config, false);
  std::vector<std::string> rows(jobs.size());
  std::vector<std::string> missing(jobs.size());

  parallel_for(jobs.size(), effective_workers(config), [&](std::size_t i) {
    const Job& job = jobs[i];
    try {
      const auto& d = data.at(job.language);
      std::unique_ptr<rnn::Seq2Seq<float>> model;
      auto predictor = make_predictor(config, job, d, model, missing[i]);
      if (!predictor) return;
      const auto outputs = eval::predict_all(*predictor, d.generalization);
      const auto table = analysis::taxonomy_table(d.generalization, outputs, d.grammar.lexicon());
      rows[i] = analysis::format_taxonomy_rows(to_string(job.language), job.arch.name,
                                               job.seed, table);
      atomic_write(reports_dir(config) / "audit" / to_string(job.language) / job.arch.name /
                       ("seed-" + std::to_string(job.seed) + ".tsv"),
                   analysis::format_audit_log(d.generalization, outputs, d.grammar.lexicon()));
      log.line("analyze " + job_label(job) + ": categorized " +
               fixed(table.categorized_percent(), 2) + "%");
    } catch (const std::exception& e) {
      missing[i] = job_label(job) + ": " + e.what();
    }
  });

  std::string csv = "language,config,seed,cell,percent\n";
  for (const auto& r : rows) csv += r;
  atomic_write(reports_dir(config) / "taxonomy.csv", csv);
  write_missing(config, "analyze_missing.txt", missing, log);
}

}  // namespace qform::cli
