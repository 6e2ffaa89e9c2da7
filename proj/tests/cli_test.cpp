#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "qform/cli/commands.hpp"
#include "qform/cli/config.hpp"
#include "qform/cli/io.hpp"
#include "qform/error.hpp"

using namespace qform;
using namespace qform::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("qform-cli-test-" + name);
  fs::remove_all(p);
  return p;
}

ExperimentConfig tiny_config(const fs::path& out) {
  std::istringstream in(R"(
[experiment]
languages = no_agreement
architectures = GRU, SRN+attn
seeds = 1-2
workers = 1

[data]
train_size = 300
test_size = 120
generalization_size = 60

[model]
hidden_dim = 8
embedding_dim = 6
batches = 30

[eval]
permutations = 100
)");
  auto c = parse_config(in);
  c.output = out;
  return c;
}

std::size_t count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

void run_all(const ExperimentConfig& c, const CommandOptions& o) {
  cmd_gen_data(c, o);
  cmd_train(c, o);
  cmd_eval(c, o);
  cmd_probe(c, o);
  cmd_analyze(c, o);
  cmd_report(c, o);
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("seed lists") {
    CHECK(parse_seeds("1,2,5-8") == std::vector<std::uint64_t>{1, 2, 5, 6, 7, 8});
    CHECK(parse_seeds(" 3 ") == std::vector<std::uint64_t>{3});
    CHECK_THROWS_AS(parse_seeds("4-2"), ParseError);
    CHECK_THROWS_AS(parse_seeds("x"), ParseError);
    CHECK_THROWS_AS(parse_seeds(""), ParseError);
  }

  TEST_CASE("architectures") {
    auto a = parse_architecture("GRU+attn");
    CHECK(a.cell == rnn::CellKind::GRU);
    CHECK(a.attention);
    CHECK(a.trainable());
    a = parse_architecture("oracle-linear");
    CHECK_FALSE(a.trainable());
    CHECK(a.name == "oracle-linear");
    CHECK_THROWS(parse_architecture("TRANSFORMER"));
    CHECK(default_architectures().size() == 6);
  }

  TEST_CASE("empty config keeps the defaults") {
    std::istringstream in("");
    const auto c = parse_config(in);
    CHECK(c.sizes.train == 120000);
    CHECK(c.sizes.test == 10000);
    CHECK(c.model.hidden_dim == 256);
    CHECK(c.model.batches == 30000);
    CHECK(c.model.batch_size == 5);
    CHECK(c.model.dropout_p == 0.1);
    CHECK_FALSE(c.model.learning_rate.has_value());
    CHECK(c.architectures.size() == 6);
  }

  TEST_CASE("config errors") {
    std::istringstream unknown("[model]\nhiden_dim = 3\n");
    CHECK_THROWS_AS(parse_config(unknown), ParseError);
    std::istringstream bad_value("[model]\nhidden_dim = lots\n");
    CHECK_THROWS_AS(parse_config(bad_value), ParseError);
    std::istringstream bad_language("[experiment]\nlanguages = klingon\n");
    CHECK_THROWS_AS(parse_config(bad_language), InvalidArgument);
  }

  TEST_CASE("formatted config parses back to itself") {
    const auto c = tiny_config("out");
    std::istringstream in(format_config(c));
    CHECK(format_config(parse_config(in)) == format_config(c));
  }

  TEST_CASE("atomic write replaces whole files") {
    const auto dir = scratch("io");
    atomic_write(dir / "a" / "b.txt", "first");
    atomic_write(dir / "a" / "b.txt", "second");
    CHECK(read_file(dir / "a" / "b.txt") == "second");
    std::size_t entries = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir / "a")) ++entries;
    CHECK(entries == 1);
    fs::remove_all(dir);
  }

  TEST_CASE("pipeline") {
    const auto out = scratch("pipeline");
    auto c = tiny_config(out);
    CommandOptions o;
    run_all(c, o);

    const auto data = data_dir(c, Language::NoAgreement);
    CHECK(count_lines(data / "train.tsv") == 300);
    CHECK(count_lines(data / "test.tsv") == 120);
    CHECK(count_lines(data / "generalization.tsv") == 60);

    SUBCASE("checkpoints and learning rates") {
      for (const auto& arch : c.architectures) {
        for (std::uint64_t seed : c.seeds) {
          const auto dir = run_dir(c, Language::NoAgreement, arch, seed);
          CHECK(fs::exists(dir / "checkpoint.bin"));
          CHECK(count_lines(dir / "loss.csv") == 31);
          const auto m = nlohmann::json::parse(read_file(dir / "manifest.json"));
          CHECK(m.at("status") == "complete");
          CHECK(m.at("config").at("learning_rate").get<double>() ==
                (arch.cell == rnn::CellKind::SRN ? 0.001 : 0.01));
        }
      }
      CHECK_FALSE(fs::exists(run_dir(c, Language::NoAgreement, c.architectures[0], 1).string() +
                             ".partial"));
    }

    SUBCASE("reports") {
      const auto reports = reports_dir(c);
      CHECK(count_lines(reports / "probes.csv") == 1 + 4 * 3);
      CHECK(count_lines(reports / "scatter.csv") == 1 + 4);
      const auto report = read_file(reports / "report.txt");
      for (const char* heading : {"== Accuracy", "== First word", "== Agreement vs", "== Probe",
                                  "== Question error"}) {
        CHECK(report.find(heading) != std::string::npos);
      }
      const auto before = read_file(reports / "report.txt");
      cmd_report(c, o);
      CHECK(read_file(reports / "report.txt") == before);
    }

    SUBCASE("resume skips finished runs") {
      const auto ckpt = run_dir(c, Language::NoAgreement, c.architectures[0], 1) / "checkpoint.bin";
      const auto stamp = fs::last_write_time(ckpt);
      std::ostringstream log;
      CommandOptions resume{true, &log};
      cmd_train(c, resume);
      CHECK(fs::last_write_time(ckpt) == stamp);
      CHECK(log.str().find("skipped") != std::string::npos);
    }

    SUBCASE("missing runs are listed, not fatal") {
      auto more = c;
      more.seeds = {1, 2, 3};
      cmd_eval(more, o);
      const auto missing = read_file(reports_dir(c) / "eval_missing.txt");
      CHECK(missing.find("seed-3") != std::string::npos);
    }
    fs::remove_all(out);
  }

  TEST_CASE("oracle pseudo-models") {
    const auto out = scratch("oracles");
    auto c = tiny_config(out);
    c.architectures = {parse_architecture("oracle-copy"), parse_architecture("oracle-hierarchical")};
    c.seeds = {1};
    CommandOptions o;
    cmd_gen_data(c, o);
    cmd_eval(c, o);
    cmd_analyze(c, o);
    const auto runs = read_csv(reports_dir(c) / "metrics_runs.csv");
    bool saw_copy_gen = false;
    for (const auto& r : runs) {
      if (r[1] == "oracle-hierarchical" && r[3] == "main_aux_rate") CHECK(r[4] == "1.000000");
      if (r[1] == "oracle-hierarchical" && r[3] == "test_word_match") CHECK(r[4] == "1.000000");
      if (r[1] == "oracle-copy" && r[3] == "gen_word_match") {
        saw_copy_gen = true;
        CHECK(r[4] == "0.000000");
      }
    }
    CHECK(saw_copy_gen);
    for (const auto& r : read_csv(reports_dir(c) / "taxonomy.csv")) {
      if (r[1] != "oracle-hierarchical") continue;
      if (r[3] == "prepose_second/delete_second") {
        CHECK(r[4] == "100.0000");
      } else if (r[3] != "cell") {
        CHECK(r[4] == "0.0000");
      }
    }
    fs::remove_all(out);
  }

  TEST_CASE("pipeline is deterministic with one worker") {
    const auto a = scratch("det-a"), b = scratch("det-b");
    auto ca = tiny_config(a), cb = tiny_config(b);
    ca.seeds = cb.seeds = {1};
    ca.architectures = cb.architectures = {parse_architecture("LSTM+attn")};
    CommandOptions o;
    run_all(ca, o);
    run_all(cb, o);
    std::size_t compared = 0;
    for (const auto& e : fs::recursive_directory_iterator(a)) {
      if (!e.is_regular_file()) continue;
      const auto rel = fs::relative(e.path(), a);
      CAPTURE(rel.string());
      CHECK(read_file(e.path()) == read_file(b / rel));
      ++compared;
    }
    CHECK(compared > 10);
    fs::remove_all(a);
    fs::remove_all(b);
  }

  TEST_CASE("command-line errors are one JSON line") {
    const auto dir = scratch("exe");
    fs::create_directories(dir);
    const auto err = dir / "err.txt";
    const std::string cmd = std::string(QFORM_CLI_PATH) + " --config " + (dir / "nope.ini").string() +
                            " gen-data 2> " + err.string();
    const int status = std::system(cmd.c_str());
    CHECK(status != 0);
    const auto line = read_file(err);
    const auto j = nlohmann::json::parse(line);
    CHECK(j.at("error").at("code") == "io");
    CHECK(j.at("error").at("message").get<std::string>().find("nope.ini") != std::string::npos);

    const std::string train = std::string(QFORM_CLI_PATH) + " --out " + (dir / "empty").string() +
                              " --quiet train 2> " + err.string();
    CHECK(std::system(train.c_str()) != 0);
    CHECK(nlohmann::json::parse(read_file(err)).at("error").at("code") == "missing_data");
    fs::remove_all(dir);
  }
}
