#include <CLI11.hpp>
#include <iostream>
#include <json.hpp>

#include "qform/cli/commands.hpp"
#include "qform/cli/config.hpp"
#include "qform/error.hpp"

namespace {

int fail(const std::string& code, const std::string& message) {
  std::cerr << nlohmann::json{{"error", {{"code", code}, {"message", message}}}}.dump() << '\n';
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace qform::cli;

  CLI::App app{"qform: question-formation experiments with seq2seq networks"};
  app.require_subcommand(1);

  std::string config_path;
  std::string seeds;
  std::string out_dir;
  std::size_t workers = 0;
  bool resume = false;
  bool quiet = false;
  app.add_option("--config", config_path, "INI configuration file");
  app.add_option("--seeds", seeds, "Seed list, e.g. 1,2,5-8 (overrides the config)");
  app.add_option("--workers", workers, "Parallel runs (default: hardware threads)");
  app.add_option("--out", out_dir, "Output directory (overrides the config)");
  app.add_flag("--resume", resume, "Skip runs and datasets that already finished");
  app.add_flag("--quiet", quiet, "No progress output");

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"gen-data", "Generate train/test/generalization splits"},
      {"train", "Train every architecture and seed"},
      {"eval", "Accuracy and first-auxiliary metrics"},
      {"probe", "Linear probes on final encoder states"},
      {"analyze", "Error taxonomy of generalization-set questions"},
      {"report", "Assemble the text report from the CSVs"},
      {"show-config", "Print the effective configuration"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return fail("usage", e.what());
  }

  try {
    ExperimentConfig config;
    if (!config_path.empty()) {
      config = load_config(config_path);
    } else {
      config.architectures = default_architectures();
    }
    if (!seeds.empty()) config.seeds = parse_seeds(seeds);
    if (!out_dir.empty()) config.output = out_dir;
    if (app.count("--workers")) config.workers = workers;

    CommandOptions options;
    options.resume = resume;
    options.log = quiet ? nullptr : &std::cerr;

    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "gen-data") {
      cmd_gen_data(config, options);
    } else if (name == "train") {
      cmd_train(config, options);
    } else if (name == "eval") {
      cmd_eval(config, options);
    } else if (name == "probe") {
      cmd_probe(config, options);
    } else if (name == "analyze") {
      cmd_analyze(config, options);
    } else if (name == "report") {
      cmd_report(config, options);
    } else {
      std::cout << format_config(config);
    }
  } catch (const qform::Error& e) {
    return fail(e.code(), e.what());
  } catch (const std::exception& e) {
    return fail("internal", e.what());
  }
  return 0;
}
