#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>

#include "qform/cli/commands.hpp"
#include "qform/cli/io.hpp"

namespace qform::cli {

namespace fs = std::filesystem;

namespace {

using Rows = std::vector<std::vector<std::string>>;

/// Data rows of a report CSV, or nothing if it has not been produced yet.
std::optional<Rows> load_rows(const fs::path& path) {
  if (!fs::exists(path)) return std::nullopt;
  auto rows = read_csv(path);
  if (!rows.empty()) rows.erase(rows.begin());
  return rows;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s + " " : s + std::string(width - s.size(), ' ');
}

std::string num(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

double to_double(const std::string& s) { return std::stod(s); }

/// Mean of `value_col` grouped by the key columns, in first-seen order.
struct Grouped {
  std::vector<std::string> order;
  std::map<std::string, std::pair<double, std::size_t>> sums;

  void add(const std::string& key, double v) {
    auto [it, inserted] = sums.try_emplace(key, 0.0, 0);
    if (inserted) order.push_back(key);
    it->second.first += v;
    ++it->second.second;
  }
  bool has(const std::string& key) const { return sums.count(key) > 0; }
  double mean(const std::string& key) const {
    const auto& [sum, n] = sums.at(key);
    return sum / static_cast<double>(n);
  }
  std::size_t count(const std::string& key) const { return sums.at(key).second; }
};

void accuracy_section(std::ostream& out, const std::optional<Rows>& summary) {
  out << "== Accuracy by architecture (test and generalization sets) ==\n";
  if (!summary || summary->empty()) {
    out << "(no data)\n\n";
    return;
  }
  std::map<std::string, std::map<std::string, std::string>> cells;
  std::map<std::string, std::string> counts;
  std::vector<std::string> order;
  for (const auto& r : *summary) {
    if (r.size() < 8) continue;
    const std::string key = r[0] + " " + r[1];
    if (!cells.count(key)) order.push_back(key);
    cells[key][r[2]] = r[4];
    counts[key] = r[3];
  }
  out << pad("language config", 28) << pad("runs", 6) << pad("test word", 11)
      << pad("test POS", 10) << pad("gen word", 10) << "gen POS\n";
  for (const auto& key : order) {
    auto& m = cells[key];
    out << pad(key, 28) << pad(counts[key], 6) << pad(m["test_word_match"], 11)
        << pad(m["test_pos_match"], 10) << pad(m["gen_word_match"], 10)
        << m["gen_pos_match"] << '\n';
  }
  out << '\n';
}

void first_aux_section(std::ostream& out, const std::optional<Rows>& scatter) {
  out << "== First word of generalization-set outputs (one row per run) ==\n";
  if (!scatter || scatter->empty()) {
    out << "(no data)\n\n";
    return;
  }
  out << pad("language config", 28) << pad("seed", 6) << pad("main aux", 10)
      << pad("first aux", 11) << pad("other", 8) << "evaluated\n";
  for (const auto& r : *scatter) {
    if (r.size() < 7) continue;
    out << pad(r[0] + " " + r[1], 28) << pad(r[2], 6) << pad(num(to_double(r[3])), 10)
        << pad(num(to_double(r[4])), 11) << pad(num(to_double(r[5])), 8) << r[6] << '\n';
  }
  out << '\n';
}

void comparison_section(std::ostream& out, const std::optional<Rows>& rows) {
  out << "== Agreement vs no-agreement (main-auxiliary rate, permutation test) ==\n";
  if (!rows || rows->empty()) {
    out << "(no data)\n\n";
    return;
  }
  out << pad("config", 12) << pad("agreement", 11) << pad("no agr.", 9) << "p\n";
  for (const auto& r : *rows) {
    if (r.size() < 6) continue;
    out << pad(r[0], 12) << pad(num(to_double(r[3])), 11) << pad(num(to_double(r[4])), 9)
        << r[5] << '\n';
  }
  out << '\n';
}

void probe_section(std::ostream& out, const std::optional<Rows>& rows) {
  out << "== Probe accuracy on final encoder states (mean over runs) ==\n";
  if (!rows || rows->empty()) {
    out << "(no data)\n\n";
    return;
  }
  Grouped acc;
  std::map<std::string, std::string> chance;
  for (const auto& r : *rows) {
    if (r.size() < 7) continue;
    const std::string key = r[0] + " " + r[1] + " " + r[3];
    acc.add(key, to_double(r[4]));
    chance[key] = r[5];
  }
  out << pad("language config label", 40) << pad("runs", 6) << pad("accuracy", 10)
      << "chance\n";
  for (const auto& key : acc.order) {
    out << pad(key, 40) << pad(std::to_string(acc.count(key)), 6)
        << pad(num(acc.mean(key)), 10) << num(to_double(chance[key])) << '\n';
  }
  out << '\n';
}

void taxonomy_section(std::ostream& out, const std::optional<Rows>& rows) {
  out << "== Question error taxonomy, percent of generalization outputs ==\n";
  if (!rows || rows->empty()) {
    out << "(no data)\n\n";
    return;
  }
  // Every run scores the same generalization set, so averaging per-run
  // percentages pools the outputs with equal weight.
  Grouped cells;
  std::vector<std::string> groups;
  for (const auto& r : *rows) {
    if (r.size() < 5) continue;
    const std::string group = r[0] + " " + r[1];
    if (std::find(groups.begin(), groups.end(), group) == groups.end()) groups.push_back(group);
    cells.add(group + "|" + r[3], to_double(r[4]));
  }
  for (const auto& g : groups) {
    out << g << '\n';
    out << "  " << pad("", 15) << pad("prepose 1st", 13) << pad("prepose 2nd", 13)
        << "prepose other\n";
    for (const char* d : {"delete_first", "delete_second", "delete_none"}) {
      out << "  " << pad(d, 15);
      for (const char* p : {"prepose_first", "prepose_second", "prepose_other"}) {
        const std::string key = g + "|" + p + "/" + d;
        out << pad(cells.has(key) ? num(cells.mean(key), 1) : "-", 13);
      }
      out << '\n';
    }
    const std::string unc = g + "|uncategorized";
    out << "  uncategorized: " << (cells.has(unc) ? num(cells.mean(unc), 1) : "-") << '\n';
  }
  out << '\n';
}

}  // namespace

void cmd_report(const ExperimentConfig& config, const CommandOptions& options) {
  const auto dir = reports_dir(config);
  std::ostringstream out;
  out << "qform experiment report\n\n";
  accuracy_section(out, load_rows(dir / "metrics_summary.csv"));
  first_aux_section(out, load_rows(dir / "scatter.csv"));
  comparison_section(out, load_rows(dir / "language_comparison.csv"));
  probe_section(out, load_rows(dir / "probes.csv"));
  taxonomy_section(out, load_rows(dir / "taxonomy.csv"));
  atomic_write(dir / "report.txt", out.str());
  if (options.log) *options.log << "report written to " << (dir / "report.txt").string() << '\n';
}

}  // namespace qform::cli
