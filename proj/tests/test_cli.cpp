#include "doctest.h"

#include <cstdlib>
#include <sstream>

#include <json.hpp>

#include "metricslim/config.hpp"
#include "metricslim/error.hpp"
#include "metricslim/report.hpp"
#include "standin/standin.hpp"
#include "support.hpp"

using namespace metricslim;
namespace fs = std::filesystem;

namespace {

const std::vector<standin::ReleaseShape> kTiny{
    {"alpha", "1.0", 60, 18}, {"alpha", "1.1", 70, 20}, {"beta", "2.0", 50, 15}, {"beta", "2.1", 55, 22}};

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(METRICSLIM_EXE) + " " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  if (status == -1) return -1;
#ifdef WIFEXITED
  if (WIFEXITED(status)) return WEXITSTATUS(status);
#endif
  return status;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      out.push_back(cell);
      cell.clear();
    } else {
      cell += c;
    }
  }
  out.push_back(cell);
  return out;
}

}  // namespace

TEST_CASE("config defaults") {
  const auto c = parse_run_config(R"({"manifest": "m.json"})", "/data");
  CHECK(c.manifest == fs::path("/data/m.json"));
  CHECK(c.scenarios.size() == 3);
  CHECK(c.classifiers.size() == 5);
  REQUIRE(c.metric_sets.size() == 4);
  CHECK(c.metric_sets[0].name == "ALL");
  CHECK(c.metric_sets[3].type == MetricSetType::Min);
  CHECK(c.phi == doctest::Approx(0.6));
  CHECK_FALSE(c.k.has_value());
  CHECK(c.workers == 1);
}

TEST_CASE("config errors name the offending field") {
  auto message = [](const std::string& text) {
    try {
      parse_run_config(text, ".");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::ConfigError);
      return std::string(e.what());
    }
    return std::string("no error");
  };
  const auto bad_metric = message(
      R"({"manifest": "m.json", "metric_sets": [{"name": "X", "type": "explicit", "metrics": ["CBO", "NOPE"]}]})");
  CHECK(bad_metric.find("metric_sets[0].metrics[1]") != std::string::npos);
  CHECK(bad_metric.find("NOPE") != std::string::npos);
  CHECK(message("{\"manifest\": \"m.json\",\n\"seed\": }").find("line 2") != std::string::npos);
  CHECK(message(R"({"manifest": "m.json", "colour": 1})").find("colour") != std::string::npos);
  CHECK(message(R"({"manifest": "m.json", "metric_sets": ["ALL", "ALL"]})") != "no error");
  CHECK(message(R"({"manifest": "m.json", "phi": 1.5})").find("phi") != std::string::npos);
  CHECK(message(R"({"manifest": "m.json", "classifiers": ["forest"]})") != "no error");
  CHECK(message(R"({"manifest": "m.json", "metric_sets": [{"name": "M", "type": "maxrel"}]})")
            .find("k") != std::string::npos);
}

TEST_CASE("canonical config ignores output location and workers") {
  auto a = parse_run_config(R"({"manifest": "m.json", "out": "x", "workers": 1})", "/d");
  auto b = parse_run_config(R"({"manifest": "m.json", "out": "y", "workers": 4})", "/d");
  CHECK(a.canonical_json() == b.canonical_json());
  b.override_seed(99);
  CHECK(a.canonical_json() != b.canonical_json());
  CHECK(b.seed == 99);
  for (const auto& c : b.classifiers) CHECK(c.seed() == 99);
}

TEST_CASE("run and report end to end") {
  const auto dir = testing::fresh_dir("cli");
  standin::write_corpus(dir, 11, kTiny);
  const std::string config = R"({
    "manifest": "manifest.json",
    "out": "OUT",
    "scenarios": ["wpdp_nearest", {"kind": "cpdp_exhaustive", "max_releases": 2}],
    "classifiers": ["naive_bayes", "logistic"],
    "metric_sets": ["ALL", "FILTER",
                    {"name": "EVERY", "type": "explicit",
                     "metrics": ["WMC", "DIT", "NOC", "CBO", "RFC", "LCOM", "CA", "CE", "NPM", "LCOM3",
                                 "LOC", "DAM", "MOA", "MFA", "CAM", "IC", "CBM", "AMC", "MAX_CC", "AVG_CC"]}],
    "comparisons": [{"baseline": "ALL", "candidate": "EVERY"}],
    "k": 3
  })";
  auto write_config = [&](const std::string& out) {
    auto text = config;
    text.replace(text.find("OUT"), 3, out);
    testing::write_file(dir / (out + ".json"), text);
    return dir / (out + ".json");
  };
  const auto log = dir / "log.txt";
  REQUIRE(run_cli("run --config \"" + write_config("r1").string() + "\"", log) == 0);
  REQUIRE(run_cli("run --config \"" + write_config("r2").string() + "\"", log) == 0);
  const auto r1 = dir / "r1";
  const auto r2 = dir / "r2";

  SUBCASE("artifacts are byte-identical across runs") {
    std::size_t compared = 0;
    for (const auto& entry : fs::directory_iterator(r1)) {
      const auto name = entry.path().filename();
      if (name == "run_manifest.json") continue;
      CHECK_MESSAGE(testing::read_file(entry.path()) == testing::read_file(r2 / name), name.string());
      ++compared;
    }
    CHECK(compared >= 12);
  }

  SUBCASE("grid shape") {
    const auto table = read_results(r1 / "results.jsonl");
    // Two targets (the later releases) x 2 scenarios x 2 classifiers x 3 sets.
    CHECK(table.rows.size() == 2 * 2 * 2 * 3);
    for (const auto& row : table.rows) {
      CHECK(row.error.empty());
      CHECK(row.target_leak == (row.scenario == "cpdp_exhaustive"));
    }
    const auto again = read_results(r2 / "results.jsonl");
    REQUIRE(again.rows.size() == table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      CHECK(result_row_json(table.rows[i]) == result_row_json(again.rows[i]));
    }
  }

  SUBCASE("self-comparison gives unit ratios") {
    const auto rows = lines_of(testing::read_file(r1 / "comparisons.csv"));
    REQUIRE(rows.size() > 1);
    const auto header = split_csv(rows[0]);
    const auto ratio_col = std::find(header.begin(), header.end(), "ratio") - header.begin();
    const auto acceptable_col = std::find(header.begin(), header.end(), "acceptable") - header.begin();
    std::size_t checked = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const auto cells = split_csv(rows[i]);
      if (cells[static_cast<std::size_t>(ratio_col)].empty()) continue;
      CHECK(std::stod(cells[static_cast<std::size_t>(ratio_col)]) == doctest::Approx(1.0));
      CHECK(cells[static_cast<std::size_t>(acceptable_col)] == "true");
      ++checked;
    }
    CHECK(checked > 0);
    CHECK(testing::read_file(r1 / "report.md").find("EVERY") != std::string::npos);
  }

  SUBCASE("threshold counts agree with the result rows") {
    const auto table = read_results(r1 / "results.jsonl");
    const auto rows = lines_of(testing::read_file(r1 / "threshold_counts.csv"));
    REQUIRE(rows.size() > 1);
    CHECK(rows[0] == "scenario,classifier,metric_set,rows,precision,recall,f_measure,total");
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const auto cells = split_csv(rows[i]);
      REQUIRE(cells.size() == 8);
      std::vector<MeasureTriple> m;
      for (const auto& row : table.rows) {
        if (!row.outcome || row.scenario != cells[0] || row.metric_set != cells[2]) continue;
        if (cells[1] != "all" && row.classifier != cells[1]) continue;
        m.push_back(row.measures);
      }
      const auto counts = threshold_counts(m);
      CHECK(std::to_string(m.size()) == cells[3]);
      CHECK(std::to_string(counts.precision) == cells[4]);
      CHECK(std::to_string(counts.recall) == cells[5]);
      CHECK(std::to_string(counts.f_measure) == cells[6]);
      CHECK(std::to_string(counts.total) == cells[7]);
    }
  }

  SUBCASE("boxplot rows are ordered quantiles") {
    const auto rows = lines_of(testing::read_file(r1 / "boxplots.csv"));
    REQUIRE(rows.size() > 1);
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const auto c = split_csv(rows[i]);
      REQUIRE(c.size() >= 10);
      const double lo = std::stod(c[5]), q1 = std::stod(c[6]), med = std::stod(c[7]), q3 = std::stod(c[8]),
                   hi = std::stod(c[9]);
      CHECK(lo <= q1);
      CHECK(q1 <= med);
      CHECK(med <= q3);
      CHECK(q3 <= hi);
      CHECK(lo >= 0.0);
      CHECK(hi <= 1.0);
    }
  }

  SUBCASE("report can be regenerated from the run directory") {
    const auto before = testing::read_file(r1 / "report.md");
    fs::remove(r1 / "report.md");
    CHECK(run_cli("report \"" + r1.string() + "\"", log) == 0);
    CHECK(testing::read_file(r1 / "report.md") == before);
  }

  SUBCASE("run manifest records the configuration hash") {
    const auto j = nlohmann::json::parse(testing::read_file(r1 / "run_manifest.json"));
    const auto k = nlohmann::json::parse(testing::read_file(r2 / "run_manifest.json"));
    CHECK(j.dump().size() > 2);
    for (const auto& [key, value] : j.items()) {
      if (key.find("time") != std::string::npos || key == "out" || key == "output") continue;
      CHECK_MESSAGE(value == k[key], key);
    }
  }
}

TEST_CASE("cli failures") {
  const auto dir = testing::fresh_dir("cli_fail");
  standin::write_corpus(dir, 5, kTiny);
  const auto log = dir / "log.txt";
  testing::write_file(dir / "bad.json", R"({"manifest": "manifest.json",
    "metric_sets": [{"name": "X", "type": "explicit", "metrics": ["CBO", "NOPE"]}]})");
  CHECK(run_cli("run --config \"" + (dir / "bad.json").string() + "\"", log) == 2);
  CHECK(testing::read_file(log).find("metric_sets[0].metrics[1]") != std::string::npos);
  CHECK(run_cli("report \"" + (dir / "missing").string() + "\"", log) != 0);
  CHECK(run_cli("summary --manifest \"" + (dir / "manifest.json").string() + "\"", log) == 0);
  CHECK(testing::read_file(log).find("| alpha | 1.1 | 70 | 20 |") != std::string::npos);
  CHECK(run_cli("summary --manifest \"" + (dir / "nope.json").string() + "\"", log) != 0);
}
