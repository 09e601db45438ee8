#include "metricslim/report.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "metricslim/comparison.hpp"
#include "metricslim/error.hpp"

#ifndef METRICSLIM_VERSION
#define METRICSLIM_VERSION "0.0.0"
#endif

namespace metricslim {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

const char* toolkit_version() noexcept { return METRICSLIM_VERSION; }

std::string format_full(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

std::string format_short(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  // Avoid "-0.000" for tiny negatives.
  if (std::string_view(buf) == "-0.000") return "0.000";
  return buf;
}

std::uint64_t fnv1a64(const std::string& bytes) noexcept {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

std::string mname(MetricId m) { return std::string(metric_name(m)); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string csv_line(std::initializer_list<std::string> fields) {
  std::string line;
  bool first = true;
  for (const auto& f : fields) {
    if (!first) line += ',';
    line += csv_field(f);
    first = false;
  }
  return line + "\n";
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(ErrorKind::InvalidArgument, "write failed: " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::MissingArtifacts, path.string() + ": cannot open");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

// Markdown table builder; cells are already formatted.
class MdTable {
 public:
  explicit MdTable(std::vector<std::string> header) : header_(std::move(header)) {}
  void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }
  bool empty() const { return rows_.empty(); }

  std::string str() const {
    std::string out = "| " + join(header_, " | ") + " |\n|";
    for (std::size_t i = 0; i < header_.size(); ++i) out += i == 0 ? "---|" : "---:|";
    out += "\n";
    for (const auto& r : rows_) out += "| " + join(r, " | ") + " |\n";
    return out;
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

// Distinct values in first-appearance order.
template <class F>
std::vector<std::string> distinct(const std::vector<ResultRow>& rows, F&& field) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& r : rows) {
    const std::string& v = field(r);
    if (seen.insert(v).second) out.push_back(v);
  }
  return out;
}

std::vector<ResultRow> rows_where(const std::vector<ResultRow>& rows, const std::string& scenario,
                                  const std::string* classifier, const std::string& metric_set) {
  std::vector<ResultRow> out;
  for (const auto& r : rows) {
    if (r.scenario != scenario || r.metric_set != metric_set) continue;
    if (classifier && r.classifier != *classifier) continue;
    out.push_back(r);
  }
  return out;
}

// ---- config.json (written by run, read by report) ----

struct ReportSettings {
  std::vector<ComparisonDef> comparisons;
  Thresholds thresholds;
  CompareOptions compare;
};

ReportSettings read_settings(const fs::path& config_json) {
  const auto text = read_file(config_json);
  ReportSettings s;
  try {
    const auto j = json::parse(text);
    for (const auto& c : j.at("comparisons")) {
      s.comparisons.push_back({c.at("baseline").get<std::string>(), c.at("candidate").get<std::string>()});
    }
    const auto& t = j.at("thresholds");
    s.thresholds = {t.at("precision").get<double>(), t.at("recall").get<double>(),
                    t.at("f_measure").get<double>()};
    s.compare.significance = j.at("significance").get<double>();
    s.compare.ratio_threshold = j.at("ratio_threshold").get<double>();
    const auto w = j.at("wilcoxon").get<std::string>();
    s.compare.method = w == "exact" ? WilcoxonMethod::Exact : w == "normal" ? WilcoxonMethod::Normal
                                                                            : WilcoxonMethod::Auto;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::MissingArtifacts, config_json.string() + ": unreadable (" + e.what() + ")");
  }
  return s;
}

// ---- comparisons ----

struct ComparisonLine {
  std::string baseline;
  std::string candidate;
  std::string scenario;
  std::string classifier;  // "all" pools every classifier
  std::optional<ComparisonReport> report;
  std::string error;
};

std::vector<ComparisonLine> comparison_lines(const ResultTable& table, const ReportSettings& settings) {
  const auto scenarios = distinct(table.rows, [](const ResultRow& r) -> const std::string& { return r.scenario; });
  const auto classifiers =
      distinct(table.rows, [](const ResultRow& r) -> const std::string& { return r.classifier; });
  std::vector<ComparisonLine> out;
  for (const auto& def : settings.comparisons) {
    for (const auto& scenario : scenarios) {
      std::vector<const std::string*> groups;
      for (const auto& c : classifiers) groups.push_back(&c);
      groups.push_back(nullptr);
      for (const auto* classifier : groups) {
        ComparisonLine line{def.baseline, def.candidate, scenario, classifier ? *classifier : "all", {}, {}};
        const auto a = rows_where(table.rows, scenario, classifier, def.baseline);
        const auto b = rows_where(table.rows, scenario, classifier, def.candidate);
        try {
          line.report = compare_methods(a, b, settings.compare);
        } catch (const Error& e) {
          line.error = e.what();
        }
        out.push_back(std::move(line));
      }
    }
  }
  return out;
}

std::string comparisons_csv(const std::vector<ComparisonLine>& lines) {
  std::string out = "baseline,candidate,scenario,classifier,pairs,measure,median_a,median_b,ratio,"
                    "p_value,exact_p,cliffs_d,acceptable,note\n";
  for (const auto& l : lines) {
    if (!l.report) {
      out += csv_line({l.baseline, l.candidate, l.scenario, l.classifier, "0", "", "", "", "", "", "", "", "",
                       l.error});
      continue;
    }
    for (const auto& m : l.report->per_measure) {
      out += csv_line({l.baseline, l.candidate, l.scenario, l.classifier, std::to_string(l.report->pairs),
                       to_string(m.measure), format_full(m.median_a), format_full(m.median_b),
                       format_full(m.ratio), format_full(m.p_value), m.exact_p ? "true" : "false",
                       format_full(m.cliffs_d), m.acceptable ? "true" : "false", m.note});
    }
  }
  return out;
}

// ---- per-group summaries ----

struct GroupKey {
  std::string scenario;
  std::string classifier;
  std::string metric_set;
};

std::vector<MeasureTriple> successful_measures(const std::vector<ResultRow>& rows) {
  std::vector<MeasureTriple> out;
  for (const auto& r : rows) {
    if (r.error.empty()) out.push_back(r.measures);
  }
  return out;
}

std::vector<double> measure_values(const std::vector<ResultRow>& rows, Measure m) {
  std::vector<double> out;
  for (const auto& r : rows) {
    if (r.error.empty()) out.push_back(select(r.measures, m));
  }
  return out;
}

std::vector<double> consistency_values(const std::vector<ResultRow>& rows) {
  std::vector<double> out;
  for (const auto& r : rows) {
    if (r.error.empty() && r.consistency) out.push_back(*r.consistency);
  }
  return out;
}

std::string median_or_dash(const std::vector<double>& v) {
  return v.empty() ? "-" : format_short(median(v));
}

std::string outlier_list(const std::vector<double>& v) {
  std::vector<std::string> parts;
  for (double x : v) parts.push_back(format_full(x));
  return join(parts, ";");
}

}  // namespace

// ---- FILTER selection and simplification ----

std::vector<FeatureSubset> FilterSelection::usable() const {
  std::vector<FeatureSubset> out;
  for (std::size_t i = 0; i < subsets.size(); ++i) {
    if (errors[i].empty()) out.push_back(subsets[i]);
  }
  return out;
}

FilterSelection select_filters(const Corpus& corpus, int cfs_bins, int workers) {
  FilterSelection sel;
  sel.subsets.resize(corpus.size());
  sel.errors.resize(corpus.size());
  const auto filter = MetricSet::filter();
  parallel_for(corpus.size(), workers, [&](std::size_t i) {
    try {
      sel.subsets[i] = select_features(filter, make_dataset(corpus[i]), cfs_bins);
    } catch (const Error& e) {
      sel.errors[i] = e.what();
    }
  });
  return sel;
}

Simplification simplify_corpus(const Corpus& corpus, const RunConfig& config,
                               std::optional<std::size_t> k, double phi) {
  Simplification s;
  s.filters = select_filters(corpus, config.cfs_bins, config.workers);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (!s.filters.errors[i].empty()) continue;
    if (config.coverage_over_targets_only && corpus.version_rank(i) == 0) continue;
    s.coverage_basis.push_back(s.filters.subsets[i]);
  }
  if (s.coverage_basis.empty()) {
    throw Error(ErrorKind::TooFewSamples, "no release produced a FILTER subset");
  }
  s.tally = tally_occurrences(s.coverage_basis);
  s.curve = choose_k(s.coverage_basis, config.k_max);
  s.k = k ? *k : s.curve.k;
  s.phi = phi;
  s.topk = top_k(s.tally, s.k);
  s.correlation = correlation_matrix(corpus, s.topk, ScenarioSpec{config.correlation_scenario});
  s.strong = strong_pairs(s.correlation.matrix, phi, config.strong_pairs_absolute);
  s.admissible = enumerate_admissible(s.topk, s.strong);
  s.ranking = minimum_subset(s.admissible, s.coverage_basis);
  return s;
}

std::vector<MetricSet> resolve_metric_sets(const RunConfig& config, const Corpus& corpus,
                                           const Simplification& simp, std::vector<std::string>* notes) {
  std::vector<MetricSet> out;
  for (const auto& def : config.metric_sets) {
    switch (def.type) {
      case MetricSetType::All:
        out.push_back(MetricSet::of(def.name, FeatureSubset::all()));
        break;
      case MetricSetType::Filter:
        out.push_back(MetricSet::filter(def.name));
        break;
      case MetricSetType::TopK:
        out.push_back(MetricSet::of(def.name, def.k ? top_k(simp.tally, *def.k) : simp.topk));
        break;
      case MetricSetType::Explicit:
        out.push_back(MetricSet::of(def.name, def.metrics));
        break;
      case MetricSetType::MaxRel:
        out.push_back(MetricSet::max_rel(def.name, *def.k));
        break;
      case MetricSetType::Mrmr:
        out.push_back(MetricSet::mrmr(def.name, *def.k));
        break;
      case MetricSetType::Min: {
        const std::size_t k = def.k.value_or(simp.k);
        const double phi = def.phi.value_or(simp.phi);
        std::vector<RankedCombination> ranking;
        FeatureSubset universe;
        if (k == simp.k && phi == simp.phi) {
          ranking = simp.ranking;
          universe = simp.topk;
        } else {
          universe = top_k(simp.tally, k);
          const auto corr = correlation_matrix(corpus, universe, ScenarioSpec{config.correlation_scenario});
          const auto strong = strong_pairs(corr.matrix, phi, config.strong_pairs_absolute);
          ranking = minimum_subset(enumerate_admissible(universe, strong), simp.coverage_basis);
        }
        if (ranking.empty()) {
          if (notes) {
            notes->push_back(def.name + ": no admissible proper subset of " + universe.to_string() +
                             ", using the whole universe");
          }
          out.push_back(MetricSet::of(def.name, universe));
        } else {
          out.push_back(MetricSet::of(def.name, ranking.front().combination));
        }
        break;
      }
    }
  }
  return out;
}

// ---- result rows ----

std::string result_row_json(const ResultRow& row) {
  ordered_json j;
  j["target"] = row.target;
  j["scenario"] = row.scenario;
  j["classifier"] = row.classifier;
  j["metric_set"] = row.metric_set;
  j["subset"] = row.subset;
  j["training"] = row.training;
  if (row.outcome) {
    j["outcome"] = {{"tp", row.outcome->tp}, {"fp", row.outcome->fp}, {"tn", row.outcome->tn},
                    {"fn", row.outcome->fn}};
  } else {
    j["outcome"] = nullptr;
  }
  j["precision"] = row.measures.precision;
  j["recall"] = row.measures.recall;
  j["f_measure"] = row.measures.f_measure;
  j["precision_undefined"] = row.measures.precision_undefined;
  j["recall_undefined"] = row.measures.recall_undefined;
  j["consistency"] = row.consistency ? json(*row.consistency) : json(nullptr);
  j["objective"] = row.objective;
  j["target_leak"] = row.target_leak;
  j["error"] = row.error;
  j["note"] = row.note;
  return j.dump();
}

ResultTable read_results(const fs::path& jsonl_path) {
  std::ifstream in(jsonl_path, std::ios::binary);
  if (!in) throw Error(ErrorKind::MissingArtifacts, jsonl_path.string() + ": cannot open");
  ResultTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = json::parse(line);
      ResultRow r;
      r.target = j.at("target").get<std::string>();
      r.scenario = j.at("scenario").get<std::string>();
      r.classifier = j.at("classifier").get<std::string>();
      r.metric_set = j.at("metric_set").get<std::string>();
      r.subset = j.at("subset").get<std::string>();
      r.training = j.at("training").get<std::vector<std::string>>();
      if (!j.at("outcome").is_null()) {
        const auto& o = j.at("outcome");
        r.outcome = Outcome{o.at("tp").get<std::int64_t>(), o.at("fp").get<std::int64_t>(),
                            o.at("tn").get<std::int64_t>(), o.at("fn").get<std::int64_t>()};
      }
      r.measures.precision = j.at("precision").get<double>();
      r.measures.recall = j.at("recall").get<double>();
      r.measures.f_measure = j.at("f_measure").get<double>();
      r.measures.precision_undefined = j.at("precision_undefined").get<bool>();
      r.measures.recall_undefined = j.at("recall_undefined").get<bool>();
      if (!j.at("consistency").is_null()) r.consistency = j.at("consistency").get<double>();
      r.objective = j.at("objective").get<std::string>();
      r.target_leak = j.at("target_leak").get<bool>();
      r.error = j.at("error").get<std::string>();
      r.note = j.at("note").get<std::string>();
      table.rows.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::MissingArtifacts,
                  jsonl_path.string() + ":" + std::to_string(line_no) + ": malformed record (" + e.what() + ")");
    }
  }
  return table;
}

namespace {

std::string results_csv(const ResultTable& table) {
  std::string out = "target,scenario,classifier,metric_set,subset,training,tp,fp,tn,fn,precision,recall,"
                    "f_measure,consistency,objective,target_leak,error,note\n";
  for (const auto& r : table.rows) {
    const auto count = [&](std::int64_t Outcome::*field) {
      return r.outcome ? std::to_string((*r.outcome).*field) : std::string();
    };
    out += csv_line({r.target, r.scenario, r.classifier, r.metric_set, r.subset, join(r.training, ";"),
                     count(&Outcome::tp), count(&Outcome::fp), count(&Outcome::tn), count(&Outcome::fn),
                     r.error.empty() ? format_full(r.measures.precision) : "",
                     r.error.empty() ? format_full(r.measures.recall) : "",
                     r.error.empty() ? format_full(r.measures.f_measure) : "",
                     r.consistency ? format_full(*r.consistency) : "", r.objective,
                     r.target_leak ? "true" : "false", r.error, r.note});
  }
  return out;
}

std::string filters_csv(const Corpus& corpus, const FilterSelection& f) {
  std::string out = "release,size,subset,error\n";
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const bool ok = f.errors[i].empty();
    out += csv_line({corpus[i].name(), ok ? std::to_string(f.subsets[i].size()) : "",
                     ok ? f.subsets[i].to_string() : "", f.errors[i]});
  }
  return out;
}

std::string occurrences_csv(const OccurrenceTally& tally) {
  std::string out = "metric,count,datasets\n";
  for (auto m : all_metrics()) {
    out += csv_line({mname(m), std::to_string(tally[m]), std::to_string(tally.n_datasets)});
  }
  return out;
}

std::string coverage_csv(const Simplification& s) {
  std::string out = "k,coverage,subset\n";
  for (std::size_t i = 0; i < s.curve.curve.size(); ++i) {
    out += csv_line({std::to_string(i + 1), format_full(s.curve.curve[i]), top_k(s.tally, i + 1).to_string()});
  }
  return out;
}

std::string matrix_csv(const CorrelationMatrix& m) {
  std::string out = "metric";
  for (auto id : m.metrics) out += std::string(",") + mname(id);
  out += "\n";
  for (std::size_t i = 0; i < m.metrics.size(); ++i) {
    out += mname(m.metrics[i]);
    for (std::size_t j = 0; j < m.metrics.size(); ++j) {
      out += "," + format_full(m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
    out += "\n";
  }
  return out;
}

std::string strong_pairs_csv(const Simplification& s) {
  std::string out = "metric_a,metric_b,r\n";
  for (const auto& [a, b] : s.strong) {
    out += csv_line({mname(a), mname(b), format_full(s.correlation.matrix.at(a, b))});
  }
  return out;
}

std::string combinations_csv(const Simplification& s) {
  std::string out = "rank,combination,size,coverage\n";
  for (std::size_t i = 0; i < s.ranking.size(); ++i) {
    const auto& r = s.ranking[i];
    out += csv_line({std::to_string(i + 1), r.combination.to_string(), std::to_string(r.combination.size()),
                     format_full(r.coverage)});
  }
  return out;
}

std::string metric_sets_csv(const RunConfig& config, const std::vector<MetricSet>& sets) {
  std::string out = "name,type,subset\n";
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const auto& s = sets[i];
    std::string subset;
    switch (s.selector) {
      case SelectorKind::Fixed: subset = s.fixed.to_string(); break;
      case SelectorKind::Filter: subset = "per training set (CFS)"; break;
      case SelectorKind::MaxRel: subset = "per training set (MaxRel, k=" + std::to_string(s.k) + ")"; break;
      case SelectorKind::Mrmr: subset = "per training set (mRMR, k=" + std::to_string(s.k) + ")"; break;
    }
    out += csv_line({s.name, to_string(config.metric_sets[i].type), subset});
  }
  return out;
}

std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

int cmd_run(const RunConfig& config, std::ostream& log) {
  LoadOptions load;
  load.parse.lenient = config.lenient;
  log << "loading " << config.manifest.string() << "\n";
  const auto corpus = load_corpus(config.manifest, load);
  log << "  " << corpus.size() << " releases, " << corpus.projects().size() << " projects\n";

  log << "selecting FILTER subsets and simplifying\n";
  const auto simp = simplify_corpus(corpus, config, config.k, config.phi);
  std::vector<std::string> notes;
  const auto sets = resolve_metric_sets(config, corpus, simp, &notes);
  log << "  k = " << simp.k << ", TOP" << simp.k << " = " << simp.topk.to_string() << ", minimum subset = "
      << (simp.ranking.empty() ? std::string("-") : simp.ranking.front().combination.to_string()) << "\n";
  for (const auto& n : notes) log << "  note: " << n << "\n";

  fs::create_directories(config.out);
  write_file(config.out / "filters.csv", filters_csv(corpus, simp.filters));
  write_file(config.out / "occurrences.csv", occurrences_csv(simp.tally));
  write_file(config.out / "coverage_curve.csv", coverage_csv(simp));
  write_file(config.out / "correlation_matrix.csv", matrix_csv(simp.correlation.matrix));
  write_file(config.out / "strong_pairs.csv", strong_pairs_csv(simp));
  write_file(config.out / "combinations.csv", combinations_csv(simp));
  write_file(config.out / "metric_sets.csv", metric_sets_csv(config, sets));

  GridOptions grid;
  grid.workers = config.workers;
  grid.cfs_bins = config.cfs_bins;
  std::mutex log_mutex;
  grid.progress = [&](const std::string& msg) {
    std::lock_guard lock(log_mutex);
    log << "  " << msg << "\n" << std::flush;
  };
  log << "running grid\n";
  const auto table = run_grid(corpus, config.scenarios, config.classifiers, sets, grid);

  std::string jsonl;
  std::size_t failed = 0;
  for (const auto& r : table.rows) {
    jsonl += result_row_json(r) + "\n";
    failed += !r.error.empty();
  }
  write_file(config.out / "results.jsonl", jsonl);
  write_file(config.out / "results.csv", results_csv(table));
  log << "  " << table.rows.size() << " rows, " << failed << " failed cells\n";

  const auto canonical = config.canonical_json();
  write_file(config.out / "config.json", canonical + "\n");

  ordered_json manifest;
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical)));
  manifest["toolkit"] = "metricslim";
  manifest["version"] = toolkit_version();
  manifest["config_hash"] = std::string("fnv1a64:") + hash;
  manifest["seed"] = config.seed;
  manifest["releases"] = corpus.size();
  manifest["rows"] = table.rows.size();
  manifest["failed_cells"] = failed;
  manifest["timestamp"] = timestamp_utc();
  std::vector<std::string> run_notes = {
      "metric values are log-filtered (ln(v+1)) before every statistic and model",
      "cross-project rows choose their training combination using the target's labels (target_leak=true)",
      "FILTER uses equal-frequency discretization with symmetrical uncertainty",
  };
  run_notes.insert(run_notes.end(), notes.begin(), notes.end());
  manifest["notes"] = run_notes;
  write_file(config.out / "run_manifest.json", manifest.dump(2) + "\n");

  log << "writing report\n";
  cmd_report(config.out);
  log << "done: " << config.out.string() << "\n";
  return 0;
}

std::string cmd_report(const fs::path& result_dir) {
  const auto results_path = result_dir / "results.jsonl";
  const auto config_path = result_dir / "config.json";
  for (const auto& p : {results_path, config_path}) {
    if (!fs::exists(p)) throw Error(ErrorKind::MissingArtifacts, p.string() + " not found");
  }
  const auto table = read_results(results_path);
  const auto settings = read_settings(config_path);

  const auto& rows = table.rows;
  const auto scenarios = distinct(rows, [](const ResultRow& r) -> const std::string& { return r.scenario; });
  const auto classifiers = distinct(rows, [](const ResultRow& r) -> const std::string& { return r.classifier; });
  const auto sets = distinct(rows, [](const ResultRow& r) -> const std::string& { return r.metric_set; });
  const auto targets = distinct(rows, [](const ResultRow& r) -> const std::string& { return r.target; });

  std::size_t failed = 0;
  for (const auto& r : rows) failed += !r.error.empty();

  std::string md = "# Defect prediction results\n\n";
  md += std::to_string(rows.size()) + " result rows: " + std::to_string(targets.size()) + " targets, " +
        std::to_string(scenarios.size()) + " scenarios, " + std::to_string(classifiers.size()) +
        " classifiers, " + std::to_string(sets.size()) + " metric sets; " + std::to_string(failed) +
        " failed cells.\n\n";

  // Medians per scenario.
  md += "## Median performance\n\n";
  for (const auto& scenario : scenarios) {
    md += "### " + scenario + "\n\n";
    MdTable t({"classifier", "metric set", "n", "precision", "recall", "f_measure", "consistency"});
    for (const auto& c : classifiers) {
      for (const auto& s : sets) {
        const auto g = rows_where(rows, scenario, &c, s);
        const auto p = measure_values(g, Measure::Precision);
        t.add({c, s, std::to_string(p.size()), median_or_dash(p),
               median_or_dash(measure_values(g, Measure::Recall)),
               median_or_dash(measure_values(g, Measure::FMeasure)), median_or_dash(consistency_values(g))});
      }
    }
    md += t.str() + "\n";
  }

  // Paired comparisons.
  const auto lines = comparison_lines(table, settings);
  write_file(result_dir / "comparisons.csv", comparisons_csv(lines));
  if (!settings.comparisons.empty()) {
    md += "## Comparisons\n\n";
    md += "Ratio is median(candidate) / median(baseline); p from the Wilcoxon signed-rank test; d is Cliff's "
          "delta (baseline first). A row is acceptable when ratio > " +
          format_short(settings.compare.ratio_threshold) + " or p > " + format_short(settings.compare.significance) +
          ".\n\n";
    for (const auto& def : settings.comparisons) {
      md += "### " + def.candidate + " vs " + def.baseline + "\n\n";
      MdTable t({"scenario", "classifier", "measure", "pairs", def.baseline, def.candidate, "ratio", "p", "d",
                 "acceptable"});
      for (const auto& l : lines) {
        if (l.baseline != def.baseline || l.candidate != def.candidate) continue;
        if (!l.report) {
          t.add({l.scenario, l.classifier, "-", "0", "-", "-", "-", "-", "-", l.error});
          continue;
        }
        for (const auto& m : l.report->per_measure) {
          std::string ok = m.acceptable ? "yes" : "no";
          if (!m.note.empty()) ok += " (" + m.note + ")";
          t.add({l.scenario, l.classifier, to_string(m.measure), std::to_string(l.report->pairs),
                 format_short(m.median_a), format_short(m.median_b), format_short(m.ratio), format_short(m.p_value),
                 format_short(m.cliffs_d), ok});
        }
      }
      md += t.str() + "\n";
    }
  }

  // Threshold counts.
  std::string tc_csv = "scenario,classifier,metric_set,rows,precision,recall,f_measure,total\n";
  md += "## Threshold counts\n\n";
  md += "Rows with precision > " + format_short(settings.thresholds.precision) + ", recall > " +
        format_short(settings.thresholds.recall) + ", F-measure > " + format_short(settings.thresholds.f_measure) +
        "; total counts rows above both the precision and recall thresholds.\n\n";
  {
    MdTable t({"scenario", "classifier", "metric set", "rows", "precision", "recall", "f_measure", "total"});
    for (const auto& scenario : scenarios) {
      std::vector<const std::string*> groups;
      for (const auto& c : classifiers) groups.push_back(&c);
      groups.push_back(nullptr);
      for (const auto* c : groups) {
        for (const auto& s : sets) {
          const auto m = successful_measures(rows_where(rows, scenario, c, s));
          const auto counts = threshold_counts(m, settings.thresholds);
          const std::string cname = c ? *c : "all";
          tc_csv += csv_line({scenario, cname, s, std::to_string(m.size()), std::to_string(counts.precision),
                              std::to_string(counts.recall), std::to_string(counts.f_measure),
                              std::to_string(counts.total)});
          if (!c) {
            t.add({scenario, cname, s, std::to_string(m.size()), std::to_string(counts.precision),
                   std::to_string(counts.recall), std::to_string(counts.f_measure), std::to_string(counts.total)});
          }
        }
      }
    }
    md += t.str() + "\n";
  }
  write_file(result_dir / "threshold_counts.csv", tc_csv);

  // ANOVA of consistency across classifiers.
  std::string anova_csv = "scenario,metric_set,groups,observations,f_statistic,p_value,ss_between,ss_within,"
                          "df_between,df_within,note\n";
  md += "## Consistency across classifiers (one-way ANOVA)\n\n";
  {
    MdTable t({"scenario", "metric set", "F", "p", "df", "note"});
    for (const auto& scenario : scenarios) {
      for (const auto& s : sets) {
        std::vector<std::vector<double>> groups;
        std::size_t obs = 0;
        for (const auto& c : classifiers) {
          auto v = consistency_values(rows_where(rows, scenario, &c, s));
          obs += v.size();
          if (!v.empty()) groups.push_back(std::move(v));
        }
        try {
          const auto a = anova_oneway(groups);
          const std::string note = a.zero_within_variance ? "zero within-group variance" : "";
          anova_csv += csv_line({scenario, s, std::to_string(groups.size()), std::to_string(obs),
                                 format_full(a.f_statistic), format_full(a.p_value), format_full(a.ss_between),
                                 format_full(a.ss_within), format_full(a.df_between), format_full(a.df_within),
                                 note});
          t.add({scenario, s, format_short(a.f_statistic), format_short(a.p_value),
                 format_full(a.df_between) + ", " + format_full(a.df_within), note});
        } catch (const Error& e) {
          anova_csv += csv_line({scenario, s, std::to_string(groups.size()), std::to_string(obs), "", "", "", "",
                                 "", "", e.what()});
          t.add({scenario, s, "-", "-", "-", e.what()});
        }
      }
    }
    md += t.str() + "\n";
  }
  write_file(result_dir / "anova.csv", anova_csv);

  // Boxplot quantiles for external plotting.
  std::string box = "scenario,classifier,metric_set,measure,n,min,q1,median,q3,max,outliers\n";
  for (const auto& scenario : scenarios) {
    for (const auto& c : classifiers) {
      for (const auto& s : sets) {
        const auto g = rows_where(rows, scenario, &c, s);
        for (auto m : {Measure::Precision, Measure::Recall, Measure::FMeasure}) {
          const auto v = measure_values(g, m);
          if (v.empty()) continue;
          const auto b = boxplot(v);
          box += csv_line({scenario, c, s, to_string(m), std::to_string(v.size()), format_full(b.min),
                           format_full(b.q1), format_full(b.median), format_full(b.q3), format_full(b.max),
                           outlier_list(b.outliers)});
        }
      }
    }
  }
  write_file(result_dir / "boxplots.csv", box);
  write_file(result_dir / "report.md", md);
  return md;
}

// ---- renderers for the stand-alone subcommands ----

std::string render_summary(const std::vector<SummaryRow>& rows) {
  MdTable t({"project", "release", "instances", "defective", "% defective"});
  std::size_t inst = 0, def = 0;
  for (const auto& r : rows) {
    char pct[32];
    std::snprintf(pct, sizeof pct, "%.1f", r.percent_defective);
    t.add({r.project, r.version, std::to_string(r.instances), std::to_string(r.defective), pct});
    inst += r.instances;
    def += r.defective;
  }
  return t.str() + "\n" + std::to_string(rows.size()) + " releases, " + std::to_string(inst) + " instances, " +
         std::to_string(def) + " defective\n";
}

std::string render_filters(const Corpus& corpus, const FilterSelection& filters) {
  MdTable t({"release", "size", "FILTER subset"});
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (filters.errors[i].empty()) {
      t.add({corpus[i].name(), std::to_string(filters.subsets[i].size()), filters.subsets[i].to_string()});
    } else {
      t.add({corpus[i].name(), "-", filters.errors[i]});
    }
  }
  return t.str();
}

std::string render_topk(const Simplification& simp) {
  const auto metrics = all_metrics();
  std::vector<MetricId> order(metrics.begin(), metrics.end());
  std::stable_sort(order.begin(), order.end(),
                   [&](MetricId a, MetricId b) { return simp.tally[a] > simp.tally[b]; });
  MdTable occ({"metric", "occurrences"});
  for (auto m : order) occ.add({mname(m), std::to_string(simp.tally[m])});
  MdTable cov({"k", "coverage", "Top-k"});
  for (std::size_t i = 0; i < simp.curve.curve.size(); ++i) {
    cov.add({std::to_string(i + 1), format_short(simp.curve.curve[i]), top_k(simp.tally, i + 1).to_string()});
  }
  return "Occurrences over " + std::to_string(simp.tally.n_datasets) + " FILTER subsets\n\n" + occ.str() +
         "\nCoverage curve\n\n" + cov.str() + "\nk = " + std::to_string(simp.k) + ": " + simp.topk.to_string() +
         "\n";
}

std::string render_minimize(const Simplification& simp, double phi) {
  const auto& m = simp.correlation.matrix;
  std::vector<std::string> header{""};
  for (auto id : m.metrics) header.push_back(mname(id));
  MdTable mat(header);
  for (std::size_t i = 0; i < m.metrics.size(); ++i) {
    std::vector<std::string> row{mname(m.metrics[i])};
    for (std::size_t j = 0; j < m.metrics.size(); ++j) {
      row.push_back(format_short(m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
    }
    mat.add(row);
  }
  std::string out = "Median correlation over " + std::to_string(simp.correlation.targets_used.size()) +
                    " targets (" + std::to_string(simp.correlation.targets_skipped.size()) + " skipped)\n\n" +
                    mat.str() + "\nStrong pairs (r > " + format_short(phi) + "):";
  if (simp.strong.empty()) out += " none";
  for (const auto& [a, b] : simp.strong) out += std::string(" ") + mname(a) + "-" + mname(b);
  out += "\n\n";
  MdTable rank({"rank", "combination", "coverage"});
  for (std::size_t i = 0; i < simp.ranking.size(); ++i) {
    rank.add({std::to_string(i + 1), simp.ranking[i].combination.to_string(),
              format_short(simp.ranking[i].coverage)});
  }
  out += std::to_string(simp.admissible.size()) + " admissible combinations\n\n" + rank.str();
  if (!simp.ranking.empty()) out += "\nMinimum metric subset: " + simp.ranking.front().combination.to_string() + "\n";
  return out;
}

}  // namespace metricslim
