#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "metricslim/corpus.hpp"
#include "metricslim/dataset.hpp"
#include "metricslim/learners.hpp"
#include "metricslim/metric.hpp"
#include "metricslim/stats.hpp"

namespace metricslim {

enum class ScenarioKind { WpdpNearest, WpdpAllHistory, CpdpExhaustive };

const char* to_string(ScenarioKind kind) noexcept;
ScenarioKind parse_scenario_kind(const std::string& name);

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::WpdpNearest;
  int cpdp_max_releases = 3;
  Measure cpdp_objective = Measure::FMeasure;
};

/// Indices refer to Corpus::releases().
struct PredictionTask {
  std::size_t target = 0;
  std::vector<std::size_t> training;
  /// Cross-project tasks only: every release of another project. The
  /// training combination is chosen later, per classifier and metric set.
  std::vector<std::size_t> candidates;
  ScenarioKind kind = ScenarioKind::WpdpNearest;
};

/// One task per non-first release of every project, for all three kinds.
std::vector<PredictionTask> build_tasks(const Corpus& corpus, const ScenarioSpec& spec);

enum class SelectorKind { Fixed, Filter, MaxRel, Mrmr };

/// A named metric set: either a fixed subset or a selector rerun on every
/// training set (FILTER = greedy CFS, MaxRel / mRMR with `k` members).
struct MetricSet {
  std::string name;
  SelectorKind selector = SelectorKind::Fixed;
  FeatureSubset fixed;
  std::size_t k = 5;

  static MetricSet filter(std::string name = "FILTER") {
    return {std::move(name), SelectorKind::Filter, {}, 0};
  }
  static MetricSet of(std::string name, FeatureSubset subset) {
    return {std::move(name), SelectorKind::Fixed, subset, subset.size()};
  }
  static MetricSet max_rel(std::string name, std::size_t k) {
    return {std::move(name), SelectorKind::MaxRel, {}, k};
  }
  static MetricSet mrmr(std::string name, std::size_t k) {
    return {std::move(name), SelectorKind::Mrmr, {}, k};
  }
};

/// The subset a metric set yields on one training set. Throws
/// Error(SingleClassData) when FILTER cannot run.
FeatureSubset select_features(const MetricSet& set, const Dataset& training, int cfs_bins = 10);

struct CpdpResult {
  std::vector<std::size_t> combination;  // empty when every combination failed
  Outcome outcome;
  double objective = 0.0;
  FeatureSubset subset;  // the subset the winning model used
  std::size_t evaluated = 0;
  std::size_t skipped = 0;  // single-class training combinations
};

/// Number of combinations of 1..max_releases out of `candidates`.
std::size_t cpdp_combination_count(std::size_t candidates, int max_releases);

/// Calls `visit` on every combination of 1..max_releases elements of `pool`,
/// in size order, then lexicographic order of positions.
void for_each_combination(const std::vector<std::size_t>& pool, int max_releases,
                          const std::function<void(const std::vector<std::size_t>&)>& visit);

/// Trains on every union of up to spec.cpdp_max_releases foreign releases,
/// evaluates on the target and keeps the combination maximizing the
/// objective (ties: fewer releases, then enumeration order).
/// Selection looks at the target's labels by construction.
CpdpResult exhaustive_cpdp(const Corpus& corpus, std::size_t target, const ScenarioSpec& spec,
                           const ClassifierSpec& classifier, const MetricSet& metric_set,
                           int cfs_bins = 10);

struct ResultRow {
  std::string target;
  std::string scenario;
  std::string classifier;
  std::string metric_set;
  std::string subset;   // metrics actually used, "CBO+LOC"
  std::vector<std::string> training;  // training release names
  std::optional<Outcome> outcome;
  MeasureTriple measures;
  std::optional<double> consistency;
  std::string objective;  // CPDP selection measure, empty otherwise
  bool target_leak = false;  // CPDP: training chosen using target labels
  std::string error;      // empty on success
  std::string note;
};

struct ResultTable {
  std::vector<ResultRow> rows;
};

struct GridOptions {
  int workers = 1;
  int cfs_bins = 10;
  std::function<void(const std::string&)> progress;
};

/// Row order: target (corpus order), scenario, classifier, metric set, each in
/// the given order. Per-cell failures land in ResultRow::error.
ResultTable run_grid(const Corpus& corpus, const std::vector<ScenarioSpec>& scenarios,
                     const std::vector<ClassifierSpec>& classifiers,
                     const std::vector<MetricSet>& metric_sets, const GridOptions& options = {});

/// Runs fn(i) for i in [0, count) on up to `workers` threads.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace metricslim
