#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "metricslim/comparison.hpp"
#include "metricslim/learners.hpp"
#include "metricslim/scenarios.hpp"
#include "metricslim/stats.hpp"

namespace metricslim {

enum class MetricSetType { All, Filter, TopK, Min, Explicit, MaxRel, Mrmr };

const char* to_string(MetricSetType type) noexcept;

struct MetricSetDef {
  std::string name;
  MetricSetType type = MetricSetType::All;
  std::optional<std::size_t> k;  // TOPK / MIN: nullopt = run-wide k; MaxRel / mRMR: required
  std::optional<double> phi;     // MIN: nullopt = run-wide phi
  FeatureSubset metrics;         // Explicit
};

struct ComparisonDef {
  std::string baseline;   // A, e.g. ALL
  std::string candidate;  // B, e.g. TOP5
};

/// Everything a `run` needs. Loaded from JSON; see README for the schema.
struct RunConfig {
  std::filesystem::path manifest;
  std::vector<ScenarioSpec> scenarios;
  std::vector<ClassifierSpec> classifiers;
  /// Parallel to `classifiers`: true when the entry pinned its own seed.
  std::vector<bool> classifier_seed_pinned;
  std::vector<MetricSetDef> metric_sets;
  std::vector<ComparisonDef> comparisons;
  Thresholds thresholds;
  CompareOptions compare;
  std::optional<std::size_t> k;  // nullopt = choose by coverage peak
  std::size_t k_max = 10;
  double phi = 0.6;
  bool strong_pairs_absolute = false;
  ScenarioKind correlation_scenario = ScenarioKind::WpdpNearest;
  bool coverage_over_targets_only = false;
  std::uint64_t seed = 1;
  int workers = 1;
  int cfs_bins = 10;
  bool lenient = false;
  std::filesystem::path out = "results";

  /// Replaces the run seed and every classifier seed that was not pinned.
  void override_seed(std::uint64_t new_seed);

  /// Canonical JSON of everything that can change results. `out` and
  /// `workers` are left out, so the hash is stable across both.
  std::string canonical_json() const;
};

/// Throws Error(ConfigError) naming the offending line (syntax) or field path.
RunConfig parse_run_config(const std::string& json_text, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);
/// All defaults, reading the given manifest.
RunConfig run_config_for_manifest(const std::filesystem::path& manifest);

}  // namespace metricslim
