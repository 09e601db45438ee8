#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "metricslim/config.hpp"
#include "metricslim/corpus.hpp"
#include "metricslim/scenarios.hpp"
#include "metricslim/simplify.hpp"

namespace metricslim {

const char* toolkit_version() noexcept;

/// Per-release FILTER subsets over whole releases (corpus order).
struct FilterSelection {
  std::vector<FeatureSubset> subsets;
  std::vector<std::string> errors;  // per release, empty on success
  /// Successful subsets only, used for tallies and coverage.
  std::vector<FeatureSubset> usable() const;
};

FilterSelection select_filters(const Corpus& corpus, int cfs_bins, int workers);

struct Simplification {
  FilterSelection filters;
  std::vector<FeatureSubset> coverage_basis;
  OccurrenceTally tally;
  KChoice curve;
  std::size_t k = 0;
  double phi = 0.6;
  FeatureSubset topk;
  CorrelationResult correlation;
  std::vector<MetricPair> strong;
  std::vector<FeatureSubset> admissible;
  std::vector<RankedCombination> ranking;
};

/// Tally -> Top-k -> correlation matrix -> strong pairs -> admissible ranking.
Simplification simplify_corpus(const Corpus& corpus, const RunConfig& config,
                               std::optional<std::size_t> k, double phi);

/// Resolves named metric-set definitions to grid metric sets.
/// Fallbacks (e.g. MIN over a one-metric universe) are described in `notes`.
std::vector<MetricSet> resolve_metric_sets(const RunConfig& config, const Corpus& corpus,
                                           const Simplification& simp,
                                           std::vector<std::string>* notes = nullptr);

/// Shortest round-trip decimal.
std::string format_full(double v);
/// Three decimals for human tables.
std::string format_short(double v);

std::uint64_t fnv1a64(const std::string& bytes) noexcept;

/// Executes the configured pipeline and writes every artifact into config.out.
/// Returns the process exit status.
int cmd_run(const RunConfig& config, std::ostream& log);

/// Reads a previous run directory and writes report.md, boxplots.csv,
/// threshold_counts.csv and anova.csv next to it. Throws Error(MissingArtifacts).
std::string cmd_report(const std::filesystem::path& result_dir);

/// Result rows round-trip through results.jsonl.
std::string result_row_json(const ResultRow& row);
ResultTable read_results(const std::filesystem::path& jsonl_path);

/// Human-readable tables for the stand-alone subcommands.
std::string render_summary(const std::vector<SummaryRow>& rows);
std::string render_filters(const Corpus& corpus, const FilterSelection& filters);
std::string render_topk(const Simplification& simp);
std::string render_minimize(const Simplification& simp, double phi);

}  // namespace metricslim
