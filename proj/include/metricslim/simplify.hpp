#pragma once

#include <Eigen/Core>

#include <array>
#include <utility>
#include <vector>

#include "metricslim/corpus.hpp"
#include "metricslim/metric.hpp"
#include "metricslim/scenarios.hpp"

namespace metricslim {

struct OccurrenceTally {
  std::array<std::size_t, kMetricCount> counts{};
  std::size_t n_datasets = 0;

  std::size_t operator[](MetricId m) const noexcept { return counts[index_of(m)]; }
};

OccurrenceTally tally_occurrences(const std::vector<FeatureSubset>& filter_subsets);

/// The k most frequent metrics; equal counts go to the canonically earlier metric.
FeatureSubset top_k(const OccurrenceTally& tally, std::size_t k);

/// Mean over datasets of |F_i ∩ c| / |F_i ∪ c|.
double coverage(const std::vector<FeatureSubset>& filter_subsets, const FeatureSubset& candidate);

struct KChoice {
  std::size_t k = 0;
  std::vector<double> curve;  // curve[k - 1] = coverage of top_k(k)
};

/// argmax_k coverage(top_k(k)) for k in [1, k_max]; ties to the smallest k.
KChoice choose_k(const std::vector<FeatureSubset>& filter_subsets, std::size_t k_max = 10);

/// Symmetric matrix over `subset.members()` with unit diagonal.
struct CorrelationMatrix {
  std::vector<MetricId> metrics;
  Eigen::MatrixXd values;

  double at(MetricId a, MetricId b) const;
};

struct CorrelationResult {
  CorrelationMatrix matrix;
  std::vector<std::size_t> targets_used;
  std::vector<std::size_t> targets_skipped;  // no training data
};

/// Pearson matrix over each task's training data, entry-wise median across tasks.
CorrelationResult correlation_matrix(const Corpus& corpus, const FeatureSubset& subset,
                                     const std::vector<PredictionTask>& tasks);

/// Resolves the scenario's training data per target first. Cross-project
/// targets use the union of all foreign releases.
CorrelationResult correlation_matrix(const Corpus& corpus, const FeatureSubset& subset,
                                     const ScenarioSpec& scenario);

using MetricPair = std::pair<MetricId, MetricId>;

/// Pairs with r > phi (strict). With `absolute`, |r| > phi.
std::vector<MetricPair> strong_pairs(const CorrelationMatrix& r, double phi = 0.6,
                                     bool absolute = false);

/// Proper non-empty subsets of `topk` not containing both ends of any strong
/// pair, ordered by size then canonical lexicographic order.
std::vector<FeatureSubset> enumerate_admissible(const FeatureSubset& topk,
                                                const std::vector<MetricPair>& strong);

struct RankedCombination {
  FeatureSubset combination;
  double coverage = 0.0;
};

/// Descending coverage; ties prefer smaller then canonically earlier sets.
/// The first entry is the minimum metric subset.
std::vector<RankedCombination> minimum_subset(const std::vector<FeatureSubset>& admissible,
                                              const std::vector<FeatureSubset>& filter_subsets);

}  // namespace metricslim
