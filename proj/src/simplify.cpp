#include "metricslim/simplify.hpp"

#include <algorithm>
#include <numeric>

#include "metricslim/dataset.hpp"
#include "metricslim/error.hpp"
#include "metricslim/features.hpp"
#include "metricslim/stats.hpp"

namespace metricslim {

OccurrenceTally tally_occurrences(const std::vector<FeatureSubset>& filter_subsets) {
  if (filter_subsets.empty()) throw Error(ErrorKind::InvalidArgument, "no filter subsets to tally");
  OccurrenceTally tally;
  tally.n_datasets = filter_subsets.size();
  for (const auto& s : filter_subsets) {
    for (auto i : s.indices()) ++tally.counts[i];
  }
  return tally;
}

FeatureSubset top_k(const OccurrenceTally& tally, std::size_t k) {
  if (k < 1 || k > kMetricCount) throw Error(ErrorKind::InvalidArgument, "k must be in [1, 20]");
  std::array<std::size_t, kMetricCount> order{};
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return tally.counts[a] > tally.counts[b];
  });
  FeatureSubset out;
  for (std::size_t i = 0; i < k; ++i) out.insert(metric_at(order[i]));
  return out;
}

double coverage(const std::vector<FeatureSubset>& filter_subsets, const FeatureSubset& candidate) {
  if (filter_subsets.empty()) throw Error(ErrorKind::InvalidArgument, "no filter subsets");
  if (candidate.empty()) throw Error(ErrorKind::EmptySubset, "coverage of an empty candidate");
  double sum = 0.0;
  for (const auto& f : filter_subsets) {
    sum += static_cast<double>(f.intersection_size(candidate)) /
           static_cast<double>(f.union_size(candidate));
  }
  return sum / static_cast<double>(filter_subsets.size());
}

KChoice choose_k(const std::vector<FeatureSubset>& filter_subsets, std::size_t k_max) {
  if (k_max < 1 || k_max > kMetricCount) {
    throw Error(ErrorKind::InvalidArgument, "k_max must be in [1, 20]");
  }
  const auto tally = tally_occurrences(filter_subsets);
  KChoice choice;
  double best = -1.0;
  for (std::size_t k = 1; k <= k_max; ++k) {
    const double c = coverage(filter_subsets, top_k(tally, k));
    choice.curve.push_back(c);
    if (c > best) {
      best = c;
      choice.k = k;
    }
  }
  return choice;
}

double CorrelationMatrix::at(MetricId a, MetricId b) const {
  const auto ia = std::find(metrics.begin(), metrics.end(), a);
  const auto ib = std::find(metrics.begin(), metrics.end(), b);
  if (ia == metrics.end() || ib == metrics.end()) {
    throw Error(ErrorKind::InvalidArgument, "metric not in correlation matrix");
  }
  return values(ia - metrics.begin(), ib - metrics.begin());
}

CorrelationResult correlation_matrix(const Corpus& corpus, const FeatureSubset& subset,
                                     const std::vector<PredictionTask>& tasks) {
  if (subset.size() < 2) throw Error(ErrorKind::InvalidArgument, "correlation matrix needs >= 2 metrics");
  CorrelationResult result;
  result.matrix.metrics = subset.members();
  const auto k = static_cast<Eigen::Index>(subset.size());
  const auto cols = subset.indices();
  std::vector<Eigen::MatrixXd> per_target;
  for (const auto& task : tasks) {
    if (task.training.empty()) {
      result.targets_skipped.push_back(task.target);
      continue;
    }
    const auto training = make_dataset(corpus, task.training);
    if (training.rows() < 2) {
      result.targets_skipped.push_back(task.target);
      continue;
    }
    Eigen::MatrixXd r = Eigen::MatrixXd::Identity(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
      for (Eigen::Index j = i + 1; j < k; ++j) {
        const double v = pearson(training.features.col(static_cast<Eigen::Index>(cols[static_cast<std::size_t>(i)])),
                                 training.features.col(static_cast<Eigen::Index>(cols[static_cast<std::size_t>(j)])));
        r(i, j) = v;
        r(j, i) = v;
      }
    }
    per_target.push_back(std::move(r));
    result.targets_used.push_back(task.target);
  }
  if (per_target.empty()) {
    throw Error(ErrorKind::NoTrainingData, "no task has training data for the correlation matrix");
  }
  Eigen::MatrixXd med = Eigen::MatrixXd::Identity(k, k);
  Eigen::VectorXd sample(static_cast<Eigen::Index>(per_target.size()));
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i + 1; j < k; ++j) {
      for (std::size_t t = 0; t < per_target.size(); ++t) {
        sample(static_cast<Eigen::Index>(t)) = per_target[t](i, j);
      }
      med(i, j) = median(sample);
      med(j, i) = med(i, j);
    }
  }
  result.matrix.values = std::move(med);
  return result;
}

CorrelationResult correlation_matrix(const Corpus& corpus, const FeatureSubset& subset,
                                     const ScenarioSpec& scenario) {
  auto tasks = build_tasks(corpus, scenario);
  for (auto& t : tasks) {
    if (t.kind == ScenarioKind::CpdpExhaustive) t.training = t.candidates;
  }
  return correlation_matrix(corpus, subset, tasks);
}

std::vector<MetricPair> strong_pairs(const CorrelationMatrix& r, double phi, bool absolute) {
  if (!(phi > 0.0 && phi < 1.0)) throw Error(ErrorKind::InvalidArgument, "phi must be in (0, 1)");
  std::vector<MetricPair> out;
  const auto k = r.metrics.size();
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      double v = r.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (absolute) v = std::abs(v);
      if (v > phi) {
        auto a = r.metrics[i], b = r.metrics[j];
        if (index_of(b) < index_of(a)) std::swap(a, b);
        out.emplace_back(a, b);
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const MetricPair& x, const MetricPair& y) {
    return std::pair(index_of(x.first), index_of(x.second)) < std::pair(index_of(y.first), index_of(y.second));
  });
  return out;
}

std::vector<FeatureSubset> enumerate_admissible(const FeatureSubset& topk,
                                                const std::vector<MetricPair>& strong) {
  const auto members = topk.members();
  const std::size_t k = members.size();
  if (k < 2) throw Error(ErrorKind::InvalidArgument, "minimization needs at least 2 metrics");
  std::vector<FeatureSubset> out;
  const std::uint32_t full = (1u << k) - 1u;
  for (std::uint32_t mask = 1; mask < full; ++mask) {
    FeatureSubset s;
    for (std::size_t i = 0; i < k; ++i) {
      if (mask & (1u << i)) s.insert(members[i]);
    }
    const bool excluded = std::any_of(strong.begin(), strong.end(), [&](const MetricPair& p) {
      return s.contains(p.first) && s.contains(p.second);
    });
    if (!excluded) out.push_back(s);
  }
  std::sort(out.begin(), out.end(), [](const FeatureSubset& a, const FeatureSubset& b) {
    return canonical_less(a, b);
  });
  return out;
}

std::vector<RankedCombination> minimum_subset(const std::vector<FeatureSubset>& admissible,
                                              const std::vector<FeatureSubset>& filter_subsets) {
  if (admissible.empty()) throw Error(ErrorKind::InvalidArgument, "no admissible combinations");
  std::vector<RankedCombination> ranked;
  ranked.reserve(admissible.size());
  for (const auto& c : admissible) ranked.push_back({c, coverage(filter_subsets, c)});
  std::stable_sort(ranked.begin(), ranked.end(), [](const RankedCombination& a, const RankedCombination& b) {
    if (a.coverage != b.coverage) return a.coverage > b.coverage;
    return canonical_less(a.combination, b.combination);
  });
  return ranked;
}

}  // namespace metricslim
