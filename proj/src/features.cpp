#include "metricslim/features.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace metricslim {

EqualFrequencyBinner::EqualFrequencyBinner(const Eigen::Ref<const Eigen::VectorXd>& values,
                                           int bins) {
  const auto n = static_cast<std::size_t>(values.size());
  if (bins < 1 || n == 0) {
    throw Error(ErrorKind::InvalidArgument, "equal-frequency binning needs bins >= 1 and data");
  }
  std::vector<double> sorted(values.data(), values.data() + values.size());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() == sorted.back()) {
    degenerate_ = true;
    bin_count_ = 1;
    return;
  }
  bin_count_ = bins;
  // Sorted position p belongs to chunk floor(p * bins / n); chunk b ends at
  // ceil((b + 1) n / bins) - 1.
  for (int b = 0; b + 1 < bins; ++b) {
    const auto end = (static_cast<std::size_t>(b + 1) * n + static_cast<std::size_t>(bins) - 1) /
                         static_cast<std::size_t>(bins) -
                     1;
    upper_edges_.push_back(sorted[end]);
  }
}

int EqualFrequencyBinner::bin_of(double value) const noexcept {
  const auto it = std::lower_bound(upper_edges_.begin(), upper_edges_.end(), value);
  return static_cast<int>(it - upper_edges_.begin());
}

DiscretizedColumn discretize_equal_frequency(const Eigen::Ref<const Eigen::VectorXd>& values,
                                             int bins) {
  if (bins < 2) throw Error(ErrorKind::InvalidArgument, "bin count must be >= 2");
  if (values.size() < bins) {
    throw Error(ErrorKind::TooFewSamples, "fewer values than bins");
  }
  const EqualFrequencyBinner binner(values, bins);
  DiscretizedColumn out;
  out.bin_count = binner.bin_count();
  out.degenerate = binner.degenerate();
  out.bins.resize(static_cast<std::size_t>(values.size()));
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    out.bins[static_cast<std::size_t>(i)] = binner.bin_of(values(i));
  }
  return out;
}

DiscretizedColumn class_column(const Eigen::VectorXi& labels) {
  DiscretizedColumn out;
  out.bin_count = 2;
  out.bins.assign(labels.data(), labels.data() + labels.size());
  return out;
}

namespace {

double entropy_of_counts(const std::vector<std::size_t>& counts, double n) {
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log(p);
  }
  return h;
}

void check_lengths(const DiscretizedColumn& a, const DiscretizedColumn& b) {
  if (a.bins.size() != b.bins.size()) {
    throw Error(ErrorKind::LengthMismatch, "discretized columns differ in length");
  }
}

struct EntropyTriple {
  double ha = 0.0;
  double hb = 0.0;
  double hab = 0.0;
};

EntropyTriple joint_entropies(const DiscretizedColumn& a, const DiscretizedColumn& b) {
  check_lengths(a, b);
  const auto na = static_cast<std::size_t>(a.bin_count);
  const auto nb = static_cast<std::size_t>(b.bin_count);
  std::vector<std::size_t> ca(na, 0), cb(nb, 0), cab(na * nb, 0);
  for (std::size_t i = 0; i < a.bins.size(); ++i) {
    const auto x = static_cast<std::size_t>(a.bins[i]);
    const auto y = static_cast<std::size_t>(b.bins[i]);
    ++ca[x];
    ++cb[y];
    ++cab[x * nb + y];
  }
  const auto n = static_cast<double>(a.bins.size());
  return {entropy_of_counts(ca, n), entropy_of_counts(cb, n), entropy_of_counts(cab, n)};
}

// Bins = min(requested, n) so tiny training sets still discretize.
DiscretizedColumn scoring_column(const Eigen::Ref<const Eigen::VectorXd>& values, int bins) {
  const int b = std::min<int>(bins, static_cast<int>(values.size()));
  if (b < 2) {
    DiscretizedColumn out;
    out.bin_count = 1;
    out.degenerate = true;
    out.bins.assign(static_cast<std::size_t>(values.size()), 0);
    return out;
  }
  return discretize_equal_frequency(values, b);
}

std::vector<DiscretizedColumn> scoring_columns(const Dataset& data, int bins) {
  std::vector<DiscretizedColumn> out;
  out.reserve(kMetricCount);
  for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(kMetricCount); ++c) {
    out.push_back(scoring_column(data.features.col(c), bins));
  }
  return out;
}

void require_k(std::size_t k) {
  if (k < 1 || k > kMetricCount) throw Error(ErrorKind::InvalidArgument, "k must be in [1, 20]");
}

}  // namespace

double entropy(const DiscretizedColumn& a) {
  std::vector<std::size_t> counts(static_cast<std::size_t>(a.bin_count), 0);
  for (auto b : a.bins) ++counts[static_cast<std::size_t>(b)];
  return entropy_of_counts(counts, static_cast<double>(a.bins.size()));
}

double mutual_information(const DiscretizedColumn& a, const DiscretizedColumn& b) {
  const auto h = joint_entropies(a, b);
  return std::max(0.0, h.ha + h.hb - h.hab);
}

double symmetrical_uncertainty(const DiscretizedColumn& a, const DiscretizedColumn& b) {
  const auto h = joint_entropies(a, b);
  const double denom = h.ha + h.hb;
  if (denom <= 0.0) return 0.0;
  const double info = h.ha + h.hb - h.hab;
  return std::clamp(2.0 * info / denom, 0.0, 1.0);
}

CfsEvaluator::CfsEvaluator(const Dataset& data, int bins)
    : columns_(scoring_columns(data, bins)),
      pair_cache_(Eigen::MatrixXd::Constant(kMetricCount, kMetricCount,
                                            std::numeric_limits<double>::quiet_NaN())) {
  const auto cls = class_column(data.labels);
  feature_class_.reserve(kMetricCount);
  for (const auto& col : columns_) feature_class_.push_back(symmetrical_uncertainty(col, cls));
}

double CfsEvaluator::feature_feature(MetricId a, MetricId b) const {
  const auto i = static_cast<Eigen::Index>(index_of(a));
  const auto j = static_cast<Eigen::Index>(index_of(b));
  if (std::isnan(pair_cache_(i, j))) {
    const double su = symmetrical_uncertainty(columns_[index_of(a)], columns_[index_of(b)]);
    pair_cache_(i, j) = su;
    pair_cache_(j, i) = su;
  }
  return pair_cache_(i, j);
}

double CfsEvaluator::merit(const FeatureSubset& subset) const {
  if (subset.empty()) throw Error(ErrorKind::EmptySubset, "CFS merit of an empty subset");
  const auto members = subset.members();
  const auto k = static_cast<double>(members.size());
  double rcf = 0.0;
  for (auto m : members) rcf += feature_class(m);
  rcf /= k;
  double rff = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < members.size(); ++i) {
    for (std::size_t j = i + 1; j < members.size(); ++j) {
      rff += feature_feature(members[i], members[j]);
      ++pairs;
    }
  }
  if (pairs > 0) rff /= static_cast<double>(pairs);
  const double radicand = k + k * (k - 1.0) * rff;
  if (radicand <= 0.0) return 0.0;
  return k * rcf / std::sqrt(radicand);
}

double cfs_merit(const FeatureSubset& subset, const Dataset& data, int bins) {
  if (subset.empty()) throw Error(ErrorKind::EmptySubset, "CFS merit of an empty subset");
  return CfsEvaluator(data, bins).merit(subset);
}

FeatureSubset greedy_stepwise_cfs(const Dataset& data, int bins) {
  if (data.rows() < 2) throw Error(ErrorKind::TooFewSamples, "CFS needs at least 2 instances");
  if (!data.has_both_classes()) {
    throw Error(ErrorKind::SingleClassData, "CFS needs both classes present");
  }
  const CfsEvaluator eval(data, bins);
  FeatureSubset selected;
  double current = -std::numeric_limits<double>::infinity();
  while (selected.size() < kMetricCount) {
    double best = -std::numeric_limits<double>::infinity();
    std::optional<MetricId> best_metric;
    for (auto m : all_metrics()) {
      if (selected.contains(m)) continue;
      auto trial = selected;
      trial.insert(m);
      const double merit = eval.merit(trial);
      if (merit > best) {
        best = merit;
        best_metric = m;
      }
    }
    if (!best_metric || !(best > current)) break;
    selected.insert(*best_metric);
    current = best;
  }
  return selected;
}

FeatureSubset max_rel(const Dataset& data, std::size_t k, int bins) {
  require_k(k);
  const auto columns = scoring_columns(data, bins);
  const auto cls = class_column(data.labels);
  std::vector<double> relevance;
  for (const auto& col : columns) relevance.push_back(mutual_information(col, cls));
  std::vector<std::size_t> order(kMetricCount);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return relevance[a] > relevance[b]; });
  FeatureSubset out;
  for (std::size_t i = 0; i < k; ++i) out.insert(metric_at(order[i]));
  return out;
}

FeatureSubset mrmr(const Dataset& data, std::size_t k, int bins) {
  require_k(k);
  const auto columns = scoring_columns(data, bins);
  const auto cls = class_column(data.labels);
  std::vector<double> relevance;
  for (const auto& col : columns) relevance.push_back(mutual_information(col, cls));

  FeatureSubset selected;
  std::vector<std::size_t> chosen;
  std::vector<double> redundancy_sum(kMetricCount, 0.0);
  while (selected.size() < k) {
    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_index = kMetricCount;
    for (std::size_t f = 0; f < kMetricCount; ++f) {
      if (selected.contains(metric_at(f))) continue;
      double score = relevance[f];
      if (!chosen.empty()) score -= redundancy_sum[f] / static_cast<double>(chosen.size());
      if (score > best) {
        best = score;
        best_index = f;
      }
    }
    selected.insert(metric_at(best_index));
    chosen.push_back(best_index);
    for (std::size_t f = 0; f < kMetricCount; ++f) {
      if (!selected.contains(metric_at(f))) {
        redundancy_sum[f] += mutual_information(columns[f], columns[best_index]);
      }
    }
  }
  return selected;
}

}  // namespace metricslim
