#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <vector>

#include "metricslim/dataset.hpp"
#include "metricslim/error.hpp"
#include "metricslim/metric.hpp"

namespace metricslim {

/// Sample Pearson correlation of two equally sized vectors. Returns 0 when
/// either side has zero variance.
template <typename DerivedX, typename DerivedY>
typename DerivedX::Scalar pearson(const Eigen::DenseBase<DerivedX>& x,
                                  const Eigen::DenseBase<DerivedY>& y) {
  using Scalar = typename DerivedX::Scalar;
  if (x.size() != y.size()) {
    throw Error(ErrorKind::LengthMismatch, "pearson: vectors differ in length");
  }
  if (x.size() < 2) throw Error(ErrorKind::TooFewSamples, "pearson: need at least 2 samples");
  const auto n = static_cast<Scalar>(x.size());
  const Scalar mx = x.derived().sum() / n;
  const Scalar my = y.derived().template cast<Scalar>().sum() / n;
  const auto dx = (x.derived().array() - mx).eval();
  const auto dy = (y.derived().template cast<Scalar>().array() - my).eval();
  const Scalar sxx = dx.square().sum();
  const Scalar syy = dy.square().sum();
  if (sxx == Scalar(0) || syy == Scalar(0)) return Scalar(0);
  const Scalar r = (dx * dy).sum() / std::sqrt(sxx * syy);
  return std::clamp(r, Scalar(-1), Scalar(1));
}

/// Per-instance bin assignment of one column.
struct DiscretizedColumn {
  std::vector<int> bins;
  int bin_count = 0;
  /// Set when every input value was equal (single bin).
  bool degenerate = false;
};

/// Equal-frequency bin edges fitted on training values: a value goes to the
/// first bin whose upper edge is >= it; values above the last edge fall into
/// the last bin. Equal values therefore always share the lowest bin they reach.
class EqualFrequencyBinner {
 public:
  EqualFrequencyBinner() = default;
  EqualFrequencyBinner(const Eigen::Ref<const Eigen::VectorXd>& values, int bins);

  int bin_of(double value) const noexcept;
  int bin_count() const noexcept { return bin_count_; }
  bool degenerate() const noexcept { return degenerate_; }
  const std::vector<double>& upper_edges() const noexcept { return upper_edges_; }

 private:
  std::vector<double> upper_edges_;
  int bin_count_ = 1;
  bool degenerate_ = false;
};

/// Requires bins >= 2 and values.size() >= bins.
DiscretizedColumn discretize_equal_frequency(const Eigen::Ref<const Eigen::VectorXd>& values,
                                             int bins);

DiscretizedColumn class_column(const Eigen::VectorXi& labels);

double entropy(const DiscretizedColumn& a);
double mutual_information(const DiscretizedColumn& a, const DiscretizedColumn& b);
/// 2 I(a;b) / (H(a) + H(b)), 0 when both entropies vanish.
double symmetrical_uncertainty(const DiscretizedColumn& a, const DiscretizedColumn& b);

inline constexpr int kDefaultCfsBins = 10;

/// Caches the discretized columns and symmetrical uncertainties of one labeled
/// dataset for repeated subset evaluations.
class CfsEvaluator {
 public:
  CfsEvaluator(const Dataset& data, int bins = kDefaultCfsBins);

  double feature_class(MetricId m) const noexcept { return feature_class_[index_of(m)]; }
  double feature_feature(MetricId a, MetricId b) const;
  double merit(const FeatureSubset& subset) const;

 private:
  std::vector<DiscretizedColumn> columns_;
  std::vector<double> feature_class_;
  mutable Eigen::MatrixXd pair_cache_;  // NaN = not yet computed
};

/// k * mean(SU(f, class)) / sqrt(k + k(k-1) * mean(SU(f_i, f_j))).
double cfs_merit(const FeatureSubset& subset, const Dataset& data, int bins = kDefaultCfsBins);

/// Forward greedy search on CFS merit, strict-improvement stopping, ties to
/// the canonically earliest metric. Throws Error(SingleClassData).
FeatureSubset greedy_stepwise_cfs(const Dataset& data, int bins = kDefaultCfsBins);

/// The k metrics with the largest I(f; class).
FeatureSubset max_rel(const Dataset& data, std::size_t k, int bins = kDefaultCfsBins);

/// Greedy max I(f; class) - mean_{s in selected} I(f; s).
FeatureSubset mrmr(const Dataset& data, std::size_t k, int bins = kDefaultCfsBins);

}  // namespace metricslim
