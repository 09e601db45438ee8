#pragma once

#include <Eigen/Core>

#include <cmath>
#include <map>
#include <vector>

#include "metricslim/dataset.hpp"
#include "metricslim/features.hpp"
#include "metricslim/metric.hpp"
#include "metricslim/random.hpp"
#include "metricslim/simplify.hpp"

// Datasets and independent oracles shared by the unit tests and the
// acceptance runner.
namespace testing {

// Histogram entropy, natural log.
inline double h_oracle(const std::vector<int>& a) {
  std::map<int, double> counts;
  for (int v : a) counts[v] += 1.0;
  double h = 0.0;
  const double n = static_cast<double>(a.size());
  for (const auto& [v, c] : counts) h -= c / n * std::log(c / n);
  return h;
}

inline double mi_oracle(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> joint(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) joint[i] = a[i] * 1000 + b[i];
  return h_oracle(a) + h_oracle(b) - h_oracle(joint);
}

inline double su_oracle(const std::vector<int>& a, const std::vector<int>& b) {
  const double denom = h_oracle(a) + h_oracle(b);
  return denom == 0.0 ? 0.0 : 2.0 * mi_oracle(a, b) / denom;
}

inline std::vector<int> bins_of(const metricslim::Dataset& d, std::size_t col,
                                int bins = metricslim::kDefaultCfsBins) {
  return metricslim::discretize_equal_frequency(d.features.col(static_cast<Eigen::Index>(col)), bins).bins;
}

inline std::vector<int> labels_of(const metricslim::Dataset& d) {
  return {d.labels.data(), d.labels.data() + d.labels.size()};
}

inline double merit_oracle(const metricslim::Dataset& d, const std::vector<std::size_t>& cols) {
  const auto y = labels_of(d);
  double fc = 0.0;
  for (auto c : cols) fc += su_oracle(bins_of(d, c), y);
  double ff = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    for (std::size_t j = i + 1; j < cols.size(); ++j) {
      ff += su_oracle(bins_of(d, cols[i]), bins_of(d, cols[j]));
      ++pairs;
    }
  }
  const double k = static_cast<double>(cols.size());
  const double mean_fc = fc / k;
  const double mean_ff = pairs == 0 ? 0.0 : ff / static_cast<double>(pairs);
  const double radicand = k + k * (k - 1.0) * mean_ff;
  return radicand <= 0.0 ? 0.0 : k * mean_fc / std::sqrt(radicand);
}

inline metricslim::FeatureSubset subset_of(const std::vector<std::size_t>& cols) {
  metricslim::FeatureSubset s;
  for (auto c : cols) s.insert(metricslim::metric_at(c));
  return s;
}

// Columns [0, informative) carry graded label signal; the rest are constant.
inline metricslim::Dataset graded_dataset(std::size_t informative, std::uint64_t seed, Eigen::Index rows = 400) {
  metricslim::Rng rng(seed);
  metricslim::Dataset d;
  d.features = Eigen::MatrixXd::Zero(rows, 20);
  d.labels.resize(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    d.labels(r) = rng.uniform() < 0.4 ? 1 : 0;
    for (std::size_t c = 0; c < informative; ++c) {
      const double noise = 0.3 + 0.4 * static_cast<double>(c);
      d.features(r, static_cast<Eigen::Index>(c)) = d.labels(r) + noise * rng.normal();
    }
  }
  return d;
}

// WMC and CE are independent uniforms with label 1.5 WMC + CE > 1.25; DIT copies
// WMC and every other column is constant.
inline metricslim::Dataset mrmr_duplicate_dataset(std::uint64_t seed, Eigen::Index rows = 2000) {
  metricslim::Rng rng(seed);
  metricslim::Dataset d;
  d.features = Eigen::MatrixXd::Zero(rows, 20);
  d.labels.resize(rows);
  const auto wmc = metricslim::index_of(metricslim::MetricId::WMC);
  const auto dit = metricslim::index_of(metricslim::MetricId::DIT);
  const auto ce = metricslim::index_of(metricslim::MetricId::CE);
  for (Eigen::Index r = 0; r < rows; ++r) {
    d.features(r, wmc) = rng.uniform();
    d.features(r, ce) = rng.uniform();
    d.features(r, dit) = d.features(r, wmc);
    d.labels(r) = 1.5 * d.features(r, wmc) + d.features(r, ce) > 1.25 ? 1 : 0;
  }
  return d;
}

// Class-conditional means at -1 and +1 on WMC and DIT, sigma 0.1.
inline metricslim::Dataset blobs(std::uint64_t seed, int per_class = 100) {
  metricslim::Rng rng(seed);
  metricslim::Dataset d;
  d.features = Eigen::MatrixXd::Zero(2 * per_class, 20);
  d.labels.resize(2 * per_class);
  for (int i = 0; i < 2 * per_class; ++i) {
    const int y = i < per_class ? 0 : 1;
    d.labels(i) = y;
    const double mu = y == 1 ? 1.0 : -1.0;
    d.features(i, 0) = mu + 0.1 * rng.normal();
    d.features(i, 1) = mu + 0.1 * rng.normal();
    for (Eigen::Index c = 2; c < 20; ++c) d.features(i, c) = rng.uniform();
  }
  return d;
}

// 200 samples split by the plane WMC + 2 DIT - CBO = 0 with a margin.
inline metricslim::Dataset separable(std::uint64_t seed) {
  metricslim::Rng rng(seed);
  metricslim::Dataset d;
  d.features = Eigen::MatrixXd::Zero(200, 20);
  d.labels.resize(200);
  int row = 0;
  while (row < 200) {
    const double a = rng.normal(), b = rng.normal(), c = rng.normal();
    const double s = a + 2.0 * b - c;
    if (std::abs(s) < 0.3) continue;
    d.features(row, 0) = a;
    d.features(row, 1) = b;
    d.features(row, 3) = c;
    for (Eigen::Index k = 4; k < 20; ++k) d.features(row, k) = rng.uniform();
    d.labels(row) = s > 0 ? 1 : 0;
    ++row;
  }
  return d;
}

inline const metricslim::FeatureSubset kPlane{metricslim::MetricId::WMC, metricslim::MetricId::DIT,
                                              metricslim::MetricId::CBO};

// Scenario-1 medians for CBO, RFC, LCOM, CE, LOC.
inline metricslim::CorrelationMatrix top5_matrix() {
  using M = metricslim::MetricId;
  metricslim::CorrelationMatrix r;
  r.metrics = {M::CBO, M::RFC, M::LCOM, M::CE, M::LOC};
  r.values.resize(5, 5);
  r.values << 1, 0.487, 0.395, 0.622, 0.379,  //
      0.487, 1, 0.616, 0.682, 0.909,          //
      0.395, 0.616, 1, 0.375, 0.49,           //
      0.622, 0.682, 0.375, 1, 0.587,          //
      0.379, 0.909, 0.49, 0.587, 1;
  return r;
}

inline metricslim::FeatureSubset top5() {
  using M = metricslim::MetricId;
  return {M::CBO, M::RFC, M::LCOM, M::CE, M::LOC};
}

// Signed-rank fixture with 30 non-zero, untied differences.
inline std::pair<std::vector<double>, std::vector<double>> thirty_pairs() {
  std::vector<double> a, b;
  for (int i = 0; i < 30; ++i) {
    a.push_back(static_cast<double>((i + 1) * 37 % 101) / 10.0);
    b.push_back(a.back() - static_cast<double>(i * 53 % 61 - 24) / 7.0);
  }
  return {a, b};
}

}  // namespace testing
