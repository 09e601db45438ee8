#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "metricslim/error.hpp"

namespace metricslim {

/// Confusion counts of one prediction cell.
struct Outcome {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;

  std::int64_t total() const noexcept { return tp + fp + tn + fn; }
  friend bool operator==(const Outcome&, const Outcome&) = default;
};

struct MeasureTriple {
  double precision = 0.0;
  double recall = 0.0;
  double f_measure = 0.0;
  /// Set when a zero denominator forced a value to 0.
  bool precision_undefined = false;
  bool recall_undefined = false;
};

enum class Measure { Precision, Recall, FMeasure };

const char* to_string(Measure m) noexcept;
Measure parse_measure(const std::string& name);
double select(const MeasureTriple& t, Measure m) noexcept;

MeasureTriple measures(const Outcome& o) noexcept;

/// (d n - k^2) / (k (n - k)) with d = TP, k = TP + FN, n = total.
/// Throws Error(DegenerateTestSet) when k == 0 or k == n.
double consistency(const Outcome& o);

/// Median; even-length samples average the two central order statistics.
template <typename Derived>
typename Derived::Scalar median(const Eigen::DenseBase<Derived>& sample) {
  using Scalar = typename Derived::Scalar;
  if (sample.size() == 0) throw Error(ErrorKind::TooFewSamples, "median of empty sample");
  const auto plain = sample.derived().eval();
  std::vector<Scalar> v(plain.data(), plain.data() + plain.size());
  const auto n = v.size();
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (n % 2 == 1) return *mid;
  const Scalar upper = *mid;
  const Scalar lower = *std::max_element(v.begin(), mid);
  return (lower + upper) / Scalar(2);
}

double median(const std::vector<double>& sample);

/// Linear-interpolation quantile (R type 7), q in [0, 1].
double quantile(std::vector<double> sample, double q);

struct BoxplotSummary {
  double min = 0.0;  // lowest non-outlier
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;  // highest non-outlier
  std::vector<double> outliers;  // outside 1.5 IQR, ascending
};

BoxplotSummary boxplot(const std::vector<double>& sample);

enum class WilcoxonMethod { Auto, Exact, Normal };

struct WilcoxonResult {
  double p_value = 1.0;
  double w_plus = 0.0;       // sum of positive ranks
  std::size_t n_effective = 0;
  bool exact = false;
};

inline constexpr std::size_t kWilcoxonExactLimit = 20;

/// Two-sided signed-rank test on paired samples. Zero differences are dropped
/// and tied |differences| share average ranks. Auto uses the exact null
/// distribution up to kWilcoxonExactLimit non-zero pairs, the tie-corrected
/// normal approximation with continuity correction above.
/// Throws Error(AllZeroDifferences) or Error(TooFewSamples) (< 5 non-zero pairs).
WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b,
                                    WilcoxonMethod method = WilcoxonMethod::Auto);

/// (#{a_i > b_j} - #{a_i < b_j}) / (|a| |b|). Negative when b tends to be larger.
double cliffs_delta(const std::vector<double>& a, const std::vector<double>& b);

/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

/// Upper tail P(F > f) of the F(d1, d2) distribution.
double f_distribution_sf(double f, double d1, double d2);

struct AnovaResult {
  double f_statistic = 0.0;
  double p_value = 1.0;
  double ss_between = 0.0;
  double ss_within = 0.0;
  double df_between = 0.0;
  double df_within = 0.0;
  /// Within-group variance was zero while groups differed (F infinite, p = 0).
  bool zero_within_variance = false;
};

/// Requires >= 2 groups of >= 2 observations each.
AnovaResult anova_oneway(const std::vector<std::vector<double>>& groups);

struct Thresholds {
  double precision = 0.5;
  double recall = 0.7;
  double f_measure = 0.583;
};

struct ThresholdCounts {
  std::size_t precision = 0;
  std::size_t recall = 0;
  std::size_t f_measure = 0;
  std::size_t total = 0;  // precision and recall both above threshold
  friend bool operator==(const ThresholdCounts&, const ThresholdCounts&) = default;
};

ThresholdCounts threshold_counts(const std::vector<MeasureTriple>& rows,
                                 const Thresholds& thresholds = {});

}  // namespace metricslim
