#pragma once

#include <array>
#include <string>
#include <vector>

#include "metricslim/scenarios.hpp"
#include "metricslim/stats.hpp"

namespace metricslim {

struct MeasureComparison {
  Measure measure = Measure::Precision;
  double median_a = 0.0;
  double median_b = 0.0;
  double ratio = 1.0;     // median_b / median_a
  double p_value = 1.0;
  bool exact_p = false;
  double cliffs_d = 0.0;  // A on the left: negative when B is higher
  bool acceptable = true;
  std::string note;       // "no difference", "too few pairs", ...
};

/// A = baseline (e.g. ALL), B = candidate (e.g. TOP5).
struct ComparisonReport {
  std::size_t pairs = 0;
  std::array<MeasureComparison, 3> per_measure;
};

struct CompareOptions {
  double ratio_threshold = 0.9;
  double significance = 0.01;
  WilcoxonMethod method = WilcoxonMethod::Auto;
};

/// Rows are paired by (target, scenario, classifier); rows with an error are
/// ignored on both sides. Throws Error(MatchingFailure) naming unmatched keys.
ComparisonReport compare_methods(const std::vector<ResultRow>& a, const std::vector<ResultRow>& b,
                                 const CompareOptions& options = {});

}  // namespace metricslim
