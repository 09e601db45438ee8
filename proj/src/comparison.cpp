#include "metricslim/comparison.hpp"

#include <limits>
#include <map>
#include <tuple>

namespace metricslim {

namespace {

using Key = std::tuple<std::string, std::string, std::string>;

Key key_of(const ResultRow& r) { return {r.target, r.scenario, r.classifier}; }

std::string describe(const Key& k) {
  return std::get<0>(k) + "/" + std::get<1>(k) + "/" + std::get<2>(k);
}

}  // namespace

ComparisonReport compare_methods(const std::vector<ResultRow>& a, const std::vector<ResultRow>& b,
                                 const CompareOptions& options) {
  std::map<Key, const ResultRow*> by_key;
  for (const auto& row : b) by_key.emplace(key_of(row), &row);

  std::vector<std::pair<const ResultRow*, const ResultRow*>> pairs;
  std::vector<std::string> unmatched;
  std::map<Key, bool> used;
  for (const auto& row : a) {
    const auto it = by_key.find(key_of(row));
    if (it == by_key.end()) {
      unmatched.push_back(describe(key_of(row)));
      continue;
    }
    used[it->first] = true;
    if (row.error.empty() && it->second->error.empty()) pairs.emplace_back(&row, it->second);
  }
  for (const auto& [k, row] : by_key) {
    if (!used.count(k)) unmatched.push_back(describe(k));
  }
  if (!unmatched.empty()) {
    std::string msg = "unmatched rows:";
    for (const auto& u : unmatched) msg += " " + u;
    throw Error(ErrorKind::MatchingFailure, msg);
  }
  if (pairs.empty()) throw Error(ErrorKind::MatchingFailure, "no successful row pairs to compare");

  ComparisonReport report;
  report.pairs = pairs.size();
  const Measure all[] = {Measure::Precision, Measure::Recall, Measure::FMeasure};
  for (std::size_t mi = 0; mi < 3; ++mi) {
    auto& out = report.per_measure[mi];
    out.measure = all[mi];
    std::vector<double> va, vb;
    for (const auto& [ra, rb] : pairs) {
      va.push_back(select(ra->measures, out.measure));
      vb.push_back(select(rb->measures, out.measure));
    }
    out.median_a = median(va);
    out.median_b = median(vb);
    if (out.median_a != 0.0) {
      out.ratio = out.median_b / out.median_a;
    } else {
      out.ratio = out.median_b == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    }
    try {
      const auto w = wilcoxon_signed_rank(va, vb, options.method);
      out.p_value = w.p_value;
      out.exact_p = w.exact;
    } catch (const Error& e) {
      out.p_value = 1.0;
      if (e.kind() == ErrorKind::AllZeroDifferences) {
        out.note = "no difference";
      } else if (e.kind() == ErrorKind::TooFewSamples) {
        out.note = "too few non-zero pairs";
      } else {
        throw;
      }
    }
    out.cliffs_d = cliffs_delta(va, vb);
    out.acceptable = out.ratio > options.ratio_threshold || out.p_value > options.significance;
  }
  return report;
}

}  // namespace metricslim
