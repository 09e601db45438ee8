#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace testing {

/// Two-sided signed-rank p by walking all 2^n sign patterns of the
/// average ranks of |a - b| (zero differences dropped).
inline double wilcoxon_brute_force(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> d;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) d.push_back(a[i] - b[i]);
  }
  const std::size_t n = d.size();
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n; ++i) {
    double below = 0.0, equal = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (std::abs(d[j]) < std::abs(d[i])) below += 1.0;
      if (std::abs(d[j]) == std::abs(d[i])) equal += 1.0;
    }
    ranks[i] = below + (equal + 1.0) / 2.0;
  }
  double observed = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (d[i] > 0) observed += ranks[i];
  }
  double lower = 0.0, upper = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    double w = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (std::uint64_t{1} << i)) w += ranks[i];
    }
    if (w <= observed) lower += 1.0;
    if (w >= observed) upper += 1.0;
  }
  return std::min(1.0, 2.0 * std::min(lower, upper) / std::ldexp(1.0, static_cast<int>(n)));
}

inline double cliffs_recount(const std::vector<double>& a, const std::vector<double>& b) {
  long long more = 0, less = 0;
  for (double x : a) {
    for (double y : b) {
      more += x > y;
      less += x < y;
    }
  }
  return static_cast<double>(more - less) / static_cast<double>(a.size() * b.size());
}

/// Pooled-variance two-sample t statistic.
inline double pooled_t(const std::vector<double>& a, const std::vector<double>& b) {
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  const double ma = mean(a), mb = mean(b);
  double ss = 0.0;
  for (double x : a) ss += (x - ma) * (x - ma);
  for (double x : b) ss += (x - mb) * (x - mb);
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double sp2 = ss / (na + nb - 2.0);
  return (ma - mb) / std::sqrt(sp2 * (1.0 / na + 1.0 / nb));
}

}  // namespace testing
