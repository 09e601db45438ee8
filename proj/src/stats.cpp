#include "metricslim/stats.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace metricslim {

const char* to_string(Measure m) noexcept {
  switch (m) {
    case Measure::Precision: return "precision";
    case Measure::Recall: return "recall";
    case Measure::FMeasure: return "f_measure";
  }
  return "?";
}

Measure parse_measure(const std::string& name) {
  if (name == "precision") return Measure::Precision;
  if (name == "recall") return Measure::Recall;
  if (name == "f_measure" || name == "f-measure" || name == "f") return Measure::FMeasure;
  throw Error(ErrorKind::InvalidArgument, "unknown measure '" + name + "'");
}

double select(const MeasureTriple& t, Measure m) noexcept {
  switch (m) {
    case Measure::Precision: return t.precision;
    case Measure::Recall: return t.recall;
    case Measure::FMeasure: return t.f_measure;
  }
  return 0.0;
}

MeasureTriple measures(const Outcome& o) noexcept {
  MeasureTriple t;
  const auto tp = static_cast<double>(o.tp);
  if (o.tp + o.fp > 0) {
    t.precision = tp / static_cast<double>(o.tp + o.fp);
  } else {
    t.precision_undefined = true;
  }
  if (o.tp + o.fn > 0) {
    t.recall = tp / static_cast<double>(o.tp + o.fn);
  } else {
    t.recall_undefined = true;
  }
  const double sum = t.precision + t.recall;
  t.f_measure = sum > 0.0 ? 2.0 * t.precision * t.recall / sum : 0.0;
  return t;
}

double consistency(const Outcome& o) {
  const auto n = static_cast<double>(o.total());
  const auto k = static_cast<double>(o.tp + o.fn);
  if (o.tp + o.fn == 0 || o.tp + o.fn == o.total()) {
    throw Error(ErrorKind::DegenerateTestSet, "consistency needs 0 < #buggy < #instances");
  }
  const auto d = static_cast<double>(o.tp);
  return (d * n - k * k) / (k * (n - k));
}

double median(const std::vector<double>& sample) {
  return median(Eigen::Map<const Eigen::VectorXd>(sample.data(),
                                                  static_cast<Eigen::Index>(sample.size())));
}

double quantile(std::vector<double> sample, double q) {
  if (sample.empty()) throw Error(ErrorKind::TooFewSamples, "quantile of empty sample");
  std::sort(sample.begin(), sample.end());
  const double h = (static_cast<double>(sample.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sample.size() - 1);
  return sample[lo] + (h - static_cast<double>(lo)) * (sample[hi] - sample[lo]);
}

BoxplotSummary boxplot(const std::vector<double>& sample) {
  BoxplotSummary b;
  b.q1 = quantile(sample, 0.25);
  b.median = quantile(sample, 0.5);
  b.q3 = quantile(sample, 0.75);
  const double iqr = b.q3 - b.q1;
  const double lo_fence = b.q1 - 1.5 * iqr;
  const double hi_fence = b.q3 + 1.5 * iqr;
  b.min = std::numeric_limits<double>::infinity();
  b.max = -std::numeric_limits<double>::infinity();
  for (double v : sample) {
    if (v < lo_fence || v > hi_fence) {
      b.outliers.push_back(v);
    } else {
      b.min = std::min(b.min, v);
      b.max = std::max(b.max, v);
    }
  }
  std::sort(b.outliers.begin(), b.outliers.end());
  return b;
}

WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b,
                                    WilcoxonMethod method) {
  if (a.size() != b.size()) throw Error(ErrorKind::LengthMismatch, "wilcoxon: unpaired samples");
  std::vector<double> diffs;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    if (d != 0.0) diffs.push_back(d);
  }
  if (diffs.empty()) throw Error(ErrorKind::AllZeroDifferences, "wilcoxon: all differences are zero");
  const std::size_t n = diffs.size();
  if (n < 5) throw Error(ErrorKind::TooFewSamples, "wilcoxon: fewer than 5 non-zero differences");

  // Doubled average ranks keep every rank an integer.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return std::abs(diffs[i]) < std::abs(diffs[j]); });
  std::vector<long long> rank2(n);
  double tie_term = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && std::abs(diffs[order[j + 1]]) == std::abs(diffs[order[i]])) ++j;
    const auto r2 = static_cast<long long>(i + j + 2);  // 2 * mean of ranks i+1..j+1
    for (std::size_t t = i; t <= j; ++t) rank2[order[t]] = r2;
    const auto t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }
  long long w2 = 0;
  long long total2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total2 += rank2[i];
    if (diffs[i] > 0) w2 += rank2[i];
  }

  WilcoxonResult res;
  res.n_effective = n;
  res.w_plus = static_cast<double>(w2) / 2.0;
  const bool exact = method == WilcoxonMethod::Exact ||
                     (method == WilcoxonMethod::Auto && n <= kWilcoxonExactLimit);
  res.exact = exact;
  if (exact) {
    // counts[s] = number of sign assignments with doubled positive-rank sum s.
    std::vector<double> counts(static_cast<std::size_t>(total2) + 1, 0.0);
    counts[0] = 1.0;
    long long reach = 0;
    for (auto r : rank2) {
      for (long long s = reach; s >= 0; --s) {
        const double c = counts[static_cast<std::size_t>(s)];
        if (c != 0.0) counts[static_cast<std::size_t>(s + r)] += c;
      }
      reach += r;
    }
    double lower = 0.0, upper = 0.0;
    for (long long s = 0; s <= total2; ++s) {
      if (s <= w2) lower += counts[static_cast<std::size_t>(s)];
      if (s >= w2) upper += counts[static_cast<std::size_t>(s)];
    }
    const double denom = std::ldexp(1.0, static_cast<int>(n));
    res.p_value = std::min(1.0, 2.0 * std::min(lower, upper) / denom);
  } else {
    const auto nd = static_cast<double>(n);
    const double mean = nd * (nd + 1.0) / 4.0;
    const double var = nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0 - tie_term / 48.0;
    if (var <= 0.0) {
      res.p_value = 1.0;
    } else {
      const double z = std::max(0.0, std::abs(res.w_plus - mean) - 0.5) / std::sqrt(var);
      res.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
    }
  }
  return res;
}

double cliffs_delta(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) throw Error(ErrorKind::TooFewSamples, "cliffs_delta: empty sample");
  long long more = 0, less = 0;
  for (double x : a) {
    for (double y : b) {
      if (x > y) ++more;
      else if (x < y) ++less;
    }
  }
  return static_cast<double>(more - less) / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

namespace {

// Continued fraction for I_x(a, b), modified Lentz.
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (a <= 0.0 || b <= 0.0) throw Error(ErrorKind::InvalidArgument, "incomplete_beta: a, b > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double f_distribution_sf(double f, double d1, double d2) {
  if (f <= 0.0) return 1.0;
  if (std::isinf(f)) return 0.0;
  // P(F > f) = I_{d2 / (d2 + d1 f)}(d2 / 2, d1 / 2)
  return incomplete_beta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f));
}

AnovaResult anova_oneway(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) throw Error(ErrorKind::TooFewSamples, "anova: need at least 2 groups");
  double grand_sum = 0.0;
  std::size_t total = 0;
  for (const auto& g : groups) {
    if (g.size() < 2) throw Error(ErrorKind::TooFewSamples, "anova: groups need >= 2 observations");
    grand_sum += std::accumulate(g.begin(), g.end(), 0.0);
    total += g.size();
  }
  const double grand_mean = grand_sum / static_cast<double>(total);
  AnovaResult r;
  for (const auto& g : groups) {
    const double mean = std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(g.size());
    r.ss_between += static_cast<double>(g.size()) * (mean - grand_mean) * (mean - grand_mean);
    for (double v : g) r.ss_within += (v - mean) * (v - mean);
  }
  r.df_between = static_cast<double>(groups.size() - 1);
  r.df_within = static_cast<double>(total - groups.size());
  if (r.ss_between == 0.0) {
    r.f_statistic = 0.0;
    r.p_value = 1.0;
    return r;
  }
  if (r.ss_within == 0.0) {
    r.f_statistic = std::numeric_limits<double>::infinity();
    r.p_value = 0.0;
    r.zero_within_variance = true;
    return r;
  }
  r.f_statistic = (r.ss_between / r.df_between) / (r.ss_within / r.df_within);
  r.p_value = f_distribution_sf(r.f_statistic, r.df_between, r.df_within);
  return r;
}

ThresholdCounts threshold_counts(const std::vector<MeasureTriple>& rows,
                                 const Thresholds& thresholds) {
  ThresholdCounts c;
  for (const auto& r : rows) {
    const bool p = r.precision > thresholds.precision;
    const bool rec = r.recall > thresholds.recall;
    c.precision += p;
    c.recall += rec;
    c.f_measure += r.f_measure > thresholds.f_measure;
    c.total += p && rec;
  }
  return c;
}

}  // namespace metricslim
