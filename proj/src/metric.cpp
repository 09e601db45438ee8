#include "metricslim/metric.hpp"

#include <algorithm>
#include <cctype>

#include "metricslim/error.hpp"

namespace metricslim {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::UnknownColumn: return "UnknownColumn";
    case ErrorKind::NonNumericCell: return "NonNumericCell";
    case ErrorKind::NegativeMetricValue: return "NegativeMetricValue";
    case ErrorKind::MalformedRow: return "MalformedRow";
    case ErrorKind::EmptyFile: return "EmptyFile";
    case ErrorKind::NegativeBugCount: return "NegativeBugCount";
    case ErrorKind::AlreadyFiltered: return "AlreadyFiltered";
    case ErrorKind::NotBinarized: return "NotBinarized";
    case ErrorKind::DuplicateRelease: return "DuplicateRelease";
    case ErrorKind::ManifestError: return "ManifestError";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::TooFewSamples: return "TooFewSamples";
    case ErrorKind::EmptySubset: return "EmptySubset";
    case ErrorKind::SingleClassData: return "SingleClassData";
    case ErrorKind::MissingFeature: return "MissingFeature";
    case ErrorKind::DegenerateTestSet: return "DegenerateTestSet";
    case ErrorKind::AllZeroDifferences: return "AllZeroDifferences";
    case ErrorKind::NoTrainingData: return "NoTrainingData";
    case ErrorKind::MatchingFailure: return "MatchingFailure";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::MissingArtifacts: return "MissingArtifacts";
    case ErrorKind::ModelFormat: return "ModelFormat";
  }
  return "Unknown";
}

namespace {

constexpr std::array<std::string_view, kMetricCount> kNames = {
    "WMC", "DIT", "NOC", "CBO", "RFC", "LCOM", "CA", "CE", "NPM", "LCOM3",
    "LOC", "DAM", "MOA", "MFA", "CAM", "IC", "CBM", "AMC", "MAX_CC", "AVG_CC",
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string_view metric_name(MetricId m) noexcept { return kNames[index_of(m)]; }

std::optional<MetricId> parse_metric(std::string_view name) {
  name = trim(name);
  for (std::size_t i = 0; i < kMetricCount; ++i) {
    const auto candidate = kNames[i];
    if (candidate.size() != name.size()) continue;
    const bool same = std::equal(candidate.begin(), candidate.end(), name.begin(), [](char a, char b) {
      return std::toupper(static_cast<unsigned char>(a)) == std::toupper(static_cast<unsigned char>(b));
    });
    if (same) return metric_at(i);
  }
  return std::nullopt;
}

std::array<MetricId, kMetricCount> all_metrics() noexcept {
  std::array<MetricId, kMetricCount> out{};
  for (std::size_t i = 0; i < kMetricCount; ++i) out[i] = metric_at(i);
  return out;
}

FeatureSubset::FeatureSubset(std::initializer_list<MetricId> members) {
  for (auto m : members) insert(m);
}

FeatureSubset::FeatureSubset(const std::vector<MetricId>& members) {
  for (auto m : members) insert(m);
}

FeatureSubset FeatureSubset::all() {
  FeatureSubset s;
  s.bits_.set();
  return s;
}

FeatureSubset FeatureSubset::parse(std::string_view text) {
  FeatureSubset s;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find_first_of("+,", start);
    if (end == std::string_view::npos) end = text.size();
    const auto token = trim(text.substr(start, end - start));
    if (!token.empty()) {
      const auto m = parse_metric(token);
      if (!m) throw Error(ErrorKind::InvalidArgument, "unknown metric '" + std::string(token) + "'");
      s.insert(*m);
    }
    start = end + 1;
  }
  return s;
}

std::vector<MetricId> FeatureSubset::members() const {
  std::vector<MetricId> out;
  out.reserve(size());
  for (std::size_t i = 0; i < kMetricCount; ++i) {
    if (bits_.test(i)) out.push_back(metric_at(i));
  }
  return out;
}

std::vector<std::size_t> FeatureSubset::indices() const {
  std::vector<std::size_t> out;
  out.reserve(size());
  for (std::size_t i = 0; i < kMetricCount; ++i) {
    if (bits_.test(i)) out.push_back(i);
  }
  return out;
}

std::string FeatureSubset::to_string() const {
  if (empty()) return "{}";
  std::string out;
  for (auto m : members()) {
    if (!out.empty()) out += '+';
    out += metric_name(m);
  }
  return out;
}

bool canonical_less(const FeatureSubset& a, const FeatureSubset& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  const auto ia = a.indices();
  const auto ib = b.indices();
  return std::lexicographical_compare(ia.begin(), ia.end(), ib.begin(), ib.end());
}

}  // namespace metricslim
