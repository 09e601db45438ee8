#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "metricslim/metric.hpp"

namespace metricslim {

using MetricRow = Eigen::Matrix<double, 1, static_cast<int>(kMetricCount)>;

/// One class file of a release.
struct Instance {
  std::string class_name;
  MetricRow metrics;
  std::int64_t bug_count = 0;

  bool buggy() const noexcept { return bug_count > 0; }
};

enum PreprocessingFlag : unsigned {
  kRaw = 0,
  kLogFiltered = 1u << 0,
  kBinarized = 1u << 1,
};

/// A single software release. Metric values are stored column-per-metric in
/// canonical MetricId order: `metrics()(row, index_of(m))`.
class Release {
 public:
  Release(std::string project, std::string version, std::vector<std::string> class_names,
          Eigen::MatrixXd metrics, std::vector<std::int64_t> bug_counts);

  const std::string& project() const noexcept { return project_; }
  const std::string& version() const noexcept { return version_; }
  /// "project-version", as used in reports.
  std::string name() const { return project_ + "-" + version_; }

  std::size_t size() const noexcept { return bug_counts_.size(); }
  const Eigen::MatrixXd& metrics() const noexcept { return metrics_; }
  const std::vector<std::string>& class_names() const noexcept { return class_names_; }
  const std::vector<std::int64_t>& bug_counts() const noexcept { return bug_counts_; }

  /// 0/1 labels; throws Error(NotBinarized) before binarize_labels.
  const Eigen::VectorXi& labels() const;

  Instance instance(std::size_t row) const;
  std::size_t defective_count() const noexcept;

  unsigned state() const noexcept { return state_; }
  bool has(PreprocessingFlag flag) const noexcept { return (state_ & flag) != 0; }

 private:
  friend Release log_filter(const Release& release);
  friend Release binarize_labels(const Release& release);

  std::string project_;
  std::string version_;
  std::vector<std::string> class_names_;
  Eigen::MatrixXd metrics_;
  std::vector<std::int64_t> bug_counts_;
  Eigen::VectorXi labels_;
  unsigned state_ = kRaw;
};

struct ParseOptions {
  /// Accept (and ignore) columns that are neither identifiers, metrics nor `bug`.
  bool lenient = false;
};

Release parse_release(std::string_view csv_text, const std::string& project,
                      const std::string& version, const ParseOptions& options = {});

/// Writes the release back in PROMISE column order with shortest round-trip
/// number formatting, so parse(serialize(r)) reproduces r bit for bit.
std::string serialize_release(const Release& release);

/// ln(v + 1) on every metric cell. Throws Error(AlreadyFiltered) if applied twice.
Release log_filter(const Release& release);

Release binarize_labels(const Release& release);

/// Releases grouped by project; within a project versions keep manifest order.
class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<Release> releases);

  const std::vector<Release>& releases() const noexcept { return releases_; }
  const Release& operator[](std::size_t i) const { return releases_.at(i); }
  std::size_t size() const noexcept { return releases_.size(); }

  /// Projects in first-appearance order.
  std::vector<std::string> projects() const;
  /// Indices of a project's releases, in manifest order.
  std::vector<std::size_t> releases_of(const std::string& project) const;
  /// Position of the release within its project (0 = first release).
  std::size_t version_rank(std::size_t release) const;
  std::size_t find(const std::string& project, const std::string& version) const;

 private:
  std::vector<Release> releases_;
};

struct ManifestEntry {
  std::string project;
  std::string version;
  std::filesystem::path path;
};

/// Manifest is JSON:
/// {"projects": [{"name": "ant", "releases": [{"version": "1.3", "path": "ant-1.3.csv"}, ...]}, ...]}
/// Relative paths resolve against the manifest's directory.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& manifest_path);

struct LoadOptions {
  ParseOptions parse;
  bool log_filter = true;
  bool binarize = true;
};

Corpus load_corpus(const std::filesystem::path& manifest_path, const LoadOptions& options = {});

struct SummaryRow {
  std::string project;
  std::string version;
  std::size_t instances = 0;
  std::size_t defective = 0;
  double percent_defective = 0.0;  // rounded to one decimal
};

/// Requires every release to be binarized.
std::vector<SummaryRow> corpus_summary(const Corpus& corpus);

}  // namespace metricslim
