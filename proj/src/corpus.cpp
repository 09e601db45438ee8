#include "metricslim/corpus.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "metricslim/dataset.hpp"
#include "metricslim/error.hpp"

namespace metricslim {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string unquote(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
    std::string out;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
      out += s[i];
      if (s[i] == '"' && i + 2 < s.size() && s[i + 1] == '"') ++i;
    }
    return out;
  }
  return std::string(s);
}

// Comma split honoring double-quoted fields.
std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  bool quoted = false;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i < line.size() && line[i] == '"') quoted = !quoted;
    if (i == line.size() || (line[i] == ',' && !quoted)) {
      out.push_back(unquote(line.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

std::vector<std::pair<std::size_t, std::string_view>> split_lines(std::string_view text) {
  std::vector<std::pair<std::size_t, std::string_view>> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    if (!trim(line).empty()) out.emplace_back(line_no, line);
    start = end + 1;
  }
  return out;
}

bool is_identifier_column(const std::string& name) {
  static const std::set<std::string> kIds = {"name", "name.1", "name1", "version", "project",
                                             "class", "classname", "class_name"};
  return kIds.count(name) > 0;
}

bool is_class_column(const std::string& name) {
  return name.rfind("name", 0) == 0 || name.rfind("class", 0) == 0;
}

double parse_number(const std::string& cell, std::size_t line, const std::string& column) {
  const auto text = trim(cell);
  double value = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value, std::chars_format::general);
  if (text.empty() || ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw Error(ErrorKind::NonNumericCell,
                "line " + std::to_string(line) + ", column '" + column + "': '" + cell + "'");
  }
  return value;
}

std::string format_number(double v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

}  // namespace

Release::Release(std::string project, std::string version, std::vector<std::string> class_names,
                 Eigen::MatrixXd metrics, std::vector<std::int64_t> bug_counts)
    : project_(std::move(project)),
      version_(std::move(version)),
      class_names_(std::move(class_names)),
      metrics_(std::move(metrics)),
      bug_counts_(std::move(bug_counts)) {
  if (bug_counts_.empty()) throw Error(ErrorKind::EmptyFile, name() + ": release has no instances");
  if (metrics_.cols() != static_cast<Eigen::Index>(kMetricCount) ||
      metrics_.rows() != static_cast<Eigen::Index>(bug_counts_.size()) ||
      class_names_.size() != bug_counts_.size()) {
    throw Error(ErrorKind::InvalidArgument, name() + ": inconsistent release dimensions");
  }
  if (!metrics_.allFinite()) throw Error(ErrorKind::NonNumericCell, name() + ": non-finite metric");
  for (auto b : bug_counts_) {
    if (b < 0) throw Error(ErrorKind::NegativeBugCount, name() + ": negative bug count");
  }
}

const Eigen::VectorXi& Release::labels() const {
  if (!has(kBinarized)) throw Error(ErrorKind::NotBinarized, name() + " is not binarized");
  return labels_;
}

Instance Release::instance(std::size_t row) const {
  return {class_names_.at(row), metrics_.row(static_cast<Eigen::Index>(row)), bug_counts_.at(row)};
}

std::size_t Release::defective_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(bug_counts_.begin(), bug_counts_.end(), [](auto b) { return b > 0; }));
}

Release parse_release(std::string_view csv_text, const std::string& project,
                      const std::string& version, const ParseOptions& options) {
  const auto lines = split_lines(csv_text);
  if (lines.empty()) throw Error(ErrorKind::EmptyFile, project + "-" + version + ": empty input");

  const auto header = split_fields(lines.front().second);
  std::array<int, kMetricCount> metric_col;
  metric_col.fill(-1);
  int bug_col = -1;
  int class_col = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const auto col = lower(trim(header[c]));
    if (const auto m = parse_metric(col)) {
      if (metric_col[index_of(*m)] >= 0) {
        throw Error(ErrorKind::MalformedRow, "duplicate column '" + col + "'");
      }
      metric_col[index_of(*m)] = static_cast<int>(c);
    } else if (col == "bug" || col == "bugs") {
      if (bug_col >= 0) throw Error(ErrorKind::MalformedRow, "duplicate column '" + col + "'");
      bug_col = static_cast<int>(c);
    } else if (is_identifier_column(col)) {
      if (is_class_column(col)) class_col = static_cast<int>(c);
    } else if (!options.lenient) {
      throw Error(ErrorKind::UnknownColumn, "unexpected column '" + header[c] + "'");
    }
  }
  for (std::size_t i = 0; i < kMetricCount; ++i) {
    if (metric_col[i] < 0) {
      throw Error(ErrorKind::MissingColumn, lower(metric_name(metric_at(i))));
    }
  }
  if (bug_col < 0) throw Error(ErrorKind::MissingColumn, "bug");

  const auto n = lines.size() - 1;
  if (n == 0) throw Error(ErrorKind::EmptyFile, project + "-" + version + ": header only");

  Eigen::MatrixXd metrics(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(kMetricCount));
  std::vector<std::int64_t> bugs(n);
  std::vector<std::string> names(n);
  for (std::size_t r = 0; r < n; ++r) {
    const auto [line_no, line] = lines[r + 1];
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw Error(ErrorKind::MalformedRow, "line " + std::to_string(line_no) + ": expected " +
                                               std::to_string(header.size()) + " fields, got " +
                                               std::to_string(fields.size()));
    }
    for (std::size_t i = 0; i < kMetricCount; ++i) {
      const auto col = static_cast<std::size_t>(metric_col[i]);
      const double v = parse_number(fields[col], line_no, header[col]);
      if (v < 0.0) {
        throw Error(ErrorKind::NegativeMetricValue,
                    "line " + std::to_string(line_no) + ", column '" + header[col] + "'");
      }
      metrics(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) = v;
    }
    const double bug = parse_number(fields[static_cast<std::size_t>(bug_col)], line_no, "bug");
    if (bug < 0.0) {
      throw Error(ErrorKind::NegativeBugCount, "line " + std::to_string(line_no));
    }
    if (bug != std::floor(bug)) {
      throw Error(ErrorKind::NonNumericCell,
                  "line " + std::to_string(line_no) + ", column 'bug': not an integer");
    }
    bugs[r] = static_cast<std::int64_t>(bug);
    if (class_col >= 0) names[r] = fields[static_cast<std::size_t>(class_col)];
  }
  return Release(project, version, std::move(names), std::move(metrics), std::move(bugs));
}

std::string serialize_release(const Release& release) {
  std::ostringstream out;
  out << "name,version,name";
  for (auto m : all_metrics()) out << ',' << lower(metric_name(m));
  out << ",bug\n";
  const auto& x = release.metrics();
  for (std::size_t r = 0; r < release.size(); ++r) {
    const auto& cls = release.class_names()[r];
    const bool quote = cls.find_first_of(",\"") != std::string::npos;
    out << release.project() << ',' << release.version() << ',';
    if (quote) {
      out << '"';
      for (char ch : cls) out << (ch == '"' ? "\"\"" : std::string(1, ch));
      out << '"';
    } else {
      out << cls;
    }
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      out << ',' << format_number(x(static_cast<Eigen::Index>(r), c));
    }
    out << ',' << release.bug_counts()[r] << '\n';
  }
  return out.str();
}

Release log_filter(const Release& release) {
  if (release.has(kLogFiltered)) {
    throw Error(ErrorKind::AlreadyFiltered, release.name() + " is already log-filtered");
  }
  Release out = release;
  out.metrics_ = release.metrics_.unaryExpr([](double v) { return std::log1p(v); });
  out.state_ |= kLogFiltered;
  return out;
}

Release binarize_labels(const Release& release) {
  Release out = release;
  out.labels_.resize(static_cast<Eigen::Index>(release.size()));
  for (std::size_t i = 0; i < release.size(); ++i) {
    out.labels_(static_cast<Eigen::Index>(i)) = release.bug_counts_[i] > 0 ? 1 : 0;
  }
  out.state_ |= kBinarized;
  return out;
}

Corpus::Corpus(std::vector<Release> releases) : releases_(std::move(releases)) {
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& r : releases_) {
    if (!seen.emplace(r.project(), r.version()).second) {
      throw Error(ErrorKind::DuplicateRelease, r.name() + " appears twice");
    }
  }
}

std::vector<std::string> Corpus::projects() const {
  std::vector<std::string> out;
  for (const auto& r : releases_) {
    if (std::find(out.begin(), out.end(), r.project()) == out.end()) out.push_back(r.project());
  }
  return out;
}

std::vector<std::size_t> Corpus::releases_of(const std::string& project) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < releases_.size(); ++i) {
    if (releases_[i].project() == project) out.push_back(i);
  }
  return out;
}

std::size_t Corpus::version_rank(std::size_t release) const {
  const auto siblings = releases_of(releases_.at(release).project());
  return static_cast<std::size_t>(
      std::find(siblings.begin(), siblings.end(), release) - siblings.begin());
}

std::size_t Corpus::find(const std::string& project, const std::string& version) const {
  for (std::size_t i = 0; i < releases_.size(); ++i) {
    if (releases_[i].project() == project && releases_[i].version() == version) return i;
  }
  throw Error(ErrorKind::InvalidArgument, "no release " + project + "-" + version);
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw Error(ErrorKind::ManifestError, "cannot open " + manifest_path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ManifestError, manifest_path.string() + ": " + e.what());
  }
  const auto base = manifest_path.parent_path();
  std::vector<ManifestEntry> out;
  try {
    for (const auto& project : doc.at("projects")) {
      const auto name = project.at("name").get<std::string>();
      for (const auto& rel : project.at("releases")) {
        std::filesystem::path path = rel.at("path").get<std::string>();
        if (path.is_relative()) path = base / path;
        out.push_back({name, rel.at("version").get<std::string>(), path});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ManifestError, manifest_path.string() + ": " + e.what());
  }
  if (out.empty()) throw Error(ErrorKind::ManifestError, manifest_path.string() + ": no releases");
  return out;
}

Corpus load_corpus(const std::filesystem::path& manifest_path, const LoadOptions& options) {
  std::vector<Release> releases;
  for (const auto& entry : read_manifest(manifest_path)) {
    std::ifstream in(entry.path, std::ios::binary);
    if (!in) throw Error(ErrorKind::ManifestError, "cannot open " + entry.path.string());
    std::ostringstream text;
    text << in.rdbuf();
    auto release = parse_release(text.str(), entry.project, entry.version, options.parse);
    if (options.log_filter) release = log_filter(release);
    if (options.binarize) release = binarize_labels(release);
    releases.push_back(std::move(release));
  }
  return Corpus(std::move(releases));
}

std::vector<SummaryRow> corpus_summary(const Corpus& corpus) {
  std::vector<SummaryRow> rows;
  rows.reserve(corpus.size());
  for (const auto& r : corpus.releases()) {
    const auto defective = static_cast<std::size_t>(r.labels().sum());
    const double pct = 100.0 * static_cast<double>(defective) / static_cast<double>(r.size());
    rows.push_back({r.project(), r.version(), r.size(), defective, std::round(pct * 10.0) / 10.0});
  }
  return rows;
}

Dataset make_dataset(const Release& release) {
  return {release.metrics(), release.labels()};
}

Dataset make_dataset(const Corpus& corpus, std::span<const std::size_t> releases) {
  Eigen::Index rows = 0;
  for (auto i : releases) rows += static_cast<Eigen::Index>(corpus[i].size());
  Dataset out;
  out.features.resize(rows, static_cast<Eigen::Index>(kMetricCount));
  out.labels.resize(rows);
  Eigen::Index at = 0;
  for (auto i : releases) {
    const auto& r = corpus[i];
    const auto n = static_cast<Eigen::Index>(r.size());
    out.features.middleRows(at, n) = r.metrics();
    out.labels.segment(at, n) = r.labels();
    at += n;
  }
  return out;
}

}  // namespace metricslim
