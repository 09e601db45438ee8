#include "doctest.h"

#include <cmath>
#include <numbers>
#include <sstream>

#include "metricslim/corpus.hpp"
#include "metricslim/error.hpp"
#include "standin/standin.hpp"
#include "support.hpp"

using namespace metricslim;

namespace {

const char* kCanonicalHeader =
    "wmc,dit,noc,cbo,rfc,lcom,ca,ce,npm,lcom3,loc,dam,moa,mfa,cam,ic,cbm,amc,max_cc,avg_cc";

std::string canonical_csv(const std::vector<std::vector<double>>& rows,
                          const std::vector<int>& bugs) {
  std::ostringstream out;
  out << "name,version,name," << kCanonicalHeader << ",bug\n";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out << "p,1.0,pkg.C" << r;
    for (double v : rows[r]) out << ',' << v;
    out << ',' << bugs[r] << '\n';
  }
  return out.str();
}

std::vector<double> ramp(double start) {
  std::vector<double> v(20);
  for (std::size_t i = 0; i < 20; ++i) v[i] = start + static_cast<double>(i);
  return v;
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("metric vocabulary has twenty members in fixed order") {
  const auto all = all_metrics();
  CHECK(all.size() == 20);
  CHECK(metric_name(all.front()) == "WMC");
  CHECK(metric_name(all[10]) == "LOC");
  CHECK(metric_name(all.back()) == "AVG_CC");
  for (std::size_t i = 0; i < all.size(); ++i) {
    CHECK(index_of(all[i]) == i);
    CHECK(parse_metric(metric_name(all[i])) == all[i]);
  }
  CHECK(parse_metric(" max_cc ") == MetricId::MAX_CC);
  CHECK_FALSE(parse_metric("FOO").has_value());
}

TEST_CASE("feature subsets print and compare canonically") {
  const auto s = FeatureSubset::parse("LOC+cbo+LCOM");
  CHECK(s.to_string() == "CBO+LCOM+LOC");
  CHECK(FeatureSubset::parse("LOC,CBO") == FeatureSubset{MetricId::CBO, MetricId::LOC});
  CHECK(FeatureSubset{}.to_string() == "{}");
  CHECK(canonical_less(FeatureSubset{MetricId::LOC}, FeatureSubset{MetricId::WMC, MetricId::DIT}));
  CHECK(canonical_less(FeatureSubset{MetricId::CBO, MetricId::LOC},
                       FeatureSubset{MetricId::CBO, MetricId::AVG_CC}));
  CHECK_THROWS_AS(FeatureSubset::parse("CBO+NOPE"), Error);
}

TEST_CASE("parse_release maps shuffled columns onto canonical order") {
  // Columns written in reverse canonical order, with upper-case headers.
  const std::vector<std::vector<double>> rows = {ramp(0), ramp(100), ramp(1000)};
  std::ostringstream csv;
  csv << "NAME";
  for (int i = 19; i >= 0; --i) csv << ',' << metric_name(metric_at(static_cast<std::size_t>(i)));
  csv << ",Bug\n";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    csv << "C" << r;
    for (int i = 19; i >= 0; --i) csv << ',' << rows[r][static_cast<std::size_t>(i)];
    csv << ',' << r << '\n';
  }
  const auto rel = parse_release(csv.str(), "p", "1");
  REQUIRE(rel.size() == 3);
  // Hand-mapped fixture: canonical column i holds start + i.
  CHECK(rel.metrics()(0, 0) == 0.0);
  CHECK(rel.metrics()(0, 19) == 19.0);
  CHECK(rel.metrics()(1, index_of(MetricId::CBO)) == 103.0);
  CHECK(rel.metrics()(2, index_of(MetricId::LOC)) == 1010.0);
  CHECK(rel.metrics()(2, index_of(MetricId::AVG_CC)) == 1019.0);
  CHECK(rel.bug_counts() == std::vector<std::int64_t>{0, 1, 2});
  CHECK(rel.class_names()[1] == "C1");
  CHECK(rel.state() == kRaw);
}

TEST_CASE("parse_release errors") {
  const std::string header = std::string("name,") + kCanonicalHeader + ",bug\n";
  CHECK(kind_of([&] { parse_release(header, "p", "1"); }) == ErrorKind::EmptyFile);
  CHECK(kind_of([&] { parse_release("", "p", "1"); }) == ErrorKind::EmptyFile);

  std::string no_loc = "name,wmc,dit,noc,cbo,rfc,lcom,ca,ce,npm,lcom3,dam,moa,mfa,cam,ic,cbm,amc,"
                       "max_cc,avg_cc,bug\n";
  try {
    parse_release(no_loc, "p", "1");
    FAIL("missing column accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MissingColumn);
    CHECK(std::string(e.what()).find("loc") != std::string::npos);
  }

  auto rows = std::vector<std::vector<double>>{ramp(1), ramp(2)};
  auto good = canonical_csv(rows, {0, 1});
  CHECK(parse_release(good, "p", "1").size() == 2);

  auto bad_cell = good;
  bad_cell.replace(bad_cell.find(",3,"), 3, ",x,");
  try {
    parse_release(bad_cell, "p", "1");
    FAIL("non-numeric accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonNumericCell);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }

  CHECK(kind_of([&] { parse_release(canonical_csv(rows, {0, -1}), "p", "1"); }) ==
        ErrorKind::NegativeBugCount);

  std::string extra = "name," + std::string(kCanonicalHeader) + ",bug,extra\n";
  for (const auto& row : rows) {
    extra += "C";
    for (double v : row) extra += "," + std::to_string(v);
    extra += ",0,7\n";
  }
  CHECK(kind_of([&] { parse_release(extra, "p", "1"); }) == ErrorKind::UnknownColumn);
  CHECK(parse_release(extra, "p", "1", ParseOptions{true}).size() == 2);

  CHECK(parse_release(canonical_csv({ramp(1e-3)}, {0}), "p", "1").metrics()(0, 0) == 1e-3);
  auto sci = canonical_csv({ramp(1)}, {0});
  sci.replace(sci.find(",1,"), 3, ",1e2,");
  CHECK(parse_release(sci, "p", "1").metrics()(0, 0) == 100.0);
}

TEST_CASE("log_filter") {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 20);
  m(0, 0) = 2.0;
  m(0, 1) = 5.0;
  m(1, 0) = std::numbers::e - 1.0;
  const Release raw("p", "1", {"a", "b"}, m, {0, 4});
  const auto f = log_filter(raw);
  CHECK(f.has(kLogFiltered));
  CHECK(f.metrics()(0, 0) == doctest::Approx(std::log(3.0)).epsilon(1e-15));
  CHECK(f.metrics()(0, 1) == doctest::Approx(std::log(6.0)).epsilon(1e-15));
  CHECK(f.metrics()(0, 2) == 0.0);
  CHECK(f.metrics()(1, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(f.bug_counts() == raw.bug_counts());
  CHECK(kind_of([&] { log_filter(f); }) == ErrorKind::AlreadyFiltered);
}

TEST_CASE("log_filter is monotone per cell") {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const double a = rng.uniform() * 1000.0;
    const double b = a + rng.uniform() * 10.0 + 1e-9;
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 20);
    m(0, 3) = a;
    m(1, 3) = b;
    const auto f = log_filter(Release("p", "1", {"a", "b"}, m, {0, 0}));
    CHECK(f.metrics()(0, 3) < f.metrics()(1, 3));
  }
}

TEST_CASE("binarize_labels") {
  const auto rel = testing::labeled_release("p", "1", Eigen::MatrixXd::Zero(4, 20), {0, 3, 0, 1});
  CHECK(rel.labels()(0) == 0);
  CHECK(rel.labels()(1) == 1);
  CHECK(rel.labels().sum() == 2);
  CHECK(rel.size() == 4);
  CHECK(rel.bug_counts()[1] == 3);
  const Release raw("p", "1", {"a"}, Eigen::MatrixXd::Zero(1, 20), {0});
  CHECK(kind_of([&] { (void)raw.labels(); }) == ErrorKind::NotBinarized);
}

TEST_CASE("binarize preserves size and counts buggy instances") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto rel = testing::random_release("p", "1", 50 + seed, seed);
    CHECK(rel.size() == 50 + seed);
    CHECK(static_cast<std::size_t>(rel.labels().sum()) == rel.defective_count());
  }
}

TEST_CASE("parse then serialize round-trips bit for bit") {
  Rng rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXd m(7, 20);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < 20; ++c) m(r, c) = rng.uniform() * std::pow(10.0, c % 7 - 3);
    }
    std::vector<std::int64_t> bugs{0, 1, 2, 0, 5, 0, 0};
    const Release rel("proj", "2.0", {"a.B", "c,D", "e\"F", "g", "h", "i", "j"}, m, bugs);
    const auto text = serialize_release(rel);
    const auto back = parse_release(text, "proj", "2.0");
    CHECK(back.metrics() == rel.metrics());
    CHECK(back.bug_counts() == rel.bug_counts());
    CHECK(back.class_names() == rel.class_names());
    CHECK(serialize_release(back) == text);
  }
}

TEST_CASE("corpus summary") {
  const auto rel = testing::labeled_release("solo", "1", Eigen::MatrixXd::Zero(4, 20), {0, 0, 2, 0});
  const auto rows = corpus_summary(Corpus({rel}));
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].instances == 4);
  CHECK(rows[0].defective == 1);
  CHECK(rows[0].percent_defective == 25.0);
}

TEST_CASE("manifest order, duplicates and release lookup") {
  const auto dir = testing::fresh_dir("manifest");
  const auto rows = std::vector<std::vector<double>>{ramp(1), ramp(2), ramp(3)};
  testing::write_file(dir / "x-init.csv", canonical_csv(rows, {0, 1, 0}));
  testing::write_file(dir / "x-1.2.csv", canonical_csv(rows, {1, 1, 0}));
  testing::write_file(dir / "y-1.csv", canonical_csv(rows, {0, 0, 1}));
  testing::write_file(dir / "manifest.json", R"({"projects": [
    {"name": "x", "releases": [{"version": "init", "path": "x-init.csv"},
                               {"version": "1.2", "path": "x-1.2.csv"}]},
    {"name": "y", "releases": [{"version": "1", "path": "y-1.csv"}]}]})");
  const auto corpus = load_corpus(dir / "manifest.json");
  REQUIRE(corpus.size() == 3);
  // Manifest order wins over lexical order ("init" > "1.2").
  CHECK(corpus[0].version() == "init");
  CHECK(corpus.version_rank(1) == 1);
  CHECK(corpus.releases_of("x") == std::vector<std::size_t>{0, 1});
  CHECK(corpus.projects() == std::vector<std::string>{"x", "y"});
  CHECK(corpus.find("y", "1") == 2);
  CHECK(corpus[0].has(kLogFiltered));
  CHECK(corpus[0].metrics()(0, 0) == doctest::Approx(std::log(2.0)));
  CHECK(corpus_summary(corpus).size() == corpus.size());

  auto dup = corpus.releases();
  dup.push_back(corpus[0]);
  CHECK(kind_of([&] { Corpus c(dup); }) == ErrorKind::DuplicateRelease);

  testing::write_file(dir / "bad.json", R"({"projects": [{"name": "x"}]})");
  CHECK(kind_of([&] { read_manifest(dir / "bad.json"); }) == ErrorKind::ManifestError);
}

TEST_CASE("stand-in corpus matches the PROMISE release sizes") {
  const auto& shapes = standin::promise_shapes();
  CHECK(shapes.size() == 34);
  const auto dir = testing::fresh_dir("standin_sizes");
  const auto corpus = load_corpus(standin::write_corpus(dir, 5));
  CHECK(corpus.projects().size() == 10);
  struct Expect {
    const char* project;
    const char* version;
    std::size_t instances, defective;
    double percent;
  };
  for (const auto& e : {Expect{"ant", "1.7", 745, 166, 22.3}, Expect{"ant", "1.3", 125, 20, 16.0},
                        Expect{"camel", "1.0", 339, 13, 3.8},
                        Expect{"velocity", "1.4", 196, 147, 75.0}}) {
    const auto rows = corpus_summary(corpus);
    const auto& row = rows[corpus.find(e.project, e.version)];
    CHECK(row.instances == e.instances);
    CHECK(row.defective == e.defective);
    CHECK(row.percent_defective == doctest::Approx(e.percent));
  }
}
