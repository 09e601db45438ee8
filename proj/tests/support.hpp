#pragma once

#include <Eigen/Core>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "metricslim/corpus.hpp"
#include "metricslim/dataset.hpp"
#include "metricslim/metric.hpp"
#include "metricslim/random.hpp"

namespace testing {

inline metricslim::Release labeled_release(const std::string& project, const std::string& version,
                                           const Eigen::MatrixXd& metrics,
                                           const std::vector<std::int64_t>& bugs) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < bugs.size(); ++i) names.push_back("C" + std::to_string(i));
  return metricslim::binarize_labels(metricslim::Release(project, version, names, metrics, bugs));
}

/// Random non-negative release where bug probability rises with column `signal`.
inline metricslim::Release random_release(const std::string& project, const std::string& version,
                                          std::size_t rows, std::uint64_t seed,
                                          std::size_t signal = 3) {
  metricslim::Rng rng(seed);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), 20);
  std::vector<std::int64_t> bugs(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < 20; ++c) m(static_cast<Eigen::Index>(r), c) = std::floor(rng.uniform() * 50.0);
    const double s = m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(signal));
    bugs[r] = rng.uniform() < 0.1 + 0.8 * s / 50.0 ? static_cast<std::int64_t>(1 + rng.below(3)) : 0;
  }
  return labeled_release(project, version, m, bugs);
}

/// Dataset whose 20 columns are noise except those overwritten by the caller.
inline metricslim::Dataset noise_dataset(Eigen::Index rows, std::uint64_t seed) {
  metricslim::Rng rng(seed);
  metricslim::Dataset d;
  d.features.resize(rows, 20);
  d.labels.resize(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    d.labels(r) = static_cast<int>(r % 2);
    for (Eigen::Index c = 0; c < 20; ++c) d.features(r, c) = rng.uniform();
  }
  return d;
}

inline std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("metricslim_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace testing
