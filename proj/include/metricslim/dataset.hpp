#pragma once

#include <Eigen/Core>

#include <span>

#include "metricslim/corpus.hpp"

namespace metricslim {

/// Labeled training/test matrix: one row per instance, 20 metric columns in
/// canonical order, labels in {0, 1}.
struct Dataset {
  Eigen::MatrixXd features;
  Eigen::VectorXi labels;

  Eigen::Index rows() const noexcept { return features.rows(); }
  Eigen::Index positives() const noexcept { return labels.sum(); }
  bool has_both_classes() const noexcept {
    return positives() > 0 && positives() < rows();
  }
};

Dataset make_dataset(const Release& release);

/// Row-wise concatenation, duplicates kept. Every release must be binarized.
Dataset make_dataset(const Corpus& corpus, std::span<const std::size_t> releases);

}  // namespace metricslim
