#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "metricslim/corpus.hpp"
#include "metricslim/dataset.hpp"
#include "metricslim/metric.hpp"
#include "metricslim/stats.hpp"

namespace metricslim {

enum class ClassifierKind { NaiveBayes, Logistic, Tree, DecisionTable, LinearSvm };

const char* to_string(ClassifierKind kind) noexcept;
ClassifierKind parse_classifier_kind(const std::string& name);

struct NaiveBayesParams {
  double variance_floor = 1e-9;
};

enum class LogisticSolver { Newton, GradientDescent };

struct LogisticParams {
  /// Both minimize the same objective; Newton reaches the tolerance in far
  /// fewer passes over the data.
  LogisticSolver solver = LogisticSolver::Newton;
  double ridge = 1e-8;
  double gradient_tolerance = 1e-8;
  int max_iterations = 500;
};

struct TreeParams {
  int min_leaf = 2;
  int max_depth = 20;
};

struct DecisionTableParams {
  int bins = 3;
};

struct LinearSvmParams {
  double lambda = 1e-4;
  int epochs = 200;
};

using ClassifierParams =
    std::variant<NaiveBayesParams, LogisticParams, TreeParams, DecisionTableParams, LinearSvmParams>;

/// Which classifier to train, with validated hyperparameters.
class ClassifierSpec {
 public:
  /// Defaults for the kind.
  explicit ClassifierSpec(ClassifierKind kind, std::uint64_t seed = 0);
  /// Throws Error(InvalidArgument) on non-positive counts or tolerances.
  ClassifierSpec(ClassifierParams params, std::uint64_t seed);

  ClassifierKind kind() const noexcept;
  const ClassifierParams& params() const noexcept { return params_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::string name() const { return to_string(kind()); }

 private:
  ClassifierParams params_;
  std::uint64_t seed_ = 0;
};

struct NaiveBayesModel {
  Eigen::VectorXd log_prior;  // [non-buggy, buggy]
  Eigen::MatrixXd mean;       // 2 x |subset|
  Eigen::MatrixXd variance;   // 2 x |subset|
};

struct LinearModel {
  /// Original feature scale, one weight per subset member.
  Eigen::VectorXd weights;
  double bias = 0.0;
  /// Members whose training column was constant; their weight is 0.
  std::vector<MetricId> dropped;
};

struct TreeNode {
  int feature = -1;  // position within the subset, -1 for leaves
  double threshold = 0.0;
  int left = -1;     // value <= threshold
  int right = -1;
  double positive_fraction = 0.0;
  int count = 0;
};

struct TreeModel {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
};

struct DecisionTableModel {
  std::vector<std::vector<double>> upper_edges;  // per subset member
  std::map<std::vector<int>, std::pair<int, int>> cells;  // key -> (buggy, total)
  double default_score = 0.0;
};

/// Predicts the training majority regardless of input.
struct ConstantModel {
  double score = 0.0;
};

using ModelParameters =
    std::variant<NaiveBayesModel, LinearModel, TreeModel, DecisionTableModel, ConstantModel>;

struct TrainingInfo {
  std::size_t instances = 0;
  std::size_t positives = 0;
  std::vector<std::string> warnings;
};

class Model {
 public:
  Model(ClassifierKind kind, FeatureSubset subset, ModelParameters parameters, TrainingInfo info);

  ClassifierKind kind() const noexcept { return kind_; }
  const FeatureSubset& subset() const noexcept { return subset_; }
  const ModelParameters& parameters() const noexcept { return parameters_; }
  const TrainingInfo& info() const noexcept { return info_; }
  double class_prior() const noexcept;

  friend bool operator==(const Model& a, const Model& b);

 private:
  ClassifierKind kind_;
  FeatureSubset subset_;
  ModelParameters parameters_;
  TrainingInfo info_;

};

struct Prediction {
  bool buggy = false;
  double score = 0.0;
};

inline constexpr double kDecisionThreshold = 0.5;

/// Throws Error(SingleClassData) for kinds that need both classes,
/// Error(TooFewSamples) below two instances, Error(EmptySubset) for an empty subset.
Model train(const ClassifierSpec& spec, const Dataset& data, const FeatureSubset& subset);

/// `row` holds all 20 metrics in canonical order. Throws Error(MissingFeature)
/// if it is shorter or a used metric is NaN.
Prediction predict(const Model& model, const Eigen::Ref<const Eigen::RowVectorXd>& row);
Prediction predict(const Model& model, const Instance& instance);

/// Scores every row of a 20-column feature matrix.
Eigen::VectorXd predict_scores(const Model& model, const Eigen::MatrixXd& features);

/// Confusion counts of flag = (score >= kDecisionThreshold) against labels.
Outcome tally_predictions(const Eigen::Ref<const Eigen::VectorXd>& scores,
                          const Eigen::Ref<const Eigen::VectorXi>& labels);

Outcome evaluate_on(const Model& model, const Dataset& test);
Outcome evaluate_on(const Model& model, const Release& test);

/// Lower-level logistic fit on an already selected design matrix, exposing the
/// per-iteration objective (mean NLL + ridge) for convergence checks.
struct LogisticFit {
  LinearModel model;
  std::vector<Eigen::Index> dropped_columns;  // constant in training
  std::vector<double> objective_trace;
  int iterations = 0;
};
LogisticFit fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
                         const LogisticParams& params);

struct SvmFit {
  LinearModel model;
  /// hinge + lambda/2 |w|^2 on the standardized problem, after each epoch.
  std::vector<double> objective_trace;
};
SvmFit fit_linear_svm(const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
                      const LinearSvmParams& params, std::uint64_t seed);

/// Versioned JSON text ("metricslim-model/1").
std::string serialize_model(const Model& model);
Model deserialize_model(const std::string& text);

}  // namespace metricslim
