#include "doctest.h"

#include <cmath>

#include "metricslim/error.hpp"
#include "metricslim/learners.hpp"
#include "metricslim/stats.hpp"
#include "fixtures.hpp"
#include "support.hpp"

using namespace metricslim;
using M = MetricId;
using testing::blobs;
using testing::kPlane;
using testing::separable;

namespace {

const ClassifierKind kAllKinds[] = {ClassifierKind::NaiveBayes, ClassifierKind::Logistic,
                                    ClassifierKind::Tree, ClassifierKind::DecisionTable,
                                    ClassifierKind::LinearSvm};

double accuracy(const Model& m, const Dataset& d) {
  const auto o = evaluate_on(m, d);
  return static_cast<double>(o.tp + o.tn) / static_cast<double>(o.total());
}

}  // namespace

TEST_CASE("classifier spec validation") {
  CHECK(ClassifierSpec(ClassifierKind::Tree).kind() == ClassifierKind::Tree);
  CHECK(parse_classifier_kind("linear_svm") == ClassifierKind::LinearSvm);
  CHECK_THROWS_AS(parse_classifier_kind("bayes_net"), Error);
  CHECK_THROWS_AS(ClassifierSpec(LogisticParams{LogisticSolver::Newton, 1e-8, 0.0, 10}, 0), Error);
  CHECK_THROWS_AS(ClassifierSpec(LinearSvmParams{1e-4, 0}, 0), Error);
  CHECK_THROWS_AS(ClassifierSpec(TreeParams{0, 20}, 0), Error);
  CHECK_THROWS_AS(ClassifierSpec(DecisionTableParams{1}, 0), Error);
}

TEST_CASE("gaussian naive bayes on blobs") {
  const auto d = blobs(1);
  const FeatureSubset two{M::WMC, M::DIT};
  const auto model = train(ClassifierSpec(ClassifierKind::NaiveBayes), d, two);
  CHECK(accuracy(model, d) >= 0.99);
  // Equal priors and variances make the Bayes rule sign(x1 + x2).
  int agree = 0;
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    const bool bayes = d.features(i, 0) + d.features(i, 1) > 0.0;
    agree += predict(model, d.features.row(i)).buggy == bayes;
  }
  CHECK(agree >= 198);
  Eigen::RowVectorXd at_mean = Eigen::RowVectorXd::Zero(20);
  at_mean(0) = at_mean(1) = 1.0;
  CHECK(predict(model, at_mean).score > 0.5);
  const auto& nb = std::get<NaiveBayesModel>(model.parameters());
  CHECK(nb.mean(1, 0) == doctest::Approx(d.features.col(0).tail(100).mean()).epsilon(1e-12));
}

TEST_CASE("naive bayes confusion counts match a hand-evaluated decision rule") {
  const auto train_set = blobs(2, 30);
  const auto model = train(ClassifierSpec(ClassifierKind::NaiveBayes), train_set,
                           FeatureSubset{M::WMC, M::DIT, M::NOC});
  const auto& nb = std::get<NaiveBayesModel>(model.parameters());
  Rng rng(3);
  Dataset held;
  held.features = Eigen::MatrixXd::Zero(20, 20);
  held.labels.resize(20);
  Outcome expected;
  for (Eigen::Index i = 0; i < 20; ++i) {
    held.labels(i) = static_cast<int>(i % 2);
    for (Eigen::Index c = 0; c < 20; ++c) held.features(i, c) = 2.0 * rng.uniform() - 1.0;
    double ll[2];
    for (int c = 0; c < 2; ++c) {
      ll[c] = nb.log_prior(c);
      for (Eigen::Index j = 0; j < 3; ++j) {
        const double v = nb.variance(c, j), diff = held.features(i, j) - nb.mean(c, j);
        ll[c] += -0.5 * std::log(2.0 * M_PI * v) - diff * diff / (2.0 * v);
      }
    }
    const bool flag = 1.0 / (1.0 + std::exp(ll[0] - ll[1])) >= 0.5;
    const bool buggy = held.labels(i) == 1;
    expected.tp += flag && buggy;
    expected.fp += flag && !buggy;
    expected.tn += !flag && !buggy;
    expected.fn += !flag && buggy;
  }
  CHECK(evaluate_on(model, held) == expected);
}

TEST_CASE("naive bayes with constant columns stays finite") {
  auto d = blobs(4, 20);
  d.features.col(5).setConstant(3.0);
  d.features.col(6).head(20).setZero();
  const auto model = train(ClassifierSpec(ClassifierKind::NaiveBayes), d, FeatureSubset::all());
  const auto scores = predict_scores(model, d.features);
  CHECK(scores.allFinite());
  Eigen::MatrixXd far = d.features;
  far.col(5).setConstant(1e6);
  CHECK(predict_scores(model, far).allFinite());
}

TEST_CASE("logistic and svm separate linearly separable data") {
  const auto d = separable(5);
  for (auto kind : {ClassifierKind::Logistic, ClassifierKind::LinearSvm}) {
    const auto model = train(ClassifierSpec(kind, 9), d, kPlane);
    CHECK(measures(evaluate_on(model, d)).f_measure == 1.0);
  }
  auto gd = ClassifierSpec(LogisticParams{LogisticSolver::GradientDescent, 1e-8, 1e-8, 500}, 0);
  CHECK(accuracy(train(gd, d, kPlane), d) >= 0.98);

  // One-dimensional threshold.
  Dataset line;
  line.features = Eigen::MatrixXd::Zero(20, 20);
  line.labels.resize(20);
  for (int i = 0; i < 20; ++i) {
    line.features(i, index_of(M::LOC)) = i;
    line.labels(i) = i >= 10 ? 1 : 0;
  }
  CHECK(accuracy(train(ClassifierSpec(ClassifierKind::Logistic), line, FeatureSubset{M::LOC}), line) ==
        1.0);
}

TEST_CASE("logistic objective is non-increasing") {
  Rng rng(6);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::MatrixXd x(150, 4);
    Eigen::VectorXi y(150);
    for (Eigen::Index i = 0; i < 150; ++i) {
      for (Eigen::Index j = 0; j < 4; ++j) x(i, j) = rng.normal() * (j + 1);
      y(i) = rng.uniform() < 1.0 / (1.0 + std::exp(-(x(i, 0) - 0.5 * x(i, 2)))) ? 1 : 0;
    }
    for (auto solver : {LogisticSolver::Newton, LogisticSolver::GradientDescent}) {
      const auto fit = fit_logistic(x, y, LogisticParams{solver, 1e-8, 1e-8, 500});
      REQUIRE(fit.objective_trace.size() >= 2);
      for (std::size_t i = 1; i < fit.objective_trace.size(); ++i) {
        CHECK(fit.objective_trace[i] <= fit.objective_trace[i - 1] + 1e-10);
      }
    }
    const auto newton = fit_logistic(x, y, LogisticParams{});
    const auto gd = fit_logistic(x, y, LogisticParams{LogisticSolver::GradientDescent, 1e-8, 1e-8, 500});
    CHECK(newton.objective_trace.back() <= gd.objective_trace.back() + 1e-9);
  }
}

TEST_CASE("logistic drops constant columns with a warning") {
  auto d = separable(7);
  d.features.col(index_of(M::NOC)).setConstant(4.0);
  const auto model = train(ClassifierSpec(ClassifierKind::Logistic), d,
                           FeatureSubset{M::WMC, M::DIT, M::NOC, M::CBO});
  const auto& lin = std::get<LinearModel>(model.parameters());
  CHECK(lin.dropped == std::vector<MetricId>{M::NOC});
  CHECK(lin.weights(2) == 0.0);
  CHECK(model.info().warnings.size() == 1);
}

TEST_CASE("zero-weight logistic scores exactly one half") {
  LinearModel lin;
  lin.weights = Eigen::VectorXd::Zero(2);
  const Model m(ClassifierKind::Logistic, FeatureSubset{M::WMC, M::LOC}, lin, {});
  const auto p = predict(m, Eigen::RowVectorXd::Constant(20, 3.0));
  CHECK(p.score == 0.5);
  CHECK(p.buggy);
}

TEST_CASE("svm objective decreases over epochs") {
  const auto d = separable(8);
  const auto fit = fit_linear_svm(d.features(Eigen::all, std::vector<Eigen::Index>{0, 1, 3}), d.labels,
                                  LinearSvmParams{}, 3);
  REQUIRE(fit.objective_trace.size() == 200);
  CHECK(fit.objective_trace.back() < fit.objective_trace.front());
  double early = 0.0, late = 0.0;
  for (int i = 0; i < 20; ++i) {
    early += fit.objective_trace[static_cast<std::size_t>(i)];
    late += fit.objective_trace[static_cast<std::size_t>(180 + i)];
  }
  CHECK(late <= early);
}

TEST_CASE("tree memorizes a pure partition") {
  Dataset d;
  d.features = Eigen::MatrixXd::Zero(16, 20);
  d.labels.resize(16);
  for (int i = 0; i < 16; ++i) {
    d.features(i, 0) = i;
    d.features(i, 1) = (i * 7) % 16;
    d.labels(i) = (i % 3 == 0 || i > 12) ? 1 : 0;
  }
  const auto model = train(ClassifierSpec(TreeParams{1, 20}, 0), d, FeatureSubset{M::WMC, M::DIT});
  const auto o = evaluate_on(model, d);
  CHECK(o.fp == 0);
  CHECK(o.fn == 0);
  CHECK(o.tp == d.positives());
}

TEST_CASE("single-class training") {
  auto d = blobs(9, 10);
  d.labels.setOnes();
  for (auto kind : {ClassifierKind::NaiveBayes, ClassifierKind::DecisionTable}) {
    const auto m = train(ClassifierSpec(kind), d, FeatureSubset{M::WMC});
    CHECK(std::holds_alternative<ConstantModel>(m.parameters()));
    const auto test = blobs(10, 10);
    const auto o = evaluate_on(m, test);
    // Constant buggy predictor.
    CHECK(o.tp == test.positives());
    CHECK(o.fp == test.rows() - test.positives());
    CHECK(o.tn == 0);
    CHECK(o.fn == 0);
  }
  for (auto kind : {ClassifierKind::Logistic, ClassifierKind::Tree, ClassifierKind::LinearSvm}) {
    try {
      train(ClassifierSpec(kind), d, FeatureSubset{M::WMC});
      FAIL("single-class data accepted");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::SingleClassData);
    }
  }
}

TEST_CASE("training errors") {
  const auto d = blobs(11, 5);
  CHECK_THROWS_AS(train(ClassifierSpec(ClassifierKind::Tree), d, FeatureSubset{}), Error);
  Dataset one;
  one.features = Eigen::MatrixXd::Zero(1, 20);
  one.labels = Eigen::VectorXi::Zero(1);
  CHECK_THROWS_AS(train(ClassifierSpec(ClassifierKind::NaiveBayes), one, FeatureSubset{M::WMC}), Error);
  const auto m = train(ClassifierSpec(ClassifierKind::NaiveBayes), d, FeatureSubset{M::WMC});
  CHECK_THROWS_AS(predict(m, Eigen::RowVectorXd::Zero(5)), Error);
  Eigen::RowVectorXd nan_row = Eigen::RowVectorXd::Zero(20);
  nan_row(0) = std::nan("");
  CHECK_THROWS_AS(predict(m, nan_row), Error);
  nan_row(0) = 0.0;
  nan_row(7) = std::nan("");
  CHECK_NOTHROW(predict(m, nan_row));
  CHECK_THROWS_AS(predict_scores(m, Eigen::MatrixXd::Zero(3, 4)), Error);
}

TEST_CASE("training is deterministic and models round-trip") {
  const auto d = blobs(12);
  const FeatureSubset s{M::WMC, M::DIT, M::LOC, M::CAM};
  for (auto kind : kAllKinds) {
    const auto a = train(ClassifierSpec(kind, 77), d, s);
    const auto b = train(ClassifierSpec(kind, 77), d, s);
    CHECK(a == b);
    const auto text = serialize_model(a);
    const auto back = deserialize_model(text);
    CHECK(back == a);
    CHECK(serialize_model(back) == text);
    CHECK(predict_scores(back, d.features) == predict_scores(a, d.features));
  }
  CHECK_THROWS_AS(deserialize_model("{\"format\": \"other\"}"), Error);
  CHECK_THROWS_AS(deserialize_model("not json"), Error);
}

TEST_CASE("metrics outside the subset never change predictions") {
  const auto d = blobs(13);
  const FeatureSubset s{M::WMC, M::DIT, M::MFA};
  Rng rng(14);
  for (auto kind : kAllKinds) {
    const auto model = train(ClassifierSpec(kind, 1), d, s);
    const Eigen::VectorXd base = predict_scores(model, d.features);
    Eigen::MatrixXd perturbed = d.features;
    for (std::size_t c = 0; c < 20; ++c) {
      if (s.contains(metric_at(c))) continue;
      for (Eigen::Index r = 0; r < perturbed.rows(); ++r) {
        perturbed(r, static_cast<Eigen::Index>(c)) = 1e3 * rng.normal();
      }
    }
    CHECK(predict_scores(model, perturbed) == base);
    for (Eigen::Index r = 0; r < 10; ++r) {
      CHECK(predict(model, perturbed.row(r)).score == base(r));
    }
  }
}

TEST_CASE("batch and single-row scoring agree") {
  const auto d = blobs(15);
  const FeatureSubset s{M::WMC, M::DIT, M::NOC, M::RFC};
  for (auto kind : kAllKinds) {
    const auto model = train(ClassifierSpec(kind, 4), d, s);
    const Eigen::VectorXd batch = predict_scores(model, d.features);
    for (Eigen::Index r = 0; r < d.rows(); ++r) {
      CHECK(predict(model, d.features.row(r)).score == batch(r));
    }
    const auto o = evaluate_on(model, d);
    CHECK(o.total() == d.rows());
    CHECK(tally_predictions(batch, d.labels) == o);
  }
}
