#include "metricslim/learners.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "metricslim/error.hpp"
#include "metricslim/features.hpp"
#include "metricslim/random.hpp"

namespace metricslim {

const char* to_string(ClassifierKind kind) noexcept {
  switch (kind) {
    case ClassifierKind::NaiveBayes: return "naive_bayes";
    case ClassifierKind::Logistic: return "logistic";
    case ClassifierKind::Tree: return "tree";
    case ClassifierKind::DecisionTable: return "decision_table";
    case ClassifierKind::LinearSvm: return "linear_svm";
  }
  return "?";
}

ClassifierKind parse_classifier_kind(const std::string& name) {
  for (auto k : {ClassifierKind::NaiveBayes, ClassifierKind::Logistic, ClassifierKind::Tree,
                 ClassifierKind::DecisionTable, ClassifierKind::LinearSvm}) {
    if (name == to_string(k)) return k;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown classifier '" + name + "'");
}

namespace {

ClassifierParams default_params(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::NaiveBayes: return NaiveBayesParams{};
    case ClassifierKind::Logistic: return LogisticParams{};
    case ClassifierKind::Tree: return TreeParams{};
    case ClassifierKind::DecisionTable: return DecisionTableParams{};
    case ClassifierKind::LinearSvm: return LinearSvmParams{};
  }
  return NaiveBayesParams{};
}

void validate(const ClassifierParams& params) {
  auto fail = [](const char* what) { throw Error(ErrorKind::InvalidArgument, what); };
  if (const auto* p = std::get_if<NaiveBayesParams>(&params)) {
    if (!(p->variance_floor > 0.0)) fail("naive_bayes: variance_floor must be > 0");
  } else if (const auto* p = std::get_if<LogisticParams>(&params)) {
    if (!(p->ridge >= 0.0)) fail("logistic: ridge must be >= 0");
    if (!(p->gradient_tolerance > 0.0)) fail("logistic: tolerance must be > 0");
    if (p->max_iterations <= 0) fail("logistic: max_iterations must be > 0");
  } else if (const auto* p = std::get_if<TreeParams>(&params)) {
    if (p->min_leaf <= 0) fail("tree: min_leaf must be > 0");
    if (p->max_depth <= 0) fail("tree: max_depth must be > 0");
  } else if (const auto* p = std::get_if<DecisionTableParams>(&params)) {
    if (p->bins < 2) fail("decision_table: bins must be >= 2");
  } else if (const auto* p = std::get_if<LinearSvmParams>(&params)) {
    if (!(p->lambda > 0.0)) fail("linear_svm: lambda must be > 0");
    if (p->epochs <= 0) fail("linear_svm: epochs must be > 0");
  }
}

std::vector<Eigen::Index> subset_columns(const FeatureSubset& subset) {
  std::vector<Eigen::Index> cols;
  for (auto i : subset.indices()) cols.push_back(static_cast<Eigen::Index>(i));
  return cols;
}

double sigmoid(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double softplus(double z) noexcept {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

// Column standardization with constant columns dropped.
struct Standardizer {
  std::vector<Eigen::Index> kept;  // positions within the input matrix
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;

  explicit Standardizer(const Eigen::MatrixXd& x) {
    const auto n = static_cast<double>(x.rows());
    std::vector<double> means, sds;
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      const double m = x.col(c).mean();
      const double var = (x.col(c).array() - m).square().sum() / n;
      if (var > 0.0) {
        kept.push_back(c);
        means.push_back(m);
        sds.push_back(std::sqrt(var));
      }
    }
    mean = Eigen::Map<Eigen::VectorXd>(means.data(), static_cast<Eigen::Index>(means.size()));
    sd = Eigen::Map<Eigen::VectorXd>(sds.data(), static_cast<Eigen::Index>(sds.size()));
  }

  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const {
    Eigen::MatrixXd z = x(Eigen::all, kept);
    z.rowwise() -= mean.transpose();
    z.array().rowwise() /= sd.transpose().array();
    return z;
  }

  // Map standardized (w, b) back onto the original columns.
  LinearModel to_original(const Eigen::VectorXd& w, double b, Eigen::Index original_cols) const {
    LinearModel out;
    out.weights = Eigen::VectorXd::Zero(original_cols);
    out.bias = b;
    for (std::size_t k = 0; k < kept.size(); ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      out.weights(kept[k]) = w(kk) / sd(kk);
      out.bias -= w(kk) * mean(kk) / sd(kk);
    }
    return out;
  }

  std::vector<Eigen::Index> dropped(Eigen::Index cols) const {
    std::vector<Eigen::Index> out;
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (std::find(kept.begin(), kept.end(), c) == kept.end()) out.push_back(c);
    }
    return out;
  }
};

double logistic_objective(const Eigen::MatrixXd& z, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& w, double b, double ridge) {
  const Eigen::VectorXd eta = (z * w).array() + b;
  double loss = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) loss += softplus(eta(i)) - y(i) * eta(i);
  return loss / static_cast<double>(eta.size()) + 0.5 * ridge * w.squaredNorm();
}

LinearModel fit_svm_impl(const Eigen::MatrixXd& x, const Eigen::VectorXi& labels,
                         const LinearSvmParams& params, std::uint64_t seed,
                         std::vector<double>* trace) {
  const Standardizer stdz(x);
  const Eigen::Index d = static_cast<Eigen::Index>(stdz.kept.size());
  Eigen::MatrixXd z(x.rows(), d + 1);
  z.leftCols(d) = stdz.apply(x);
  z.col(d).setOnes();
  const Eigen::MatrixXd zt = z.transpose();  // one contiguous column per instance
  const Eigen::VectorXd y = (2 * labels.array() - 1).cast<double>();

  // w = scale * v, so the per-step shrink costs O(1); |v|^2 is tracked
  // incrementally and refreshed every epoch.
  Eigen::VectorXd v = Eigen::VectorXd::Zero(d + 1);
  double scale = 1.0;
  double v_sq = 0.0;
  const Eigen::VectorXd x_sq = zt.colwise().squaredNorm().transpose();
  const double radius = 1.0 / std::sqrt(params.lambda);
  const double radius_sq = 1.0 / params.lambda;
  std::vector<std::size_t> order(static_cast<std::size_t>(x.rows()));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  double t = 0.0;
  Eigen::VectorXd w(d + 1);
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    rng.shuffle(order);
    double* vp = v.data();
    const auto dim = static_cast<std::size_t>(d + 1);
    for (auto idx : order) {
      const auto i = static_cast<Eigen::Index>(idx);
      const double* xi = zt.data() + idx * dim;
      t += 1.0;
      const double eta = 1.0 / (params.lambda * t);
      double xv = 0.0;
      for (std::size_t j = 0; j < dim; ++j) xv += xi[j] * vp[j];
      const double margin = y(i) * scale * xv;
      scale *= 1.0 - 1.0 / t;
      if (scale == 0.0) {
        v.setZero();
        v_sq = 0.0;
        scale = 1.0;
      }
      if (margin < 1.0) {
        const double c = eta * y(i) / scale;
        const double cross = v_sq == 0.0 ? 0.0 : xv;
        for (std::size_t j = 0; j < dim; ++j) vp[j] += c * xi[j];
        v_sq = std::max(0.0, v_sq + 2.0 * c * cross + c * c * x_sq(i));
      }
      const double norm_sq = scale * scale * v_sq;
      if (norm_sq > radius_sq) scale *= radius / std::sqrt(norm_sq);
    }
    v *= scale;
    scale = 1.0;
    v_sq = v.squaredNorm();
    w = v;
    if (trace != nullptr) {
      const Eigen::ArrayXd margins = y.array() * (z * w).array();
      const double hinge = (1.0 - margins).max(0.0).mean();
      trace->push_back(hinge + 0.5 * params.lambda * w.squaredNorm());
    }
  }
  if (params.epochs <= 0) w.setZero();
  auto model = stdz.to_original(w.head(d), w(d), x.cols());
  return model;
}

// ---------------------------------------------------------------- tree

struct TreeBuilder {
  const Eigen::MatrixXd& x;
  const Eigen::VectorXi& y;
  TreeParams params;
  std::vector<TreeNode> nodes;
  std::vector<double> nlogn;  // nlogn[k] = k log2 k

  // n * H(pos / n) in bits, without calling log in the split scan.
  double weighted_entropy(int pos, int n) const {
    return nlogn[static_cast<std::size_t>(n)] - nlogn[static_cast<std::size_t>(pos)] -
           nlogn[static_cast<std::size_t>(n - pos)];
  }

  struct Candidate {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
    double ratio = 0.0;
  };

  struct Entry {
    double value;
    int row;
    int label;
  };
  std::vector<char> goes_left;

  // sorted[f] holds this node's rows ordered by feature f.
  int build(std::vector<std::vector<Entry>> sorted, int depth) {
    const auto& rows = sorted.front();
    const int n = static_cast<int>(rows.size());
    int pos = 0;
    for (const auto& e : rows) pos += e.label;
    const int id = static_cast<int>(nodes.size());
    nodes.push_back({-1, 0.0, -1, -1, n > 0 ? static_cast<double>(pos) / n : 0.0, n});
    if (pos == 0 || pos == n || n < 2 * params.min_leaf || depth >= params.max_depth) return id;

    const double parent_h = weighted_entropy(pos, n) / n;
    std::vector<Candidate> best_per_feature;
    for (std::size_t f = 0; f < sorted.size(); ++f) {
      const Entry* order = sorted[f].data();
      Candidate best;
      int left_pos = 0;
      for (int i = 0; i + 1 < n; ++i) {
        left_pos += order[i].label;
        const int left_n = i + 1;
        const int right_n = n - left_n;
        if (left_n < params.min_leaf || right_n < params.min_leaf) continue;
        const double v = order[i].value;
        const double next = order[i + 1].value;
        if (!(v < next)) continue;
        const double h =
            (weighted_entropy(left_pos, left_n) + weighted_entropy(pos - left_pos, right_n)) / n;
        const double gain = parent_h - h;
        if (gain > best.gain + 1e-12) {
          const double pl = static_cast<double>(left_n) / n;
          const double split_info = -pl * std::log2(pl) - (1.0 - pl) * std::log2(1.0 - pl);
          best = {static_cast<int>(f), v + (next - v) / 2.0, gain, gain / split_info};
        }
      }
      if (best.feature >= 0) best_per_feature.push_back(best);
    }
    if (best_per_feature.empty()) return id;

    // Gain ratio among splits with at least average gain.
    double mean_gain = 0.0;
    for (const auto& c : best_per_feature) mean_gain += c.gain;
    mean_gain /= static_cast<double>(best_per_feature.size());
    const Candidate* chosen = nullptr;
    for (const auto& c : best_per_feature) {
      if (c.gain + 1e-12 < mean_gain) continue;
      if (chosen == nullptr || c.ratio > chosen->ratio) chosen = &c;
    }
    const double threshold = chosen->threshold;
    for (const auto& e : sorted[static_cast<std::size_t>(chosen->feature)]) {
      goes_left[static_cast<std::size_t>(e.row)] = e.value <= threshold ? 1 : 0;
    }

    std::vector<std::vector<Entry>> left(sorted.size()), right(sorted.size());
    for (std::size_t f = 0; f < sorted.size(); ++f) {
      for (const auto& e : sorted[f]) {
        (goes_left[static_cast<std::size_t>(e.row)] != 0 ? left[f] : right[f]).push_back(e);
      }
    }
    if (left.front().empty() || right.front().empty()) return id;
    sorted.clear();
    sorted.shrink_to_fit();
    const int l = build(std::move(left), depth + 1);
    const int r = build(std::move(right), depth + 1);
    nodes[static_cast<std::size_t>(id)].feature = chosen->feature;
    nodes[static_cast<std::size_t>(id)].threshold = threshold;
    nodes[static_cast<std::size_t>(id)].left = l;
    nodes[static_cast<std::size_t>(id)].right = r;
    return id;
  }
};

TreeModel fit_tree(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, const TreeParams& params) {
  std::vector<std::vector<TreeBuilder::Entry>> sorted(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    auto& order = sorted[static_cast<std::size_t>(c)];
    order.reserve(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      order.push_back({x(r, c), static_cast<int>(r), y(r)});
    }
    std::stable_sort(order.begin(), order.end(),
                     [](const auto& a, const auto& b) { return a.value < b.value; });
  }
  TreeBuilder builder{x, y, params, {}, std::vector<double>(static_cast<std::size_t>(x.rows()) + 1, 0.0),
                      std::vector<char>(static_cast<std::size_t>(x.rows()), 0)};
  for (std::size_t k = 2; k < builder.nlogn.size(); ++k) {
    builder.nlogn[k] = static_cast<double>(k) * std::log2(static_cast<double>(k));
  }
  builder.build(std::move(sorted), 0);
  return {std::move(builder.nodes)};
}

DecisionTableModel fit_table(const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
                             const DecisionTableParams& params) {
  DecisionTableModel table;
  std::vector<EqualFrequencyBinner> binners;
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    binners.emplace_back(x.col(c), params.bins);
    table.upper_edges.push_back(binners.back().upper_edges());
  }
  std::vector<int> key(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      key[static_cast<std::size_t>(c)] = binners[static_cast<std::size_t>(c)].bin_of(x(r, c));
    }
    auto& cell = table.cells[key];
    cell.first += y(r);
    cell.second += 1;
  }
  table.default_score = static_cast<double>(y.sum()) / static_cast<double>(y.size());
  return table;
}

int bin_from_edges(const std::vector<double>& edges, double v) {
  return static_cast<int>(std::lower_bound(edges.begin(), edges.end(), v) - edges.begin());
}

double nb_log_norm(const NaiveBayesModel& m, int c) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < m.variance.cols(); ++j) {
    s += 0.5 * std::log(2.0 * std::numbers::pi * m.variance(c, j));
  }
  return s;
}

// Left-to-right sum shared by row and batch scoring.
template <typename Row>
double linear_raw(const Row& x, const LinearModel& m) {
  double z = m.bias;
  for (Eigen::Index j = 0; j < m.weights.size(); ++j) z += x(j) * m.weights(j);
  return z;
}

struct Scorer {
  const Eigen::Ref<const Eigen::RowVectorXd>& x;  // subset values only

  double operator()(const NaiveBayesModel& m) const {
    double ll[2];
    for (int c = 0; c < 2; ++c) {
      double s = m.log_prior(c) - nb_log_norm(m, c);
      for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double diff = x(j) - m.mean(c, j);
        s -= diff * diff / (2.0 * m.variance(c, j));
      }
      ll[c] = s;
    }
    return sigmoid(ll[1] - ll[0]);
  }
  double operator()(const LinearModel& m) const { return linear_raw(x, m); }
  double operator()(const TreeModel& m) const {
    int node = 0;
    while (m.nodes[static_cast<std::size_t>(node)].feature >= 0) {
      const auto& n = m.nodes[static_cast<std::size_t>(node)];
      node = x(n.feature) <= n.threshold ? n.left : n.right;
    }
    return m.nodes[static_cast<std::size_t>(node)].positive_fraction;
  }
  double operator()(const DecisionTableModel& m) const {
    std::vector<int> key(static_cast<std::size_t>(x.size()));
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      key[static_cast<std::size_t>(j)] = bin_from_edges(m.upper_edges[static_cast<std::size_t>(j)], x(j));
    }
    const auto it = m.cells.find(key);
    if (it == m.cells.end()) return m.default_score;
    return static_cast<double>(it->second.first) / static_cast<double>(it->second.second);
  }
  double operator()(const ConstantModel& m) const { return m.score; }
};

double score_row(const Model& model, const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  const double raw = std::visit(Scorer{x}, model.parameters());
  if (std::holds_alternative<LinearModel>(model.parameters())) {
    return model.kind() == ClassifierKind::LinearSvm ? sigmoid(2.0 * raw) : sigmoid(raw);
  }
  return raw;
}

}  // namespace

ClassifierSpec::ClassifierSpec(ClassifierKind kind, std::uint64_t seed)
    : params_(default_params(kind)), seed_(seed) {}

ClassifierSpec::ClassifierSpec(ClassifierParams params, std::uint64_t seed)
    : params_(std::move(params)), seed_(seed) {
  validate(params_);
}

ClassifierKind ClassifierSpec::kind() const noexcept {
  return static_cast<ClassifierKind>(params_.index());
}

Model::Model(ClassifierKind kind, FeatureSubset subset, ModelParameters parameters, TrainingInfo info)
    : kind_(kind), subset_(subset), parameters_(std::move(parameters)), info_(std::move(info)) {}

double Model::class_prior() const noexcept {
  return info_.instances == 0 ? 0.0
                              : static_cast<double>(info_.positives) / static_cast<double>(info_.instances);
}

bool operator==(const Model& a, const Model& b) { return serialize_model(a) == serialize_model(b); }

LogisticFit fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXi& labels,
                         const LogisticParams& params) {
  const Standardizer stdz(x);
  const Eigen::MatrixXd z = stdz.apply(x);
  const Eigen::VectorXd y = labels.cast<double>();
  const auto n = static_cast<double>(x.rows());
  const Eigen::Index p = z.cols();

  // Augmented design [z 1]; the intercept is not penalized.
  Eigen::MatrixXd a(z.rows(), p + 1);
  a << z, Eigen::VectorXd::Ones(z.rows());
  Eigen::VectorXd penalty = Eigen::VectorXd::Constant(p + 1, params.ridge);
  penalty(p) = 0.0;

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(p + 1);
  const auto objective_at = [&](const Eigen::VectorXd& t) {
    return logistic_objective(z, y, t.head(p), t(p), params.ridge);
  };
  LogisticFit fit;
  double objective = objective_at(theta);
  fit.objective_trace.push_back(objective);
  double gd_step = 1.0;
  for (int it = 0; it < params.max_iterations; ++it) {
    const Eigen::VectorXd prob = (a * theta).unaryExpr([](double v) { return sigmoid(v); });
    const Eigen::VectorXd grad = a.transpose() * (prob - y) / n + penalty.cwiseProduct(theta);
    if (grad.norm() < params.gradient_tolerance) break;

    Eigen::VectorXd dir = grad;
    double slope = grad.squaredNorm();
    double step = 1.0;
    if (params.solver == LogisticSolver::Newton) {
      // Fall back to the gradient when the Hessian is numerically singular
      // (separable data drives the weights s(1-s) to 0).
      const Eigen::VectorXd weight = prob.array() * (1.0 - prob.array());
      Eigen::MatrixXd hess = a.transpose() * weight.asDiagonal() * a / n;
      hess.diagonal() += penalty;
      hess.diagonal().array() += 1e-12;
      const Eigen::VectorXd newton = hess.ldlt().solve(grad);
      const double newton_slope = grad.dot(newton);
      if (newton.allFinite() && newton_slope > 0.0) {
        dir = newton;
        slope = newton_slope;
      }
    } else {
      gd_step = std::min(gd_step * 2.0, 1e4);
      step = gd_step;
    }
    // Armijo backtracking keeps the objective monotone.
    bool accepted = false;
    for (int halving = 0; halving < 60; ++halving) {
      const Eigen::VectorXd trial = theta - step * dir;
      const double obj_try = objective_at(trial);
      if (obj_try <= objective - 1e-4 * step * slope) {
        theta = trial;
        objective = obj_try;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    if (params.solver == LogisticSolver::GradientDescent) gd_step = step;
    fit.objective_trace.push_back(objective);
    fit.iterations = it + 1;
  }
  fit.model = stdz.to_original(theta.head(p), theta(p), x.cols());
  fit.dropped_columns = stdz.dropped(x.cols());
  return fit;
}

SvmFit fit_linear_svm(const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
                      const LinearSvmParams& params, std::uint64_t seed) {
  SvmFit fit;
  fit.model = fit_svm_impl(x, y, params, seed, &fit.objective_trace);
  return fit;
}

Model train(const ClassifierSpec& spec, const Dataset& data, const FeatureSubset& subset) {
  if (subset.empty()) throw Error(ErrorKind::EmptySubset, "cannot train on an empty subset");
  if (data.rows() < 2) throw Error(ErrorKind::TooFewSamples, "training needs at least 2 instances");
  const auto cols = subset_columns(subset);
  const Eigen::MatrixXd x = data.features(Eigen::all, cols);
  const Eigen::VectorXi& y = data.labels;
  TrainingInfo info{static_cast<std::size_t>(data.rows()), static_cast<std::size_t>(data.positives()), {}};
  const auto kind = spec.kind();
  const bool tolerant = kind == ClassifierKind::NaiveBayes || kind == ClassifierKind::DecisionTable;

  if (!data.has_both_classes()) {
    if (!tolerant) {
      throw Error(ErrorKind::SingleClassData, std::string(to_string(kind)) + " needs both classes");
    }
    info.warnings.push_back("single-class training data: constant predictor");
    return Model(kind, subset, ConstantModel{data.positives() > 0 ? 1.0 : 0.0}, std::move(info));
  }

  switch (kind) {
    case ClassifierKind::NaiveBayes: {
      const auto& p = std::get<NaiveBayesParams>(spec.params());
      NaiveBayesModel m;
      m.log_prior.resize(2);
      m.mean.resize(2, x.cols());
      m.variance.resize(2, x.cols());
      for (int c = 0; c < 2; ++c) {
        std::vector<Eigen::Index> rows;
        for (Eigen::Index r = 0; r < x.rows(); ++r) {
          if (y(r) == c) rows.push_back(r);
        }
        const Eigen::MatrixXd xc = x(rows, Eigen::all);
        const auto nc = static_cast<double>(rows.size());
        m.log_prior(c) = std::log(nc / static_cast<double>(x.rows()));
        const Eigen::RowVectorXd mean = xc.colwise().mean();
        m.mean.row(c) = mean;
        m.variance.row(c) = ((xc.rowwise() - mean).array().square().colwise().sum() / nc)
                                .max(p.variance_floor);
      }
      return Model(kind, subset, std::move(m), std::move(info));
    }
    case ClassifierKind::Logistic: {
      auto fit = fit_logistic(x, y, std::get<LogisticParams>(spec.params()));
      const auto members = subset.members();
      for (auto c : fit.dropped_columns) {
        const auto m = members[static_cast<std::size_t>(c)];
        fit.model.dropped.push_back(m);
        info.warnings.push_back("constant column " + std::string(metric_name(m)) + " dropped");
      }
      return Model(kind, subset, std::move(fit.model), std::move(info));
    }
    case ClassifierKind::Tree:
      return Model(kind, subset, fit_tree(x, y, std::get<TreeParams>(spec.params())), std::move(info));
    case ClassifierKind::DecisionTable:
      return Model(kind, subset, fit_table(x, y, std::get<DecisionTableParams>(spec.params())),
                   std::move(info));
    case ClassifierKind::LinearSvm:
      return Model(kind, subset,
                   fit_svm_impl(x, y, std::get<LinearSvmParams>(spec.params()), spec.seed(), nullptr),
                   std::move(info));
  }
  throw Error(ErrorKind::InvalidArgument, "unknown classifier kind");
}

Prediction predict(const Model& model, const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  if (row.size() < static_cast<Eigen::Index>(kMetricCount)) {
    throw Error(ErrorKind::MissingFeature, "instance has fewer than 20 metrics");
  }
  const auto cols = subset_columns(model.subset());
  const Eigen::RowVectorXd x = row(cols);
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    if (std::isnan(x(j))) {
      throw Error(ErrorKind::MissingFeature,
                  std::string(metric_name(metric_at(static_cast<std::size_t>(cols[static_cast<std::size_t>(j)])))));
    }
  }
  const double score = score_row(model, x);
  return {score >= kDecisionThreshold, score};
}

Prediction predict(const Model& model, const Instance& instance) {
  return predict(model, Eigen::RowVectorXd(instance.metrics));
}

namespace {

Eigen::VectorXd nb_scores(const NaiveBayesModel& m, const Eigen::MatrixXd& x) {
  Eigen::VectorXd ll[2];
  for (int c = 0; c < 2; ++c) {
    ll[c] = Eigen::VectorXd::Constant(x.rows(), m.log_prior(c) - nb_log_norm(m, c));
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double mean = m.mean(c, j);
      const double denom = 2.0 * m.variance(c, j);
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double diff = x(i, j) - mean;
        ll[c](i) -= diff * diff / denom;
      }
    }
  }
  Eigen::VectorXd out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) out(i) = sigmoid(ll[1](i) - ll[0](i));
  return out;
}

// Cells keyed by a mixed-radix code instead of a vector, for batch lookups.
Eigen::VectorXd table_scores(const DecisionTableModel& m, const Eigen::MatrixXd& x) {
  const auto k = static_cast<std::size_t>(x.cols());
  std::vector<std::uint64_t> radix(k);
  double capacity = 1.0;
  for (std::size_t j = 0; j < k; ++j) {
    radix[j] = m.upper_edges[j].size() + 1;
    capacity *= static_cast<double>(radix[j]);
  }
  Eigen::VectorXd out(x.rows());
  if (capacity >= 9.0e18) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) out(i) = Scorer{x.row(i)}(m);
    return out;
  }
  const auto encode = [&](auto bin_of) {
    std::uint64_t code = 0;
    for (std::size_t j = 0; j < k; ++j) code = code * radix[j] + static_cast<std::uint64_t>(bin_of(j));
    return code;
  };
  std::vector<std::pair<std::uint64_t, double>> index;
  index.reserve(m.cells.size());
  for (const auto& [key, counts] : m.cells) {
    index.emplace_back(encode([&](std::size_t j) { return key[j]; }),
                       static_cast<double>(counts.first) / static_cast<double>(counts.second));
  }
  std::sort(index.begin(), index.end());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const auto code = encode([&](std::size_t j) {
      return bin_from_edges(m.upper_edges[j], x(i, static_cast<Eigen::Index>(j)));
    });
    const auto it = std::lower_bound(index.begin(), index.end(), std::make_pair(code, -1.0));
    out(i) = it != index.end() && it->first == code ? it->second : m.default_score;
  }
  return out;
}

}  // namespace

Eigen::VectorXd predict_scores(const Model& model, const Eigen::MatrixXd& features) {
  const auto cols = subset_columns(model.subset());
  if (features.cols() < static_cast<Eigen::Index>(kMetricCount)) {
    throw Error(ErrorKind::MissingFeature, "feature matrix needs all 20 metric columns");
  }
  const Eigen::MatrixXd x = features(Eigen::all, cols);
  Eigen::VectorXd scores(x.rows());
  if (const auto* lin = std::get_if<LinearModel>(&model.parameters())) {
    const double gain = model.kind() == ClassifierKind::LinearSvm ? 2.0 : 1.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) scores(i) = sigmoid(gain * linear_raw(x.row(i), *lin));
    return scores;
  }
  if (const auto* nb = std::get_if<NaiveBayesModel>(&model.parameters())) return nb_scores(*nb, x);
  if (const auto* dt = std::get_if<DecisionTableModel>(&model.parameters())) return table_scores(*dt, x);
  for (Eigen::Index i = 0; i < x.rows(); ++i) scores(i) = score_row(model, x.row(i));
  return scores;
}

Outcome tally_predictions(const Eigen::Ref<const Eigen::VectorXd>& scores,
                          const Eigen::Ref<const Eigen::VectorXi>& labels) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorKind::LengthMismatch, "scores and labels differ in length");
  }
  Outcome o;
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    const bool flagged = scores(i) >= kDecisionThreshold;
    const bool buggy = labels(i) != 0;
    if (flagged && buggy) ++o.tp;
    else if (flagged) ++o.fp;
    else if (buggy) ++o.fn;
    else ++o.tn;
  }
  return o;
}

Outcome evaluate_on(const Model& model, const Dataset& test) {
  return tally_predictions(predict_scores(model, test.features), test.labels);
}

Outcome evaluate_on(const Model& model, const Release& test) {
  return evaluate_on(model, make_dataset(test));
}

}  // namespace metricslim
