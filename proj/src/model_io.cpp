#include <json.hpp>

#include "metricslim/error.hpp"
#include "metricslim/learners.hpp"

namespace metricslim {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "metricslim-model/1";

json to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXd matrix_from(const json& rows) {
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = r == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(rows[0].size());
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].get<double>();
  }
  return m;
}

Eigen::VectorXd vector_from(const json& v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i].get<double>();
  return out;
}

struct ParamsToJson {
  json operator()(const NaiveBayesModel& m) const {
    return {{"type", "naive_bayes"},
            {"log_prior", std::vector<double>(m.log_prior.data(), m.log_prior.data() + m.log_prior.size())},
            {"mean", to_json(m.mean)},
            {"variance", to_json(m.variance)}};
  }
  json operator()(const LinearModel& m) const {
    json dropped = json::array();
    for (auto d : m.dropped) dropped.push_back(std::string(metric_name(d)));
    return {{"type", "linear"},
            {"weights", std::vector<double>(m.weights.data(), m.weights.data() + m.weights.size())},
            {"bias", m.bias},
            {"dropped", dropped}};
  }
  json operator()(const TreeModel& m) const {
    json nodes = json::array();
    for (const auto& n : m.nodes) {
      nodes.push_back({n.feature, n.threshold, n.left, n.right, n.positive_fraction, n.count});
    }
    return {{"type", "tree"}, {"nodes", nodes}};
  }
  json operator()(const DecisionTableModel& m) const {
    json cells = json::array();
    for (const auto& [key, counts] : m.cells) cells.push_back({key, counts.first, counts.second});
    return {{"type", "decision_table"},
            {"upper_edges", m.upper_edges},
            {"cells", cells},
            {"default_score", m.default_score}};
  }
  json operator()(const ConstantModel& m) const { return {{"type", "constant"}, {"score", m.score}}; }
};

ModelParameters params_from(const json& p) {
  const auto type = p.at("type").get<std::string>();
  if (type == "naive_bayes") {
    return NaiveBayesModel{vector_from(p.at("log_prior")), matrix_from(p.at("mean")),
                           matrix_from(p.at("variance"))};
  }
  if (type == "linear") {
    LinearModel m{vector_from(p.at("weights")), p.at("bias").get<double>(), {}};
    for (const auto& d : p.at("dropped")) {
      const auto id = parse_metric(d.get<std::string>());
      if (!id) throw Error(ErrorKind::ModelFormat, "unknown metric in dropped list");
      m.dropped.push_back(*id);
    }
    return m;
  }
  if (type == "tree") {
    TreeModel m;
    for (const auto& n : p.at("nodes")) {
      m.nodes.push_back({n[0].get<int>(), n[1].get<double>(), n[2].get<int>(), n[3].get<int>(),
                         n[4].get<double>(), n[5].get<int>()});
    }
    return m;
  }
  if (type == "decision_table") {
    DecisionTableModel m;
    m.upper_edges = p.at("upper_edges").get<std::vector<std::vector<double>>>();
    for (const auto& c : p.at("cells")) {
      m.cells[c[0].get<std::vector<int>>()] = {c[1].get<int>(), c[2].get<int>()};
    }
    m.default_score = p.at("default_score").get<double>();
    return m;
  }
  if (type == "constant") return ConstantModel{p.at("score").get<double>()};
  throw Error(ErrorKind::ModelFormat, "unknown parameter block '" + type + "'");
}

}  // namespace

std::string serialize_model(const Model& model) {
  json doc = {
      {"format", kFormat},
      {"kind", to_string(model.kind())},
      {"subset", model.subset().to_string()},
      {"training", {{"instances", model.info().instances}, {"positives", model.info().positives},
                    {"warnings", model.info().warnings}}},
      {"parameters", std::visit(ParamsToJson{}, model.parameters())},
  };
  return doc.dump(1);
}

Model deserialize_model(const std::string& text) {
  try {
    const auto doc = json::parse(text);
    if (doc.at("format").get<std::string>() != kFormat) {
      throw Error(ErrorKind::ModelFormat, "unsupported model format");
    }
    TrainingInfo info;
    info.instances = doc.at("training").at("instances").get<std::size_t>();
    info.positives = doc.at("training").at("positives").get<std::size_t>();
    info.warnings = doc.at("training").at("warnings").get<std::vector<std::string>>();
    return Model(parse_classifier_kind(doc.at("kind").get<std::string>()),
                 FeatureSubset::parse(doc.at("subset").get<std::string>()),
                 params_from(doc.at("parameters")), std::move(info));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ModelFormat, e.what());
  }
}

}  // namespace metricslim
