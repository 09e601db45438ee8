#include "metricslim/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "metricslim/error.hpp"

namespace metricslim {

using nlohmann::json;

const char* to_string(MetricSetType type) noexcept {
  switch (type) {
    case MetricSetType::All: return "all";
    case MetricSetType::Filter: return "filter";
    case MetricSetType::TopK: return "topk";
    case MetricSetType::Min: return "min";
    case MetricSetType::Explicit: return "explicit";
    case MetricSetType::MaxRel: return "maxrel";
    case MetricSetType::Mrmr: return "mrmr";
  }
  return "?";
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::ConfigError, path + ": " + what);
}

MetricSetType parse_set_type(const std::string& path, const std::string& s) {
  for (auto t : {MetricSetType::All, MetricSetType::Filter, MetricSetType::TopK, MetricSetType::Min,
                 MetricSetType::Explicit, MetricSetType::MaxRel, MetricSetType::Mrmr}) {
    if (s == to_string(t)) return t;
  }
  fail(path, "unknown metric-set type '" + s + "'");
}

// Small typed accessors that keep the field path in every message.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const json& raw() const { return j_; }

  Node at(const std::string& key) const { return {j_.at(key), path_ + "." + key}; }
  Node at(std::size_t i) const { return {j_.at(i), path_ + "[" + std::to_string(i) + "]"}; }
  bool has(const std::string& key) const { return j_.is_object() && j_.contains(key); }

  std::string str() const {
    if (!j_.is_string()) fail(path_, "expected a string");
    return j_.get<std::string>();
  }
  double number() const {
    if (!j_.is_number()) fail(path_, "expected a number");
    return j_.get<double>();
  }
  bool boolean() const {
    if (!j_.is_boolean()) fail(path_, "expected true or false");
    return j_.get<bool>();
  }
  std::int64_t integer(std::int64_t lo, std::int64_t hi) const {
    if (!j_.is_number_integer()) fail(path_, "expected an integer");
    const auto v = j_.get<std::int64_t>();
    if (v < lo || v > hi) {
      fail(path_, "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    return v;
  }
  std::uint64_t unsigned_integer() const {
    if (!j_.is_number_unsigned() && !(j_.is_number_integer() && j_.get<std::int64_t>() >= 0)) {
      fail(path_, "expected a non-negative integer");
    }
    return j_.get<std::uint64_t>();
  }
  double probability_open() const {
    const double v = number();
    if (!(v > 0.0 && v < 1.0)) fail(path_, "must be in (0, 1)");
    return v;
  }
  double probability_closed() const {
    const double v = number();
    if (!(v >= 0.0 && v <= 1.0)) fail(path_, "must be in [0, 1]");
    return v;
  }
  const json& array() const {
    if (!j_.is_array()) fail(path_, "expected an array");
    return j_;
  }
  void object_with(std::initializer_list<const char*> allowed) const {
    if (!j_.is_object()) fail(path_, "expected an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j_.items()) {
      if (!ok.count(key)) fail(path_ + "." + key, "unknown field");
    }
  }

 private:
  const json& j_;
  std::string path_;
};

template <class F>
auto translate(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ConfigError) throw;
    fail(path, e.what());
  }
}

ScenarioSpec parse_scenario(const Node& n) {
  ScenarioSpec spec;
  if (n.raw().is_string()) {
    spec.kind = translate(n.path(), [&] { return parse_scenario_kind(n.str()); });
    return spec;
  }
  n.object_with({"kind", "max_releases", "objective"});
  if (!n.has("kind")) fail(n.path() + ".kind", "missing");
  spec.kind = translate(n.path() + ".kind", [&] { return parse_scenario_kind(n.at("kind").str()); });
  if (n.has("max_releases")) {
    spec.cpdp_max_releases = static_cast<int>(n.at("max_releases").integer(1, 8));
  }
  if (n.has("objective")) {
    const auto o = n.at("objective");
    spec.cpdp_objective = translate(o.path(), [&] { return parse_measure(o.str()); });
  }
  return spec;
}

ClassifierParams parse_params(ClassifierKind kind, const Node& p) {
  switch (kind) {
    case ClassifierKind::NaiveBayes: {
      p.object_with({"variance_floor"});
      NaiveBayesParams v;
      if (p.has("variance_floor")) v.variance_floor = p.at("variance_floor").number();
      return v;
    }
    case ClassifierKind::Logistic: {
      p.object_with({"solver", "ridge", "gradient_tolerance", "max_iterations"});
      LogisticParams v;
      if (p.has("solver")) {
        const auto solver = p.at("solver").str();
        if (solver == "newton") {
          v.solver = LogisticSolver::Newton;
        } else if (solver == "gradient_descent") {
          v.solver = LogisticSolver::GradientDescent;
        } else {
          fail(p.path() + ".solver", "expected \"newton\" or \"gradient_descent\"");
        }
      }
      if (p.has("ridge")) v.ridge = p.at("ridge").number();
      if (p.has("gradient_tolerance")) v.gradient_tolerance = p.at("gradient_tolerance").number();
      if (p.has("max_iterations")) {
        v.max_iterations = static_cast<int>(p.at("max_iterations").integer(1, 1000000));
      }
      return v;
    }
    case ClassifierKind::Tree: {
      p.object_with({"min_leaf", "max_depth"});
      TreeParams v;
      if (p.has("min_leaf")) v.min_leaf = static_cast<int>(p.at("min_leaf").integer(1, 1000000));
      if (p.has("max_depth")) v.max_depth = static_cast<int>(p.at("max_depth").integer(1, 1000));
      return v;
    }
    case ClassifierKind::DecisionTable: {
      p.object_with({"bins"});
      DecisionTableParams v;
      if (p.has("bins")) v.bins = static_cast<int>(p.at("bins").integer(2, 100));
      return v;
    }
    case ClassifierKind::LinearSvm: {
      p.object_with({"lambda", "epochs"});
      LinearSvmParams v;
      if (p.has("lambda")) v.lambda = p.at("lambda").number();
      if (p.has("epochs")) v.epochs = static_cast<int>(p.at("epochs").integer(1, 1000000));
      return v;
    }
  }
  return NaiveBayesParams{};
}

ClassifierParams default_params_for(ClassifierKind kind) {
  return ClassifierSpec(kind).params();
}

MetricSetDef parse_metric_set(const Node& n) {
  MetricSetDef def;
  if (n.raw().is_string()) {
    // Shorthand: "ALL", "FILTER", "TOP5", "MIN", or a metric list "CBO+LOC".
    const std::string s = n.str();
    def.name = s;
    if (s == "ALL") {
      def.type = MetricSetType::All;
    } else if (s == "FILTER") {
      def.type = MetricSetType::Filter;
    } else if (s == "MIN") {
      def.type = MetricSetType::Min;
    } else if (s == "TOPK") {
      def.type = MetricSetType::TopK;
    } else if (s.rfind("TOP", 0) == 0 && s.size() > 3 &&
               s.find_first_not_of("0123456789", 3) == std::string::npos) {
      def.type = MetricSetType::TopK;
      def.k = std::stoul(s.substr(3));
      if (*def.k < 1 || *def.k > kMetricCount) fail(n.path(), "k must be in [1, 20]");
    } else {
      def.type = MetricSetType::Explicit;
      def.metrics = translate(n.path(), [&] { return FeatureSubset::parse(s); });
      if (def.metrics.empty()) fail(n.path(), "empty metric list");
    }
    return def;
  }

  n.object_with({"name", "type", "k", "phi", "metrics"});
  if (!n.has("name")) fail(n.path() + ".name", "missing");
  if (!n.has("type")) fail(n.path() + ".type", "missing");
  def.name = n.at("name").str();
  if (def.name.empty()) fail(n.path() + ".name", "must not be empty");
  def.type = parse_set_type(n.path() + ".type", n.at("type").str());

  const bool wants_k = def.type == MetricSetType::TopK || def.type == MetricSetType::Min ||
                       def.type == MetricSetType::MaxRel || def.type == MetricSetType::Mrmr;
  if (n.has("k")) {
    const auto kn = n.at("k");
    if (!wants_k) fail(kn.path(), "not allowed for type " + std::string(to_string(def.type)));
    if (kn.raw().is_string()) {
      if (kn.str() != "auto") fail(kn.path(), "expected an integer or \"auto\"");
      if (def.type == MetricSetType::MaxRel || def.type == MetricSetType::Mrmr) {
        fail(kn.path(), "\"auto\" is only valid for topk and min");
      }
    } else {
      def.k = static_cast<std::size_t>(kn.integer(1, static_cast<std::int64_t>(kMetricCount)));
    }
  }
  if ((def.type == MetricSetType::MaxRel || def.type == MetricSetType::Mrmr) && !def.k) {
    fail(n.path() + ".k", "required for type " + std::string(to_string(def.type)));
  }
  if (n.has("phi")) {
    if (def.type != MetricSetType::Min) fail(n.path() + ".phi", "only valid for type min");
    def.phi = n.at("phi").probability_open();
  }
  if (n.has("metrics")) {
    if (def.type != MetricSetType::Explicit) fail(n.path() + ".metrics", "only valid for type explicit");
    const auto list = n.at("metrics");
    const auto& arr = list.array();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto item = list.at(i);
      const auto name = item.str();
      const auto parsed = parse_metric(name);
      if (!parsed) fail(item.path(), "unknown metric '" + name + "'");
      const MetricId id = *parsed;
      if (def.metrics.contains(id)) fail(item.path(), "duplicate metric '" + name + "'");
      def.metrics.insert(id);
    }
  }
  if (def.type == MetricSetType::Explicit && def.metrics.empty()) {
    fail(n.path() + ".metrics", "explicit sets need at least one metric");
  }
  return def;
}

std::size_t line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  std::size_t line = 1;
  for (std::size_t i = 0; i < offset; ++i) line += text[i] == '\n';
  return line;
}

std::vector<MetricSetDef> default_metric_sets() {
  std::vector<MetricSetDef> sets(4);
  sets[0].name = "ALL";
  sets[0].type = MetricSetType::All;
  sets[1].name = "FILTER";
  sets[1].type = MetricSetType::Filter;
  sets[2].name = "TOPK";
  sets[2].type = MetricSetType::TopK;
  sets[3].name = "MIN";
  sets[3].type = MetricSetType::Min;
  return sets;
}

json params_json(const ClassifierParams& params) {
  return std::visit(
      [](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, NaiveBayesParams>) {
          return {{"variance_floor", p.variance_floor}};
        } else if constexpr (std::is_same_v<T, LogisticParams>) {
          return {{"solver", p.solver == LogisticSolver::Newton ? "newton" : "gradient_descent"},
                  {"ridge", p.ridge},
                  {"gradient_tolerance", p.gradient_tolerance},
                  {"max_iterations", p.max_iterations}};
        } else if constexpr (std::is_same_v<T, TreeParams>) {
          return {{"min_leaf", p.min_leaf}, {"max_depth", p.max_depth}};
        } else if constexpr (std::is_same_v<T, DecisionTableParams>) {
          return {{"bins", p.bins}};
        } else {
          return {{"lambda", p.lambda}, {"epochs", p.epochs}};
        }
      },
      params);
}

}  // namespace

void RunConfig::override_seed(std::uint64_t new_seed) {
  seed = new_seed;
  for (std::size_t i = 0; i < classifiers.size(); ++i) {
    if (i < classifier_seed_pinned.size() && classifier_seed_pinned[i]) continue;
    classifiers[i] = ClassifierSpec(classifiers[i].params(), new_seed);
  }
}

std::string RunConfig::canonical_json() const {
  json j;
  j["manifest"] = manifest.generic_string();
  j["scenarios"] = json::array();
  for (const auto& s : scenarios) {
    j["scenarios"].push_back({{"kind", to_string(s.kind)},
                              {"max_releases", s.cpdp_max_releases},
                              {"objective", to_string(s.cpdp_objective)}});
  }
  j["classifiers"] = json::array();
  for (const auto& c : classifiers) {
    j["classifiers"].push_back({{"kind", c.name()}, {"params", params_json(c.params())}, {"seed", c.seed()}});
  }
  j["metric_sets"] = json::array();
  for (const auto& m : metric_sets) {
    json e{{"name", m.name}, {"type", to_string(m.type)}};
    e["k"] = m.k ? json(*m.k) : json("auto");
    if (m.phi) e["phi"] = *m.phi;
    if (m.type == MetricSetType::Explicit) {
      json list = json::array();
      for (auto id : m.metrics.members()) list.push_back(std::string(metric_name(id)));
      e["metrics"] = list;
    }
    j["metric_sets"].push_back(e);
  }
  j["comparisons"] = json::array();
  for (const auto& c : comparisons) {
    j["comparisons"].push_back({{"baseline", c.baseline}, {"candidate", c.candidate}});
  }
  j["thresholds"] = {{"precision", thresholds.precision},
                     {"recall", thresholds.recall},
                     {"f_measure", thresholds.f_measure}};
  j["k"] = k ? json(*k) : json("auto");
  j["k_max"] = k_max;
  j["phi"] = phi;
  j["strong_pair_abs"] = strong_pairs_absolute;
  j["correlation_scenario"] = to_string(correlation_scenario);
  j["coverage_over"] = coverage_over_targets_only ? "targets" : "all";
  j["seed"] = seed;
  j["cfs_bins"] = cfs_bins;
  j["lenient"] = lenient;
  const char* method = compare.method == WilcoxonMethod::Exact    ? "exact"
                       : compare.method == WilcoxonMethod::Normal ? "normal"
                                                                  : "auto";
  j["wilcoxon"] = method;
  j["significance"] = compare.significance;
  j["ratio_threshold"] = compare.ratio_threshold;
  return j.dump(2);
}

RunConfig parse_run_config(const std::string& json_text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ConfigError,
                "line " + std::to_string(line_of_offset(json_text, e.byte == 0 ? 0 : e.byte - 1)) +
                    ": invalid JSON (" + e.what() + ")");
  }

  const Node root(doc, "config");
  root.object_with({"manifest", "out", "scenarios", "classifiers", "metric_sets", "comparisons",
                    "thresholds", "seed", "workers", "cfs_bins", "k_max", "k", "phi",
                    "strong_pair_abs", "correlation_scenario", "coverage_over", "lenient",
                    "wilcoxon", "significance", "ratio_threshold"});

  RunConfig cfg;
  if (!root.has("manifest")) fail("manifest", "missing");
  cfg.manifest = root.at("manifest").str();
  if (cfg.manifest.is_relative()) cfg.manifest = base_dir / cfg.manifest;
  cfg.manifest = cfg.manifest.lexically_normal();

  if (root.has("out")) {
    cfg.out = root.at("out").str();
    if (cfg.out.is_relative()) cfg.out = base_dir / cfg.out;
  } else {
    cfg.out = base_dir / "results";
  }
  cfg.out = cfg.out.lexically_normal();

  if (root.has("seed")) cfg.seed = root.at("seed").unsigned_integer();
  if (root.has("workers")) cfg.workers = static_cast<int>(root.at("workers").integer(1, 1024));
  if (root.has("cfs_bins")) cfg.cfs_bins = static_cast<int>(root.at("cfs_bins").integer(2, 1000));
  if (root.has("k_max")) {
    cfg.k_max = static_cast<std::size_t>(root.at("k_max").integer(1, static_cast<std::int64_t>(kMetricCount)));
  }
  if (root.has("k")) {
    const auto kn = root.at("k");
    if (kn.raw().is_string()) {
      if (kn.str() != "auto") fail("k", "expected an integer or \"auto\"");
    } else {
      cfg.k = static_cast<std::size_t>(kn.integer(1, static_cast<std::int64_t>(kMetricCount)));
    }
  }
  if (root.has("phi")) cfg.phi = root.at("phi").probability_open();
  if (root.has("strong_pair_abs")) cfg.strong_pairs_absolute = root.at("strong_pair_abs").boolean();
  if (root.has("correlation_scenario")) {
    const auto n = root.at("correlation_scenario");
    cfg.correlation_scenario = translate("correlation_scenario", [&] { return parse_scenario_kind(n.str()); });
  }
  if (root.has("coverage_over")) {
    const auto v = root.at("coverage_over").str();
    if (v == "all") {
      cfg.coverage_over_targets_only = false;
    } else if (v == "targets") {
      cfg.coverage_over_targets_only = true;
    } else {
      fail("coverage_over", "expected \"all\" or \"targets\"");
    }
  }
  if (root.has("lenient")) cfg.lenient = root.at("lenient").boolean();
  if (root.has("wilcoxon")) {
    const auto v = root.at("wilcoxon").str();
    if (v == "auto") {
      cfg.compare.method = WilcoxonMethod::Auto;
    } else if (v == "exact") {
      cfg.compare.method = WilcoxonMethod::Exact;
    } else if (v == "normal") {
      cfg.compare.method = WilcoxonMethod::Normal;
    } else {
      fail("wilcoxon", "expected \"auto\", \"exact\" or \"normal\"");
    }
  }
  if (root.has("significance")) cfg.compare.significance = root.at("significance").probability_open();
  if (root.has("ratio_threshold")) {
    const double r = root.at("ratio_threshold").number();
    if (!(r > 0.0)) fail("ratio_threshold", "must be positive");
    cfg.compare.ratio_threshold = r;
  }
  if (root.has("thresholds")) {
    const auto t = root.at("thresholds");
    t.object_with({"precision", "recall", "f_measure"});
    if (t.has("precision")) cfg.thresholds.precision = t.at("precision").probability_closed();
    if (t.has("recall")) cfg.thresholds.recall = t.at("recall").probability_closed();
    if (t.has("f_measure")) cfg.thresholds.f_measure = t.at("f_measure").probability_closed();
  }

  if (root.has("scenarios")) {
    const auto list = root.at("scenarios");
    const auto& arr = list.array();
    if (arr.empty()) fail("scenarios", "must not be empty");
    for (std::size_t i = 0; i < arr.size(); ++i) cfg.scenarios.push_back(parse_scenario(list.at(i)));
  } else {
    cfg.scenarios = {ScenarioSpec{ScenarioKind::WpdpNearest}, ScenarioSpec{ScenarioKind::WpdpAllHistory},
                     ScenarioSpec{ScenarioKind::CpdpExhaustive}};
  }
  {
    std::set<ScenarioKind> seen;
    for (std::size_t i = 0; i < cfg.scenarios.size(); ++i) {
      if (!seen.insert(cfg.scenarios[i].kind).second) {
        fail("scenarios[" + std::to_string(i) + "]", "duplicate scenario");
      }
    }
  }

  if (root.has("classifiers")) {
    const auto list = root.at("classifiers");
    const auto& arr = list.array();
    if (arr.empty()) fail("classifiers", "must not be empty");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto n = list.at(i);
      if (n.raw().is_string()) {
        const auto kind = translate(n.path(), [&] { return parse_classifier_kind(n.str()); });
        cfg.classifiers.emplace_back(kind, cfg.seed);
        cfg.classifier_seed_pinned.push_back(false);
        continue;
      }
      n.object_with({"kind", "params", "seed"});
      if (!n.has("kind")) fail(n.path() + ".kind", "missing");
      const auto kind = translate(n.path() + ".kind", [&] { return parse_classifier_kind(n.at("kind").str()); });
      ClassifierParams params =
          n.has("params") ? parse_params(kind, n.at("params")) : default_params_for(kind);
      const bool pinned = n.has("seed");
      const std::uint64_t seed = pinned ? n.at("seed").unsigned_integer() : cfg.seed;
      cfg.classifiers.push_back(translate(n.path() + ".params", [&] { return ClassifierSpec(params, seed); }));
      cfg.classifier_seed_pinned.push_back(pinned);
    }
  } else {
    for (auto kind : {ClassifierKind::NaiveBayes, ClassifierKind::Logistic, ClassifierKind::Tree,
                      ClassifierKind::DecisionTable, ClassifierKind::LinearSvm}) {
      cfg.classifiers.emplace_back(kind, cfg.seed);
      cfg.classifier_seed_pinned.push_back(false);
    }
  }
  {
    std::set<std::string> seen;
    for (std::size_t i = 0; i < cfg.classifiers.size(); ++i) {
      if (!seen.insert(cfg.classifiers[i].name()).second) {
        fail("classifiers[" + std::to_string(i) + "]", "duplicate classifier");
      }
    }
  }

  if (root.has("metric_sets")) {
    const auto list = root.at("metric_sets");
    const auto& arr = list.array();
    if (arr.empty()) fail("metric_sets", "must not be empty");
    std::set<std::string> names;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      auto def = parse_metric_set(list.at(i));
      if (!names.insert(def.name).second) {
        fail(list.at(i).path(), "duplicate metric-set name '" + def.name + "'");
      }
      cfg.metric_sets.push_back(std::move(def));
    }
  } else {
    cfg.metric_sets = default_metric_sets();
  }

  if (root.has("comparisons")) {
    const auto list = root.at("comparisons");
    const auto& arr = list.array();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto n = list.at(i);
      n.object_with({"baseline", "candidate"});
      ComparisonDef c;
      if (!n.has("baseline")) fail(n.path() + ".baseline", "missing");
      if (!n.has("candidate")) fail(n.path() + ".candidate", "missing");
      c.baseline = n.at("baseline").str();
      c.candidate = n.at("candidate").str();
      for (const auto* side : {&c.baseline, &c.candidate}) {
        bool found = false;
        for (const auto& m : cfg.metric_sets) found = found || m.name == *side;
        if (!found) {
          fail(n.path() + (side == &c.baseline ? ".baseline" : ".candidate"),
               "no metric set named '" + *side + "'");
        }
      }
      cfg.comparisons.push_back(std::move(c));
    }
  } else {
    // Every set against the first one (ALL by default).
    for (std::size_t i = 1; i < cfg.metric_sets.size(); ++i) {
      cfg.comparisons.push_back({cfg.metric_sets.front().name, cfg.metric_sets[i].name});
    }
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ConfigError, path.string() + ": cannot open");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

RunConfig run_config_for_manifest(const std::filesystem::path& manifest) {
  const json j{{"manifest", manifest.string()}};
  return parse_run_config(j.dump(), ".");
}

}  // namespace metricslim
