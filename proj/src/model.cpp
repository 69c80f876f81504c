#include "polishsense/model.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <cmath>
#include <nlohmann/json.hpp>

#include "polishsense/error.hpp"
#include "polishsense/io.hpp"

namespace polishsense {

using nlohmann::json;

std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::Linear: return "linear";
    case ModelKind::Ridge: return "ridge";
    case ModelKind::GP: return "gp";
    case ModelKind::Tree: return "tree";
    case ModelKind::Forest: return "forest";
    case ModelKind::SVR: return "svr";
    case ModelKind::GBR: return "gbr";
  }
  return "?";
}

std::string_view display_name(ModelKind k) {
  switch (k) {
    case ModelKind::Linear: return "Linear Regression";
    case ModelKind::Ridge: return "Ridge Regression";
    case ModelKind::GP: return "Gaussian Process";
    case ModelKind::Tree: return "Decision Tree";
    case ModelKind::Forest: return "Random Forest";
    case ModelKind::SVR: return "Support Vector";
    case ModelKind::GBR: return "Gradient Boosting";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view s) {
  for (const auto k : kReportOrder) {
    if (to_string(k) == s) return k;
  }
  throw ConfigError(fmt::format("unknown model '{}' (valid: linear, ridge, gp, tree, forest, svr, gbr)", s));
}

bool has_feature_importance(ModelKind k) {
  return k == ModelKind::Tree || k == ModelKind::Forest || k == ModelKind::GBR;
}

namespace {

const std::map<std::string, double>& default_hyperparameters(ModelKind k) {
  static const std::map<std::string, double> kLinear{};
  static const std::map<std::string, double> kRidge{{"lambda", 1.0}};
  static const std::map<std::string, double> kGp{{"length_scale", 1.0}, {"jitter", 1e-10}};
  static const std::map<std::string, double> kTree{{"min_samples_leaf", 1}, {"max_depth", -1}};
  static const std::map<std::string, double> kForest{{"trees", 100},
                                                     {"feature_fraction", 1.0},
                                                     {"bootstrap", 1},
                                                     {"min_samples_leaf", 1},
                                                     {"max_depth", -1}};
  static const std::map<std::string, double> kSvr{
      {"C", 1.0}, {"epsilon", 0.1}, {"gap_tolerance", 1e-6}, {"max_iterations", 500}};
  static const std::map<std::string, double> kGbr{
      {"stages", 100}, {"learning_rate", 0.1}, {"max_depth", 3}, {"min_samples_leaf", 1}};
  switch (k) {
    case ModelKind::Linear: return kLinear;
    case ModelKind::Ridge: return kRidge;
    case ModelKind::GP: return kGp;
    case ModelKind::Tree: return kTree;
    case ModelKind::Forest: return kForest;
    case ModelKind::SVR: return kSvr;
    case ModelKind::GBR: return kGbr;
  }
  return kLinear;
}

bool is_integer(double v) { return std::isfinite(v) && v == std::floor(v); }

void require(bool ok, ModelKind k, const std::string& name, double v, std::string_view rule) {
  if (!ok) {
    throw ConfigError(fmt::format("{}: hyperparameter {} = {} must be {}", to_string(k), name, v, rule));
  }
}

std::optional<std::size_t> depth_limit(double v) {
  if (v < 0) return std::nullopt;
  return static_cast<std::size_t>(v);
}

}  // namespace

ModelSpec ModelSpec::defaults(ModelKind kind, std::uint64_t seed) {
  return ModelSpec{kind, default_hyperparameters(kind), seed};
}

double ModelSpec::get(const std::string& name) const {
  if (const auto it = hyperparameters.find(name); it != hyperparameters.end()) return it->second;
  const auto& d = default_hyperparameters(kind);
  if (const auto it = d.find(name); it != d.end()) return it->second;
  throw ConfigError(fmt::format("{}: no hyperparameter named '{}'", to_string(kind), name));
}

void ModelSpec::validate() const {
  const auto& d = default_hyperparameters(kind);
  for (const auto& [name, value] : hyperparameters) {
    if (!d.contains(name)) {
      std::vector<std::string> valid;
      for (const auto& [n, _] : d) valid.push_back(n);
      throw ConfigError(fmt::format("{}: unknown hyperparameter '{}' (valid: {})", to_string(kind),
                                    name, fmt::join(valid, ", ")));
    }
  }
  for (const auto& [name, _] : d) {
    const double v = get(name);
    if (name == "lambda") require(v >= 0.0 && std::isfinite(v), kind, name, v, ">= 0");
    if (name == "length_scale" || name == "jitter" || name == "C" || name == "gap_tolerance") {
      require(v > 0.0 && std::isfinite(v), kind, name, v, "> 0");
    }
    if (name == "epsilon") require(v >= 0.0 && std::isfinite(v), kind, name, v, ">= 0");
    if (name == "min_samples_leaf" || name == "trees" || name == "max_iterations") {
      require(is_integer(v) && v >= 1.0, kind, name, v, "an integer >= 1");
    }
    if (name == "stages") require(is_integer(v) && v >= 0.0, kind, name, v, "an integer >= 0");
    if (name == "max_depth") require(is_integer(v) && v >= -1.0, kind, name, v, "an integer >= -1");
    if (name == "feature_fraction" || name == "learning_rate") {
      require(v > 0.0 && v <= 1.0, kind, name, v, "in (0, 1]");
    }
    if (name == "bootstrap") require(v == 0.0 || v == 1.0, kind, name, v, "0 or 1");
  }
}

double ModelSpec::ridge_lambda() const { return get("lambda"); }

GpParams ModelSpec::gp_params() const { return {get("length_scale"), get("jitter")}; }

TreeParams ModelSpec::tree_params() const {
  return {static_cast<std::size_t>(get("min_samples_leaf")), depth_limit(get("max_depth"))};
}

ForestParams ModelSpec::forest_params() const {
  ForestParams p;
  p.trees = static_cast<std::size_t>(get("trees"));
  p.feature_fraction = get("feature_fraction");
  p.bootstrap = get("bootstrap") != 0.0;
  p.tree = tree_params();
  return p;
}

SvrParams ModelSpec::svr_params() const {
  SvrParams p;
  p.c = get("C");
  p.epsilon = get("epsilon");
  p.gap_tolerance = get("gap_tolerance");
  p.max_iterations = static_cast<std::size_t>(get("max_iterations"));
  return p;
}

GbrParams ModelSpec::gbr_params() const {
  GbrParams p;
  p.stages = static_cast<std::size_t>(get("stages"));
  p.learning_rate = get("learning_rate");
  p.base_tree = tree_params();
  return p;
}

TrainedModel fit(const ModelSpec& spec, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                 std::vector<std::string> feature_names) {
  spec.validate();
  if (static_cast<Eigen::Index>(feature_names.size()) != x.cols()) {
    throw ConfigError(fmt::format("{} feature names for {} columns", feature_names.size(), x.cols()));
  }
  TrainedModel m{spec, std::move(feature_names), LinearModel{}, std::nullopt};
  switch (spec.kind) {
    case ModelKind::Linear: m.parameters = fit_linear(x, y); break;
    case ModelKind::Ridge: m.parameters = fit_ridge(x, y, spec.ridge_lambda()); break;
    case ModelKind::GP: m.parameters = fit_gp(x, y, spec.gp_params()); break;
    case ModelKind::Tree: m.parameters = fit_tree(x, y, spec.tree_params()); break;
    case ModelKind::Forest: m.parameters = fit_forest(x, y, spec.forest_params(), spec.seed); break;
    case ModelKind::SVR: m.parameters = fit_svr(x, y, spec.svr_params()); break;
    case ModelKind::GBR: m.parameters = fit_gbr(x, y, spec.gbr_params()); break;
  }
  return m;
}

double predict(const TrainedModel& model, const Eigen::VectorXd& x) {
  if (static_cast<std::size_t>(x.size()) != model.feature_names.size()) {
    throw ConfigError(fmt::format("dimension mismatch: model expects {} features, input has {}",
                                  model.feature_names.size(), x.size()));
  }
  const Eigen::VectorXd input = model.input_scaling ? model.input_scaling->apply(x) : x;
  return std::visit([&](const auto& p) { return p.predict(input); }, model.parameters);
}

Eigen::VectorXd predict(const TrainedModel& model, const Eigen::MatrixXd& x) {
  Eigen::VectorXd out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) out(i) = predict(model, Eigen::VectorXd(x.row(i).transpose()));
  return out;
}

Eigen::VectorXd feature_importance(const TrainedModel& model) {
  const auto p = model.feature_names.size();
  if (const auto* t = std::get_if<RegressionTree>(&model.parameters)) {
    return normalize_importance(t->raw_importance());
  }
  if (const auto* f = std::get_if<Forest>(&model.parameters)) return f->importance();
  if (const auto* g = std::get_if<GbrModel>(&model.parameters)) {
    return normalize_importance(g->raw_importance(p));
  }
  throw ConfigError(fmt::format("feature importance is not defined for {} models",
                                to_string(model.spec.kind)));
}

// Persistence.

namespace {

json vec_to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vec_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json tree_to_json(const RegressionTree& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes) {
    nodes.push_back(json::array({n.feature, n.threshold, n.left, n.right, n.value, n.samples,
                                 n.impurity_decrease}));
  }
  return {{"feature_count", t.feature_count}, {"nodes", std::move(nodes)}};
}

RegressionTree tree_from_json(const json& j) {
  RegressionTree t;
  t.feature_count = j.at("feature_count").get<std::size_t>();
  for (const auto& n : j.at("nodes")) {
    RegressionTree::Node node;
    node.feature = n.at(0).get<int>();
    node.threshold = n.at(1).get<double>();
    node.left = n.at(2).get<int>();
    node.right = n.at(3).get<int>();
    node.value = n.at(4).get<double>();
    node.samples = n.at(5).get<std::size_t>();
    node.impurity_decrease = n.at(6).get<double>();
    t.nodes.push_back(node);
  }
  if (t.nodes.empty()) throw Error("tree has no nodes");
  for (const auto& n : t.nodes) {
    const auto size = static_cast<int>(t.nodes.size());
    if (n.feature >= 0 && (n.left <= 0 || n.left >= size || n.right <= 0 || n.right >= size ||
                           n.feature >= static_cast<int>(t.feature_count))) {
      throw Error("tree node references are out of range");
    }
  }
  return t;
}

struct ParamsToJson {
  json operator()(const LinearModel& m) const {
    return {{"coef", vec_to_json(m.coef)}, {"intercept", m.intercept}};
  }
  json operator()(const GpModel& m) const {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.train_x.rows(); ++i) rows.push_back(vec_to_json(m.train_x.row(i).transpose()));
    return {{"length_scale", m.params.length_scale},
            {"jitter", m.params.jitter},
            {"train_x", std::move(rows)},
            {"weights", vec_to_json(m.weights)}};
  }
  json operator()(const RegressionTree& t) const { return tree_to_json(t); }
  json operator()(const Forest& f) const {
    json trees = json::array();
    for (const auto& t : f.trees) trees.push_back(tree_to_json(t));
    return {{"trees", std::move(trees)}};
  }
  json operator()(const SvrModel& m) const {
    return {{"w", vec_to_json(m.w)},
            {"b", m.b},
            {"dual_coef", vec_to_json(m.dual_coef)},
            {"primal_objective", m.primal_objective},
            {"dual_objective", m.dual_objective},
            {"iterations", m.iterations}};
  }
  json operator()(const GbrModel& m) const {
    json stages = json::array();
    for (const auto& t : m.stages) stages.push_back(tree_to_json(t));
    return {{"initial", m.initial}, {"learning_rate", m.learning_rate}, {"stages", std::move(stages)}};
  }
};

ModelParameters params_from_json(ModelKind kind, const json& j) {
  switch (kind) {
    case ModelKind::Linear:
    case ModelKind::Ridge:
      return LinearModel{vec_from_json(j.at("coef")), j.at("intercept").get<double>()};
    case ModelKind::GP: {
      GpModel m;
      m.params = {j.at("length_scale").get<double>(), j.at("jitter").get<double>()};
      const auto& rows = j.at("train_x");
      m.weights = vec_from_json(j.at("weights"));
      const auto n = static_cast<Eigen::Index>(rows.size());
      const auto p = n ? static_cast<Eigen::Index>(rows.at(0).size()) : 0;
      m.train_x.resize(n, p);
      for (Eigen::Index i = 0; i < n; ++i) m.train_x.row(i) = vec_from_json(rows.at(i)).transpose();
      return m;
    }
    case ModelKind::Tree: return tree_from_json(j);
    case ModelKind::Forest: {
      Forest f;
      for (const auto& t : j.at("trees")) f.trees.push_back(tree_from_json(t));
      return f;
    }
    case ModelKind::SVR: {
      SvrModel m;
      m.w = vec_from_json(j.at("w"));
      m.b = j.at("b").get<double>();
      m.dual_coef = vec_from_json(j.at("dual_coef"));
      m.primal_objective = j.at("primal_objective").get<double>();
      m.dual_objective = j.at("dual_objective").get<double>();
      m.iterations = j.at("iterations").get<std::size_t>();
      return m;
    }
    case ModelKind::GBR: {
      GbrModel m;
      m.initial = j.at("initial").get<double>();
      m.learning_rate = j.at("learning_rate").get<double>();
      for (const auto& t : j.at("stages")) m.stages.push_back(tree_from_json(t));
      return m;
    }
  }
  throw Error("unknown model kind");
}

constexpr const char* kFormat = "polishsense-model";

}  // namespace

std::string to_json(const TrainedModel& model) {
  json doc;
  doc["format"] = kFormat;
  doc["version"] = 1;
  doc["spec"] = {{"kind", std::string(to_string(model.spec.kind))},
                 {"hyperparameters", model.spec.hyperparameters},
                 {"seed", model.spec.seed}};
  doc["feature_names"] = model.feature_names;
  doc["parameters"] = std::visit(ParamsToJson{}, model.parameters);
  if (model.input_scaling) {
    doc["input_scaling"] = {{"mean", vec_to_json(model.input_scaling->mean)},
                            {"scale", vec_to_json(model.input_scaling->scale)}};
  } else {
    doc["input_scaling"] = nullptr;
  }
  return doc.dump(1) + "\n";
}

TrainedModel model_from_json(std::string_view text) {
  try {
    const json doc = json::parse(text);
    if (doc.value("format", "") != kFormat) throw Error("not a polishsense model document");
    TrainedModel m;
    const auto& spec = doc.at("spec");
    m.spec.kind = parse_model_kind(spec.at("kind").get<std::string>());
    m.spec.hyperparameters = spec.at("hyperparameters").get<std::map<std::string, double>>();
    m.spec.seed = spec.at("seed").get<std::uint64_t>();
    m.spec.validate();
    m.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
    m.parameters = params_from_json(m.spec.kind, doc.at("parameters"));
    if (const auto& s = doc.at("input_scaling"); !s.is_null()) {
      m.input_scaling = Standardizer{vec_from_json(s.at("mean")), vec_from_json(s.at("scale"))};
    }
    return m;
  } catch (const json::exception& e) {
    throw Error(fmt::format("malformed model document: {}", e.what()));
  }
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  io::write_atomic(path, to_json(model));
}

TrainedModel load_model(const std::filesystem::path& path) {
  try {
    return model_from_json(io::read_text(path));
  } catch (const Error& e) {
    throw Error(fmt::format("{}: {}", path.string(), e.what()));
  }
}

}  // namespace polishsense
