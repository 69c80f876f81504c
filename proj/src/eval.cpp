#include "polishsense/eval.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <set>

#include "polishsense/error.hpp"
#include "polishsense/io.hpp"

namespace polishsense {

double mae(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw ConfigError(fmt::format("mae: length mismatch ({} vs {})", y_true.size(), y_pred.size()));
  }
  if (y_true.size() == 0) throw ConfigError("mae: empty input");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < y_true.size(); ++i) sum += std::abs(y_true(i) - y_pred(i));
  return sum / static_cast<double>(y_true.size());
}

EvalReport loocv(const FeatureTable& table, const ModelSpec& spec, const LoocvOptions& options) {
  spec.validate();
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  if (n < 2) throw ConfigError("loocv needs at least two runs");
  const Eigen::MatrixXd x = table.design();
  const Eigen::VectorXd y = table.targets();
  const auto p = x.cols();

  struct FoldResult {
    double prediction = 0.0;
    Eigen::VectorXd importance;
  };
  std::vector<FoldResult> results(static_cast<std::size_t>(n));

  parallel_for(static_cast<std::size_t>(n), [&](std::size_t fold) {
    const auto held = static_cast<Eigen::Index>(fold);
    Eigen::MatrixXd train_x(n - 1, p);
    Eigen::VectorXd train_y(n - 1);
    for (Eigen::Index i = 0, r = 0; i < n; ++i) {
      if (i == held) continue;
      train_x.row(r) = x.row(i);
      train_y(r) = y(i);
      ++r;
    }
    std::optional<Standardizer> scaling;
    if (options.standardize) {
      scaling = Standardizer::fit(train_x);
      train_x = scaling->apply(train_x);
    }
    TrainedModel model = fit(spec, train_x, train_y, table.names);
    model.input_scaling = scaling;
    auto& out = results[fold];
    out.prediction = predict(model, Eigen::VectorXd(x.row(held).transpose()));
    if (has_feature_importance(spec.kind)) out.importance = feature_importance(model);
  }, options.workers);

  EvalReport report;
  report.model_kind = spec.kind;
  report.feature_mode = table.mode();
  report.standardized = options.standardize;
  report.feature_names = table.names;
  Eigen::VectorXd preds(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    preds(i) = results[static_cast<std::size_t>(i)].prediction;
    report.fold_predictions.push_back({row.run_id, row.target, preds(i)});
    report.per_fold_abs_error.push_back(std::abs(row.target - preds(i)));
  }
  report.mae = mae(y, preds);
  if (has_feature_importance(spec.kind)) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(p);
    for (const auto& r : results) acc += r.importance;
    report.importance_summary = acc / static_cast<double>(n);
  }
  return report;
}

EvalReport loocv(const std::vector<FeatureVector>& features, const ModelSpec& spec,
                 const LoocvOptions& options) {
  return loocv(make_table(features), spec, options);
}

std::string to_json(const EvalReport& r) {
  nlohmann::json j;
  j["model_kind"] = std::string(to_string(r.model_kind));
  j["feature_mode"] = std::string(to_string(r.feature_mode));
  j["standardized"] = r.standardized;
  j["mae"] = r.mae;
  j["feature_names"] = r.feature_names;
  auto& folds = j["fold_predictions"] = nlohmann::json::array();
  for (std::size_t i = 0; i < r.fold_predictions.size(); ++i) {
    const auto& f = r.fold_predictions[i];
    folds.push_back({{"run_id", f.run_id},
                     {"y_true", f.y_true},
                     {"y_pred", f.y_pred},
                     {"abs_error", r.per_fold_abs_error[i]}});
  }
  if (r.importance_summary) {
    const auto& imp = *r.importance_summary;
    j["importance_summary"] = std::vector<double>(imp.data(), imp.data() + imp.size());
  } else {
    j["importance_summary"] = nullptr;
  }
  return j.dump(2) + "\n";
}

const ResultsTable::Cell* ResultsTable::find(ModelKind kind, FeatureMode mode) const {
  for (const auto& c : cells) {
    if (c.kind == kind && c.mode == mode) return &c;
  }
  return nullptr;
}

std::string ResultsTable::to_csv() const {
  std::string out = "method,together,separate,best\n";
  for (const auto kind : kReportOrder) {
    const Cell* t = find(kind, FeatureMode::Together);
    const Cell* s = find(kind, FeatureMode::Separate);
    if (!t && !s) continue;
    std::vector<std::string> flagged;
    if (t && t->best) flagged.emplace_back("together");
    if (s && s->best) flagged.emplace_back("separate");
    out += fmt::format("{},{},{},{}\n", to_string(kind), t ? io::format_double(t->mae) : "",
                       s ? io::format_double(s->mae) : "", fmt::join(flagged, ";"));
  }
  return out;
}

std::string ResultsTable::to_text() const {
  auto cell = [](const Cell* c) {
    return c ? fmt::format("{:.4f}{}", c->mae, c->best ? "*" : " ") : std::string("-");
  };
  std::string out = fmt::format("{:<20}{:>20}{:>20}\n", "Method", "Features Together",
                                "Separate Features");
  for (const auto kind : kReportOrder) {
    const Cell* t = find(kind, FeatureMode::Together);
    const Cell* s = find(kind, FeatureMode::Separate);
    if (!t && !s) continue;
    out += fmt::format("{:<20}{:>20}{:>20}\n", display_name(kind), cell(t), cell(s));
  }
  out += "(* lowest MAE)\n";
  return out;
}

ResultsTable results_table(const std::vector<EvalReport>& reports) {
  if (reports.empty()) throw ConfigError("results table needs at least one report");
  ResultsTable table;
  std::set<std::pair<ModelKind, FeatureMode>> seen;
  for (const auto& r : reports) {
    if (!seen.insert({r.model_kind, r.feature_mode}).second) {
      throw ConfigError(fmt::format("duplicate report for ({}, {})", to_string(r.model_kind),
                                    to_string(r.feature_mode)));
    }
    table.cells.push_back({r.model_kind, r.feature_mode, r.mae, false});
  }
  const double best = std::min_element(table.cells.begin(), table.cells.end(),
                                       [](const auto& a, const auto& b) { return a.mae < b.mae; })
                          ->mae;
  for (auto& c : table.cells) c.best = c.mae == best;
  return table;
}

}  // namespace polishsense
