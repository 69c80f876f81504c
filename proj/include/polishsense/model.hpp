#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "polishsense/features.hpp"
#include "polishsense/gbr.hpp"
#include "polishsense/gp.hpp"
#include "polishsense/linear.hpp"
#include "polishsense/svr.hpp"
#include "polishsense/tree.hpp"

namespace polishsense {

enum class ModelKind { Linear, Ridge, GP, Tree, Forest, SVR, GBR };

/// Row order of the results table.
inline constexpr std::array<ModelKind, 7> kReportOrder = {
    ModelKind::Linear, ModelKind::GP,     ModelKind::Tree, ModelKind::Ridge,
    ModelKind::Forest, ModelKind::SVR,    ModelKind::GBR};

std::string_view to_string(ModelKind k);
/// Human-readable row label, e.g. "Decision Tree".
std::string_view display_name(ModelKind k);
/// Accepts the CLI spellings linear, ridge, gp, tree, forest, svr, gbr.
ModelKind parse_model_kind(std::string_view s);
bool has_feature_importance(ModelKind k);

/// Hyperparameters by name. Missing names take the per-kind default; unknown
/// names are rejected by validate().
///   ridge:  lambda (1.0)
///   gp:     length_scale (1.0), jitter (1e-10)
///   tree:   min_samples_leaf (1), max_depth (-1 = unlimited)
///   forest: trees (100), feature_fraction (1.0), bootstrap (1), min_samples_leaf (1),
///           max_depth (-1 = unlimited)
///   svr:    C (1.0), epsilon (0.1), gap_tolerance (1e-6), max_iterations (1e7)
///   gbr:    stages (100), learning_rate (0.1), max_depth (3), min_samples_leaf (1)
struct ModelSpec {
  ModelKind kind = ModelKind::Tree;
  std::map<std::string, double> hyperparameters;
  /// Used by Forest only.
  std::uint64_t seed = 0;

  /// Defaults for `kind` with no overrides.
  static ModelSpec defaults(ModelKind kind, std::uint64_t seed = 0);

  double get(const std::string& name) const;
  /// Throws ConfigError for unknown names or out-of-range values.
  void validate() const;

  double ridge_lambda() const;
  GpParams gp_params() const;
  TreeParams tree_params() const;
  ForestParams forest_params() const;
  SvrParams svr_params() const;
  GbrParams gbr_params() const;
};

using ModelParameters = std::variant<LinearModel, GpModel, RegressionTree, Forest, SvrModel, GbrModel>;

struct TrainedModel {
  ModelSpec spec;
  std::vector<std::string> feature_names;
  ModelParameters parameters;
  /// Applied to inputs by predict() when present. Fitted on training rows.
  std::optional<Standardizer> input_scaling;
};

/// Fits `spec` to the given features; names must match x's column count.
TrainedModel fit(const ModelSpec& spec, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                 std::vector<std::string> feature_names);

double predict(const TrainedModel& model, const Eigen::VectorXd& x);
Eigen::VectorXd predict(const TrainedModel& model, const Eigen::MatrixXd& x);

/// Normalized total variance reduction per feature (sums to 1, or all zero
/// when the model never splits). Tree, Forest and GBR only; other kinds
/// throw ConfigError.
Eigen::VectorXd feature_importance(const TrainedModel& model);

/// Self-describing JSON document; reloading reproduces predictions bit for bit.
std::string to_json(const TrainedModel& model);
TrainedModel model_from_json(std::string_view text);
void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace polishsense
