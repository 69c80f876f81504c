#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "polishsense/features.hpp"
#include "polishsense/model.hpp"
#include "polishsense/parallel.hpp"

namespace polishsense {

/// Mean absolute error. Throws ConfigError on empty or mismatched input.
double mae(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred);

struct FoldPrediction {
  std::string run_id;
  double y_true = 0.0;
  double y_pred = 0.0;
};

struct EvalReport {
  ModelKind model_kind = ModelKind::Tree;
  FeatureMode feature_mode = FeatureMode::Separate;
  bool standardized = false;
  std::vector<std::string> feature_names;
  /// In input run order.
  std::vector<FoldPrediction> fold_predictions;
  std::vector<double> per_fold_abs_error;
  double mae = 0.0;
  /// Fold-averaged normalized importance (Tree, Forest, GBR).
  std::optional<Eigen::VectorXd> importance_summary;
};

struct LoocvOptions {
  /// z-score features with statistics from each fold's training rows.
  bool standardize = false;
  std::size_t workers = worker_count();
};

/// Leave-one-out: fold i trains on every run except i and predicts run i.
/// Requires at least two runs sharing one feature layout, unique run ids.
EvalReport loocv(const std::vector<FeatureVector>& features, const ModelSpec& spec,
                 const LoocvOptions& options = {});
EvalReport loocv(const FeatureTable& table, const ModelSpec& spec, const LoocvOptions& options = {});

std::string to_json(const EvalReport& report);

struct ResultsTable {
  struct Cell {
    ModelKind kind;
    FeatureMode mode;
    double mae;
    /// Every cell equal to the minimum MAE is flagged.
    bool best = false;
  };
  std::vector<Cell> cells;

  const Cell* find(ModelKind kind, FeatureMode mode) const;
  /// Header `method,together,separate,best`; rows in report order; `best`
  /// lists the flagged modes of that row separated by ';'.
  std::string to_csv() const;
  /// Aligned text; flagged cells carry a trailing '*'.
  std::string to_text() const;
};

/// Throws ConfigError on an empty list or a repeated (kind, mode) pair.
ResultsTable results_table(const std::vector<EvalReport>& reports);

}  // namespace polishsense
