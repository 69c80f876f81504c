#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "polishsense/datagen.hpp"
#include "polishsense/eval.hpp"
#include "polishsense/features.hpp"
#include "polishsense/model.hpp"
#include "polishsense/spectral.hpp"

namespace polishsense {

/// Exit statuses used by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

struct GenOptions {
  std::optional<std::filesystem::path> scenario;
  std::optional<std::filesystem::path> bands;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n_short;
  std::optional<std::size_t> n_long;
  std::filesystem::path out = "data";
};

struct ExtractOptions {
  std::filesystem::path data = "data";
  std::vector<FeatureMode> modes = {FeatureMode::Together, FeatureMode::Separate};
  /// Defaults to <data>/bands.json when present, else the built-in set.
  std::optional<std::filesystem::path> bands;
  StftConfig stft;
  /// Defaults to `data`.
  std::optional<std::filesystem::path> out;
};

struct EvaluateOptions {
  std::filesystem::path features = "data";
  std::vector<ModelKind> models = {kReportOrder.begin(), kReportOrder.end()};
  std::vector<FeatureMode> modes = {FeatureMode::Together, FeatureMode::Separate};
  bool standardize = false;
  std::uint64_t seed = 42;
  /// Defaults to `features`.
  std::optional<std::filesystem::path> out;
};

struct PredictOptions {
  std::filesystem::path model;
  std::optional<std::string> feature_row;
  std::optional<std::filesystem::path> run;
  std::optional<std::filesystem::path> bands;
  StftConfig stft;
};

/// Builds the scenario: scenario file (or defaults), then flag overrides.
ScenarioConfig resolve_scenario(const GenOptions& options);
DatasetManifest cmd_gen(const GenOptions& options);

/// Loads a run directory and returns its T x bands energy series after
/// truncation and STFT.
Eigen::MatrixXd run_band_energies(const std::filesystem::path& run_dir, const BandSet& bands,
                                  const StftConfig& stft);

/// Writes features_<mode>.csv per requested mode; returns the tables in
/// the same order. Targets come from each run's micrograph pair.
std::vector<FeatureTable> cmd_extract(const ExtractOptions& options);

std::filesystem::path feature_csv_path(const std::filesystem::path& dir, FeatureMode mode);

struct EvaluateResult {
  std::vector<EvalReport> reports;
  ResultsTable table;
};

/// LOOCV for every model x mode; writes reports/<model>_<mode>.json,
/// models/<model>_<mode>.json (fitted on all runs), results.csv, results.txt.
EvaluateResult cmd_evaluate(const EvaluateOptions& options);

struct PredictResult {
  double prediction = 0.0;
  /// Top features by importance for tree-family models.
  std::vector<std::pair<std::string, double>> top_features;
};

PredictResult cmd_predict(const PredictOptions& options);

/// Full command-line entry point; returns the process exit status.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace polishsense
