#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace polishsense {

enum class FeatureMode { Together, Separate };

std::string_view to_string(FeatureMode m);
FeatureMode parse_feature_mode(std::string_view s);

/// Population moments. Kurtosis is non-excess (no -3). When the variance is
/// exactly zero, skewness and kurtosis are reported as 0.
struct Moments {
  double mean = 0.0;
  double variance = 0.0;
  double skewness = 0.0;
  double kurtosis = 0.0;
};

Moments moments(std::span<const double> x);

struct FeatureVector {
  std::string run_id;
  FeatureMode mode = FeatureMode::Separate;
  std::vector<double> values;
  std::vector<std::string> names;
  /// Roughness change in nm.
  double target = 0.0;
};

/// Band-major names: band01_mean, band01_variance, band01_skewness,
/// band01_kurtosis, band02_mean, ...
std::vector<std::string> feature_names(FeatureMode mode, std::size_t bands);

/// Moments of every band column of a T x bands energy matrix.
FeatureVector extract_separate(const Eigen::MatrixXd& energies, std::string run_id, double target);

/// Moments of all T x bands energies pooled into one sample.
FeatureVector extract_together(const Eigen::MatrixXd& energies, std::string run_id, double target);

FeatureVector extract(FeatureMode mode, const Eigen::MatrixXd& energies, std::string run_id,
                      double target);

/// A set of runs sharing one feature layout.
struct FeatureTable {
  std::vector<std::string> names;
  std::vector<FeatureVector> rows;

  Eigen::MatrixXd design() const;
  Eigen::VectorXd targets() const;
  /// Inferred from the column names.
  FeatureMode mode() const;
};

/// Rejects empty input, mixed modes, differing names, and duplicate run ids.
FeatureTable make_table(std::vector<FeatureVector> rows);

/// CSV with header `run_id,target,<names...>` and 17-digit floats.
std::string to_csv(const FeatureTable& table);
FeatureTable parse_feature_csv(std::string_view text, std::string_view source = "<csv>");
FeatureTable load_feature_csv(const std::filesystem::path& path);
void save_feature_csv(const FeatureTable& table, const std::filesystem::path& path);

/// Per-column z-score fitted on training rows. Zero-variance columns are
/// centred only.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  static Standardizer fit(const Eigen::MatrixXd& x);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& row) const;
};

}  // namespace polishsense
