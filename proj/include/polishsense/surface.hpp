#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <string>

namespace polishsense {

/// Confocal height map in nm. Row-major storage mirrors the CSV layout.
struct Micrograph {
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> heights;
  /// nm^2 per cell.
  double pixel_area = 1.0;
};

struct RoughnessTarget {
  std::string run_id;
  double sa_before = 0.0;
  double sa_after = 0.0;
  /// |sa_after - sa_before|
  double delta = 0.0;
};

/// Throws ConfigError on empty, non-finite, or non-positive-area input.
void validate(const Micrograph& m);

/// Areal roughness Sa: area-weighted mean absolute deviation from the mean
/// height. Uniform pixel_area cancels, so the result is the plain cell mean
/// of |Z - mean(Z)|.
double areal_roughness(const Micrograph& m);

RoughnessTarget roughness_delta(const Micrograph& before, const Micrograph& after,
                                std::string run_id);

/// CSV of heights, row-major, no header. If `<stem-dir>/micrograph.json`
/// exists, its pixel_area is applied.
Micrograph load_micrograph(const std::filesystem::path& csv_path);
/// Also writes the micrograph.json sidecar, shared by every micrograph in
/// the directory.
void save_micrograph(const Micrograph& m, const std::filesystem::path& csv_path);

}  // namespace polishsense
