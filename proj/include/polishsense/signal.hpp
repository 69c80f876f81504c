#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace polishsense {

enum class ExperimentClass { Short6Min, Long12Hr };

std::string_view to_string(ExperimentClass c);
ExperimentClass parse_experiment_class(std::string_view s);

inline constexpr double kNominalSampleRateHz = 10000.0;
/// Seconds cut from each end of a short run.
inline constexpr double kShortRunTrimSeconds = 60.0;
/// Seconds retained from the tail of a long run.
inline constexpr double kLongRunKeepSeconds = 240.0;
inline constexpr std::size_t kShortRunNominalSamples = 3'600'000;
inline constexpr std::size_t kLongRunNominalSamples = 432'000'000;

struct RunManifest {
  std::string run_id;
  ExperimentClass experiment_class = ExperimentClass::Short6Min;
  int stage_index = 1;
  double sample_rate_hz = kNominalSampleRateHz;
  std::size_t sample_count = 0;
  /// Long runs materialized with only their final window on disk.
  bool pre_truncated = false;

  bool operator==(const RunManifest&) const = default;
};

/// Throws ConfigError if the manifest violates its invariants.
void validate(const RunManifest& m);

struct VibrationRun {
  RunManifest manifest;
  std::vector<double> samples;
};

/// Reads `<dir>/manifest.json` and `<dir>/samples.f64le`.
VibrationRun load_run(const std::filesystem::path& dir);

/// Writes the run directory layout read by load_run.
void save_run(const VibrationRun& run, const std::filesystem::path& dir);

/// Applies the per-class retention window, in samples derived from
/// sample_rate_hz:
///   Short6Min: drops the first and last 60 s,
///   Long12Hr:  keeps the last 240 s.
VibrationRun truncate_run(const VibrationRun& run);

/// Number of samples covering `seconds` at `rate_hz`, rounded to nearest.
std::size_t samples_for(double seconds, double rate_hz);

}  // namespace polishsense
