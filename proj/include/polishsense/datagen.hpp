#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "polishsense/signal.hpp"
#include "polishsense/spectral.hpp"
#include "polishsense/surface.hpp"

namespace polishsense {

/// Synthetic polishing campaign. Each run carries broadband noise plus a few
/// sinusoids in every band: in `signal_bands` their total RMS is
/// base_rms + coupling[band] * delta; in the remaining bands it is drawn
/// uniformly from [0, nuisance_rms] independently of the target.
struct ScenarioConfig {
  std::uint64_t seed = 42;
  std::size_t n_short = 18;
  std::size_t n_long = 6;
  BandSet band_set = default_band_set();
  std::vector<int> signal_bands = {2, 9, 12};
  /// Standard deviation of the white noise floor.
  double noise_floor = 1e-3;
  /// Band index -> RMS added per nm of roughness change.
  std::map<int, double> coupling = {{2, 1e-3}, {9, 1e-3}, {12, 1e-3}};
  double base_rms = 1e-3;
  double nuisance_rms = 4e-3;
  std::size_t tones_per_band = 3;
  /// Noise multiplier inside the start-up and ramp-down minute of short runs.
  double transient_gain = 20.0;
  std::pair<double, double> target_range_short = {0.008, 3.02};
  std::pair<double, double> target_range_long = {1.06, 2.28};
  /// Sa of the post-polish micrograph is drawn from this range (nm).
  std::pair<double, double> sa_after_range = {1.0, 4.0};
  double sample_rate_hz = kNominalSampleRateHz;
  double short_run_seconds = 360.0;
  std::size_t texture_size = 128;

  /// Throws ConfigError when an invariant is violated.
  void validate() const;
};

/// JSON object whose keys mirror the struct fields; absent keys keep their
/// defaults. `band_set` may be an inline array or a path to a band file.
ScenarioConfig load_scenario(const std::filesystem::path& path);
std::string to_json(const ScenarioConfig& cfg);

struct GeneratedRun {
  RunManifest manifest;
  RoughnessTarget target;
  /// Relative to the dataset root.
  std::string path;
};

std::string run_id_for(const ScenarioConfig& cfg, std::size_t run_index);

/// Synthesizes run `run_index` (short runs first, then long runs) without
/// touching the disk. Long runs are materialized pre-truncated to 240 s.
struct SyntheticRun {
  VibrationRun run;
  Micrograph before;
  Micrograph after;
  RoughnessTarget target;
};
SyntheticRun synthesize_run(const ScenarioConfig& cfg, std::size_t run_index);

/// Writes runs/<run_id>/ under `root`: manifest.json, samples.f64le,
/// before.csv, after.csv and micrograph.json.
GeneratedRun gen_run(const ScenarioConfig& cfg, std::size_t run_index,
                     const std::filesystem::path& root);

struct DatasetManifest {
  std::uint64_t seed = 0;
  std::vector<GeneratedRun> runs;
};

/// Generates every run plus `dataset.json`, `bands.json` and
/// `scenario.json` under `root`.
DatasetManifest gen_dataset(const ScenarioConfig& cfg, const std::filesystem::path& root);

DatasetManifest load_dataset_manifest(const std::filesystem::path& root);

/// Planted tones of one band: frequency, amplitude, phase.
struct Tone {
  double freq_hz;
  double amplitude;
  double phase;
};

/// Tone frequencies stay this far inside their band edges.
double tone_margin_hz(const SpectralBand& band);

/// Adds sum_k a_k sin(2 pi f_k n / fs + phi_k) to `out`, n from 0.
void add_tones(std::vector<double>& out, const std::vector<Tone>& tones, double rate_hz);

/// Zero-mean pseudo-random height map scaled to Sa = 1.
Micrograph unit_texture(std::size_t size, std::uint64_t seed);

}  // namespace polishsense
