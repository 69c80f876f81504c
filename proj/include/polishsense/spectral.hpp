#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <span>
#include <vector>

#include "polishsense/signal.hpp"

namespace polishsense {

enum class WindowKind { Hamming };

struct StftConfig {
  double window_seconds = 1.0;
  double overlap_fraction = 0.0;
  std::size_t fft_points = 16384;
  WindowKind window_kind = WindowKind::Hamming;
};

using PowerMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// One-sided power |X[k]|^2, k = 0..fft_points/2, one row per frame. No
/// window-gain or density normalization is applied.
struct Spectrogram {
  PowerMatrix power;
  double bin_hz = 0.0;
  double frame_seconds = 0.0;
  double sample_rate_hz = 0.0;
  std::size_t fft_points = 0;

  Eigen::Index frames() const { return power.rows(); }
  Eigen::Index bins() const { return power.cols(); }
  double nyquist_hz() const { return 0.5 * sample_rate_hz; }
};

/// Half-open frequency interval [f_lo, f_hi); `index` is 1-based.
struct SpectralBand {
  int index = 0;
  double f_lo = 0.0;
  double f_hi = 0.0;
};

using BandSet = std::vector<SpectralBand>;

inline constexpr std::size_t kBandCount = 13;

/// Window length in samples and hop, after validating `cfg` against `rate_hz`.
struct FrameGeometry {
  std::size_t window = 0;
  std::size_t hop = 0;
};
FrameGeometry frame_geometry(const StftConfig& cfg, double rate_hz);

/// Symmetric Hamming window, 0.54 - 0.46 cos(2 pi n / (N - 1)).
std::vector<double> hamming_window(std::size_t n);

/// Frames are taken at multiples of the hop; a trailing partial window is
/// dropped. Throws Error if the signal is shorter than one window.
Spectrogram stft(std::span<const double> samples, double rate_hz, const StftConfig& cfg);
Spectrogram stft(const VibrationRun& run, const StftConfig& cfg);

/// Riemann sum of power[k] * bin_hz over bins whose centre k * bin_hz lies in
/// [f_lo, f_hi).
double band_energy(std::span<const double> frame_power, double bin_hz, const SpectralBand& band);

/// T x |bands| matrix; entry (t, j) is the energy of frame t in band j.
Eigen::MatrixXd band_energy_series(const Spectrogram& spec, const BandSet& bands);

/// 13 contiguous bands over 0..5 kHz: [0, 20) Hz, then 12 log-spaced bands
/// from 20 Hz up to 5 kHz.
BandSet default_band_set();

/// Checks ordering, disjointness, 1..n indexing and f_lo < f_hi. When
/// `nyquist_hz` > 0 also requires f_hi <= nyquist_hz.
void validate(const BandSet& bands, double nyquist_hz = 0.0);

/// JSON array of {index, f_lo_hz, f_hi_hz}. Errors name the file.
BandSet load_band_set(const std::filesystem::path& path);
void save_band_set(const BandSet& bands, const std::filesystem::path& path);

}  // namespace polishsense
