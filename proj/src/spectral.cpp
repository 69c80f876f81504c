#include "polishsense/spectral.hpp"

#include <fftw3.h>
#include <fmt/format.h>

#include <cmath>
#include <memory>
#include <mutex>
#include <nlohmann/json.hpp>
#include <numbers>

#include "polishsense/error.hpp"
#include "polishsense/io.hpp"

namespace polishsense {

namespace {

// The FFTW planner is not thread-safe; execution with the new-array API is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};
template <class T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(p);
  }
};
using Plan = std::unique_ptr<fftw_plan_s, PlanDeleter>;

}  // namespace

FrameGeometry frame_geometry(const StftConfig& cfg, double rate_hz) {
  if (!(cfg.window_seconds > 0.0)) throw ConfigError("window_seconds must be > 0");
  if (!(cfg.overlap_fraction >= 0.0 && cfg.overlap_fraction < 1.0)) {
    throw ConfigError("overlap_fraction must lie in [0, 1)");
  }
  if (!(rate_hz > 0.0)) throw ConfigError("sample rate must be > 0");
  FrameGeometry g;
  g.window = samples_for(cfg.window_seconds, rate_hz);
  if (g.window < 2) throw ConfigError("window must span at least 2 samples");
  if (cfg.fft_points < g.window) {
    throw ConfigError(fmt::format("fft_points ({}) must be >= window length ({} samples)",
                                  cfg.fft_points, g.window));
  }
  g.hop = static_cast<std::size_t>(
      std::llround(static_cast<double>(g.window) * (1.0 - cfg.overlap_fraction)));
  if (g.hop < 1) g.hop = 1;
  return g;
}

std::vector<double> hamming_window(std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (n < 2) return w;
  const double denom = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / denom);
  }
  return w;
}

Spectrogram stft(std::span<const double> samples, double rate_hz, const StftConfig& cfg) {
  const FrameGeometry g = frame_geometry(cfg, rate_hz);
  if (samples.size() < g.window) {
    throw Error(fmt::format("signal of {} samples is shorter than one {}-sample window",
                            samples.size(), g.window));
  }
  const std::size_t frames = (samples.size() - g.window) / g.hop + 1;
  const std::size_t nfft = cfg.fft_points;
  const std::size_t bins = nfft / 2 + 1;

  Spectrogram spec;
  spec.power.resize(static_cast<Eigen::Index>(frames), static_cast<Eigen::Index>(bins));
  spec.sample_rate_hz = rate_hz;
  spec.fft_points = nfft;
  spec.bin_hz = rate_hz / static_cast<double>(nfft);
  spec.frame_seconds = static_cast<double>(g.hop) / rate_hz;

  const std::vector<double> window = hamming_window(g.window);
  FftwBuffer<double> in(static_cast<double*>(fftw_malloc(sizeof(double) * nfft)));
  FftwBuffer<fftw_complex> out(
      static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * bins)));
  if (!in || !out) throw Error("FFT buffer allocation failed");

  Plan plan;
  {
    // FFTW_ESTIMATE keeps the chosen algorithm, and so the bits, stable
    // across processes.
    std::lock_guard lock(planner_mutex());
    plan.reset(fftw_plan_dft_r2c_1d(static_cast<int>(nfft), in.get(), out.get(),
                                    FFTW_ESTIMATE | FFTW_DESTROY_INPUT));
  }
  if (!plan) throw Error("FFTW planning failed");

  for (std::size_t t = 0; t < frames; ++t) {
    const double* x = samples.data() + t * g.hop;
    for (std::size_t n = 0; n < g.window; ++n) in[n] = window[n] * x[n];
    std::fill(in.get() + g.window, in.get() + nfft, 0.0);
    fftw_execute_dft_r2c(plan.get(), in.get(), out.get());
    auto row = spec.power.row(static_cast<Eigen::Index>(t));
    for (std::size_t k = 0; k < bins; ++k) {
      const double re = out[k][0];
      const double im = out[k][1];
      row(static_cast<Eigen::Index>(k)) = re * re + im * im;
    }
  }
  return spec;
}

Spectrogram stft(const VibrationRun& run, const StftConfig& cfg) {
  return stft(run.samples, run.manifest.sample_rate_hz, cfg);
}

double band_energy(std::span<const double> frame_power, double bin_hz, const SpectralBand& band) {
  if (!(bin_hz > 0.0)) throw ConfigError("bin_hz must be > 0");
  const double top = static_cast<double>(frame_power.size() - 1) * bin_hz;
  if (band.f_lo < 0.0 || band.f_hi > top || !(band.f_lo < band.f_hi)) {
    throw ConfigError(fmt::format("band {} [{}, {}) Hz lies outside the spectrum [0, {}] Hz",
                                  band.index, band.f_lo, band.f_hi, top));
  }
  // First bin with centre >= f_lo, then walk while centre < f_hi.
  auto k = static_cast<std::size_t>(std::ceil(band.f_lo / bin_hz));
  while (k > 0 && static_cast<double>(k - 1) * bin_hz >= band.f_lo) --k;
  while (k < frame_power.size() && static_cast<double>(k) * bin_hz < band.f_lo) ++k;
  double sum = 0.0;
  for (; k < frame_power.size() && static_cast<double>(k) * bin_hz < band.f_hi; ++k) {
    sum += frame_power[k];
  }
  return sum * bin_hz;
}

Eigen::MatrixXd band_energy_series(const Spectrogram& spec, const BandSet& bands) {
  validate(bands, spec.nyquist_hz());
  Eigen::MatrixXd e(spec.frames(), static_cast<Eigen::Index>(bands.size()));
  for (Eigen::Index t = 0; t < spec.frames(); ++t) {
    const auto row = spec.power.row(t);
    const std::span<const double> frame(row.data(), static_cast<std::size_t>(row.size()));
    for (std::size_t j = 0; j < bands.size(); ++j) {
      e(t, static_cast<Eigen::Index>(j)) = band_energy(frame, spec.bin_hz, bands[j]);
    }
  }
  return e;
}

BandSet default_band_set() {
  constexpr double kFirstEdge = 20.0;
  constexpr double kTopEdge = 5000.0;
  BandSet bands;
  bands.push_back({1, 0.0, kFirstEdge});
  const double ratio = std::pow(kTopEdge / kFirstEdge, 1.0 / 12.0);
  double lo = kFirstEdge;
  for (int i = 2; i <= 13; ++i) {
    const double hi = i == 13 ? kTopEdge : kFirstEdge * std::pow(ratio, i - 1);
    bands.push_back({i, lo, hi});
    lo = hi;
  }
  return bands;
}

void validate(const BandSet& bands, double nyquist_hz) {
  if (bands.empty()) throw ConfigError("band set is empty");
  for (std::size_t i = 0; i < bands.size(); ++i) {
    const auto& b = bands[i];
    if (b.index != static_cast<int>(i) + 1) {
      throw ConfigError(fmt::format("band at position {} has index {}; expected {}", i, b.index,
                                    i + 1));
    }
    if (!(b.f_lo >= 0.0) || !(b.f_lo < b.f_hi) || !std::isfinite(b.f_hi)) {
      throw ConfigError(fmt::format("band {} has invalid edges [{}, {})", b.index, b.f_lo, b.f_hi));
    }
    if (nyquist_hz > 0.0 && b.f_hi > nyquist_hz) {
      throw ConfigError(fmt::format("band {} upper edge {} Hz exceeds Nyquist {} Hz", b.index,
                                    b.f_hi, nyquist_hz));
    }
    if (i > 0 && b.f_lo < bands[i - 1].f_hi) {
      throw ConfigError(fmt::format("bands {} and {} overlap or are unsorted", b.index - 1,
                                    b.index));
    }
  }
}

BandSet load_band_set(const std::filesystem::path& path) {
  BandSet bands;
  try {
    const auto j = nlohmann::json::parse(io::read_text(path));
    if (!j.is_array()) throw ConfigError("expected a JSON array");
    for (const auto& item : j) {
      bands.push_back({item.at("index").get<int>(), item.at("f_lo_hz").get<double>(),
                       item.at("f_hi_hz").get<double>()});
    }
    if (bands.size() != kBandCount) {
      throw ConfigError(fmt::format("expected {} bands, found {}", kBandCount, bands.size()));
    }
    validate(bands);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("invalid band file '{}': {}", path.string(), e.what()));
  } catch (const Error& e) {
    throw ConfigError(fmt::format("invalid band file '{}': {}", path.string(), e.what()));
  }
  return bands;
}

void save_band_set(const BandSet& bands, const std::filesystem::path& path) {
  validate(bands);
  nlohmann::json j = nlohmann::json::array();
  for (const auto& b : bands) {
    j.push_back({{"index", b.index}, {"f_lo_hz", b.f_lo}, {"f_hi_hz", b.f_hi}});
  }
  io::write_atomic(path, j.dump(2) + "\n");
}

}  // namespace polishsense
