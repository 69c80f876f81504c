#include "polishsense/datagen.hpp"

#include <fmt/format.h>

#include <cmath>
#include <nlohmann/json.hpp>
#include <numbers>
#include <set>

#include "polishsense/error.hpp"
#include "polishsense/io.hpp"
#include "polishsense/parallel.hpp"
#include "polishsense/rng.hpp"

namespace polishsense {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Sub-stream tags for derive_seed.
constexpr std::uint64_t kTargetStream = 1;
constexpr std::uint64_t kToneStream = 2;
constexpr std::uint64_t kNoiseStream = 3;
constexpr std::uint64_t kSurfaceStream = 4;
constexpr std::uint64_t kTextureSeedTag = 0x7e87u;

// Exact phasors are recomputed at every block start to bound recurrence drift.
constexpr std::size_t kToneBlock = 4096;

void check_range(const std::pair<double, double>& r, std::string_view name) {
  if (!(r.first > 0.0 && r.first < r.second && std::isfinite(r.second))) {
    throw ConfigError(fmt::format("{} must satisfy 0 < lo < hi", name));
  }
}

}  // namespace

void ScenarioConfig::validate() const {
  if (n_short + n_long == 0) throw ConfigError("scenario must contain at least one run");
  polishsense::validate(band_set, 0.5 * sample_rate_hz);
  std::set<int> indices;
  for (const auto& b : band_set) indices.insert(b.index);
  for (const int b : signal_bands) {
    if (!indices.contains(b)) throw ConfigError(fmt::format("signal band {} is not in the band set", b));
  }
  for (const auto& [b, w] : coupling) {
    if (!indices.contains(b)) throw ConfigError(fmt::format("coupling band {} is not in the band set", b));
    if (!std::isfinite(w)) throw ConfigError("coupling weights must be finite");
  }
  if (!(noise_floor >= 0.0) || !(base_rms >= 0.0) || !(nuisance_rms >= 0.0) ||
      !(transient_gain >= 0.0)) {
    throw ConfigError("noise_floor, base_rms, nuisance_rms and transient_gain must be >= 0");
  }
  if (tones_per_band < 1) throw ConfigError("tones_per_band must be >= 1");
  check_range(target_range_short, "target_range_short");
  check_range(target_range_long, "target_range_long");
  check_range(sa_after_range, "sa_after_range");
  if (!(sample_rate_hz > 0.0)) throw ConfigError("sample_rate_hz must be > 0");
  if (!(short_run_seconds > 2.0 * kShortRunTrimSeconds)) {
    throw ConfigError("short_run_seconds must exceed the two trimmed minutes");
  }
  if (texture_size < 2) throw ConfigError("texture_size must be >= 2");
}

namespace {

json band_set_json(const BandSet& bands) {
  json j = json::array();
  for (const auto& b : bands) j.push_back({{"index", b.index}, {"f_lo_hz", b.f_lo}, {"f_hi_hz", b.f_hi}});
  return j;
}

BandSet band_set_from_json(const json& j) {
  BandSet bands;
  for (const auto& item : j) {
    bands.push_back({item.at("index").get<int>(), item.at("f_lo_hz").get<double>(),
                     item.at("f_hi_hz").get<double>()});
  }
  return bands;
}

json range_json(const std::pair<double, double>& r) { return json::array({r.first, r.second}); }

std::pair<double, double> range_from_json(const json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

}  // namespace

std::string to_json(const ScenarioConfig& cfg) {
  json coupling = json::object();
  for (const auto& [b, w] : cfg.coupling) coupling[std::to_string(b)] = w;
  json j{{"seed", cfg.seed},
         {"n_short", cfg.n_short},
         {"n_long", cfg.n_long},
         {"band_set", band_set_json(cfg.band_set)},
         {"signal_bands", cfg.signal_bands},
         {"noise_floor", cfg.noise_floor},
         {"coupling", coupling},
         {"base_rms", cfg.base_rms},
         {"nuisance_rms", cfg.nuisance_rms},
         {"tones_per_band", cfg.tones_per_band},
         {"transient_gain", cfg.transient_gain},
         {"target_range_short", range_json(cfg.target_range_short)},
         {"target_range_long", range_json(cfg.target_range_long)},
         {"sa_after_range", range_json(cfg.sa_after_range)},
         {"sample_rate_hz", cfg.sample_rate_hz},
         {"short_run_seconds", cfg.short_run_seconds},
         {"texture_size", cfg.texture_size}};
  return j.dump(2) + "\n";
}

ScenarioConfig load_scenario(const fs::path& path) {
  ScenarioConfig cfg;
  try {
    const json j = json::parse(io::read_text(path));
    if (!j.is_object()) throw ConfigError("expected a JSON object");
    static const std::set<std::string> kKeys = {
        "seed", "n_short", "n_long", "band_set", "signal_bands", "noise_floor", "coupling",
        "base_rms", "nuisance_rms", "tones_per_band", "transient_gain", "target_range_short",
        "target_range_long", "sa_after_range", "sample_rate_hz", "short_run_seconds",
        "texture_size"};
    for (const auto& [key, _] : j.items()) {
      if (!kKeys.contains(key)) throw ConfigError(fmt::format("unknown key '{}'", key));
    }
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("n_short")) cfg.n_short = j["n_short"].get<std::size_t>();
    if (j.contains("n_long")) cfg.n_long = j["n_long"].get<std::size_t>();
    if (j.contains("band_set")) {
      const auto& b = j["band_set"];
      if (b.is_string()) {
        fs::path bp = b.get<std::string>();
        if (bp.is_relative()) bp = path.parent_path() / bp;
        cfg.band_set = load_band_set(bp);
      } else {
        cfg.band_set = band_set_from_json(b);
      }
    }
    if (j.contains("signal_bands")) cfg.signal_bands = j["signal_bands"].get<std::vector<int>>();
    if (j.contains("noise_floor")) cfg.noise_floor = j["noise_floor"].get<double>();
    if (j.contains("coupling")) {
      cfg.coupling.clear();
      for (const auto& [k, v] : j["coupling"].items()) cfg.coupling[std::stoi(k)] = v.get<double>();
    }
    if (j.contains("base_rms")) cfg.base_rms = j["base_rms"].get<double>();
    if (j.contains("nuisance_rms")) cfg.nuisance_rms = j["nuisance_rms"].get<double>();
    if (j.contains("tones_per_band")) cfg.tones_per_band = j["tones_per_band"].get<std::size_t>();
    if (j.contains("transient_gain")) cfg.transient_gain = j["transient_gain"].get<double>();
    if (j.contains("target_range_short")) cfg.target_range_short = range_from_json(j["target_range_short"]);
    if (j.contains("target_range_long")) cfg.target_range_long = range_from_json(j["target_range_long"]);
    if (j.contains("sa_after_range")) cfg.sa_after_range = range_from_json(j["sa_after_range"]);
    if (j.contains("sample_rate_hz")) cfg.sample_rate_hz = j["sample_rate_hz"].get<double>();
    if (j.contains("short_run_seconds")) cfg.short_run_seconds = j["short_run_seconds"].get<double>();
    if (j.contains("texture_size")) cfg.texture_size = j["texture_size"].get<std::size_t>();
    cfg.validate();
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("invalid scenario file '{}': {}", path.string(), e.what()));
  } catch (const std::invalid_argument&) {
    throw ConfigError(fmt::format("invalid scenario file '{}': coupling keys must be band indices",
                                  path.string()));
  } catch (const Error& e) {
    throw ConfigError(fmt::format("invalid scenario file '{}': {}", path.string(), e.what()));
  }
  return cfg;
}

std::string run_id_for(const ScenarioConfig& cfg, std::size_t run_index) {
  if (run_index < cfg.n_short) return fmt::format("short_{:02}", run_index + 1);
  return fmt::format("long_{:02}", run_index - cfg.n_short + 1);
}

double tone_margin_hz(const SpectralBand& band) {
  return std::max(3.0, 0.1 * (band.f_hi - band.f_lo));
}

void add_tones(std::vector<double>& out, const std::vector<Tone>& tones, double rate_hz) {
  const std::size_t n = out.size();
  for (const auto& tone : tones) {
    const double step = 2.0 * std::numbers::pi * tone.freq_hz / rate_hz;
    const double rc = std::cos(step), rs = std::sin(step);
    for (std::size_t start = 0; start < n; start += kToneBlock) {
      const double theta = std::fmod(step * static_cast<double>(start) + tone.phase,
                                     2.0 * std::numbers::pi);
      double c = std::cos(theta), s = std::sin(theta);
      const std::size_t end = std::min(n, start + kToneBlock);
      for (std::size_t i = start; i < end; ++i) {
        out[i] += tone.amplitude * s;
        const double c2 = c * rc - s * rs;
        s = s * rc + c * rs;
        c = c2;
      }
    }
  }
}

Micrograph unit_texture(std::size_t size, std::uint64_t seed) {
  Rng rng(seed);
  Micrograph m;
  const auto n = static_cast<Eigen::Index>(size);
  m.heights.resize(n, n);
  // Smooth-ish texture: random field plus a few low-frequency ripples.
  const double kx = rng.uniform(1.0, 4.0), ky = rng.uniform(1.0, 4.0);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) {
      const double ripple = std::sin(2.0 * std::numbers::pi * kx * static_cast<double>(r) / size) *
                            std::cos(2.0 * std::numbers::pi * ky * static_cast<double>(c) / size);
      m.heights(r, c) = rng.normal() + 0.5 * ripple;
    }
  }
  m.heights.array() -= m.heights.mean();
  m.heights /= areal_roughness(m);
  return m;
}

SyntheticRun synthesize_run(const ScenarioConfig& cfg, std::size_t run_index) {
  cfg.validate();
  if (run_index >= cfg.n_short + cfg.n_long) {
    throw ConfigError(fmt::format("run index {} out of range", run_index));
  }
  const bool is_short = run_index < cfg.n_short;
  const std::uint64_t run_seed = derive_seed(cfg.seed, run_index);

  SyntheticRun out;
  auto& m = out.run.manifest;
  m.run_id = run_id_for(cfg, run_index);
  m.experiment_class = is_short ? ExperimentClass::Short6Min : ExperimentClass::Long12Hr;
  m.stage_index = static_cast<int>(is_short ? run_index + 1 : run_index - cfg.n_short + 1);
  m.sample_rate_hz = cfg.sample_rate_hz;
  m.pre_truncated = !is_short;
  const double seconds = is_short ? cfg.short_run_seconds : kLongRunKeepSeconds;
  m.sample_count = samples_for(seconds, cfg.sample_rate_hz);

  Rng target_rng(derive_seed(run_seed, kTargetStream));
  const auto& range = is_short ? cfg.target_range_short : cfg.target_range_long;
  const double delta = target_rng.uniform(range.first, range.second);

  // Tones per band. Amplitudes a give a band RMS of a * sqrt(K / 2).
  Rng tone_rng(derive_seed(run_seed, kToneStream));
  const std::set<int> signal(cfg.signal_bands.begin(), cfg.signal_bands.end());
  std::vector<Tone> tones;
  const double k = static_cast<double>(cfg.tones_per_band);
  for (const auto& band : cfg.band_set) {
    double rms;
    if (signal.contains(band.index)) {
      const auto it = cfg.coupling.find(band.index);
      rms = cfg.base_rms + (it == cfg.coupling.end() ? 0.0 : it->second) * delta;
    } else {
      rms = tone_rng.uniform(0.0, cfg.nuisance_rms);
    }
    rms = std::max(rms, 0.0);
    const double amplitude = rms * std::sqrt(2.0 / k);
    const double margin = tone_margin_hz(band);
    const double lo = band.f_lo + margin;
    const double hi = std::max(lo, band.f_hi - margin);
    for (std::size_t t = 0; t < cfg.tones_per_band; ++t) {
      const double f = tone_rng.uniform(lo, hi);
      const double phase = tone_rng.uniform(0.0, 2.0 * std::numbers::pi);
      tones.push_back({f, amplitude, phase});
    }
  }

  auto& x = out.run.samples;
  x.resize(m.sample_count);
  Rng noise_rng(derive_seed(run_seed, kNoiseStream));
  const std::size_t trim = is_short ? samples_for(kShortRunTrimSeconds, cfg.sample_rate_hz) : 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const bool transient = is_short && (i < trim || i >= x.size() - trim);
    x[i] = cfg.noise_floor * (transient ? cfg.transient_gain : 1.0) * noise_rng.normal();
  }
  add_tones(x, tones, cfg.sample_rate_hz);

  // Micrographs: one scenario-wide texture, scaled to the drawn Sa values.
  const Micrograph texture = unit_texture(cfg.texture_size, derive_seed(cfg.seed, kTextureSeedTag));
  Rng surface_rng(derive_seed(run_seed, kSurfaceStream));
  const double sa_after = surface_rng.uniform(cfg.sa_after_range.first, cfg.sa_after_range.second);
  out.after.heights = texture.heights * sa_after;
  out.before.heights = texture.heights * (sa_after + delta);
  out.target = roughness_delta(out.before, out.after, m.run_id);
  return out;
}

GeneratedRun gen_run(const ScenarioConfig& cfg, std::size_t run_index, const fs::path& root) {
  SyntheticRun s = synthesize_run(cfg, run_index);
  GeneratedRun g;
  g.manifest = s.run.manifest;
  g.target = s.target;
  g.path = (fs::path("runs") / g.manifest.run_id).generic_string();
  const fs::path dir = root / g.path;
  save_run(s.run, dir);
  save_micrograph(s.before, dir / "before.csv");
  save_micrograph(s.after, dir / "after.csv");
  return g;
}

namespace {

json manifest_json(const DatasetManifest& d) {
  json runs = json::array();
  for (const auto& r : d.runs) {
    runs.push_back({{"run_id", r.manifest.run_id},
                    {"experiment_class", std::string(to_string(r.manifest.experiment_class))},
                    {"stage_index", r.manifest.stage_index},
                    {"path", r.path},
                    {"target", r.target.delta},
                    {"sa_before", r.target.sa_before},
                    {"sa_after", r.target.sa_after}});
  }
  return {{"format", "polishsense-dataset"}, {"seed", d.seed}, {"runs", std::move(runs)}};
}

}  // namespace

DatasetManifest gen_dataset(const ScenarioConfig& cfg, const fs::path& root) {
  cfg.validate();
  DatasetManifest d;
  d.seed = cfg.seed;
  const std::size_t total = cfg.n_short + cfg.n_long;
  d.runs.resize(total);
  fs::create_directories(root);
  parallel_for(total, [&](std::size_t i) { d.runs[i] = gen_run(cfg, i, root); });
  save_band_set(cfg.band_set, root / "bands.json");
  io::write_atomic(root / "scenario.json", to_json(cfg));
  io::write_atomic(root / "dataset.json", manifest_json(d).dump(2) + "\n");
  return d;
}

DatasetManifest load_dataset_manifest(const fs::path& root) {
  const fs::path path = root / "dataset.json";
  if (!fs::exists(path)) throw Error(fmt::format("missing dataset manifest '{}'", path.string()));
  DatasetManifest d;
  try {
    const json j = json::parse(io::read_text(path));
    d.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& r : j.at("runs")) {
      GeneratedRun g;
      g.manifest.run_id = r.at("run_id").get<std::string>();
      g.manifest.experiment_class = parse_experiment_class(r.at("experiment_class").get<std::string>());
      g.manifest.stage_index = r.at("stage_index").get<int>();
      g.path = r.at("path").get<std::string>();
      g.target.run_id = g.manifest.run_id;
      g.target.delta = r.at("target").get<double>();
      g.target.sa_before = r.at("sa_before").get<double>();
      g.target.sa_after = r.at("sa_after").get<double>();
      d.runs.push_back(std::move(g));
    }
  } catch (const json::exception& e) {
    throw Error(fmt::format("{}: malformed dataset manifest: {}", path.string(), e.what()));
  }
  return d;
}

}  // namespace polishsense
