#include "polishsense/signal.hpp"

#include <fmt/format.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>

#include "polishsense/error.hpp"
#include "polishsense/io.hpp"

namespace polishsense {

namespace fs = std::filesystem;
using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "samples.f64le is read with native byte order");

std::string_view to_string(ExperimentClass c) {
  return c == ExperimentClass::Short6Min ? "short6min" : "long12hr";
}

ExperimentClass parse_experiment_class(std::string_view s) {
  if (s == "short6min") return ExperimentClass::Short6Min;
  if (s == "long12hr") return ExperimentClass::Long12Hr;
  throw ConfigError(fmt::format("unknown experiment_class '{}'", s));
}

void validate(const RunManifest& m) {
  if (!(m.sample_rate_hz > 0.0) || !std::isfinite(m.sample_rate_hz)) {
    throw ConfigError(fmt::format("run '{}': sample_rate_hz must be > 0", m.run_id));
  }
  if (m.stage_index < 1) {
    throw ConfigError(fmt::format("run '{}': stage_index must be >= 1", m.run_id));
  }
}

std::size_t samples_for(double seconds, double rate_hz) {
  return static_cast<std::size_t>(std::llround(seconds * rate_hz));
}

namespace {

RunManifest manifest_from_json(const json& j, const fs::path& where) {
  RunManifest m;
  try {
    m.run_id = j.at("run_id").get<std::string>();
    m.experiment_class = parse_experiment_class(j.at("experiment_class").get<std::string>());
    m.stage_index = j.at("stage_index").get<int>();
    m.sample_rate_hz = j.at("sample_rate_hz").get<double>();
    m.sample_count = j.at("sample_count").get<std::size_t>();
    m.pre_truncated = j.value("pre_truncated", false);
  } catch (const json::exception& e) {
    throw Error(fmt::format("{}: malformed manifest: {}", where.string(), e.what()));
  }
  validate(m);
  return m;
}

json manifest_to_json(const RunManifest& m) {
  return json{{"run_id", m.run_id},
              {"experiment_class", std::string(to_string(m.experiment_class))},
              {"stage_index", m.stage_index},
              {"sample_rate_hz", m.sample_rate_hz},
              {"sample_count", m.sample_count},
              {"pre_truncated", m.pre_truncated}};
}

}  // namespace

VibrationRun load_run(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  const fs::path samples_path = dir / "samples.f64le";
  if (!fs::exists(manifest_path)) {
    throw Error(fmt::format("missing file '{}'", manifest_path.string()));
  }
  if (!fs::exists(samples_path)) {
    throw Error(fmt::format("missing file '{}'", samples_path.string()));
  }
  json j;
  try {
    j = json::parse(io::read_text(manifest_path));
  } catch (const json::exception& e) {
    throw Error(fmt::format("{}: invalid JSON: {}", manifest_path.string(), e.what()));
  }
  VibrationRun run{manifest_from_json(j, manifest_path), {}};

  const auto bytes = fs::file_size(samples_path);
  if (bytes % sizeof(double) != 0) {
    throw Error(fmt::format("{}: size {} is not a multiple of 8 bytes",
                            samples_path.string(), bytes));
  }
  const std::size_t count = bytes / sizeof(double);
  if (count != run.manifest.sample_count) {
    throw Error(fmt::format("run '{}': length mismatch: manifest declares {} samples, file holds {}",
                            run.manifest.run_id, run.manifest.sample_count, count));
  }
  run.samples.resize(count);
  std::ifstream in(samples_path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open '{}'", samples_path.string()));
  in.read(reinterpret_cast<char*>(run.samples.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) throw Error(fmt::format("short read from '{}'", samples_path.string()));

  for (std::size_t i = 0; i < count; ++i) {
    if (!std::isfinite(run.samples[i])) {
      throw Error(fmt::format("run '{}': non-finite sample at index {}",
                              run.manifest.run_id, i));
    }
  }
  return run;
}

void save_run(const VibrationRun& run, const fs::path& dir) {
  validate(run.manifest);
  if (run.samples.size() != run.manifest.sample_count) {
    throw Error(fmt::format("run '{}': length mismatch: manifest declares {} samples, run holds {}",
                            run.manifest.run_id, run.manifest.sample_count,
                            run.samples.size()));
  }
  fs::create_directories(dir);
  io::write_atomic(dir / "samples.f64le",
                   std::string_view(reinterpret_cast<const char*>(run.samples.data()),
                                    run.samples.size() * sizeof(double)));
  io::write_atomic(dir / "manifest.json", manifest_to_json(run.manifest).dump(2) + "\n");
}

VibrationRun truncate_run(const VibrationRun& run) {
  const auto& m = run.manifest;
  const std::size_t n = run.samples.size();
  std::size_t begin = 0;
  std::size_t end = n;
  if (m.experiment_class == ExperimentClass::Short6Min) {
    const std::size_t trim = samples_for(kShortRunTrimSeconds, m.sample_rate_hz);
    if (n <= 2 * trim) {
      throw Error(fmt::format("run '{}': run too short: {} samples, short runs need more than {}",
                              m.run_id, n, 2 * trim));
    }
    begin = trim;
    end = n - trim;
  } else {
    const std::size_t keep = samples_for(kLongRunKeepSeconds, m.sample_rate_hz);
    if (n < keep) {
      throw Error(fmt::format("run '{}': run too short: {} samples, long runs need at least {}",
                              m.run_id, n, keep));
    }
    begin = n - keep;
  }
  VibrationRun out;
  out.manifest = m;
  out.samples.assign(run.samples.begin() + static_cast<std::ptrdiff_t>(begin),
                     run.samples.begin() + static_cast<std::ptrdiff_t>(end));
  out.manifest.sample_count = out.samples.size();
  return out;
}

}  // namespace polishsense
