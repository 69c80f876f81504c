#include "polishsense/pipeline.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <CLI11.hpp>
#include <algorithm>
#include <mutex>
#include <numeric>
#include <ostream>

#include "polishsense/error.hpp"
#include "polishsense/io.hpp"
#include "polishsense/parallel.hpp"

namespace polishsense {

namespace fs = std::filesystem;

ScenarioConfig resolve_scenario(const GenOptions& o) {
  ScenarioConfig cfg = o.scenario ? load_scenario(*o.scenario) : ScenarioConfig{};
  if (o.bands) cfg.band_set = load_band_set(*o.bands);
  if (o.seed) cfg.seed = *o.seed;
  if (o.n_short) cfg.n_short = *o.n_short;
  if (o.n_long) cfg.n_long = *o.n_long;
  cfg.validate();
  return cfg;
}

DatasetManifest cmd_gen(const GenOptions& options) {
  return gen_dataset(resolve_scenario(options), options.out);
}

Eigen::MatrixXd run_band_energies(const fs::path& run_dir, const BandSet& bands,
                                  const StftConfig& stft_cfg) {
  const VibrationRun run = truncate_run(load_run(run_dir));
  return band_energy_series(stft(run, stft_cfg), bands);
}

fs::path feature_csv_path(const fs::path& dir, FeatureMode mode) {
  return dir / fmt::format("features_{}.csv", to_string(mode));
}

namespace {

BandSet resolve_bands(const std::optional<fs::path>& explicit_path, const fs::path& data_dir) {
  if (explicit_path) return load_band_set(*explicit_path);
  if (const fs::path p = data_dir / "bands.json"; fs::exists(p)) return load_band_set(p);
  return default_band_set();
}

}  // namespace

std::vector<FeatureTable> cmd_extract(const ExtractOptions& o) {
  if (o.modes.empty()) throw ConfigError("no feature mode requested");
  const DatasetManifest dataset = load_dataset_manifest(o.data);
  if (dataset.runs.empty()) throw Error("dataset manifest lists no runs");
  const BandSet bands = resolve_bands(o.bands, o.data);
  (void)frame_geometry(o.stft, kNominalSampleRateHz);

  const std::size_t n = dataset.runs.size();
  std::vector<std::vector<FeatureVector>> per_mode(o.modes.size(), std::vector<FeatureVector>(n));
  std::vector<std::string> failures(n);
  parallel_for(n, [&](std::size_t i) {
    const auto& entry = dataset.runs[i];
    try {
      const fs::path dir = o.data / entry.path;
      const RoughnessTarget target =
          roughness_delta(load_micrograph(dir / "before.csv"), load_micrograph(dir / "after.csv"),
                          entry.manifest.run_id);
      const Eigen::MatrixXd energies = run_band_energies(dir, bands, o.stft);
      for (std::size_t m = 0; m < o.modes.size(); ++m) {
        per_mode[m][i] = extract(o.modes[m], energies, entry.manifest.run_id, target.delta);
      }
    } catch (const std::exception& e) {
      failures[i] = fmt::format("run '{}': {}", entry.manifest.run_id, e.what());
    }
  });
  std::vector<std::string> errors;
  for (auto& f : failures) {
    if (!f.empty()) errors.push_back(std::move(f));
  }
  if (!errors.empty()) {
    throw Error(fmt::format("{} of {} runs failed:\n  {}", errors.size(), n, fmt::join(errors, "\n  ")));
  }

  const fs::path out = o.out.value_or(o.data);
  std::vector<FeatureTable> tables;
  for (std::size_t m = 0; m < o.modes.size(); ++m) {
    tables.push_back(make_table(std::move(per_mode[m])));
    save_feature_csv(tables.back(), feature_csv_path(out, o.modes[m]));
  }
  return tables;
}

EvaluateResult cmd_evaluate(const EvaluateOptions& o) {
  if (o.models.empty()) throw ConfigError("no model requested");
  if (o.modes.empty()) throw ConfigError("no feature mode requested");
  const fs::path out = o.out.value_or(o.features);
  EvaluateResult result;
  for (const auto mode : o.modes) {
    const fs::path csv = feature_csv_path(o.features, mode);
    if (!fs::exists(csv)) throw Error(fmt::format("missing feature file '{}'", csv.string()));
    const FeatureTable table = load_feature_csv(csv);
    for (const auto kind : o.models) {
      const ModelSpec spec = ModelSpec::defaults(kind, o.seed);
      LoocvOptions lo;
      lo.standardize = o.standardize;
      EvalReport report = loocv(table, spec, lo);
      const std::string stem = fmt::format("{}_{}", to_string(kind), to_string(mode));
      io::write_atomic(out / "reports" / (stem + ".json"), to_json(report));

      Eigen::MatrixXd x = table.design();
      std::optional<Standardizer> scaling;
      if (o.standardize) {
        scaling = Standardizer::fit(x);
        x = scaling->apply(x);
      }
      TrainedModel model = fit(spec, x, table.targets(), table.names);
      model.input_scaling = scaling;
      save_model(model, out / "models" / (stem + ".json"));
      result.reports.push_back(std::move(report));
    }
  }
  result.table = results_table(result.reports);
  io::write_atomic(out / "results.csv", result.table.to_csv());
  io::write_atomic(out / "results.txt", result.table.to_text());
  return result;
}

PredictResult cmd_predict(const PredictOptions& o) {
  if (o.feature_row.has_value() == o.run.has_value()) {
    throw ConfigError("predict needs exactly one of --features or --run");
  }
  const TrainedModel model = load_model(o.model);
  Eigen::VectorXd x;
  if (o.feature_row) {
    const auto fields = io::split(*o.feature_row, ',');
    if (fields.size() != model.feature_names.size()) {
      throw ConfigError(fmt::format("dimension mismatch: model expects {} features, got {}",
                                    model.feature_names.size(), fields.size()));
    }
    x.resize(static_cast<Eigen::Index>(fields.size()));
    for (std::size_t i = 0; i < fields.size(); ++i) {
      x(static_cast<Eigen::Index>(i)) = io::parse_double(fields[i], "--features");
    }
  } else {
    const BandSet bands = o.bands ? load_band_set(*o.bands) : default_band_set();
    const Eigen::MatrixXd energies = run_band_energies(*o.run, bands, o.stft);
    const FeatureMode mode = model.feature_names.size() == 4 ? FeatureMode::Together
                                                             : FeatureMode::Separate;
    const FeatureVector fv = extract(mode, energies, o.run->filename().string(), 0.0);
    if (fv.names != model.feature_names) {
      throw ConfigError("dimension mismatch: run features do not match the model's feature names");
    }
    x = Eigen::Map<const Eigen::VectorXd>(fv.values.data(), static_cast<Eigen::Index>(fv.values.size()));
  }
  PredictResult r;
  r.prediction = predict(model, x);
  if (has_feature_importance(model.spec.kind)) {
    const Eigen::VectorXd imp = feature_importance(model);
    std::vector<std::size_t> order(static_cast<std::size_t>(imp.size()));
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return imp(static_cast<Eigen::Index>(a)) > imp(static_cast<Eigen::Index>(b));
    });
    for (std::size_t i = 0; i < std::min<std::size_t>(3, order.size()); ++i) {
      r.top_features.emplace_back(model.feature_names[order[i]], imp(static_cast<Eigen::Index>(order[i])));
    }
  }
  return r;
}

namespace {

std::vector<FeatureMode> parse_modes(const std::string& s) {
  if (s == "both") return {FeatureMode::Together, FeatureMode::Separate};
  return {parse_feature_mode(s)};
}

std::vector<ModelKind> parse_models(const std::vector<std::string>& names) {
  std::vector<ModelKind> kinds;
  for (const auto& n : names) {
    if (n == "all") return {kReportOrder.begin(), kReportOrder.end()};
    const ModelKind k = parse_model_kind(n);
    if (std::find(kinds.begin(), kinds.end(), k) == kinds.end()) kinds.push_back(k);
  }
  return kinds;
}

void add_stft_flags(CLI::App& cmd, StftConfig& cfg) {
  cmd.add_option("--window-seconds", cfg.window_seconds, "STFT window length in seconds");
  cmd.add_option("--fft-points", cfg.fft_points, "FFT length (>= window samples)");
  cmd.add_option("--overlap", cfg.overlap_fraction, "Fractional window overlap in [0, 1)");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Vibration-based surface roughness prediction for capsule polishing runs",
               "polishsense"};
  app.require_subcommand(1);

  GenOptions gen;
  std::string gen_scenario, gen_bands;
  std::uint64_t gen_seed = 0;
  std::size_t gen_short = 0, gen_long = 0;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic polishing campaign");
  auto* seed_opt = gen_cmd->add_option("--seed", gen_seed, "Scenario seed");
  auto* short_opt = gen_cmd->add_option("--n-short", gen_short, "Number of 6-minute runs");
  auto* long_opt = gen_cmd->add_option("--n-long", gen_long, "Number of 12-hour runs");
  gen_cmd->add_option("--config", gen_scenario, "Scenario JSON file");
  gen_cmd->add_option("--bands", gen_bands, "Band set JSON file");
  gen_cmd->add_option("--out", gen.out, "Output dataset directory");

  ExtractOptions ext;
  std::string ext_mode = "both", ext_bands, ext_out;
  auto* ext_cmd = app.add_subcommand("extract", "Compute per-run feature tables");
  ext_cmd->add_option("--data", ext.data, "Dataset directory");
  ext_cmd->add_option("--mode,--modes", ext_mode, "together, separate or both");
  ext_cmd->add_option("--bands", ext_bands, "Band set JSON file");
  ext_cmd->add_option("--out", ext_out, "Output directory (default: dataset directory)");
  add_stft_flags(*ext_cmd, ext.stft);

  EvaluateOptions ev;
  std::string ev_mode = "both", ev_out;
  std::vector<std::string> ev_models{"all"};
  auto* ev_cmd = app.add_subcommand("evaluate", "Leave-one-out evaluation and results table");
  ev_cmd->add_option("--features", ev.features, "Directory holding features_<mode>.csv");
  ev_cmd->add_option("--models", ev_models, "Comma-separated model kinds or 'all'")->delimiter(',');
  ev_cmd->add_option("--mode,--modes", ev_mode, "together, separate or both");
  ev_cmd->add_flag("--standardize", ev.standardize, "z-score features within each fold");
  ev_cmd->add_option("--seed", ev.seed, "Seed for randomized models");
  ev_cmd->add_option("--out", ev_out, "Output directory (default: features directory)");

  PredictOptions pr;
  std::string pr_features, pr_run, pr_bands;
  auto* pr_cmd = app.add_subcommand("predict", "Predict the roughness change for one run");
  pr_cmd->add_option("--model", pr.model, "Persisted model JSON")->required();
  pr_cmd->add_option("--features", pr_features, "Comma-separated feature row");
  pr_cmd->add_option("--run", pr_run, "Run directory");
  pr_cmd->add_option("--bands", pr_bands, "Band set JSON file");
  add_stft_flags(*pr_cmd, pr.stft);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (gen_cmd->parsed()) {
      if (!gen_scenario.empty()) gen.scenario = gen_scenario;
      if (!gen_bands.empty()) gen.bands = gen_bands;
      if (seed_opt->count()) gen.seed = gen_seed;
      if (short_opt->count()) gen.n_short = gen_short;
      if (long_opt->count()) gen.n_long = gen_long;
      const DatasetManifest d = cmd_gen(gen);
      out << fmt::format("wrote {} runs to {}\n", d.runs.size(), gen.out.string());
    } else if (ext_cmd->parsed()) {
      ext.modes = parse_modes(ext_mode);
      if (!ext_bands.empty()) ext.bands = ext_bands;
      if (!ext_out.empty()) ext.out = ext_out;
      const auto tables = cmd_extract(ext);
      for (std::size_t m = 0; m < tables.size(); ++m) {
        out << fmt::format("{}: {} runs x {} features -> {}\n", to_string(ext.modes[m]),
                           tables[m].rows.size(), tables[m].names.size(),
                           feature_csv_path(ext.out.value_or(ext.data), ext.modes[m]).string());
      }
    } else if (ev_cmd->parsed()) {
      ev.models = parse_models(ev_models);
      ev.modes = parse_modes(ev_mode);
      if (!ev_out.empty()) ev.out = ev_out;
      const EvaluateResult r = cmd_evaluate(ev);
      out << r.table.to_text();
      for (const auto& rep : r.reports) {
        if (!rep.importance_summary || ev.models.size() != 1) continue;
        const auto& imp = *rep.importance_summary;
        out << fmt::format("importance ({}, {}):\n", to_string(rep.model_kind), to_string(rep.feature_mode));
        for (Eigen::Index j = 0; j < imp.size(); ++j) {
          if (imp(j) > 0.0) out << fmt::format("  {:<20} {:.4f}\n", rep.feature_names[j], imp(j));
        }
      }
    } else if (pr_cmd->parsed()) {
      if (!pr_features.empty()) pr.feature_row = pr_features;
      if (!pr_run.empty()) pr.run = pr_run;
      if (!pr_bands.empty()) pr.bands = pr_bands;
      const PredictResult r = cmd_predict(pr);
      out << fmt::format("prediction_nm {}\n", io::format_double(r.prediction));
      for (const auto& [name, score] : r.top_features) {
        out << fmt::format("feature {} {:.6f}\n", name, score);
      }
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace polishsense
