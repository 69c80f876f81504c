#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "polishsense/datagen.hpp"
#include "polishsense/error.hpp"
#include "polishsense/eval.hpp"
#include "polishsense/features.hpp"
#include "polishsense/model.hpp"
#include "polishsense/pipeline.hpp"
#include "polishsense/spectral.hpp"
#include "polishsense/surface.hpp"

namespace py = pybind11;
using namespace polishsense;

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

BandSet bands_from(const std::optional<std::vector<std::tuple<int, double, double>>>& spec) {
  if (!spec) return default_band_set();
  BandSet bands;
  for (const auto& [i, lo, hi] : *spec) bands.push_back({i, lo, hi});
  validate(bands);
  return bands;
}

std::vector<std::string> names_for(FeatureMode mode, Eigen::Index p,
                                   std::optional<std::vector<std::string>> names) {
  if (names) return *names;
  if (mode == FeatureMode::Together && p == 4) return feature_names(mode, kBandCount);
  if (mode == FeatureMode::Separate && p % 4 == 0) {
    return feature_names(mode, static_cast<std::size_t>(p / 4));
  }
  std::vector<std::string> out;
  for (Eigen::Index j = 0; j < p; ++j) out.push_back("f" + std::to_string(j));
  return out;
}

ModelSpec spec_for(const std::string& kind, std::uint64_t seed,
                   const std::map<std::string, double>& hyper) {
  ModelSpec spec = ModelSpec::defaults(parse_model_kind(kind), seed);
  for (const auto& [k, v] : hyper) spec.hyperparameters[k] = v;
  spec.validate();
  return spec;
}

py::dict report_dict(const EvalReport& r) {
  py::dict d;
  d["model"] = std::string(to_string(r.model_kind));
  d["mode"] = std::string(to_string(r.feature_mode));
  d["mae"] = r.mae;
  py::list folds;
  for (const auto& f : r.fold_predictions) folds.append(py::make_tuple(f.run_id, f.y_true, f.y_pred));
  d["folds"] = folds;
  d["per_fold_abs_error"] = r.per_fold_abs_error;
  d["feature_names"] = r.feature_names;
  if (r.importance_summary) d["importance"] = *r.importance_summary;
  else d["importance"] = py::none();
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Vibration-based surface roughness prediction";

  static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
  static py::exception<ConfigError> config_error(m, "ConfigError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      py::set_error(config_error, e.what());
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  m.def(
      "areal_roughness",
      [](const RowMatrix& heights, double pixel_area) {
        return areal_roughness(Micrograph{heights, pixel_area});
      },
      py::arg("heights"), py::arg("pixel_area") = 1.0);

  m.def(
      "moments",
      [](const std::vector<double>& x) {
        const Moments mo = moments(x);
        return py::make_tuple(mo.mean, mo.variance, mo.skewness, mo.kurtosis);
      },
      py::arg("x"), "Population (mean, variance, skewness, kurtosis).");

  m.def(
      "stft",
      [](const std::vector<double>& samples, double sample_rate_hz, double window_seconds,
         double overlap, std::size_t fft_points) {
        StftConfig cfg;
        cfg.window_seconds = window_seconds;
        cfg.overlap_fraction = overlap;
        cfg.fft_points = fft_points;
        Spectrogram s;
        {
          py::gil_scoped_release release;
          s = stft(samples, sample_rate_hz, cfg);
        }
        return py::make_tuple(RowMatrix(std::move(s.power)), s.bin_hz);
      },
      py::arg("samples"), py::arg("sample_rate_hz") = kNominalSampleRateHz,
      py::arg("window_seconds") = 1.0, py::arg("overlap") = 0.0, py::arg("fft_points") = 16384,
      "Returns (power[frames, bins], bin_hz).");

  m.def("default_band_set", [] {
    std::vector<std::tuple<int, double, double>> out;
    for (const auto& b : default_band_set()) out.emplace_back(b.index, b.f_lo, b.f_hi);
    return out;
  });

  m.def(
      "band_energy_series",
      [](const RowMatrix& power, double bin_hz,
         const std::optional<std::vector<std::tuple<int, double, double>>>& bands) {
        Spectrogram s;
        s.power = power;
        s.bin_hz = bin_hz;
        s.fft_points = static_cast<std::size_t>(2 * (power.cols() - 1));
        s.sample_rate_hz = bin_hz * static_cast<double>(s.fft_points);
        return band_energy_series(s, bands_from(bands));
      },
      py::arg("power"), py::arg("bin_hz"), py::arg("bands") = py::none());

  m.def(
      "extract_features",
      [](const Eigen::MatrixXd& energies, const std::string& mode) {
        const FeatureVector fv = extract(parse_feature_mode(mode), energies, "", 0.0);
        return py::make_tuple(fv.names, fv.values);
      },
      py::arg("energies"), py::arg("mode") = "separate", "Returns (names, values).");

  py::class_<TrainedModel>(m, "Model")
      .def_property_readonly("kind", [](const TrainedModel& t) { return std::string(to_string(t.spec.kind)); })
      .def_readonly("feature_names", &TrainedModel::feature_names)
      .def("predict",
           [](const TrainedModel& t, const Eigen::MatrixXd& x) -> Eigen::VectorXd { return predict(t, x); },
           py::arg("x"))
      .def("feature_importance", [](const TrainedModel& t) { return feature_importance(t); })
      .def("to_json", [](const TrainedModel& t) { return to_json(t); })
      .def("save", [](const TrainedModel& t, const std::filesystem::path& p) { save_model(t, p); });

  m.def(
      "fit",
      [](const std::string& kind, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
         std::optional<std::vector<std::string>> feature_names, std::uint64_t seed,
         const std::map<std::string, double>& hyperparameters) {
        const ModelSpec spec = spec_for(kind, seed, hyperparameters);
        py::gil_scoped_release release;
        return fit(spec, x, y, names_for(FeatureMode::Separate, x.cols(), std::move(feature_names)));
      },
      py::arg("kind"), py::arg("x"), py::arg("y"), py::arg("feature_names") = py::none(),
      py::arg("seed") = 0, py::arg("hyperparameters") = std::map<std::string, double>{});

  m.def("load_model", [](const std::filesystem::path& p) { return load_model(p); }, py::arg("path"));
  m.def("model_from_json", [](const std::string& s) { return model_from_json(s); }, py::arg("text"));

  m.def(
      "loocv",
      [](const std::string& kind, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
         std::optional<std::vector<std::string>> run_ids, const std::string& mode,
         bool standardize, std::uint64_t seed, const std::map<std::string, double>& hyperparameters) {
        if (x.rows() != y.size()) throw ConfigError("x and y have different lengths");
        const FeatureMode fm = parse_feature_mode(mode);
        const auto names = names_for(fm, x.cols(), std::nullopt);
        std::vector<FeatureVector> rows;
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
          FeatureVector fv;
          fv.run_id = run_ids ? run_ids->at(static_cast<std::size_t>(i)) : "run_" + std::to_string(i);
          fv.mode = fm;
          fv.names = names;
          for (Eigen::Index j = 0; j < x.cols(); ++j) fv.values.push_back(x(i, j));
          fv.target = y(i);
          rows.push_back(std::move(fv));
        }
        LoocvOptions opt;
        opt.standardize = standardize;
        EvalReport r;
        {
          const ModelSpec spec = spec_for(kind, seed, hyperparameters);
          py::gil_scoped_release release;
          r = loocv(rows, spec, opt);
        }
        return report_dict(r);
      },
      py::arg("kind"), py::arg("x"), py::arg("y"), py::arg("run_ids") = py::none(),
      py::arg("mode") = "separate", py::arg("standardize") = false, py::arg("seed") = 0,
      py::arg("hyperparameters") = std::map<std::string, double>{});

  m.def(
      "gen_dataset",
      [](const std::filesystem::path& out, std::uint64_t seed, std::size_t n_short,
         std::size_t n_long, std::optional<std::filesystem::path> scenario) {
        GenOptions o;
        o.out = out;
        o.scenario = std::move(scenario);
        o.seed = seed;
        o.n_short = n_short;
        o.n_long = n_long;
        DatasetManifest d;
        {
          py::gil_scoped_release release;
          d = cmd_gen(o);
        }
        py::list runs;
        for (const auto& r : d.runs) {
          py::dict e;
          e["run_id"] = r.manifest.run_id;
          e["experiment_class"] = std::string(to_string(r.manifest.experiment_class));
          e["path"] = r.path;
          e["target"] = r.target.delta;
          runs.append(e);
        }
        return runs;
      },
      py::arg("out"), py::arg("seed") = 42, py::arg("n_short") = 18, py::arg("n_long") = 6,
      py::arg("scenario") = py::none());

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::vector<std::string> full = {"polishsense"};
        full.insert(full.end(), args.begin(), args.end());
        std::vector<const char*> argv;
        for (const auto& a : full) argv.push_back(a.c_str());
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs a CLI command in-process; returns (exit_code, stdout, stderr).");
}
